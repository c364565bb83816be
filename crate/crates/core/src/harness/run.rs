//! The four experiment runners. Each returns the full CSV text (header
//! included); the CLI decides where it goes. All randomness is derived
//! from the master seed by (cell, trial) coordinates, and stopping rules
//! advance in fixed-size batches, so output is byte-identical for any
//! worker count.

use crate::banded::{exact_full_rank_prob, full_rank_frequency, Regularity, Symmetry};
use crate::bounds;
use crate::codes::{run_trial, ChunkScheme, TrialOptions};
use crate::harness::config::{
    BoundsConfig, CapacityConfig, HarnessError, RankConfig, SimulateConfig,
};
use crate::network::{generate_schedule, omega_capacity, Schedule, ScheduleKind};
use crate::stats::{derive_seed, fmt_sig, wilson_interval, Z_95};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Trials dispatched between stopping-rule checks. Fixed so the rule
/// fires at the same trial count regardless of parallelism.
const BATCH: u64 = 256;

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        f()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool")
            .install(f)
    }
}

fn kind_label(kind: ScheduleKind) -> &'static str {
    match kind {
        ScheduleKind::OneInOneOut => "one-in-one-out",
        ScheduleKind::AllInAllOut => "all-in-all-out",
    }
}

#[derive(Default, Clone, Copy)]
struct CellTotals {
    trials: u64,
    failures: u64,
    per_sum: f64,
    per_sq_sum: f64,
    wasted: u64,
}

impl CellTotals {
    fn absorb(&mut self, failure: bool, per: f64, wasted: u64) {
        self.trials += 1;
        self.failures += u64::from(failure);
        self.per_sum += per;
        self.per_sq_sum += per * per;
        self.wasted += wasted;
    }

    fn per_mean_se(&self) -> (f64, f64) {
        let n = self.trials as f64;
        let mean = self.per_sum / n;
        if self.trials < 2 {
            return (mean, 0.0);
        }
        let var = ((self.per_sq_sum - n * mean * mean) / (n - 1.0)).max(0.0);
        (mean, (var / n).sqrt())
    }
}

/// MER/PER sweep over the (λ, scheme) grid, one CSV row per cell.
pub fn run_simulate(cfg: &SimulateConfig) -> Result<String, HarnessError> {
    let mut out = String::from(
        "kind,l,k,n,lambda,scheme,alpha,tau,gamma,q,trials,failures,mer,mer_lo,mer_hi,per_mean,per_se,wasted\n",
    );
    with_pool(cfg.workers, || {
        let mut cell = 0u64;
        for &lambda in &cfg.lambda_grid {
            let n = ((1.0 + lambda) * cfg.k as f64).round() as usize;
            for scheme in &cfg.schemes {
                let totals = run_cell(cfg, scheme, n, cell);
                let (per_mean, per_se) = totals.per_mean_se();
                let (mer_lo, mer_hi) = wilson_interval(totals.failures, totals.trials, Z_95);
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    kind_label(cfg.kind),
                    cfg.l,
                    cfg.k,
                    n,
                    fmt_sig(lambda, 6),
                    scheme.kind.label(),
                    scheme.alpha,
                    scheme.tau,
                    scheme.gamma,
                    scheme.q,
                    totals.trials,
                    totals.failures,
                    fmt_sig(totals.failures as f64 / totals.trials as f64, 6),
                    fmt_sig(mer_lo, 6),
                    fmt_sig(mer_hi, 6),
                    fmt_sig(per_mean, 6),
                    fmt_sig(per_se, 6),
                    totals.wasted,
                ));
                cell += 1;
            }
        }
        Ok(out)
    })
}

fn run_cell(cfg: &SimulateConfig, scheme: &ChunkScheme, n: usize, cell: u64) -> CellTotals {
    let options = TrialOptions {
        payload_len: cfg.payload_len,
        allow_empty_chunk: cfg.allow_empty_chunk,
    };
    let limit = cfg.trials.unwrap_or(cfg.max_trials);
    let mut totals = CellTotals::default();
    while totals.trials < limit {
        let batch = BATCH.min(limit - totals.trials);
        let start = totals.trials;
        let results: Vec<(bool, f64, u64)> = (start..start + batch)
            .into_par_iter()
            .map(|trial| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[cell, trial]));
                let schedule =
                    generate_schedule(cfg.kind, cfg.l, n, cfg.delivery, &mut rng);
                let outcome = run_trial(&schedule, scheme, options, &mut rng);
                (
                    !outcome.success,
                    (scheme.k - outcome.recovered.len()) as f64 / scheme.k as f64,
                    outcome.wasted,
                )
            })
            .collect();
        for (failure, per, wasted) in results {
            totals.absorb(failure, per, wasted);
        }
        if cfg.trials.is_none() && totals.failures >= cfg.target_failures {
            break;
        }
    }
    if cfg.trials.is_none() && totals.failures < cfg.target_failures {
        eprintln!(
            "warning: cell {cell} (n={n}, scheme={}) hit the max_trials cap at {} trials with {} failures (target {})",
            scheme.kind.label(),
            totals.trials,
            totals.failures,
            cfg.target_failures
        );
    }
    totals
}

/// Full-rank frequency sweep over the BRB grid, one CSV row per cell.
pub fn run_rank_experiment(cfg: &RankConfig) -> Result<String, HarnessError> {
    let mut out = String::from(
        "k,n,alpha,gamma,regularity,symmetry,trials,full_rank,freq,ci_lo,ci_hi,exact_random\n",
    );
    with_pool(cfg.workers, || {
        for (cell, spec) in cfg.cells().enumerate() {
            let spec = spec?;
            let seed = derive_seed(cfg.master_seed, &[cell as u64]);
            let est = full_rank_frequency(&spec, cfg.trials, seed)?;
            let exact = exact_full_rank_prob(spec.n_rows, spec.k)?;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                spec.k,
                spec.n_rows,
                spec.alpha,
                spec.gamma,
                match spec.regularity {
                    Regularity::Regular => "regular",
                    Regularity::Irregular => "irregular",
                },
                match spec.symmetry {
                    Symmetry::Symmetric => "symmetric",
                    Symmetry::Asymmetric => "asymmetric",
                },
                est.trials,
                est.full_rank,
                fmt_sig(est.freq, 6),
                fmt_sig(est.ci_lo, 6),
                fmt_sig(est.ci_hi, 6),
                fmt_sig(exact, 6),
            ));
        }
        Ok(out)
    })
}

/// Closed-form bound tabulation, one CSV row per (bound, n).
pub fn run_bounds(cfg: &BoundsConfig) -> Result<String, HarnessError> {
    let mut out = String::from("name,kind,n,k,l,q,d,gamma,epsilon,value,vacuous\n");
    let kind = kind_label(cfg.kind);
    let eps = fmt_sig(cfg.epsilon, 6);
    for name in &cfg.bounds {
        for &n in &cfg.n_list {
            let mut push = |name: &str, k: String, d: String, gamma: String, value: f64, vacuous: bool| {
                out.push_str(&format!(
                    "{name},{kind},{n},{k},{l},{q},{d},{gamma},{eps},{value},{vacuous}\n",
                    l = cfg.l,
                    q = cfg.q,
                    value = fmt_sig(value, 6),
                ));
            };
            match name.as_str() {
                "dense_kmax" => {
                    let v = bounds::dense_kmax(n, cfg.l, cfg.epsilon, cfg.kind)?;
                    push(name, String::new(), String::new(), String::new(), v, false);
                }
                "erasure_kmax" => {
                    let v = bounds::erasure_kmax(n, cfg.epsilon)?;
                    push(name, String::new(), String::new(), String::new(), v, false);
                }
                "cc_capacity" => {
                    let b = bounds::cc_capacity_bound(n, cfg.q, cfg.l, cfg.epsilon, cfg.kind)?;
                    push(name, String::new(), String::new(), String::new(), b.value, b.vacuous);
                }
                "cc_kmax" => {
                    let b = bounds::cc_kmax(n, cfg.q, cfg.l, cfg.epsilon, cfg.kind)?;
                    push(name, String::new(), String::new(), String::new(), b.value, b.vacuous);
                }
                "density_loss" => {
                    let v = bounds::density_loss_bound(n, cfg.l, cfg.epsilon, cfg.kind)?;
                    push(name, String::new(), String::new(), String::new(), v, false);
                }
                "rank_tails" => {
                    let d = cfg.d.unwrap_or(n);
                    let gamma = cfg.gamma.unwrap_or(0);
                    let k = cfg.k.unwrap_or(d);
                    let b = bounds::rank_tail_bounds(d, gamma, k, n)?;
                    for (sub, v) in [
                        ("rank_tails_lemma3", b.lemma3),
                        ("rank_tails_lemma6", b.lemma6),
                        ("rank_tails_lemma7", b.lemma7),
                    ] {
                        push(sub, k.to_string(), d.to_string(), gamma.to_string(), v, false);
                    }
                }
                _ => unreachable!("names validated in config"),
            }
        }
    }
    Ok(out)
}

/// Measured ω-capacities against the closed-form lower bound, one CSV row
/// per (schedule, chunk).
pub fn run_capacity(cfg: &CapacityConfig) -> Result<String, HarnessError> {
    let mut out = String::from("kind,l,n,q,schedule,omega,measured,bound,vacuous\n");

    if let Some(path) = &cfg.schedule_file {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let (schedule, assignment) = Schedule::from_text(&text)?;
        let assignment = assignment.ok_or_else(|| HarnessError::Invalid {
            key: "schedule_file".to_string(),
            reason: "schedule text lacks the chunk column".to_string(),
        })?;
        let q = assignment.iter().max().unwrap() + 1;
        let bound =
            bounds::cc_capacity_bound(schedule.n, q, schedule.l, cfg.epsilon, schedule.kind)?;
        for omega in 0..q {
            let measured = omega_capacity(&schedule, &assignment, omega)?;
            check_bound(cfg, measured, &bound)?;
            out.push_str(&capacity_row(schedule.kind, schedule.l, schedule.n, q, 0, omega, measured, &bound));
        }
        return Ok(out);
    }

    let bound = bounds::cc_capacity_bound(cfg.n, cfg.q, cfg.l, cfg.epsilon, cfg.kind)?;
    let rows: Vec<Vec<usize>> = with_pool(cfg.workers, || {
        (0..cfg.schedules)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.master_seed, &[s]));
                let schedule = generate_schedule(cfg.kind, cfg.l, cfg.n, cfg.delivery, &mut rng);
                let assignment: Vec<usize> = (0..schedule.events.len())
                    .map(|_| rng.gen_range(0..cfg.q))
                    .collect();
                (0..cfg.q)
                    .map(|omega| omega_capacity(&schedule, &assignment, omega).expect("assignment is total"))
                    .collect()
            })
            .collect()
    });
    for (s, per_chunk) in rows.iter().enumerate() {
        for (omega, &measured) in per_chunk.iter().enumerate() {
            check_bound(cfg, measured, &bound)?;
            out.push_str(&capacity_row(cfg.kind, cfg.l, cfg.n, cfg.q, s as u64, omega, measured, &bound));
        }
    }
    Ok(out)
}

fn check_bound(
    cfg: &CapacityConfig,
    measured: usize,
    bound: &bounds::BoundValue,
) -> Result<(), HarnessError> {
    if cfg.validate && !bound.vacuous && (measured as f64) < bound.value {
        return Err(HarnessError::Invalid {
            key: "validate".to_string(),
            reason: format!("measured capacity {measured} below bound {}", bound.value),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn capacity_row(
    kind: ScheduleKind,
    l: usize,
    n: usize,
    q: usize,
    schedule: u64,
    omega: usize,
    measured: usize,
    bound: &bounds::BoundValue,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        kind_label(kind),
        l,
        n,
        q,
        schedule,
        omega,
        measured,
        fmt_sig(bound.value, 6),
        bound.vacuous,
    )
}

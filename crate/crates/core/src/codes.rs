//! Dense, chunked (CC) and overlapped-chunked (OCC) coding over a
//! schedule: per-node buffers, random GF(2) encoding, sink decoding, and
//! MER/PER evaluation.

use crate::gf2::{recoverable_columns, solve_extended, BitMatrix, GEVector, Payload};
use crate::network::Schedule;
use crate::stats::{mean_and_se, wilson_interval, Z_95};
use rand::Rng;

/// Attempts to redraw coefficients before a zero encoding vector is
/// emitted anyway (and counted as wasted).
pub const REGEN_BUDGET: usize = 32;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CodesError {
    #[error("cc requires alpha | k (alpha={alpha}, k={k})")]
    CcDivisibility { alpha: usize, k: usize },
    #[error("occ requires tau >= 2 (got {tau})")]
    OccTauRange { tau: usize },
    #[error("occ requires tau | alpha (tau={tau}, alpha={alpha})")]
    OccTauAlpha { tau: usize, alpha: usize },
    #[error("occ requires (alpha/tau) | k (alpha={alpha}, tau={tau}, k={k})")]
    OccStepDivisibility { alpha: usize, tau: usize, k: usize },
    #[error("alpha must satisfy 1 <= alpha <= k (alpha={alpha}, k={k})")]
    AlphaRange { alpha: usize, k: usize },
    #[error("no outcomes to evaluate")]
    NoOutcomes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Dense,
    Cc,
    Occ,
}

impl SchemeKind {
    pub fn label(&self) -> &'static str {
        match self {
            SchemeKind::Dense => "dense",
            SchemeKind::Cc => "cc",
            SchemeKind::Occ => "occ",
        }
    }
}

/// A chunking of the k message packets into q apertures of size α with
/// overlap γ. Dense is the single full-width chunk; CC has disjoint
/// blocks (γ=0); OCC overlaps contiguously end-around with
/// γ = α(τ−1)/τ and q = kτ/α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkScheme {
    pub kind: SchemeKind,
    pub k: usize,
    pub q: usize,
    pub alpha: usize,
    pub gamma: usize,
    pub tau: usize,
    apertures: Vec<Vec<usize>>,
}

impl ChunkScheme {
    pub fn dense(k: usize) -> Result<ChunkScheme, CodesError> {
        Ok(ChunkScheme {
            kind: SchemeKind::Dense,
            k,
            q: 1,
            alpha: k,
            gamma: 0,
            tau: 1,
            apertures: vec![(0..k).collect()],
        })
    }

    pub fn cc(k: usize, alpha: usize) -> Result<ChunkScheme, CodesError> {
        if alpha == 0 || alpha > k {
            return Err(CodesError::AlphaRange { alpha, k });
        }
        if k % alpha != 0 {
            return Err(CodesError::CcDivisibility { alpha, k });
        }
        let q = k / alpha;
        let apertures = (0..q)
            .map(|w| (w * alpha..(w + 1) * alpha).collect())
            .collect();
        Ok(ChunkScheme {
            kind: SchemeKind::Cc,
            k,
            q,
            alpha,
            gamma: 0,
            tau: 1,
            apertures,
        })
    }

    pub fn occ(k: usize, alpha: usize, tau: usize) -> Result<ChunkScheme, CodesError> {
        if alpha == 0 || alpha > k {
            return Err(CodesError::AlphaRange { alpha, k });
        }
        if tau < 2 {
            return Err(CodesError::OccTauRange { tau });
        }
        if alpha % tau != 0 {
            return Err(CodesError::OccTauAlpha { tau, alpha });
        }
        let step = alpha / tau; // = α − γ
        if k % step != 0 {
            return Err(CodesError::OccStepDivisibility { alpha, tau, k });
        }
        let gamma = alpha - step;
        let q = k / step;
        let apertures = (0..q)
            .map(|w| (0..alpha).map(|j| (w * step + j) % k).collect())
            .collect();
        Ok(ChunkScheme {
            kind: SchemeKind::Occ,
            k,
            q,
            alpha,
            gamma,
            tau,
            apertures,
        })
    }

    pub fn apertures(&self) -> &[Vec<usize>] {
        &self.apertures
    }

    pub fn aperture(&self, omega: usize) -> &[usize] {
        &self.apertures[omega]
    }
}

/// Per-chunk receive buffers of one interior node (or the sink).
#[derive(Debug, Clone)]
pub struct NodeState {
    buffers: Vec<Vec<(GEVector, Option<Payload>)>>,
}

impl NodeState {
    pub fn new(q: usize) -> Self {
        NodeState {
            buffers: vec![Vec::new(); q],
        }
    }

    pub fn receive(&mut self, omega: usize, gev: GEVector, payload: Option<Payload>) {
        self.buffers[omega].push((gev, payload));
    }

    pub fn buffer(&self, omega: usize) -> &[(GEVector, Option<Payload>)] {
        &self.buffers[omega]
    }

    fn eligible_chunks(&self) -> Vec<usize> {
        (0..self.buffers.len())
            .filter(|&w| !self.buffers[w].is_empty())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct EncodedPacket {
    pub omega: usize,
    pub gev: GEVector,
    pub payload: Option<Payload>,
    /// Zero encoding vector emitted after the regeneration budget ran out
    /// (or an empty chunk was drawn under the allow-empty policy).
    pub wasted: bool,
}

/// Where a packet is encoded: the source holds all k messages from time
/// zero; an interior node combines what it has received so far.
pub enum EncodeOrigin<'a> {
    Source { messages: Option<&'a [Payload]> },
    Interior(&'a NodeState),
}

/// Draw a chunk and emit one coded packet: ω uniform over eligible chunks
/// (every chunk at the source; nonempty buffers at an interior node, or
/// all of them when `allow_empty_chunk`), GEV an i.u.d. combination of the
/// available ω-packets, redrawn up to [`REGEN_BUDGET`] times if zero.
pub fn encode_packet(
    origin: EncodeOrigin,
    scheme: &ChunkScheme,
    allow_empty_chunk: bool,
    payload_len: Option<usize>,
    rng: &mut impl Rng,
) -> EncodedPacket {
    let omega = match &origin {
        EncodeOrigin::Source { .. } => rng.gen_range(0..scheme.q),
        EncodeOrigin::Interior(state) => {
            if allow_empty_chunk {
                rng.gen_range(0..scheme.q)
            } else {
                let eligible = state.eligible_chunks();
                assert!(!eligible.is_empty(), "interior node with nothing received");
                eligible[rng.gen_range(0..eligible.len())]
            }
        }
    };
    for attempt in 0..=REGEN_BUDGET {
        let mut gev = GEVector::zero(scheme.k);
        let mut payload = payload_len.map(Payload::zero);
        match &origin {
            EncodeOrigin::Source { messages } => {
                for &j in scheme.aperture(omega) {
                    if rng.gen::<bool>() {
                        gev.set(j, true);
                        if let (Some(acc), Some(m)) = (payload.as_mut(), messages) {
                            acc.xor_assign(&m[j]);
                        }
                    }
                }
            }
            EncodeOrigin::Interior(state) => {
                for (g, p) in state.buffer(omega) {
                    if rng.gen::<bool>() {
                        gev.xor_assign(g);
                        if let (Some(acc), Some(p)) = (payload.as_mut(), p.as_ref()) {
                            acc.xor_assign(p);
                        }
                    }
                }
            }
        }
        if !gev.is_zero() || attempt == REGEN_BUDGET {
            let wasted = gev.is_zero();
            return EncodedPacket {
                omega,
                gev,
                payload,
                wasted,
            };
        }
    }
    unreachable!()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    pub success: bool,
    /// Per-chunk aperture-restricted ranks (CC only).
    pub chunk_ranks: Option<Vec<usize>>,
    /// Message indices the sink can recover.
    pub recovered: Vec<usize>,
    pub n_received: usize,
    /// In payload mode: whether the decoded bytes match the originals
    /// (set only on success).
    pub payload_verified: Option<bool>,
    /// Zero-GEV packets emitted during the trial.
    pub wasted: u64,
}

/// What the sink saw: one row per delivered packet, with its chunk tag.
#[derive(Debug, Clone)]
pub struct SinkView {
    pub q_t: BitMatrix,
    pub chunk_of_row: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrialOptions {
    pub payload_len: Option<usize>,
    pub allow_empty_chunk: bool,
}

/// One full transmission over the schedule, deterministic given the rng.
pub fn run_trial(
    schedule: &Schedule,
    scheme: &ChunkScheme,
    options: TrialOptions,
    rng: &mut impl Rng,
) -> TrialOutcome {
    run_trial_detailed(schedule, scheme, options, rng).0
}

pub fn run_trial_detailed(
    schedule: &Schedule,
    scheme: &ChunkScheme,
    options: TrialOptions,
    rng: &mut impl Rng,
) -> (TrialOutcome, SinkView) {
    let l = schedule.l;
    let payload_len = options.payload_len.map(|len| len.max(1));
    let messages: Option<Vec<Payload>> =
        payload_len.map(|len| (0..scheme.k).map(|_| Payload::random(len, rng)).collect());

    // interior nodes 1..l-1; the sink collects rows directly
    let mut nodes: Vec<NodeState> = (0..l).map(|_| NodeState::new(scheme.q)).collect();
    let mut in_flight: Vec<Option<EncodedPacket>> = vec![None; schedule.events.len()];
    let mut q_t = BitMatrix::zero(0, scheme.k);
    let mut sink_payloads: Vec<Option<Payload>> = Vec::new();
    let mut chunk_of_row = Vec::new();
    let mut wasted = 0u64;

    let groups = schedule.deliveries_by_position();
    for (pos, event) in schedule.events.iter().enumerate() {
        let origin = if event.link == 1 {
            EncodeOrigin::Source {
                messages: messages.as_deref(),
            }
        } else {
            EncodeOrigin::Interior(&nodes[event.link - 1])
        };
        let packet = encode_packet(origin, scheme, options.allow_empty_chunk, payload_len, rng);
        wasted += u64::from(packet.wasted);
        in_flight[pos] = Some(packet);
        for &idx in &groups[pos] {
            let p = in_flight[idx].take().expect("delivery before transmit");
            let link = schedule.events[idx].link;
            if link == l {
                q_t.push_row(p.gev);
                sink_payloads.push(p.payload);
                chunk_of_row.push(p.omega);
            } else {
                nodes[link].receive(p.omega, p.gev, p.payload);
            }
        }
    }
    debug_assert_eq!(q_t.n_rows(), schedule.n);

    let (success, chunk_ranks, recovered) = match scheme.kind {
        SchemeKind::Cc => {
            let mut ranks = Vec::with_capacity(scheme.q);
            let mut recovered = Vec::new();
            for omega in 0..scheme.q {
                let rows: Vec<GEVector> = (0..q_t.n_rows())
                    .filter(|&r| chunk_of_row[r] == omega)
                    .map(|r| q_t.row(r).clone())
                    .collect();
                let chunk = BitMatrix::from_rows(rows, scheme.k).select_columns(scheme.aperture(omega));
                let rank = chunk.rank();
                ranks.push(rank);
                if rank == scheme.alpha {
                    recovered.extend_from_slice(scheme.aperture(omega));
                }
            }
            let success = ranks.iter().all(|&r| r == scheme.alpha);
            // disjoint apertures make the per-chunk and joint criteria agree
            debug_assert_eq!(success, q_t.rank() == scheme.k);
            recovered.sort_unstable();
            (success, Some(ranks), recovered)
        }
        SchemeKind::Dense | SchemeKind::Occ => {
            let success = q_t.rank() == scheme.k;
            let recovered = recoverable_columns(&q_t);
            (success, None, recovered)
        }
    };

    let payload_verified = match (&messages, success) {
        (Some(msgs), true) => {
            let y: Vec<Payload> = sink_payloads
                .iter()
                .map(|p| p.clone().expect("payload mode rows carry payloads"))
                .collect();
            let solved = solve_extended(&q_t, &y).expect("dimensions agree");
            Some(solved.map(|x| x == *msgs).unwrap_or(false))
        }
        _ => None,
    };

    (
        TrialOutcome {
            success,
            chunk_ranks,
            recovered,
            n_received: q_t.n_rows(),
            payload_verified,
            wasted,
        },
        SinkView { q_t, chunk_of_row },
    )
}

/// MER/PER summary of a batch of trials of the same cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSummary {
    pub trials: u64,
    pub failures: u64,
    pub mer: f64,
    pub mer_lo: f64,
    pub mer_hi: f64,
    pub per_mean: f64,
    pub per_se: f64,
    pub wasted: u64,
}

pub fn evaluate(outcomes: &[TrialOutcome], k: usize) -> Result<EvalSummary, CodesError> {
    if outcomes.is_empty() {
        return Err(CodesError::NoOutcomes);
    }
    let trials = outcomes.len() as u64;
    let failures = outcomes.iter().filter(|o| !o.success).count() as u64;
    let mer = failures as f64 / trials as f64;
    let (mer_lo, mer_hi) = wilson_interval(failures, trials, Z_95);
    let (per_mean, per_se) = mean_and_se(
        outcomes
            .iter()
            .map(|o| (k - o.recovered.len()) as f64 / k as f64),
    );
    Ok(EvalSummary {
        trials,
        failures,
        mer,
        mer_lo,
        mer_hi,
        per_mean,
        per_se,
        wasted: outcomes.iter().map(|o| o.wasted).sum(),
    })
}

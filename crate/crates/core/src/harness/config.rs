//! Flat `key = value` experiment configuration with field-level
//! validation. Lists are comma-separated; `#` starts a comment.

use crate::banded::{Regularity, Symmetry};
use crate::codes::ChunkScheme;
use crate::network::{DeliveryOrder, ScheduleKind};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("config key `{0}` appears twice")]
    DuplicateKey(String),
    #[error("config key `{0}` is required")]
    MissingKey(String),
    #[error("config key `{key}`: cannot parse {value:?} as {wanted}")]
    BadValue {
        key: String,
        value: String,
        wanted: &'static str,
    },
    #[error("config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Scheme(#[from] crate::codes::CodesError),
    #[error(transparent)]
    Banded(#[from] crate::banded::BandedError),
    #[error(transparent)]
    Bounds(#[from] crate::bounds::BoundsError),
    #[error(transparent)]
    Network(#[from] crate::network::NetworkError),
}

/// The parsed but untyped key=value file.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    map: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig, HarnessError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::Syntax {
                    line: i + 1,
                    text: raw.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if map.insert(key.clone(), value).is_some() {
                return Err(HarnessError::DuplicateKey(key));
            }
        }
        Ok(RawConfig { map })
    }

    pub fn from_file(path: &std::path::Path) -> Result<RawConfig, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        RawConfig::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.map.insert(key.to_string(), value);
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<(), HarnessError> {
        for key in self.map.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(HarnessError::UnknownKey(key.clone()));
            }
        }
        Ok(())
    }

    fn get<T: FromStr>(&self, key: &str, wanted: &'static str) -> Result<Option<T>, HarnessError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| HarnessError::BadValue {
                key: key.to_string(),
                value: v.clone(),
                wanted,
            }),
        }
    }

    fn require<T: FromStr>(&self, key: &str, wanted: &'static str) -> Result<T, HarnessError> {
        self.get(key, wanted)?
            .ok_or_else(|| HarnessError::MissingKey(key.to_string()))
    }

    fn get_list<T: FromStr>(&self, key: &str, wanted: &'static str) -> Result<Option<Vec<T>>, HarnessError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim().parse::<T>().map_err(|_| HarnessError::BadValue {
                        key: key.to_string(),
                        value: item.trim().to_string(),
                        wanted,
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    fn require_list<T: FromStr>(&self, key: &str, wanted: &'static str) -> Result<Vec<T>, HarnessError> {
        self.get_list(key, wanted)?
            .ok_or_else(|| HarnessError::MissingKey(key.to_string()))
    }

    fn get_raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }
}

fn parse_kind(key: &str, value: &str) -> Result<ScheduleKind, HarnessError> {
    match value {
        "one-in-one-out" => Ok(ScheduleKind::OneInOneOut),
        "all-in-all-out" => Ok(ScheduleKind::AllInAllOut),
        _ => Err(HarnessError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            wanted: "one-in-one-out | all-in-all-out",
        }),
    }
}

fn parse_delivery(key: &str, value: &str) -> Result<DeliveryOrder, HarnessError> {
    match value {
        "inorder" => Ok(DeliveryOrder::InOrder),
        "permuted" => Ok(DeliveryOrder::RandomPermutation),
        _ => Err(HarnessError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            wanted: "inorder | permuted",
        }),
    }
}

/// `dense`, `cc:ALPHA`, or `occ:ALPHA:TAU`.
fn parse_scheme(k: usize, text: &str) -> Result<ChunkScheme, HarnessError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || HarnessError::BadValue {
        key: "schemes".to_string(),
        value: text.to_string(),
        wanted: "dense | cc:ALPHA | occ:ALPHA:TAU",
    };
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    match (parts.as_slice(), parts[0].trim()) {
        ([_], "dense") => Ok(ChunkScheme::dense(k)?),
        ([_, a], "cc") => Ok(ChunkScheme::cc(k, num(a)?)?),
        ([_, a, t], "occ") => Ok(ChunkScheme::occ(k, num(a)?, num(t)?)?),
        _ => Err(bad()),
    }
}

/// CLI flag overrides applied on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub target_failures: Option<u64>,
    pub max_trials: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub payload_len: Option<usize>,
    pub allow_empty_chunk: bool,
    pub delivery: Option<DeliveryOrder>,
}

impl Overrides {
    fn apply(&self, raw: &mut RawConfig) {
        if let Some(v) = self.seed {
            raw.set("seed", v.to_string());
        }
        if let Some(v) = self.trials {
            raw.set("trials", v.to_string());
        }
        if let Some(v) = self.target_failures {
            raw.set("target_failures", v.to_string());
        }
        if let Some(v) = self.max_trials {
            raw.set("max_trials", v.to_string());
        }
        if let Some(v) = self.workers {
            raw.set("workers", v.to_string());
        }
        if let Some(v) = &self.out {
            raw.set("out", v.display().to_string());
        }
        if let Some(v) = self.payload_len {
            raw.set("payload_len", v.to_string());
        }
        if self.allow_empty_chunk {
            raw.set("allow_empty_chunk", "true".to_string());
        }
        if let Some(v) = self.delivery {
            let s = match v {
                DeliveryOrder::InOrder => "inorder",
                DeliveryOrder::RandomPermutation => "permuted",
            };
            raw.set("delivery", s.to_string());
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulateConfig {
    pub kind: ScheduleKind,
    pub l: usize,
    pub k: usize,
    pub lambda_grid: Vec<f64>,
    pub schemes: Vec<ChunkScheme>,
    pub delivery: DeliveryOrder,
    pub payload_len: Option<usize>,
    pub allow_empty_chunk: bool,
    /// Fixed trial count; when unset, run to `target_failures` failures.
    pub trials: Option<u64>,
    pub target_failures: u64,
    pub max_trials: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl SimulateConfig {
    pub fn from_raw(mut raw: RawConfig, overrides: &Overrides) -> Result<Self, HarnessError> {
        overrides.apply(&mut raw);
        raw.check_keys(&[
            "kind", "l", "k", "lambda_grid", "schemes", "delivery", "payload_len",
            "allow_empty_chunk", "trials", "target_failures", "max_trials", "seed", "workers",
            "out",
        ])?;
        let k: usize = raw.require("k", "positive integer")?;
        let l: usize = raw.require("l", "positive integer")?;
        if k == 0 || l == 0 {
            return Err(HarnessError::Invalid {
                key: if k == 0 { "k" } else { "l" }.to_string(),
                reason: "must be >= 1".to_string(),
            });
        }
        let lambda_grid: Vec<f64> = raw.require_list("lambda_grid", "real number")?;
        for &lambda in &lambda_grid {
            if lambda < 0.0 || !(((1.0 + lambda) * k as f64).round() >= 1.0) {
                return Err(HarnessError::Invalid {
                    key: "lambda_grid".to_string(),
                    reason: format!("overhead {lambda} is not a nonnegative real"),
                });
            }
        }
        let schemes = raw
            .require_list::<String>("schemes", "scheme spec")?
            .iter()
            .map(|s| parse_scheme(k, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SimulateConfig {
            kind: parse_kind("kind", raw.get_raw("kind").ok_or_else(|| HarnessError::MissingKey("kind".into()))?)?,
            l,
            k,
            lambda_grid,
            schemes,
            delivery: raw
                .get_raw("delivery")
                .map(|v| parse_delivery("delivery", v))
                .transpose()?
                .unwrap_or(DeliveryOrder::InOrder),
            payload_len: raw.get("payload_len", "positive integer")?,
            allow_empty_chunk: raw.get("allow_empty_chunk", "bool")?.unwrap_or(false),
            trials: raw.get("trials", "positive integer")?,
            target_failures: raw.get("target_failures", "positive integer")?.unwrap_or(1000),
            max_trials: raw.get("max_trials", "positive integer")?.unwrap_or(1_000_000),
            master_seed: raw.get("seed", "u64")?.unwrap_or(0),
            workers: raw.get("workers", "integer")?.unwrap_or(0),
            out: raw.get::<String>("out", "path")?.map(PathBuf::from),
        })
    }
}

#[derive(Debug, Clone)]
pub struct RankConfig {
    pub k_list: Vec<usize>,
    /// Extra rows m = n − k.
    pub m_list: Vec<usize>,
    pub alpha_list: Vec<usize>,
    pub gamma_list: Vec<usize>,
    pub regularity: Regularity,
    pub symmetry: Symmetry,
    pub trials: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl RankConfig {
    pub fn from_raw(mut raw: RawConfig, overrides: &Overrides) -> Result<Self, HarnessError> {
        overrides.apply(&mut raw);
        raw.check_keys(&[
            "k_list", "m_list", "alpha_list", "gamma_list", "regularity", "symmetry", "trials",
            "seed", "workers", "out",
        ])?;
        let regularity = match raw.get_raw("regularity").unwrap_or("irregular") {
            "regular" => Regularity::Regular,
            "irregular" => Regularity::Irregular,
            v => {
                return Err(HarnessError::BadValue {
                    key: "regularity".to_string(),
                    value: v.to_string(),
                    wanted: "regular | irregular",
                })
            }
        };
        let symmetry = match raw.get_raw("symmetry").unwrap_or("symmetric") {
            "symmetric" => Symmetry::Symmetric,
            "asymmetric" => Symmetry::Asymmetric,
            v => {
                return Err(HarnessError::BadValue {
                    key: "symmetry".to_string(),
                    value: v.to_string(),
                    wanted: "symmetric | asymmetric",
                })
            }
        };
        let cfg = RankConfig {
            k_list: raw.require_list("k_list", "positive integer")?,
            m_list: raw.require_list("m_list", "integer")?,
            alpha_list: raw.require_list("alpha_list", "positive integer")?,
            gamma_list: raw.require_list("gamma_list", "integer")?,
            regularity,
            symmetry,
            trials: raw.get("trials", "positive integer")?.unwrap_or(10_000),
            master_seed: raw.get("seed", "u64")?.unwrap_or(0),
            workers: raw.get("workers", "integer")?.unwrap_or(0),
            out: raw.get::<String>("out", "path")?.map(PathBuf::from),
        };
        // validate every cell up front so no work starts on a bad grid
        for spec in cfg.cells() {
            spec?;
        }
        Ok(cfg)
    }

    /// All (spec) cells in deterministic sweep order.
    pub fn cells(
        &self,
    ) -> impl Iterator<Item = Result<crate::banded::BandedSpec, crate::banded::BandedError>> + '_
    {
        self.k_list.iter().flat_map(move |&k| {
            self.m_list.iter().flat_map(move |&m| {
                self.alpha_list.iter().flat_map(move |&alpha| {
                    self.gamma_list.iter().map(move |&gamma| {
                        crate::banded::BandedSpec::new(
                            k + m,
                            k,
                            alpha,
                            gamma,
                            self.regularity,
                            self.symmetry,
                        )
                    })
                })
            })
        })
    }
}

#[derive(Debug, Clone)]
pub struct BoundsConfig {
    pub bounds: Vec<String>,
    pub kind: ScheduleKind,
    pub n_list: Vec<usize>,
    pub l: usize,
    pub q: usize,
    pub epsilon: f64,
    pub d: Option<usize>,
    pub gamma: Option<usize>,
    pub k: Option<usize>,
    pub out: Option<PathBuf>,
}

pub const BOUND_NAMES: &[&str] = &[
    "dense_kmax",
    "erasure_kmax",
    "cc_capacity",
    "cc_kmax",
    "density_loss",
    "rank_tails",
];

impl BoundsConfig {
    pub fn from_raw(mut raw: RawConfig, overrides: &Overrides) -> Result<Self, HarnessError> {
        overrides.apply(&mut raw);
        raw.check_keys(&[
            "bounds", "kind", "n_list", "l", "q", "epsilon", "d", "gamma", "k", "seed", "workers",
            "out",
        ])?;
        let bounds: Vec<String> = raw.require_list("bounds", "bound name")?;
        for b in &bounds {
            if !BOUND_NAMES.contains(&b.as_str()) {
                return Err(HarnessError::Invalid {
                    key: "bounds".to_string(),
                    reason: format!("unknown bound {b:?}; expected one of {BOUND_NAMES:?}"),
                });
            }
        }
        let epsilon: f64 = raw.get("epsilon", "real in (0,1]")?.unwrap_or(0.01);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(HarnessError::Invalid {
                key: "epsilon".to_string(),
                reason: format!("{epsilon} not in (0,1]"),
            });
        }
        Ok(BoundsConfig {
            bounds,
            kind: parse_kind("kind", raw.get_raw("kind").unwrap_or("one-in-one-out"))?,
            n_list: raw.require_list("n_list", "positive integer")?,
            l: raw.get("l", "positive integer")?.unwrap_or(1),
            q: raw.get("q", "positive integer")?.unwrap_or(1),
            epsilon,
            d: raw.get("d", "positive integer")?,
            gamma: raw.get("gamma", "integer")?,
            k: raw.get("k", "positive integer")?,
            out: raw.get::<String>("out", "path")?.map(PathBuf::from),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CapacityConfig {
    pub kind: ScheduleKind,
    pub l: usize,
    pub n: usize,
    pub q: usize,
    pub schedules: u64,
    pub delivery: DeliveryOrder,
    pub epsilon: f64,
    /// Measure a serialized schedule (with chunk column) instead of
    /// generating random ones.
    pub schedule_file: Option<PathBuf>,
    /// Fail when a measured capacity drops below the closed-form bound.
    pub validate: bool,
    pub master_seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
}

impl CapacityConfig {
    pub fn from_raw(mut raw: RawConfig, overrides: &Overrides) -> Result<Self, HarnessError> {
        overrides.apply(&mut raw);
        raw.check_keys(&[
            "kind", "l", "n", "q", "schedules", "delivery", "epsilon", "schedule_file",
            "validate", "seed", "workers", "out",
        ])?;
        let epsilon: f64 = raw.get("epsilon", "real in (0,1]")?.unwrap_or(0.01);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(HarnessError::Invalid {
                key: "epsilon".to_string(),
                reason: format!("{epsilon} not in (0,1]"),
            });
        }
        let schedule_file: Option<String> = raw.get("schedule_file", "path")?;
        let have_file = schedule_file.is_some();
        Ok(CapacityConfig {
            kind: parse_kind("kind", raw.get_raw("kind").unwrap_or("one-in-one-out"))?,
            l: if have_file { raw.get("l", "positive integer")?.unwrap_or(1) } else { raw.require("l", "positive integer")? },
            n: if have_file { raw.get("n", "positive integer")?.unwrap_or(1) } else { raw.require("n", "positive integer")? },
            q: raw.get("q", "positive integer")?.unwrap_or(1),
            schedules: raw.get("schedules", "positive integer")?.unwrap_or(100),
            delivery: raw
                .get_raw("delivery")
                .map(|v| parse_delivery("delivery", v))
                .transpose()?
                .unwrap_or(DeliveryOrder::InOrder),
            epsilon,
            schedule_file: schedule_file.map(PathBuf::from),
            validate: raw.get("validate", "bool")?.unwrap_or(false),
            master_seed: raw.get("seed", "u64")?.unwrap_or(0),
            workers: raw.get("workers", "integer")?.unwrap_or(0),
            out: raw.get::<String>("out", "path")?.map(PathBuf::from),
        })
    }
}

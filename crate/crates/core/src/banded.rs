//! Banded random binary (BRB) matrices: the four classes
//! (regular/irregular × symmetric/asymmetric), their full-rank frequency,
//! and the exact/asymptotic rank laws they are compared against.

use crate::gf2::BitMatrix;
use crate::stats::{derive_seed, wilson_interval, Z_95};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regularity {
    Regular,
    Irregular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Apertures wrap end-around; (α−γ) must divide k.
    Symmetric,
    /// Apertures do not wrap; (α−γ) must divide (k−γ).
    Asymmetric,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum BandedError {
    #[error("overlap gamma={gamma} must satisfy 0 <= gamma < alpha={alpha}")]
    GammaRange { gamma: usize, alpha: usize },
    #[error("symmetric spec requires (alpha - gamma) | k: alpha={alpha}, gamma={gamma}, k={k}")]
    SymmetricDivisibility { alpha: usize, gamma: usize, k: usize },
    #[error(
        "asymmetric spec requires (alpha - gamma) | (k - gamma): alpha={alpha}, gamma={gamma}, k={k}"
    )]
    AsymmetricDivisibility { alpha: usize, gamma: usize, k: usize },
    #[error("regular spec requires chi={chi} to divide n_rows={n_rows}")]
    RegularDivisibility { chi: usize, n_rows: usize },
    #[error("need k <= n (k={k}, n={n})")]
    RankLawShape { n: usize, k: usize },
    #[error("asymmetric threshold needs tau >= 2 (got {tau})")]
    TauRange { tau: usize },
    #[error("cooper pmf needs 1 <= gamma <= d-1 (gamma={gamma}, d={d})")]
    CooperGammaRange { gamma: usize, d: usize },
}

/// Descriptor of a (γ, α) banded random binary matrix of size n_rows × k.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandedSpec {
    pub n_rows: usize,
    pub k: usize,
    pub alpha: usize,
    pub gamma: usize,
    pub regularity: Regularity,
    pub symmetry: Symmetry,
}

impl BandedSpec {
    pub fn new(
        n_rows: usize,
        k: usize,
        alpha: usize,
        gamma: usize,
        regularity: Regularity,
        symmetry: Symmetry,
    ) -> Result<Self, BandedError> {
        let spec = BandedSpec {
            n_rows,
            k,
            alpha,
            gamma,
            regularity,
            symmetry,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), BandedError> {
        if self.gamma >= self.alpha {
            return Err(BandedError::GammaRange {
                gamma: self.gamma,
                alpha: self.alpha,
            });
        }
        let step = self.alpha - self.gamma;
        match self.symmetry {
            Symmetry::Symmetric => {
                if self.k % step != 0 {
                    return Err(BandedError::SymmetricDivisibility {
                        alpha: self.alpha,
                        gamma: self.gamma,
                        k: self.k,
                    });
                }
            }
            Symmetry::Asymmetric => {
                if (self.k - self.gamma) % step != 0 {
                    return Err(BandedError::AsymmetricDivisibility {
                        alpha: self.alpha,
                        gamma: self.gamma,
                        k: self.k,
                    });
                }
            }
        }
        if self.regularity == Regularity::Regular && self.n_rows % self.chi() != 0 {
            return Err(BandedError::RegularDivisibility {
                chi: self.chi(),
                n_rows: self.n_rows,
            });
        }
        Ok(())
    }

    /// Number of apertures χ.
    pub fn chi(&self) -> usize {
        let step = self.alpha - self.gamma;
        match self.symmetry {
            Symmetry::Symmetric => self.k / step,
            Symmetry::Asymmetric => (self.k - self.gamma) / step,
        }
    }
}

/// The χ apertures (0-based column index sets, each of size α). The i-th
/// starts at i·(α−γ); symmetric specs wrap end-around.
pub fn apertures(spec: &BandedSpec) -> Vec<Vec<usize>> {
    let step = spec.alpha - spec.gamma;
    (0..spec.chi())
        .map(|i| {
            let start = i * step;
            (0..spec.alpha)
                .map(|j| match spec.symmetry {
                    Symmetry::Symmetric => (start + j) % spec.k,
                    Symmetry::Asymmetric => start + j,
                })
                .collect()
        })
        .collect()
}

/// Draw one BRB matrix: each row picks an aperture (uniformly for
/// irregular; exactly n/χ rows per aperture, order shuffled, for regular)
/// and fills i.u.d. bits inside it.
pub fn sample_banded(spec: &BandedSpec, rng: &mut impl Rng) -> BitMatrix {
    let aps = apertures(spec);
    let chi = aps.len();
    let row_apertures: Vec<usize> = match spec.regularity {
        Regularity::Irregular => (0..spec.n_rows).map(|_| rng.gen_range(0..chi)).collect(),
        Regularity::Regular => {
            let per = spec.n_rows / chi;
            let mut v: Vec<usize> = (0..chi).flat_map(|i| std::iter::repeat(i).take(per)).collect();
            v.shuffle(rng);
            v
        }
    };
    let mut m = BitMatrix::zero(spec.n_rows, spec.k);
    for (r, &a) in row_apertures.iter().enumerate() {
        for &col in &aps[a] {
            if rng.gen::<bool>() {
                m.set(r, col, true);
            }
        }
    }
    m
}

/// Exact probability that an n×k (k ≤ n) matrix with i.u.d. GF(2) entries
/// has rank k: ∏_{i=n−k+1}^{n} (1 − 2^{−i}).
pub fn exact_full_rank_prob(n: usize, k: usize) -> Result<f64, BandedError> {
    if k > n {
        return Err(BandedError::RankLawShape { n, k });
    }
    let mut p = 1.0;
    for i in (n - k + 1)..=n {
        if i >= 64 {
            break; // 1 - 2^-i is 1.0 in doubles from here on
        }
        p *= 1.0 - 2f64.powi(-(i as i32));
    }
    Ok(p)
}

/// Truncation point: factors (1 − 2^{−i}) within 1e−15 of one are dropped.
const PRODUCT_TRUNCATION_BITS: i32 = 50;

/// Asymptotic (n → ∞) law for the rank of an n×d fully random matrix:
/// Pr[r = d − γ] = c_γ · 2^{−γ(n−d+γ)} with
/// c_γ = ∏_{i=n−d+γ+1}^{∞}(1−2^{−i}) / ∏_{i=1}^{γ}(1−2^{−i}).
pub fn cooper_rank_pmf(n: usize, d: usize, gamma: usize) -> Result<f64, BandedError> {
    if d > n {
        return Err(BandedError::RankLawShape { n, k: d });
    }
    if gamma == 0 || gamma > d - 1 {
        return Err(BandedError::CooperGammaRange { gamma, d });
    }
    let mut numerator = 1.0;
    let mut i = (n - d + gamma + 1) as i32;
    while i <= PRODUCT_TRUNCATION_BITS {
        numerator *= 1.0 - 2f64.powi(-i);
        i += 1;
    }
    let mut denominator = 1.0;
    for j in 1..=gamma as i32 {
        denominator *= 1.0 - 2f64.powi(-j);
    }
    let c_gamma = numerator / denominator;
    let exponent = -((gamma * (n - d + gamma)) as f64);
    Ok(c_gamma * 2f64.powf(exponent))
}

/// Monte-Carlo full-rank frequency with a 95% Wilson interval.
///
/// Trials split across the rayon pool; each trial derives its own seed, so
/// the result is identical for any worker count.
pub fn full_rank_frequency(
    spec: &BandedSpec,
    trials: u64,
    seed: u64,
) -> Result<FullRankEstimate, BandedError> {
    full_rank_frequency_z(spec, trials, seed, Z_95)
}

/// Same as [`full_rank_frequency`] with a caller-chosen z value.
pub fn full_rank_frequency_z(
    spec: &BandedSpec,
    trials: u64,
    seed: u64,
    z: f64,
) -> Result<FullRankEstimate, BandedError> {
    spec.validate()?;
    let spec = *spec;
    let full_rank = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[t]));
            (sample_banded(&spec, &mut rng).rank() == spec.k) as u64
        })
        .sum::<u64>();
    let freq = full_rank as f64 / trials as f64;
    let (ci_lo, ci_hi) = wilson_interval(full_rank, trials, z);
    Ok(FullRankEstimate {
        trials,
        full_rank,
        freq,
        ci_lo,
        ci_hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullRankEstimate {
    pub trials: u64,
    pub full_rank: u64,
    pub freq: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Minimal overlap γ from which a BRB matrix is conjectured to behave like
/// a fully random one: ⌈2√k⌉ symmetric, ⌈τ_e·τ·√k⌉ asymmetric with
/// τ_e = τ/(τ−1).
pub fn conjecture2_threshold(
    k: usize,
    tau: usize,
    symmetry: Symmetry,
) -> Result<usize, BandedError> {
    let sqrt_k = (k as f64).sqrt();
    match symmetry {
        Symmetry::Symmetric => Ok((2.0 * sqrt_k).ceil() as usize),
        Symmetry::Asymmetric => {
            if tau < 2 {
                return Err(BandedError::TauRange { tau });
            }
            let tau_e = tau as f64 / (tau as f64 - 1.0);
            Ok((tau_e * tau as f64 * sqrt_k).ceil() as usize)
        }
    }
}

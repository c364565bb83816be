//! Small statistics helpers shared by the experiment runners.

/// z for a 95% two-sided normal interval.
pub const Z_95: f64 = 1.959_963_984_540_054;
/// z for a 99% two-sided normal interval.
pub const Z_99: f64 = 2.575_829_303_548_901;

/// Wilson score interval for a binomial proportion. Preferred over Wald
/// here because the frequencies of interest sit close to 0 or 1.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // pin the endpoints exactly so `lo <= p <= hi` survives rounding
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let xs: Vec<f64> = values.collect();
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    (mean, (var / n as f64).sqrt())
}

/// SplitMix64 finalizer; the workhorse of the seed-derivation scheme.
#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive a sub-seed from a master seed and a list of coordinates (cell
/// index, trial index, ...). Worker-count invariant by construction: the
/// result depends only on the inputs.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    let mut state = splitmix64(master);
    for &c in coords {
        state = splitmix64(state ^ c.wrapping_mul(0x2545_F491_4F6C_DD1D));
    }
    state
}

/// Format with `sig` significant digits, plain decimal (no exponent), for
/// the CSV emitters.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // Trim trailing zeros but keep at least one digit after the point.
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        t.to_string()
    } else {
        s
    }
}

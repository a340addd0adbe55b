//! Seeded Monte-Carlo simulation of the binary MAP detectors.
//!
//! Trials are stratified: the two input symbols get deterministic
//! allocations in their prior proportions (with a floor on the rare high
//! symbol so it is actually exercised at tiny budgets), and the error rate
//! is reassembled as the prior-weighted average of the conditional rates.
//! Work is organized in fixed blocks of 2^16 trials; block `b` of stratum
//! `s` draws from stream `(b << 1) | s` of the master seed, so totals are
//! identical however blocks are scheduled.

use crate::channels::{BinaryInput, ChannelSpec};
use crate::rng::StreamRng;
use crate::{Error, Result};

/// Trials per RNG block.
pub const BLOCK_TRIALS: u64 = 1 << 16;

/// Minimum trials allocated to the high symbol (capped by the total).
pub const MIN_HIGH_TRIALS: u64 = 1_000;

/// Decision threshold matching the channel kind: real for Gaussian outputs,
/// an integer count for Poisson outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Real(f64),
    Count(u64),
}

/// Outcome of a stratified MAP simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Prior-weighted error estimate.
    pub pe_hat: f64,
    pub n_trials: u64,
    /// Raw error count across both strata.
    pub errors: u64,
    /// Wilson interval endpoints at the requested `z`, combined across
    /// strata with the prior weights.
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
    /// Per-stratum detail: (trials, errors) for the zero and high symbols.
    pub low_stratum: (u64, u64),
    pub high_stratum: (u64, u64),
}

/// Wilson score interval for `errors` successes in `n` trials at `z`.
pub fn wilson_interval(errors: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Usage("wilson_interval requires n >= 1"));
    }
    if errors > n {
        return Err(Error::Usage("wilson_interval requires errors <= n"));
    }
    if !(z.is_finite() && z > 0.0) {
        return Err(Error::Usage("wilson_interval requires z > 0"));
    }
    let nf = n as f64;
    let p_hat = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p_hat + z2 / (2.0 * nf)) / denom;
    let half = z * libm::sqrt(p_hat * (1.0 - p_hat) / nf + z2 / (4.0 * nf * nf)) / denom;
    // the endpoints are exactly 0 and 1 at the boundary counts
    let lo = if errors == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if errors == n { 1.0 } else { (center + half).min(1.0) };
    Ok((lo, hi))
}

fn threshold_value(ch: &ChannelSpec, threshold: &Threshold) -> Result<f64> {
    match (ch, threshold) {
        (ChannelSpec::Gaussian, Threshold::Real(t)) => Ok(*t),
        (ChannelSpec::Poisson { .. }, Threshold::Count(k)) => Ok(*k as f64),
        _ => Err(Error::Usage("threshold kind does not match the channel")),
    }
}

/// Counts decisions for the high symbol (`y > threshold`) in one block of
/// trials at input `x`, drawn from stream `stream` of `seed`.
///
/// Ties at the threshold decide the zero symbol, matching the exact error
/// expressions.
pub fn count_high_decisions(
    ch: &ChannelSpec,
    x: f64,
    threshold: &Threshold,
    seed: u64,
    stream: u64,
    trials: u64,
) -> Result<u64> {
    let thr = threshold_value(ch, threshold)?;
    let mut rng = StreamRng::new(seed, stream);
    let mut high = 0u64;
    match *ch {
        ChannelSpec::Gaussian => {
            use rand::Rng as _;
            use rand_distr::StandardNormal;
            for _ in 0..trials {
                let z: f64 = rng.sample(StandardNormal);
                if x + z > thr {
                    high += 1;
                }
            }
        }
        ChannelSpec::Poisson { dark_current } => {
            use rand_distr::{Distribution, Poisson};
            let distr = Poisson::new(dark_current + x)
                .map_err(|_| Error::Domain("invalid Poisson mean"))?;
            for _ in 0..trials {
                let y: f64 = distr.sample(&mut rng);
                if y > thr {
                    high += 1;
                }
            }
        }
    }
    Ok(high)
}

fn stratum_high_decisions(
    ch: &ChannelSpec,
    x: f64,
    threshold: &Threshold,
    seed: u64,
    symbol_bit: u64,
    trials: u64,
) -> Result<u64> {
    let mut remaining = trials;
    let mut block = 0u64;
    let mut high = 0u64;
    while remaining > 0 {
        let take = remaining.min(BLOCK_TRIALS);
        high += count_high_decisions(ch, x, threshold, seed, (block << 1) | symbol_bit, take)?;
        remaining -= take;
        block += 1;
    }
    Ok(high)
}

/// Stratified simulation of the binary MAP detector.
///
/// Deterministic given `seed`; the decision convention (tie goes to the zero
/// symbol) matches [`crate::gaussian::pe_exact_gaussian`] and
/// [`crate::poisson::pe_exact_poisson`].
pub fn simulate_map(
    ch: &ChannelSpec,
    input: &BinaryInput,
    threshold: Threshold,
    n: u64,
    seed: u64,
    z: f64,
) -> Result<SimResult> {
    if n == 0 {
        return Err(Error::Usage("simulate_map requires n >= 1"));
    }
    threshold_value(ch, &threshold)?;
    let q = input.mass_high;

    // deterministic proportional allocation with a floor on the high symbol
    let mut n_low = libm::round((1.0 - q) * n as f64) as u64;
    let mut n_high = n - n_low.min(n);
    let floor = MIN_HIGH_TRIALS.min(n);
    if n_high < floor {
        n_high = floor;
        n_low = n - n_high;
    }

    let high_on_low = if n_low > 0 {
        stratum_high_decisions(ch, 0.0, &threshold, seed, 0, n_low)?
    } else {
        0
    };
    let high_on_high = if n_high > 0 {
        stratum_high_decisions(ch, input.amplitude, &threshold, seed, 1, n_high)?
    } else {
        0
    };
    let err_low = high_on_low;
    let err_high = n_high - high_on_high;

    let rate = |e: u64, n: u64| if n > 0 { e as f64 / n as f64 } else { 0.0 };
    let pe_hat = (1.0 - q) * rate(err_low, n_low) + q * rate(err_high, n_high);

    let interval = |e: u64, n: u64| -> Result<(f64, f64)> {
        if n == 0 {
            Ok((0.0, 0.0))
        } else {
            wilson_interval(e, n, z)
        }
    };
    let (lo0, hi0) = interval(err_low, n_low)?;
    let (lo1, hi1) = interval(err_high, n_high)?;
    let ci_lo = (1.0 - q) * lo0 + q * lo1;
    let ci_hi = (1.0 - q) * hi0 + q * hi1;

    Ok(SimResult {
        pe_hat,
        n_trials: n,
        errors: err_low + err_high,
        ci_lo,
        ci_hi,
        seed,
        low_stratum: (n_low, err_low),
        high_stratum: (n_high, err_high),
    })
}

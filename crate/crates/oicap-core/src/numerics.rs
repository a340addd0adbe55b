//! Scalar special functions, Poisson tail machinery, root finding,
//! quadrature, and log-domain utilities.
//!
//! The Gaussian tail `Q` is evaluated through `erfc` (never `1 - cdf`) so it
//! keeps relative accuracy far into the tail, and Poisson probabilities are
//! always formed in the log domain through `lgamma`; both properties are what
//! keep the bound ratios meaningful at very small intensity budgets.

use crate::{Error, Result};
use alloc::vec::Vec;

/// `sqrt(2*pi)`.
pub const SQRT_2PI: f64 = 2.5066282746310002;
/// `log(2*pi*e) / 2`, the differential entropy of a unit-variance Gaussian.
pub const HALF_LN_2PI_E: f64 = 1.4189385332046727;

/// A finite, nonempty real interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RealInterval {
    /// Requires `lo < hi` with both endpoints finite.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain("interval endpoints must be finite with lo < hi"));
        }
        Ok(Self { lo, hi })
    }
}

/// A Chernoff tail bound together with its exponent.
///
/// `bound = exp(exponent)` always holds; the bound may exceed 1 since it is
/// an exponential-moment bound, not a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBoundResult {
    pub bound: f64,
    pub exponent: f64,
}

#[inline]
pub(crate) fn normal_pdf(x: f64) -> f64 {
    libm::exp(-x * x / 2.0) / SQRT_2PI
}

#[inline]
pub(crate) fn normal_tail(x: f64) -> f64 {
    libm::erfc(x / core::f64::consts::SQRT_2) / 2.0
}

/// Mills ratio `Q(x)/phi(x)` for `x >= 0`.
///
/// Below 6 both factors are well scaled and the quotient is exact enough;
/// from 6 on a Lentz-free bottom-up continued fraction
/// `1/(x + 1/(x + 2/(x + 3/...)))` avoids the underflow of `Q`.
pub(crate) fn mills_ratio(x: f64) -> f64 {
    if x < 6.0 {
        return normal_tail(x) / normal_pdf(x);
    }
    let mut r = x;
    for k in (1..=64u32).rev() {
        r = x + f64::from(k) / r;
    }
    1.0 / r
}

/// Standard normal density `phi(x) = exp(-x^2/2)/sqrt(2*pi)`.
pub fn phi(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("phi requires a finite argument"));
    }
    Ok(normal_pdf(x))
}

/// Gaussian upper tail `Q(x) = integral of phi from x to infinity`.
pub fn q_tail(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("q_tail requires a finite argument"));
    }
    Ok(normal_tail(x))
}

/// Right-hand side `phi(xi) + 2*tau/xi` of the density shift inequality
/// `phi(xi - tau) <= phi(xi) + 2*tau/xi` for `xi > 0`, `tau >= 0`.
pub fn phi_shift_bound(xi: f64, tau: f64) -> Result<f64> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Domain("phi_shift_bound requires xi > 0"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain("phi_shift_bound requires tau >= 0"));
    }
    Ok(normal_pdf(xi) + 2.0 * tau / xi)
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub(crate) fn log_poi_pmf(k: u64, mean: f64) -> f64 {
    let kf = k as f64;
    -mean + kf * libm::log(mean) - ln_gamma(kf + 1.0)
}

/// Log of the Poisson pmf, `log Poi_mean(k) = -mean + k log(mean) - log k!`.
pub fn log_poisson_pmf(k: u64, mean: f64) -> Result<f64> {
    if !(mean.is_finite() && mean > 0.0) {
        return Err(Error::Domain("log_poisson_pmf requires mean > 0"));
    }
    Ok(log_poi_pmf(k, mean))
}

/// Exact upper tail `Pr(Poi_mean >= k)` by pmf summation.
pub fn poisson_upper_tail(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    libm::exp(log_poisson_upper_tail(mean, k))
}

/// `log Pr(Poi_mean >= k)`, stable even when the tail underflows `f64`.
pub fn log_poisson_upper_tail(mean: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    // factor out pmf(k); the remaining series has terms mean/(k+1) * ...
    let mut series = 1.0f64;
    let mut term = 1.0f64;
    let mut y = k as f64;
    loop {
        y += 1.0;
        term *= mean / y;
        series += term;
        if term < series * 1e-18 && y > mean {
            break;
        }
    }
    log_poi_pmf(k, mean) + libm::log(series)
}

/// Exact lower tail `Pr(Poi_mean <= k)` by pmf summation from the small side.
pub fn poisson_cdf(mean: f64, k: u64) -> f64 {
    let kf = k as f64;
    if kf < mean {
        let mut sum = 0.0f64;
        let mut term = libm::exp(log_poi_pmf(k, mean));
        let mut y = kf;
        loop {
            sum += term;
            if y < 0.5 || term < sum * 1e-18 {
                break;
            }
            term *= y / mean;
            y -= 1.0;
        }
        sum
    } else {
        1.0 - poisson_upper_tail(mean, k + 1)
    }
}

/// Chernoff bound `exp(-xi*log(xi/rho) + xi - rho)` on a Poisson tail.
///
/// For `xi > rho` it bounds `Pr(W >= xi)`, for `xi < rho` it bounds
/// `Pr(W <= xi)`. The tilt degenerates at `xi = rho`, which is rejected.
pub fn poisson_tail_bounds(rho: f64, xi: f64) -> Result<TailBoundResult> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain("poisson_tail_bounds requires rho > 0"));
    }
    if !(xi.is_finite() && xi >= 0.0) {
        return Err(Error::Domain("poisson_tail_bounds requires xi >= 0"));
    }
    if xi == rho {
        return Err(Error::Domain("poisson_tail_bounds degenerates at xi = rho"));
    }
    // xi*log(xi/rho) with the 0*log(0) = 0 convention
    let xl = if xi == 0.0 { 0.0 } else { xi * libm::log(xi / rho) };
    let exponent = -xl + xi - rho;
    Ok(TailBoundResult {
        bound: libm::exp(exponent),
        exponent,
    })
}

/// Deterministic bisection for a strictly increasing `f` on `interval`.
///
/// Runs until the bracket width is at most `tol` (absolute on the argument),
/// or until the midpoint is no longer representable strictly inside the
/// bracket.
pub fn solve_increasing<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    interval: RealInterval,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain("solve_increasing requires tol > 0"));
    }
    let (mut lo, mut hi) = (interval.lo, interval.hi);
    let flo = f(lo);
    let fhi = f(hi);
    if !(flo <= target && target <= fhi) {
        return Err(Error::Bracket { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const MAX_QUAD_DEPTH: u32 = 48;

fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> core::result::Result<f64, f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // the second acceptance is the floating-point noise floor: once the
    // panel difference is at rounding level, refinement cannot help
    if delta.abs() <= 15.0 * tol
        || delta.abs() <= 1e-15 * (left.abs() + right.abs())
        || b - a < 1e-14 * (1.0 + a.abs())
    {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(left + right);
    }
    let l = simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
    let r = simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    match (l, r) {
        (Ok(x), Ok(y)) => Ok(x + y),
        (Ok(x), Err(y)) | (Err(x), Ok(y)) | (Err(x), Err(y)) => Err(x + y),
    }
}

/// Adaptive Simpson quadrature of `f` over `interval` with absolute
/// tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, interval: RealInterval, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain("integrate requires tol > 0"));
    }
    let (a, b) = (interval.lo, interval.hi);
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    match simpson_step(&f, a, b, fa, fm, fb, whole, tol, MAX_QUAD_DEPTH) {
        Ok(v) => Ok(v),
        Err(best) => Err(Error::Accuracy { best }),
    }
}

/// Overflow-safe `log(sum(exp(v)))` via max subtraction.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Domain("log_sum_exp requires a nonempty sequence"));
    }
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        if v > max {
            max = v;
        }
    }
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let mut sum = 0.0f64;
    for &v in values {
        sum += libm::exp(v - max);
    }
    Ok(max + libm::log(sum))
}

/// Collects `f` over an output grid; convenience for tests and sweeps.
pub fn tabulate<F: Fn(f64) -> f64>(f: F, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| f(x)).collect()
}

/// `-(1-q) log(1-q) / E` for a two-point law with high mass `q = E/amplitude`,
/// stable when `q` is far below machine precision.
pub(crate) fn low_mass_entropy_per_eps(q: f64, amplitude: f64, l: f64) -> f64 {
    if q > 1e-6 {
        -(1.0 - q) * libm::log1p(-q) / libm::exp(-l)
    } else {
        (1.0 - q) * (1.0 + q / 2.0 + q * q / 3.0) / amplitude
    }
}

/// `H_b(pe) / E` from the normalized error probability `pe_pe = pe / E`.
pub(crate) fn hb_per_eps(pe_pe: f64, l: f64) -> f64 {
    if pe_pe <= 0.0 {
        return 0.0;
    }
    let pe = pe_pe * libm::exp(-l);
    let self_info = pe_pe * (l - libm::log(pe_pe));
    let complement = if pe > 1e-6 {
        -(1.0 - pe) * libm::log1p(-pe) / libm::exp(-l)
    } else {
        pe_pe * (1.0 - pe) * (1.0 + pe / 2.0 + pe * pe / 3.0)
    };
    self_info + complement
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn phi_spot_values() {
        close(phi(0.0).unwrap(), 0.398942280401433, 1e-14);
        close(phi(1.0).unwrap(), 0.241970724519143, 1e-14);
        close(phi(2.5).unwrap(), 0.0175283004935685, 1e-14);
        assert_eq!(phi(2.5).unwrap(), phi(-2.5).unwrap());
        assert!(phi(f64::NAN).is_err());
        assert!(phi(f64::INFINITY).is_err());
    }

    #[test]
    fn q_tail_spot_values() {
        assert_eq!(q_tail(0.0).unwrap(), 0.5);
        close(q_tail(3.0).unwrap(), 0.00134989803163009, 1e-13);
        // complementary symmetry on a grid
        let mut x = -8.0;
        while x <= 8.0 {
            let s = q_tail(x).unwrap() + q_tail(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-14, "x={x} sum={s}");
            x += 0.125;
        }
        assert!(q_tail(f64::NAN).is_err());
    }

    #[test]
    fn q_tail_strictly_decreasing() {
        let mut prev = q_tail(-8.0).unwrap();
        let mut x = -7.75;
        while x <= 8.0 {
            let v = q_tail(x).unwrap();
            assert!(v < prev);
            prev = v;
            x += 0.25;
        }
    }

    #[test]
    fn mills_ratio_matches_direct_quotient_at_crossover() {
        let mut x = 5.0;
        while x <= 8.0 {
            let direct = normal_tail(x) / normal_pdf(x);
            let cf = {
                let mut r = x;
                for k in (1..=64u32).rev() {
                    r = x + f64::from(k) / r;
                }
                1.0 / r
            };
            assert!((direct - cf).abs() < 1e-13 * direct, "x={x}");
            x += 0.25;
        }
    }

    #[test]
    fn phi_shift_bound_spot_values() {
        close(phi_shift_bound(1.0, 0.0).unwrap(), 0.241970724519143, 1e-14);
        close(phi_shift_bound(2.0, 1.0).unwrap(), 1.05399096651319, 1e-14);
        close(phi_shift_bound(0.5, 3.0).unwrap(), 12.3520653267643, 1e-14);
        assert!(phi_shift_bound(0.5, 3.0).unwrap() >= phi(-2.5).unwrap());
        assert!(phi_shift_bound(0.0, 1.0).is_err());
        assert!(phi_shift_bound(-1.0, 1.0).is_err());
    }

    #[test]
    fn log_poisson_pmf_spot_values() {
        assert_eq!(log_poisson_pmf(0, 1.0).unwrap(), -1.0);
        close(log_poisson_pmf(3, 2.0).unwrap(), -1.71231792754822, 1e-13);
        assert!(log_poisson_pmf(1, 0.0).is_err());
        assert!(log_poisson_pmf(1, -2.0).is_err());
        // normalization
        let mut sum = 0.0;
        for k in 0..=200u64 {
            sum += libm::exp(log_poisson_pmf(k, 10.0).unwrap());
        }
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_tails_exact() {
        close(poisson_upper_tail(1.0, 2), 0.264241117657115, 1e-13);
        close(poisson_cdf(4.0, 1), 0.0915781944436709, 1e-13);
        // cdf + complement
        for k in [0u64, 3, 7, 20] {
            let s = poisson_cdf(6.5, k) + poisson_upper_tail(6.5, k + 1);
            assert!((s - 1.0).abs() < 1e-13);
        }
        close(
            log_poisson_upper_tail(1.0, 2),
            libm::log(0.264241117657115),
            1e-13,
        );
    }

    #[test]
    fn chernoff_bounds_spot_values() {
        let b = poisson_tail_bounds(1.0, 2.0).unwrap();
        close(b.exponent, -0.386294361119891, 1e-13);
        close(b.bound, 0.679570457114761, 1e-13);
        assert!(b.bound >= poisson_upper_tail(1.0, 2));

        let b = poisson_tail_bounds(4.0, 1.0).unwrap();
        close(b.bound, 0.199148273471456, 1e-13);
        assert!(b.bound >= poisson_cdf(4.0, 1));

        let b = poisson_tail_bounds(1.0, 1.0000001).unwrap();
        assert!((b.bound - 1.0).abs() < 1e-6);

        assert!(poisson_tail_bounds(1.0, 1.0).is_err());
        assert!(poisson_tail_bounds(0.0, 1.0).is_err());
    }

    #[test]
    fn solve_increasing_spot_values() {
        let iv = RealInterval::new(0.0, 2.0).unwrap();
        let r = solve_increasing(|x| x * x, 2.0, iv, 1e-10).unwrap();
        close(r, 1.41421356237310, 1e-10);

        let iv = RealInterval::new(1.0, 100.0).unwrap();
        let r = solve_increasing(|x| x * libm::log(x), 10.3617, iv, 1e-12).unwrap();
        close(r, 5.86012402568705, 1e-10);

        let iv = RealInterval::new(1.0001, 100.0).unwrap();
        let r = solve_increasing(|x| (x - 1.0) * libm::log(x), 7.5986, iv, 1e-12).unwrap();
        close(r, 5.47112238807279, 1e-10);

        let iv = RealInterval::new(0.0, 1.0).unwrap();
        assert!(matches!(
            solve_increasing(|x| x, 2.0, iv, 1e-10),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn solve_increasing_idempotent_under_tightening() {
        let iv = RealInterval::new(1.0, 100.0).unwrap();
        let tol = 1e-10;
        let x = solve_increasing(|v| v * libm::log(v), 10.3617, iv, tol).unwrap();
        let iv2 = RealInterval::new(x - tol, x + tol).unwrap();
        let x2 = solve_increasing(|v| v * libm::log(v), 10.3617, iv2, tol).unwrap();
        assert!((x - x2).abs() <= tol);
    }

    #[test]
    fn integrate_spot_values() {
        let iv = RealInterval::new(-10.0, 10.0).unwrap();
        let v = integrate(normal_pdf, iv, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);

        let iv = RealInterval::new(0.0, 1.0).unwrap();
        let v = integrate(|x| x, iv, 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-12);

        let iv = RealInterval::new(-10.0, 10.0).unwrap();
        let v = integrate(|x| normal_pdf(x) * x * x, iv, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_sum_exp_spot_values() {
        close(log_sum_exp(&[0.0, 0.0]).unwrap(), core::f64::consts::LN_2, 1e-15);
        close(
            log_sum_exp(&[-1000.0, -1000.0]).unwrap(),
            -1000.0 + core::f64::consts::LN_2,
            1e-15,
        );
        let v = log_sum_exp(&[0.0, -745.0]).unwrap();
        assert!(v >= 0.0 && v < 1e-300);
        assert!(log_sum_exp(&[]).is_err());
        assert_eq!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap(),
            f64::NEG_INFINITY
        );
    }
}

//! Gaussian-channel capacity bounds: the closed-form duality upper bound
//! with per-term breakdown, the binary-input MAP detector with exact error
//! probability, and the Fano lower bound.
//!
//! All bound evaluations run internally in `L = log(1/E)`, normalized by the
//! intensity budget, so sweeps remain exact far beyond the range where `E`
//! itself is representable; absolute values are recovered by scaling.

use crate::channels::BinaryInput;
use crate::numerics::{hb_per_eps, low_mass_entropy_per_eps, mills_ratio, normal_tail, SQRT_2PI};
use crate::report::BoundReport;
use crate::{Error, Result};
use alloc::vec;

/// Coefficient of the linear term in the upper bound: `2 + 1/(2 sqrt(2 pi))`.
pub const LINEAR_COEFF: f64 = 2.0 + 1.0 / (2.0 * SQRT_2PI);

const SQRT_2: f64 = core::f64::consts::SQRT_2;

fn log_inv_eps_of(epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain("intensity budget must lie in (0,1)"));
    }
    Ok(-libm::log(epsilon))
}

/// Low-intensity capacity scaling target `E * sqrt(log(1/E) / 2)`.
pub fn asymptote_gaussian(epsilon: f64) -> Result<f64> {
    let l = log_inv_eps_of(epsilon)?;
    Ok(epsilon * libm::sqrt(l / 2.0))
}

/// The same scaling target divided by `E`, parameterized by `L = log(1/E)`.
pub fn asymptote_gaussian_per_eps(log_inv_eps: f64) -> Result<f64> {
    if !(log_inv_eps.is_finite() && log_inv_eps > 0.0) {
        return Err(Error::Domain("log(1/E) must be positive"));
    }
    Ok(libm::sqrt(log_inv_eps / 2.0))
}

/// Inputs of the Gaussian upper bound: budget and the knee exponent `a_G`.
///
/// The knee sits at `t = a_G * sqrt(log(1/E))`. The bound evaluates for any
/// `a_G > 0`; the regime in which it tightens to the scaling target needs
/// `a_G > sqrt(2)` and is reported as a validity flag, not an error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBoundParams {
    pub epsilon: f64,
    pub log_inv_eps: f64,
    pub a_g: f64,
}

impl GaussianBoundParams {
    pub fn new(epsilon: f64, a_g: f64) -> Result<Self> {
        let mut params = Self::from_log_inv_eps(log_inv_eps_of(epsilon)?, a_g)?;
        params.epsilon = epsilon;
        Ok(params)
    }

    pub fn from_log_inv_eps(log_inv_eps: f64, a_g: f64) -> Result<Self> {
        if !(log_inv_eps.is_finite() && log_inv_eps > 0.0) {
            return Err(Error::Domain("log(1/E) must be positive"));
        }
        if !(a_g.is_finite() && a_g > 0.0) {
            return Err(Error::Domain("a_g must be positive"));
        }
        Ok(Self {
            epsilon: libm::exp(-log_inv_eps),
            log_inv_eps,
            a_g,
        })
    }

    /// Knee position `t = a_G * sqrt(L)`.
    pub fn knee(&self) -> f64 {
        self.a_g * libm::sqrt(self.log_inv_eps)
    }
}

/// Closed-form upper bound on the Gaussian-channel capacity:
/// `beta/(1-beta) + (t/2+1) phi(t) + 2E/t + (2 + 1/(2 sqrt(2 pi))) E + E t/2`
/// with `t = a_G sqrt(log(1/E))` and `beta = exp(-t^2/2)`.
pub fn upper_bound(params: &GaussianBoundParams) -> BoundReport {
    let l = params.log_inv_eps;
    let t = params.knee();
    let beta = libm::exp(-t * t / 2.0);
    // every term scaled by 1/E = exp(L); exp(L - t^2/2) keeps the two
    // exponentially small terms finite for any L in the a_G > sqrt(2) regime
    let scale = libm::exp(l - t * t / 2.0);
    let terms_per_eps = vec![
        ("beta_ratio", scale / (1.0 - beta)),
        ("knee_phi", (t / 2.0 + 1.0) * scale / SQRT_2PI),
        ("two_eps_over_t", 2.0 / t),
        ("linear_eps", LINEAR_COEFF),
        ("dominant", t / 2.0),
    ];
    BoundReport::from_per_eps(
        params.epsilon,
        terms_per_eps,
        vec![
            ("epsilon", params.epsilon),
            ("log_inv_eps", l),
            ("a_g", params.a_g),
            ("t", t),
            ("beta", beta),
        ],
        vec![("paper_regime", params.a_g > SQRT_2)],
    )
}

/// The two-point input law with amplitude `x0 = a_G sqrt(log(1/E))`.
pub fn binary_input_gaussian(epsilon: f64, a_g: f64) -> Result<BinaryInput> {
    let l = log_inv_eps_of(epsilon)?;
    if !(a_g.is_finite() && a_g > 0.0) {
        return Err(Error::Domain("a_g must be positive"));
    }
    BinaryInput::from_budget(epsilon, a_g * libm::sqrt(l), a_g)
}

/// Same law built directly from `L = log(1/E)`.
pub fn binary_input_gaussian_l(log_inv_eps: f64, a_g: f64) -> Result<BinaryInput> {
    if !(a_g.is_finite() && a_g > 0.0) {
        return Err(Error::Domain("a_g must be positive"));
    }
    let amplitude = a_g * libm::sqrt(log_inv_eps);
    BinaryInput::from_log_inv_eps(log_inv_eps, amplitude, a_g)
}

/// `log(1/mass - 1)` for the high-point prior, exact in the `L` domain.
fn log_prior_ratio(input: &BinaryInput) -> f64 {
    input.log_inv_eps + libm::log(input.amplitude) + libm::log1p(-input.mass_high)
}

/// MAP decision threshold for the binary input on the Gaussian channel:
/// `t* = x0/2 + log(x0/E - 1)/x0`. Decide the high symbol iff `y > t*`;
/// the boundary itself goes to the zero symbol.
pub fn map_threshold_gaussian(input: &BinaryInput) -> Result<f64> {
    // mass_high may underflow to 0 in deep L sweeps; the threshold formula
    // runs on log(1/E) and stays exact there
    if !(input.mass_high < 1.0 && input.log_inv_eps.is_finite()) {
        return Err(Error::Domain("MAP threshold needs a prior below 1"));
    }
    Ok(input.amplitude / 2.0 + log_prior_ratio(input) / input.amplitude)
}

/// Exact MAP error probability
/// `(1 - E/x0) Q(t*) + (E/x0) Q(x0 - t*)`, evaluated with the stable tail.
pub fn pe_exact_gaussian(input: &BinaryInput) -> Result<f64> {
    let t_star = map_threshold_gaussian(input)?;
    let q = input.mass_high;
    Ok((1.0 - q) * normal_tail(t_star) + q * normal_tail(input.amplitude - t_star))
}

/// Error probability divided by `E`, stable for any `L`.
fn pe_per_eps(input: &BinaryInput) -> Result<f64> {
    let t_star = map_threshold_gaussian(input)?;
    let q = input.mass_high;
    let x0 = input.amplitude;
    let l = input.log_inv_eps;
    // P(error | low) / E: Q(t*) * exp(L). For t* below the Mills crossover,
    // t* >= sqrt(2 L) forces L < 18 and the direct product is safe.
    let term_low = if t_star < 6.0 {
        (1.0 - q) * normal_tail(t_star) * libm::exp(l)
    } else {
        (1.0 - q) * mills_ratio(t_star) * libm::exp(l - t_star * t_star / 2.0) / SQRT_2PI
    };
    // q * Q(x0 - t*) / E = Q(x0 - t*) / x0
    let term_high = normal_tail(x0 - t_star) / x0;
    Ok(term_low + term_high)
}

/// Binary entropy in nats with the `0 log 0 = 0` convention.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::Domain("binary_entropy requires p in [0,1]"));
    }
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * libm::log(p) - (1.0 - p) * libm::log1p(-p))
}

/// Fano lower bound on the mutual information of the binary input:
/// `H(X_B) - H_b(P_e)` with the exact two-point entropy and exact `P_e`.
///
/// The value may be nonpositive at large budgets; the report then carries
/// `informative = false` rather than an error.
pub fn fano_lower_bound(input: &BinaryInput) -> Result<BoundReport> {
    let l = input.log_inv_eps;
    let x0 = input.amplitude;
    let q = input.mass_high;
    let entropy_pe = (l + libm::log(x0)) / x0 + low_mass_entropy_per_eps(q, x0, l);
    let pe_pe = pe_per_eps(input)?;
    let hb_pe = hb_per_eps(pe_pe, l);
    let report = BoundReport::from_per_eps(
        input.epsilon,
        vec![("entropy_input", entropy_pe), ("minus_hb_pe", -hb_pe)],
        vec![
            ("epsilon", input.epsilon),
            ("log_inv_eps", l),
            ("amplitude", x0),
            ("mass_high", q),
            ("a_param", input.a_param),
            ("pe_per_eps", pe_pe),
        ],
        vec![
            ("informative", entropy_pe - hb_pe > 0.0),
            ("paper_regime", input.a_param > SQRT_2),
        ],
    );
    Ok(report)
}

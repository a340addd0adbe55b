//! Poisson-channel capacity bounds: the knee solvers and their asymptotic
//! estimators, the assembled non-asymptotic upper bound with validity
//! checks, and the binary-input MAP/Fano lower bound.
//!
//! As in [`crate::gaussian`], everything evaluates internally in
//! `L = log(1/E)` normalized by the budget; factorial and power terms are
//! formed in the log domain since the knee reaches thousands in `L` sweeps.

use crate::channels::BinaryInput;
use crate::numerics::{
    hb_per_eps, log_poi_pmf, log_poisson_upper_tail, low_mass_entropy_per_eps, ln_gamma,
    poisson_cdf, poisson_tail_bounds, poisson_upper_tail, solve_increasing, RealInterval,
};
use crate::report::BoundReport;
use crate::{Error, Result};
use alloc::vec;

/// Snap width when flooring a solver root: roots that land within this of an
/// integer from below are treated as that integer, so that mathematically
/// integral solutions floor the way the formulas intend.
const FLOOR_SNAP: f64 = 1e-9;

const SOLVER_TOL: f64 = 1e-12;

fn log_inv_eps_of(epsilon: f64) -> Result<f64> {
    if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain("intensity budget must lie in (0,1)"));
    }
    Ok(-libm::log(epsilon))
}

fn snapped_floor(x: f64) -> u64 {
    let f = libm::floor(x + FLOOR_SNAP);
    if f < 0.0 {
        0
    } else {
        f as u64
    }
}

/// Root of `(eta - lambda) log(eta/lambda) = a_P log(1/E)` with its floor
/// and the head weight `beta = exp(-(eta_int - lambda) log(eta_int/lambda))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolution {
    pub eta_real: f64,
    pub eta_int: u64,
    pub beta: f64,
    pub rhs: f64,
}

/// Solves the upper-bound knee equation at budget `epsilon`.
pub fn solve_eta(lambda: f64, a_p: f64, epsilon: f64) -> Result<EtaSolution> {
    solve_eta_l(lambda, a_p, log_inv_eps_of(epsilon)?)
}

/// Solves the upper-bound knee equation directly in `L = log(1/E)`.
pub fn solve_eta_l(lambda: f64, a_p: f64, log_inv_eps: f64) -> Result<EtaSolution> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain("dark current must be positive"));
    }
    if !(a_p.is_finite() && a_p > 0.0) {
        return Err(Error::Domain("a_p must be positive"));
    }
    if !(log_inv_eps.is_finite() && log_inv_eps > 0.0) {
        return Err(Error::Domain("log(1/E) must be positive"));
    }
    let rhs = a_p * log_inv_eps;
    let interval = RealInterval::new(
        lambda * (1.0 + 1e-9),
        lambda + rhs + core::f64::consts::E * lambda + 10.0,
    )?;
    let eta_real = solve_increasing(
        |v| (v - lambda) * libm::log(v / lambda),
        rhs,
        interval,
        SOLVER_TOL,
    )?;
    let eta_int = snapped_floor(eta_real);
    let etaf = eta_int as f64;
    let beta = if etaf > lambda {
        libm::exp(-(etaf - lambda) * libm::log(etaf / lambda))
    } else {
        1.0
    };
    Ok(EtaSolution {
        eta_real,
        eta_int,
        beta,
        rhs,
    })
}

/// Leading-order estimates of the knee: `log eta ~ log log(1/E)` and
/// `eta ~ a_P log(1/E) / log log(1/E)`. Diagnostics only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaAsymptotics {
    pub log_eta_est: f64,
    pub eta_est: f64,
}

/// Evaluates the knee asymptotics; requires `E < exp(-e)` so that the
/// iterated logarithm exceeds one.
pub fn eta_asymptotics(lambda: f64, a_p: f64, epsilon: f64) -> Result<EtaAsymptotics> {
    eta_asymptotics_l(lambda, a_p, log_inv_eps_of(epsilon)?)
}

/// Same estimates directly in `L = log(1/E)`.
pub fn eta_asymptotics_l(lambda: f64, a_p: f64, log_inv_eps: f64) -> Result<EtaAsymptotics> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain("dark current must be positive"));
    }
    if !(a_p.is_finite() && a_p > 0.0) {
        return Err(Error::Domain("a_p must be positive"));
    }
    if !(log_inv_eps > core::f64::consts::E) {
        return Err(Error::Domain("asymptotic estimates need E < exp(-e)"));
    }
    let ll = libm::log(log_inv_eps);
    Ok(EtaAsymptotics {
        log_eta_est: ll,
        eta_est: a_p * log_inv_eps / ll,
    })
}

/// Inputs of the Poisson upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonBoundParams {
    pub epsilon: f64,
    pub log_inv_eps: f64,
    pub a_p: f64,
    pub dark_current: f64,
    pub geom_p: f64,
}

impl PoissonBoundParams {
    pub fn new(epsilon: f64, a_p: f64, dark_current: f64, geom_p: f64) -> Result<Self> {
        let mut params = Self::from_log_inv_eps(log_inv_eps_of(epsilon)?, a_p, dark_current, geom_p)?;
        params.epsilon = epsilon;
        Ok(params)
    }

    pub fn from_log_inv_eps(
        log_inv_eps: f64,
        a_p: f64,
        dark_current: f64,
        geom_p: f64,
    ) -> Result<Self> {
        if !(log_inv_eps.is_finite() && log_inv_eps > 0.0) {
            return Err(Error::Domain("log(1/E) must be positive"));
        }
        if !(a_p.is_finite() && a_p > 0.0) {
            return Err(Error::Domain("a_p must be positive"));
        }
        if !(dark_current.is_finite() && dark_current > 0.0) {
            return Err(Error::Domain("dark current must be positive"));
        }
        if !(geom_p > 0.0 && geom_p < 1.0) {
            return Err(Error::Domain("geometric parameter must lie in (0,1)"));
        }
        Ok(Self {
            epsilon: libm::exp(-log_inv_eps),
            log_inv_eps,
            a_p,
            dark_current,
            geom_p,
        })
    }
}

/// The upper bound's derivation fails outside its validity region; the
/// partial report (terms where computable, flags false) rides along.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityViolated {
    pub report: BoundReport,
}

impl core::fmt::Display for ValidityViolated {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "upper bound validity checks failed")
    }
}

/// Errors of [`upper_bound_poisson`].
#[derive(Debug, Clone, PartialEq)]
pub enum PoissonBoundError {
    /// Validity conditions of the derivation failed; partial report attached.
    ValidityViolated(ValidityViolated),
    /// Parameter or solver failure before any bound could be assembled.
    Core(Error),
}

impl From<Error> for PoissonBoundError {
    fn from(e: Error) -> Self {
        PoissonBoundError::Core(e)
    }
}

impl core::fmt::Display for PoissonBoundError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PoissonBoundError::ValidityViolated(v) => v.fmt(f),
            PoissonBoundError::Core(e) => e.fmt(f),
        }
    }
}

/// Geometric-tail validity bracket of the upper bound:
/// `-log(1-p) - lambda - eta log(1/p) - log(2 pi eta)/2 + lambda (1 + log(1/p))`.
/// The derivation requires this to be nonpositive.
pub fn validity_bracket(lambda: f64, geom_p: f64, eta: u64) -> f64 {
    let etaf = eta as f64;
    let log_inv_p = -libm::log(geom_p);
    -libm::log1p(-geom_p) - lambda - etaf * log_inv_p
        - libm::log(2.0 * core::f64::consts::PI * etaf) / 2.0
        + lambda * (1.0 + log_inv_p)
}

/// Assembled non-asymptotic upper bound on the Poisson-channel capacity.
///
/// Terms, in order: `-log(1-beta)`, `lambda log(1+E/lambda)`, the linear-in-E
/// coefficient, the head pmf term, and the four tail-chain terms led by
/// `E log(eta/lambda)`.
pub fn upper_bound_poisson(
    params: &PoissonBoundParams,
) -> core::result::Result<BoundReport, PoissonBoundError> {
    let lam = params.dark_current;
    let p = params.geom_p;
    let l = params.log_inv_eps;
    let eps = params.epsilon;
    let sol = solve_eta_l(lam, params.a_p, l)?;
    let eta = sol.eta_int;
    let etaf = eta as f64;

    let eta_margin_ok = etaf > lam + 2.0;
    let bracket = if eta >= 1 {
        validity_bracket(lam, p, eta)
    } else {
        f64::NAN
    };
    let bracket_ok = bracket <= 0.0;

    let log_inv_p = -libm::log(p);
    let terms_per_eps = if eta_margin_ok {
        let lg = libm::log(etaf / lam);
        let g = (etaf - lam) * lg;
        let beta = sol.beta;
        let log1mbeta = if beta > 1e-10 {
            -libm::log1p(-beta) / eps
        } else {
            libm::exp(l - g) * (1.0 + beta / 2.0)
        };
        let lambda_log = if eps > 0.0 {
            lam * libm::log1p(eps / lam) / eps
        } else {
            1.0
        };
        let linear_eps = (1.0 + log_inv_p)
            * (1.0 + lam * libm::exp(log_poi_pmf(eta - 1, etaf - 2.0)) / (etaf - lam - 2.0));
        let head_pmf = lam * (1.0 + log_inv_p) * libm::exp(log_poi_pmf(eta - 1, lam) + l);
        let c3_dominant = lg;
        let c3_factorial = lg * libm::exp(-lam + etaf * libm::log(lam) - ln_gamma(etaf) + l);
        let c3_sqrt = lg * libm::sqrt((etaf - 1.0) / (2.0 * core::f64::consts::PI))
            / (etaf - lam - 1.0);
        let c3_stirling = (1.0 + libm::log((etaf + 1.0) / lam))
            * ((etaf + 1.0)
                / (libm::sqrt(2.0 * core::f64::consts::PI * (etaf - 1.0))
                    * core::f64::consts::E
                    * core::f64::consts::E))
            * libm::exp((etaf - 1.0) * libm::log1p(2.0 / (etaf - 1.0)))
            / (etaf - lam);
        vec![
            ("log1mbeta", log1mbeta),
            ("lambda_log", lambda_log),
            ("linear_eps", linear_eps),
            ("head_pmf", head_pmf),
            ("c3_dominant", c3_dominant),
            ("c3_factorial", c3_factorial),
            ("c3_sqrt", c3_sqrt),
            ("c3_stirling", c3_stirling),
        ]
    } else {
        // denominators eta - lambda - 1 and eta - lambda - 2 are meaningless here
        vec![
            ("log1mbeta", f64::NAN),
            ("lambda_log", f64::NAN),
            ("linear_eps", f64::NAN),
            ("head_pmf", f64::NAN),
            ("c3_dominant", f64::NAN),
            ("c3_factorial", f64::NAN),
            ("c3_sqrt", f64::NAN),
            ("c3_stirling", f64::NAN),
        ]
    };

    let report = BoundReport::from_per_eps(
        eps,
        terms_per_eps,
        vec![
            ("epsilon", eps),
            ("log_inv_eps", l),
            ("a_p", params.a_p),
            ("lambda", lam),
            ("geom_p", p),
            ("eta_real", sol.eta_real),
            ("eta_int", etaf),
            ("beta", sol.beta),
            ("bracket", bracket),
        ],
        vec![
            ("eta_margin", eta_margin_ok),
            ("bracket_nonpositive", bracket_ok),
            ("paper_regime", params.a_p > 1.0),
        ],
    );
    if eta_margin_ok && bracket_ok {
        Ok(report)
    } else {
        Err(PoissonBoundError::ValidityViolated(ValidityViolated {
            report,
        }))
    }
}

/// Low-intensity capacity scaling target `E log log(1/E)`.
pub fn asymptote_poisson(epsilon: f64) -> Result<f64> {
    let l = log_inv_eps_of(epsilon)?;
    if l <= 1.0 {
        return Err(Error::Domain("scaling target needs E < exp(-1)"));
    }
    Ok(epsilon * libm::log(l))
}

/// The same target divided by `E`, parameterized by `L = log(1/E)`.
pub fn asymptote_poisson_per_eps(log_inv_eps: f64) -> Result<f64> {
    if !(log_inv_eps.is_finite() && log_inv_eps > 1.0) {
        return Err(Error::Domain("scaling target needs log(1/E) > 1"));
    }
    Ok(libm::log(log_inv_eps))
}

/// Two-point input law with amplitude `eta_0` solving
/// `eta_0 log(eta_0/lambda) = a_P log(1/E)`.
pub fn binary_input_poisson(epsilon: f64, a_p: f64, lambda: f64) -> Result<BinaryInput> {
    let probe = binary_input_poisson_l(log_inv_eps_of(epsilon)?, a_p, lambda)?;
    BinaryInput::from_budget(epsilon, probe.amplitude, a_p)
}

/// Same law built directly from `L = log(1/E)`.
pub fn binary_input_poisson_l(log_inv_eps: f64, a_p: f64, lambda: f64) -> Result<BinaryInput> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain("dark current must be positive"));
    }
    if !(a_p.is_finite() && a_p > 0.0) {
        return Err(Error::Domain("a_p must be positive"));
    }
    if !(log_inv_eps.is_finite() && log_inv_eps > 0.0) {
        return Err(Error::Domain("log(1/E) must be positive"));
    }
    let rhs = a_p * log_inv_eps;
    // eta_0 log(eta_0/lambda) increases past max(lambda, 1); restrict there
    let lo = lambda.max(1.0) * (1.0 + 1e-9);
    let hi = core::f64::consts::E * lambda.max(1.0) + rhs + 10.0;
    let eta0 = solve_increasing(
        |v| v * libm::log(v / lambda),
        rhs,
        RealInterval::new(lo, hi)?,
        SOLVER_TOL,
    )?;
    BinaryInput::from_log_inv_eps(log_inv_eps, eta0, a_p)
}

/// MAP decision threshold for the binary input on the Poisson channel:
/// `floor((eta_0 + log((eta_0 - E)/E)) / log(1 + eta_0/lambda))`.
/// Decide the high symbol iff `y > threshold` (the boundary goes to zero).
pub fn map_threshold_poisson(input: &BinaryInput, lambda: f64) -> Result<u64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain("dark current must be positive"));
    }
    let eta0 = input.amplitude;
    if !(eta0 > input.epsilon) {
        return Err(Error::Domain("threshold needs amplitude above the budget"));
    }
    // log((eta_0 - E)/E) = L + log(eta_0 - E), computable for any L
    let num = eta0 + input.log_inv_eps + libm::log(eta0 - input.epsilon);
    let thr = num / libm::log1p(eta0 / lambda);
    Ok(snapped_floor(thr))
}

/// Exact MAP error probability with the boundary-to-zero convention:
/// `(1 - E/eta_0) Pr(Poi_lambda > thr) + (E/eta_0) Pr(Poi_{lambda+eta_0} <= thr)`.
pub fn pe_exact_poisson(input: &BinaryInput, lambda: f64) -> Result<f64> {
    let thr = map_threshold_poisson(input, lambda)?;
    let q = input.mass_high;
    Ok((1.0 - q) * poisson_upper_tail(lambda, thr + 1)
        + q * poisson_cdf(lambda + input.amplitude, thr))
}

/// Chernoff-composed counterpart of [`pe_exact_poisson`]: each exact tail is
/// replaced by the exponential tail bound at `xi = threshold`.
///
/// Requires the tail-bound regimes `threshold > lambda` and
/// `threshold < lambda + eta_0`.
pub fn pe_chernoff_poisson(input: &BinaryInput, lambda: f64) -> Result<f64> {
    let thr = map_threshold_poisson(input, lambda)? as f64;
    if thr <= lambda {
        return Err(Error::Regime("tail bound needs threshold > lambda"));
    }
    if thr >= lambda + input.amplitude {
        return Err(Error::Regime("tail bound needs threshold < lambda + eta_0"));
    }
    let q = input.mass_high;
    let low = poisson_tail_bounds(lambda, thr)?.bound;
    let high = poisson_tail_bounds(lambda + input.amplitude, thr)?.bound;
    Ok((1.0 - q) * low + q * high)
}

/// Error probability divided by `E`, stable for any `L`.
fn pe_per_eps(input: &BinaryInput, lambda: f64) -> Result<f64> {
    let thr = map_threshold_poisson(input, lambda)?;
    let q = input.mass_high;
    let term_low =
        (1.0 - q) * libm::exp(input.log_inv_eps + log_poisson_upper_tail(lambda, thr + 1));
    let term_high = poisson_cdf(lambda + input.amplitude, thr) / input.amplitude;
    Ok(term_low + term_high)
}

/// Fano lower bound `H(X_B) - H_b(P_e)` for the Poisson binary input, with
/// the exact two-point entropy and exact error probability.
pub fn fano_lower_bound_poisson(input: &BinaryInput, lambda: f64) -> Result<BoundReport> {
    let l = input.log_inv_eps;
    let eta0 = input.amplitude;
    let q = input.mass_high;
    let entropy_pe = (l + libm::log(eta0)) / eta0 + low_mass_entropy_per_eps(q, eta0, l);
    let pe_pe = pe_per_eps(input, lambda)?;
    let hb_pe = hb_per_eps(pe_pe, l);
    Ok(BoundReport::from_per_eps(
        input.epsilon,
        vec![("entropy_input", entropy_pe), ("minus_hb_pe", -hb_pe)],
        vec![
            ("epsilon", input.epsilon),
            ("log_inv_eps", l),
            ("amplitude", eta0),
            ("mass_high", q),
            ("a_param", input.a_param),
            ("lambda", lambda),
            ("pe_per_eps", pe_pe),
        ],
        vec![
            ("informative", entropy_pe - hb_pe > 0.0),
            ("paper_regime", input.a_param > 1.0),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * b.abs().max(1e-300), "{a} vs {b}");
    }

    #[test]
    fn solve_eta_golden() {
        let s = solve_eta(1.0, 1.1, 1e-3).unwrap();
        close(s.rhs, 7.59853080688035, 1e-13);
        close(s.eta_real, 5.47109489451446, 1e-10);
        assert_eq!(s.eta_int, 5);
        close(s.beta, 0.0016, 1e-12);
        // plugging the root back reproduces the rhs
        let lhs = (s.eta_real - 1.0) * libm::log(s.eta_real);
        assert!((lhs - s.rhs).abs() < 1e-9 * (1.0 + s.rhs));
    }

    #[test]
    fn solve_eta_snaps_exact_integer_roots() {
        // at lambda = 0.5, a_p = 1.5, E = 1e-3 the root is exactly 5
        let s = solve_eta(0.5, 1.5, 1e-3).unwrap();
        assert_eq!(s.eta_int, 5, "eta_real={}", s.eta_real);
        close(s.eta_real, 5.0, 1e-10);
    }

    #[test]
    fn eta_monotone_in_shrinking_eps() {
        let mut prev = 0u64;
        for k in 2..=12 {
            let s = solve_eta(1.0, 1.2, libm::pow(10.0, -f64::from(k))).unwrap();
            assert!(s.eta_int >= prev);
            prev = s.eta_int;
        }
    }

    #[test]
    fn eta_asymptotics_golden_and_trend() {
        let e = eta_asymptotics(1.0, 1.5, 1e-6).unwrap();
        close(e.eta_est, 7.89219653038723, 1e-12);
        let e = eta_asymptotics(1.0, 1.5, 1e-8).unwrap();
        close(e.log_eta_est, 2.91347398692779, 1e-13);
        assert!(eta_asymptotics(1.0, 1.5, 0.1).is_err());

        // relative error decreasing along a deep L sweep
        let mut prev = f64::INFINITY;
        for k in [16u32, 32, 64, 128] {
            let l = f64::from(k) * libm::log(10.0);
            let est = eta_asymptotics_l(1.0, 1.5, l).unwrap().eta_est;
            let s = solve_eta_l(1.0, 1.5, l).unwrap();
            let rel = (est - s.eta_real).abs() / s.eta_real;
            assert!(rel < prev, "rel err not decreasing at 1e-{k}: {rel}");
            prev = rel;
        }
        // frozen endpoints of the sweep
        let s = solve_eta_l(1.0, 1.5, 16.0 * libm::log(10.0)).unwrap();
        let est = eta_asymptotics_l(1.0, 1.5, 16.0 * libm::log(10.0))
            .unwrap()
            .eta_est;
        close((est - s.eta_real).abs() / s.eta_real, 0.217402987658718, 1e-9);
    }

    #[test]
    fn upper_bound_breakdown_golden() {
        let p = PoissonBoundParams::new(1e-6, 1.1, 1.0, 0.5).unwrap();
        let r = upper_bound_poisson(&p).unwrap();
        close(r.param("eta_real").unwrap(), 8.21585366217667, 1e-10);
        assert_eq!(r.param("eta_int").unwrap(), 8.0);
        close(r.param("bracket").unwrap(), -6.11754238740426, 1e-12);
        close(r.term("log1mbeta").unwrap(), 4.76837271889999e-7, 1e-11);
        close(r.term("lambda_log").unwrap(), 9.99999500000333e-7, 1e-12);
        close(r.term("linear_eps").unwrap(), 1.73976865799961e-6, 1e-12);
        close(r.term("head_pmf").unwrap(), 1.23586118770912e-4, 1e-12);
        close(r.term("c3_dominant").unwrap(), 2.07944154167984e-6, 1e-12);
        close(r.term("c3_factorial").unwrap(), 1.51782498472591e-4, 1e-12);
        close(r.term("c3_sqrt").unwrap(), 3.65809138971188e-7, 1e-12);
        close(r.term("c3_stirling").unwrap(), 4.87192933208124e-7, 1e-12);
        close(r.value, 2.81517666287252e-4, 1e-12);
        assert!(r.all_valid());
    }

    #[test]
    fn validity_bracket_golden() {
        close(validity_bracket(1.0, 0.5, 8), -6.11754238740426, 1e-12);
    }

    #[test]
    fn upper_bound_dominance_in_the_deep_regime() {
        // the E log(eta/lambda) term leads once the head pmf has decayed,
        // which at lambda = 1 requires a_P around 2 for budgets near 1e-8
        for k in [8u32, 10] {
            let p = PoissonBoundParams::new(libm::pow(10.0, -f64::from(k)), 2.0, 1.0, 0.5).unwrap();
            let r = upper_bound_poisson(&p).unwrap();
            let dom = r.term("c3_dominant").unwrap();
            for (name, v) in &r.terms {
                if *name != "c3_dominant" {
                    assert!(*v < dom, "1e-{k}: term {name}={v} dominant={dom}");
                }
            }
        }
    }

    #[test]
    fn upper_bound_flags_small_eta() {
        // eta <= lambda + 2 at a large dark current and mild budget
        let p = PoissonBoundParams::new(0.3, 1.1, 4.0, 0.5).unwrap();
        match upper_bound_poisson(&p) {
            Err(PoissonBoundError::ValidityViolated(v)) => {
                assert_eq!(v.report.flag("eta_margin"), Some(false));
            }
            other => panic!("expected validity violation, got {other:?}"),
        }
    }

    #[test]
    fn upper_bound_flags_bracket_violation() {
        // geom_p close to 1 makes the tail-chain bracket positive
        let p = PoissonBoundParams::new(1e-3, 1.1, 1.0, 0.999).unwrap();
        match upper_bound_poisson(&p) {
            Err(PoissonBoundError::ValidityViolated(v)) => {
                assert_eq!(v.report.flag("bracket_nonpositive"), Some(false));
                assert!(v.report.param("bracket").unwrap() > 0.0);
                assert!(v.report.value.is_finite());
            }
            other => panic!("expected validity violation, got {other:?}"),
        }
    }

    #[test]
    fn asymptote_spot_values() {
        close(asymptote_poisson(1e-6).unwrap(), 2.62579191447601e-6, 1e-13);
        let e_e = libm::exp(-core::f64::consts::E);
        close(asymptote_poisson(e_e).unwrap(), e_e, 1e-12);
        assert!(asymptote_poisson(0.5).is_err());
        // value/E grows as E shrinks
        let a = asymptote_poisson(1e-4).unwrap() / 1e-4;
        let b = asymptote_poisson(1e-8).unwrap() / 1e-8;
        assert!(b > a);
    }

    #[test]
    fn binary_input_golden() {
        let b = binary_input_poisson(1e-3, 1.5, 1.0).unwrap();
        close(b.amplitude, 5.86009979250835, 1e-10);
        close(b.mass_high, 1.70645558165821e-4, 1e-10);
        assert_eq!(b.mean(), 1e-3);
    }

    #[test]
    fn map_threshold_golden() {
        let b = binary_input_poisson(1e-3, 1.5, 1.0).unwrap();
        assert_eq!(map_threshold_poisson(&b, 1.0).unwrap(), 7);
        // larger dark current inflates the threshold
        let thr_dim = map_threshold_poisson(&b, 40.0).unwrap();
        assert!(thr_dim > 7);
    }

    #[test]
    fn pe_exact_golden() {
        let b = binary_input_poisson(1e-3, 1.5, 1.0).unwrap();
        close(poisson_upper_tail(1.0, 8), 1.02491966746417e-5, 1e-12);
        close(
            poisson_cdf(1.0 + b.amplitude, 7),
            0.619549547184192,
            1e-12,
        );
        let pe = pe_exact_poisson(&b, 1.0).unwrap();
        close(pe, 1.15970825985383e-4, 1e-11);
        // the zero-symbol tail bound at xi = threshold
        let tb = poisson_tail_bounds(1.0, 7.0).unwrap();
        close(tb.bound, 4.89869737819076e-4, 1e-12);
        assert!(poisson_upper_tail(1.0, 8) <= tb.bound);
        // the high-tail regime thr < lambda + eta_0 fails here (thr = 7,
        // lambda + eta_0 = 6.86): the composed bound reports that
        assert!(matches!(
            pe_chernoff_poisson(&b, 1.0),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn pe_chernoff_golden_in_regime() {
        let b = binary_input_poisson(1e-8, 2.0, 1.0).unwrap();
        close(b.amplitude, 13.9710169039427, 1e-10);
        assert_eq!(map_threshold_poisson(&b, 1.0).unwrap(), 12);
        let pe = pe_exact_poisson(&b, 1.0).unwrap();
        close(pe, 2.56868963275464e-10, 1e-10);
        let ch = pe_chernoff_poisson(&b, 1.0).unwrap();
        close(ch, 7.23685798686476e-9, 1e-10);
        assert!(pe <= ch);
    }

    #[test]
    fn pe_chernoff_dominates_exact_on_random_valid_sets() {
        let mut rng = crate::rng::StreamRng::new(11, 0);
        let mut checked = 0;
        while checked < 50 {
            let a_p: f64 = 1.1 + 1.4 * rng.random::<f64>();
            let lambda: f64 = 0.3 + 4.0 * rng.random::<f64>();
            let k: f64 = 3.0 + 7.0 * rng.random::<f64>();
            let eps = libm::pow(10.0, -k);
            let b = binary_input_poisson(eps, a_p, lambda).unwrap();
            let Ok(ch) = pe_chernoff_poisson(&b, lambda) else {
                continue; // outside the tail-bound regime; exact still fine
            };
            let pe = pe_exact_poisson(&b, lambda).unwrap();
            assert!(pe <= ch, "pe={pe} chernoff={ch} a={a_p} l={lambda} eps={eps}");
            checked += 1;
        }
    }

    #[test]
    fn pe_degenerate_prior_limit() {
        // at a fixed amplitude, vanishing high mass pushes the threshold out
        // and the error collapses below the prior itself
        let mut prev = f64::INFINITY;
        for mass in [1e-4, 1e-6, 1e-8] {
            let b = BinaryInput::from_parts(6.0, mass).unwrap();
            let thr = map_threshold_poisson(&b, 1.0).unwrap();
            let pe = pe_exact_poisson(&b, 1.0).unwrap();
            assert!(pe < prev);
            assert!(pe <= mass + poisson_upper_tail(1.0, thr + 1));
            prev = pe;
        }
    }

    #[test]
    fn fano_golden() {
        let b = binary_input_poisson(1e-6, 1.5, 1.0).unwrap();
        let r = fano_lower_bound_poisson(&b, 1.0).unwrap();
        close(r.term("entropy_input").unwrap(), 1.83376407957683e-6, 1e-11);
        close(r.value, 6.30191290485931e-7, 1e-10);
        assert!(r.flag("informative").unwrap());
    }

    #[test]
    fn fano_near_regime_edge_flags_not_errors() {
        // close to E = exp(-e) the bound can go nonpositive; still a report
        let b = binary_input_poisson(0.06, 1.5, 1.0).unwrap();
        let r = fano_lower_bound_poisson(&b, 1.0).unwrap();
        assert_eq!(r.flag("informative").unwrap(), r.value > 0.0);
    }
}

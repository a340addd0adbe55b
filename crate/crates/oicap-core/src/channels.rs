//! Channel models, samplers, input laws, and the piecewise auxiliary output
//! distributions with exact normalization.

use crate::numerics::{
    integrate, log_poi_pmf, normal_pdf, normal_tail, poisson_cdf, RealInterval, SQRT_2PI,
};
use crate::rng::StreamRng;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};

/// Window half-width for Gaussian quadrature; tail mass beyond it is < 1e-31.
pub(crate) const GAUSS_WINDOW: f64 = 12.0;

/// A memoryless optical intensity channel.
///
/// Gaussian: `Y = x + Z`, `Z ~ N(0,1)`. Poisson: `Y ~ Poi(lambda + x)` with
/// dark current `lambda > 0`. Inputs are nonnegative intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelSpec {
    Gaussian,
    Poisson { dark_current: f64 },
}

impl ChannelSpec {
    pub fn gaussian() -> Self {
        ChannelSpec::Gaussian
    }

    /// Poisson channel; requires `dark_current > 0`.
    pub fn poisson(dark_current: f64) -> Result<Self> {
        if !(dark_current.is_finite() && dark_current > 0.0) {
            return Err(Error::Domain("Poisson channel requires dark_current > 0"));
        }
        Ok(ChannelSpec::Poisson { dark_current })
    }

    fn check_input(x: f64) -> Result<()> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::Constraint("channel input must be a finite intensity >= 0"));
        }
        Ok(())
    }

    /// Channel law at output `y` given input `x`: a density for the Gaussian
    /// channel, a pmf for the Poisson channel (where `y` must be integral).
    pub fn likelihood(&self, x: f64, y: f64) -> Result<f64> {
        Self::check_input(x)?;
        match *self {
            ChannelSpec::Gaussian => Ok(normal_pdf(y - x)),
            ChannelSpec::Poisson { dark_current } => {
                if !(y.is_finite() && y >= 0.0 && libm::floor(y) == y) {
                    return Err(Error::Domain("Poisson output must be a nonnegative integer"));
                }
                Ok(libm::exp(log_poi_pmf(y as u64, dark_current + x)))
            }
        }
    }

    /// One channel output draw for input `x`. Poisson counts are returned as
    /// exactly-integral `f64` values.
    pub fn sample(&self, x: f64, rng: &mut StreamRng) -> Result<f64> {
        Self::check_input(x)?;
        match *self {
            ChannelSpec::Gaussian => {
                let z: f64 = rng.sample(StandardNormal);
                Ok(x + z)
            }
            ChannelSpec::Poisson { dark_current } => {
                let distr = Poisson::new(dark_current + x)
                    .map_err(|_| Error::Domain("invalid Poisson mean"))?;
                Ok(distr.sample(rng))
            }
        }
    }
}

/// The average-intensity budget `E[X] <= epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintBudget {
    pub epsilon: f64,
}

impl ConstraintBudget {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Domain("intensity budget must be positive"));
        }
        Ok(Self { epsilon })
    }
}

/// A two-point input law: mass `epsilon / amplitude` at `amplitude`, the
/// rest at zero. Its mean equals `epsilon` by construction.
///
/// The law also carries `log_inv_eps = log(1/epsilon)` exactly, so detectors
/// and bounds remain computable when `epsilon` itself underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryInput {
    pub amplitude: f64,
    pub mass_high: f64,
    pub epsilon: f64,
    pub log_inv_eps: f64,
    pub a_param: f64,
}

impl BinaryInput {
    /// Builds the law from an exact budget value; the mean round-trips
    /// bit-exactly.
    pub(crate) fn from_budget(epsilon: f64, amplitude: f64, a_param: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain("binary input requires epsilon in (0,1)"));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Domain("binary input requires a positive amplitude"));
        }
        let mass_high = epsilon / amplitude;
        if mass_high >= 1.0 {
            return Err(Error::Constraint("binary input mass at the high point must be < 1"));
        }
        Ok(Self {
            amplitude,
            mass_high,
            epsilon,
            log_inv_eps: -libm::log(epsilon),
            a_param,
        })
    }

    /// Builds the law from `L = log(1/epsilon)` and the high amplitude.
    pub(crate) fn from_log_inv_eps(log_inv_eps: f64, amplitude: f64, a_param: f64) -> Result<Self> {
        if !(log_inv_eps.is_finite() && log_inv_eps > 0.0) {
            return Err(Error::Domain("binary input requires epsilon in (0,1)"));
        }
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Domain("binary input requires a positive amplitude"));
        }
        let epsilon = libm::exp(-log_inv_eps);
        let mass_high = libm::exp(-log_inv_eps - libm::log(amplitude));
        if mass_high >= 1.0 {
            return Err(Error::Constraint("binary input mass at the high point must be < 1"));
        }
        Ok(Self {
            amplitude,
            mass_high,
            epsilon,
            log_inv_eps,
            a_param,
        })
    }

    /// A synthetic two-point law with explicit mass; used by detectors and
    /// simulators that are defined for any prior.
    pub fn from_parts(amplitude: f64, mass_high: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(Error::Domain("binary input requires a positive amplitude"));
        }
        if !(mass_high > 0.0 && mass_high < 1.0) {
            return Err(Error::Domain("mass_high must lie in (0,1)"));
        }
        let epsilon = mass_high * amplitude;
        Ok(Self {
            amplitude,
            mass_high,
            epsilon,
            log_inv_eps: -libm::log(epsilon),
            a_param: f64::NAN,
        })
    }

    /// Mean intensity of the law; exactly the budget it was built for.
    pub fn mean(&self) -> f64 {
        self.epsilon
    }
}

/// Gaussian-body / exponential-tail auxiliary output distribution.
///
/// Density `(1-beta)/(sqrt(2 pi) Q(-t)) * exp(-y^2/2)` for `y <= t` and
/// `beta * exp(-(y-t))` beyond the knee; discontinuous at `t` by design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxDistGaussian {
    pub knee: f64,
    pub beta: f64,
    /// Cached body normalizer `(1-beta)/Q(-t)`.
    pub body_coeff: f64,
}

impl AuxDistGaussian {
    pub fn density(&self, y: f64) -> f64 {
        if y <= self.knee {
            self.body_density(y)
        } else {
            self.tail_density(y)
        }
    }

    pub fn log_density(&self, y: f64) -> f64 {
        if y <= self.knee {
            self.log_body_density(y)
        } else {
            self.log_tail_density(y)
        }
    }

    // the density jumps at the knee; integrals evaluate the pieces directly
    // so quadrature never straddles the discontinuity
    pub(crate) fn body_density(&self, y: f64) -> f64 {
        self.body_coeff * normal_pdf(y)
    }

    pub(crate) fn tail_density(&self, y: f64) -> f64 {
        self.beta * libm::exp(-(y - self.knee))
    }

    pub(crate) fn log_body_density(&self, y: f64) -> f64 {
        libm::log(self.body_coeff) - y * y / 2.0 - libm::log(SQRT_2PI)
    }

    pub(crate) fn log_tail_density(&self, y: f64) -> f64 {
        libm::log(self.beta) - (y - self.knee)
    }
}

/// Truncated-Poisson head / geometric tail auxiliary output distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxDistPoisson {
    pub dark_current: f64,
    pub knee: u64,
    pub geom_p: f64,
    pub beta: f64,
    /// Head normalizer `T = sum_{y < knee} Poi_lambda(y)`.
    pub head_mass: f64,
}

impl AuxDistPoisson {
    pub fn pmf(&self, y: u64) -> f64 {
        libm::exp(self.log_pmf(y))
    }

    pub fn log_pmf(&self, y: u64) -> f64 {
        if y < self.knee {
            libm::log1p(-self.beta) - libm::log(self.head_mass)
                + log_poi_pmf(y, self.dark_current)
        } else {
            libm::log(self.beta)
                + libm::log1p(-self.geom_p)
                + (y - self.knee) as f64 * libm::log(self.geom_p)
        }
    }
}

/// Either auxiliary distribution, tagged by channel kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AuxDist {
    Gaussian(AuxDistGaussian),
    Poisson(AuxDistPoisson),
}

/// Builds the Gaussian auxiliary distribution with knee `t > 0` and
/// `beta = exp(-t^2/2)`.
pub fn make_aux_gaussian(t: f64) -> Result<AuxDistGaussian> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Domain("auxiliary knee must satisfy t > 0"));
    }
    let beta = libm::exp(-t * t / 2.0);
    Ok(AuxDistGaussian {
        knee: t,
        beta,
        body_coeff: (1.0 - beta) / normal_tail(-t),
    })
}

/// Builds the Poisson auxiliary distribution with integer knee `eta >= 1`,
/// geometric tail parameter `p in (0,1)`, and
/// `beta = exp(-(eta - lambda) log(eta/lambda))`.
///
/// `eta > lambda` is required so that `beta < 1`.
pub fn make_aux_poisson(lambda: f64, eta: u64, p: f64) -> Result<AuxDistPoisson> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::Domain("dark current must be positive"));
    }
    if eta < 1 {
        return Err(Error::Domain("knee must satisfy eta >= 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("geometric parameter must lie in (0,1)"));
    }
    let etaf = eta as f64;
    if etaf <= lambda {
        return Err(Error::Regime("eta <= lambda makes beta >= 1"));
    }
    let beta = libm::exp(-(etaf - lambda) * libm::log(etaf / lambda));
    Ok(AuxDistPoisson {
        dark_current: lambda,
        knee: eta,
        geom_p: p,
        beta,
        head_mass: poisson_cdf(lambda, eta - 1),
    })
}

/// Relative entropy `D(W(.|x) || R)` of the channel law against an auxiliary
/// output distribution, evaluated numerically.
///
/// Gaussian integrals split the domain exactly at the knee; Poisson sums
/// truncate once both `y > mean` and the running tail is negligible.
pub fn kl_to_aux(ch: &ChannelSpec, x: f64, aux: &AuxDist) -> Result<f64> {
    ChannelSpec::check_input(x)?;
    match (ch, aux) {
        (ChannelSpec::Gaussian, AuxDist::Gaussian(r)) => {
            let lo = x - GAUSS_WINDOW;
            let hi = x + GAUSS_WINDOW;
            let mut total = 0.0;
            let piece = |a: f64, b: f64, body: bool| -> Result<f64> {
                let integrand = |y: f64| {
                    let lw = -((y - x) * (y - x)) / 2.0 - libm::log(SQRT_2PI);
                    let lr = if body {
                        r.log_body_density(y)
                    } else {
                        r.log_tail_density(y)
                    };
                    libm::exp(lw) * (lw - lr)
                };
                integrate(integrand, RealInterval::new(a, b)?, 1e-13)
            };
            if lo < r.knee {
                total += piece(lo, hi.min(r.knee), true)?;
            }
            if hi > r.knee {
                total += piece(lo.max(r.knee), hi, false)?;
            }
            Ok(total)
        }
        (ChannelSpec::Poisson { dark_current }, AuxDist::Poisson(r)) => {
            if (r.dark_current - dark_current).abs() > 1e-12 * dark_current {
                return Err(Error::Usage("auxiliary dark current does not match the channel"));
            }
            let mean = dark_current + x;
            let mut total = 0.0;
            let mut y = 0u64;
            let cap = poisson_sum_cap(mean);
            loop {
                let lw = log_poi_pmf(y, mean);
                let w = libm::exp(lw);
                total += w * (lw - r.log_pmf(y));
                y += 1;
                if y > cap {
                    break;
                }
            }
            Ok(total)
        }
        _ => Err(Error::Usage("auxiliary distribution kind does not match the channel")),
    }
}

/// Truncation cap for Poisson output sums: `mean + 50 sqrt(mean) + 50`.
pub(crate) fn poisson_sum_cap(mean: f64) -> u64 {
    (mean + 50.0 * libm::sqrt(mean) + 50.0) as u64
}

/// Numeric total mass of an auxiliary distribution; must be 1 within 1e-10.
pub fn aux_total_mass(aux: &AuxDist) -> Result<f64> {
    match aux {
        AuxDist::Gaussian(r) => {
            // body mass below -12 is under 1e-31 regardless of the knee
            let body = integrate(
                |y| r.body_density(y),
                RealInterval::new(-GAUSS_WINDOW, r.knee)?,
                1e-13,
            )?;
            // exponential tail mass integrates to beta in closed form; quadrature
            // over a finite stretch double-checks the density itself
            let tail = integrate(
                |y| r.tail_density(y),
                RealInterval::new(r.knee, r.knee + 80.0)?,
                1e-13,
            )?;
            Ok(body + tail)
        }
        AuxDist::Poisson(r) => {
            let mut sum = 0.0;
            let cap = poisson_sum_cap(r.dark_current)
                .max(r.knee + (80.0 / -libm::log(r.geom_p)) as u64 + 80);
            for y in 0..=cap {
                sum += r.pmf(y);
            }
            Ok(sum)
        }
    }
}

/// Per-output normalization check for the channel law at input `x`.
pub fn likelihood_total_mass(ch: &ChannelSpec, x: f64) -> Result<f64> {
    match ch {
        ChannelSpec::Gaussian => integrate(
            |y| normal_pdf(y - x),
            RealInterval::new(x - GAUSS_WINDOW, x + GAUSS_WINDOW)?,
            1e-13,
        ),
        ChannelSpec::Poisson { dark_current } => {
            let mean = dark_current + x;
            let mut sum = 0.0;
            for y in 0..=poisson_sum_cap(mean) {
                sum += libm::exp(log_poi_pmf(y, mean));
            }
            Ok(sum)
        }
    }
}

/// The output support of the mixed law for a discrete input, as quadrature
/// segments (Gaussian) or a summation cap (Poisson).
pub(crate) fn gaussian_segments(support: &[f64]) -> Vec<(f64, f64)> {
    let lo = support.iter().copied().fold(f64::INFINITY, f64::min) - GAUSS_WINDOW;
    let hi = support.iter().copied().fold(f64::NEG_INFINITY, f64::max) + GAUSS_WINDOW;
    let mut knots: Vec<f64> = vec![lo];
    for &x in support {
        if x > lo && x < hi {
            knots.push(x);
        }
    }
    knots.push(hi);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    knots.dedup();
    knots.windows(2).map(|w| (w[0], w[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol * (1.0 + b.abs()), "{a} vs {b}");
    }

    #[test]
    fn likelihood_spot_values() {
        let g = ChannelSpec::gaussian();
        close(g.likelihood(0.0, 0.0).unwrap(), 0.398942280401433, 1e-14);
        let p = ChannelSpec::poisson(1.0).unwrap();
        close(p.likelihood(0.0, 0.0).unwrap(), 0.367879441171442, 1e-14);
        close(p.likelihood(2.0, 3.0).unwrap(), 0.224041807655388, 1e-13);
        assert!(g.likelihood(-0.5, 0.0).is_err());
        assert!(p.likelihood(1.0, 2.5).is_err());
        assert!(ChannelSpec::poisson(0.0).is_err());
    }

    #[test]
    fn likelihood_normalizes() {
        for ch in [ChannelSpec::gaussian(), ChannelSpec::poisson(1.0).unwrap()] {
            for x in [0.0, 0.7, 3.0, 11.5] {
                let m = likelihood_total_mass(&ch, x).unwrap();
                assert!((m - 1.0).abs() < 1e-10, "{ch:?} x={x} mass={m}");
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let ch = ChannelSpec::poisson(1.0).unwrap();
        let mut a = StreamRng::new(42, 0);
        let mut b = StreamRng::new(42, 0);
        for _ in 0..100 {
            assert_eq!(ch.sample(3.0, &mut a).unwrap(), ch.sample(3.0, &mut b).unwrap());
        }
    }

    #[test]
    fn gaussian_sample_mean_in_clt_interval() {
        let ch = ChannelSpec::gaussian();
        let mut rng = StreamRng::new(1, 0);
        let n = 1_000_000u32;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += ch.sample(5.0, &mut rng).unwrap();
        }
        let mean = sum / f64::from(n);
        assert!((mean - 5.0).abs() < 4e-3, "mean {mean}");
    }

    #[test]
    fn poisson_sample_variance_in_clt_interval() {
        let ch = ChannelSpec::poisson(1.0).unwrap();
        let mut rng = StreamRng::new(2, 0);
        let n = 1_000_000u32;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let y = ch.sample(3.0, &mut rng).unwrap();
            s1 += y;
            s2 += y * y;
        }
        let mean = s1 / f64::from(n);
        let var = s2 / f64::from(n) - mean * mean;
        assert!((var - 4.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn aux_gaussian_spot_values() {
        let r = make_aux_gaussian(1.0).unwrap();
        close(r.beta, 0.606530659712633, 1e-14);
        let mass = aux_total_mass(&AuxDist::Gaussian(r)).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);

        let t = 1.5 * libm::sqrt(libm::log(100.0));
        close(t, 3.21894903943402, 1e-14);
        let r = make_aux_gaussian(t).unwrap();
        close(r.beta, 0.00562341325190349, 1e-13);

        assert!(make_aux_gaussian(0.0).is_err());
        assert!(make_aux_gaussian(-1.0).is_err());
    }

    #[test]
    fn aux_poisson_spot_values() {
        let r = make_aux_poisson(1.0, 5, 0.5).unwrap();
        close(r.beta, 0.0016, 1e-14);
        close(r.head_mass, 0.996340153172656, 1e-13);
        let mass = aux_total_mass(&AuxDist::Poisson(r)).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);

        // eta = 1: the head is the single point {0}
        let r = make_aux_poisson(0.5, 1, 0.5).unwrap();
        close(r.beta, 0.707106781186548, 1e-13);
        close(r.head_mass, 0.606530659712633, 1e-13);
        let mass = aux_total_mass(&AuxDist::Poisson(r)).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);

        // beta >= 1 when eta <= lambda
        assert!(make_aux_poisson(1.0, 1, 0.5).is_err());
        assert!(make_aux_poisson(3.0, 2, 0.5).is_err());
        assert!(make_aux_poisson(1.0, 0, 0.5).is_err());
        assert!(make_aux_poisson(1.0, 5, 1.0).is_err());
    }

    #[test]
    fn kl_to_aux_matches_small_cases() {
        // body-matched Gaussian auxiliary: KL at x=0 is essentially zero
        let ch = ChannelSpec::gaussian();
        let aux = AuxDist::Gaussian(make_aux_gaussian(10.0).unwrap());
        let kl = kl_to_aux(&ch, 0.0, &aux).unwrap();
        assert!(kl.abs() < 1e-8, "kl={kl}");

        let ch = ChannelSpec::poisson(1.0).unwrap();
        let aux = AuxDist::Poisson(make_aux_poisson(1.0, 20, 0.5).unwrap());
        let kl = kl_to_aux(&ch, 0.0, &aux).unwrap();
        assert!(kl.abs() < 1e-6, "kl={kl}");

        // mismatched kinds
        let aux = AuxDist::Gaussian(make_aux_gaussian(1.0).unwrap());
        assert!(matches!(kl_to_aux(&ch, 0.0, &aux), Err(Error::Usage(_))));
    }

    #[test]
    fn binary_input_mean_is_exact() {
        let b = BinaryInput::from_parts(4.0, 0.25).unwrap();
        assert_eq!(b.mean(), 1.0);
        assert!(BinaryInput::from_parts(4.0, 1.0).is_err());
        assert!(BinaryInput::from_parts(0.0, 0.5).is_err());
    }

    #[test]
    fn sampler_histogram_matches_likelihood() {
        // chi-square goodness of fit at 1e6 draws, alpha = 0.001
        let n = 1_000_000u32;

        // Gaussian at x = 5: bins split at x + {-3,-2,-1,0,1,2,3}
        let ch = ChannelSpec::gaussian();
        let mut rng = StreamRng::new(7, 0);
        let edges = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
        let mut counts = [0u32; 8];
        for _ in 0..n {
            let z = ch.sample(5.0, &mut rng).unwrap() - 5.0;
            let mut bin = 0;
            while bin < edges.len() && z > edges[bin] {
                bin += 1;
            }
            counts[bin] += 1;
        }
        let mut chi2 = 0.0;
        let mut prev = 0.0;
        for (i, &c) in counts.iter().enumerate() {
            let cum = if i < edges.len() {
                1.0 - normal_tail(edges[i])
            } else {
                1.0
            };
            let p = cum - prev;
            prev = cum;
            let exp = p * f64::from(n);
            chi2 += (f64::from(c) - exp) * (f64::from(c) - exp) / exp;
        }
        assert!(chi2 < 24.322, "gaussian chi2={chi2}"); // df=7, alpha=0.001

        // Poisson lambda=1, x=3: bins {0..11, >=12}
        let ch = ChannelSpec::poisson(1.0).unwrap();
        let mut rng = StreamRng::new(8, 0);
        let mut counts = [0u32; 13];
        for _ in 0..n {
            let y = ch.sample(3.0, &mut rng).unwrap() as usize;
            counts[y.min(12)] += 1;
        }
        let mut chi2 = 0.0;
        for (y, &c) in counts.iter().enumerate() {
            let p = if y < 12 {
                libm::exp(log_poi_pmf(y as u64, 4.0))
            } else {
                crate::numerics::poisson_upper_tail(4.0, 12)
            };
            let exp = p * f64::from(n);
            chi2 += (f64::from(c) - exp) * (f64::from(c) - exp) / exp;
        }
        assert!(chi2 < 32.909, "poisson chi2={chi2}"); // df=12, alpha=0.001
    }
}

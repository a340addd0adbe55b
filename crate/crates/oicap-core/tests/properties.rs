//! Randomized invariant suites for the numeric core.

use oicap_core::channels::{
    aux_total_mass, kl_to_aux, likelihood_total_mass, make_aux_gaussian, make_aux_poisson,
    AuxDist, ChannelSpec,
};
use oicap_core::gaussian::{binary_input_gaussian, map_threshold_gaussian, pe_exact_gaussian};
use oicap_core::numerics::{
    log_sum_exp, phi, phi_shift_bound, poisson_cdf, poisson_tail_bounds, poisson_upper_tail,
    q_tail,
};
use oicap_core::poisson::{binary_input_poisson, map_threshold_poisson, pe_exact_poisson};
use oicap_core::rng::StreamRng;
use proptest::prelude::*;
use rand::Rng as _;

#[test]
fn phi_shift_inequality_holds_on_random_pairs() {
    // 10^4 random (xi, tau) with xi in (0, 20], tau in [0, 2 xi]
    let mut rng = StreamRng::new(101, 0);
    for _ in 0..10_000 {
        let xi: f64 = 1e-6 + 20.0 * rng.random::<f64>();
        let tau: f64 = 2.0 * xi * rng.random::<f64>();
        let lhs = phi(xi - tau).unwrap();
        let rhs = phi_shift_bound(xi, tau).unwrap();
        assert!(lhs <= rhs + 1e-15, "xi={xi} tau={tau} lhs={lhs} rhs={rhs}");
    }
}

#[test]
fn gaussian_tail_times_x_below_density() {
    // 10^3 random x in [0, 8]
    let mut rng = StreamRng::new(102, 0);
    for _ in 0..1_000 {
        let x: f64 = 8.0 * rng.random::<f64>();
        assert!(x * q_tail(x).unwrap() <= phi(x).unwrap() + 1e-16, "x={x}");
    }
}

#[test]
fn chernoff_bounds_dominate_exact_tails_on_random_pairs() {
    let mut rng = StreamRng::new(103, 0);
    // 100 pairs split between the two tail regimes
    for i in 0..100u32 {
        let rho: f64 = 0.2 + 12.0 * rng.random::<f64>();
        let (xi, exact) = if i % 2 == 0 {
            // upper tail: xi above rho
            let xi = (rho + 1.0 + 15.0 * rng.random::<f64>()).ceil();
            (xi, poisson_upper_tail(rho, xi as u64))
        } else {
            // lower tail: integer xi strictly below rho
            let xi = (rho * rng.random::<f64>()).floor();
            let xi = if xi >= rho { rho - 1.0 } else { xi };
            if xi < 0.0 {
                continue;
            }
            (xi, poisson_cdf(rho, xi as u64))
        };
        if xi == rho {
            continue;
        }
        let bound = poisson_tail_bounds(rho, xi).unwrap();
        assert!(
            exact <= bound.bound * (1.0 + 1e-12),
            "rho={rho} xi={xi} exact={exact} bound={}",
            bound.bound
        );
    }
}

#[test]
fn auxiliary_distributions_normalize_on_random_parameters() {
    let mut rng = StreamRng::new(104, 0);
    for _ in 0..25 {
        let t: f64 = 0.1 + 11.9 * rng.random::<f64>();
        let aux = AuxDist::Gaussian(make_aux_gaussian(t).unwrap());
        let mass = aux_total_mass(&aux).unwrap();
        assert!((mass - 1.0).abs() < 1e-10, "gaussian t={t} mass={mass}");
    }
    for _ in 0..25 {
        let lambda: f64 = 0.1 + 4.9 * rng.random::<f64>();
        let eta = libm::ceil(lambda) as u64 + 1 + (rng.random::<f64>() * 25.0) as u64;
        let p: f64 = 0.05 + 0.9 * rng.random::<f64>();
        let aux = AuxDist::Poisson(make_aux_poisson(lambda, eta, p).unwrap());
        let mass = aux_total_mass(&aux).unwrap();
        assert!(
            (mass - 1.0).abs() < 1e-10,
            "poisson l={lambda} eta={eta} p={p} mass={mass}"
        );
    }
}

#[test]
fn likelihoods_normalize_on_random_inputs() {
    let mut rng = StreamRng::new(105, 0);
    for _ in 0..10 {
        let x: f64 = 20.0 * rng.random::<f64>();
        for ch in [ChannelSpec::gaussian(), ChannelSpec::poisson(1.3).unwrap()] {
            let mass = likelihood_total_mass(&ch, x).unwrap();
            assert!((mass - 1.0).abs() < 1e-10, "{ch:?} x={x} mass={mass}");
        }
    }
}

#[test]
fn kl_to_aux_is_nonnegative() {
    let mut rng = StreamRng::new(106, 0);
    let g_aux = AuxDist::Gaussian(make_aux_gaussian(3.0).unwrap());
    let p_aux = AuxDist::Poisson(make_aux_poisson(1.0, 6, 0.5).unwrap());
    let gch = ChannelSpec::gaussian();
    let pch = ChannelSpec::poisson(1.0).unwrap();
    for _ in 0..100 {
        let x: f64 = 15.0 * rng.random::<f64>();
        assert!(kl_to_aux(&gch, x, &g_aux).unwrap() >= -1e-12);
        assert!(kl_to_aux(&pch, x, &p_aux).unwrap() >= -1e-12);
    }
}

#[test]
fn gaussian_map_threshold_beats_grid_scan() {
    // 20 random (E, a): no scanned threshold does strictly better
    let mut rng = StreamRng::new(107, 0);
    for _ in 0..20 {
        let k: f64 = 2.0 + 6.0 * rng.random::<f64>();
        let eps = libm::pow(10.0, -k);
        let a: f64 = 1.5 + 1.0 * rng.random::<f64>();
        let input = binary_input_gaussian(eps, a).unwrap();
        let t_star = map_threshold_gaussian(&input).unwrap();
        let best = pe_exact_gaussian(&input).unwrap();
        let q = input.mass_high;
        let mut tau = t_star - 0.5;
        while tau <= t_star + 0.5 {
            let pe = (1.0 - q) * q_tail(tau).unwrap()
                + q * q_tail(input.amplitude - tau).unwrap();
            assert!(
                pe >= best - 1e-14,
                "eps={eps} a={a} tau={tau} pe={pe} best={best}"
            );
            tau += 1e-4;
        }
    }
}

#[test]
fn poisson_map_threshold_beats_integer_scan() {
    let mut rng = StreamRng::new(108, 0);
    for _ in 0..20 {
        let k: f64 = 2.0 + 6.0 * rng.random::<f64>();
        let eps = libm::pow(10.0, -k);
        let a: f64 = 1.1 + 1.4 * rng.random::<f64>();
        let lambda: f64 = 0.3 + 3.7 * rng.random::<f64>();
        let input = binary_input_poisson(eps, a, lambda).unwrap();
        let thr = map_threshold_poisson(&input, lambda).unwrap();
        let best = pe_exact_poisson(&input, lambda).unwrap();
        let q = input.mass_high;
        let hi_mean = lambda + input.amplitude;
        for cand in 0..=(5 * thr + 5) {
            let pe = (1.0 - q) * poisson_upper_tail(lambda, cand + 1)
                + q * poisson_cdf(hi_mean, cand);
            assert!(
                pe >= best * (1.0 - 1e-12),
                "eps={eps} a={a} l={lambda} cand={cand} pe={pe} best={best}"
            );
        }
    }
}

proptest! {
    #[test]
    fn prop_phi_symmetric(x in -30.0f64..30.0) {
        prop_assert_eq!(phi(x).unwrap(), phi(-x).unwrap());
    }

    #[test]
    fn prop_q_tail_complementary(x in -8.0f64..8.0) {
        let s = q_tail(x).unwrap() + q_tail(-x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-13);
    }

    #[test]
    fn prop_log_sum_exp_shift_invariant(
        v in proptest::collection::vec(-50.0f64..50.0, 1..8),
        c in -200.0f64..200.0,
    ) {
        let base = log_sum_exp(&v).unwrap();
        let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
        let s = log_sum_exp(&shifted).unwrap();
        prop_assert!((s - (base + c)).abs() < 1e-9 * (1.0 + base.abs() + c.abs()));
    }

    #[test]
    fn prop_binary_entropy_symmetric(p in 0.0f64..=1.0) {
        let h = oicap_core::gaussian::binary_entropy(p).unwrap();
        let h2 = oicap_core::gaussian::binary_entropy(1.0 - p).unwrap();
        prop_assert!((h - h2).abs() < 1e-12);
        prop_assert!((0.0..=core::f64::consts::LN_2 + 1e-12).contains(&h));
    }
}

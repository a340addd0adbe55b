//! Capacity machinery for optical intensity channels under an
//! average-intensity constraint.
//!
//! The crate is split by role:
//!
//! - [`numerics`]: scalar special functions, Poisson tail machinery,
//!   bisection and adaptive quadrature.
//! - [`channels`]: Gaussian / Poisson channel models, samplers, and the
//!   piecewise auxiliary output distributions used by the duality bounds.
//! - [`gaussian`] / [`poisson`]: closed-form upper bounds with per-term
//!   breakdowns, binary-input MAP detectors, and Fano lower bounds, all
//!   evaluable either at a concrete intensity budget or directly in
//!   `L = log(1/E)` so that regimes far below the representable range of
//!   `f64` stay computable.
//! - [`mi`]: independent ground truth — exact mutual information, a
//!   constrained Blahut–Arimoto solver, and a generic numeric duality bound.
//! - [`montecarlo`]: seeded, stratified Monte-Carlo simulation of the MAP
//!   detectors with Wilson confidence intervals.
//!
//! Everything is `no_std` (with `alloc`); all transcendental math routes
//! through `libm` so results are identical on every target.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channels;
pub mod gaussian;
pub mod mi;
pub mod montecarlo;
pub mod numerics;
pub mod poisson;
pub mod report;
pub mod rng;

use thiserror::Error;

/// Errors shared across the crate's numeric surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(&'static str),
    /// A nonnegativity or budget constraint on the channel input failed.
    #[error("constraint error: {0}")]
    Constraint(&'static str),
    /// A root-finding bracket does not straddle the target.
    #[error("bracket [{lo}, {hi}] does not straddle the target")]
    Bracket { lo: f64, hi: f64 },
    /// Adaptive refinement ran out of depth; carries the best estimate.
    #[error("accuracy not reached; best estimate {best}")]
    Accuracy { best: f64 },
    /// Mismatched argument kinds (e.g. Poisson threshold on a Gaussian run).
    #[error("usage error: {0}")]
    Usage(&'static str),
    /// Parameters left the regime in which a bound's derivation holds.
    #[error("regime error: {0}")]
    Regime(&'static str),
    /// An iterative solver did not converge; carries the last iterate.
    #[error("no convergence after {iterations} iterations; last estimate {last}")]
    Convergence { last: f64, iterations: u64 },
}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

//! Bound values with their additive per-term breakdown.

use alloc::vec::Vec;

/// An upper- or lower-bound value plus its additive breakdown and the named
/// validity checks that gate it.
///
/// Every bound in this crate is a finite sum of closed-form terms. Reports
/// carry the terms twice: in absolute nats, and normalized by the intensity
/// budget (`per_eps`). The normalized form stays finite and meaningful when
/// the budget itself underflows `f64` in `L = log(1/E)` sweeps, and the
/// absolute form is just the normalized one scaled back by `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    /// Bound value in nats. Equals the sum of `terms` values.
    pub value: f64,
    /// Bound value divided by the intensity budget.
    pub value_per_eps: f64,
    /// Additive breakdown in nats, in a fixed documented order.
    pub terms: Vec<(&'static str, f64)>,
    /// Breakdown divided by the intensity budget.
    pub terms_per_eps: Vec<(&'static str, f64)>,
    /// Echo of the inputs the bound was evaluated at.
    pub params: Vec<(&'static str, f64)>,
    /// Named validity checks; the bound's derivation holds iff all are true.
    pub validity: Vec<(&'static str, bool)>,
}

impl BoundReport {
    pub(crate) fn from_per_eps(
        eps: f64,
        terms_per_eps: Vec<(&'static str, f64)>,
        params: Vec<(&'static str, f64)>,
        validity: Vec<(&'static str, bool)>,
    ) -> Self {
        let value_per_eps: f64 = terms_per_eps.iter().map(|(_, v)| v).sum();
        let terms: Vec<_> = terms_per_eps.iter().map(|&(n, v)| (n, v * eps)).collect();
        let value: f64 = terms.iter().map(|(_, v)| v).sum();
        Self {
            value,
            value_per_eps,
            terms,
            terms_per_eps,
            params,
            validity,
        }
    }

    /// Looks up a term by name.
    pub fn term(&self, name: &str) -> Option<f64> {
        self.terms.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }

    /// Looks up a normalized term by name.
    pub fn term_per_eps(&self, name: &str) -> Option<f64> {
        self.terms_per_eps
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }

    /// Looks up an echoed parameter by name.
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| *n == name).map(|&(_, v)| v)
    }

    /// Looks up a validity flag by name.
    pub fn flag(&self, name: &str) -> Option<bool> {
        self.validity
            .iter()
            .find(|(n, _)| *n == name)
            .map(|&(_, v)| v)
    }

    /// True iff every validity check passed.
    pub fn all_valid(&self) -> bool {
        self.validity.iter().all(|&(_, ok)| ok)
    }
}

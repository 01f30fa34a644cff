//! Exact laws of the weighted Poisson field family: the integer-weighted
//! field (pmf/pgf/moments/covariance/capacity), its fractional-time variant
//! driven by a product of inverse stable subordinators, the signed
//! (difference) field and its fractional variant, general weighted
//! superposition mgfs, and path-integral moments.

mod fgprf;
mod gprf;
mod integral;
mod skellam;

pub use fgprf::{
    fgprf_cov, fgprf_moments, fgprf_pgf, fgprf_pmf, fgprf_pmf_table,
    inverse_subordinator_product_moments,
};
pub use gprf::{capacity_functional, gprf_cov, gprf_moments, gprf_pgf, gprf_pmf, gprf_pmf_table};
pub use integral::integral_moments;
pub use skellam::{
    fgspp_pgf, fgspp_pmf, fgspp_pmf_table, gspp_mgf, skellam_pmf, skellam_pmf_table,
};

pub(crate) use fgprf::WFactors;

use std::ops::RangeInclusive;

use thiserror::Error;

use crate::partitions::PartitionError;
use crate::specfun::SpecFunError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),
    #[error("table construction exceeded {0} support points")]
    ResourceLimit(usize),
}

impl ModelError {
    /// True when the failure is a series/tail convergence problem (CLI exit
    /// code 3) rather than a usage error.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            ModelError::SpecFun(SpecFunError::NonConvergence { .. })
                | ModelError::QuadratureFailure(_)
        )
    }
}

/// Positive per-weight rates (λ_1, ..., λ_k): weight j occurs with intensity
/// λ_j.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector {
    rates: Vec<f64>,
}

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self, ModelError> {
        if rates.is_empty() {
            return Err(ModelError::InvalidParams(
                "rate vector must have at least one component".into(),
            ));
        }
        if let Some(bad) = rates.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(ModelError::InvalidParams(format!(
                "rates must be positive and finite, got {bad}"
            )));
        }
        Ok(RateVector { rates })
    }

    pub fn k(&self) -> usize {
        self.rates.len()
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Σ λ_j.
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// Σ j λ_j.
    pub fn weighted_total(&self) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as f64 + 1.0) * l)
            .sum()
    }

    /// Σ j² λ_j.
    pub fn weighted_sq_total(&self) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let j = i as f64 + 1.0;
                j * j * l
            })
            .sum()
    }

    /// Σ λ_j (z^j − 1) — the exponent kernel of the pgf.
    pub(crate) fn pgf_kernel(&self, z: f64) -> f64 {
        self.rates
            .iter()
            .enumerate()
            .map(|(i, &l)| l * (z.powi(i as i32 + 1) - 1.0))
            .sum()
    }
}

/// Observation window: an anchored box [0,c_1]×...×[0,c_d], or a
/// half-open planar increment (s,s']×(t,t'] as used by covariance
/// operations.
#[derive(Clone, Debug, PartialEq)]
pub enum Window {
    Anchored { corner: Vec<f64> },
    Increment { s: (f64, f64), t: (f64, f64) },
}

impl Window {
    pub fn anchored(corner: Vec<f64>) -> Result<Self, ModelError> {
        if corner.is_empty() {
            return Err(ModelError::InvalidParams(
                "window dimension must be at least 1".into(),
            ));
        }
        if let Some(bad) = corner.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(ModelError::InvalidParams(format!(
                "window corner coordinates must be positive and finite, got {bad}"
            )));
        }
        Ok(Window::Anchored { corner })
    }

    pub fn increment(s0: f64, s1: f64, t0: f64, t1: f64) -> Result<Self, ModelError> {
        for v in [s0, s1, t0, t1] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::InvalidParams(format!(
                    "increment bounds must be nonnegative and finite, got {v}"
                )));
            }
        }
        if !(s0 < s1 && t0 < t1) {
            return Err(ModelError::InvalidParams(format!(
                "increment window requires s0 < s1 and t0 < t1, got ({s0},{s1}]x({t0},{t1}]"
            )));
        }
        Ok(Window::Increment {
            s: (s0, s1),
            t: (t0, t1),
        })
    }

    pub fn dimension(&self) -> usize {
        match self {
            Window::Anchored { corner } => corner.len(),
            Window::Increment { .. } => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        match self {
            Window::Anchored { corner } => corner.iter().product(),
            Window::Increment { s, t } => (s.1 - s.0) * (t.1 - t.0),
        }
    }

    /// Per-axis closed bounds [lo, hi] (the half-open distinction does not
    /// affect Lebesgue measure).
    fn bounds(&self) -> Vec<(f64, f64)> {
        match self {
            Window::Anchored { corner } => corner.iter().map(|&c| (0.0, c)).collect(),
            Window::Increment { s, t } => vec![*s, *t],
        }
    }

    /// Sides (s, t) of an anchored planar window.
    pub fn planar_sides(&self) -> Option<(f64, f64)> {
        match self {
            Window::Anchored { corner } if corner.len() == 2 => Some((corner[0], corner[1])),
            _ => None,
        }
    }

    pub fn intersection_measure(&self, other: &Window) -> Result<f64, ModelError> {
        if self.dimension() != other.dimension() {
            return Err(ModelError::InvalidParams(format!(
                "window dimensions differ: {} vs {}",
                self.dimension(),
                other.dimension()
            )));
        }
        let m = self
            .bounds()
            .iter()
            .zip(other.bounds().iter())
            .map(|(a, b)| (a.1.min(b.1) - a.0.max(b.0)).max(0.0))
            .product();
        Ok(m)
    }
}

/// Fractional orders (α, β) ∈ (0, 1]² of the two time coordinates; (1, 1)
/// recovers the ordinary field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrders {
    pub alpha: f64,
    pub beta: f64,
}

impl FracOrders {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, ModelError> {
        for v in [alpha, beta] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(ModelError::InvalidParams(format!(
                    "fractional orders must lie in (0, 1], got {v}"
                )));
            }
        }
        Ok(FracOrders { alpha, beta })
    }

    pub fn is_classical(&self) -> bool {
        self.alpha == 1.0 && self.beta == 1.0
    }

    /// s^α t^β.
    pub(crate) fn scale(&self, s: f64, t: f64) -> f64 {
        s.powf(self.alpha) * t.powf(self.beta)
    }
}

/// Paired rate vectors (same length) for the signed field: `plus` drives
/// positive-weight atoms, `minus` negative-weight ones. Both must be
/// strictly positive — one-sided fields are the unsigned model's job.
#[derive(Clone, Debug, PartialEq)]
pub struct SkellamRates {
    plus: RateVector,
    minus: RateVector,
}

impl SkellamRates {
    pub fn new(plus: RateVector, minus: RateVector) -> Result<Self, ModelError> {
        if plus.k() != minus.k() {
            return Err(ModelError::InvalidParams(format!(
                "rate vectors must have equal length, got {} and {}",
                plus.k(),
                minus.k()
            )));
        }
        Ok(SkellamRates { plus, minus })
    }

    pub fn k(&self) -> usize {
        self.plus.k()
    }

    pub fn plus(&self) -> &RateVector {
        &self.plus
    }

    pub fn minus(&self) -> &RateVector {
        &self.minus
    }

    /// Certified bound on the mass omitted by |n_j| <= W truncation on a
    /// window of the given measure.
    pub fn signed_truncation_bound(&self, area: f64, weight_bound: u32) -> f64 {
        crate::partitions::signed_truncation_bound(
            self.plus.rates(),
            self.minus.rates(),
            area,
            weight_bound,
        )
    }

    /// View as a general weighted family with index set {+1, −1}.
    pub fn to_gspp(&self) -> GsppRates {
        GsppRates {
            components: vec![(1.0, self.plus.clone()), (-1.0, self.minus.clone())],
        }
    }
}

/// General weighted superposition: a finite set of distinct nonzero real
/// index weights i, each carrying its own rate vector (λ_1^{(i)},…,λ_k^{(i)});
/// an atom of kind (i, j) contributes i·j to the field.
#[derive(Clone, Debug, PartialEq)]
pub struct GsppRates {
    components: Vec<(f64, RateVector)>,
}

impl GsppRates {
    pub fn new(components: Vec<(f64, RateVector)>) -> Result<Self, ModelError> {
        if components.is_empty() {
            return Err(ModelError::InvalidParams(
                "weighted family must have at least one index".into(),
            ));
        }
        for (pos, (w, _)) in components.iter().enumerate() {
            if !(*w != 0.0 && w.is_finite()) {
                return Err(ModelError::InvalidParams(format!(
                    "index weights must be nonzero and finite, got {w}"
                )));
            }
            if components[..pos].iter().any(|(u, _)| u == w) {
                return Err(ModelError::InvalidParams(format!(
                    "index weights must be distinct, got {w} twice"
                )));
            }
        }
        Ok(GsppRates { components })
    }

    pub fn components(&self) -> &[(f64, RateVector)] {
        &self.components
    }

    /// True when every index weight is an integer (required for sampling
    /// onto the integer lattice).
    pub fn integer_weights(&self) -> bool {
        self.components
            .iter()
            .all(|(w, _)| w.fract() == 0.0 && w.abs() <= 2f64.powi(31))
    }
}

/// Probability table on a contiguous integer support with a certified bound
/// on everything it omits (truncation tails plus evaluation error).
#[derive(Clone, Debug)]
pub struct PmfTable {
    min_n: i64,
    probs: Vec<f64>,
    tail_mass_bound: f64,
}

impl PmfTable {
    pub fn new(min_n: i64, probs: Vec<f64>, tail_mass_bound: f64) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::InvalidParams(
                "pmf table needs at least one support point".into(),
            ));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(ModelError::InvalidParams(
                "pmf table entries must be finite and nonnegative".into(),
            ));
        }
        if !(tail_mass_bound >= 0.0 && tail_mass_bound.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "tail mass bound must be finite and nonnegative, got {tail_mass_bound}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + tail_mass_bound + 1e-9 {
            return Err(ModelError::InvalidParams(format!(
                "pmf table mass {total} exceeds 1 beyond its error budget"
            )));
        }
        Ok(PmfTable {
            min_n,
            probs,
            tail_mass_bound,
        })
    }

    pub fn support(&self) -> RangeInclusive<i64> {
        self.min_n..=(self.min_n + self.probs.len() as i64 - 1)
    }

    pub fn prob(&self, n: i64) -> f64 {
        if n < self.min_n {
            return 0.0;
        }
        self.probs
            .get((n - self.min_n) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass_bound
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.min_n + i as i64, p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(n, p)| n as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter()
            .map(|(n, p)| {
                let d = n as f64 - m;
                d * d * p
            })
            .sum()
    }
}

pub(crate) fn check_positive(value: f64, what: &str) -> Result<(), ModelError> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "{what} must be positive and finite, got {value}"
        )));
    }
    Ok(())
}

pub(crate) fn check_tol(tol: f64) -> Result<(), ModelError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    Ok(())
}

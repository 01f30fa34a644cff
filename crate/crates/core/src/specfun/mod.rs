//! Series special functions with certified truncation bounds.
//!
//! Everything here evaluates entire (or finite-radius) power series whose
//! coefficients are built from gamma functions: the generalized Wright
//! function ₂Ψ₂, the one- and three-parameter Mittag-Leffler functions, and
//! the modified Bessel function of the first kind. Results carry the number
//! of terms used and a certified bound on the truncation + rounding error.

mod gamma;
mod mittag;
mod series;

pub(crate) use gamma::ln_gamma;
pub(crate) use series::{GammaSeries, KahanSum, MomentLadder};

use thiserror::Error;

/// Default absolute tolerance for series evaluation.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Default cap on the number of series terms.
pub const MAX_TERMS: usize = 20_000;

#[derive(Debug, Error)]
pub enum SpecFunError {
    /// The series did not reach the requested tolerance within the term
    /// budget (slow or conditional convergence, or outside the radius).
    #[error("series did not converge within {terms_used} terms (best bound {bound:.3e})")]
    NonConvergence { terms_used: usize, bound: f64 },
    /// Parameters outside the function's domain.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Value of a truncated series together with its error accounting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    /// Certified bound on |returned value - true sum| (truncation tail plus
    /// rounding accounting).
    pub truncation_bound: f64,
}

/// Parameters of the generalized Wright function ₂Ψ₂: two numerator pairs
/// (a_i, A_i) and two denominator pairs (b_j, B_j), all offsets positive and
/// steps nonnegative, so that no gamma argument ever hits a pole.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WrightParams {
    upper: [(f64, f64); 2],
    lower: [(f64, f64); 2],
}

impl WrightParams {
    pub fn new(upper: [(f64, f64); 2], lower: [(f64, f64); 2]) -> Result<Self, SpecFunError> {
        let p = WrightParams { upper, lower };
        p.series(0.0).validate()?;
        Ok(p)
    }

    pub fn upper(&self) -> [(f64, f64); 2] {
        self.upper
    }

    pub fn lower(&self) -> [(f64, f64); 2] {
        self.lower
    }

    fn series(&self, const_ln: f64) -> GammaSeries {
        GammaSeries {
            const_ln,
            num: self.upper.to_vec(),
            den: self.lower.to_vec(),
            factorial: true,
        }
    }
}

/// Generalized Wright function ₂Ψ₂(x) = Σ_r Π Γ(a_i + A_i r) / Π Γ(b_j + B_j r) · x^r / r!.
///
/// Entire when Δ = ΣB + 1 − ΣA > 0; for Δ = 0 the radius is finite and
/// arguments at or beyond it return `NonConvergence`; Δ < 0 is rejected as
/// `InvalidParams` (zero radius).
pub fn wright_2psi2(params: &WrightParams, x: f64, tol: f64) -> Result<SeriesResult, SpecFunError> {
    params
        .series(0.0)
        .evaluate(x, tol, MAX_TERMS)
        .map(Into::into)
}

/// One-parameter Mittag-Leffler function E_α(x) for α ∈ (0, 1].
///
/// Dispatches between the power series (with high-precision re-summation in
/// the cancellation regime) and, for deeply negative arguments, a spectral
/// integral representation that stays accurate down to x ≈ -50 and far
/// beyond.
pub fn mittag_leffler(alpha: f64, x: f64, tol: f64) -> Result<SeriesResult, SpecFunError> {
    mittag::mittag_leffler(alpha, x, tol)
}

/// Three-parameter (Prabhakar) Mittag-Leffler function
/// E^γ_{α,β}(x) = Σ_r (γ)_r x^r / (Γ(α r + β) r!), α > 0, β > 0.
///
/// γ may be any real that is not a non-positive integer (those hit the
/// Pochhammer degeneracy and are rejected).
pub fn mittag_leffler_3(
    alpha: f64,
    beta: f64,
    gamma: f64,
    x: f64,
    tol: f64,
) -> Result<SeriesResult, SpecFunError> {
    mittag::mittag_leffler_3(alpha, beta, gamma, x, tol)
}

/// Modified Bessel function of the first kind I_ν(x), ν >= 0, x >= 0.
pub fn bessel_i(nu: f64, x: f64, tol: f64) -> Result<SeriesResult, SpecFunError> {
    if !(nu >= 0.0 && nu.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "bessel_i requires nu >= 0, got {nu}"
        )));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "bessel_i requires x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(SeriesResult {
            value: if nu == 0.0 { 1.0 } else { 0.0 },
            terms_used: 1,
            truncation_bound: 0.0,
        });
    }
    let half = 0.5 * x;
    let series = GammaSeries {
        const_ln: nu * half.ln(),
        num: vec![],
        den: vec![(nu + 1.0, 1.0)],
        factorial: true,
    };
    series.evaluate(half * half, tol, MAX_TERMS).map(Into::into)
}

/// Coefficient produced by the (Caputo-type) fractional derivative of order
/// β ∈ (0, 1] acting on the power u^p: returns Γ(p+1)/Γ(p−β+1) for p > 0
/// and 0 for p = 0 (constants are annihilated).
pub fn caputo_term_derivative(p: f64, beta: f64) -> Result<f64, SpecFunError> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "power must satisfy p >= 0, got {p}"
        )));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(SpecFunError::InvalidParams(format!(
            "derivative order must lie in (0, 1], got {beta}"
        )));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    Ok((ln_gamma(p + 1.0) - ln_gamma(p - beta + 1.0)).exp())
}

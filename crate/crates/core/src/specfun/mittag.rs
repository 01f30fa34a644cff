//! Mittag-Leffler functions: series route with high-precision fallback, and
//! a spectral-integral route for deeply negative arguments where the
//! alternating series would need astronomical precision.

use std::f64::consts::PI;

use super::gamma::ln_gamma;
use super::series::{GammaSeries, KahanSum};
use super::{SeriesResult, SpecFunError, MAX_TERMS};
use crate::quad::{adaptive_gl15, QuadError};

/// Below this argument the one-parameter series is abandoned for the
/// integral representation (for α away from 1).
const SERIES_FLOOR: f64 = -5.0;
/// For α above this, sin(απ) degenerates and the series+MPFR route stays
/// affordable, so it is used for all arguments.
const INTEGRAL_ALPHA_MAX: f64 = 0.9;

pub(super) fn mittag_leffler(alpha: f64, x: f64, tol: f64) -> Result<SeriesResult, SpecFunError> {
    if !(alpha > 0.0 && alpha <= 1.0 && alpha.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "mittag_leffler requires alpha in (0, 1], got {alpha}"
        )));
    }
    if !x.is_finite() {
        return Err(SpecFunError::InvalidParams(format!(
            "mittag_leffler requires a finite argument, got {x}"
        )));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if alpha == 1.0 {
        // E_1(x) = e^x exactly.
        let value = x.exp();
        return Ok(SeriesResult {
            value,
            terms_used: 1,
            truncation_bound: 4.0 * f64::EPSILON * value.abs().max(f64::MIN_POSITIVE) * (1.0 + x.abs()),
        });
    }
    if x < SERIES_FLOOR && alpha <= INTEGRAL_ALPHA_MAX {
        return ml_integral(alpha, -x, tol);
    }
    let series = GammaSeries {
        const_ln: 0.0,
        num: vec![],
        den: vec![(1.0, alpha)],
        factorial: false,
    };
    series.evaluate(x, tol, MAX_TERMS).map(Into::into)
}

/// Spectral representation for E_α(-y), y > 0, 0 < α < 1:
///
///   E_α(-y) = sin(απ)/(απ) ∫_0^∞ exp(-(yw)^{1/α}) / (w² + 2w·cos(απ) + 1) dw
///
/// (the substitution absorbing the w^{α-1} endpoint factor is already
/// applied). The integrand is smooth and positive; the tail beyond the
/// cutoff is certified through the incomplete-gamma envelope.
fn ml_integral(alpha: f64, y: f64, tol: f64) -> Result<SeriesResult, SpecFunError> {
    debug_assert!(y > 0.0 && alpha > 0.0 && alpha < 1.0);
    let k = (alpha * PI).sin() / (alpha * PI);
    let c = (alpha * PI).cos();
    let inv_alpha = 1.0 / alpha;
    // cutoff where the exponential factor reaches e^-46 ~ 1e-20
    let u_cut: f64 = 46.0;
    let w_max = u_cut.powf(alpha) / y;
    let f = |w: f64| {
        if w <= 0.0 {
            return k; // limit at w = 0
        }
        k * (-(y * w).powf(inv_alpha)).exp() / (w * (w + 2.0 * c) + 1.0)
    };
    let quad_tol = 0.25 * tol;
    let q = match adaptive_gl15(f, 0.0, w_max, quad_tol) {
        Ok(q) => q,
        Err(QuadError::Failure { .. }) => {
            return Err(SpecFunError::NonConvergence {
                terms_used: 0,
                bound: f64::INFINITY,
            })
        }
    };
    // Tail: integrand <= k/den_min * exp(-(yw)^{1/α}); substituting
    // u = (yw)^{1/α} gives (α/y)Γ(α, U) <= (α/y) U^{α-1} e^{-U} for α < 1.
    let den_min = if c < 0.0 {
        let s = (alpha * PI).sin();
        s * s
    } else {
        1.0
    };
    let tail = k / den_min * (alpha / y) * u_cut.powf(alpha - 1.0) * (-u_cut).exp();
    Ok(SeriesResult {
        value: q.value,
        terms_used: q.panels,
        truncation_bound: q.error_estimate + tail,
    })
}

pub(super) fn mittag_leffler_3(
    alpha: f64,
    beta: f64,
    gamma: f64,
    x: f64,
    tol: f64,
) -> Result<SeriesResult, SpecFunError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "mittag_leffler_3 requires alpha > 0, got {alpha}"
        )));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(SpecFunError::InvalidParams(format!(
            "mittag_leffler_3 requires beta > 0, got {beta}"
        )));
    }
    if !gamma.is_finite() || !x.is_finite() {
        return Err(SpecFunError::InvalidParams(
            "mittag_leffler_3 requires finite gamma and x".into(),
        ));
    }
    if gamma <= 0.0 && (gamma - gamma.round()).abs() < 1e-12 {
        return Err(SpecFunError::InvalidParams(format!(
            "mittag_leffler_3 rejects non-positive integer gamma, got {gamma}"
        )));
    }

    // Split off the finitely many leading terms until the Pochhammer factor
    // (γ)_r has settled sign: for r >= r0 := max(0, floor(-γ)+1) all factors
    // γ + r0 + q are positive and the tail is a gamma-ratio series.
    let r0 = if gamma > 0.0 {
        0usize
    } else {
        let r = (-gamma).floor() + 1.0;
        if r > 1e6 {
            return Err(SpecFunError::InvalidParams(format!(
                "gamma = {gamma} is too negative for series evaluation"
            )));
        }
        r as usize
    };

    let mut prefix = KahanSum::default();
    let mut prefix_abs = 0.0;
    let mut poch = 1.0f64; // (γ)_r
    let mut xpow = 1.0f64;
    for r in 0..r0 {
        let t = poch * xpow / ((ln_gamma(alpha * r as f64 + beta) + ln_gamma(r as f64 + 1.0)).exp());
        prefix.add(t);
        prefix_abs += t.abs();
        poch *= gamma + r as f64;
        xpow *= x;
    }
    // poch == (γ)_{r0}, xpow == x^{r0}; tail = poch·x^{r0}/Γ(γ+r0) Σ_q Γ(γ+r0+q) x^q / (Γ(α(r0+q)+β) Γ(r0+q+1))
    let g0 = gamma + r0 as f64;
    let scale = poch * xpow;
    if scale == 0.0 {
        // x == 0 with r0 > 0 cannot happen (r0>0 implies gamma<0, poch != 0);
        // only x == 0, r0 == 0: series is 1/Γ(β).
        let value = (-ln_gamma(beta)).exp();
        return Ok(SeriesResult {
            value,
            terms_used: 1,
            truncation_bound: 8.0 * f64::EPSILON * value.abs(),
        });
    }
    let series = GammaSeries {
        const_ln: scale.abs().ln() - ln_gamma(g0),
        num: vec![(g0, 1.0)],
        den: vec![(alpha * r0 as f64 + beta, alpha), (r0 as f64 + 1.0, 1.0)],
        factorial: false,
    };
    let out = series.evaluate(x, tol, MAX_TERMS)?;
    let sign = scale.signum();
    Ok(SeriesResult {
        value: prefix.value() + sign * out.value,
        terms_used: r0 + out.terms_used,
        truncation_bound: out.truncation_bound + prefix_abs * 8.0 * f64::EPSILON,
    })
}

//! Moments of the path integral of the weighted field over [0,s]×[0,t]:
//! the accumulated count surface integrated against Lebesgue measure.

use super::{ModelError, RateVector};

/// (mean, variance) of ∫₀ˢ∫₀ᵗ M(x, y) dy dx:
/// mean = Σ jλ_j (st)²/4, variance = Σ j²λ_j (st)³/9. The degenerate
/// s·t = 0 case returns (0, 0).
pub fn integral_moments(rates: &RateVector, s: f64, t: f64) -> Result<(f64, f64), ModelError> {
    for v in [s, t] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "side lengths must be nonnegative and finite, got {v}"
            )));
        }
    }
    let st = s * t;
    Ok((
        rates.weighted_total() * st * st / 4.0,
        rates.weighted_sq_total() * st * st * st / 9.0,
    ))
}

//! Fractional-field samplers (counts on the random product clock) and the
//! weighted-field path integral.

use rand::Rng;

use super::counts::{jump_draw, poisson_draw, sample_gprf_area, GprfMethod};
use super::stable::sample_inverse_stable;
use super::RngStream;
use crate::model::{FracOrders, ModelError, RateVector, SkellamRates};

fn check_side(v: f64, what: &str) -> Result<(), ModelError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "{what} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

/// Fractional weighted count M^{α,β}(s,t): draw the two independent
/// inverse-stable clocks and evaluate the weighted field on the rectangle
/// of area L₁(s)·L₂(t).
pub fn sample_fgprf(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    rng: &mut RngStream,
) -> Result<u64, ModelError> {
    check_side(s, "s")?;
    check_side(t, "t")?;
    let l1 = sample_inverse_stable(frac.alpha, s, rng)?;
    let l2 = sample_inverse_stable(frac.beta, t, rng)?;
    Ok(sample_gprf_area(
        rates,
        l1 * l2,
        rng,
        GprfMethod::Superposition,
    ))
}

/// Fractional signed count S^{α,β}(s,t) = M₁(L₁(s)L₂(t)) − M₂(L₁(s)L₂(t))
/// with independent one-sided fields sharing the clock.
pub fn sample_fgspp(
    rates: &SkellamRates,
    frac: FracOrders,
    s: f64,
    t: f64,
    rng: &mut RngStream,
) -> Result<i64, ModelError> {
    check_side(s, "s")?;
    check_side(t, "t")?;
    let l1 = sample_inverse_stable(frac.alpha, s, rng)?;
    let l2 = sample_inverse_stable(frac.beta, t, rng)?;
    let area = l1 * l2;
    let plus = sample_gprf_area(rates.plus(), area, rng, GprfMethod::Superposition);
    let minus = sample_gprf_area(rates.minus(), area, rng, GprfMethod::Superposition);
    Ok(plus as i64 - minus as i64)
}

/// Path integral of the weighted field over [0,s]×[0,t] by its compound
/// representation: st · Σ_{r≤N} X_r · U_{r,1} U_{r,2} with N ~ Poisson(Λst),
/// X_r the jump sizes, and U_{r,·} iid uniform(0,1).
pub fn sample_gprf_integral(
    rates: &RateVector,
    s: f64,
    t: f64,
    rng: &mut RngStream,
) -> Result<f64, ModelError> {
    check_side(s, "s")?;
    check_side(t, "t")?;
    let st = s * t;
    let n = poisson_draw(rates.total() * st, rng);
    let mut acc = 0.0;
    for _ in 0..n {
        let x = jump_draw(rates, rng) as f64;
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        acc += x * u1 * u2;
    }
    Ok(st * acc)
}

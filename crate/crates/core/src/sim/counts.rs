//! Count samplers: plain Poisson fields, weighted fields via both exact
//! representations, weighted superpositions over signed index sets, and
//! independent thinning.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use super::{PointPattern, RngStream};
use crate::model::{GsppRates, ModelError, RateVector, Window};

pub(crate) fn poisson_draw(mean: f64, rng: &mut RngStream) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("positive finite Poisson mean")
        .sample(rng) as u64
}

/// Count of a plain Poisson field on the window: Poisson(λ|A|).
pub fn sample_prf(rate: f64, window: &Window, rng: &mut RngStream) -> Result<u64, ModelError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "rate must be positive and finite, got {rate}"
        )));
    }
    Ok(poisson_draw(rate * window.measure(), rng))
}

fn uniform_in(window: &Window, rng: &mut RngStream) -> Vec<f64> {
    match window {
        Window::Anchored { corner } => corner.iter().map(|&c| c * rng.random::<f64>()).collect(),
        Window::Increment { s, t } => vec![
            s.0 + (s.1 - s.0) * rng.random::<f64>(),
            t.0 + (t.1 - t.0) * rng.random::<f64>(),
        ],
    }
}

/// Poisson field realization with point locations, iid uniform given the
/// count; all marks are 1.
pub fn sample_prf_pattern(
    rate: f64,
    window: &Window,
    rng: &mut RngStream,
) -> Result<PointPattern, ModelError> {
    let count = sample_prf(rate, window, rng)?;
    let points = (0..count).map(|_| (uniform_in(window, rng), 1)).collect();
    Ok(PointPattern::new(window.clone(), points))
}

/// Which exact representation drives a weighted-field draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GprfMethod {
    /// Σ j · N_j with independent Poisson(λ_j|A|) components.
    Superposition,
    /// N ~ Poisson(Λ|A|) jumps, each of size j with probability λ_j/Λ.
    Compound,
}

/// Per-component counts (N_1, …, N_k) of the superposition representation.
pub fn sample_gprf_components(
    rates: &RateVector,
    window: &Window,
    rng: &mut RngStream,
) -> Vec<u64> {
    let area = window.measure();
    rates
        .rates()
        .iter()
        .map(|&l| poisson_draw(l * area, rng))
        .collect()
}

/// One categorical jump: j with probability λ_j/Λ.
pub(crate) fn jump_draw(rates: &RateVector, rng: &mut RngStream) -> u32 {
    let total = rates.total();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &l) in rates.rates().iter().enumerate() {
        acc += l;
        if u < acc {
            return i as u32 + 1;
        }
    }
    rates.k() as u32
}

pub(crate) fn sample_gprf_area(
    rates: &RateVector,
    area: f64,
    rng: &mut RngStream,
    method: GprfMethod,
) -> u64 {
    match method {
        GprfMethod::Superposition => rates
            .rates()
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as u64 + 1) * poisson_draw(l * area, rng))
            .sum(),
        GprfMethod::Compound => {
            let n = poisson_draw(rates.total() * area, rng);
            (0..n).map(|_| jump_draw(rates, rng) as u64).sum()
        }
    }
}

/// Weighted-field count on the window by the chosen representation.
pub fn sample_gprf(
    rates: &RateVector,
    window: &Window,
    rng: &mut RngStream,
    method: GprfMethod,
) -> u64 {
    sample_gprf_area(rates, window.measure(), rng, method)
}

/// Independent thinning of a plain count: keep each point with probability
/// p; returns (kept, removed).
pub fn thin_prf(count: u64, p: f64, rng: &mut RngStream) -> Result<(u64, u64), ModelError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ModelError::InvalidParams(format!(
            "thinning probability must lie in (0,1), got {p}"
        )));
    }
    let kept = Binomial::new(count, p)
        .expect("valid binomial")
        .sample(rng);
    Ok((kept, count - kept))
}

/// Component-wise thinning of a weighted field: component j keeps each atom
/// with probability p_j; returns the weighted (kept, removed) counts.
pub fn thin_gprf(
    component_counts: &[u64],
    p: &[f64],
    rng: &mut RngStream,
) -> Result<(u64, u64), ModelError> {
    if component_counts.len() != p.len() {
        return Err(ModelError::InvalidParams(format!(
            "got {} component counts but {} probabilities",
            component_counts.len(),
            p.len()
        )));
    }
    let mut kept = 0u64;
    let mut removed = 0u64;
    for (i, (&c, &pj)) in component_counts.iter().zip(p.iter()).enumerate() {
        let (kc, rc) = thin_prf(c, pj, rng)?;
        let j = i as u64 + 1;
        kept += j * kc;
        removed += j * rc;
    }
    Ok((kept, removed))
}

/// Weighted superposition over a signed integer index set: Σ_{i∈𝓘} i · M_i
/// with independent weighted fields M_i.
pub fn sample_gspp(
    rates: &GsppRates,
    window: &Window,
    rng: &mut RngStream,
) -> Result<i64, ModelError> {
    if !rates.integer_weights() {
        return Err(ModelError::InvalidParams(
            "sampling requires integer index weights".into(),
        ));
    }
    let area = window.measure();
    let mut total = 0i64;
    for (i, rv) in rates.components() {
        let m = sample_gprf_area(rv, area, rng, GprfMethod::Superposition);
        total += (*i as i64) * (m as i64);
    }
    Ok(total)
}

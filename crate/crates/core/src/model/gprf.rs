//! Integer-weighted Poisson random field on a window of measure |A|: k
//! independent Poisson populations, population j contributing j points per
//! atom with intensity λ_j.

use super::{check_positive, check_tol, FracOrders, ModelError, PmfTable, RateVector, Window};
use crate::partitions::enumerate_theta;
use crate::specfun::{ln_gamma, KahanSum, DEFAULT_TOL};

/// P{M(A) = n}: total mass e^{−Λ|A|} times the sum over weighted
/// compositions of n of Π_j (λ_j|A|)^{n_j}/n_j!.
pub fn gprf_pmf(rates: &RateVector, area: f64, n: u32) -> Result<f64, ModelError> {
    check_positive(area, "window measure")?;
    let ln_rate_area: Vec<f64> = rates.rates().iter().map(|&l| (l * area).ln()).collect();
    let mut sum = KahanSum::new();
    for comp in enumerate_theta(rates.k(), n)? {
        let mut ln_term = 0.0;
        for (j, &nj) in comp.parts().iter().enumerate() {
            if nj > 0 {
                ln_term += nj as f64 * ln_rate_area[j] - ln_gamma(nj as f64 + 1.0);
            }
        }
        sum.add(ln_term.exp());
    }
    Ok(sum.value() * (-rates.total() * area).exp())
}

/// E[z^{M(A)}] = exp(|A| Σ_j λ_j (z^j − 1)) for z ∈ [−1, 1].
pub fn gprf_pgf(rates: &RateVector, area: f64, z: f64) -> Result<f64, ModelError> {
    check_positive(area, "window measure")?;
    if !(-1.0..=1.0).contains(&z) {
        return Err(ModelError::InvalidParams(format!(
            "pgf argument must lie in [-1, 1], got {z}"
        )));
    }
    Ok((area * rates.pgf_kernel(z)).exp())
}

/// (mean, variance) = (|A| Σ j λ_j, |A| Σ j² λ_j).
pub fn gprf_moments(rates: &RateVector, area: f64) -> Result<(f64, f64), ModelError> {
    check_positive(area, "window measure")?;
    Ok((
        area * rates.weighted_total(),
        area * rates.weighted_sq_total(),
    ))
}

/// Cov(M(A), M(B)) = |A ∩ B| Σ j² λ_j.
pub fn gprf_cov(rates: &RateVector, a: &Window, b: &Window) -> Result<f64, ModelError> {
    Ok(a.intersection_measure(b)? * rates.weighted_sq_total())
}

/// Certified bound on P{M > n_max} by Markov's inequality on z^M over a
/// grid of z > 1.
pub(crate) fn gprf_tail_bound(rates: &RateVector, area: f64, n_max: u32) -> f64 {
    const Z_GRID: [f64; 6] = [1.1, 1.25, 1.5, 2.0, 3.0, 4.0];
    let mut best = 1.0f64;
    for z in Z_GRID {
        let ln_bound = area * rates.pgf_kernel(z) - (n_max as f64 + 1.0) * z.ln();
        best = best.min(ln_bound.exp());
    }
    best
}

/// Table of P{M(A) = n} from n = 0 until the certified omitted mass drops
/// below `tail_tol`.
pub fn gprf_pmf_table(rates: &RateVector, area: f64, tail_tol: f64) -> Result<PmfTable, ModelError> {
    check_positive(area, "window measure")?;
    check_tol(tail_tol)?;
    const MAX_SUPPORT: usize = 100_000;
    let mut probs = Vec::new();
    loop {
        let n = probs.len() as u32;
        probs.push(gprf_pmf(rates, area, n)?);
        let tail = gprf_tail_bound(rates, area, n);
        if tail < tail_tol {
            // Per-entry evaluation error: positive log-space sums are
            // accurate to a few ulps; charge 1e-14 relative per entry.
            let eval_err: f64 = probs.iter().map(|p| p * 1e-14).sum();
            return PmfTable::new(0, probs, tail + eval_err);
        }
        if probs.len() >= MAX_SUPPORT {
            return Err(ModelError::ResourceLimit(MAX_SUPPORT));
        }
    }
}

/// Capacity functional T(K) = P{at least one point in K} = 1 − P{M(K)=0}.
///
/// Classical orders give 1 − e^{−Λ|K|} on any window; fractional orders
/// require an anchored planar window (sides s, t) and give
/// 1 − W₀(−Λ s^α t^β) with W₀ the zeroth moment factor of the subordinator
/// product.
pub fn capacity_functional(
    rates: &RateVector,
    window: &Window,
    frac: FracOrders,
) -> Result<f64, ModelError> {
    if frac.is_classical() {
        return Ok(1.0 - (-rates.total() * window.measure()).exp());
    }
    let (s, t) = window.planar_sides().ok_or_else(|| {
        ModelError::InvalidParams(
            "fractional capacity needs an anchored planar window".into(),
        )
    })?;
    let p0 = super::fgprf::fgprf_pmf(rates, frac, s, t, 0, DEFAULT_TOL)?;
    Ok(1.0 - p0)
}

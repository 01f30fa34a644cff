//! Fractional variant: the weighted field run on the product clock
//! L₁(s)·L₂(t) of two independent inverse stable subordinators with orders
//! (α, β). Distributions involve the moment factors
//! W_m(x) = E[(L₁L₂)^m e^{x L₁L₂}] (at unit times), each a ₂Ψ₂-type series.

use std::collections::HashMap;

use super::{check_positive, check_tol, FracOrders, ModelError, PmfTable, RateVector};
use crate::partitions::enumerate_theta;
use crate::quad::adaptive_gl15;
use crate::specfun::{ln_gamma, GammaSeries, KahanSum, MomentLadder, SpecFunError, MAX_TERMS};

/// Cache of the subordinator-product moment factors W_m at a fixed argument.
///
/// W_m(x) is the series Σ_r Γ(m+1+r)² x^r / (Γ(α(m+r)+1) Γ(β(m+r)+1) r!),
/// evaluated with a certified bound; entries are re-evaluated if a caller
/// needs a tighter bound than the cached one.
pub(crate) struct WFactors {
    alpha: f64,
    beta: f64,
    x: f64,
    cache: HashMap<u32, (f64, f64)>,
    // The m-th factor's series coefficients are Γ(q+1)²/(Γ(αq+1)Γ(βq+1)) at
    // q = m + r, shared across m; the ladder pays the high-precision gamma
    // work once per q.
    ladder: MomentLadder,
}

impl WFactors {
    pub(crate) fn new(frac: FracOrders, x: f64) -> Self {
        WFactors {
            alpha: frac.alpha,
            beta: frac.beta,
            x,
            cache: HashMap::new(),
            ladder: MomentLadder::new(frac.alpha, frac.beta),
        }
    }

    /// (value, certified absolute error bound) for W_m at the cached
    /// argument, with bound ≤ tol.
    pub(crate) fn get(&mut self, m: u32, tol: f64) -> Result<(f64, f64), SpecFunError> {
        if let Some(&(v, b)) = self.cache.get(&m) {
            if b <= tol {
                return Ok((v, b));
            }
        }
        self.eval(m, tol)
    }

    /// (value, certified absolute error bound) for W_m with bound ≤ rel·|value|.
    ///
    /// The factors scale over hundreds of orders of magnitude across m, so an
    /// absolute target sized for one caller forces re-summation for the next;
    /// a relative certificate is evaluated once and serves every request at
    /// that rate or looser. The absolute target is seeded from the best
    /// magnitude estimate at hand — a previous evaluation of this entry, else
    /// a lower neighbour (the factors grow with m), else unity — and refined
    /// until the certificate is relative.
    pub(crate) fn get_rel(&mut self, m: u32, rel: f64) -> Result<(f64, f64), SpecFunError> {
        if let Some(&(v, b)) = self.cache.get(&m) {
            if b <= rel * v.abs() {
                return Ok((v, b));
            }
        }
        let mut est = 1.0f64;
        let seed = self.cache.get(&m).copied().or_else(|| {
            (1..=2u32)
                .filter_map(|back| m.checked_sub(back).and_then(|p| self.cache.get(&p)))
                .copied()
                .next()
        });
        if let Some((v, b)) = seed {
            if v.abs() > 2.0 * b {
                est = v.abs() - b;
            }
        }
        // Each retry shrinks the target at least 4×: the evaluator is
        // deterministic, so without strict descent a near-miss would repeat
        // the identical outcome forever.
        let mut target = 0.5 * rel * est;
        loop {
            target = target.max(f64::MIN_POSITIVE);
            let (v, b) = self.eval(m, target)?;
            if b <= rel * v.abs() {
                return Ok((v, b));
            }
            if target <= f64::MIN_POSITIVE {
                return Err(SpecFunError::NonConvergence {
                    terms_used: 0,
                    bound: b,
                });
            }
            target = if v.abs() > 2.0 * b {
                (0.5 * rel * (v.abs() - b)).min(0.25 * target)
            } else {
                0.25 * target
            };
        }
    }

    fn eval(&mut self, m: u32, tol: f64) -> Result<(f64, f64), SpecFunError> {
        let mm = m as f64;
        let series = GammaSeries {
            const_ln: 0.0,
            num: vec![(mm + 1.0, 1.0), (mm + 1.0, 1.0)],
            den: vec![
                (self.alpha * mm + 1.0, self.alpha),
                (self.beta * mm + 1.0, self.beta),
            ],
            factorial: true,
        };
        let out = series.evaluate_with_ladder(self.x, tol, MAX_TERMS, &mut self.ladder, m as usize)?;
        if !out.value.is_finite() {
            // The factor exceeds f64 range; refusing keeps callers from
            // forming indeterminate products with underflowed prefactors.
            return Err(SpecFunError::NonConvergence {
                terms_used: out.terms_used,
                bound: f64::INFINITY,
            });
        }
        self.cache.insert(m, (out.value, out.truncation_bound));
        Ok((out.value, out.truncation_bound))
    }
}

/// pmf with a certified error report: (probability, error bound).
pub(crate) fn fgprf_pmf_detail(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    n: u32,
    tol: f64,
    factors: &mut WFactors,
) -> Result<(f64, f64), ModelError> {
    let v = frac.scale(s, t);
    // Composition prefactors Π_j (λ_j v)^{n_j} / n_j! and total atom counts
    // m = Σ n_j.
    let ln_rv: Vec<f64> = rates.rates().iter().map(|&l| (l * v).ln()).collect();
    let mut pres: Vec<(f64, u32)> = Vec::new();
    for comp in enumerate_theta(rates.k(), n)? {
        let mut ln_pre = 0.0;
        let mut m = 0u32;
        for (j, &nj) in comp.parts().iter().enumerate() {
            if nj > 0 {
                ln_pre += nj as f64 * ln_rv[j] - ln_gamma(nj as f64 + 1.0);
                m += nj;
            }
        }
        let pre = ln_pre.exp();
        pres.push((pre, m));
    }
    // Every term is pre·W_m with both factors positive and the terms summing
    // to the probability (≤ 1), so a relative certificate on each factor
    // bounds the total error by rel_w · Σ pre·W ≤ rel_w; the reported error
    // uses the achieved bounds regardless.
    let rel_w = 0.5 * tol;
    let mut sum = KahanSum::new();
    let mut err = KahanSum::new();
    for &(pre, m) in &pres {
        if pre == 0.0 {
            continue;
        }
        let (w, bound) = factors.get_rel(m, rel_w)?;
        sum.add(pre * w);
        err.add(pre * (bound + w.abs() * 1e-15));
    }
    Ok((sum.value(), err.value()))
}

/// P{M^{α,β}(s,t) = n}: the composition sum of Π_j (λ_j s^α t^β)^{n_j}/n_j!
/// times the moment factor W_m(−Λ s^α t^β), with certified error ≤ tol.
pub fn fgprf_pmf(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    n: u32,
    tol: f64,
) -> Result<f64, ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    check_tol(tol)?;
    let mut factors = WFactors::new(frac, -rates.total() * frac.scale(s, t));
    let (p, _) = fgprf_pmf_detail(rates, frac, s, t, n, tol, &mut factors)?;
    // The alternating moment-factor series is certified to tol, so a value
    // outside [0, 1] can only be noise around a boundary; clamping improves.
    Ok(p.clamp(0.0, 1.0))
}

/// E[z^{M^{α,β}(s,t)}] = W₀(s^α t^β Σ_j λ_j (z^j − 1)) for z ∈ [−1, 1].
pub fn fgprf_pgf(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    z: f64,
    tol: f64,
) -> Result<f64, ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    check_tol(tol)?;
    if !(-1.0..=1.0).contains(&z) {
        return Err(ModelError::InvalidParams(format!(
            "pgf argument must lie in [-1, 1], got {z}"
        )));
    }
    let arg = frac.scale(s, t) * rates.pgf_kernel(z);
    let mut factors = WFactors::new(frac, arg);
    let (w, _) = factors.get(0, tol)?;
    Ok(w.clamp(0.0, 1.0))
}

/// (mean, variance) of the fractional field count at (s, t).
pub fn fgprf_moments(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
) -> Result<(f64, f64), ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    let v = frac.scale(s, t);
    let g1 = (ln_gamma(frac.alpha + 1.0) + ln_gamma(frac.beta + 1.0)).exp();
    let g2 = (ln_gamma(2.0 * frac.alpha + 1.0) + ln_gamma(2.0 * frac.beta + 1.0)).exp();
    let c1 = rates.weighted_total() * v;
    let c2 = rates.weighted_sq_total() * v;
    let mean = c1 / g1;
    let variance = c2 / g1 + c1 * c1 * (4.0 / g2 - 1.0 / (g1 * g1));
    Ok((mean, variance))
}

/// Absolute tolerance used for the covariance quadrature.
const COV_QUAD_TOL: f64 = 1e-10;

/// E[L(s) L(s')] for one inverse stable subordinator of order α, s ≤ s':
/// (Γ(1+α)Γ(α))^{-1} ∫₀¹ (s^α/α) [(s'−s u^{1/α})^α + (s−s u^{1/α})^α] du,
/// the substitution x = s u^{1/α} having removed the x^{α−1} endpoint factor.
fn cross_moment(alpha: f64, s: f64, s2: f64) -> Result<f64, ModelError> {
    let pre = (-ln_gamma(1.0 + alpha) - ln_gamma(alpha)).exp();
    let scale = s.powf(alpha) / alpha;
    let integrand = |u: f64| {
        let x = s * u.powf(1.0 / alpha);
        scale * (((s2 - x).max(0.0)).powf(alpha) + ((s - x).max(0.0)).powf(alpha))
    };
    let out = adaptive_gl15(integrand, 0.0, 1.0, COV_QUAD_TOL).map_err(|e| match e {
        crate::quad::QuadError::Failure {
            best,
            error_estimate,
        } => ModelError::QuadratureFailure(format!(
            "cross-moment integral stalled at {best} with error estimate {error_estimate}"
        )),
    })?;
    Ok(pre * out.value)
}

/// Mean of L₁(s)L₂(t) and covariance of the products L₁(s)L₂(t) and
/// L₁(s')L₂(t') for (s,t) ⪯ (s',t').
pub fn inverse_subordinator_product_moments(
    frac: FracOrders,
    s: f64,
    t: f64,
    s2: f64,
    t2: f64,
) -> Result<(f64, f64), ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    if !(s <= s2 && t <= t2) {
        return Err(ModelError::InvalidParams(format!(
            "product moments need (s,t) componentwise <= (s',t'), got ({s},{t}) vs ({s2},{t2})"
        )));
    }
    let g1 = (ln_gamma(frac.alpha + 1.0) + ln_gamma(frac.beta + 1.0)).exp();
    let mean_st = frac.scale(s, t) / g1;
    let mean_s2t2 = frac.scale(s2, t2) / g1;
    let e_ll = cross_moment(frac.alpha, s, s2)?;
    let e_mm = cross_moment(frac.beta, t, t2)?;
    let cov = e_ll * e_mm - mean_st * mean_s2t2;
    Ok((mean_st, cov))
}

/// Cov(M^{α,β}(s,t), M^{α,β}(s',t')) =
/// E[L₁(s)L₂(t)] Σj²λ_j + Cov(L₁(s)L₂(t), L₁(s')L₂(t')) (Σjλ_j)².
pub fn fgprf_cov(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    s2: f64,
    t2: f64,
) -> Result<f64, ModelError> {
    let (mean_st, cov) = inverse_subordinator_product_moments(frac, s, t, s2, t2)?;
    let c1 = rates.weighted_total();
    let c2 = rates.weighted_sq_total();
    Ok(mean_st * c2 + cov * c1 * c1)
}

/// Stretched-exponential upper bound on P{L^α(unit) > x}: the inverse
/// subordinator at unit time satisfies
/// P{L > x} = P{H(x) < 1} ≤ inf_u e^u E e^{−u H(x)} = exp(−(1−α) α^{α/(1−α)}
/// x^{1/(1−α)}) for α < 1; α = 1 is the deterministic clock.
fn l_tail_ln(alpha: f64, x: f64) -> f64 {
    if alpha >= 1.0 {
        return if x < 1.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x <= 0.0 {
        return 0.0;
    }
    let a = alpha / (1.0 - alpha);
    -(1.0 - alpha) * (a * alpha.ln() + x.ln() / (1.0 - alpha)).exp()
}

/// Certified bound on P{M^{α,β} > n_max}. Two strategies, best taken:
/// Markov on z^M through the fractional pgf at z > 1 (positive-argument
/// series, no cancellation), and a split P{clock product > A*} +
/// conditional classical tail at area A*.
pub(crate) fn fgprf_tail_bound(
    rates: &RateVector,
    frac: FracOrders,
    v: f64,
    n_max: u32,
    factors_pos: &mut Vec<(f64, Option<f64>)>,
) -> f64 {
    const Z_GRID: [f64; 11] = [1.05, 1.1, 1.2, 1.35, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0];
    let mut best = 1.0f64;
    // Strategy 1: E[z^M] = W₀(φ(z) v) with φ(z) = Σλ_j(z^j−1) > 0. The
    // series may diverge near the order boundary α+β = 1; such z are skipped.
    if factors_pos.is_empty() {
        for &z in &Z_GRID {
            let arg = rates.pgf_kernel(z) * v;
            let mut f = WFactors::new(frac, arg);
            factors_pos.push((z, f.get(0, 1e-6).ok().map(|(w, _)| w * (1.0 + 2e-6))));
        }
    }
    for &(z, w) in factors_pos.iter() {
        if let Some(w0) = w {
            best = best.min((w0.ln() - (n_max as f64 + 1.0) * z.ln()).exp());
        }
    }
    // Strategy 2: split on the product clock exceeding A*, using the
    // stretched-exponential subordinator tails and the classical bound at
    // area A* (the count given clock ≤ A* is stochastically below the
    // classical field at A*).
    for i in 0..12 {
        let a_star = 2.0f64.powi(i + 2);
        // P{L₁L₂ v > A*} ≤ P{L₁ > r} + P{L₂ > r} with r² v = A*.
        let r = (a_star / v).sqrt();
        let clock = l_tail_ln(frac.alpha, r).exp() + l_tail_ln(frac.beta, r).exp();
        let cond = super::gprf::gprf_tail_bound(rates, a_star, n_max);
        best = best.min(clock + cond);
    }
    best
}

/// Table of P{M^{α,β}(s,t) = n} from n = 0 until the certified omitted mass
/// (truncation tail plus accumulated evaluation error) drops below
/// `tail_tol`.
pub fn fgprf_pmf_table(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    tail_tol: f64,
) -> Result<PmfTable, ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    check_tol(tail_tol)?;
    const MAX_SUPPORT: usize = 20_000;
    let v = frac.scale(s, t);
    let mut factors = WFactors::new(frac, -rates.total() * v);
    let mut factors_pos: Vec<(f64, Option<f64>)> = Vec::new();
    let mut probs = Vec::new();
    let mut err_acc = 0.0f64;
    // Per-entry tolerance tol·c/(n+1)² keeps the summed evaluation error
    // under tail_tol/2 regardless of where the tail bound lets us stop.
    let budget = 0.5 * tail_tol * 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    loop {
        let n = probs.len() as u32;
        let tol_n = budget / ((n as f64 + 1.0) * (n as f64 + 1.0));
        let (p, e) = fgprf_pmf_detail(rates, frac, s, t, n, tol_n, &mut factors)?;
        // Noise around zero in the far tail: the true mass is nonnegative,
        // so clamp and charge the clamped amount to the certified error.
        probs.push(p.max(0.0));
        err_acc += e + (-p).max(0.0);
        let tail = fgprf_tail_bound(rates, frac, v, n, &mut factors_pos);
        if tail + err_acc < tail_tol {
            return PmfTable::new(0, probs, tail + err_acc);
        }
        if probs.len() >= MAX_SUPPORT {
            return Err(ModelError::ResourceLimit(MAX_SUPPORT));
        }
    }
}

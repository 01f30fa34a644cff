//! Numerical residuals of the governing equations (classical and
//! fractional) and the signed-field convolution oracle.

use std::ops::RangeInclusive;

use super::VerifyError;
use crate::model::{
    gprf_pgf, gprf_pmf, gprf_pmf_table, skellam_pmf, FracOrders, ModelError, RateVector,
    SkellamRates, WFactors,
};
use crate::partitions::enumerate_theta;
use crate::specfun::{caputo_term_derivative, ln_gamma, KahanSum, SpecFunError};

/// Two sides of an identity and their absolute gap.
#[derive(Clone, Debug)]
pub struct ResidualReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub detail: String,
}

impl ResidualReport {
    fn new(lhs: f64, rhs: f64, detail: String) -> Self {
        ResidualReport {
            lhs,
            rhs,
            residual: (lhs - rhs).abs(),
            detail,
        }
    }
}

/// Residual of the first-order system ∂p/∂s = Σ_j λ_j t [p(n−j) − p(n)],
/// with the s-derivative taken by central differences at step h and the
/// right side evaluated exactly.
pub fn ode_residual(
    rates: &RateVector,
    s: f64,
    t: f64,
    n: u32,
    h: f64,
) -> Result<ResidualReport, VerifyError> {
    if !(h > 0.0 && s > h && t > 0.0) {
        return Err(VerifyError::InvalidParams(format!(
            "need s > h > 0 and t > 0, got s={s}, t={t}, h={h}"
        )));
    }
    let p = |n: i64, s: f64| -> Result<f64, ModelError> {
        if n < 0 {
            Ok(0.0)
        } else {
            gprf_pmf(rates, s * t, n as u64 as u32)
        }
    };
    let lhs = (p(n as i64, s + h)? - p(n as i64, s - h)?) / (2.0 * h);
    let mut rhs = 0.0;
    for (idx, &l) in rates.rates().iter().enumerate() {
        let j = idx as i64 + 1;
        rhs += l * t * (p(n as i64 - j, s)? - p(n as i64, s)?);
    }
    Ok(ResidualReport::new(
        lhs,
        rhs,
        format!("central difference in s at h={h}"),
    ))
}

/// Residual of the second-order pgf equation: mixed central difference
/// ∂²G/∂t∂s against Σ_j λ_j(z^j−1)G + Σ_{j,j'} λ_jλ_{j'} Σ_{r=1}^{j'}
/// (z^{j+j'−r} − z^{j'−r}) ∂G/∂λ₁, with ∂G/∂λ₁ = st(z−1)G analytically.
pub fn pgf_pde_residual(
    rates: &RateVector,
    s: f64,
    t: f64,
    z: f64,
    h: f64,
) -> Result<ResidualReport, VerifyError> {
    if !(h > 0.0 && s > h && t > h) {
        return Err(VerifyError::InvalidParams(format!(
            "need s,t > h > 0, got s={s}, t={t}, h={h}"
        )));
    }
    let g = |s: f64, t: f64| gprf_pgf(rates, s * t, z);
    let lhs = (g(s + h, t + h)? - g(s + h, t - h)? - g(s - h, t + h)? + g(s - h, t - h)?)
        / (4.0 * h * h);
    let gc = g(s, t)?;
    let dg_dl1 = s * t * (z - 1.0) * gc;
    let mut rhs = 0.0;
    for (ij, &lj) in rates.rates().iter().enumerate() {
        let j = ij as i32 + 1;
        rhs += lj * (z.powi(j) - 1.0) * gc;
        for (ij2, &lj2) in rates.rates().iter().enumerate() {
            let j2 = ij2 as i32 + 1;
            for r in 1..=j2 {
                rhs += lj * lj2 * (z.powi(j + j2 - r) - z.powi(j2 - r)) * dg_dl1;
            }
        }
    }
    Ok(ResidualReport::new(
        lhs,
        rhs,
        format!("mixed central difference at h={h}"),
    ))
}

/// Composition prefactors Π_j λ_j^{n_j}/n_j! (value, total count m) for all
/// weighted compositions of n; n < 0 yields an empty list.
fn composition_prefactors(
    rates: &RateVector,
    n: i64,
) -> Result<Vec<(f64, u32)>, ModelError> {
    if n < 0 {
        return Ok(Vec::new());
    }
    let ln_l: Vec<f64> = rates.rates().iter().map(|&l| l.ln()).collect();
    let mut out = Vec::new();
    for comp in enumerate_theta(rates.k(), n as u32)? {
        let mut ln_pre = 0.0;
        let mut m = 0u32;
        for (j, &nj) in comp.parts().iter().enumerate() {
            if nj > 0 {
                ln_pre += nj as f64 * ln_l[j] - ln_gamma(nj as f64 + 1.0);
                m += nj;
            }
        }
        out.push((ln_pre.exp(), m));
    }
    Ok(out)
}

/// p^{α,β}(n,s,t) through a shared moment-factor cache: Σ_Θ pre_Θ v^m W_m.
fn frac_pmf_at(
    rates: &RateVector,
    v: f64,
    n: i64,
    tol: f64,
    factors: &mut WFactors,
) -> Result<f64, ModelError> {
    let pres = composition_prefactors(rates, n)?;
    let scale: f64 = pres.iter().map(|&(p, m)| p * v.powi(m as i32)).sum();
    let tol_w = 0.5 * tol / scale.max(f64::MIN_POSITIVE);
    let mut sum = KahanSum::new();
    for &(pre, m) in &pres {
        let (w, _) = factors.get(m, tol_w)?;
        sum.add(pre * v.powi(m as i32) * w);
    }
    Ok(sum.value())
}

/// ∂p^{α,β}(n,s,t)/∂λ₁ term-wise: each composition contributes
/// pre_Θ v^m [ (n₁/λ₁) W_m − v W_{m+1} ], the last factor from
/// d/dλ₁ W_m(−Λv) = −v W_{m+1}(−Λv).
fn frac_pmf_dl1(
    rates: &RateVector,
    v: f64,
    n: i64,
    tol: f64,
    factors: &mut WFactors,
) -> Result<f64, ModelError> {
    if n < 0 {
        return Ok(0.0);
    }
    let l1 = rates.rates()[0];
    let ln_l: Vec<f64> = rates.rates().iter().map(|&l| l.ln()).collect();
    let mut terms: Vec<(f64, f64, u32)> = Vec::new();
    let mut scale = 0.0f64;
    for comp in enumerate_theta(rates.k(), n as u32)? {
        let mut ln_pre = 0.0;
        let mut m = 0u32;
        for (j, &nj) in comp.parts().iter().enumerate() {
            if nj > 0 {
                ln_pre += nj as f64 * ln_l[j] - ln_gamma(nj as f64 + 1.0);
                m += nj;
            }
        }
        let pre = ln_pre.exp() * v.powi(m as i32);
        let n1 = comp.parts()[0] as f64;
        terms.push((pre, n1, m));
        scale += pre * (n1 / l1 + v);
    }
    let tol_w = 0.5 * tol / scale.max(f64::MIN_POSITIVE);
    let mut sum = KahanSum::new();
    for &(pre, n1, m) in &terms {
        let (wm, _) = factors.get(m, tol_w)?;
        let (wm1, _) = factors.get(m + 1, tol_w)?;
        sum.add(pre * (n1 / l1 * wm - v * wm1));
    }
    Ok(sum.value())
}

/// Residual of the fractional governing system at (n, s, t):
/// term-wise Caputo derivative (order α in s, β in t) of the double power
/// series against −Σ_j λ_j (I−B^j)(1 + Σ_{j'} λ_{j'} Σ_{r=1}^{j'} B^{j'−r}
/// ∂/∂λ₁) p, where B shifts the count index downward.
pub fn fractional_system_residual(
    rates: &RateVector,
    frac: FracOrders,
    s: f64,
    t: f64,
    n: u32,
    truncation: f64,
) -> Result<ResidualReport, VerifyError> {
    if !(s > 0.0 && t > 0.0 && s.is_finite() && t.is_finite()) {
        return Err(VerifyError::InvalidParams(format!(
            "need interior s,t > 0, got s={s}, t={t}"
        )));
    }
    if !(truncation > 0.0 && truncation.is_finite()) {
        return Err(VerifyError::InvalidParams(format!(
            "truncation tolerance must be positive, got {truncation}"
        )));
    }
    let (alpha, beta) = (frac.alpha, frac.beta);
    let v = frac.scale(s, t);
    let lam = rates.total();
    let ln_lam = lam.ln();
    let pres = composition_prefactors(rates, n as i64)?;

    // Left side: Caputo factors applied to each s^{αq} t^{βq} term of the
    // double series; the q-th coefficient collects every composition with
    // m ≤ q paired with the series index r = q − m.
    let ln_s = s.ln();
    let ln_t = t.ln();
    let mut lhs = KahanSum::new();
    let mut streak = 0u32;
    let mut last_sizes = f64::INFINITY;
    let mut q = 1u32;
    let (q_floor, q_cap) = (n + 3, 4_000u32);
    loop {
        let qf = q as f64;
        let d_s = caputo_term_derivative(alpha * qf, alpha).map_err(ModelError::from)?;
        let d_t = caputo_term_derivative(beta * qf, beta).map_err(ModelError::from)?;
        let ln_common = 2.0 * ln_gamma(qf + 1.0) - ln_gamma(alpha * qf + 1.0)
            - ln_gamma(beta * qf + 1.0)
            + alpha * (qf - 1.0) * ln_s
            + beta * (qf - 1.0) * ln_t;
        let mut sq = 0.0;
        for &(pre, m) in &pres {
            if m > q {
                continue;
            }
            let r = (q - m) as f64;
            let magnitude =
                (ln_common + r * ln_lam - ln_gamma(r + 1.0)).exp() * pre * d_s * d_t;
            sq += if (q - m).is_multiple_of(2) {
                magnitude
            } else {
                -magnitude
            };
        }
        lhs.add(sq);
        let size = sq.abs();
        if q >= q_floor {
            if size < truncation && size <= last_sizes {
                streak += 1;
                if streak >= 3 {
                    break;
                }
            } else {
                streak = 0;
            }
        }
        last_sizes = size;
        q += 1;
        if q > q_cap {
            return Err(VerifyError::Model(ModelError::SpecFun(
                SpecFunError::NonConvergence {
                    terms_used: q as usize,
                    bound: size,
                },
            )));
        }
    }

    // Right side: exact series evaluations through a shared factor cache.
    let mut factors = WFactors::new(frac, -lam * v);
    let tol_eval = truncation;
    let mut f_at = |nn: i64| -> Result<f64, ModelError> {
        if nn < 0 {
            return Ok(0.0);
        }
        let mut acc = frac_pmf_at(rates, v, nn, tol_eval, &mut factors)?;
        for (ij2, &lj2) in rates.rates().iter().enumerate() {
            let j2 = ij2 as i64 + 1;
            for r in 1..=j2 {
                acc += lj2 * frac_pmf_dl1(rates, v, nn - (j2 - r), tol_eval, &mut factors)?;
            }
        }
        Ok(acc)
    };
    let f_n = f_at(n as i64)?;
    let mut rhs = 0.0;
    for (ij, &lj) in rates.rates().iter().enumerate() {
        let j = ij as i64 + 1;
        rhs -= lj * (f_n - f_at(n as i64 - j)?);
    }
    Ok(ResidualReport::new(
        lhs.value(),
        rhs,
        format!("series truncated at q={q}; eval tolerance {tol_eval:.1e}"),
    ))
}

/// Max over n_range of |signed-field pmf − convolution of the two one-sided
/// tables|, the two-representation equivalence check.
pub fn skellam_oracle_check(
    rates: &SkellamRates,
    area: f64,
    n_range: RangeInclusive<i64>,
    tol: f64,
) -> Result<f64, VerifyError> {
    let table_plus = gprf_pmf_table(rates.plus(), area, 0.25 * tol)?;
    let table_minus = gprf_pmf_table(rates.minus(), area, 0.25 * tol)?;
    let mut max_diff = 0.0f64;
    for n in n_range {
        let mut conv = KahanSum::new();
        for (m, p) in table_plus.iter() {
            let q = table_minus.prob(m - n);
            if q > 0.0 {
                conv.add(p * q);
            }
        }
        let direct = skellam_pmf(rates, area, n, tol)?;
        max_diff = max_diff.max((direct - conv.value()).abs());
    }
    Ok(max_diff)
}

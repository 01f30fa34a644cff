//! Signed (difference) field: two independent weighted fields subtracted,
//! S = M₁ − M₂, its Bessel-series pmf over signed compositions, the general
//! weighted-superposition mgf, and the fractional variants on the product
//! clock.

use std::collections::HashMap;

use super::fgprf::{fgprf_tail_bound, WFactors};
use super::gprf::gprf_tail_bound;
use super::{check_positive, check_tol, FracOrders, GsppRates, ModelError, PmfTable, SkellamRates};
use crate::partitions::enumerate_theta_signed;
use crate::specfun::{bessel_i, ln_gamma, KahanSum};

/// Modified-Bessel factor cache for one evaluation batch: per component j
/// and order m, ln I_m(c_j) with a relative error bound. Entries whose value
/// underflows are recorded as absent (their terms are ≤ 1e−300 and dropped).
struct BesselCache {
    args: Vec<f64>,
    entries: HashMap<(usize, u32), Option<(f64, f64)>>,
}

impl BesselCache {
    fn new(args: Vec<f64>) -> Self {
        BesselCache {
            args,
            entries: HashMap::new(),
        }
    }

    fn ln_value(&mut self, j: usize, m: u32) -> Result<Option<(f64, f64)>, ModelError> {
        if let Some(e) = self.entries.get(&(j, m)) {
            return Ok(*e);
        }
        let out = bessel_i(m as f64, self.args[j], 1e-300)?;
        let entry = if out.value > 0.0 {
            Some((out.value.ln(), out.truncation_bound / out.value))
        } else {
            None
        };
        self.entries.insert((j, m), entry);
        Ok(entry)
    }
}

fn skellam_pmf_detail(
    rates: &SkellamRates,
    area: f64,
    n: i64,
    tol: f64,
    bessels: &mut BesselCache,
) -> Result<(f64, f64), ModelError> {
    let k = rates.k();
    let plus = rates.plus().rates();
    let minus = rates.minus().rates();
    // Weight-bound search: the omitted signed compositions have some
    // |n_j| > W, an event bounded by per-component Poisson tails.
    let mut w_bound = n.unsigned_abs().min(u32::MAX as u64) as u32;
    let trunc = loop {
        let b = rates.signed_truncation_bound(area, w_bound);
        if b <= 0.5 * tol {
            break b;
        }
        if w_bound >= 30_000 {
            return Err(ModelError::ResourceLimit(w_bound as usize));
        }
        w_bound = w_bound + w_bound / 2 + 2;
    };
    let ln_ratio: Vec<f64> = (0..k).map(|j| plus[j].ln() - minus[j].ln()).collect();
    let ln_total = -(rates.plus().total() + rates.minus().total()) * area;
    let mut sum = KahanSum::new();
    let mut err = KahanSum::new();
    for comp in enumerate_theta_signed(k, n, w_bound)? {
        let mut ln_term = ln_total;
        let mut rel = 1e-14;
        let mut underflow = false;
        for (j, &nj) in comp.parts().iter().enumerate() {
            ln_term += 0.5 * nj as f64 * ln_ratio[j];
            match bessels.ln_value(j, nj.unsigned_abs() as u32)? {
                Some((ln_i, rel_i)) => {
                    ln_term += ln_i;
                    rel += rel_i + 1e-15;
                }
                None => {
                    underflow = true;
                    break;
                }
            }
        }
        if underflow {
            err.add(1e-290);
            continue;
        }
        let term = ln_term.exp();
        sum.add(term);
        err.add(term * rel);
    }
    Ok((sum.value(), trunc + err.value()))
}

fn bessel_args(rates: &SkellamRates, area: f64) -> Vec<f64> {
    rates
        .plus()
        .rates()
        .iter()
        .zip(rates.minus().rates().iter())
        .map(|(&p, &m)| 2.0 * area * (p * m).sqrt())
        .collect()
}

/// P{S(A) = n} for the signed field: e^{−(Λ⁺+Λ⁻)|A|} times the sum over
/// signed compositions of n (|n_j| ≤ W, W from the certified truncation
/// bound) of Π_j (λ_j⁺/λ_j⁻)^{n_j/2} I_{|n_j|}(2|A|√(λ_j⁺λ_j⁻)).
pub fn skellam_pmf(rates: &SkellamRates, area: f64, n: i64, tol: f64) -> Result<f64, ModelError> {
    check_positive(area, "window measure")?;
    check_tol(tol)?;
    let mut bessels = BesselCache::new(bessel_args(rates, area));
    let (p, _) = skellam_pmf_detail(rates, area, n, tol, &mut bessels)?;
    Ok(p)
}

/// Table of P{S(A) = n} covering all n with certified two-sided tails:
/// S is pointwise between −M⁻ and M⁺ (the one-sided weighted fields), whose
/// tails bound the table's.
pub fn skellam_pmf_table(
    rates: &SkellamRates,
    area: f64,
    tail_tol: f64,
) -> Result<PmfTable, ModelError> {
    check_positive(area, "window measure")?;
    check_tol(tail_tol)?;
    const MAX_SIDE: u32 = 20_000;
    let side = |rv: &super::RateVector| -> Result<u32, ModelError> {
        let mut n = 0u32;
        while gprf_tail_bound(rv, area, n) >= 0.25 * tail_tol {
            n += 1;
            if n >= MAX_SIDE {
                return Err(ModelError::ResourceLimit(MAX_SIDE as usize));
            }
        }
        Ok(n)
    };
    let n_plus = side(rates.plus())?;
    let n_minus = side(rates.minus())?;
    let count = (n_plus + n_minus + 1) as usize;
    let tol_n = 0.5 * tail_tol / count as f64;
    let mut bessels = BesselCache::new(bessel_args(rates, area));
    let mut probs = Vec::with_capacity(count);
    let mut err_acc = gprf_tail_bound(rates.plus(), area, n_plus)
        + gprf_tail_bound(rates.minus(), area, n_minus);
    for n in -(n_minus as i64)..=(n_plus as i64) {
        let (p, e) = skellam_pmf_detail(rates, area, n, tol_n, &mut bessels)?;
        probs.push(p);
        err_acc += e;
    }
    PmfTable::new(-(n_minus as i64), probs, err_acc)
}

/// Moment generating function of the general weighted superposition:
/// E e^{uX(A)} = exp(|A| Σ_{i∈𝓘} Σ_j λ_j^{(i)} (e^{iju} − 1)).
pub fn gspp_mgf(rates: &GsppRates, area: f64, u: f64) -> Result<f64, ModelError> {
    check_positive(area, "window measure")?;
    if !u.is_finite() {
        return Err(ModelError::InvalidParams(format!(
            "mgf argument must be finite, got {u}"
        )));
    }
    let mut exponent = KahanSum::new();
    for (i, rv) in rates.components() {
        for (idx, &l) in rv.rates().iter().enumerate() {
            let j = idx as f64 + 1.0;
            exponent.add(l * ((i * j * u).exp() - 1.0));
        }
    }
    Ok((area * exponent.value()).exp())
}

/// φ(z) = Σ_j [λ_j⁺ (1 − z^j) + λ_j⁻ (1 − z^{−j})], the pgf exponent kernel
/// of the signed field.
fn signed_kernel(rates: &SkellamRates, z: f64) -> f64 {
    let mut acc = KahanSum::new();
    for (idx, (&p, &m)) in rates
        .plus()
        .rates()
        .iter()
        .zip(rates.minus().rates().iter())
        .enumerate()
    {
        let zj = z.powi(idx as i32 + 1);
        acc.add(p * (1.0 - zj));
        acc.add(m * (1.0 - 1.0 / zj));
    }
    acc.value()
}

/// E[z^{S^{α,β}(s,t)}] = W₀(−φ(z) s^α t^β) for z ∈ (0, 1].
pub fn fgspp_pgf(
    rates: &SkellamRates,
    frac: FracOrders,
    s: f64,
    t: f64,
    z: f64,
    tol: f64,
) -> Result<f64, ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    check_tol(tol)?;
    if !(z > 0.0 && z <= 1.0) {
        return Err(ModelError::InvalidParams(format!(
            "signed pgf argument must lie in (0, 1], got {z}"
        )));
    }
    let arg = -signed_kernel(rates, z) * frac.scale(s, t);
    let mut factors = WFactors::new(frac, arg);
    let (w, _) = factors.get(0, tol)?;
    Ok(w)
}

/// Markov bound P{N > m} ≤ E[z^N]/z^{m+1} where N is a Poisson count with
/// rate λ on the random clock area: E[z^N] = W₀(λ(z−1)v). Evaluated over a
/// z grid with divergent entries skipped; cached per λ.
struct MixedTail {
    frac: FracOrders,
    v: f64,
    cache: HashMap<u64, Vec<(f64, Option<f64>)>>,
}

const MIXED_Z_GRID: [f64; 12] = [
    1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0,
];

impl MixedTail {
    fn new(frac: FracOrders, v: f64) -> Self {
        MixedTail {
            frac,
            v,
            cache: HashMap::new(),
        }
    }

    fn bound(&mut self, lambda: f64, m: u32) -> f64 {
        let entries = self.cache.entry(lambda.to_bits()).or_insert_with(|| {
            MIXED_Z_GRID
                .iter()
                .map(|&z| {
                    let mut f = WFactors::new(self.frac, lambda * (z - 1.0) * self.v);
                    (z, f.get(0, 1e-6).ok().map(|(w, _)| w * (1.0 + 2e-6)))
                })
                .collect()
        });
        let mut best = 1.0f64;
        for &(z, w) in entries.iter() {
            if let Some(w0) = w {
                best = best.min((w0.ln() - (m as f64 + 1.0) * z.ln()).exp());
            }
        }
        best
    }
}

#[allow(clippy::too_many_arguments)]
fn fgspp_pmf_detail(
    rates: &SkellamRates,
    frac: FracOrders,
    s: f64,
    t: f64,
    n: i64,
    tol: f64,
    factors: &mut WFactors,
    tails: &mut MixedTail,
) -> Result<(f64, f64), ModelError> {
    let k = rates.k();
    let plus = rates.plus().rates();
    let minus = rates.minus().rates();
    let v = frac.scale(s, t);
    // Weight bound W for the signed compositions, certified through the
    // random-clock Poisson tails of each component.
    let mut w_bound = n.unsigned_abs().min(u32::MAX as u64) as u32;
    let trunc_w = loop {
        let b: f64 = (0..k)
            .map(|j| tails.bound(plus[j], w_bound) + tails.bound(minus[j], w_bound))
            .sum::<f64>()
            .min(1.0);
        if b <= 0.25 * tol {
            break b;
        }
        if w_bound >= 2_000 {
            return Err(ModelError::ResourceLimit(w_bound as usize));
        }
        w_bound = w_bound + w_bound / 2 + 2;
    };
    // Shell bound T* for the pair counts: Σ_j min(N_j⁺, N_j⁻) is dominated
    // by the smaller of the two one-sided totals.
    let lam_min = rates.plus().total().min(rates.minus().total());
    let mut t_star = 0u32;
    let trunc_t = loop {
        let b = tails.bound(lam_min, t_star).min(1.0);
        if b <= 0.25 * tol {
            break b;
        }
        if t_star >= 2_000 {
            return Err(ModelError::ResourceLimit(t_star as usize));
        }
        t_star += 1;
    };
    // Gather term prefactors Π_j c_j^{2m_j+|n_j|} (λ_j⁺/λ_j⁻)^{n_j/2} /
    // ((|n_j|+m_j)! m_j!) across compositions and pair-count shells. The
    // prefactor is a product over components, so for a fixed composition the
    // whole shell sum is a convolution of per-component series in the pair
    // count m_j:   e_j(a, m) = c_j^{2m} / ((a+m)! m!),  a = |n_j|.
    // Truncating every convolution at degree T* keeps exactly the simplex
    // Σ m_j ≤ T* (all dropped cross terms exceed it), so the certified shell
    // bound is unchanged.
    let ln_c: Vec<f64> = (0..k).map(|j| ((plus[j] * minus[j]).sqrt() * v).ln()).collect();
    let ln_ratio: Vec<f64> = (0..k).map(|j| plus[j].ln() - minus[j].ln()).collect();
    let ln_fact: Vec<f64> = (0..=(w_bound + t_star + 1) as usize)
        .map(|i| ln_gamma(i as f64 + 1.0))
        .collect();
    let tdim = t_star as usize + 1;
    // Per-component series rows, built lazily for the |n_j| values that occur.
    let mut e_rows: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; w_bound as usize + 1]; k];
    let mut row = |j: usize, a: usize| -> Vec<f64> {
        e_rows[j][a]
            .get_or_insert_with(|| {
                (0..tdim)
                    .map(|m| (2.0 * m as f64 * ln_c[j] - ln_fact[a + m] - ln_fact[m]).exp())
                    .collect()
            })
            .clone()
    };
    // Terms sharing a total atom count m share their moment factor, so only
    // the bucketed prefactor sums are kept — the composition × shell product
    // runs to millions of terms while m stays below k·W + 2T*.
    let m_cap = k as u32 * w_bound + 2 * t_star;
    let mut buckets: Vec<KahanSum> = (0..=m_cap).map(|_| KahanSum::new()).collect();
    // Products that dip below the f64 range flush toward zero; every such
    // term is ≤ MIN_POSITIVE before the composition weight, so charge the
    // operation count against the budget.
    let mut flush = 0.0f64;
    let mut scratch = vec![0.0f64; tdim];
    for comp in enumerate_theta_signed(k, n, w_bound)? {
        let mut base = 0.0;
        let mut m0 = 0u32;
        for (j, &nj) in comp.parts().iter().enumerate() {
            let a = nj.unsigned_abs() as f64;
            base += 0.5 * nj as f64 * ln_ratio[j] + a * ln_c[j];
            m0 += nj.unsigned_abs() as u32;
        }
        let weight = base.exp();
        let mut poly = row(0, comp.parts()[0].unsigned_abs() as usize);
        for j in 1..k {
            let other = row(j, comp.parts()[j].unsigned_abs() as usize);
            scratch[..tdim].fill(0.0);
            for (i, &pi) in poly.iter().enumerate() {
                if pi == 0.0 {
                    continue;
                }
                for (l, &ql) in other.iter().enumerate().take(tdim - i) {
                    scratch[i + l] += pi * ql;
                }
            }
            poly.copy_from_slice(&scratch);
        }
        flush += weight * (tdim * tdim * k) as f64;
        for (d, &coef) in poly.iter().enumerate() {
            if coef != 0.0 {
                buckets[m0 as usize + 2 * d].add(weight * coef);
            }
        }
    }
    // Every term is pre·W_m with both factors positive and the terms summing
    // to the probability (≤ 1), so a relative certificate on each factor
    // bounds the total error by rel_w · Σ pre·W ≤ rel_w; the reported error
    // uses the achieved bounds (the 1e-12 slack covers the f64 noise of the
    // log-space prefactor assembly).
    let rel_w = 0.25 * tol;
    let mut sum = KahanSum::new();
    let mut err = KahanSum::new();
    err.add(flush * f64::MIN_POSITIVE);
    for (m, bucket) in buckets.iter().enumerate() {
        let pre = bucket.value();
        if pre == 0.0 {
            continue;
        }
        let (w, bound) = factors.get_rel(m as u32, rel_w)?;
        sum.add(pre * w);
        err.add(pre * (bound + w.abs() * 1e-12));
    }
    Ok((sum.value(), trunc_w + trunc_t + err.value()))
}

/// P{S^{α,β}(s,t) = n} for the fractional signed field: the signed
/// composition sum with per-component pair expansions, each term carrying
/// the moment factor W_{Σ(2m_j+|n_j|)}(−(Λ⁺+Λ⁻) s^α t^β); certified error
/// ≤ tol.
pub fn fgspp_pmf(
    rates: &SkellamRates,
    frac: FracOrders,
    s: f64,
    t: f64,
    n: i64,
    tol: f64,
) -> Result<f64, ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    check_tol(tol)?;
    let v = frac.scale(s, t);
    let mut factors = WFactors::new(frac, -(rates.plus().total() + rates.minus().total()) * v);
    let mut tails = MixedTail::new(frac, v);
    let (p, _) = fgspp_pmf_detail(rates, frac, s, t, n, tol, &mut factors, &mut tails)?;
    // The alternating moment-factor series is certified to tol, so a value
    // outside [0, 1] can only be noise around a boundary; clamping improves.
    Ok(p.clamp(0.0, 1.0))
}

/// Table of P{S^{α,β}(s,t) = n} with certified two-sided tails through the
/// one-sided fractional fields.
pub fn fgspp_pmf_table(
    rates: &SkellamRates,
    frac: FracOrders,
    s: f64,
    t: f64,
    tail_tol: f64,
) -> Result<PmfTable, ModelError> {
    check_positive(s, "s")?;
    check_positive(t, "t")?;
    check_tol(tail_tol)?;
    const MAX_SIDE: u32 = 5_000;
    let v = frac.scale(s, t);
    let side = |rv: &super::RateVector| -> Result<(u32, f64), ModelError> {
        let mut cache: Vec<(f64, Option<f64>)> = Vec::new();
        let mut n = 0u32;
        loop {
            let b = fgprf_tail_bound(rv, frac, v, n, &mut cache);
            if b < 0.25 * tail_tol {
                return Ok((n, b));
            }
            n += 1;
            if n >= MAX_SIDE {
                return Err(ModelError::ResourceLimit(MAX_SIDE as usize));
            }
        }
    };
    let (n_plus, tb_plus) = side(rates.plus())?;
    let (n_minus, tb_minus) = side(rates.minus())?;
    let count = (n_plus + n_minus + 1) as usize;
    let tol_n = 0.5 * tail_tol / count as f64;
    let mut factors = WFactors::new(frac, -(rates.plus().total() + rates.minus().total()) * v);
    let mut tails = MixedTail::new(frac, v);
    let mut probs = Vec::with_capacity(count);
    let mut err_acc = tb_plus + tb_minus;
    for n in -(n_minus as i64)..=(n_plus as i64) {
        let (p, e) = fgspp_pmf_detail(rates, frac, s, t, n, tol_n, &mut factors, &mut tails)?;
        // Noise around zero in the far tail: the true mass is nonnegative,
        // so clamp and charge the clamped amount to the certified error.
        probs.push(p.max(0.0));
        err_acc += e + (-p).max(0.0);
    }
    PmfTable::new(-(n_minus as i64), probs, err_acc)
}

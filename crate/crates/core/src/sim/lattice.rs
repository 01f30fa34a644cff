//! Bernoulli-lattice approximating fields: sampling by exact multinomial
//! category counts, and the exact law by polynomial powering.

use rand_distr::{Binomial, Distribution};

use super::{LatticeConfig, RngStream};
use crate::model::{ModelError, PmfTable};

const MAX_CELLS: u64 = 1 << 40;

fn cell_count(n: u32, s: f64, t: f64) -> Result<u64, ModelError> {
    for v in [s, t] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(ModelError::InvalidParams(format!(
                "side lengths must be nonnegative and finite, got {v}"
            )));
        }
    }
    let cells = (n as f64 * s).floor() as u64 * ((n as f64 * t).floor() as u64);
    if cells > MAX_CELLS {
        return Err(ModelError::ResourceLimit(MAX_CELLS as usize));
    }
    Ok(cells)
}

/// One draw of the lattice field at scale n on [0,s]×[0,t]: the sum of
/// ⌊ns⌋⌊nt⌋ iid multi-valued Bernoulli cells. Sampled through the exact
/// multinomial category counts (sequential conditional binomials), which is
/// law-identical to per-cell iteration.
pub fn sample_lattice_field(
    config: &LatticeConfig,
    s: f64,
    t: f64,
    rng: &mut RngStream,
) -> Result<i64, ModelError> {
    let law = config.cell_law()?;
    let cells = cell_count(config.scale(), s, t)?;
    let mut remaining = cells;
    let mut rest_prob = 1.0f64;
    let mut total = 0i64;
    for &(weight, p) in &law {
        if remaining == 0 || rest_prob <= 0.0 {
            break;
        }
        let cond = (p / rest_prob).min(1.0);
        let c = Binomial::new(remaining, cond)
            .expect("valid binomial")
            .sample(rng);
        total += weight * c as i64;
        remaining -= c;
        rest_prob -= p;
    }
    Ok(total)
}

/// Exact law of the lattice field: the ⌊ns⌋⌊nt⌋-fold power of the cell law,
/// computed by binary powering of coefficient arrays over a support window
/// wide enough that the (exactly known) omitted mass is below `tail_tol`.
pub fn lattice_exact_law(
    config: &LatticeConfig,
    s: f64,
    t: f64,
    tail_tol: f64,
) -> Result<PmfTable, ModelError> {
    if !(tail_tol > 0.0 && tail_tol.is_finite()) {
        return Err(ModelError::InvalidParams(format!(
            "tolerance must be positive and finite, got {tail_tol}"
        )));
    }
    let law = config.cell_law()?;
    let cells = cell_count(config.scale(), s, t)?;
    if cells == 0 {
        return PmfTable::new(0, vec![1.0], 0.0);
    }
    if cells > (1 << 30) {
        return Err(ModelError::ResourceLimit(1 << 30));
    }
    // Support window from mean ± spread, widened until the deficit
    // 1 − Σ retained (exact, since the untruncated power has mass 1)
    // clears the tolerance.
    let mean: f64 = law.iter().map(|&(w, p)| w as f64 * p).sum::<f64>() * cells as f64;
    let var: f64 = law
        .iter()
        .map(|&(w, p)| (w as f64) * (w as f64) * p)
        .sum::<f64>()
        * cells as f64;
    let max_w = law.iter().map(|&(w, _)| w.max(0)).max().unwrap_or(0);
    let min_w = law.iter().map(|&(w, _)| w.min(0)).min().unwrap_or(0);
    let mut spread = 40.0 * var.sqrt() + 20.0;
    for _ in 0..8 {
        let lo = ((mean - spread).floor() as i64).max(cells as i64 * min_w);
        let hi = ((mean + spread).ceil() as i64).min(cells as i64 * max_w);
        let (probs, total) = truncated_power(&law, cells, lo, hi);
        let deficit = (1.0 - total).max(0.0);
        if deficit < tail_tol {
            return PmfTable::new(lo, probs, deficit + 1e-13);
        }
        spread *= 2.0;
    }
    Err(ModelError::QuadratureFailure(
        "lattice law support window failed to capture the requested mass".into(),
    ))
}

/// Coefficients of (cell pgf)^cells restricted to offsets [lo, hi]:
/// binary powering with truncation to a working window that always includes
/// 0 (so the low-power intermediates, whose mass sits near 0, are kept);
/// returns the retained probabilities on [lo, hi] and their total.
fn truncated_power(law: &[(i64, f64)], cells: u64, lo: i64, hi: i64) -> (Vec<f64>, f64) {
    let work_lo = lo.min(0);
    let work_hi = hi.max(0);
    // Base polynomial: the cell law, including the zero weight.
    let zero_p = 1.0 - law.iter().map(|&(_, p)| p).sum::<f64>();
    let base_lo = law.iter().map(|&(w, _)| w.min(0)).min().unwrap_or(0);
    let base_hi = law.iter().map(|&(w, _)| w.max(0)).max().unwrap_or(0);
    let mut base = vec![0.0f64; (base_hi - base_lo + 1) as usize];
    base[(0 - base_lo) as usize] = zero_p;
    for &(w, p) in law {
        base[(w - base_lo) as usize] += p;
    }
    // Accumulator starts as the delta at 0.
    let mut acc = vec![1.0f64];
    let mut acc_lo = 0i64;
    let mut sq = base;
    let mut sq_lo = base_lo;
    let mut exp = cells;
    loop {
        if exp & 1 == 1 {
            let (next, next_lo) = window_mul(&acc, acc_lo, &sq, sq_lo, work_lo, work_hi);
            acc = next;
            acc_lo = next_lo;
        }
        exp >>= 1;
        if exp == 0 {
            break;
        }
        let (next, next_lo) = window_mul(&sq, sq_lo, &sq, sq_lo, work_lo, work_hi);
        sq = next;
        sq_lo = next_lo;
    }
    // Re-frame the accumulator onto the reporting window [lo, hi].
    let mut probs = vec![0.0f64; (hi - lo + 1) as usize];
    for (i, &p) in acc.iter().enumerate() {
        let off = acc_lo + i as i64;
        if off >= lo && off <= hi {
            probs[(off - lo) as usize] = p;
        }
    }
    let total = probs.iter().sum();
    (probs, total)
}

/// Convolution of two coefficient arrays, truncated to offsets [lo, hi].
fn window_mul(a: &[f64], a_lo: i64, b: &[f64], b_lo: i64, lo: i64, hi: i64) -> (Vec<f64>, i64) {
    let out_lo = (a_lo + b_lo).max(lo);
    let out_hi = (a_lo + a.len() as i64 - 1 + b_lo + b.len() as i64 - 1).min(hi);
    if out_hi < out_lo {
        return (vec![0.0], lo);
    }
    let mut out = vec![0.0f64; (out_hi - out_lo + 1) as usize];
    for (i, &pa) in a.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        let base = a_lo + i as i64 + b_lo;
        let j_min = (out_lo - base).max(0);
        let j_max = (out_hi - base).min(b.len() as i64 - 1);
        if j_max < j_min {
            continue;
        }
        for j in (j_min as usize)..=(j_max as usize) {
            out[(base + j as i64 - out_lo) as usize] += pa * b[j];
        }
    }
    (out, out_lo)
}

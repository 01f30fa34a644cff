//! Pearson chi-square tests (one-sample against an exact table, and
//! independence on binned contingency tables), Kolmogorov–Smirnov helpers,
//! covariance intervals, and total-variation estimates.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::VerifyError;
use crate::model::PmfTable;

/// Outcome of a goodness-of-fit or independence test.
#[derive(Clone, Debug)]
pub struct GofReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub samples: usize,
    pub bins: String,
}

fn chi_square_p(statistic: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64)
        .expect("positive dof")
        .sf(statistic)
}

/// Pearson chi-square of integer samples against an exact table. Support
/// cells are merged left-to-right until each bin's expected count is ≥ 5;
/// everything outside the table support joins the edge bins.
pub fn chi_square_gof(samples: &[i64], pmf: &PmfTable) -> Result<GofReport, VerifyError> {
    let n = samples.len();
    if n < 1_000 {
        return Err(VerifyError::InvalidParams(format!(
            "need at least 1000 samples, got {n}"
        )));
    }
    let support = pmf.support();
    let lo = *support.start();
    let hi = *support.end();
    let width = (hi - lo + 1) as usize;
    let mut observed = vec![0u64; width + 1];
    for &x in samples {
        if x < lo {
            observed[0] += 1;
        } else if x > hi {
            observed[width] += 1;
        } else {
            observed[(x - lo) as usize] += 1;
        }
    }
    // Cell expectations; the out-of-support cell gets the leftover mass.
    let nf = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(width + 1);
    for (i, &p) in pmf.probs().iter().enumerate() {
        cells.push((p * nf, observed[i] as f64));
    }
    cells.push((
        (1.0 - pmf.total_mass()).max(0.0) * nf,
        observed[width] as f64,
    ));
    // Merge adjacent cells until every expected count reaches 5.
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (e, o) in cells {
        acc.0 += e;
        acc.1 += o;
        if acc.0 >= 5.0 {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 > 0.0 || acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return Err(VerifyError::DegenerateBins);
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(e, o)| {
            let d = o - e;
            d * d / e
        })
        .sum();
    let dof = bins.len() - 1;
    Ok(GofReport {
        statistic,
        dof,
        p_value: chi_square_p(statistic, dof),
        samples: n,
        bins: format!("{} merged bins on support {lo}..={hi}", bins.len()),
    })
}

/// Marginal bin edges: up to `max_bins` groups of roughly equal counts.
fn quantile_edges(sorted: &[i64], max_bins: usize) -> Vec<i64> {
    let n = sorted.len();
    let mut edges = Vec::new();
    for b in 1..max_bins {
        let v = sorted[(n * b / max_bins).min(n - 1)];
        if edges.last() != Some(&v) {
            edges.push(v);
        }
    }
    edges
}

fn bin_of(edges: &[i64], x: i64) -> usize {
    edges.iter().take_while(|&&e| x >= e).count()
}

/// Chi-square independence test on the binned joint contingency table of
/// integer pairs. Margins are binned at matched quantiles, coarsening until
/// every expected cell count is ≥ 5.
pub fn independence_check(pairs: &[(i64, i64)]) -> Result<GofReport, VerifyError> {
    let n = pairs.len();
    if n < 10_000 {
        return Err(VerifyError::InvalidParams(format!(
            "need at least 10000 pairs, got {n}"
        )));
    }
    let mut xs: Vec<i64> = pairs.iter().map(|p| p.0).collect();
    let mut ys: Vec<i64> = pairs.iter().map(|p| p.1).collect();
    xs.sort_unstable();
    ys.sort_unstable();
    for max_bins in (2..=6usize).rev() {
        let ex = quantile_edges(&xs, max_bins);
        let ey = quantile_edges(&ys, max_bins);
        let r = ex.len() + 1;
        let c = ey.len() + 1;
        if r < 2 || c < 2 {
            continue;
        }
        let mut table = vec![0u64; r * c];
        for &(x, y) in pairs {
            table[bin_of(&ex, x) * c + bin_of(&ey, y)] += 1;
        }
        let row: Vec<f64> = (0..r)
            .map(|i| (0..c).map(|j| table[i * c + j] as f64).sum())
            .collect();
        let col: Vec<f64> = (0..c)
            .map(|j| (0..r).map(|i| table[i * c + j] as f64).sum())
            .collect();
        let nf = n as f64;
        let mut ok = true;
        let mut statistic = 0.0;
        for i in 0..r {
            for j in 0..c {
                let e = row[i] * col[j] / nf;
                if e < 5.0 {
                    ok = false;
                    break;
                }
                let d = table[i * c + j] as f64 - e;
                statistic += d * d / e;
            }
            if !ok {
                break;
            }
        }
        if !ok {
            continue;
        }
        let dof = (r - 1) * (c - 1);
        return Ok(GofReport {
            statistic,
            dof,
            p_value: chi_square_p(statistic, dof),
            samples: n,
            bins: format!("{r}x{c} contingency table"),
        });
    }
    Err(VerifyError::DegenerateBins)
}

/// Sample covariance of the pairs with a 3-standard-error half-width
/// (moment-based standard error of the covariance estimator).
pub fn covariance_interval(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov = pairs
        .iter()
        .map(|&(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / n;
    let m22 = pairs
        .iter()
        .map(|&(x, y)| {
            let u = (x - mx) * (y - my);
            u * u
        })
        .sum::<f64>()
        / n;
    let se = ((m22 - cov * cov).max(0.0) / n).sqrt();
    (cov, 3.0 * se)
}

/// Asymptotic Kolmogorov upper-tail probability Q(λ) = 2Σ (−1)^{i−1} e^{−2i²λ²}.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for i in 1..101 {
        let term = 2.0 * (-2.0 * (i as f64) * (i as f64) * lambda * lambda).exp();
        sum += if i % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test: (statistic, p-value).
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len(), xb.len());
    let mut i = 0;
    let mut j = 0;
    let mut d = 0.0f64;
    while i < na && j < nb {
        let x = xa[i].min(xb[j]);
        while i < na && xa[i] <= x {
            i += 1;
        }
        while j < nb && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na as f64 * nb as f64) / (na as f64 + nb as f64);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// One-sample KS of values against Uniform(0,1): (statistic, p-value).
pub fn ks_uniform(values: &[f64]) -> (f64, f64) {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let u = x.clamp(0.0, 1.0);
        d = d.max(((i as f64 + 1.0) / n - u).abs());
        d = d.max((u - i as f64 / n).abs());
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_q(lambda))
}

/// Total-variation distance between the empirical law of the samples and
/// the table: ½ Σ |empirical − exact|, counting sample mass outside the
/// table support and the table's own omitted mass in full.
pub fn total_variation(samples: &[i64], pmf: &PmfTable) -> f64 {
    let n = samples.len() as f64;
    let support = pmf.support();
    let lo = *support.start();
    let hi = *support.end();
    let width = (hi - lo + 1) as usize;
    let mut observed = vec![0u64; width];
    let mut outside = 0u64;
    for &x in samples {
        if x < lo || x > hi {
            outside += 1;
        } else {
            observed[(x - lo) as usize] += 1;
        }
    }
    let mut acc = 0.0;
    for (i, &p) in pmf.probs().iter().enumerate() {
        acc += (observed[i] as f64 / n - p).abs();
    }
    acc += outside as f64 / n + (1.0 - pmf.total_mass()).max(0.0);
    0.5 * acc
}

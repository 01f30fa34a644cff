//! Enumeration of the weighted-composition index sets behind the exact pmf
//! formulas: all (n_1, ..., n_k) with Σ j·n_j = n, either over nonnegative
//! multiplicities or over signed ones with a per-component magnitude bound
//! (two-sided fields), plus the certified bound on the mass a signed
//! truncation omits.

use thiserror::Error;

/// Default cap on how many compositions an enumeration may produce.
pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("enumeration would visit {needed} candidates, exceeding the cap of {cap}")]
    ResourceLimit { needed: u128, cap: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

/// Multiplicities (n_1, ..., n_k) with Σ j·n_j equal to the target weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition {
    parts: Vec<u32>,
}

impl Composition {
    /// Multiplicity vector; parts()[j-1] is the count of weight-j atoms.
    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Σ j·n_j — the total the composition represents.
    pub fn weight(&self) -> u64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as u64 + 1) * m as u64)
            .sum()
    }

    /// Σ n_j — the number of atoms.
    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&m| m as u64).sum()
    }
}

/// Signed multiplicities with |n_j| bounded by `weight_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedComposition {
    parts: Vec<i64>,
    weight_bound: u32,
}

impl SignedComposition {
    pub fn parts(&self) -> &[i64] {
        &self.parts
    }

    pub fn weight_bound(&self) -> u32 {
        self.weight_bound
    }

    /// Σ j·n_j.
    pub fn weight(&self) -> i64 {
        self.parts
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as i64 + 1) * m)
            .sum()
    }

    /// Σ |n_j|.
    pub fn total_magnitude(&self) -> u64 {
        self.parts.iter().map(|&m| m.unsigned_abs()).sum()
    }
}

/// Number of compositions with parts of size <= k summing to n
/// (restricted-partition count).
pub(crate) fn count_theta(k: usize, n: u32) -> u128 {
    let n = n as usize;
    let mut dp = vec![0u128; n + 1];
    dp[0] = 1;
    for j in 1..=k.min(n.max(1)) {
        for m in j..=n {
            dp[m] += dp[m - j];
        }
    }
    dp[n]
}

/// Enumerate Θ(k, n) = { (n_1..n_k) ∈ ℕ₀^k : Σ j·n_j = n } in ascending
/// lexicographic order on (n_k, ..., n_2) with n_1 determined.
pub fn enumerate_theta(k: usize, n: u32) -> Result<ThetaIter, PartitionError> {
    enumerate_theta_capped(k, n, DEFAULT_ENUMERATION_CAP)
}

/// Like [`enumerate_theta`] with an explicit resource cap.
pub fn enumerate_theta_capped(
    k: usize,
    n: u32,
    cap: u64,
) -> Result<ThetaIter, PartitionError> {
    if k == 0 {
        return Err(PartitionError::InvalidParams(
            "composition length k must be at least 1".into(),
        ));
    }
    let needed = count_theta(k, n);
    if needed > cap as u128 {
        return Err(PartitionError::ResourceLimit { needed, cap });
    }
    Ok(ThetaIter {
        k,
        n,
        parts: None,
        done: false,
    })
}

pub struct ThetaIter {
    k: usize,
    n: u32,
    parts: Option<Vec<u32>>,
    done: bool,
}

impl Iterator for ThetaIter {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        if self.done {
            return None;
        }
        match &mut self.parts {
            None => {
                // first item: everything on n_1
                let mut parts = vec![0u32; self.k];
                parts[0] = self.n;
                self.parts = Some(parts);
            }
            Some(parts) => {
                // odometer over (n_2, ..., n_k), n_2 fastest
                let mut advanced = false;
                for j in 2..=self.k {
                    let above: u64 = (j + 1..=self.k)
                        .map(|i| i as u64 * parts[i - 1] as u64)
                        .sum();
                    let used = above + j as u64 * (parts[j - 1] as u64 + 1);
                    if used <= self.n as u64 {
                        parts[j - 1] += 1;
                        for p in parts.iter_mut().take(j - 1).skip(1) {
                            *p = 0;
                        }
                        parts[0] = (self.n as u64 - used) as u32;
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    self.done = true;
                    return None;
                }
            }
        }
        Some(Composition {
            parts: self.parts.clone().unwrap(),
        })
    }
}

/// Enumerate the signed set Θ̃(k, n, W) = { (n_1..n_k) ∈ ℤ^k : Σ j·n_j = n,
/// |n_j| <= W } in ascending lexicographic order on (n_k, ..., n_2).
///
/// Requires W >= |n|, which guarantees the set is nonempty.
pub fn enumerate_theta_signed(
    k: usize,
    n: i64,
    weight_bound: u32,
) -> Result<SignedThetaIter, PartitionError> {
    enumerate_theta_signed_capped(k, n, weight_bound, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_theta_signed_capped(
    k: usize,
    n: i64,
    weight_bound: u32,
    cap: u64,
) -> Result<SignedThetaIter, PartitionError> {
    if k == 0 {
        return Err(PartitionError::InvalidParams(
            "composition length k must be at least 1".into(),
        ));
    }
    if (weight_bound as i64) < n.abs() {
        return Err(PartitionError::InvalidParams(format!(
            "weight bound {weight_bound} must be at least |n| = {}",
            n.abs()
        )));
    }
    let candidates = (2u128 * weight_bound as u128 + 1).pow(k as u32 - 1);
    if candidates > cap as u128 {
        return Err(PartitionError::ResourceLimit {
            needed: candidates,
            cap,
        });
    }
    Ok(SignedThetaIter {
        k,
        n,
        w: weight_bound as i64,
        weight_bound,
        high: None,
        done: false,
    })
}

pub struct SignedThetaIter {
    k: usize,
    n: i64,
    w: i64,
    weight_bound: u32,
    /// current (n_2, ..., n_k); n_1 derived
    high: Option<Vec<i64>>,
    done: bool,
}

impl SignedThetaIter {
    fn emit(&self, high: &[i64]) -> Option<SignedComposition> {
        let rest: i64 = high
            .iter()
            .enumerate()
            .map(|(i, &m)| (i as i64 + 2) * m)
            .sum();
        let n1 = self.n - rest;
        if n1.abs() > self.w {
            return None;
        }
        let mut parts = Vec::with_capacity(self.k);
        parts.push(n1);
        parts.extend_from_slice(high);
        Some(SignedComposition {
            parts,
            weight_bound: self.weight_bound,
        })
    }

    fn advance(&mut self) -> bool {
        let high = self.high.as_mut().expect("advance after init");
        for v in high.iter_mut() {
            if *v < self.w {
                *v += 1;
                return true;
            }
            *v = -self.w;
        }
        false
    }
}

impl Iterator for SignedThetaIter {
    type Item = SignedComposition;

    fn next(&mut self) -> Option<SignedComposition> {
        if self.done {
            return None;
        }
        loop {
            if self.high.is_none() {
                self.high = Some(vec![-self.w; self.k - 1]);
            } else if !self.advance() {
                self.done = true;
                return None;
            }
            if let Some(c) = self.emit(self.high.as_ref().unwrap()) {
                return Some(c);
            }
        }
    }
}

/// Certified upper bound on the probability mass omitted by restricting all
/// signed multiplicities to |n_j| <= W, for a two-sided field with
/// per-weight rates `plus`/`minus` observed on a window of the given
/// measure.
///
/// |N⁺_j − N⁻_j| > W forces one of the two Poisson counts above W, so the
/// omitted mass is at most Σ_j [ P(N⁺_j > W) + P(N⁻_j > W) ], each bounded
/// through the geometric-envelope Poisson tail
/// P(N >= W+1) <= pois(W+1; μ) / (1 − μ/(W+2)) for μ < W+2.
pub fn signed_truncation_bound(plus: &[f64], minus: &[f64], area: f64, weight_bound: u32) -> f64 {
    let mut total = 0.0;
    for &lam in plus.iter().chain(minus.iter()) {
        total += poisson_tail_bound(lam * area, weight_bound);
    }
    total.min(1.0)
}

/// Upper bound on P(Poisson(mu) >= m+1).
pub(crate) fn poisson_tail_bound(mu: f64, m: u32) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    let m1 = m as f64 + 1.0;
    if mu >= m1 + 1.0 {
        return 1.0; // vacuous
    }
    let ln_p = m1 * mu.ln() - mu - crate::specfun::ln_gamma(m1 + 1.0);
    (ln_p.exp() / (1.0 - mu / (m1 + 1.0))).min(1.0)
}

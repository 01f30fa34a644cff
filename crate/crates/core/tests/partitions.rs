//! Exactness and bound tests for the weighted-composition enumerators.

use std::collections::HashSet;

use poisson_fields::partitions::{
    enumerate_theta, enumerate_theta_capped, enumerate_theta_signed,
    enumerate_theta_signed_capped, signed_truncation_bound, PartitionError,
};

/// Independent DP oracle: number of multisets of parts from {1..k} summing
/// to n (equivalently |{(n_1..n_k) ≥ 0 : Σ j·n_j = n}|).
fn count_oracle(k: usize, n: u32) -> u128 {
    let n = n as usize;
    let mut dp = vec![0u128; n + 1];
    dp[0] = 1;
    for j in 1..=k {
        for m in j..=n {
            dp[m] += dp[m - j];
        }
    }
    dp[n]
}

#[test]
fn enumeration_count_matches_dp_oracle() {
    for k in 1..=6 {
        for n in 0..=40u32 {
            let got = enumerate_theta(k, n).unwrap().count() as u128;
            assert_eq!(
                got,
                count_oracle(k, n),
                "count mismatch at k={k}, n={n}"
            );
        }
    }
}

#[test]
fn every_composition_satisfies_weight_identity() {
    for k in 1..=5 {
        for n in 0..=25u32 {
            for comp in enumerate_theta(k, n).unwrap() {
                assert_eq!(comp.parts().len(), k);
                assert_eq!(comp.weight(), n as u64);
                let size: u64 = comp.parts().iter().map(|&m| m as u64).sum();
                assert_eq!(comp.size(), size);
            }
        }
    }
}

#[test]
fn enumeration_has_no_duplicates() {
    for k in 1..=5 {
        for n in 0..=20u32 {
            let all: Vec<Vec<u32>> = enumerate_theta(k, n)
                .unwrap()
                .map(|c| c.parts().to_vec())
                .collect();
            let set: HashSet<Vec<u32>> = all.iter().cloned().collect();
            assert_eq!(set.len(), all.len(), "duplicate at k={k}, n={n}");
        }
    }
}

#[test]
fn single_component_enumeration_is_trivial() {
    for n in 0..=30u32 {
        let all: Vec<Vec<u32>> = enumerate_theta(1, n)
            .unwrap()
            .map(|c| c.parts().to_vec())
            .collect();
        assert_eq!(all, vec![vec![n]]);
    }
}

#[test]
fn known_small_enumeration_k3_n4() {
    let got: HashSet<Vec<u32>> = enumerate_theta(3, 4)
        .unwrap()
        .map(|c| c.parts().to_vec())
        .collect();
    let expected: HashSet<Vec<u32>> = [
        vec![4, 0, 0],
        vec![2, 1, 0],
        vec![0, 2, 0],
        vec![1, 0, 1],
    ]
    .into_iter()
    .collect();
    assert_eq!(got, expected);
}

#[test]
fn zero_length_rejected() {
    assert!(matches!(
        enumerate_theta(0, 3),
        Err(PartitionError::InvalidParams(_))
    ));
    assert!(matches!(
        enumerate_theta_signed(0, 0, 2),
        Err(PartitionError::InvalidParams(_))
    ));
}

#[test]
fn cap_exceeded_is_reported_not_truncated() {
    // k=6, n=40 has 920 compositions; a cap of 10 must refuse up front.
    let err = enumerate_theta_capped(6, 40, 10).err().expect("cap error");
    match err {
        PartitionError::ResourceLimit { needed, cap } => {
            assert_eq!(cap, 10);
            assert_eq!(needed, count_oracle(6, 40));
        }
        other => panic!("expected resource-limit error, got {other:?}"),
    }
}

/// Independent brute force for the signed set: scan the full box
/// {−W..W}^k and keep vectors with Σ j·n_j = n.
fn signed_oracle(k: usize, n: i64, w: i64) -> HashSet<Vec<i64>> {
    let mut out = HashSet::new();
    let width = (2 * w + 1) as u64;
    let total = width.pow(k as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut v = Vec::with_capacity(k);
        for _ in 0..k {
            v.push((rem % width) as i64 - w);
            rem /= width;
        }
        let weight: i64 = v.iter().enumerate().map(|(i, &m)| (i as i64 + 1) * m).sum();
        if weight == n {
            out.insert(v);
        }
    }
    out
}

#[test]
fn signed_enumeration_matches_bruteforce_box() {
    for k in 1..=3usize {
        for n in -3i64..=3 {
            for w in (n.unsigned_abs() as u32).max(1)..=3 {
                let got: HashSet<Vec<i64>> = enumerate_theta_signed(k, n, w)
                    .unwrap()
                    .map(|c| c.parts().to_vec())
                    .collect();
                assert_eq!(
                    got,
                    signed_oracle(k, n, w as i64),
                    "signed mismatch at k={k}, n={n}, W={w}"
                );
            }
        }
    }
}

#[test]
fn signed_k2_n1_w2_explicit() {
    let got: HashSet<Vec<i64>> = enumerate_theta_signed(2, 1, 2)
        .unwrap()
        .map(|c| c.parts().to_vec())
        .collect();
    // n_1 + 2 n_2 = 1 with |n_j| <= 2
    let expected: HashSet<Vec<i64>> =
        [vec![1, 0], vec![-1, 1], vec![-2, 2]]
            .into_iter()
            .chain([vec![1, 0]])
            .collect();
    // plus the descending side: n_2 = -1 forces n_1 = 3 > 2 (excluded)
    assert_eq!(got, expected);
}

#[test]
fn signed_enumeration_monotone_in_weight_bound() {
    for k in 1..=3usize {
        for n in -2i64..=2 {
            let mut prev: Option<HashSet<Vec<i64>>> = None;
            for w in (n.unsigned_abs() as u32).max(1)..=5 {
                let cur: HashSet<Vec<i64>> = enumerate_theta_signed(k, n, w)
                    .unwrap()
                    .map(|c| c.parts().to_vec())
                    .collect();
                if let Some(p) = prev {
                    assert!(
                        p.is_subset(&cur),
                        "larger bound lost compositions at k={k}, n={n}, W={w}"
                    );
                }
                prev = Some(cur);
            }
        }
    }
}

#[test]
fn signed_weight_bound_below_target_rejected() {
    assert!(matches!(
        enumerate_theta_signed(2, 5, 3),
        Err(PartitionError::InvalidParams(_))
    ));
}

#[test]
fn signed_cap_exceeded_is_reported() {
    // (2W+1)^(k-1) candidate columns; k=4, W=100 is 8.1e6 > cap of 1e6.
    let err = enumerate_theta_signed_capped(4, 0, 100, 1_000_000)
        .err()
        .expect("cap error");
    assert!(matches!(err, PartitionError::ResourceLimit { .. }));
}

/// Exact Poisson upper-tail mass P(N > m) via the complement of the finite
/// lower sum, in f64 with Kahan-style care (small mu, small m only).
fn poisson_tail_exact(mu: f64, m: u32) -> f64 {
    let mut term = (-mu).exp();
    let mut below = term;
    for i in 1..=m {
        term *= mu / i as f64;
        below += term;
    }
    (1.0 - below).max(0.0)
}

#[test]
fn signed_truncation_bound_dominates_exact_omitted_mass() {
    // The omitted-mass bound must dominate Σ_j [P(N⁺_j > W) + P(N⁻_j > W)]
    // computed exactly, for every bound W where the estimate is nontrivial.
    let plus = [0.7, 0.4];
    let minus = [0.5, 0.3];
    let area = 1.5;
    for w in 1..=25u32 {
        let bound = signed_truncation_bound(&plus, &minus, area, w);
        let exact: f64 = plus
            .iter()
            .chain(minus.iter())
            .map(|&l| poisson_tail_exact(l * area, w))
            .sum();
        assert!(
            bound >= exact - 1e-15,
            "bound {bound:.3e} below exact omitted mass {exact:.3e} at W={w}"
        );
        assert!(bound <= 1.0);
    }
    // and it must actually shrink to useful levels
    assert!(signed_truncation_bound(&plus, &minus, area, 30) < 1e-25);
}

#[test]
fn signed_truncation_bound_monotone_and_vacuous_cases() {
    let plus = [1.0];
    let minus = [2.0];
    let mut prev = f64::INFINITY;
    for w in 1..=40u32 {
        let b = signed_truncation_bound(&plus, &minus, 1.0, w);
        assert!(b <= prev + 1e-18, "bound increased at W={w}");
        prev = b;
    }
    // huge mean, tiny bound: estimate saturates at the trivial 1
    assert_eq!(signed_truncation_bound(&[50.0], &[50.0], 10.0, 1), 1.0);
}

//! Temporary timing probes (not part of the suite).

use std::time::Instant;

use poisson_fields::model::{RateVector, SkellamRates, FracOrders, Window};
use poisson_fields::sim::{
    sample_fgprf, sample_fgspp, sample_gprf, sample_gspp, sample_inverse_stable_path_with_step,
    GprfMethod, RngStream,
};

#[test]
#[ignore]
fn bench_paths() {
    let base = RngStream::new(7, 0);
    let grid = [1.0, 2.0];
    let n = 20_000u64;
    let t0 = Instant::now();
    let mut acc = 0.0;
    for i in 0..n {
        let mut rng = base.substream(i);
        let p = sample_inverse_stable_path_with_step(0.5, &grid, 1.0 / 1024.0, &mut rng).unwrap();
        acc += p.values()[1];
    }
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "paths step 1/1024: {n} in {dt:.2}s -> {:.1}us/path, 2e6 -> {:.0}s (acc {acc:.1})",
        dt / n as f64 * 1e6,
        dt / n as f64 * 2e6
    );
    let t0 = Instant::now();
    let mut acc = 0.0;
    for i in 0..n {
        let mut rng = base.substream(i);
        let p = sample_inverse_stable_path_with_step(0.5, &grid, 1.0 / 512.0, &mut rng).unwrap();
        acc += p.values()[1];
    }
    let dt = t0.elapsed().as_secs_f64();
    println!(
        "paths step 1/512 : {n} in {dt:.2}s -> {:.1}us/path, 2e6 -> {:.0}s (acc {acc:.1})",
        dt / n as f64 * 1e6,
        dt / n as f64 * 2e6
    );
}

#[test]
#[ignore]
fn bench_draws() {
    let rates = RateVector::new(vec![0.7, 0.4]).unwrap();
    let window = Window::anchored(vec![1.3, 1.0]).unwrap();
    let frac = FracOrders::new(0.6, 0.8).unwrap();
    let sk = SkellamRates::new(
        RateVector::new(vec![0.5]).unwrap(),
        RateVector::new(vec![0.5]).unwrap(),
    )
    .unwrap();
    let gspp = sk.to_gspp();
    let base = RngStream::new(7, 1);
    let n = 1_000_000u64;

    let t0 = Instant::now();
    let mut acc = 0u64;
    for i in 0..n {
        let mut rng = base.substream(i);
        acc += sample_gprf(&rates, &window, &mut rng, GprfMethod::Superposition);
    }
    println!("gprf   1e6: {:.2}s (acc {acc})", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let mut acc = 0u64;
    for i in 0..n {
        let mut rng = base.substream(i);
        acc += sample_fgprf(&rates, frac, 1.0, 1.0, &mut rng).unwrap();
    }
    println!("fgprf  1e6: {:.2}s (acc {acc})", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let mut acc = 0i64;
    for i in 0..n {
        let mut rng = base.substream(i);
        acc += sample_fgspp(&sk, frac, 1.0, 1.0, &mut rng).unwrap();
    }
    println!("fgspp  1e6: {:.2}s (acc {acc})", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let mut acc = 0i64;
    for i in 0..n {
        let mut rng = base.substream(i);
        acc += sample_gspp(&gspp, &window, &mut rng).unwrap();
    }
    println!("gspp   1e6: {:.2}s (acc {acc})", t0.elapsed().as_secs_f64());
}

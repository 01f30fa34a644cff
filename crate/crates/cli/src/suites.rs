//! `verify`: seeded verification suites over the library's exact laws,
//! samplers, and governing-equation residuals, reported as versioned JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use poisson_fields::model::{
    fgprf_pmf, fgprf_pmf_table, fgspp_pmf, gprf_pgf, gprf_pmf, gprf_pmf_table,
    inverse_subordinator_product_moments, skellam_pmf, skellam_pmf_table, FracOrders, PmfTable,
    RateVector, SkellamRates, Window,
};
use poisson_fields::sim::{
    sample_gprf, sample_gprf_components, sample_gspp, sample_lattice_field, thin_gprf,
    GprfMethod, LatticeConfig, RngStream,
};
use poisson_fields::verify::{
    chi_square_gof, covariance_interval, fractional_system_residual, independence_check,
    ode_residual, pgf_pde_residual, skellam_oracle_check, total_variation,
};

use crate::common::{model_err, resolve_seed, verify_err, write_output, CliError};

pub const REPORT_SCHEMA_VERSION: &str = "report-v1";

const P_FLOOR: f64 = 0.001;

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Closed-form reductions: single batch size, classical clock orders.
    Reductions,
    /// Thinning marginals, kept/removed independence, disjoint increments.
    Thinning,
    /// Samplers against their exact laws (both one-sided routes and signed).
    Representations,
    /// Classical governing-equation residuals.
    Odes,
    /// Fractional-system residuals and certified normalization.
    Fractional,
    /// Signed-field law against the convolution oracle and its symmetry.
    Skellam,
    /// Lattice approximation convergence in total variation.
    Convergence,
    /// Every suite above, in order.
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Reductions => "reductions",
            Suite::Thinning => "thinning",
            Suite::Representations => "representations",
            Suite::Odes => "odes",
            Suite::Fractional => "fractional",
            Suite::Skellam => "skellam",
            Suite::Convergence => "convergence",
            Suite::All => "all",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(clap::Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// RNG seed; overrides POISSON_FIELDS_SEED, which overrides the default.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Check {
    name: &'static str,
    passed: bool,
    statistic: f64,
    tolerance: f64,
    detail: String,
}

/// Pass when the statistic is finite and strictly below the tolerance.
fn below(name: &'static str, statistic: f64, tolerance: f64, detail: String) -> Check {
    Check {
        name,
        passed: statistic.is_finite() && statistic < tolerance,
        statistic: if statistic.is_finite() { statistic } else { f64::MAX },
        tolerance,
        detail,
    }
}

/// Pass when the statistic (a p-value) is finite and above the floor.
fn above(name: &'static str, statistic: f64, floor: f64, detail: String) -> Check {
    Check {
        name,
        passed: statistic.is_finite() && statistic > floor,
        statistic: if statistic.is_finite() { statistic } else { f64::MAX },
        tolerance: floor,
        detail,
    }
}

pub fn run(args: &VerifyArgs) -> Result<ExitCode, CliError> {
    let seed = resolve_seed(args.seed)?;
    let checks = run_suite(args.suite, seed)?;
    let passed = checks.iter().all(|c| c.passed);
    let content = match args.format {
        ReportFormat::Json => render_json(args.suite, seed, passed, &checks),
        ReportFormat::Text => render_text(&checks),
    };
    write_output(args.out.as_deref(), &content)?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn run_suite(suite: Suite, seed: u64) -> Result<Vec<Check>, CliError> {
    match suite {
        Suite::Reductions => suite_reductions(),
        Suite::Thinning => suite_thinning(seed),
        Suite::Representations => suite_representations(seed),
        Suite::Odes => suite_odes(),
        Suite::Fractional => suite_fractional(),
        Suite::Skellam => suite_skellam(),
        Suite::Convergence => suite_convergence(seed),
        Suite::All => {
            let mut checks = suite_reductions()?;
            checks.extend(suite_thinning(seed)?);
            checks.extend(suite_representations(seed)?);
            checks.extend(suite_odes()?);
            checks.extend(suite_fractional()?);
            checks.extend(suite_skellam()?);
            checks.extend(suite_convergence(seed)?);
            Ok(checks)
        }
    }
}

fn render_json(suite: Suite, seed: u64, passed: bool, checks: &[Check]) -> String {
    let rows: Vec<serde_json::Value> = checks
        .iter()
        .map(|c| {
            serde_json::json!({
                "name": c.name,
                "passed": c.passed,
                "statistic": c.statistic,
                "tolerance": c.tolerance,
                "detail": c.detail,
            })
        })
        .collect();
    let value = serde_json::json!({
        "schema_version": REPORT_SCHEMA_VERSION,
        "suite": suite.name(),
        "seed": seed,
        "passed": passed,
        "checks": rows,
    });
    format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
}

fn render_text(checks: &[Check]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{} {} statistic={} tolerance={} {}\n",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.statistic,
            c.tolerance,
            c.detail,
        ));
    }
    out
}

fn rates(values: &[f64]) -> Result<RateVector, CliError> {
    RateVector::new(values.to_vec()).map_err(model_err)
}

fn signed(plus: &[f64], minus: &[f64]) -> Result<SkellamRates, CliError> {
    SkellamRates::new(rates(plus)?, rates(minus)?).map_err(model_err)
}

fn orders(alpha: f64, beta: f64) -> Result<FracOrders, CliError> {
    FracOrders::new(alpha, beta).map_err(model_err)
}

// ---------------------------------------------------------------------------
// reductions

fn suite_reductions() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let mut worst = 0.0f64;
    for &(lambda, area) in &[(0.5, 1.0), (2.0, 1.5), (1.0, 4.0)] {
        let single = rates(&[lambda])?;
        let mu = lambda * area;
        let mut poisson = (-mu).exp();
        for n in 0..=30u32 {
            let direct = gprf_pmf(&single, area, n).map_err(model_err)?;
            worst = worst.max((direct - poisson).abs());
            poisson *= mu / (f64::from(n) + 1.0);
        }
    }
    checks.push(below(
        "single_batch_size_matches_poisson",
        worst,
        1e-12,
        "max |pmf - Poisson recurrence| over three (rate, area) points, n <= 30".into(),
    ));

    let pair = rates(&[0.4, 0.3])?;
    let classical = orders(1.0, 1.0)?;
    let (s, t) = (1.2, 0.8);
    let mut worst = 0.0f64;
    for n in 0..=12u32 {
        let frac_val = fgprf_pmf(&pair, classical, s, t, n, 1e-12).map_err(model_err)?;
        let base = gprf_pmf(&pair, s * t, n).map_err(model_err)?;
        worst = worst.max((frac_val - base).abs());
    }
    checks.push(below(
        "classical_orders_reduce_fractional_field",
        worst,
        1e-8,
        "max |fractional pmf at orders (1,1) - classical pmf|, n <= 12".into(),
    ));

    let sk = signed(&[0.6], &[0.4])?;
    let mut worst = 0.0f64;
    for n in -6..=6i64 {
        let frac_val = fgspp_pmf(&sk, classical, 1.0, 1.0, n, 1e-12).map_err(model_err)?;
        let base = skellam_pmf(&sk, 1.0, n, 1e-12).map_err(model_err)?;
        worst = worst.max((frac_val - base).abs());
    }
    checks.push(below(
        "classical_orders_reduce_signed_field",
        worst,
        1e-8,
        "max |fractional signed pmf at orders (1,1) - signed pmf|, |n| <= 6".into(),
    ));

    let pair = rates(&[0.5, 0.3])?;
    let area = 1.2;
    let table = gprf_pmf_table(&pair, area, 1e-12).map_err(model_err)?;
    let mut worst = 0.0f64;
    for &z in &[0.0, 0.4, 0.9] {
        let direct = gprf_pgf(&pair, area, z).map_err(model_err)?;
        let summed: f64 = table.iter().map(|(n, p)| z.powi(n as i32) * p).sum();
        worst = worst.max((direct - summed).abs());
    }
    checks.push(below(
        "pgf_matches_pmf_transform",
        worst,
        1e-8,
        "max |closed-form pgf - sum z^n p(n)| at z in {0, 0.4, 0.9}".into(),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// thinning

fn suite_thinning(seed: u64) -> Result<Vec<Check>, CliError> {
    const SAMPLES: u64 = 20_000;
    let mut checks = Vec::new();
    let base = RngStream::new(seed, 1);
    let pair = rates(&[0.8, 0.5])?;
    let window = Window::anchored(vec![1.0, 1.0]).map_err(model_err)?;
    let keep = [0.4, 0.7];

    let mut kept = Vec::with_capacity(SAMPLES as usize);
    let mut removed = Vec::with_capacity(SAMPLES as usize);
    for i in 0..SAMPLES {
        let mut rng = base.substream(i);
        let counts = sample_gprf_components(&pair, &window, &mut rng);
        let (k, r) = thin_gprf(&counts, &keep, &mut rng).map_err(model_err)?;
        kept.push(k as i64);
        removed.push(r as i64);
    }

    let kept_rates = rates(&[0.8 * keep[0], 0.5 * keep[1]])?;
    let removed_rates = rates(&[0.8 * (1.0 - keep[0]), 0.5 * (1.0 - keep[1])])?;
    let kept_table = gprf_pmf_table(&kept_rates, 1.0, 1e-10).map_err(model_err)?;
    let removed_table = gprf_pmf_table(&removed_rates, 1.0, 1e-10).map_err(model_err)?;

    let report = chi_square_gof(&kept, &kept_table).map_err(verify_err)?;
    checks.push(above(
        "kept_counts_match_reduced_rates",
        report.p_value,
        P_FLOOR,
        format!("chi-square {} on {} bins", report.statistic, report.dof + 1),
    ));
    let report = chi_square_gof(&removed, &removed_table).map_err(verify_err)?;
    checks.push(above(
        "removed_counts_match_complement_rates",
        report.p_value,
        P_FLOOR,
        format!("chi-square {} on {} bins", report.statistic, report.dof + 1),
    ));

    let pairs: Vec<(i64, i64)> = kept.iter().copied().zip(removed.iter().copied()).collect();
    let report = independence_check(&pairs).map_err(verify_err)?;
    checks.push(above(
        "kept_and_removed_independent",
        report.p_value,
        P_FLOOR,
        format!("contingency chi-square {} ({})", report.statistic, report.bins),
    ));

    let left = Window::increment(0.0, 1.0, 0.0, 1.0).map_err(model_err)?;
    let right = Window::increment(1.0, 2.0, 0.0, 1.0).map_err(model_err)?;
    let mut pairs = Vec::with_capacity(SAMPLES as usize);
    for i in 0..SAMPLES {
        let mut rng = base.substream(SAMPLES + i);
        let a = sample_gprf(&pair, &left, &mut rng, GprfMethod::Superposition);
        let b = sample_gprf(&pair, &right, &mut rng, GprfMethod::Superposition);
        pairs.push((a as f64, b as f64));
    }
    let (cov, halfwidth) = covariance_interval(&pairs);
    checks.push(below(
        "disjoint_increment_covariance_near_zero",
        cov.abs(),
        halfwidth,
        format!("sample covariance over {SAMPLES} disjoint-window pairs vs 3-SE interval"),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// representations

fn suite_representations(seed: u64) -> Result<Vec<Check>, CliError> {
    const SAMPLES: u64 = 100_000;
    let mut checks = Vec::new();
    let base = RngStream::new(seed, 2);
    let pair = rates(&[0.7, 0.4])?;
    let window = Window::anchored(vec![1.3, 1.0]).map_err(model_err)?;
    let table = gprf_pmf_table(&pair, 1.3, 1e-10).map_err(model_err)?;

    for (offset, method, name) in [
        (0u64, GprfMethod::Superposition, "superposition_sampler_matches_law"),
        (SAMPLES, GprfMethod::Compound, "compound_sampler_matches_law"),
    ] {
        let mut draws = Vec::with_capacity(SAMPLES as usize);
        for i in 0..SAMPLES {
            let mut rng = base.substream(offset + i);
            draws.push(sample_gprf(&pair, &window, &mut rng, method) as i64);
        }
        let report = chi_square_gof(&draws, &table).map_err(verify_err)?;
        checks.push(above(
            name,
            report.p_value,
            P_FLOOR,
            format!("chi-square {} on {} samples", report.statistic, report.samples),
        ));
    }

    let sk = signed(&[0.7, 0.3], &[0.5, 0.2])?;
    let gspp = sk.to_gspp();
    let window = Window::anchored(vec![1.0, 1.0]).map_err(model_err)?;
    let table = skellam_pmf_table(&sk, 1.0, 1e-10).map_err(model_err)?;
    let mut draws = Vec::with_capacity(SAMPLES as usize);
    for i in 0..SAMPLES {
        let mut rng = base.substream(2 * SAMPLES + i);
        draws.push(sample_gspp(&gspp, &window, &mut rng).map_err(model_err)?);
    }
    let report = chi_square_gof(&draws, &table).map_err(verify_err)?;
    checks.push(above(
        "signed_sampler_matches_law",
        report.p_value,
        P_FLOOR,
        format!("chi-square {} on {} samples", report.statistic, report.samples),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// odes

fn suite_odes() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let pair = rates(&[0.7, 0.4])?;
    let (s, t) = (1.1, 0.9);

    let mut worst = 0.0f64;
    for n in [0u32, 2, 5] {
        let report = ode_residual(&pair, s, t, n, 1e-5).map_err(verify_err)?;
        worst = worst.max(report.residual);
    }
    checks.push(below(
        "count_rate_equation_residual",
        worst,
        1e-6,
        "max residual of the first-order count equation at n in {0, 2, 5}".into(),
    ));

    let mut worst = 0.0f64;
    for &z in &[0.3, 0.8] {
        let report = pgf_pde_residual(&pair, s, t, z, 1e-4).map_err(verify_err)?;
        worst = worst.max(report.residual);
    }
    checks.push(below(
        "pgf_mixed_derivative_residual",
        worst,
        1e-6,
        "max residual of the second-order pgf equation at z in {0.3, 0.8}".into(),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// fractional

fn suite_fractional() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let pair = rates(&[0.3, 0.1])?;
    let mut worst = 0.0f64;
    for n in 0..=2u32 {
        let report =
            fractional_system_residual(&pair, orders(0.5, 0.5)?, 0.7, 0.7, n, 1e-12)
                .map_err(verify_err)?;
        worst = worst.max(report.residual);
    }
    checks.push(below(
        "fractional_system_residual_half_half",
        worst,
        1e-5,
        "max residual of the fractional governing system at orders (0.5, 0.5)".into(),
    ));

    let pair = rates(&[0.4, 0.2])?;
    let mut worst = 0.0f64;
    for n in 0..=2u32 {
        let report =
            fractional_system_residual(&pair, orders(0.6, 0.8)?, 0.9, 1.1, n, 1e-12)
                .map_err(verify_err)?;
        worst = worst.max(report.residual);
    }
    checks.push(below(
        "fractional_system_residual_mixed_orders",
        worst,
        1e-5,
        "max residual of the fractional governing system at orders (0.6, 0.8)".into(),
    ));

    let pair = rates(&[0.3, 0.2])?;
    let table =
        fgprf_pmf_table(&pair, orders(0.75, 0.5)?, 1.1, 0.9, 1e-10).map_err(model_err)?;
    let total = table.total_mass();
    let deviation = (total - 1.0).max(1.0 - total - table.tail_mass_bound()).max(0.0);
    checks.push(below(
        "fractional_table_mass_certified",
        deviation,
        1e-8,
        format!(
            "distance from 1 to [total, total + tail] = [{}, {}]",
            total,
            total + table.tail_mass_bound()
        ),
    ));

    let (mean, cov) =
        inverse_subordinator_product_moments(orders(1.0, 1.0)?, 1.0, 1.0, 2.0, 2.0)
            .map_err(model_err)?;
    checks.push(below(
        "classical_clock_product_moments",
        (mean - 1.0).abs().max(cov.abs()),
        1e-10,
        "orders (1,1): joint clock mean st and covariance 0".into(),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// skellam

fn suite_skellam() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let sk = signed(&[0.7, 0.3], &[0.5, 0.2])?;

    let diff = skellam_oracle_check(&sk, 1.5, -10..=10, 1e-12).map_err(verify_err)?;
    checks.push(below(
        "signed_law_matches_convolution",
        diff,
        1e-9,
        "max |direct signed pmf - convolution of one-sided tables|, |n| <= 10".into(),
    ));

    let swapped = signed(&[0.5, 0.2], &[0.7, 0.3])?;
    let mut worst = 0.0f64;
    for n in -6..=6i64 {
        let a = skellam_pmf(&sk, 1.5, n, 1e-12).map_err(model_err)?;
        let b = skellam_pmf(&swapped, 1.5, -n, 1e-12).map_err(model_err)?;
        worst = worst.max((a - b).abs());
    }
    checks.push(below(
        "signed_law_swap_negate_symmetry",
        worst,
        1e-11,
        "max |pmf(n) - swapped pmf(-n)|, |n| <= 6".into(),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// convergence

/// Total variation between two exact tables, including their tail bounds.
fn tv_tables(a: &PmfTable, b: &PmfTable) -> f64 {
    let lo = (*a.support().start()).min(*b.support().start());
    let hi = (*a.support().end()).max(*b.support().end());
    let mut sum = 0.0;
    for n in lo..=hi {
        sum += (a.prob(n) - b.prob(n)).abs();
    }
    0.5 * (sum + a.tail_mass_bound() + b.tail_mass_bound())
}

fn suite_convergence(seed: u64) -> Result<Vec<Check>, CliError> {
    const SAMPLES: u64 = 20_000;
    let mut checks = Vec::new();
    let pair = rates(&[0.6, 0.3])?;
    let exact = gprf_pmf_table(&pair, 1.0, 1e-10).map_err(model_err)?;

    let mut tvs = Vec::new();
    for &n in &[8u32, 32, 128] {
        let config = LatticeConfig::Gprf {
            n,
            rates: pair.clone(),
        };
        let law = poisson_fields::sim::lattice_exact_law(&config, 1.0, 1.0, 1e-10)
            .map_err(model_err)?;
        tvs.push(tv_tables(&law, &exact));
    }
    let monotone = tvs[0] > tvs[1] && tvs[1] > tvs[2];
    let mut check = below(
        "lattice_law_tv_decreases",
        tvs[2],
        0.01,
        format!("exact lattice-law TV at n in {{8, 32, 128}}: {tvs:?}"),
    );
    check.passed = check.passed && monotone;
    checks.push(check);

    let base = RngStream::new(seed, 3);
    let config = LatticeConfig::Gprf {
        n: 64,
        rates: pair.clone(),
    };
    let mut draws = Vec::with_capacity(SAMPLES as usize);
    for i in 0..SAMPLES {
        let mut rng = base.substream(i);
        draws.push(sample_lattice_field(&config, 1.0, 1.0, &mut rng).map_err(model_err)?);
    }
    let tv = total_variation(&draws, &exact);
    checks.push(below(
        "lattice_sampler_tv_small",
        tv,
        0.06,
        format!("empirical TV of {SAMPLES} lattice samples at n = 64"),
    ));

    Ok(checks)
}

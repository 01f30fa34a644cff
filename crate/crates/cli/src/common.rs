//! Shared plumbing: error-to-exit-code mapping, seed resolution, rate and
//! window construction, and output writing.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use poisson_fields::model::{FracOrders, ModelError, RateVector, SkellamRates, Window};
use poisson_fields::verify::VerifyError;

/// Default RNG seed; override with `--seed` or the environment variable.
pub const DEFAULT_SEED: u64 = 0x5EED_F1E1D5;
pub const SEED_ENV_VAR: &str = "POISSON_FIELDS_SEED";

/// Exit codes: 2 for parameter/usage problems, 3 when a series or search
/// failed to converge. Verification failures exit 1 from the suite runner.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    NonConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::NonConvergence(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::NonConvergence(msg) => write!(f, "did not converge: {msg}"),
        }
    }
}

pub fn model_err(err: ModelError) -> CliError {
    if err.is_non_convergence() {
        CliError::NonConvergence(err.to_string())
    } else {
        CliError::Usage(err.to_string())
    }
}

pub fn verify_err(err: VerifyError) -> CliError {
    match err {
        VerifyError::Model(inner) => model_err(inner),
        other => CliError::Usage(other.to_string()),
    }
}

/// `--seed` flag beats the environment variable beats the fixed default.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV_VAR) {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "{SEED_ENV_VAR} must be an unsigned 64-bit integer, got {text:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_SEED),
        Err(err) => Err(CliError::Usage(format!("cannot read {SEED_ENV_VAR}: {err}"))),
    }
}

pub fn rate_vector(rates: &[f64]) -> Result<RateVector, CliError> {
    RateVector::new(rates.to_vec()).map_err(model_err)
}

pub fn skellam_rates(plus: &[f64], minus: &[f64]) -> Result<SkellamRates, CliError> {
    if minus.is_empty() {
        return Err(CliError::Usage(
            "signed processes need --minus-rates with the same number of entries as --rates"
                .into(),
        ));
    }
    SkellamRates::new(rate_vector(plus)?, rate_vector(minus)?).map_err(model_err)
}

pub fn frac_orders(alpha: Option<f64>, beta: Option<f64>) -> Result<FracOrders, CliError> {
    match (alpha, beta) {
        (Some(a), Some(b)) => FracOrders::new(a, b).map_err(model_err),
        _ => Err(CliError::Usage(
            "fractional processes need both --alpha and --beta".into(),
        )),
    }
}

/// Planar window from `--s`/`--t`, or `--area` as a 1 × area rectangle.
pub fn window_from(
    area: Option<f64>,
    s: Option<f64>,
    t: Option<f64>,
) -> Result<Window, CliError> {
    match (area, s, t) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(CliError::Usage(
            "give either --area or --s/--t, not both".into(),
        )),
        (Some(a), None, None) => Window::anchored(vec![a, 1.0]).map_err(model_err),
        (None, Some(s), Some(t)) => Window::anchored(vec![s, t]).map_err(model_err),
        _ => Err(CliError::Usage(
            "need a window: --area, or both --s and --t".into(),
        )),
    }
}

/// Sides for processes that need s and t separately.
pub fn sides_from(s: Option<f64>, t: Option<f64>) -> Result<(f64, f64), CliError> {
    match (s, t) {
        (Some(s), Some(t)) => Ok((s, t)),
        _ => Err(CliError::Usage("need both --s and --t".into())),
    }
}

/// A count value `3` or an inclusive range `0..5` / `-4..4`.
pub fn parse_count_range(text: &str) -> Result<(i64, i64), CliError> {
    let bad = || {
        CliError::Usage(format!(
            "--n must be an integer or an inclusive range like 0..5, got {text:?}"
        ))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: i64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: i64 = hi.trim().strip_prefix('=').unwrap_or(hi.trim()).parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(CliError::Usage(format!(
                "empty range: {lo} > {hi} in --n {text:?}"
            )));
        }
        Ok((lo, hi))
    } else {
        let n: i64 = text.trim().parse().map_err(|_| bad())?;
        Ok((n, n))
    }
}

pub fn check_tolerance(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "tolerance must be positive and finite, got {tol}"
        )))
    }
}

/// Write to the file or stdout; returns the byte count written.
pub fn write_output(out: Option<&Path>, content: &str) -> Result<u64, CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|err| {
            CliError::Usage(format!("cannot write {}: {err}", path.display()))
        })?,
        None => print!("{content}"),
    }
    Ok(content.len() as u64)
}

pub fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content)
        .map_err(|err| CliError::Usage(format!("cannot write {}: {err}", path.display())))
}

pub fn sha256_hex(content: &str) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(content.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// `foo/bar.csv` → `foo/bar.csv.manifest.json`.
pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

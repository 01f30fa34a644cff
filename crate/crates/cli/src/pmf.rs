//! `pmf`: tabulate a process law over a count range with certified tail
//! bounds, as CSV or schema-versioned JSON.

use std::path::PathBuf;
use std::process::ExitCode;

use poisson_fields::model::{
    fgprf_pmf_table, fgspp_pmf_table, gprf_pmf_table, skellam_pmf_table, PmfTable,
};

use crate::common::{
    self, check_tolerance, frac_orders, model_err, parse_count_range, rate_vector,
    skellam_rates, write_output, CliError, Format,
};

pub const PMF_SCHEMA_VERSION: &str = "pmf-v1";

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PmfProcess {
    /// One-sided field with batch arrivals (k batch sizes).
    Gprf,
    /// One-sided field on independent fractional clocks.
    Fgprf,
    /// Signed field: plus-points minus minus-points.
    Skellam,
    /// Signed field on a shared fractional clock.
    Fgspp,
}

impl PmfProcess {
    pub fn name(self) -> &'static str {
        match self {
            PmfProcess::Gprf => "gprf",
            PmfProcess::Fgprf => "fgprf",
            PmfProcess::Skellam => "skellam",
            PmfProcess::Fgspp => "fgspp",
        }
    }
}

#[derive(clap::Args)]
pub struct PmfArgs {
    /// Process family to evaluate.
    #[arg(value_enum)]
    pub process: PmfProcess,
    /// Comma-separated batch rates λ1,…,λk (the plus side for signed processes).
    #[arg(long, value_delimiter = ',', required = true)]
    pub rates: Vec<f64>,
    /// Minus-side rates for signed processes.
    #[arg(long, value_delimiter = ',')]
    pub minus_rates: Vec<f64>,
    /// Window area |A| (equivalent to --s AREA --t 1).
    #[arg(long)]
    pub area: Option<f64>,
    /// Horizontal window side.
    #[arg(long)]
    pub s: Option<f64>,
    /// Vertical window side.
    #[arg(long)]
    pub t: Option<f64>,
    /// Fractional order of the horizontal clock, in (0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Fractional order of the vertical clock, in (0, 1].
    #[arg(long)]
    pub beta: Option<f64>,
    /// Count value or inclusive range, e.g. `3`, `0..5`, `-4..4`.
    #[arg(long, allow_hyphen_values = true)]
    pub n: String,
    /// Certified tail-mass tolerance of the underlying table.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Row {
    n: i64,
    probability: f64,
    tail_bound: f64,
}

pub fn run(args: &PmfArgs) -> Result<ExitCode, CliError> {
    let (lo, hi) = parse_count_range(&args.n)?;
    check_tolerance(args.tol)?;
    let table = build_table(args)?;
    let rows = rows_between(&table, lo, hi);
    let content = match args.format {
        Format::Csv => render_csv(&rows),
        Format::Json => render_json(args, &rows)?,
    };
    write_output(args.out.as_deref(), &content)?;
    Ok(ExitCode::SUCCESS)
}

fn build_table(args: &PmfArgs) -> Result<PmfTable, CliError> {
    match args.process {
        PmfProcess::Gprf => {
            let rates = rate_vector(&args.rates)?;
            let area = area_of(args)?;
            gprf_pmf_table(&rates, area, args.tol).map_err(model_err)
        }
        PmfProcess::Fgprf => {
            let rates = rate_vector(&args.rates)?;
            let frac = frac_orders(args.alpha, args.beta)?;
            let (s, t) = common::sides_from(args.s, args.t)?;
            fgprf_pmf_table(&rates, frac, s, t, args.tol).map_err(model_err)
        }
        PmfProcess::Skellam => {
            let rates = skellam_rates(&args.rates, &args.minus_rates)?;
            let area = area_of(args)?;
            skellam_pmf_table(&rates, area, args.tol).map_err(model_err)
        }
        PmfProcess::Fgspp => {
            let rates = skellam_rates(&args.rates, &args.minus_rates)?;
            let frac = frac_orders(args.alpha, args.beta)?;
            let (s, t) = common::sides_from(args.s, args.t)?;
            fgspp_pmf_table(&rates, frac, s, t, args.tol).map_err(model_err)
        }
    }
}

fn area_of(args: &PmfArgs) -> Result<f64, CliError> {
    Ok(common::window_from(args.area, args.s, args.t)?.measure())
}

/// Rows for n ∈ [lo, hi]. `tail_bound` is a certified upper bound on the
/// probability mass not covered by table entries ≤ n, so the probabilities
/// of rows from the bottom of the support up to n plus that row's bound
/// bracket 1 within the table tolerance.
fn rows_between(table: &PmfTable, lo: i64, hi: i64) -> Vec<Row> {
    let support = table.support();
    let (min_n, max_n) = (*support.start(), *support.end());
    let probs = table.probs();
    let mut suffix = vec![0.0f64; probs.len() + 1];
    for i in (0..probs.len()).rev() {
        suffix[i] = suffix[i + 1] + probs[i];
    }
    let outside = table.tail_mass_bound();
    (lo..=hi)
        .map(|n| {
            let above = if n < min_n {
                suffix[0]
            } else if n >= max_n {
                0.0
            } else {
                suffix[(n - min_n + 1) as usize]
            };
            Row {
                n,
                probability: table.prob(n),
                // Any probability mass is ≤ 1, so cap the certified bound.
                tail_bound: (above + outside).min(1.0),
            }
        })
        .collect()
}

fn render_csv(rows: &[Row]) -> String {
    let mut out = String::from("n,probability,tail_bound\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            row.n, row.probability, row.tail_bound
        ));
    }
    out
}

fn render_json(args: &PmfArgs, rows: &[Row]) -> Result<String, CliError> {
    let rows_json: Vec<serde_json::Value> = rows
        .iter()
        .map(|row| {
            serde_json::json!({
                "n": row.n,
                "probability": row.probability,
                "tail_bound": row.tail_bound,
            })
        })
        .collect();
    let value = serde_json::json!({
        "schema_version": PMF_SCHEMA_VERSION,
        "process": args.process.name(),
        "parameters": parameters_json(args),
        "rows": rows_json,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&value).unwrap()))
}

fn parameters_json(args: &PmfArgs) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("rates".into(), args.rates.clone().into());
    if !args.minus_rates.is_empty() {
        map.insert("minus_rates".into(), args.minus_rates.clone().into());
    }
    if let Some(area) = args.area {
        map.insert("area".into(), area.into());
    }
    if let Some(s) = args.s {
        map.insert("s".into(), s.into());
    }
    if let Some(t) = args.t {
        map.insert("t".into(), t.into());
    }
    if let Some(alpha) = args.alpha {
        map.insert("alpha".into(), alpha.into());
    }
    if let Some(beta) = args.beta {
        map.insert("beta".into(), beta.into());
    }
    map.insert("n".into(), args.n.clone().into());
    map.insert("tol".into(), args.tol.into());
    serde_json::Value::Object(map)
}

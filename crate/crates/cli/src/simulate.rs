//! `simulate`: reproducible sampling with per-sample RNG substreams, so the
//! output bytes depend only on (seed, parameters), never on thread count.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rayon::prelude::*;

use poisson_fields::model::{FracOrders, GsppRates, ModelError, RateVector, SkellamRates, Window};
use poisson_fields::sim::{
    sample_fgprf, sample_fgspp, sample_gprf, sample_gprf_integral, sample_gspp, GprfMethod,
    RngStream,
};

use crate::common::{
    self, default_manifest_path, frac_orders, model_err, rate_vector, resolve_seed,
    sha256_hex, skellam_rates, write_file, write_output, CliError, Format,
};

pub const SAMPLES_SCHEMA_VERSION: &str = "samples-v1";
pub const MANIFEST_SCHEMA_VERSION: &str = "manifest-v1";

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SimProcess {
    /// One-sided field count over a window.
    Gprf,
    /// One-sided field count on independent fractional clocks.
    Fgprf,
    /// Signed field count over a window.
    Skellam,
    /// Signed field count on a shared fractional clock.
    Fgspp,
    /// Pathwise rectangle integral of the field (real-valued samples).
    Integral,
}

impl SimProcess {
    pub fn name(self) -> &'static str {
        match self {
            SimProcess::Gprf => "gprf",
            SimProcess::Fgprf => "fgprf",
            SimProcess::Skellam => "skellam",
            SimProcess::Fgspp => "fgspp",
            SimProcess::Integral => "integral",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Draw each batch-size count from its own Poisson law.
    Superposition,
    /// Draw one Poisson total, then categorical batch sizes.
    Compound,
}

#[derive(clap::Args)]
pub struct SimulateArgs {
    #[arg(value_enum)]
    pub process: SimProcess,
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
    /// Number of samples to draw.
    #[arg(long)]
    pub samples: u64,
    /// RNG seed; overrides POISSON_FIELDS_SEED, which overrides the default.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads. The output is byte-identical for any value.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Sampling route for one-sided counts.
    #[arg(long, value_enum, default_value_t = Method::Superposition)]
    pub method: Method,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write samples to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest path (default: <out>.manifest.json when --out is given).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

enum Task {
    Gprf(RateVector, Window, GprfMethod),
    Fgprf(RateVector, FracOrders, f64, f64),
    Skellam(GsppRates, Window),
    Fgspp(SkellamRates, FracOrders, f64, f64),
    Integral(RateVector, f64, f64),
}

#[derive(Clone, Copy)]
enum Value {
    Count(u64),
    Signed(i64),
    Real(f64),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Count(v) => write!(f, "{v}"),
            Value::Signed(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
        }
    }
}

impl Task {
    fn draw(&self, rng: &mut RngStream) -> Result<Value, ModelError> {
        match self {
            Task::Gprf(rates, window, method) => {
                Ok(Value::Count(sample_gprf(rates, window, rng, *method)))
            }
            Task::Fgprf(rates, frac, s, t) => {
                sample_fgprf(rates, *frac, *s, *t, rng).map(Value::Count)
            }
            Task::Skellam(rates, window) => sample_gspp(rates, window, rng).map(Value::Signed),
            Task::Fgspp(rates, frac, s, t) => {
                sample_fgspp(rates, *frac, *s, *t, rng).map(Value::Signed)
            }
            Task::Integral(rates, s, t) => {
                sample_gprf_integral(rates, *s, *t, rng).map(Value::Real)
            }
        }
    }
}

fn build_task(args: &SimulateArgs) -> Result<Task, CliError> {
    match args.process {
        SimProcess::Gprf => Ok(Task::Gprf(
            rate_vector(&args.rates)?,
            common::window_from(args.area, args.s, args.t)?,
            method_of(args.method),
        )),
        SimProcess::Fgprf => {
            let (s, t) = common::sides_from(args.s, args.t)?;
            Ok(Task::Fgprf(
                rate_vector(&args.rates)?,
                frac_orders(args.alpha, args.beta)?,
                s,
                t,
            ))
        }
        SimProcess::Skellam => Ok(Task::Skellam(
            skellam_rates(&args.rates, &args.minus_rates)?.to_gspp(),
            common::window_from(args.area, args.s, args.t)?,
        )),
        SimProcess::Fgspp => {
            let (s, t) = common::sides_from(args.s, args.t)?;
            Ok(Task::Fgspp(
                skellam_rates(&args.rates, &args.minus_rates)?,
                frac_orders(args.alpha, args.beta)?,
                s,
                t,
            ))
        }
        SimProcess::Integral => {
            let (s, t) = common::sides_from(args.s, args.t)?;
            Ok(Task::Integral(rate_vector(&args.rates)?, s, t))
        }
    }
}

fn method_of(method: Method) -> GprfMethod {
    match method {
        Method::Superposition => GprfMethod::Superposition,
        Method::Compound => GprfMethod::Compound,
    }
}

pub fn run(args: &SimulateArgs) -> Result<ExitCode, CliError> {
    if args.samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    if args.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let seed = resolve_seed(args.seed)?;
    let task = build_task(args)?;
    let started = Instant::now();
    let values = draw_all(&task, seed, args.samples, args.threads)?;
    let content = match args.format {
        Format::Csv => render_csv(&values),
        Format::Json => render_json(args, seed, &values),
    };
    let bytes = write_output(args.out.as_deref(), &content)?;

    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| args.out.as_ref().map(|out| default_manifest_path(out)));
    if let Some(path) = manifest_path {
        let manifest = render_manifest(
            args,
            seed,
            started.elapsed().as_millis() as u64,
            bytes,
            &content,
        );
        write_file(&path, &manifest)?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Sample i always uses substream i of the seed, so any partition of the
/// index range over threads yields the same values in the same order.
fn draw_all(task: &Task, seed: u64, samples: u64, threads: usize) -> Result<Vec<Value>, CliError> {
    let base = RngStream::new(seed, 0);
    let one = |i: u64| -> Result<Value, ModelError> {
        let mut rng = base.substream(i);
        task.draw(&mut rng)
    };
    let result: Result<Vec<Value>, ModelError> = if threads == 1 {
        (0..samples).map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|err| CliError::Usage(format!("cannot start thread pool: {err}")))?;
        pool.install(|| (0..samples).into_par_iter().map(one).collect())
    };
    result.map_err(model_err)
}

fn render_csv(values: &[Value]) -> String {
    let mut out = String::from("sample\n");
    for value in values {
        out.push_str(&format!("{value}\n"));
    }
    out
}

fn render_json(args: &SimulateArgs, seed: u64, values: &[Value]) -> String {
    let samples: Vec<serde_json::Value> = values
        .iter()
        .map(|v| match *v {
            Value::Count(c) => c.into(),
            Value::Signed(s) => s.into(),
            Value::Real(r) => r.into(),
        })
        .collect();
    let value = serde_json::json!({
        "schema_version": SAMPLES_SCHEMA_VERSION,
        "process": args.process.name(),
        "parameters": parameters_json(args),
        "seed": seed,
        "samples": samples,
    });
    format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
}

fn render_manifest(
    args: &SimulateArgs,
    seed: u64,
    wall_clock_ms: u64,
    bytes: u64,
    content: &str,
) -> String {
    let output_path = args
        .out
        .as_ref()
        .map(|p| p.display().to_string())
        .unwrap_or_else(|| "-".into());
    let value = serde_json::json!({
        "schema_version": MANIFEST_SCHEMA_VERSION,
        "command": "simulate",
        "parameters": parameters_json(args),
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_clock_ms": wall_clock_ms,
        "output": {
            "path": output_path,
            "sha256": sha256_hex(content),
            "bytes": bytes,
        },
    });
    format!("{}\n", serde_json::to_string_pretty(&value).unwrap())
}

fn parameters_json(args: &SimulateArgs) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("process".into(), args.process.name().into());
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
    map.insert("samples".into(), args.samples.into());
    if matches!(args.process, SimProcess::Gprf) {
        let method = match args.method {
            Method::Superposition => "superposition",
            Method::Compound => "compound",
        };
        map.insert("method".into(), method.into());
    }
    let format = match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    map.insert("format".into(), format.into());
    serde_json::Value::Object(map)
}

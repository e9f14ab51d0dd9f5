use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use pitman_core::berry_esseen::{default_grid, rate_experiment_posterior, rate_experiment_prior};
use pitman_core::inference::{
    fit_eppf, ingest, predict_unseen, FitBox, InputFormat, PredictMode, PredictOptions, SpeciesSample,
};
use pitman_core::partition_laws::{pmf_blocks, pmf_esf, pmf_rho, pmf_unseen};
use pitman_core::samplers::{sample_partition, MlSampler, PosteriorDiversitySampler, SeedSpec};
use pitman_core::{LogPmf, ModelParams, Partition, PosteriorContext, RateReport, UnseenRoute};

use crate::args::{
    FitArgs, InputKind, Law, ModeArg, OutputFormat, PmfArgs, PredictArgs, RateArgs, RateKind, Route, SampleArgs,
    SampleWhat,
};
use crate::error::{usage, CliError};

/// Largest n for which `pmf --law esf` lists every partition.
const ESF_ENUMERATION_LIMIT: usize = 30;

/// Half-width of the slope band around −α checked by `rate --check`.
const SLOPE_BAND: f64 = 0.15;
const MAX_SCALED_RATIO: f64 = 10.0;

/// Where and how results are written.
pub struct Sink {
    pub out: Box<dyn Write>,
    pub format: Option<OutputFormat>,
    pub seed: u64,
}

impl Sink {
    fn table_format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Csv)
    }

    fn object_format(&self) -> OutputFormat {
        self.format.unwrap_or(OutputFormat::Json)
    }

    /// '#'-prefixed `key=value` metadata lines followed by the rows (csv), or
    /// an object with `meta` and `rows` (json).
    fn table<T: Serialize>(&mut self, meta: &[(&str, String)], rows: &[T]) -> Result<(), CliError> {
        match self.table_format() {
            OutputFormat::Csv => {
                for (key, value) in meta {
                    writeln!(self.out, "# {key}={value}")?;
                }
                let mut writer = csv::Writer::from_writer(&mut self.out);
                for row in rows {
                    writer.serialize(row).map_err(csv_error)?;
                }
                writer.flush()?;
            }
            OutputFormat::Json => {
                let meta: serde_json::Map<String, serde_json::Value> =
                    meta.iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone()))).collect();
                let doc = serde_json::json!({ "meta": meta, "rows": rows });
                serde_json::to_writer_pretty(&mut self.out, &doc).map_err(pitman_core::Error::from)?;
                writeln!(self.out)?;
            }
        }
        Ok(())
    }

    /// A single record: pretty JSON, or a one-row csv table of `flat`.
    fn object<T: Serialize, F: Serialize>(&mut self, value: &T, flat: &F) -> Result<(), CliError> {
        match self.object_format() {
            OutputFormat::Json => {
                serde_json::to_writer_pretty(&mut self.out, value).map_err(pitman_core::Error::from)?;
                writeln!(self.out)?;
                Ok(())
            }
            OutputFormat::Csv => self.table(&[], std::slice::from_ref(flat)),
        }
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Core(pitman_core::Error::Io(std::io::Error::other(e.to_string())))
}

fn params(alpha: f64, theta: f64) -> Result<ModelParams, CliError> {
    ModelParams::new(alpha, theta).map_err(|e| CliError::Usage(e.to_string()))
}

fn context(alpha: f64, theta: f64, n: usize, j: usize) -> Result<PosteriorContext, CliError> {
    PosteriorContext::new(params(alpha, theta)?, n, j).map_err(|e| CliError::Usage(e.to_string()))
}

fn required<T>(value: Option<T>, flag: &str, what: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage(format!("{what} requires --{flag}")))
}

#[derive(Serialize)]
struct PmfRow {
    k: usize,
    probability: f64,
}

#[derive(Serialize)]
struct EsfRow {
    block_sizes: String,
    num_blocks: usize,
    log_probability: f64,
    probability: f64,
}

fn pmf_rows(pmf: &LogPmf) -> Vec<PmfRow> {
    pmf.iter().map(|(k, probability)| PmfRow { k, probability }).collect()
}

fn join_sizes(sizes: &[usize]) -> String {
    sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn pmf(args: &PmfArgs, sink: &mut Sink) -> Result<(), CliError> {
    let law_name = format!("{:?}", args.law).to_lowercase();
    match args.law {
        Law::Blocks => {
            let p = params(args.alpha, required(args.theta, "theta", "--law blocks")?)?;
            let n = required(args.n, "n", "--law blocks")?;
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            let meta = [("law", law_name), ("alpha", p.alpha().to_string()), ("theta", p.theta().to_string()), ("n", n.to_string())];
            sink.table(&meta, &pmf_rows(&pmf_blocks(p, n)?))
        }
        Law::Rho => {
            let n = required(args.n, "n", "--law rho")?;
            let z = required(args.z, "z", "--law rho")?;
            if !(args.alpha > 0.0 && args.alpha < 1.0) || n == 0 || !(z > 0.0 && z.is_finite()) {
                return Err(usage("--law rho needs 0 < alpha < 1, n >= 1 and z > 0"));
            }
            let meta = [("law", law_name), ("alpha", args.alpha.to_string()), ("n", n.to_string()), ("z", z.to_string())];
            sink.table(&meta, &pmf_rows(&pmf_rho(args.alpha, n, z)?))
        }
        Law::Unseen => {
            let theta = required(args.theta, "theta", "--law unseen")?;
            let n = required(args.n, "n", "--law unseen")?;
            let j = required(args.j, "j", "--law unseen")?;
            let m = required(args.m, "m", "--law unseen")?;
            if m == 0 {
                return Err(usage("--m must be at least 1"));
            }
            let ctx = context(args.alpha, theta, n, j)?;
            let route = match args.route {
                Route::Noncentral => UnseenRoute::Noncentral,
                Route::Mixture => UnseenRoute::Mixture,
            };
            let meta = [
                ("law", law_name),
                ("alpha", args.alpha.to_string()),
                ("theta", theta.to_string()),
                ("n", n.to_string()),
                ("j", j.to_string()),
                ("m", m.to_string()),
                ("route", format!("{:?}", args.route).to_lowercase()),
            ];
            sink.table(&meta, &pmf_rows(&pmf_unseen(&ctx, m, route)?))
        }
        Law::Esf => {
            let p = params(args.alpha, required(args.theta, "theta", "--law esf")?)?;
            let partitions = if let Some(sizes) = &args.blocks {
                let part = Partition::from_block_sizes(sizes).map_err(|e| CliError::Usage(e.to_string()))?;
                if args.n.is_some_and(|n| n != part.n()) {
                    return Err(usage(format!("--blocks sum to {}, not --n", part.n())));
                }
                vec![part]
            } else if let Some(path) = &args.input {
                vec![read_sample(path, args.input_format, args.header)?.partition().clone()]
            } else {
                let n = required(args.n, "n", "--law esf without --blocks or --input")?;
                if n == 0 || n > ESF_ENUMERATION_LIMIT {
                    return Err(usage(format!("listing every partition needs 1 <= n <= {ESF_ENUMERATION_LIMIT}")));
                }
                integer_partitions(n)
            };
            let rows = partitions
                .iter()
                .map(|part| {
                    let lp = pmf_esf(p, part)?;
                    Ok(EsfRow {
                        block_sizes: join_sizes(&part.block_sizes()),
                        num_blocks: part.num_blocks(),
                        log_probability: lp,
                        probability: lp.exp(),
                    })
                })
                .collect::<Result<Vec<_>, pitman_core::Error>>()?;
            let meta = [("law", law_name), ("alpha", p.alpha().to_string()), ("theta", p.theta().to_string())];
            sink.table(&meta, &rows)
        }
    }
}

/// Every partition of n, largest blocks first.
fn integer_partitions(n: usize) -> Vec<Partition> {
    fn rec(remaining: usize, max_part: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in (1..=max_part.min(remaining)).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out.iter().map(|sizes| Partition::from_block_sizes(sizes).expect("valid partition")).collect()
}

#[derive(Serialize)]
struct PartitionDraw {
    replicate: u64,
    num_blocks: usize,
    block_sizes: String,
}

#[derive(Serialize)]
struct ValueDraw {
    replicate: u64,
    value: f64,
}

pub fn sample(args: &SampleArgs, sink: &mut Sink) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(usage("--reps must be at least 1"));
    }
    let p = params(args.alpha, args.theta)?;
    let seed = sink.seed;
    let reps = 0..args.reps as u64;
    let what = format!("{:?}", args.what).to_lowercase();
    let mut meta = vec![
        ("what", what),
        ("alpha", p.alpha().to_string()),
        ("theta", p.theta().to_string()),
        ("seed", seed.to_string()),
        ("reps", args.reps.to_string()),
    ];
    match args.what {
        SampleWhat::Partition => {
            let n = required(args.n, "n", "--what partition")?;
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
            meta.push(("n", n.to_string()));
            let rows = reps
                .into_par_iter()
                .map(|i| {
                    let part = sample_partition(p, n, &mut SeedSpec::new(seed, i).rng())?;
                    Ok(PartitionDraw { replicate: i, num_blocks: part.num_blocks(), block_sizes: join_sizes(&part.block_sizes()) })
                })
                .collect::<Result<Vec<_>, pitman_core::Error>>()?;
            sink.table(&meta, &rows)
        }
        SampleWhat::Ml => {
            let sampler = MlSampler::new(p)?;
            let rows = reps
                .into_par_iter()
                .map(|i| Ok(ValueDraw { replicate: i, value: sampler.sample(&mut SeedSpec::new(seed, i).rng())? }))
                .collect::<Result<Vec<_>, pitman_core::Error>>()?;
            sink.table(&meta, &rows)
        }
        SampleWhat::PosteriorDiversity => {
            let n = required(args.n, "n", "--what posterior-diversity")?;
            let j = required(args.j, "j", "--what posterior-diversity")?;
            let ctx = context(args.alpha, args.theta, n, j)?;
            meta.push(("n", n.to_string()));
            meta.push(("j", j.to_string()));
            let sampler = PosteriorDiversitySampler::new(&ctx).map_err(|e| CliError::Usage(e.to_string()))?;
            let rows = reps
                .into_par_iter()
                .map(|i| Ok(ValueDraw { replicate: i, value: sampler.sample(&mut SeedSpec::new(seed, i).rng())? }))
                .collect::<Result<Vec<_>, pitman_core::Error>>()?;
            sink.table(&meta, &rows)
        }
    }
}

fn read_sample(path: &Path, kind: Option<InputKind>, header: bool) -> Result<SpeciesSample, CliError> {
    let kind = kind.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => InputKind::Csv,
        Some("jsonl") | Some("ndjson") => InputKind::Jsonl,
        _ => InputKind::Plain,
    });
    let format = match kind {
        InputKind::Csv => InputFormat::Csv { header },
        InputKind::Jsonl => InputFormat::Jsonl,
        InputKind::Plain => InputFormat::Plain,
    };
    Ok(ingest(path, format)?)
}

#[derive(Serialize)]
struct FitRow {
    n: usize,
    j: usize,
    alpha: f64,
    theta: f64,
    log_likelihood: f64,
    converged: bool,
    boundary_flag: bool,
}

pub fn fit(args: &FitArgs, sink: &mut Sink) -> Result<(), CliError> {
    let bounds = FitBox { epsilon: args.epsilon, theta_max: args.theta_max, ..FitBox::default() };
    if !(bounds.epsilon > 0.0 && bounds.epsilon < 0.25) || !(bounds.theta_max > 1.0 && bounds.theta_max.is_finite()) {
        return Err(usage("--epsilon must lie in (0, 0.25) and --theta-max must exceed 1"));
    }
    let sample = read_sample(&args.input, args.input_format, args.header)?;
    let result = fit_eppf(&sample, bounds)?;
    let flat = FitRow {
        n: sample.n(),
        j: sample.num_species(),
        alpha: result.params.alpha(),
        theta: result.params.theta(),
        log_likelihood: result.log_likelihood,
        converged: result.converged,
        boundary_flag: result.boundary_flag,
    };
    sink.object(&result, &flat)
}

pub fn rate(args: &RateArgs, sink: &mut Sink) -> Result<(), CliError> {
    let p = params(args.alpha, args.theta)?;
    let grid = match &args.grid {
        Some(g) => g.clone(),
        None => match args.mode {
            RateKind::Prior => default_grid(5),
            RateKind::Posterior => default_grid(4),
        },
    };
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(usage(format!("--grid must be positive and strictly increasing, got {grid:?}")));
    }
    if grid.len() < 2 {
        return Err(usage("--grid needs at least two sizes for a slope fit"));
    }
    let report = match args.mode {
        RateKind::Prior => rate_experiment_prior(p, &grid)?,
        RateKind::Posterior => {
            let n = required(args.n, "n", "--mode posterior")?;
            let j = required(args.j, "j", "--mode posterior")?;
            let ctx = context(args.alpha, args.theta, n, j)?;
            if !ctx.theorem_scope() && args.check {
                return Err(usage(
                    "--check needs theta > 0, n >= 5 and n/alpha - j >= 1; without them the run is exploratory",
                ));
            }
            rate_experiment_posterior(&ctx, &grid)?
        }
    };
    if !report.theorem_scope {
        eprintln!("warning: parameters are outside the rate theorem's hypotheses; results are exploratory");
    }
    write_report(&report, sink)?;
    if args.check {
        let (lo, hi) = (-args.alpha - SLOPE_BAND, -args.alpha + SLOPE_BAND);
        if !report.within(lo, hi, MAX_SCALED_RATIO) {
            return Err(CliError::CheckFailed(format!(
                "slope {:.4} (band [{lo:.2}, {hi:.2}]) or scaled ratio {:.3} (limit {MAX_SCALED_RATIO}) out of bounds",
                report.fitted_slope,
                report.scaled_ratio()
            )));
        }
    }
    Ok(())
}

fn write_report(report: &RateReport, sink: &mut Sink) -> Result<(), CliError> {
    match sink.table_format() {
        OutputFormat::Csv => report.write_csv(&mut sink.out)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut sink.out, report).map_err(pitman_core::Error::from)?;
            writeln!(sink.out)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictRow {
    m: usize,
    mode: String,
    mean: f64,
    median: f64,
    level: f64,
    lower: f64,
    upper: f64,
    mc_draws: Option<usize>,
}

pub fn predict(args: &PredictArgs, sink: &mut Sink) -> Result<(), CliError> {
    let ctx = context(args.alpha, args.theta, args.n, args.j)?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(usage(format!("--level must lie in (0, 1), got {}", args.level)));
    }
    if args.m == 0 {
        return Err(usage("--m must be at least 1"));
    }
    let mode = match args.mode {
        ModeArg::Auto => PredictMode::Auto,
        ModeArg::Exact => PredictMode::Exact,
        ModeArg::Asymptotic => PredictMode::Asymptotic,
    };
    if mode == PredictMode::Exact && args.m > args.exact_limit {
        return Err(usage(format!(
            "m = {} exceeds the exact-mode limit {}; use --mode asymptotic",
            args.m, args.exact_limit
        )));
    }
    if args.reps < 2 {
        return Err(usage("--reps must be at least 2"));
    }
    let opts = PredictOptions { mode, level: args.level, mc_draws: args.reps, seed: sink.seed, exact_limit: args.exact_limit };
    let est = predict_unseen(&ctx, args.m, &opts)?;
    let flat = PredictRow {
        m: est.m,
        mode: serde_json::to_value(est.mode).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        mean: est.mean,
        median: est.median,
        level: est.level,
        lower: est.credible_interval.0,
        upper: est.credible_interval.1,
        mc_draws: est.mc_draws,
    };
    sink.object(&est, &flat)
}

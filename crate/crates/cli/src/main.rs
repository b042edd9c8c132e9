use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use plugdp::adassp::{boosted_adassp_fit, DEFAULT_ROUNDS};
use plugdp::dataset::{load_csv, write_csv, Dataset};
use plugdp::dp::{derive_stream, Calibrated, PrivacyBudget};
use plugdp::harness::{
    aggregate_report, render_table, run_pipeline, synth_gaussian, write_summary_json, write_trials_csv, Method, SynthSpec,
    TrialConfig,
};
use plugdp::selection::{dp_kendall, sub_lasso};
use plugdp::solvers::{ols_fit, LinearModel};
use plugdp::tukey::{tukey_fit, TukeyOutcome};

#[derive(Parser)]
#[command(name = "plugdp", version, about = "Private linear regression with private feature selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated train/test trials and write trials.csv and summary.json.
    Bench(BenchArgs),
    /// Run a private feature selector once over a whole CSV.
    Select(SelectArgs),
    /// Fit one regression model over a whole CSV.
    Fit(FitArgs),
    /// Generate a synthetic CSV from a JSON spec.
    Synth(SynthArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Header-first CSV whose last column is the label.
    #[arg(long)]
    data: Option<PathBuf>,
    /// JSON synthetic-data spec.
    #[arg(long)]
    synth: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    source: Source,
    /// Comma-separated methods, or `all`.
    #[arg(long, default_value = "all")]
    methods: String,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 3f64.ln())]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0.1)]
    test_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Boosting rounds for the AdaSSP-based methods.
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    rounds: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Selector {
    Kendall,
    Sublasso,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "kendall")]
    method: Selector,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 3f64.ln())]
    epsilon: f64,
    /// SubLasso subset count; defaults to floor(n / k).
    #[arg(long)]
    partitions: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Regressor {
    Ols,
    Adassp,
    Tukey,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum, default_value = "adassp")]
    method: Regressor,
    /// Comma-separated feature names to keep; all features by default.
    #[arg(long)]
    features: Option<String>,
    #[arg(long, default_value_t = 3f64.ln())]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-5)]
    delta: f64,
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    rounds: usize,
    /// Tukey submodel count; defaults to floor(n / (features + 1)).
    #[arg(long)]
    partitions: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn read_spec(path: &Path) -> Result<SynthSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    SynthSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn generate(spec: &SynthSpec) -> Result<Dataset> {
    let mut rng = derive_stream(spec.seed, &format!("synth/{}", spec.name));
    Ok(synth_gaussian(spec, &mut rng)?.dataset)
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "data".to_string(), |s| s.to_string_lossy().into_owned())
}

/// Jittered dataset with intercept, plus its name.
fn load_source(source: &Source, seed: u64) -> Result<(String, Dataset)> {
    let (name, raw) = match (&source.data, &source.synth) {
        (Some(path), _) => {
            let name = dataset_name(path);
            let mut rng = derive_stream(seed, &format!("jitter/{name}"));
            let ds = load_csv(path, &mut rng).with_context(|| format!("loading {}", path.display()))?;
            return Ok((name, ds));
        }
        (None, Some(path)) => {
            let spec = read_spec(path)?;
            (spec.name.clone(), generate(&spec)?)
        }
        (None, None) => bail!("one of --data or --synth is required"),
    };
    let mut rng = derive_stream(seed, &format!("jitter/{name}"));
    Ok((name, raw.jittered(&mut rng).with_intercept()))
}

fn load_data(path: &Path, seed: u64) -> Result<Dataset> {
    let mut rng = derive_stream(seed, &format!("jitter/{}", dataset_name(path)));
    load_csv(path, &mut rng).with_context(|| format!("loading {}", path.display()))
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(Method::ALL.to_vec());
    }
    let mut methods = Vec::new();
    for part in list.split(',').filter(|s| !s.trim().is_empty()) {
        let m: Method = part.parse()?;
        if !methods.contains(&m) {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        bail!("no methods given");
    }
    Ok(methods)
}

fn bench(args: BenchArgs) -> Result<()> {
    let methods = parse_methods(&args.methods)?;
    let (name, ds) = load_source(&args.source, args.seed)?;
    let budget = PrivacyBudget::new(args.epsilon, args.delta)?;
    let mut config = TrialConfig::new(args.k, budget, args.trials, args.seed);
    config.test_frac = args.test_frac;
    config.boosting_rounds = args.rounds;

    let mut reports = Vec::with_capacity(methods.len());
    for method in methods {
        let report = run_pipeline(&name, &ds, method, &config).with_context(|| format!("running {method} on {name}"))?;
        eprintln!("{name}/{method}: median r2 {}", report.median_r2);
        reports.push(report);
    }
    let summary = aggregate_report(&reports)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_trials_csv(&reports, args.out.join("trials.csv"))?;
    write_summary_json(&summary, args.out.join("summary.json"))?;
    print!("{}", render_table(&summary));
    Ok(())
}

fn select(args: SelectArgs) -> Result<()> {
    let ds = load_data(&args.data, args.seed)?;
    let mut noise = Calibrated::new(derive_stream(args.seed, "select"));
    let result = match args.method {
        Selector::Kendall => dp_kendall(&ds, args.k, args.epsilon, &mut noise)?,
        Selector::Sublasso => {
            let m = args.partitions.unwrap_or(ds.n() / args.k.max(1));
            sub_lasso(&ds, args.k, m, args.epsilon, &mut noise)?
        }
    };
    let names: Vec<&str> = result.selected.iter().map(|&j| ds.names()[j].as_str()).collect();
    println!("{}", serde_json::to_string_pretty(&json!({ "selected": names, "indices": result.selected }))?);
    Ok(())
}

fn model_json(ds: &Dataset, model: &LinearModel) -> serde_json::Value {
    let names: Vec<&str> = ds.candidate_features().iter().map(|&j| ds.names()[j].as_str()).collect();
    json!({ "features": names, "coefficients": model.coefficients, "intercept": model.intercept })
}

fn fit(args: FitArgs) -> Result<()> {
    let mut ds = load_data(&args.data, args.seed)?;
    if let Some(list) = &args.features {
        let mut cols = Vec::new();
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let j = ds
                .candidate_features()
                .into_iter()
                .find(|&j| ds.names()[j] == name)
                .with_context(|| format!("no feature named `{name}`"))?;
            cols.push(j);
        }
        ds = ds.select_features(&cols);
    }
    let mut noise = Calibrated::new(derive_stream(args.seed, "fit"));
    let out = match args.method {
        Regressor::Ols => model_json(&ds, &ols_fit(&ds.design(), ds.labels())?),
        Regressor::Adassp => {
            let boosted = boosted_adassp_fit(&ds, args.epsilon, args.delta, args.rounds, &mut noise)?;
            model_json(&ds, &boosted.effective)
        }
        Regressor::Tukey => {
            let dim = ds.candidate_features().len() + 1;
            let m = args.partitions.unwrap_or(ds.n() / dim);
            let fit = tukey_fit(&ds, args.epsilon, args.delta, m, &mut noise)?;
            match &fit.outcome {
                TukeyOutcome::Released(model) => model_json(&ds, model),
                TukeyOutcome::Abstain => json!({ "abstain": true, "ptr": fit.ptr }),
            }
        }
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = read_spec(&args.spec)?;
    let ds = generate(&spec)?;
    write_csv(&ds, &args.out, "y").with_context(|| format!("writing {}", args.out.display()))?;
    eprintln!("wrote {} rows x {} features to {}", ds.n(), ds.d(), args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Bench(a) => bench(a),
        Command::Select(a) => select(a),
        Command::Fit(a) => fit(a),
        Command::Synth(a) => synth(a),
    }
}

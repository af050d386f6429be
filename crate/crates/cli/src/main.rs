//! `rlstat`: generate datasets, fit robust models, evaluate, sweep, score
//! depth and run the exact oracles.
//!
//! Exit codes: 0 success, 2 validation or config error, 3 I/O error,
//! 4 enumeration guard violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use robust_lstat::baselines::{
    depth_filter, sd_pipeline, spherical_depth_scores, DepthMode, DEFAULT_RANDOMIZED_PAIRS,
};
use robust_lstat::data::{
    gen_clusters_with_outliers, gen_psa_strip, load_csv, subsample_protocol, Dataset, MixtureSpec,
};
use robust_lstat::eval::{
    center_recovery, reconstruction_error, subspace_angle, zeta_sweep, Algo, SweepSettings,
};
use robust_lstat::models::Model;
use robust_lstat::oracle::{
    brute_robust_1mean_guarded, decide_clique_via_1means, derived_threshold, BRUTE_FORCE_MAX_N,
};
use robust_lstat::solver::{fit, FitConfig, FitResult, InitStrategy, ModelKind};
use robust_lstat::weights::WeightFunction;
use robust_lstat::Error;

#[derive(Parser)]
#[command(name = "rlstat", version, about = "Robust L-statistic model fitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and write it as CSV.
    Generate(GenerateArgs),
    /// Fit a model to a CSV dataset.
    Fit(FitArgs),
    /// Evaluate a fitted model against a dataset.
    Eval(EvalArgs),
    /// Run a zeta sweep from a JSON config, emitting JSONL records.
    Sweep(SweepArgs),
    /// Compute spherical depth scores, optionally filtering.
    Depth(DepthArgs),
    /// Exact brute-force robust 1-means or the clique decision.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON config: {"generator": "clusters" | "psa-strip", "seed": u64,
    /// "spec": optional MixtureSpec override for "clusters"}.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator name when no config file is given.
    #[arg(long)]
    generator: Option<String>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerateConfig {
    generator: Option<String>,
    seed: Option<u64>,
    spec: Option<MixtureSpec>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    /// CSV has a header row.
    #[arg(long)]
    has_header: bool,
    /// CSV carries a trailing label column to ignore for fitting.
    #[arg(long)]
    label_column: bool,
    /// kmeans | psa | rkm | rpsa | sd-kmeans | sd-psa
    #[arg(long)]
    algo: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// Cutoff mass for the robust algorithms and the depth filter.
    #[arg(long, default_value_t = 0.75)]
    zeta: f64,
    /// Inline weight JSON overriding the algo default, e.g.
    /// {"kind":"piecewise","knots":[[0.0,2.0],[0.5,0.0]]}.
    #[arg(long)]
    weight: Option<String>,
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    #[arg(long, default_value_t = 50)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Model JSON output path.
    #[arg(long)]
    out: PathBuf,
    /// Optional per-restart objective trace, one JSON line per restart.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    has_header: bool,
    #[arg(long)]
    label_column: bool,
    #[arg(long)]
    model: PathBuf,
    /// Reference model JSON; adds center_recovery or subspace_angle.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// JSONL output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfig {
    protocol: ProtocolConfig,
    zetas: Vec<f64>,
    algos: Vec<String>,
    seeds: Vec<u64>,
    k: usize,
    #[serde(default)]
    max_iters: Option<usize>,
    #[serde(default)]
    restarts: Option<usize>,
    #[serde(default)]
    depth_pairs: Option<usize>,
}

/// How a sweep cell obtains its train/test split for a given seed.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum ProtocolConfig {
    /// Synthetic clusters; test on a clean draw from an offset seed.
    Clusters,
    /// PSA strip data; test on a clean draw from an offset seed.
    PsaStrip,
    /// Subsample a class-labeled CSV per the inlier/outlier protocol.
    Csv {
        path: PathBuf,
        #[serde(default = "default_true")]
        has_header: bool,
        inlier_classes: Vec<String>,
        n_in_per_class: usize,
        n_out_per_class: usize,
    },
}

fn default_true() -> bool {
    true
}

#[derive(Args)]
struct DepthArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    has_header: bool,
    #[arg(long)]
    label_column: bool,
    /// Use M random pairs per point instead of exact enumeration.
    #[arg(long)]
    randomized: bool,
    /// Pairs per point for --randomized.
    #[arg(long, default_value_t = DEFAULT_RANDOMIZED_PAIRS)]
    pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report which point indices a zeta-filter would retain.
    #[arg(long)]
    zeta: Option<f64>,
}

#[derive(Args)]
struct OracleArgs {
    /// Dataset CSV for brute-force robust 1-means.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    has_header: bool,
    #[arg(long)]
    label_column: bool,
    /// Subset size for brute-force robust 1-means.
    #[arg(long)]
    h: Option<usize>,
    /// Raise the enumeration guard (default 24).
    #[arg(long)]
    max_n: Option<usize>,
    /// Graph JSON ({"adjacency": [[0,1,...],...]}) for the clique decision.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Decide n/2-clique existence on --graph.
    #[arg(long)]
    decide: bool,
}

#[derive(Deserialize)]
struct GraphFile {
    adjacency: Vec<Vec<u8>>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, Error> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::domain(format!("bad {what} JSON in {}: {e}", path.display())))
}

fn load_dataset(path: &Path, has_header: bool, label_column: bool) -> Result<Dataset, Error> {
    load_csv(path, has_header, label_column)
}

fn algo_config(algo: Algo, k: usize, zeta: f64, args: &FitArgs) -> Result<FitConfig, Error> {
    let is_subspace = matches!(algo, Algo::Psa | Algo::Rpsa | Algo::SdPsa);
    let kind = if is_subspace { ModelKind::Psa { k } } else { ModelKind::KMeans { k } };
    let weight = match (&args.weight, algo) {
        (Some(json), _) => {
            let w: WeightFunction = serde_json::from_str(json)
                .map_err(|e| Error::domain(format!("bad weight JSON: {e}")))?;
            w.validate()?;
            w
        }
        (None, Algo::Rkm | Algo::Rpsa) => WeightFunction::hard(zeta)?,
        (None, _) => WeightFunction::identity(),
    };
    let mut cfg = FitConfig::new(kind, weight);
    if algo == Algo::Kmeans || algo == Algo::SdKmeans {
        cfg.init = InitStrategy::KMeansPp;
    }
    cfg.restarts = args.restarts;
    cfg.max_iters = args.max_iters;
    cfg.seed = args.seed;
    cfg.tol = args.tol;
    Ok(cfg)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Error> {
    let mut config: GenerateConfig = match &args.config {
        Some(path) => read_json(path, "generate config")?,
        None => GenerateConfig::default(),
    };
    if let Some(g) = args.generator {
        config.generator = Some(g);
    }
    if let Some(s) = args.seed {
        config.seed = Some(s);
    }
    let seed = config.seed.unwrap_or(0);
    let data = match config.generator.as_deref() {
        Some("clusters") => {
            let spec = config.spec.unwrap_or_else(MixtureSpec::synthetic_clusters);
            gen_clusters_with_outliers(&spec, seed)?
        }
        Some("psa-strip") => gen_psa_strip(seed)?,
        Some(other) => {
            return Err(Error::domain(format!(
                "config field 'generator': unknown generator {other:?} \
                 (expected \"clusters\" or \"psa-strip\")"
            )))
        }
        None => {
            return Err(Error::domain(
                "config field 'generator' is required (\"clusters\" or \"psa-strip\")",
            ))
        }
    };
    let file = fs::File::create(&args.out)?;
    data.write_csv(std::io::BufWriter::new(file))?;
    eprintln!("wrote {} points to {}", data.len(), args.out.display());
    Ok(())
}

fn write_model_and_trace(
    result: &FitResult,
    out: &Path,
    trace: Option<&Path>,
) -> Result<(), Error> {
    let json = serde_json::to_string_pretty(&result.model).expect("model serializes");
    fs::write(out, json)?;
    if let Some(trace_path) = trace {
        let mut lines = String::new();
        for (restart, objectives) in result.objective_trace.iter().enumerate() {
            let record = serde_json::json!({ "restart": restart, "objectives": objectives });
            lines.push_str(&record.to_string());
            lines.push('\n');
        }
        fs::write(trace_path, lines)?;
    }
    Ok(())
}

fn cmd_fit(args: FitArgs) -> Result<(), Error> {
    let algo = Algo::parse(&args.algo)?;
    let data = load_dataset(&args.data, args.has_header, args.label_column)?;
    let cfg = algo_config(algo, args.k, args.zeta, &args)?;
    let result = match algo {
        Algo::SdKmeans | Algo::SdPsa => {
            sd_pipeline(&data, args.zeta, DepthMode::Exact, &cfg)?
        }
        _ => fit(&data, &cfg)?,
    };
    write_model_and_trace(&result, &args.out, args.trace.as_deref())?;
    println!(
        "{}",
        serde_json::json!({
            "final_objective": result.final_objective,
            "best_restart": result.best_restart,
            "iterations_used": result.iterations_used,
        })
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let data = load_dataset(&args.data, args.has_header, args.label_column)?;
    let model: Model = read_json(&args.model, "model")?;
    let mut metrics = serde_json::Map::new();
    metrics.insert(
        "test_error".into(),
        reconstruction_error(&data, &model)?.into(),
    );
    if let Some(truth_path) = &args.truth {
        let truth: Model = read_json(truth_path, "truth model")?;
        match (&model, &truth) {
            (Model::KMeans(learned), Model::KMeans(reference)) => {
                metrics.insert(
                    "center_recovery".into(),
                    center_recovery(reference, learned)?.into(),
                );
            }
            (Model::Psa(learned), Model::Psa(reference)) => {
                metrics.insert(
                    "subspace_angle".into(),
                    subspace_angle(learned, reference)?.into(),
                );
            }
            _ => {
                return Err(Error::domain(
                    "truth model kind does not match the fitted model",
                ))
            }
        }
    }
    println!("{}", serde_json::Value::Object(metrics));
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let config: SweepConfig = read_json(&args.config, "sweep config")?;
    let algos = config
        .algos
        .iter()
        .map(|s| Algo::parse(s))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut settings = SweepSettings::new(config.k);
    if let Some(v) = config.max_iters {
        settings.max_iters = v;
    }
    if let Some(v) = config.restarts {
        settings.restarts = v;
    }
    settings.depth_pairs = config.depth_pairs;
    let csv_data = match &config.protocol {
        ProtocolConfig::Csv { path, has_header, .. } => {
            Some(load_dataset(path, *has_header, true)?)
        }
        _ => None,
    };
    let protocol = |seed: u64| -> Result<(Dataset, Dataset), Error> {
        match &config.protocol {
            ProtocolConfig::Clusters => {
                let spec = MixtureSpec::synthetic_clusters();
                let train = gen_clusters_with_outliers(&spec, seed)?;
                let test = gen_clusters_with_outliers(&spec, seed + 100_000)?.inliers()?;
                Ok((train, test))
            }
            ProtocolConfig::PsaStrip => {
                let train = gen_psa_strip(seed)?;
                let test = gen_psa_strip(seed + 100_000)?.inliers()?;
                Ok((train, test))
            }
            ProtocolConfig::Csv { inlier_classes, n_in_per_class, n_out_per_class, .. } => {
                subsample_protocol(
                    csv_data.as_ref().expect("csv loaded above"),
                    inlier_classes,
                    *n_in_per_class,
                    *n_out_per_class,
                    seed,
                )
            }
        }
    };
    let records = zeta_sweep(protocol, &config.zetas, &algos, &config.seeds, &settings)?;
    let mut lines = String::new();
    for r in &records {
        lines.push_str(&serde_json::to_string(r).expect("record serializes"));
        lines.push('\n');
    }
    match &args.out {
        Some(path) => fs::write(path, lines)?,
        None => print!("{lines}"),
    }
    Ok(())
}

fn cmd_depth(args: DepthArgs) -> Result<(), Error> {
    let data = load_dataset(&args.data, args.has_header, args.label_column)?;
    let mode = if args.randomized {
        DepthMode::Randomized { m: args.pairs, seed: args.seed }
    } else {
        DepthMode::Exact
    };
    let scores = spherical_depth_scores(&data, mode)?;
    let mut out = serde_json::Map::new();
    out.insert("scores".into(), serde_json::json!(scores));
    if let Some(zeta) = args.zeta {
        let retained = depth_filter(&data, &scores, zeta)?;
        // recover retained indices by matching the filter's tie rule
        let n = data.len();
        let keep = retained.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut kept: Vec<usize> = idx[..keep].to_vec();
        kept.sort_unstable();
        out.insert("retained".into(), serde_json::json!(kept));
    }
    println!("{}", serde_json::Value::Object(out));
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Error> {
    match (&args.data, &args.graph) {
        (Some(data_path), None) => {
            let h = args
                .h
                .ok_or_else(|| Error::domain("--h is required with --data"))?;
            let data = load_dataset(data_path, args.has_header, args.label_column)?;
            let result = brute_robust_1mean_guarded(
                &data,
                h,
                args.max_n.unwrap_or(BRUTE_FORCE_MAX_N),
            )?;
            println!("{}", serde_json::to_string(&result).expect("result serializes"));
            Ok(())
        }
        (None, Some(graph_path)) => {
            if !args.decide {
                return Err(Error::domain("--graph requires --decide"));
            }
            let graph: GraphFile = read_json(graph_path, "graph")?;
            let n = graph.adjacency.len();
            let threshold = derived_threshold(n);
            let clique = decide_clique_via_1means(&graph.adjacency, threshold)?;
            println!(
                "{}",
                serde_json::json!({ "clique": clique, "h": n / 2, "threshold": threshold })
            );
            Ok(())
        }
        _ => Err(Error::domain("pass exactly one of --data or --graph")),
    }
}

fn run() -> Result<(), Error> {
    match Cli::parse().command {
        Command::Generate(args) => cmd_generate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Depth(args) => cmd_depth(args),
        Command::Oracle(args) => cmd_oracle(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Io(_) => 3,
                Error::Guard(_) => 4,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

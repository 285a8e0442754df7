//! Command-line driver. The binary is a thin wrapper around [`run`]; all
//! subcommand logic lives here so it is testable in-process.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical error.

use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::citest::TestKind;
use crate::data::MixedDataset;
use crate::error::{Error, Result};
use crate::experiments::{
    accuracy_experiment, accuracy_table_string, type1_experiment, type1_table_string,
    AccuracyConfig, FixtureKind, Type1Config,
};
use crate::graph::MarkedGraph;
use crate::infer::{auc, precision_recall, qp_graph, rank_edges};
use crate::io_util::{commit_staged, fmt_f64, stage};
use crate::model::build_model;
use crate::nrr::{average_nrr, nrr_matrix, NrrMatrix, NrrOptions};
use crate::sample::sample_dataset;
use crate::seed::derive_seed;

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: graph v1, model v1, dataset v1, nrr v1, tables v1)"
);

#[derive(Parser, Debug)]
#[command(
    name = "qpmix",
    version = VERSION,
    about = "Mixed graphical-model structure learning via limited-order conditional independence"
)]
struct Cli {
    /// Config file with `key = value` lines; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads (0 = all cores). Outputs do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a d-regular marked graph, build a random model on it, and
    /// draw a dataset; writes graph, model and data files atomically.
    Simulate(SimulateArgs),
    /// Estimate the non-rejection-rate matrix of a dataset.
    Nrr(NrrArgs),
    /// Threshold or rank a rate matrix into edges.
    Infer(InferArgs),
    /// Score a rate matrix against a known generating graph.
    Eval(EvalArgs),
    /// Type-I error calibration of the exact and asymptotic tests.
    Type1(Type1Args),
    /// Precision-recall accuracy grid over synthetic models.
    Accuracy(AccuracyArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Vertices.
    #[arg(long)]
    p: usize,
    /// Vertex degree of the sampled regular graph.
    #[arg(long)]
    d: usize,
    /// Number of discrete vertices (the lowest indices).
    #[arg(long, default_value_t = 2)]
    discrete: usize,
    /// Levels per discrete variable.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    /// Mean correlation of the covariance target.
    #[arg(long)]
    rho: f64,
    /// Spread of the mixed interactions.
    #[arg(long = "sigma-h")]
    sigma_h: f64,
    /// Observations to draw.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix: writes <prefix>graph.txt, <prefix>model.txt,
    /// <prefix>data.csv.
    #[arg(long, default_value = "qpmix-")]
    out_prefix: String,
}

#[derive(Args, Debug)]
struct NrrArgs {
    /// Dataset CSV.
    data: PathBuf,
    /// Conditioning-set size; repeat to average over several orders.
    #[arg(long = "q", required = true)]
    q: Vec<usize>,
    /// Monte Carlo subset draws per pair.
    #[arg(long, default_value_t = 100)]
    subsets: usize,
    /// Per-test significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Restrict conditioning sets to continuous variables.
    #[arg(long, action = ArgAction::SetTrue)]
    restrict_continuous: bool,
    /// Null driving the reject decision: exact or asymptotic.
    #[arg(long, default_value = "exact")]
    test: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path.
    #[arg(long, default_value = "qpmix-nrr.tsv")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InferArgs {
    /// Rate matrix TSV.
    nrr: PathBuf,
    /// Keep pairs with a rate strictly below this cutoff.
    #[arg(long)]
    threshold: Option<f64>,
    /// Write the full ascending ranking.
    #[arg(long, action = ArgAction::SetTrue)]
    rank: bool,
    /// Graph output path (with --threshold).
    #[arg(long, default_value = "qpmix-graph.txt")]
    graph_out: PathBuf,
    /// Ranking output path (with --rank).
    #[arg(long, default_value = "qpmix-rank.tsv")]
    rank_out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Generating graph (edge-list file).
    #[arg(long)]
    truth: PathBuf,
    /// Rate matrix TSV.
    #[arg(long)]
    nrr: PathBuf,
    /// Truncate the precision-recall curve at this recall.
    #[arg(long, default_value_t = 1.0)]
    recall_cap: f64,
    /// Optional curve output path.
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Type1Args {
    /// Replicates per sample size.
    #[arg(long, default_value_t = 2000)]
    replicates: usize,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "25,50,75,100")]
    n: Vec<usize>,
    /// Nominal level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Which test(s): exact, asymptotic or both.
    #[arg(long, default_value = "both")]
    test: String,
    /// Which fixture(s): continuous, mixed or both.
    #[arg(long, default_value = "both")]
    fixture: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AccuracyArgs {
    /// Grid preset; `paper` is the full synthetic study.
    #[arg(long, default_value = "paper")]
    preset: String,
    /// Multiply the per-cell replicate counts (graphs, parameter sets,
    /// datasets), with a floor of one each.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Override the degree list, comma separated.
    #[arg(long, value_delimiter = ',')]
    d: Option<Vec<usize>>,
    /// Override the correlation list, comma separated (pairs with --sigma).
    #[arg(long, value_delimiter = ',')]
    rho: Option<Vec<f64>>,
    /// Override the interaction-spread list, comma separated.
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Override the sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Override the conditioning order.
    #[arg(long)]
    q: Option<usize>,
    /// Recall cap for the area under the curve.
    #[arg(long, default_value_t = 1.0)]
    recall_cap: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parse `argv` (including the program name) and run. Returns the process
/// exit code.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match splice_config_args(argv) {
        Ok(argv) => argv,
        Err(e) => {
            eprintln!("qpmix: {e}");
            return e.exit_code();
        }
    };
    let matches = Cli::command()
        .args_override_self(true)
        .try_get_matches_from(&argv);
    let matches = match matches {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return 1;
        }
    };
    let body = || match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Nrr(args) => cmd_nrr(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Type1(args) => cmd_type1(args),
        Command::Accuracy(args) => cmd_accuracy(args),
    };
    let result = if cli.threads > 0 {
        match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
            Ok(pool) => pool.install(body),
            Err(e) => {
                eprintln!("qpmix: cannot build a {}-thread pool: {e}", cli.threads);
                return 1;
            }
        }
    } else {
        body()
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qpmix: {e}");
            e.exit_code()
        }
    }
}

// Read `key = value` lines from --config and splice them as `--key value`
// right after the subcommand, before the user's own flags; with
// args_override_self the user's flags win.
fn splice_config_args(argv: Vec<String>) -> Result<Vec<String>> {
    let subcommands = ["simulate", "nrr", "infer", "eval", "type1", "accuracy"];
    let mut config_path: Option<PathBuf> = None;
    {
        let mut it = argv.iter();
        while let Some(tok) = it.next() {
            if tok == "--config" {
                config_path = it.next().map(PathBuf::from);
            } else if let Some(v) = tok.strip_prefix("--config=") {
                config_path = Some(PathBuf::from(v));
            }
        }
    }
    let Some(path) = config_path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)?;
    let mut injected: Vec<String> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            msg: "expected `key = value`".to_string(),
        })?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if value.eq_ignore_ascii_case("true") {
            injected.push(format!("--{key}"));
        } else if value.eq_ignore_ascii_case("false") {
            continue;
        } else {
            injected.push(format!("--{key}"));
            injected.push(value.to_string());
        }
    }
    // insert right after the subcommand token
    let sub_pos = argv
        .iter()
        .position(|t| subcommands.contains(&t.as_str()))
        .ok_or_else(|| Error::Config("--config given but no subcommand found".into()))?;
    let mut out = argv;
    out.splice(sub_pos + 1..sub_pos + 1, injected);
    Ok(out)
}

fn parse_test_kind(s: &str) -> Result<TestKind> {
    match s {
        "exact" => Ok(TestKind::Exact),
        "asymptotic" => Ok(TestKind::Asymptotic),
        _ => Err(Error::Config(format!("unknown test `{s}` (exact | asymptotic)"))),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    if args.levels < 2 {
        return Err(Error::Config("each discrete variable needs at least 2 levels".into()));
    }
    let graph = MarkedGraph::sample_dregular(args.p, args.d, args.discrete, args.seed)?;
    let level_cards = vec![args.levels; args.discrete];
    let model = build_model(
        &graph,
        args.rho,
        args.sigma_h,
        &level_cards,
        derive_seed(args.seed, &[1]),
    )?;
    let data = sample_dataset(&model, args.n, derive_seed(args.seed, &[2]))?;

    // stage all three outputs, then commit; no partial outputs on failure
    let graph_path = PathBuf::from(format!("{}graph.txt", args.out_prefix));
    let model_path = PathBuf::from(format!("{}model.txt", args.out_prefix));
    let data_path = PathBuf::from(format!("{}data.csv", args.out_prefix));
    let staged: Vec<(PathBuf, PathBuf)> = vec![
        (stage(&graph_path, graph.to_edge_list_string().as_bytes())?, graph_path),
        (stage(&model_path, model.to_model_string().as_bytes())?, model_path),
        (stage(&data_path, data.to_csv_string().as_bytes())?, data_path),
    ];
    for (tmp, dest) in &staged {
        if let Err(e) = commit_staged(tmp, dest) {
            for (t, _) in &staged {
                let _ = std::fs::remove_file(t);
            }
            return Err(e);
        }
    }
    println!(
        "wrote {} ({} edges), {}, {} ({} rows)",
        staged[0].1.display(),
        graph.n_edges(),
        staged[1].1.display(),
        staged[2].1.display(),
        data.n()
    );
    Ok(())
}

fn cmd_nrr(args: &NrrArgs) -> Result<()> {
    let test = parse_test_kind(&args.test)?;
    let data = MixedDataset::load_csv(&args.data)?;
    let mut matrices = Vec::with_capacity(args.q.len());
    for &q in &args.q {
        let opts = NrrOptions {
            q,
            n_subsets: args.subsets,
            alpha: args.alpha,
            restrict_continuous: args.restrict_continuous,
            test,
            seed: derive_seed(args.seed, &[q as u64]),
        };
        matrices.push(nrr_matrix(&data, &opts)?);
    }
    let mut averaged = average_nrr(&matrices)?;
    averaged.meta_mut().seed = args.seed; // echo the master seed, not a derived one
    averaged.save_tsv(&args.out)?;
    println!(
        "wrote {} ({} defined pairs, q = {:?})",
        args.out.display(),
        averaged.defined_count(),
        args.q
    );
    Ok(())
}

fn cmd_infer(args: &InferArgs) -> Result<()> {
    if args.threshold.is_none() && !args.rank {
        return Err(Error::Config("nothing to do: pass --threshold and/or --rank".into()));
    }
    let matrix = NrrMatrix::load_tsv(&args.nrr)?;
    if let Some(threshold) = args.threshold {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(Error::Config(format!("threshold {threshold} outside [0, 1]")));
        }
        let graph = qp_graph(&matrix, threshold)?;
        graph.save_edge_list(&args.graph_out)?;
        println!("wrote {} ({} edges)", args.graph_out.display(), graph.n_edges());
    }
    if args.rank {
        let ranked = rank_edges(&matrix);
        let mut out = String::from("# qpmix-rank v1\nu\tv\tnrr\n");
        for ((a, b), nrr) in &ranked {
            out.push_str(&format!("{a}\t{b}\t{}\n", fmt_f64(*nrr)));
        }
        crate::io_util::atomic_write(&args.rank_out, out.as_bytes())?;
        println!("wrote {} ({} pairs)", args.rank_out.display(), ranked.len());
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let truth = MarkedGraph::load_edge_list(&args.truth)?;
    let matrix = NrrMatrix::load_tsv(&args.nrr)?;
    if truth.n_vertices() != matrix.p() {
        return Err(Error::DimensionMismatch(format!(
            "truth graph has {} vertices, matrix has {}",
            truth.n_vertices(),
            matrix.p()
        )));
    }
    let ranked: Vec<(usize, usize)> = rank_edges(&matrix).into_iter().map(|(p, _)| p).collect();
    let curve = precision_recall(&ranked, &truth, args.recall_cap)?;
    let area = auc(&curve);
    println!("auc\t{}", fmt_f64(area));
    if let Some(path) = &args.curve {
        curve.save_tsv(path)?;
        println!("wrote {} ({} points)", path.display(), curve.points().len());
    }
    Ok(())
}

fn cmd_type1(args: &Type1Args) -> Result<()> {
    let tests = match args.test.as_str() {
        "both" => vec![TestKind::Exact, TestKind::Asymptotic],
        other => vec![parse_test_kind(other)?],
    };
    let fixtures = match args.fixture.as_str() {
        "both" => vec![FixtureKind::Continuous, FixtureKind::Mixed],
        "continuous" => vec![FixtureKind::Continuous],
        "mixed" => vec![FixtureKind::Mixed],
        other => {
            return Err(Error::Config(format!(
                "unknown fixture `{other}` (continuous | mixed | both)"
            )))
        }
    };
    let cfg = Type1Config {
        n_list: args.n.clone(),
        n_replicates: args.replicates,
        alpha: args.alpha,
        fixtures,
        tests,
        seed: args.seed,
    };
    let rows = type1_experiment(&cfg)?;
    let table = type1_table_string(&cfg, &rows);
    emit(&table, args.out.as_deref())
}

fn cmd_accuracy(args: &AccuracyArgs) -> Result<()> {
    if args.preset != "paper" {
        return Err(Error::Config(format!("unknown preset `{}`", args.preset)));
    }
    let mut cfg = AccuracyConfig::paper_preset(args.seed).scaled(args.scale);
    if let Some(d) = &args.d {
        cfg.d_list = d.clone();
    }
    if let Some(rho) = &args.rho {
        cfg.rho_list = rho.clone();
    }
    if let Some(sigma) = &args.sigma {
        cfg.sigma_list = sigma.clone();
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(q) = args.q {
        cfg.q = q;
    }
    cfg.recall_cap = args.recall_cap;
    let cells = accuracy_experiment(&cfg)?;
    let table = accuracy_table_string(&cfg, &cells);
    emit(&table, args.out.as_deref())
}

fn emit(table: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            crate::io_util::atomic_write(path, table.as_bytes())?;
            println!("wrote {}", path.display());
        }
        None => print!("{table}"),
    }
    Ok(())
}

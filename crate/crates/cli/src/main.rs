use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use skyway_core::bench::{
    emit_results, run_experiment, skip_analysis, summarize_metrics, Algorithm, ExperimentConfig, OutputFormat,
    RunOptions, Span,
};
use skyway_core::reactive::DEFAULT_CELL_SIZE_FRAC;
use skyway_core::{
    cell_density_recompose, generate_network, global_recompose, load_network, radius_recompose, save_network,
    two_phased_recompose, GenParams, SkywayNetwork, TwoPhaseOptions,
};

/// Skyway network routing: generate networks, recompose around failed
/// segments, and benchmark the recomposition strategies.
#[derive(Debug, Parser)]
#[command(name = "skyway", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random skyway network and write it as JSON.
    Generate(GenerateArgs),
    /// Fail one segment and recompose a path between its endpoints.
    Recompose(RecomposeArgs),
    /// Run a seeded benchmark sweep and write CSV and JSON results.
    Bench(BenchArgs),
    /// Compare two-phased runs with and without stage skipping.
    SkipAnalysis(SkipArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1000)]
    nodes: usize,
    /// Side length of the square map.
    #[arg(long, default_value_t = 5000.0)]
    size: f64,
    #[arg(long, default_value_t = 10)]
    max_connectivity: usize,
    /// Neighbor search radius as a fraction of the map size.
    #[arg(long, default_value_t = 0.1)]
    neighbor_radius_frac: f64,
    #[arg(long, env = "SKYWAY_SEED", default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Radius,
    CellDensity,
    #[value(alias = "two-phased")]
    TwoPhase,
    Global,
}

#[derive(Debug, Args)]
struct RecomposeArgs {
    #[arg(long)]
    network: PathBuf,
    /// Failed segment as two node ids, `u,v`.
    #[arg(long, value_parser = parse_pair)]
    fail: (u64, u64),
    #[arg(long, value_enum)]
    algorithm: Method,
    /// Density-grid cell edge; defaults to a twentieth of the network size.
    #[arg(long)]
    cell_size: Option<f64>,
    /// Corridor half-width as a fraction of the failed segment length.
    #[arg(long, default_value_t = 0.5)]
    val_frac: f64,
    /// Search every two-phase stage even when it looks too sparse.
    #[arg(long)]
    no_skip: bool,
    /// Zero the elapsed-time fields.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for records.csv, records.json and summary.json.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    nodes_min: Option<usize>,
    #[arg(long)]
    nodes_max: Option<usize>,
    /// Comma-separated subset of RADIUS, CELL_DENSITY, TWO_PHASED,
    /// GLOBAL_DIJKSTRA, ASTAR, BELLMAN_FORD.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
    algorithms: Option<Vec<Algorithm>>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    val_frac: Option<f64>,
    #[arg(long, env = "SKYWAY_SEED")]
    seed: Option<u64>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    jobs: Option<usize>,
    /// Zero every elapsed-time field for byte-reproducible output.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct SkipArgs {
    #[arg(long, default_value_t = 69)]
    scenarios: usize,
    #[arg(long, env = "SKYWAY_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    nodes_min: usize,
    #[arg(long, default_value_t = 5000)]
    nodes_max: usize,
    #[arg(long, default_value_t = 0.5)]
    val_frac: f64,
    /// Include the per-skip cases in the report.
    #[arg(long)]
    cases: bool,
}

fn parse_pair(s: &str) -> std::result::Result<(u64, u64), String> {
    let (u, v) = s.split_once(',').ok_or("expected two node ids as `u,v`")?;
    let id = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad node id `{t}`: {e}"));
    Ok((id(u)?, id(v)?))
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    let name = s.trim().to_ascii_uppercase().replace('-', "_");
    Algorithm::ALL
        .into_iter()
        .find(|a| a.name() == name)
        .ok_or_else(|| format!("unknown algorithm `{s}`"))
}

fn write_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            f(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
        }
    }
    Ok(())
}

fn read_network(path: &Path) -> Result<SkywayNetwork> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    load_network(BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
}

fn generate(args: GenerateArgs) -> Result<()> {
    let params = GenParams {
        num_nodes: args.nodes,
        max_connectivity: args.max_connectivity,
        network_size: args.size,
        neighbor_radius_frac: args.neighbor_radius_frac,
        seed: args.seed,
    };
    let net = generate_network(&params)?;
    write_output(args.out.as_deref(), |w| Ok(save_network(&net, w)?))?;
    if args.out.is_some() {
        eprintln!("wrote {} nodes, {} edges", net.node_count(), net.edge_count());
    }
    Ok(())
}

fn recompose(args: RecomposeArgs) -> Result<()> {
    let net = read_network(&args.network)?;
    let (uid, vid) = args.fail;
    let ix = |id: u64| net.index_of(id).with_context(|| format!("node id {id} is not in the network"));
    let (u, v) = (ix(uid)?, ix(vid)?);
    let view = net.with_failed_edge(u, v)?;
    let mut result = match args.algorithm {
        Method::Radius => radius_recompose(&view, u, v)?,
        Method::CellDensity => {
            let cell = args.cell_size.unwrap_or(DEFAULT_CELL_SIZE_FRAC * net.network_size());
            cell_density_recompose(&view, u, v, cell)?
        }
        Method::TwoPhase => two_phased_recompose(
            &view,
            u,
            v,
            TwoPhaseOptions {
                val_frac: args.val_frac,
                skip_stages: !args.no_skip,
            },
        )?,
        Method::Global => global_recompose(&view, u, v)?,
    };
    if args.no_timing {
        result.zero_timings();
    }
    // results speak in node indices; add the file's ids alongside
    let mut doc = serde_json::to_value(&result)?;
    let path_ids = result
        .path
        .as_ref()
        .map(|p| p.nodes.iter().map(|&i| net.id_of(i)).collect::<Vec<_>>());
    doc["failed_edge_ids"] = serde_json::json!([uid, vid]);
    doc["path_ids"] = serde_json::json!(path_ids);
    write_output(None, |w| {
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)?;
        Ok(())
    })
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if args.nodes_min.is_some() || args.nodes_max.is_some() {
        config.nodes = Span::new(
            args.nodes_min.unwrap_or(config.nodes.min),
            args.nodes_max.unwrap_or(config.nodes.max),
        );
    }
    if let Some(a) = args.algorithms {
        config.algorithms = a;
    }
    if args.cell_size.is_some() {
        config.cell_size = args.cell_size;
    }
    if let Some(f) = args.val_frac {
        config.val_frac = f;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if args.jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let out = run_experiment(
        &config,
        &RunOptions {
            jobs: args.jobs,
            no_timing: args.no_timing,
        },
    )?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let summary = if out.records.is_empty() {
        None
    } else {
        Some(summarize_metrics(&out.records)?)
    };
    let dir = &args.out;
    write_output(Some(&dir.join("records.csv")), |w| {
        Ok(emit_results(&out.records, None, OutputFormat::Csv, w)?)
    })?;
    write_output(Some(&dir.join("records.json")), |w| {
        Ok(emit_results(&out.records, summary.as_ref(), OutputFormat::Json, w)?)
    })?;
    write_output(Some(&dir.join("summary.json")), |w| {
        let doc = serde_json::json!({ "config": config, "summary": summary, "skipped": out.skipped });
        serde_json::to_writer_pretty(&mut *w, &doc)?;
        writeln!(w)?;
        Ok(())
    })?;
    eprintln!(
        "{} records from {} trials ({} skipped) written to {}",
        out.records.len(),
        config.trials,
        out.skipped.len(),
        dir.display()
    );
    Ok(())
}

fn skip(args: SkipArgs) -> Result<()> {
    let config = ExperimentConfig {
        nodes: Span::new(args.nodes_min, args.nodes_max),
        val_frac: args.val_frac,
        seed: args.seed,
        ..Default::default()
    };
    let mut report = skip_analysis(&config, args.scenarios)?;
    if !args.cases {
        report.cases.clear();
    }
    write_output(None, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout with status 0, usage errors exit 2
            e.exit();
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Recompose(a) => recompose(a),
        Command::Bench(a) => bench(a),
        Command::SkipAnalysis(a) => skip(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

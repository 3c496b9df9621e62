//! Benchmark harness: seeded random failure scenarios, paired runs of every
//! configured algorithm on the same failed view, and metric summaries.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Result, SkywayError};
use crate::network::{generate_network, GenParams, NetworkView, NodeIx, SkywayNetwork};
use crate::pathfind::{astar, bellman_ford, dijkstra, Path};
use crate::reactive::{
    analyze_stage_skipping, cell_density_recompose, global_recompose, radius_recompose, two_phased_recompose,
    RecompositionResult, Scenario, SkipReport, Stage, TwoPhaseOptions, DEFAULT_CELL_SIZE_FRAC, DEFAULT_VAL_FRAC,
};

/// Header of the CSV emitted by [`emit_results`].
pub const CSV_HEADER: [&str; 17] = [
    "trial",
    "algorithm",
    "num_nodes",
    "num_edges",
    "network_size",
    "failed_u",
    "failed_v",
    "search_ns",
    "region_ns",
    "path_length",
    "baseline_length",
    "distance_overhead",
    "node_compression",
    "edge_compression",
    "iterations",
    "fallback",
    "stage_skips",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Algorithm {
    Radius,
    CellDensity,
    TwoPhased,
    GlobalDijkstra,
    Astar,
    BellmanFord,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Radius,
        Algorithm::CellDensity,
        Algorithm::TwoPhased,
        Algorithm::GlobalDijkstra,
        Algorithm::Astar,
        Algorithm::BellmanFord,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Radius => "RADIUS",
            Algorithm::CellDensity => "CELL_DENSITY",
            Algorithm::TwoPhased => "TWO_PHASED",
            Algorithm::GlobalDijkstra => "GLOBAL_DIJKSTRA",
            Algorithm::Astar => "ASTAR",
            Algorithm::BellmanFord => "BELLMAN_FORD",
        }
    }

    pub fn is_local(self) -> bool {
        matches!(self, Algorithm::Radius | Algorithm::CellDensity | Algorithm::TwoPhased)
    }
}

/// Inclusive range sampled uniformly per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span<T> {
    pub min: T,
    pub max: T,
}

impl<T: PartialOrd + Copy> Span<T> {
    pub fn new(min: T, max: T) -> Self {
        Self { min, max }
    }

    pub fn fixed(value: T) -> Self {
        Self { min: value, max: value }
    }

    fn within(&self, lo: T, hi: T) -> bool {
        lo <= self.min && self.max <= hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nodes: Span<usize>,
    pub max_connectivity: Span<usize>,
    pub network_size: Span<f64>,
    pub neighbor_radius_frac: Span<f64>,
    pub trials: usize,
    pub algorithms: Vec<Algorithm>,
    /// Absolute density-grid cell edge; `cell_size_frac * network size` when unset.
    pub cell_size: Option<f64>,
    pub cell_size_frac: f64,
    pub val_frac: f64,
    pub seed: u64,
    /// Permits generator ranges outside the experimental defaults.
    pub allow_out_of_range: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            nodes: Span::new(100, 5000),
            max_connectivity: Span::new(5, 20),
            network_size: Span::new(1000.0, 10000.0),
            neighbor_radius_frac: Span::new(0.05, 0.3),
            trials: 100,
            algorithms: Algorithm::ALL.to_vec(),
            cell_size: None,
            cell_size_frac: DEFAULT_CELL_SIZE_FRAC,
            val_frac: DEFAULT_VAL_FRAC,
            seed: 0,
            allow_out_of_range: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SkywayError::InvalidParams(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected");
        }
        if self.nodes.min > self.nodes.max
            || self.max_connectivity.min > self.max_connectivity.max
            || !(self.network_size.min <= self.network_size.max)
            || !(self.neighbor_radius_frac.min <= self.neighbor_radius_frac.max)
        {
            return bad("range min exceeds max");
        }
        if self.nodes.min < 2 || self.max_connectivity.min < 1 {
            return bad("need at least two nodes and one neighbor per node");
        }
        if !(self.network_size.min > 0.0) || !(self.neighbor_radius_frac.min > 0.0) {
            return bad("network size and neighbor radius must be positive");
        }
        if !self.allow_out_of_range
            && !(self.nodes.within(100, 5000)
                && self.max_connectivity.within(5, 20)
                && self.network_size.within(1000.0, 10000.0)
                && self.neighbor_radius_frac.within(0.05, 0.3))
        {
            return bad("ranges exceed nodes 100-5000, connectivity 5-20, size 1000-10000, radius 0.05-0.3; set allow_out_of_range to override");
        }
        if let Some(c) = self.cell_size {
            if !(c > 0.0) {
                return bad("cell_size must be positive");
            }
        }
        if !(self.cell_size_frac > 0.0) || !(self.val_frac > 0.0) {
            return bad("cell_size_frac and val_frac must be positive");
        }
        Ok(())
    }

    fn cell_size_for(&self, net: &SkywayNetwork) -> f64 {
        self.cell_size.unwrap_or(self.cell_size_frac * net.network_size())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for trials; all available cores when unset.
    pub jobs: Option<usize>,
    /// Zero every elapsed-time field so output is reproducible.
    pub no_timing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub network_size: f64,
    pub failed_u: u64,
    pub failed_v: u64,
    pub search_ns: u64,
    pub region_ns: u64,
    pub path_length: Option<f64>,
    pub baseline_length: Option<f64>,
    pub distance_overhead: Option<f64>,
    pub node_compression: f64,
    pub edge_compression: f64,
    pub iterations: usize,
    pub fallback: bool,
    pub stage_skips: Vec<Stage>,
    /// Node ids of the returned path.
    pub path: Option<Vec<u64>>,
}

impl TrialRecord {
    pub fn total_ns(&self) -> u64 {
        self.search_ns + self.region_ns
    }

    pub fn uses_edge(&self, u: u64, v: u64) -> bool {
        self.path
            .as_ref()
            .is_some_and(|p| p.windows(2).any(|w| (w[0], w[1]) == (u, v) || (w[0], w[1]) == (v, u)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTrial {
    pub trial: usize,
    pub failed_u: Option<u64>,
    pub failed_v: Option<u64>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub records: Vec<TrialRecord>,
    pub skipped: Vec<SkippedTrial>,
}

/// Independent random stream for one trial.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn sample_params(config: &ExperimentConfig, rng: &mut ChaCha8Rng) -> GenParams {
    let uniform = |rng: &mut ChaCha8Rng, s: Span<f64>| {
        if s.min == s.max {
            s.min
        } else {
            rng.random_range(s.min..=s.max)
        }
    };
    GenParams {
        num_nodes: rng.random_range(config.nodes.min..=config.nodes.max),
        max_connectivity: rng.random_range(config.max_connectivity.min..=config.max_connectivity.max),
        network_size: uniform(rng, config.network_size),
        neighbor_radius_frac: uniform(rng, config.neighbor_radius_frac),
        seed: rng.random(),
    }
}

/// Generates the trial's network and picks a failed segment on the global
/// shortest path between a random source and destination. The segment is
/// oriented along that path.
pub fn sample_scenario(config: &ExperimentConfig, trial: usize) -> std::result::Result<Scenario, SkippedTrial> {
    let skip = |reason: String| SkippedTrial {
        trial,
        failed_u: None,
        failed_v: None,
        reason,
    };
    let mut rng = trial_rng(config.seed, trial);
    let params = sample_params(config, &mut rng);
    let network = generate_network(&params).map_err(|e| skip(format!("generation failed: {e}")))?;
    let n = network.node_count();
    let src = rng.random_range(0..n);
    let dst = (src + rng.random_range(1..n)) % n;
    let route = dijkstra(&network, src, dst, None)
        .ok()
        .flatten()
        .map(|(p, _)| p)
        .ok_or_else(|| skip("no route between the sampled endpoints".into()))?;
    let hop = rng.random_range(0..route.nodes.len() - 1);
    Ok(Scenario {
        network,
        failed_edge: (route.nodes[hop], route.nodes[hop + 1]),
    })
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_nanos() as u64)
}

struct Paired<'a> {
    trial: usize,
    net: &'a SkywayNetwork,
    failed: (NodeIx, NodeIx),
    view_edges: usize,
    baseline: f64,
}

impl Paired<'_> {
    fn record(&self, algorithm: Algorithm, path: Option<&Path>, search_ns: u64, region_ns: u64) -> TrialRecord {
        let path_length = path.map(|p| p.total_length);
        TrialRecord {
            trial: self.trial,
            algorithm,
            num_nodes: self.net.node_count(),
            num_edges: self.net.edge_count(),
            network_size: self.net.network_size(),
            failed_u: self.net.id_of(self.failed.0),
            failed_v: self.net.id_of(self.failed.1),
            search_ns,
            region_ns,
            path_length,
            baseline_length: Some(self.baseline),
            distance_overhead: path_length.map(|l| l / self.baseline),
            node_compression: 1.0,
            edge_compression: 1.0,
            iterations: 1,
            fallback: false,
            stage_skips: Vec::new(),
            path: path.map(|p| p.nodes.iter().map(|&ix| self.net.id_of(ix)).collect()),
        }
    }

    fn record_result(&self, algorithm: Algorithm, r: &RecompositionResult) -> TrialRecord {
        let mut rec = self.record(algorithm, r.path.as_ref(), r.search_ns, r.region_build_ns);
        rec.node_compression = r.final_allowed_nodes() as f64 / self.net.node_count() as f64;
        rec.edge_compression = r.final_allowed_edges() as f64 / self.view_edges as f64;
        rec.iterations = r.iteration_count();
        rec.fallback = r.fell_back_to_global;
        rec.stage_skips = r.skipped_stages().collect();
        rec
    }
}

/// Runs every configured algorithm on one trial's failed view.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<std::result::Result<Vec<TrialRecord>, SkippedTrial>> {
    let scenario = match sample_scenario(config, trial) {
        Ok(s) => s,
        Err(skip) => return Ok(Err(skip)),
    };
    let net = &scenario.network;
    let (u, v) = scenario.failed_edge;
    let view = net.with_failed_edge(u, v)?;
    let Some((baseline, _)) = dijkstra(&view, u, v, None)? else {
        return Ok(Err(SkippedTrial {
            trial,
            failed_u: Some(net.id_of(u)),
            failed_v: Some(net.id_of(v)),
            reason: "failure disconnects the segment endpoints".into(),
        }));
    };
    let paired = Paired {
        trial,
        net,
        failed: (u, v),
        view_edges: view.edge_count(),
        baseline: baseline.total_length,
    };
    let cell_size = config.cell_size_for(net);
    let two_phase = TwoPhaseOptions {
        val_frac: config.val_frac,
        skip_stages: true,
    };
    let mut records = Vec::with_capacity(config.algorithms.len());
    for &alg in &config.algorithms {
        let rec = match alg {
            Algorithm::Radius => paired.record_result(alg, &radius_recompose(&view, u, v)?),
            Algorithm::CellDensity => paired.record_result(alg, &cell_density_recompose(&view, u, v, cell_size)?),
            Algorithm::TwoPhased => paired.record_result(alg, &two_phased_recompose(&view, u, v, two_phase)?),
            Algorithm::GlobalDijkstra => paired.record_result(alg, &global_recompose(&view, u, v)?),
            Algorithm::Astar => {
                let (out, ns) = timed(|| astar(&view, u, v));
                paired.record(alg, out?.as_ref().map(|(p, _)| p), ns, 0)
            }
            Algorithm::BellmanFord => {
                let (out, ns) = timed(|| bellman_ford(&view, u, v));
                paired.record(alg, out?.as_ref().map(|(p, _)| p), ns, 0)
            }
        };
        records.push(rec);
    }
    Ok(Ok(records))
}

/// Runs all trials, in parallel when the `parallel` feature is on. Records
/// come back ordered by trial, then by the configured algorithm order.
pub fn run_experiment(config: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    config.validate()?;
    let per_trial = run_trials(config, opts)?;
    let mut out = ExperimentOutput::default();
    for t in per_trial {
        match t {
            Ok(mut recs) => {
                if opts.no_timing {
                    for r in &mut recs {
                        r.search_ns = 0;
                        r.region_ns = 0;
                    }
                }
                out.records.extend(recs);
            }
            Err(skip) => out.skipped.push(skip),
        }
    }
    Ok(out)
}

type TrialOutcome = std::result::Result<Vec<TrialRecord>, SkippedTrial>;

#[cfg(feature = "parallel")]
fn run_trials(config: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<TrialOutcome>> {
    use rayon::prelude::*;
    let work = || (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect();
    match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| SkywayError::InvalidParams(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_trials(config: &ExperimentConfig, _opts: &RunOptions) -> Result<Vec<TrialOutcome>> {
    (0..config.trials).map(|t| run_trial(config, t)).collect()
}

/// Draws `count` scenarios whose failure leaves the endpoints connected,
/// walking trial ids upward from 0.
pub fn sample_connected_scenarios(config: &ExperimentConfig, count: usize) -> Result<Vec<Scenario>> {
    config.validate()?;
    let mut out = Vec::with_capacity(count);
    let mut trial = 0;
    while out.len() < count {
        if trial >= count.saturating_mul(10).max(100) {
            return Err(SkywayError::Precondition(format!(
                "only {} usable scenarios in {trial} draws",
                out.len()
            )));
        }
        if let Ok(sc) = sample_scenario(config, trial) {
            let (u, v) = sc.failed_edge;
            let view = sc.network.with_failed_edge(u, v)?;
            if dijkstra(&view, u, v, None)?.is_some() {
                out.push(sc);
            }
        }
        trial += 1;
    }
    Ok(out)
}

/// Stage-skip analysis over `scenarios` seeded failures drawn from `config`.
pub fn skip_analysis(config: &ExperimentConfig, scenarios: usize) -> Result<SkipReport> {
    if scenarios == 0 {
        return Err(SkywayError::InvalidParams("scenarios must be at least 1".into()));
    }
    analyze_stage_skipping(&sample_connected_scenarios(config, scenarios)?, config.val_frac)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl Distribution {
    /// Order statistics plus a mean summed in sorted order, so the result
    /// does not depend on input order.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Self {
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            p95: v[rank - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub runs: usize,
    pub search_ns: Distribution,
    pub total_ns: Distribution,
    pub mean_distance_overhead: Option<f64>,
    pub mean_node_compression: f64,
    pub mean_edge_compression: f64,
    pub fallback_rate: f64,
    /// Per-trial search time over the paired global Dijkstra time, averaged.
    pub mean_search_time_ratio: Option<f64>,
    /// Same with region construction included.
    pub mean_total_time_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: usize,
    pub algorithms: Vec<AlgorithmSummary>,
}

impl Summary {
    pub fn get(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|s| s.algorithm == algorithm)
    }
}

fn sorted_mean(values: &[f64]) -> Option<f64> {
    Distribution::of(values).map(|d| d.mean)
}

pub fn summarize_metrics(records: &[TrialRecord]) -> Result<Summary> {
    if records.is_empty() {
        return Err(SkywayError::EmptyInput);
    }
    let baseline_ns: BTreeMap<usize, u64> = records
        .iter()
        .filter(|r| r.algorithm == Algorithm::GlobalDijkstra)
        .map(|r| (r.trial, r.search_ns))
        .collect();
    let mut by_alg: BTreeMap<Algorithm, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        by_alg.entry(r.algorithm).or_default().push(r);
    }
    let trials = records.iter().map(|r| r.trial).collect::<std::collections::BTreeSet<_>>().len();
    let algorithms = by_alg
        .into_iter()
        .map(|(algorithm, rs)| {
            let col = |f: &dyn Fn(&TrialRecord) -> Option<f64>| rs.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
            let ratio = |f: &dyn Fn(&TrialRecord) -> u64| {
                col(&|r| {
                    baseline_ns
                        .get(&r.trial)
                        .filter(|&&b| b > 0)
                        .map(|&b| f(r) as f64 / b as f64)
                })
            };
            let search = col(&|r| Some(r.search_ns as f64));
            let total = col(&|r| Some(r.total_ns() as f64));
            AlgorithmSummary {
                algorithm,
                runs: rs.len(),
                search_ns: Distribution::of(&search).expect("non-empty group"),
                total_ns: Distribution::of(&total).expect("non-empty group"),
                mean_distance_overhead: sorted_mean(&col(&|r| r.distance_overhead)),
                mean_node_compression: sorted_mean(&col(&|r| Some(r.node_compression))).unwrap_or(1.0),
                mean_edge_compression: sorted_mean(&col(&|r| Some(r.edge_compression))).unwrap_or(1.0),
                fallback_rate: rs.iter().filter(|r| r.fallback).count() as f64 / rs.len() as f64,
                mean_search_time_ratio: sorted_mean(&ratio(&|r| r.search_ns)),
                mean_total_time_ratio: sorted_mean(&ratio(&|r| r.total_ns())),
            }
        })
        .collect();
    Ok(Summary { trials, algorithms })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Shortest decimal form of `x` rounded to nine significant digits.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn opt_sig9(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

fn stage_list(stages: &[Stage]) -> String {
    stages
        .iter()
        .map(|s| serde_json::to_value(s).expect("stage serializes").as_str().unwrap_or_default().to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// CSV carries the records only; JSON carries records and summary.
pub fn emit_results<W: Write>(records: &[TrialRecord], summary: Option<&Summary>, format: OutputFormat, sink: W) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record(CSV_HEADER)?;
            for r in records {
                w.write_record([
                    r.trial.to_string(),
                    r.algorithm.name().to_string(),
                    r.num_nodes.to_string(),
                    r.num_edges.to_string(),
                    sig9(r.network_size),
                    r.failed_u.to_string(),
                    r.failed_v.to_string(),
                    r.search_ns.to_string(),
                    r.region_ns.to_string(),
                    opt_sig9(r.path_length),
                    opt_sig9(r.baseline_length),
                    opt_sig9(r.distance_overhead),
                    sig9(r.node_compression),
                    sig9(r.edge_compression),
                    r.iterations.to_string(),
                    r.fallback.to_string(),
                    stage_list(&r.stage_skips),
                ])?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                records: &'a [TrialRecord],
                #[serde(skip_serializing_if = "Option::is_none")]
                summary: Option<&'a Summary>,
            }
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, &Doc { records, summary })?;
            sink.write_all(b"\n")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(trials: usize, algorithms: Vec<Algorithm>) -> ExperimentConfig {
        ExperimentConfig {
            nodes: Span::new(100, 300),
            trials,
            algorithms,
            seed: 11,
            ..Default::default()
        }
    }

    fn record(trial: usize, algorithm: Algorithm, overhead: f64, search_ns: u64) -> TrialRecord {
        TrialRecord {
            trial,
            algorithm,
            num_nodes: 10,
            num_edges: 20,
            network_size: 100.0,
            failed_u: 0,
            failed_v: 1,
            search_ns,
            region_ns: 0,
            path_length: Some(10.0 * overhead),
            baseline_length: Some(10.0),
            distance_overhead: Some(overhead),
            node_compression: 0.5,
            edge_compression: 0.25,
            iterations: 1,
            fallback: false,
            stage_skips: vec![],
            path: Some(vec![0, 2, 1]),
        }
    }

    #[test]
    fn paired_records_respect_overhead_floor() {
        let out = run_experiment(
            &small_config(10, vec![Algorithm::TwoPhased, Algorithm::GlobalDijkstra]),
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(out.records.len() + 2 * out.skipped.len(), 20);
        for pair in out.records.chunks(2) {
            assert_eq!(pair[0].trial, pair[1].trial);
            assert_eq!(pair[0].algorithm, Algorithm::TwoPhased);
            assert!(pair[0].distance_overhead.unwrap() >= 1.0 - 1e-9);
            assert_eq!(pair[1].distance_overhead, Some(1.0));
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = small_config(6, Algorithm::ALL.to_vec());
        let opts = RunOptions {
            no_timing: true,
            ..Default::default()
        };
        assert_eq!(run_experiment(&cfg, &opts).unwrap(), run_experiment(&cfg, &opts).unwrap());
        let seq = RunOptions { jobs: Some(1), no_timing: true };
        assert_eq!(run_experiment(&cfg, &opts).unwrap(), run_experiment(&cfg, &seq).unwrap());
    }

    #[test]
    fn local_paths_avoid_failed_edge() {
        let cfg = ExperimentConfig {
            nodes: Span::fixed(100),
            ..small_config(20, vec![Algorithm::Radius, Algorithm::CellDensity, Algorithm::TwoPhased])
        };
        let out = run_experiment(&cfg, &RunOptions::default()).unwrap();
        assert!(!out.records.is_empty());
        for r in &out.records {
            assert!(r.path.is_some());
            assert!(!r.uses_edge(r.failed_u, r.failed_v), "{r:?}");
            assert!(r.node_compression > 0.0 && r.node_compression <= 1.0);
        }
    }

    #[test]
    fn scenario_edge_is_on_a_route() {
        let cfg = small_config(1, vec![Algorithm::GlobalDijkstra]);
        for t in 0..10 {
            let sc = sample_scenario(&cfg, t).unwrap();
            assert!(sc.network.find_edge(sc.failed_edge.0, sc.failed_edge.1).is_some());
        }
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let mut c = ExperimentConfig { trials: 0, ..Default::default() };
        assert!(c.validate().is_err());
        c.trials = 1;
        c.nodes = Span::new(10, 20);
        assert!(c.validate().is_err());
        c.allow_out_of_range = true;
        assert!(c.validate().is_ok());
        c.nodes = Span::new(30, 20);
        assert!(c.validate().is_err());
    }

    #[test]
    fn config_json_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"trials":3,"algorithms":["RADIUS","GLOBAL_DIJKSTRA"]}"#).unwrap();
        assert_eq!(c.trials, 3);
        assert_eq!(c.algorithms, vec![Algorithm::Radius, Algorithm::GlobalDijkstra]);
        assert_eq!(c.nodes, Span::new(100, 5000));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"trails":3}"#).is_err());
    }

    #[test]
    fn identity_overheads_average_to_one() {
        let rs: Vec<_> = (0..4).map(|t| record(t, Algorithm::TwoPhased, 1.0, 5)).collect();
        let s = summarize_metrics(&rs).unwrap();
        assert_eq!(s.get(Algorithm::TwoPhased).unwrap().mean_distance_overhead, Some(1.0));
    }

    #[test]
    fn mean_overhead_is_arithmetic() {
        let rs = [record(0, Algorithm::Radius, 1.10, 5), record(1, Algorithm::Radius, 1.12, 5)];
        let s = summarize_metrics(&rs).unwrap();
        let m = s.get(Algorithm::Radius).unwrap().mean_distance_overhead.unwrap();
        assert!((m - 1.11).abs() < 1e-12);
    }

    #[test]
    fn time_ratio_is_per_trial() {
        // ratios 1/2 and 4/1 average to 2.25; the ratio of sums would be 5/3
        let rs = [
            record(0, Algorithm::TwoPhased, 1.0, 1),
            record(0, Algorithm::GlobalDijkstra, 1.0, 2),
            record(1, Algorithm::TwoPhased, 1.0, 4),
            record(1, Algorithm::GlobalDijkstra, 1.0, 1),
        ];
        let s = summarize_metrics(&rs).unwrap();
        assert_eq!(s.get(Algorithm::TwoPhased).unwrap().mean_search_time_ratio, Some(2.25));
        assert_eq!(s.trials, 2);
    }

    #[test]
    fn summary_needs_records() {
        assert!(matches!(summarize_metrics(&[]), Err(SkywayError::EmptyInput)));
    }

    #[test]
    fn distribution_statistics() {
        let d = Distribution::of(&[4.0, 1.0, 3.0, 2.0]).unwrap();
        assert_eq!((d.mean, d.median, d.p95), (2.5, 2.5, 4.0));
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(Distribution::of(&xs).unwrap().p95, 95.0);
        assert!(Distribution::of(&[]).is_none());
    }

    #[test]
    fn csv_shape() {
        let rs: Vec<_> = (0..3).map(|t| record(t, Algorithm::CellDensity, 1.0 / 3.0 + 1.0, 7)).collect();
        let mut buf = Vec::new();
        emit_results(&rs, None, OutputFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("0,CELL_DENSITY,10,20,100,0,1,7,0,13.3333333,10,1.33333333,0.5,0.25,1,false,"));

        let mut buf = Vec::new();
        emit_results(&[], None, OutputFormat::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim_end(), CSV_HEADER.join(","));
    }

    #[test]
    fn json_round_trip() {
        let mut rs: Vec<_> = (0..3).map(|t| record(t, Algorithm::TwoPhased, 1.0 + t as f64 / 7.0, 9)).collect();
        rs[1].stage_skips = vec![Stage::Triangle, Stage::Rhombus];
        rs[2].path = None;
        rs[2].path_length = None;
        rs[2].distance_overhead = None;
        let summary = summarize_metrics(&rs).unwrap();
        let mut buf = Vec::new();
        emit_results(&rs, Some(&summary), OutputFormat::Json, &mut buf).unwrap();
        #[derive(Deserialize)]
        struct Doc {
            records: Vec<TrialRecord>,
            summary: Summary,
        }
        let doc: Doc = serde_json::from_slice(&buf).unwrap();
        assert_eq!(doc.records, rs);
        assert_eq!(doc.summary, summary);
    }

    #[test]
    fn sig9_rounding() {
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(12.806248474865697), "12.8062485");
        assert_eq!(sig9(0.000123456789123), "0.000123456789");
        assert_eq!(sig9(123456789012.0), "123456789000");
    }
}

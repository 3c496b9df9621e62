//! Reactive recomposition around a failed segment `a`-`b`.
//!
//! Each algorithm grows a geometric bound around the failed segment, runs a
//! restricted shortest-path search inside it, and falls back to a search of
//! the whole degraded network once the bound stops paying off. Region
//! construction and search are timed separately.

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Result, SkywayError};
use crate::geometry::{
    build_cell_grid, build_circle, build_partial_areas, build_rhombus_regions, Region,
};
use crate::network::{induced_edge_count, NetworkView, NodeIx, NodeSet, SkywayNetwork};
use crate::pathfind::{dijkstra, Path, SearchStats};
use crate::service::{services_along, CompositionPlan, FailureEvent};

/// Radius growth per failed iteration, as a fraction of the network size.
pub const RADIUS_STEP_FRAC: f64 = 0.2;
/// The circle search gives way to a global search beyond this radius fraction.
pub const RADIUS_CAP_FRAC: f64 = 0.5;
/// Default density-grid cell edge as a fraction of the network size.
pub const DEFAULT_CELL_SIZE_FRAC: f64 = 0.05;
/// Default corridor half-width as a fraction of the failed segment length.
pub const DEFAULT_VAL_FRAC: f64 = 0.5;
/// Growth stops and a global search runs once this fraction of nodes is allowed.
pub const GROWTH_CAP_FRAC: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Radius,
    CellDensity,
    TwoPhased,
    Global,
}

impl Strategy {
    pub const LOCAL: [Strategy; 3] = [Strategy::Radius, Strategy::CellDensity, Strategy::TwoPhased];
}

/// What an iteration searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Circle,
    Squares,
    Triangle,
    Rhombus,
    Rectangle,
    Growth,
    Global,
}

impl Stage {
    pub const PHASE_ONE: [(Stage, f64); 3] = [(Stage::Triangle, 0.25), (Stage::Rhombus, 0.5), (Stage::Rectangle, 1.0)];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub stage: Stage,
    pub region: Region,
    pub allowed_nodes: usize,
    pub allowed_edges: usize,
    /// Nodes admitted by this iteration's nearest-neighbor growth.
    pub added_nodes: usize,
    pub found: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSkip {
    pub stage: Stage,
    pub skipped: bool,
    pub node_count: usize,
    /// `fraction * rectangle node count`; the stage is skipped below it.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecompositionResult {
    pub strategy: Strategy,
    pub source: NodeIx,
    pub target: NodeIx,
    pub path: Option<Path>,
    pub iterations: Vec<IterationRecord>,
    pub fell_back_to_global: bool,
    pub stage_skips: Vec<StageSkip>,
    pub region_build_ns: u64,
    pub search_ns: u64,
    pub search_stats: SearchStats,
}

impl RecompositionResult {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    pub fn regions(&self) -> impl Iterator<Item = &Region> {
        self.iterations.iter().map(|it| &it.region)
    }

    pub fn allowed_node_counts(&self) -> Vec<usize> {
        self.iterations.iter().map(|it| it.allowed_nodes).collect()
    }

    pub fn allowed_edge_counts(&self) -> Vec<usize> {
        self.iterations.iter().map(|it| it.allowed_edges).collect()
    }

    /// Node count of the last space searched.
    pub fn final_allowed_nodes(&self) -> usize {
        self.iterations.last().map_or(0, |it| it.allowed_nodes)
    }

    pub fn final_allowed_edges(&self) -> usize {
        self.iterations.last().map_or(0, |it| it.allowed_edges)
    }

    pub fn total_ns(&self) -> u64 {
        self.region_build_ns + self.search_ns
    }

    pub fn skipped_stages(&self) -> impl Iterator<Item = Stage> + '_ {
        self.stage_skips.iter().filter(|s| s.skipped).map(|s| s.stage)
    }

    /// Clears every timing field, for reproducible output.
    pub fn zero_timings(&mut self) {
        self.region_build_ns = 0;
        self.search_ns = 0;
        self.search_stats.elapsed_ns = 0;
    }
}

/// Bookkeeping shared by the recomposition loops.
struct Run<'v, V> {
    view: &'v V,
    strategy: Strategy,
    a: NodeIx,
    b: NodeIx,
    iterations: Vec<IterationRecord>,
    stage_skips: Vec<StageSkip>,
    region_ns: u64,
    search_ns: u64,
    stats: SearchStats,
}

impl<'v, V: NetworkView> Run<'v, V> {
    fn start(view: &'v V, strategy: Strategy, a: NodeIx, b: NodeIx) -> Result<Self> {
        let net = view.network();
        net.check_node(a)?;
        net.check_node(b)?;
        if a == b {
            return Err(SkywayError::Degenerate);
        }
        Ok(Self {
            view,
            strategy,
            a,
            b,
            iterations: Vec::new(),
            stage_skips: Vec::new(),
            region_ns: 0,
            search_ns: 0,
            stats: SearchStats::default(),
        })
    }

    /// Times `f` as region construction.
    fn build<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let out = f(self);
        self.region_ns += t.elapsed().as_nanos() as u64;
        out
    }

    fn allowed_in(&self, region: &Region) -> NodeSet {
        let net = self.view.network();
        let mut set = NodeSet::empty(net.node_count());
        for ix in 0..net.node_count() {
            if region.contains(net.point(ix)) {
                set.insert(ix);
            }
        }
        set.insert(self.a);
        set.insert(self.b);
        set.normalize();
        set
    }

    fn search(&mut self, stage: Stage, region: Region, allowed: Option<&NodeSet>, added_nodes: usize) -> Option<Path> {
        let t = Instant::now();
        let outcome = dijkstra(self.view, self.a, self.b, allowed).expect("endpoints are always allowed");
        self.search_ns += t.elapsed().as_nanos() as u64;
        let (allowed_nodes, allowed_edges) = match allowed {
            Some(set) => (set.len(), induced_edge_count(self.view, set)),
            None => (self.view.node_count(), self.view.edge_count()),
        };
        if let Some((_, s)) = &outcome {
            self.accumulate(s);
        }
        self.iterations.push(IterationRecord {
            stage,
            region,
            allowed_nodes,
            allowed_edges,
            added_nodes,
            found: outcome.is_some(),
        });
        outcome.map(|(p, _)| p)
    }

    fn accumulate(&mut self, s: &SearchStats) {
        self.stats.nodes_considered += s.nodes_considered;
        self.stats.edges_considered += s.edges_considered;
        self.stats.settled += s.settled;
        self.stats.elapsed_ns += s.elapsed_ns;
    }

    fn finish(self, path: Option<Path>, fell_back_to_global: bool) -> RecompositionResult {
        RecompositionResult {
            strategy: self.strategy,
            source: self.a,
            target: self.b,
            path,
            iterations: self.iterations,
            fell_back_to_global,
            stage_skips: self.stage_skips,
            region_build_ns: self.region_ns,
            search_ns: self.search_ns,
            search_stats: self.stats,
        }
    }

    fn global(mut self) -> RecompositionResult {
        let path = self.search(Stage::Global, Region::All, None, 0);
        self.finish(path, true)
    }
}

/// Circle around the segment midpoint, radius starting at `|ab|` and growing
/// by a fifth of the network size until it passes half the network size.
pub fn radius_recompose<V: NetworkView>(view: &V, a: NodeIx, b: NodeIx) -> Result<RecompositionResult> {
    let mut run = Run::start(view, Strategy::Radius, a, b)?;
    let net = view.network();
    let (pa, pb) = (net.point(a), net.point(b));
    let size = net.network_size();
    let mut radius = pa.dist(pb);
    loop {
        let (region, allowed) = run.build(|run| {
            let region = Region::Circle(build_circle(pa, pb, radius).expect("positive radius"));
            let allowed = run.allowed_in(&region);
            (region, allowed)
        });
        if let Some(path) = run.search(Stage::Circle, region, Some(&allowed), 0) {
            return Ok(run.finish(Some(path), false));
        }
        radius += RADIUS_STEP_FRAC * size;
        if radius > RADIUS_CAP_FRAC * size {
            return Ok(run.global());
        }
    }
}

/// Squares around `a`, `b` and their neighbors, sized by the density class
/// of each node's cell; `DO` grows by one cell per failed iteration.
pub fn cell_density_recompose<V: NetworkView>(
    view: &V,
    a: NodeIx,
    b: NodeIx,
    cell_size: f64,
) -> Result<RecompositionResult> {
    let mut run = Run::start(view, Strategy::CellDensity, a, b)?;
    let net = view.network();
    let n = net.node_count();
    let (grid, seeds) = run.build(|_| -> Result<_> {
        let grid = build_cell_grid(net, cell_size)?;
        let mut nn: Vec<NodeIx> = [a, b]
            .into_iter()
            .chain(view.neighbors(a).map(|(w, _)| w))
            .chain(view.neighbors(b).map(|(w, _)| w))
            .collect();
        nn.sort_unstable();
        nn.dedup();
        let seeds: Vec<_> = nn.iter().map(|&ix| net.point(ix)).collect();
        Ok((grid, seeds))
    })?;

    let mut do_size = cell_size;
    loop {
        let (region, allowed) = run.build(|run| {
            let region = build_partial_areas(&seeds, &grid, do_size).expect("seeds and DO are valid");
            let Region::Squares { squares } = &region else { unreachable!() };
            let mut allowed = NodeSet::empty(n);
            allowed.insert(run.a);
            allowed.insert(run.b);
            grid.collect_in_squares(net, squares, &mut allowed);
            (region, allowed)
        });
        if allowed.len() == n {
            // the union has swallowed the whole network
            return Ok(run.global());
        }
        if let Some(path) = run.search(Stage::Squares, region, Some(&allowed), 0) {
            return Ok(run.finish(Some(path), false));
        }
        do_size += cell_size;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseOptions {
    /// Corridor half-width as a fraction of `|ab|`.
    pub val_frac: f64,
    pub skip_stages: bool,
}

impl Default for TwoPhaseOptions {
    fn default() -> Self {
        Self {
            val_frac: DEFAULT_VAL_FRAC,
            skip_stages: true,
        }
    }
}

/// Phase 1 searches the triangle, midpoint rhombus and rectangle around the
/// segment, skipping a stage whose node count falls below its share of the
/// rectangle's. Phase 2 grows the rectangle's node set by each member's
/// closest graph neighbor until a path appears or half the network is in.
pub fn two_phased_recompose<V: NetworkView>(
    view: &V,
    a: NodeIx,
    b: NodeIx,
    opts: TwoPhaseOptions,
) -> Result<RecompositionResult> {
    if !(opts.val_frac > 0.0) {
        return Err(SkywayError::InvalidParams("val_frac must be positive".into()));
    }
    let mut run = Run::start(view, Strategy::TwoPhased, a, b)?;
    let net = view.network();
    let n = net.node_count();
    let (pa, pb) = (net.point(a), net.point(b));

    let (regions, stage_nodes) = run.build(|_| -> Result<_> {
        let regions = build_rhombus_regions(net, pa, pb, opts.val_frac * pa.dist(pb))?;
        let mut tri = Vec::new();
        let mut rh = Vec::new();
        let mut rect = Vec::new();
        for ix in 0..n {
            let p = net.point(ix);
            if !regions.rectangle.contains(p) {
                continue;
            }
            rect.push(ix);
            if regions.rhombus.contains(p) {
                rh.push(ix);
                if regions.triangle.contains(p) {
                    tri.push(ix);
                }
            }
        }
        Ok((regions, [tri, rh, rect]))
    })?;

    let rect_count = stage_nodes[2].len();
    let polygons = [&regions.triangle, &regions.rhombus, &regions.rectangle];
    for (k, &(stage, frac)) in Stage::PHASE_ONE.iter().enumerate() {
        let count = stage_nodes[k].len();
        let threshold = frac * rect_count as f64;
        let skipped = opts.skip_stages && (count as f64) < threshold;
        run.stage_skips.push(StageSkip {
            stage,
            skipped,
            node_count: count,
            threshold,
        });
        if skipped {
            continue;
        }
        let allowed = run.build(|run| {
            let mut set = NodeSet::from_members(n, stage_nodes[k].iter().copied());
            set.insert(run.a);
            set.insert(run.b);
            set.normalize();
            set
        });
        let region = Region::Polygon(polygons[k].clone());
        if let Some(path) = run.search(stage, region, Some(&allowed), 0) {
            return Ok(run.finish(Some(path), false));
        }
    }

    let mut allowed = run.build(|run| {
        let mut set = NodeSet::from_members(n, stage_nodes[2].iter().copied());
        set.insert(run.a);
        set.insert(run.b);
        set.normalize();
        set
    });
    let mut grown: Vec<NodeIx> = Vec::new();
    loop {
        let added = run.build(|_| grow_by_closest_neighbor(view, &mut allowed));
        grown.extend_from_slice(&added);
        if added.is_empty() || allowed.len() as f64 >= GROWTH_CAP_FRAC * n as f64 {
            return Ok(run.global());
        }
        let region = Region::Grown {
            base: Box::new(Region::Polygon(regions.rectangle.clone())),
            points: grown.iter().map(|&ix| net.point(ix)).collect(),
            nodes: grown.clone(),
        };
        if let Some(path) = run.search(Stage::Growth, region, Some(&allowed), added.len()) {
            return Ok(run.finish(Some(path), false));
        }
    }
}

/// Adds, for each current member in ascending order, its closest graph
/// neighbor (shortest edge, then smaller index) that is not yet a member.
pub fn grow_by_closest_neighbor<V: NetworkView>(view: &V, set: &mut NodeSet) -> Vec<NodeIx> {
    let snapshot = set.members().to_vec();
    let mut added = Vec::new();
    for m in snapshot {
        let closest = view
            .neighbors(m)
            .filter(|&(w, _)| !set.contains(w))
            .min_by(|x, y| x.1.length.total_cmp(&y.1.length).then(x.0.cmp(&y.0)))
            .map(|(w, _)| w);
        if let Some(w) = closest {
            set.insert(w);
            added.push(w);
        }
    }
    set.normalize();
    added
}

/// Plain search over the whole view, recorded as one iteration.
pub fn global_recompose<V: NetworkView>(view: &V, a: NodeIx, b: NodeIx) -> Result<RecompositionResult> {
    let net = view.network();
    net.check_node(a)?;
    net.check_node(b)?;
    let mut run = Run {
        view,
        strategy: Strategy::Global,
        a,
        b,
        iterations: Vec::new(),
        stage_skips: Vec::new(),
        region_ns: 0,
        search_ns: 0,
        stats: SearchStats::default(),
    };
    let path = run.search(Stage::Global, Region::All, None, 0);
    Ok(run.finish(path, false))
}

/// Replaces the plan's failed segment with `subpath` and reschedules every
/// service from the failed segment onward. The result is a walk: nodes may
/// repeat across the splice.
pub fn splice_plan<V: NetworkView>(
    view: &V,
    original: &CompositionPlan,
    failure: &FailureEvent,
    subpath: &Path,
) -> Result<CompositionPlan> {
    let (fu, fv) = failure.failed_edge;
    let k = original
        .segment_position(fu, fv)
        .ok_or_else(|| SkywayError::Mismatch(format!("segment {fu}-{fv} is not part of the plan")))?;
    let seg = &original.services[k];
    if subpath.source() != seg.start_location || subpath.target() != seg.end_location {
        return Err(SkywayError::Mismatch(format!(
            "detour runs {}->{} but the failed segment is {}->{}",
            subpath.source(),
            subpath.target(),
            seg.start_location,
            seg.end_location
        )));
    }
    let next_id = original.services.iter().map(|s| s.service_id).max().unwrap_or(0) + 1;
    let detour = services_along(view, subpath, &seg.drone, next_id, seg.start_time, original.speed);
    let shift = detour.last().map_or(seg.start_time, |s| s.end_time) - seg.end_time;

    let mut services = original.services[..k].to_vec();
    services.extend(detour);
    services.extend(original.services[k + 1..].iter().cloned().map(|mut s| {
        s.start_time += shift;
        s.end_time += shift;
        s
    }));
    Ok(CompositionPlan {
        request: original.request,
        services,
        total_length: original.total_length - seg.length() + subpath.total_length,
        speed: original.speed,
    })
}

/// One failure to replay: a network and the edge that broke.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub network: SkywayNetwork,
    pub failed_edge: (NodeIx, NodeIx),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SkipVerdict {
    /// The skipped stage held no path, so searching it would have been wasted.
    Effective,
    /// The skipped stage held a path the skipping run passed over.
    Ineffective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipCase {
    pub scenario: usize,
    pub failed_edge: (NodeIx, NodeIx),
    pub stage: Stage,
    pub verdict: SkipVerdict,
    pub allowed_with_skip: usize,
    pub allowed_without_skip: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipReport {
    pub scenarios: usize,
    /// Scenarios in which at least one stage was skipped.
    pub scenarios_with_skips: usize,
    pub effective: usize,
    pub ineffective: usize,
    /// Mean final allowed-node count of skipping runs whose skips were all effective.
    pub mean_allowed_effective: Option<f64>,
    /// Same, for skipping runs with at least one ineffective skip.
    pub mean_allowed_ineffective: Option<f64>,
    /// `mean_allowed_effective / mean_allowed_ineffective`.
    pub allowed_ratio: Option<f64>,
    pub cases: Vec<SkipCase>,
}

/// Runs the two-phased search on each scenario with and without stage
/// skipping and classifies every skip against the no-skip run.
pub fn analyze_stage_skipping(scenarios: &[Scenario], val_frac: f64) -> Result<SkipReport> {
    let mut cases = Vec::new();
    let mut effective_runs = Vec::new();
    let mut ineffective_runs = Vec::new();
    for (k, sc) in scenarios.iter().enumerate() {
        let (u, v) = sc.failed_edge;
        let view = sc.network.with_failed_edge(u, v)?;
        let with = two_phased_recompose(&view, u, v, TwoPhaseOptions { val_frac, skip_stages: true })?;
        let without = two_phased_recompose(&view, u, v, TwoPhaseOptions { val_frac, skip_stages: false })?;
        let skipped: Vec<Stage> = with.skipped_stages().collect();
        if skipped.is_empty() {
            continue;
        }
        let mut all_effective = true;
        for stage in skipped {
            let verdict = if stage_held_path(&without, stage) {
                all_effective = false;
                SkipVerdict::Ineffective
            } else {
                SkipVerdict::Effective
            };
            cases.push(SkipCase {
                scenario: k,
                failed_edge: sc.failed_edge,
                stage,
                verdict,
                allowed_with_skip: with.final_allowed_nodes(),
                allowed_without_skip: without.final_allowed_nodes(),
            });
        }
        let bucket = if all_effective { &mut effective_runs } else { &mut ineffective_runs };
        bucket.push(with.final_allowed_nodes() as f64);
    }
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    let mean_allowed_effective = mean(&effective_runs);
    let mean_allowed_ineffective = mean(&ineffective_runs);
    let effective = cases.iter().filter(|c| c.verdict == SkipVerdict::Effective).count();
    Ok(SkipReport {
        scenarios: scenarios.len(),
        scenarios_with_skips: effective_runs.len() + ineffective_runs.len(),
        effective,
        ineffective: cases.len() - effective,
        mean_allowed_effective,
        mean_allowed_ineffective,
        allowed_ratio: mean_allowed_effective.zip(mean_allowed_ineffective).map(|(e, i)| e / i),
        cases,
    })
}

/// Whether a no-skip run's search of `stage` found a path. A run that
/// stopped before reaching `stage` found one in a smaller, nested stage.
fn stage_held_path(no_skip: &RecompositionResult, stage: Stage) -> bool {
    match no_skip.iterations.iter().find(|it| it.stage == stage) {
        Some(it) => it.found,
        None => no_skip.iterations.last().is_some_and(|it| it.found && !no_skip.fell_back_to_global),
    }
}

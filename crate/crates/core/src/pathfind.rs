//! Instrumented shortest-path engines over a [`NetworkView`].
//!
//! Ties are broken by the smaller node index everywhere so runs are
//! reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::error::{Result, SkywayError};
use crate::network::{NetworkView, NodeIx, NodeSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeIx>,
    pub total_length: f64,
}

impl Path {
    pub fn trivial(node: NodeIx) -> Self {
        Self {
            nodes: vec![node],
            total_length: 0.0,
        }
    }

    pub fn source(&self) -> NodeIx {
        self.nodes[0]
    }

    pub fn target(&self) -> NodeIx {
        *self.nodes.last().expect("paths are non-empty")
    }

    /// Consecutive node pairs.
    pub fn segments(&self) -> impl Iterator<Item = (NodeIx, NodeIx)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn uses_edge(&self, u: NodeIx, v: NodeIx) -> bool {
        self.segments().any(|(x, y)| (x, y) == (u, v) || (x, y) == (v, u))
    }

    /// Sums edge lengths along `nodes` in order; `None` if a hop is missing.
    pub fn from_nodes<V: NetworkView>(view: &V, nodes: Vec<NodeIx>) -> Option<Self> {
        let mut total = 0.0;
        for w in nodes.windows(2) {
            let (_, e) = view.neighbors(w[0]).find(|&(x, _)| x == w[1])?;
            total += e.length;
        }
        Some(Self {
            nodes,
            total_length: total,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_considered: usize,
    pub edges_considered: usize,
    pub settled: usize,
    pub elapsed_ns: u64,
}

pub type SearchOutcome = Option<(Path, SearchStats)>;

#[derive(Debug, Clone, Copy, PartialEq)]
struct QueueEntry {
    priority: f64,
    node: NodeIx,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (priority, node)
        other
            .priority
            .total_cmp(&self.priority)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Label {
    dist: f64,
    pred: Option<NodeIx>,
    settled: bool,
}

fn check_endpoints<V: NetworkView>(view: &V, src: NodeIx, dst: NodeIx, allowed: Option<&NodeSet>) -> Result<()> {
    let n = view.node_count();
    for (name, ix) in [("source", src), ("destination", dst)] {
        if ix >= n {
            return Err(SkywayError::UnknownNode(format!("{name} index {ix}")));
        }
        if let Some(set) = allowed {
            if !set.contains(ix) {
                return Err(SkywayError::Precondition(format!(
                    "{name} {ix} is outside the allowed node set"
                )));
            }
        }
    }
    Ok(())
}

fn best_first<V, H>(view: &V, src: NodeIx, dst: NodeIx, allowed: Option<&NodeSet>, heuristic: H) -> SearchOutcome
where
    V: NetworkView,
    H: Fn(NodeIx) -> f64,
{
    let start = Instant::now();
    let mut stats = SearchStats::default();
    let mut labels: FxHashMap<NodeIx, Label> = FxHashMap::default();
    let mut heap = BinaryHeap::new();
    labels.insert(
        src,
        Label {
            dist: 0.0,
            pred: None,
            settled: false,
        },
    );
    stats.nodes_considered = 1;
    heap.push(QueueEntry {
        priority: heuristic(src),
        node: src,
    });

    let mut reached = false;
    while let Some(QueueEntry { node, .. }) = heap.pop() {
        let label = labels.get_mut(&node).expect("queued nodes are labelled");
        if label.settled {
            continue;
        }
        label.settled = true;
        let g = label.dist;
        stats.settled += 1;
        if node == dst {
            reached = true;
            break;
        }
        for (next, edge) in view.neighbors(node) {
            if allowed.is_some_and(|set| !set.contains(next)) {
                continue;
            }
            stats.edges_considered += 1;
            let cand = g + edge.length;
            match labels.get_mut(&next) {
                Some(l) if l.settled || l.dist <= cand => continue,
                Some(l) => {
                    l.dist = cand;
                    l.pred = Some(node);
                }
                None => {
                    stats.nodes_considered += 1;
                    labels.insert(
                        next,
                        Label {
                            dist: cand,
                            pred: Some(node),
                            settled: false,
                        },
                    );
                }
            }
            heap.push(QueueEntry {
                priority: cand + heuristic(next),
                node: next,
            });
        }
    }
    stats.elapsed_ns = start.elapsed().as_nanos() as u64;
    if !reached {
        return None;
    }
    let mut nodes = vec![dst];
    let mut cur = dst;
    while let Some(p) = labels[&cur].pred {
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    let total_length = labels[&dst].dist;
    Some((Path { nodes, total_length }, stats))
}

/// Shortest path using only nodes in `allowed` (all nodes when `None`).
/// An edge is usable only when both endpoints are allowed.
pub fn dijkstra<V: NetworkView>(view: &V, src: NodeIx, dst: NodeIx, allowed: Option<&NodeSet>) -> Result<SearchOutcome> {
    check_endpoints(view, src, dst, allowed)?;
    Ok(best_first(view, src, dst, allowed, |_| 0.0))
}

/// A* with the straight-line distance to `dst` as heuristic.
pub fn astar<V: NetworkView>(view: &V, src: NodeIx, dst: NodeIx) -> Result<SearchOutcome> {
    check_endpoints(view, src, dst, None)?;
    let goal = view.point(dst);
    Ok(best_first(view, src, dst, None, |ix| view.point(ix).dist(goal)))
}

/// Label-correcting search: at most `|V| - 1` relaxation rounds over every
/// edge, stopping early once a round changes nothing.
pub fn bellman_ford<V: NetworkView>(view: &V, src: NodeIx, dst: NodeIx) -> Result<SearchOutcome> {
    check_endpoints(view, src, dst, None)?;
    let start = Instant::now();
    let n = view.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<NodeIx>> = vec![None; n];
    let mut stats = SearchStats::default();
    dist[src] = 0.0;
    for _ in 1..n.max(2) {
        let mut changed = false;
        for u in 0..n {
            let du = dist[u];
            if du == f64::INFINITY {
                continue;
            }
            for (v, e) in view.neighbors(u) {
                stats.edges_considered += 1;
                let cand = du + e.length;
                if cand < dist[v] {
                    dist[v] = cand;
                    pred[v] = Some(u);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    stats.nodes_considered = dist.iter().filter(|d| d.is_finite()).count();
    stats.settled = stats.nodes_considered;
    stats.elapsed_ns = start.elapsed().as_nanos() as u64;
    if dist[dst] == f64::INFINITY {
        return Ok(None);
    }
    let mut nodes = vec![dst];
    let mut cur = dst;
    while let Some(p) = pred[cur] {
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    Ok(Some((
        Path {
            nodes,
            total_length: dist[dst],
        },
        stats,
    )))
}

pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Exhaustive simple-path enumeration; a test oracle for small graphs.
pub fn brute_force_shortest<V: NetworkView>(
    view: &V,
    src: NodeIx,
    dst: NodeIx,
    allowed: Option<&NodeSet>,
) -> Result<Option<Path>> {
    let size = allowed.map_or(view.node_count(), NodeSet::len);
    if size > BRUTE_FORCE_LIMIT {
        return Err(SkywayError::TooLarge {
            limit: BRUTE_FORCE_LIMIT,
            actual: size,
        });
    }
    check_endpoints(view, src, dst, allowed)?;

    struct Dfs<'a, V> {
        view: &'a V,
        allowed: Option<&'a NodeSet>,
        dst: NodeIx,
        on_path: Vec<bool>,
        stack: Vec<NodeIx>,
        best: Option<Path>,
    }

    impl<V: NetworkView> Dfs<'_, V> {
        fn walk(&mut self, u: NodeIx, len: f64) {
            if u == self.dst {
                if self.best.as_ref().is_none_or(|b| len < b.total_length) {
                    self.best = Some(Path {
                        nodes: self.stack.clone(),
                        total_length: len,
                    });
                }
                return;
            }
            let next: Vec<_> = self.view.neighbors(u).map(|(w, e)| (w, e.length)).collect();
            for (w, l) in next {
                if self.on_path[w] || self.allowed.is_some_and(|s| !s.contains(w)) {
                    continue;
                }
                self.on_path[w] = true;
                self.stack.push(w);
                self.walk(w, len + l);
                self.stack.pop();
                self.on_path[w] = false;
            }
        }
    }

    let mut dfs = Dfs {
        view,
        allowed,
        dst,
        on_path: vec![false; view.node_count()],
        stack: vec![src],
        best: None,
    };
    dfs.on_path[src] = true;
    dfs.walk(src, 0.0);
    Ok(dfs.best)
}

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Node, Point, SkywayNetwork};
use crate::error::{Result, SkywayError};

/// Random network parameters. Ranges used by the benchmark: 100-5000 nodes,
/// connectivity 5-20, size 1000-10000, neighbor radius 0.05-0.3 of the size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub num_nodes: usize,
    pub max_connectivity: usize,
    pub network_size: f64,
    pub neighbor_radius_frac: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_nodes < 2 {
            return Err(SkywayError::InvalidParams("num_nodes must be >= 2".into()));
        }
        if self.max_connectivity < 1 {
            return Err(SkywayError::InvalidParams(
                "max_connectivity must be >= 1".into(),
            ));
        }
        if !(self.network_size > 0.0 && self.network_size.is_finite()) {
            return Err(SkywayError::InvalidParams(
                "network_size must be positive".into(),
            ));
        }
        if !(self.neighbor_radius_frac > 0.0 && self.neighbor_radius_frac <= 1.0) {
            return Err(SkywayError::InvalidParams(
                "neighbor_radius_frac must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    pub fn neighbor_radius(&self) -> f64 {
        self.neighbor_radius_frac * self.network_size
    }
}

/// Uniform points in `[0, size]^2`, each linked to at most `max_connectivity`
/// nearest nodes within the neighbor radius (symmetric union), restricted to
/// the largest connected component and re-indexed densely.
pub fn generate_network(params: &GenParams) -> Result<SkywayNetwork> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let size = params.network_size;
    let points: Vec<Point> = (0..params.num_nodes)
        .map(|_| Point::new(rng.random::<f64>() * size, rng.random::<f64>() * size))
        .collect();

    let grid = PointGrid::new(&points, size);
    let radius = params.neighbor_radius();
    let mut edges = BTreeSet::new();
    for (i, &p) in points.iter().enumerate() {
        for j in grid.nearest(&points, i, p, params.max_connectivity, radius) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    if edges.is_empty() {
        return Err(SkywayError::EmptyGraph);
    }

    let keep = largest_component(points.len(), &edges);
    let mut new_ix = vec![usize::MAX; points.len()];
    let mut nodes = Vec::new();
    for (old, &p) in points.iter().enumerate() {
        if keep[old] {
            new_ix[old] = nodes.len();
            nodes.push(Node {
                id: nodes.len() as u64,
                x: p.x,
                y: p.y,
            });
        }
    }
    let kept_edges: Vec<_> = edges
        .iter()
        .filter(|&&(u, _)| keep[u])
        .map(|&(u, v)| (new_ix[u] as u64, new_ix[v] as u64, None))
        .collect();
    Ok(SkywayNetwork::from_parts(nodes, kept_edges)?.with_seed(Some(params.seed)))
}

fn largest_component(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut comp = vec![usize::MAX; n];
    let mut best = (0, 0);
    let mut stack = Vec::new();
    let mut next = 0;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut size = 0;
        comp[start] = next;
        stack.push(start);
        while let Some(u) = stack.pop() {
            size += 1;
            for &w in &adj[u] {
                if comp[w] == usize::MAX {
                    comp[w] = next;
                    stack.push(w);
                }
            }
        }
        // strict: the earliest component wins ties
        if size > best.1 {
            best = (next, size);
        }
        next += 1;
    }
    comp.into_iter().map(|c| c == best.0).collect()
}

/// Uniform bucket grid for k-nearest queries (about two points per cell).
struct PointGrid {
    cell: f64,
    side: usize,
    buckets: Vec<Vec<usize>>,
}

impl PointGrid {
    fn new(points: &[Point], size: f64) -> Self {
        let side = ((points.len() as f64 / 2.0).sqrt().ceil() as usize).max(1);
        let cell = size / side as f64;
        let mut buckets = vec![Vec::new(); side * side];
        let mut grid = Self {
            cell,
            side,
            buckets: Vec::new(),
        };
        for (i, &p) in points.iter().enumerate() {
            let (r, c) = grid.cell_of(p);
            buckets[r * side + c].push(i);
        }
        grid.buckets = buckets;
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64| ((v / self.cell).floor().max(0.0) as usize).min(self.side - 1);
        (clamp(p.y), clamp(p.x))
    }

    /// Up to `k` nearest other points within `radius`, ties by index.
    fn nearest(&self, points: &[Point], me: usize, p: Point, k: usize, radius: f64) -> Vec<usize> {
        let (r0, c0) = self.cell_of(p);
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for ring in 0..self.side {
            let bound = if best.len() == k {
                best[k - 1].0.min(radius)
            } else {
                radius
            };
            // points in ring `ring` are at least (ring - 1) cells away
            if ring >= 1 && (ring - 1) as f64 * self.cell > bound {
                break;
            }
            for (r, c) in ring_cells(r0, c0, ring, self.side) {
                for &j in &self.buckets[r * self.side + c] {
                    if j == me {
                        continue;
                    }
                    let d = p.dist(points[j]);
                    if d <= 0.0 || d > radius {
                        continue;
                    }
                    let key = (d, j);
                    if best.len() == k && cmp_key(&key, &best[k - 1]).is_ge() {
                        continue;
                    }
                    let at = best.partition_point(|b| cmp_key(b, &key).is_lt());
                    best.insert(at, key);
                    best.truncate(k);
                }
            }
        }
        best.into_iter().map(|(_, j)| j).collect()
    }
}

fn cmp_key(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Cells at Chebyshev distance exactly `ring` from `(r0, c0)`, clipped to the grid.
fn ring_cells(r0: usize, c0: usize, ring: usize, side: usize) -> impl Iterator<Item = (usize, usize)> {
    let (r0, c0, ring, side) = (r0 as isize, c0 as isize, ring as isize, side as isize);
    (r0 - ring..=r0 + ring)
        .flat_map(move |r| (c0 - ring..=c0 + ring).map(move |c| (r, c)))
        .filter(move |&(r, c)| {
            (r - r0).abs().max((c - c0).abs()) == ring && r >= 0 && c >= 0 && r < side && c < side
        })
        .map(|(r, c)| (r as usize, c as usize))
}

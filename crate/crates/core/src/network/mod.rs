//! Skyway network data model.
//!
//! A [`SkywayNetwork`] is an undirected geometric graph: rooftop nodes with
//! planar coordinates joined by line-of-sight segments whose length is the
//! Euclidean distance between the endpoints. Nodes carry an external integer
//! `id`; every algorithm in this crate addresses nodes by their dense
//! position ([`NodeIx`]) in the id-sorted node list.

mod generate;
mod io;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SkywayError};

pub use generate::{generate_network, GenParams};
pub use io::{load_network, save_network};

/// Dense node position, `0..net.node_count()`.
pub type NodeIx = usize;
pub type EdgeIx = usize;

/// Relative tolerance used when checking stored edge lengths.
pub const LENGTH_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Rotates counterclockwise about `pivot`.
    pub fn rotate_about(self, pivot: Point, theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        let d = self.sub(pivot);
        Point::new(pivot.x + c * d.x - s * d.y, pivot.y + s * d.x + c * d.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: u64,
    pub x: f64,
    pub y: f64,
}

impl Node {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// A skyway segment. `cost` and `battery` are carried data only; routing
/// uses `length`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeIx,
    pub v: NodeIx,
    pub length: f64,
    pub cost: f64,
    pub battery: f64,
}

impl Edge {
    /// Edge with cost and battery defaulted to the length (1 energy unit per length unit).
    pub fn with_length(u: NodeIx, v: NodeIx, length: f64) -> Self {
        Self {
            u,
            v,
            length,
            cost: length,
            battery: length,
        }
    }

    pub fn other(&self, ix: NodeIx) -> NodeIx {
        if self.u == ix {
            self.v
        } else {
            self.u
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneProfile {
    pub id: String,
    pub battery_capacity: f64,
    pub payload_capacity: f64,
}

impl DroneProfile {
    pub fn new(id: impl Into<String>, battery_capacity: f64, payload_capacity: f64) -> Result<Self> {
        if !(battery_capacity > 0.0 && payload_capacity > 0.0) {
            return Err(SkywayError::InvalidParams(
                "drone capacities must be positive".into(),
            ));
        }
        Ok(Self {
            id: id.into(),
            battery_capacity,
            payload_capacity,
        })
    }
}

impl Default for DroneProfile {
    fn default() -> Self {
        Self {
            id: "drone-0".into(),
            battery_capacity: 1.0e4,
            payload_capacity: 2.0,
        }
    }
}

/// Immutable skyway graph.
#[derive(Debug, Clone)]
pub struct SkywayNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeIx, EdgeIx)>>,
    index: HashMap<u64, NodeIx>,
    bbox: BBox,
    seed: Option<u64>,
}

impl PartialEq for SkywayNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl SkywayNetwork {
    /// Builds and validates a network. Nodes are sorted by id; edge endpoints
    /// are node ids. A missing length is computed from the coordinates.
    pub fn from_parts(
        nodes: Vec<Node>,
        edges: impl IntoIterator<Item = (u64, u64, Option<f64>)>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(SkywayError::Validation("node list is empty".into()));
        }
        let mut nodes = nodes;
        nodes.sort_by_key(|n| n.id);
        let mut index = HashMap::with_capacity(nodes.len());
        for (ix, n) in nodes.iter().enumerate() {
            if !(n.x.is_finite() && n.y.is_finite()) {
                return Err(SkywayError::Validation(format!(
                    "node {}: coordinates must be finite",
                    n.id
                )));
            }
            if index.insert(n.id, ix).is_some() {
                return Err(SkywayError::Validation(format!("duplicate node id {}", n.id)));
            }
        }

        let mut adjacency: Vec<Vec<(NodeIx, EdgeIx)>> = vec![Vec::new(); nodes.len()];
        let mut out_edges = Vec::new();
        for (k, (uid, vid, length)) in edges.into_iter().enumerate() {
            let lookup = |id: u64, field: &str| {
                index.get(&id).copied().ok_or_else(|| {
                    SkywayError::Validation(format!("edges[{k}].{field}: unknown node id {id}"))
                })
            };
            let u = lookup(uid, "u")?;
            let v = lookup(vid, "v")?;
            if u == v {
                return Err(SkywayError::Validation(format!(
                    "edges[{k}]: self-loop on node {uid}"
                )));
            }
            let euclid = nodes[u].point().dist(nodes[v].point());
            if euclid <= 0.0 {
                return Err(SkywayError::Validation(format!(
                    "edges[{k}]: endpoints {uid} and {vid} coincide"
                )));
            }
            let length = match length {
                None => euclid,
                Some(len) => {
                    if !((len - euclid).abs() <= LENGTH_RTOL * euclid) {
                        return Err(SkywayError::Validation(format!(
                            "edges[{k}].length: {len} differs from endpoint distance {euclid}"
                        )));
                    }
                    len
                }
            };
            if adjacency[u].iter().any(|&(w, _)| w == v) {
                return Err(SkywayError::Validation(format!(
                    "edges[{k}]: duplicate edge {uid}-{vid}"
                )));
            }
            let e = out_edges.len();
            out_edges.push(Edge::with_length(u.min(v), u.max(v), length));
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        if out_edges.is_empty() {
            return Err(SkywayError::Validation("network has no edges".into()));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let bbox = nodes.iter().fold(
            BBox {
                min_x: f64::INFINITY,
                min_y: f64::INFINITY,
                max_x: f64::NEG_INFINITY,
                max_y: f64::NEG_INFINITY,
            },
            |b, n| BBox {
                min_x: b.min_x.min(n.x),
                min_y: b.min_y.min(n.y),
                max_x: b.max_x.max(n.x),
                max_y: b.max_y.max(n.y),
            },
        );

        Ok(Self {
            nodes,
            edges: out_edges,
            adjacency,
            index,
            bbox,
            seed: None,
        })
    }

    pub(crate) fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, ix: NodeIx) -> &Node {
        &self.nodes[ix]
    }

    pub fn point(&self, ix: NodeIx) -> Point {
        self.nodes[ix].point()
    }

    pub fn index_of(&self, id: u64) -> Option<NodeIx> {
        self.index.get(&id).copied()
    }

    pub fn id_of(&self, ix: NodeIx) -> u64 {
        self.nodes[ix].id
    }

    pub fn bbox(&self) -> BBox {
        self.bbox
    }

    /// `max(bbox width, bbox height)`.
    pub fn network_size(&self) -> f64 {
        self.bbox.width().max(self.bbox.height())
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn adjacency(&self, ix: NodeIx) -> &[(NodeIx, EdgeIx)] {
        &self.adjacency[ix]
    }

    pub fn find_edge(&self, u: NodeIx, v: NodeIx) -> Option<&Edge> {
        self.adjacency
            .get(u)?
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|k| &self.edges[self.adjacency[u][k].1])
    }

    /// Read-only view with the segment `u`-`v` removed in both directions.
    pub fn with_failed_edge(&self, u: NodeIx, v: NodeIx) -> Result<FailedEdgeView<'_>> {
        if u >= self.node_count() || v >= self.node_count() || self.find_edge(u, v).is_none() {
            return Err(SkywayError::UnknownEdge(u, v));
        }
        Ok(FailedEdgeView {
            base: self,
            failed: (u.min(v), u.max(v)),
        })
    }

    pub fn check_node(&self, ix: NodeIx) -> Result<()> {
        if ix < self.node_count() {
            Ok(())
        } else {
            Err(SkywayError::UnknownNode(format!("index {ix}")))
        }
    }
}

/// Read access to a (possibly degraded) skyway network.
pub trait NetworkView {
    fn network(&self) -> &SkywayNetwork;

    fn neighbors(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, &Edge)> + '_;

    fn has_edge(&self, u: NodeIx, v: NodeIx) -> bool;

    fn edge_count(&self) -> usize;

    fn node_count(&self) -> usize {
        self.network().node_count()
    }

    fn point(&self, ix: NodeIx) -> Point {
        self.network().point(ix)
    }
}

impl NetworkView for SkywayNetwork {
    fn network(&self) -> &SkywayNetwork {
        self
    }

    fn neighbors(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, &Edge)> + '_ {
        self.adjacency[ix].iter().map(|&(w, e)| (w, &self.edges[e]))
    }

    fn has_edge(&self, u: NodeIx, v: NodeIx) -> bool {
        self.find_edge(u, v).is_some()
    }

    fn edge_count(&self) -> usize {
        self.edges.len()
    }
}

/// The base network minus one failed segment. Borrows the base network.
#[derive(Debug, Clone, Copy)]
pub struct FailedEdgeView<'a> {
    base: &'a SkywayNetwork,
    failed: (NodeIx, NodeIx),
}

impl<'a> FailedEdgeView<'a> {
    pub fn base(&self) -> &'a SkywayNetwork {
        self.base
    }

    /// Failed segment as `(min, max)` node indices.
    pub fn failed_edge(&self) -> (NodeIx, NodeIx) {
        self.failed
    }

    fn is_failed(&self, u: NodeIx, v: NodeIx) -> bool {
        (u.min(v), u.max(v)) == self.failed
    }
}

impl NetworkView for FailedEdgeView<'_> {
    fn network(&self) -> &SkywayNetwork {
        self.base
    }

    fn neighbors(&self, ix: NodeIx) -> impl Iterator<Item = (NodeIx, &Edge)> + '_ {
        self.base
            .neighbors(ix)
            .filter(move |&(w, _)| !self.is_failed(ix, w))
    }

    fn has_edge(&self, u: NodeIx, v: NodeIx) -> bool {
        !self.is_failed(u, v) && self.base.has_edge(u, v)
    }

    fn edge_count(&self) -> usize {
        self.base.edge_count() - 1
    }
}

/// Set of node indices with O(1) membership, members kept in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSet {
    mask: Vec<bool>,
    members: Vec<NodeIx>,
}

impl NodeSet {
    pub fn empty(universe: usize) -> Self {
        Self {
            mask: vec![false; universe],
            members: Vec::new(),
        }
    }

    pub fn full(universe: usize) -> Self {
        Self {
            mask: vec![true; universe],
            members: (0..universe).collect(),
        }
    }

    pub fn from_members(universe: usize, members: impl IntoIterator<Item = NodeIx>) -> Self {
        let mut set = Self::empty(universe);
        for m in members {
            set.insert(m);
        }
        set.members.sort_unstable();
        set
    }

    pub fn contains(&self, ix: NodeIx) -> bool {
        self.mask.get(ix).copied().unwrap_or(false)
    }

    /// Inserts `ix`; members lose their ordering until [`NodeSet::normalize`].
    pub fn insert(&mut self, ix: NodeIx) -> bool {
        if self.mask[ix] {
            return false;
        }
        self.mask[ix] = true;
        self.members.push(ix);
        true
    }

    pub fn normalize(&mut self) {
        self.members.sort_unstable();
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.mask.len()
    }

    pub fn members(&self) -> &[NodeIx] {
        &self.members
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }
}

/// Number of view edges with both endpoints in `set`.
pub fn induced_edge_count<V: NetworkView>(view: &V, set: &NodeSet) -> usize {
    let twice: usize = set
        .members()
        .iter()
        .map(|&m| view.neighbors(m).filter(|&(w, _)| set.contains(w)).count())
        .sum();
    twice / 2
}

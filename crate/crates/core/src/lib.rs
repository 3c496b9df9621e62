//! Skyway network routing with reactive recomposition after a segment fails.
//!
//! A [`SkywayNetwork`] is an undirected geometric graph of drone skyway
//! segments. When a segment on a delivery plan becomes unavailable, the
//! [`reactive`] module searches for a detour inside a bounded region around
//! the broken segment before giving up and searching the whole network.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod bench;
pub mod error;
pub mod geometry;
pub mod network;
pub mod pathfind;
pub mod reactive;
pub mod service;

pub use error::{Result, SkywayError};
pub use network::{
    generate_network, load_network, save_network, FailedEdgeView, GenParams, NetworkView, Node, NodeIx, NodeSet,
    Point, SkywayNetwork,
};
pub use pathfind::{astar, bellman_ford, brute_force_shortest, dijkstra, Path, SearchStats};
pub use reactive::{
    cell_density_recompose, global_recompose, radius_recompose, two_phased_recompose, RecompositionResult, Strategy,
    TwoPhaseOptions,
};

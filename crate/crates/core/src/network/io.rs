//! Network file format:
//!
//! ```json
//! {"nodes":[{"id":0,"x":0.0,"y":0.0}],
//!  "edges":[{"u":0,"v":1,"length":10.0}],
//!  "meta":{"network_size":10.0,"seed":42}}
//! ```
//!
//! `length` and `meta` are optional on input.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Node, SkywayNetwork};
use crate::error::{Result, SkywayError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    nodes: Vec<Node>,
    edges: Vec<EdgeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<Meta>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    u: u64,
    v: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Meta {
    #[serde(default)]
    network_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

pub fn load_network<R: Read>(source: R) -> Result<SkywayNetwork> {
    let file: NetworkFile = serde_json::from_reader(source).map_err(|e| SkywayError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let seed = file.meta.as_ref().and_then(|m| m.seed);
    let edges = file.edges.into_iter().map(|e| (e.u, e.v, e.length));
    Ok(SkywayNetwork::from_parts(file.nodes, edges)?.with_seed(seed))
}

pub fn save_network<W: Write>(net: &SkywayNetwork, mut sink: W) -> Result<()> {
    let file = NetworkFile {
        nodes: net.nodes().to_vec(),
        edges: net
            .edges()
            .iter()
            .map(|e| EdgeRecord {
                u: net.id_of(e.u),
                v: net.id_of(e.v),
                length: Some(e.length),
            })
            .collect(),
        meta: Some(Meta {
            network_size: Some(net.network_size()),
            seed: net.seed(),
        }),
    };
    serde_json::to_writer(&mut sink, &file)?;
    sink.write_all(b"\n")?;
    Ok(())
}

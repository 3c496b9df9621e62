//! Browser bindings for the skyway demo page in `www/`.
//!
//! The exported functions exchange JSON strings so the page needs no
//! generated TypeScript glue beyond `wasm-bindgen`'s own shim. The plain
//! `*_json` functions hold the logic and are testable off-wasm.

use serde::Serialize;
use skyway_core::geometry::{build_rhombus_regions, ConvexPolygon, Corridor, Region, Side};
use skyway_core::reactive::DEFAULT_CELL_SIZE_FRAC;
use skyway_core::{
    cell_density_recompose, generate_network, global_recompose, radius_recompose, two_phased_recompose, GenParams,
    Point, RecompositionResult, SkywayNetwork, TwoPhaseOptions,
};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct NetworkDoc<'a> {
    size: f64,
    nodes: Vec<[f64; 2]>,
    edges: Vec<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct RecomposeDoc<'a> {
    result: &'a RecompositionResult,
    total_ms: f64,
}

#[derive(Serialize)]
struct CorridorDoc {
    rectangle: ConvexPolygon,
    rhombus: ConvexPolygon,
    triangle: ConvexPolygon,
    areas: [f64; 3],
}

/// A generated network held on the Rust side between calls.
#[wasm_bindgen]
pub struct Demo {
    net: SkywayNetwork,
}

impl Demo {
    pub fn generate(nodes: usize, max_connectivity: usize, size: f64, radius_frac: f64, seed: u64) -> Result<Demo, String> {
        let net = generate_network(&GenParams {
            num_nodes: nodes,
            max_connectivity,
            network_size: size,
            neighbor_radius_frac: radius_frac,
            seed,
        })
        .map_err(|e| e.to_string())?;
        Ok(Demo { net })
    }

    pub fn network_json(&self) -> String {
        let doc = NetworkDoc {
            size: self.net.network_size(),
            nodes: self.net.nodes().iter().map(|n| [n.x, n.y]).collect(),
            edges: self.net.edges().iter().map(|e| [e.u, e.v]).collect(),
            note: None,
        };
        serde_json::to_string(&doc).expect("network serializes")
    }

    /// Fails edge `u`-`v` and recomposes with `algorithm`
    /// (`radius`, `cell-density`, `two-phased` or `global`).
    pub fn recompose_json(&self, u: usize, v: usize, algorithm: &str, val_frac: f64) -> Result<String, String> {
        let view = self.net.with_failed_edge(u, v).map_err(|e| e.to_string())?;
        let started = web_time::Instant::now();
        let result = match algorithm {
            "radius" => radius_recompose(&view, u, v),
            "cell-density" => cell_density_recompose(&view, u, v, DEFAULT_CELL_SIZE_FRAC * self.net.network_size()),
            "two-phased" => two_phased_recompose(&view, u, v, TwoPhaseOptions { val_frac, skip_stages: true }),
            "global" => global_recompose(&view, u, v),
            other => return Err(format!("unknown algorithm `{other}`")),
        }
        .map_err(|e| e.to_string())?;
        let total_ms = started.elapsed().as_secs_f64() * 1e3;
        Ok(serde_json::to_string(&RecomposeDoc { result: &result, total_ms }).expect("result serializes"))
    }

    /// The three two-phase polygons around edge `u`-`v`, triangle on the
    /// denser side.
    pub fn stages_json(&self, u: usize, v: usize, val_frac: f64) -> Result<String, String> {
        let (a, b) = (self.net.point(u), self.net.point(v));
        let r = build_rhombus_regions(&self.net, a, b, val_frac * a.dist(b)).map_err(|e| e.to_string())?;
        let doc = serde_json::json!({
            "regions": [Region::Polygon(r.triangle), Region::Polygon(r.rhombus), Region::Polygon(r.rectangle)],
            "side": r.side,
        });
        Ok(doc.to_string())
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(nodes: usize, max_connectivity: usize, size: f64, radius_frac: f64, seed: u32) -> Result<Demo, JsError> {
        Demo::generate(nodes, max_connectivity, size, radius_frac, u64::from(seed)).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = network)]
    pub fn network_js(&self) -> String {
        self.network_json()
    }

    #[wasm_bindgen(js_name = recompose)]
    pub fn recompose_js(&self, u: usize, v: usize, algorithm: &str, val_frac: f64) -> Result<String, JsError> {
        self.recompose_json(u, v, algorithm, val_frac).map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = stages)]
    pub fn stages_js(&self, u: usize, v: usize, val_frac: f64) -> Result<String, JsError> {
        self.stages_json(u, v, val_frac).map_err(|e| JsError::new(&e))
    }
}

/// Rectangle, rhombus and triangle for a free-standing segment, for the
/// geometry explorer.
pub fn corridor_json(ax: f64, ay: f64, bx: f64, by: f64, val_frac: f64, positive: bool) -> Result<String, String> {
    let (a, b) = (Point::new(ax, ay), Point::new(bx, by));
    let c = Corridor::new(a, b, val_frac * a.dist(b)).map_err(|e| e.to_string())?;
    let side = if positive { Side::Positive } else { Side::Negative };
    let (rectangle, rhombus, triangle) = (c.rectangle(), c.rhombus(), c.triangle(side));
    let areas = [rectangle.area(), rhombus.area(), triangle.area()];
    Ok(serde_json::to_string(&CorridorDoc {
        rectangle,
        rhombus,
        triangle,
        areas,
    })
    .expect("corridor serializes"))
}

#[wasm_bindgen(js_name = corridor)]
pub fn corridor_js(ax: f64, ay: f64, bx: f64, by: f64, val_frac: f64, positive: bool) -> Result<String, JsError> {
    corridor_json(ax, ay, bx, by, val_frac, positive).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_round_trip() {
        let demo = Demo::generate(300, 8, 1000.0, 0.1, 3).unwrap();
        let net: serde_json::Value = serde_json::from_str(&demo.network_json()).unwrap();
        let e = &net["edges"][0];
        let (u, v) = (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize);
        for alg in ["radius", "cell-density", "two-phased", "global"] {
            let doc: serde_json::Value = serde_json::from_str(&demo.recompose_json(u, v, alg, 0.5).unwrap()).unwrap();
            assert!(doc["result"]["iterations"].as_array().is_some_and(|it| !it.is_empty()), "{alg}");
        }
        assert!(demo.recompose_json(u, v, "bogus", 0.5).is_err());
        let stages: serde_json::Value = serde_json::from_str(&demo.stages_json(u, v, 0.5).unwrap()).unwrap();
        assert_eq!(stages["regions"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn corridor_areas_nest() {
        let doc: serde_json::Value = serde_json::from_str(&corridor_json(0.0, 0.0, 2.0, 2.0, 1.0, true).unwrap()).unwrap();
        let areas: Vec<f64> = doc["areas"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect();
        assert!((areas[0] - 16.0).abs() < 1e-9);
        assert!((areas[1] - 8.0).abs() < 1e-9);
        assert!((areas[2] - 4.0).abs() < 1e-9);
        assert!(corridor_json(1.0, 1.0, 1.0, 1.0, 0.5, true).is_err());
    }
}

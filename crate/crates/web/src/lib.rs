//! Browser demo bindings. Every export takes plain values and returns a JSON
//! string; the `*_json` functions hold the logic so they can be tested natively.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wasm_bindgen::prelude::*;

use tspn_core::baselines::min_box_tour;
use tspn_core::enumeration::GuessGrid;
use tspn_core::geom::{point, Point, PolytopeV, Tour};
use tspn_core::harness::{emit_svg, run_ptas};
use tspn_core::instance::{parse_instance, RunConfig};
use tspn_core::lp::approx_length;
use tspn_core::sparsify::sparsify_polytope;

/// Caps small enough to answer interactively in a single browser thread.
fn demo_config(epsilon: f64, path: bool) -> RunConfig {
    RunConfig {
        epsilon,
        path_mode: path,
        order_cap: 6,
        config_cap: 8,
        guess_cap: 256,
        samples: 8,
        restarts: 4,
        ..RunConfig::default()
    }
}

pub fn solve_json(instance: &str, epsilon: f64, path: bool) -> Result<String, String> {
    let inst = parse_instance(instance).map_err(|e| e.to_string())?;
    let hs = inst.hyperplanes();
    let rec = run_ptas(&inst, &demo_config(epsilon, path)).map_err(|e| e.to_string())?;
    let boxed = min_box_tour(&hs, !path).map_err(|e| e.to_string())?;
    let tour = rec.tour();
    let svg = if inst.dim() == 2 {
        Some(emit_svg(&hs, &[("ptas", &tour), ("box", &boxed.tour)]).map_err(|e| e.to_string())?)
    } else {
        None
    };
    Ok(json!({
        "length": rec.length,
        "box_length": boxed.tour.length(),
        "feasible": rec.feasible,
        "waypoints": rec.waypoints,
        "counters": rec.counters,
        "svg": svg,
    })
    .to_string())
}

/// Outline through the points in angular order around their centroid.
fn outline(pts: &[Point]) -> Tour {
    let c = pts.iter().fold(Point::zeros(2), |a, p| a + p) / pts.len() as f64;
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
    Tour::closed(sorted)
}

pub fn sparsify_json(vertices: usize, epsilon: f64, seed: u64) -> Result<String, String> {
    if vertices < 3 {
        return Err("need at least 3 points".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> = (0..vertices)
        .map(|_| {
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.85..1.0);
            point(&[1.6 * r * a.cos(), r * a.sin()])
        })
        .collect();
    let poly = PolytopeV::from_points(pts).map_err(|e| e.to_string())?;
    let rep = sparsify_polytope(&poly, epsilon).map_err(|e| e.to_string())?;
    let selected: Vec<Point> = rep.selected.iter().map(|&i| poly.vertices()[i].clone()).collect();
    let svg = emit_svg(
        &[],
        &[
            ("original", &outline(poly.vertices())),
            ("selected", &outline(&selected)),
            ("expanded", &outline(rep.expanded.vertices())),
        ],
    )
    .map_err(|e| e.to_string())?;
    Ok(json!({
        "vertices": rep.num_vertices,
        "selected": rep.num_selected,
        "rays": rep.rays,
        "containment_margin": rep.containment_margin,
        "svg": svg,
    })
    .to_string())
}

pub fn direction_json(x: f64, y: f64, epsilon: f64) -> Result<String, String> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err("epsilon must lie in (0, 2]".into());
    }
    let v = point(&[x, y]);
    let grid = GuessGrid::new(epsilon, 2);
    let g = grid.covering_guess(&v);
    let approx = approx_length(&v, &g, &grid).map_err(|e| e.to_string())?;
    let minor = 1 - g.major;
    let (lo, hi) = grid.band(g.ratios[minor]);
    let norm = v.norm();
    Ok(json!({
        "major": g.major,
        "signs": g.signs,
        "ratio_index": g.ratios[minor],
        "band": [lo, hi],
        "delta": grid.delta,
        "levels": grid.ratios.len(),
        "length": norm,
        "approx_length": approx,
        "ratio": if norm > 0.0 { approx / norm } else { 1.0 },
    })
    .to_string())
}

fn to_js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Solves an instance given in the text format; returns the tour, its length, and an SVG for d = 2.
#[wasm_bindgen]
pub fn solve(instance: &str, epsilon: f64, path: bool) -> Result<String, JsValue> {
    to_js(solve_json(instance, epsilon, path))
}

/// Sparsifies a random planar polygon with `vertices` points.
#[wasm_bindgen]
pub fn sparsify(vertices: usize, epsilon: f64, seed: u32) -> Result<String, JsValue> {
    to_js(sparsify_json(vertices, epsilon, seed as u64))
}

/// Direction guess and guessed length for the edge vector `(x, y)`.
#[wasm_bindgen]
pub fn direction(x: f64, y: f64, epsilon: f64) -> Result<String, JsValue> {
    to_js(direction_json(x, y, epsilon))
}

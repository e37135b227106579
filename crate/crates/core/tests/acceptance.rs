//! Acceptance criteria 1–10. Each test prints one `PASS`/`FAIL` line.
//!
//! Run with `cargo test -p tspn-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tspn_core::base_set::build_axis_base_set;
use tspn_core::baselines::{held_karp, local_search, min_box_tour, LocalSearchConfig};
use tspn_core::enumeration::{build_arc_graph, realize, separated_pair, GuessGrid};
use tspn_core::geom::{point, tour_feasible, Point, PolytopeV, Tour, TAU};
use tspn_core::harness::{run_ptas, run_ptas_with_base};
use tspn_core::instance::{parse_instance, random_instance, Instance, RunConfig};
use tspn_core::lp::approx_length;
use tspn_core::sparsify::{normalize_polytope, ray_set, snap_to_grid, sparsify_polytope};

/// Prints the verdict line and fails the test on a miss.
fn report(id: u32, name: &str, ok: bool, detail: String, elapsed: Duration, budget: Duration) {
    let in_time = elapsed <= budget;
    let verdict = if ok && in_time { "PASS" } else { "FAIL" };
    println!(
        "criterion {id:>2} [{verdict}] {name}: {detail} ({:.1}s of {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(ok, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its time budget");
}

/// Fuzz instance `i`: alternating d = 2, 3 with 1..=30 hyperplanes.
fn fuzz_instance(rng: &mut ChaCha8Rng, i: usize) -> Instance {
    let d = 2 + i % 2;
    let n = rng.gen_range(1..=30);
    random_instance(rng, d, n, 5, 10)
}

fn fuzz_config(i: usize, eps: f64) -> RunConfig {
    RunConfig {
        epsilon: eps,
        samples: 4,
        config_cap: 4,
        order_cap: 2,
        guess_cap: 1,
        refine_rounds: if i.is_multiple_of(2) { 1 } else { 0 },
        restarts: 2,
        seed: i as u64,
        ..RunConfig::default()
    }
}

const EPSILONS: [f64; 3] = [0.25, 0.5, 1.0];

#[test]
fn criterion_01_feasibility_soundness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut bad = Vec::new();
    let mut candidates = 0u64;
    for i in 0..500 {
        let inst = fuzz_instance(&mut rng, i);
        let hs = inst.hyperplanes();
        // run_ptas errors out if any LP candidate fails the feasibility recheck.
        match run_ptas(&inst, &fuzz_config(i, EPSILONS[i % 3])) {
            Ok(rec) => {
                candidates += rec.counters.candidates_checked;
                if !tour_feasible(&rec.tour(), &hs).is_feasible() || rec.counters.candidates_checked == 0 {
                    bad.push(format!("ptas#{i}"));
                }
            }
            Err(e) => bad.push(format!("ptas#{i}: {e}")),
        }
        match min_box_tour(&hs, true) {
            Ok(b) if tour_feasible(&b.tour, &hs).is_feasible() => {}
            _ => bad.push(format!("box#{i}")),
        }
    }
    report(
        1,
        "feasibility soundness",
        bad.is_empty(),
        format!("500 instances, {candidates} LP candidates rechecked, failures {bad:?}"),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

#[test]
fn criterion_02_objective_sandwich() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut violations = 0;
    let mut worst: f64 = 1.0;
    for &eps in &EPSILONS {
        for d in [2, 3] {
            let grid = GuessGrid::new(eps, d);
            for _ in 0..10_000 {
                // Mix of generic and nearly axis-aligned vectors across scales.
                let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
                let v = Point::from_fn(d, |_, _| {
                    let x: f64 = rng.gen_range(-1.0..1.0);
                    if rng.gen_bool(0.2) { x * 1e-4 } else { x }
                }) * scale;
                if v.norm() == 0.0 {
                    continue;
                }
                let g = grid.covering_guess(&v);
                let r = approx_length(&v, &g, &grid).expect("covering guess admits v") / v.norm();
                worst = worst.max(r).max(1.0 / r);
                if r > 1.0 + eps || r < 1.0 / (1.0 + eps) {
                    violations += 1;
                }
            }
        }
    }
    report(
        2,
        "objective sandwich",
        violations == 0,
        format!("60000 vectors, {violations} violations, worst factor {worst:.4}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_03_separated_pairs() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut mismatches = 0;
    let mut polytopes = 0;
    while polytopes < 200 {
        let d = 2 + polytopes % 2;
        let base = build_axis_base_set(d);
        let shifts: Vec<f64> = (0..base.num_signed()).map(|_| -rng.gen_range(0.2..2.0)).collect();
        let Ok(r) = realize(&base, &shifts) else { continue };
        polytopes += 1;
        let g = build_arc_graph(&r.config, &base).expect("realized configurations are valid");
        for _ in 0..50 {
            let n = Point::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            let (hi, lo) = separated_pair(&g, &n).expect("realized configurations walk");
            // Brute force over the realization's vertices.
            let dots: Vec<f64> = r.vertices.iter().map(|v| v.dot(&n)).collect();
            let max = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = dots.iter().copied().fold(f64::INFINITY, f64::min);
            if dots[hi] < max - 1e-9 || dots[lo] > min + 1e-9 {
                mismatches += 1;
            }
        }
    }
    report(
        3,
        "separated-pair correctness",
        mismatches == 0,
        format!("200 polytopes x 50 directions, {mismatches} mismatches"),
        start.elapsed(),
        Duration::from_secs(120),
    );
}

#[test]
fn criterion_04_relative_to_box() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut worst: f64 = 0.0;
    let mut misses = Vec::new();
    for i in 0..200 {
        let inst = fuzz_instance(&mut rng, i);
        let eps = EPSILONS[i % 3];
        let hs = inst.hyperplanes();
        let boxed = min_box_tour(&hs, true).expect("box LP is feasible").tour.length();
        let base = build_axis_base_set(inst.dim());
        let rec = run_ptas_with_base(&hs, &base, &fuzz_config(i, eps)).expect("ptas run");
        let bound = (1.0 + eps) * boxed * (1.0 + 1e-6) + TAU;
        if boxed > 0.0 {
            worst = worst.max(rec.length / boxed);
        }
        if rec.length > bound {
            misses.push((i, rec.length, boxed));
        }
    }
    report(
        4,
        "length within (1+eps) of the box tour",
        misses.is_empty(),
        format!("200 instances, worst ptas/box {worst:.4}, misses {misses:?}"),
        start.elapsed(),
        Duration::from_secs(1800),
    );
}

#[test]
fn criterion_05_unit_square_lines() {
    let start = Instant::now();
    let inst = parse_instance("2 4\n1 0 0\n1 0 1\n0 1 0\n0 1 1\n").unwrap();
    let hs = inst.hyperplanes();
    let reference = local_search(&hs, &LocalSearchConfig { restarts: 16, ..Default::default() }).length();
    let analytic = 2.0 * 2f64.sqrt();
    let cfg = RunConfig {
        epsilon: 0.25,
        ..RunConfig::default()
    };
    let rec = run_ptas(&inst, &cfg).unwrap();
    let bound = 1.25 * analytic;
    let ok = rec.feasible && rec.length <= bound + 1e-9 && (reference - analytic).abs() < 1e-6;
    report(
        5,
        "unit-square lines",
        ok,
        format!("ptas {:.6} <= {bound:.6}; local search {reference:.6}", rec.length),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

/// Random polytope: jittered points near a sphere so most are vertices.
fn random_polytope(rng: &mut ChaCha8Rng, d: usize, max_vertices: usize) -> PolytopeV {
    loop {
        let k = rng.gen_range(d + 2..=max_vertices);
        let stretch = Point::from_fn(d, |_, _| rng.gen_range(0.3..3.0));
        let pts: Vec<Point> = (0..k)
            .map(|_| {
                let dir = Point::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
                let r = rng.gen_range(0.8..1.0);
                (dir.normalize() * r).component_mul(&stretch)
            })
            .collect();
        if let Ok(p) = PolytopeV::from_points(pts) {
            if p.len() > d && p.facets().is_ok() {
                return p;
            }
        }
    }
}

#[test]
fn criterion_06_sparsification() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut failures = Vec::new();
    let mut worst_margin = f64::INFINITY;
    for i in 0..200 {
        let d = 2 + i % 2;
        let eps = if i % 4 < 2 { 0.5 } else { 1.0 };
        let p = random_polytope(&mut rng, d, if d == 2 { 100 } else { 40 });
        match sparsify_polytope(&p, eps) {
            Ok(rep) => {
                let cap = d * ray_set(eps, d).angles.len().pow(d as u32 - 1);
                worst_margin = worst_margin.min(rep.containment_margin);
                if rep.containment_margin < -TAU || rep.num_selected > cap {
                    failures.push((i, rep.containment_margin, rep.num_selected, cap));
                }
            }
            Err(e) => {
                eprintln!("polytope {i}: {e}");
                failures.push((i, f64::NAN, 0, 0));
            }
        }
    }
    report(
        6,
        "sparsification containment",
        failures.is_empty(),
        format!("200 polytopes, worst margin {worst_margin:.3e}, failures {failures:?}"),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

/// Perimeter of the convex polygon with these vertices; the shortest closed tour of points in convex position.
fn convex_perimeter(pts: &[Point]) -> f64 {
    let c = pts.iter().fold(Point::zeros(2), |a, p| a + p) / pts.len() as f64;
    let mut sorted: Vec<&Point> = pts.iter().collect();
    sorted.sort_by(|a, b| (a[1] - c[1]).atan2(a[0] - c[0]).total_cmp(&(b[1] - c[1]).atan2(b[0] - c[0])));
    Tour::closed(sorted.into_iter().cloned().collect()).length()
}

fn shortest_tour(pts: &[Point]) -> f64 {
    if pts.len() <= 12 {
        held_karp(pts, true).unwrap().length()
    } else {
        convex_perimeter(pts)
    }
}

#[test]
fn criterion_07_snapped_tour_bound() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let eps = if i % 2 == 0 { 0.5 } else { 1.0 };
        let eps_prime = (1.0f64 + eps).sqrt() - 1.0;
        let p = random_polytope(&mut rng, 2, 12);
        let sparse = sparsify_polytope(&p, eps_prime).expect("sparsify");
        let snapped = snap_to_grid(&sparse.expanded, eps_prime).expect("snap");
        let original = held_karp(p.vertices(), true).unwrap().length();
        let after = shortest_tour(snapped.polytope.vertices());
        let bound = (1.0 + eps_prime).powi(2) * original;
        worst = worst.max(after / original);
        if after > bound * (1.0 + 1e-9) {
            violations.push((i, after, bound));
        }
    }
    report(
        7,
        "snapped tour within (1+eps')^2",
        violations.is_empty(),
        format!("100 polygons, worst ratio {worst:.4}, violations {violations:?}"),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_08_ellipsoid_normalization() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut failures = Vec::new();
    for i in 0..100 {
        let d = 2 + i % 2;
        let p = random_polytope(&mut rng, d, 20);
        let norm = normalize_polytope(&p).expect("normalize");
        // Recompute the normalized body independently from the map.
        let verts: Vec<Point> = p.vertices().iter().map(|v| norm.map.apply(v)).collect();
        let outer = verts.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let body = PolytopeV::from_points(verts).unwrap();
        let inner = body
            .facets()
            .unwrap()
            .iter()
            .map(|h| -h.offset() / h.inward_normal().norm())
            .fold(f64::INFINITY, f64::min);
        if (inner - 1.0).abs() > 1e-3 || outer > d as f64 * (1.0 + 1e-3) {
            failures.push((i, inner, outer));
        }
    }
    report(
        8,
        "ellipsoid normalization",
        failures.is_empty(),
        format!("100 polytopes, failures {failures:?}"),
        start.elapsed(),
        Duration::from_secs(300),
    );
}

#[test]
fn criterion_09_baseline_sanity() {
    let start = Instant::now();
    let inst = parse_instance("2 4\n1 0 0\n1 0 2\n0 1 0\n0 1 1\n").unwrap();
    let boxed = min_box_tour(&inst.hyperplanes(), true).unwrap().tour.length();
    let corners = [point(&[0., 0.]), point(&[1., 0.]), point(&[1., 1.]), point(&[0., 1.])];
    let hk = held_karp(&corners, true).unwrap().length();
    report(
        9,
        "baseline sanity",
        (boxed - 6.0).abs() <= TAU && (hk - 4.0).abs() <= TAU,
        format!("box {boxed:.12}, square corners {hk:.12}"),
        start.elapsed(),
        Duration::from_secs(60),
    );
}

#[test]
fn criterion_10_path_variant() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut bad = Vec::new();
    for i in 0..100 {
        let inst = fuzz_instance(&mut rng, i);
        let cfg = fuzz_config(i, EPSILONS[i % 3]);
        let closed = run_ptas(&inst, &cfg).unwrap();
        let path = run_ptas(&inst, &RunConfig { path_mode: true, ..cfg }).unwrap();
        if !path.feasible || path.closed || path.length > closed.length + 1e-9 {
            bad.push((i, path.length, closed.length));
        }
    }
    let corners = [point(&[0., 0.]), point(&[1., 0.]), point(&[1., 1.]), point(&[0., 1.])];
    let open = held_karp(&corners, false).unwrap().length();
    report(
        10,
        "path variant",
        bad.is_empty() && (open - 3.0).abs() <= TAU,
        format!("100 instances, path > closed in {bad:?}; square-corner path {open:.12}"),
        start.elapsed(),
        Duration::from_secs(600),
    );
}

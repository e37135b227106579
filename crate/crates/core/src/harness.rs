//! End-to-end approximation run: enumerate (configuration, order, guess)
//! triples, solve one LP per triple, and keep the shortest verified tour.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base_set::{build_axis_base_set, build_full_base_set, parse_base_set, BaseSet, BaseSetError};
use crate::baselines::{held_karp_order, local_search, min_box_tour, BaselineError, LocalSearchConfig, HELD_KARP_MAX};
use crate::enumeration::{
    build_arc_graph, canonical_order, dedup_realizations, enumerate_direction_guesses, enumerate_orders, realize,
    EdgeGuess, GuessGrid, Realization,
};
use crate::geom::{tour_feasible, Hyperplane, Point, Tour};
use crate::instance::{BaseSetMode, ConfigError, Counters, Instance, ResultRecord};
use crate::lp::model::{build_lp, edge_count, separated_pairs};
use crate::lp::LpStatus;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no feasible candidate: {0}")]
    NoCandidateFound(String),
    #[error("LP candidate misses hyperplanes {unvisited:?}")]
    FeasibilityViolation { unvisited: Vec<usize>, tour: Tour },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    BaseSet(#[from] BaseSetError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("cannot read base set: {0}")]
    Io(#[from] std::io::Error),
    #[error("SVG output needs d = 2, got d = {0}")]
    DimensionUnsupported(usize),
}

/// Wall clock; absent on wasm32, where `Instant::now` panics.
fn clock() -> Option<Instant> {
    if cfg!(target_arch = "wasm32") {
        None
    } else {
        Some(Instant::now())
    }
}

fn elapsed_ms(t: Option<Instant>) -> f64 {
    t.map_or(0.0, |t| t.elapsed().as_secs_f64() * 1e3)
}

/// The base set selected by `cfg.base_set_mode`.
pub fn base_set_for(dim: usize, cfg: &crate::instance::RunConfig) -> Result<BaseSet, HarnessError> {
    Ok(match &cfg.base_set_mode {
        BaseSetMode::Axis => build_axis_base_set(dim),
        BaseSetMode::Full => build_full_base_set(cfg.epsilon, dim, cfg.config_cap.max(1) * 1000)?,
        BaseSetMode::File(path) => parse_base_set(&std::fs::read_to_string(path)?, dim)?,
    })
}

pub fn run_ptas(inst: &Instance, cfg: &crate::instance::RunConfig) -> Result<ResultRecord, HarnessError> {
    cfg.validate()?;
    let base = base_set_for(inst.dim(), cfg)?;
    run_ptas_with_base(&inst.hyperplanes(), &base, cfg)
}

/// Best tour found for one configuration.
struct Candidate {
    length: f64,
    tour: Tour,
}

fn lex_cmp(a: &Tour, b: &Tour) -> Ordering {
    let fa = a.waypoints.iter().flat_map(|p| p.iter());
    let fb = b.waypoints.iter().flat_map(|p| p.iter());
    for (x, y) in fa.zip(fb) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    a.waypoints.len().cmp(&b.waypoints.len())
}

fn better(a: &Candidate, b: &Candidate) -> bool {
    match a.length.total_cmp(&b.length) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => lex_cmp(&a.tour, &b.tour) == Ordering::Less,
    }
}

fn keep_best(slot: &mut Option<Candidate>, c: Candidate) {
    if slot.as_ref().is_none_or(|b| better(&c, b)) {
        *slot = Some(c);
    }
}

/// Everything one (configuration, order) task needs.
struct Task<'a> {
    hs: &'a [Hyperplane],
    base: &'a BaseSet,
    grid: &'a GuessGrid,
    cfg: &'a crate::instance::RunConfig,
    real: &'a Realization,
    pairs: &'a [(usize, usize)],
    order: Vec<usize>,
}

struct TaskOutcome {
    best: Option<Candidate>,
    counters: Counters,
    violation: Option<(Vec<usize>, Tour)>,
}

impl Task<'_> {
    fn closed(&self) -> bool {
        !self.cfg.path_mode
    }

    /// Solves one LP. Returns the tour when optimal and records every outcome.
    fn evaluate(&self, guesses: &[EdgeGuess], out: &mut TaskOutcome) -> Option<Tour> {
        out.counters.guesses += 1;
        let model = match build_lp(
            &self.real.config,
            self.pairs,
            &self.order,
            guesses,
            self.base,
            self.hs,
            self.grid,
            self.closed(),
        ) {
            Ok(m) => m,
            Err(_) => {
                out.counters.degenerate_skipped += 1;
                return None;
            }
        };
        out.counters.lps_solved += 1;
        let sol = match model.solve() {
            Ok(s) => s,
            Err(_) => {
                out.counters.lps_failed += 1;
                return None;
            }
        };
        match sol.status {
            LpStatus::Optimal => out.counters.lps_optimal += 1,
            LpStatus::Infeasible => {
                out.counters.lps_infeasible += 1;
                return None;
            }
            LpStatus::Unbounded => {
                out.counters.lps_failed += 1;
                return None;
            }
        }
        let tour = model.extract_tour(&sol);
        out.counters.candidates_checked += 1;
        let report = tour_feasible(&tour, self.hs);
        if !report.is_feasible() {
            if out.violation.is_none() {
                out.violation = Some((report.unvisited(), tour));
            }
            return None;
        }
        keep_best(
            &mut out.best,
            Candidate {
                length: tour.length(),
                tour: tour.clone(),
            },
        );
        Some(tour)
    }

    fn edge_vectors(&self, pts: &[Point]) -> Vec<Point> {
        let n = pts.len();
        (0..edge_count(n, self.closed()))
            .map(|k| &pts[(k + 1) % n] - &pts[k])
            .collect()
    }

    fn covering(&self, pts: &[Point]) -> Vec<EdgeGuess> {
        self.edge_vectors(pts).iter().map(|v| self.grid.covering_guess(v)).collect()
    }

    fn run(&self) -> TaskOutcome {
        let mut out = TaskOutcome {
            best: None,
            counters: Counters::default(),
            violation: None,
        };
        let edges = edge_count(self.real.config.len(), self.closed());
        if self.grid.count(edges) <= self.cfg.guess_cap as u128 {
            for g in enumerate_direction_guesses(self.grid, edges) {
                self.evaluate(&g, &mut out);
            }
            return out;
        }
        out.counters.guesses_truncated = true;
        let seed_pts: Vec<Point> = self.order.iter().map(|&c| self.real.vertices[c].clone()).collect();
        self.climb(self.covering(&seed_pts), &mut out);
        out
    }

    /// Deterministic best-improvement search on true tour length, starting
    /// from the guess that covers the realization's own edges.
    fn climb(&self, start: Vec<EdgeGuess>, out: &mut TaskOutcome) {
        let mut current = start;
        let mut cur_tour = self.evaluate(&current, out);
        let mut cur_len = cur_tour.as_ref().map_or(f64::INFINITY, Tour::length);
        for _ in 0..self.cfg.refine_rounds {
            let mut neighbors = Vec::new();
            if let Some(t) = &cur_tour {
                let refit = self.covering(&t.waypoints);
                if refit != current {
                    neighbors.push(refit);
                }
            }
            neighbors.extend(self.neighbors(&current));
            let mut step: Option<(f64, Vec<EdgeGuess>, Tour)> = None;
            for nb in neighbors {
                if let Some(t) = self.evaluate(&nb, out) {
                    let len = t.length();
                    if len < cur_len - 1e-12 && step.as_ref().is_none_or(|s| len < s.0) {
                        step = Some((len, nb, t));
                    }
                }
            }
            match step {
                Some((len, g, t)) => {
                    cur_len = len;
                    current = g;
                    cur_tour = Some(t);
                }
                None => break,
            }
        }
    }

    fn neighbors(&self, g: &[EdgeGuess]) -> Vec<Vec<EdgeGuess>> {
        let d = self.grid.dim;
        let levels = self.grid.ratios.len();
        let mut out = Vec::new();
        let mut push = |k: usize, e: EdgeGuess| {
            let mut v = g.to_vec();
            v[k] = e;
            out.push(v);
        };
        for (k, e) in g.iter().enumerate() {
            let mut flip = e.clone();
            flip.signs[e.major] = -flip.signs[e.major];
            push(k, flip);
            for l in (0..d).filter(|&l| l != e.major) {
                if e.ratios[l] + 1 < levels {
                    let mut up = e.clone();
                    up.ratios[l] += 1;
                    push(k, up);
                }
                if e.ratios[l] > 0 {
                    let mut down = e.clone();
                    down.ratios[l] -= 1;
                    push(k, down);
                }
                let mut flip = e.clone();
                flip.signs[l] = -flip.signs[l];
                push(k, flip);
                let mut swap = e.clone();
                swap.major = l;
                swap.ratios = vec![0; d];
                push(k, swap);
            }
        }
        out
    }
}

fn diameter_pair(pts: &[Point]) -> Option<[Point; 2]> {
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dist = (&pts[i] - &pts[j]).norm();
            if best.is_none_or(|b| dist > b.0) {
                best = Some((dist, i, j));
            }
        }
    }
    best.map(|(_, i, j)| [pts[i].clone(), pts[j].clone()])
}

/// Polytopes in `para(base)` whose configurations seed the search, in a fixed
/// order: the enclosing polytopes of the reference tours and of their
/// diameters, then random ones.
fn seed_realizations(
    hs: &[Hyperplane],
    base: &BaseSet,
    cfg: &crate::instance::RunConfig,
    references: &[&Tour],
) -> Vec<Realization> {
    let d = base.dim();
    let mut out = Vec::new();
    for t in references {
        if let Ok(r) = realize(base, &base.enclosing_shifts(&t.waypoints)) {
            out.push(r);
        }
    }
    // The enclosing polytope of a tour's diameter stays small even when the
    // whole tour's does not, and matches back-and-forth optima.
    for t in references {
        if let Some(pair) = diameter_pair(&t.waypoints) {
            if let Ok(r) = realize(base, &base.enclosing_shifts(&pair)) {
                out.push(r);
            }
        }
    }
    // Random polytopes sized like the references, around the feet of the inputs.
    let feet: Vec<Point> = hs.iter().map(Hyperplane::foot).collect();
    let center = feet.iter().fold(Point::zeros(d), |a, p| a + p) / feet.len().max(1) as f64;
    let scale = references
        .iter()
        .flat_map(|t| t.waypoints.iter())
        .chain(feet.iter())
        .map(|p| (p - &center).norm())
        .fold(0.0, f64::max)
        .max(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5a3b_1e5e_ed00);
    for _ in 0..cfg.samples {
        let c = &center + Point::from_fn(d, |_, _| rng.gen_range(-0.5..0.5) * scale);
        let shifts: Vec<f64> = (0..base.num_signed())
            .map(|s| {
                let n = base.signed_normal(s);
                let r = if rng.gen_bool(0.3) { 100.0 } else { rng.gen_range(0.1..1.5) };
                c.dot(&n) - r * scale
            })
            .collect();
        if let Ok(r) = realize(base, &shifts) {
            out.push(r);
        }
    }
    out
}

/// Runs the approximation scheme on `hs` with an explicit base set.
pub fn run_ptas_with_base(
    hs: &[Hyperplane],
    base: &BaseSet,
    cfg: &crate::instance::RunConfig,
) -> Result<ResultRecord, HarnessError> {
    cfg.validate()?;
    let start = clock();
    let closed = !cfg.path_mode;
    let grid = GuessGrid::new(cfg.epsilon, base.dim());
    let boxed = min_box_tour(hs, closed)?;
    let ls = local_search(
        hs,
        &LocalSearchConfig {
            restarts: cfg.restarts,
            seed: cfg.seed,
            closed,
            ..LocalSearchConfig::default()
        },
    );
    let mut counters = Counters::default();
    let mut reals: Vec<Realization> = seed_realizations(hs, base, cfg, &[&boxed.tour, &ls])
        .into_iter()
        .filter(|r| !r.config.is_empty() && r.config.len() <= cfg.max_elements)
        .collect();
    reals = dedup_realizations(reals);
    if reals.len() > cfg.config_cap {
        reals.truncate(cfg.config_cap);
        counters.configs_truncated = true;
    }
    counters.configurations = reals.len() as u64;

    let mut prepared = Vec::new();
    for r in &reals {
        let pairs = build_arc_graph(&r.config, base).and_then(|g| separated_pairs(&g, hs));
        match pairs {
            Ok(p) => prepared.push((r, p)),
            Err(_) => counters.degenerate_skipped += 1,
        }
    }

    let mut tasks = Vec::new();
    for (r, pairs) in &prepared {
        let n = r.config.len();
        let seed = if n <= HELD_KARP_MAX {
            held_karp_order(&r.vertices, closed).expect("size checked")
        } else {
            (0..n).collect()
        };
        let first = canonical_order(&seed, cfg.path_mode);
        let (all, truncated) = enumerate_orders(n, cfg.order_cap, cfg.path_mode);
        let mut orders = vec![first.clone()];
        orders.extend(all.into_iter().filter(|o| *o != first));
        if orders.len() > cfg.order_cap {
            orders.truncate(cfg.order_cap);
            counters.orders_truncated = true;
        }
        counters.orders_truncated |= truncated;
        counters.orders += orders.len() as u64;
        for order in orders {
            tasks.push(Task {
                hs,
                base,
                grid: &grid,
                cfg,
                real: r,
                pairs,
                order,
            });
        }
    }

    #[cfg(feature = "parallel")]
    let outcomes: Vec<TaskOutcome> = {
        use rayon::prelude::*;
        tasks.par_iter().map(Task::run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<TaskOutcome> = tasks.iter().map(Task::run).collect();

    let mut best = None;
    for o in outcomes {
        counters.merge(&o.counters);
        if let Some((unvisited, tour)) = o.violation {
            return Err(HarnessError::FeasibilityViolation { unvisited, tour });
        }
        if let Some(c) = o.best {
            keep_best(&mut best, c);
        }
    }
    let best = best.ok_or_else(|| {
        HarnessError::NoCandidateFound(format!(
            "{} configurations, {} LPs ({} infeasible, {} failed), {} degenerate",
            counters.configurations,
            counters.lps_solved,
            counters.lps_infeasible,
            counters.lps_failed,
            counters.degenerate_skipped
        ))
    })?;
    let wall_ms = elapsed_ms(start);
    Ok(ResultRecord::from_tour("ptas", &best.tour, hs, counters, wall_ms))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub algorithm: String,
    pub length: f64,
    /// `length / ptas length`; infinite when the PTAS tour has length zero and this one does not.
    pub ratio: f64,
    pub feasible: bool,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    #[serde(skip)]
    pub records: Vec<ResultRecord>,
}

impl CompareTable {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<14} {:>14} {:>10} {:>9} {:>12}", "algorithm", "length", "ratio", "feasible", "ms");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<14} {:>14.6} {:>10.4} {:>9} {:>12.2}",
                r.algorithm, r.length, r.ratio, r.feasible, r.wall_ms
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }
}

fn ratio(len: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        len / reference
    } else if len <= crate::geom::TAU {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Runs the PTAS, the box tour, and local search on the same instance.
pub fn compare(inst: &Instance, cfg: &crate::instance::RunConfig) -> Result<CompareTable, HarnessError> {
    let hs = inst.hyperplanes();
    let closed = !cfg.path_mode;
    let ptas = run_ptas(inst, cfg)?;

    let t = clock();
    let boxed = min_box_tour(&hs, closed)?;
    let box_rec = ResultRecord::from_tour("box", &boxed.tour, &hs, Counters::default(), elapsed_ms(t));

    let t = clock();
    let ls = local_search(
        &hs,
        &LocalSearchConfig {
            restarts: cfg.restarts,
            seed: cfg.seed,
            closed,
            ..LocalSearchConfig::default()
        },
    );
    let ls_rec = ResultRecord::from_tour("local_search", &ls, &hs, Counters::default(), elapsed_ms(t));

    let records = vec![ptas, box_rec, ls_rec];
    let rows = records
        .iter()
        .map(|r| CompareRow {
            algorithm: r.algorithm.clone(),
            length: r.length,
            ratio: ratio(r.length, records[0].length),
            feasible: r.feasible,
            wall_ms: r.wall_ms,
        })
        .collect();
    Ok(CompareTable { rows, records })
}

const PALETTE: [&str; 6] = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Clips the line `⟨n, x⟩ = c` to the box; `None` when it misses.
fn clip_line(h: &Hyperplane, lo: [f64; 2], hi: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
    let (n, c) = (h.normal(), h.offset());
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for x in [lo[0], hi[0]] {
        if n[1].abs() > 1e-12 {
            let y = (c - n[0] * x) / n[1];
            if y >= lo[1] - 1e-12 && y <= hi[1] + 1e-12 {
                pts.push([x, y]);
            }
        }
    }
    for y in [lo[1], hi[1]] {
        if n[0].abs() > 1e-12 {
            let x = (c - n[1] * y) / n[0];
            if x >= lo[0] - 1e-12 && x <= hi[0] + 1e-12 {
                pts.push([x, y]);
            }
        }
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
    Some((*pts.first()?, *pts.last()?))
}

/// SVG drawing of a planar instance: input lines in gray, one colored
/// polyline per tour, and circles at the waypoints.
pub fn emit_svg(hs: &[Hyperplane], tours: &[(&str, &Tour)]) -> Result<String, HarnessError> {
    if let Some(h) = hs.iter().find(|h| h.dim() != 2) {
        return Err(HarnessError::DimensionUnsupported(h.dim()));
    }
    if let Some((_, t)) = tours.iter().find(|(_, t)| t.waypoints.iter().any(|p| p.len() != 2)) {
        return Err(HarnessError::DimensionUnsupported(t.waypoints[0].len()));
    }
    let pts: Vec<[f64; 2]> = hs
        .iter()
        .map(Hyperplane::foot)
        .chain(tours.iter().flat_map(|(_, t)| t.waypoints.iter().cloned()))
        .map(|p| [p[0], p[1]])
        .collect();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &pts {
        for i in 0..2 {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    if pts.is_empty() {
        lo = [0.0; 2];
        hi = [1.0; 2];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    for i in 0..2 {
        let pad = 0.1 * span.max(hi[i] - lo[i]);
        lo[i] -= pad;
        hi[i] += pad;
    }
    let (w, h) = (hi[0] - lo[0], hi[1] - lo[1]);
    let stroke = 0.004 * w.max(h);
    // SVG's y axis points down; flip so the picture matches the usual orientation.
    let tx = |p: [f64; 2]| (p[0], lo[1] + hi[1] - p[1]);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}">"#,
        lo[0], lo[1], w, h
    );
    let _ = writeln!(s, r#"<rect x="{:.6}" y="{:.6}" width="{:.6}" height="{:.6}" fill="white"/>"#, lo[0], lo[1], w, h);
    for line in hs {
        if let Some((a, b)) = clip_line(line, lo, hi) {
            let (ax, ay) = tx(a);
            let (bx, by) = tx(b);
            let _ = writeln!(
                s,
                r##"<line x1="{ax:.6}" y1="{ay:.6}" x2="{bx:.6}" y2="{by:.6}" stroke="#999999" stroke-width="{stroke:.6}"/>"##
            );
        }
    }
    for (i, (label, t)) in tours.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = t
            .waypoints
            .iter()
            .map(|p| {
                let (x, y) = tx([p[0], p[1]]);
                format!("{x:.6},{y:.6}")
            })
            .collect();
        let tag = if t.closed { "polygon" } else { "polyline" };
        let _ = writeln!(
            s,
            r#"<{tag} class="{label}" points="{}" fill="none" stroke="{color}" stroke-width="{:.6}"/>"#,
            coords.join(" "),
            2.0 * stroke
        );
        for p in &t.waypoints {
            let (x, y) = tx([p[0], p[1]]);
            let _ = writeln!(s, r#"<circle cx="{x:.6}" cy="{y:.6}" r="{:.6}" fill="{color}"/>"#, 3.0 * stroke);
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

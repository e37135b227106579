//! The combinatorial search space: configurations, their arc graphs and
//! separated pairs, visit orders, and direction guesses for tour edges.

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::base_set::BaseSet;
use crate::geom::{GeomError, Point, PolytopeH};
use crate::linalg;

/// Threshold below which a dot product with a unit direction counts as zero.
const DIR_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnumError {
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
}

/// `δ = min{√(((1+ε)²−1)/d), √((1−(1+ε)⁻²)/d), ε}`.
pub fn delta(eps: f64, d: usize) -> f64 {
    let d = d as f64;
    let a = (((1.0 + eps).powi(2) - 1.0) / d).sqrt();
    let b = ((1.0 - (1.0 + eps).powi(-2)) / d).sqrt();
    a.min(b).min(eps)
}

/// `{δ/2, (1+δ)δ, (1+δ)³δ, …}` up to the first `(1+δ)^{2k+1}δ ≥ 1`.
pub fn ratio_grid(delta: f64) -> Vec<f64> {
    assert!(delta > 0.0 && delta < 1.0, "δ must lie in (0, 1)");
    let mut out = vec![delta / 2.0];
    let step = (1.0 + delta) * (1.0 + delta);
    let mut r = (1.0 + delta) * delta;
    loop {
        out.push(r);
        if r >= 1.0 {
            break;
        }
        r *= step;
    }
    out
}

/// An antichain of signed half-space index sets, each pinning a single point.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    elements: Vec<Vec<usize>>,
}

impl Configuration {
    /// Sorts each element and the element list so equal configurations compare equal.
    pub fn new(elements: Vec<Vec<usize>>) -> Self {
        let mut elements: Vec<Vec<usize>> = elements
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e.dedup();
                e
            })
            .collect();
        elements.sort();
        Self { elements }
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn validate(&self, base: &BaseSet) -> Result<(), EnumError> {
        for e in &self.elements {
            if !element_is_valid(base, e) {
                return Err(EnumError::InvalidConfiguration(format!("element {e:?} does not pin a point")));
            }
        }
        for (i, a) in self.elements.iter().enumerate() {
            for (j, b) in self.elements.iter().enumerate() {
                if i != j && is_subset(a, b) {
                    return Err(EnumError::InvalidConfiguration(format!("{a:?} ⊆ {b:?}")));
                }
            }
        }
        Ok(())
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn element_is_valid(base: &BaseSet, e: &[usize]) -> bool {
    let d = base.dim();
    if e.len() < d || e.iter().any(|&s| s >= base.num_signed()) {
        return false;
    }
    let normals: Vec<Point> = e.iter().map(|&s| base.signed_normal(s)).collect();
    let refs: Vec<&Point> = normals.iter().collect();
    linalg::rank(&refs, d) == d
}

/// A configuration read off a concrete polytope, with vertex positions aligned to its elements.
#[derive(Clone, Debug)]
pub struct Realization {
    pub config: Configuration,
    pub vertices: Vec<Point>,
    pub shifts: Vec<f64>,
}

/// Builds the polytope `⟨x, n_s⟩ ≥ ρ_s` and records which half-spaces are tight at each vertex.
pub fn realize(base: &BaseSet, shifts: &[f64]) -> Result<Realization, GeomError> {
    let poly = PolytopeH::new(base.signed_halfspaces(shifts))?;
    let mut pairs: Vec<(Vec<usize>, Point)> = poly
        .incident_vertices()
        .into_iter()
        .map(|v| (v.tight, v.position))
        .collect();
    pairs.sort_by(|a, b| a.0.cmp(&b.0));
    let (elements, vertices): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok(Realization {
        config: Configuration { elements },
        vertices,
        shifts: shifts.to_vec(),
    })
}

/// Brute-force antichains of valid elements with at most `max_size` half-spaces
/// each, in a deterministic order. Stops after `cap`; the flag reports truncation.
pub fn enumerate_configurations(base: &BaseSet, max_size: usize, max_elements: usize, cap: usize) -> (Vec<Configuration>, bool) {
    let d = base.dim();
    let valid: Vec<Vec<usize>> = (d..=max_size.min(base.num_signed()))
        .flat_map(|k| (0..base.num_signed()).combinations(k))
        .filter(|e| element_is_valid(base, e))
        .collect();
    let mut out = Vec::new();
    for k in 1..=max_elements.min(valid.len()) {
        for combo in (0..valid.len()).combinations(k) {
            let antichain = combo
                .iter()
                .tuple_combinations()
                .all(|(&a, &b)| !is_subset(&valid[a], &valid[b]) && !is_subset(&valid[b], &valid[a]));
            if !antichain {
                continue;
            }
            if out.len() == cap {
                return (out, true);
            }
            out.push(Configuration::new(combo.iter().map(|&i| valid[i].clone()).collect()));
        }
    }
    (out, false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub direction: Point,
}

#[derive(Clone, Debug)]
pub struct ArcGraph {
    nodes: usize,
    /// Outgoing arcs per node, sorted by head.
    out: Vec<Vec<Arc>>,
}

impl ArcGraph {
    pub fn num_nodes(&self) -> usize {
        self.nodes
    }

    pub fn arcs(&self) -> impl Iterator<Item = &Arc> {
        self.out.iter().flatten()
    }

    pub fn out_arcs(&self, v: usize) -> &[Arc] {
        &self.out[v]
    }
}

/// Arcs between elements whose shared half-spaces bound a line, oriented by
/// the inward normals of the half-spaces only the tail is on.
pub fn build_arc_graph(config: &Configuration, base: &BaseSet) -> Result<ArcGraph, EnumError> {
    config.validate(base)?;
    let d = base.dim();
    let els = config.elements();
    let mut out = vec![Vec::new(); els.len()];
    for (v, ev) in els.iter().enumerate() {
        for (w, ew) in els.iter().enumerate() {
            if v == w {
                continue;
            }
            let common: Vec<Point> = ev
                .iter()
                .filter(|s| ew.binary_search(s).is_ok())
                .map(|&s| base.signed_normal(s))
                .collect();
            let refs: Vec<&Point> = common.iter().collect();
            let (rank, null) = linalg::rank_and_null_space(&refs, d);
            if rank != d - 1 || null.len() != 1 {
                continue;
            }
            let e = &null[0];
            let (mut pos, mut neg) = (false, false);
            for s in ev.iter().filter(|s| ew.binary_search(s).is_err()) {
                let x = base.signed_normal(*s).dot(e);
                pos |= x > DIR_TOL;
                neg |= x < -DIR_TOL;
            }
            let direction = match (pos, neg) {
                (true, false) => e.clone(),
                (false, true) => -e,
                _ => continue,
            };
            out[v].push(Arc { from: v, to: w, direction });
        }
    }
    Ok(ArcGraph { nodes: els.len(), out })
}

/// Walks improving arcs from node 0, taking the smallest head each time.
fn token_walk(g: &ArcGraph, n: &Point, sign: f64) -> Result<usize, EnumError> {
    let mut seen = vec![false; g.nodes];
    let mut at = 0;
    loop {
        if seen[at] {
            return Err(EnumError::DegenerateConfiguration(format!("token revisited element {at}")));
        }
        seen[at] = true;
        match g.out[at].iter().find(|a| sign * a.direction.dot(n) > DIR_TOL) {
            Some(a) => at = a.to,
            None => return Ok(at),
        }
    }
}

/// Elements maximizing and minimizing `⟨x, n⟩` over any realization of the configuration.
pub fn separated_pair(g: &ArcGraph, n: &Point) -> Result<(usize, usize), EnumError> {
    if g.nodes == 0 {
        return Err(EnumError::DegenerateConfiguration("empty configuration".into()));
    }
    Ok((token_walk(g, n, 1.0)?, token_walk(g, n, -1.0)?))
}

/// Visit orders of `n` elements up to rotation and reflection (closed) or
/// reflection only (path), in lexicographic order, stopping after `cap`.
pub fn enumerate_orders(n: usize, cap: usize, path: bool) -> (Vec<Vec<usize>>, bool) {
    let mut out = Vec::new();
    if n == 0 {
        return (out, false);
    }
    let mut push = |p: Vec<usize>| -> bool {
        if out.len() == cap {
            return false;
        }
        out.push(p);
        true
    };
    if path {
        for p in (0..n).permutations(n) {
            if (n < 2 || p[0] < p[n - 1]) && !push(p) {
                return (out, true);
            }
        }
    } else {
        for rest in (1..n).permutations(n - 1) {
            if rest.len() >= 2 && rest[0] > rest[rest.len() - 1] {
                continue;
            }
            let mut p = vec![0];
            p.extend(rest);
            if !push(p) {
                return (out, true);
            }
        }
    }
    (out, false)
}

/// Canonical form of a visit order, so seeded orders can be matched against enumerated ones.
pub fn canonical_order(order: &[usize], path: bool) -> Vec<usize> {
    let n = order.len();
    if n < 2 {
        return order.to_vec();
    }
    if path {
        let rev: Vec<usize> = order.iter().rev().copied().collect();
        return if order[0] < order[n - 1] { order.to_vec() } else { rev };
    }
    let start = order.iter().position_min().unwrap();
    let mut p: Vec<usize> = (0..n).map(|i| order[(start + i) % n]).collect();
    if n >= 3 && p[1] > p[n - 1] {
        p[1..].reverse();
    }
    p
}

/// Guessed shape of one tour edge vector `v`: the coordinate of largest
/// magnitude, every coordinate's sign, and a ratio-grid index per minor
/// coordinate (index 0 is the small-ratio guess `δ/2`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeGuess {
    pub major: usize,
    /// `+1` or `−1` per coordinate.
    pub signs: Vec<i8>,
    /// Ratio index per coordinate; ignored at `major`.
    pub ratios: Vec<usize>,
}

/// The ratio grid for one `(ε, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GuessGrid {
    pub dim: usize,
    pub delta: f64,
    pub ratios: Vec<f64>,
}

impl GuessGrid {
    pub fn new(eps: f64, d: usize) -> Self {
        let delta = delta(eps, d);
        Self {
            dim: d,
            delta,
            ratios: ratio_grid(delta),
        }
    }

    /// Allowed range `[L, U]` of `|v_ℓ| / |v_major|` for ratio index `idx`.
    pub fn band(&self, idx: usize) -> (f64, f64) {
        if idx == 0 {
            (0.0, self.delta)
        } else {
            let r = self.ratios[idx];
            (r / (1.0 + self.delta), r * (1.0 + self.delta))
        }
    }

    /// Number of distinct guesses for a single edge: `d · 2 · (2|grid|)^{d−1}`.
    pub fn per_edge(&self) -> usize {
        self.dim * 2 * (2 * self.ratios.len()).pow(self.dim as u32 - 1)
    }

    /// The `i`-th single-edge guess in a fixed mixed-radix order.
    pub fn edge_guess(&self, mut i: usize) -> EdgeGuess {
        let d = self.dim;
        let major = i % d;
        i /= d;
        let mut signs = vec![0i8; d];
        let mut ratios = vec![0usize; d];
        signs[major] = if i.is_multiple_of(2) { 1 } else { -1 };
        i /= 2;
        for l in (0..d).filter(|&l| l != major) {
            ratios[l] = i % self.ratios.len();
            i /= self.ratios.len();
            signs[l] = if i.is_multiple_of(2) { 1 } else { -1 };
            i /= 2;
        }
        EdgeGuess { major, signs, ratios }
    }

    /// Total guesses for `edges` tour edges, saturating.
    pub fn count(&self, edges: usize) -> u128 {
        (self.per_edge() as u128).checked_pow(edges as u32).unwrap_or(u128::MAX)
    }

    /// A guess whose bands contain `v`: the largest coordinate (smallest index
    /// on ties) is major, and each ratio takes the first band containing it.
    pub fn covering_guess(&self, v: &Point) -> EdgeGuess {
        let d = self.dim;
        let major = (0..d).fold(0, |m, l| if v[l].abs() > v[m].abs() { l } else { m });
        let sgn = |x: f64| if x < 0.0 { -1 } else { 1 };
        let signs: Vec<i8> = (0..d).map(|l| sgn(v[l])).collect();
        let vm = v[major].abs();
        let ratios = (0..d)
            .map(|l| {
                if l == major || vm == 0.0 {
                    return 0;
                }
                let t = v[l].abs() / vm;
                if t < self.delta {
                    return 0;
                }
                (1..self.ratios.len())
                    .find(|&i| {
                        let (lo, hi) = self.band(i);
                        lo <= t && t <= hi
                    })
                    .unwrap_or(self.ratios.len() - 1)
            })
            .collect();
        EdgeGuess { major, signs, ratios }
    }

    /// Whether `v` lies in the bands of `g`, with slack `tol` relative to `|v_major|`.
    pub fn admits(&self, v: &Point, g: &EdgeGuess, tol: f64) -> bool {
        let vm = g.signs[g.major] as f64 * v[g.major];
        if vm < -tol {
            return false;
        }
        let slack = tol * (1.0 + vm.abs());
        (0..self.dim).filter(|&l| l != g.major).all(|l| {
            let x = g.signs[l] as f64 * v[l];
            let (lo, hi) = self.band(g.ratios[l]);
            x >= -slack && x <= hi * vm + slack && x >= lo * vm - slack
        })
    }
}

/// All guess sequences for `edges` edges in odometer order (last edge fastest).
pub struct GuessIter<'a> {
    grid: &'a GuessGrid,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for GuessIter<'_> {
    type Item = Vec<EdgeGuess>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.digits.iter().map(|&i| self.grid.edge_guess(i)).collect();
        let base = self.grid.per_edge();
        self.done = true;
        for digit in self.digits.iter_mut().rev() {
            *digit += 1;
            if *digit < base {
                self.done = false;
                break;
            }
            *digit = 0;
        }
        Some(item)
    }
}

pub fn enumerate_direction_guesses(grid: &GuessGrid, edges: usize) -> GuessIter<'_> {
    GuessIter {
        grid,
        digits: vec![0; edges],
        done: false,
    }
}

/// The distinct configurations in `realizations`, in first-seen order.
pub fn dedup_realizations(realizations: Vec<Realization>) -> Vec<Realization> {
    let mut seen = BTreeSet::new();
    realizations
        .into_iter()
        .filter(|r| seen.insert(r.config.clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_set::build_axis_base_set;
    use crate::geom::point;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Axis base in 2D: x → 0/1, y → 2/3, x−y → 4/5, x+y → 6/7.
    const PX: usize = 0;
    const MX: usize = 1;
    const PY: usize = 2;
    const MY: usize = 3;

    fn square() -> Configuration {
        Configuration::new(vec![vec![PX, PY], vec![PX, MY], vec![MX, PY], vec![MX, MY]])
    }

    #[test]
    fn delta_values() {
        assert_relative_eq!(delta(1.0, 2), 0.375f64.sqrt(), epsilon = 1e-12);
        for i in 1..40 {
            let e = i as f64 * 0.05;
            assert!(delta(e, 2) <= e);
            assert!(delta(e, 3) <= delta(e, 2));
            assert!(delta(e, 4) <= delta(e, 3));
        }
    }

    #[test]
    fn ratio_grid_values() {
        let g = ratio_grid(0.5);
        assert_eq!(g.len(), 3);
        assert_relative_eq!(g[0], 0.25);
        assert_relative_eq!(g[1], 0.75);
        assert_relative_eq!(g[2], 1.6875);
    }

    #[test]
    fn ratio_grid_covers() {
        for d in [0.05, 0.2, 0.5, 0.61, 0.9] {
            let grid = GuessGrid {
                dim: 2,
                delta: d,
                ratios: ratio_grid(d),
            };
            for i in 0..=10_000 {
                let t = i as f64 / 10_000.0;
                let ok = if t < d {
                    (t - d / 2.0).abs() <= d / 2.0
                } else {
                    (1..grid.ratios.len()).any(|k| {
                        let (lo, hi) = grid.band(k);
                        lo <= t && t <= hi
                    })
                };
                assert!(ok, "t={t} uncovered for δ={d}");
            }
        }
    }

    #[test]
    fn square_is_enumerated() {
        let base = build_axis_base_set(2);
        let (all, truncated) = enumerate_configurations(&base, 2, 4, usize::MAX);
        assert!(!truncated);
        assert!(all.contains(&square()));
        for c in &all {
            c.validate(&base).unwrap();
        }
        let (few, truncated) = enumerate_configurations(&base, 2, 4, 10);
        assert!(truncated);
        assert_eq!(few[..], all[..10]);
    }

    #[test]
    fn realization_of_axis_box_yields_all_tight_sets() {
        let base = build_axis_base_set(2);
        // Box [0,1]²; diagonal half-spaces pushed outward so they are loose.
        let rho = [0.0, -1.0, 0.0, -1.0, -5.0, -5.0, -5.0, -5.0];
        let r = realize(&base, &rho).unwrap();
        assert_eq!(r.config, square());
    }

    #[test]
    fn square_arc_graph() {
        let base = build_axis_base_set(2);
        let c = square();
        let g = build_arc_graph(&c, &base).unwrap();
        assert_eq!(g.arcs().count(), 8);
        // Elements sorted: [0,2]=(0,0), [0,3]=(0,1), [1,2]=(1,0), [1,3]=(1,1).
        let pos = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        for a in g.arcs() {
            let e = point(&pos[a.to]) - point(&pos[a.from]);
            assert!((e.normalize() - &a.direction).amax() < 1e-9);
        }
        let n = point(&[1.0, 1.0]).normalize();
        assert_eq!(separated_pair(&g, &n).unwrap(), (3, 0));
        let (plus, minus) = separated_pair(&g, &point(&[1.0, 0.0])).unwrap();
        assert_eq!(pos[plus][0], 1.0);
        assert_eq!(pos[minus][0], 0.0);
    }

    #[test]
    fn no_arc_without_common_line() {
        let base = build_axis_base_set(2);
        let c = Configuration::new(vec![vec![PX, PY], vec![MX, MY]]);
        assert_eq!(build_arc_graph(&c, &base).unwrap().arcs().count(), 0);
    }

    fn random_realization(rng: &mut ChaCha8Rng, base: &BaseSet) -> Realization {
        loop {
            let rho: Vec<f64> = (0..base.num_signed()).map(|_| -rng.gen_range(0.2..2.0)).collect();
            if let Ok(r) = realize(base, &rho) {
                return r;
            }
        }
    }

    /// Adjacency oracle: two vertices are adjacent iff their common tight normals have rank d−1
    /// and no other vertex lies on the segment's supporting face.
    #[test]
    fn arcs_match_polytope_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2, 3] {
            let base = build_axis_base_set(d);
            for _ in 0..20 {
                let r = random_realization(&mut rng, &base);
                let g = build_arc_graph(&r.config, &base).unwrap();
                for a in g.arcs() {
                    let e = &r.vertices[a.to] - &r.vertices[a.from];
                    assert!((e.normalize() - &a.direction).amax() < 1e-6);
                }
                // Every 1-dimensional face (pair on a common rank d−1 set with no third vertex between) is an arc.
                let els = r.config.elements();
                for v in 0..els.len() {
                    for w in 0..els.len() {
                        if v == w {
                            continue;
                        }
                        let common: Vec<Point> = els[v]
                            .iter()
                            .filter(|s| els[w].contains(s))
                            .map(|&s| base.signed_normal(s))
                            .collect();
                        let refs: Vec<&Point> = common.iter().collect();
                        if linalg::rank(&refs, d) == d - 1 {
                            assert!(g.out_arcs(v).iter().any(|a| a.to == w));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn token_walk_matches_vertex_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2, 3] {
            let base = build_axis_base_set(d);
            for _ in 0..30 {
                let r = random_realization(&mut rng, &base);
                let g = build_arc_graph(&r.config, &base).unwrap();
                for _ in 0..30 {
                    let n = Point::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
                    let (p, m) = separated_pair(&g, &n).unwrap();
                    let dots: Vec<f64> = r.vertices.iter().map(|v| v.dot(&n)).collect();
                    let max = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let min = dots.iter().copied().fold(f64::INFINITY, f64::min);
                    assert!(dots[p] >= max - 1e-9 && dots[m] <= min + 1e-9);
                    assert_eq!(separated_pair(&g, &(n * 3.7)).unwrap(), (p, m));
                }
            }
        }
    }

    #[test]
    fn cyclic_order_walk_is_degenerate() {
        // Three mutually adjacent elements whose arcs form a directed cycle cannot be realized.
        let base = build_axis_base_set(2);
        let c = Configuration::new(vec![vec![PX, PY], vec![MX, PY], vec![4, 6]]);
        if let Ok(g) = build_arc_graph(&c, &base) {
            for k in 0..16 {
                let a = k as f64 * std::f64::consts::PI / 8.0;
                // Must terminate: either an answer or a degeneracy report.
                let _ = separated_pair(&g, &point(&[a.cos(), a.sin()]));
            }
        }
    }

    #[test]
    fn order_counts() {
        assert_eq!(enumerate_orders(3, 100, false).0.len(), 1);
        assert_eq!(enumerate_orders(4, 100, false).0.len(), 3);
        assert_eq!(enumerate_orders(5, 100, false).0.len(), 12);
        assert_eq!(enumerate_orders(4, 100, true).0.len(), 12);
        assert_eq!(enumerate_orders(1, 100, false).0, vec![vec![0]]);
        let (capped, truncated) = enumerate_orders(6, 5, false);
        assert!(truncated && capped.len() == 5);
    }

    #[test]
    fn canonical_orders_are_enumerated() {
        for n in 1..7 {
            for path in [false, true] {
                let (all, _) = enumerate_orders(n, usize::MAX, path);
                for p in (0..n).permutations(n) {
                    assert!(all.contains(&canonical_order(&p, path)), "{p:?}");
                }
            }
        }
    }

    #[test]
    fn guess_counts() {
        let grid = GuessGrid {
            dim: 2,
            delta: 0.5,
            ratios: ratio_grid(0.5),
        };
        assert_eq!(grid.per_edge(), 24);
        let all: Vec<_> = enumerate_direction_guesses(&grid, 1).collect();
        assert_eq!(all.len(), 24);
        assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 24);
        let axis = EdgeGuess {
            major: 0,
            signs: vec![1, 1],
            ratios: vec![0, 0],
        };
        assert!(all.iter().any(|g| g[0] == axis));
        assert_eq!(enumerate_direction_guesses(&grid, 2).count(), 576);
        assert_eq!(grid.count(2), 576);
    }

    #[test]
    fn covering_guess_admits_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3, 4] {
            for eps in [0.25, 0.5, 1.0] {
                let grid = GuessGrid::new(eps, d);
                for _ in 0..2000 {
                    let v = Point::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
                    let g = grid.covering_guess(&v);
                    assert!(grid.admits(&v, &g, 1e-12));
                    let all_guesses = (0..grid.per_edge()).map(|i| grid.edge_guess(i));
                    assert!(all_guesses.into_iter().any(|h| h == g));
                }
            }
        }
    }
}

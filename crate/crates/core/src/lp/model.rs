//! The tour LP for one (configuration, visit order, direction guess) triple.
//!
//! Variables are one free shift `ρ_s` per signed base half-space followed by a
//! free point `x_c ∈ R^d` per configuration element. Rows come in three groups:
//! incidences `⟨x_c, n_s⟩ = ρ_s` for `s ∈ c`, separations putting the
//! separated pair of every input hyperplane on opposite sides, and the
//! sign/ratio bands of each tour edge. The objective is the guessed length of
//! each edge, linear in the edge's major coordinate.

use thiserror::Error;

use super::simplex::{LinearProgram, LpError, LpSolution, Relation, VarKind};
use crate::base_set::BaseSet;
use crate::enumeration::{separated_pair, ArcGraph, Configuration, EdgeGuess, EnumError, GuessGrid};
use crate::geom::{Hyperplane, Point, Tour};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Enum(#[from] EnumError),
    #[error("expected {expected} edge guesses, got {got}")]
    GuessCount { expected: usize, got: usize },
    #[error("vector lies outside the guessed bands")]
    GuessMismatch,
    #[error("order is not a permutation of the configuration elements")]
    BadOrder,
}

/// Separated pair `(c⁺, c⁻)` of every input hyperplane.
pub fn separated_pairs(g: &ArcGraph, inst: &[Hyperplane]) -> Result<Vec<(usize, usize)>, EnumError> {
    inst.iter().map(|h| separated_pair(g, h.normal())).collect()
}

/// Number of tour edges through `n` points; a lone point has none.
pub fn edge_count(n: usize, closed: bool) -> usize {
    match (n, closed) {
        (0 | 1, _) => 0,
        (_, true) => n,
        (_, false) => n - 1,
    }
}

#[derive(Clone, Debug)]
pub struct LpModel {
    pub lp: LinearProgram,
    pub dim: usize,
    pub num_shifts: usize,
    pub order: Vec<usize>,
    pub closed: bool,
    pub incidence_rows: usize,
    pub separation_rows: usize,
    pub angle_rows: usize,
}

impl LpModel {
    pub fn x_var(&self, element: usize, coord: usize) -> usize {
        self.num_shifts + element * self.dim + coord
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.lp.solve()
    }

    /// The tour through `x_{σ_0}, x_{σ_1}, …`.
    pub fn extract_tour(&self, sol: &LpSolution) -> Tour {
        let waypoints = self
            .order
            .iter()
            .map(|&c| Point::from_fn(self.dim, |l, _| sol.x[self.x_var(c, l)]))
            .collect();
        Tour {
            waypoints,
            closed: self.closed,
        }
    }
}

/// Assembles the LP; `pairs` come from [`separated_pairs`] on the configuration's arc graph.
#[allow(clippy::too_many_arguments)]
pub fn build_lp(
    config: &Configuration,
    pairs: &[(usize, usize)],
    order: &[usize],
    guesses: &[EdgeGuess],
    base: &BaseSet,
    inst: &[Hyperplane],
    grid: &GuessGrid,
    closed: bool,
) -> Result<LpModel, ModelError> {
    let d = base.dim();
    let m = config.len();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..m).collect::<Vec<_>>() {
        return Err(ModelError::BadOrder);
    }
    let edges = edge_count(m, closed);
    if guesses.len() != edges {
        return Err(ModelError::GuessCount {
            expected: edges,
            got: guesses.len(),
        });
    }
    let mut lp = LinearProgram::new();
    let num_shifts = base.num_signed();
    for _ in 0..num_shifts {
        lp.add_var(VarKind::Free, 0.0);
    }
    for _ in 0..m * d {
        lp.add_var(VarKind::Free, 0.0);
    }
    let xv = |c: usize, l: usize| num_shifts + c * d + l;

    let mut incidence_rows = 0;
    for (c, el) in config.elements().iter().enumerate() {
        for &s in el {
            let n = base.signed_normal(s);
            let mut coeffs: Vec<(usize, f64)> = (0..d).filter(|&l| n[l] != 0.0).map(|l| (xv(c, l), n[l])).collect();
            coeffs.push((s, -1.0));
            lp.add_row(coeffs, Relation::Eq, 0.0);
            incidence_rows += 1;
        }
    }

    let mut separation_rows = 0;
    for (h, &(plus, minus)) in inst.iter().zip(pairs) {
        let n = h.normal();
        // γ is the foot of the perpendicular, so ⟨γ, n⟩ is the offset.
        let gamma = h.foot().dot(n);
        let row = |c: usize| (0..d).filter(|&l| n[l] != 0.0).map(|l| (xv(c, l), n[l])).collect::<Vec<_>>();
        lp.add_row(row(plus), Relation::Ge, gamma);
        lp.add_row(row(minus), Relation::Le, gamma);
        separation_rows += 2;
    }

    let mut angle_rows = 0;
    for (k, g) in guesses.iter().enumerate() {
        let (a, b) = (order[k], order[(k + 1) % m]);
        // s·v_ℓ with v = x_b − x_a.
        let signed = |l: usize, s: f64| vec![(xv(b, l), s), (xv(a, l), -s)];
        let sm = g.signs[g.major] as f64;
        lp.add_row(signed(g.major, sm), Relation::Ge, 0.0);
        angle_rows += 1;
        let mut weight = 1.0;
        for l in (0..d).filter(|&l| l != g.major) {
            let sl = g.signs[l] as f64;
            let (lo, hi) = grid.band(g.ratios[l]);
            lp.add_row(signed(l, sl), Relation::Ge, 0.0);
            let mut upper = signed(l, sl);
            upper.extend(signed(g.major, -hi * sm));
            lp.add_row(upper, Relation::Le, 0.0);
            angle_rows += 2;
            if lo > 0.0 {
                let mut lower = signed(l, sl);
                lower.extend(signed(g.major, -lo * sm));
                lp.add_row(lower, Relation::Ge, 0.0);
                angle_rows += 1;
            }
            weight += grid.ratios[g.ratios[l]].powi(2);
        }
        let w = weight.sqrt();
        lp.add_cost(xv(b, g.major), sm * w);
        lp.add_cost(xv(a, g.major), -sm * w);
    }

    Ok(LpModel {
        lp,
        dim: d,
        num_shifts,
        order: order.to_vec(),
        closed,
        incidence_rows,
        separation_rows,
        angle_rows,
    })
}

/// Guessed length `|v_major| · √(1 + Σ r_ℓ²)` of `v`; errors if `v` is outside the bands.
pub fn approx_length(v: &Point, g: &EdgeGuess, grid: &GuessGrid) -> Result<f64, ModelError> {
    if !grid.admits(v, g, 1e-9) {
        return Err(ModelError::GuessMismatch);
    }
    Ok(guessed_length(v, g, grid))
}

fn guessed_length(v: &Point, g: &EdgeGuess, grid: &GuessGrid) -> f64 {
    let sum: f64 = (0..grid.dim)
        .filter(|&l| l != g.major)
        .map(|l| grid.ratios[g.ratios[l]].powi(2))
        .sum();
    v[g.major].abs() * (1.0 + sum).sqrt()
}

/// Sum of guessed edge lengths of `tour` under `guesses`, without band checks.
pub fn tour_proxy(tour: &Tour, guesses: &[EdgeGuess], grid: &GuessGrid) -> f64 {
    tour.segments()
        .zip(guesses)
        .map(|((a, b), g)| guessed_length(&(b - a), g, grid))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_set::build_axis_base_set;
    use crate::enumeration::{build_arc_graph, ratio_grid};
    use crate::geom::{point, tour_feasible};
    use crate::lp::simplex::LpStatus;
    use approx::assert_relative_eq;

    fn square_lines() -> Vec<Hyperplane> {
        [([1.0, 0.0], 0.0), ([1.0, 0.0], 1.0), ([0.0, 1.0], 0.0), ([0.0, 1.0], 1.0)]
            .iter()
            .map(|(a, c)| Hyperplane::from_coeffs(a, *c).unwrap())
            .collect()
    }

    fn square() -> Configuration {
        Configuration::new(vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]])
    }

    fn axis_guess(major: usize, sign: i8) -> EdgeGuess {
        let mut signs = vec![1, 1];
        signs[major] = sign;
        EdgeGuess {
            major,
            signs,
            ratios: vec![0, 0],
        }
    }

    /// (0,0) → (0,1) → (1,1) → (1,0) in element indices 0, 1, 3, 2.
    fn square_model(eps: f64) -> (LpModel, GuessGrid) {
        let base = build_axis_base_set(2);
        let c = square();
        let g = build_arc_graph(&c, &base).unwrap();
        let inst = square_lines();
        let pairs = separated_pairs(&g, &inst).unwrap();
        let grid = GuessGrid::new(eps, 2);
        let guesses = [axis_guess(1, 1), axis_guess(0, 1), axis_guess(1, -1), axis_guess(0, -1)];
        let m = build_lp(&c, &pairs, &[0, 1, 3, 2], &guesses, &base, &inst, &grid, true).unwrap();
        (m, grid)
    }

    #[test]
    fn square_model_shape_and_optimum() {
        let (m, grid) = square_model(0.5);
        assert_eq!(m.incidence_rows, 8);
        assert_eq!(m.separation_rows, 8);
        assert_eq!(m.lp.num_vars(), 8 + 2 * 4);
        let sol = m.solve().unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        let t = m.extract_tour(&sol);
        assert!(tour_feasible(&t, &square_lines()).is_feasible());
        assert_relative_eq!(t.length(), 4.0, epsilon = 1e-9);
        let w = (1.0 + (grid.delta / 2.0).powi(2)).sqrt();
        assert_relative_eq!(sol.objective, 4.0 * w, epsilon = 1e-9);
        for (p, q) in t.waypoints.iter().zip([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]) {
            assert!((p - point(&q)).amax() < 1e-9);
        }
    }

    #[test]
    fn wrong_turn_is_infeasible() {
        // Pin every edge to a +x direction: a closed tour cannot return.
        let base = build_axis_base_set(2);
        let c = square();
        let g = build_arc_graph(&c, &base).unwrap();
        let inst = square_lines();
        let pairs = separated_pairs(&g, &inst).unwrap();
        let grid = GuessGrid::new(0.5, 2);
        let guesses = vec![axis_guess(0, 1); 4];
        let m = build_lp(&c, &pairs, &[0, 1, 3, 2], &guesses, &base, &inst, &grid, true).unwrap();
        assert_eq!(m.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn single_element_point_tour() {
        let base = build_axis_base_set(2);
        let c = Configuration::new(vec![vec![0, 2]]);
        let g = build_arc_graph(&c, &base).unwrap();
        let inst: Vec<Hyperplane> = [([1.0, 0.0], 2.0), ([0.0, 1.0], 3.0), ([1.0, 1.0], 5.0)]
            .iter()
            .map(|(a, c)| Hyperplane::from_coeffs(a, *c).unwrap())
            .collect();
        let pairs = separated_pairs(&g, &inst).unwrap();
        let grid = GuessGrid::new(0.5, 2);
        let m = build_lp(&c, &pairs, &[0], &[], &base, &inst, &grid, true).unwrap();
        let sol = m.solve().unwrap();
        let t = m.extract_tour(&sol);
        assert_eq!(t.length(), 0.0);
        assert!((&t.waypoints[0] - point(&[2.0, 3.0])).amax() < 1e-9);
        assert!(tour_feasible(&t, &inst).is_feasible());
    }

    #[test]
    fn scaling_offsets_scales_objective() {
        let base = build_axis_base_set(2);
        let c = square();
        let g = build_arc_graph(&c, &base).unwrap();
        let grid = GuessGrid::new(0.5, 2);
        let guesses = [axis_guess(1, 1), axis_guess(0, 1), axis_guess(1, -1), axis_guess(0, -1)];
        let solve = |lambda: f64| {
            let inst: Vec<Hyperplane> = square_lines()
                .iter()
                .map(|h| Hyperplane::new(h.normal().clone(), h.offset() * lambda).unwrap())
                .collect();
            let pairs = separated_pairs(&g, &inst).unwrap();
            build_lp(&c, &pairs, &[0, 1, 3, 2], &guesses, &base, &inst, &grid, true)
                .unwrap()
                .solve()
                .unwrap()
                .objective
        };
        assert_relative_eq!(solve(3.5), 3.5 * solve(1.0), epsilon = 1e-9);
    }

    #[test]
    fn approx_length_examples() {
        let grid = GuessGrid {
            dim: 2,
            delta: 0.5,
            ratios: vec![0.25, 0.75, 1.6875],
        };
        let g = EdgeGuess {
            major: 1,
            signs: vec![1, 1],
            ratios: vec![1, 0],
        };
        assert_relative_eq!(approx_length(&point(&[3.0, 4.0]), &g, &grid).unwrap(), 5.0, epsilon = 1e-12);
        let small = EdgeGuess {
            major: 0,
            signs: vec![1, 1],
            ratios: vec![0, 0],
        };
        let l = approx_length(&point(&[1.0, 0.0]), &small, &grid).unwrap();
        assert_relative_eq!(l, (1.0f64 + 0.0625).sqrt(), epsilon = 1e-12);
        assert!((1.0..=1.5).contains(&l));
        assert_eq!(approx_length(&point(&[1.0, 1.0]), &small, &grid), Err(ModelError::GuessMismatch));
    }

    #[test]
    fn ratio_grid_is_consistent() {
        let grid = GuessGrid::new(0.5, 2);
        assert_eq!(grid.ratios, ratio_grid(grid.delta));
    }
}

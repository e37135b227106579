//! Dense two-phase primal simplex over `f64`.
//!
//! Rows are equilibrated to unit max-norm before solving. Entering columns
//! follow Dantzig's rule until the method stalls on degenerate pivots, after
//! which Bland's rule takes over for the rest of the phase; this keeps the
//! solver deterministic and cycle-free.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Constraint satisfaction tolerance for reported optimal solutions.
pub const TAU_LP: f64 = 1e-7;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_STREAK: usize = 30;
/// Residual infeasibility above which phase one declares the problem infeasible.
const PHASE_ONE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Free,
    NonNegative,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable assignment; empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective: f64,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("simplex failed numerically: {0}")]
    NumericalFailure(String),
}

/// A minimization problem `min cᵀx` over free and non-negative variables.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    kinds: Vec<VarKind>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, kind: VarKind, cost: f64) -> usize {
        self.kinds.push(kind);
        self.objective.push(cost);
        self.kinds.len() - 1
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    pub fn add_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] += cost;
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) {
        debug_assert!(coeffs.iter().all(|(j, a)| *j < self.kinds.len() && a.is_finite()));
        self.rows.push(Row { coeffs, relation, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn kinds(&self) -> &[VarKind] {
        &self.kinds
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint violation of `x`, each row measured relative to `1 + |rhs|`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|(j, a)| a * x[*j]).sum();
            let scale = 1.0 + row.rhs.abs();
            let v = match row.relation {
                Relation::Le => (lhs - row.rhs).max(0.0),
                Relation::Ge => (row.rhs - lhs).max(0.0),
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v / scale);
        }
        for (j, k) in self.kinds.iter().enumerate() {
            if *k == VarKind::NonNegative {
                worst = worst.max(-x[j]);
            }
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).map_or_else(
            || Ok(LpSolution::without_point(LpStatus::Infeasible)),
            |t| t.run(self),
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    m: usize,
    ncols: usize,
    width: usize,
    data: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    col_kind: Vec<ColKind>,
    /// Structural column pair per variable: (plus, minus for free vars).
    var_cols: Vec<(usize, Option<usize>)>,
    /// Equilibrated constraint matrix and rhs, kept for basis refinement.
    a0: Vec<f64>,
    b0: Vec<f64>,
    live_rows: Vec<usize>,
}

impl Tableau {
    /// `None` when a constant row is already violated.
    fn build(lp: &LinearProgram) -> Option<Self> {
        let mut var_cols = Vec::with_capacity(lp.kinds.len());
        let mut ns = 0;
        for k in &lp.kinds {
            match k {
                VarKind::NonNegative => {
                    var_cols.push((ns, None));
                    ns += 1;
                }
                VarKind::Free => {
                    var_cols.push((ns, Some(ns + 1)));
                    ns += 2;
                }
            }
        }

        let mut dense_rows: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
        for row in &lp.rows {
            let mut a = vec![0.0; ns];
            for (j, v) in &row.coeffs {
                let (p, n) = var_cols[*j];
                a[p] += v;
                if let Some(n) = n {
                    a[n] -= v;
                }
            }
            let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            if scale == 0.0 {
                let tol = TAU_LP * (1.0 + row.rhs.abs());
                let ok = match row.relation {
                    Relation::Le => row.rhs >= -tol,
                    Relation::Ge => row.rhs <= tol,
                    Relation::Eq => row.rhs.abs() <= tol,
                };
                if ok {
                    continue;
                }
                return None;
            }
            let mut rel = row.relation;
            let mut rhs = row.rhs / scale;
            a.iter_mut().for_each(|v| *v /= scale);
            if rhs < 0.0 {
                rhs = -rhs;
                a.iter_mut().for_each(|v| *v = -*v);
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            dense_rows.push((a, rel, rhs));
        }

        let m = dense_rows.len();
        let nslack = dense_rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let nart = dense_rows.iter().filter(|r| r.1 != Relation::Le).count();
        let ncols = ns + nslack + nart;
        let width = ncols + 1;
        let mut data = vec![0.0; m * width];
        let mut col_kind = vec![ColKind::Structural; ns];
        col_kind.extend(std::iter::repeat_n(ColKind::Slack, nslack));
        col_kind.extend(std::iter::repeat_n(ColKind::Artificial, nart));
        let mut basis = vec![0; m];
        let mut next_slack = ns;
        let mut next_art = ns + nslack;
        for (i, (a, rel, rhs)) in dense_rows.iter().enumerate() {
            let row = &mut data[i * width..(i + 1) * width];
            row[..ns].copy_from_slice(a);
            row[ncols] = *rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let a0 = data.clone();
        let b0 = (0..m).map(|i| data[i * width + ncols]).collect();
        Some(Self {
            m,
            ncols,
            width,
            data,
            cost: vec![0.0; width],
            basis,
            col_kind,
            var_cols,
            a0,
            b0,
            live_rows: (0..m).collect(),
        })
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.ncols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.data[r * w + c];
        {
            let row = &mut self.data[r * w..(r + 1) * w];
            row.iter_mut().for_each(|v| *v /= p);
            row[c] = 1.0;
        }
        let nz: Vec<usize> = (0..w).filter(|&j| self.data[r * w + j] != 0.0).collect();
        let pivot_row: Vec<f64> = nz.iter().map(|&j| self.data[r * w + j]).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.data[i * w + c];
            if f == 0.0 {
                continue;
            }
            let base = i * w;
            for (k, &j) in nz.iter().enumerate() {
                self.data[base + j] -= f * pivot_row[k];
            }
            self.data[base + c] = 0.0;
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (k, &j) in nz.iter().enumerate() {
                self.cost[j] -= f * pivot_row[k];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current cost row. `Ok(false)` means unbounded.
    fn iterate(&mut self, allow_artificial: bool) -> Result<bool, LpError> {
        let limit = 50 * (self.m + self.ncols) + 1000;
        let mut bland = false;
        let mut streak = 0;
        let mut is_basic = vec![false; self.ncols];
        for &b in &self.basis {
            is_basic[b] = true;
        }
        for _ in 0..limit {
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..self.ncols {
                if is_basic[j] || (!allow_artificial && self.col_kind[j] == ColKind::Artificial) {
                    continue;
                }
                let rc = self.cost[j];
                if rc < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = rc;
                }
            }
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * (1.0 + lr.abs());
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                streak += 1;
                if streak > DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            is_basic[self.basis[r]] = false;
            is_basic[c] = true;
            self.pivot(r, c);
        }
        Err(LpError::NumericalFailure("iteration limit reached".into()))
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.live_rows.remove(r);
        self.m -= 1;
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let ncols = self.ncols;
        // Phase 1: minimise the sum of artificials.
        let has_art = self.col_kind.contains(&ColKind::Artificial);
        if has_art {
            self.cost.iter_mut().for_each(|v| *v = 0.0);
            for j in 0..ncols {
                if self.col_kind[j] == ColKind::Artificial {
                    self.cost[j] = 1.0;
                }
            }
            for i in 0..self.m {
                if self.col_kind[self.basis[i]] == ColKind::Artificial {
                    for j in 0..self.width {
                        self.cost[j] -= self.data[i * self.width + j];
                    }
                }
            }
            if !self.iterate(true)? {
                return Err(LpError::NumericalFailure("phase one unbounded".into()));
            }
            let infeas = -self.cost[ncols];
            let bscale = 1.0 + self.b0.iter().fold(0.0_f64, |s, v| s.max(v.abs()));
            if infeas > PHASE_ONE_TOL * bscale {
                return Ok(LpSolution::without_point(LpStatus::Infeasible));
            }
            // Drive remaining artificials out of the basis or drop redundant rows.
            let mut i = 0;
            while i < self.m {
                if self.col_kind[self.basis[i]] != ColKind::Artificial {
                    i += 1;
                    continue;
                }
                let mut best: Option<(usize, f64)> = None;
                for j in 0..ncols {
                    if self.col_kind[j] == ColKind::Artificial || self.basis.contains(&j) {
                        continue;
                    }
                    let a = self.at(i, j).abs();
                    if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                        best = Some((j, a));
                    }
                }
                match best {
                    Some((j, _)) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => self.remove_row(i),
                }
            }
        }

        // Phase 2.
        let mut col_cost = vec![0.0; ncols];
        for (v, &(p, n)) in self.var_cols.iter().enumerate() {
            col_cost[p] = lp.objective[v];
            if let Some(n) = n {
                col_cost[n] = -lp.objective[v];
            }
        }
        self.cost = col_cost.clone();
        self.cost.push(0.0);
        for i in 0..self.m {
            let cb = col_cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.width {
                    self.cost[j] -= cb * self.data[i * self.width + j];
                }
            }
        }
        if !self.iterate(false)? {
            return Ok(LpSolution::without_point(LpStatus::Unbounded));
        }

        let mut cols = vec![0.0; ncols];
        for i in 0..self.m {
            cols[self.basis[i]] = self.rhs(i);
        }
        let mut x = self.assemble(&cols);
        let mut viol = lp.max_violation(&x);
        if viol > 1e-11 {
            if let Some(refined) = self.refine() {
                let xr = self.assemble(&refined);
                let vr = lp.max_violation(&xr);
                if vr < viol {
                    x = xr;
                    viol = vr;
                }
            }
        }
        if !viol.is_finite() || viol > TAU_LP {
            return Err(LpError::NumericalFailure(format!("constraint violation {viol:e}")));
        }
        let objective = lp.objective_value(&x);
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective,
        })
    }

    fn assemble(&self, cols: &[f64]) -> Vec<f64> {
        self.var_cols
            .iter()
            .map(|&(p, n)| cols[p] - n.map_or(0.0, |n| cols[n]))
            .collect()
    }

    /// Recomputes basic values from the equilibrated original system.
    fn refine(&self) -> Option<Vec<f64>> {
        let m = self.m;
        if m == 0 {
            return None;
        }
        let w = self.width;
        let b = DMatrix::from_fn(m, m, |i, k| self.a0[self.live_rows[i] * w + self.basis[k]]);
        let rhs = DVector::from_iterator(m, self.live_rows.iter().map(|&r| self.b0[r]));
        let sol = b.lu().solve(&rhs)?;
        let mut cols = vec![0.0; self.ncols];
        for k in 0..m {
            cols[self.basis[k]] = sol[k];
        }
        Some(cols)
    }
}

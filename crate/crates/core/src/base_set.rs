//! Base hyperplane sets: the fixed family of facet directions candidate
//! polytopes may use, and the constants that size it.
//!
//! Signed half-spaces are indexed `2i` for `+h_i` (inward normal `n_i`) and
//! `2i + 1` for `−h_i` (inward normal `−n_i`).

use std::f64::consts::PI;

use itertools::Itertools;
use thiserror::Error;

use crate::geom::{point, GeomError, HalfSpace, Hyperplane, Point, PolytopeH, TAU};
use crate::linalg;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaseSetError {
    #[error("full base set needs {tuples} grid tuples, above the cap of {cap}")]
    BaseSetTooLarge { tuples: u128, cap: usize },
    #[error("base set normals do not span the space, so no bounded polytope exists")]
    TrivialBaseSet,
    #[error("base set line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    FullGrid,
    Axis,
    Custom,
}

#[derive(Clone, Debug)]
pub struct BaseSet {
    dim: usize,
    hyperplanes: Vec<Hyperplane>,
    provenance: Provenance,
}

impl BaseSet {
    /// Canonicalizes, deduplicates and checks that the normals span `R^d`.
    pub fn from_normals(dim: usize, normals: Vec<Point>, provenance: Provenance) -> Result<Self, BaseSetError> {
        let mut hyperplanes: Vec<Hyperplane> = Vec::new();
        for n in normals {
            if n.len() != dim {
                return Err(GeomError::DimensionMismatch { expected: dim, got: n.len() }.into());
            }
            let h = Hyperplane::new(n, 0.0)?;
            if !hyperplanes.iter().any(|g| g.approx_eq(&h, 1e-9)) {
                hyperplanes.push(h);
            }
        }
        let set = Self {
            dim,
            hyperplanes,
            provenance,
        };
        set.check_nontrivial()?;
        Ok(set)
    }

    /// The polytope with every shift at `−1` must be bounded.
    fn check_nontrivial(&self) -> Result<(), BaseSetError> {
        let rows: Vec<&Point> = self.hyperplanes.iter().map(Hyperplane::normal).collect();
        if linalg::rank(&rows, self.dim) < self.dim {
            return Err(BaseSetError::TrivialBaseSet);
        }
        match PolytopeH::new(self.signed_halfspaces(&vec![-1.0; self.num_signed()])) {
            Ok(_) => Ok(()),
            Err(GeomError::UnboundedPolytope | GeomError::EmptyPolytope) => Err(BaseSetError::TrivialBaseSet),
            Err(e) => Err(e.into()),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// The hyperplanes through the origin.
    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn num_signed(&self) -> usize {
        2 * self.hyperplanes.len()
    }

    /// Inward unit normal of signed half-space `s`.
    pub fn signed_normal(&self, s: usize) -> Point {
        let n = self.hyperplanes[s / 2].normal();
        if s.is_multiple_of(2) {
            n.clone()
        } else {
            -n
        }
    }

    /// Half-spaces `⟨x, n_s⟩ ≥ ρ_s` for every signed index `s`.
    pub fn signed_halfspaces(&self, shifts: &[f64]) -> Vec<HalfSpace> {
        assert_eq!(shifts.len(), self.num_signed());
        (0..self.num_signed())
            .map(|s| HalfSpace::new(self.signed_normal(s), shifts[s]).expect("unit normal"))
            .collect()
    }

    /// Shifts of the smallest polytope in the family that contains `points`.
    pub fn enclosing_shifts(&self, points: &[Point]) -> Vec<f64> {
        (0..self.num_signed())
            .map(|s| {
                let n = self.signed_normal(s);
                points.iter().map(|p| p.dot(&n)).fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Index of the base hyperplane parallel to `normal`, if any.
    pub fn find(&self, normal: &Point) -> Option<usize> {
        let h = Hyperplane::new(normal.clone(), 0.0).ok()?;
        self.hyperplanes.iter().position(|g| g.approx_eq(&h, 1e-9))
    }
}

/// `k_{ε,d} = (⌈2π / atan(ε/√(d²−1))⌉ · √d)^{d−1}`.
pub fn k_eps_d(eps: f64, d: usize) -> f64 {
    let df = d as f64;
    let q = 2.0 * PI / (eps / (df * df - 1.0).sqrt()).atan();
    // Guard against a quotient that is an integer up to round-off.
    let c = (q - 1e-9).ceil();
    (c * df.sqrt()).powi(d as i32 - 1)
}

/// `ε / (k_{ε,d} · √d · (2^d + 1))`.
pub fn grid_granularity(eps: f64, d: usize) -> f64 {
    eps / (k_eps_d(eps, d) * (d as f64).sqrt() * ((1u64 << d) as f64 + 1.0))
}

/// The hyperplane through `d` affinely independent points.
pub fn hyperplane_from_tuple(points: &[Point]) -> Option<Hyperplane> {
    let d = points.first()?.len();
    if points.len() != d {
        return None;
    }
    let diffs: Vec<Point> = points[1..].iter().map(|p| p - &points[0]).collect();
    let refs: Vec<&Point> = diffs.iter().collect();
    let (rank, null) = linalg::rank_and_null_space(&refs, d);
    if rank != d - 1 || null.len() != 1 {
        return None;
    }
    let n = &null[0];
    Hyperplane::new(n.clone(), n.dot(&points[0])).ok()
}

/// Nonzero normals with entries in `{−1, 0, 1}`, one per sign class, the
/// coordinate directions first.
pub fn axis_normals(d: usize) -> Vec<Point> {
    let mut out: Vec<Point> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            point(&e)
        })
        .collect();
    for v in (0..d).map(|_| [-1.0, 0.0, 1.0]).multi_cartesian_product() {
        let nonzero = v.iter().filter(|x| **x != 0.0).count();
        let lead = v.iter().find(|x| **x != 0.0).copied().unwrap_or(0.0);
        if nonzero >= 2 && lead > 0.0 {
            out.push(point(&v));
        }
    }
    out
}

/// Every hyperplane through `d` points of the grid of the given granularity
/// on the unit hypercube, moved to the origin.
pub fn full_grid_normals(d: usize, granularity: f64, cap: usize) -> Result<Vec<Point>, BaseSetError> {
    let steps = (1.0 / granularity - 1e-9).ceil() as usize;
    let per_axis = steps + 1;
    let num_points = (per_axis as u128).pow(d as u32);
    let mut tuples: u128 = 1;
    for i in 0..d as u128 {
        tuples = tuples.saturating_mul(num_points.saturating_sub(i)) / (i + 1);
    }
    if tuples > cap as u128 {
        return Err(BaseSetError::BaseSetTooLarge { tuples, cap });
    }
    let coords: Vec<f64> = (0..per_axis).map(|i| (i as f64 * granularity).min(1.0)).collect();
    let grid: Vec<Point> = (0..d)
        .map(|_| coords.iter().copied())
        .multi_cartesian_product()
        .map(|c| point(&c))
        .collect();
    let mut normals: Vec<Hyperplane> = Vec::new();
    for tuple in grid.iter().cloned().combinations(d) {
        if let Some(h) = hyperplane_from_tuple(&tuple) {
            let h = h.through_origin();
            if !normals.iter().any(|g| g.approx_eq(&h, 1e-9)) {
                normals.push(h);
            }
        }
    }
    // Sorted canonical keys give an order independent of the tuple walk.
    normals.sort_by(|a, b| {
        a.normal()
            .iter()
            .zip(b.normal().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(normals.into_iter().map(|h| h.normal().clone()).collect())
}

pub fn build_axis_base_set(d: usize) -> BaseSet {
    BaseSet::from_normals(d, axis_normals(d), Provenance::Axis).expect("axis normals span the space")
}

pub fn build_full_base_set(eps: f64, d: usize, cap: usize) -> Result<BaseSet, BaseSetError> {
    build_full_base_set_with_granularity(d, grid_granularity(eps, d), cap)
}

pub fn build_full_base_set_with_granularity(d: usize, granularity: f64, cap: usize) -> Result<BaseSet, BaseSetError> {
    BaseSet::from_normals(d, full_grid_normals(d, granularity, cap)?, Provenance::FullGrid)
}

/// One normal per non-empty line, `d` reals separated by whitespace.
pub fn parse_base_set(text: &str, d: usize) -> Result<BaseSet, BaseSetError> {
    let mut normals = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| BaseSetError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        if v.len() != d {
            return Err(BaseSetError::Parse {
                line: i + 1,
                message: format!("expected {d} numbers, found {}", v.len()),
            });
        }
        if v.iter().any(|x| !x.is_finite()) || v.iter().all(|x| x.abs() <= TAU) {
            return Err(BaseSetError::Parse {
                line: i + 1,
                message: "normal must be finite and nonzero".into(),
            });
        }
        normals.push(point(&v));
    }
    BaseSet::from_normals(d, normals, Provenance::Custom)
}

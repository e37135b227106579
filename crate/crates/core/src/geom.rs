//! Vectors, hyperplanes, polytopes in both representations, tours, and the
//! feasibility predicates the rest of the crate builds on.
//!
//! Normals are stored unit length so that the absolute tolerance [`TAU`]
//! means the same thing for every hyperplane.

use itertools::Itertools;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::lp::simplex::{LinearProgram, LpStatus, Relation, VarKind};

pub type Point = DVector<f64>;

/// Absolute tolerance on normalized data.
pub const TAU: f64 = 1e-9;

/// Tolerance scaled by the magnitude of the quantity it guards.
#[inline]
pub fn tol(scale: f64) -> f64 {
    TAU * (1.0 + scale.abs())
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("normal vector is zero")]
    ZeroNormal,
    #[error("polytope is unbounded")]
    UnboundedPolytope,
    #[error("polytope is empty")]
    EmptyPolytope,
    #[error("point set is not fully dimensional")]
    DegenerateBody,
    #[error("shortcut keep set is empty")]
    EmptyKeepSet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("linear program failed: {0}")]
    Lp(String),
}

pub fn point(coords: &[f64]) -> Point {
    Point::from_column_slice(coords)
}

/// Affine hyperplane `⟨normal, x⟩ = offset`, canonicalized: unit normal whose
/// first nonzero coordinate is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Hyperplane {
    normal: Point,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Point, offset: f64) -> Result<Self, GeomError> {
        let norm = normal.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(GeomError::ZeroNormal);
        }
        let mut n = normal / norm;
        let mut c = offset / norm;
        let lead = n.iter().find(|v| v.abs() > TAU).copied().unwrap_or(0.0);
        if lead < 0.0 {
            n = -n;
            c = -c;
        }
        Ok(Self { normal: n, offset: c })
    }

    pub fn from_coeffs(coeffs: &[f64], offset: f64) -> Result<Self, GeomError> {
        Self::new(point(coeffs), offset)
    }

    pub fn normal(&self) -> &Point {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// `⟨p, n⟩ − c`.
    pub fn signed_distance(&self, p: &Point) -> f64 {
        p.dot(&self.normal) - self.offset
    }

    pub fn contains(&self, p: &Point, tau: f64) -> bool {
        self.signed_distance(p).abs() <= tau * (1.0 + self.offset.abs())
    }

    /// Foot of the perpendicular from the origin.
    pub fn foot(&self) -> Point {
        &self.normal * self.offset
    }

    pub fn approx_eq(&self, other: &Self, tau: f64) -> bool {
        (&self.normal - &other.normal).amax() <= tau && (self.offset - other.offset).abs() <= tau
    }

    /// The parallel hyperplane through the origin.
    pub fn through_origin(&self) -> Self {
        Self {
            normal: self.normal.clone(),
            offset: 0.0,
        }
    }
}

/// Closed half-space `⟨inward_normal, x⟩ ≥ offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    inward_normal: Point,
    offset: f64,
}

impl HalfSpace {
    pub fn new(inward_normal: Point, offset: f64) -> Result<Self, GeomError> {
        let norm = inward_normal.norm();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(GeomError::ZeroNormal);
        }
        Ok(Self {
            inward_normal: inward_normal / norm,
            offset: offset / norm,
        })
    }

    pub fn inward_normal(&self) -> &Point {
        &self.inward_normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn boundary(&self) -> Hyperplane {
        Hyperplane::new(self.inward_normal.clone(), self.offset).expect("unit normal")
    }

    /// `⟨p, n⟩ − offset`; non-negative inside.
    pub fn slack(&self, p: &Point) -> f64 {
        p.dot(&self.inward_normal) - self.offset
    }

    pub fn contains(&self, p: &Point, tau: f64) -> bool {
        self.slack(p) >= -tau * (1.0 + self.offset.abs())
    }

    pub fn with_offset(&self, offset: f64) -> Self {
        Self {
            inward_normal: self.inward_normal.clone(),
            offset,
        }
    }
}

/// H-representation: a bounded, nonempty intersection of half-spaces. The
/// offsets are the shifts `ρ` of each half-space along its inward normal.
#[derive(Clone, Debug)]
pub struct PolytopeH {
    dim: usize,
    halfspaces: Vec<HalfSpace>,
}

/// A vertex together with the indices of the half-spaces tight at it.
#[derive(Clone, Debug)]
pub struct IncidentVertex {
    pub position: Point,
    pub tight: Vec<usize>,
}

impl PolytopeH {
    /// Checks nonemptiness and boundedness with `2d` linear programs maximizing `±e_i`.
    pub fn new(halfspaces: Vec<HalfSpace>) -> Result<Self, GeomError> {
        let dim = halfspaces.first().map(|h| h.inward_normal.len()).ok_or(GeomError::UnboundedPolytope)?;
        for h in &halfspaces {
            if h.inward_normal.len() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: h.inward_normal.len(),
                });
            }
        }
        for axis in 0..dim {
            for sign in [1.0, -1.0] {
                let mut lp = LinearProgram::new();
                let vars: Vec<usize> = (0..dim)
                    .map(|j| lp.add_var(VarKind::Free, if j == axis { -sign } else { 0.0 }))
                    .collect();
                for h in &halfspaces {
                    let coeffs = vars.iter().map(|&j| (j, h.inward_normal[j])).collect();
                    lp.add_row(coeffs, Relation::Ge, h.offset);
                }
                match lp.solve().map_err(|e| GeomError::Lp(e.to_string()))?.status {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => return Err(GeomError::EmptyPolytope),
                    LpStatus::Unbounded => return Err(GeomError::UnboundedPolytope),
                }
            }
        }
        Ok(Self { dim, halfspaces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[HalfSpace] {
        &self.halfspaces
    }

    pub fn shifts(&self) -> Vec<f64> {
        self.halfspaces.iter().map(|h| h.offset).collect()
    }

    pub fn contains(&self, p: &Point, tau: f64) -> bool {
        self.halfspaces.iter().all(|h| h.contains(p, tau))
    }

    /// Every vertex with its tight half-spaces, found by brute force over
    /// `d`-subsets of bounding hyperplanes. Points closer than `10·τ` are merged.
    pub fn incident_vertices(&self) -> Vec<IncidentVertex> {
        let d = self.dim;
        let mut clusters: Vec<(Point, usize)> = Vec::new();
        for subset in (0..self.halfspaces.len()).combinations(d) {
            let rows: Vec<&Point> = subset.iter().map(|&i| &self.halfspaces[i].inward_normal).collect();
            let rhs: Vec<f64> = subset.iter().map(|&i| self.halfspaces[i].offset).collect();
            let Some(p) = linalg::solve_square(&rows, &rhs) else {
                continue;
            };
            if !self.contains(&p, 10.0 * TAU) {
                continue;
            }
            let merge = 10.0 * tol(p.amax());
            match clusters.iter_mut().find(|(c, k)| (c / (*k as f64) - &p).amax() <= merge) {
                Some((sum, k)) => {
                    *sum += &p;
                    *k += 1;
                }
                None => clusters.push((p, 1)),
            }
        }
        clusters
            .into_iter()
            .map(|(sum, k)| {
                let position = sum / k as f64;
                let tight = self
                    .halfspaces
                    .iter()
                    .enumerate()
                    .filter(|(_, h)| h.slack(&position).abs() <= 10.0 * tol(h.offset.abs().max(position.amax())))
                    .map(|(i, _)| i)
                    .collect();
                IncidentVertex { position, tight }
            })
            .collect()
    }
}

/// Vertex enumeration of a bounded H-polytope.
pub fn vertex_enumerate(p: &PolytopeH) -> Result<PolytopeV, GeomError> {
    let verts: Vec<Point> = p.incident_vertices().into_iter().map(|v| v.position).collect();
    if verts.is_empty() {
        return Err(GeomError::EmptyPolytope);
    }
    Ok(PolytopeV { vertices: verts })
}

/// V-representation: the convex hull of a vertex list with no redundant points.
#[derive(Clone, Debug, PartialEq)]
pub struct PolytopeV {
    vertices: Vec<Point>,
}

impl PolytopeV {
    /// Removes near-duplicates and points inside the hull of the others.
    pub fn from_points(points: Vec<Point>) -> Result<Self, GeomError> {
        if points.is_empty() {
            return Err(GeomError::EmptyPolytope);
        }
        let mut uniq: Vec<Point> = Vec::new();
        for p in points {
            if !uniq.iter().any(|q| (q - &p).amax() <= 10.0 * tol(p.amax())) {
                uniq.push(p);
            }
        }
        let mut keep = vec![true; uniq.len()];
        for i in 0..uniq.len() {
            let others: Vec<Point> = uniq
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i && keep[*j])
                .map(|(_, q)| q.clone())
                .collect();
            if !others.is_empty() && hull_contains(&others, &uniq[i])? {
                keep[i] = false;
            }
        }
        let vertices = uniq.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect();
        Ok(Self { vertices })
    }

    /// Trusts that `vertices` are already in convex position.
    pub fn from_vertices_unchecked(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Facet half-spaces by brute force over `d`-subsets of vertices.
    pub fn facets(&self) -> Result<Vec<HalfSpace>, GeomError> {
        let d = self.dim();
        let verts = &self.vertices;
        let scale = verts.iter().map(|v| v.amax()).fold(1.0_f64, f64::max);
        let mut facets: Vec<HalfSpace> = Vec::new();
        for subset in (0..verts.len()).combinations(d) {
            let base = &verts[subset[0]];
            let diffs: Vec<Point> = subset[1..].iter().map(|&i| &verts[i] - base).collect();
            let refs: Vec<&Point> = diffs.iter().collect();
            let (rank, null) = linalg::rank_and_null_space(&refs, d);
            if rank != d - 1 || null.len() != 1 {
                continue;
            }
            let n = &null[0];
            let c = n.dot(base);
            let eps = 1e3 * TAU * scale;
            let (mut above, mut below) = (false, false);
            for v in verts {
                let s = v.dot(n) - c;
                above |= s > eps;
                below |= s < -eps;
            }
            let h = match (above, below) {
                (true, false) => HalfSpace::new(n.clone(), c)?,
                (false, true) => HalfSpace::new(-n, -c)?,
                (false, false) => return Err(GeomError::DegenerateBody),
                (true, true) => continue,
            };
            let dup = facets.iter().any(|f| {
                (&f.inward_normal - &h.inward_normal).amax() <= 1e-7 && (f.offset - h.offset).abs() <= 1e-7 * scale
            });
            if !dup {
                facets.push(h);
            }
        }
        if facets.len() < d + 1 {
            return Err(GeomError::DegenerateBody);
        }
        Ok(facets)
    }

    pub fn to_h(&self) -> Result<PolytopeH, GeomError> {
        PolytopeH::new(self.facets()?)
    }

    pub fn centroid(&self) -> Point {
        let mut c = Point::zeros(self.dim());
        for v in &self.vertices {
            c += v;
        }
        c / self.vertices.len() as f64
    }
}

/// Hull membership by an LP feasibility problem over convex weights.
pub fn hull_contains(points: &[Point], p: &Point) -> Result<bool, GeomError> {
    let d = p.len();
    let mut lp = LinearProgram::new();
    let lambda: Vec<usize> = points.iter().map(|_| lp.add_var(VarKind::NonNegative, 0.0)).collect();
    for k in 0..d {
        let coeffs = lambda.iter().zip(points).map(|(&j, q)| (j, q[k])).collect();
        lp.add_row(coeffs, Relation::Eq, p[k]);
    }
    lp.add_row(lambda.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    let sol = lp.solve().map_err(|e| GeomError::Lp(e.to_string()))?;
    Ok(sol.is_optimal())
}

/// By convexity: the hull meets `h` iff the vertex dot products bracket the offset.
pub fn polytope_intersects_hyperplane(p: &PolytopeV, h: &Hyperplane) -> bool {
    let (lo, hi) = p.vertices.iter().map(|v| v.dot(h.normal())).fold(
        (f64::INFINITY, f64::NEG_INFINITY),
        |(lo, hi), x| (lo.min(x), hi.max(x)),
    );
    let t = tol(h.offset());
    lo <= h.offset() + t && h.offset() - t <= hi
}

/// A polyline through `waypoints`, closed back to the start when `closed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tour {
    #[serde(with = "points_serde")]
    pub waypoints: Vec<Point>,
    pub closed: bool,
}

impl Tour {
    pub fn closed(waypoints: Vec<Point>) -> Self {
        Self { waypoints, closed: true }
    }

    pub fn open(waypoints: Vec<Point>) -> Self {
        Self {
            waypoints,
            closed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    /// Segments in traversal order, including the closing edge when closed.
    pub fn segments(&self) -> impl Iterator<Item = (&Point, &Point)> {
        let n = self.waypoints.len();
        let count = match (n, self.closed) {
            (0 | 1, _) => 0,
            (_, true) => n,
            (_, false) => n - 1,
        };
        (0..count).map(move |i| (&self.waypoints[i], &self.waypoints[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        tour_length(self)
    }
}

pub fn tour_length(t: &Tour) -> f64 {
    t.segments().map(|(a, b)| (b - a).norm()).sum()
}

/// Per-hyperplane visit record; `witness` is a point of the tour on the hyperplane.
#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub witnesses: Vec<Option<Point>>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.witnesses.iter().all(Option::is_some)
    }

    pub fn unvisited(&self) -> Vec<usize> {
        self.witnesses
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_none())
            .map(|(i, _)| i)
            .collect()
    }
}

fn segment_witness(a: &Point, b: &Point, h: &Hyperplane) -> Option<Point> {
    let t = tol(h.offset());
    let fa = h.signed_distance(a);
    let fb = h.signed_distance(b);
    if fa.abs() <= t {
        Some(a.clone())
    } else if fb.abs() <= t {
        Some(b.clone())
    } else if fa * fb < 0.0 {
        let s = fa / (fa - fb);
        Some(a + (b - a) * s)
    } else {
        None
    }
}

pub fn tour_feasible(t: &Tour, inst: &[Hyperplane]) -> FeasibilityReport {
    let witnesses = inst
        .iter()
        .map(|h| {
            if t.waypoints.len() == 1 {
                let p = &t.waypoints[0];
                return (h.signed_distance(p).abs() <= tol(h.offset())).then(|| p.clone());
            }
            t.segments().find_map(|(a, b)| segment_witness(a, b, h))
        })
        .collect();
    FeasibilityReport { witnesses }
}

/// `{c + factor·(p − c)}`.
pub fn scale_points(ps: &[Point], center: &Point, factor: f64) -> Vec<Point> {
    assert!(factor > 0.0, "scaling factor must be positive");
    ps.iter().map(|p| center + (p - center) * factor).collect()
}

/// Keeps the waypoints at `keep` in their original cyclic order.
pub fn shortcut_tour(t: &Tour, keep: &[usize]) -> Result<Tour, GeomError> {
    let mut idx: Vec<usize> = keep.iter().copied().filter(|&i| i < t.waypoints.len()).collect();
    idx.sort_unstable();
    idx.dedup();
    if idx.is_empty() {
        return Err(GeomError::EmptyKeepSet);
    }
    Ok(Tour {
        waypoints: idx.into_iter().map(|i| t.waypoints[i].clone()).collect(),
        closed: t.closed,
    })
}

pub(crate) mod points_serde {
    use super::Point;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(pts: &[Point], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().copied().collect()).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Point>, D::Error> {
        let raw: Vec<Vec<f64>> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(Point::from_vec).collect())
    }
}

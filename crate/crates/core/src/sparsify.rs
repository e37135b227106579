//! Polytope sparsification: normalize by the maximum-volume inscribed
//! ellipsoid, keep the vertices that support a fixed fan of rays, and snap
//! the expanded result to a grid so its facets take finitely many directions.

use std::f64::consts::PI;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::base_set::k_eps_d;
use crate::geom::{scale_points, GeomError, HalfSpace, Point, PolytopeH, PolytopeV, TAU};
use crate::lp::simplex::{LinearProgram, LpStatus, Relation, VarKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SparsifyError {
    #[error("body is not fully dimensional")]
    DegenerateBody,
    #[error("containment check failed: {0}")]
    ContainmentViolation(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// `{center + shape · u : ‖u‖ ≤ 1}` with `shape` symmetric positive definite.
#[derive(Clone, Debug)]
pub struct Ellipsoid {
    pub center: Point,
    pub shape: DMatrix<f64>,
}

impl Ellipsoid {
    /// `max_{x ∈ E} ⟨x, a⟩ − ⟨center, a⟩`.
    pub fn support(&self, a: &Point) -> f64 {
        (&self.shape * a).norm()
    }

    pub fn volume_factor(&self) -> f64 {
        self.shape.determinant()
    }

    /// Whether the ellipsoid scaled by `factor` about its center lies in every half-space.
    pub fn fits_in(&self, hs: &[HalfSpace], factor: f64) -> bool {
        hs.iter()
            .all(|h| h.inward_normal().dot(&self.center) - factor * self.support(h.inward_normal()) >= h.offset() - TAU)
    }
}

/// Chebyshev center and radius of `⟨a_i, x⟩ ≥ b_i` with unit `a_i`.
fn chebyshev(hs: &[HalfSpace]) -> Result<(Point, f64), SparsifyError> {
    let d = hs[0].inward_normal().len();
    let mut lp = LinearProgram::new();
    let x: Vec<usize> = (0..d).map(|_| lp.add_var(VarKind::Free, 0.0)).collect();
    let r = lp.add_var(VarKind::NonNegative, -1.0);
    for h in hs {
        let mut row: Vec<(usize, f64)> = x.iter().map(|&j| (j, h.inward_normal()[j])).collect();
        row.push((r, -1.0));
        lp.add_row(row, Relation::Ge, h.offset());
    }
    let sol = lp.solve().map_err(|e| GeomError::Lp(e.to_string()))?;
    if sol.status != LpStatus::Optimal {
        return Err(SparsifyError::DegenerateBody);
    }
    Ok((Point::from_fn(d, |i, _| sol.x[x[i]]), sol.x[r]))
}

/// Packs symmetric `B` (upper triangle, row major) and `c` into one vector.
struct Param {
    d: usize,
}

impl Param {
    fn len(&self) -> usize {
        self.d * (self.d + 1) / 2 + self.d
    }

    fn unpack(&self, z: &DVector<f64>) -> (DMatrix<f64>, Point) {
        let d = self.d;
        let mut b = DMatrix::zeros(d, d);
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                b[(i, j)] = z[k];
                b[(j, i)] = z[k];
                k += 1;
            }
        }
        (b, Point::from_fn(d, |i, _| z[k + i]))
    }

    fn pack(&self, b: &DMatrix<f64>, c: &Point) -> DVector<f64> {
        let d = self.d;
        let mut z = DVector::zeros(self.len());
        let mut k = 0;
        for i in 0..d {
            for j in i..d {
                z[k] = b[(i, j)];
                k += 1;
            }
        }
        for i in 0..d {
            z[k + i] = c[i];
        }
        z
    }
}

/// Barrier function `−log det B − μ Σ log s_i` with `s_i = ⟨a_i, c⟩ − ‖B a_i‖ − b_i`.
/// `None` outside the domain.
fn barrier(p: &Param, a: &[Point], b: &[f64], mu: f64, z: &DVector<f64>) -> Option<(f64, DVector<f64>)> {
    let d = p.d;
    let (bm, c) = p.unpack(z);
    let chol = bm.clone().cholesky()?;
    let logdet: f64 = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
    let binv = chol.inverse();
    let mut val = -logdet;
    let mut gb = -binv.clone();
    let mut gc = Point::zeros(d);
    for (ai, &bi) in a.iter().zip(b) {
        let ba = &bm * ai;
        let nrm = ba.norm();
        let s = ai.dot(&c) - nrm - bi;
        if s <= 0.0 {
            return None;
        }
        val -= mu * s.ln();
        // ∂s/∂B = −sym(w aᵀ) with w = B a / ‖B a‖.
        let w = if nrm > 0.0 { ba / nrm } else { Point::zeros(d) };
        let outer = (&w * ai.transpose() + ai * w.transpose()) * 0.5;
        gb += outer * (mu / s);
        gc -= ai * (mu / s);
    }
    let mut g = DVector::zeros(p.len());
    let mut k = 0;
    for i in 0..d {
        for j in i..d {
            g[k] = if i == j { gb[(i, j)] } else { 2.0 * gb[(i, j)] };
            k += 1;
        }
    }
    for i in 0..d {
        g[k + i] = gc[i];
    }
    Some((val, g))
}

/// Maximum-volume ellipsoid inside a bounded, fully dimensional H-polytope,
/// by a barrier path with Newton steps (Hessian from central differences of
/// the analytic gradient), started at the Chebyshev ball.
pub fn max_inscribed_ellipsoid(p: &PolytopeH) -> Result<Ellipsoid, SparsifyError> {
    let hs = p.halfspaces();
    let d = p.dim();
    let (x0, r) = chebyshev(hs)?;
    if r <= 1e-9 * (1.0 + x0.amax()) {
        return Err(SparsifyError::DegenerateBody);
    }
    // Work in coordinates where the Chebyshev ball is the unit ball at the origin.
    let a: Vec<Point> = hs.iter().map(|h| h.inward_normal().clone()).collect();
    let b: Vec<f64> = hs.iter().map(|h| (h.offset() - h.inward_normal().dot(&x0)) / r).collect();
    let param = Param { d };
    let mut z = param.pack(&(DMatrix::identity(d, d) * 0.5), &Point::zeros(d));
    let n = param.len();
    let mut mu = 1.0;
    let m = a.len() as f64;
    loop {
        for _ in 0..100 {
            let (f0, g0) = barrier(&param, &a, &b, mu, &z).expect("iterate stays interior");
            // Steps stay well inside the smallest slack so both probes remain interior.
            let (bm, c) = param.unpack(&z);
            let s_min = a
                .iter()
                .zip(&b)
                .map(|(ai, bi)| ai.dot(&c) - (&bm * ai).norm() - bi)
                .fold(f64::INFINITY, f64::min);
            let eig_min = bm.symmetric_eigenvalues().min();
            let mut h = DMatrix::zeros(n, n);
            for k in 0..n {
                let step = 1e-3 * s_min.min(eig_min).min(1.0);
                let mut zp = z.clone();
                let mut zm = z.clone();
                zp[k] += step;
                zm[k] -= step;
                match (barrier(&param, &a, &b, mu, &zp), barrier(&param, &a, &b, mu, &zm)) {
                    (Some((_, gp)), Some((_, gm))) => h.set_column(k, &((gp - gm) / (2.0 * step))),
                    _ => h[(k, k)] = 1.0 / (step * step),
                }
            }
            let h = (&h + h.transpose()) * 0.5;
            let dir = match h.clone().cholesky() {
                Some(ch) => -ch.solve(&g0),
                None => -&g0,
            };
            let decrement = -g0.dot(&dir);
            if decrement < 1e-14 {
                break;
            }
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-12 {
                let cand = &z + &dir * t;
                if let Some((f1, _)) = barrier(&param, &a, &b, mu, &cand) {
                    if f1 <= f0 - 0.25 * t * decrement {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if mu * m < 1e-11 {
            break;
        }
        mu *= 0.1;
    }
    let (bm, c) = param.unpack(&z);
    Ok(Ellipsoid {
        center: x0 + c * r,
        shape: bm * r,
    })
}

/// `x ↦ A (x − center)`.
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub center: Point,
    pub linear: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &Point) -> Point {
        &self.linear * (x - &self.center)
    }

    pub fn invert(&self, y: &Point) -> Point {
        &self.inverse * y + &self.center
    }
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub map: AffineMap,
    pub ellipsoid: Ellipsoid,
    /// Vertices in normalized coordinates, in the input order.
    pub vertices: Vec<Point>,
    /// Facets in normalized coordinates.
    pub facets: Vec<HalfSpace>,
}

/// Maps the inscribed ellipsoid to the unit ball at the origin and checks
/// that every vertex lands within radius `d(1 + 1e-4)`.
pub fn normalize_polytope(p: &PolytopeV) -> Result<Normalized, SparsifyError> {
    let d = p.dim();
    let facets = p.facets().map_err(|e| match e {
        GeomError::DegenerateBody => SparsifyError::DegenerateBody,
        e => e.into(),
    })?;
    let e = max_inscribed_ellipsoid(&PolytopeH::new(facets.clone())?)?;
    let inverse = e.shape.clone();
    let linear = e.shape.clone().try_inverse().ok_or(SparsifyError::DegenerateBody)?;
    let map = AffineMap {
        center: e.center.clone(),
        linear,
        inverse,
    };
    let vertices: Vec<Point> = p.vertices().iter().map(|v| map.apply(v)).collect();
    let limit = d as f64 * (1.0 + 1e-4);
    if let Some(v) = vertices.iter().find(|v| v.norm() > limit) {
        return Err(SparsifyError::ContainmentViolation(format!(
            "normalized vertex at radius {} exceeds {limit}",
            v.norm()
        )));
    }
    // ⟨a, x⟩ ≥ b with x = B y + c becomes ⟨Bᵀa, y⟩ ≥ b − ⟨a, c⟩.
    let facets = facets
        .iter()
        .map(|h| {
            let n = e.shape.transpose() * h.inward_normal();
            HalfSpace::new(n, h.offset() - h.inward_normal().dot(&e.center))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Normalized {
        map,
        ellipsoid: e,
        vertices,
        facets,
    })
}

/// The fan of ray directions: `m` equally spaced angles per hyperspherical coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct RaySet {
    pub dim: usize,
    pub theta: f64,
    pub angles: Vec<f64>,
}

impl RaySet {
    pub fn count(&self) -> usize {
        self.angles.len().pow(self.dim as u32 - 1)
    }

    /// Unit directions `(cos φ₁, sin φ₁ cos φ₂, sin φ₁ sin φ₂ cos φ₃, …)`.
    pub fn directions(&self) -> Vec<Point> {
        let d = self.dim;
        (0..d - 1)
            .map(|_| self.angles.iter().copied())
            .multi_cartesian_product()
            .map(|phi| {
                let mut v = Point::zeros(d);
                let mut s = 1.0;
                for (i, a) in phi.iter().enumerate() {
                    v[i] = s * a.cos();
                    s *= a.sin();
                }
                v[d - 1] = s;
                v
            })
            .collect()
    }
}

/// Angle `θ = 2π/m` for the smallest `m` with `θ ≤ atan(ε/√(d²−1))/√d`.
pub fn ray_set(eps: f64, d: usize) -> RaySet {
    let df = d as f64;
    let bound = (eps / (df * df - 1.0).sqrt()).atan() / df.sqrt();
    let m = (2.0 * PI / bound - 1e-9).ceil().max(3.0) as usize;
    let theta = 2.0 * PI / m as f64;
    RaySet {
        dim: d,
        theta,
        angles: (0..m).map(|i| i as f64 * theta).collect(),
    }
}

#[derive(Clone, Debug)]
pub struct SparsifyReport {
    /// The center `c` of the expansion.
    pub center: Point,
    /// Indices into the input vertex list.
    pub selected: Vec<usize>,
    /// `c + (1+ε)(v − c)` for the selected vertices.
    pub expanded: PolytopeV,
    /// `min_u (s*(u) − 1)` over input vertices `u`, where `s*(u)` is the
    /// largest `s` with `c + s(u − c)` inside the expanded hull.
    pub containment_margin: f64,
    pub num_vertices: usize,
    pub num_selected: usize,
    pub rays: usize,
}

/// Largest `s` with `center + s(u − center) ∈ conv(hull)`; `None` if even `s = 0` fails.
pub fn radial_reach(hull: &[Point], center: &Point, u: &Point) -> Option<f64> {
    let d = center.len();
    let mut lp = LinearProgram::new();
    let s = lp.add_var(VarKind::NonNegative, -1.0);
    let lam: Vec<usize> = hull.iter().map(|_| lp.add_var(VarKind::NonNegative, 0.0)).collect();
    let dir = u - center;
    for k in 0..d {
        let mut row: Vec<(usize, f64)> = lam.iter().zip(hull).map(|(&j, w)| (j, w[k] - center[k])).collect();
        row.push((s, -dir[k]));
        lp.add_row(row, Relation::Eq, 0.0);
    }
    lp.add_row(lam.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    let sol = lp.solve().ok()?;
    match sol.status {
        LpStatus::Optimal => Some(sol.x[s]),
        LpStatus::Unbounded => Some(f64::INFINITY),
        LpStatus::Infeasible => None,
    }
}

/// Convex weights of at most `d` of `pts` reproducing `p` (a basic LP solution).
fn caratheodory(pts: &[(usize, &Point)], p: &Point) -> Option<Vec<usize>> {
    let d = p.len();
    let mut lp = LinearProgram::new();
    let lam: Vec<usize> = pts.iter().map(|_| lp.add_var(VarKind::NonNegative, 0.0)).collect();
    for k in 0..d {
        lp.add_row(lam.iter().zip(pts).map(|(&j, (_, q))| (j, q[k])).collect(), Relation::Eq, p[k]);
    }
    lp.add_row(lam.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0);
    let sol = lp.solve().ok()?;
    if !sol.is_optimal() {
        return None;
    }
    Some(lam.iter().zip(pts).filter(|(&j, _)| sol.x[j] > 1e-12).map(|(_, (i, _))| *i).collect())
}

/// Ray-based selection on a normalized polytope (unit ball inside, origin the center).
pub fn select_sparse_vertices(norm: &Normalized, eps: f64) -> Result<(Vec<usize>, usize), SparsifyError> {
    let d = norm.map.center.len();
    let rays = ray_set(eps, d);
    let mut selected: Vec<usize> = Vec::new();
    for r in rays.directions() {
        // Exit parameter along the ray through the first facet it leaves.
        let (t, f) = norm
            .facets
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                let ar = h.inward_normal().dot(&r);
                (ar < -1e-15).then(|| (h.offset() / ar, i))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .ok_or(SparsifyError::DegenerateBody)?;
        let p = &r * t;
        let facet = &norm.facets[f];
        let scale = norm.vertices.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let on_facet: Vec<(usize, &Point)> = norm
            .vertices
            .iter()
            .enumerate()
            .filter(|(_, v)| facet.slack(v).abs() <= 1e-7 * scale)
            .collect();
        let chosen = caratheodory(&on_facet, &p).ok_or_else(|| {
            SparsifyError::ContainmentViolation("surface point is not a combination of its facet's vertices".into())
        })?;
        for i in chosen {
            if !selected.contains(&i) {
                selected.push(i);
            }
        }
    }
    selected.sort_unstable();
    Ok((selected, rays.count()))
}

/// Full pipeline in input coordinates.
pub fn sparsify_polytope(p: &PolytopeV, eps: f64) -> Result<SparsifyReport, SparsifyError> {
    let norm = normalize_polytope(p)?;
    let (selected, rays) = select_sparse_vertices(&norm, eps)?;
    let center = norm.map.center.clone();
    let chosen: Vec<Point> = selected.iter().map(|&i| p.vertices()[i].clone()).collect();
    let expanded_pts = scale_points(&chosen, &center, 1.0 + eps);
    // Margin in normalized coordinates, where the body is well conditioned.
    let norm_expanded: Vec<Point> = selected.iter().map(|&i| &norm.vertices[i] * (1.0 + eps)).collect();
    let origin = Point::zeros(p.dim());
    let mut margin = f64::INFINITY;
    for u in &norm.vertices {
        let reach = radial_reach(&norm_expanded, &origin, u).unwrap_or(f64::NEG_INFINITY);
        margin = margin.min(reach - 1.0);
    }
    if margin < -1e-9 {
        return Err(SparsifyError::ContainmentViolation(format!("containment margin {margin}")));
    }
    Ok(SparsifyReport {
        center,
        num_vertices: p.len(),
        num_selected: selected.len(),
        selected,
        expanded: PolytopeV::from_vertices_unchecked(expanded_pts),
        containment_margin: margin,
        rays,
    })
}

#[derive(Clone, Debug)]
pub struct Snapped {
    pub polytope: PolytopeV,
    pub anchor: Point,
    pub edge: f64,
    pub granularity: f64,
}

/// Grid step `D′ε′ / (N √d (2^d + 1))` with `N = max(k_{ε′,d}, |V|)`.
pub fn snap_granularity(edge: f64, eps_prime: f64, d: usize, num_vertices: usize) -> f64 {
    let n = k_eps_d(eps_prime, d).max(num_vertices as f64);
    edge * eps_prime / (n * (d as f64).sqrt() * ((1u64 << d) as f64 + 1.0))
}

/// Lower corner of the grid cell containing `v`.
pub fn grid_cell(v: &Point, anchor: &Point, g: f64) -> Point {
    Point::from_fn(v.len(), |i, _| {
        let t = (v[i] - anchor[i]) / g;
        // A coordinate within round-off of a grid line belongs to that line.
        let k = if (t - t.round()).abs() <= 1e-9 { t.round() } else { t.floor() };
        anchor[i] + k * g
    })
}

/// Replaces every vertex by the corners of its grid cell and takes the hull.
pub fn snap_to_grid(p: &PolytopeV, eps_prime: f64) -> Result<Snapped, SparsifyError> {
    let d = p.dim();
    let lo = Point::from_fn(d, |i, _| p.vertices().iter().map(|v| v[i]).fold(f64::INFINITY, f64::min));
    let hi = Point::from_fn(d, |i, _| p.vertices().iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max));
    let edge = (&hi - &lo).amax();
    if edge <= 0.0 {
        return Ok(Snapped {
            polytope: p.clone(),
            anchor: lo,
            edge,
            granularity: 0.0,
        });
    }
    let g = snap_granularity(edge, eps_prime, d, p.len());
    let mut pts = Vec::new();
    for v in p.vertices() {
        pts.extend(cell_corners(&grid_cell(v, &lo, g), g));
    }
    Ok(Snapped {
        polytope: PolytopeV::from_points(pts)?,
        anchor: lo,
        edge,
        granularity: g,
    })
}

/// The `2^d` corners of the cell with lower corner `base`, in reflected Gray-code order.
pub fn cell_corners(base: &Point, g: f64) -> Vec<Point> {
    let d = base.len();
    (0..1usize << d)
        .map(|i| {
            let code = i ^ (i >> 1);
            Point::from_fn(d, |k, _| base[k] + if code >> k & 1 == 1 { g } else { 0.0 })
        })
        .collect()
}

/// Length of the closed polyline through `pts` after replacing each point by a
/// loop around its grid cell's corners.
pub fn looped_tour_length(pts: &[Point], anchor: &Point, g: f64) -> f64 {
    let mut way = Vec::new();
    for v in pts {
        way.push(v.clone());
        way.extend(cell_corners(&grid_cell(v, anchor, g), g));
        way.push(v.clone());
    }
    crate::geom::Tour::closed(way).length()
}

//! Reference tours: exact Held–Karp on small point sets, the minimum-perimeter
//! axis box, and a local-search heuristic for hyperplane instances.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geom::{Hyperplane, Point, Tour};
use crate::lp::simplex::{LinearProgram, LpStatus, Relation, VarKind};

pub const HELD_KARP_MAX: usize = 15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("Held–Karp supports at most {HELD_KARP_MAX} points, got {0}")]
    TooManyPoints(usize),
    #[error("box LP is infeasible")]
    Infeasible,
    #[error("box LP failed: {0}")]
    Lp(String),
}

/// Shortest closed tour (or open path) through all `points`.
pub fn held_karp(points: &[Point], closed: bool) -> Result<Tour, BaselineError> {
    let order = held_karp_order(points, closed)?;
    Ok(Tour {
        waypoints: order.into_iter().map(|i| points[i].clone()).collect(),
        closed,
    })
}

/// Visiting order of [`held_karp`]; closed tours start at index 0.
pub fn held_karp_order(points: &[Point], closed: bool) -> Result<Vec<usize>, BaselineError> {
    let n = points.len();
    if n > HELD_KARP_MAX {
        return Err(BaselineError::TooManyPoints(n));
    }
    if n <= 2 {
        return Ok((0..n).collect());
    }
    let dist: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (&points[i] - &points[j]).norm()).collect())
        .collect();
    let full = (1usize << n) - 1;
    let mut dp = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![usize::MAX; (1 << n) * n];
    let idx = |mask: usize, j: usize| mask * n + j;
    if closed {
        dp[idx(1, 0)] = 0.0;
    } else {
        for j in 0..n {
            dp[idx(1 << j, j)] = 0.0;
        }
    }
    for mask in 1..=full {
        if closed && mask & 1 == 0 {
            continue;
        }
        for j in 0..n {
            let cur = dp[idx(mask, j)];
            if mask & (1 << j) == 0 || !cur.is_finite() {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = idx(mask | 1 << k, k);
                let cand = cur + dist[j][k];
                if cand < dp[next] {
                    dp[next] = cand;
                    parent[next] = j;
                }
            }
        }
    }
    let close = |j: usize| if closed { dist[j][0] } else { 0.0 };
    let mut last = (0..n)
        .filter(|&j| !closed || j != 0)
        .min_by(|&a, &b| (dp[idx(full, a)] + close(a)).total_cmp(&(dp[idx(full, b)] + close(b))))
        .expect("n ≥ 3");
    let mut mask = full;
    let mut order = Vec::with_capacity(n);
    while last != usize::MAX {
        order.push(last);
        let p = parent[idx(mask, last)];
        mask &= !(1 << last);
        last = p;
    }
    order.reverse();
    Ok(order)
}

#[derive(Clone, Debug)]
pub struct BoxTour {
    pub lower: Point,
    pub upper: Point,
    pub tour: Tour,
}

/// Smallest `Σ(u_i − l_i)` axis box whose extreme corners along each input
/// normal lie on opposite sides of that hyperplane, toured through its corners.
pub fn min_box_tour(inst: &[Hyperplane], closed: bool) -> Result<BoxTour, BaselineError> {
    let d = inst.first().map(Hyperplane::dim).unwrap_or(2);
    let mut lp = LinearProgram::new();
    let l: Vec<usize> = (0..d).map(|_| lp.add_var(VarKind::Free, -1.0)).collect();
    let u: Vec<usize> = (0..d).map(|_| lp.add_var(VarKind::Free, 1.0)).collect();
    for i in 0..d {
        lp.add_row(vec![(u[i], 1.0), (l[i], -1.0)], Relation::Ge, 0.0);
    }
    for h in inst {
        let n = h.normal();
        let hi: Vec<(usize, f64)> = (0..d)
            .filter(|&i| n[i] != 0.0)
            .map(|i| (if n[i] > 0.0 { u[i] } else { l[i] }, n[i]))
            .collect();
        let lo: Vec<(usize, f64)> = (0..d)
            .filter(|&i| n[i] != 0.0)
            .map(|i| (if n[i] > 0.0 { l[i] } else { u[i] }, n[i]))
            .collect();
        lp.add_row(hi, Relation::Ge, h.offset());
        lp.add_row(lo, Relation::Le, h.offset());
    }
    let sol = lp.solve().map_err(|e| BaselineError::Lp(e.to_string()))?;
    if sol.status != LpStatus::Optimal {
        return Err(BaselineError::Infeasible);
    }
    let lower = Point::from_fn(d, |i, _| sol.x[l[i]]);
    let upper = Point::from_fn(d, |i, _| sol.x[u[i]]);
    let tour = box_corner_tour(&lower, &upper, closed)?;
    Ok(BoxTour { lower, upper, tour })
}

/// Tour of the distinct corners of the box; Held–Karp up to 8 corners, a
/// reflected Gray code beyond, with the shortest side on the most-flipped bit.
pub fn box_corner_tour(lower: &Point, upper: &Point, closed: bool) -> Result<Tour, BaselineError> {
    let d = lower.len();
    let corner = |bits: usize, axes: &[usize]| {
        let mut p = lower.clone();
        for (b, &ax) in axes.iter().enumerate() {
            if bits >> b & 1 == 1 {
                p[ax] = upper[ax];
            }
        }
        p
    };
    // Only axes with positive extent produce distinct corners.
    let mut axes: Vec<usize> = (0..d).filter(|&i| upper[i] - lower[i] > 0.0).collect();
    axes.sort_by(|&a, &b| (upper[a] - lower[a]).total_cmp(&(upper[b] - lower[b])));
    let k = axes.len();
    if (1usize << k) <= 8 {
        let pts: Vec<Point> = (0..1usize << k).map(|b| corner(b, &axes)).collect();
        return held_karp(&pts, closed);
    }
    let waypoints = (0..1usize << k).map(|i| corner(i ^ (i >> 1), &axes)).collect();
    Ok(Tour { waypoints, closed })
}

/// Configuration of [`local_search`].
#[derive(Clone, Debug)]
pub struct LocalSearchConfig {
    pub restarts: usize,
    pub seed: u64,
    pub closed: bool,
    pub max_rounds: usize,
    pub max_sweeps: usize,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            seed: 0,
            closed: true,
            max_rounds: 30,
            max_sweeps: 200,
        }
    }
}

/// Heuristic tour: `2n` waypoints, each hyperplane owned by one waypoint that
/// stays on it. Alternates reassigning hyperplanes to their nearest waypoint
/// and moving each waypoint to minimize its two incident edges. The result
/// is an upper bound on the optimum, never a certificate of it.
pub fn local_search(inst: &[Hyperplane], cfg: &LocalSearchConfig) -> Tour {
    let run = |r: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(r as u64));
        single_run(inst, cfg, r, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let tours: Vec<Tour> = {
        use rayon::prelude::*;
        (0..cfg.restarts.max(1)).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let tours: Vec<Tour> = (0..cfg.restarts.max(1)).map(run).collect();
    tours
        .into_iter()
        .min_by(|a, b| a.length().total_cmp(&b.length()))
        .expect("at least one restart")
}

/// Affine subspace `{p : ⟨n_i, p⟩ = c_i}` stored as a base point plus an orthonormal basis.
struct Flat {
    origin: Point,
    basis: Vec<Point>,
}

impl Flat {
    fn whole(d: usize) -> Self {
        Self {
            origin: Point::zeros(d),
            basis: (0..d).map(|i| Point::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 })).collect(),
        }
    }

    fn of(hs: &[&Hyperplane], d: usize) -> Option<Self> {
        if hs.is_empty() {
            return Some(Self::whole(d));
        }
        let a = DMatrix::from_fn(hs.len(), d, |i, j| hs[i].normal()[j]);
        let c = nalgebra::DVector::from_fn(hs.len(), |i, _| hs[i].offset());
        let svd = a.clone().svd(true, true);
        let origin = svd.solve(&c, 1e-10).ok()?;
        if (&a * &origin - &c).amax() > 1e-8 {
            return None;
        }
        let v_t = svd.v_t.as_ref()?;
        let smax = svd.singular_values.max().max(1.0);
        let mut basis = Vec::new();
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
        // Rows of V^T beyond the rank span the null space; pad when V^T is short.
        let full = DMatrix::from_fn(d, d, |i, j| if i < v_t.nrows() { v_t[(i, j)] } else { 0.0 });
        let q = full.transpose().qr().q();
        for k in rank..d {
            let col: Point = if k < v_t.nrows() {
                v_t.row(k).transpose().into_owned()
            } else {
                q.column(k).into_owned()
            };
            basis.push(col);
        }
        Some(Self { origin, basis })
    }

    /// Point of the flat minimizing the summed distances to `targets`.
    fn weiszfeld(&self, start: &Point, targets: &[&Point]) -> Point {
        if self.basis.is_empty() || targets.is_empty() {
            return self.origin.clone();
        }
        let k = self.basis.len();
        let coords = |p: &Point| -> (Vec<f64>, f64) {
            let r = p - &self.origin;
            let y: Vec<f64> = self.basis.iter().map(|b| b.dot(&r)).collect();
            let inplane: f64 = y.iter().map(|v| v * v).sum();
            (y, (r.norm_squared() - inplane).max(0.0))
        };
        let proj: Vec<(Vec<f64>, f64)> = targets.iter().map(|t| coords(t)).collect();
        let mut y = coords(start).0;
        for _ in 0..100 {
            let mut num = vec![0.0; k];
            let mut den = 0.0;
            for (alpha, h2) in &proj {
                let dist2: f64 = y.iter().zip(alpha).map(|(a, b)| (a - b).powi(2)).sum::<f64>() + h2;
                let w = 1.0 / dist2.sqrt().max(1e-12);
                den += w;
                for (n, a) in num.iter_mut().zip(alpha) {
                    *n += w * a;
                }
            }
            let next: Vec<f64> = num.iter().map(|n| n / den).collect();
            let step: f64 = next.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            y = next;
            if step < 1e-13 {
                break;
            }
        }
        let mut p = self.origin.clone();
        for (b, c) in self.basis.iter().zip(&y) {
            p += b * *c;
        }
        p
    }
}

fn single_run(inst: &[Hyperplane], cfg: &LocalSearchConfig, restart: usize, rng: &mut ChaCha8Rng) -> Tour {
    let d = inst[0].dim();
    let n = inst.len();
    let m = 2 * n;
    let feet: Vec<Point> = inst.iter().map(Hyperplane::foot).collect();
    let center = feet.iter().fold(Point::zeros(d), |a, b| a + b) / n as f64;
    let scale = feet.iter().map(|f| (f - &center).norm()).fold(1.0, f64::max);
    let mut pts: Vec<Point> = if restart == 0 {
        // Feet of the perpendiculars from the centroid, interleaved with midpoints.
        let proj: Vec<Point> = inst.iter().map(|h| &center - h.normal() * h.signed_distance(&center)).collect();
        let order = spread_order(&proj, &center);
        order.iter().flat_map(|&i| [proj[i].clone(), proj[i].clone()]).collect()
    } else {
        (0..m)
            .map(|_| Point::from_fn(d, |i, _| center[i] + scale * rng.gen_range(-1.0..1.0)))
            .collect()
    };
    let mut owner: Vec<usize> = vec![usize::MAX; n];
    let length = |pts: &[Point]| Tour { waypoints: pts.to_vec(), closed: cfg.closed }.length();
    for _ in 0..cfg.max_rounds {
        let new_owner = assign(inst, &pts, d);
        let changed = new_owner != owner;
        owner = new_owner;
        let flats: Vec<Flat> = (0..m)
            .map(|j| {
                let owned: Vec<&Hyperplane> = (0..n).filter(|&i| owner[i] == j).map(|i| &inst[i]).collect();
                Flat::of(&owned, d).expect("assignment keeps flats consistent")
            })
            .collect();
        let mut prev = f64::INFINITY;
        for _ in 0..cfg.max_sweeps {
            for j in 0..m {
                let mut nb: Vec<&Point> = Vec::with_capacity(2);
                if cfg.closed || j > 0 {
                    nb.push(&pts[(j + m - 1) % m]);
                }
                if cfg.closed || j + 1 < m {
                    nb.push(&pts[(j + 1) % m]);
                }
                let nb: Vec<Point> = nb.into_iter().cloned().collect();
                let refs: Vec<&Point> = nb.iter().collect();
                pts[j] = flats[j].weiszfeld(&pts[j], &refs);
            }
            let len = length(&pts);
            if prev - len <= 1e-12 * (1.0 + len) {
                break;
            }
            prev = len;
        }
        if !changed {
            break;
        }
    }
    let keep: Vec<usize> = (0..m).filter(|j| owner.contains(j)).collect();
    let mut waypoints: Vec<Point> = keep.into_iter().map(|j| pts[j].clone()).collect();
    waypoints.dedup_by(|a, b| (&*a - &*b).amax() <= 1e-12);
    Tour {
        waypoints,
        closed: cfg.closed,
    }
}

/// Each hyperplane goes to the nearest waypoint whose owned set stays consistent with it.
fn assign(inst: &[Hyperplane], pts: &[Point], d: usize) -> Vec<usize> {
    let mut owned: Vec<Vec<&Hyperplane>> = vec![Vec::new(); pts.len()];
    let mut owner = vec![0; inst.len()];
    for (i, h) in inst.iter().enumerate() {
        let by_dist = (0..pts.len()).sorted_by(|&a, &b| {
            h.signed_distance(&pts[a])
                .abs()
                .total_cmp(&h.signed_distance(&pts[b]).abs())
        });
        for j in by_dist {
            let mut trial = owned[j].clone();
            trial.push(h);
            if Flat::of(&trial, d).is_some() {
                owned[j] = trial;
                owner[i] = j;
                break;
            }
        }
    }
    owner
}

/// Angular order around `center` in the first two coordinates.
fn spread_order(ps: &[Point], center: &Point) -> Vec<usize> {
    (0..ps.len())
        .sorted_by(|&a, &b| {
            let ang = |p: &Point| (p[1] - center[1]).atan2(p[0] - center[0]);
            ang(&ps[a]).total_cmp(&ang(&ps[b]))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{point, tour_feasible};
    use approx::assert_relative_eq;

    fn lines(spec: &[(&[f64], f64)]) -> Vec<Hyperplane> {
        spec.iter().map(|(a, c)| Hyperplane::from_coeffs(a, *c).unwrap()).collect()
    }

    fn random_points(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Point> {
        (0..n).map(|_| Point::from_fn(d, |_, _| rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn held_karp_small_cases() {
        let sq = vec![point(&[0.0, 0.0]), point(&[1.0, 1.0]), point(&[1.0, 0.0]), point(&[0.0, 1.0])];
        assert_relative_eq!(held_karp(&sq, true).unwrap().length(), 4.0, epsilon = 1e-12);
        assert_relative_eq!(held_karp(&sq, false).unwrap().length(), 3.0, epsilon = 1e-12);
        let line = vec![point(&[0.0, 0.0]), point(&[3.0, 0.0]), point(&[1.0, 0.0])];
        assert_relative_eq!(held_karp(&line, true).unwrap().length(), 6.0, epsilon = 1e-12);
        assert!(matches!(
            held_karp(&vec![point(&[0.0, 0.0]); 16], true),
            Err(BaselineError::TooManyPoints(16))
        ));
    }

    #[test]
    fn held_karp_matches_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let pts = random_points(&mut rng, 8, 2);
            for closed in [true, false] {
                let best = (0..8)
                    .permutations(8)
                    .map(|p| Tour { waypoints: p.iter().map(|&i| pts[i].clone()).collect(), closed }.length())
                    .fold(f64::INFINITY, f64::min);
                let hk = held_karp(&pts, closed).unwrap();
                assert_eq!(hk.len(), 8);
                assert_relative_eq!(hk.length(), best, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn box_examples() {
        let inst = lines(&[(&[1.0, 0.0], 0.0), (&[1.0, 0.0], 2.0), (&[0.0, 1.0], 0.0), (&[0.0, 1.0], 1.0)]);
        let b = min_box_tour(&inst, true).unwrap();
        assert!((b.tour.length() - 6.0).abs() <= 1e-9);
        assert!((b.lower.clone() - point(&[0.0, 0.0])).amax() < 1e-9);
        assert!((b.upper.clone() - point(&[2.0, 1.0])).amax() < 1e-9);
        let open = min_box_tour(&inst, false).unwrap();
        assert!((open.tour.length() - 4.0).abs() <= 1e-9);
        let concurrent = lines(&[(&[1.0, 0.0], 1.0), (&[0.0, 1.0], 1.0), (&[1.0, 1.0], 2.0), (&[1.0, -1.0], 0.0)]);
        assert!(min_box_tour(&concurrent, true).unwrap().tour.length() < 1e-9);
    }

    #[test]
    fn box_tours_are_feasible_in_3d_and_4d() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [3, 4] {
            for _ in 0..50 {
                let inst: Vec<Hyperplane> = (0..rng.gen_range(1..10))
                    .map(|_| {
                        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-5i32..=5) as f64).collect();
                        let a = if a.iter().all(|x| *x == 0.0) { vec![1.0; d] } else { a };
                        Hyperplane::from_coeffs(&a, rng.gen_range(-10i32..=10) as f64).unwrap()
                    })
                    .collect();
                let b = min_box_tour(&inst, true).unwrap();
                assert!(tour_feasible(&b.tour, &inst).is_feasible());
            }
        }
    }

    #[test]
    fn gray_code_tour_of_4d_box() {
        let lo = Point::zeros(4);
        let hi = point(&[1.0, 2.0, 3.0, 4.0]);
        let t = box_corner_tour(&lo, &hi, true).unwrap();
        assert_eq!(t.len(), 16);
        // Bit flips 8, 4, 2, 2 times on axes sorted by extent.
        assert_relative_eq!(t.length(), 8.0 * 1.0 + 4.0 * 2.0 + 2.0 * 3.0 + 2.0 * 4.0, epsilon = 1e-12);
    }

    #[test]
    fn local_search_examples() {
        let sq = lines(&[(&[1.0, 0.0], 0.0), (&[1.0, 0.0], 1.0), (&[0.0, 1.0], 0.0), (&[0.0, 1.0], 1.0)]);
        let cfg = LocalSearchConfig {
            restarts: 16,
            ..LocalSearchConfig::default()
        };
        let t = local_search(&sq, &cfg);
        assert!(tour_feasible(&t, &sq).is_feasible());
        assert!((t.length() - 2.0 * 2f64.sqrt()).abs() < 1e-3, "{}", t.length());

        let one = lines(&[(&[1.0, 2.0], 3.0)]);
        let t = local_search(&one, &cfg);
        assert!(t.length() < 1e-9);
        assert!(tour_feasible(&t, &one).is_feasible());

        let par = lines(&[(&[1.0, 1.0], 0.0), (&[1.0, 1.0], 3.0)]);
        let t = local_search(&par, &cfg);
        assert_relative_eq!(t.length(), 2.0 * 3.0 / 2f64.sqrt(), epsilon = 1e-6);
    }

    #[test]
    fn local_search_is_feasible_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [2, 3] {
            for _ in 0..20 {
                let inst: Vec<Hyperplane> = (0..rng.gen_range(1..8))
                    .map(|_| {
                        let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-3i32..=3) as f64).collect();
                        let a = if a.iter().all(|x| *x == 0.0) { vec![1.0; d] } else { a };
                        Hyperplane::from_coeffs(&a, rng.gen_range(-5i32..=5) as f64).unwrap()
                    })
                    .collect();
                let cfg = LocalSearchConfig {
                    restarts: 3,
                    seed: 9,
                    ..LocalSearchConfig::default()
                };
                let t = local_search(&inst, &cfg);
                assert!(tour_feasible(&t, &inst).is_feasible());
                assert_eq!(t, local_search(&inst, &cfg));
            }
        }
    }

    #[test]
    fn paths_are_no_longer_than_tours() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let pts = random_points(&mut rng, 7, 3);
            assert!(held_karp(&pts, false).unwrap().length() <= held_karp(&pts, true).unwrap().length() + 1e-12);
        }
        let two = lines(&[(&[1.0, 0.0], 0.0), (&[1.0, 0.0], 1.0)]);
        assert_relative_eq!(min_box_tour(&two, false).unwrap().tour.length(), 1.0, epsilon = 1e-9);
        assert_relative_eq!(min_box_tour(&two, true).unwrap().tour.length(), 2.0, epsilon = 1e-9);
    }
}

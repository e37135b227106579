//! Small dense helpers for the d ≤ 4 linear algebra used throughout.

use nalgebra::{DMatrix, DVector};

use crate::geom::Point;

/// Relative cutoff below which a singular value counts as zero.
pub(crate) const RANK_TOL: f64 = 1e-9;

/// Rank of the row set and an orthonormal basis of its null space.
pub(crate) fn rank_and_null_space(rows: &[&Point], dim: usize) -> (usize, Vec<Point>) {
    let n = rows.len().max(dim);
    let mut m = DMatrix::<f64>::zeros(n, dim);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..dim {
            m[(i, j)] = r[j];
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let scale = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max).max(1.0);
    let mut rank = 0;
    let mut null = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > RANK_TOL * scale {
            rank += 1;
        } else {
            null.push(v_t.row(k).transpose().into_owned());
        }
    }
    (rank, null)
}

pub(crate) fn rank(rows: &[&Point], dim: usize) -> usize {
    rank_and_null_space(rows, dim).0
}

/// Solves the square system `rows · x = rhs`; `None` if it is numerically singular.
pub(crate) fn solve_square(rows: &[&Point], rhs: &[f64]) -> Option<Point> {
    let dim = rows.len();
    let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin < RANK_TOL * smax.max(1.0) {
        return None;
    }
    let b = DVector::from_column_slice(rhs);
    m.lu().solve(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_single_row_in_plane() {
        let r = Point::from_vec(vec![1.0, 1.0]);
        let (rank, null) = rank_and_null_space(&[&r], 2);
        assert_eq!(rank, 1);
        assert_eq!(null.len(), 1);
        assert!(null[0].dot(&r).abs() < 1e-12);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = Point::from_vec(vec![1.0, 2.0]);
        let b = Point::from_vec(vec![2.0, 4.0]);
        assert!(solve_square(&[&a, &b], &[1.0, 2.0]).is_none());
        let c = Point::from_vec(vec![0.0, 1.0]);
        let x = solve_square(&[&a, &c], &[3.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}

//! Small dense linear algebra on row-major `Vec<f64>` data, backed by nalgebra.

use nalgebra::DMatrix;

/// Relative threshold below which a square system is treated as singular
/// (|det| divided by the Hadamard bound of its rows).
const SINGULAR_REL: f64 = 1e-12;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn hadamard_bound(rows: &[Vec<f64>]) -> f64 {
    rows.iter().map(|r| norm(r)).product()
}

pub(crate) fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    if n == 0 {
        return 1.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    m.determinant()
}

/// Solves `rows · x = rhs`; `None` when the system is numerically singular.
pub(crate) fn solve(rows: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let lu = m.lu();
    let d = lu.determinant();
    let bound = hadamard_bound(rows);
    if bound == 0.0 || !(d.abs() > SINGULAR_REL * bound) {
        return None;
    }
    let b = nalgebra::DVector::from_column_slice(rhs);
    lu.solve(&b).map(|x| x.iter().copied().collect())
}

/// Affine rank of a point set: rank of the differences to the first point.
pub(crate) fn affine_rank(points: &[&[f64]], tol: f64) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let dim = points[0].len();
    let rows = points.len() - 1;
    let m = DMatrix::from_fn(rows, dim, |i, j| points[i + 1][j] - points[0][j]);
    let sv = m.singular_values();
    let smax = sv.iter().copied().fold(0.0f64, f64::max);
    let cut = tol * smax.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Normal vector of the hyperplane through `n` points in ℝⁿ via the
/// generalized cross product of the edge vectors. Unnormalized; `None` when
/// the points are affinely dependent.
pub(crate) fn hyperplane_normal(points: &[&[f64]]) -> Option<Vec<f64>> {
    let n = points[0].len();
    debug_assert_eq!(points.len(), n);
    let edges: Vec<Vec<f64>> = points[1..].iter().map(|p| sub(p, points[0])).collect();
    let mut normal = vec![0.0; n];
    for (k, slot) in normal.iter_mut().enumerate() {
        let minor: Vec<Vec<f64>> = edges
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, &v)| v)
                    .collect()
            })
            .collect();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * det(&minor);
    }
    let len = norm(&normal);
    let scale: f64 = edges.iter().map(|e| norm(e)).product::<f64>().max(f64::MIN_POSITIVE);
    if len <= SINGULAR_REL * scale || len == 0.0 {
        None
    } else {
        Some(normal)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Combinations {
    Combinations {
        n,
        idx: (0..k).collect(),
        done: k > n,
    }
}

pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        assert_eq!(combinations(5, 2).count(), 10);
        assert_eq!(combinations(4, 0).count(), 1);
        assert_eq!(combinations(2, 3).count(), 0);
        let all: Vec<_> = combinations(3, 2).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn normal_is_orthogonal_to_edges() {
        let p = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let refs: Vec<&[f64]> = p.iter().map(|r| r.as_slice()).collect();
        let nrm = hyperplane_normal(&refs).unwrap();
        assert!(dot(&nrm, &sub(&p[1], &p[0])).abs() < 1e-15);
        assert!(dot(&nrm, &sub(&p[2], &p[0])).abs() < 1e-15);
        let one_d = [[0.3]];
        let refs: Vec<&[f64]> = one_d.iter().map(|r| r.as_slice()).collect();
        assert_eq!(hyperplane_normal(&refs).unwrap(), vec![1.0]);
    }

    #[test]
    fn singular_system_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&rows, &[1.0, 2.0]).is_none());
        let rows = vec![vec![2.0, 0.0], vec![0.0, 4.0]];
        assert_eq!(solve(&rows, &[1.0, 2.0]).unwrap(), vec![0.5, 0.5]);
    }
}

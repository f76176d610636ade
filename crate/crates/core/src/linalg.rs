//! Small dense matrices as fixed-size arrays.

use crate::scalar::Real;

pub type Mat4<T> = [[T; 4]; 4];
pub type Mat5<T> = [[T; 5]; 5];
pub type Mat8<T> = [[T; 8]; 8];

pub fn transpose<T: Real, const R: usize, const C: usize>(m: &[[T; C]; R]) -> [[T; R]; C] {
    let mut out = [[T::zero(); R]; C];
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            out[j][i] = v;
        }
    }
    out
}

/// Row vector times matrix.
pub fn vec_mat<T: Real, const R: usize, const C: usize>(v: &[T; R], m: &[[T; C]; R]) -> [T; C] {
    let mut out = [T::zero(); C];
    for (vi, row) in v.iter().zip(m) {
        for (o, &mij) in out.iter_mut().zip(row) {
            *o = *o + *vi * mij;
        }
    }
    out
}

pub fn max_abs<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    values
        .into_iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Determinant by LU factorisation with partial pivoting.
pub fn determinant<T: Real, const N: usize>(mut m: [[T; N]; N]) -> T {
    let mut det = T::one();
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det = det * p;
        let pivot_row = m[col];
        for row in m.iter_mut().skip(col + 1) {
            let f = row[col] / p;
            if f != T::zero() {
                for (v, &q) in row.iter_mut().zip(&pivot_row).skip(col) {
                    *v = *v - f * q;
                }
            }
        }
    }
    det
}

/// Thin SVD data of an `R x C` matrix (`R >= C`): singular values in
/// decreasing order and the matching right singular vectors (as columns of `v`).
#[derive(Debug, Clone)]
pub struct Svd<T, const C: usize> {
    pub singular_values: [T; C],
    pub v: [[T; C]; C],
}

/// One-sided Jacobi SVD.
pub fn svd<T: Real, const R: usize, const C: usize>(m: &[[T; C]; R]) -> Svd<T, C> {
    let mut a = *m;
    let mut v = [[T::zero(); C]; C];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..C {
            for q in p + 1..C {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for row in a.iter() {
                    alpha = alpha + row[p] * row[p];
                    beta = beta + row[q] * row[q];
                    gamma = gamma + row[p] * row[q];
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::two() * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut norms = [T::zero(); C];
    for (j, n) in norms.iter_mut().enumerate() {
        *n = a
            .iter()
            .fold(T::zero(), |acc, row| acc + row[j] * row[j])
            .sqrt();
    }
    let mut order: Vec<usize> = (0..C).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut singular_values = [T::zero(); C];
    let mut v_sorted = [[T::zero(); C]; C];
    for (k, &j) in order.iter().enumerate() {
        singular_values[k] = norms[j];
        for r in 0..C {
            v_sorted[r][k] = v[r][j];
        }
    }
    Svd {
        singular_values,
        v: v_sorted,
    }
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numeric_rank<T: Real, const R: usize, const C: usize>(m: &[[T; C]; R], rel_tol: T) -> usize {
    if R < C {
        return numeric_rank(&transpose(m), rel_tol);
    }
    let sv = svd(m).singular_values;
    let largest = sv[0];
    if largest == T::zero() || !largest.is_finite() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * largest).count()
}

/// Orthonormal basis of the numerical null space (right singular vectors whose
/// singular value is at most `rel_tol` times the largest one).
pub fn null_space<T: Real, const R: usize, const C: usize>(
    m: &[[T; C]; R],
    rel_tol: T,
) -> Vec<[T; C]> {
    let Svd { singular_values, v } = svd(m);
    let cut = rel_tol * singular_values[0];
    (0..C)
        .filter(|&k| singular_values[k] <= cut)
        .map(|k| {
            let mut col = [T::zero(); C];
            for (r, c) in col.iter_mut().enumerate() {
                *c = v[r][k];
            }
            col
        })
        .collect()
}

/// Determinant of the 7x7 minor of an 8x8 matrix obtained by deleting `row` and `col`.
pub fn minor_determinant<T: Real>(m: &Mat8<T>, row: usize, col: usize) -> T {
    let mut sub = [[T::zero(); 7]; 7];
    for (si, i) in (0..8).filter(|&i| i != row).enumerate() {
        for (sj, j) in (0..8).filter(|&j| j != col).enumerate() {
            sub[si][sj] = m[i][j];
        }
    }
    determinant(sub)
}

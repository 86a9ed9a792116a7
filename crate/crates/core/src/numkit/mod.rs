//! Dense numerical kernels shared by the role-discovery solvers.
//!
//! Everything here works on small-to-medium dense `ndarray` matrices; no
//! routine allocates more than a few copies of its input.

mod eigen;
mod nnls;
mod pca;
mod project;
mod tensor;

pub use eigen::{sym_eigen, top_two_eigs, SymEigen};
pub use nnls::{nnls, nnls_gram};
pub use pca::{pca_2d, Pca2};
pub use project::{project_halfspaces_nonneg, project_l1_nonneg, HalfspaceSet, L1Ball};
pub use tensor::{fold, kron, matricize, unvectorize, vectorize, Mode, Tensor3};

use ndarray::{Array1, ArrayView1, ArrayView2};

/// Closed-form minimizer of `||R - x frowᵀ||` over `x`.
///
/// An all-zero `frow` has no unique minimizer; the zero vector is returned so
/// that a dead role stays dead instead of producing NaNs.
pub fn least_squares_col(r: ArrayView2<f64>, frow: ArrayView1<f64>) -> Array1<f64> {
    let denom = frow.dot(&frow);
    if denom == 0.0 {
        return Array1::zeros(r.nrows());
    }
    r.dot(&frow) / denom
}

/// Frobenius norm of a matrix.
pub fn frobenius(m: ArrayView2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solve `a x = b` for symmetric positive definite `a` by Cholesky.
///
/// Returns `None` when a pivot falls below `1e-13` times the largest
/// diagonal entry, i.e. when `a` is numerically singular.
pub(crate) fn solve_spd(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(0.0, f64::max);
    if n == 0 {
        return Some(Array1::zeros(0));
    }
    if scale == 0.0 {
        return None;
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 1e-13 * scale {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    Some(Array1::from(x))
}

/// Minimum-norm solution of a symmetric positive semidefinite system via
/// eigendecomposition, discarding eigenvalues below `1e-12 * λmax`.
pub(crate) fn solve_psd_pinv(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let eig = sym_eigen(a);
    let lmax = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = Array1::zeros(b.len());
    if lmax == 0.0 {
        return x;
    }
    for (idx, &lambda) in eig.values.iter().enumerate() {
        if lambda > 1e-12 * lmax {
            let v = eig.vectors.column(idx);
            let coef = v.dot(&b) / lambda;
            x.scaled_add(coef, &v);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn least_squares_rank_one() {
        let r = array![[1.0, 0.0], [0.0, 0.0]];
        let x = least_squares_col(r.view(), array![1.0, 0.0].view());
        assert_eq!(x, array![1.0, 0.0]);
    }

    #[test]
    fn least_squares_colinear() {
        let r = array![[2.0, 4.0]];
        let x = least_squares_col(r.view(), array![1.0, 2.0].view());
        assert!((x[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn least_squares_zero_row_gives_zero() {
        let r = array![[2.0, 4.0], [1.0, 1.0]];
        let x = least_squares_col(r.view(), array![0.0, 0.0].view());
        assert_eq!(x, array![0.0, 0.0]);
    }

    #[test]
    fn spd_solve_matches_known_solution() {
        let a = array![[4.0, 1.0], [1.0, 3.0]];
        let x = solve_spd(a.view(), array![1.0, 2.0].view()).unwrap();
        let back = a.dot(&x);
        assert!((back[0] - 1.0).abs() < 1e-14 && (back[1] - 2.0).abs() < 1e-14);
        assert!(solve_spd(array![[1.0, 1.0], [1.0, 1.0]].view(), array![1.0, 1.0].view()).is_none());
    }

    #[test]
    fn pinv_handles_singular_system() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let x = solve_psd_pinv(a.view(), array![2.0, 2.0].view());
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}

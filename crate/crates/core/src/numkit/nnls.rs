//! Active-set non-negative least squares.
//!
//! The solver runs on the normal equations (`AᵀA`, `Aᵀb`) so that callers
//! solving many right-hand sides against one design matrix (every row of a
//! Tucker factor, every node in a role transfer) pay for the Gram matrix once.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::{solve_psd_pinv, solve_spd};

/// `argmin_{x ≥ 0} ||A x - b||₂`.
pub fn nnls(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    assert_eq!(a.nrows(), b.len(), "nnls: A has {} rows, b has {}", a.nrows(), b.len());
    let ata = a.t().dot(&a);
    let atb = a.t().dot(&b);
    nnls_gram(ata.view(), atb.view())
}

/// Active-set NNLS given `ata = AᵀA` and `atb = Aᵀb` (Lawson–Hanson iteration
/// in the Bro–de Jong normal-equation form).
///
/// On return `x ≥ 0` and the dual `w = atb - ata x` satisfies `w ≤ tol` on the
/// zero set and `|w| ≤ tol` on the support, with `tol` relative to the scale of
/// the inputs.
pub fn nnls_gram(ata: ArrayView2<f64>, atb: ArrayView1<f64>) -> Array1<f64> {
    let n = atb.len();
    assert_eq!(ata.dim(), (n, n), "nnls_gram: Gram matrix must be {n}x{n}");
    let mut x = Array1::<f64>::zeros(n);
    if n == 0 {
        return x;
    }
    let scale = ata.iter().chain(atb.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return x;
    }
    let tol = 1e-13 * scale.max(1.0) * (n as f64);

    let mut passive = vec![false; n];
    // columns that produced a non-positive step right after entering; retried
    // only once the passive set changes again
    let mut blocked = vec![false; n];
    let mut w = &atb - &ata.dot(&x);
    let max_outer = 30 * n + 50;

    for _ in 0..max_outer {
        let candidate =
            (0..n).filter(|&j| !passive[j] && !blocked[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else { break };
        passive[t] = true;

        let mut s = solve_passive(ata, atb, &passive);
        if s[t] <= 0.0 {
            // entering column cannot move off zero: numerical stall
            passive[t] = false;
            blocked[t] = true;
            continue;
        }
        blocked.iter_mut().for_each(|b| *b = false);

        let mut inner = 0;
        while (0..n).any(|i| passive[i] && s[i] <= 0.0) && inner <= 3 * n + 10 {
            inner += 1;
            let mut alpha = f64::INFINITY;
            let mut blocking = t;
            for i in 0..n {
                if passive[i] && s[i] <= 0.0 {
                    let denom = x[i] - s[i];
                    let a = if denom > 0.0 { x[i] / denom } else { 0.0 };
                    if a < alpha {
                        alpha = a;
                        blocking = i;
                    }
                }
            }
            for i in 0..n {
                x[i] += alpha * (s[i] - x[i]);
            }
            passive[blocking] = false;
            x[blocking] = 0.0;
            for i in 0..n {
                if passive[i] && x[i] <= 0.0 {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
            s = solve_passive(ata, atb, &passive);
        }
        for i in 0..n {
            x[i] = if passive[i] { s[i].max(0.0) } else { 0.0 };
        }
        w = &atb - &ata.dot(&x);
    }
    x
}

fn solve_passive(ata: ArrayView2<f64>, atb: ArrayView1<f64>, passive: &[bool]) -> Array1<f64> {
    let n = atb.len();
    let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
    let k = idx.len();
    let mut sub = Array2::<f64>::zeros((k, k));
    let mut rhs = Array1::<f64>::zeros(k);
    for (a, &i) in idx.iter().enumerate() {
        rhs[a] = atb[i];
        for (b, &j) in idx.iter().enumerate() {
            sub[[a, b]] = ata[[i, j]];
        }
    }
    let sol = solve_spd(sub.view(), rhs.view()).unwrap_or_else(|| solve_psd_pinv(sub.view(), rhs.view()));
    let mut s = Array1::zeros(n);
    for (a, &i) in idx.iter().enumerate() {
        s[i] = sol[a];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Support enumeration: least squares on every column subset, keep the
    /// best feasible one. Independent of the active-set path (nalgebra SVD).
    pub(crate) fn enumerate_nnls(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
        let (m, n) = a.dim();
        let mut best = Array1::zeros(n);
        let mut best_obj = b.dot(b);
        for mask in 1u32..(1 << n) {
            let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            let sub = DMatrix::from_fn(m, cols.len(), |i, c| a[[i, cols[c]]]);
            let rhs = DVector::from_iterator(m, b.iter().copied());
            let sol = sub.svd(true, true).solve(&rhs, 1e-14).unwrap();
            if sol.iter().any(|&v| v < 0.0) {
                continue;
            }
            let mut x = Array1::zeros(n);
            for (c, &j) in cols.iter().enumerate() {
                x[j] = sol[c];
            }
            let r = b - &a.dot(&x);
            let obj = r.dot(&r);
            if obj < best_obj {
                best_obj = obj;
                best = x;
            }
        }
        best
    }

    #[test]
    fn identity_clamps() {
        let a = array![[1.0, 0.0], [0.0, 1.0]];
        let x = nnls(a.view(), array![2.0, -1.0].view());
        assert_eq!(x, array![2.0, 0.0]);
    }

    #[test]
    fn feasible_unconstrained_optimum() {
        let a = array![[1.0], [1.0]];
        let x = nnls(a.view(), array![1.0, 3.0].view());
        assert!((x[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = array![[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(nnls(a.view(), array![0.0, 0.0].view()), array![0.0, 0.0]);
    }

    #[test]
    fn rank_deficient_design_is_kkt() {
        let a = array![[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let b = array![2.0, 2.0, -1.0];
        let x = nnls(a.view(), b.view());
        let r = &a.dot(&x) - &b;
        assert!(r.iter().take(2).all(|v| v.abs() < 1e-12));
        assert!(x.iter().all(|&v| v >= 0.0));
        assert_eq!(x[2], 0.0);
    }

    #[test]
    fn random_5x3_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = Array2::from_shape_fn((5, 3), |_| rng.gen_range(-1.0..1.0));
            let b = Array1::from_shape_fn(5, |_| rng.gen_range(-1.0..1.0));
            let x = nnls(a.view(), b.view());
            let oracle = enumerate_nnls(&a, &b);
            for (u, v) in x.iter().zip(oracle.iter()) {
                assert!((u - v).abs() < 1e-8, "{x} vs {oracle}");
            }
        }
    }

    #[test]
    fn kkt_on_tall_random_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = Array2::from_shape_fn((40, 8), |_| rng.gen_range(0.0..1.0));
            let b = Array1::from_shape_fn(40, |_| rng.gen_range(-0.5..1.0));
            let x = nnls(a.view(), b.view());
            let grad = a.t().dot(&(&a.dot(&x) - &b));
            for j in 0..8 {
                assert!(x[j] >= 0.0);
                if x[j] > 0.0 {
                    assert!(grad[j].abs() <= 1e-8, "grad {}", grad[j]);
                } else {
                    assert!(grad[j] >= -1e-8, "grad {}", grad[j]);
                }
            }
        }
    }
}

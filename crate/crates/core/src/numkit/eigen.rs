use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const POWER_MAX_ITERS: usize = 50_000;

/// Eigenpairs of a symmetric matrix, values sorted in descending order and
/// vectors stored as the matching columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn sym_eigen(a: ArrayView2<f64>) -> SymEigen {
    let n = a.nrows();
    assert_eq!(a.ncols(), n, "sym_eigen needs a square matrix");
    let mut m = a.to_owned();
    // symmetrize away round-off asymmetry
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| v[[r, order[c]]]);
    SymEigen { values, vectors }
}

/// Magnitudes of the two largest-magnitude eigenvalues of `m`.
///
/// Supported inputs are symmetric matrices and row-stochastic matrices.
/// Symmetric inputs run power iteration on `M²` (so `±λ` pairs do not stall
/// it) with Hotelling deflation after the first eigenpair. Row-stochastic
/// inputs have `|λ₁| = 1`; the Perron pair is deflated with the stationary
/// distribution and the spectral radius of the remainder is obtained from
/// normalized repeated squaring.
pub fn top_two_eigs(m: ArrayView2<f64>) -> Result<(f64, f64)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::Input(format!("top_two_eigs needs a non-empty square matrix, got {:?}", m.dim())));
    }
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if n == 1 {
        return Ok((m[[0, 0]].abs(), 0.0));
    }
    let symmetric = (0..n).all(|i| (0..i).all(|j| (m[[i, j]] - m[[j, i]]).abs() <= 1e-12 * scale.max(1.0)));
    if symmetric {
        return symmetric_top_two(m);
    }
    let stochastic = m.iter().all(|&v| v >= 0.0) && m.rows().into_iter().all(|r| (r.sum() - 1.0).abs() <= 1e-9);
    if stochastic {
        return stochastic_top_two(m);
    }
    Err(Error::Input("top_two_eigs supports symmetric or row-stochastic matrices only".into()))
}

fn symmetric_top_two(m: ArrayView2<f64>) -> Result<(f64, f64)> {
    let n = m.nrows();
    let sq = m.dot(&m);
    let (s1, v1) = psd_power(&sq, None)?;
    let mut deflated = sq;
    for i in 0..n {
        for j in 0..n {
            deflated[[i, j]] -= s1 * v1[i] * v1[j];
        }
    }
    let (s2, _) = psd_power(&deflated, Some(&v1))?;
    Ok((s1.max(0.0).sqrt(), s2.max(0.0).sqrt()))
}

/// Dominant eigenpair of a symmetric positive semidefinite matrix, starting
/// from a fixed pseudo-random vector made orthogonal to `avoid`.
fn psd_power(a: &Array2<f64>, avoid: Option<&Array1<f64>>) -> Result<(f64, Array1<f64>)> {
    let n = a.nrows();
    let fro = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok((0.0, Array1::zeros(n)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(if avoid.is_some() { 0x5eed + 1 } else { 0x5eed });
    let mut x: Array1<f64> = Array1::from_shape_fn(n, |_| rng.gen_range(0.5..1.5));
    if let Some(u) = avoid {
        let c = x.dot(u);
        x.scaled_add(-c, u);
    }
    let nx = x.dot(&x).sqrt();
    if nx == 0.0 {
        return Ok((0.0, x));
    }
    x /= nx;
    for _ in 0..POWER_MAX_ITERS {
        let y = a.dot(&x);
        let rho = x.dot(&y);
        let resid = (&y - &(rho * &x)).mapv(|v| v * v).sum().sqrt();
        let ny = y.dot(&y).sqrt();
        if ny <= 1e-300 {
            return Ok((0.0, x));
        }
        if resid <= 1e-12 * fro {
            return Ok((rho, x));
        }
        x = y / ny;
    }
    Err(Error::Convergence { routine: "power iteration", iterations: POWER_MAX_ITERS })
}

fn stochastic_top_two(p: ArrayView2<f64>) -> Result<(f64, f64)> {
    let n = p.nrows();
    // stationary distribution of the lazy chain (same fixed points as p)
    let mut pi = Array1::from_elem(n, 1.0 / n as f64);
    let mut converged = false;
    for _ in 0..POWER_MAX_ITERS {
        let next = 0.5 * (&pi + &p.t().dot(&pi));
        let change: f64 = (&next - &pi).mapv(f64::abs).sum();
        pi = next;
        if change < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Convergence { routine: "stationary distribution", iterations: POWER_MAX_ITERS });
    }
    pi /= pi.sum();
    let mut b = p.to_owned();
    for i in 0..n {
        for j in 0..n {
            b[[i, j]] -= pi[j];
        }
    }
    Ok((1.0, spectral_radius(b)))
}

/// Gelfand's formula `ρ(B) = lim ‖B^(2^j)‖^(1/2^j)` with per-step normalization.
fn spectral_radius(mut c: Array2<f64>) -> f64 {
    let norm = |m: &Array2<f64>| m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let n0 = norm(&c);
    if n0 == 0.0 {
        return 0.0;
    }
    c /= n0;
    let mut log_norm = n0.ln();
    let mut power = 1.0f64;
    let mut estimate = n0;
    for _ in 0..60 {
        let sq = c.dot(&c);
        let ns = norm(&sq);
        if ns == 0.0 || !ns.is_finite() {
            return 0.0;
        }
        log_norm = 2.0 * log_norm + ns.ln();
        power *= 2.0;
        c = sq / ns;
        let next = (log_norm / power).exp();
        if (next - estimate).abs() < 1e-13 {
            return next;
        }
        estimate = next;
    }
    estimate
}

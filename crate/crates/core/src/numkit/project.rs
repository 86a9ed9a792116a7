//! Euclidean projections onto the convex sets used for guided role discovery.
//!
//! Both sets include the non-negative orthant. The L1 set is handled in closed
//! form; intersections of halfspaces `aᵀx ≤ eps` (with `a ≥ 0`) go through
//! Dykstra's cyclic projection followed by an exact active-set polish.

use ndarray::{Array1, Array2, ArrayView1};

use super::{solve_psd_pinv, solve_spd};
use crate::error::{Error, Result};

/// `{x ≥ 0 : ‖x‖₁ ≤ eps}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Ball {
    pub eps: f64,
}

/// `{x ≥ 0 : aᵢᵀx ≤ epsᵢ for all i}` with every `aᵢ ≥ 0`, `epsᵢ ≥ 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HalfspaceSet {
    pub constraints: Vec<(Array1<f64>, f64)>,
}

impl HalfspaceSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, a: Array1<f64>, eps: f64) {
        self.constraints.push((a, eps));
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Largest violation `max(0, -xᵢ, aᵀx - eps)`.
    pub fn violation(&self, x: ArrayView1<f64>) -> f64 {
        let neg = x.iter().fold(0.0f64, |m, &v| m.max(-v));
        self.constraints.iter().fold(neg, |m, (a, eps)| m.max(a.dot(&x) - eps))
    }
}

const DYKSTRA_TOL: f64 = 1e-10;
const DYKSTRA_MAX_CYCLES: usize = 10_000;

/// Projection onto `{x ≥ 0, ‖x‖₁ ≤ eps}`: clamp, and if the clamped vector is
/// still outside the ball, project onto the scaled simplex by soft-thresholding.
pub fn project_l1_nonneg(v: ArrayView1<f64>, eps: f64) -> Array1<f64> {
    let clamped = v.mapv(|x| x.max(0.0));
    if clamped.sum() <= eps {
        return clamped;
    }
    if eps <= 0.0 {
        return Array1::zeros(v.len());
    }
    // sort-based simplex threshold
    let mut u: Vec<f64> = clamped.iter().copied().filter(|&x| x > 0.0).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - eps) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    clamped.mapv(|x| (x - theta).max(0.0))
}

/// Projection onto the intersection of the orthant and the halfspaces of `set`.
///
/// Feasible inputs are returned unchanged (bitwise). Otherwise Dykstra's method
/// cycles over the halfspaces and the orthant until the iterate and its
/// correction terms move less than `1e-10` in one cycle, then the active
/// constraints are solved exactly.
pub fn project_halfspaces_nonneg(v: ArrayView1<f64>, set: &HalfspaceSet) -> Result<Array1<f64>> {
    let clamped = v.mapv(|x| x.max(0.0));
    if set.constraints.iter().all(|(a, eps)| a.dot(&clamped) <= *eps) {
        return Ok(clamped);
    }
    // On the orthant, aᵀx ≤ 0 with a ≥ 0 pins every coordinate in supp(a) to
    // zero. Dykstra converges only sublinearly onto such faces, so they are
    // removed exactly and the projection runs on the remaining coordinates.
    let mut pinned = vec![false; v.len()];
    for (a, eps) in &set.constraints {
        if *eps <= 0.0 && a.iter().all(|&x| x >= 0.0) {
            for (p, &x) in pinned.iter_mut().zip(a) {
                *p |= x > 0.0;
            }
        }
    }
    if pinned.iter().any(|&p| p) {
        let free: Vec<usize> = (0..v.len()).filter(|&i| !pinned[i]).collect();
        let mut out = Array1::zeros(v.len());
        if free.is_empty() {
            return Ok(out);
        }
        let sub = |x: &Array1<f64>| Array1::from_iter(free.iter().map(|&i| x[i]));
        let mut reduced = HalfspaceSet::new();
        for (a, eps) in &set.constraints {
            let is_pin = *eps <= 0.0 && a.iter().all(|&x| x >= 0.0);
            if !is_pin {
                reduced.push(sub(a), *eps);
            }
        }
        let x = project_halfspaces_nonneg(sub(&v.to_owned()).view(), &reduced)?;
        for (&i, &xi) in free.iter().zip(&x) {
            out[i] = xi;
        }
        return Ok(out);
    }

    let dim = v.len();
    let nsets = set.len() + 1;
    let mut y = v.to_owned();
    let mut incr = vec![Array1::<f64>::zeros(dim); nsets];
    let scale = v.dot(&v).sqrt().max(1.0);
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    let mut cycles = 0;

    while cycles < DYKSTRA_MAX_CYCLES {
        cycles += 1;
        let prev = y.clone();
        let mut incr_change = 0.0;
        for (s, p) in incr.iter_mut().enumerate() {
            let z = &y + &*p;
            let next = if s < set.len() {
                let (a, eps) = &set.constraints[s];
                project_halfspace(z.view(), a.view(), *eps)
            } else {
                z.mapv(|x| x.max(0.0))
            };
            let new_p = &z - &next;
            incr_change += (&new_p - &*p).mapv(|d| d * d).sum();
            *p = new_p;
            y = next;
        }
        // the iterate alone can stall while the increments still move, so the
        // stopping rule watches the full Dykstra state
        last_change = ((&y - &prev).mapv(|d| d * d).sum() + incr_change).sqrt();
        if last_change < DYKSTRA_TOL * scale {
            converged = true;
            break;
        }
    }

    if let Some(x) = polish(v, set, y.view()) {
        return Ok(x);
    }
    if converged {
        Ok(y)
    } else {
        Err(Error::Projection { best: y.to_vec(), residual: last_change, cycles })
    }
}

fn project_halfspace(z: ArrayView1<f64>, a: ArrayView1<f64>, eps: f64) -> Array1<f64> {
    let norm2 = a.dot(&a);
    let excess = a.dot(&z) - eps;
    if excess <= 0.0 || norm2 == 0.0 {
        return z.to_owned();
    }
    let mut out = z.to_owned();
    out.scaled_add(-excess / norm2, &a);
    out
}

/// Solve the projection exactly on the active set suggested by `approx` and
/// accept it only if the KKT conditions hold.
fn polish(v: ArrayView1<f64>, set: &HalfspaceSet, approx: ArrayView1<f64>) -> Option<Array1<f64>> {
    let dim = v.len();
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let delta = 1e-7 * scale;

    // rows of the active constraint matrix C and right-hand side d
    let mut rows: Vec<Array1<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (i, &x) in approx.iter().enumerate() {
        if x <= delta {
            let mut e = Array1::zeros(dim);
            e[i] = -1.0;
            rows.push(e);
            rhs.push(0.0);
        }
    }
    for (a, eps) in &set.constraints {
        if a.dot(&approx) >= eps - delta && a.iter().any(|&x| x != 0.0) {
            rows.push(a.clone());
            rhs.push(*eps);
        }
    }
    let k = rows.len();
    if k == 0 {
        return None;
    }
    let c = Array2::from_shape_fn((k, dim), |(r, j)| rows[r][j]);
    let gram = c.dot(&c.t());
    let d = Array1::from(rhs);
    let target = c.dot(&v) - &d;
    let lambda = solve_spd(gram.view(), target.view()).unwrap_or_else(|| solve_psd_pinv(gram.view(), target.view()));
    let tol = 1e-11 * scale;
    if lambda.iter().any(|&l| l < -tol) {
        return None;
    }
    let mut x = v.to_owned() - c.t().dot(&lambda);
    if set.violation(x.view()) > tol {
        return None;
    }
    x.mapv_inplace(|t| if t < 0.0 { 0.0 } else { t });
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: &Array1<f64>, b: &Array1<f64>, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn l1_feasible_is_identity() {
        let x = project_l1_nonneg(array![0.5, 0.3].view(), 1.0);
        assert_eq!(x, array![0.5, 0.3]);
    }

    #[test]
    fn l1_symmetric_split() {
        let x = project_l1_nonneg(array![1.0, 1.0].view(), 1.0);
        assert!(close(&x, &array![0.5, 0.5], 1e-15));
    }

    #[test]
    fn l1_negative_coordinate_goes_to_zero() {
        let x = project_l1_nonneg(array![-1.0, 2.0].view(), 1.0);
        assert!(close(&x, &array![0.0, 1.0], 1e-15));
    }

    #[test]
    fn l1_zero_radius() {
        assert_eq!(project_l1_nonneg(array![3.0, 1.0].view(), 0.0), array![0.0, 0.0]);
    }

    #[test]
    fn halfspace_coordinate_kill() {
        let mut h = HalfspaceSet::new();
        h.push(array![1.0, 0.0], 0.0);
        let x = project_halfspaces_nonneg(array![2.0, 3.0].view(), &h).unwrap();
        assert!(close(&x, &array![0.0, 3.0], 1e-12));
    }

    #[test]
    fn halfspace_zero_bounds_pin_coordinates_exactly() {
        let mut h = HalfspaceSet::new();
        h.push(array![0.7, 0.0, 0.2, 0.0], 0.0);
        h.push(array![0.0, 1.0, 0.0, 1.0], 1.0);
        let x = project_halfspaces_nonneg(array![2.0, 1.0, 3.0, 2.0].view(), &h).unwrap();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[2], 0.0);
        assert!(close(&x, &array![0.0, 0.0, 0.0, 1.0], 1e-12));
    }

    #[test]
    fn halfspace_single_analytic() {
        let mut h = HalfspaceSet::new();
        h.push(array![1.0, 1.0], 1.0);
        let x = project_halfspaces_nonneg(array![1.0, 1.0].view(), &h).unwrap();
        assert!(close(&x, &array![0.5, 0.5], 1e-12));
    }

    #[test]
    fn halfspace_feasible_input_returned_bitwise() {
        let mut h = HalfspaceSet::new();
        h.push(array![1.0, 1.0], 10.0);
        let v = array![0.1234567, 2.5];
        assert_eq!(project_halfspaces_nonneg(v.view(), &h).unwrap(), v);
    }

    #[test]
    fn halfspace_zero_direction_is_ignored() {
        let mut h = HalfspaceSet::new();
        h.push(array![0.0, 0.0], 0.0);
        h.push(array![0.0, 1.0], 0.5);
        let x = project_halfspaces_nonneg(array![-1.0, 2.0].view(), &h).unwrap();
        assert!(close(&x, &array![0.0, 0.5], 1e-12));
    }

    #[test]
    fn idempotence_and_feasibility_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let dim = rng.gen_range(1..=6);
            let v = Array1::from_shape_fn(dim, |_| rng.gen_range(-2.0..3.0));
            let mut h = HalfspaceSet::new();
            for _ in 0..rng.gen_range(1..=4) {
                let a = Array1::from_shape_fn(dim, |_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) });
                h.push(a, rng.gen_range(0.0..1.5));
            }
            let x = project_halfspaces_nonneg(v.view(), &h).unwrap();
            assert!(h.violation(x.view()) <= 1e-8, "{v} {h:?} -> {x}");
            let xx = project_halfspaces_nonneg(x.view(), &h).unwrap();
            assert!(close(&x, &xx, 1e-9));

            let eps = rng.gen_range(0.0..3.0);
            let l = project_l1_nonneg(v.view(), eps);
            assert!(l.sum() <= eps + 1e-12 && l.iter().all(|&t| t >= 0.0));
            assert!(close(&l, &project_l1_nonneg(l.view(), eps), 1e-12));
        }
    }
}

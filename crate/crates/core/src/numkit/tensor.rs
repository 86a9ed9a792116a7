//! Dense third-order tensors and their unfoldings.
//!
//! Storage order is the vectorization order: mode-1 index fastest, then mode 2,
//! then mode 3, so `data[i + n*(j + f*k)] = T[i, j, k]`.
//!
//! Mode-d unfoldings put mode d on the rows and the two remaining modes on the
//! columns with the lower remaining mode varying fastest. With the Kronecker
//! convention `(A ⊗ B)[(a,b),(c,d)] = A[a,c]·B[b,d]` (left operand slow), an
//! exact Tucker model then satisfies
//!
//! ```text
//! T(1) = G · H(1) · (R ⊗ F)ᵀ
//! T(2) = F · H(2) · (R ⊗ G)ᵀ
//! T(3) = R · H(3) · (F ⊗ G)ᵀ
//! vec(T) = (R ⊗ F ⊗ G) · vec(H)
//! ```

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Entities (rows of G).
    One,
    /// Features (rows of F).
    Two,
    /// Relations (rows of R).
    Three,
}

impl Mode {
    pub fn from_index(mode: usize) -> Result<Self> {
        match mode {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            other => Err(Error::Config(format!("invalid tensor mode {other}, expected 1, 2 or 3"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Mode::One => 1,
            Mode::Two => 2,
            Mode::Three => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: (usize, usize, usize)) -> Self {
        Self { dims, data: vec![0.0; dims.0 * dims.1 * dims.2] }
    }

    pub fn from_vec(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(Error::Format(format!(
                "tensor {:?} needs {} values, got {}",
                dims,
                dims.0 * dims.1 * dims.2,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(dims: (usize, usize, usize), mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        for k in 0..dims.2 {
            for j in 0..dims.1 {
                for i in 0..dims.0 {
                    t.data[i + dims.0 * (j + dims.1 * k)] = f(i, j, k);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] += v;
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Frobenius distance to another tensor of the same shape.
    pub fn distance(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    /// Mode-1 slice `T[i, ·, ·]` as a matrix (mode 2 on rows, mode 3 on columns).
    pub fn slice_mode1(&self, i: usize) -> Array2<f64> {
        Array2::from_shape_fn((self.dims.1, self.dims.2), |(j, k)| self.get(i, j, k))
    }

    /// Full Tucker product `core ×₁ g ×₂ f ×₃ r`.
    pub fn tucker_product(core: &Tensor3, g: ArrayView2<f64>, f: ArrayView2<f64>, r: ArrayView2<f64>) -> Tensor3 {
        let (p, q, s) = core.dims;
        assert_eq!((g.ncols(), f.ncols(), r.ncols()), (p, q, s), "factor ranks must match core dims");
        let (n, nf, m) = (g.nrows(), f.nrows(), r.nrows());
        // contract one mode at a time: (p,q,s) -> (n,q,s) -> (n,f,s) -> (n,f,m)
        let mut t1 = Tensor3::zeros((n, q, s));
        for c in 0..s {
            for b in 0..q {
                for a in 0..p {
                    let h = core.get(a, b, c);
                    if h == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        t1.add(i, b, c, g[[i, a]] * h);
                    }
                }
            }
        }
        let mut t2 = Tensor3::zeros((n, nf, s));
        for c in 0..s {
            for b in 0..q {
                for j in 0..nf {
                    let w = f[[j, b]];
                    if w == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        t2.add(i, j, c, w * t1.get(i, b, c));
                    }
                }
            }
        }
        let mut t3 = Tensor3::zeros((n, nf, m));
        for c in 0..s {
            for k in 0..m {
                let w = r[[k, c]];
                if w == 0.0 {
                    continue;
                }
                for j in 0..nf {
                    for i in 0..n {
                        t3.add(i, j, k, w * t2.get(i, j, c));
                    }
                }
            }
        }
        t3
    }
}

/// Mode-d unfolding (see the module docs for the column layout).
pub fn matricize(t: &Tensor3, mode: Mode) -> Array2<f64> {
    let (n, f, m) = t.dims;
    match mode {
        Mode::One => Array2::from_shape_fn((n, f * m), |(i, c)| t.get(i, c % f, c / f)),
        Mode::Two => Array2::from_shape_fn((f, n * m), |(j, c)| t.get(c % n, j, c / n)),
        Mode::Three => Array2::from_shape_fn((m, n * f), |(k, c)| t.get(c % n, c / n, k)),
    }
}

/// Inverse of [`matricize`].
pub fn fold(mat: ArrayView2<f64>, mode: Mode, dims: (usize, usize, usize)) -> Result<Tensor3> {
    let (n, f, m) = dims;
    let expected = match mode {
        Mode::One => (n, f * m),
        Mode::Two => (f, n * m),
        Mode::Three => (m, n * f),
    };
    if mat.dim() != expected {
        return Err(Error::Input(format!(
            "cannot fold {:?} matrix into {:?} tensor along mode {}",
            mat.dim(),
            dims,
            mode.index()
        )));
    }
    Ok(Tensor3::from_fn(dims, |i, j, k| match mode {
        Mode::One => mat[[i, k * f + j]],
        Mode::Two => mat[[j, k * n + i]],
        Mode::Three => mat[[k, j * n + i]],
    }))
}

/// Column-stacked vectorization, mode-1 index fastest.
pub fn vectorize(t: &Tensor3) -> Array1<f64> {
    Array1::from(t.data.clone())
}

pub fn unvectorize(v: ArrayView1<f64>, dims: (usize, usize, usize)) -> Result<Tensor3> {
    Tensor3::from_vec(dims, v.to_vec())
}

/// Kronecker product with the left operand indexing the slow (outer) block.
pub fn kron(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let s = a[[i, j]];
            if s == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = s * b[[k, l]];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn example() -> Tensor3 {
        Tensor3::from_fn((2, 2, 2), |i, j, k| (i + 2 * j + 4 * k) as f64)
    }

    #[test]
    fn mode_one_layout() {
        let m = matricize(&example(), Mode::One);
        assert_eq!(m, array![[0.0, 2.0, 4.0, 6.0], [1.0, 3.0, 5.0, 7.0]]);
    }

    #[test]
    fn mode_three_layout() {
        let m = matricize(&example(), Mode::Three);
        assert_eq!(m, array![[0.0, 1.0, 2.0, 3.0], [4.0, 5.0, 6.0, 7.0]]);
    }

    #[test]
    fn vectorize_order() {
        assert_eq!(vectorize(&example()).to_vec(), (0..8).map(|v| v as f64).collect::<Vec<_>>());
        assert!(vectorize(&Tensor3::zeros((2, 3, 1))).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fold_inverts_matricize() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = Tensor3::from_fn((3, 2, 2), |_, _, _| rng.gen());
        for mode in [Mode::One, Mode::Two, Mode::Three] {
            let back = fold(matricize(&t, mode).view(), mode, t.dims()).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn invalid_mode_rejected() {
        assert!(Mode::from_index(0).is_err());
        assert!(Mode::from_index(4).is_err());
    }

    #[test]
    fn kron_block_convention() {
        let a = array![[1.0, 2.0]];
        let b = array![[1.0], [10.0]];
        assert_eq!(kron(a.view(), b.view()), array![[1.0, 2.0], [10.0, 20.0]]);
    }
}

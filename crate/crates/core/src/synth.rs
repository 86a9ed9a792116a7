//! Seeded synthetic instances with known structure: planted non-negative
//! factorizations, planted Tucker models, role-drift tensor sequences and
//! twin feature matrices sharing node roles.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numkit::Tensor3;

/// Generators draw from their own ChaCha stream so that a solver run with
/// the same seed does not start from the planted truth.
const STREAM: u64 = 0x5359_4e54;

fn generator(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(STREAM);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedNmf {
    pub v: Array2<f64>,
    pub g: Array2<f64>,
    pub f: Array2<f64>,
}

/// `V = G F` with G (n×r) and F (r×f) uniform(0,1). Each G entry is kept
/// with probability `density` (every row keeps at least one entry).
pub fn planted_nmf(n: usize, f: usize, r: usize, density: f64, seed: u64) -> Result<PlantedNmf> {
    if n == 0 || f == 0 || r == 0 {
        return Err(Error::Config("planted NMF needs positive n, f and r".into()));
    }
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::Config(format!("density must be in [0, 1], got {density}")));
    }
    let mut rng = generator(seed);
    let mut g = Array2::from_shape_fn((n, r), |_| {
        let keep = rng.gen::<f64>() < density;
        let x = rng.gen::<f64>();
        if keep {
            x
        } else {
            0.0
        }
    });
    for mut row in g.rows_mut() {
        if row.iter().all(|&x| x == 0.0) {
            let j = rng.gen_range(0..r);
            row[j] = rng.gen::<f64>().max(0.05);
        }
    }
    let fm = Array2::from_shape_fn((r, f), |_| rng.gen::<f64>());
    Ok(PlantedNmf { v: g.dot(&fm), g, f: fm })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTucker {
    pub tensor: Tensor3,
    pub g: Array2<f64>,
    pub f: Array2<f64>,
    pub r: Array2<f64>,
    pub core: Tensor3,
}

fn check_dims(dims: (usize, usize, usize), core: (usize, usize, usize)) -> Result<()> {
    let (n, f, m) = dims;
    let (p, q, s) = core;
    if p == 0 || q == 0 || s == 0 || p > n || q > f || s > m {
        return Err(Error::Config(format!("core dims {core:?} must be positive and at most {dims:?}")));
    }
    Ok(())
}

/// Noiseless `𝒱 = ℋ ×₁ G ×₂ F ×₃ R` with every block uniform(0,1).
pub fn planted_tucker(
    dims: (usize, usize, usize),
    core_dims: (usize, usize, usize),
    seed: u64,
) -> Result<PlantedTucker> {
    check_dims(dims, core_dims)?;
    let (n, f, m) = dims;
    let (p, q, s) = core_dims;
    let mut rng = generator(seed);
    let g = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>());
    let fm = Array2::from_shape_fn((f, q), |_| rng.gen::<f64>());
    let r = Array2::from_shape_fn((m, s), |_| rng.gen::<f64>());
    let core = Tensor3::from_fn(core_dims, |_, _, _| rng.gen::<f64>());
    let tensor = Tensor3::tucker_product(&core, g.view(), fm.view(), r.view());
    Ok(PlantedTucker { tensor, g, f: fm, r, core })
}

/// Parameters of a role-drift tensor sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftConfig {
    pub steps: usize,
    pub dims: (usize, usize, usize),
    pub core_dims: (usize, usize, usize),
    /// Half-width of the uniform perturbation added to the role matrix per step.
    pub drift: f64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self { steps: 6, dims: (20, 10, 4), core_dims: (3, 3, 2), drift: 0.3 }
    }
}

/// Tensors `𝒱_t = ℋ ×₁ G_t ×₂ F_t ×₃ R` where the role matrix performs a
/// clamped random walk `F_t = max(0, F_{t-1} + U(-drift, drift))` and every
/// step draws fresh entities `G_t`. Core and R-groups are shared.
pub fn drift_sequence(config: &DriftConfig, seed: u64) -> Result<Vec<PlantedTucker>> {
    check_dims(config.dims, config.core_dims)?;
    if config.steps == 0 || !(config.drift >= 0.0) {
        return Err(Error::Config("drift sequence needs steps >= 1 and drift >= 0".into()));
    }
    let (n, f, m) = config.dims;
    let (p, q, s) = config.core_dims;
    let mut rng = generator(seed);
    let r = Array2::from_shape_fn((m, s), |_| rng.gen::<f64>());
    let core = Tensor3::from_fn(config.core_dims, |_, _, _| rng.gen::<f64>());
    let mut fm = Array2::from_shape_fn((f, q), |_| rng.gen::<f64>());
    let mut out = Vec::with_capacity(config.steps);
    for t in 0..config.steps {
        if t > 0 {
            fm.mapv_inplace(|x| (x + config.drift * (2.0 * rng.gen::<f64>() - 1.0)).max(0.0));
        }
        let g = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>());
        let tensor = Tensor3::tucker_product(&core, g.view(), fm.view(), r.view());
        out.push(PlantedTucker { tensor, g, f: fm.clone(), r: r.clone(), core: core.clone() });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwinMatrices {
    pub source: Array2<f64>,
    pub target: Array2<f64>,
    /// Planted role assignments shared by both matrices.
    pub g: Array2<f64>,
    pub f: Array2<f64>,
}

/// Two noisy observations of the same planted `G F`: every entry of each is
/// multiplied independently by `1 + noise·U(-1, 1)`.
pub fn twin_matrices(n: usize, f: usize, r: usize, noise: f64, seed: u64) -> Result<TwinMatrices> {
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Config(format!("noise must be in [0, 1], got {noise}")));
    }
    let planted = planted_nmf(n, f, r, 0.6, seed)?;
    let mut rng = generator(seed);
    rng.set_word_pos(1 << 40);
    let mut perturb = |v: &Array2<f64>| v.mapv(|x| x * (1.0 + noise * (2.0 * rng.gen::<f64>() - 1.0)));
    Ok(TwinMatrices { source: perturb(&planted.v), target: perturb(&planted.v), g: planted.g, f: planted.f })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_nmf_shapes_and_rows() {
        let p = planted_nmf(10, 4, 3, 0.2, 1).unwrap();
        assert_eq!(p.v.dim(), (10, 4));
        assert!(p.g.rows().into_iter().all(|r| r.iter().any(|&x| x > 0.0)));
        assert!((&p.v - &p.g.dot(&p.f)).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn deterministic() {
        assert_eq!(planted_tucker((5, 4, 3), (2, 2, 2), 9).unwrap(), planted_tucker((5, 4, 3), (2, 2, 2), 9).unwrap());
        let d = DriftConfig::default();
        assert_eq!(drift_sequence(&d, 2).unwrap(), drift_sequence(&d, 2).unwrap());
    }

    #[test]
    fn drift_zero_keeps_roles() {
        let d = DriftConfig { drift: 0.0, ..Default::default() };
        let seq = drift_sequence(&d, 4).unwrap();
        assert!(seq.windows(2).all(|w| w[0].f == w[1].f));
    }

    #[test]
    fn twins_are_nonnegative() {
        let t = twin_matrices(30, 6, 3, 0.2, 5).unwrap();
        assert!(t.source.iter().chain(t.target.iter()).all(|&x| x >= 0.0));
        assert_ne!(t.source, t.target);
    }
}

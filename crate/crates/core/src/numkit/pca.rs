use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::sym_eigen;
use crate::error::{Error, Result};

/// Two-component principal component projection.
#[derive(Debug, Clone)]
pub struct Pca2 {
    /// N×2 scores of the centered rows.
    pub coords: Array2<f64>,
    /// M×2 loadings; each column's largest-magnitude entry is positive.
    pub components: Array2<f64>,
    /// All eigenvalues of the scatter matrix `XcᵀXc`, descending.
    pub eigenvalues: Array1<f64>,
}

/// Project the rows of `x` (N×M, N ≥ 2) onto the two leading principal axes.
///
/// Axes are eigenvectors of the scatter matrix of the column-centered data.
/// A zero-variance input maps every row to the origin.
pub fn pca_2d(x: ArrayView2<f64>) -> Result<Pca2> {
    let (n, m) = x.dim();
    if n < 2 {
        return Err(Error::Input(format!("pca_2d needs at least 2 rows, got {n}")));
    }
    let mean = x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(m));
    let centered = &x - &mean.insert_axis(Axis(0));
    let scatter = centered.t().dot(&centered);
    let eig = sym_eigen(scatter.view());
    let mut components = Array2::zeros((m, 2));
    let lmax = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for c in 0..2.min(m) {
        if lmax == 0.0 || eig.values[c] <= 1e-12 * lmax {
            continue;
        }
        let mut v = eig.vectors.column(c).to_owned();
        let pivot = v
            .iter()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (i, &val)| if val.abs() > best.1.abs() + 1e-12 { (i, val) } else { best })
            .0;
        if v[pivot] < 0.0 {
            v.mapv_inplace(|t| -t);
        }
        components.column_mut(c).assign(&v);
    }
    let coords = centered.dot(&components);
    Ok(Pca2 { coords, components, eigenvalues: eig.values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn one_dimensional_data() {
        let x = array![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let p = pca_2d(x.view()).unwrap();
        let first: Vec<f64> = p.coords.column(0).to_vec();
        assert!((first[0] + 1.0).abs() < 1e-12 && first[1].abs() < 1e-12 && (first[2] - 1.0).abs() < 1e-12);
        assert!(p.coords.column(1).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn identical_rows_identical_coords() {
        let x = array![[1.0, 2.0, 0.0], [1.0, 2.0, 0.0], [0.0, 1.0, 3.0]];
        let p = pca_2d(x.view()).unwrap();
        assert_eq!(p.coords.row(0), p.coords.row(1));
    }

    #[test]
    fn constant_input_maps_to_origin() {
        let x = array![[1.0, 1.0], [1.0, 1.0]];
        let p = pca_2d(x.view()).unwrap();
        assert!(p.coords.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn needs_two_rows() {
        assert!(pca_2d(array![[1.0, 2.0]].view()).is_err());
    }
}

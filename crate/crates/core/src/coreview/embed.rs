use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{kept_entries, NodeKind};
use crate::error::{Error, Result};
use crate::numkit::{pca_2d, Tensor3};

const KMEANS_RESTARTS: usize = 50;
const KMEANS_MAX_ITERS: usize = 300;

/// Every E-group, role and R-group placed in the plane and clustered.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreEmbedding {
    /// All `p + q + s` nodes: E-groups, then roles, then R-groups.
    pub nodes: Vec<NodeKind>,
    /// Node × kept-entry membership matrix.
    pub incidence: Array2<f64>,
    pub coords: Array2<f64>,
    pub clusters: Vec<usize>,
    pub inertia: f64,
}

/// Incidence matrix of the kept core entries (one column per entry, a 1 for
/// each of its three nodes), projected onto two principal components and
/// clustered with seeded k-means.
pub fn embed_core(core: &Tensor3, threshold_frac: f64, k_clusters: usize, seed: u64) -> Result<CoreEmbedding> {
    let (p, q, s) = core.dims();
    let nodes: Vec<NodeKind> =
        (0..p).map(NodeKind::EGroup).chain((0..q).map(NodeKind::Role)).chain((0..s).map(NodeKind::RGroup)).collect();
    let n = nodes.len();
    if k_clusters == 0 || k_clusters > n {
        return Err(Error::Config(format!("k_clusters must be in 1..={n}, got {k_clusters}")));
    }
    let entries = kept_entries(core, threshold_frac)?;
    if entries.is_empty() {
        return Err(Error::Input("no core entry survives the threshold".into()));
    }
    let mut incidence = Array2::zeros((n, entries.len()));
    for (c, &(i, j, k, _)) in entries.iter().enumerate() {
        incidence[[i, c]] = 1.0;
        incidence[[p + j, c]] = 1.0;
        incidence[[p + q + k, c]] = 1.0;
    }
    let coords = pca_2d(incidence.view())?.coords;
    let (clusters, inertia) = kmeans(coords.view(), k_clusters, KMEANS_RESTARTS, seed);
    Ok(CoreEmbedding { nodes, incidence, coords, clusters, inertia })
}

/// Lloyd's k-means with k-means++ seeding, best of `restarts` by inertia
/// (earliest restart on ties). Cluster ids are renumbered by first
/// appearance in row order so equal partitions get equal labels.
pub fn kmeans(x: ArrayView2<f64>, k: usize, restarts: usize, seed: u64) -> (Vec<usize>, f64) {
    let n = x.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for _ in 0..restarts.max(1) {
        let (labels, inertia) = lloyd(x, k, &mut rng);
        if best.as_ref().is_none_or(|b| inertia < b.1) {
            best = Some((labels, inertia));
        }
    }
    let (labels, inertia) = best.unwrap_or((vec![0; n], 0.0));
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    let labels = labels
        .into_iter()
        .map(|l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    (labels, inertia)
}

fn dist2(x: ArrayView2<f64>, i: usize, c: &Array2<f64>, j: usize) -> f64 {
    x.row(i).iter().zip(c.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn lloyd(x: ArrayView2<f64>, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let (n, d) = x.dim();
    let mut centers = Array2::zeros((k, d));
    centers.row_mut(0).assign(&x.row(rng.gen_range(0..n)));
    let mut nearest = vec![f64::INFINITY; n];
    for c in 1..k {
        for i in 0..n {
            nearest[i] = nearest[i].min(dist2(x, i, &centers, c - 1));
        }
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut t = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if t < w {
                    chosen = i;
                    break;
                }
                t -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.row_mut(c).assign(&x.row(pick));
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for i in 0..n {
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let dd = dist2(x, i, &centers, c);
                if dd < best.1 {
                    best = (c, dd);
                }
            }
            changed |= labels[i] != best.0;
            labels[i] = best.0;
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros((k, d));
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += &x.row(i);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            // empty clusters keep their previous center
            if counts[c] > 0 {
                let mean = &sums.row(c) / counts[c] as f64;
                centers.row_mut(c).assign(&mean);
            }
        }
    }
    let inertia = (0..n).map(|i| dist2(x, i, &centers, labels[i])).sum();
    (labels, inertia)
}

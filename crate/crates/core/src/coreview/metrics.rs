use ndarray::{Array1, Array2, ArrayView2};
use serde::Serialize;

use super::InteractionGraph;
use crate::error::{Error, Result};
use crate::numkit::{sym_eigen, top_two_eigs};

const PAGERANK_DAMPING: f64 = 0.85;
const PAGERANK_TOL: f64 = 1e-12;
const PAGERANK_MAX_ITERS: usize = 100_000;

/// Which spectrum the stability score is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityOperator {
    /// `1 - |λ₂|` of the random-walk matrix `D⁻¹W`.
    #[default]
    RandomWalk,
    /// Second-smallest eigenvalue of the normalized Laplacian `I - D^{-1/2} W D^{-1/2}`.
    Laplacian,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroMetrics {
    pub nodes: usize,
    pub edges: usize,
    /// Mean unweighted degree.
    pub simplicity: f64,
    /// Weight of a global minimum cut (0 when disconnected).
    pub sharing: f64,
    /// Population variance of the unweighted degrees.
    pub variability_degree: f64,
    /// Shannon entropy (nats) of the PageRank vector.
    pub variability_entropy: f64,
    /// Entropy divided by `ln N` (0 for a single node).
    pub variability_entropy_normalized: f64,
    pub stability: f64,
    pub stability_operator: StabilityOperator,
}

pub fn macro_metrics(graph: &InteractionGraph, operator: StabilityOperator) -> Result<MacroMetrics> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::Input("macro metrics need a graph with at least one node".into()));
    }
    let w = graph.weights();
    let degrees: Vec<f64> = w.rows().into_iter().map(|r| r.iter().filter(|&&x| x > 0.0).count() as f64).collect();
    let mean = degrees.iter().sum::<f64>() / n as f64;
    let var = degrees.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n as f64;

    let pr = pagerank(w.view())?;
    let entropy = -pr.iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    let ln_n = (n as f64).ln();

    Ok(MacroMetrics {
        nodes: n,
        edges: graph.edges.len(),
        simplicity: mean,
        sharing: stoer_wagner_mincut(w.view()),
        variability_degree: var,
        variability_entropy: entropy,
        variability_entropy_normalized: if n > 1 { entropy / ln_n } else { 0.0 },
        stability: stability(w.view(), operator)?,
        stability_operator: operator,
    })
}

/// Row-stochastic random-walk matrix; rows without edges become uniform.
fn transition(w: ArrayView2<f64>) -> Array2<f64> {
    let n = w.nrows();
    let mut p = w.to_owned();
    for mut row in p.rows_mut() {
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|x| x / s);
        } else {
            row.fill(1.0 / n as f64);
        }
    }
    p
}

/// PageRank with damping 0.85 and uniform teleport over the weighted graph
/// `w`; power iteration until the L1 change is below `1e-12`.
pub fn pagerank(w: ArrayView2<f64>) -> Result<Array1<f64>> {
    let n = w.nrows();
    let p = transition(w);
    let uniform = 1.0 / n as f64;
    let mut x = Array1::from_elem(n, uniform);
    for _ in 0..PAGERANK_MAX_ITERS {
        let mut next = p.t().dot(&x) * PAGERANK_DAMPING;
        next += (1.0 - PAGERANK_DAMPING) * uniform;
        let total = next.sum();
        next /= total;
        let change: f64 = (&next - &x).iter().map(|d| d.abs()).sum();
        x = next;
        if change < PAGERANK_TOL {
            return Ok(x);
        }
    }
    Err(Error::Convergence { routine: "pagerank", iterations: PAGERANK_MAX_ITERS })
}

fn stability(w: ArrayView2<f64>, operator: StabilityOperator) -> Result<f64> {
    let n = w.nrows();
    if n < 2 {
        return Ok(0.0);
    }
    let deg: Vec<f64> = w.rows().into_iter().map(|r| r.sum()).collect();
    let dangling = deg.contains(&0.0);
    // D^{-1/2} W D^{-1/2} is similar to D^{-1} W and symmetric
    let sym = (!dangling).then(|| Array2::from_shape_fn((n, n), |(i, j)| w[[i, j]] / (deg[i] * deg[j]).sqrt()));
    match operator {
        StabilityOperator::RandomWalk => {
            let (_, l2) = match &sym {
                Some(s) => top_two_eigs(s.view())?,
                None => top_two_eigs(transition(w).view())?,
            };
            Ok((1.0 - l2).clamp(0.0, 1.0))
        }
        StabilityOperator::Laplacian => {
            let Some(s) = sym else {
                // an isolated node makes the graph disconnected
                return Ok(0.0);
            };
            let eig = sym_eigen(s.view());
            Ok((1.0 - eig.values[1]).max(0.0))
        }
    }
}

/// Global minimum cut weight of a symmetric weight matrix (Stoer–Wagner).
/// Returns 0 for fewer than two nodes or a disconnected graph.
pub fn stoer_wagner_mincut(w: ArrayView2<f64>) -> f64 {
    let n = w.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut g = w.to_owned();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    while active.len() > 1 {
        let mut conn = vec![0.0f64; n];
        let mut added = vec![false; n];
        let mut prev = active[0];
        let mut last = active[0];
        for step in 0..active.len() {
            let next = if step == 0 {
                active[0]
            } else {
                *active
                    .iter()
                    .filter(|&&v| !added[v])
                    .max_by(|&&a, &&b| conn[a].total_cmp(&conn[b]).then(b.cmp(&a)))
                    .expect("an unadded vertex remains")
            };
            added[next] = true;
            prev = last;
            last = next;
            for &v in &active {
                if !added[v] {
                    conn[v] += g[[next, v]];
                }
            }
        }
        best = best.min(conn[last]);
        // merge `last` into `prev`
        for &v in &active {
            if v != prev && v != last {
                let merged = g[[prev, v]] + g[[last, v]];
                g[[prev, v]] = merged;
                g[[v, prev]] = merged;
            }
        }
        active.retain(|&v| v != last);
    }
    best
}

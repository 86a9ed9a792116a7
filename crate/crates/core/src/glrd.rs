//! Guided role discovery.
//!
//! Factorizes a non-negative node-feature matrix `V ≈ G F` (G: n×r role
//! assignments, F: r×f role definitions) under convex constraints on the
//! columns of G and the rows of F. Each sweep visits the roles in order; for
//! role `k` it forms the residual of the other roles, solves for `G[:,k]` in
//! closed form and projects it onto its constraint set, then does the same
//! for `F[k,:]`. Because the subproblem objective is `‖a‖²·‖x - x*‖²` plus a
//! constant, the projected least-squares point is the exact constrained
//! optimum, so every sub-step is non-increasing in `‖V - GF‖`.
//!
//! Supported constraints:
//! * sparsity: `‖x‖₁ ≤ eps` per targeted vector;
//! * diversity: `xᵀy ≤ eps` against every other current vector on the same side;
//! * alternative: `xᵀy ≤ eps` against every vector of a reference factor.
//!
//! Non-negativity is always enforced.

use log::warn;
use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{frobenius, least_squares_col, project_halfspaces_nonneg, project_l1_nonneg, HalfspaceSet};

pub const DEFAULT_MAX_SWEEPS: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    None,
    Sparsity,
    Diversity,
    Alternative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    GColumns,
    FRows,
}

/// One guidance constraint on the columns of G or the rows of F.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub target: Target,
    pub eps: f64,
    /// `G*` (n×r', columns used) or `F*` (r'×f, rows used); Alternative only.
    pub reference: Option<Array2<f64>>,
}

impl ConstraintSpec {
    pub fn sparsity(target: Target, eps: f64) -> Self {
        Self { kind: ConstraintKind::Sparsity, target, eps, reference: None }
    }

    pub fn diversity(target: Target, eps: f64) -> Self {
        Self { kind: ConstraintKind::Diversity, target, eps, reference: None }
    }

    pub fn alternative(target: Target, eps: f64, reference: Array2<f64>) -> Self {
        Self { kind: ConstraintKind::Alternative, target, eps, reference: Some(reference) }
    }

    fn validate(&self, n: usize, f: usize) -> Result<()> {
        if !(self.eps >= 0.0) {
            return Err(Error::Config(format!("constraint eps must be >= 0, got {}", self.eps)));
        }
        match (self.kind, &self.reference) {
            (ConstraintKind::Alternative, None) => {
                Err(Error::Config("alternative constraint needs a reference factor".into()))
            }
            (ConstraintKind::Alternative, Some(r)) => {
                let ok = match self.target {
                    Target::GColumns => r.nrows() == n,
                    Target::FRows => r.ncols() == f,
                };
                if !ok {
                    return Err(Error::Config(format!(
                        "alternative reference {:?} incompatible with V {}x{} ({:?})",
                        r.dim(),
                        n,
                        f,
                        self.target
                    )));
                }
                if r.iter().any(|&v| !(v >= 0.0)) {
                    return Err(Error::Config("alternative reference must be non-negative".into()));
                }
                Ok(())
            }
            (_, Some(_)) => Err(Error::Config(format!("{:?} constraint takes no reference", self.kind))),
            _ => Ok(()),
        }
    }
}

/// Convex feasible set for one role vector: the orthant, an optional L1 bound
/// and a list of halfspaces.
#[derive(Debug, Clone, Default)]
pub struct RoleConstraintSet {
    pub l1: Option<f64>,
    pub halfspaces: HalfspaceSet,
}

impl RoleConstraintSet {
    /// Feasible set for `G[:,k]` (target GColumns) or `F[k,:]` (target FRows)
    /// given the current factors.
    pub fn assemble(
        specs: &[ConstraintSpec],
        target: Target,
        g: ArrayView2<f64>,
        f: ArrayView2<f64>,
        k: usize,
    ) -> Self {
        let mut set = RoleConstraintSet::default();
        for spec in specs.iter().filter(|s| s.target == target) {
            match spec.kind {
                ConstraintKind::None => {}
                ConstraintKind::Sparsity => {
                    set.l1 = Some(set.l1.map_or(spec.eps, |e| e.min(spec.eps)));
                }
                ConstraintKind::Diversity => {
                    let r = g.ncols();
                    for j in (0..r).filter(|&j| j != k) {
                        let a = match target {
                            Target::GColumns => g.column(j).to_owned(),
                            Target::FRows => f.row(j).to_owned(),
                        };
                        set.halfspaces.push(a, spec.eps);
                    }
                }
                ConstraintKind::Alternative => {
                    let reference = spec.reference.as_ref().expect("validated alternative reference");
                    match target {
                        Target::GColumns => {
                            for col in reference.columns() {
                                set.halfspaces.push(col.to_owned(), spec.eps);
                            }
                        }
                        Target::FRows => {
                            for row in reference.rows() {
                                set.halfspaces.push(row.to_owned(), spec.eps);
                            }
                        }
                    }
                }
            }
        }
        set
    }

    /// Euclidean projection of `x` onto the set.
    pub fn project(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        if self.halfspaces.is_empty() {
            return Ok(match self.l1 {
                Some(eps) => project_l1_nonneg(x, eps),
                None => x.mapv(|v| v.max(0.0)),
            });
        }
        let mut hs = self.halfspaces.clone();
        if let Some(eps) = self.l1 {
            // on the orthant ‖x‖₁ = 1ᵀx
            hs.push(Array1::ones(x.len()), eps);
        }
        project_halfspaces_nonneg(x, &hs)
    }

    /// Largest constraint violation of `x` (0 when feasible).
    pub fn violation(&self, x: ArrayView1<f64>) -> f64 {
        let mut v = self.halfspaces.violation(x);
        if let Some(eps) = self.l1 {
            v = v.max(x.iter().map(|t| t.abs()).sum::<f64>() - eps);
        }
        v.max(0.0)
    }
}

/// `V - Σ_{j≠k} G[:,j] F[j,:]`.
pub fn residual_excluding(v: ArrayView2<f64>, g: ArrayView2<f64>, f: ArrayView2<f64>, k: usize) -> Array2<f64> {
    let mut r = v.to_owned();
    for j in (0..g.ncols()).filter(|&j| j != k) {
        let outer = g.column(j).insert_axis(Axis(1)).dot(&f.row(j).insert_axis(Axis(0)));
        r -= &outer;
    }
    r
}

/// Closed-form solve for one role vector followed by projection.
///
/// `r` must be oriented so that its rows index the entries of the solved
/// vector: the residual itself when solving a G column (paired with the F
/// row), its transpose when solving an F row (paired with the G column).
pub fn update_role_vector(r: ArrayView2<f64>, fixed: ArrayView1<f64>, set: &RoleConstraintSet) -> Result<Array1<f64>> {
    let unconstrained = least_squares_col(r, fixed);
    set.project(unconstrained.view())
}

#[derive(Debug, Clone)]
pub struct GlrdConfig {
    pub rank: usize,
    pub g_constraints: Vec<ConstraintSpec>,
    pub f_constraints: Vec<ConstraintSpec>,
    pub seed: u64,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl GlrdConfig {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            g_constraints: Vec::new(),
            f_constraints: Vec::new(),
            seed: 0,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            tol: DEFAULT_TOL,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_g(mut self, spec: ConstraintSpec) -> Self {
        self.g_constraints.push(ConstraintSpec { target: Target::GColumns, ..spec });
        self
    }

    pub fn with_f(mut self, spec: ConstraintSpec) -> Self {
        self.f_constraints.push(ConstraintSpec { target: Target::FRows, ..spec });
        self
    }
}

/// Fitted factorization `V ≈ G F`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleModel {
    pub g: Array2<f64>,
    pub f: Array2<f64>,
    /// `‖V - GF‖_F`.
    pub objective: f64,
    /// `‖V - GF‖_F / ‖V‖_F` (0 for an all-zero V).
    pub relative_error: f64,
    pub iterations: usize,
    pub seed: u64,
    pub node_labels: Vec<String>,
    pub feature_labels: Vec<String>,
    pub g_constraints: Vec<ConstraintSpec>,
    pub f_constraints: Vec<ConstraintSpec>,
    /// Roles whose definition or assignment collapsed to zero.
    pub dead_roles: Vec<usize>,
}

impl RoleModel {
    pub fn rank(&self) -> usize {
        self.g.ncols()
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        self.g.dot(&self.f)
    }

    /// Recompute `‖V - GF‖_F`.
    pub fn objective_for(&self, v: ArrayView2<f64>) -> f64 {
        frobenius((&v - &self.reconstruct()).view())
    }
}

/// Objective after every sub-step of a fit, starting with the initial point.
pub type FitTrace = Vec<f64>;

pub fn fit(v: ArrayView2<f64>, config: &GlrdConfig) -> Result<RoleModel> {
    fit_traced(v, config).map(|(m, _)| m)
}

/// [`fit`] that also returns the objective after every G and F update.
pub fn fit_traced(v: ArrayView2<f64>, config: &GlrdConfig) -> Result<(RoleModel, FitTrace)> {
    let (n, nf) = v.dim();
    let r = config.rank;
    if r == 0 || r > n.min(nf) {
        return Err(Error::Config(format!("rank {r} must be in 1..={} for a {n}x{nf} matrix", n.min(nf))));
    }
    if let Some(bad) = v.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Input(format!("feature matrix must be finite and non-negative, found {bad}")));
    }
    for spec in config.g_constraints.iter().chain(&config.f_constraints) {
        spec.validate(n, nf)?;
    }
    if config.g_constraints.iter().any(|s| s.target != Target::GColumns)
        || config.f_constraints.iter().any(|s| s.target != Target::FRows)
    {
        return Err(Error::Config("constraint target does not match the factor it was given for".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = Array2::from_shape_fn((n, r), |_| rng.gen::<f64>());
    let mut f = Array2::from_shape_fn((r, nf), |_| rng.gen::<f64>());

    // start from a feasible point so that the very first sub-step is already
    // monotone; each vector is projected against the current others, so the
    // last projection of every pair enforces the pairwise bound
    for k in 0..r {
        let set = RoleConstraintSet::assemble(&config.g_constraints, Target::GColumns, g.view(), f.view(), k);
        let col = set.project(g.column(k))?;
        g.column_mut(k).assign(&col);
    }
    for k in 0..r {
        let set = RoleConstraintSet::assemble(&config.f_constraints, Target::FRows, g.view(), f.view(), k);
        let row = set.project(f.row(k))?;
        f.row_mut(k).assign(&row);
    }

    let vnorm = frobenius(v);
    let mut resid = &v - &g.dot(&f);
    let mut objective = frobenius(resid.view());
    let mut trace = vec![objective];
    let mut sweeps = 0;

    while sweeps < config.max_sweeps {
        sweeps += 1;
        for k in 0..r {
            // residual with role k removed
            let gk = g.column(k).to_owned();
            let fk = f.row(k).to_owned();
            add_outer(&mut resid, gk.view(), fk.view(), 1.0);

            let set = RoleConstraintSet::assemble(&config.g_constraints, Target::GColumns, g.view(), f.view(), k);
            let new_g = update_role_vector(resid.view(), fk.view(), &set)?;
            trace.push(residual_norm_after(&resid, new_g.view(), fk.view()));
            g.column_mut(k).assign(&new_g);

            let set = RoleConstraintSet::assemble(&config.f_constraints, Target::FRows, g.view(), f.view(), k);
            let new_f = update_role_vector(resid.t(), new_g.view(), &set)?;
            trace.push(residual_norm_after(&resid, new_g.view(), new_f.view()));
            f.row_mut(k).assign(&new_f);

            add_outer(&mut resid, new_g.view(), new_f.view(), -1.0);
        }
        // refresh to keep incremental updates from drifting
        resid = &v - &g.dot(&f);
        let next = frobenius(resid.view());
        let decrease = objective - next;
        let prev = objective;
        objective = next;
        if next == 0.0 || decrease <= config.tol * prev {
            break;
        }
    }

    let dead_roles: Vec<usize> =
        (0..r).filter(|&k| g.column(k).iter().all(|&x| x == 0.0) || f.row(k).iter().all(|&x| x == 0.0)).collect();
    if !dead_roles.is_empty() {
        warn!("glrd: roles {dead_roles:?} collapsed to zero (seed {})", config.seed);
    }

    let model = RoleModel {
        objective,
        relative_error: if vnorm > 0.0 { objective / vnorm } else { 0.0 },
        iterations: sweeps,
        seed: config.seed,
        node_labels: Vec::new(),
        feature_labels: Vec::new(),
        g_constraints: config.g_constraints.clone(),
        f_constraints: config.f_constraints.clone(),
        dead_roles,
        g,
        f,
    };
    Ok((model, trace))
}

/// Run [`fit`] once per seed and keep the lowest objective (earliest seed on ties).
pub fn fit_best(v: ArrayView2<f64>, config: &GlrdConfig, seeds: &[u64]) -> Result<RoleModel> {
    let mut best: Option<RoleModel> = None;
    for &seed in seeds {
        let mut cfg = config.clone();
        cfg.seed = seed;
        let m = fit(v, &cfg)?;
        if best.as_ref().is_none_or(|b| m.objective < b.objective) {
            best = Some(m);
        }
    }
    best.ok_or_else(|| Error::Config("at least one seed is required".into()))
}

/// Fit roles that avoid a previous solution: every new G column (resp. F row)
/// has inner product at most `eps_g` (resp. `eps_f`) with every column of
/// `prior.g` (resp. row of `prior.f`). `None` leaves that side unconstrained.
pub fn fit_alternative(
    v: ArrayView2<f64>,
    rank: usize,
    prior: &RoleModel,
    eps_g: Option<f64>,
    eps_f: Option<f64>,
    seed: u64,
) -> Result<RoleModel> {
    let mut config = GlrdConfig::new(rank).seed(seed);
    if let Some(eps) = eps_g {
        config = config.with_g(ConstraintSpec::alternative(Target::GColumns, eps, prior.g.clone()));
    }
    if let Some(eps) = eps_f {
        config = config.with_f(ConstraintSpec::alternative(Target::FRows, eps, prior.f.clone()));
    }
    fit(v, &config)
}

fn add_outer(m: &mut Array2<f64>, col: ArrayView1<f64>, row: ArrayView1<f64>, sign: f64) {
    for (i, &c) in col.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        m.slice_mut(s![i, ..]).scaled_add(sign * c, &row);
    }
}

fn residual_norm_after(resid_without_k: &Array2<f64>, col: ArrayView1<f64>, row: ArrayView1<f64>) -> f64 {
    let mut total = 0.0;
    for (i, r) in resid_without_k.rows().into_iter().enumerate() {
        let c = col[i];
        for (j, &x) in r.iter().enumerate() {
            let d = x - c * row[j];
            total += d * d;
        }
    }
    total.sqrt()
}

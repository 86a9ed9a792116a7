//! Multi-relational role discovery by non-negative Tucker decomposition.
//!
//! `𝒱 ≈ ℋ ×₁ G ×₂ F ×₃ R` with G: n×p (E-groups), F: f×q (roles),
//! R: m×s (R-groups) and core ℋ: p×q×s, every block non-negative. Each
//! iteration solves G, F, R row-wise by NNLS against the matching unfolding,
//! normalizing columns after each factor solve and pushing the removed scale
//! into the core, then re-solves the core against the explicit Kronecker
//! system `vec(𝒱) ≈ (R⊗F⊗G) vec(ℋ)`.
//!
//! Factors can be held fixed, which is how roles learned on one tensor are
//! transferred to another.

use log::{debug, warn};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{kron, matricize, nnls_gram, unvectorize, vectorize, Mode, Tensor3};

pub const DEFAULT_MAX_ITERS: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_FIT_TOL: f64 = 1e-9;
pub const KRON_BUDGET_ENV: &str = "ROLEKIT_KRON_BUDGET";
const DEFAULT_KRON_BUDGET: usize = 512 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    G,
    F,
    R,
}

impl Factor {
    pub fn mode(self) -> Mode {
        match self {
            Factor::G => Mode::One,
            Factor::F => Mode::Two,
            Factor::R => Mode::Three,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Factor::G => "G",
            Factor::F => "F",
            Factor::R => "R",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "G" | "g" => Ok(Factor::G),
            "F" | "f" => Ok(Factor::F),
            "R" | "r" => Ok(Factor::R),
            other => Err(Error::Config(format!("unknown factor {other:?}, expected G, F or R"))),
        }
    }
}

/// Starting values. Factors left `None` are drawn uniform(0,1) from the seed,
/// except full-rank modes (rank = mode size), which start at the identity. A
/// missing core is solved from the starting factors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WarmStart {
    pub g: Option<Array2<f64>>,
    pub f: Option<Array2<f64>>,
    pub r: Option<Array2<f64>>,
    pub core: Option<Tensor3>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerConfig {
    /// Core dims `(p, q, s)`.
    pub dims: (usize, usize, usize),
    pub seed: u64,
    /// Stop when the objective drops by less than `tol × previous objective`.
    pub tol: f64,
    /// Also stop when the fit score `1 - obj/‖𝒱‖` improves by less than
    /// this; near-exact fits shrink the objective geometrically and would
    /// otherwise never meet the relative rule.
    pub fit_tol: f64,
    pub max_iters: usize,
    /// Factors held constant, with their values.
    pub fixed_g: Option<Array2<f64>>,
    pub fixed_f: Option<Array2<f64>>,
    pub fixed_r: Option<Array2<f64>>,
    pub warm_start: WarmStart,
    /// Largest explicit Kronecker matrix (bytes) the core solve may form.
    pub kron_budget: usize,
}

impl TuckerConfig {
    pub fn new(dims: (usize, usize, usize)) -> Self {
        Self {
            dims,
            seed: 0,
            tol: DEFAULT_TOL,
            fit_tol: DEFAULT_FIT_TOL,
            max_iters: DEFAULT_MAX_ITERS,
            fixed_g: None,
            fixed_f: None,
            fixed_r: None,
            warm_start: WarmStart::default(),
            kron_budget: kron_budget_from_env(),
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn fixed(&self) -> Vec<Factor> {
        let mut out = Vec::new();
        if self.fixed_g.is_some() {
            out.push(Factor::G);
        }
        if self.fixed_f.is_some() {
            out.push(Factor::F);
        }
        if self.fixed_r.is_some() {
            out.push(Factor::R);
        }
        out
    }
}

/// Budget from `ROLEKIT_KRON_BUDGET` (bytes), default 512 MiB.
pub fn kron_budget_from_env() -> usize {
    std::env::var(KRON_BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_KRON_BUDGET)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    pub g: Array2<f64>,
    pub f: Array2<f64>,
    pub r: Array2<f64>,
    pub core: Tensor3,
    /// `‖𝒱 - ℋ ×₁ G ×₂ F ×₃ R‖`.
    pub objective: f64,
    /// `1 - objective / ‖𝒱‖`, 1 for an all-zero tensor.
    pub fit: f64,
    pub seed: u64,
    pub iterations: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub fixed: Vec<Factor>,
    /// Factor columns that were all zero at the last normalization.
    pub zero_columns: Vec<(Factor, usize)>,
    pub entity_labels: Vec<String>,
    pub feature_labels: Vec<String>,
    pub relation_labels: Vec<String>,
}

impl TuckerModel {
    pub fn core_dims(&self) -> (usize, usize, usize) {
        self.core.dims()
    }

    pub fn reconstruct(&self) -> Tensor3 {
        Tensor3::tucker_product(&self.core, self.g.view(), self.f.view(), self.r.view())
    }

    pub fn objective_for(&self, v: &Tensor3) -> f64 {
        v.distance(&self.reconstruct())
    }

    pub fn factor(&self, which: Factor) -> &Array2<f64> {
        match which {
            Factor::G => &self.g,
            Factor::F => &self.f,
            Factor::R => &self.r,
        }
    }

    fn factor_mut(&mut self, which: Factor) -> &mut Array2<f64> {
        match which {
            Factor::G => &mut self.g,
            Factor::F => &mut self.f,
            Factor::R => &mut self.r,
        }
    }
}

/// `1 - objective/‖𝒱‖`, with the all-zero tensor scored 1.
pub fn fit_score(v: &Tensor3, objective: f64) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        1.0
    } else {
        1.0 - objective / norm
    }
}

/// NNLS solve of one factor with the other two and the core held fixed.
///
/// The design matrix is the mode-d unfolding of the core multiplied by the
/// other two factors, e.g. `ℋ₍₁₎(R⊗F)ᵀ` for G; each factor row is an
/// independent NNLS problem sharing one Gram matrix.
pub fn update_factor(v: &Tensor3, model: &TuckerModel, which: Factor) -> Result<Array2<f64>> {
    let (p, q, s) = model.core.dims();
    let partial = match which {
        Factor::G => Tensor3::tucker_product(&model.core, Array2::eye(p).view(), model.f.view(), model.r.view()),
        Factor::F => Tensor3::tucker_product(&model.core, model.g.view(), Array2::eye(q).view(), model.r.view()),
        Factor::R => Tensor3::tucker_product(&model.core, model.g.view(), model.f.view(), Array2::eye(s).view()),
    };
    let mode = which.mode();
    let b = matricize(&partial, mode);
    let target = matricize(v, mode);
    if target.ncols() != b.ncols() {
        return Err(Error::Input(format!(
            "tensor {:?} does not match model dims for the {} update",
            v.dims(),
            which.name()
        )));
    }
    let gram = b.dot(&b.t());
    let rhs = target.dot(&b.t());
    let mut out = Array2::zeros((target.nrows(), b.nrows()));
    for (i, row) in rhs.rows().into_iter().enumerate() {
        out.row_mut(i).assign(&nnls_gram(gram.view(), row));
    }
    Ok(out)
}

/// Scale every nonzero column of `factor` to unit L2 norm and multiply the
/// matching core sub-block along `mode` by the removed norm. Returns the
/// indices of all-zero columns, which are left untouched.
pub fn normalize_columns(factor: &mut Array2<f64>, core: &mut Tensor3, which: Factor) -> Vec<usize> {
    let (p, q, s) = core.dims();
    let mut zero = Vec::new();
    for c in 0..factor.ncols() {
        let norm = factor.column(c).dot(&factor.column(c)).sqrt();
        if norm == 0.0 {
            zero.push(c);
            continue;
        }
        if norm == 1.0 {
            continue;
        }
        factor.column_mut(c).mapv_inplace(|x| x / norm);
        match which {
            Factor::G => {
                for k in 0..s {
                    for j in 0..q {
                        core.set(c, j, k, core.get(c, j, k) * norm);
                    }
                }
            }
            Factor::F => {
                for k in 0..s {
                    for i in 0..p {
                        core.set(i, c, k, core.get(i, c, k) * norm);
                    }
                }
            }
            Factor::R => {
                for j in 0..q {
                    for i in 0..p {
                        core.set(i, j, c, core.get(i, j, c) * norm);
                    }
                }
            }
        }
    }
    zero
}

/// NNLS solve of the core against the explicit `(R⊗F⊗G)` system.
pub fn update_core(v: &Tensor3, model: &TuckerModel, budget: usize) -> Result<Tensor3> {
    let (n, f, m) = v.dims();
    let (p, q, s) = model.core.dims();
    let needed = (n * f * m)
        .checked_mul(p * q * s)
        .and_then(|c| c.checked_mul(std::mem::size_of::<f64>()))
        .unwrap_or(usize::MAX);
    if needed > budget {
        return Err(Error::Size { needed, budget });
    }
    let a = kron(model.r.view(), kron(model.f.view(), model.g.view()).view());
    if a.nrows() != n * f * m {
        return Err(Error::Input(format!("tensor {:?} does not match the factor shapes", v.dims())));
    }
    let b = vectorize(v);
    let gram = a.t().dot(&a);
    let atb = a.t().dot(&b);
    let h = nnls_gram(gram.view(), atb.view());
    unvectorize(h.view(), (p, q, s))
}

fn check_shape(which: Factor, m: &Array2<f64>, rows: usize, cols: usize) -> Result<()> {
    if m.nrows() != rows {
        return Err(Error::Transfer { mode: which.name(), expected: rows, found: m.nrows() });
    }
    if m.ncols() != cols {
        return Err(Error::Config(format!("{} factor has {} columns, core dims need {cols}", which.name(), m.ncols())));
    }
    if m.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Input(format!("{} factor must be finite and non-negative", which.name())));
    }
    Ok(())
}

pub fn fit(v: &Tensor3, config: &TuckerConfig) -> Result<TuckerModel> {
    fit_traced(v, config).map(|(m, _)| m)
}

/// [`fit`] that also returns the objective after every factor, normalization
/// and core update, starting with the initial point.
pub fn fit_traced(v: &Tensor3, config: &TuckerConfig) -> Result<(TuckerModel, Vec<f64>)> {
    let (n, nf, m) = v.dims();
    let (p, q, s) = config.dims;
    if p == 0 || q == 0 || s == 0 || p > n || q > nf || s > m {
        return Err(Error::Config(format!(
            "core dims {:?} must be positive and at most the tensor dims {:?}",
            config.dims,
            v.dims()
        )));
    }
    if v.min() < 0.0 || !v.as_slice().iter().all(|x| x.is_finite()) {
        return Err(Error::Input("tensor must be finite and non-negative".into()));
    }

    // always draw every block so a given seed means the same thing whether or
    // not a factor is fixed or warm-started
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = Array2::from_shape_fn((n, p), |_| rng.gen::<f64>());
    let mut f = Array2::from_shape_fn((nf, q), |_| rng.gen::<f64>());
    let mut r = Array2::from_shape_fn((m, s), |_| rng.gen::<f64>());
    let mut core = Tensor3::from_fn((p, q, s), |_, _, _| rng.gen::<f64>());

    let ws = &config.warm_start;
    for (which, slot, fixed, warm, rows, cols) in [
        (Factor::G, &mut g, &config.fixed_g, &ws.g, n, p),
        (Factor::F, &mut f, &config.fixed_f, &ws.f, nf, q),
        (Factor::R, &mut r, &config.fixed_r, &ws.r, m, s),
    ] {
        if let Some(x) = fixed.as_ref().or(warm.as_ref()) {
            check_shape(which, x, rows, cols)?;
            *slot = x.clone();
        } else if rows == cols {
            // a full-rank mode can be represented exactly by the identity
            *slot = Array2::eye(rows);
        }
    }
    if let Some(c) = &ws.core {
        if c.dims() != (p, q, s) || c.min() < 0.0 {
            return Err(Error::Config(format!("warm-start core {:?} does not match dims {:?}", c.dims(), (p, q, s))));
        }
        core = c.clone();
    }
    let solve_initial_core = ws.core.is_none();

    let fixed = config.fixed();
    let mut model = TuckerModel {
        g,
        f,
        r,
        core,
        objective: 0.0,
        fit: 0.0,
        seed: config.seed,
        iterations: 0,
        tol: config.tol,
        max_iters: config.max_iters,
        fixed: fixed.clone(),
        zero_columns: Vec::new(),
        entity_labels: Vec::new(),
        feature_labels: Vec::new(),
        relation_labels: Vec::new(),
    };

    if solve_initial_core {
        model.core = update_core(v, &model, config.kron_budget)?;
    }
    let vnorm = v.norm();
    let mut objective = model.objective_for(v);
    let mut trace = vec![objective];
    while model.iterations < config.max_iters {
        model.iterations += 1;
        model.zero_columns.clear();
        for which in [Factor::G, Factor::F, Factor::R] {
            if fixed.contains(&which) {
                continue;
            }
            let updated = update_factor(v, &model, which)?;
            *model.factor_mut(which) = updated;
            trace.push(model.objective_for(v));
            let mut factor = std::mem::take(model.factor_mut(which));
            let zero = normalize_columns(&mut factor, &mut model.core, which);
            *model.factor_mut(which) = factor;
            model.zero_columns.extend(zero.into_iter().map(|c| (which, c)));
            trace.push(model.objective_for(v));
        }
        model.core = update_core(v, &model, config.kron_budget)?;
        let next = model.objective_for(v);
        trace.push(next);
        let prev = objective;
        objective = next;
        debug!("mrd iter {}: objective {next:.6e}", model.iterations);
        let decrease = (prev - next).abs();
        if next == 0.0 || decrease <= config.tol * prev || decrease <= config.fit_tol * vnorm {
            break;
        }
    }
    if !model.zero_columns.is_empty() {
        warn!("mrd: zero factor columns {:?} (seed {})", model.zero_columns, config.seed);
    }
    model.objective = objective;
    model.fit = fit_score(v, objective);
    Ok((model, trace))
}

/// Run [`fit`] once per seed and keep the lowest objective (earliest seed on ties).
pub fn fit_best(v: &Tensor3, config: &TuckerConfig, seeds: &[u64]) -> Result<TuckerModel> {
    let mut best: Option<TuckerModel> = None;
    for &seed in seeds {
        let mut cfg = config.clone();
        cfg.seed = seed;
        let model = fit(v, &cfg)?;
        if best.as_ref().is_none_or(|b| model.objective < b.objective) {
            best = Some(model);
        }
    }
    best.ok_or_else(|| Error::Config("at least one seed is required".into()))
}

/// Fit `target` with the factors named in `fix` taken from `source` and held
/// constant. Free blocks whose shape matches the source start from the
/// source's values, so transferring a model onto its own tensor is a fixed
/// point.
pub fn transfer_fit(
    target: &Tensor3,
    source: &TuckerModel,
    fix: &[Factor],
    config: &TuckerConfig,
) -> Result<TuckerModel> {
    let (n, nf, m) = target.dims();
    let (p, q, s) = source.core_dims();
    for &which in fix {
        let (rows, mode) = match which {
            Factor::G => (n, "G"),
            Factor::F => (nf, "F"),
            Factor::R => (m, "R"),
        };
        let found = source.factor(which).nrows();
        if found != rows {
            return Err(Error::Transfer { mode, expected: rows, found });
        }
    }
    let mut cfg = config.clone();
    cfg.dims = (p, q, s);
    cfg.fixed_g = fix.contains(&Factor::G).then(|| source.g.clone());
    cfg.fixed_f = fix.contains(&Factor::F).then(|| source.f.clone());
    cfg.fixed_r = fix.contains(&Factor::R).then(|| source.r.clone());
    cfg.warm_start = WarmStart {
        g: (source.g.nrows() == n).then(|| source.g.clone()),
        f: (source.f.nrows() == nf).then(|| source.f.clone()),
        r: (source.r.nrows() == m).then(|| source.r.clone()),
        core: Some(source.core.clone()),
    };
    let mut model = fit(target, &cfg)?;
    model.seed = source.seed;
    Ok(model)
}

/// Cross-transfer fit matrix: entry `(i, j)` is the fit of tensor `j` with
/// the roles (F) learned on tensor `i` held fixed. Each tensor is first fit
/// with the best of `seeds`.
pub fn transfer_heatmap(
    tensors: &[Tensor3],
    config: &TuckerConfig,
    seeds: &[u64],
) -> Result<(Array2<f64>, Vec<TuckerModel>)> {
    if tensors.len() < 2 {
        return Err(Error::Config("heat map needs at least two tensors".into()));
    }
    let nf = tensors[0].dims().1;
    if let Some(t) = tensors.iter().find(|t| t.dims().1 != nf) {
        return Err(Error::Transfer { mode: "F", expected: nf, found: t.dims().1 });
    }
    let models = tensors.iter().map(|t| fit_best(t, config, seeds)).collect::<Result<Vec<_>>>()?;
    let k = tensors.len();
    let mut out = Array2::zeros((k, k));
    for (i, src) in models.iter().enumerate() {
        for (j, tgt) in tensors.iter().enumerate() {
            out[[i, j]] = transfer_fit(tgt, src, &[Factor::F], config)?.fit;
        }
    }
    Ok((out, models))
}

/// `ℋ₍d₎` times the Kronecker product of the other two factors (higher mode on
/// the left), transposed; the unfolding of the model must equal
/// `factor · this`.
pub fn unfolding_design(model: &TuckerModel, which: Factor) -> Array2<f64> {
    let mode = which.mode();
    let h = matricize(&model.core, mode);
    let k = match which {
        Factor::G => kron(model.r.view(), model.f.view()),
        Factor::F => kron(model.r.view(), model.g.view()),
        Factor::R => kron(model.f.view(), model.g.view()),
    };
    h.dot(&k.t())
}

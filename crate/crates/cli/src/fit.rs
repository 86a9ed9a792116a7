use std::path::Path;

use rolekit::glrd::{self, ConstraintSpec, GlrdConfig, Target};
use rolekit::graphio::{write_model, ModelDocument};
use rolekit::mrd::{self, Factor, TuckerConfig};
use rolekit::tasks::check_feature_schema;

use crate::args::{FactorName, GlrdArgs, HeatmapArgs, MrdArgs, TransferArgs, TuckerOpts};
use crate::artifacts::{
    manifest_for, matrix_csv, read_matrix, read_role_model, read_tensor, read_tucker_model, write_manifest, write_text,
    Failure, InModule,
};

fn no_seeds(module: &'static str) -> Failure {
    Failure::usage(module, "at least one seed is required")
}

pub fn glrd(a: &GlrdArgs, argv: &[String]) -> Result<(), Failure> {
    if a.seeds.is_empty() {
        return Err(no_seeds("glrd"));
    }
    let v = read_matrix(&a.features)?;
    let mut config = GlrdConfig::new(a.roles as usize);
    config.max_sweeps = a.max_sweeps as usize;
    config.tol = a.tol;
    if let Some(eps) = a.sparsity_g {
        config = config.with_g(ConstraintSpec::sparsity(Target::GColumns, eps));
    }
    if let Some(eps) = a.diversity_g {
        config = config.with_g(ConstraintSpec::diversity(Target::GColumns, eps));
    }
    if let Some(eps) = a.sparsity_f {
        config = config.with_f(ConstraintSpec::sparsity(Target::FRows, eps));
    }
    if let Some(eps) = a.diversity_f {
        config = config.with_f(ConstraintSpec::diversity(Target::FRows, eps));
    }
    if let Some(path) = &a.prior {
        if a.alt_eps_g.is_none() && a.alt_eps_f.is_none() {
            return Err(Failure::usage("glrd", "--prior needs --alt-eps-g and/or --alt-eps-f"));
        }
        let prior = read_role_model(path)?;
        check_feature_schema(&prior.feature_labels, &v.col_labels).in_module("glrd")?;
        if let Some(eps) = a.alt_eps_g {
            config = config.with_g(ConstraintSpec::alternative(Target::GColumns, eps, prior.g.clone()));
        }
        if let Some(eps) = a.alt_eps_f {
            config = config.with_f(ConstraintSpec::alternative(Target::FRows, eps, prior.f.clone()));
        }
    }
    let mut model = glrd::fit_best(v.values.view(), &config, &a.seeds).in_module("glrd")?;
    model.node_labels = v.row_labels;
    model.feature_labels = v.col_labels;
    println!(
        "glrd r={} seed={} objective={} relative_error={} sweeps={}",
        model.rank(),
        model.seed,
        model.objective,
        model.relative_error,
        model.iterations
    );
    write_text(&a.out, &write_model(&ModelDocument::Role(model)))?;
    write_manifest(&manifest_for(&a.out), "glrd", argv, a, std::slice::from_ref(&a.out))
}

fn tucker_config(dims: (usize, usize, usize), opts: &TuckerOpts) -> TuckerConfig {
    let mut c = TuckerConfig::new(dims);
    c.tol = opts.tol;
    c.fit_tol = opts.fit_tol;
    c.max_iters = opts.max_iters as usize;
    c
}

pub fn mrd(a: &MrdArgs, argv: &[String]) -> Result<(), Failure> {
    if a.opts.seeds.is_empty() {
        return Err(no_seeds("mrd"));
    }
    let (tensor, labels) = read_tensor(&a.tensor, a.labels.as_deref())?;
    let config = tucker_config(a.dims, &a.opts);
    let mut model = mrd::fit_best(&tensor, &config, &a.opts.seeds).in_module("mrd")?;
    model.entity_labels = labels.entities;
    model.feature_labels = labels.features;
    model.relation_labels = labels.relations;
    println!(
        "mrd dims={:?} seed={} fit={} objective={} iterations={}",
        a.dims, model.seed, model.fit, model.objective, model.iterations
    );
    write_text(&a.out, &write_model(&ModelDocument::Tucker(model)))?;
    write_manifest(&manifest_for(&a.out), "mrd", argv, a, std::slice::from_ref(&a.out))
}

fn factor(name: FactorName) -> Factor {
    match name {
        FactorName::G => Factor::G,
        FactorName::F => Factor::F,
        FactorName::R => Factor::R,
    }
}

pub fn transfer(a: &TransferArgs, argv: &[String]) -> Result<(), Failure> {
    let source = read_tucker_model(&a.model, "mrd")?;
    let (tensor, labels) = read_tensor(&a.tensor, a.labels.as_deref())?;
    let fix: Vec<Factor> = a.fix.iter().map(|&n| factor(n)).collect();
    if fix.contains(&Factor::F) {
        check_feature_schema(&source.feature_labels, &labels.features).in_module("mrd")?;
    }
    let opts = TuckerOpts { seeds: vec![source.seed], tol: a.tol, fit_tol: a.fit_tol, max_iters: a.max_iters };
    let config = tucker_config(source.core_dims(), &opts);
    let mut model = mrd::transfer_fit(&tensor, &source, &fix, &config).in_module("mrd")?;
    model.entity_labels = labels.entities;
    model.feature_labels = labels.features;
    model.relation_labels = labels.relations;
    println!("transfer fix={:?} fit={} objective={}", a.fix, model.fit, model.objective);
    write_text(&a.out, &write_model(&ModelDocument::Tucker(model)))?;
    write_manifest(&manifest_for(&a.out), "transfer", argv, a, std::slice::from_ref(&a.out))
}

pub fn heatmap(a: &HeatmapArgs, argv: &[String]) -> Result<(), Failure> {
    if a.tensors.len() < 2 {
        return Err(Failure::usage("mrd", "heat map needs at least two tensors"));
    }
    if a.opts.seeds.is_empty() {
        return Err(no_seeds("mrd"));
    }
    let mut tensors = Vec::with_capacity(a.tensors.len());
    let mut first_features: Option<Vec<String>> = None;
    for path in &a.tensors {
        let (t, labels) = read_tensor(path, None)?;
        match &first_features {
            Some(f) => check_feature_schema(f, &labels.features).in_module("mrd")?,
            None => first_features = Some(labels.features),
        }
        tensors.push(t);
    }
    let config = tucker_config(a.dims, &a.opts);
    let (fits, models) = mrd::transfer_heatmap(&tensors, &config, &a.opts.seeds).in_module("mrd")?;
    let names: Vec<String> = a.tensors.iter().map(|p| tensor_name(p)).collect();
    write_text(&a.out, &matrix_csv("source\\target", &names, &names, &fits))?;
    for (name, m) in names.iter().zip(&models) {
        println!("{name}: own fit {} (seed {})", m.fit, m.seed);
    }
    write_manifest(&manifest_for(&a.out), "heatmap", argv, a, std::slice::from_ref(&a.out))
}

fn tensor_name(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

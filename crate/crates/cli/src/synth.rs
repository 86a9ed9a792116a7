use std::path::PathBuf;

use ndarray::Array2;
use rolekit::glrd::RoleModel;
use rolekit::graphio::{write_model, LabeledMatrix, ModelDocument};
use rolekit::mrd::TuckerModel;
use rolekit::synth::{drift_sequence, planted_nmf, planted_tucker, twin_matrices, DriftConfig, PlantedTucker};

use crate::args::{SynthArgs, SynthKind};
use crate::artifacts::{
    create_dir, manifest_for, sidecar_path, write_manifest, write_tensor, write_text, Failure, InModule, TensorLabels,
};

fn labels(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn matrix(values: Array2<f64>) -> LabeledMatrix {
    LabeledMatrix::unlabeled(values, "node", "feat")
}

fn truth_path(out: &std::path::Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".truth.json");
    PathBuf::from(s)
}

fn tensor_labels(dims: (usize, usize, usize)) -> TensorLabels {
    TensorLabels {
        entities: labels("node", dims.0),
        features: labels("feat", dims.1),
        relations: labels("rel", dims.2),
    }
}

fn tucker_truth(p: &PlantedTucker, seed: u64, l: &TensorLabels) -> TuckerModel {
    TuckerModel {
        g: p.g.clone(),
        f: p.f.clone(),
        r: p.r.clone(),
        core: p.core.clone(),
        objective: 0.0,
        fit: 1.0,
        seed,
        iterations: 0,
        tol: 0.0,
        max_iters: 0,
        fixed: Vec::new(),
        zero_columns: Vec::new(),
        entity_labels: l.entities.clone(),
        feature_labels: l.features.clone(),
        relation_labels: l.relations.clone(),
    }
}

pub fn run(a: &SynthArgs, argv: &[String]) -> Result<(), Failure> {
    let (n, f) = a.size;
    let mut artifacts = Vec::new();
    let manifest = match a.kind {
        SynthKind::Nmf => {
            let p = planted_nmf(n, f, a.roles, a.density, a.seed).in_module("synth")?;
            let v = matrix(p.v);
            let truth = RoleModel {
                objective: 0.0,
                relative_error: 0.0,
                iterations: 0,
                seed: a.seed,
                node_labels: v.row_labels.clone(),
                feature_labels: v.col_labels.clone(),
                g_constraints: Vec::new(),
                f_constraints: Vec::new(),
                dead_roles: Vec::new(),
                g: p.g,
                f: p.f,
            };
            write_text(&a.out, &v.write_csv("node"))?;
            write_text(&truth_path(&a.out), &write_model(&ModelDocument::Role(truth)))?;
            artifacts.extend([a.out.clone(), truth_path(&a.out)]);
            manifest_for(&a.out)
        }
        SynthKind::Tucker => {
            let p = planted_tucker(a.dims, a.core, a.seed).in_module("synth")?;
            let l = tensor_labels(a.dims);
            write_tensor(&a.out, &p.tensor, &l)?;
            write_text(&truth_path(&a.out), &write_model(&ModelDocument::Tucker(tucker_truth(&p, a.seed, &l))))?;
            artifacts.extend([a.out.clone(), sidecar_path(&a.out), truth_path(&a.out)]);
            manifest_for(&a.out)
        }
        SynthKind::Drift => {
            let cfg = DriftConfig { steps: a.steps as usize, dims: a.dims, core_dims: a.core, drift: a.drift };
            let seq = drift_sequence(&cfg, a.seed).in_module("synth")?;
            create_dir(&a.out)?;
            let l = tensor_labels(a.dims);
            for (t, p) in seq.iter().enumerate() {
                let path = a.out.join(format!("step{t}.coo"));
                write_tensor(&path, &p.tensor, &l)?;
                artifacts.extend([path.clone(), sidecar_path(&path)]);
            }
            a.out.join("manifest.json")
        }
        SynthKind::Twins => {
            let t = twin_matrices(n, f, a.roles, a.noise, a.seed).in_module("synth")?;
            create_dir(&a.out)?;
            for (name, values) in [("source.csv", t.source), ("target.csv", t.target)] {
                let path = a.out.join(name);
                write_text(&path, &matrix(values).write_csv("node"))?;
                artifacts.push(path);
            }
            a.out.join("manifest.json")
        }
    };
    println!("synth {:?}: {} files", a.kind, artifacts.len());
    write_manifest(&manifest, "synth", argv, a, &artifacts)
}

use rolekit::graphio::{load_edge_list, load_multigraph};
use rolekit::refex::{extract_features, extract_tensor, Aggregator, FeatureConfig};

use crate::args::FeaturesArgs;
use crate::artifacts::{
    manifest_for, read_text, sidecar_path, write_manifest, write_tensor, write_text, Failure, InModule, TensorLabels,
};

pub fn run(a: &FeaturesArgs, argv: &[String]) -> Result<(), Failure> {
    let aggregators =
        a.aggregators.iter().map(|s| Aggregator::parse(s)).collect::<rolekit::Result<Vec<_>>>().in_module("refex")?;
    let config = FeatureConfig { max_depth: a.depth, prune_corr: a.prune_corr, log_transform: !a.no_log, aggregators };
    config.validate().in_module("refex")?;

    let mut artifacts = vec![a.out.clone()];
    if let Some(path) = &a.multigraph {
        let mg = load_multigraph(&read_text(path)?, a.directed).in_module("graphio")?;
        let ft = extract_tensor(&mg, &config).in_module("refex")?;
        let labels =
            TensorLabels { entities: ft.node_labels, features: ft.feature_labels, relations: ft.relation_labels };
        write_tensor(&a.out, &ft.tensor, &labels)?;
        artifacts.push(sidecar_path(&a.out));
        println!(
            "tensor {}x{}x{} -> {}",
            labels.entities.len(),
            labels.features.len(),
            labels.relations.len(),
            a.out.display()
        );
    } else {
        let path = a.graph.as_ref().expect("clap requires --graph or --multigraph");
        let graph = load_edge_list(&read_text(path)?, a.directed).in_module("graphio")?;
        let matrix = match &a.schema_from {
            Some(reference) => {
                let ref_graph = load_edge_list(&read_text(reference)?, a.directed).in_module("graphio")?;
                extract_features(&ref_graph, &config).in_module("refex")?.apply_to(&graph)
            }
            None => extract_features(&graph, &config).in_module("refex")?.matrix,
        };
        write_text(&a.out, &matrix.write_csv("node"))?;
        println!("features {}x{} -> {}", matrix.values.nrows(), matrix.values.ncols(), a.out.display());
    }
    write_manifest(&manifest_for(&a.out), "features", argv, a, &artifacts)
}

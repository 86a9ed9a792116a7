use std::fmt::Write as _;

use rolekit::coreview::{
    build_interaction_graph, classify_core, embed_core, kept_entries, macro_metrics, GraphMode, StabilityOperator,
};

use crate::args::{AnalyzeArgs, GraphModeArg, StabilityArg};
use crate::artifacts::{create_dir, read_tucker_model, write_manifest, write_text, Failure, InModule};

pub fn run(a: &AnalyzeArgs, argv: &[String]) -> Result<(), Failure> {
    let model = read_tucker_model(&a.model, "coreview")?;
    let core = &model.core;
    let mode = match a.graph_mode {
        GraphModeArg::Clique => GraphMode::Clique,
        GraphModeArg::Tripartite => GraphMode::Tripartite,
    };
    let operator = match a.stability {
        StabilityArg::RandomWalk => StabilityOperator::RandomWalk,
        StabilityArg::Laplacian => StabilityOperator::Laplacian,
    };

    let kept = kept_entries(core, a.threshold_frac).in_module("coreview")?;
    let (p, q, s) = core.dims();
    let mut core_csv = String::from("egroup,role,rgroup,value,kept\n");
    for k in 0..s {
        for j in 0..q {
            for i in 0..p {
                let h = core.get(i, j, k);
                let on = kept.iter().any(|&(a, b, c, _)| (a, b, c) == (i, j, k));
                writeln!(core_csv, "{i},{j},{k},{h},{}", u8::from(on)).expect("write to string");
            }
        }
    }

    let patterns = classify_core(core, a.threshold_frac).in_module("coreview")?;
    let mut patterns_csv = String::from("egroup,pattern\n");
    for (i, pat) in patterns.iter().enumerate() {
        writeln!(patterns_csv, "E{i},{}", pat.name()).expect("write to string");
    }

    let graph = build_interaction_graph(core, a.threshold_frac, mode).in_module("coreview")?;
    let metrics = macro_metrics(&graph, operator).in_module("coreview")?;
    let m = &metrics;
    let mut metrics_csv = String::from("metric,value\n");
    for (name, value) in [
        ("nodes", m.nodes as f64),
        ("edges", m.edges as f64),
        ("simplicity", m.simplicity),
        ("sharing", m.sharing),
        ("variability_degree", m.variability_degree),
        ("variability_entropy", m.variability_entropy),
        ("variability_entropy_normalized", m.variability_entropy_normalized),
        ("stability", m.stability),
    ] {
        writeln!(metrics_csv, "{name},{value}").expect("write to string");
    }
    writeln!(metrics_csv, "stability_operator,{}", a.stability_name()).expect("write to string");

    let embedding = embed_core(core, a.threshold_frac, a.clusters as usize, a.seed).in_module("coreview")?;
    let mut embed_csv = String::from("node,type,x,y,cluster\n");
    for (r, node) in embedding.nodes.iter().enumerate() {
        writeln!(
            embed_csv,
            "{},{},{},{},{}",
            node.label(),
            node.kind_name(),
            embedding.coords[[r, 0]],
            embedding.coords[[r, 1]],
            embedding.clusters[r]
        )
        .expect("write to string");
    }

    create_dir(&a.out_dir)?;
    let files = [
        ("core.csv", core_csv),
        ("patterns.csv", patterns_csv),
        ("interaction.tsv", graph.to_edge_list()),
        ("metrics.csv", metrics_csv),
        ("embedding.csv", embed_csv),
    ];
    let mut artifacts = Vec::new();
    for (name, text) in &files {
        let path = a.out_dir.join(name);
        write_text(&path, text)?;
        artifacts.push(path);
    }
    println!("analyze: {} kept entries, {} nodes, {} edges, stability {}", kept.len(), m.nodes, m.edges, m.stability);
    write_manifest(&a.out_dir.join("manifest.json"), "analyze", argv, a, &artifacts)
}

impl AnalyzeArgs {
    fn stability_name(&self) -> &'static str {
        match self.stability {
            StabilityArg::RandomWalk => "random_walk",
            StabilityArg::Laplacian => "laplacian",
        }
    }
}

//! Estimate the non-rejection-rate matrix of a dataset with many more
//! variables than observations, and see it separate edges from non-edges.
//!
//! ```bash
//! cargo run --release --example estimate_nrr
//! ```

use qpmix::graph::MarkedGraph;
use qpmix::model::build_model;
use qpmix::nrr::{nrr_matrix, NrrOptions};
use qpmix::sample::sample_dataset;

fn main() -> qpmix::Result<()> {
    // p = 50 variables, n = 25 observations: the full covariance matrix is
    // singular, but every marginal of q + 2 = 5 variables is well behaved
    let graph = MarkedGraph::sample_dregular(50, 3, 2, 1)?;
    let model = build_model(&graph, 0.6, 3.0, &[2, 2], 2)?;
    let data = sample_dataset(&model, 25, 3)?;
    println!("dataset: n = {} rows over p = {} columns", data.n(), data.p());

    let matrix = nrr_matrix(
        &data,
        &NrrOptions { q: 3, n_subsets: 100, alpha: 0.05, seed: 4, ..Default::default() },
    )?;
    println!(
        "rate matrix: {} defined pairs (discrete-discrete pairs stay undefined)",
        matrix.defined_count()
    );

    // true edges should concentrate at low rates
    let mut edges = Vec::new();
    let mut gaps = Vec::new();
    for (a, b, rate, _) in matrix.defined_entries() {
        if graph.has_edge(a, b) {
            edges.push(rate);
        } else {
            gaps.push(rate);
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    println!("mean rate over the {} true edges:     {:.3}", edges.len(), mean(&edges));
    println!("mean rate over the {} non-edges:      {:.3}", gaps.len(), mean(&gaps));

    let histogram = |v: &[f64]| {
        let mut bins = [0usize; 10];
        for &x in v {
            bins[((x * 10.0) as usize).min(9)] += 1;
        }
        bins.iter().map(|c| format!("{c:>5}")).collect::<Vec<_>>().join(" ")
    };
    println!("\nrate histogram (bins 0.0-0.1 ... 0.9-1.0)");
    println!("  edges:     {}", histogram(&edges));
    println!("  non-edges: {}", histogram(&gaps));
    Ok(())
}

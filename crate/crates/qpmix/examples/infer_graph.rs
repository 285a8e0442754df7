//! Turn a rate matrix into a graph estimate: thresholding and ranking.
//!
//! ```bash
//! cargo run --release --example infer_graph
//! ```

use qpmix::graph::MarkedGraph;
use qpmix::infer::{auc, precision_recall, qp_graph, rank_edges};
use qpmix::model::build_model;
use qpmix::nrr::{nrr_matrix, NrrOptions};
use qpmix::sample::sample_dataset;

fn main() -> qpmix::Result<()> {
    let truth = MarkedGraph::sample_dregular(10, 2, 2, 91)?;
    let model = build_model(&truth, 0.7, 3.0, &[2, 2], 92)?;
    let data = sample_dataset(&model, 25, 93)?;
    let matrix = nrr_matrix(
        &data,
        &NrrOptions { q: 5, n_subsets: 100, alpha: 0.05, seed: 94, ..Default::default() },
    )?;

    println!("threshold sweep against the generating graph ({} edges):", truth.n_edges());
    println!("  cutoff  edges  precision  recall");
    for cutoff in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let estimate = qp_graph(&matrix, cutoff)?;
        let hits = estimate.edges().filter(|&(a, b)| truth.has_edge(a, b)).count();
        let precision = hits as f64 / estimate.n_edges().max(1) as f64;
        let recall = hits as f64 / truth.n_edges() as f64;
        println!(
            "  {cutoff:.1}     {:>3}    {precision:.3}      {recall:.3}",
            estimate.n_edges()
        );
    }

    // threshold-free view: rank all pairs and integrate precision-recall
    let ranked: Vec<(usize, usize)> = rank_edges(&matrix).into_iter().map(|(p, _)| p).collect();
    let curve = precision_recall(&ranked, &truth, 1.0)?;
    println!("\narea under the precision-recall curve: {:.3}", auc(&curve));
    println!("top of the ranking (true edges marked *):");
    for &(a, b) in ranked.iter().take(12) {
        let mark = if truth.has_edge(a, b) { " *" } else { "" };
        let (rate, _) = matrix.value(a, b).unwrap();
        println!("  ({a:>2}, {b:>2})  rate {rate:.3}{mark}");
    }
    Ok(())
}

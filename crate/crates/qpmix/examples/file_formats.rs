//! Round-trip every file format: graph edge list, model, dataset CSV, and
//! the rate-matrix TSV. All of them are plain text and byte-stable.
//!
//! ```bash
//! cargo run --example file_formats
//! ```

use qpmix::data::MixedDataset;
use qpmix::graph::MarkedGraph;
use qpmix::model::{build_model, CGModel};
use qpmix::nrr::{nrr_matrix, NrrMatrix, NrrOptions};
use qpmix::sample::sample_dataset;

fn main() -> qpmix::Result<()> {
    let dir = std::env::temp_dir().join("qpmix-formats-demo");
    std::fs::create_dir_all(&dir)?;

    let graph = MarkedGraph::sample_dregular(8, 3, 2, 3)?;
    let graph_path = dir.join("demo-graph.txt");
    graph.save_edge_list(&graph_path)?;
    let graph_back = MarkedGraph::load_edge_list(&graph_path)?;
    assert_eq!(graph, graph_back);
    println!("graph file ({} bytes):", std::fs::metadata(&graph_path)?.len());
    print!("{}", &graph.to_edge_list_string()[..40.min(graph.to_edge_list_string().len())]);
    println!("...");

    let model = build_model(&graph, 0.5, 2.0, &[2, 2], 4)?;
    let model_path = dir.join("demo-model.txt");
    model.save_model(&model_path)?;
    let model_back = CGModel::load_model(&model_path)?;
    assert_eq!(model.to_model_string(), model_back.to_model_string());
    println!("model file round-trips byte-identically ({} bytes)", std::fs::metadata(&model_path)?.len());

    let data = sample_dataset(&model, 30, 5)?;
    let data_path = dir.join("demo-data.csv");
    data.save_csv(&data_path)?;
    let data_back = MixedDataset::load_csv(&data_path)?;
    assert_eq!(data, data_back);
    println!("dataset csv round-trips ({} rows)", data_back.n());

    let matrix = nrr_matrix(&data, &NrrOptions { q: 2, n_subsets: 20, seed: 6, ..Default::default() })?;
    let nrr_path = dir.join("demo-nrr.tsv");
    matrix.save_tsv(&nrr_path)?;
    let matrix_back = NrrMatrix::load_tsv(&nrr_path)?;
    assert_eq!(matrix, matrix_back);
    println!("rate matrix tsv round-trips ({} defined pairs)", matrix_back.defined_count());

    println!("\nfiles left in {}", dir.display());
    Ok(())
}

//! Build a synthetic homogeneous mixed model and draw data from it.
//!
//! ```bash
//! cargo run --example simulate_model
//! ```

use qpmix::graph::MarkedGraph;
use qpmix::model::build_model;
use qpmix::sample::sample_dataset;

fn main() -> qpmix::Result<()> {
    // a 3-regular graph on 12 vertices; vertices 0 and 1 are binary discrete
    let graph = MarkedGraph::sample_dregular(12, 3, 2, 7)?;
    println!(
        "sampled graph: {} vertices, {} edges, density {:.3}, decomposable: {}",
        graph.n_vertices(),
        graph.n_edges(),
        graph.density(),
        graph.is_decomposable()
    );

    // random parameters: mean edge correlation 0.6, mixed interactions of
    // spread 3, uniform joint levels
    let model = build_model(&graph, 0.6, 3.0, &[2, 2], 42)?;
    println!(
        "model: {} joint levels, sigma is {}x{}",
        model.n_cells(),
        model.n_continuous(),
        model.n_continuous()
    );
    println!("zero-pattern leak of sigma^-1: {:.2e}", model.zero_pattern_violation()?);

    // conditional means differ across levels wherever a continuous vertex
    // has a discrete neighbor
    for cell in 0..model.n_cells() {
        let mu = model.mu(cell);
        println!(
            "  mu(level {cell}) = [{}]",
            mu.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ")
        );
    }

    // moment form and canonical form are two views of the same model
    let canonical = model.to_canonical()?;
    println!("K[0,0] = {:.4} (precision of the first continuous variable)", canonical.k[(0, 0)]);

    let data = sample_dataset(&model, 25, 11)?;
    println!("drew {} observations over {} columns", data.n(), data.p());
    println!("first row, discrete part: {:?}", (0..2).map(|v| data.discrete_value(0, v)).collect::<Vec<_>>());
    Ok(())
}

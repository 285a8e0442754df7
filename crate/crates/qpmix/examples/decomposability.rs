//! Marked-graph decomposability: chordality plus the no-continuous-path
//! condition between non-adjacent discrete vertices.
//!
//! ```bash
//! cargo run --example decomposability
//! ```

use qpmix::graph::MarkedGraph;

fn show(name: &str, g: &MarkedGraph) {
    println!(
        "{name}: {} vertices ({} discrete), {} edges -> decomposable: {}",
        g.n_vertices(),
        g.n_discrete(),
        g.n_edges(),
        g.is_decomposable()
    );
}

fn main() -> qpmix::Result<()> {
    // a triangle of continuous variables: chordal, no discrete vertices
    let triangle = MarkedGraph::new(3, 0, [(0, 1), (0, 2), (1, 2)])?;
    show("continuous triangle", &triangle);

    // a chordless 4-cycle fails no matter the marks
    let square = MarkedGraph::new(4, 0, [(0, 1), (1, 2), (2, 3), (0, 3)])?;
    show("chordless 4-cycle", &square);
    let chorded = MarkedGraph::new(4, 0, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])?;
    show("same cycle with a chord", &chorded);

    // discrete vertices 0, 1 joined only through continuous 2, 3:
    // chordal, yet not decomposable
    let chain = MarkedGraph::new(4, 2, [(0, 2), (2, 3), (1, 3)])?;
    show("discrete-continuous-continuous-discrete chain", &chain);

    // sampled regular graphs keep discrete vertices non-adjacent; sparse
    // ones are usually not decomposable (long cycles appear quickly)
    let mut decomposable = 0;
    let trials = 200;
    for seed in 0..trials {
        if MarkedGraph::sample_dregular(10, 2, 2, seed)?.is_decomposable() {
            decomposable += 1;
        }
    }
    println!("\n2-regular graphs on 10 vertices that are decomposable: {decomposable}/{trials}");
    Ok(())
}

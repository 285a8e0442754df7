//! Average the non-rejection rate over several conditioning orders instead
//! of committing to a single q.
//!
//! ```bash
//! cargo run --release --example q_averaging
//! ```

use qpmix::graph::MarkedGraph;
use qpmix::model::build_model;
use qpmix::nrr::{average_nrr, nrr_matrix, NrrMatrix, NrrOptions};
use qpmix::sample::sample_dataset;
use qpmix::seed::derive_seed;

fn main() -> qpmix::Result<()> {
    let truth = MarkedGraph::sample_dregular(20, 3, 2, 5)?;
    let model = build_model(&truth, 0.6, 3.0, &[2, 2], 6)?;
    let data = sample_dataset(&model, 60, 7)?;

    // one matrix per order, restricted to continuous conditioning sets
    let orders = [2usize, 5, 8, 11];
    let matrices: Vec<NrrMatrix> = orders
        .iter()
        .map(|&q| {
            nrr_matrix(
                &data,
                &NrrOptions {
                    q,
                    n_subsets: 50,
                    restrict_continuous: true,
                    seed: derive_seed(8, &[q as u64]),
                    ..Default::default()
                },
            )
        })
        .collect::<qpmix::Result<_>>()?;
    let averaged = average_nrr(&matrices)?;
    println!("averaged over q = {:?}", averaged.meta().q);

    // per-order and averaged rates for a few pairs
    println!("\npair        q=2    q=5    q=8    q=11   avg   edge?");
    let some_pairs: Vec<(usize, usize)> = truth.edges().take(4).chain([(4, 9), (5, 17)]).collect();
    for (a, b) in some_pairs {
        let per: Vec<String> = matrices
            .iter()
            .map(|m| m.value(a, b).map_or("  -  ".into(), |(v, _)| format!("{v:.2} ")))
            .collect();
        let avg = averaged.value(a, b).map_or(f64::NAN, |(v, _)| v);
        println!(
            "({a:>2}, {b:>2})    {}  {avg:.2}  {}",
            per.join("  "),
            if truth.has_edge(a, b) { "yes" } else { "no" }
        );
    }
    Ok(())
}

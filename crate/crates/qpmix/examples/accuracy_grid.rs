//! Structure-recovery accuracy over a grid of graph densities and
//! parameter strengths, scored as area under the precision-recall curve
//! against the generating graph.
//!
//! The full grid (scale 1.0) is the long-form study; the default here is a
//! scaled-down pass over two degrees and two strengths.
//!
//! ```bash
//! cargo run --release --example accuracy_grid
//! ```

use qpmix::experiments::{accuracy_experiment, accuracy_table_string, AccuracyConfig};

fn main() -> qpmix::Result<()> {
    let cfg = AccuracyConfig {
        d_list: vec![3, 7],
        rho_list: vec![0.2, 0.8],
        sigma_list: vec![1.0, 4.0],
        ..AccuracyConfig::paper_preset(71).scaled(0.4)
    };
    eprintln!(
        "running {} cells x {} runs each (p = {}, n = {}, q = {}) ...",
        cfg.d_list.len() * cfg.rho_list.len(),
        cfg.n_graphs * cfg.n_paramsets * cfg.n_datasets,
        cfg.p,
        cfg.n,
        cfg.q
    );
    let cells = accuracy_experiment(&cfg)?;
    print!("{}", accuracy_table_string(&cfg, &cells));
    println!();
    println!("accuracy rises with parameter strength (rho, sigma) and falls");
    println!("with graph density (d), matching the behavior of limited-order");
    println!("conditioning: sparser graphs have small separators that a");
    println!("size-q conditioning set can actually cover.");
    Ok(())
}

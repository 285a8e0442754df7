//! Experiment harnesses: Type-I error calibration on frozen four-vertex
//! fixtures, and the synthetic precision-recall accuracy grid.
//!
//! Both harnesses derive every replicate seed from the master seed, collect
//! per-replicate results into indexed slots and reduce sequentially, so
//! their outputs depend only on the configuration.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::citest::{ci_test, TestKind};
use crate::error::{Error, Result};
use crate::graph::MarkedGraph;
use crate::infer::{auc, precision_recall, rank_edges};
use crate::io_util::fmt_f64;
use crate::model::{build_model, CGModel};
use crate::nrr::{nrr_matrix, NrrOptions};
use crate::sample::sample_dataset;
use crate::seed::derive_seed;

/// Seeds behind the frozen calibration fixtures. Changing them changes the
/// fixture parameters, so they are part of the reproducibility contract.
pub const FIXTURE_SEED_CONTINUOUS: u64 = 2_0601;
pub const FIXTURE_SEED_MIXED: u64 = 2_0602;

/// Which calibration fixture: a four-vertex model (two binary discrete, two
/// continuous) with one missing continuous edge, or one missing mixed edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    Continuous,
    Mixed,
}

impl FixtureKind {
    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::Continuous => "continuous",
            FixtureKind::Mixed => "mixed",
        }
    }
}

/// A calibration fixture: the model, the tested pair (whose edge is absent,
/// so the null hypothesis holds), and the conditioning set.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub kind: FixtureKind,
    pub model: CGModel,
    pub pair: (usize, usize),
    pub conditioning: Vec<usize>,
}

/// Build a calibration fixture. Vertices 0, 1 are binary discrete; 2, 3 are
/// continuous. The continuous fixture omits the edge (2, 3) and tests it
/// given {0, 1}; the mixed fixture omits (1, 3) and tests it given {0, 2}.
pub fn calibration_fixture(kind: FixtureKind) -> Result<Fixture> {
    let (edges, pair, conditioning, seed): (Vec<(usize, usize)>, _, Vec<usize>, u64) = match kind {
        FixtureKind::Continuous => (
            vec![(0, 2), (0, 3), (1, 2), (1, 3)],
            (2, 3),
            vec![0, 1],
            FIXTURE_SEED_CONTINUOUS,
        ),
        FixtureKind::Mixed => (
            vec![(0, 2), (0, 3), (1, 2), (2, 3)],
            (1, 3),
            vec![0, 2],
            FIXTURE_SEED_MIXED,
        ),
    };
    let graph = MarkedGraph::new(4, 2, edges)?;
    let model = build_model(&graph, 0.5, 2.0, &[2, 2], seed)?;
    Ok(Fixture { kind, model, pair, conditioning })
}

/// Configuration of the Type-I error calibration run.
#[derive(Debug, Clone)]
pub struct Type1Config {
    pub n_list: Vec<usize>,
    pub n_replicates: usize,
    pub alpha: f64,
    pub fixtures: Vec<FixtureKind>,
    pub tests: Vec<TestKind>,
    pub seed: u64,
}

/// Estimated rejection rate for one (fixture, test, n) combination.
#[derive(Debug, Clone, Copy)]
pub struct Type1Row {
    pub fixture: FixtureKind,
    pub test: TestKind,
    pub n: usize,
    pub alpha_hat: f64,
    pub replicates_used: usize,
}

/// Simulate the fixtures under their own null and estimate each test's
/// rejection rate at the nominal level.
pub fn type1_experiment(cfg: &Type1Config) -> Result<Vec<Type1Row>> {
    if cfg.n_replicates == 0 {
        return Err(Error::EmptyTable("zero replicates requested".into()));
    }
    if cfg.n_list.is_empty() || cfg.fixtures.is_empty() || cfg.tests.is_empty() {
        return Err(Error::EmptyTable("empty grid in the configuration".into()));
    }
    let mut rows = Vec::new();
    for (fixture_idx, &kind) in cfg.fixtures.iter().enumerate() {
        let fixture = calibration_fixture(kind)?;
        for &n in &cfg.n_list {
            // per-replicate: Some((reject_exact, reject_asymptotic)), or
            // None when the draw was infeasible (e.g. an unobserved level)
            let outcomes: Vec<Option<(bool, bool)>> = (0..cfg.n_replicates)
                .into_par_iter()
                .map(|rep| {
                    let seed =
                        derive_seed(cfg.seed, &[fixture_idx as u64, n as u64, rep as u64]);
                    let data = sample_dataset(&fixture.model, n, seed)?;
                    match ci_test(
                        &data,
                        fixture.pair.0,
                        fixture.pair.1,
                        &fixture.conditioning,
                        cfg.alpha,
                        TestKind::Exact,
                    ) {
                        Ok(out) => Ok(Some((
                            out.result.p_exact < cfg.alpha,
                            out.result.p_asymptotic < cfg.alpha,
                        ))),
                        Err(e) if e.is_infeasible_test() => Ok(None),
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            let used = outcomes.iter().flatten().count();
            if used == 0 {
                return Err(Error::EmptyTable(format!(
                    "no feasible replicate for fixture {} at n = {n}",
                    kind.name()
                )));
            }
            for &test in &cfg.tests {
                let rejections = outcomes
                    .iter()
                    .flatten()
                    .filter(|&&(e, a)| match test {
                        TestKind::Exact => e,
                        TestKind::Asymptotic => a,
                    })
                    .count();
                rows.push(Type1Row {
                    fixture: kind,
                    test,
                    n,
                    alpha_hat: rejections as f64 / used as f64,
                    replicates_used: used,
                });
            }
        }
    }
    Ok(rows)
}

/// Wide table: one row per (fixture, n), one rate column per test.
pub fn type1_table_string(cfg: &Type1Config, rows: &[Type1Row]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qpmix-type1 v1");
    let ns: Vec<String> = cfg.n_list.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(out, "# n {}", ns.join(","));
    let _ = writeln!(out, "# replicates {}", cfg.n_replicates);
    let _ = writeln!(out, "# alpha {}", fmt_f64(cfg.alpha));
    let _ = writeln!(out, "# seed {}", cfg.seed);
    let mut header = String::from("fixture\tn");
    for &test in &cfg.tests {
        let _ = write!(
            header,
            "\talpha_{}",
            match test {
                TestKind::Exact => "exact",
                TestKind::Asymptotic => "asymptotic",
            }
        );
    }
    let _ = writeln!(out, "{header}\treplicates_used");
    for &fixture in &cfg.fixtures {
        for &n in &cfg.n_list {
            let mut line = format!("{}\t{n}", fixture.name());
            let mut used = 0;
            for &test in &cfg.tests {
                let row = rows
                    .iter()
                    .find(|r| r.fixture == fixture && r.test == test && r.n == n)
                    .expect("row for every grid point");
                let _ = write!(line, "\t{}", fmt_f64(row.alpha_hat));
                used = row.replicates_used;
            }
            let _ = writeln!(out, "{line}\t{used}");
        }
    }
    out
}

/// Configuration of the synthetic accuracy grid.
#[derive(Debug, Clone)]
pub struct AccuracyConfig {
    pub p: usize,
    pub n_discrete: usize,
    pub d_list: Vec<usize>,
    /// Correlation / interaction strength pairs, zipped.
    pub rho_list: Vec<f64>,
    pub sigma_list: Vec<f64>,
    pub n_graphs: usize,
    pub n_paramsets: usize,
    pub n_datasets: usize,
    pub n: usize,
    pub q: usize,
    pub n_subsets: usize,
    pub alpha: f64,
    pub recall_cap: f64,
    pub seed: u64,
}

impl AccuracyConfig {
    /// The full synthetic study: 50 vertices with 2 binary discrete,
    /// degrees {3, 4, 7}, strengths (0.2, 1) .. (0.8, 4), five graphs by
    /// five parameter sets by five datasets of 25 observations, order 3.
    pub fn paper_preset(seed: u64) -> Self {
        Self {
            p: 50,
            n_discrete: 2,
            d_list: vec![3, 4, 7],
            rho_list: vec![0.2, 0.4, 0.6, 0.8],
            sigma_list: vec![1.0, 2.0, 3.0, 4.0],
            n_graphs: 5,
            n_paramsets: 5,
            n_datasets: 5,
            n: 25,
            q: 3,
            n_subsets: 100,
            alpha: 0.05,
            recall_cap: 1.0,
            seed,
        }
    }

    /// Multiply the replicate counts by `scale` (minimum one each).
    pub fn scaled(mut self, scale: f64) -> Self {
        let apply = |v: usize| (((v as f64) * scale).round() as usize).max(1);
        self.n_graphs = apply(self.n_graphs);
        self.n_paramsets = apply(self.n_paramsets);
        self.n_datasets = apply(self.n_datasets);
        self
    }
}

/// Mean area under the precision-recall curve for one grid cell.
#[derive(Debug, Clone, Copy)]
pub struct AccuracyCell {
    pub d: usize,
    pub rho: f64,
    pub sigma: f64,
    pub mean_auc: f64,
    pub n_runs: usize,
    pub n_failed: usize,
}

/// Run the full pipeline per grid cell: sample graph, build model, sample
/// data, estimate the rate matrix, rank, and score against the generating
/// graph. Failed runs are dropped from the cell mean and counted.
pub fn accuracy_experiment(cfg: &AccuracyConfig) -> Result<Vec<AccuracyCell>> {
    if cfg.rho_list.len() != cfg.sigma_list.len() {
        return Err(Error::Config(
            "rho and sigma lists must pair up one to one".into(),
        ));
    }
    if cfg.d_list.is_empty() || cfg.rho_list.is_empty() {
        return Err(Error::EmptyTable("empty parameter grid".into()));
    }
    if cfg.n_graphs * cfg.n_paramsets * cfg.n_datasets == 0 {
        return Err(Error::EmptyTable("zero runs per cell".into()));
    }
    let level_cards = vec![2usize; cfg.n_discrete];
    let mut cells = Vec::new();
    for (d_idx, &d) in cfg.d_list.iter().enumerate() {
        // graphs are shared across strength cells, as in the original design
        let graphs: Vec<MarkedGraph> = (0..cfg.n_graphs)
            .map(|g| {
                MarkedGraph::sample_dregular(
                    cfg.p,
                    d,
                    cfg.n_discrete,
                    derive_seed(cfg.seed, &[0, d_idx as u64, g as u64]),
                )
            })
            .collect::<Result<_>>()?;
        for (s_idx, (&rho, &sigma)) in cfg.rho_list.iter().zip(&cfg.sigma_list).enumerate() {
            let runs: Vec<(usize, usize, usize)> = (0..cfg.n_graphs)
                .flat_map(|g| {
                    (0..cfg.n_paramsets).flat_map(move |ps| {
                        (0..cfg.n_datasets).map(move |ds| (g, ps, ds))
                    })
                })
                .collect();
            let aucs: Vec<Option<f64>> = runs
                .par_iter()
                .map(|&(g, ps, ds)| {
                    let ids = [
                        d_idx as u64,
                        s_idx as u64,
                        g as u64,
                        ps as u64,
                        ds as u64,
                    ];
                    let run = || -> Result<f64> {
                        let graph = &graphs[g];
                        let model = build_model(
                            graph,
                            rho,
                            sigma,
                            &level_cards,
                            derive_seed(cfg.seed, &[1, ids[0], ids[1], ids[2], ids[3]]),
                        )?;
                        let data = sample_dataset(
                            &model,
                            cfg.n,
                            derive_seed(cfg.seed, &[2, ids[0], ids[1], ids[2], ids[3], ids[4]]),
                        )?;
                        let matrix = nrr_matrix(
                            &data,
                            &NrrOptions {
                                q: cfg.q,
                                n_subsets: cfg.n_subsets,
                                alpha: cfg.alpha,
                                restrict_continuous: false,
                                test: TestKind::Exact,
                                seed: derive_seed(
                                    cfg.seed,
                                    &[3, ids[0], ids[1], ids[2], ids[3], ids[4]],
                                ),
                            },
                        )?;
                        let ranked: Vec<(usize, usize)> =
                            rank_edges(&matrix).into_iter().map(|(pair, _)| pair).collect();
                        let curve = precision_recall(&ranked, graph, cfg.recall_cap)?;
                        Ok(auc(&curve))
                    };
                    run().ok()
                })
                .collect();
            let done: Vec<f64> = aucs.iter().flatten().copied().collect();
            let n_failed = aucs.len() - done.len();
            let mean_auc = if done.is_empty() {
                f64::NAN
            } else {
                done.iter().sum::<f64>() / done.len() as f64
            };
            cells.push(AccuracyCell {
                d,
                rho,
                sigma,
                mean_auc,
                n_runs: done.len(),
                n_failed,
            });
        }
    }
    Ok(cells)
}

/// Tab-separated accuracy table with the configuration echoed in the
/// header.
pub fn accuracy_table_string(cfg: &AccuracyConfig, cells: &[AccuracyCell]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# qpmix-accuracy v1");
    let _ = writeln!(out, "# p {} {}", cfg.p, cfg.n_discrete);
    let _ = writeln!(out, "# n {}", cfg.n);
    let _ = writeln!(out, "# q {}", cfg.q);
    let _ = writeln!(out, "# subsets {}", cfg.n_subsets);
    let _ = writeln!(out, "# alpha {}", fmt_f64(cfg.alpha));
    let _ = writeln!(out, "# recall-cap {}", fmt_f64(cfg.recall_cap));
    let ds: Vec<String> = cfg.d_list.iter().map(|d| d.to_string()).collect();
    let rs: Vec<String> = cfg.rho_list.iter().map(|r| fmt_f64(*r)).collect();
    let ss: Vec<String> = cfg.sigma_list.iter().map(|s| fmt_f64(*s)).collect();
    let _ = writeln!(out, "# d {}", ds.join(","));
    let _ = writeln!(out, "# rho {}", rs.join(","));
    let _ = writeln!(out, "# sigma {}", ss.join(","));
    let _ = writeln!(
        out,
        "# runs-per-cell {}x{}x{}",
        cfg.n_graphs, cfg.n_paramsets, cfg.n_datasets
    );
    let _ = writeln!(out, "# seed {}", cfg.seed);
    let _ = writeln!(out, "d\trho\tsigma\tmean_auc\tn_runs\tn_failed");
    for c in cells {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            c.d,
            fmt_f64(c.rho),
            fmt_f64(c.sigma),
            fmt_f64(c.mean_auc),
            c.n_runs,
            c.n_failed
        );
    }
    out
}

//! Heavier statistical invariants that cut across modules.

use rayon::prelude::*;

use qpmix::citest::TestKind;
use qpmix::graph::MarkedGraph;
use qpmix::model::build_model;
use qpmix::nrr::{nrr_matrix, nrr_pair, NrrOptions};
use qpmix::sample::sample_dataset;
use qpmix::seed::derive_seed;
use qpmix::ci_test;

/// Empirical covariance of the continuous residuals converges to the model
/// covariance: max entry deviation at n = 100,000 stays below 0.05.
#[test]
fn sampler_residual_covariance_converges() {
    let g = MarkedGraph::sample_dregular(8, 3, 2, 7).unwrap();
    let model = build_model(&g, 0.6, 3.0, &[2, 2], 8).unwrap();
    let n = 100_000;
    let data = sample_dataset(&model, n, 9).unwrap();
    let k = model.n_continuous();
    let space = model.levels();

    let mut acc = nalgebra::DMatrix::<f64>::zeros(k, k);
    let mut resid = nalgebra::DVector::<f64>::zeros(k);
    for row in 0..n {
        let cell = space.index(&[
            data.discrete_value(row, 0) as usize,
            data.discrete_value(row, 1) as usize,
        ]);
        let mu = model.mu(cell);
        for i in 0..k {
            resid[i] = data.continuous_value(row, 2 + i) - mu[i];
        }
        for i in 0..k {
            for j in 0..k {
                acc[(i, j)] += resid[i] * resid[j];
            }
        }
    }
    acc /= n as f64;
    let dev = (&acc - model.sigma()).abs().max();
    assert!(dev <= 0.05, "covariance deviation {dev}");
}

/// The estimate is a binomial proportion: across seeds, its variance is
/// bounded by 0.25 / n_subsets (slack 3x for estimating the variance from
/// 60 runs).
#[test]
fn nrr_estimates_have_binomial_variance() {
    let g = MarkedGraph::new(8, 0, [(0, 1), (2, 3)]).unwrap();
    let model = build_model(&g, 0.5, 0.0, &[], 13).unwrap();
    let data = sample_dataset(&model, 60, 14).unwrap();
    let estimates: Vec<f64> = (0..60u64)
        .into_par_iter()
        .map(|seed| {
            let opts = NrrOptions { q: 3, n_subsets: 50, seed, ..Default::default() };
            // (4, 5) is non-adjacent: rate sits mid-range under sampling noise
            nrr_pair(&data, 4, 5, &opts).unwrap().0
        })
        .collect();
    let mean = estimates.iter().sum::<f64>() / estimates.len() as f64;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>()
        / (estimates.len() - 1) as f64;
    let bound = 0.25 / 50.0;
    assert!(var <= 3.0 * bound, "variance {var} above 3 x {bound}");
}

/// Rank separation on a strong fixture: true edges average a strictly lower
/// rate than non-adjacent pairs.
#[test]
fn nrr_separates_edges_from_non_edges() {
    let g = MarkedGraph::sample_dregular(10, 3, 2, 15).unwrap();
    let model = build_model(&g, 0.6, 3.0, &[2, 2], 16).unwrap();
    let data = sample_dataset(&model, 100, 17).unwrap();
    let matrix = nrr_matrix(
        &data,
        &NrrOptions { q: 3, n_subsets: 100, seed: 18, ..Default::default() },
    )
    .unwrap();
    let (mut edge_sum, mut edge_n) = (0.0, 0usize);
    let (mut gap_sum, mut gap_n) = (0.0, 0usize);
    for (a, b, value, _) in matrix.defined_entries() {
        if g.has_edge(a, b) {
            edge_sum += value;
            edge_n += 1;
        } else {
            gap_sum += value;
            gap_n += 1;
        }
    }
    let edge_mean = edge_sum / edge_n as f64;
    let gap_mean = gap_sum / gap_n as f64;
    assert!(
        edge_mean < gap_mean,
        "edge mean {edge_mean} not below non-edge mean {gap_mean}"
    );
}

/// Size of the exact test at alpha = 0.05 over 10,000 independent-pair
/// replicates: rejection fraction within 0.05 +- 0.01.
#[test]
fn independent_pair_rejection_calibration() {
    let g = MarkedGraph::new(2, 0, []).unwrap();
    let model = build_model(&g, 0.3, 0.0, &[], 19).unwrap();
    let rejections: usize = (0..10_000u64)
        .into_par_iter()
        .map(|rep| {
            let data = sample_dataset(&model, 30, derive_seed(20, &[rep])).unwrap();
            let out = ci_test(&data, 0, 1, &[], 0.05, TestKind::Exact).unwrap();
            usize::from(out.reject)
        })
        .sum();
    let rate = rejections as f64 / 10_000.0;
    assert!(
        (0.04..=0.06).contains(&rate),
        "rejection rate {rate} outside 0.05 +- 0.01"
    );
}

/// Restricting conditioning sets to continuous vertices changes the
/// candidate pool but keeps the estimate a valid rate.
#[test]
fn restricted_conditioning_draws_only_continuous() {
    let g = MarkedGraph::sample_dregular(10, 3, 2, 21).unwrap();
    let model = build_model(&g, 0.5, 2.0, &[2, 2], 22).unwrap();
    let data = sample_dataset(&model, 40, 23).unwrap();
    // q equal to the full continuous pool: only one subset exists, so the
    // estimate must be reproducible regardless of n_subsets
    let opts = NrrOptions {
        q: 6,
        n_subsets: 11,
        restrict_continuous: true,
        seed: 24,
        ..Default::default()
    };
    let (r1, f1) = nrr_pair(&data, 2, 3, &opts).unwrap();
    let (r2, f2) = nrr_pair(&data, 2, 3, &NrrOptions { n_subsets: 97, ..opts }).unwrap();
    assert_eq!((r1, f1), (r2, f2));
    // pool = 8 continuous minus the 2 endpoints = 6; C(6, 6) = 1 subset
    assert_eq!(f1, 1);
}

/// Determinants stay stable in the log domain even when the marginal
/// subset grows to q + 2 = 30 variables.
#[test]
fn large_marginal_subsets_are_stable() {
    let g = MarkedGraph::new(32, 0, []).unwrap();
    let model = build_model(&g, 0.2, 0.0, &[], 25).unwrap();
    let data = sample_dataset(&model, 80, 26).unwrap();
    let q: Vec<usize> = (2..30).collect();
    let out = ci_test(&data, 0, 1, &q, 0.05, TestKind::Exact).unwrap();
    assert!(out.result.statistic > 0.0 && out.result.statistic <= 1.0);
    assert!((0.0..=1.0).contains(&out.result.p_exact));
    assert!(out.result.beta_a > 0.0);
}

//! Graph inference from a non-rejection-rate matrix and ranked-retrieval
//! evaluation against a generating graph.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::MarkedGraph;
use crate::io_util::{atomic_write, fmt_f64};
use crate::nrr::NrrMatrix;

/// Threshold the matrix into a graph: an edge is present when its rate is
/// defined and strictly below `threshold`. Low rates mean frequent
/// rejections of conditional independence, hence evidence for the edge.
pub fn qp_graph(matrix: &NrrMatrix, threshold: f64) -> Result<MarkedGraph> {
    let edges: Vec<(usize, usize)> = matrix
        .defined_entries()
        .filter(|&(_, _, nrr, _)| nrr < threshold)
        .map(|(a, b, _, _)| (a, b))
        .collect();
    MarkedGraph::new(matrix.p(), matrix.n_discrete(), edges)
}

/// Defined pairs sorted by ascending rate; ties break lexicographically on
/// (min index, max index).
pub fn rank_edges(matrix: &NrrMatrix) -> Vec<((usize, usize), f64)> {
    let mut ranked: Vec<((usize, usize), f64)> = matrix
        .defined_entries()
        .map(|(a, b, nrr, _)| ((a, b), nrr))
        .collect();
    ranked.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    ranked
}

/// A precision-recall curve over a ranked pair list, truncated at a recall
/// cap.
#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    points: Vec<(f64, f64)>,
    recall_cap: f64,
}

impl PrCurve {
    /// (recall, precision) points in ranking order; recall is
    /// nondecreasing.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn recall_cap(&self) -> f64 {
        self.recall_cap
    }

    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qpmix-prcurve v1");
        let _ = writeln!(out, "# recall-cap {}", fmt_f64(self.recall_cap));
        let _ = writeln!(out, "recall\tprecision");
        for &(r, p) in &self.points {
            let _ = writeln!(out, "{}\t{}", fmt_f64(r), fmt_f64(p));
        }
        out
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_tsv_string().as_bytes())
    }
}

/// Standard ranked-retrieval precision-recall against the edges of `truth`,
/// with discrete-discrete pairs excluded from both sides. Points past
/// `recall_cap` are dropped.
pub fn precision_recall(
    ranked: &[(usize, usize)],
    truth: &MarkedGraph,
    recall_cap: f64,
) -> Result<PrCurve> {
    if !(0.0..=1.0).contains(&recall_cap) || recall_cap == 0.0 {
        return Err(Error::Config(format!("recall cap {recall_cap} outside (0, 1]")));
    }
    let admissible = |a: usize, b: usize| !(truth.is_discrete(a) && truth.is_discrete(b));
    let n_true = truth.edges().filter(|&(a, b)| admissible(a, b)).count();
    if n_true == 0 {
        return Err(Error::EmptyTruth);
    }
    let mut points = Vec::new();
    let mut hits = 0usize;
    let mut seen = 0usize;
    for &(a, b) in ranked {
        if !admissible(a, b) {
            continue;
        }
        seen += 1;
        if truth.has_edge(a, b) {
            hits += 1;
        }
        let recall = hits as f64 / n_true as f64;
        let precision = hits as f64 / seen as f64;
        if recall > recall_cap + 1e-12 {
            break;
        }
        points.push((recall, precision));
    }
    Ok(PrCurve { points, recall_cap })
}

/// Area under the precision-recall curve by the trapezoid rule over recall,
/// normalized by the recall cap. The segment from recall zero to the first
/// point uses that point's precision (rectangle rule), so a single-point
/// curve integrates to `recall * precision / cap`. An empty curve has zero
/// area.
pub fn auc(curve: &PrCurve) -> f64 {
    let pts = &curve.points;
    if pts.is_empty() {
        return 0.0;
    }
    let mut area = pts[0].0 * pts[0].1; // rectangle from recall 0
    for w in pts.windows(2) {
        let (r0, p0) = w[0];
        let (r1, p1) = w[1];
        area += (r1 - r0) * 0.5 * (p0 + p1);
    }
    area / curve.recall_cap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::citest::TestKind;
    use crate::model::build_model;
    use crate::nrr::{nrr_matrix, NrrOptions};
    use crate::sample::sample_dataset;

    fn demo_matrix() -> NrrMatrix {
        let g = MarkedGraph::new(4, 1, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = build_model(&g, 0.6, 2.5, &[2], 3).unwrap();
        let d = sample_dataset(&m, 60, 5).unwrap();
        nrr_matrix(
            &d,
            &NrrOptions { q: 1, n_subsets: 10, seed: 9, test: TestKind::Exact, ..Default::default() },
        )
        .unwrap()
    }

    #[test]
    fn threshold_zero_gives_empty_graph() {
        let m = demo_matrix();
        let g = qp_graph(&m, 0.0).unwrap();
        assert_eq!(g.n_edges(), 0);
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.n_discrete(), 1);
    }

    #[test]
    fn threshold_one_keeps_rates_below_one() {
        let m = demo_matrix();
        let g = qp_graph(&m, 1.0).unwrap();
        let below_one = m.defined_entries().filter(|&(_, _, v, _)| v < 1.0).count();
        assert_eq!(g.n_edges(), below_one);
    }

    #[test]
    fn thresholds_are_monotone() {
        let m = demo_matrix();
        let mut last: Option<MarkedGraph> = None;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let g = qp_graph(&m, t).unwrap();
            if let Some(prev) = &last {
                // every edge at the lower cutoff survives at the higher one
                assert!(prev.edges().all(|(a, b)| g.has_edge(a, b)));
            }
            last = Some(g);
        }
    }

    #[test]
    fn ranking_sorts_by_rate_with_lexicographic_ties() {
        let text = "# qpmix-nrr v1\n# p 5 0\n# q 1\n# subsets 10\n# alpha 0.05\n\
                    # restrict-continuous false\n# test exact\n# seed 0\n\
                    0\t1\t0.2\t10\n0\t2\t0.9\t10\n1\t3\t0.5\t10\n0\t4\t0.5\t10\n";
        let m = NrrMatrix::parse_tsv(text, "mem").unwrap();
        let ranked = rank_edges(&m);
        let pairs: Vec<(usize, usize)> = ranked.iter().map(|&(p, _)| p).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 4), (1, 3), (0, 2)]);
    }

    #[test]
    fn perfect_ranking_has_unit_precision_everywhere() {
        let truth = MarkedGraph::new(5, 0, [(0, 1), (2, 3)]).unwrap();
        let ranked = [(0, 1), (2, 3), (0, 2), (1, 4)];
        let curve = precision_recall(&ranked, &truth, 1.0).unwrap();
        assert!(curve.points().iter().take(2).all(|&(_, p)| p == 1.0));
        assert_eq!(auc(&curve), 1.0);
    }

    #[test]
    fn inverted_ranking_ends_at_density() {
        let truth = MarkedGraph::new(5, 0, [(0, 1), (2, 3)]).unwrap();
        // all 10 pairs, true edges last
        let mut ranked: Vec<(usize, usize)> = (0..5)
            .flat_map(|a| ((a + 1)..5).map(move |b| (a, b)))
            .filter(|&(a, b)| !truth.has_edge(a, b))
            .collect();
        ranked.push((0, 1));
        ranked.push((2, 3));
        let curve = precision_recall(&ranked, &truth, 1.0).unwrap();
        let &(last_recall, last_precision) = curve.points().last().unwrap();
        assert_eq!(last_recall, 1.0);
        assert!((last_precision - 2.0 / 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_truth_is_an_error() {
        let truth = MarkedGraph::new(4, 0, []).unwrap();
        assert!(matches!(
            precision_recall(&[(0, 1)], &truth, 1.0),
            Err(Error::EmptyTruth)
        ));
    }

    #[test]
    fn single_point_curve_uses_rectangle_rule() {
        let curve = PrCurve { points: vec![(0.5, 0.8)], recall_cap: 1.0 };
        assert!((auc(&curve) - 0.5 * 0.8).abs() < 1e-15);
    }

    #[test]
    fn auc_matches_step_function_integrator() {
        // independent oracle: integrate the piecewise-linear interpolant on
        // a fine grid of recall values
        let truth = MarkedGraph::new(6, 0, [(0, 1), (2, 3), (4, 5), (1, 2)]).unwrap();
        let ranked = [(0, 1), (0, 2), (2, 3), (3, 4), (4, 5), (1, 2), (0, 3)];
        let curve = precision_recall(&ranked, &truth, 1.0).unwrap();
        let got = auc(&curve);

        let pts = curve.points();
        let eval = |r: f64| -> f64 {
            if r <= pts[0].0 {
                return pts[0].1;
            }
            for w in pts.windows(2) {
                let (r0, p0) = w[0];
                let (r1, p1) = w[1];
                if r <= r1 {
                    if r1 == r0 {
                        return p1;
                    }
                    return p0 + (p1 - p0) * (r - r0) / (r1 - r0);
                }
            }
            pts.last().unwrap().1
        };
        let r_max = pts.last().unwrap().0;
        let steps = 2_000_000;
        let mut sum = 0.0;
        for i in 0..steps {
            let r = r_max * (i as f64 + 0.5) / steps as f64;
            sum += eval(r);
        }
        let want = sum * r_max / steps as f64;
        assert!((got - want).abs() < 1e-6, "auc {got} vs integrator {want}");
    }

    #[test]
    fn random_ranking_concentrates_at_density() {
        use rand::seq::SliceRandom;
        let truth = MarkedGraph::sample_dregular(50, 3, 0, 21).unwrap();
        let all_pairs: Vec<(usize, usize)> =
            (0..50).flat_map(|a| ((a + 1)..50).map(move |b| (a, b))).collect();
        let density = truth.n_edges() as f64 / all_pairs.len() as f64;
        let mut rng = crate::seed::rng_from_seed(77);
        let mut aucs = Vec::new();
        for _ in 0..100 {
            let mut ranked = all_pairs.clone();
            ranked.shuffle(&mut rng);
            let curve = precision_recall(&ranked, &truth, 1.0).unwrap();
            aucs.push(auc(&curve));
        }
        let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
        let sd = (aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>()
            / (aucs.len() - 1) as f64)
            .sqrt();
        let se = sd / (aucs.len() as f64).sqrt();
        assert!(
            (mean - density).abs() < 3.0 * se + 0.01,
            "mean auc {mean} vs density {density} (se {se})"
        );
    }

    #[test]
    fn recall_cap_truncates_curve() {
        let truth = MarkedGraph::new(5, 0, [(0, 1), (2, 3)]).unwrap();
        let ranked = [(0, 1), (0, 2), (2, 3)];
        let curve = precision_recall(&ranked, &truth, 0.5).unwrap();
        assert!(curve.points().iter().all(|&(r, _)| r <= 0.5 + 1e-12));
        assert_eq!(curve.points().len(), 2);
    }
}

//! Non-rejection-rate estimation over sampled conditioning subsets.
//!
//! For a pair (a, b) and order q, the non-rejection rate is the probability
//! that a conditional-independence test of the pair given a uniformly drawn
//! size-q conditioning set fails to reject. Subsets whose test is infeasible
//! (singular statistics, too few observations per cell) are excluded from
//! the denominator; the feasible count is reported alongside the estimate.
//!
//! When the number of candidate subsets is at most the requested draw count
//! the estimator switches to exhaustive enumeration, which makes it the
//! exact expectation.
//!
//! Whole-matrix estimation parallelizes over pairs. Every pair derives its
//! own RNG seed from (seed, min(a,b), max(a,b)), and results land in
//! per-pair slots, so the output is identical for any thread count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::citest::{ci_test, TestKind};
use crate::data::MixedDataset;
use crate::error::{Error, Result};
use crate::io_util::{atomic_write, fmt_f64};
use crate::seed::{derive_seed, rng_from_seed};
use rand::Rng;

/// Options for non-rejection-rate estimation.
#[derive(Debug, Clone, Copy)]
pub struct NrrOptions {
    /// Conditioning-set size.
    pub q: usize,
    /// Monte Carlo draws per pair (exhaustive below this count).
    pub n_subsets: usize,
    /// Per-test significance level.
    pub alpha: f64,
    /// Restrict candidate conditioning vertices to continuous ones.
    pub restrict_continuous: bool,
    /// Which null drives the reject decision.
    pub test: TestKind,
    /// RNG seed (per pair when used through [`nrr_matrix`]).
    pub seed: u64,
}

impl Default for NrrOptions {
    fn default() -> Self {
        Self {
            q: 3,
            n_subsets: 100,
            alpha: 0.05,
            restrict_continuous: false,
            test: TestKind::Exact,
            seed: 0,
        }
    }
}

/// Estimate the non-rejection rate of one pair. Returns the rate and the
/// number of feasible subset draws behind it.
pub fn nrr_pair(data: &MixedDataset, a: usize, b: usize, opts: &NrrOptions) -> Result<(f64, usize)> {
    if a == b || a >= data.p() || b >= data.p() {
        return Err(Error::Config(format!("invalid pair ({a}, {b})")));
    }
    if data.is_discrete(a) && data.is_discrete(b) {
        return Err(Error::DiscretePair);
    }
    if opts.q + 2 >= data.n() {
        return Err(Error::Config(format!(
            "q = {} needs q + 2 < n = {}",
            opts.q,
            data.n()
        )));
    }
    let pool: Vec<usize> = (0..data.p())
        .filter(|&v| v != a && v != b)
        .filter(|&v| !opts.restrict_continuous || !data.is_discrete(v))
        .collect();
    if pool.len() < opts.q {
        return Err(Error::NoFeasibleSubset { a, b });
    }

    let mut non_reject = 0usize;
    let mut feasible = 0usize;
    let mut run = |q_set: &[usize]| -> Result<()> {
        match ci_test(data, a, b, q_set, opts.alpha, opts.test) {
            Ok(out) => {
                feasible += 1;
                if !out.reject {
                    non_reject += 1;
                }
                Ok(())
            }
            Err(e) if e.is_infeasible_test() => Ok(()),
            Err(e) => Err(e),
        }
    };

    if subset_count_at_most(pool.len(), opts.q, opts.n_subsets) {
        let mut q_set = Vec::with_capacity(opts.q);
        enumerate_combinations(pool.len(), opts.q, &mut |idx| {
            q_set.clear();
            q_set.extend(idx.iter().map(|&i| pool[i]));
            run(&q_set)
        })?;
    } else {
        let mut rng = rng_from_seed(opts.seed);
        let mut scratch = pool.clone();
        for _ in 0..opts.n_subsets {
            // partial Fisher-Yates: uniform q-subset of the pool
            for i in 0..opts.q {
                let j = rng.random_range(i..scratch.len());
                scratch.swap(i, j);
            }
            let mut q_set: Vec<usize> = scratch[..opts.q].to_vec();
            q_set.sort_unstable();
            run(&q_set)?;
        }
    }
    if feasible == 0 {
        return Err(Error::NoFeasibleSubset { a, b });
    }
    Ok((non_reject as f64 / feasible as f64, feasible))
}

/// True when C(m, q) <= cap, without overflowing.
fn subset_count_at_most(m: usize, q: usize, cap: usize) -> bool {
    let q = q.min(m - q.min(m));
    let mut count: u128 = 1;
    for i in 0..q {
        count = count.saturating_mul((m - i) as u128) / (i + 1) as u128;
        if count > cap as u128 {
            return false;
        }
    }
    count <= cap as u128
}

// Lexicographic enumeration of q-combinations of 0..m.
fn enumerate_combinations(
    m: usize,
    q: usize,
    f: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let mut idx: Vec<usize> = (0..q).collect();
    loop {
        f(&idx)?;
        // advance
        let mut i = q;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] != i + m - q {
                break;
            }
        }
        if idx[i] == i + m - q {
            return Ok(());
        }
        idx[i] += 1;
        for j in (i + 1)..q {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Metadata carried by an [`NrrMatrix`] and echoed into its file header.
#[derive(Debug, Clone, PartialEq)]
pub struct NrrMeta {
    pub q: Vec<usize>,
    pub n_subsets: usize,
    pub alpha: f64,
    pub restrict_continuous: bool,
    pub test: TestKind,
    pub seed: u64,
}

/// Symmetric p x p matrix of non-rejection rates with an undefined mask.
/// The diagonal, discrete-discrete pairs and pairs with no feasible subset
/// are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct NrrMatrix {
    p: usize,
    n_discrete: usize,
    entries: Vec<Option<(f64, usize)>>,
    meta: NrrMeta,
}

impl NrrMatrix {
    fn slot(&self, a: usize, b: usize) -> Option<usize> {
        if a == b || a >= self.p || b >= self.p {
            return None;
        }
        let (a, b) = (a.min(b), a.max(b));
        Some(a * self.p - a * (a + 1) / 2 + (b - a - 1))
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_discrete(&self) -> usize {
        self.n_discrete
    }

    pub fn meta(&self) -> &NrrMeta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut NrrMeta {
        &mut self.meta
    }

    /// The estimate and feasible count for a pair, if defined.
    pub fn value(&self, a: usize, b: usize) -> Option<(f64, usize)> {
        self.slot(a, b).and_then(|s| self.entries[s])
    }

    pub fn defined_count(&self) -> usize {
        self.entries.iter().filter(|e| e.is_some()).count()
    }

    /// Defined entries in lexicographic pair order.
    pub fn defined_entries(&self) -> impl Iterator<Item = (usize, usize, f64, usize)> + '_ {
        (0..self.p).flat_map(move |a| ((a + 1)..self.p).map(move |b| (a, b))).filter_map(
            move |(a, b)| {
                self.value(a, b).map(|(nrr, feasible)| (a, b, nrr, feasible))
            },
        )
    }

    /// Long-form tab-separated serialization with a metadata header.
    pub fn to_tsv_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qpmix-nrr v1");
        let _ = writeln!(out, "# p {} {}", self.p, self.n_discrete);
        let qs: Vec<String> = self.meta.q.iter().map(|q| q.to_string()).collect();
        let _ = writeln!(out, "# q {}", qs.join(" "));
        let _ = writeln!(out, "# subsets {}", self.meta.n_subsets);
        let _ = writeln!(out, "# alpha {}", fmt_f64(self.meta.alpha));
        let _ = writeln!(out, "# restrict-continuous {}", self.meta.restrict_continuous);
        let _ = writeln!(
            out,
            "# test {}",
            match self.meta.test {
                TestKind::Exact => "exact",
                TestKind::Asymptotic => "asymptotic",
            }
        );
        let _ = writeln!(out, "# seed {}", self.meta.seed);
        for (a, b, nrr, feasible) in self.defined_entries() {
            let _ = writeln!(out, "{a}\t{b}\t{}\t{feasible}", fmt_f64(nrr));
        }
        out
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_tsv_string().as_bytes())
    }

    pub fn parse_tsv(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let mut p = None;
        let mut n_discrete = 0usize;
        let mut meta = NrrMeta {
            q: Vec::new(),
            n_subsets: 0,
            alpha: f64::NAN,
            restrict_continuous: false,
            test: TestKind::Exact,
            seed: 0,
        };
        let mut rows = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                match it.next() {
                    Some("qpmix-nrr") => {}
                    Some("p") => {
                        p = Some(
                            it.next()
                                .and_then(|t| t.parse::<usize>().ok())
                                .ok_or_else(|| err(idx + 1, "bad p header".into()))?,
                        );
                        n_discrete = it
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(idx + 1, "bad p header".into()))?;
                    }
                    Some("q") => {
                        for tok in it {
                            meta.q.push(
                                tok.parse()
                                    .map_err(|_| err(idx + 1, "bad q header".into()))?,
                            );
                        }
                    }
                    Some("subsets") => {
                        meta.n_subsets = it
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(idx + 1, "bad subsets header".into()))?;
                    }
                    Some("alpha") => {
                        meta.alpha = it
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(idx + 1, "bad alpha header".into()))?;
                    }
                    Some("restrict-continuous") => {
                        meta.restrict_continuous = it
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(idx + 1, "bad restrict header".into()))?;
                    }
                    Some("test") => {
                        meta.test = match it.next() {
                            Some("exact") => TestKind::Exact,
                            Some("asymptotic") => TestKind::Asymptotic,
                            _ => return Err(err(idx + 1, "bad test header".into())),
                        };
                    }
                    Some("seed") => {
                        meta.seed = it
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| err(idx + 1, "bad seed header".into()))?;
                    }
                    _ => return Err(err(idx + 1, "unknown header line".into())),
                }
                continue;
            }
            let mut it = line.split('\t');
            let a: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(idx + 1, "bad pair row".into()))?;
            let b: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(idx + 1, "bad pair row".into()))?;
            let nrr: f64 = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(idx + 1, "bad rate".into()))?;
            let feasible: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| err(idx + 1, "bad feasible count".into()))?;
            rows.push((idx + 1, a, b, nrr, feasible));
        }
        let p = p.ok_or_else(|| err(1, "missing `# p` header".into()))?;
        let mut matrix = NrrMatrix {
            p,
            n_discrete,
            entries: vec![None; p * p.saturating_sub(1) / 2],
            meta,
        };
        for (line, a, b, nrr, feasible) in rows {
            let slot = matrix
                .slot(a, b)
                .ok_or_else(|| err(line, format!("pair ({a}, {b}) out of range")))?;
            matrix.entries[slot] = Some((nrr, feasible));
        }
        Ok(matrix)
    }

    pub fn load_tsv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_tsv(&text, &path.display().to_string())
    }
}

/// Estimate the whole matrix: every pair that is not discrete-discrete, in
/// parallel, with per-pair derived seeds. Pairs without a single feasible
/// subset stay undefined.
pub fn nrr_matrix(data: &MixedDataset, opts: &NrrOptions) -> Result<NrrMatrix> {
    if opts.q + 2 >= data.n() {
        return Err(Error::Config(format!(
            "q = {} needs q + 2 < n = {}",
            opts.q,
            data.n()
        )));
    }
    let p = data.p();
    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|a| ((a + 1)..p).map(move |b| (a, b)))
        .filter(|&(a, b)| !(data.is_discrete(a) && data.is_discrete(b)))
        .collect();
    type PairResult = (usize, usize, Option<(f64, usize)>);
    let results: Vec<PairResult> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let pair_opts = NrrOptions {
                seed: derive_seed(opts.seed, &[a as u64, b as u64]),
                ..*opts
            };
            match nrr_pair(data, a, b, &pair_opts) {
                Ok(v) => Ok((a, b, Some(v))),
                Err(Error::NoFeasibleSubset { .. }) => Ok((a, b, None)),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut matrix = NrrMatrix {
        p,
        n_discrete: data.n_discrete(),
        entries: vec![None; p * (p - 1) / 2],
        meta: NrrMeta {
            q: vec![opts.q],
            n_subsets: opts.n_subsets,
            alpha: opts.alpha,
            restrict_continuous: opts.restrict_continuous,
            test: opts.test,
            seed: opts.seed,
        },
    };
    for (a, b, value) in results {
        let slot = matrix.slot(a, b).expect("pair in range");
        matrix.entries[slot] = value;
    }
    Ok(matrix)
}

/// Entrywise mean of several matrices: an entry is defined when defined in
/// at least one input; its feasible count is the sum over inputs. Used for
/// averaging over several conditioning orders q.
pub fn average_nrr(matrices: &[NrrMatrix]) -> Result<NrrMatrix> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::Config("nothing to average".into()))?;
    if matrices
        .iter()
        .any(|m| m.p != first.p || m.n_discrete != first.n_discrete)
    {
        return Err(Error::DimensionMismatch(
            "matrices to average have different shapes".into(),
        ));
    }
    let mut out = NrrMatrix {
        p: first.p,
        n_discrete: first.n_discrete,
        entries: vec![None; first.entries.len()],
        meta: NrrMeta {
            q: matrices.iter().flat_map(|m| m.meta.q.iter().copied()).collect(),
            ..first.meta.clone()
        },
    };
    for slot in 0..out.entries.len() {
        let mut sum = 0.0;
        let mut feasible = 0usize;
        let mut count = 0usize;
        for m in matrices {
            if let Some((nrr, f)) = m.entries[slot] {
                sum += nrr;
                feasible += f;
                count += 1;
            }
        }
        if count > 0 {
            out.entries[slot] = Some((sum / count as f64, feasible));
        }
    }
    Ok(out)
}

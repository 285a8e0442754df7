//! Homogeneous conditional-Gaussian models and their random synthesis.
//!
//! A model couples a marked graph with moment characteristics: a probability
//! `p(i)` per joint discrete level, a conditional mean `mu(i)` per level, and
//! one shared covariance `sigma`. The canonical form `(g(i), h(i), K)` with
//! `K = sigma^-1`, `h(i) = K mu(i)` is available through
//! [`CGModel::to_canonical`] / [`CGModel::from_canonical`].
//!
//! Random models follow the synthetic-data recipe used by the experiment
//! harnesses: a random correlation target with prescribed mean, covariance
//! completion so the inverse vanishes on missing continuous edges, and mixed
//! interactions `h` that only involve a continuous variable's discrete
//! neighbors, with `mu(i) = sigma h(i)`.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::MarkedGraph;
use crate::io_util::{atomic_write, fmt_f64};
use crate::levels::LevelSpace;
use crate::linalg::{cholesky, principal_submatrix, spd_inverse, spd_logdet};
use crate::seed::{derive_seed, rng_from_seed};

/// Default tolerance for the covariance completion.
pub const COMPLETION_TOL: f64 = 1e-8;
/// Default sweep cap for the covariance completion.
pub const COMPLETION_MAX_ITER: usize = 5_000;

/// A homogeneous conditional-Gaussian model over a marked graph.
#[derive(Debug, Clone)]
pub struct CGModel {
    graph: MarkedGraph,
    levels: LevelSpace,
    p_table: Vec<f64>,
    mu_table: Vec<DVector<f64>>,
    sigma: DMatrix<f64>,
}

/// Canonical parameters `(g(i), h(i), K)` of a homogeneous model.
#[derive(Debug, Clone)]
pub struct CanonicalParams {
    pub g_table: Vec<f64>,
    pub h_table: Vec<DVector<f64>>,
    pub k: DMatrix<f64>,
}

impl CGModel {
    pub fn new(
        graph: MarkedGraph,
        level_cards: Vec<usize>,
        p_table: Vec<f64>,
        mu_table: Vec<DVector<f64>>,
        sigma: DMatrix<f64>,
    ) -> Result<Self> {
        let n_cont = graph.n_continuous();
        if level_cards.len() != graph.n_discrete() {
            return Err(Error::Model(format!(
                "{} level cardinalities for {} discrete vertices",
                level_cards.len(),
                graph.n_discrete()
            )));
        }
        if level_cards.contains(&0) {
            return Err(Error::Model("level cardinality of zero".into()));
        }
        let levels = LevelSpace::new(level_cards);
        let n_cells = levels.len();
        if p_table.len() != n_cells || mu_table.len() != n_cells {
            return Err(Error::Model(format!(
                "tables sized {} / {} for {} joint levels",
                p_table.len(),
                mu_table.len(),
                n_cells
            )));
        }
        if p_table.iter().any(|&p| p.is_nan() || p < 0.0) {
            return Err(Error::Model("negative or NaN level probability".into()));
        }
        let total: f64 = p_table.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Model(format!("level probabilities sum to {total}")));
        }
        if mu_table.iter().any(|m| m.len() != n_cont) {
            return Err(Error::Model("mean vector length != |continuous|".into()));
        }
        if sigma.nrows() != n_cont || sigma.ncols() != n_cont {
            return Err(Error::Model("covariance shape != |continuous|".into()));
        }
        for i in 0..n_cont {
            for j in (i + 1)..n_cont {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-9 * sigma[(i, i)].abs().max(1.0) {
                    return Err(Error::Model("covariance not symmetric".into()));
                }
            }
        }
        cholesky(&sigma, "sigma")?;
        Ok(Self { graph, levels, p_table, mu_table, sigma })
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn levels(&self) -> &LevelSpace {
        &self.levels
    }

    pub fn n_cells(&self) -> usize {
        self.levels.len()
    }

    pub fn n_continuous(&self) -> usize {
        self.graph.n_continuous()
    }

    pub fn n_discrete(&self) -> usize {
        self.graph.n_discrete()
    }

    pub fn p_table(&self) -> &[f64] {
        &self.p_table
    }

    pub fn mu(&self, cell: usize) -> &DVector<f64> {
        &self.mu_table[cell]
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// K = sigma^-1, h(i) = K mu(i),
    /// g(i) = ln p(i) - ln|sigma|/2 - mu(i)' K mu(i)/2 - |Gamma| ln(2 pi)/2.
    pub fn to_canonical(&self) -> Result<CanonicalParams> {
        let k = spd_inverse(&self.sigma, "sigma")?;
        let logdet = spd_logdet(&self.sigma, "sigma")?;
        let half_gamma_ln2pi = self.n_continuous() as f64 / 2.0 * (2.0 * std::f64::consts::PI).ln();
        let mut g_table = Vec::with_capacity(self.n_cells());
        let mut h_table = Vec::with_capacity(self.n_cells());
        for (p, mu) in self.p_table.iter().zip(&self.mu_table) {
            let h = &k * mu;
            let quad = mu.dot(&h);
            g_table.push(p.ln() - 0.5 * logdet - 0.5 * quad - half_gamma_ln2pi);
            h_table.push(h);
        }
        Ok(CanonicalParams { g_table, h_table, k })
    }

    /// Inverse of [`to_canonical`](Self::to_canonical): recovers the moment
    /// characteristics, renormalizing the level probabilities.
    pub fn from_canonical(
        graph: MarkedGraph,
        level_cards: Vec<usize>,
        canonical: &CanonicalParams,
    ) -> Result<Self> {
        let sigma = spd_inverse(&canonical.k, "K")?;
        let logdet_sigma = -spd_logdet(&canonical.k, "K")?;
        let half_gamma_ln2pi = graph.n_continuous() as f64 / 2.0 * (2.0 * std::f64::consts::PI).ln();
        let mut mu_table = Vec::with_capacity(canonical.h_table.len());
        let mut log_p = Vec::with_capacity(canonical.g_table.len());
        for (g, h) in canonical.g_table.iter().zip(&canonical.h_table) {
            let mu = &sigma * h;
            log_p.push(g + 0.5 * logdet_sigma + 0.5 * h.dot(&mu) + half_gamma_ln2pi);
            mu_table.push(mu);
        }
        // renormalize in the log domain
        let maxlog = log_p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = log_p.iter().map(|l| (l - maxlog).exp()).sum();
        let p_table: Vec<f64> = log_p.iter().map(|l| (l - maxlog).exp() / norm).collect();
        Self::new(graph, level_cards, p_table, mu_table, sigma)
    }

    /// Largest absolute entry of `sigma^-1` over non-adjacent continuous
    /// pairs; zero-pattern fidelity of a completed covariance.
    pub fn zero_pattern_violation(&self) -> Result<f64> {
        let k = spd_inverse(&self.sigma, "sigma")?;
        let nd = self.n_discrete();
        let mut worst = 0.0_f64;
        for gi in 0..self.n_continuous() {
            for gj in (gi + 1)..self.n_continuous() {
                if !self.graph.has_edge(nd + gi, nd + gj) {
                    worst = worst.max(k[(gi, gj)].abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Symmetric unit-diagonal matrix whose off-diagonal entries have mean `rho`.
///
/// Entries are `rho` plus uniform jitter on `[-0.1 rho, 0.1 rho]`. If the
/// jittered matrix is not positive definite, the jitter (not the base) is
/// shrunk toward zero until it is; the base equicorrelation matrix is
/// strictly positive definite for every admissible `rho`, so the mean stays
/// at `rho` regardless of the shrinkage.
pub fn random_target_correlations(n_cont: usize, rho: f64, seed: u64) -> Result<DMatrix<f64>> {
    if n_cont <= 1 {
        return Ok(DMatrix::identity(n_cont, n_cont));
    }
    let lo = -1.0 / (n_cont as f64 - 1.0);
    if !(rho > lo && rho < 1.0) {
        return Err(Error::RhoRange { rho, lo });
    }
    let mut rng = rng_from_seed(seed);
    let mut jitter = DMatrix::zeros(n_cont, n_cont);
    let amp = 0.1 * rho.abs();
    for i in 0..n_cont {
        for j in (i + 1)..n_cont {
            let u: f64 = rng.random_range(-1.0..1.0);
            jitter[(i, j)] = amp * u;
            jitter[(j, i)] = jitter[(i, j)];
        }
    }
    let base = DMatrix::from_fn(n_cont, n_cont, |i, j| if i == j { 1.0 } else { rho });
    let mut scale = 1.0;
    loop {
        let m = &base + &jitter * scale;
        if cholesky(&m, "target").is_ok() {
            return Ok(m);
        }
        scale *= 0.5;
        if scale < 1e-6 {
            return Ok(base);
        }
    }
}

/// Complete a covariance over the continuous subgraph of `g`: the result
/// matches `target` on the diagonal and on every continuous-continuous edge,
/// while its inverse vanishes (up to `tol`) on every missing continuous edge.
///
/// Classical iterative proportional scaling over the edge set: the precision
/// matrix is kept exactly zero off the graph and each edge/vertex block is
/// repeatedly rescaled to match the target marginals.
pub fn complete_covariance(
    g: &MarkedGraph,
    target: &DMatrix<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<DMatrix<f64>> {
    let m = g.n_continuous();
    let nd = g.n_discrete();
    if target.nrows() != m || target.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "target is {}x{}, graph has {m} continuous vertices",
            target.nrows(),
            target.ncols()
        )));
    }
    if m == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    for i in 0..m {
        for j in (i + 1)..m {
            if (target[(i, j)] - target[(j, i)]).abs() > 1e-12 {
                return Err(Error::Model("completion target not symmetric".into()));
            }
        }
    }
    cholesky(target, "target")?;

    // continuous-continuous edges in local (0-based continuous) indices
    let cont_edges: Vec<(usize, usize)> = g
        .edges()
        .filter(|&(u, v)| u >= nd && v >= nd)
        .map(|(u, v)| (u - nd, v - nd))
        .collect();
    if cont_edges.len() == m * (m - 1) / 2 {
        return Ok(target.clone()); // saturated: no zero constraints
    }

    let mut k = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 / target[(i, i)] } else { 0.0 });
    let mut sigma = DMatrix::from_fn(m, m, |i, j| if i == j { target[(i, i)] } else { 0.0 });
    let mut last_violation = f64::INFINITY;
    for sweep in 0..max_iter {
        // vertex blocks pin the diagonal, edge blocks pin the edge entries
        for v in 0..m {
            let delta = 1.0 / target[(v, v)] - 1.0 / sigma[(v, v)];
            if delta.abs() < 1e-300 {
                continue;
            }
            k[(v, v)] += delta;
            woodbury_update(&mut sigma, &[v], &DMatrix::from_element(1, 1, delta), &k)?;
        }
        for &(a, b) in &cont_edges {
            let s = DMatrix::from_fn(2, 2, |i, j| {
                sigma[([a, b][i], [a, b][j])]
            });
            let t = DMatrix::from_fn(2, 2, |i, j| {
                target[([a, b][i], [a, b][j])]
            });
            let delta = inv2(&t)? - inv2(&s)?;
            k[(a, a)] += delta[(0, 0)];
            k[(a, b)] += delta[(0, 1)];
            k[(b, a)] += delta[(1, 0)];
            k[(b, b)] += delta[(1, 1)];
            woodbury_update(&mut sigma, &[a, b], &delta, &k)?;
        }
        // refresh against accumulated roundoff and measure the violation
        sigma = spd_inverse(&k, "completion precision")?;
        let mut violation = 0.0_f64;
        for v in 0..m {
            violation = violation.max((sigma[(v, v)] - target[(v, v)]).abs());
        }
        for &(a, b) in &cont_edges {
            violation = violation.max((sigma[(a, b)] - target[(a, b)]).abs());
        }
        if violation <= tol {
            return Ok(sigma);
        }
        last_violation = violation;
        let _ = sweep;
    }
    Err(Error::NonConvergence { sweeps: max_iter, max_violation: last_violation })
}

fn inv2(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    match m.nrows() {
        1 => {
            if m[(0, 0)] == 0.0 {
                return Err(Error::SingularMatrix { name: "completion block".into() });
            }
            Ok(DMatrix::from_element(1, 1, 1.0 / m[(0, 0)]))
        }
        2 => {
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            if det.abs() < 1e-300 {
                return Err(Error::SingularMatrix { name: "completion block".into() });
            }
            Ok(DMatrix::from_row_slice(
                2,
                2,
                &[m[(1, 1)] / det, -m[(0, 1)] / det, -m[(1, 0)] / det, m[(0, 0)] / det],
            ))
        }
        _ => unreachable!("completion blocks are 1x1 or 2x2"),
    }
}

// Rank-k update of sigma = K^-1 after K[c, c] += delta:
// sigma' = sigma - sigma[:, c] (I + delta sigma[c, c])^-1 delta sigma[c, :].
// Falls back to a full inverse when the small solve is ill conditioned.
fn woodbury_update(
    sigma: &mut DMatrix<f64>,
    c: &[usize],
    delta: &DMatrix<f64>,
    k_full: &DMatrix<f64>,
) -> Result<()> {
    let kdim = c.len();
    let s_cc = principal_submatrix(sigma, c);
    let inner = DMatrix::identity(kdim, kdim) + delta * &s_cc;
    let mid = match inner.clone().try_inverse() {
        Some(inv) => inv * delta,
        None => {
            *sigma = spd_inverse(k_full, "completion precision")?;
            return Ok(());
        }
    };
    let n = sigma.nrows();
    let mut cols = DMatrix::zeros(n, kdim);
    for (idx, &ci) in c.iter().enumerate() {
        cols.set_column(idx, &sigma.column(ci));
    }
    let correction = &cols * mid * cols.transpose();
    *sigma -= correction;
    Ok(())
}

/// Mixed-interaction table: for each continuous vertex, one normal draw per
/// joint level of its discrete neighbors, replicated across the full joint
/// level space. A continuous vertex with no discrete neighbor receives a
/// single draw replicated everywhere.
pub fn sample_mixed_interactions(
    g: &MarkedGraph,
    level_cards: &[usize],
    sigma_h: f64,
    seed: u64,
) -> Result<Vec<DVector<f64>>> {
    if sigma_h < 0.0 {
        return Err(Error::Config(format!("negative interaction spread {sigma_h}")));
    }
    if level_cards.len() != g.n_discrete() {
        return Err(Error::Model("level cardinalities do not match the graph".into()));
    }
    let space = LevelSpace::new(level_cards.to_vec());
    let n_cells = space.len();
    let n_cont = g.n_continuous();
    let nd = g.n_discrete();
    let mut h_table = vec![DVector::zeros(n_cont); n_cells];
    if sigma_h == 0.0 {
        return Ok(h_table);
    }
    let mut rng = rng_from_seed(seed);
    let normal = rand_distr::Normal::new(0.0, sigma_h).expect("valid spread");
    for gamma in 0..n_cont {
        let vertex = nd + gamma;
        let disc_neighbors: Vec<usize> =
            g.neighbors(vertex).iter().copied().filter(|&u| u < nd).collect();
        let sub = LevelSpace::new(disc_neighbors.iter().map(|&d| level_cards[d]).collect());
        let draws: Vec<f64> = (0..sub.len()).map(|_| rng.sample(normal)).collect();
        for (cell, h) in h_table.iter_mut().enumerate() {
            let sub_cell = space.project(cell, &disc_neighbors);
            h[gamma] = draws[sub_cell];
        }
    }
    Ok(h_table)
}

/// Build a random homogeneous model on `g`: completed covariance with mean
/// correlation `rho`, mixed interactions of spread `sigma_h`, uniform joint
/// level probabilities, and `mu(i) = sigma h(i)`.
pub fn build_model(
    g: &MarkedGraph,
    rho: f64,
    sigma_h: f64,
    level_cards: &[usize],
    seed: u64,
) -> Result<CGModel> {
    let target = random_target_correlations(g.n_continuous(), rho, derive_seed(seed, &[0]))?;
    let sigma = complete_covariance(g, &target, COMPLETION_TOL, COMPLETION_MAX_ITER)?;
    let h_table =
        sample_mixed_interactions(g, level_cards, sigma_h, derive_seed(seed, &[1]))?;
    let n_cells: usize = LevelSpace::new(level_cards.to_vec()).len();
    let p_table = vec![1.0 / n_cells as f64; n_cells];
    let mu_table: Vec<DVector<f64>> = h_table.iter().map(|h| &sigma * h).collect();
    CGModel::new(g.clone(), level_cards.to_vec(), p_table, mu_table, sigma)
}

// ---------------------------------------------------------------------------
// model file format
// ---------------------------------------------------------------------------

impl CGModel {
    /// Structured text serialization. Floats use the shortest round-trip
    /// representation, so save/load/save is byte-identical.
    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qpmix-model v1");
        let _ = writeln!(out, "p {} {}", self.graph.n_vertices(), self.graph.n_discrete());
        let lv: Vec<String> = self.levels.cards().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "levels {}", lv.join(" "));
        let _ = writeln!(out, "edges {}", self.graph.n_edges());
        for (u, v) in self.graph.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        let _ = writeln!(out, "ptable {}", self.p_table.len());
        for p in &self.p_table {
            let _ = writeln!(out, "{}", fmt_f64(*p));
        }
        let _ = writeln!(out, "mu {} {}", self.mu_table.len(), self.n_continuous());
        for mu in &self.mu_table {
            let row: Vec<String> = mu.iter().map(|x| fmt_f64(*x)).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        let _ = writeln!(out, "sigma {}", self.n_continuous());
        for i in 0..self.n_continuous() {
            let row: Vec<String> =
                (0..self.n_continuous()).map(|j| fmt_f64(self.sigma[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    pub fn save_model(&self, path: &Path) -> Result<()> {
        atomic_write(path, self.to_model_string().as_bytes())
    }

    pub fn parse_model(text: &str, origin: &str) -> Result<Self> {
        let mut reader = LineReader::new(text, origin);
        reader.expect_tag("qpmix-model v1")?;
        let header = reader.fields("p")?;
        let (p, nd): (usize, usize) = (reader.parse(&header, 0)?, reader.parse(&header, 1)?);
        let lv_fields = reader.fields("levels")?;
        let mut level_cards = Vec::with_capacity(lv_fields.tokens.len());
        for idx in 0..lv_fields.tokens.len() {
            level_cards.push(reader.parse(&lv_fields, idx)?);
        }
        if level_cards.len() != nd {
            return Err(reader.error("level count does not match discrete count"));
        }
        let e_fields = reader.fields("edges")?;
        let n_edges: usize = reader.parse(&e_fields, 0)?;
        let mut edges = Vec::with_capacity(n_edges);
        for _ in 0..n_edges {
            let line = reader.raw_fields()?;
            edges.push((reader.parse(&line, 0)?, reader.parse(&line, 1)?));
        }
        let graph = MarkedGraph::new(p, nd, edges)?;
        let pt_fields = reader.fields("ptable")?;
        let n_cells: usize = reader.parse(&pt_fields, 0)?;
        let mut p_table = Vec::with_capacity(n_cells);
        for _ in 0..n_cells {
            let line = reader.raw_fields()?;
            p_table.push(reader.parse(&line, 0)?);
        }
        let mu_fields = reader.fields("mu")?;
        let mu_rows: usize = reader.parse(&mu_fields, 0)?;
        let mu_cols: usize = reader.parse(&mu_fields, 1)?;
        let mut mu_table = Vec::with_capacity(mu_rows);
        for _ in 0..mu_rows {
            let line = reader.raw_fields()?;
            if line.tokens.len() != mu_cols {
                return Err(reader.error("wrong mean row length"));
            }
            let mut row = Vec::with_capacity(mu_cols);
            for idx in 0..mu_cols {
                row.push(reader.parse(&line, idx)?);
            }
            mu_table.push(DVector::from_vec(row));
        }
        let s_fields = reader.fields("sigma")?;
        let s_dim: usize = reader.parse(&s_fields, 0)?;
        let mut sigma = DMatrix::zeros(s_dim, s_dim);
        for i in 0..s_dim {
            let line = reader.raw_fields()?;
            if line.tokens.len() != s_dim {
                return Err(reader.error("wrong covariance row length"));
            }
            for j in 0..s_dim {
                sigma[(i, j)] = reader.parse(&line, j)?;
            }
        }
        Self::new(graph, level_cards, p_table, mu_table, sigma)
    }

    pub fn load_model(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_model(&text, &path.display().to_string())
    }
}

struct Fields {
    tokens: Vec<String>,
    line: usize,
}

struct LineReader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    origin: &'a str,
    current_line: usize,
}

impl<'a> LineReader<'a> {
    fn new(text: &'a str, origin: &'a str) -> Self {
        Self { lines: text.lines().enumerate(), origin, current_line: 0 }
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse { path: self.origin.to_string(), line: self.current_line, msg: msg.into() }
    }

    fn next_line(&mut self) -> Result<(usize, &'a str)> {
        for (idx, line) in self.lines.by_ref() {
            self.current_line = idx + 1;
            if !line.trim().is_empty() {
                return Ok((idx + 1, line));
            }
        }
        self.current_line += 1;
        Err(self.error("unexpected end of file"))
    }

    fn expect_tag(&mut self, tag: &str) -> Result<()> {
        let (_, line) = self.next_line()?;
        if line.trim() != tag {
            return Err(self.error(&format!("expected `{tag}`")));
        }
        Ok(())
    }

    fn fields(&mut self, keyword: &str) -> Result<Fields> {
        let (n, line) = self.next_line()?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(self.error(&format!("expected `{keyword}` section")));
        }
        Ok(Fields { tokens: it.map(str::to_string).collect(), line: n })
    }

    fn raw_fields(&mut self) -> Result<Fields> {
        let (n, line) = self.next_line()?;
        Ok(Fields { tokens: line.split_whitespace().map(str::to_string).collect(), line: n })
    }

    fn parse<T: std::str::FromStr>(&self, fields: &Fields, idx: usize) -> Result<T> {
        fields
            .tokens
            .get(idx)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse {
                path: self.origin.to_string(),
                line: fields.line,
                msg: format!("bad field {}", idx + 1),
            })
    }
}

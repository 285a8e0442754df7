//! Sufficient statistics on marginal variable subsets and the two
//! likelihood-ratio statistics for testing one missing edge.
//!
//! Everything here works on the marginal dataset over a handful of
//! variables, never on the full p-variable matrix: with p >> n the full
//! statistics are singular by construction, the marginal ones are not.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::data::MixedDataset;
use crate::error::{Error, Result};
use crate::levels::LevelSpace;
use crate::linalg::{principal_submatrix, spd_logdet};

/// Per-cell statistics: count, sum vector and sum of squared deviations of
/// the continuous coordinates.
#[derive(Debug, Clone)]
pub struct CellStat {
    pub count: usize,
    pub sum: DVector<f64>,
    pub ssd: DMatrix<f64>,
}

impl CellStat {
    pub fn mean(&self) -> DVector<f64> {
        &self.sum / self.count as f64
    }
}

/// Sufficient statistics of a variable subset: cells over the joint levels
/// of its discrete part, per-cell counts, sums and SSD matrices over its
/// continuous part. Only observed cells are stored.
#[derive(Debug, Clone)]
pub struct SuffStats {
    disc_vars: Vec<usize>,
    cont_vars: Vec<usize>,
    space: LevelSpace,
    n: usize,
    cells: BTreeMap<usize, CellStat>,
}

impl SuffStats {
    /// Compute the statistics of the marginal dataset on `vars`
    /// (vertex indices, any order; duplicates are merged).
    pub fn compute(data: &MixedDataset, vars: &[usize]) -> Self {
        let mut vars: Vec<usize> = vars.to_vec();
        vars.sort_unstable();
        vars.dedup();
        let disc_vars: Vec<usize> =
            vars.iter().copied().filter(|&v| data.is_discrete(v)).collect();
        let cont_vars: Vec<usize> =
            vars.iter().copied().filter(|&v| !data.is_discrete(v)).collect();
        let space =
            LevelSpace::new(disc_vars.iter().map(|&v| data.levels()[v]).collect());
        let n = data.n();
        let k = cont_vars.len();

        // pass 1: counts and sums
        let mut cells: BTreeMap<usize, CellStat> = BTreeMap::new();
        let mut row_cell = vec![0usize; n];
        let mut lv = vec![0usize; disc_vars.len()];
        for (row, slot_cell) in row_cell.iter_mut().enumerate() {
            for (slot, &v) in lv.iter_mut().zip(&disc_vars) {
                *slot = data.discrete_value(row, v) as usize;
            }
            let cell = space.index(&lv);
            *slot_cell = cell;
            let entry = cells.entry(cell).or_insert_with(|| CellStat {
                count: 0,
                sum: DVector::zeros(k),
                ssd: DMatrix::zeros(k, k),
            });
            entry.count += 1;
            for (slot, &v) in (0..k).zip(&cont_vars) {
                entry.sum[slot] += data.continuous_value(row, v);
            }
        }
        // pass 2: centered cross products per cell
        let means: BTreeMap<usize, DVector<f64>> =
            cells.iter().map(|(&c, s)| (c, s.mean())).collect();
        let mut y = DVector::zeros(k);
        for (row, &cell) in row_cell.iter().enumerate() {
            let mean = &means[&cell];
            for (slot, &v) in (0..k).zip(&cont_vars) {
                y[slot] = data.continuous_value(row, v) - mean[slot];
            }
            let stat = cells.get_mut(&cell).expect("cell seen in pass 1");
            for i in 0..k {
                for j in i..k {
                    let inc = y[i] * y[j];
                    stat.ssd[(i, j)] += inc;
                    if i != j {
                        stat.ssd[(j, i)] += inc;
                    }
                }
            }
        }
        Self { disc_vars, cont_vars, space, n, cells }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn disc_vars(&self) -> &[usize] {
        &self.disc_vars
    }

    pub fn cont_vars(&self) -> &[usize] {
        &self.cont_vars
    }

    pub fn level_space(&self) -> &LevelSpace {
        &self.space
    }

    /// Number of observed joint levels (cells with `n(i) > 0`).
    pub fn observed_cells(&self) -> usize {
        self.cells.len()
    }

    /// Statistics of one observed cell, by cell index in the level space.
    pub fn cell(&self, idx: usize) -> Option<&CellStat> {
        self.cells.get(&idx)
    }

    /// Iterate observed cells in increasing cell-index order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, &CellStat)> {
        self.cells.iter().map(|(&c, s)| (c, s))
    }

    /// SSD pooled over the observed cells: `ssd(A) = sum_i ssd(i)`.
    pub fn pooled_ssd(&self) -> DMatrix<f64> {
        let k = self.cont_vars.len();
        let mut pooled = DMatrix::zeros(k, k);
        for stat in self.cells.values() {
            pooled += &stat.ssd;
        }
        pooled
    }
}

/// Likelihood-ratio statistic (already raised to the power 2/n) together
/// with the marginal-subset bookkeeping the exact tests need.
#[derive(Debug, Clone, Copy)]
pub struct LrValue {
    /// The statistic, in (0, 1].
    pub lambda: f64,
    /// Observations.
    pub n: usize,
    /// Continuous variables in the marginal subset, |Gamma|.
    pub n_cont: usize,
    /// Observed joint levels of the subset's discrete variables, |I|.
    pub n_cells: usize,
    /// Observed joint levels with the tested discrete variable removed,
    /// |I_{Delta*}|. One when the subset has no other discrete variable and
    /// for pure continuous tests.
    pub cells_rest: usize,
    /// Observed levels of the tested discrete variable, |I_delta|.
    /// Zero for pure continuous tests.
    pub levels_delta: usize,
}

fn logdet_drop(pooled: &DMatrix<f64>, drop: &[usize], name: &str) -> Result<f64> {
    let keep: Vec<usize> = (0..pooled.nrows()).filter(|i| !drop.contains(i)).collect();
    spd_logdet(&principal_submatrix(pooled, &keep), name)
}

/// Statistic for a missing continuous edge:
/// `|ssd_G| |ssd_G\{g,e}| / (|ssd_G\{g}| |ssd_G\{e}|)`, all pooled within the
/// joint levels of the subset's discrete variables; determinants over the
/// empty set are 1.
pub fn lr_continuous(
    data: &MixedDataset,
    gamma: usize,
    eta: usize,
    q: &[usize],
) -> Result<LrValue> {
    if data.is_discrete(gamma) || data.is_discrete(eta) {
        return Err(Error::Config("lr_continuous endpoints must be continuous".into()));
    }
    if gamma == eta || q.contains(&gamma) || q.contains(&eta) {
        return Err(Error::Config("test endpoints overlap the conditioning set".into()));
    }
    let mut subset = q.to_vec();
    subset.push(gamma);
    subset.push(eta);
    let stats = SuffStats::compute(data, &subset);
    if stats.n() == 0 {
        return Err(Error::EmptyCell);
    }
    let pooled = stats.pooled_ssd();
    let pos_g = stats.cont_vars().iter().position(|&v| v == gamma).expect("gamma in subset");
    let pos_e = stats.cont_vars().iter().position(|&v| v == eta).expect("eta in subset");
    let ld_full = spd_logdet(&pooled, "ssd[G]")?;
    let ld_both = logdet_drop(&pooled, &[pos_g, pos_e], "ssd[G-ge]")?;
    let ld_g = logdet_drop(&pooled, &[pos_g], "ssd[G-g]")?;
    let ld_e = logdet_drop(&pooled, &[pos_e], "ssd[G-e]")?;
    let lambda = (ld_full + ld_both - ld_g - ld_e).exp().min(1.0);
    Ok(LrValue {
        lambda,
        n: stats.n(),
        n_cont: stats.cont_vars().len(),
        n_cells: stats.observed_cells(),
        cells_rest: 1,
        levels_delta: 0,
    })
}

/// Statistic for a missing mixed edge:
/// `|ssd_G| |ssd_G*(D*)| / (|ssd_G*| |ssd_G(D*)|)` with `G* = G \ {gamma}`
/// and `D* = D \ {delta}`; `ssd_B(A)` pools the SSD of coordinates `B`
/// within the joint levels of `A`.
pub fn lr_mixed(
    data: &MixedDataset,
    delta: usize,
    gamma: usize,
    q: &[usize],
) -> Result<LrValue> {
    if !data.is_discrete(delta) || data.is_discrete(gamma) {
        return Err(Error::Config(
            "lr_mixed expects a discrete delta and a continuous gamma".into(),
        ));
    }
    if q.contains(&delta) || q.contains(&gamma) {
        return Err(Error::Config("test endpoints overlap the conditioning set".into()));
    }
    let mut subset = q.to_vec();
    subset.push(delta);
    subset.push(gamma);
    let full = SuffStats::compute(data, &subset);
    if full.n() == 0 {
        return Err(Error::EmptyCell);
    }
    let rest_vars: Vec<usize> = subset.iter().copied().filter(|&v| v != delta).collect();
    let rest = SuffStats::compute(data, &rest_vars);

    let pooled_full = full.pooled_ssd();
    let pooled_rest = rest.pooled_ssd();
    debug_assert_eq!(full.cont_vars(), rest.cont_vars());
    let pos_g = full.cont_vars().iter().position(|&v| v == gamma).expect("gamma in subset");

    let ld_full_g = spd_logdet(&pooled_full, "ssd[G]")?;
    let ld_full_gs = logdet_drop(&pooled_full, &[pos_g], "ssd[G*]")?;
    let ld_rest_g = spd_logdet(&pooled_rest, "ssd[G](D*)")?;
    let ld_rest_gs = logdet_drop(&pooled_rest, &[pos_g], "ssd[G*](D*)")?;
    let lambda = (ld_full_g + ld_rest_gs - ld_full_gs - ld_rest_g).exp().min(1.0);

    // observed levels of delta itself
    let delta_pos = full.disc_vars().iter().position(|&v| v == delta).expect("delta in subset");
    let mut delta_levels = std::collections::BTreeSet::new();
    for (cell, _) in full.cells() {
        delta_levels.insert(full.level_space().project(cell, &[delta_pos]));
    }
    Ok(LrValue {
        lambda,
        n: full.n(),
        n_cont: full.cont_vars().len(),
        n_cells: full.observed_cells(),
        cells_rest: rest.observed_cells(),
        levels_delta: delta_levels.len(),
    })
}

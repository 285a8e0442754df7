//! Drawing i.i.d. observations from a model.
//!
//! Each row first draws a joint discrete level from `p(i)` by inverse-CDF
//! lookup, then a multivariate normal through the Cholesky factor of the
//! shared covariance. The RNG is ChaCha (8 rounds) seeded through
//! [`crate::seed`]; Gaussian variates use the ziggurat method of
//! `rand_distr::StandardNormal`. The draw order is fixed (one uniform, then
//! `|Gamma|` normals per row), so samples are reproducible across platforms
//! and releases for a given seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::MixedDataset;
use crate::error::Result;
use crate::linalg::cholesky;
use crate::model::CGModel;
use crate::seed::rng_from_seed;

/// Sample `n` i.i.d. observations from `model`.
pub fn sample_dataset(model: &CGModel, n: usize, seed: u64) -> Result<MixedDataset> {
    let chol = cholesky(model.sigma(), "sigma")?;
    let n_cont = model.n_continuous();
    let n_disc = model.n_discrete();
    let space = model.levels();
    let mut rng = rng_from_seed(seed);

    let mut discrete = Vec::with_capacity(n * n_disc);
    let mut continuous = DMatrix::zeros(n, n_cont);
    let mut z = DVector::zeros(n_cont);
    for row in 0..n {
        let u: f64 = rng.random_range(0.0..1.0);
        let cell = inverse_cdf(model.p_table(), u);
        for lvl in space.levels(cell) {
            discrete.push(lvl as u32);
        }
        for i in 0..n_cont {
            z[i] = rng.sample(StandardNormal);
        }
        let y = model.mu(cell) + &chol * &z;
        for i in 0..n_cont {
            continuous[(row, i)] = y[i];
        }
    }
    MixedDataset::new(n, space.cards().to_vec(), discrete, continuous)
}

fn inverse_cdf(p_table: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (idx, &p) in p_table.iter().enumerate() {
        acc += p;
        if u < acc {
            return idx;
        }
    }
    p_table.len() - 1
}

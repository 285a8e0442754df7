//! Conditional-independence tests for one pair given a conditioning set.
//!
//! Small values of the likelihood ratio are evidence against conditional
//! independence, so p-values are lower-tail probabilities of the statistic.
//! Two nulls are available for `-n log Lambda`-style testing: the exact beta
//! law of the statistic itself, which holds at any sample size, and the
//! asymptotic chi-square law. The exact test is the default throughout.
//!
//! Joint-level counts entering the null parameters are the observed ones:
//! empty cells do not contribute degrees of freedom.

use crate::data::MixedDataset;
use crate::error::{Error, Result};
use crate::special::{reg_inc_beta, reg_inc_gamma_upper};
use crate::stats::{lr_continuous, lr_mixed, LrValue};

/// Which null distribution drives the reject decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Exact,
    Asymptotic,
}

/// Everything a single conditional-independence test produced.
#[derive(Debug, Clone, Copy)]
pub struct TestResult {
    /// Likelihood-ratio statistic, in (0, 1].
    pub statistic: f64,
    /// Lower-tail p-value under the exact beta null.
    pub p_exact: f64,
    /// p-value under the asymptotic chi-square null.
    pub p_asymptotic: f64,
    /// Degrees of freedom of the asymptotic null.
    pub df: usize,
    /// Shape parameters of the exact beta null.
    pub beta_a: f64,
    pub beta_b: f64,
    /// Observed joint levels used for the null parameters.
    pub effective_cells: usize,
}

impl TestResult {
    pub fn p_value(&self, kind: TestKind) -> f64 {
        match kind {
            TestKind::Exact => self.p_exact,
            TestKind::Asymptotic => self.p_asymptotic,
        }
    }
}

/// Result of [`ci_test`]: the statistics plus the reject decision at the
/// requested level.
#[derive(Debug, Clone, Copy)]
pub struct CiOutcome {
    pub result: TestResult,
    pub reject: bool,
}

/// Exact p-value for a missing continuous edge: the statistic follows
/// `Beta((n - |Gamma| - |I| + 1)/2, 1/2)` under the null.
pub fn exact_test_continuous(lambda: f64, n: usize, n_cont: usize, n_cells: usize) -> Result<f64> {
    let (a, b) = continuous_shapes(n, n_cont, n_cells)?;
    reg_inc_beta(a, b, lambda)
}

/// Exact p-value for a missing mixed edge: the statistic follows
/// `Beta((n - |Gamma| - |I| + 1)/2, |I_{Delta*}| (|I_delta| - 1)/2)`.
pub fn exact_test_mixed(
    lambda: f64,
    n: usize,
    n_cont: usize,
    n_cells: usize,
    levels_delta: usize,
    levels_rest: usize,
) -> Result<f64> {
    let (a, b) = mixed_shapes(n, n_cont, n_cells, levels_delta, levels_rest)?;
    reg_inc_beta(a, b, lambda)
}

/// Asymptotic p-value: the upper chi-square tail of `-n log lambda` on
/// `df` degrees of freedom.
pub fn asymptotic_test(lambda: f64, n: usize, df: usize) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Domain(format!("lambda {lambda} outside (0, 1]")));
    }
    if df == 0 {
        return Err(Error::SampleSize { reason: "zero degrees of freedom".into() });
    }
    let stat = -(n as f64) * lambda.ln();
    reg_inc_gamma_upper(df as f64 / 2.0, stat / 2.0)
}

fn continuous_shapes(n: usize, n_cont: usize, n_cells: usize) -> Result<(f64, f64)> {
    let a = (n as f64 - n_cont as f64 - n_cells as f64 + 1.0) / 2.0;
    if a <= 0.0 {
        return Err(Error::SampleSize {
            reason: format!("n = {n} with |Gamma| = {n_cont}, |I| = {n_cells}"),
        });
    }
    Ok((a, 0.5))
}

fn mixed_shapes(
    n: usize,
    n_cont: usize,
    n_cells: usize,
    levels_delta: usize,
    levels_rest: usize,
) -> Result<(f64, f64)> {
    let a = (n as f64 - n_cont as f64 - n_cells as f64 + 1.0) / 2.0;
    if a <= 0.0 {
        return Err(Error::SampleSize {
            reason: format!("n = {n} with |Gamma| = {n_cont}, |I| = {n_cells}"),
        });
    }
    let b = levels_rest as f64 * (levels_delta as f64 - 1.0) / 2.0;
    if b <= 0.0 {
        return Err(Error::SampleSize {
            reason: format!("tested discrete variable has {levels_delta} observed level(s)"),
        });
    }
    Ok((a, b))
}

fn result_from_lr(lr: &LrValue, mixed: bool) -> Result<TestResult> {
    let (beta_a, beta_b, df) = if mixed {
        let (a, b) = mixed_shapes(lr.n, lr.n_cont, lr.n_cells, lr.levels_delta, lr.cells_rest)?;
        (a, b, lr.cells_rest * (lr.levels_delta - 1))
    } else {
        let (a, b) = continuous_shapes(lr.n, lr.n_cont, lr.n_cells)?;
        (a, b, 1)
    };
    let p_exact = reg_inc_beta(beta_a, beta_b, lr.lambda)?;
    let p_asymptotic = asymptotic_test(lr.lambda, lr.n, df)?;
    Ok(TestResult {
        statistic: lr.lambda,
        p_exact,
        p_asymptotic,
        df,
        beta_a,
        beta_b,
        effective_cells: lr.n_cells,
    })
}

/// Test conditional independence of `a` and `b` given `q`, rejecting at
/// level `alpha` under the p-value selected by `kind`.
///
/// Both endpoints discrete is an error: discrete variables are assumed
/// marginally independent and their pairs are never tested.
pub fn ci_test(
    data: &MixedDataset,
    a: usize,
    b: usize,
    q: &[usize],
    alpha: f64,
    kind: TestKind,
) -> Result<CiOutcome> {
    if a == b {
        return Err(Error::Config(format!("test pair ({a}, {b}) is degenerate")));
    }
    let (da, db) = (data.is_discrete(a), data.is_discrete(b));
    let result = match (da, db) {
        (true, true) => return Err(Error::DiscretePair),
        (false, false) => result_from_lr(&lr_continuous(data, a, b, q)?, false)?,
        (true, false) => result_from_lr(&lr_mixed(data, a, b, q)?, true)?,
        (false, true) => result_from_lr(&lr_mixed(data, b, a, q)?, true)?,
    };
    let reject = result.p_value(kind) < alpha;
    Ok(CiOutcome { result, reject })
}

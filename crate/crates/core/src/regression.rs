//! Seeded train/test splitting, OLS fitting, R² and the per-month model loop.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::features::build_design_matrix;
use crate::linalg::{least_squares, normal_equation_residual, LeastSquares, Matrix};
use crate::preprocess::MonthlyDataset;
use crate::rng::{derive_seed, XorShift64Star};

pub const MIN_SPLIT_ROWS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
    pub ratio: f64,
}

/// Number of training rows: `floor(ratio·n + 0.5)`, kept within `[1, n - 1]`.
pub fn train_size(n: usize, ratio: f64) -> usize {
    ((ratio * n as f64 + 0.5).floor() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// Shuffles `0..n` with the pinned generator and cuts it into train and test.
/// Both index lists are returned sorted.
pub fn train_test_split(n: usize, ratio: f64, seed: u64) -> Result<SplitIndices> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidRatio(ratio));
    }
    if n < MIN_SPLIT_ROWS {
        return Err(Error::SplitTooSmall { n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    XorShift64Star::new(seed).shuffle(&mut perm);
    let n_train = train_size(n, ratio);
    let mut test = perm.split_off(n_train);
    let mut train = perm;
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices {
        train,
        test,
        seed,
        ratio,
    })
}

pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<LeastSquares> {
    least_squares(x, y)
}

pub fn predict(beta: &[f64], x: &Matrix) -> Result<Vec<f64>> {
    x.mul_vec(beta)
}

/// `1 − Σ(y − ŷ)² / Σ(y − ȳ)²` with `ȳ` the mean of `y`.
pub fn r_squared(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if y.len() != y_hat.len() {
        return Err(Error::Dimension(format!(
            "{} observations against {} predictions",
            y.len(),
            y_hat.len()
        )));
    }
    if y.len() < 2 {
        return Err(Error::EmptyInput("R\u{b2} (at least two observations)"));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedR2);
    }
    let ss_res: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// One month's fitted model and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub month: u32,
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    pub r2_train: f64,
    pub r2_test: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Mean of `y − ŷ` on the test rows.
    pub residual_mean: f64,
    pub residual_max_abs: f64,
    pub seed: u64,
    pub split_seed: u64,
    pub rank: usize,
    pub dependent_columns: Vec<String>,
    /// `‖Xᵀr‖∞ / (1 + ‖Xᵀy‖∞)` on the training rows.
    pub normal_residual: f64,
    #[serde(skip)]
    pub split: SplitIndices,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FitWarning {
    Skipped { month: u32, reason: String },
    RankDeficient { month: u32, columns: Vec<String> },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonthlyFits {
    pub results: Vec<FitResult>,
    pub warnings: Vec<FitWarning>,
}

pub fn month_seed(seed: u64, month: u32) -> u64 {
    derive_seed(seed, u64::from(month))
}

pub fn fit_month(m: &MonthlyDataset, ratio: f64, seed: u64) -> Result<FitResult> {
    let design = build_design_matrix(m)?;
    let split_seed = month_seed(seed, m.month());
    let split = train_test_split(m.len(), ratio, split_seed)?;

    let x_train = design.x.select_rows(&split.train);
    let y_train: Vec<f64> = split.train.iter().map(|&i| design.y[i]).collect();
    let x_test = design.x.select_rows(&split.test);
    let y_test: Vec<f64> = split.test.iter().map(|&i| design.y[i]).collect();

    let solution = fit_ols(&x_train, &y_train)?;
    let beta = &solution.coefficients;
    let r2_train = r_squared(&y_train, &predict(beta, &x_train)?)?;
    let test_hat = predict(beta, &x_test)?;
    let r2_test = r_squared(&y_test, &test_hat)?;
    let residuals: Vec<f64> = y_test.iter().zip(&test_hat).map(|(y, f)| y - f).collect();

    Ok(FitResult {
        month: m.month(),
        r2_train,
        r2_test,
        n_train: split.train.len(),
        n_test: split.test.len(),
        residual_mean: residuals.iter().sum::<f64>() / residuals.len() as f64,
        residual_max_abs: residuals.iter().fold(0.0, |a, r| a.max(r.abs())),
        seed,
        split_seed,
        rank: solution.rank,
        dependent_columns: solution
            .dependent_columns
            .iter()
            .map(|&j| design.columns[j].clone())
            .collect(),
        normal_residual: normal_equation_residual(&x_train, beta, &y_train)?,
        coefficients: solution.coefficients,
        columns: design.columns,
        split,
    })
}

/// Fits every month independently. Months that cannot be fitted become
/// warnings. Results are in month order whether or not `parallel` is set.
pub fn fit_monthly_models(datasets: &[MonthlyDataset], ratio: f64, seed: u64, parallel: bool) -> MonthlyFits {
    let outcomes: Vec<(u32, Result<FitResult>)> = if parallel {
        datasets
            .par_iter()
            .map(|m| (m.month(), fit_month(m, ratio, seed)))
            .collect()
    } else {
        datasets
            .iter()
            .map(|m| (m.month(), fit_month(m, ratio, seed)))
            .collect()
    };

    let mut fits = MonthlyFits::default();
    for (month, outcome) in outcomes {
        match outcome {
            Ok(fit) => {
                if !fit.dependent_columns.is_empty() {
                    fits.warnings.push(FitWarning::RankDeficient {
                        month,
                        columns: fit.dependent_columns.clone(),
                    });
                }
                fits.results.push(fit);
            }
            Err(e) => fits.warnings.push(FitWarning::Skipped {
                month,
                reason: e.to_string(),
            }),
        }
    }
    fits.results.sort_by_key(|f| f.month);
    fits
}

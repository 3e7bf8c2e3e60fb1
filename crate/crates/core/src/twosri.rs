//! Two-stage residual inclusion (2SRI).
//!
//! First stage: OLS of each endogenous regressor on all exogenous covariates
//! plus the instruments. Second stage: Probit on the original design with the
//! first-stage residuals appended as extra columns. The reported standard
//! errors are the second-stage observed-information ones and are not corrected
//! for first-stage estimation; an optional nonparametric bootstrap resampling
//! whole subscribers provides corrected errors (Terza, Basu & Rathouz 2008 for
//! the estimator itself).

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::linalg::cholesky;
use crate::mathx;
use crate::probit::{probit_fit, FitResult, ProbitOptions};
use crate::rng::{derive_seed, Rng};
use crate::{CoreError, Result};

/// A residual column whose largest absolute entry is below this is pruned as
/// zero-variance, collapsing 2SRI to the plain Probit.
const RESIDUAL_ZERO_TOL: f64 = 1e-8;

/// One first-stage OLS equation.
#[derive(Debug, Clone)]
pub struct FirstStageEquation {
    pub endog_name: String,
    pub regressor_names: Vec<String>,
    pub coef: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Default)]
pub struct FirstStageResult {
    pub equations: Vec<FirstStageEquation>,
}

#[derive(Debug, Clone)]
pub struct BootstrapOptions {
    pub replicates: u32,
    pub seed: u64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        BootstrapOptions { replicates: 200, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct TwoSriResult {
    pub fit: FitResult,
    pub first_stage: FirstStageResult,
    /// Residual columns that made it into the second stage.
    pub residual_cols: Vec<String>,
    /// Residual columns dropped as zero-variance.
    pub pruned_residuals: Vec<String>,
    /// Bootstrap replicates that failed to fit (skipped), if bootstrap ran.
    pub bootstrap_failures: u32,
}

/// Design with the endogenous columns removed and instruments appended, used
/// as the first-stage regressor set.
fn first_stage_design(
    design: &DesignMatrix,
    endog_idx: &[usize],
    instruments: &[(String, Vec<f64>)],
) -> Result<DesignMatrix> {
    for (name, z) in instruments {
        let first = z.first().copied().unwrap_or(0.0);
        if z.iter().all(|&v| v == first) {
            return Err(CoreError::DegenerateInstrument(name.clone()));
        }
    }
    let mut fs = design.clone();
    let keep: Vec<bool> = (0..design.n_cols()).map(|j| !endog_idx.contains(&j)).collect();
    fs.retain_columns(&keep);
    fs.pruned_log.clear();
    for (name, z) in instruments {
        fs.push_dense_col(name, z);
    }
    Ok(fs)
}

/// OLS of each endogenous column on the exogenous columns plus instruments.
pub fn first_stage(
    design: &DesignMatrix,
    endog_names: &[&str],
    instruments: &[(String, Vec<f64>)],
) -> Result<FirstStageResult> {
    let endog_idx: Vec<usize> = endog_names
        .iter()
        .map(|name| {
            design
                .col_index(name)
                .ok_or_else(|| CoreError::InvalidConfig(alloc::format!("no column named {name}")))
        })
        .collect::<Result<_>>()?;
    let fs = first_stage_design(design, &endog_idx, instruments)?;
    let ones = vec![1.0; fs.n_rows];
    let (gram, _) = fs.weighted_accumulate(&ones, None);
    let chol = cholesky(&gram, "first-stage normal equations")?;

    let mut result = FirstStageResult::default();
    for (&idx, name) in endog_idx.iter().zip(endog_names) {
        let target = design.column(idx);
        let xty = fs.xt_vec(&target);
        let coef = chol.solve(&xty);
        let fitted = fs.linear_index(&coef);
        let residuals: Vec<f64> =
            target.iter().zip(&fitted).map(|(&t, &f)| t - f).collect();
        let mean = target.iter().sum::<f64>() / target.len() as f64;
        let sst: f64 = target.iter().map(|&t| (t - mean) * (t - mean)).sum();
        let ssr: f64 = residuals.iter().map(|&r| r * r).sum();
        let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 0.0 };
        result.equations.push(FirstStageEquation {
            endog_name: name.to_string(),
            regressor_names: fs.col_names(),
            coef,
            fitted,
            residuals,
            r_squared,
        });
    }
    Ok(result)
}

fn second_stage(
    design: &DesignMatrix,
    first: &FirstStageResult,
    opts: &ProbitOptions,
) -> Result<(FitResult, Vec<String>, Vec<String>)> {
    let mut second = design.clone();
    let mut residual_cols = Vec::new();
    let mut pruned = Vec::new();
    for eq in &first.equations {
        let name = alloc::format!("res_{}", eq.endog_name);
        let max_abs = eq.residuals.iter().fold(0.0f64, |m, &r| m.max(mathx::abs(r)));
        if max_abs <= RESIDUAL_ZERO_TOL {
            pruned.push(name);
        } else {
            second.push_dense_col(&name, &eq.residuals);
            residual_cols.push(name);
        }
    }
    let mut fit = probit_fit(&second, opts)?;
    fit.se_method = String::from("observed-information (2SRI naive, first stage uncorrected)");
    Ok((fit, residual_cols, pruned))
}

/// Full 2SRI estimator; optional subscriber-level bootstrap replaces the naive
/// standard errors.
pub fn two_sri_fit(
    design: &DesignMatrix,
    endog_names: &[&str],
    instruments: &[(String, Vec<f64>)],
    opts: &ProbitOptions,
    bootstrap: Option<&BootstrapOptions>,
) -> Result<TwoSriResult> {
    let first = first_stage(design, endog_names, instruments)?;
    let (fit, residual_cols, pruned_residuals) = second_stage(design, &first, opts)?;
    let mut result = TwoSriResult {
        fit,
        first_stage: first,
        residual_cols,
        pruned_residuals,
        bootstrap_failures: 0,
    };

    if let Some(boot) = bootstrap {
        let (se, failures) = bootstrap_se(design, endog_names, instruments, opts, boot, &result.fit)?;
        result.bootstrap_failures = failures;
        result.fit.se = se;
        result.fit.z = result
            .fit
            .beta
            .iter()
            .zip(&result.fit.se)
            .map(|(&b, &s)| if s > 0.0 { b / s } else { 0.0 })
            .collect();
        result.fit.p_value =
            result.fit.z.iter().map(|&z| 2.0 * mathx::norm_cdf(-mathx::abs(z))).collect();
        result.fit.se_method =
            alloc::format!("bootstrap ({} subscriber-resampled replicates)", boot.replicates);
    }
    Ok(result)
}

/// Resample subscribers (row groups) with replacement, rerun both stages, and
/// take the across-replicate standard deviation per coefficient.
fn bootstrap_se(
    design: &DesignMatrix,
    endog_names: &[&str],
    instruments: &[(String, Vec<f64>)],
    opts: &ProbitOptions,
    boot: &BootstrapOptions,
    point: &FitResult,
) -> Result<(Vec<f64>, u32)> {
    // Row indices per subscriber.
    let mut groups: alloc::collections::BTreeMap<u32, Vec<u32>> = alloc::collections::BTreeMap::new();
    for (r, &g) in design.row_group.iter().enumerate() {
        groups.entry(g).or_default().push(r as u32);
    }
    let subscribers: Vec<&Vec<u32>> = groups.values().collect();
    let n_subs = subscribers.len() as u32;

    let mut draws: Vec<Vec<f64>> = vec![Vec::new(); point.beta.len()];
    let mut failures = 0u32;
    for rep in 0..boot.replicates {
        let mut rng = Rng::seed_from(derive_seed(boot.seed, 0xb007 + rep as u64));
        let mut rows: Vec<u32> = Vec::with_capacity(design.n_rows);
        for _ in 0..n_subs {
            rows.extend_from_slice(subscribers[rng.below(n_subs) as usize]);
        }
        let resampled = design.select_rows(&rows);
        let z_resampled: Vec<(String, Vec<f64>)> = instruments
            .iter()
            .map(|(name, z)| {
                (name.clone(), rows.iter().map(|&r| z[r as usize]).collect())
            })
            .collect();
        let refit = first_stage(&resampled, endog_names, &z_resampled)
            .and_then(|fs| second_stage(&resampled, &fs, opts));
        match refit {
            Ok((fit, _, _)) => {
                for (i, name) in point.names.iter().enumerate() {
                    if let Some(b) = fit.coef(name) {
                        draws[i].push(b);
                    }
                }
            }
            Err(_) => failures += 1,
        }
    }

    let se = draws
        .iter()
        .zip(&point.se)
        .map(|(d, &naive)| {
            if d.len() < 2 {
                return naive;
            }
            let n = d.len() as f64;
            let mean = d.iter().sum::<f64>() / n;
            let var = d.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            mathx::sqrt(var)
        })
        .collect();
    Ok((se, failures))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    /// y* = 0.5 + 0.8·x_endog + ε with x_endog = 0.7·z + ν; z exogenous.
    fn make_data(n: usize, seed: u64) -> (DesignMatrix, Vec<(String, Vec<f64>)>) {
        let mut rng = Rng::seed_from(seed);
        let mut x_endog = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let zi = rng.normal();
            let xi = 0.7 * zi + 0.5 * rng.normal();
            let latent = 0.5 + 0.8 * xi + rng.normal();
            z.push(zi);
            x_endog.push(xi);
            y.push(if latent > 0.0 { 1.0 } else { 0.0 });
        }
        let design = DesignMatrix::from_dense(
            &["intercept", "x_endog"],
            vec![vec![1.0; n], x_endog],
            y,
        );
        (design, vec![("z".to_string(), z)])
    }

    #[test]
    fn residuals_match_normal_equations_oracle() {
        let (design, instruments) = make_data(200, 5);
        let fs = first_stage(&design, &["x_endog"], &instruments).unwrap();
        let eq = &fs.equations[0];

        // Oracle: Gauss-Jordan inverse of XᵀX applied to Xᵀt.
        let x_cols = [design.column(0), instruments[0].1.clone()];
        let t = design.column(1);
        let p = x_cols.len();
        let mut xtx = vec![vec![0.0; p]; p];
        let mut xty = vec![0.0; p];
        for r in 0..design.n_rows {
            for i in 0..p {
                xty[i] += x_cols[i][r] * t[r];
                for j in 0..p {
                    xtx[i][j] += x_cols[i][r] * x_cols[j][r];
                }
            }
        }
        let inv = gauss_jordan(xtx);
        let mut coef = vec![0.0; p];
        for i in 0..p {
            for j in 0..p {
                coef[i] += inv[i][j] * xty[j];
            }
        }
        for r in 0..design.n_rows {
            let fitted = coef[0] * x_cols[0][r] + coef[1] * x_cols[1][r];
            assert!(
                mathx::abs(eq.residuals[r] - (t[r] - fitted)) < 1e-10,
                "row {r}: {} vs {}",
                eq.residuals[r],
                t[r] - fitted
            );
        }
    }

    fn gauss_jordan(mut a: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
        let n = a.len();
        let mut inv: Vec<Vec<f64>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        for col in 0..n {
            let pivot = a[col][col];
            for j in 0..n {
                a[col][j] /= pivot;
                inv[col][j] /= pivot;
            }
            for row in 0..n {
                if row != col {
                    let factor = a[row][col];
                    for j in 0..n {
                        a[row][j] -= factor * a[col][j];
                        inv[row][j] -= factor * inv[col][j];
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn residuals_orthogonal_to_regressors_and_centered() {
        let (design, instruments) = make_data(300, 9);
        let fs = first_stage(&design, &["x_endog"], &instruments).unwrap();
        let eq = &fs.equations[0];
        let mean: f64 = eq.residuals.iter().sum::<f64>() / eq.residuals.len() as f64;
        assert!(mathx::abs(mean) < 1e-10);
        for col in [design.column(0), instruments[0].1.clone()] {
            let dot: f64 = col.iter().zip(&eq.residuals).map(|(&a, &b)| a * b).sum();
            assert!(mathx::abs(dot) < 1e-8, "residual not orthogonal: {dot}");
        }
        assert!(eq.r_squared > 0.3 && eq.r_squared < 1.0);
    }

    #[test]
    fn endogenous_equal_to_instrument_collapses_to_probit() {
        // Endogenous column IS the instrument: residuals vanish, the residual
        // column is pruned, and 2SRI equals the plain Probit bit for bit.
        let mut rng = Rng::seed_from(33);
        let n = 150;
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let y: Vec<f64> =
            x.iter().map(|&xi| if 0.3 + 0.9 * xi + rng.normal() > 0.0 { 1.0 } else { 0.0 }).collect();
        let design =
            DesignMatrix::from_dense(&["intercept", "x"], vec![vec![1.0; n], x.clone()], y);
        let instruments = vec![("z".to_string(), x)];
        let out =
            two_sri_fit(&design, &["x"], &instruments, &ProbitOptions::default(), None).unwrap();
        assert!(out.residual_cols.is_empty());
        assert_eq!(out.pruned_residuals, vec!["res_x".to_string()]);
        let plain = probit_fit(&design, &ProbitOptions::default()).unwrap();
        assert_eq!(out.fit.beta, plain.beta);
        assert_eq!(out.fit.loglik, plain.loglik);
    }

    #[test]
    fn orthogonal_instrument_gets_zero_first_stage_weight() {
        // Endogenous column orthogonal (by construction) to the instrument:
        // its first-stage coefficient collapses to ~0.
        let n = 400;
        let mut rng = Rng::seed_from(77);
        let mut x = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for i in 0..n {
            let v = rng.normal();
            x.push(v);
            // Alternate the sign pattern so Σ x·z = 0 exactly.
            z.push(if i % 2 == 0 { 1.0 } else { -1.0 });
        }
        // Enforce exact orthogonality: pair x values so x·z sums to zero.
        for i in (0..n).step_by(2) {
            x[i + 1] = x[i];
        }
        let y: Vec<f64> = (0..n).map(|i| ((i / 3) % 2) as f64).collect();
        let design = DesignMatrix::from_dense(
            &["intercept", "x_endog"],
            vec![vec![1.0; n], x],
            y,
        );
        let fs = first_stage(&design, &["x_endog"], &[("z".to_string(), z)]).unwrap();
        let eq = &fs.equations[0];
        let z_coef = eq.coef[eq.regressor_names.iter().position(|n| n == "z").unwrap()];
        assert!(mathx::abs(z_coef) < 1e-10, "z coefficient = {z_coef}");
    }

    #[test]
    fn zero_variance_instrument_rejected() {
        let (design, _) = make_data(50, 2);
        let flat = vec![("z".to_string(), vec![3.0; 50])];
        assert!(matches!(
            first_stage(&design, &["x_endog"], &flat),
            Err(CoreError::DegenerateInstrument(_))
        ));
    }

    #[test]
    fn bootstrap_produces_finite_positive_ses() {
        let (design, instruments) = make_data(120, 8);
        let boot = BootstrapOptions { replicates: 30, seed: 4 };
        let out = two_sri_fit(
            &design,
            &["x_endog"],
            &instruments,
            &ProbitOptions::default(),
            Some(&boot),
        )
        .unwrap();
        assert!(out.fit.se.iter().all(|&s| s > 0.0 && s.is_finite()));
        assert!(out.fit.se_method.contains("bootstrap"));
        assert!(out.bootstrap_failures < 5);
        // Deterministic under the same seed.
        let out2 = two_sri_fit(
            &design,
            &["x_endog"],
            &instruments,
            &ProbitOptions::default(),
            Some(&boot),
        )
        .unwrap();
        assert_eq!(out.fit.se, out2.fit.se);
    }
}

//! Pooled Probit maximum likelihood via Newton-Raphson with step-halving.
//!
//! LL(β) = Σ y ln Φ(xβ) + (1−y) ln(1−Φ(xβ)), evaluated tail-safe through
//! `mathx::log_norm_cdf`. With t = (2y−1)·xβ the per-row score factor is
//! (2y−1)·λ(t) and the observed-information weight λ(t)(λ(t)+t), λ the inverse
//! Mills ratio; both stay bounded in the deep tail. Standard errors come from
//! the inverse observed information at the optimum.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::design::DesignMatrix;
use crate::linalg::{cholesky, SymMat};
use crate::mathx;
use crate::{CoreError, Result};

/// Divergence bound for |β_j|·sd_j: a Probit index this size is numerically
/// saturated, so a coefficient passing it while the likelihood still improves
/// signals quasi-complete separation.
const SEPARATION_BOUND: f64 = 25.0;

#[derive(Debug, Clone)]
pub struct ProbitOptions {
    /// Convergence: infinity norm of the score.
    pub tol: f64,
    pub max_iter: u32,
}

impl Default for ProbitOptions {
    fn default() -> Self {
        ProbitOptions { tol: 1e-6, max_iter: 100 }
    }
}

/// Coefficients, observed-information standard errors, and fit diagnostics.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub z: Vec<f64>,
    pub p_value: Vec<f64>,
    pub loglik: f64,
    pub loglik_null: f64,
    pub pseudo_r2: f64,
    pub n_obs: usize,
    pub iterations: u32,
    pub grad_norm: f64,
    pub converged: bool,
    /// How the standard errors were obtained ("observed-information" or
    /// "bootstrap"); 2SRI naive SEs are not first-stage-corrected.
    pub se_method: String,
}

impl FitResult {
    pub fn coef(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.beta[i])
    }

    pub fn se_of(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.se[i])
    }
}

/// Log-likelihood at β.
pub fn loglik(design: &DesignMatrix, beta: &[f64]) -> f64 {
    let eta = design.linear_index(beta);
    let mut ll = 0.0;
    for (r, &e) in eta.iter().enumerate() {
        let t = if design.y[r] == 1.0 { e } else { -e };
        ll += mathx::log_norm_cdf(t);
    }
    ll
}

/// Score vector and observed information matrix at β.
pub fn score_and_information(design: &DesignMatrix, beta: &[f64]) -> (Vec<f64>, SymMat) {
    let eta = design.linear_index(beta);
    let n = design.n_rows;
    let mut w = vec![0.0; n];
    let mut g = vec![0.0; n];
    for r in 0..n {
        let sign = if design.y[r] == 1.0 { 1.0 } else { -1.0 };
        let t = sign * eta[r];
        let lam = mathx::inv_mills(t);
        g[r] = sign * lam;
        w[r] = lam * (lam + t);
    }
    let (info, grad) = design.weighted_accumulate(&w, Some(&g));
    (grad.unwrap(), info)
}

fn null_loglik(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let ones: f64 = y.iter().sum();
    let p = ones / n;
    ones * mathx::ln(p) + (n - ones) * mathx::ln(1.0 - p)
}

/// Fit the Probit MLE. Errors on a degenerate response, quasi-complete
/// separation, or failure to converge within `max_iter`.
pub fn probit_fit(design: &DesignMatrix, opts: &ProbitOptions) -> Result<FitResult> {
    design.check_response_varies()?;
    let p = design.n_cols();
    if p == 0 {
        return Err(CoreError::InvalidConfig("design has no columns".into()));
    }
    let scales = design.column_scales();

    let mut beta = vec![0.0; p];
    let mut ll = loglik(design, &beta);
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        let (grad, info) = score_and_information(design, &beta);
        grad_norm = grad.iter().fold(0.0f64, |m, &g| m.max(mathx::abs(g)));
        if grad_norm < opts.tol {
            converged = true;
            break;
        }
        let chol = cholesky(&info, "probit information")?;
        let delta = chol.solve(&grad);

        // Step-halving keeps the likelihood monotone up to evaluation noise
        // (near the optimum the true improvement drops below the round-off of
        // the LL sum itself).
        let slack = 1e-12 * (1.0 + mathx::abs(ll));
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> =
                beta.iter().zip(&delta).map(|(&b, &d)| b + step * d).collect();
            let ll_trial = loglik(design, &trial);
            if ll_trial.is_finite() && ll_trial >= ll - slack {
                beta = trial;
                ll = ll_trial.max(ll);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No uphill step found: treat the current point as the optimum if
            // the score is already tiny, otherwise report the stall.
            if grad_norm < opts.tol * 1e3 {
                converged = true;
                break;
            }
            return Err(CoreError::NoConvergence { iterations, grad_norm });
        }

        // Separation: a still-improving likelihood pushing a standardized
        // coefficient past the bound.
        for (j, &b) in beta.iter().enumerate() {
            let sd = scales[j].1;
            if sd > 0.0 && mathx::abs(b) * sd > SEPARATION_BOUND {
                return Err(CoreError::Separation(String::from(design.col_name(j))));
            }
        }
    }

    if !converged {
        let (grad, _) = score_and_information(design, &beta);
        grad_norm = grad.iter().fold(0.0f64, |m, &g| m.max(mathx::abs(g)));
        if grad_norm >= opts.tol {
            return Err(CoreError::NoConvergence { iterations, grad_norm });
        }
        converged = true;
    }

    // A likelihood at (numerically) zero is a perfect fit: the response is
    // completely separated by some combination of columns even though no
    // single standardized coefficient crossed the bound.
    if ll > -1e-6 {
        return Err(CoreError::Separation(String::from("(complete separation)")));
    }

    let (_, info) = score_and_information(design, &beta);
    let cov = cholesky(&info, "probit covariance")?.inverse();
    let se: Vec<f64> = (0..p).map(|j| mathx::sqrt(cov.get(j, j))).collect();
    let z: Vec<f64> = beta.iter().zip(&se).map(|(&b, &s)| if s > 0.0 { b / s } else { 0.0 }).collect();
    let p_value: Vec<f64> = z.iter().map(|&zj| 2.0 * mathx::norm_cdf(-mathx::abs(zj))).collect();
    let loglik_null = null_loglik(&design.y);
    let pseudo_r2 = 1.0 - ll / loglik_null;

    Ok(FitResult {
        names: design.col_names(),
        beta,
        se,
        z,
        p_value,
        loglik: ll,
        loglik_null,
        pseudo_r2,
        n_obs: design.n_rows,
        iterations,
        grad_norm,
        converged,
        se_method: String::from("observed-information"),
    })
}

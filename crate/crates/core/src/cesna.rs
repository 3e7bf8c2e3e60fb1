//! Attribute-aware overlapping community model on an ego-network.
//!
//! Model: nonnegative affiliations F (nodes × K) generate edges with
//! p(u,v) = 1 − exp(−F_u·F_v); binary attributes follow a logistic channel
//! σ(W_k·F_u + b_k). The fitted objective is
//!
//!   L = L_G + λ·L_X − ρ‖W‖₁
//!   L_G = Σ_{(u,v)∈E} ln(1 − exp(−F_u·F_v)) − Σ_{(u,v)∉E} F_u·F_v
//!   L_X = Σ_{u,k} x_{uk} ln σ_{uk} + (1 − x_{uk}) ln(1 − σ_{uk})
//!
//! maximized by block coordinate ascent: projected-gradient rows of F with
//! backtracking line search (clamped at zero), then a proximal gradient step
//! on (W, b) with soft-thresholding for the L1 penalty. Ego-networks are small,
//! so the non-edge term is computed exactly via the sum-of-rows identity; no
//! sampling approximation. Cross-validation holds out node pairs and attribute
//! entries to pick K.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::LocalGraph;
use crate::mathx;
use crate::rng::{derive_seed, Rng};
use crate::{CoreError, Result};

/// Dot products below this floor are treated as the floor inside edge terms,
/// which keeps the objective finite and gradients bounded at F = 0.
const S_MIN: f64 = 1e-10;
const MAX_HALVINGS: u32 = 30;

#[derive(Debug, Clone)]
pub struct CesnaHyper {
    /// Weight of the attribute likelihood.
    pub lambda: f64,
    /// L1 penalty on the attribute weights W (not on intercepts).
    pub rho: f64,
    /// Stop when |Δobjective| / (1 + |objective|) falls below this.
    pub tol: f64,
    pub max_iter: u32,
    /// Seed F from low-conductance neighborhoods instead of uniform noise.
    pub conductance_init: bool,
}

impl Default for CesnaHyper {
    fn default() -> Self {
        CesnaHyper { lambda: 1.0, rho: 0.1, tol: 1e-4, max_iter: 500, conductance_init: false }
    }
}

/// Fitted affiliation strengths and attribute weights.
#[derive(Debug, Clone, PartialEq)]
pub struct AffiliationModel {
    pub n: usize,
    pub k: usize,
    pub n_attrs: usize,
    /// n × k row-major, elementwise ≥ 0.
    pub f: Vec<f64>,
    /// n_attrs × k row-major.
    pub w: Vec<f64>,
    /// Per-attribute intercept.
    pub b: Vec<f64>,
}

impl AffiliationModel {
    #[inline]
    pub fn f_row(&self, u: usize) -> &[f64] {
        &self.f[u * self.k..(u + 1) * self.k]
    }

    pub fn edge_prob(&self, u: usize, v: usize) -> f64 {
        let s = dot(self.f_row(u), self.f_row(v));
        -mathx::expm1(-s)
    }

    pub fn attr_prob(&self, u: usize, attr: usize) -> f64 {
        let w = &self.w[attr * self.k..(attr + 1) * self.k];
        mathx::sigmoid(dot(w, self.f_row(u)) + self.b[attr])
    }
}

/// Convergence record of one fit.
#[derive(Debug, Clone)]
pub struct FitInfo {
    pub objective: f64,
    pub iterations: u32,
    pub converged: bool,
    /// Full objective after every iteration (non-decreasing up to round-off).
    pub trajectory: Vec<f64>,
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn pair_index(n: usize, u: usize, v: usize) -> usize {
    debug_assert!(u < v && v < n);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

/// Fold assignment over node pairs and attribute entries for cross-validation.
#[derive(Debug, Clone)]
pub struct HoldoutMask {
    n: usize,
    n_attrs: usize,
    pub folds: u32,
    pair_fold: Vec<u8>,
    attr_fold: Vec<u8>,
}

impl HoldoutMask {
    pub fn new(n: usize, n_attrs: usize, folds: u32, seed: u64) -> Self {
        let mut rng = Rng::seed_from(seed);
        let pair_fold = (0..n * n.saturating_sub(1) / 2)
            .map(|_| rng.below(folds) as u8)
            .collect();
        let attr_fold = (0..n * n_attrs).map(|_| rng.below(folds) as u8).collect();
        HoldoutMask { n, n_attrs, folds, pair_fold, attr_fold }
    }

    #[inline]
    fn pair(&self, u: usize, v: usize) -> u8 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.pair_fold[pair_index(self.n, a, b)]
    }

    #[inline]
    fn attr(&self, u: usize, k: usize) -> u8 {
        self.attr_fold[u * self.n_attrs + k]
    }
}

/// Pair/entry visibility during one fit: everything, or all but one fold.
#[derive(Clone, Copy)]
struct View<'m> {
    mask: Option<(&'m HoldoutMask, u8)>,
}

impl View<'_> {
    #[inline]
    fn sees_pair(&self, u: usize, v: usize) -> bool {
        match self.mask {
            None => true,
            Some((m, held)) => m.pair(u, v) != held,
        }
    }

    #[inline]
    fn sees_attr(&self, u: usize, k: usize) -> bool {
        match self.mask {
            None => true,
            Some((m, held)) => m.attr(u, k) != held,
        }
    }
}

struct Workspace<'a> {
    graph: &'a LocalGraph,
    attrs: &'a [Vec<u8>],
    k: usize,
    n_attrs: usize,
    lambda: f64,
    view: View<'a>,
    /// Per-node partners hidden by the mask (empty when unmasked).
    hidden: Vec<Vec<u32>>,
}

impl<'a> Workspace<'a> {
    fn new(graph: &'a LocalGraph, attrs: &'a [Vec<u8>], k: usize, lambda: f64, view: View<'a>) -> Self {
        let n = graph.n;
        let n_attrs = attrs.first().map_or(0, Vec::len);
        let mut hidden = vec![Vec::new(); n];
        if let Some((mask, held)) = view.mask {
            for u in 0..n {
                for v in (u + 1)..n {
                    if mask.pair(u, v) == held {
                        hidden[u].push(v as u32);
                        hidden[v].push(u as u32);
                    }
                }
            }
        }
        Workspace { graph, attrs, k, n_attrs, lambda, view, hidden }
    }

    #[inline]
    fn f_row<'f>(&self, f: &'f [f64], u: usize) -> &'f [f64] {
        &f[u * self.k..(u + 1) * self.k]
    }

    fn is_edge(&self, u: usize, v: usize) -> bool {
        self.graph.adj[u].binary_search(&(v as u32)).is_ok()
    }

    /// Visible-graph log-likelihood L_G.
    fn loglik_graph(&self, f: &[f64], sum_f: &[f64]) -> f64 {
        let n = self.graph.n;
        let mut edge_ll = 0.0;
        let mut edge_dot_all = 0.0;
        for &(u, v) in &self.graph.edges {
            let s = dot(self.f_row(f, u as usize), self.f_row(f, v as usize));
            edge_dot_all += s;
            if self.view.sees_pair(u as usize, v as usize) {
                edge_ll += mathx::ln_1m_exp_neg(s.max(S_MIN));
            }
        }
        // Σ_{u<v} F_u·F_v = (‖ΣF‖² − Σ‖F_u‖²) / 2, then peel off edges and
        // hidden non-edge pairs to leave the visible non-edge mass.
        let total_sq = dot(sum_f, sum_f);
        let mut rows_sq = 0.0;
        for u in 0..n {
            let r = self.f_row(f, u);
            rows_sq += dot(r, r);
        }
        let mut hidden_nonedge_dot = 0.0;
        for (u, partners) in self.hidden.iter().enumerate() {
            for &v in partners {
                let v = v as usize;
                if u < v && !self.is_edge(u, v) {
                    hidden_nonedge_dot += dot(self.f_row(f, u), self.f_row(f, v));
                }
            }
        }
        let nonedge_dot = (total_sq - rows_sq) / 2.0 - edge_dot_all - hidden_nonedge_dot;
        edge_ll - nonedge_dot
    }

    /// Visible attribute log-likelihood L_X (unweighted).
    fn loglik_attrs(&self, f: &[f64], w: &[f64], b: &[f64]) -> f64 {
        let mut ll = 0.0;
        for u in 0..self.graph.n {
            let fu = self.f_row(f, u);
            for a in 0..self.n_attrs {
                if !self.view.sees_attr(u, a) {
                    continue;
                }
                let z = dot(&w[a * self.k..(a + 1) * self.k], fu) + b[a];
                ll += if self.attrs[u][a] == 1 {
                    mathx::log_sigmoid(z)
                } else {
                    mathx::log_sigmoid(-z)
                };
            }
        }
        ll
    }

    fn penalty(&self, w: &[f64], rho: f64) -> f64 {
        rho * w.iter().map(|x| mathx::abs(*x)).sum::<f64>()
    }

    fn objective(&self, f: &[f64], sum_f: &[f64], w: &[f64], b: &[f64], rho: f64) -> f64 {
        self.loglik_graph(f, sum_f) + self.lambda * self.loglik_attrs(f, w, b) - self.penalty(w, rho)
    }

    /// Gradient of L_G + λ·L_X with respect to row F_u.
    fn grad_row(&self, u: usize, f: &[f64], sum_f: &[f64], w: &[f64], b: &[f64], out: &mut [f64]) {
        let fu = self.f_row(f, u);
        // Non-edge push: −Σ_{v visible non-neighbor} F_v, assembled by
        // subtracting neighbors and hidden non-edges from the total.
        for c in 0..self.k {
            out[c] = -(sum_f[c] - fu[c]);
        }
        for &v in &self.graph.adj[u] {
            let fv = self.f_row(f, v as usize);
            for c in 0..self.k {
                out[c] += fv[c];
            }
            if self.view.sees_pair(u, v as usize) {
                let s = dot(fu, fv).max(S_MIN);
                let r = 1.0 / mathx::expm1(s);
                for c in 0..self.k {
                    out[c] += fv[c] * r;
                }
            }
        }
        for &v in &self.hidden[u] {
            if !self.is_edge(u, v as usize) {
                let fv = self.f_row(f, v as usize);
                for c in 0..self.k {
                    out[c] += fv[c];
                }
            }
        }
        // Attribute channel.
        for a in 0..self.n_attrs {
            if !self.view.sees_attr(u, a) {
                continue;
            }
            let wa = &w[a * self.k..(a + 1) * self.k];
            let z = dot(wa, fu) + b[a];
            let resid = self.attrs[u][a] as f64 - mathx::sigmoid(z);
            for c in 0..self.k {
                out[c] += self.lambda * resid * wa[c];
            }
        }
    }

    /// Objective terms that involve row u only (for the row line search).
    /// `nonedge_sum` is Σ_{v visible non-neighbor of u} F_v, precomputed.
    fn local_row_objective(
        &self,
        u: usize,
        row: &[f64],
        f: &[f64],
        nonedge_sum: &[f64],
        w: &[f64],
        b: &[f64],
    ) -> f64 {
        let mut obj = -dot(row, nonedge_sum);
        for &v in &self.graph.adj[u] {
            if self.view.sees_pair(u, v as usize) {
                let s = dot(row, self.f_row(f, v as usize));
                obj += mathx::ln_1m_exp_neg(s.max(S_MIN));
            }
        }
        for a in 0..self.n_attrs {
            if !self.view.sees_attr(u, a) {
                continue;
            }
            let z = dot(&w[a * self.k..(a + 1) * self.k], row) + b[a];
            obj += self.lambda
                * if self.attrs[u][a] == 1 { mathx::log_sigmoid(z) } else { mathx::log_sigmoid(-z) };
        }
        obj
    }

    fn nonedge_sum(&self, u: usize, f: &[f64], sum_f: &[f64], out: &mut [f64]) {
        let fu = self.f_row(f, u);
        for c in 0..self.k {
            out[c] = sum_f[c] - fu[c];
        }
        for &v in &self.graph.adj[u] {
            let fv = self.f_row(f, v as usize);
            for c in 0..self.k {
                out[c] -= fv[c];
            }
        }
        for &v in &self.hidden[u] {
            if !self.is_edge(u, v as usize) {
                let fv = self.f_row(f, v as usize);
                for c in 0..self.k {
                    out[c] -= fv[c];
                }
            }
        }
    }

    /// Gradient of λ·L_X with respect to W and b.
    fn grad_w_b(&self, f: &[f64], w: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut gw = vec![0.0; self.n_attrs * self.k];
        let mut gb = vec![0.0; self.n_attrs];
        for u in 0..self.graph.n {
            let fu = self.f_row(f, u);
            for a in 0..self.n_attrs {
                if !self.view.sees_attr(u, a) {
                    continue;
                }
                let z = dot(&w[a * self.k..(a + 1) * self.k], fu) + b[a];
                let resid = (self.attrs[u][a] as f64 - mathx::sigmoid(z)) * self.lambda;
                for c in 0..self.k {
                    gw[a * self.k + c] += resid * fu[c];
                }
                gb[a] += resid;
            }
        }
        (gw, gb)
    }
}

fn conductance_seeds(graph: &LocalGraph, k: usize) -> Vec<usize> {
    let n = graph.n;
    let total_vol: usize = graph.adj.iter().map(Vec::len).sum();
    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|u| {
            let mut members: Vec<u32> = graph.adj[u].clone();
            members.push(u as u32);
            members.sort_unstable();
            let mut vol = 0usize;
            let mut cut = 0usize;
            for &m in &members {
                for &v in &graph.adj[m as usize] {
                    vol += 1;
                    if members.binary_search(&v).is_err() {
                        cut += 1;
                    }
                }
            }
            let denom = vol.min(total_vol - vol).max(1);
            (cut as f64 / denom as f64, u)
        })
        .collect();
    scored.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scored.into_iter().take(k).map(|(_, u)| u).collect()
}

/// Fit the model with everything visible.
pub fn fit(
    graph: &LocalGraph,
    attrs: &[Vec<u8>],
    k: usize,
    seed: u64,
    hyper: &CesnaHyper,
) -> Result<(AffiliationModel, FitInfo)> {
    fit_masked(graph, attrs, k, seed, hyper, None)
}

/// Fit with one cross-validation fold hidden from the likelihood.
pub fn fit_masked(
    graph: &LocalGraph,
    attrs: &[Vec<u8>],
    k: usize,
    seed: u64,
    hyper: &CesnaHyper,
    mask: Option<(&HoldoutMask, u8)>,
) -> Result<(AffiliationModel, FitInfo)> {
    let n = graph.n;
    if n < 2 {
        return Err(CoreError::EgoTooSmall { members: n, needed: 2 });
    }
    if k == 0 {
        return Err(CoreError::InvalidConfig("K must be at least 1".into()));
    }
    if attrs.len() != n {
        return Err(CoreError::InvalidConfig("attribute rows must match member count".into()));
    }

    let ws = Workspace::new(graph, attrs, k, hyper.lambda, View { mask });
    let n_attrs = ws.n_attrs;
    let mut rng = Rng::seed_from(seed);

    let mut f = vec![0.0; n * k];
    for x in f.iter_mut() {
        *x = rng.f64() / k as f64;
    }
    if hyper.conductance_init {
        for (c, seed_node) in conductance_seeds(graph, k).into_iter().enumerate() {
            f[seed_node * k + c] = 1.0;
            for &v in &graph.adj[seed_node] {
                f[v as usize * k + c] = 1.0;
            }
        }
    }
    let mut w = vec![0.0; n_attrs * k];
    let mut b = vec![0.0; n_attrs];

    let mut sum_f = vec![0.0; k];
    for u in 0..n {
        for c in 0..k {
            sum_f[c] += f[u * k + c];
        }
    }

    let mut row_step = vec![0.25f64; n];
    let mut w_step = 0.25f64;
    let mut grad = vec![0.0; k];
    let mut nonedge = vec![0.0; k];
    let mut candidate = vec![0.0; k];

    let mut objective = ws.objective(&f, &sum_f, &w, &b, hyper.rho);
    if !objective.is_finite() {
        return Err(CoreError::Diverged { iteration: 0 });
    }
    let mut trajectory = Vec::with_capacity(16);
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=hyper.max_iter {
        iterations = iter;
        // Block 1: projected gradient ascent on each row of F.
        for u in 0..n {
            ws.grad_row(u, &f, &sum_f, &w, &b, &mut grad);
            ws.nonedge_sum(u, &f, &sum_f, &mut nonedge);
            let current = ws.local_row_objective(u, ws.f_row(&f, u), &f, &nonedge, &w, &b);
            // A row with no visible edge terms can tie with the zero row
            // (e.g. disjoint supports on an empty graph); canonicalize such
            // ties to the minimal-norm solution so affiliations die out.
            let has_visible_edge = ws.graph.adj[u].iter().any(|&v| ws.view.sees_pair(u, v as usize));
            if !has_visible_edge {
                for c in candidate.iter_mut() {
                    *c = 0.0;
                }
                if ws.local_row_objective(u, &candidate, &f, &nonedge, &w, &b) >= current {
                    for c in 0..k {
                        sum_f[c] -= f[u * k + c];
                        f[u * k + c] = 0.0;
                    }
                    continue;
                }
            }
            let mut eta = (row_step[u] * 2.0).min(1.0);
            let mut accepted = false;
            for _ in 0..MAX_HALVINGS {
                for c in 0..k {
                    candidate[c] = (f[u * k + c] + eta * grad[c]).max(0.0);
                }
                let trial = ws.local_row_objective(u, &candidate, &f, &nonedge, &w, &b);
                if trial.is_finite() && trial >= current {
                    for c in 0..k {
                        sum_f[c] += candidate[c] - f[u * k + c];
                        f[u * k + c] = candidate[c];
                    }
                    row_step[u] = eta;
                    accepted = true;
                    break;
                }
                eta *= 0.5;
            }
            if !accepted {
                row_step[u] = (row_step[u] * 0.5).max(1e-12);
            }
        }

        // Block 2: proximal gradient step on (W, b) with soft-thresholding.
        if n_attrs > 0 && hyper.lambda > 0.0 {
            let (gw, gb) = ws.grad_w_b(&f, &w, &b);
            let current = hyper.lambda * ws.loglik_attrs(&f, &w, &b) - ws.penalty(&w, hyper.rho);
            let mut eta = (w_step * 2.0).min(1.0);
            for _ in 0..MAX_HALVINGS {
                let thresh = eta * hyper.rho;
                let w_new: Vec<f64> = w
                    .iter()
                    .zip(&gw)
                    .map(|(&wi, &gi)| {
                        let z = wi + eta * gi;
                        if z > thresh {
                            z - thresh
                        } else if z < -thresh {
                            z + thresh
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let b_new: Vec<f64> = b.iter().zip(&gb).map(|(&bi, &gi)| bi + eta * gi).collect();
                let trial =
                    hyper.lambda * ws.loglik_attrs(&f, &w_new, &b_new) - ws.penalty(&w_new, hyper.rho);
                if trial.is_finite() && trial >= current {
                    w = w_new;
                    b = b_new;
                    w_step = eta;
                    break;
                }
                eta *= 0.5;
            }
        }

        let new_objective = ws.objective(&f, &sum_f, &w, &b, hyper.rho);
        if !new_objective.is_finite() {
            return Err(CoreError::Diverged { iteration: iter });
        }
        debug_assert!(
            new_objective >= objective - 1e-8 * (1.0 + mathx::abs(objective)),
            "objective decreased: {objective} -> {new_objective}"
        );
        trajectory.push(new_objective);
        let rel = mathx::abs(new_objective - objective) / (1.0 + mathx::abs(objective));
        objective = new_objective;
        if rel < hyper.tol {
            converged = true;
            break;
        }
    }

    Ok((
        AffiliationModel { n, k, n_attrs, f, w, b },
        FitInfo { objective, iterations, converged, trajectory },
    ))
}

/// Model log-likelihood pieces (L_G, L_X) at arbitrary parameter values;
/// the verification entry point for gradient checks.
pub fn loglik_parts(
    graph: &LocalGraph,
    attrs: &[Vec<u8>],
    k: usize,
    f: &[f64],
    w: &[f64],
    b: &[f64],
) -> (f64, f64) {
    let ws = Workspace::new(graph, attrs, k, 1.0, View { mask: None });
    let mut sum_f = vec![0.0; k];
    for u in 0..graph.n {
        for c in 0..k {
            sum_f[c] += f[u * k + c];
        }
    }
    (ws.loglik_graph(f, &sum_f), ws.loglik_attrs(f, w, b))
}

/// Analytic gradients of L_G + λ·L_X wrt F (row-major n×k) and of λ·L_X wrt
/// (W, b), at arbitrary parameter values.
pub fn gradients(
    graph: &LocalGraph,
    attrs: &[Vec<u8>],
    k: usize,
    lambda: f64,
    f: &[f64],
    w: &[f64],
    b: &[f64],
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let ws = Workspace::new(graph, attrs, k, lambda, View { mask: None });
    let mut sum_f = vec![0.0; k];
    for u in 0..graph.n {
        for c in 0..k {
            sum_f[c] += f[u * k + c];
        }
    }
    let mut grad_f = vec![0.0; graph.n * k];
    let mut row = vec![0.0; k];
    for u in 0..graph.n {
        ws.grad_row(u, f, &sum_f, w, b, &mut row);
        grad_f[u * k..(u + 1) * k].copy_from_slice(&row);
    }
    let (gw, gb) = ws.grad_w_b(f, w, b);
    (grad_f, gw, gb)
}

/// Held-out log-likelihood of one fold: edge terms plus λ-weighted attribute
/// terms, mirroring the training objective.
pub fn heldout_loglik(
    model: &AffiliationModel,
    graph: &LocalGraph,
    attrs: &[Vec<u8>],
    mask: &HoldoutMask,
    fold: u8,
    lambda: f64,
) -> f64 {
    let n = graph.n;
    let mut ll = 0.0;
    for u in 0..n {
        for v in (u + 1)..n {
            if mask.pair(u, v) != fold {
                continue;
            }
            let s = dot(model.f_row(u), model.f_row(v));
            if graph.adj[u].binary_search(&(v as u32)).is_ok() {
                ll += mathx::ln_1m_exp_neg(s.max(S_MIN));
            } else {
                ll -= s;
            }
        }
        for a in 0..model.n_attrs {
            if mask.attr(u, a) != fold {
                continue;
            }
            let z = dot(&model.w[a * model.k..(a + 1) * model.k], model.f_row(u)) + model.b[a];
            ll += lambda
                * if attrs[u][a] == 1 { mathx::log_sigmoid(z) } else { mathx::log_sigmoid(-z) };
        }
    }
    ll
}

/// Pick K from `k_grid` by cross-validated held-out log-likelihood; ties go to
/// the smallest K. Returns the winner and the per-K mean held-out scores.
pub fn select_k(
    graph: &LocalGraph,
    attrs: &[Vec<u8>],
    k_grid: &[usize],
    folds: u32,
    seed: u64,
    hyper: &CesnaHyper,
) -> Result<(usize, Vec<(usize, f64)>)> {
    if k_grid.is_empty() {
        return Err(CoreError::EmptyKGrid);
    }
    let mut grid: Vec<usize> = k_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    if grid[0] == 0 {
        return Err(CoreError::InvalidConfig("K grid contains 0".into()));
    }
    if grid.len() == 1 {
        return Ok((grid[0], vec![(grid[0], 0.0)]));
    }
    if folds < 2 {
        return Err(CoreError::InvalidConfig("cross-validation needs at least 2 folds".into()));
    }
    let n = graph.n;
    let n_pairs = n * n.saturating_sub(1) / 2;
    if n < 3 || n_pairs < folds as usize {
        return Err(CoreError::EgoTooSmall { members: n, needed: 3.max(folds as usize) });
    }

    let n_attrs = attrs.first().map_or(0, Vec::len);
    let mask = HoldoutMask::new(n, n_attrs, folds, derive_seed(seed, 0x6f1d));
    let mut scores = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, f64)> = None;
    for &k in &grid {
        let mut mean = 0.0;
        for fold in 0..folds {
            let fit_seed = derive_seed(seed, ((k as u64) << 16) | fold as u64);
            let (model, _) = fit_masked(graph, attrs, k, fit_seed, hyper, Some((&mask, fold as u8)))?;
            mean += heldout_loglik(&model, graph, attrs, &mask, fold as u8, hyper.lambda);
        }
        mean /= folds as f64;
        scores.push((k, mean));
        match best {
            Some((_, s)) if mean <= s => {}
            _ => best = Some((k, mean)),
        }
    }
    Ok((best.unwrap().0, scores))
}

//! ε-insensitive support vector regression with an RBF kernel.
//!
//! The dual is solved in the doubled form used by LIBSVM: variables
//! `β = (α, α*)` of length `2n`, labels `y = (+1, …, -1, …)`, and
//!
//! ```text
//! min  ½ βᵀQβ + pᵀβ    s.t.  yᵀβ = 0,  0 ≤ β ≤ C
//! Q_st = y_s y_t K(x_s, x_t),   p = (ε − z, ε + z)
//! ```
//!
//! Pairs are chosen by maximal violation (`i` maximises `-y_t ∇_t` over the
//! up-set, `j` minimises it over the low-set, lowest index on ties) and
//! updated analytically. Training stops once the violation gap drops below
//! the tolerance. The regression function is `f(x) = Σ (α_i − α_i*) K(x_i, x) + b`.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::timeseries::{ScalingParams, SupervisedMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SvrError {
    #[error("invalid SVR parameter: {0}")]
    InvalidParams(&'static str),
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("training matrix has no feature columns")]
    NoFeatures,
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Penalty `C`, tube half-width `epsilon`, kernel width `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvrParams {
    #[cfg_attr(feature = "serde", serde(rename = "C"))]
    pub c: f64,
    pub epsilon: f64,
    pub gamma: f64,
}

impl SvrParams {
    pub fn new(c: f64, epsilon: f64, gamma: f64) -> Result<Self, SvrError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(SvrError::InvalidParams("C must be positive"));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(SvrError::InvalidParams("epsilon must be non-negative"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(SvrError::InvalidParams("gamma must be positive"));
        }
        Ok(Self { c, epsilon, gamma })
    }

    /// `C = 1`, `ε = 0.1`, `γ = 1 / n_features`.
    pub fn defaults_for(n_features: usize) -> Self {
        Self {
            c: 1.0,
            epsilon: 0.1,
            gamma: 1.0 / n_features.max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop when the maximal violating pair's gap falls below this.
    pub tolerance: f64,
    /// Iteration cap; `None` means `10_000 · n`.
    pub max_iterations: Option<usize>,
    /// Materialise the kernel matrix up to this many rows.
    pub dense_kernel_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            max_iterations: None,
            dense_kernel_limit: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SvrModel {
    pub support_vectors: Vec<Vec<f64>>,
    /// `α_i − α_i*` per support vector, all non-zero.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub params: SvrParams,
    /// Training-row index of each support vector.
    pub support_indices: Vec<usize>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub scaling: Option<ScalingParams>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainReport {
    pub iterations: usize,
    /// Final gap `max_up(-y∇) − min_low(-y∇)`.
    pub max_kkt_violation: f64,
    /// Dual objective `½ βᵀQβ + pᵀβ` at the returned point.
    pub objective: f64,
    pub converged: bool,
}

/// `exp(-γ‖x1 − x2‖²)`.
pub fn rbf_kernel(x1: &[f64], x2: &[f64], gamma: f64) -> Result<f64, SvrError> {
    if x1.len() != x2.len() {
        return Err(SvrError::DimensionMismatch {
            expected: x1.len(),
            found: x2.len(),
        });
    }
    Ok(rbf(x1, x2, gamma))
}

fn rbf(x1: &[f64], x2: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x1.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    libm::exp(-gamma * d2)
}

impl SvrModel {
    /// A model with no support vectors; predicts `bias` everywhere.
    pub fn constant(bias: f64, params: SvrParams) -> Self {
        Self {
            support_vectors: Vec::new(),
            dual_coefs: Vec::new(),
            bias,
            params,
            support_indices: Vec::new(),
            scaling: None,
        }
    }

    pub fn n_support(&self) -> usize {
        self.dual_coefs.len()
    }

    pub fn dim(&self) -> Option<usize> {
        self.support_vectors.first().map(Vec::len)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64, SvrError> {
        if let Some(d) = self.dim() {
            if d != x.len() {
                return Err(SvrError::DimensionMismatch {
                    expected: d,
                    found: x.len(),
                });
            }
        }
        Ok(self.decision(x))
    }

    fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, &c)| c * rbf(sv, x, self.params.gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn predict_matrix(&self, m: &SupervisedMatrix) -> Result<Vec<f64>, SvrError> {
        m.rows().map(|r| self.predict(r)).collect()
    }
}

enum Gram<'a> {
    Dense(Vec<f64>),
    Lazy(&'a SupervisedMatrix),
}

struct Smo<'a> {
    x: &'a SupervisedMatrix,
    gram: Gram<'a>,
    n: usize,
    c: f64,
    gamma: f64,
    /// `p` of the doubled problem.
    linear: Vec<f64>,
    alpha: Vec<f64>,
    grad: Vec<f64>,
    row_i: Vec<f64>,
    row_j: Vec<f64>,
}

#[inline]
fn label(t: usize, n: usize) -> f64 {
    if t < n {
        1.0
    } else {
        -1.0
    }
}

enum Selection {
    Optimal { gap: f64 },
    Pair { i: usize, j: usize, gap: f64 },
}

impl<'a> Smo<'a> {
    fn new(x: &'a SupervisedMatrix, params: &SvrParams, dense_limit: usize) -> Self {
        let n = x.n_rows();
        let gram = if n <= dense_limit {
            let mut k = vec![0.0; n * n];
            for a in 0..n {
                k[a * n + a] = 1.0;
                for b in 0..a {
                    let v = rbf(x.row(a), x.row(b), params.gamma);
                    k[a * n + b] = v;
                    k[b * n + a] = v;
                }
            }
            Gram::Dense(k)
        } else {
            Gram::Lazy(x)
        };
        let z = x.targets();
        let linear: Vec<f64> = z
            .iter()
            .map(|&zi| params.epsilon - zi)
            .chain(z.iter().map(|&zi| params.epsilon + zi))
            .collect();
        Self {
            x,
            gram,
            n,
            c: params.c,
            gamma: params.gamma,
            grad: linear.clone(),
            linear,
            alpha: vec![0.0; 2 * n],
            row_i: vec![0.0; n],
            row_j: vec![0.0; n],
        }
    }

    fn kernel_row(&self, p: usize, out: &mut [f64]) {
        match &self.gram {
            Gram::Dense(k) => out.copy_from_slice(&k[p * self.n..(p + 1) * self.n]),
            Gram::Lazy(x) => {
                for (q, o) in out.iter_mut().enumerate() {
                    *o = rbf(x.row(p), x.row(q), self.gamma);
                }
            }
        }
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.n {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.n {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    fn select(&self, tol: f64) -> Selection {
        let (mut gmax, mut i) = (f64::NEG_INFINITY, usize::MAX);
        let (mut gmin, mut j) = (f64::INFINITY, usize::MAX);
        for t in 0..2 * self.n {
            let v = -label(t, self.n) * self.grad[t];
            if self.in_up(t) && v > gmax {
                gmax = v;
                i = t;
            }
            if self.in_low(t) && v < gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < tol {
            Selection::Optimal { gap: gap.max(0.0) }
        } else {
            Selection::Pair { i, j, gap }
        }
    }

    /// Analytic two-variable update followed by gradient maintenance.
    fn update(&mut self, i: usize, j: usize) {
        let n = self.n;
        let (yi, yj) = (label(i, n), label(j, n));
        let (pi, pj) = (i % n, j % n);
        let mut ri = core::mem::take(&mut self.row_i);
        let mut rj = core::mem::take(&mut self.row_j);
        self.kernel_row(pi, &mut ri);
        self.kernel_row(pj, &mut rj);
        let kij = ri[pj];
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let (mut ai, mut aj) = (old_i, old_j);
        const TAU: f64 = 1e-12;

        if yi != yj {
            // Q_ij = -K_ij
            let mut quad = ri[pi] + rj[pj] + 2.0 * (-kij);
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let mut quad = ri[pi] + rj[pj] - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;

        // Q_tk Δ_t summed into ∇; rows of Q are ±K rows.
        let si = yi * (ai - old_i);
        let sj = yj * (aj - old_j);
        for p in 0..n {
            let s = si * ri[p] + sj * rj[p];
            self.grad[p] += s;
            self.grad[p + n] -= s;
        }
        self.row_i = ri;
        self.row_j = rj;

        // Both α_p and α_p* positive can always be reduced by their minimum:
        // α − α* and hence ∇ are unchanged, and the objective drops by 2ε·min.
        for p in [pi, pj] {
            let m = self.alpha[p].min(self.alpha[p + n]);
            if m > 0.0 {
                self.alpha[p] -= m;
                self.alpha[p + n] -= m;
            }
        }
    }

    fn objective(&self) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(self.grad.iter().zip(&self.linear))
            .map(|(a, (g, p))| a * (g + p))
            .sum::<f64>()
    }

    fn bias(&self) -> f64 {
        let n = self.n;
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut free, mut sum) = (0usize, 0.0);
        for t in 0..2 * n {
            let y = label(t, n);
            let yg = y * self.grad[t];
            let a = self.alpha[t];
            if a >= self.c {
                if y < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if a <= 0.0 {
                if y > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        let rho = if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        };
        -rho
    }

    fn coefficients(&self) -> Vec<f64> {
        (0..self.n)
            .map(|p| self.alpha[p] - self.alpha[p + self.n])
            .collect()
    }

    fn into_model(self, params: SvrParams) -> SvrModel {
        let bias = self.bias();
        let mut model = SvrModel::constant(bias, params);
        for (p, coef) in self.coefficients().into_iter().enumerate() {
            if coef != 0.0 {
                model.support_vectors.push(self.x.row(p).to_vec());
                model.dual_coefs.push(coef);
                model.support_indices.push(p);
            }
        }
        model
    }
}

/// Trains with [`SolverOptions::default`].
pub fn train_svr(
    train: &SupervisedMatrix,
    params: &SvrParams,
) -> Result<(SvrModel, TrainReport), SvrError> {
    train_svr_with(train, params, &SolverOptions::default())
}

/// Trains an ε-SVR. Hitting the iteration cap is not an error: the current
/// iterate is returned with `converged = false`.
pub fn train_svr_with(
    train: &SupervisedMatrix,
    params: &SvrParams,
    options: &SolverOptions,
) -> Result<(SvrModel, TrainReport), SvrError> {
    SvrParams::new(params.c, params.epsilon, params.gamma)?;
    if train.n_rows() < 2 {
        return Err(SvrError::TooFewRows(train.n_rows()));
    }
    if train.n_cols() == 0 {
        return Err(SvrError::NoFeatures);
    }
    let mut smo = Smo::new(train, params, options.dense_kernel_limit);
    let cap = options.max_iterations.unwrap_or(10_000 * train.n_rows());
    let mut iterations = 0;
    let (gap, converged) = loop {
        match smo.select(options.tolerance) {
            Selection::Optimal { gap } => break (gap, true),
            Selection::Pair { i, j, gap } => {
                if iterations >= cap {
                    break (gap, false);
                }
                smo.update(i, j);
                iterations += 1;
            }
        }
    };
    if !converged {
        log::warn!("SMO stopped at the iteration cap ({cap}) with gap {gap:.3e}");
    }
    let report = TrainReport {
        iterations,
        max_kkt_violation: gap,
        objective: smo.objective(),
        converged,
    };
    Ok((smo.into_model(*params), report))
}

/// Largest violation of the ε-SVR optimality conditions over the training
/// rows, measured on residuals `r = z − f(x)`:
///
/// - coefficient 0: `|r| ≤ ε`
/// - coefficient in `(0, C)`: `r = ε`; in `(−C, 0)`: `r = −ε`
/// - coefficient `C`: `r ≥ ε`; `−C`: `r ≤ −ε`
pub fn kkt_max_violation(model: &SvrModel, train: &SupervisedMatrix) -> f64 {
    let mut coefs = vec![0.0; train.n_rows()];
    for (&idx, &c) in model.support_indices.iter().zip(&model.dual_coefs) {
        if let Some(slot) = coefs.get_mut(idx) {
            *slot = c;
        }
    }
    let eps = model.params.epsilon;
    let at_bound = model.params.c * (1.0 - 1e-12);
    train
        .rows()
        .zip(train.targets())
        .zip(coefs)
        .map(|((x, &z), c)| {
            let r = z - model.decision(x);
            if c == 0.0 {
                (r.abs() - eps).max(0.0)
            } else if c >= at_bound {
                (eps - r).max(0.0)
            } else if c <= -at_bound {
                (r + eps).max(0.0)
            } else if c > 0.0 {
                (r - eps).abs()
            } else {
                (r + eps).abs()
            }
        })
        .fold(0.0, f64::max)
}

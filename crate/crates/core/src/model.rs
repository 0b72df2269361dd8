//! Queueing instance, weight vectors and the rate matrices of the DPS
//! sojourn-time equations.
//!
//! Classes are stored 0-based. Anything user facing (errors, the [`sigma`]
//! accessor) uses 1-based class numbers, so class 1 is always the class with
//! the largest service rate.

use crate::error::{usage, DpsError, Result};
use crate::linalg::Matrix;
use crate::scalar::{rel_close, sum, Scalar};

/// Instances with `rho >= 1 - STABILITY_MARGIN` are rejected as unstable.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// An M-class queue with Poisson arrivals and exponential service.
///
/// Service rates must be sorted nonincreasing; unsorted input is an error
/// rather than being permuted, so weight vectors stay aligned with classes.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<T> {
    lambda: Vec<T>,
    mu: Vec<T>,
}

impl<T: Scalar> SystemParams<T> {
    pub fn new(lambda: Vec<T>, mu: Vec<T>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(usage("at least one class is required"));
        }
        if lambda.len() != mu.len() {
            return Err(usage(format!(
                "{} arrival rates but {} service rates",
                lambda.len(),
                mu.len()
            )));
        }
        for (k, (&l, &m)) in lambda.iter().zip(&mu).enumerate() {
            if !(l.is_finite() && l > T::zero()) {
                return Err(usage(format!(
                    "class {}: arrival rate must be finite and positive, got {l}",
                    k + 1
                )));
            }
            if !(m.is_finite() && m > T::zero()) {
                return Err(usage(format!(
                    "class {}: service rate must be finite and positive, got {m}",
                    k + 1
                )));
            }
        }
        if let Some(k) = mu.windows(2).position(|w| w[1] > w[0]) {
            return Err(usage(format!(
                "service rates must be nonincreasing: mu_{} = {} < mu_{} = {}",
                k + 1,
                mu[k],
                k + 2,
                mu[k + 1]
            )));
        }
        let params = Self { lambda, mu };
        let rho = params.load();
        let limit = 1.0 - STABILITY_MARGIN;
        if rho.is_nan() || rho.as_f64() >= limit {
            return Err(DpsError::Unstable {
                rho: rho.as_f64(),
                limit,
            });
        }
        Ok(params)
    }

    /// All arrival rates equal to one.
    pub fn with_unit_arrivals(mu: Vec<T>) -> Result<Self> {
        Self::new(vec![T::one(); mu.len()], mu)
    }

    pub fn class_count(&self) -> usize {
        self.mu.len()
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    /// Per-class loads `lambda_k / mu_k`.
    pub fn class_loads(&self) -> Vec<T> {
        self.lambda.iter().zip(&self.mu).map(|(&l, &m)| l / m).collect()
    }

    /// Total load `rho`.
    pub fn load(&self) -> T {
        sum(self.class_loads())
    }

    /// Total arrival rate `lambda = sum_k lambda_k`.
    pub fn total_arrival_rate(&self) -> T {
        sum(self.lambda.iter().copied())
    }

    /// Mean service requirement of an arbitrary arrival, `sum_k (lambda_k / lambda) / mu_k`.
    pub fn mean_service_requirement(&self) -> T {
        self.load() / self.total_arrival_rate()
    }

    /// True when every arrival rate is one (within `1e-12` relative).
    pub fn has_unit_arrivals(&self) -> bool {
        self.lambda.iter().all(|&l| rel_close(l, T::one(), 1e-12))
    }

    /// Weighted mean of per-class values with weights `lambda_k / lambda`.
    pub fn arrival_weighted_mean(&self, per_class: &[T]) -> T {
        debug_assert_eq!(per_class.len(), self.class_count());
        sum(self.lambda.iter().zip(per_class).map(|(&l, &t)| l * t)) / self.total_arrival_rate()
    }
}

/// Per-class DPS weights. Any strictly positive vector is representable;
/// membership in the nonincreasing set is a query, not an invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector<T>(Vec<T>);

impl<T: Scalar> WeightVector<T> {
    pub fn new(g: Vec<T>) -> Result<Self> {
        if g.is_empty() {
            return Err(usage("weight vector must not be empty"));
        }
        if let Some(k) = g.iter().position(|w| !(w.is_finite() && *w > T::zero())) {
            return Err(usage(format!(
                "weight {} must be finite and positive, got {}",
                k + 1,
                g[k]
            )));
        }
        Ok(Self(g))
    }

    /// Equal weights, i.e. plain processor sharing.
    pub fn uniform(classes: usize) -> Self {
        assert!(classes > 0, "weight vector must not be empty");
        Self(vec![T::one(); classes])
    }

    pub fn scaled(&self, c: T) -> Result<Self> {
        Self::new(self.0.iter().map(|&w| w * c).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    /// `g_1 >= g_2 >= ... >= g_M` (weak).
    pub fn is_nonincreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[1] <= w[0])
    }
}

pub(crate) fn ensure_paired<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<()> {
    if params.class_count() != g.len() {
        return Err(usage(format!(
            "weight vector has {} entries but the system has {} classes",
            g.len(),
            params.class_count()
        )));
    }
    Ok(())
}

/// `g_j / (mu_i g_i + mu_j g_j)` for 0-based `i`, `j`.
pub(crate) fn sigma_at<T: Scalar>(mu: &[T], g: &[T], i: usize, j: usize) -> T {
    g[j] / (mu[i] * g[i] + mu[j] * g[j])
}

/// `sigma_ij = g_j / (mu_i g_i + mu_j g_j)` with 1-based class numbers.
pub fn sigma<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>, i: usize, j: usize) -> Result<T> {
    ensure_paired(params, g)?;
    let m = params.class_count();
    for idx in [i, j] {
        if idx == 0 || idx > m {
            return Err(usage(format!("class index {idx} outside 1..={m}")));
        }
    }
    Ok(sigma_at(params.mu(), g.as_slice(), i - 1, j - 1))
}

/// The matrices `A`, `D` and `B = A + D` of the linear system
/// `(E - D - A) T = [1/mu_1 .. 1/mu_M]^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrices<T> {
    a: Matrix<T>,
    d: Matrix<T>,
    b: Matrix<T>,
}

impl<T: Scalar> RateMatrices<T> {
    /// `A[i][j] = lambda_j sigma_ij`.
    pub fn a(&self) -> &Matrix<T> {
        &self.a
    }

    /// Diagonal, `D[i][i] = sum_j lambda_j sigma_ij`.
    pub fn d(&self) -> &Matrix<T> {
        &self.d
    }

    pub fn b(&self) -> &Matrix<T> {
        &self.b
    }

    /// `E - B`, the coefficient matrix of the sojourn-time system.
    pub fn system_matrix(&self) -> Matrix<T> {
        Matrix::identity(self.b.rows()).sub(&self.b)
    }

    /// `sum_i rho_i B[i][j] / rho_j` for every column `j`.
    ///
    /// Each entry equals the total load `rho`: the load vector is a positive
    /// left eigenvector of `B` with eigenvalue `rho`, which is what makes
    /// `E - B` a nonsingular M-matrix whenever `rho < 1`.
    pub fn load_weighted_column_sums(&self, params: &SystemParams<T>) -> Vec<T> {
        let loads = params.class_loads();
        let n = loads.len();
        (0..n)
            .map(|j| sum((0..n).map(|i| loads[i] * self.b[(i, j)])) / loads[j])
            .collect()
    }
}

pub fn build_matrices<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<RateMatrices<T>> {
    ensure_paired(params, g)?;
    let (mu, lambda, w) = (params.mu(), params.lambda(), g.as_slice());
    let n = params.class_count();
    let a = Matrix::from_fn(n, n, |i, j| lambda[j] * sigma_at(mu, w, i, j));
    let diag: Vec<T> = (0..n).map(|i| sum(a.row(i).iter().copied())).collect();
    let d = Matrix::from_diagonal(&diag);
    let b = a.add(&d);
    let matrices = RateMatrices { a, d, b };

    #[cfg(debug_assertions)]
    {
        let rho = params.load();
        for col in matrices.load_weighted_column_sums(params) {
            debug_assert!(
                rel_close(col, rho, 1e-9),
                "load-weighted column sum {col} differs from rho = {rho}"
            );
        }
    }
    Ok(matrices)
}

/// Expected sojourn times per class and their arrival-weighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SojournSolution<T> {
    pub per_class: Vec<T>,
    pub aggregate: T,
}

impl<T: Scalar> SojournSolution<T> {
    pub fn from_per_class(params: &SystemParams<T>, per_class: Vec<T>) -> Self {
        let aggregate = params.arrival_weighted_mean(&per_class);
        Self { per_class, aggregate }
    }
}

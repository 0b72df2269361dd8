//! The fixed-point machinery behind the `y`-ordering argument: the
//! transformed rates `mu~`, the matrix `A~`, its contraction factor and two
//! independent routes to `y = 1'(E - B)^-1 M`.
//!
//! All formulas here assume every arrival rate equals one. Other instances
//! must first be brought to that form with [`super::split_classes`] and
//! [`super::normalize_arrivals`].

use crate::error::{usage, DpsError, Result};
use crate::linalg::{Lu, Matrix};
use crate::model::{build_matrices, ensure_paired, SystemParams, WeightVector};
use crate::scalar::{max_abs, sum, Scalar};

use super::{check_g, is_nonincreasing_vec, ORDER_SLACK};

/// Default step tolerance of [`y_fixed_point_default`].
pub const FIXED_POINT_TOL: f64 = 1e-10;

/// Hard cap on fixed-point iterations.
pub const MAX_FIXED_POINT_ITERATIONS: usize = 1_000_000;

fn require_unit_arrivals<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<()> {
    ensure_paired(params, g)?;
    if !params.has_unit_arrivals() {
        return Err(usage(
            "this check needs unit arrival rates; reduce the instance with \
             normalize_arrivals (equal rates) or split_classes (rational rates) first",
        ));
    }
    Ok(())
}

/// `f(x) = sum_k x / (mu_k (x + mu_k g_k))`.
fn share<T: Scalar>(mu: &[T], g: &[T], x: T) -> T {
    sum(mu.iter().zip(g).map(|(&m, &w)| x / (m * (x + m * w))))
}

/// `f2(x) = sum_k g_k / (x + mu_k g_k)`.
fn share2<T: Scalar>(mu: &[T], g: &[T], x: T) -> T {
    sum(mu.iter().zip(g).map(|(&m, &w)| w / (x + m * w)))
}

/// `mu~_i = mu_i / (1 - f2(mu_i g_i))`, the vector `mu^T (E - D)^-1`.
pub fn mu_tilde<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<Vec<T>> {
    require_unit_arrivals(params, g)?;
    let (mu, w) = (params.mu(), g.as_slice());
    Ok(mu
        .iter()
        .zip(w)
        .map(|(&m, &gi)| m / (T::one() - share2(mu, w, m * gi)))
        .collect())
}

/// `A~ = M^-1 A M (E - D)^-1`, entrywise
/// `mu_j g_j / (mu_i (mu_i g_i + mu_j g_j) (1 - rho + f(mu_j g_j)))`.
pub fn a_tilde<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<Matrix<T>> {
    require_unit_arrivals(params, g)?;
    let (mu, w) = (params.mu(), g.as_slice());
    let slack = T::one() - params.load();
    let n = params.class_count();
    let denom: Vec<T> = (0..n).map(|j| slack + share(mu, w, mu[j] * w[j])).collect();
    Ok(Matrix::from_fn(n, n, |i, j| {
        let xj = mu[j] * w[j];
        xj / (mu[i] * (mu[i] * w[i] + xj) * denom[j])
    }))
}

/// `q = 1 - (1 - rho) / (1 - rho + max_j f(mu_j g_j))`; `A~` shrinks the
/// one-norm of every nonnegative vector by at least this factor.
pub fn contraction_factor<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<T> {
    require_unit_arrivals(params, g)?;
    let (mu, w) = (params.mu(), g.as_slice());
    let slack = T::one() - params.load();
    let fmax = mu
        .iter()
        .zip(w)
        .map(|(&m, &gi)| share(mu, w, m * gi))
        .fold(T::zero(), T::max);
    let delta = T::one() / (slack + fmax);
    Ok(T::one() - slack * delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum YMethod {
    Direct,
    FixedPoint,
}

/// The row vector `y = 1'(E - B)^-1 M` together with how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct YVector<T> {
    pub y: Vec<T>,
    pub method: YMethod,
    /// Zero for [`YMethod::Direct`].
    pub iterations: usize,
    /// `||y - (mu~ + y A~)||_inf`.
    pub residual: T,
}

impl<T: Scalar> YVector<T> {
    pub fn is_nonincreasing(&self) -> bool {
        is_nonincreasing_vec(&self.y)
    }
}

fn fixed_point_residual<T: Scalar>(y: &[T], mu_t: &[T], a_t: &Matrix<T>) -> T {
    let ya = a_t.vec_mul(y);
    let r: Vec<T> = y
        .iter()
        .zip(mu_t)
        .zip(&ya)
        .map(|((&yi, &m), &a)| yi - (m + a))
        .collect();
    max_abs(&r)
}

/// Solves `(E - B)^T z = 1` and sets `y_i = z_i mu_i`.
pub fn y_direct<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<YVector<T>> {
    require_unit_arrivals(params, g)?;
    let system = build_matrices(params, g)?.system_matrix();
    let lu = Lu::factor(&system).map_err(|s| {
        DpsError::Numeric(format!(
            "singular matrix E - B (zero pivot in column {}) for mu = {:?}",
            s.column + 1,
            params.mu()
        ))
    })?;
    let z = lu.solve_transpose(&vec![T::one(); params.class_count()]);
    let y: Vec<T> = z.iter().zip(params.mu()).map(|(&zi, &m)| zi * m).collect();
    let residual = fixed_point_residual(&y, &mu_tilde(params, g)?, &a_tilde(params, g)?);
    Ok(YVector {
        y,
        method: YMethod::Direct,
        iterations: 0,
        residual,
    })
}

/// The iterates `y(n) = mu~ + y(n-1) A~` starting from `y(0) = 0`; the first
/// item is `y(1)`.
#[derive(Debug, Clone)]
pub struct FixedPointIterates<T> {
    mu_tilde: Vec<T>,
    a_tilde: Matrix<T>,
    current: Vec<T>,
}

impl<T: Scalar> Iterator for FixedPointIterates<T> {
    type Item = Vec<T>;

    fn next(&mut self) -> Option<Vec<T>> {
        let ya = self.a_tilde.vec_mul(&self.current);
        self.current = self.mu_tilde.iter().zip(&ya).map(|(&m, &a)| m + a).collect();
        Some(self.current.clone())
    }
}

pub fn fixed_point_iterates<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<FixedPointIterates<T>> {
    Ok(FixedPointIterates {
        mu_tilde: mu_tilde(params, g)?,
        a_tilde: a_tilde(params, g)?,
        current: vec![T::zero(); params.class_count()],
    })
}

/// `10 * ceil(ln(1e-12) / ln(q))`, capped at [`MAX_FIXED_POINT_ITERATIONS`].
pub fn default_max_iterations<T: Scalar>(q: T) -> usize {
    let q = q.as_f64();
    if !(q > 0.0 && q < 1.0) {
        return MAX_FIXED_POINT_ITERATIONS;
    }
    let steps = (1e-12f64.ln() / q.ln()).ceil();
    ((10.0 * steps) as usize).clamp(1, MAX_FIXED_POINT_ITERATIONS)
}

/// Iterates until successive iterates differ by at most `tol` in the max norm.
pub fn y_fixed_point<T: Scalar>(
    params: &SystemParams<T>,
    g: &WeightVector<T>,
    tol: T,
    max_iter: usize,
) -> Result<YVector<T>> {
    if tol.is_nan() || tol <= T::zero() {
        return Err(usage(format!("fixed-point tolerance must be positive, got {tol}")));
    }
    let q = contraction_factor(params, g)?;
    let iterates = fixed_point_iterates(params, g)?;
    let (mu_t, a_t) = (iterates.mu_tilde.clone(), iterates.a_tilde.clone());

    let mut prev = vec![T::zero(); params.class_count()];
    let mut last_step = T::infinity();
    for (n, y) in iterates.take(max_iter).enumerate() {
        last_step = y
            .iter()
            .zip(&prev)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        if last_step <= tol {
            let residual = fixed_point_residual(&y, &mu_t, &a_t);
            return Ok(YVector {
                y,
                method: YMethod::FixedPoint,
                iterations: n + 1,
                residual,
            });
        }
        prev = y;
    }
    Err(DpsError::Convergence {
        iterations: max_iter,
        q: q.as_f64(),
        last_step: last_step.as_f64(),
    })
}

/// [`y_fixed_point`] with tolerance `1e-10` and [`default_max_iterations`].
pub fn y_fixed_point_default<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<YVector<T>> {
    let q = contraction_factor(params, g)?;
    y_fixed_point(params, g, T::of(FIXED_POINT_TOL), default_max_iterations(q))
}

/// For every `r`, the partial column sums `sum_{i<=r} A~_ij` are nonincreasing in `j`.
pub fn check_partial_column_sums<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<bool> {
    require_unit_arrivals(params, g)?;
    if !check_g(g) {
        return Err(usage("partial column sums are only ordered for nonincreasing weights"));
    }
    let a = a_tilde(params, g)?;
    let n = a.rows();
    let mut partial = vec![T::zero(); n];
    let slack = T::slack(ORDER_SLACK);
    for r in 0..n {
        for (j, s) in partial.iter_mut().enumerate() {
            *s = *s + a[(r, j)];
        }
        if partial.windows(2).any(|w| w[1] > w[0] + slack) {
            return Ok(false);
        }
    }
    Ok(true)
}

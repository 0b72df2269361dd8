//! Expected sojourn times under DPS, plus the processor-sharing and
//! strict-priority (c-mu rule) reference values.

use crate::error::{usage, DpsError, Result};
use crate::linalg::Lu;
use crate::model::{build_matrices, SojournSolution, SystemParams, WeightVector};
use crate::scalar::{max_abs, sum, Scalar};

/// Systems whose estimated one-norm condition number exceeds this are refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Relative residual bound `||(E - B) T - rhs||_inf <= RESIDUAL_TOL ||rhs||_inf`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Solves `(E - D - A) T = [1/mu_1 .. 1/mu_M]^T` for the per-class expected
/// sojourn times.
pub fn solve_sojourn<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<SojournSolution<T>> {
    let matrices = build_matrices(params, g)?;
    let system = matrices.system_matrix();
    let rhs: Vec<T> = params.mu().iter().map(|&m| T::one() / m).collect();

    let describe = || {
        format!(
            "lambda = {:?}, mu = {:?}, weights = {:?}",
            params.lambda(),
            params.mu(),
            g.as_slice()
        )
    };
    let lu = Lu::factor(&system).map_err(|s| {
        DpsError::Numeric(format!(
            "singular sojourn system (zero pivot in column {}) for {}",
            s.column + 1,
            describe()
        ))
    })?;
    let cond = lu.condition_estimate();
    if cond.is_nan() || cond.as_f64() > MAX_CONDITION {
        return Err(DpsError::Numeric(format!(
            "ill-conditioned sojourn system (condition estimate {:e}) for {}",
            cond.as_f64(),
            describe()
        )));
    }

    let mut t = lu.solve(&rhs);
    // One step of iterative refinement.
    let r: Vec<T> = system.mul_vec(&t).iter().zip(&rhs).map(|(&a, &b)| b - a).collect();
    let dt = lu.solve(&r);
    t.iter_mut().zip(&dt).for_each(|(x, d)| *x = *x + *d);

    let residual: Vec<T> = system.mul_vec(&t).iter().zip(&rhs).map(|(&a, &b)| a - b).collect();
    if max_abs(&residual) > T::slack(RESIDUAL_TOL) * max_abs(&rhs) {
        return Err(DpsError::Numeric(format!(
            "residual {:e} exceeds tolerance for {}",
            max_abs(&residual).as_f64(),
            describe()
        )));
    }
    debug_assert!(t
        .iter()
        .zip(params.mu())
        .all(|(&tk, &m)| tk >= (T::one() - T::slack(1e-9)) / m));

    Ok(SojournSolution::from_per_class(params, t))
}

/// Mean sojourn time under plain processor sharing, `m / (1 - rho)` with `m`
/// the mean service requirement of an arbitrary arrival.
pub fn ps_sojourn<T: Scalar>(params: &SystemParams<T>) -> T {
    params.mean_service_requirement() / (T::one() - params.load())
}

/// Per-class mean sojourn times of the preemptive-resume priority queue that
/// serves class 1 first, then class 2, and so on (largest `mu` first).
pub fn cmu_per_class<T: Scalar>(params: &SystemParams<T>) -> Vec<T> {
    let mut load_above = T::zero();
    let mut residual_work = T::zero();
    params
        .lambda()
        .iter()
        .zip(params.mu())
        .map(|(&l, &m)| {
            let load_through = load_above + l / m;
            // Exponential service: E[S^2] / 2 = 1 / mu^2.
            residual_work = residual_work + l / (m * m);
            let t =
                ((T::one() - load_through) / m + residual_work) / ((T::one() - load_above) * (T::one() - load_through));
            load_above = load_through;
            t
        })
        .collect()
}

/// Aggregate mean sojourn time of the c-mu priority rule, the `x -> inf`
/// limit of [`weight_family`].
pub fn cmu_sojourn<T: Scalar>(params: &SystemParams<T>) -> T {
    params.arrival_weighted_mean(&cmu_per_class(params))
}

/// Normalized geometric weights `g_i(x) = x^-i / sum_j x^-j`, `x > 1`.
pub fn weight_family<T: Scalar>(x: T, classes: usize) -> Result<WeightVector<T>> {
    if !(x.is_finite() && x > T::one()) {
        return Err(usage(format!("weight family parameter must exceed 1, got {x}")));
    }
    if classes == 0 {
        return Err(usage("weight family needs at least one class"));
    }
    // Scale by x so the first entry is 1 before normalizing.
    let ratio = T::one() / x;
    let mut raw = Vec::with_capacity(classes);
    let mut w = T::one();
    for _ in 0..classes {
        raw.push(w);
        w = w * ratio;
    }
    let total = sum(raw.iter().copied());
    WeightVector::new(raw.into_iter().map(|v| v / total).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub x: T,
    pub g: WeightVector<T>,
    pub t_dps: T,
    pub t_ps: T,
    pub t_opt: T,
}

/// Evaluates the DPS aggregate along [`weight_family`] at each `x`, in input order.
pub fn sweep<T: Scalar>(params: &SystemParams<T>, xs: &[T]) -> Result<Vec<SweepRow<T>>> {
    if xs.is_empty() {
        return Err(usage("sweep grid is empty"));
    }
    let t_ps = ps_sojourn(params);
    let t_opt = cmu_sojourn(params);
    xs.iter()
        .enumerate()
        .map(|(k, &x)| {
            let row = || -> Result<SweepRow<T>> {
                let g = weight_family(x, params.class_count())?;
                let t_dps = solve_sojourn(params, &g)?.aggregate;
                Ok(SweepRow {
                    x,
                    g,
                    t_dps,
                    t_ps,
                    t_opt,
                })
            };
            row().map_err(|e| in_row(e, k + 1, x.as_f64()))
        })
        .collect()
}

fn in_row(err: DpsError, row: usize, x: f64) -> DpsError {
    match err {
        DpsError::Usage(m) => DpsError::Usage(format!("sweep row {row} (x = {x}): {m}")),
        DpsError::Numeric(m) => DpsError::Numeric(format!("sweep row {row} (x = {x}): {m}")),
        other => other,
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i + 1 == n {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

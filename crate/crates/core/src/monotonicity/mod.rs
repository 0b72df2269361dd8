//! Sufficient conditions for comparing two DPS weight vectors.
//!
//! For service rates sorted `mu_1 >= ... >= mu_M` and two nonincreasing
//! weight vectors `alpha`, `beta`, the mean sojourn time under `alpha` is no
//! larger than under `beta` when
//!
//! * ratio dominance holds: `alpha_{i+1}/alpha_i <= beta_{i+1}/beta_i`, and
//! * adjacent classes are separated: `mu_{j+1}/mu_j <= 1 - rho`.
//!
//! Pairs that fail separation can be neutralized by giving both classes the
//! same weight ([`coalesce_weights`]). The supporting numeric objects (the
//! vector `y`, `mu~`, `A~`) live in the `appendix` submodule and require unit
//! arrival rates; the `reduce` submodule provides the reductions.

mod appendix;
mod reduce;

pub use appendix::{
    a_tilde, check_partial_column_sums, contraction_factor, default_max_iterations, fixed_point_iterates, mu_tilde,
    y_direct, y_fixed_point, y_fixed_point_default, FixedPointIterates, YMethod, YVector, FIXED_POINT_TOL,
    MAX_FIXED_POINT_ITERATIONS,
};
pub use reduce::{
    normalize_arrivals, rational_arrivals, reduce_to_unit, split_classes, UnitReduction, MAX_REDUCTION_CLASSES,
    MAX_REDUCTION_DENOMINATOR,
};

use crate::error::{usage, Result};
use crate::model::{ensure_paired, sigma_at, SystemParams, WeightVector};
use crate::scalar::{max_abs, rel_close, sum, Scalar};
use crate::solver::solve_sojourn;

/// Absolute slack used by every ordering comparison.
pub const ORDER_SLACK: f64 = 1e-12;

/// Largest tolerated `T(alpha) - T(beta)` for a certified comparison.
pub const THEOREM_SLACK: f64 = 1e-10;

/// Ordering check for computed vectors (`y`, `mu~`): the slack is relative
/// to the largest magnitude since these values carry rounding error.
pub(crate) fn is_nonincreasing_vec<T: Scalar>(v: &[T]) -> bool {
    let slack = T::slack(ORDER_SLACK) * max_abs(v).max(T::one());
    v.windows(2).all(|w| w[1] <= w[0] + slack)
}

/// Membership in `G = {g : g_1 >= g_2 >= ... >= g_M}`.
pub fn check_g<T: Scalar>(g: &WeightVector<T>) -> bool {
    let slack = T::slack(ORDER_SLACK);
    g.as_slice().windows(2).all(|w| w[1] <= w[0] + slack)
}

/// `alpha_{i+1}/alpha_i <= beta_{i+1}/beta_i` for every adjacent pair.
pub fn check_ratio_dominance<T: Scalar>(alpha: &WeightVector<T>, beta: &WeightVector<T>) -> Result<bool> {
    if alpha.len() != beta.len() {
        return Err(usage(format!(
            "weight vectors differ in length ({} vs {})",
            alpha.len(),
            beta.len()
        )));
    }
    let (a, b) = (alpha.as_slice(), beta.as_slice());
    let slack = T::slack(ORDER_SLACK);
    let holds = (0..a.len().saturating_sub(1)).all(|i| a[i + 1] / a[i] <= b[i + 1] / b[i] + slack);
    if holds {
        // Chaining adjacent ratios extends the inequality to every j >= i.
        debug_assert!((0..a.len()).all(|i| (i..a.len()).all(|j| {
            let (ra, rb) = (a[j] / a[i], b[j] / b[i]);
            ra <= rb + T::slack(1e-9) * rb.max(T::one())
        })));
    }
    Ok(holds)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationViolation<T> {
    /// 1-based index of the first class of the pair `(j, j + 1)`.
    pub j: usize,
    /// `mu_{j+1} / mu_j`.
    pub ratio: T,
    /// `1 - rho`.
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationCheck<T> {
    pub holds: bool,
    pub violations: Vec<SeparationViolation<T>>,
}

/// Evaluates `mu_{j+1}/mu_j <= 1 - rho` for `j = 1 .. M-1`.
pub fn check_separation<T: Scalar>(params: &SystemParams<T>) -> SeparationCheck<T> {
    let bound = T::one() - params.load();
    let slack = T::slack(ORDER_SLACK);
    let violations: Vec<_> = params
        .mu()
        .windows(2)
        .enumerate()
        .filter_map(|(k, w)| {
            let ratio = w[1] / w[0];
            (ratio > bound + slack).then_some(SeparationViolation { j: k + 1, ratio, bound })
        })
        .collect();
    SeparationCheck {
        holds: violations.is_empty(),
        violations,
    }
}

/// Gives class `j + 1` the weight of class `j` for every adjacent pair that
/// fails separation, sweeping left to right so runs of failing pairs share
/// one weight.
pub fn coalesce_weights<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<WeightVector<T>> {
    ensure_paired(params, g)?;
    if !check_g(g) {
        return Err(usage("coalescing needs nonincreasing weights"));
    }
    let mut out = g.as_slice().to_vec();
    for v in check_separation(params).violations {
        out[v.j] = out[v.j - 1];
    }
    WeightVector::new(out)
}

/// `T(alpha) - T(beta)` through the expansion
/// `lambda^-1 sum_{i,j} (sigma_ij(alpha) - sigma_ij(beta)) (y_i - y_j) T_j(beta) / mu_i`
/// with `y` taken from `alpha`. Unit arrival rates only.
pub fn sojourn_difference_expansion<T: Scalar>(
    params: &SystemParams<T>,
    alpha: &WeightVector<T>,
    beta: &WeightVector<T>,
) -> Result<T> {
    ensure_paired(params, beta)?;
    let y = y_direct(params, alpha)?.y;
    let t_beta = solve_sojourn(params, beta)?.per_class;
    let (mu, a, b) = (params.mu(), alpha.as_slice(), beta.as_slice());
    let n = params.class_count();
    let total = sum((0..n).flat_map(|i| {
        let (y, t_beta) = (&y, &t_beta);
        (0..n).map(move |j| {
            let ds = sigma_at(mu, a, i, j) - sigma_at(mu, b, i, j);
            ds * (y[i] - y[j]) * t_beta[j] / mu[i]
        })
    }));
    Ok(total / params.total_arrival_rate())
}

/// Checks carried out on the unit-arrival form of the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitChecks<T> {
    /// Class count after splitting.
    pub classes: usize,
    /// `y` computed for `alpha` is nonincreasing.
    pub y_nonincreasing: bool,
    /// [`sojourn_difference_expansion`] on the reduced system, converted back
    /// to the original time unit.
    pub expansion_difference: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport<T> {
    pub alpha_in_g: bool,
    pub beta_in_g: bool,
    pub ratio_condition_holds: bool,
    pub separation: SeparationCheck<T>,
    /// Every hypothesis holds, so `difference <= 0` is guaranteed.
    pub certified: bool,
    pub t_alpha: T,
    pub t_beta: T,
    /// `t_alpha - t_beta`.
    pub difference: T,
    /// `None` when the arrival rates have no small rational form.
    pub unit_checks: Option<UnitChecks<T>>,
}

impl<T: Scalar> MonotonicityReport<T> {
    pub fn separation_condition_holds(&self) -> bool {
        self.separation.holds
    }

    /// Certified, yet `alpha` is measurably worse than `beta`.
    pub fn theorem_violated(&self) -> bool {
        self.certified && self.difference > T::slack(THEOREM_SLACK)
    }
}

/// Compares two weight policies on the same instance.
///
/// Sojourn times are always computed on the original instance; the `y`
/// ordering and the difference expansion are evaluated on its unit-arrival
/// reduction when one exists.
pub fn compare_policies<T: Scalar>(
    params: &SystemParams<T>,
    alpha: &WeightVector<T>,
    beta: &WeightVector<T>,
) -> Result<MonotonicityReport<T>> {
    ensure_paired(params, alpha)?;
    ensure_paired(params, beta)?;
    let alpha_in_g = check_g(alpha);
    let beta_in_g = check_g(beta);
    let ratio_condition_holds = check_ratio_dominance(alpha, beta)?;
    let separation = check_separation(params);
    let certified = alpha_in_g && beta_in_g && ratio_condition_holds && separation.holds;

    let t_alpha = solve_sojourn(params, alpha)?.aggregate;
    let t_beta = solve_sojourn(params, beta)?.aggregate;

    let unit_checks = match (reduce_to_unit(params, alpha)?, reduce_to_unit(params, beta)?) {
        (Some(ra), Some(rb)) => {
            let y = y_direct(&ra.params, &ra.weights)?;
            let expansion = sojourn_difference_expansion(&ra.params, &ra.weights, &rb.weights)?;
            Some(UnitChecks {
                classes: ra.params.class_count(),
                y_nonincreasing: y.is_nonincreasing(),
                expansion_difference: expansion / ra.time_scale,
            })
        }
        _ => None,
    };

    Ok(MonotonicityReport {
        alpha_in_g,
        beta_in_g,
        ratio_condition_holds,
        separation,
        certified,
        t_alpha,
        t_beta,
        difference: t_alpha - t_beta,
        unit_checks,
    })
}

/// `rel_close` for differences: the scale is the larger of the two values
/// being compared and `reference`, so near-zero differences are judged
/// against the magnitude of the sojourn times they came from.
pub fn difference_close<T: Scalar>(a: T, b: T, reference: T, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(reference.abs());
    (a - b).abs() <= T::slack(tol) * scale || rel_close(a, b, tol)
}

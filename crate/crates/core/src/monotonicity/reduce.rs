//! Reductions from general arrival rates to the unit-rate form the
//! fixed-point checks require.
//!
//! * Equal rates `lambda_k = c`: measure time in units of `1/c`. Arrival
//!   rates become one, service rates become `mu_k / c`, the load is
//!   unchanged and every sojourn time is multiplied by `c`.
//! * Rational rates `lambda_k = p_k / q`: class `k` behaves exactly like
//!   `p_k` identical classes of rate `1/q` (same mean, same weight), after
//!   which the equal-rate reduction applies.

use crate::error::{usage, Result};
use crate::model::{ensure_paired, SystemParams, WeightVector};
use crate::scalar::{rel_close, Scalar};

/// Largest denominator tried by [`rational_arrivals`] from [`reduce_to_unit`].
pub const MAX_REDUCTION_DENOMINATOR: u64 = 1000;

/// Largest expanded class count [`reduce_to_unit`] will build.
pub const MAX_REDUCTION_CLASSES: u64 = 512;

/// Replaces class `k` by `p[k]` copies with arrival rate `1/q`.
///
/// Requires `lambda_k = p_k / q` to within `1e-12` relative.
pub fn split_classes<T: Scalar>(
    params: &SystemParams<T>,
    g: &WeightVector<T>,
    q: u64,
    p: &[u64],
) -> Result<(SystemParams<T>, WeightVector<T>)> {
    ensure_paired(params, g)?;
    if q == 0 {
        return Err(usage("denominator q must be positive"));
    }
    if p.len() != params.class_count() {
        return Err(usage(format!(
            "{} multiplicities for {} classes",
            p.len(),
            params.class_count()
        )));
    }
    let qf = T::of(q as f64);
    for (k, (&pk, &l)) in p.iter().zip(params.lambda()).enumerate() {
        if pk == 0 || !rel_close(l, T::of(pk as f64) / qf, 1e-12) {
            return Err(usage(format!("class {}: arrival rate {l} is not {pk}/{q}", k + 1)));
        }
    }

    let rate = T::one() / qf;
    let total: usize = p.iter().map(|&c| c as usize).sum();
    let mut lambda = Vec::with_capacity(total);
    let mut mu = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for ((&count, &m), &w) in p.iter().zip(params.mu()).zip(g.as_slice()) {
        for _ in 0..count {
            lambda.push(rate);
            mu.push(m);
            weights.push(w);
        }
    }
    Ok((SystemParams::new(lambda, mu)?, WeightVector::new(weights)?))
}

/// Rescales time so that a common arrival rate `c` becomes one: `mu* = mu / c`.
/// Sojourn times of the result are `c` times those of the input.
pub fn normalize_arrivals<T: Scalar>(
    params: &SystemParams<T>,
    g: &WeightVector<T>,
) -> Result<(SystemParams<T>, WeightVector<T>)> {
    ensure_paired(params, g)?;
    let c = params.lambda()[0];
    if let Some(k) = params.lambda().iter().position(|&l| !rel_close(l, c, 1e-12)) {
        return Err(usage(format!(
            "arrival rates differ (class 1: {c}, class {}: {}); use split_classes first",
            k + 1,
            params.lambda()[k]
        )));
    }
    let mu = params.mu().iter().map(|&m| m / c).collect();
    Ok((SystemParams::with_unit_arrivals(mu)?, g.clone()))
}

/// Finds the smallest `q <= max_denominator` with `lambda_k = p_k / q` for
/// integers `p_k`, provided `sum p_k <= max_classes`.
pub fn rational_arrivals<T: Scalar>(lambda: &[T], max_denominator: u64, max_classes: u64) -> Option<(u64, Vec<u64>)> {
    'denominators: for q in 1..=max_denominator {
        let qf = T::of(q as f64);
        let mut p = Vec::with_capacity(lambda.len());
        let mut total = 0u64;
        for &l in lambda {
            let pk = (l * qf).round();
            if pk < T::one() || !rel_close(l, pk / qf, 1e-12) {
                continue 'denominators;
            }
            let pk = pk.as_f64() as u64;
            total += pk;
            if total > max_classes {
                continue 'denominators;
            }
            p.push(pk);
        }
        return Some((q, p));
    }
    None
}

/// A unit-arrival instance equivalent to some original instance.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitReduction<T> {
    pub params: SystemParams<T>,
    pub weights: WeightVector<T>,
    /// Sojourn times of the reduced system are `time_scale` times the originals.
    pub time_scale: T,
}

/// Brings an instance to unit arrival rates, or `None` when its rates have
/// no small rational representation.
pub fn reduce_to_unit<T: Scalar>(params: &SystemParams<T>, g: &WeightVector<T>) -> Result<Option<UnitReduction<T>>> {
    ensure_paired(params, g)?;
    if params.has_unit_arrivals() {
        return Ok(Some(UnitReduction {
            params: params.clone(),
            weights: g.clone(),
            time_scale: T::one(),
        }));
    }
    let c = params.lambda()[0];
    if params.lambda().iter().all(|&l| rel_close(l, c, 1e-12)) {
        let (params, weights) = normalize_arrivals(params, g)?;
        return Ok(Some(UnitReduction {
            params,
            weights,
            time_scale: c,
        }));
    }
    let Some((q, p)) = rational_arrivals(params.lambda(), MAX_REDUCTION_DENOMINATOR, MAX_REDUCTION_CLASSES) else {
        return Ok(None);
    };
    let (split, split_g) = split_classes(params, g, q, &p)?;
    let (params, weights) = normalize_arrivals(&split, &split_g)?;
    Ok(Some(UnitReduction {
        params,
        weights,
        time_scale: T::one() / T::of(q as f64),
    }))
}

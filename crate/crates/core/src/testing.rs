//! Random instance generators for property tests and the acceptance suite.
//!
//! Every generator takes the caller's RNG, so suites stay reproducible from a
//! single seed. Service rates are always sorted nonincreasing.

use rand::Rng;

use crate::model::{SystemParams, WeightVector};

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// General arrival rates, load uniform in `[0.01, max_load]`.
pub fn stable_instance<R: Rng>(rng: &mut R, max_classes: usize, max_load: f64) -> SystemParams<f64> {
    let m = rng.gen_range(1..=max_classes);
    let mu = sorted_desc((0..m).map(|_| 10f64.powf(rng.gen_range(-1.0..1.5))).collect());
    let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..1.0)).collect();
    let rho = rng.gen_range(0.01..max_load);
    let scale = rho / raw.iter().zip(&mu).map(|(l, m)| l / m).sum::<f64>();
    SystemParams::new(raw.iter().map(|l| l * scale).collect(), mu).expect("generated instance is valid")
}

/// Unit arrival rates, arbitrary sorted service rates, load in `[0.01, max_load]`.
pub fn unit_instance<R: Rng>(rng: &mut R, max_classes: usize, max_load: f64) -> SystemParams<f64> {
    let m = rng.gen_range(1..=max_classes);
    let raw = sorted_desc((0..m).map(|_| 10f64.powf(rng.gen_range(0.0..1.5))).collect());
    let rho = rng.gen_range(0.01..max_load);
    let scale = raw.iter().map(|v| 1.0 / v).sum::<f64>() / rho;
    SystemParams::with_unit_arrivals(raw.iter().map(|v| v * scale).collect()).expect("generated instance is valid")
}

/// Unit arrival rates satisfying `mu_{j+1}/mu_j <= 1 - rho` for every pair.
pub fn unit_separated_instance<R: Rng>(rng: &mut R, max_classes: usize, max_load: f64) -> SystemParams<f64> {
    let m = rng.gen_range(1..=max_classes);
    let rho = rng.gen_range(0.01..max_load);
    let mut mu = vec![1.0];
    for _ in 1..m {
        let ratio = rng.gen_range(0.2..0.999) * (1.0 - rho);
        let last = *mu.last().unwrap();
        mu.push(last * ratio);
    }
    // Rescale so that sum 1/mu equals rho; ratios are unchanged.
    let scale = mu.iter().map(|v| 1.0 / v).sum::<f64>() / rho;
    let mu = mu.iter().map(|v| v * scale).collect();
    SystemParams::with_unit_arrivals(mu).expect("generated instance is valid")
}

/// Unit arrival rates where at least one adjacent pair violates separation.
pub fn unit_unseparated_instance<R: Rng>(rng: &mut R, max_classes: usize, max_load: f64) -> SystemParams<f64> {
    loop {
        let m = rng.gen_range(2..=max_classes.max(2));
        let rho = rng.gen_range(0.05..max_load);
        let mut mu = vec![1.0];
        for _ in 1..m {
            let ratio = if rng.gen_bool(0.5) {
                rng.gen_range(0.3..0.999) * (1.0 - rho)
            } else {
                rng.gen_range((1.0 - rho) * 1.05..1.0).min(1.0)
            };
            let last = *mu.last().unwrap();
            mu.push(last * ratio);
        }
        let scale = mu.iter().map(|v| 1.0 / v).sum::<f64>() / rho;
        let params = SystemParams::with_unit_arrivals(mu.iter().map(|v| v * scale).collect())
            .expect("generated instance is valid");
        if !crate::monotonicity::check_separation(&params).holds {
            return params;
        }
    }
}

/// Arrival rates of the form `p_k / q` with small integers.
pub fn rational_instance<R: Rng>(rng: &mut R, max_classes: usize, max_load: f64) -> (SystemParams<f64>, u64, Vec<u64>) {
    loop {
        let m = rng.gen_range(1..=max_classes);
        let q: u64 = rng.gen_range(1..=6);
        let p: Vec<u64> = (0..m).map(|_| rng.gen_range(1..=4)).collect();
        let lambda: Vec<f64> = p.iter().map(|&pk| pk as f64 / q as f64).collect();
        let rho = rng.gen_range(0.05..max_load);
        let raw = sorted_desc((0..m).map(|_| 10f64.powf(rng.gen_range(0.0..1.2))).collect());
        // Scale the service rates to hit the target load.
        let scale = lambda.iter().zip(&raw).map(|(l, v)| l / v).sum::<f64>() / rho;
        let mu = raw.iter().map(|v| v * scale).collect();
        if let Ok(params) = SystemParams::new(lambda, mu) {
            return (params, q, p);
        }
    }
}

/// A nonincreasing weight vector with `g_1 = 1`; about one adjacent pair in
/// five is an exact tie.
pub fn weights_in_g<R: Rng>(rng: &mut R, classes: usize) -> WeightVector<f64> {
    let ratios: Vec<f64> = (1..classes).map(|_| ratio(rng)).collect();
    from_ratios(&ratios)
}

/// `(alpha, beta)`, both nonincreasing, with every adjacent ratio of `alpha`
/// at most the matching ratio of `beta`.
pub fn dominating_pair<R: Rng>(rng: &mut R, classes: usize) -> (WeightVector<f64>, WeightVector<f64>) {
    let beta: Vec<f64> = (1..classes).map(|_| ratio(rng)).collect();
    let alpha: Vec<f64> = beta
        .iter()
        .map(|&b| {
            if rng.gen_bool(0.2) {
                b
            } else {
                b * rng.gen_range(0.0..1.0f64).max(1e-3)
            }
        })
        .collect();
    (from_ratios(&alpha), from_ratios(&beta))
}

fn ratio<R: Rng>(rng: &mut R) -> f64 {
    if rng.gen_bool(0.2) {
        1.0
    } else {
        rng.gen_range(1e-3..1.0)
    }
}

fn from_ratios(ratios: &[f64]) -> WeightVector<f64> {
    let mut g = vec![1.0];
    for r in ratios {
        let last = *g.last().unwrap();
        g.push(last * r);
    }
    WeightVector::new(g).expect("positive weights")
}

//! Seeded discrete-event simulation of the DPS queue.
//!
//! With exponential service the joint class occupancy `(N_1, .., N_M)` is a
//! continuous-time Markov chain: class `k` arrives at rate `lambda_k` and
//! completes at rate `N_k mu_k g_k / sum_j g_j N_j`. The simulator samples
//! that chain directly. When class `k` completes, the departing job is drawn
//! uniformly from the class-`k` jobs present, which is exact because the
//! remaining service requirements are exchangeable.
//!
//! Randomness comes from ChaCha8 with three fixed streams of the same seed:
//! stream 0 draws holding times, stream 1 picks the event type and stream 2
//! picks the departing job. Output is bit-identical across platforms for a
//! given seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{usage, DpsError, Result};
use crate::model::{ensure_paired, SystemParams, WeightVector};

pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

/// Fewer completions per class than this are refused.
pub const MIN_ARRIVALS_TARGET: u64 = 1000;

/// Batches used for the batch-means standard errors.
pub const BATCHES: usize = 32;

const STREAM_TIME: u64 = 0;
const STREAM_EVENT: u64 = 1;
const STREAM_JOB: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    /// Completions per class recorded after warmup.
    pub arrivals_target: u64,
    /// Share of each class's completions discarded as warmup, in `[0, 1)`.
    pub warmup_fraction: f64,
    /// Safety cap on simulated events; classes left without completions then
    /// produce [`DpsError::Statistics`].
    pub max_events: u64,
}

impl SimConfig {
    pub fn new(seed: u64, arrivals_target: u64) -> Self {
        Self {
            seed,
            arrivals_target,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            max_events: u64::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.arrivals_target < MIN_ARRIVALS_TARGET {
            return Err(usage(format!(
                "arrivals target {} is below the minimum of {MIN_ARRIVALS_TARGET}",
                self.arrivals_target
            )));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(usage(format!(
                "warmup fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }

    fn warmup_completions(&self) -> u64 {
        let w = self.warmup_fraction;
        (self.arrivals_target as f64 * w / (1.0 - w)).ceil() as u64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEstimate {
    /// Mean sojourn time per class.
    pub per_class_mean: Vec<f64>,
    /// Batch-means standard error of `per_class_mean`.
    pub per_class_stderr: Vec<f64>,
    /// Completion-weighted mean over all classes.
    pub aggregate_mean: f64,
    pub completed: Vec<u64>,
    /// Length of the measurement window.
    pub sim_time: f64,
    /// Time-average number of jobs per class over the measurement window.
    pub mean_in_system: Vec<f64>,
    pub mean_in_system_stderr: Vec<f64>,
    pub events: u64,
}

impl SimEstimate {
    /// Sojourn estimate `E[N_k] / lambda_k` implied by Little's law, with its
    /// standard error.
    pub fn littles_law_sojourn(&self, params: &SystemParams<f64>) -> Vec<(f64, f64)> {
        self.mean_in_system
            .iter()
            .zip(&self.mean_in_system_stderr)
            .zip(params.lambda())
            .map(|((n, se), l)| (n / l, se / l))
            .collect()
    }
}

/// Time-weighted accumulator with adaptive fixed-length blocks: whenever more
/// than `2 * BATCHES` blocks are complete, neighbours are merged and the
/// block length doubles.
#[derive(Debug)]
struct TimeBatches {
    block_len: f64,
    elapsed_in_block: f64,
    current: Vec<f64>,
    blocks: Vec<Vec<f64>>,
    total: Vec<f64>,
    total_time: f64,
}

impl TimeBatches {
    fn new(classes: usize, block_len: f64) -> Self {
        Self {
            block_len,
            elapsed_in_block: 0.0,
            current: vec![0.0; classes],
            blocks: Vec::new(),
            total: vec![0.0; classes],
            total_time: 0.0,
        }
    }

    fn add(&mut self, counts: &[usize], mut dt: f64) {
        for (t, &n) in self.total.iter_mut().zip(counts) {
            *t += n as f64 * dt;
        }
        self.total_time += dt;
        while dt > 0.0 {
            let take = dt.min(self.block_len - self.elapsed_in_block);
            for (c, &n) in self.current.iter_mut().zip(counts) {
                *c += n as f64 * take;
            }
            self.elapsed_in_block += take;
            dt -= take;
            if self.elapsed_in_block >= self.block_len {
                let full = std::mem::replace(&mut self.current, vec![0.0; counts.len()]);
                self.blocks.push(full);
                self.elapsed_in_block = 0.0;
                if self.blocks.len() > 2 * BATCHES {
                    self.merge();
                }
            }
        }
    }

    fn merge(&mut self) {
        let merged = self
            .blocks
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| c[0].iter().zip(&c[1]).map(|(a, b)| a + b).collect())
            .collect();
        let leftover = if self.blocks.len() % 2 == 1 {
            self.blocks.last().cloned()
        } else {
            None
        };
        self.blocks = merged;
        self.block_len *= 2.0;
        if let Some(odd) = leftover {
            // The odd block becomes the first half of the current (longer) block.
            for (c, o) in self.current.iter_mut().zip(odd) {
                *c += o;
            }
            self.elapsed_in_block += self.block_len / 2.0;
        }
    }

    fn means_and_stderr(&self) -> (Vec<f64>, Vec<f64>) {
        let classes = self.total.len();
        let means: Vec<f64> = if self.total_time > 0.0 {
            self.total.iter().map(|t| t / self.total_time).collect()
        } else {
            vec![0.0; classes]
        };
        let stderr = (0..classes)
            .map(|k| {
                let per_block: Vec<f64> = self.blocks.iter().map(|b| b[k] / self.block_len).collect();
                standard_error(&per_block)
            })
            .collect();
        (means, stderr)
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Standard error of the mean of independent values; zero for fewer than two.
fn standard_error(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64;
    (var / v.len() as f64).sqrt()
}

/// Batch-means standard error with up to [`BATCHES`] contiguous batches.
fn batch_means_stderr(samples: &[f64]) -> f64 {
    let n = samples.len();
    let batches = BATCHES.min(n);
    if batches < 2 {
        return 0.0;
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&samples[b * n / batches..(b + 1) * n / batches]))
        .collect();
    standard_error(&means)
}

fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn simulate(params: &SystemParams<f64>, g: &WeightVector<f64>, cfg: &SimConfig) -> Result<SimEstimate> {
    ensure_paired(params, g)?;
    cfg.validate()?;
    let m = params.class_count();
    let (lambda, mu, w) = (params.lambda(), params.mu(), g.as_slice());
    let total_lambda = params.total_arrival_rate();

    let mut time_rng = stream(cfg.seed, STREAM_TIME);
    let mut event_rng = stream(cfg.seed, STREAM_EVENT);
    let mut job_rng = stream(cfg.seed, STREAM_JOB);

    let warmup_needed = cfg.warmup_completions();
    let mut warming = warmup_needed > 0;
    let mut warm_done = vec![0u64; m];

    let mut now = 0.0;
    let mut jobs: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut counts = vec![0usize; m];
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.arrivals_target as usize); m];
    let mut occupancy = TimeBatches::new(m, 16.0 / total_lambda);
    let mut dep_rates = vec![0.0; m];
    let mut events = 0u64;

    while events < cfg.max_events {
        if !warming && samples.iter().all(|s| s.len() as u64 >= cfg.arrivals_target) {
            break;
        }
        events += 1;

        let share_total: f64 = counts.iter().zip(w).map(|(&n, &gk)| n as f64 * gk).sum();
        let mut total_rate = total_lambda;
        for k in 0..m {
            dep_rates[k] = if counts[k] > 0 {
                counts[k] as f64 * mu[k] * w[k] / share_total
            } else {
                0.0
            };
            total_rate += dep_rates[k];
        }

        let dt = exponential(&mut time_rng, total_rate);
        if !warming {
            occupancy.add(&counts, dt);
        }
        now += dt;

        let mut pick = event_rng.gen::<f64>() * total_rate;
        let mut event = None;
        for k in 0..m {
            if pick < lambda[k] {
                event = Some((k, true));
                break;
            }
            pick -= lambda[k];
            if pick < dep_rates[k] {
                event = Some((k, false));
                break;
            }
            pick -= dep_rates[k];
        }
        // Rounding can leave `pick` marginally past the last bucket.
        let (k, is_arrival) = event.unwrap_or_else(|| {
            let last_busy = (0..m).rev().find(|&k| counts[k] > 0);
            match last_busy {
                Some(k) => (k, false),
                None => (m - 1, true),
            }
        });

        if is_arrival {
            jobs[k].push(now);
            counts[k] += 1;
            continue;
        }

        let idx = job_rng.gen_range(0..jobs[k].len());
        let arrived = jobs[k].swap_remove(idx);
        counts[k] -= 1;
        let sojourn = now - arrived;
        if warming {
            warm_done[k] += 1;
            if warm_done.iter().all(|&c| c >= warmup_needed) {
                warming = false;
            }
        } else {
            samples[k].push(sojourn);
        }
    }

    if let Some(k) = samples.iter().position(|s| s.is_empty()) {
        return Err(DpsError::Statistics { class: k + 1 });
    }

    let per_class_mean: Vec<f64> = samples.iter().map(|s| mean(s)).collect();
    let per_class_stderr = samples.iter().map(|s| batch_means_stderr(s)).collect();
    let completed: Vec<u64> = samples.iter().map(|s| s.len() as u64).collect();
    let total_completed: u64 = completed.iter().sum();
    let aggregate_mean = per_class_mean
        .iter()
        .zip(&completed)
        .map(|(mk, &n)| mk * n as f64)
        .sum::<f64>()
        / total_completed as f64;
    let (mean_in_system, mean_in_system_stderr) = occupancy.means_and_stderr();

    Ok(SimEstimate {
        per_class_mean,
        per_class_stderr,
        aggregate_mean,
        completed,
        sim_time: occupancy.total_time,
        mean_in_system,
        mean_in_system_stderr,
        events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(1, 999).validate().is_err());
        assert!(SimConfig::new(1, 1000).validate().is_ok());
        let mut c = SimConfig::new(1, 5000);
        c.warmup_fraction = 1.0;
        assert!(c.validate().is_err());
        c.warmup_fraction = 0.0;
        assert!(c.validate().is_ok());
        assert_eq!(SimConfig::new(1, 9000).warmup_completions(), 1000);
    }

    #[test]
    fn batch_means_basics() {
        assert_eq!(batch_means_stderr(&[1.0]), 0.0);
        assert!(batch_means_stderr(&[1.0, 2.0]) > 0.0);
        let flat = vec![3.0; 1000];
        assert_eq!(batch_means_stderr(&flat), 0.0);
    }

    #[test]
    fn time_batches_conserve_area() {
        let mut tb = TimeBatches::new(1, 0.5);
        for i in 0..10_000 {
            tb.add(&[i % 3], 0.01 + (i % 7) as f64 * 0.003);
        }
        let block_area: f64 = tb.blocks.iter().map(|b| b[0]).sum::<f64>() + tb.current[0];
        assert!((block_area - tb.total[0]).abs() < 1e-6 * tb.total[0]);
        assert!(tb.blocks.len() >= BATCHES && tb.blocks.len() <= 2 * BATCHES);
    }

    #[test]
    fn unstable_or_unpaired_rejected() {
        let p = SystemParams::new(vec![0.5], vec![1.0]).unwrap();
        assert!(simulate(&p, &WeightVector::uniform(2), &SimConfig::new(1, 1000)).is_err());
        assert!(simulate(&p, &WeightVector::uniform(1), &SimConfig::new(1, 10)).is_err());
    }

    #[test]
    fn event_cap_leaves_class_without_statistics() {
        let p = SystemParams::new(vec![0.5, 1e-4], vec![2.0, 1.0]).unwrap();
        let mut cfg = SimConfig::new(3, 1000);
        cfg.warmup_fraction = 0.0;
        cfg.max_events = 200;
        match simulate(&p, &WeightVector::uniform(2), &cfg) {
            Err(DpsError::Statistics { class }) => assert_eq!(class, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mm1_ps_mean() {
        let p = SystemParams::new(vec![0.5], vec![1.0]).unwrap();
        let est = simulate(&p, &WeightVector::uniform(1), &SimConfig::new(42, 100_000)).unwrap();
        let z = (est.per_class_mean[0] - 2.0) / est.per_class_stderr[0];
        assert!(
            z.abs() <= 3.0,
            "mean {} stderr {}",
            est.per_class_mean[0],
            est.per_class_stderr[0]
        );
        assert_eq!(est.completed[0], 100_000);
        assert_eq!(est.aggregate_mean, est.per_class_mean[0]);
    }

    #[test]
    fn deterministic_for_a_seed() {
        let p = SystemParams::new(vec![0.4, 0.3], vec![2.0, 1.5]).unwrap();
        let g = WeightVector::new(vec![3.0, 1.0]).unwrap();
        let cfg = SimConfig::new(7, 2000);
        let a = simulate(&p, &g, &cfg).unwrap();
        let b = simulate(&p, &g, &cfg).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &g, &SimConfig::new(8, 2000)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn weight_scale_leaves_trajectory_unchanged() {
        let p = SystemParams::new(vec![0.4, 0.3], vec![2.0, 1.5]).unwrap();
        let g = WeightVector::new(vec![3.0, 1.0]).unwrap();
        let cfg = SimConfig::new(11, 5000);
        let a = simulate(&p, &g, &cfg).unwrap();
        let b = simulate(&p, &g.scaled(4.0).unwrap(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

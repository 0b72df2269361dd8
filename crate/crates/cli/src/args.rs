use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use dps_core::solver::{log_grid, weight_family};
use dps_core::WeightVector;

use crate::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "dps",
    version,
    about = "Mean sojourn times, weight comparisons and simulation for DPS queues"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-class and aggregate mean sojourn times, with the PS and c-mu references.
    Solve {
        instance: PathBuf,
        /// Replace the instance weights by the geometric family, e.g. `x=2`.
        #[arg(long, value_name = "x=V")]
        family: Option<Family>,
    },
    /// Report G membership and the separation condition; exit 1 unless both hold.
    Check {
        instance: PathBuf,
        #[arg(long, value_name = "x=V")]
        family: Option<Family>,
    },
    /// Compare two weight vectors; exit 0 when certified and alpha is no worse.
    Compare {
        instance: PathBuf,
        /// Explicit weights `3,2,1` or a family member `x=5`.
        #[arg(long, value_name = "WEIGHTS")]
        alpha: WeightSpec,
        #[arg(long, value_name = "WEIGHTS")]
        beta: WeightSpec,
    },
    /// Aggregate sojourn time along the geometric weight family, as CSV.
    Sweep {
        instance: PathBuf,
        /// `lo:hi:n` for n log-spaced points, or an explicit list `1.5,2,4`.
        #[arg(long, default_value = "1.05:50:60")]
        grid: Grid,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the queue and compare with the exact solution; exit 5 if any |z| > 4.
    Simulate {
        instance: PathBuf,
        #[arg(long, value_name = "x=V")]
        family: Option<Family>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Completions recorded per class after warmup.
        #[arg(long, default_value_t = 200_000)]
        target: u64,
        /// Share of completions discarded as warmup.
        #[arg(long, default_value_t = 0.1)]
        warmup: f64,
        /// Per-class CSV destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parameter of the geometric weight family, written `x=V` or `V`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family(pub f64);

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = s.trim();
        let v = v.strip_prefix("x=").unwrap_or(v);
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("expected x=<number>, got `{s}`"))?;
        if !(x.is_finite() && x > 1.0) {
            return Err(format!("family parameter must exceed 1, got {x}"));
        }
        Ok(Family(x))
    }
}

impl Family {
    pub fn weights(self, classes: usize) -> Result<WeightVector, Failure> {
        Ok(weight_family(self.0, classes)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Explicit(Vec<f64>),
    Family(Family),
}

impl FromStr for WeightSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim_start().starts_with("x=") {
            return s.parse().map(WeightSpec::Family);
        }
        let weights = s
            .split(',')
            .map(|w| {
                let v: f64 = w
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad weight `{}` in `{s}`", w.trim()))?;
                if v.is_finite() && v > 0.0 {
                    Ok(v)
                } else {
                    Err(format!("weights must be positive and finite, got {v}"))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WeightSpec::Explicit(weights))
    }
}

impl WeightSpec {
    pub fn weights(&self, classes: usize) -> Result<WeightVector, Failure> {
        match self {
            WeightSpec::Family(f) => f.weights(classes),
            WeightSpec::Explicit(w) if w.len() != classes => Err(Failure::parse(format!(
                "{} weights given for an instance with {classes} classes",
                w.len()
            ))),
            WeightSpec::Explicit(w) => Ok(WeightVector::new(w.clone())?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Log { lo: f64, hi: f64, n: usize },
    List(Vec<f64>),
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let number = |t: &str| -> Result<f64, String> {
            let v: f64 = t.trim().parse().map_err(|_| format!("bad grid value `{}`", t.trim()))?;
            if v.is_finite() && v > 1.0 {
                Ok(v)
            } else {
                Err(format!("grid values must exceed 1, got {v}"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [lo, hi, n] => {
                let (lo, hi) = (number(lo)?, number(hi)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad point count `{}`", n.trim()))?;
                if n == 0 {
                    return Err("grid needs at least one point".into());
                }
                if hi < lo {
                    return Err(format!("grid upper end {hi} is below lower end {lo}"));
                }
                Ok(Grid::Log { lo, hi, n })
            }
            [list] => Ok(Grid::List(list.split(',').map(number).collect::<Result<_, _>>()?)),
            _ => Err(format!("expected lo:hi:n or a comma-separated list, got `{s}`")),
        }
    }
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            Grid::Log { lo, hi, n } => log_grid(*lo, *hi, *n),
            Grid::List(xs) => xs.clone(),
        }
    }
}

//! Analysis toolkit for M-class discriminatory processor sharing (DPS) queues
//! with Poisson arrivals and exponential service.
//!
//! * [`model`]: instances, weight vectors and the rate matrices `A`, `D`, `B`.
//! * [`solver`]: expected sojourn times, PS and c-mu baselines, weight sweeps.
//! * [`monotonicity`]: sufficient conditions under which a more discriminating
//!   weight vector cannot increase the mean sojourn time, and the numeric
//!   checks behind them.
//! * [`simulator`]: seeded discrete-event simulation used to cross-validate
//!   the analytic values.
//!
//! The analytic modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the simulator and
//! the command-line front end use.
//!
//! ```
//! use dps_core::monotonicity::compare_policies;
//! use dps_core::solver::{ps_sojourn, solve_sojourn, weight_family};
//! use dps_core::SystemParams;
//!
//! let p = SystemParams::with_unit_arrivals(vec![160.0, 14.0, 1.2])?;
//! let g = weight_family(4.0, 3)?;
//! let sol = solve_sojourn(&p, &g)?;
//! assert!(sol.aggregate < ps_sojourn(&p));
//!
//! let report = compare_policies(&p, &weight_family(8.0, 3)?, &g)?;
//! assert!(report.certified && report.difference <= 0.0);
//! # Ok::<(), dps_core::DpsError>(())
//! ```

pub mod error;
pub mod linalg;
pub mod model;
pub mod monotonicity;
pub mod scalar;
pub mod simulator;
pub mod solver;
pub mod testing;

pub use error::{DpsError, Result};
pub use scalar::Scalar;

pub type SystemParams = model::SystemParams<f64>;
pub type WeightVector = model::WeightVector<f64>;
pub type RateMatrices = model::RateMatrices<f64>;
pub type SojournSolution = model::SojournSolution<f64>;
pub type SweepRow = solver::SweepRow<f64>;
pub type MonotonicityReport = monotonicity::MonotonicityReport<f64>;
pub type YVector = monotonicity::YVector<f64>;
pub type Matrix = linalg::Matrix<f64>;

pub type SystemParams32 = model::SystemParams<f32>;
pub type WeightVector32 = model::WeightVector<f32>;

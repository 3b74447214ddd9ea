//! Working-memory augmented neural adaptive control of a two-link planar arm.
//!
//! The crate is `no_std` (it needs `alloc`) and holds everything that is pure
//! computation: the arm model, the two-layer network with its continuous-time
//! update laws, the working memory with its attention strategies, a fixed-step
//! RK4 closed-loop simulator and the tracking-error metrics. File formats and
//! the command line live in the `wmac` crate.
//!
//! ```
//! use wmac_core::scenario::{preset, ControllerKind};
//! use wmac_core::simulation::{run_scenario, SimConfig};
//!
//! let spec = preset(1).unwrap().with_controller(ControllerKind::MannProposed).truncated(1.0);
//! let config = SimConfig::from_scenario(&spec);
//! let run = run_scenario(&spec, &config).unwrap();
//! assert!(run.summary.srmse[0] < 0.05);
//! ```
#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod memory;
pub mod metrics;
pub mod neurocontroller;
pub mod scenario;
pub mod simulation;

pub use error::{Error, Result};

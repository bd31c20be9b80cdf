//! Two-step Picard iteration for the forced, incompressible 2-D
//! Navier-Stokes Cauchy problem, realised on a periodic pseudo-spectral grid.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`], [`fft`], [`field`], [`spectral`], [`force`] and [`stokes`]:
//!   the periodic spectral machinery and the linear Stokes solve;
//! * [`picard`]: the first iterate `u1`, the second-step increment `u2*`
//!   and the amplitude comparison between them;
//! * [`convergence`]: the analytic border `F / (mu^4 nu) = 1`;
//! * [`sweep`]: batch runs over the reference parameter set and their CSV
//!   reports;
//! * [`oracles`]: independent checks of the spectral solver.

pub mod convergence;
pub mod error;
pub mod exec;
pub mod fft;
pub mod field;
pub mod force;
pub mod grid;
pub mod oracles;
pub mod picard;
pub mod spectral;
pub mod stokes;
pub mod sweep;

pub use convergence::{border_mu, convergence_predicate, dot_set_mu, reference_sample_set};
pub use error::{Error, Result};
pub use exec::Execution;
pub use field::VelocityField;
pub use force::{evaluate_force, ForceParams};
pub use grid::{GridSpec, TimeGrid};
pub use picard::{extract_profiles, first_iterate, run_iteration, second_increment, IterationResult, ProfileSample};
pub use stokes::{stokes_solve, HistoryOptions, VelocityHistory};

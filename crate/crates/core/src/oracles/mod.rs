//! Independent checks of the spectral solver: an analytic heat-kernel
//! solution, an analytic single-mode Stokes response, and a second-order
//! finite-difference solve of the same linear problem.

mod fd;
mod heat;
mod single_mode;

use serde::{Deserialize, Serialize};

pub use fd::{fd_oracle, fd_refinement, FdSolution, RefinementReport, FD_MAX_RESOLUTION};
pub use heat::{heat_oracle, HEAT_ORACLE_WIDTH};
pub use single_mode::single_mode_oracle;

use crate::error::Result;
use crate::force::ForceParams;
use crate::grid::{GridSpec, TimeGrid};

pub const HEAT_TOLERANCE: f64 = 1e-8;
pub const SINGLE_MODE_TOLERANCE: f64 = 1e-8;
pub const FD_TOLERANCE: f64 = 5e-2;
pub const FD_ORDER: f64 = 2.0;
pub const FD_ORDER_TOLERANCE: f64 = 0.3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    /// Grid, time and physical parameters of the check.
    pub setup: String,
    /// Relative error in the L2 norm.
    pub l2_error: f64,
    /// Relative error in the max norm; this is the pass metric.
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl OracleReport {
    pub(crate) fn new(name: &str, setup: String, l2_error: f64, max_error: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            setup,
            l2_error,
            max_error,
            tolerance,
            passed: max_error <= tolerance,
        }
    }
}

impl std::fmt::Display for OracleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{:<12} {} max_err={:.3e} l2_err={:.3e} tol={:.1e} [{}]",
            self.name,
            self.setup,
            self.max_error,
            self.l2_error,
            self.tolerance,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

/// Reference configuration of the oracle gate.
#[derive(Clone, Debug)]
pub struct OracleSuite {
    pub heat_grid: GridSpec,
    pub heat_time: TimeGrid,
    pub heat_nu: f64,
    pub mode_grid: GridSpec,
    pub mode: (i64, i64),
    pub mode_nu: f64,
    pub mode_time: TimeGrid,
    pub fd_params: ForceParams,
    pub fd_half_width: f64,
    pub fd_resolutions: (usize, usize),
    pub fd_time: TimeGrid,
}

impl Default for OracleSuite {
    fn default() -> Self {
        Self {
            heat_grid: GridSpec::default(),
            heat_time: TimeGrid::default(),
            heat_nu: 0.01,
            mode_grid: GridSpec::new(8.0, 16).expect("static grid"),
            mode: (1, 0),
            mode_nu: 0.1,
            mode_time: TimeGrid::default(),
            fd_params: ForceParams {
                mode: 1,
                amplitude: 1.0,
                mu: 2.0,
                nu: 0.1,
            },
            fd_half_width: fd::DEFAULT_FD_HALF_WIDTH,
            fd_resolutions: (32, 64),
            fd_time: TimeGrid::default(),
        }
    }
}

/// Outcome of the whole gate.
#[derive(Clone, Debug)]
pub struct GateReport {
    pub reports: Vec<OracleReport>,
    pub refinement: RefinementReport,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.passed) && self.refinement.passed
    }
}

impl OracleSuite {
    pub fn run(&self) -> Result<GateReport> {
        let heat = heat_oracle(&self.heat_grid, &self.heat_time, self.heat_nu)?;
        let mode = single_mode_oracle(self.mode, self.mode_nu, &self.mode_grid, &self.mode_time)?;
        let (coarse, fine) = self.fd_resolutions;
        let refinement = fd_refinement(&self.fd_params, self.fd_half_width, &[coarse, fine], &self.fd_time)?;
        let fd = refinement
            .reports
            .last()
            .cloned()
            .expect("refinement study has at least one level");
        Ok(GateReport {
            reports: vec![heat, mode, fd],
            refinement,
        })
    }
}

use num_complex::Complex64;

use super::{OracleReport, HEAT_TOLERANCE};
use crate::error::{Error, Result};
use crate::fft::Spectral2D;
use crate::grid::{GridSpec, TimeGrid};
use crate::stokes::DiffusionStep;

/// Width of the initial Gaussian `exp(-mu^2 r^2)`.
pub const HEAT_ORACLE_WIDTH: f64 = 2.0;

/// Diffuse `exp(-mu^2 r^2)` with the spectral stepper and compare against the
/// spreading Gaussian `exp(-mu^2 r^2 / s) / s`, `s = 4 mu^2 nu t + 1`.
///
/// The max-norm error tracks the origin amplitude `1/s` at every step; the
/// L2 error compares the whole field at `t_final`.
pub fn heat_oracle(grid: &GridSpec, tg: &TimeGrid, nu: f64) -> Result<OracleReport> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::param("nu", format!("must be non-negative, got {nu}")));
    }
    let mu = HEAT_ORACLE_WIDTH;
    let n = grid.resolution();
    let exact = |x: f64, y: f64, t: f64| {
        let s = 4.0 * mu * mu * nu * t + 1.0;
        (-mu * mu * (x * x + y * y) / s).exp() / s
    };
    let initial: Vec<f64> = (0..grid.len())
        .map(|k| exact(grid.coord(k / n), grid.coord(k % n), 0.0))
        .collect();
    let mut fft = Spectral2D::new(grid);
    let mut c = vec![Complex64::default(); grid.len()];
    fft.forward(&initial, &mut c)?;

    // the origin sits on grid line N/2, where exp(i k x) = (-1)^m
    let parity: Vec<f64> = (0..n)
        .map(|i| if grid.mode_index(i) % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let origin = |c: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += c[i * n + j].re * parity[i] * parity[j];
            }
        }
        s
    };

    let step = DiffusionStep::new(grid, nu, tg.dt());
    let mut max_err = (origin(&c) - 1.0).abs();
    for m in 1..=tg.steps() {
        step.decay(&mut c);
        let t = tg.time(m);
        let want = exact(0.0, 0.0, t);
        max_err = max_err.max((origin(&c) - want).abs() / want);
    }

    let mut field = vec![0.0; grid.len()];
    fft.inverse(&c, &mut field)?;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, v) in field.iter().enumerate() {
        let e = exact(grid.coord(k / n), grid.coord(k % n), tg.t_final());
        num += (v - e) * (v - e);
        den += e * e;
    }
    Ok(OracleReport::new(
        "heat",
        format!(
            "L={} N={} t_final={} steps={} nu={} mu={}",
            grid.half_width(),
            n,
            tg.t_final(),
            tg.steps(),
            nu,
            mu
        ),
        (num / den).sqrt(),
        max_err,
        HEAT_TOLERANCE,
    ))
}

use super::{OracleReport, SINGLE_MODE_TOLERANCE};
use crate::error::{Error, Result};
use crate::fft::Spectral2D;
use crate::field::{SpectralVelocity, VelocityField};
use crate::grid::{GridSpec, TimeGrid};
use crate::stokes::{stokes_solve, HistoryOptions};

/// Constant divergence-free forcing `e cos(k.x)` with `e` perpendicular to
/// `k`; the exact response is `(1 - exp(-nu|k|^2 t)) / (nu|k|^2) e cos(k.x)`.
pub fn single_mode_oracle(
    mode: (i64, i64),
    nu: f64,
    grid: &GridSpec,
    tg: &TimeGrid,
) -> Result<OracleReport> {
    if mode == (0, 0) {
        return Err(Error::param("mode", "wavenumber must be non-zero"));
    }
    let half = grid.resolution() as i64 / 2;
    if mode.0.abs() >= half || mode.1.abs() >= half {
        return Err(Error::param("mode", format!("{mode:?} is not resolved on the grid")));
    }
    if !(nu.is_finite() && nu > 0.0) {
        return Err(Error::param("nu", format!("must be positive, got {nu}")));
    }
    let scale = std::f64::consts::PI / grid.half_width();
    let (kx, ky) = (mode.0 as f64 * scale, mode.1 as f64 * scale);
    let k2 = kx * kx + ky * ky;
    let kn = k2.sqrt();
    let (ex, ey) = (-ky / kn, kx / kn);
    let shape = VelocityField::from_fn(grid, |x, y| {
        let c = (kx * x + ky * y).cos();
        (ex * c, ey * c)
    });

    let mut fft = Spectral2D::new(grid);
    let f_hat = shape.to_spectral(&mut fft)?;
    let mut force = |_: usize, _: f64, out: &mut SpectralVelocity| {
        out.clone_from(&f_hat);
        Ok(())
    };
    let history = stokes_solve(&mut force, nu, grid, tg, HistoryOptions::every_step())?;

    let lambda = nu * k2;
    let (mut max_err, mut num, mut den) = (0.0f64, 0.0, 0.0);
    for (_, t, u) in history.snapshots() {
        let amp = -(-lambda * t).exp_m1() / lambda;
        if amp == 0.0 {
            max_err = max_err.max(u.max_magnitude());
            continue;
        }
        let mut step_err = 0.0f64;
        for k in 0..grid.len() {
            let dx = u.ux[k] - amp * shape.ux[k];
            let dy = u.uy[k] - amp * shape.uy[k];
            step_err = step_err.max(dx.hypot(dy));
            if t == tg.t_final() {
                num += dx * dx + dy * dy;
                den += (amp * shape.ux[k]).powi(2) + (amp * shape.uy[k]).powi(2);
            }
        }
        max_err = max_err.max(step_err / amp);
    }
    Ok(OracleReport::new(
        "single_mode",
        format!(
            "L={} N={} t_final={} steps={} nu={} m=({}, {}) |k|={:.6}",
            grid.half_width(),
            grid.resolution(),
            tg.t_final(),
            tg.steps(),
            nu,
            mode.0,
            mode.1,
            kn
        ),
        (num / den).sqrt(),
        max_err,
        SINGLE_MODE_TOLERANCE,
    ))
}

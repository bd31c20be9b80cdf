//! The two-step iteration: `u1` from the applied force, then the increment
//! `u2*` driven by `-(u1.grad)u1`, both with zero initial data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Spectral2D;
use crate::field::{max_magnitude, SpectralVelocity, VelocityField};
use crate::force::ForceParams;
use crate::grid::{GridSpec, TimeGrid};
use crate::spectral::{Convection, Wavenumbers};
use crate::stokes::{prepare_force, stokes_solve, DiffusionStep, HistoryOptions, VelocityHistory};

/// Spectrum of the force's spatial profile, projected and Nyquist-free.
fn projected_profile(p: &ForceParams, grid: &GridSpec, fft: &mut Spectral2D) -> Result<SpectralVelocity> {
    let wn = Wavenumbers::new(grid);
    let f = VelocityField::from_fn(grid, |x, y| p.spatial_profile(x, y));
    let mut g = f.to_spectral(fft)?;
    prepare_force(&mut g, grid, &wn);
    Ok(g)
}

/// First iterate: the Stokes response to the applied force.
pub fn first_iterate(p: &ForceParams, grid: &GridSpec, tg: &TimeGrid) -> Result<VelocityHistory> {
    first_iterate_with(p, grid, tg, HistoryOptions::default())
}

pub fn first_iterate_with(
    p: &ForceParams,
    grid: &GridSpec,
    tg: &TimeGrid,
    opts: HistoryOptions,
) -> Result<VelocityHistory> {
    p.validate()?;
    let mut fft = Spectral2D::new(grid);
    let g = projected_profile(p, grid, &mut fft)?;
    let mut force = |_: usize, t: f64, out: &mut SpectralVelocity| {
        out.assign_scaled(p.time_kernel(t), &g);
        Ok(())
    };
    stokes_solve(&mut force, p.nu, grid, tg, opts)
}

/// Second-step increment forced by `-(u1.grad)u1`.
///
/// `u1` is read at every quadrature time; steps that fall between stored
/// snapshots are linearly interpolated.
pub fn second_increment(
    u1: &VelocityHistory,
    p: &ForceParams,
    grid: &GridSpec,
    tg: &TimeGrid,
) -> Result<VelocityHistory> {
    second_increment_with(u1, p, grid, tg, HistoryOptions::default())
}

pub fn second_increment_with(
    u1: &VelocityHistory,
    p: &ForceParams,
    grid: &GridSpec,
    tg: &TimeGrid,
    opts: HistoryOptions,
) -> Result<VelocityHistory> {
    p.validate()?;
    if u1.grid() != grid || u1.time_grid() != tg {
        return Err(Error::param(
            "u1",
            "history was produced on a different grid or time discretisation",
        ));
    }
    let mut fft = Spectral2D::new(grid);
    let mut conv = Convection::new(grid);
    let mut force = |m: usize, _: f64, out: &mut SpectralVelocity| {
        let u = u1.interpolate(m)?;
        let u_hat = u.to_spectral(&mut fft)?;
        conv.evaluate(&u_hat, Some((&u.ux, &u.uy)), &mut fft, out)?;
        out.scale(-1.0);
        Ok(())
    };
    stokes_solve(&mut force, p.nu, grid, tg, opts)
}

/// Both iterates plus their space-time maxima.
#[derive(Clone, Debug)]
pub struct IterationResult {
    pub params: ForceParams,
    pub u1: VelocityHistory,
    pub u2star: VelocityHistory,
    pub max_u1: f64,
    pub max_u2star: f64,
    /// `max_u2star / max_u1`, absent when `max_u1 == 0`.
    pub ratio: Option<f64>,
    /// A non-zero force produced an identically zero first iterate.
    pub degenerate: bool,
}

impl IterationResult {
    pub fn grid(&self) -> &GridSpec {
        self.u1.grid()
    }
}

pub fn run_iteration(p: &ForceParams, grid: &GridSpec, tg: &TimeGrid) -> Result<IterationResult> {
    run_iteration_with(p, grid, tg, HistoryOptions::default())
}

/// Advances `u1` and `u2*` in lockstep so the convective forcing always sees
/// the exact `u1` at each quadrature time, whatever the storage stride.
/// Equivalent to [`first_iterate`] followed by [`second_increment`] on an
/// unthinned history.
pub fn run_iteration_with(
    p: &ForceParams,
    grid: &GridSpec,
    tg: &TimeGrid,
    opts: HistoryOptions,
) -> Result<IterationResult> {
    p.validate()?;
    let wn = Wavenumbers::new(grid);
    let step = DiffusionStep::new(grid, p.nu, tg.dt());
    let mut fft = Spectral2D::new(grid);
    let mut conv = Convection::new(grid);
    let g = projected_profile(p, grid, &mut fft)?;

    let mut u1_hat = SpectralVelocity::zeros(grid);
    let mut u2_hat = SpectralVelocity::zeros(grid);
    let mut c_prev = SpectralVelocity::zeros(grid);
    let mut c_next = SpectralVelocity::zeros(grid);
    let mut u1_hist = VelocityHistory::new(*grid, *tg);
    let mut u2_hist = VelocityHistory::new(*grid, *tg);
    u1_hist.record(0, VelocityField::zeros(grid), true);
    u2_hist.record(0, VelocityField::zeros(grid), true);

    let len = grid.len();
    let (mut u1x, mut u1y) = (vec![0.0; len], vec![0.0; len]);
    let (mut u2x, mut u2y) = (vec![0.0; len], vec![0.0; len]);
    let last = tg.steps();
    for m in 1..=last {
        let (t0, t1) = (tg.time(m - 1), tg.time(m));
        step.advance_separable(&mut u1_hat, &g, p.time_kernel(t0), p.time_kernel(t1));
        fft.inverse_pair(&u1_hat.x, &u1_hat.y, &mut u1x, &mut u1y)?;
        let max1 = max_magnitude(&u1x, &u1y);
        if !max1.is_finite() {
            return Err(Error::NonFinite { step: m, time: t1 });
        }

        conv.evaluate(&u1_hat, Some((&u1x, &u1y)), &mut fft, &mut c_next)?;
        c_next.scale(-1.0);
        prepare_force(&mut c_next, grid, &wn);
        step.advance_velocity(&mut u2_hat, &c_prev, &c_next);
        std::mem::swap(&mut c_prev, &mut c_next);
        fft.inverse_pair(&u2_hat.x, &u2_hat.y, &mut u2x, &mut u2y)?;
        let max2 = max_magnitude(&u2x, &u2y);
        if !max2.is_finite() {
            return Err(Error::NonFinite { step: m, time: t1 });
        }

        u1_hist.observe(max1);
        u2_hist.observe(max2);
        if opts.stores(m, last) {
            u1_hist.store(m, VelocityField::from_components(u1x.clone(), u1y.clone(), grid)?);
            u2_hist.store(m, VelocityField::from_components(u2x.clone(), u2y.clone(), grid)?);
        }
    }
    Ok(assemble(*p, u1_hist, u2_hist))
}

/// Compose a result from separately computed histories.
pub fn assemble(params: ForceParams, u1: VelocityHistory, u2star: VelocityHistory) -> IterationResult {
    let max_u1 = u1.max_magnitude();
    let max_u2star = u2star.max_magnitude();
    let ratio = (max_u1 > 0.0).then(|| max_u2star / max_u1);
    IterationResult {
        params,
        degenerate: max_u1 == 0.0 && params.amplitude > 0.0,
        u1,
        u2star,
        max_u1,
        max_u2star,
        ratio,
    }
}

/// `|u1|` and `|u2*|` at one polar point at the comparison time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r: f64,
    pub phi: f64,
    pub amp1: f64,
    pub amp2: f64,
}

/// Sample both final-time amplitudes on the polar grid `radii x angles`.
pub fn extract_profiles(res: &IterationResult, radii: &[f64], angles: &[f64]) -> Result<Vec<ProfileSample>> {
    let grid = *res.grid();
    let limit = grid.half_width() - grid.dx();
    for &r in radii {
        if !(r.is_finite() && (0.0..=limit).contains(&r)) {
            return Err(Error::param(
                "radius",
                format!("{r} is outside [0, {limit}]"),
            ));
        }
    }
    if let Some(phi) = angles.iter().find(|a| !a.is_finite()) {
        return Err(Error::param("angle", format!("non-finite angle {phi}")));
    }
    let (Some(u1), Some(u2)) = (res.u1.last(), res.u2star.last()) else {
        return Err(Error::param("result", "empty history"));
    };
    let (m1, m2) = (u1.magnitudes(), u2.magnitudes());
    let mut out = Vec::with_capacity(radii.len() * angles.len());
    for &r in radii {
        for &phi in angles {
            let (x, y) = (r * phi.cos(), r * phi.sin());
            out.push(ProfileSample {
                r,
                phi,
                amp1: bilinear(&m1, &grid, x, y),
                amp2: bilinear(&m2, &grid, x, y),
            });
        }
    }
    Ok(out)
}

/// Bilinear interpolation of a periodic grid function.
pub fn bilinear(values: &[f64], grid: &GridSpec, x: f64, y: f64) -> f64 {
    let n = grid.resolution();
    let dx = grid.dx();
    let fx = (x + grid.half_width()) / dx;
    let fy = (y + grid.half_width()) / dx;
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - x0, fy - y0);
    let wrap = |i: f64| (i as i64).rem_euclid(n as i64) as usize;
    let (i0, j0) = (wrap(x0), wrap(y0));
    let (i1, j1) = ((i0 + 1) % n, (j0 + 1) % n);
    let v = |i: usize, j: usize| values[grid.index(i, j)];
    (1.0 - tx) * ((1.0 - ty) * v(i0, j0) + ty * v(i0, j1)) + tx * ((1.0 - ty) * v(i1, j0) + ty * v(i1, j1))
}

/// `count` equally spaced angles covering `[0, pi]` inclusive.
pub fn half_plane_angles(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count)
            .map(|i| std::f64::consts::PI * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (GridSpec, TimeGrid) {
        (GridSpec::new(4.0, 32).unwrap(), TimeGrid::new(0.5, 20).unwrap())
    }

    #[test]
    fn zero_force_gives_zero_iterates() {
        let (g, tg) = small();
        let p = ForceParams::new(1, 0.0, 2.0, 0.1).unwrap();
        let res = run_iteration(&p, &g, &tg).unwrap();
        assert_eq!(res.max_u1, 0.0);
        assert_eq!(res.max_u2star, 0.0);
        assert_eq!(res.ratio, None);
        assert!(!res.degenerate);
    }

    #[test]
    fn fused_run_matches_composition() {
        let (g, tg) = small();
        let p = ForceParams::new(2, 5.0, 1.5, 0.1).unwrap();
        let u1 = first_iterate_with(&p, &g, &tg, HistoryOptions::every_step()).unwrap();
        let u2 = second_increment_with(&u1, &p, &g, &tg, HistoryOptions::every_step()).unwrap();
        let fused = run_iteration_with(&p, &g, &tg, HistoryOptions::every_step()).unwrap();
        assert!((fused.max_u1 - u1.max_magnitude()).abs() <= 1e-12 * fused.max_u1);
        assert!((fused.max_u2star - u2.max_magnitude()).abs() <= 1e-12 * fused.max_u2star);
        for ((_, _, a), (_, _, b)) in fused.u2star.snapshots().zip(u2.snapshots()) {
            for k in 0..g.len() {
                assert!((a.ux[k] - b.ux[k]).abs() <= 1e-12 * fused.max_u2star);
                assert!((a.uy[k] - b.uy[k]).abs() <= 1e-12 * fused.max_u2star);
            }
        }
    }

    #[test]
    fn mismatched_history_is_rejected() {
        let (g, tg) = small();
        let p = ForceParams::new(1, 1.0, 2.0, 0.1).unwrap();
        let u1 = first_iterate(&p, &g, &tg).unwrap();
        let other = TimeGrid::new(0.5, 10).unwrap();
        assert!(second_increment(&u1, &p, &g, &other).is_err());
    }

    #[test]
    fn profile_radius_bounds() {
        let (g, tg) = small();
        let p = ForceParams::new(1, 1.0, 2.0, 0.1).unwrap();
        let res = run_iteration(&p, &g, &tg).unwrap();
        assert!(extract_profiles(&res, &[3.9], &[0.0]).is_err());
        assert!(extract_profiles(&res, &[-0.1], &[0.0]).is_err());
        assert!(extract_profiles(&res, &[3.75], &[0.0]).is_ok());
        let s = extract_profiles(&res, &[0.0], &half_plane_angles(5)).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.iter().all(|x| x.amp1 == s[0].amp1 && x.amp2 == s[0].amp2));
    }

    #[test]
    fn bilinear_reproduces_linear_functions() {
        let g = GridSpec::new(2.0, 16).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|k| 1.0 + 2.0 * g.coord(k / 16) - 0.5 * g.coord(k % 16))
            .collect();
        for &(x, y) in &[(0.1, 0.2), (-1.3, 0.77), (0.0, 0.0), (1.7, -1.9)] {
            assert!((bilinear(&f, &g, x, y) - (1.0 + 2.0 * x - 0.5 * y)).abs() < 1e-13);
        }
    }

    #[test]
    fn angles_cover_half_plane() {
        let a = half_plane_angles(17);
        assert_eq!(a.len(), 17);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[16], std::f64::consts::PI);
    }
}

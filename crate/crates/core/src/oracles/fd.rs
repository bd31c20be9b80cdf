//! Second-order finite-difference solve of the first-iterate Stokes problem.
//!
//! Collocated centred differences on the same periodic box: a five-point
//! Laplacian for diffusion, Heun (explicit RK2) in time, and a discrete
//! pressure-Poisson projection of the forcing solved by conjugate gradients.
//! No Fourier transforms are involved.

use super::{OracleReport, FD_ORDER, FD_ORDER_TOLERANCE, FD_TOLERANCE};
use crate::error::{Error, Result};
use crate::force::ForceParams;
use crate::grid::{GridSpec, TimeGrid};
use crate::picard::first_iterate;

pub const FD_MAX_RESOLUTION: usize = 64;
pub(crate) const DEFAULT_FD_HALF_WIDTH: f64 = 2.5;

struct Stencil {
    n: usize,
    inv_2dx: f64,
    inv_dx2: f64,
}

impl Stencil {
    #[inline]
    fn at(&self, i: usize, j: usize, di: isize, dj: isize) -> usize {
        let n = self.n as isize;
        let ii = (i as isize + di).rem_euclid(n) as usize;
        let jj = (j as isize + dj).rem_euclid(n) as usize;
        ii * self.n + jj
    }

    fn gradient(&self, p: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        for i in 0..self.n {
            for j in 0..self.n {
                let k = i * self.n + j;
                gx[k] = (p[self.at(i, j, 1, 0)] - p[self.at(i, j, -1, 0)]) * self.inv_2dx;
                gy[k] = (p[self.at(i, j, 0, 1)] - p[self.at(i, j, 0, -1)]) * self.inv_2dx;
            }
        }
    }

    fn divergence(&self, vx: &[f64], vy: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            for j in 0..self.n {
                out[i * self.n + j] = (vx[self.at(i, j, 1, 0)] - vx[self.at(i, j, -1, 0)]
                    + vy[self.at(i, j, 0, 1)]
                    - vy[self.at(i, j, 0, -1)])
                    * self.inv_2dx;
            }
        }
    }

    fn laplacian(&self, u: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            for j in 0..self.n {
                out[i * self.n + j] = (u[self.at(i, j, 1, 0)]
                    + u[self.at(i, j, -1, 0)]
                    + u[self.at(i, j, 0, 1)]
                    + u[self.at(i, j, 0, -1)]
                    - 4.0 * u[i * self.n + j])
                    * self.inv_dx2;
            }
        }
    }

    /// `-div(grad p)`, symmetric positive semi-definite.
    fn neg_div_grad(&self, p: &[f64], gx: &mut [f64], gy: &mut [f64], out: &mut [f64]) {
        self.gradient(p, gx, gy);
        self.divergence(gx, gy, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Conjugate gradients for the consistent singular system `-div grad p = rhs`.
fn poisson_cg(st: &Stencil, rhs: &[f64]) -> Vec<f64> {
    let len = rhs.len();
    let mut p = vec![0.0; len];
    let mut r = rhs.to_vec();
    let mut d = r.clone();
    let (mut gx, mut gy, mut ad) = (vec![0.0; len], vec![0.0; len], vec![0.0; len]);
    let mut rr = dot(&r, &r);
    let stop = 1e-28 * rr.max(f64::MIN_POSITIVE);
    for _ in 0..10 * len {
        if rr <= stop {
            break;
        }
        st.neg_div_grad(&d, &mut gx, &mut gy, &mut ad);
        let alpha = rr / dot(&d, &ad);
        for k in 0..len {
            p[k] += alpha * d[k];
            r[k] -= alpha * ad[k];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for k in 0..len {
            d[k] = r[k] + beta * d[k];
        }
        rr = rr_new;
    }
    p
}

/// Finite-difference first iterate.
#[derive(Clone, Debug)]
pub struct FdSolution {
    pub grid: GridSpec,
    /// `max |u|` over grid points and the outer time steps.
    pub max_magnitude: f64,
    pub final_ux: Vec<f64>,
    pub final_uy: Vec<f64>,
    /// `max |div_h u|` of the discretely projected forcing.
    pub forcing_divergence: f64,
}

pub fn fd_first_iterate(p: &ForceParams, grid: &GridSpec, tg: &TimeGrid) -> Result<FdSolution> {
    p.validate()?;
    let n = grid.resolution();
    if n > FD_MAX_RESOLUTION {
        return Err(Error::param(
            "resolution",
            format!("finite-difference oracle runs at N <= {FD_MAX_RESOLUTION}, got {n}"),
        ));
    }
    let dx = grid.dx();
    let bound = dx * dx / (4.0 * p.nu);
    if tg.dt() > bound {
        return Err(Error::StabilityBound {
            dt: tg.dt(),
            required: bound,
        });
    }
    let st = Stencil {
        n,
        inv_2dx: 0.5 / dx,
        inv_dx2: 1.0 / (dx * dx),
    };
    let len = grid.len();

    let (mut gx, mut gy) = (vec![0.0; len], vec![0.0; len]);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = p.spatial_profile(grid.coord(i), grid.coord(j));
            gx[i * n + j] = a;
            gy[i * n + j] = b;
        }
    }
    let mut div = vec![0.0; len];
    st.divergence(&gx, &gy, &mut div);
    let rhs: Vec<f64> = div.iter().map(|v| -v).collect();
    let pressure = poisson_cg(&st, &rhs);
    let (mut px, mut py) = (vec![0.0; len], vec![0.0; len]);
    st.gradient(&pressure, &mut px, &mut py);
    for k in 0..len {
        gx[k] -= px[k];
        gy[k] -= py[k];
    }
    st.divergence(&gx, &gy, &mut div);
    let scale = gx.iter().chain(&gy).fold(0.0f64, |m, v| m.max(v.abs()));
    let forcing_divergence = div.iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale.max(f64::MIN_POSITIVE);

    // u_t = nu lap u + K(t) g
    let rate = |u: &[f64], g: &[f64], kt: f64, lap: &mut Vec<f64>, out: &mut Vec<f64>| {
        st.laplacian(u, lap);
        for k in 0..len {
            out[k] = p.nu * lap[k] + kt * g[k];
        }
    };
    let dt = tg.dt();
    let (mut ux, mut uy) = (vec![0.0; len], vec![0.0; len]);
    let (mut sx, mut sy) = (vec![0.0; len], vec![0.0; len]);
    let (mut r0x, mut r0y) = (vec![0.0; len], vec![0.0; len]);
    let (mut r1x, mut r1y) = (vec![0.0; len], vec![0.0; len]);
    let mut lap = vec![0.0; len];
    let mut max_magnitude = 0.0f64;
    for m in 0..tg.steps() {
        let (k0, k1) = (p.time_kernel(tg.time(m)), p.time_kernel(tg.time(m + 1)));
        rate(&ux, &gx, k0, &mut lap, &mut r0x);
        rate(&uy, &gy, k0, &mut lap, &mut r0y);
        for k in 0..len {
            sx[k] = ux[k] + dt * r0x[k];
            sy[k] = uy[k] + dt * r0y[k];
        }
        rate(&sx, &gx, k1, &mut lap, &mut r1x);
        rate(&sy, &gy, k1, &mut lap, &mut r1y);
        for k in 0..len {
            ux[k] += 0.5 * dt * (r0x[k] + r1x[k]);
            uy[k] += 0.5 * dt * (r0y[k] + r1y[k]);
            max_magnitude = max_magnitude.max(ux[k].hypot(uy[k]));
        }
        if !max_magnitude.is_finite() {
            return Err(Error::NonFinite {
                step: m + 1,
                time: tg.time(m + 1),
            });
        }
    }
    Ok(FdSolution {
        grid: *grid,
        max_magnitude,
        final_ux: ux,
        final_uy: uy,
        forcing_divergence,
    })
}

/// Compare the finite-difference `max |u1|` with the spectral solver on the
/// same box. The spectral reference runs at `max(64, 2N)` points per axis.
pub fn fd_oracle(p: &ForceParams, coarse: &GridSpec, tg: &TimeGrid) -> Result<OracleReport> {
    let fd = fd_first_iterate(p, coarse, tg)?;
    let n = coarse.resolution();
    let ref_n = (2 * n).max(64);
    let ref_grid = GridSpec::new(coarse.half_width(), ref_n)?;
    let spectral = first_iterate(p, &ref_grid, tg)?;
    let reference = spectral.max_magnitude();
    let max_error = if reference > 0.0 {
        (fd.max_magnitude - reference).abs() / reference
    } else {
        fd.max_magnitude
    };

    let stride = ref_n / n;
    let last = spectral.last().expect("history holds t = 0");
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let k = coarse.index(i, j);
            let kr = ref_grid.index(i * stride, j * stride);
            let (ex, ey) = (last.ux[kr], last.uy[kr]);
            num += (fd.final_ux[k] - ex).powi(2) + (fd.final_uy[k] - ey).powi(2);
            den += ex * ex + ey * ey;
        }
    }
    let l2_error = if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(OracleReport::new(
        "fd",
        format!(
            "L={} N={} (spectral N={}) t_final={} steps={} n={} F={} mu={} nu={}",
            coarse.half_width(),
            n,
            ref_n,
            tg.t_final(),
            tg.steps(),
            p.mode,
            p.amplitude,
            p.mu,
            p.nu
        ),
        l2_error,
        max_error,
        FD_TOLERANCE,
    ))
}

/// Discrepancy of the finite-difference solve at successive resolutions and
/// the observed order between the two finest.
#[derive(Clone, Debug)]
pub struct RefinementReport {
    pub resolutions: Vec<usize>,
    pub reports: Vec<OracleReport>,
    pub slope: f64,
    pub passed: bool,
}

impl std::fmt::Display for RefinementReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let errs: Vec<String> = self
            .resolutions
            .iter()
            .zip(&self.reports)
            .map(|(n, r)| format!("N={n}: {:.3e}", r.max_error))
            .collect();
        write!(
            f,
            "fd_order     {} slope={:.3} expected {}±{} [{}]",
            errs.join(", "),
            self.slope,
            FD_ORDER,
            FD_ORDER_TOLERANCE,
            if self.passed { "PASS" } else { "FAIL" }
        )
    }
}

pub fn fd_refinement(
    p: &ForceParams,
    half_width: f64,
    resolutions: &[usize],
    tg: &TimeGrid,
) -> Result<RefinementReport> {
    if resolutions.len() < 2 || resolutions.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::param(
            "resolutions",
            "need at least two resolutions, each doubling the previous",
        ));
    }
    let reports = resolutions
        .iter()
        .map(|&n| fd_oracle(p, &GridSpec::new(half_width, n)?, tg))
        .collect::<Result<Vec<_>>>()?;
    let k = reports.len();
    let slope = (reports[k - 2].max_error / reports[k - 1].max_error).log2();
    Ok(RefinementReport {
        resolutions: resolutions.to_vec(),
        passed: (slope - FD_ORDER).abs() <= FD_ORDER_TOLERANCE,
        reports,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ForceParams {
        ForceParams::new(1, 1.0, 2.0, 0.1).unwrap()
    }

    #[test]
    fn projected_forcing_is_discretely_solenoidal() {
        let g = GridSpec::new(DEFAULT_FD_HALF_WIDTH, 32).unwrap();
        let fd = fd_first_iterate(&params(), &g, &TimeGrid::new(0.1, 20).unwrap()).unwrap();
        assert!(fd.forcing_divergence < 1e-10, "{}", fd.forcing_divergence);
    }

    #[test]
    fn zero_force_agrees_exactly() {
        let g = GridSpec::new(DEFAULT_FD_HALF_WIDTH, 32).unwrap();
        let r = fd_oracle(&params().with_amplitude(0.0), &g, &TimeGrid::default()).unwrap();
        assert_eq!(r.max_error, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn stability_bound_is_enforced() {
        let g = GridSpec::new(DEFAULT_FD_HALF_WIDTH, 64).unwrap();
        let coarse_time = TimeGrid::new(1.0, 10).unwrap();
        match fd_oracle(&params().with_nu(1.5), &g, &coarse_time) {
            Err(Error::StabilityBound { dt, required }) => {
                assert_eq!(dt, 0.1);
                assert!(required < dt);
            }
            other => panic!("expected stability error, got {other:?}"),
        }
    }

    #[test]
    fn large_grids_rejected() {
        let g = GridSpec::new(DEFAULT_FD_HALF_WIDTH, 128).unwrap();
        assert!(fd_oracle(&params(), &g, &TimeGrid::default()).is_err());
    }
}

//! Leray projection and the dealiased pseudo-spectral convective term.

use num_complex::Complex64;

use crate::error::Result;
use crate::fft::Spectral2D;
use crate::field::{SpectralVelocity, VelocityField};
use crate::grid::GridSpec;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-axis wavenumber tables shared by the spectral operators.
#[derive(Clone, Debug)]
pub struct Wavenumbers {
    n: usize,
    /// Full lattice wavenumbers, Nyquist included.
    pub k: Vec<f64>,
    /// Derivative wavenumbers with the Nyquist slot zeroed.
    pub k_deriv: Vec<f64>,
    /// 2/3-rule mask per axis: `true` where `|m| <= N/3`.
    pub keep: Vec<bool>,
}

impl Wavenumbers {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.resolution();
        let k = grid.wavenumbers();
        let k_deriv = (0..n)
            .map(|i| if grid.is_nyquist(i) { 0.0 } else { k[i] })
            .collect();
        let keep = (0..n)
            .map(|i| 3 * grid.mode_index(i).unsigned_abs() as usize <= n)
            .collect();
        Self { n, k, k_deriv, keep }
    }

    #[inline]
    pub fn k_squared(&self, idx: usize) -> f64 {
        let kx = self.k[idx / self.n];
        let ky = self.k[idx % self.n];
        kx * kx + ky * ky
    }
}

/// Remove the gradient part, `u - k (k.u) / |k|^2` for every `k != 0`.
///
/// Evaluated in the equivalent 2-D form `k' (k'.u) / |k|^2` with
/// `k' = (-ky, kx)`, so the residual divergence is roundoff relative to the
/// projected field rather than to the input. This matters for the
/// convective term, which is nearly all gradient.
pub fn leray_project(v: &SpectralVelocity, grid: &GridSpec) -> SpectralVelocity {
    let mut out = v.clone();
    leray_project_in_place(&mut out, &Wavenumbers::new(grid));
    out
}

pub fn leray_project_in_place(v: &mut SpectralVelocity, wn: &Wavenumbers) {
    let n = wn.n;
    for i in 0..n {
        let kx = wn.k[i];
        for j in 0..n {
            let ky = wn.k[j];
            let k2 = kx * kx + ky * ky;
            if k2 == 0.0 {
                continue;
            }
            let idx = i * n + j;
            let curl = (v.y[idx] * kx - v.x[idx] * ky) / k2;
            v.x[idx] = -curl * ky;
            v.y[idx] = curl * kx;
        }
    }
}

/// Zero every coefficient on a Nyquist line.
pub(crate) fn zero_nyquist(v: &mut SpectralVelocity, grid: &GridSpec) {
    let n = grid.resolution();
    let h = n / 2;
    for j in 0..n {
        v.x[grid.index(h, j)] = Complex64::default();
        v.y[grid.index(h, j)] = Complex64::default();
        v.x[grid.index(j, h)] = Complex64::default();
        v.y[grid.index(j, h)] = Complex64::default();
    }
}

/// Scratch buffers for repeated evaluation of `(u.grad)u`.
pub struct Convection {
    grid: GridSpec,
    wn: Wavenumbers,
    spec_a: Vec<Complex64>,
    spec_b: Vec<Complex64>,
    ux: Vec<f64>,
    uy: Vec<f64>,
    dx_ux: Vec<f64>,
    dy_ux: Vec<f64>,
    dx_uy: Vec<f64>,
    dy_uy: Vec<f64>,
}

impl Convection {
    pub fn new(grid: &GridSpec) -> Self {
        let len = grid.len();
        Self {
            grid: *grid,
            wn: Wavenumbers::new(grid),
            spec_a: vec![Complex64::default(); len],
            spec_b: vec![Complex64::default(); len],
            ux: vec![0.0; len],
            uy: vec![0.0; len],
            dx_ux: vec![0.0; len],
            dy_ux: vec![0.0; len],
            dx_uy: vec![0.0; len],
            dy_uy: vec![0.0; len],
        }
    }

    /// Physical-space velocity from the last [`Convection::evaluate`] call.
    pub fn velocity(&self) -> (&[f64], &[f64]) {
        (&self.ux, &self.uy)
    }

    /// Spectrum of the dealiased `(u.grad)u` given the spectrum of `u`.
    ///
    /// `physical` may supply the already-known physical velocity to save a
    /// transform.
    pub fn evaluate(
        &mut self,
        u_hat: &SpectralVelocity,
        physical: Option<(&[f64], &[f64])>,
        fft: &mut Spectral2D,
        out: &mut SpectralVelocity,
    ) -> Result<()> {
        let n = self.grid.resolution();
        match physical {
            Some((px, py)) => {
                self.ux.copy_from_slice(px);
                self.uy.copy_from_slice(py);
            }
            None => fft.inverse_pair(&u_hat.x, &u_hat.y, &mut self.ux, &mut self.uy)?,
        }

        for c in 0..2 {
            let comp = if c == 0 { &u_hat.x } else { &u_hat.y };
            for i in 0..n {
                let kx = self.wn.k_deriv[i];
                for j in 0..n {
                    let ky = self.wn.k_deriv[j];
                    let idx = i * n + j;
                    let iu = I * comp[idx];
                    self.spec_a[idx] = iu * kx;
                    self.spec_b[idx] = iu * ky;
                }
            }
            let (dx, dy) = if c == 0 {
                (&mut self.dx_ux, &mut self.dy_ux)
            } else {
                (&mut self.dx_uy, &mut self.dy_uy)
            };
            fft.inverse_pair(&self.spec_a, &self.spec_b, dx, dy)?;
        }

        // reuse derivative buffers for the products
        for k in 0..self.grid.len() {
            let (u, v) = (self.ux[k], self.uy[k]);
            self.dx_ux[k] = u * self.dx_ux[k] + v * self.dy_ux[k];
            self.dx_uy[k] = u * self.dx_uy[k] + v * self.dy_uy[k];
        }
        fft.forward_pair(&self.dx_ux, &self.dx_uy, &mut out.x, &mut out.y)?;

        for i in 0..n {
            let keep_i = self.wn.keep[i];
            for j in 0..n {
                if !(keep_i && self.wn.keep[j]) {
                    let idx = i * n + j;
                    out.x[idx] = Complex64::default();
                    out.y[idx] = Complex64::default();
                }
            }
        }
        Ok(())
    }
}

/// Dealiased `(u.grad)u` of a physical velocity field.
pub fn convective_term(u: &VelocityField, grid: &GridSpec) -> Result<VelocityField> {
    let mut fft = Spectral2D::new(grid);
    let u_hat = u.to_spectral(&mut fft)?;
    let mut conv = Convection::new(grid);
    let mut out = SpectralVelocity::zeros(grid);
    conv.evaluate(&u_hat, Some((&u.ux, &u.uy)), &mut fft, &mut out)?;
    VelocityField::from_spectral(out, &mut fft)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use proptest::prelude::*;

    use super::*;
    use crate::fft::transform_forward;

    fn max_abs(v: &[Complex64]) -> f64 {
        v.iter().fold(0.0f64, |m, z| m.max(z.norm()))
    }

    fn random_spectrum(grid: &GridSpec, seed: u64) -> SpectralVelocity {
        let mut s = seed | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let ux: Vec<f64> = (0..grid.len()).map(|_| next()).collect();
        let uy: Vec<f64> = (0..grid.len()).map(|_| next()).collect();
        SpectralVelocity {
            x: transform_forward(&ux, grid).unwrap(),
            y: transform_forward(&uy, grid).unwrap(),
        }
    }

    #[test]
    fn gradient_is_annihilated() {
        let g = GridSpec::new(4.0, 32).unwrap();
        let phi = random_spectrum(&g, 7).x;
        let wn = Wavenumbers::new(&g);
        let n = g.resolution();
        let mut grad = SpectralVelocity::zeros(&g);
        for i in 0..n {
            for j in 0..n {
                let idx = g.index(i, j);
                grad.x[idx] = I * phi[idx] * wn.k[i];
                grad.y[idx] = I * phi[idx] * wn.k[j];
            }
        }
        let p = leray_project(&grad, &g);
        assert!(max_abs(&p.x) < 1e-12 * max_abs(&grad.x));
        assert!(max_abs(&p.y) < 1e-12 * max_abs(&grad.x));
    }

    #[test]
    fn residual_divergence_is_relative_to_the_output() {
        // a large gradient hiding a tiny solenoidal part
        let g = GridSpec::new(4.0, 32).unwrap();
        let phi = random_spectrum(&g, 11).x;
        let psi = random_spectrum(&g, 12).x;
        let wn = Wavenumbers::new(&g);
        let n = g.resolution();
        let mut v = SpectralVelocity::zeros(&g);
        for i in 0..n {
            for j in 0..n {
                let idx = g.index(i, j);
                let (kx, ky) = (wn.k[i], wn.k[j]);
                v.x[idx] = I * (phi[idx] * kx - 1e-9 * psi[idx] * ky);
                v.y[idx] = I * (phi[idx] * ky + 1e-9 * psi[idx] * kx);
            }
        }
        let p = leray_project(&v, &g);
        let div: Vec<Complex64> = (0..n * n)
            .map(|idx| p.x[idx] * wn.k[idx / n] + p.y[idx] * wn.k[idx % n])
            .collect();
        let k_max = wn.k.iter().fold(0.0f64, |m, k| m.max(k.abs()));
        assert!(max_abs(&div) <= 1e-14 * k_max * max_abs(&p.x).max(max_abs(&p.y)));
    }

    #[test]
    fn solenoidal_field_is_fixed_and_mean_passes() {
        let g = GridSpec::new(4.0, 32).unwrap();
        let psi = random_spectrum(&g, 11).x;
        let wn = Wavenumbers::new(&g);
        let n = g.resolution();
        let mut v = SpectralVelocity::zeros(&g);
        for i in 0..n {
            for j in 0..n {
                let idx = g.index(i, j);
                v.x[idx] = -I * psi[idx] * wn.k[j];
                v.y[idx] = I * psi[idx] * wn.k[i];
            }
        }
        v.x[0] = Complex64::new(0.3, 0.0);
        v.y[0] = Complex64::new(-0.2, 0.0);
        let p = leray_project(&v, &g);
        let scale = max_abs(&v.x).max(max_abs(&v.y));
        for k in 0..g.len() {
            assert!((p.x[k] - v.x[k]).norm() <= 1e-12 * scale);
            assert!((p.y[k] - v.y[k]).norm() <= 1e-12 * scale);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn projection_is_idempotent_and_transverse(seed in any::<u64>()) {
            let g = GridSpec::new(3.0, 16).unwrap();
            let wn = Wavenumbers::new(&g);
            let v = random_spectrum(&g, seed);
            let p1 = leray_project(&v, &g);
            let p2 = leray_project(&p1, &g);
            let scale = max_abs(&p1.x).max(max_abs(&p1.y));
            for k in 0..g.len() {
                prop_assert!((p1.x[k] - p2.x[k]).norm() <= 1e-12 * scale);
                prop_assert!((p1.y[k] - p2.y[k]).norm() <= 1e-12 * scale);
                let (i, j) = (k / 16, k % 16);
                let kdot = p1.x[k] * wn.k[i] + p1.y[k] * wn.k[j];
                prop_assert!(kdot.norm() <= 1e-12 * scale * wn.k_squared(k).sqrt().max(1.0));
            }
        }
    }

    #[test]
    fn constant_velocity_has_no_convection() {
        let g = GridSpec::new(8.0, 32).unwrap();
        let u = VelocityField::from_fn(&g, |_, _| (0.7, -1.3));
        let c = convective_term(&u, &g).unwrap();
        assert!(c.max_magnitude() < 1e-14);
    }

    #[test]
    fn shear_flow_has_no_convection() {
        let g = GridSpec::new(8.0, 32).unwrap();
        let u = VelocityField::from_fn(&g, |_, y| ((PI * y / 8.0).sin(), 0.0));
        let c = convective_term(&u, &g).unwrap();
        assert!(c.max_magnitude() < 1e-14);
    }

    #[test]
    fn taylor_green_matches_closed_form() {
        // (u.grad)u for u = (sin x cos y, -cos x sin y) is (sin 2x / 2, sin 2y / 2)
        for n in [16, 32, 64] {
            let g = GridSpec::new(PI, n).unwrap();
            let u = VelocityField::from_fn(&g, |x, y| (x.sin() * y.cos(), -x.cos() * y.sin()));
            let c = convective_term(&u, &g).unwrap();
            let exact = VelocityField::from_fn(&g, |x, y| {
                (0.5 * (2.0 * x).sin(), 0.5 * (2.0 * y).sin())
            });
            for k in 0..g.len() {
                assert!((c.ux[k] - exact.ux[k]).abs() < 1e-10);
                assert!((c.uy[k] - exact.uy[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dealiasing_removes_high_modes() {
        // a product of two modes at m = 5 lands on m = 10 > 16/3 and must vanish
        let g = GridSpec::new(PI, 16).unwrap();
        let u = VelocityField::from_fn(&g, |x, _| (1.0 + (5.0 * x).sin(), 0.0));
        let c = convective_term(&u, &g).unwrap();
        let spec = c.spectral().unwrap();
        let n = g.resolution();
        for i in 0..n {
            for j in 0..n {
                let m = g.mode_index(i).abs().max(g.mode_index(j).abs());
                if 3 * m > 16 {
                    assert_eq!(spec.x[g.index(i, j)], Complex64::default());
                }
            }
        }
        // the surviving m = 5 part is 5 cos(5x)
        let exact = VelocityField::from_fn(&g, |x, _| (5.0 * (5.0 * x).cos(), 0.0));
        for k in 0..g.len() {
            assert!((c.ux[k] - exact.ux[k]).abs() < 1e-12);
        }
    }
}

//! The radial applied force with circumferential mode `n`.
//!
//! In polar coordinates the force is purely radial,
//!
//! ```text
//! f_r = F r^(n+1) exp(-mu^2 r^2) cos(n phi) / (4 mu^2 nu t + 1)^2,   f_phi = 0,
//! ```
//!
//! and is embedded in Cartesian components as `f_r (x/r, y/r)`. Since
//! `r^n cos(n phi) = Re((x + iy)^n)`, each component is a polynomial times a
//! Gaussian and the origin needs no special casing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::VelocityField;
use crate::grid::GridSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceParams {
    /// Circumferential mode `n >= 1`.
    pub mode: u32,
    /// Amplitude `F_n`.
    pub amplitude: f64,
    /// Gaussian width parameter `mu`.
    pub mu: f64,
    /// Kinematic viscosity `nu`.
    pub nu: f64,
}

impl ForceParams {
    pub fn new(mode: u32, amplitude: f64, mu: f64, nu: f64) -> Result<Self> {
        let p = Self {
            mode,
            amplitude,
            mu,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    /// `amplitude == 0` is accepted and yields the zero force.
    pub fn validate(&self) -> Result<()> {
        if self.mode == 0 {
            return Err(Error::param("mode", "circumferential mode must be >= 1"));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::param(
                "amplitude",
                format!("must be finite and non-negative, got {}", self.amplitude),
            ));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::param("mu", format!("must be positive, got {}", self.mu)));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::param("nu", format!("must be positive, got {}", self.nu)));
        }
        Ok(())
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn with_mu(self, mu: f64) -> Self {
        Self { mu, ..self }
    }

    pub fn with_nu(self, nu: f64) -> Self {
        Self { nu, ..self }
    }

    /// Time kernel `(4 mu^2 nu t + 1)^-2`.
    pub fn time_kernel(&self, t: f64) -> f64 {
        let d = 4.0 * self.mu * self.mu * self.nu * t + 1.0;
        1.0 / (d * d)
    }

    /// Cartesian force at `(x, y)` and `t = 0`.
    pub fn spatial_profile(&self, x: f64, y: f64) -> (f64, f64) {
        let r2 = x * x + y * y;
        let re_zn = Complex64::new(x, y).powu(self.mode).re;
        let s = self.amplitude * re_zn * (-self.mu * self.mu * r2).exp();
        (s * x, s * y)
    }

    /// Signed radial force magnitude `f_r` at polar point `(r, phi)`.
    pub fn radial_magnitude(&self, r: f64, phi: f64, t: f64) -> f64 {
        self.amplitude
            * r.powi(self.mode as i32 + 1)
            * (-self.mu * self.mu * r * r).exp()
            * (self.mode as f64 * phi).cos()
            * self.time_kernel(t)
    }
}

/// The applied force sampled on `grid` at time `t >= 0`.
pub fn evaluate_force(p: &ForceParams, t: f64, grid: &GridSpec) -> Result<VelocityField> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::param("t", format!("time must be >= 0, got {t}")));
    }
    p.validate()?;
    let kernel = p.time_kernel(t);
    Ok(VelocityField::from_fn(grid, |x, y| {
        let (fx, fy) = p.spatial_profile(x, y);
        (fx * kernel, fy * kernel)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32) -> ForceParams {
        ForceParams::new(n, 1.0, 2.0, 0.01).unwrap()
    }

    #[test]
    fn validation() {
        assert!(ForceParams::new(0, 1.0, 2.0, 0.01).is_err());
        assert!(ForceParams::new(1, -1.0, 2.0, 0.01).is_err());
        assert!(ForceParams::new(1, 1.0, 0.0, 0.01).is_err());
        assert!(ForceParams::new(1, 1.0, 2.0, 0.0).is_err());
        assert!(ForceParams::new(1, 0.0, 2.0, 0.01).is_ok());
        let g = GridSpec::new(8.0, 16).unwrap();
        assert!(evaluate_force(&p(1), -0.1, &g).is_err());
    }

    #[test]
    fn vanishes_at_origin() {
        for n in 1..=5 {
            assert_eq!(p(n).spatial_profile(0.0, 0.0), (0.0, 0.0));
        }
        let g = GridSpec::new(8.0, 16).unwrap();
        let f = evaluate_force(&p(1), 0.0, &g).unwrap();
        let origin = g.index(8, 8);
        assert_eq!((f.ux[origin], f.uy[origin]), (0.0, 0.0));
    }

    #[test]
    fn point_value_and_kernel() {
        let e4 = (-4.0f64).exp();
        let (fx, fy) = p(1).spatial_profile(1.0, 0.0);
        assert!((fx - e4).abs() < 1e-15);
        assert_eq!(fy, 0.0);
        assert!((fx - 0.018315638888734).abs() < 1e-12);
        // 4 mu^2 nu t = 1 at t = 1 / (4 * 4 * 0.01)
        let t = 1.0 / 0.16;
        assert!((p(1).time_kernel(t) - 0.25).abs() < 1e-15);
        assert!((p(1).radial_magnitude(1.0, 0.0, t) - e4 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn cartesian_embedding_is_radial() {
        for n in 1..=5 {
            let q = ForceParams::new(n, 3.0, 1.5, 0.1).unwrap();
            for &(r, phi) in &[(0.3, 0.2), (0.7, 2.0), (1.1, -1.0), (0.5, 3.0)] {
                let (x, y) = (r * f64::cos(phi), r * f64::sin(phi));
                let (fx, fy) = q.spatial_profile(x, y);
                let fr = q.radial_magnitude(r, phi, 0.0);
                assert!((fx - fr * phi.cos()).abs() < 1e-13);
                assert!((fy - fr * phi.sin()).abs() < 1e-13);
                // azimuthal component vanishes
                assert!((-fx * phi.sin() + fy * phi.cos()).abs() < 1e-13);
            }
        }
    }
}

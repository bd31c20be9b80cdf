use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Spectral2D;
use crate::grid::GridSpec;

/// Spectral coefficients of both velocity components.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVelocity {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl SpectralVelocity {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            x: vec![Complex64::default(); grid.len()],
            y: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn scale(&mut self, s: f64) {
        for z in self.x.iter_mut().chain(self.y.iter_mut()) {
            *z *= s;
        }
    }

    /// `self = a * src`
    pub fn assign_scaled(&mut self, a: f64, src: &SpectralVelocity) {
        for (d, s) in self.x.iter_mut().zip(&src.x) {
            *d = s * a;
        }
        for (d, s) in self.y.iter_mut().zip(&src.y) {
            *d = s * a;
        }
    }
}

/// Two-component real velocity on a grid, optionally with its spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityField {
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    spectral: Option<SpectralVelocity>,
}

impl VelocityField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            ux: vec![0.0; grid.len()],
            uy: vec![0.0; grid.len()],
            spectral: None,
        }
    }

    pub fn from_components(ux: Vec<f64>, uy: Vec<f64>, grid: &GridSpec) -> Result<Self> {
        for len in [ux.len(), uy.len()] {
            if len != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: len,
                });
            }
        }
        Ok(Self {
            ux,
            uy,
            spectral: None,
        })
    }

    /// Evaluate `f(x, y) -> (ux, uy)` at every grid point.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> (f64, f64)) -> Self {
        let n = grid.resolution();
        let mut out = Self::zeros(grid);
        for i in 0..n {
            let x = grid.coord(i);
            for j in 0..n {
                let (a, b) = f(x, grid.coord(j));
                let k = grid.index(i, j);
                out.ux[k] = a;
                out.uy[k] = b;
            }
        }
        out
    }

    /// Physical field from a spectrum; the spectrum is kept as the mirror.
    pub fn from_spectral(
        spec: SpectralVelocity,
        fft: &mut Spectral2D,
    ) -> Result<Self> {
        let len = spec.len();
        let mut ux = vec![0.0; len];
        let mut uy = vec![0.0; len];
        fft.inverse_pair(&spec.x, &spec.y, &mut ux, &mut uy)?;
        Ok(Self {
            ux,
            uy,
            spectral: Some(spec),
        })
    }

    pub fn spectral(&self) -> Option<&SpectralVelocity> {
        self.spectral.as_ref()
    }

    /// Compute (or reuse) the spectral mirror.
    pub fn to_spectral(&self, fft: &mut Spectral2D) -> Result<SpectralVelocity> {
        if let Some(s) = &self.spectral {
            return Ok(s.clone());
        }
        let mut s = SpectralVelocity {
            x: vec![Complex64::default(); self.ux.len()],
            y: vec![Complex64::default(); self.ux.len()],
        };
        fft.forward_pair(&self.ux, &self.uy, &mut s.x, &mut s.y)?;
        Ok(s)
    }

    pub fn drop_spectral(mut self) -> Self {
        self.spectral = None;
        self
    }

    pub fn magnitude_at(&self, k: usize) -> f64 {
        self.ux[k].hypot(self.uy[k])
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.ux.len()).map(|k| self.magnitude_at(k)).collect()
    }

    /// Pointwise maximum of `|u|`. NaN propagates.
    pub fn max_magnitude(&self) -> f64 {
        max_magnitude(&self.ux, &self.uy)
    }

    pub fn is_finite(&self) -> bool {
        self.ux.iter().chain(&self.uy).all(|v| v.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            ux: self.ux.iter().map(|v| v * s).collect(),
            uy: self.uy.iter().map(|v| v * s).collect(),
            spectral: self.spectral.as_ref().map(|sp| {
                let mut sp = sp.clone();
                sp.scale(s);
                sp
            }),
        }
    }
}

pub(crate) fn max_magnitude(ux: &[f64], uy: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for (a, b) in ux.iter().zip(uy) {
        let v = a * a + b * b;
        if v.is_nan() {
            return f64::NAN;
        }
        m = m.max(v);
    }
    m.sqrt()
}

/// `max |div u|` over the grid, with derivatives taken spectrally.
pub fn max_divergence(u: &VelocityField, grid: &GridSpec, fft: &mut Spectral2D) -> Result<f64> {
    let s = u.to_spectral(fft)?;
    let n = grid.resolution();
    let k = grid.wavenumbers();
    let mut div = vec![Complex64::default(); grid.len()];
    for i in 0..n {
        for j in 0..n {
            let idx = grid.index(i, j);
            let kx = if grid.is_nyquist(i) { 0.0 } else { k[i] };
            let ky = if grid.is_nyquist(j) { 0.0 } else { k[j] };
            div[idx] = Complex64::new(0.0, 1.0) * (s.x[idx] * kx + s.y[idx] * ky);
        }
    }
    let mut out = vec![0.0; grid.len()];
    fft.inverse(&div, &mut out)?;
    Ok(out.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

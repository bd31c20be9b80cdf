//! Two-dimensional discrete Fourier transforms on a [`GridSpec`].
//!
//! Forward transforms are normalised by `1/N^2`, so the zero-wavenumber
//! coefficient is the mean of the field; inverse transforms are unscaled.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Planned 2-D transforms plus scratch space. One instance per solver run.
pub struct Spectral2D {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl Spectral2D {
    pub fn new(grid: &GridSpec) -> Self {
        let n = grid.resolution();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            work: vec![Complex64::default(); n * n],
        }
    }

    pub fn resolution(&self) -> usize {
        self.n
    }

    fn check(&self, len: usize) -> Result<()> {
        let expected = self.n * self.n;
        if len != expected {
            return Err(Error::DimensionMismatch { expected, got: len });
        }
        Ok(())
    }

    fn transform(&mut self, buf: &mut [Complex64], forward: bool) {
        let fft = if forward { &self.forward } else { &self.inverse };
        // rows hold the y direction, then transpose and do x
        fft.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, self.n);
        fft.process_with_scratch(buf, &mut self.scratch);
        transpose(buf, self.n);
    }

    /// Forward transform of a real field.
    pub fn forward(&mut self, field: &[f64], out: &mut [Complex64]) -> Result<()> {
        self.check(field.len())?;
        self.check(out.len())?;
        let scale = 1.0 / (self.n * self.n) as f64;
        for (o, &v) in out.iter_mut().zip(field) {
            *o = Complex64::new(v * scale, 0.0);
        }
        self.transform(out, true);
        Ok(())
    }

    /// Inverse transform keeping the real part.
    pub fn inverse(&mut self, coeffs: &[Complex64], out: &mut [f64]) -> Result<()> {
        self.check(coeffs.len())?;
        self.check(out.len())?;
        let mut work = std::mem::take(&mut self.work);
        work.copy_from_slice(coeffs);
        self.transform(&mut work, false);
        for (o, w) in out.iter_mut().zip(&work) {
            *o = w.re;
        }
        self.work = work;
        Ok(())
    }

    /// Forward transforms of two real fields through one complex transform.
    pub fn forward_pair(
        &mut self,
        a: &[f64],
        b: &[f64],
        out_a: &mut [Complex64],
        out_b: &mut [Complex64],
    ) -> Result<()> {
        for len in [a.len(), b.len(), out_a.len(), out_b.len()] {
            self.check(len)?;
        }
        let n = self.n;
        let scale = 1.0 / (n * n) as f64;
        let mut work = std::mem::take(&mut self.work);
        for ((w, &x), &y) in work.iter_mut().zip(a).zip(b) {
            *w = Complex64::new(x * scale, y * scale);
        }
        self.transform(&mut work, true);
        for i in 0..n {
            let ni = (n - i) % n;
            for j in 0..n {
                let nj = (n - j) % n;
                let z = work[i * n + j];
                let zc = work[ni * n + nj].conj();
                out_a[i * n + j] = (z + zc) * 0.5;
                out_b[i * n + j] = Complex64::new(0.0, -0.5) * (z - zc);
            }
        }
        self.work = work;
        Ok(())
    }

    /// Inverse transforms of two conjugate-symmetric spectra through one
    /// complex transform.
    pub fn inverse_pair(
        &mut self,
        ca: &[Complex64],
        cb: &[Complex64],
        out_a: &mut [f64],
        out_b: &mut [f64],
    ) -> Result<()> {
        for len in [ca.len(), cb.len(), out_a.len(), out_b.len()] {
            self.check(len)?;
        }
        let mut work = std::mem::take(&mut self.work);
        for ((w, &x), &y) in work.iter_mut().zip(ca).zip(cb) {
            *w = x + Complex64::new(-y.im, y.re);
        }
        self.transform(&mut work, false);
        for ((w, oa), ob) in work.iter().zip(out_a.iter_mut()).zip(out_b.iter_mut()) {
            *oa = w.re;
            *ob = w.im;
        }
        self.work = work;
        Ok(())
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    const BLOCK: usize = 32;
    for bi in (0..n).step_by(BLOCK) {
        for bj in (bi..n).step_by(BLOCK) {
            for i in bi..(bi + BLOCK).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + BLOCK).min(n) {
                    buf.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Forward transform of a real field sampled on `grid`.
pub fn transform_forward(field: &[f64], grid: &GridSpec) -> Result<Vec<Complex64>> {
    let mut out = vec![Complex64::default(); grid.len()];
    Spectral2D::new(grid).forward(field, &mut out)?;
    Ok(out)
}

/// Inverse of [`transform_forward`]; the imaginary residue is discarded.
pub fn transform_inverse(coeffs: &[Complex64], grid: &GridSpec) -> Result<Vec<f64>> {
    let mut out = vec![0.0; grid.len()];
    Spectral2D::new(grid).inverse(coeffs, &mut out)?;
    Ok(out)
}

/// Largest violation of `c(-k) = conj(c(k))` over the lattice.
pub fn conjugate_symmetry_defect(coeffs: &[Complex64], grid: &GridSpec) -> f64 {
    let n = grid.resolution();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let a = coeffs[i * n + j];
            let b = coeffs[((n - i) % n) * n + (n - j) % n].conj();
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

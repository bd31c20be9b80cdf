//! Periodic box discretisation and the uniform time grid.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square periodic box `[-L, L)^2` sampled with `N` points per axis.
///
/// Grid point `(i, j)` sits at `x = -L + i dx`, `y = -L + j dx`. Flat arrays
/// are laid out with the x index outermost: `data[i * N + j]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    half_width: f64,
    resolution: usize,
}

impl GridSpec {
    pub const MIN_RESOLUTION: usize = 16;

    pub fn new(half_width: f64, resolution: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width must be positive and finite, got {half_width}"
            )));
        }
        if resolution < Self::MIN_RESOLUTION || !resolution.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "resolution must be even and at least {}, got {resolution}",
                Self::MIN_RESOLUTION
            )));
        }
        Ok(Self {
            half_width,
            resolution,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.resolution as f64
    }

    /// Number of grid points, `N^2`.
    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.resolution + j
    }

    /// Physical coordinate of grid line `i` along either axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx()
    }

    /// Signed mode index in `[-N/2, N/2)` for FFT slot `i`.
    #[inline]
    pub fn mode_index(&self, i: usize) -> i64 {
        let n = self.resolution as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT slot holding signed mode index `m`.
    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.resolution as i64) as usize
    }

    #[inline]
    pub fn wavenumber(&self, i: usize) -> f64 {
        PI * self.mode_index(i) as f64 / self.half_width
    }

    /// The slot `N/2` carries the unpaired Nyquist mode.
    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.resolution / 2
    }

    /// Wavenumbers for every slot along one axis.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.resolution).map(|i| self.wavenumber(i)).collect()
    }

    /// Grid with the same box and twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            resolution: self.resolution * 2,
        }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            half_width: 8.0,
            resolution: 256,
        }
    }
}

/// Uniform time grid `t_m = m dt`, `m = 0..=steps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(Error::InvalidTimeGrid(format!(
                "t_final must be positive and finite, got {t_final}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidTimeGrid("steps must be at least 1".into()));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn time(&self, m: usize) -> f64 {
        if m == self.steps {
            self.t_final
        } else {
            m as f64 * self.dt()
        }
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            steps: 200,
        }
    }
}

//! Linear Stokes solve with exact diffusion and exponential Duhamel quadrature.
//!
//! Each Fourier mode obeys `du/dt = -nu |k|^2 u + P f(t)`. Over one step the
//! diffusion factor is applied exactly and the Duhamel integral
//! `int e^{-nu|k|^2 (t_{m+1}-s)} P f(s) ds` is evaluated with `f` linearly
//! interpolated between the step endpoints. The weights reduce to the
//! trapezoidal rule as `nu |k|^2 dt -> 0` and stay exact for constant forcing
//! on stiff modes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Spectral2D;
use crate::field::{max_magnitude, SpectralVelocity, VelocityField};
use crate::grid::{GridSpec, TimeGrid};
use crate::spectral::{leray_project_in_place, zero_nyquist, Wavenumbers};

/// Default snapshot stride for stored histories.
pub const DEFAULT_STORE_EVERY: usize = 5;

/// `(e^{-z}, w_prev / h, w_next / h)` for `z = nu |k|^2 h`.
pub fn exponential_weights(z: f64) -> (f64, f64, f64) {
    let decay = (-z).exp();
    if z < 0.1 {
        // sum_j (-z)^j / (j! (j+2))  and  sum_j (-z)^j / (j+2)!
        let mut a = 0.0;
        let mut b = 0.0;
        let mut pow_over_fact = 1.0; // (-z)^j / j!
        for j in 0..16 {
            let j = j as f64;
            a += pow_over_fact / (j + 2.0);
            b += pow_over_fact / ((j + 1.0) * (j + 2.0));
            pow_over_fact *= -z / (j + 1.0);
        }
        (decay, a, b)
    } else {
        let one_minus = -(-z).exp_m1();
        let z2 = z * z;
        (decay, (one_minus - z * decay) / z2, (z - one_minus) / z2)
    }
}

/// Per-mode propagator for one time step of the diffusion equation.
#[derive(Clone, Debug)]
pub struct DiffusionStep {
    decay: Vec<f64>,
    w_prev: Vec<f64>,
    w_next: Vec<f64>,
}

impl DiffusionStep {
    pub fn new(grid: &GridSpec, nu: f64, dt: f64) -> Self {
        let wn = Wavenumbers::new(grid);
        let len = grid.len();
        let mut decay = Vec::with_capacity(len);
        let mut w_prev = Vec::with_capacity(len);
        let mut w_next = Vec::with_capacity(len);
        for idx in 0..len {
            let (d, a, b) = exponential_weights(nu * wn.k_squared(idx) * dt);
            decay.push(d);
            w_prev.push(a * dt);
            w_next.push(b * dt);
        }
        Self {
            decay,
            w_prev,
            w_next,
        }
    }

    /// Unforced step: `u <- e^{-nu|k|^2 dt} u`.
    pub fn decay(&self, u: &mut [Complex64]) {
        for (z, d) in u.iter_mut().zip(&self.decay) {
            *z *= *d;
        }
    }

    pub fn advance(&self, u: &mut [Complex64], f_prev: &[Complex64], f_next: &[Complex64]) {
        for (k, z) in u.iter_mut().enumerate() {
            *z = *z * self.decay[k] + f_prev[k] * self.w_prev[k] + f_next[k] * self.w_next[k];
        }
    }

    pub fn advance_velocity(
        &self,
        u: &mut SpectralVelocity,
        f_prev: &SpectralVelocity,
        f_next: &SpectralVelocity,
    ) {
        self.advance(&mut u.x, &f_prev.x, &f_next.x);
        self.advance(&mut u.y, &f_prev.y, &f_next.y);
    }

    /// Step with a separable force `a(t) g`: amplitudes `a_prev`, `a_next`.
    pub fn advance_separable(
        &self,
        u: &mut SpectralVelocity,
        g: &SpectralVelocity,
        a_prev: f64,
        a_next: f64,
    ) {
        for k in 0..u.len() {
            let w = self.w_prev[k] * a_prev + self.w_next[k] * a_next;
            u.x[k] = u.x[k] * self.decay[k] + g.x[k] * w;
            u.y[k] = u.y[k] * self.decay[k] + g.y[k] * w;
        }
    }
}

/// Source of the forcing spectrum at step `m` (time `t_m`).
pub trait ForceProvider {
    fn force(&mut self, step: usize, t: f64, out: &mut SpectralVelocity) -> Result<()>;
}

impl<F> ForceProvider for F
where
    F: FnMut(usize, f64, &mut SpectralVelocity) -> Result<()>,
{
    fn force(&mut self, step: usize, t: f64, out: &mut SpectralVelocity) -> Result<()> {
        self(step, t, out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HistoryOptions {
    /// Keep every `store_every`-th step. `t = 0` and `t_final` are always kept.
    pub store_every: usize,
}

impl Default for HistoryOptions {
    fn default() -> Self {
        Self {
            store_every: DEFAULT_STORE_EVERY,
        }
    }
}

impl HistoryOptions {
    pub fn every_step() -> Self {
        Self { store_every: 1 }
    }

    pub(crate) fn stores(&self, step: usize, last: usize) -> bool {
        step == 0 || step == last || step.is_multiple_of(self.store_every.max(1))
    }
}

/// Thinned time history of a velocity field.
///
/// `max_magnitude` is accumulated over every step, stored or not.
#[derive(Clone, Debug)]
pub struct VelocityHistory {
    grid: GridSpec,
    time: TimeGrid,
    steps: Vec<usize>,
    fields: Vec<VelocityField>,
    max_magnitude: f64,
}

impl VelocityHistory {
    pub(crate) fn new(grid: GridSpec, time: TimeGrid) -> Self {
        Self {
            grid,
            time,
            steps: Vec::new(),
            fields: Vec::new(),
            max_magnitude: 0.0,
        }
    }

    pub(crate) fn record(&mut self, step: usize, field: VelocityField, stored: bool) {
        self.max_magnitude = self.max_magnitude.max(field.max_magnitude());
        if stored {
            self.steps.push(step);
            self.fields.push(field.drop_spectral());
        }
    }

    pub(crate) fn observe(&mut self, max: f64) {
        self.max_magnitude = self.max_magnitude.max(max);
    }

    pub(crate) fn store(&mut self, step: usize, field: VelocityField) {
        self.steps.push(step);
        self.fields.push(field.drop_spectral());
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn time_grid(&self) -> &TimeGrid {
        &self.time
    }

    /// Supremum of `|u|` over all grid points and all time steps.
    pub fn max_magnitude(&self) -> f64 {
        self.max_magnitude
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    /// Stored `(step, time, field)` triples in time order.
    pub fn snapshots(&self) -> impl Iterator<Item = (usize, f64, &VelocityField)> + '_ {
        self.steps
            .iter()
            .zip(&self.fields)
            .map(|(&m, f)| (m, self.time.time(m), f))
    }

    pub fn stored_steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn last(&self) -> Option<&VelocityField> {
        self.fields.last()
    }

    pub fn at_step(&self, step: usize) -> Option<&VelocityField> {
        self.steps
            .binary_search(&step)
            .ok()
            .map(|i| &self.fields[i])
    }

    /// Every stored field multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            time: self.time,
            steps: self.steps.clone(),
            fields: self.fields.iter().map(|f| f.scaled(s)).collect(),
            max_magnitude: self.max_magnitude * s.abs(),
        }
    }

    /// Field at step `m`, linearly interpolated in time between snapshots.
    pub fn interpolate(&self, step: usize) -> Result<VelocityField> {
        match self.steps.binary_search(&step) {
            Ok(i) => Ok(self.fields[i].clone()),
            Err(i) if i > 0 && i < self.steps.len() => {
                let (m0, m1) = (self.steps[i - 1], self.steps[i]);
                let s = (step - m0) as f64 / (m1 - m0) as f64;
                let (a, b) = (&self.fields[i - 1], &self.fields[i]);
                let lerp = |p: &[f64], q: &[f64]| -> Vec<f64> {
                    p.iter().zip(q).map(|(x, y)| x + s * (y - x)).collect()
                };
                VelocityField::from_components(lerp(&a.ux, &b.ux), lerp(&a.uy, &b.uy), &self.grid)
            }
            Err(_) => Err(Error::param(
                "step",
                format!("step {step} lies outside the stored history"),
            )),
        }
    }
}

/// Project the raw forcing onto divergence-free fields and drop the
/// unpaired Nyquist modes.
pub(crate) fn prepare_force(f: &mut SpectralVelocity, grid: &GridSpec, wn: &Wavenumbers) {
    leray_project_in_place(f, wn);
    zero_nyquist(f, grid);
}

/// Solve `u_t = nu lap u + P f`, `u(0) = 0` on the periodic box.
pub fn stokes_solve<P: ForceProvider>(
    force: &mut P,
    nu: f64,
    grid: &GridSpec,
    tg: &TimeGrid,
    opts: HistoryOptions,
) -> Result<VelocityHistory> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(Error::param("nu", format!("must be non-negative, got {nu}")));
    }
    let wn = Wavenumbers::new(grid);
    let step = DiffusionStep::new(grid, nu, tg.dt());
    let mut fft = Spectral2D::new(grid);

    let mut u = SpectralVelocity::zeros(grid);
    let mut f_prev = SpectralVelocity::zeros(grid);
    let mut f_next = SpectralVelocity::zeros(grid);
    force.force(0, 0.0, &mut f_prev)?;
    prepare_force(&mut f_prev, grid, &wn);

    let mut history = VelocityHistory::new(*grid, *tg);
    history.record(0, VelocityField::zeros(grid), true);

    let last = tg.steps();
    let mut ux = vec![0.0; grid.len()];
    let mut uy = vec![0.0; grid.len()];
    for m in 1..=last {
        let t = tg.time(m);
        force.force(m, t, &mut f_next)?;
        prepare_force(&mut f_next, grid, &wn);
        step.advance_velocity(&mut u, &f_prev, &f_next);
        std::mem::swap(&mut f_prev, &mut f_next);

        fft.inverse_pair(&u.x, &u.y, &mut ux, &mut uy)?;
        let max = max_magnitude(&ux, &uy);
        if !max.is_finite() {
            return Err(Error::NonFinite { step: m, time: t });
        }
        history.observe(max);
        if opts.stores(m, last) {
            history.store(m, VelocityField::from_components(ux.clone(), uy.clone(), grid)?);
        }
    }
    Ok(history)
}

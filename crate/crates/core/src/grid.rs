//! Periodic grid bookkeeping, the weighted discrete L² norm and the discrete
//! Fourier transform shared by every other module.
//!
//! Cells are `[x_j, x_{j+1})` with `x_j = j * dx` on a torus of length
//! `domain_length`. Transforms use the unnormalised forward convention
//! `û_k = Σ_j v_j exp(-2πi jk/J)` and a `1/J` inverse, so bin `k` carries the
//! mode `exp(+2πi k x / L)` and Parseval reads `Σ dx v_j² = (dx/J) Σ |û_k|²`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Largest number of time steps a grid may request.
pub const MAX_STEPS: usize = 1_000_000;

/// Smallest admissible cell count.
pub const MIN_CELLS: usize = 4;

/// Periodic spatial grid together with the time step and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    domain_length: f64,
    cell_count: usize,
    dt: f64,
    horizon: f64,
}

impl GridSpec {
    pub fn new(domain_length: f64, cell_count: usize, dt: f64, horizon: f64) -> Result<Self> {
        if !(domain_length.is_finite() && domain_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "domain length must be positive, got {domain_length}"
            )));
        }
        if cell_count < MIN_CELLS {
            return Err(Error::InvalidGrid(format!(
                "cell count must be at least {MIN_CELLS}, got {cell_count}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive, got {horizon}"
            )));
        }
        let grid = Self {
            domain_length,
            cell_count,
            dt,
            horizon,
        };
        if grid.dx() <= 0.0 {
            return Err(Error::InvalidGrid("dx underflows to zero".into()));
        }
        let steps = grid.step_count();
        if steps < 1 {
            return Err(Error::InvalidGrid(format!(
                "horizon {horizon} is shorter than one step of {dt}"
            )));
        }
        if steps > MAX_STEPS {
            return Err(Error::InvalidGrid(format!(
                "{steps} steps exceed the limit of {MAX_STEPS}"
            )));
        }
        Ok(grid)
    }

    /// Grid whose time step is `dx^alpha` shortened just enough to land on the
    /// horizon after a whole number of steps.
    pub fn with_coupling(
        domain_length: f64,
        cell_count: usize,
        horizon: f64,
        alpha: f64,
    ) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "coupling exponent must be positive, got {alpha}"
            )));
        }
        let dx = domain_length / cell_count as f64;
        let nominal = dx.powf(alpha);
        let ratio = horizon / nominal;
        if !ratio.is_finite() || ratio > MAX_STEPS as f64 {
            return Err(Error::InvalidGrid(format!(
                "coupling dt = dx^{alpha} needs too many steps to reach {horizon}"
            )));
        }
        let steps = ((ratio - 1e-9).ceil() as usize).max(1);
        Self::new(domain_length, cell_count, horizon / steps as f64, horizon)
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn cell_count(&self) -> usize {
        self.cell_count
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dx(&self) -> f64 {
        self.domain_length / self.cell_count as f64
    }

    /// `floor(T / dt)`, with quotients within rounding of an integer taken as
    /// that integer.
    pub fn step_count(&self) -> usize {
        let q = self.horizon / self.dt;
        let nearest = q.round();
        if (q - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            q.floor() as usize
        }
    }

    /// Left edge `x_j` of cell `j`, wrapped onto the torus.
    pub fn cell_left(&self, j: usize) -> f64 {
        (j % self.cell_count) as f64 * self.dx()
    }

    pub fn cell_center(&self, j: usize) -> f64 {
        self.cell_left(j) + 0.5 * self.dx()
    }

    /// Signed frequency of DFT bin `k`, in `(-J/2, J/2]`.
    pub fn signed_frequency(&self, k: usize) -> f64 {
        signed_index(k, self.cell_count) as f64
    }

    /// Angular wavenumber `ξ_k = 2π k̃ / L` of DFT bin `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.signed_frequency(k) / self.domain_length
    }

    /// True for the unpaired Nyquist bin of an even grid.
    pub fn is_nyquist(&self, k: usize) -> bool {
        self.cell_count.is_multiple_of(2) && k == self.cell_count / 2
    }

    /// Same domain and horizon with a different cell count and time step.
    pub fn refined(&self, cell_count: usize, dt: f64) -> Result<Self> {
        Self::new(self.domain_length, cell_count, dt, self.horizon)
    }
}

/// Signed representative of `k` modulo `n` in `(-n/2, n/2]`.
pub fn signed_index(k: usize, n: usize) -> i64 {
    let k = (k % n) as i64;
    let n = n as i64;
    if 2 * k > n {
        k - n
    } else {
        k
    }
}

/// Cell averages at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    values: Vec<f64>,
    time_index: usize,
}

impl FieldState {
    pub fn new(values: Vec<f64>, time_index: usize) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(Self { values, time_index })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            values: vec![0.0; len],
            time_index: 0,
        }
    }

    pub fn constant(len: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; len], 0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn with_time_index(mut self, time_index: usize) -> Self {
        self.time_index = time_index;
        self
    }

    /// Errors unless the field has one value per grid cell.
    pub fn check_conforms(&self, grid: &GridSpec) -> Result<()> {
        if self.values.len() != grid.cell_count() {
            return Err(Error::GridMismatch {
                expected: grid.cell_count(),
                found: self.values.len(),
            });
        }
        Ok(())
    }

    /// `a * self + b * other`, keeping this field's time index.
    pub fn combine(&self, a: f64, other: &FieldState, b: f64) -> Result<FieldState> {
        if self.len() != other.len() {
            return Err(Error::GridMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        FieldState::new(values, self.time_index)
    }

    pub fn scaled(&self, factor: f64) -> Result<FieldState> {
        FieldState::new(
            self.values.iter().map(|v| factor * v).collect(),
            self.time_index,
        )
    }
}

/// `sqrt(Σ_j dx v_j²)`.
pub fn l2_discrete_norm(state: &FieldState, grid: &GridSpec) -> Result<f64> {
    state.check_conforms(grid)?;
    weighted_norm(state.values(), grid.dx())
}

pub(crate) fn weighted_norm(values: &[f64], dx: f64) -> Result<f64> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteField);
    }
    let sum: f64 = values.iter().map(|v| v * v).sum();
    Ok((dx * sum).sqrt())
}

/// Planned forward/inverse FFT pair for one transform length.
#[derive(Clone)]
pub struct Transform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("len", &self.len).finish()
    }
}

impl Transform {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buffer: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buffer);
        buffer
    }

    pub fn forward_in_place(&self, buffer: &mut [Complex64]) {
        assert_eq!(buffer.len(), self.len, "transform length mismatch");
        self.forward.process(buffer);
    }

    /// Normalised inverse transform (`1/J` factor applied).
    pub fn inverse_in_place(&self, buffer: &mut [Complex64]) {
        assert_eq!(buffer.len(), self.len, "transform length mismatch");
        self.inverse.process(buffer);
        let scale = 1.0 / self.len as f64;
        for c in buffer.iter_mut() {
            *c *= scale;
        }
    }

    /// Normalised inverse transform, keeping the real part.
    pub fn inverse_real(&self, coefficients: &[Complex64]) -> Vec<f64> {
        let mut buffer = coefficients.to_vec();
        self.inverse_in_place(&mut buffer);
        buffer.into_iter().map(|c| c.re).collect()
    }
}

/// Forward DFT `û_k = Σ_j v_j exp(-2πi jk/J)`.
pub fn dft(state: &FieldState) -> Vec<Complex64> {
    Transform::new(state.len()).forward_real(state.values())
}

/// Inverse of [`dft`], `v_j = (1/J) Σ_k û_k exp(2πi jk/J)`.
pub fn inverse_dft(coefficients: &[Complex64]) -> Vec<Complex64> {
    let mut buffer = coefficients.to_vec();
    Transform::new(buffer.len()).inverse_in_place(&mut buffer);
    buffer
}

/// Absolute gap between the physical-space and spectral-space squared norms.
pub fn parseval_check(state: &FieldState, grid: &GridSpec) -> Result<f64> {
    let norm = l2_discrete_norm(state, grid)?;
    let spectral: f64 = dft(state).iter().map(|c| c.norm_sqr()).sum();
    let j = grid.cell_count() as f64;
    Ok((norm * norm - grid.dx() / j * spectral).abs())
}

//! Exact periodic solutions of `∂ₜu + ∂ₓ^(2p+1) u = 0` and the coarsening used
//! to compare a run against a twice-finer one.
//!
//! The exact flow multiplies signed mode `k̃` by `exp(-i(-1)^p ξ^(2p+1) t)` with
//! `ξ = 2πk̃/L`. The unpaired Nyquist bin of an even grid has no conjugate
//! partner, so giving it that phase would make a real field complex; it is
//! left untouched instead, which keeps the flow real, unitary and a group.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FieldState, GridSpec, Transform};

/// Phase advanced per unit time by bin `k`.
pub fn mode_frequency(grid: &GridSpec, p: u32, k: usize) -> f64 {
    if grid.is_nyquist(k) {
        return 0.0;
    }
    let xi = grid.wavenumber(k);
    let sign = if p.is_multiple_of(2) { -1.0 } else { 1.0 };
    sign * xi.powi(2 * p as i32 + 1)
}

/// Exact flow held in the DFT basis, so any time level is one multiply away.
#[derive(Debug, Clone)]
pub struct ExactFlow {
    grid: GridSpec,
    initial: Vec<Complex64>,
    frequencies: Vec<f64>,
    transform: Transform,
}

impl ExactFlow {
    pub fn new(initial: &FieldState, grid: &GridSpec, p: u32) -> Result<Self> {
        initial.check_conforms(grid)?;
        let transform = Transform::new(grid.cell_count());
        let spectrum = transform.forward_real(initial.values());
        let frequencies = (0..grid.cell_count())
            .map(|k| mode_frequency(grid, p, k))
            .collect();
        Ok(Self {
            grid: *grid,
            initial: spectrum,
            frequencies,
            transform,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// DFT coefficients of the solution at time `t`.
    pub fn spectrum_at(&self, t: f64) -> Vec<Complex64> {
        self.initial
            .iter()
            .zip(&self.frequencies)
            .map(|(c, w)| c * Complex64::from_polar(1.0, w * t))
            .collect()
    }

    /// DFT coefficients of `u(t + dt) - u(t)`, computed without cancellation.
    pub fn increment_spectrum(&self, t: f64, dt: f64) -> Vec<Complex64> {
        self.initial
            .iter()
            .zip(&self.frequencies)
            .map(|(c, w)| {
                let half = 0.5 * w * dt;
                let jump = Complex64::new(0.0, 2.0 * half.sin()) * Complex64::from_polar(1.0, half);
                c * Complex64::from_polar(1.0, w * t) * jump
            })
            .collect()
    }

    pub fn state_at(&self, t: f64, time_index: usize) -> Result<FieldState> {
        FieldState::new(self.transform.inverse_real(&self.spectrum_at(t)), time_index)
    }
}

/// Exact cell averages at time `t` from exact cell averages at time 0.
pub fn exact_evolve(initial: &FieldState, grid: &GridSpec, p: u32, t: f64) -> Result<FieldState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidGrid(format!("time must be nonnegative, got {t}")));
    }
    ExactFlow::new(initial, grid, p)?.state_at(t, initial.time_index())
}

/// `u(t + dt) - u(t)` for the exact flow started from `initial`.
pub fn exact_increment(
    initial: &FieldState,
    grid: &GridSpec,
    p: u32,
    t: f64,
    dt: f64,
) -> Result<FieldState> {
    let flow = ExactFlow::new(initial, grid, p)?;
    FieldState::new(
        flow.transform.inverse_real(&flow.increment_spectrum(t, dt)),
        initial.time_index(),
    )
}

/// Mean of fine cells `2j` and `2j + 1`.
pub fn coarsen_by_cell_average(fine: &FieldState) -> Result<FieldState> {
    if !fine.len().is_multiple_of(2) {
        return Err(Error::OddCellCount(fine.len()));
    }
    let values = fine
        .values()
        .chunks_exact(2)
        .map(|pair| 0.5 * (pair[0] + pair[1]))
        .collect();
    FieldState::new(values, fine.time_index())
}

/// DFT of [`coarsen_by_cell_average`] computed from the fine DFT.
///
/// With `E_k`, `O_k` the even/odd halves of fine bins `k` and `k + J`, coarse
/// bin `k` is `(E_k + exp(iπk/J) O_k) / 2`.
pub fn coarsen_spectrum(fine: &[Complex64]) -> Result<Vec<Complex64>> {
    if !fine.len().is_multiple_of(2) {
        return Err(Error::OddCellCount(fine.len()));
    }
    let cells = fine.len() / 2;
    Ok((0..cells)
        .map(|k| {
            let (a, b) = (fine[k], fine[k + cells]);
            let twist = Complex64::from_polar(1.0, std::f64::consts::PI * k as f64 / cells as f64);
            0.25 * ((a + b) + twist * (a - b))
        })
        .collect())
}

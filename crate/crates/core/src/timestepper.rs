//! One θ-scheme step
//!
//! ```text
//! v^{n+1} + θ dt D v^{n+1} = v^n - (1-θ) dt D v^n
//! ```
//!
//! on the periodic grid. Both sides are circulant, so the update is diagonal
//! in the DFT basis: bin `k` is multiplied by `A(ξ_k)` with `ξ_k = -k/J mod 1`
//! (bin `k` carries `exp(+2πi jk/J)`, which the shift `v_{j+l}` multiplies by
//! `exp(+2πi lk/J) = exp(-2iπ l ξ_k)`).

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FieldState, GridSpec, Transform};
use crate::stencil::{build_stencil, SchemeSpec};
use crate::vonneumann::amplification;

/// Growth of the ℓ²_Δ norm beyond this factor counts as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e12;

/// Precomputed Fourier multipliers of one step on a fixed grid.
#[derive(Debug, Clone)]
pub struct StepOperator {
    scheme: SchemeSpec,
    grid: GridSpec,
    multipliers: Vec<Complex64>,
    transform: Transform,
}

/// Position in `[0, 1)` of DFT bin `k` in the Fourier-series variable.
pub fn bin_frequency(k: usize, cells: usize) -> f64 {
    let k = k % cells;
    if k == 0 {
        0.0
    } else {
        (cells - k) as f64 / cells as f64
    }
}

pub fn build_step_operator(scheme: &SchemeSpec, grid: &GridSpec) -> Result<StepOperator> {
    let cells = grid.cell_count();
    let multipliers = (0..cells)
        .map(|k| {
            amplification(scheme, grid.dt(), grid.dx(), bin_frequency(k, cells))
                .map_err(|_| Error::SingularMode { k })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StepOperator {
        scheme: *scheme,
        grid: *grid,
        multipliers,
        transform: Transform::new(cells),
    })
}

impl StepOperator {
    pub fn scheme(&self) -> &SchemeSpec {
        &self.scheme
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn multipliers(&self) -> &[Complex64] {
        &self.multipliers
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    pub fn step(&self, state: &FieldState) -> Result<FieldState> {
        let mut evolution = self.evolution(state)?;
        evolution.advance(1)?;
        evolution.state()
    }

    pub fn evolve(&self, initial: &FieldState, n_steps: usize) -> Result<FieldState> {
        if n_steps == 0 {
            initial.check_conforms(&self.grid)?;
            return Ok(initial.clone());
        }
        let mut evolution = self.evolution(initial)?;
        evolution.advance(n_steps)?;
        evolution.state()
    }

    /// Starts a run whose spectrum can be advanced and sampled incrementally.
    pub fn evolution(&self, initial: &FieldState) -> Result<Evolution<'_>> {
        initial.check_conforms(&self.grid)?;
        let spectrum = self.transform.forward_real(initial.values());
        let initial_norm = self.spectral_norm(&spectrum);
        Ok(Evolution {
            op: self,
            spectrum,
            step: initial.time_index(),
            steps_taken: 0,
            initial_norm,
        })
    }

    fn spectral_norm(&self, spectrum: &[Complex64]) -> f64 {
        let cells = self.grid.cell_count() as f64;
        let sum: f64 = spectrum.iter().map(|c| c.norm_sqr()).sum();
        (self.grid.dx() / cells * sum).sqrt()
    }
}

/// A run in progress, held in the DFT basis.
#[derive(Debug, Clone)]
pub struct Evolution<'a> {
    op: &'a StepOperator,
    spectrum: Vec<Complex64>,
    step: usize,
    steps_taken: usize,
    initial_norm: f64,
}

impl Evolution<'_> {
    /// Time index of the current state.
    pub fn time_index(&self) -> usize {
        self.step
    }

    /// Steps applied since the run started.
    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    pub fn advance(&mut self, n_steps: usize) -> Result<()> {
        for _ in 0..n_steps {
            for (c, m) in self.spectrum.iter_mut().zip(&self.op.multipliers) {
                *c *= m;
            }
            self.step += 1;
            self.steps_taken += 1;
            let norm = self.norm();
            let limit = BLOW_UP_FACTOR * self.initial_norm;
            if !norm.is_finite() || (self.initial_norm > 0.0 && norm > limit) {
                return Err(Error::BlowUp {
                    step: self.steps_taken,
                });
            }
        }
        Ok(())
    }

    /// DFT coefficients of the current state.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    /// ℓ²_Δ norm of the current state, from Parseval.
    pub fn norm(&self) -> f64 {
        self.op.spectral_norm(&self.spectrum)
    }

    pub fn state(&self) -> Result<FieldState> {
        let values = self.op.transform.inverse_real(&self.spectrum);
        FieldState::new(values, self.step).map_err(|_| Error::BlowUp {
            step: self.steps_taken,
        })
    }
}

/// Dense circulant matrix of the difference operator, divided by `dx^(2p+1)`.
pub fn dense_difference_matrix(scheme: &SchemeSpec, grid: &GridSpec) -> Result<DMatrix<f64>> {
    let weights = build_stencil(scheme)?;
    let cells = grid.cell_count();
    let scale = grid.dx().powi(weights.order() as i32);
    let mut matrix = DMatrix::zeros(cells, cells);
    for j in 0..cells {
        for (offset, w) in weights.iter() {
            let col = (j as i64 + offset).rem_euclid(cells as i64) as usize;
            matrix[(j, col)] += w / scale;
        }
    }
    Ok(matrix)
}

/// Reference step: builds both sides of the scheme as dense matrices in
/// physical space and solves the implicit part by LU. Only meant for small
/// grids, as an oracle for the spectral step.
pub fn dense_reference_step(
    scheme: &SchemeSpec,
    grid: &GridSpec,
    state: &FieldState,
) -> Result<FieldState> {
    state.check_conforms(grid)?;
    let cells = grid.cell_count();
    let d = dense_difference_matrix(scheme, grid)?;
    let identity = DMatrix::<f64>::identity(cells, cells);
    let theta = scheme.theta();
    let lhs = &identity + &d * (theta * grid.dt());
    let rhs = (&identity - &d * ((1.0 - theta) * grid.dt())) * DVector::from_column_slice(state.values());
    let next = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularMode { k: usize::MAX })?;
    FieldState::new(next.iter().copied().collect(), state.time_index() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_discrete_norm;
    use crate::stencil::StencilKind;
    use std::f64::consts::PI;

    fn grid(cells: usize, dt: f64) -> GridSpec {
        GridSpec::new(cells as f64 * 0.25, cells, dt, 100.0 * dt).unwrap()
    }

    #[test]
    fn zero_frequency_multiplier_is_one() {
        for kind in StencilKind::ALL {
            for theta in [0.0, 0.5, 1.0] {
                let s = SchemeSpec::new(kind, 1, theta).unwrap();
                let op = build_step_operator(&s, &grid(16, 0.01)).unwrap();
                assert_eq!(op.multipliers()[0], Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn explicit_upwind_multipliers_by_hand() {
        // dt = dx, θ = 0, forward p = 0: the stencil v_{j+1} - v_j maps bin k to
        // (exp(2πik/4) - 1), so the multiplier is 2 - exp(2πik/4).
        let g = GridSpec::new(4.0, 4, 1.0, 10.0).unwrap();
        let s = SchemeSpec::new(StencilKind::Forward, 0, 0.0).unwrap();
        let op = build_step_operator(&s, &g).unwrap();
        for k in 0..4 {
            let expected = Complex64::new(2.0, 0.0) - Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 4.0);
            assert!((op.multipliers()[k] - expected).norm() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn central_crank_nicolson_multipliers_are_unimodular() {
        let s = SchemeSpec::new(StencilKind::Central, 2, 0.5).unwrap();
        let op = build_step_operator(&s, &grid(64, 0.003)).unwrap();
        assert!(op.multipliers().iter().all(|m| (m.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_and_constant_states_are_fixed() {
        let g = grid(32, 0.01);
        for kind in StencilKind::ALL {
            for theta in [0.0, 0.5, 1.0] {
                let s = SchemeSpec::new(kind, 1, theta).unwrap();
                let op = build_step_operator(&s, &g).unwrap();
                let zero = op.step(&FieldState::zeros(32)).unwrap();
                assert!(zero.values().iter().all(|&v| v == 0.0));
                assert_eq!(zero.time_index(), 1);
                let c = op.step(&FieldState::constant(32, 1.5).unwrap()).unwrap();
                assert!(c.values().iter().all(|&v| (v - 1.5).abs() < 1e-13));
            }
        }
    }

    #[test]
    fn single_mode_is_scaled_by_its_multiplier() {
        let cells = 32;
        let g = grid(cells, 0.02);
        let s = SchemeSpec::new(StencilKind::Backward, 0, 0.5).unwrap();
        let op = build_step_operator(&s, &g).unwrap();
        let k = 3usize;
        let mode: Vec<f64> = (0..cells)
            .map(|j| (2.0 * PI * (k * j) as f64 / cells as f64).cos())
            .collect();
        let out = op.step(&FieldState::new(mode, 0).unwrap()).unwrap();
        let m = op.multipliers()[k];
        for j in 0..cells {
            let phase = 2.0 * PI * (k * j) as f64 / cells as f64;
            let expected = (m * Complex64::from_polar(1.0, phase)).re;
            assert!((out.values()[j] - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn explicit_step_matches_stencil() {
        let g = grid(24, 0.001);
        let s = SchemeSpec::new(StencilKind::Forward, 1, 0.0).unwrap();
        let op = build_step_operator(&s, &g).unwrap();
        let v: Vec<f64> = (0..24).map(|j| ((j * j) % 7) as f64 - 3.0).collect();
        let state = FieldState::new(v, 0).unwrap();
        let direct = crate::stencil::apply(&build_stencil(&s).unwrap(), &state, &g).unwrap();
        let expected = state.combine(1.0, &direct, -g.dt()).unwrap();
        let got = op.step(&state).unwrap();
        let diff = got.combine(1.0, &expected, -1.0).unwrap();
        let scale = l2_discrete_norm(&expected, &g).unwrap();
        assert!(l2_discrete_norm(&diff, &g).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn evolve_zero_steps_is_identity() {
        let g = grid(16, 0.01);
        let s = SchemeSpec::new(StencilKind::Central, 0, 1.0).unwrap();
        let op = build_step_operator(&s, &g).unwrap();
        let v = FieldState::new((0..16).map(|j| j as f64).collect(), 4).unwrap();
        assert_eq!(op.evolve(&v, 0).unwrap(), v);
    }

    #[test]
    fn unstable_run_reports_blow_up_step() {
        // Explicit downwind advection at dt = dx grows the highest mode by 3 per step.
        let g = GridSpec::new(16.0, 16, 1.0, 1000.0).unwrap();
        let s = SchemeSpec::new(StencilKind::Forward, 0, 0.0).unwrap();
        let op = build_step_operator(&s, &g).unwrap();
        let v: Vec<f64> = (0..16).map(|j| if j % 2 == 0 { 1.0 } else { 0.0 }).collect();
        match op.evolve(&FieldState::new(v, 0).unwrap(), 1000) {
            Err(Error::BlowUp { step }) => assert!(step > 10 && step < 40, "{step}"),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn singular_mode_is_reported() {
        // Forward p = 0, θ = 1, dt = dx/2 is singular at the Nyquist bin.
        let g = GridSpec::new(8.0, 8, 0.5, 1.0).unwrap();
        let s = SchemeSpec::new(StencilKind::Forward, 0, 1.0).unwrap();
        assert_eq!(
            build_step_operator(&s, &g).unwrap_err(),
            Error::SingularMode { k: 4 }
        );
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = grid(16, 0.01);
        let s = SchemeSpec::new(StencilKind::Central, 0, 1.0).unwrap();
        let op = build_step_operator(&s, &g).unwrap();
        assert!(matches!(
            op.step(&FieldState::zeros(8)),
            Err(Error::GridMismatch { .. })
        ));
    }
}

//! Convergence studies: runs a scheme over a list of resolutions, measures
//! the ℓ^∞-in-time ℓ²_Δ error of each run and derives observed orders.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use crate::analysis::{theoretical_order, RatePrediction};
use crate::error::{Error, Result};
use crate::grid::{FieldState, GridSpec};
use crate::initial_data::{cell_average_projection, InitialDatum};
use crate::reference::{coarsen_spectrum, ExactFlow};
use crate::stencil::{SchemeSpec, StencilKind};
use crate::timestepper::{build_step_operator, Evolution};
use crate::vonneumann::parity_admits_stability;

/// Upper bound on the number of time levels sampled for the ℓ^∞-in-time norm.
pub const MAX_TIME_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// Against the run on `2J` cells, coarsened by pairwise averaging.
    RefinementPair,
    /// Against the exact flow of the projected datum.
    ExactReference,
}

impl Comparison {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RefinementPair => "refinement_pair",
            Self::ExactReference => "exact_reference",
        }
    }
}

impl FromStr for Comparison {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refinement_pair" => Ok(Self::RefinementPair),
            "exact_reference" => Ok(Self::ExactReference),
            _ => Err(Error::InvalidScheme(format!("unknown comparison '{s}'"))),
        }
    }
}

/// Stencil choice; `Auto` takes the convergent one-sided stencil for the
/// parity of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindChoice {
    Auto,
    Fixed(StencilKind),
}

impl KindChoice {
    pub fn resolve(&self, p: u32) -> StencilKind {
        match self {
            Self::Fixed(kind) => *kind,
            Self::Auto if p % 2 == 1 => StencilKind::Forward,
            Self::Auto => StencilKind::Backward,
        }
    }
}

impl fmt::Display for KindChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Auto => f.write_str("auto"),
            Self::Fixed(kind) => write!(f, "{kind}"),
        }
    }
}

impl FromStr for KindChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            Ok(Self::Auto)
        } else {
            s.parse().map(Self::Fixed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub p: u32,
    pub kind: KindChoice,
    pub theta: f64,
    pub domain_length: f64,
    pub horizon: f64,
    pub j_list: Vec<usize>,
    /// Time step coupling `dt ≈ dx^alpha`.
    pub alpha: f64,
    pub datum: InitialDatum,
    pub comparison: Comparison,
    /// Seed for synthetic data built by order sweeps.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            p: 0,
            kind: KindChoice::Auto,
            theta: 1.0,
            domain_length: 50.0,
            horizon: 0.1,
            j_list: (0..8).map(|i| 800 << i).collect(),
            alpha: 1.0,
            datum: InitialDatum::indicator_integrated(1),
            comparison: Comparison::RefinementPair,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn kind(&self) -> StencilKind {
        self.kind.resolve(self.p)
    }

    pub fn scheme(&self) -> Result<SchemeSpec> {
        SchemeSpec::new(self.kind(), self.p, self.theta)
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme()?;
        if self.j_list.is_empty() {
            return Err(Error::InvalidRefinement("J list is empty".into()));
        }
        if self.j_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRefinement(format!(
                "J list must be strictly increasing, got {:?}",
                self.j_list
            )));
        }
        if self.comparison == Comparison::RefinementPair {
            if let Some(j) = self.j_list.iter().find(|&&j| j % 2 != 0) {
                return Err(Error::InvalidRefinement(format!(
                    "refinement pairs need even cell counts, got {j}"
                )));
            }
        }
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::InvalidGrid(format!("alpha must be positive, got {}", self.alpha)));
        }
        for &j in &self.j_list {
            self.grid(j)?;
        }
        Ok(())
    }

    pub fn grid(&self, cells: usize) -> Result<GridSpec> {
        GridSpec::with_coupling(self.domain_length, cells, self.horizon, self.alpha)
    }

    pub fn prediction(&self) -> Result<RatePrediction> {
        theoretical_order(
            self.datum.regularity(),
            self.p,
            self.kind(),
            self.theta,
            self.alpha,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    Unstable { step: usize },
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ok => f.write_str("ok"),
            Self::Unstable { .. } => f.write_str("unstable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub dx: f64,
    pub dt: f64,
    pub steps: usize,
    pub l2_error: Option<f64>,
    pub observed_order: Option<f64>,
    pub status: RowStatus,
    pub wall_clock: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ConvergenceRow>,
    pub theoretical_order: f64,
}

impl ConvergenceReport {
    /// Order between the last two rows, when both are finite.
    pub fn final_order(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.observed_order)
    }

    /// Mean of the last `n` observed orders, if all of them exist.
    pub fn mean_of_last_orders(&self, n: usize) -> Option<f64> {
        let orders: Vec<f64> = self.rows.iter().rev().take(n).map(|r| r.observed_order).collect::<Option<_>>()?;
        (orders.len() == n).then(|| orders.iter().sum::<f64>() / n as f64)
    }

    pub fn orders(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.observed_order).collect()
    }
}

/// Time levels (multiples of `1/count` of the horizon) at which errors are
/// measured: all of them when there are few, otherwise about
/// [`MAX_TIME_SAMPLES`] evenly spaced levels and always the last.
pub fn sample_levels(count: usize) -> Vec<usize> {
    if count <= MAX_TIME_SAMPLES {
        return (1..=count).collect();
    }
    let mut levels: Vec<usize> = (1..=MAX_TIME_SAMPLES)
        .map(|s| (s * count + MAX_TIME_SAMPLES / 2) / MAX_TIME_SAMPLES)
        .collect();
    levels.dedup();
    if levels.last() != Some(&count) {
        levels.push(count);
    }
    levels
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn spectral_distance(a: &[Complex64], b: &[Complex64], grid: &GridSpec) -> f64 {
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    (sum * grid.dx() / grid.cell_count() as f64).sqrt()
}

fn start(scheme: &SchemeSpec, datum: &InitialDatum, grid: &GridSpec) -> Result<(crate::timestepper::StepOperator, FieldState)> {
    let op = build_step_operator(scheme, grid)?;
    let initial = cell_average_projection(datum, grid)?;
    Ok((op, initial))
}

fn advance_to(evolution: &mut Evolution<'_>, level: usize) -> Result<()> {
    let todo = level - evolution.steps_taken();
    evolution.advance(todo)
}

/// ℓ^∞-in-time error of the `J`-cell run against the coarsened `2J`-cell run,
/// over the time levels both runs share.
fn refinement_pair_error(config: &ExperimentConfig, scheme: &SchemeSpec, cells: usize) -> Result<(GridSpec, f64)> {
    let coarse_grid = config.grid(cells)?;
    let fine_grid = config.grid(2 * cells)?;
    let (coarse_op, coarse_init) = start(scheme, &config.datum, &coarse_grid)?;
    let (fine_op, fine_init) = start(scheme, &config.datum, &fine_grid)?;
    let mut coarse = coarse_op.evolution(&coarse_init)?;
    let mut fine = fine_op.evolution(&fine_init)?;
    let (nc, nf) = (coarse_grid.step_count(), fine_grid.step_count());
    let common = gcd(nc, nf);
    let mut worst: f64 = 0.0;
    for level in sample_levels(common) {
        advance_to(&mut coarse, level * (nc / common))?;
        advance_to(&mut fine, level * (nf / common))?;
        let reference = coarsen_spectrum(fine.spectrum())?;
        worst = worst.max(spectral_distance(coarse.spectrum(), &reference, &coarse_grid));
    }
    Ok((coarse_grid, worst))
}

/// ℓ^∞-in-time error of the `J`-cell run against the exact flow.
fn exact_reference_error(config: &ExperimentConfig, scheme: &SchemeSpec, cells: usize) -> Result<(GridSpec, f64)> {
    let grid = config.grid(cells)?;
    let (op, initial) = start(scheme, &config.datum, &grid)?;
    let flow = ExactFlow::new(&initial, &grid, scheme.p())?;
    let mut evolution = op.evolution(&initial)?;
    let mut worst: f64 = 0.0;
    for level in sample_levels(grid.step_count()) {
        advance_to(&mut evolution, level)?;
        let exact = flow.spectrum_at(level as f64 * grid.dt());
        worst = worst.max(spectral_distance(evolution.spectrum(), &exact, &grid));
    }
    Ok((grid, worst))
}

fn run_row(config: &ExperimentConfig, scheme: &SchemeSpec, cells: usize) -> Result<ConvergenceRow> {
    let clock = Instant::now();
    let grid = config.grid(cells)?;
    let outcome = match config.comparison {
        Comparison::RefinementPair => refinement_pair_error(config, scheme, cells),
        Comparison::ExactReference => exact_reference_error(config, scheme, cells),
    };
    let (l2_error, status) = match outcome {
        Ok((_, e)) => (Some(e), RowStatus::Ok),
        Err(Error::BlowUp { step }) => (None, RowStatus::Unstable { step }),
        Err(e) => return Err(e),
    };
    Ok(ConvergenceRow {
        cells,
        dx: grid.dx(),
        dt: grid.dt(),
        steps: grid.step_count(),
        l2_error,
        observed_order: None,
        status,
        wall_clock: clock.elapsed(),
    })
}

/// `log(e_prev/e) / log(dx_prev/dx)`, which is `log₂(e_prev/e)` when `dx` halves.
fn order_between(prev: &ConvergenceRow, row: &ConvergenceRow) -> Option<f64> {
    let (a, b) = (prev.l2_error?, row.l2_error?);
    (a > 0.0 && b > 0.0).then(|| (a / b).ln() / (prev.dx / row.dx).ln())
}

pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let kind = config.kind();
    if !parity_admits_stability(kind, config.p) {
        return Err(Error::NoConvergentScheme {
            kind: kind.name().into(),
            p: config.p,
        });
    }
    let scheme = config.scheme()?;
    let theoretical = config.prediction()?.overall_order_under_coupling;
    let mut rows = config
        .j_list
        .par_iter()
        .map(|&cells| run_row(config, &scheme, cells))
        .collect::<Result<Vec<_>>>()?;
    for i in 1..rows.len() {
        rows[i].observed_order = order_between(&rows[i - 1], &rows[i]);
    }
    Ok(ConvergenceReport {
        config: config.clone(),
        rows,
        theoretical_order: theoretical,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub m: f64,
    pub observed: Option<f64>,
    pub theoretical: f64,
    pub report: ConvergenceReport,
}

/// One convergence study per regularity `m`, with data built by
/// [`InitialDatum::for_regularity`].
pub fn run_order_sweep(p: u32, m_values: &[f64], base: &ExperimentConfig) -> Result<Vec<SweepPoint>> {
    let upper = f64::from(4 * p + 3);
    if let Some(m) = m_values.iter().find(|&&m| !(m > 0.0 && m <= upper)) {
        return Err(Error::InvalidDatum(format!(
            "sweep regularity {m} outside (0, {upper}] for p = {p}"
        )));
    }
    m_values
        .par_iter()
        .map(|&m| {
            let config = ExperimentConfig {
                p,
                datum: InitialDatum::for_regularity(m, base.seed)?,
                ..base.clone()
            };
            let report = run_convergence_study(&config)?;
            Ok(SweepPoint {
                m,
                observed: report.final_order(),
                theoretical: report.theoretical_order,
                report,
            })
        })
        .collect()
}

/// Single run on `J_list[0]` cells up to the horizon.
pub fn run_single(config: &ExperimentConfig) -> Result<(GridSpec, FieldState)> {
    let scheme = config.scheme()?;
    let cells = *config
        .j_list
        .first()
        .ok_or_else(|| Error::InvalidRefinement("J list is empty".into()))?;
    let grid = config.grid(cells)?;
    let (op, initial) = start(&scheme, &config.datum, &grid)?;
    let out = op.evolve(&initial, grid.step_count())?;
    Ok((grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(p: u32, comparison: Comparison) -> ExperimentConfig {
        ExperimentConfig {
            p,
            j_list: vec![100, 200, 400],
            horizon: 2.0,
            comparison,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn auto_kind_follows_parity() {
        for p in 0..6 {
            let kind = KindChoice::Auto.resolve(p);
            assert!(parity_admits_stability(kind, p));
            assert_ne!(kind, StencilKind::Central);
        }
        assert_eq!("auto".parse::<KindChoice>().unwrap(), KindChoice::Auto);
        assert_eq!(
            "central".parse::<KindChoice>().unwrap(),
            KindChoice::Fixed(StencilKind::Central)
        );
    }

    #[test]
    fn sample_levels_cover_the_end() {
        assert_eq!(sample_levels(3), vec![1, 2, 3]);
        let many = sample_levels(5000);
        assert!(many.len() <= MAX_TIME_SAMPLES + 1);
        assert_eq!(*many.last().unwrap(), 5000);
        assert!(many.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn config_validation() {
        let mut c = small(0, Comparison::RefinementPair);
        c.j_list = vec![200, 100];
        assert!(c.validate().is_err());
        c.j_list = vec![101];
        assert!(c.validate().is_err());
        c.comparison = Comparison::ExactReference;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn unstable_parity_fails_before_compute() {
        let mut c = small(2, Comparison::RefinementPair);
        c.kind = KindChoice::Fixed(StencilKind::Forward);
        assert!(matches!(
            run_convergence_study(&c),
            Err(Error::NoConvergentScheme { p: 2, .. })
        ));
    }

    #[test]
    fn errors_decrease_and_rows_are_ordered() {
        for comparison in [Comparison::RefinementPair, Comparison::ExactReference] {
            let r = run_convergence_study(&small(0, comparison)).unwrap();
            assert_eq!(r.rows.len(), 3);
            assert!(r.rows[0].observed_order.is_none());
            assert!(r.rows.windows(2).all(|w| w[0].dx > w[1].dx));
            let e: Vec<f64> = r.rows.iter().map(|r| r.l2_error.unwrap()).collect();
            assert!(e[0] > e[1] && e[1] > e[2], "{comparison:?}: {e:?}");
            assert_eq!(r.theoretical_order, 0.75);
        }
    }

    #[test]
    fn study_is_deterministic() {
        let c = small(1, Comparison::RefinementPair);
        let a = run_convergence_study(&c).unwrap();
        let b = run_convergence_study(&c).unwrap();
        let errors = |r: &ConvergenceReport| r.rows.iter().map(|r| r.l2_error).collect::<Vec<_>>();
        assert_eq!(errors(&a), errors(&b));
    }

    #[test]
    fn blow_up_is_flagged_not_fatal() {
        // Explicit backward advection with dt = dx^0.8 > dx violates its CFL bound.
        let c = ExperimentConfig {
            theta: 0.0,
            alpha: 0.8,
            horizon: 100.0,
            j_list: vec![100, 200],
            comparison: Comparison::ExactReference,
            ..ExperimentConfig::default()
        };
        let r = run_convergence_study(&c).unwrap();
        assert!(r.rows.iter().any(|row| matches!(row.status, RowStatus::Unstable { .. })));
        assert!(r.rows.iter().all(|row| row.observed_order.is_none()));
    }
}

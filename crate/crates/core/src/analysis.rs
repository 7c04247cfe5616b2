//! Consistency and convergence errors, observed orders and the predicted
//! rates for data of finite Sobolev regularity.

use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{l2_discrete_norm, FieldState, GridSpec};
use crate::initial_data::{cell_average_projection, InitialDatum};
use crate::reference::ExactFlow;
use crate::stencil::{apply, build_stencil, SchemeSpec, StencilKind};
use crate::vonneumann::parity_admits_stability;

/// Residual left when exact cell averages are inserted into the scheme at
/// time level `n`:
///
/// ```text
/// ε^n = (u^{n+1} - u^n)/dt + θ D u^{n+1} + (1-θ) D u^n
/// ```
pub fn consistency_error(
    scheme: &SchemeSpec,
    grid: &GridSpec,
    datum: &InitialDatum,
    n: usize,
) -> Result<FieldState> {
    let projected = cell_average_projection(datum, grid)?;
    let flow = ExactFlow::new(&projected, grid, scheme.p())?;
    let dt = grid.dt();
    let t = n as f64 * dt;
    let now = flow.state_at(t, n)?;
    let next = flow.state_at(t + dt, n)?;
    let increment = FieldState::new(
        flow.transform().inverse_real(&flow.increment_spectrum(t, dt)),
        n,
    )?;
    let weights = build_stencil(scheme)?;
    let theta = scheme.theta();
    let d_now = apply(&weights, &now, grid)?;
    let d_next = apply(&weights, &next, grid)?;
    increment
        .scaled(1.0 / dt)?
        .combine(1.0, &d_next, theta)?
        .combine(1.0, &d_now, 1.0 - theta)
}

/// ℓ²_Δ distance between a numerical field and exact cell averages.
pub fn convergence_error(
    numerical: &FieldState,
    exact_cell_averages: &FieldState,
    grid: &GridSpec,
) -> Result<f64> {
    numerical.check_conforms(grid)?;
    exact_cell_averages.check_conforms(grid)?;
    let diff = numerical.combine(1.0, exact_cell_averages, -1.0)?;
    l2_discrete_norm(&diff, grid)
}

/// `log₂(e_{i-1}/e_i)` for consecutive `(dx, error)` pairs with `dx` halving.
pub fn observed_order(errors: &[(f64, f64)]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::InvalidRefinement(format!(
            "need at least two resolutions, got {}",
            errors.len()
        )));
    }
    for &(_, e) in errors {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::DegenerateError(e));
        }
    }
    errors
        .windows(2)
        .map(|w| {
            let ratio = w[0].0 / w[1].0;
            if (ratio - 2.0).abs() > 1e-9 {
                return Err(Error::InvalidRefinement(format!(
                    "dx must halve between rows, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
            Ok((w[0].1 / w[1].1).log2())
        })
        .collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn fitted_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidRefinement("need at least two points".into()));
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::DegenerateError(y));
        }
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::InvalidRefinement(format!("abscissa must be positive, got {x}")));
        }
        logs.push((x.ln(), y.ln()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|l| l.0).sum::<f64>() / n;
    let my = logs.iter().map(|l| l.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidRefinement("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Which exponent limits the predicted rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRegime {
    TimeLimited,
    SpaceLimited,
    Balanced,
}

impl fmt::Display for RateRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TimeLimited => "time-limited",
            Self::SpaceLimited => "space-limited",
            Self::Balanced => "balanced",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePrediction {
    pub time_exponent: f64,
    pub space_exponent: f64,
    pub overall_order_under_coupling: f64,
    pub regime: RateRegime,
    /// True when the datum is smooth enough that both exponents saturate.
    pub saturated: bool,
}

/// Predicted convergence order for `H^m` data under the coupling `dt = dx^α`.
pub fn theoretical_order(
    m: f64,
    p: u32,
    kind: StencilKind,
    theta: f64,
    coupling_alpha: f64,
) -> Result<RatePrediction> {
    if !(m >= 0.0) {
        return Err(Error::InvalidDatum(format!("regularity must be nonnegative, got {m}")));
    }
    if !parity_admits_stability(kind, p) {
        return Err(Error::NoConvergentScheme {
            kind: kind.name().into(),
            p,
        });
    }
    let p = f64::from(p);
    let time_cap = if theta == 0.5 { 6.0 * p + 3.0 } else { 4.0 * p + 2.0 };
    let time_exponent = if theta == 0.5 {
        2.0 * m.min(time_cap) / time_cap
    } else {
        m.min(time_cap) / time_cap
    };
    let (space_exponent, space_cap) = match kind {
        StencilKind::Central => {
            let cap = 2.0 * p + 3.0;
            (2.0 * m.min(cap) / cap, cap)
        }
        _ => {
            let cap = 2.0 * p + 2.0;
            (m.min(cap) / cap, cap)
        }
    };
    let scaled_time = coupling_alpha * time_exponent;
    let regime = if scaled_time < space_exponent {
        RateRegime::TimeLimited
    } else if scaled_time > space_exponent {
        RateRegime::SpaceLimited
    } else {
        RateRegime::Balanced
    };
    Ok(RatePrediction {
        time_exponent,
        space_exponent,
        overall_order_under_coupling: scaled_time.min(space_exponent),
        regime,
        saturated: m >= time_cap && m >= space_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_data::InitialDatum;

    fn overall(m: f64, p: u32, kind: StencilKind) -> f64 {
        theoretical_order(m, p, kind, 1.0, 1.0)
            .unwrap()
            .overall_order_under_coupling
    }

    #[test]
    fn predicted_rates_for_reference_configurations() {
        assert_eq!(overall(1.5, 0, StencilKind::Backward), 0.75);
        assert_eq!(overall(1.5, 1, StencilKind::Forward), 0.25);
        assert_eq!(overall(1.5, 2, StencilKind::Backward), 0.15);
        assert_eq!(overall(2.5, 0, StencilKind::Backward), 1.0);
        assert_eq!((overall(2.5, 1, StencilKind::Forward) * 1000.0).round() / 1000.0, 0.417);
        assert_eq!(overall(2.5, 2, StencilKind::Backward), 0.25);
    }

    #[test]
    fn saturation_for_smooth_data() {
        for p in 0..4 {
            let kinds = [
                (StencilKind::Central, 2.0),
                (if p % 2 == 0 { StencilKind::Backward } else { StencilKind::Forward }, 1.0),
            ];
            for (kind, space) in kinds {
                let r = theoretical_order(f64::INFINITY, p, kind, 1.0, 1.0).unwrap();
                assert_eq!(r.time_exponent, 1.0);
                assert_eq!(r.space_exponent, space);
                assert!(r.saturated);
                let cn = theoretical_order(f64::INFINITY, p, kind, 0.5, 1.0).unwrap();
                assert_eq!(cn.time_exponent, 2.0);
            }
        }
    }

    #[test]
    fn unstable_parity_is_rejected() {
        assert!(matches!(
            theoretical_order(1.5, 2, StencilKind::Forward, 1.0, 1.0),
            Err(Error::NoConvergentScheme { p: 2, .. })
        ));
        assert!(theoretical_order(1.5, 1, StencilKind::Backward, 1.0, 1.0).is_err());
        assert!(theoretical_order(1.5, 0, StencilKind::Forward, 1.0, 1.0).is_ok());
    }

    #[test]
    fn orders_from_error_sequences() {
        let o = observed_order(&[(0.1, 1.194e-4), (0.05, 7.381e-5)]).unwrap();
        assert!((o[0] - 0.694).abs() < 5e-4);
        let e = 3.0;
        let o = observed_order(&[(0.2, e), (0.1, e / 2.0), (0.05, e / 2f64.powf(1.25))]).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-14 && (o[1] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn degenerate_orders() {
        assert_eq!(
            observed_order(&[(0.1, 1.0), (0.05, 0.0)]),
            Err(Error::DegenerateError(0.0))
        );
        assert!(observed_order(&[(0.1, 1.0)]).is_err());
        assert!(observed_order(&[(0.1, 1.0), (0.04, 0.5)]).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = (0..6).map(|i| {
            let x = 0.5f64.powi(i);
            (x, 7.0 * x.powf(1.5))
        }).collect();
        assert!((fitted_slope(&pts).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn constant_datum_is_consistent() {
        let g = GridSpec::new(10.0, 32, 0.01, 0.1).unwrap();
        let d = InitialDatum::SingleMode {
            mode: 0,
            coefficient: rustfft::num_complex::Complex64::new(2.0, 0.0),
        };
        for kind in StencilKind::ALL {
            let s = SchemeSpec::new(kind, 1, 0.3).unwrap();
            let e = consistency_error(&s, &g, &d, 3).unwrap();
            assert!(e.values().iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn convergence_error_examples() {
        let g = GridSpec::new(50.0, 16, 0.01, 0.1).unwrap();
        let a = FieldState::constant(16, 1.0).unwrap();
        assert_eq!(convergence_error(&a, &a, &g).unwrap(), 0.0);
        let b = FieldState::constant(16, 1.25).unwrap();
        assert!((convergence_error(&a, &b, &g).unwrap() - 0.25 * 50f64.sqrt()).abs() < 1e-12);
        assert!(convergence_error(&a, &FieldState::zeros(8), &g).is_err());
    }
}

//! Von Neumann analysis of the θ-schemes.
//!
//! With `ν = dt / dx^(2p+1)` and the stencil symbol
//! `σ(ξ) = φ(ξ) (-i)^(2p+1) (2 sin πξ)^(2p+1)`, one step multiplies the Fourier
//! series of the cell averages by
//!
//! ```text
//! A(ξ) = (1 - (1-θ) ν σ(ξ)) / (1 + θ ν σ(ξ))
//! ```
//!
//! where the phase `φ` is `exp(-iπξ)` for the forward stencil, `exp(+iπξ)` for
//! the backward stencil and `cos(πξ)` for the central one. `ξ` follows the
//! Fourier-series convention `V(ξ) = Σ_k v_k exp(2iπkξ)`, under which the shift
//! `v_{j+l}` multiplies by `exp(-2iπlξ)`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::stencil::{binomial, SchemeSpec, StencilKind};

/// Default number of uniformly spaced `ξ` samples, endpoints included.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Fewest samples accepted by [`classify_stability`].
pub const MIN_SAMPLES: usize = 512;

/// Default growth constant `C` in `|A| ≤ 1 + C dt`.
pub const DEFAULT_GROWTH_CONSTANT: f64 = 1.0;

/// Rounding allowance added to `1 + C dt` when judging sampled magnitudes.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// `(-i)^(2p+1) = -i (-1)^p`, evaluated by parity.
pub fn odd_power_of_minus_i(p: u32) -> Complex64 {
    if p.is_multiple_of(2) {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(0.0, 1.0)
    }
}

/// Direct evaluation of `Σ_k C(2p+1,k) (-1)^k exp(-2iπ(p-k+1)ξ)`.
pub fn symbol_sum(p: u32, xi: f64) -> Complex64 {
    let n = 2 * p + 1;
    (0..=n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let shift = f64::from(p) + 1.0 - f64::from(k);
            sign * binomial(n, k) as f64 * Complex64::from_polar(1.0, -2.0 * PI * shift * xi)
        })
        .sum()
}

/// Closed form `exp(-iπξ) (-2i sin πξ)^(2p+1)` of [`symbol_sum`].
pub fn symbol_closed_form(p: u32, xi: f64) -> Complex64 {
    let n = 2 * p + 1;
    let magnitude = (2.0 * (PI * xi).sin()).powi(n as i32);
    Complex64::from_polar(1.0, -PI * xi) * odd_power_of_minus_i(p) * magnitude
}

/// Symbol of the (undivided) stencil for the given kind.
pub fn stencil_symbol(kind: StencilKind, p: u32, xi: f64) -> Complex64 {
    let n = 2 * p + 1;
    let magnitude = (2.0 * (PI * xi).sin()).powi(n as i32);
    let phase = match kind {
        StencilKind::Forward => Complex64::from_polar(1.0, -PI * xi),
        StencilKind::Backward => Complex64::from_polar(1.0, PI * xi),
        StencilKind::Central => Complex64::new((PI * xi).cos(), 0.0),
    };
    phase * odd_power_of_minus_i(p) * magnitude
}

/// Amplification factor `A(ξ)` of one θ-scheme step.
pub fn amplification(scheme: &SchemeSpec, dt: f64, dx: f64, xi: f64) -> Result<Complex64> {
    let nu = dt / dx.powi(scheme.order() as i32);
    let sigma = stencil_symbol(scheme.kind(), scheme.p(), xi) * nu;
    let theta = scheme.theta();
    let numerator = Complex64::new(1.0, 0.0) - sigma * (1.0 - theta);
    let denominator = Complex64::new(1.0, 0.0) + sigma * theta;
    if denominator.norm() <= f64::EPSILON * (1.0 + sigma.norm() * theta) {
        return Err(Error::SingularSymbol { xi });
    }
    let a = numerator / denominator;
    if !(a.re.is_finite() && a.im.is_finite()) {
        return Err(Error::SingularSymbol { xi });
    }
    Ok(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Stable,
    Unstable,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
        })
    }
}

/// Sampled `|A(ξ)|` over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplificationProfile {
    pub xi_samples: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub max_magnitude: f64,
    pub scheme: SchemeSpec,
    pub dt: f64,
    pub dx: f64,
    pub growth_constant: f64,
    /// First `ξ` at which the denominator vanished, if any.
    pub singular_at: Option<f64>,
}

impl AmplificationProfile {
    pub fn verdict(&self) -> Verdict {
        if self.singular_at.is_none()
            && self.max_magnitude <= 1.0 + self.growth_constant * self.dt + ROUNDING_SLACK
        {
            Verdict::Stable
        } else {
            Verdict::Unstable
        }
    }
}

pub fn amplification_profile(
    scheme: &SchemeSpec,
    dt: f64,
    dx: f64,
    samples: usize,
    growth_constant: f64,
) -> AmplificationProfile {
    let samples = samples.max(2);
    let xi_samples: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1) as f64)
        .collect();
    let mut singular_at = None;
    let magnitudes: Vec<f64> = xi_samples
        .iter()
        .map(|&xi| match amplification(scheme, dt, dx, xi) {
            Ok(a) => a.norm(),
            Err(_) => {
                singular_at.get_or_insert(xi);
                f64::INFINITY
            }
        })
        .collect();
    let max_magnitude = magnitudes.iter().copied().fold(0.0, f64::max);
    AmplificationProfile {
        xi_samples,
        magnitudes,
        max_magnitude,
        scheme: *scheme,
        dt,
        dx,
        growth_constant,
        singular_at,
    }
}

/// False for the parity cells that are unstable for every θ: forward with
/// even `p ≠ 0` and backward with odd `p`.
pub fn parity_admits_stability(kind: StencilKind, p: u32) -> bool {
    match kind {
        StencilKind::Forward => p == 0 || p % 2 == 1,
        StencilKind::Backward => p.is_multiple_of(2),
        StencilKind::Central => true,
    }
}

/// Closed-form CFL predicates of the stability table.
pub fn table_prediction(scheme: &SchemeSpec, dt: f64, dx: f64, growth_constant: f64) -> Verdict {
    let p = scheme.p();
    let lhs = dt * (1.0 - 2.0 * scheme.theta());
    let order = scheme.order() as i32;
    let one_sided = dx.powi(order) / 4f64.powi(p as i32);
    let holds = |rhs: f64| lhs <= rhs + 1e-12 * rhs.abs();
    let stable = match scheme.kind() {
        StencilKind::Forward if p == 0 => holds(-dx),
        StencilKind::Forward if p.is_multiple_of(2) => false,
        StencilKind::Forward => holds(one_sided),
        StencilKind::Backward if p == 0 => holds(dx),
        StencilKind::Backward if p % 2 == 1 => false,
        StencilKind::Backward => holds(one_sided),
        StencilKind::Central => {
            holds(2.0 * growth_constant * dx.powi(2 * order) / 16f64.powi(p as i32))
        }
    };
    if stable {
        Verdict::Stable
    } else {
        Verdict::Unstable
    }
}

/// Sampled verdict next to the closed-form prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub sampled: Verdict,
    pub predicted: Verdict,
    pub max_magnitude: f64,
    pub profile: AmplificationProfile,
}

impl StabilityReport {
    pub fn agrees(&self) -> bool {
        self.sampled == self.predicted
    }
}

pub fn classify_stability(
    scheme: &SchemeSpec,
    dt: f64,
    dx: f64,
    growth_constant: f64,
    samples: usize,
) -> Result<StabilityReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidScheme(format!(
            "at least {MIN_SAMPLES} samples required, got {samples}"
        )));
    }
    if !(dt > 0.0 && dx > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "dt and dx must be positive, got dt = {dt}, dx = {dx}"
        )));
    }
    let profile = amplification_profile(scheme, dt, dx, samples, growth_constant);
    Ok(StabilityReport {
        sampled: profile.verdict(),
        predicted: table_prediction(scheme, dt, dx, growth_constant),
        max_magnitude: profile.max_magnitude,
        profile,
    })
}

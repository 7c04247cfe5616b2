//! Initial data of controlled Sobolev regularity, exact cell-average
//! projection, discrete Sobolev norms and the Fourier-cutoff mollifier.

use std::f64::consts::PI;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{FieldState, GridSpec, Transform};

pub const DEFAULT_INTERVAL: (f64, f64) = (20.0, 25.0);
pub const DEFAULT_MAX_MODE: usize = 1 << 18;

/// Added to `m + 1/2` in the synthetic amplitude decay so the datum sits
/// strictly inside `H^m`.
pub const SYNTHETIC_MARGIN: f64 = 0.01;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, exact up to degree 9.
const GAUSS_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    /// Indicator of `[a, b]`, integrated `k` times (see [`PiecewisePolynomial::integrated_indicator`]).
    IndicatorIntegrated { k: u32, a: f64, b: f64 },
    /// `Σ_{k ≥ 1} 2|c_k| cos(2πkx/L + φ_k)` with `|c_k| = (1+k²)^(-(m+1/2+0.01)/2)`
    /// and seeded phases.
    FourierSynthetic { m: f64, seed: u64, max_mode: usize },
    /// Periodised Gaussian bump `exp(-d²/(2w²))`.
    Gaussian { center: f64, width: f64 },
    /// `Re(c exp(2πi k x/L))`.
    SingleMode { mode: i64, coefficient: Complex64 },
}

impl InitialDatum {
    pub fn indicator_integrated(k: u32) -> Self {
        let (a, b) = DEFAULT_INTERVAL;
        Self::IndicatorIntegrated { k, a, b }
    }

    pub fn indicator_integrated_on(k: u32, a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDatum(format!("empty interval [{a}, {b}]")));
        }
        if k > 9 {
            return Err(Error::InvalidDatum(format!(
                "at most 9 integrations are supported, got {k}"
            )));
        }
        Ok(Self::IndicatorIntegrated { k, a, b })
    }

    pub fn fourier_synthetic(m: f64, seed: u64) -> Result<Self> {
        Self::fourier_synthetic_with_modes(m, seed, DEFAULT_MAX_MODE)
    }

    pub fn fourier_synthetic_with_modes(m: f64, seed: u64, max_mode: usize) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidDatum(format!("regularity must be positive, got {m}")));
        }
        if max_mode == 0 {
            return Err(Error::InvalidDatum("max_mode must be positive".into()));
        }
        Ok(Self::FourierSynthetic { m, seed, max_mode })
    }

    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        if !(center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(Error::InvalidDatum(format!(
                "gaussian needs a finite center and positive width, got ({center}, {width})"
            )));
        }
        Ok(Self::Gaussian { center, width })
    }

    pub fn single_mode(mode: i64) -> Self {
        Self::SingleMode {
            mode,
            coefficient: Complex64::new(1.0, 0.0),
        }
    }

    /// Datum used for a requested regularity `m`: the integrated indicator
    /// when `m - 1/2` is a nonnegative integer, a synthetic series otherwise.
    pub fn for_regularity(m: f64, seed: u64) -> Result<Self> {
        let k = m - 0.5;
        if k >= 0.0 && k.fract() == 0.0 && k <= 9.0 {
            Ok(Self::indicator_integrated(k as u32))
        } else {
            Self::fourier_synthetic(m, seed)
        }
    }

    /// Sobolev exponent `m` driving the convergence rates; infinite for
    /// analytic data.
    pub fn regularity(&self) -> f64 {
        match self {
            Self::IndicatorIntegrated { k, .. } => *k as f64 + 0.5,
            Self::FourierSynthetic { m, .. } => *m,
            Self::Gaussian { .. } | Self::SingleMode { .. } => f64::INFINITY,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::IndicatorIntegrated { .. } => "indicator_integrated",
            Self::FourierSynthetic { .. } => "fourier_synthetic",
            Self::Gaussian { .. } => "gaussian",
            Self::SingleMode { .. } => "single_mode",
        }
    }

    /// Point value on a domain of length `domain_length`.
    pub fn evaluate(&self, x: f64, domain_length: f64) -> f64 {
        match self {
            Self::IndicatorIntegrated { k, a, b } => {
                let (a, b) = clip_interval(*a, *b, domain_length);
                PiecewisePolynomial::integrated_indicator(*k, a, b, domain_length)
                    .evaluate(x.rem_euclid(domain_length))
            }
            Self::FourierSynthetic { m, seed, max_mode } => {
                let omega = 2.0 * PI * x / domain_length;
                synthetic_terms(*m, *seed, *max_mode)
                    .map(|(k, amp, phase)| 2.0 * amp * (omega * k as f64 + phase).cos())
                    .sum()
            }
            Self::Gaussian { center, width } => gaussian_value(x, *center, *width, domain_length),
            Self::SingleMode { mode, coefficient } => {
                let phase = 2.0 * PI * *mode as f64 * x / domain_length;
                (coefficient * Complex64::from_polar(1.0, phase)).re
            }
        }
    }
}

fn clip_interval(a: f64, b: f64, domain_length: f64) -> (f64, f64) {
    let (ca, cb) = (a.max(0.0), b.min(domain_length));
    if ca != a || cb != b {
        warn!("interval [{a}, {b}] truncated to the domain [0, {domain_length}]");
    }
    (ca, cb.max(ca))
}

fn gaussian_value(x: f64, center: f64, width: f64, domain_length: f64) -> f64 {
    let mut d = (x - center).rem_euclid(domain_length);
    if d > 0.5 * domain_length {
        d -= domain_length;
    }
    (-d * d / (2.0 * width * width)).exp()
}

/// `(k, |c_k|, φ_k)` for `k = 1..=max_mode`, phases drawn in order from the seed.
fn synthetic_terms(m: f64, seed: u64, max_mode: usize) -> impl Iterator<Item = (usize, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponent = -(m + 0.5 + SYNTHETIC_MARGIN) / 2.0;
    (1..=max_mode).map(move |k| {
        let phase = rng.gen::<f64>() * 2.0 * PI;
        let amp = (1.0 + (k as f64).powi(2)).powf(exponent);
        (k, amp, phase)
    })
}

/// Periodic piecewise polynomial on `[0, L)`. Piece `i` lives on
/// `[breaks[i], breaks[i+1])` and is stored in the local variable
/// `t = x - breaks[i]`, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breaks: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

impl PiecewisePolynomial {
    /// Indicator of `[a, b]` for `k = 0`. For `k ≥ 1` the indicator minus its
    /// mean is integrated from 0, and the mean is removed after every
    /// integration, so the result is periodic, continuous and mean-zero.
    pub fn integrated_indicator(k: u32, a: f64, b: f64, domain_length: f64) -> Self {
        let breaks = vec![0.0, a, b, domain_length];
        let shift = if k == 0 { 0.0 } else { (b - a) / domain_length };
        let mut poly = Self {
            breaks,
            pieces: vec![vec![-shift], vec![1.0 - shift], vec![-shift]],
        };
        for _ in 0..k {
            poly = poly.antiderivative();
            let mean = poly.integral() / domain_length;
            for piece in &mut poly.pieces {
                piece[0] -= mean;
            }
        }
        poly
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn degree(&self) -> usize {
        self.pieces.iter().map(|p| p.len() - 1).max().unwrap_or(0)
    }

    fn piece_index(&self, x: f64) -> usize {
        let last = self.pieces.len() - 1;
        (0..last).find(|&i| x < self.breaks[i + 1]).unwrap_or(last)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let i = self.piece_index(x);
        horner(&self.pieces[i], x - self.breaks[i])
    }

    /// Antiderivative vanishing at the left end of the domain.
    pub fn antiderivative(&self) -> Self {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        let mut left_value = 0.0;
        for (i, piece) in self.pieces.iter().enumerate() {
            let mut next = vec![left_value];
            next.extend(piece.iter().enumerate().map(|(d, c)| c / (d + 1) as f64));
            let width = self.breaks[i + 1] - self.breaks[i];
            left_value = horner(&next, width);
            pieces.push(next);
        }
        Self {
            breaks: self.breaks.clone(),
            pieces,
        }
    }

    /// Integral over the whole domain.
    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, piece)| {
                let width = self.breaks[i + 1] - self.breaks[i];
                piece
                    .iter()
                    .enumerate()
                    .map(|(d, c)| c * width.powi(d as i32 + 1) / (d + 1) as f64)
                    .sum::<f64>()
            })
            .sum()
    }

    /// Exact average over `[lo, hi]`, splitting at the breaks.
    pub fn average(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        let mut start = lo;
        while start < hi {
            let i = self.piece_index(start);
            let end = if i + 1 < self.pieces.len() {
                self.breaks[i + 1].min(hi)
            } else {
                hi
            };
            let origin = self.breaks[i];
            total += gauss_legendre(start, end, |x| horner(&self.pieces[i], x - origin));
            start = end;
        }
        total / (hi - lo)
    }
}

fn horner(coefficients: &[f64], t: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

fn gauss_legendre(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    GAUSS_NODES
        .iter()
        .zip(GAUSS_WEIGHTS)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// `v_j = (1/dx) ∫_{x_j}^{x_{j+1}} u₀`.
pub fn cell_average_projection(datum: &InitialDatum, grid: &GridSpec) -> Result<FieldState> {
    let cells = grid.cell_count();
    let dx = grid.dx();
    let length = grid.domain_length();
    let values = match datum {
        InitialDatum::IndicatorIntegrated { k, a, b } => {
            let (a, b) = clip_interval(*a, *b, length);
            let poly = PiecewisePolynomial::integrated_indicator(*k, a, b, length);
            (0..cells)
                .map(|j| {
                    let lo = grid.cell_left(j);
                    let hi = if j + 1 == cells { length } else { lo + dx };
                    poly.average(lo, hi)
                })
                .collect()
        }
        InitialDatum::Gaussian { center, width } => {
            if 16.0 * width > length {
                warn!("gaussian of width {width} overlaps its periodic images on length {length}");
            }
            (0..cells)
                .map(|j| {
                    let lo = grid.cell_left(j);
                    gauss_legendre(lo, lo + dx, |x| gaussian_value(x, *center, *width, length)) / dx
                })
                .collect()
        }
        InitialDatum::SingleMode { mode, coefficient } => {
            let factor = sinc(PI * *mode as f64 * dx / length);
            (0..cells)
                .map(|j| {
                    let phase = 2.0 * PI * *mode as f64 * grid.cell_center(j) / length;
                    (coefficient * Complex64::from_polar(factor, phase)).re
                })
                .collect()
        }
        InitialDatum::FourierSynthetic { m, seed, max_mode } => {
            synthetic_cell_averages(*m, *seed, *max_mode, cells)
        }
    };
    FieldState::new(values, 0)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Cell average of `exp(2πi k x/L)` over cell `j` is `exp(2πi kj/J) S_k` with
/// `S_k = (exp(iθ) - 1)/(iθ)`, `θ = 2πk/J`. Each mode is folded into bin `k mod J`
/// and the grid values recovered by one unnormalised inverse transform.
fn synthetic_cell_averages(m: f64, seed: u64, max_mode: usize, cells: usize) -> Vec<f64> {
    let mut bins = vec![Complex64::new(0.0, 0.0); cells];
    for (k, amp, phase) in synthetic_terms(m, seed, max_mode) {
        let theta = 2.0 * PI * k as f64 / cells as f64;
        let s = Complex64::new(0.0, 0.5 * theta).exp() * sinc(0.5 * theta);
        let c = Complex64::from_polar(amp, phase) * s;
        bins[k % cells] += c;
        bins[(cells - k % cells) % cells] += c.conj();
    }
    let transform = Transform::new(cells);
    let scale = cells as f64;
    for b in bins.iter_mut() {
        *b *= scale;
    }
    transform.inverse_real(&bins)
}

/// `sqrt(Σ_k (1 + ξ_k²)^s |û_k|² dx/J)`, which equals the ℓ²_Δ norm at `s = 0`.
pub fn sobolev_norm(state: &FieldState, grid: &GridSpec, s: f64) -> Result<f64> {
    state.check_conforms(grid)?;
    if !(s >= 0.0) {
        return Err(Error::InvalidDatum(format!("Sobolev exponent must be nonnegative, got {s}")));
    }
    let spectrum = Transform::new(grid.cell_count()).forward_real(state.values());
    Ok(spectral_sobolev_norm(&spectrum, grid, s))
}

pub(crate) fn spectral_sobolev_norm(spectrum: &[Complex64], grid: &GridSpec, s: f64) -> f64 {
    let sum: f64 = spectrum
        .iter()
        .enumerate()
        .map(|(k, c)| (1.0 + grid.wavenumber(k).powi(2)).powf(s) * c.norm_sqr())
        .sum();
    (sum * grid.dx() / grid.cell_count() as f64).sqrt()
}

/// Smooth even cutoff: 1 on `[-1/2, 1/2]`, 0 outside `(-1, 1)`, with a C^∞
/// monotone transition in between.
pub fn cutoff(t: f64) -> f64 {
    let a = t.abs();
    if a <= 0.5 {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let y = 2.0 * (a - 0.5);
    let f = |y: f64| if y <= 0.0 { 0.0 } else { (-1.0 / y).exp() };
    1.0 - f(y) / (f(y) + f(1.0 - y))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mollifier {
    delta: f64,
}

impl Mollifier {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::InvalidDatum(format!("delta must be positive, got {delta}")));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Fourier multiplier `χ(δξ)`.
    pub fn multiplier(&self, xi: f64) -> f64 {
        cutoff(self.delta * xi)
    }
}

pub fn mollify(state: &FieldState, grid: &GridSpec, mol: &Mollifier) -> Result<FieldState> {
    state.check_conforms(grid)?;
    let transform = Transform::new(grid.cell_count());
    let mut spectrum = transform.forward_real(state.values());
    for (k, c) in spectrum.iter_mut().enumerate() {
        *c *= mol.multiplier(grid.wavenumber(k));
    }
    FieldState::new(transform.inverse_real(&spectrum), state.time_index())
}

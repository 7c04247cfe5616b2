//! Difference operators for the `(2p+1)`-th derivative.
//!
//! The forward operator is the binomial difference
//! `Σ_k C(2p+1,k) (-1)^k v_{j+p+1-k} / dx^(2p+1)`; the backward operator is the
//! same stencil shifted one cell to the left and the central operator is the
//! mean of the two. Weights are built in exact integer arithmetic.

use crate::error::{Error, Result};
use crate::grid::{FieldState, GridSpec};

/// Default ceiling on `p`; `C(13, 6) = 1716` and `dx^13` stay representable.
pub const DEFAULT_P_MAX: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StencilKind {
    Forward,
    Backward,
    Central,
}

impl StencilKind {
    pub const ALL: [StencilKind; 3] = [
        StencilKind::Forward,
        StencilKind::Backward,
        StencilKind::Central,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StencilKind::Forward => "forward",
            StencilKind::Backward => "backward",
            StencilKind::Central => "central",
        }
    }
}

impl std::fmt::Display for StencilKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StencilKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forward" | "f" => Ok(StencilKind::Forward),
            "backward" | "b" => Ok(StencilKind::Backward),
            "central" | "c" => Ok(StencilKind::Central),
            other => Err(Error::InvalidScheme(format!("unknown stencil kind '{other}'"))),
        }
    }
}

/// Stencil kind, derivative parameter `p` and implicitness `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeSpec {
    kind: StencilKind,
    p: u32,
    theta: f64,
    p_max: u32,
}

impl SchemeSpec {
    pub fn new(kind: StencilKind, p: u32, theta: f64) -> Result<Self> {
        Self::with_p_max(kind, p, theta, DEFAULT_P_MAX)
    }

    pub fn with_p_max(kind: StencilKind, p: u32, theta: f64, p_max: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::InvalidScheme(format!(
                "theta must lie in [0, 1], got {theta}"
            )));
        }
        if p > p_max {
            return Err(Error::StencilOrderTooLarge { p, p_max });
        }
        Ok(Self {
            kind,
            p,
            theta,
            p_max,
        })
    }

    pub fn kind(&self) -> StencilKind {
        self.kind
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn p_max(&self) -> u32 {
        self.p_max
    }

    /// Derivative order `2p + 1`.
    pub fn order(&self) -> u32 {
        2 * self.p + 1
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::with_p_max(self.kind, self.p, theta, self.p_max)
    }
}

/// Offsets and weights of a difference operator, before division by `dx^(2p+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilWeights {
    offsets: Vec<i64>,
    weights: Vec<f64>,
    order: u32,
}

impl StencilWeights {
    /// Builds weights from raw parts; used to probe deliberately perturbed stencils.
    pub fn from_parts(offsets: Vec<i64>, weights: Vec<f64>, order: u32) -> Self {
        assert_eq!(offsets.len(), weights.len());
        Self {
            offsets,
            weights,
            order,
        }
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    /// Derivative order `2p + 1` the stencil approximates.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.offsets.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * i128::from(n - i) / i128::from(i + 1);
    }
    acc
}

/// Signed binomial weights of the forward stencil as `(offset, weight)` pairs,
/// offsets running from `p+1` down to `-p`.
fn forward_integer_weights(p: u32) -> Vec<(i64, i128)> {
    let n = 2 * p + 1;
    (0..=n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            (i64::from(p) + 1 - i64::from(k), sign * binomial(n, k))
        })
        .collect()
}

pub fn build_stencil(scheme: &SchemeSpec) -> Result<StencilWeights> {
    if scheme.p() > scheme.p_max() {
        return Err(Error::StencilOrderTooLarge {
            p: scheme.p(),
            p_max: scheme.p_max(),
        });
    }
    let p = scheme.p();
    let forward = forward_integer_weights(p);
    let (offsets, weights): (Vec<i64>, Vec<f64>) = match scheme.kind() {
        StencilKind::Forward => forward.iter().map(|&(o, w)| (o, w as f64)).unzip(),
        StencilKind::Backward => forward.iter().map(|&(o, w)| (o - 1, w as f64)).unzip(),
        StencilKind::Central => {
            // Twice the central weights, on offsets p+1 .. -p-1.
            let lo = -(i64::from(p) + 1);
            let hi = i64::from(p) + 1;
            let mut doubled = vec![0i128; (hi - lo + 1) as usize];
            for &(o, w) in &forward {
                doubled[(hi - o) as usize] += w;
                doubled[(hi - (o - 1)) as usize] += w;
            }
            doubled
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0)
                .map(|(i, &w)| (hi - i as i64, w as f64 / 2.0))
                .unzip()
        }
    };
    Ok(StencilWeights {
        offsets,
        weights,
        order: scheme.order(),
    })
}

/// Applies the stencil on the periodic grid, dividing by `dx^(2p+1)`.
pub fn apply(weights: &StencilWeights, state: &FieldState, grid: &GridSpec) -> Result<FieldState> {
    state.check_conforms(grid)?;
    let scale = grid.dx().powi(weights.order() as i32);
    if scale == 0.0 || !scale.is_normal() {
        return Err(Error::GridTooFine {
            order: weights.order(),
        });
    }
    let values = state.values();
    let n = values.len() as i64;
    let out = (0..n)
        .map(|j| {
            weights
                .iter()
                .map(|(o, w)| w * values[(j + o).rem_euclid(n) as usize])
                .sum::<f64>()
                / scale
        })
        .collect();
    FieldState::new(out, state.time_index())
}

/// `Σ_k C(2p+1,k) (-1)^k (p-k+1)^l` in exact integer arithmetic.
///
/// Vanishes for `l < 2p+1`, equals `(2p+1)!` at `l = 2p+1` and for larger `l`
/// equals `l!/(l-2p-1)! · ξ^(l-2p-1)` for some `ξ` in `(-p, p+1)`.
pub fn difference_moment_exact(p: u32, l: u32) -> Result<i128> {
    let overflow = || Error::IntegerOverflow { p, l };
    forward_integer_weights(p)
        .into_iter()
        .try_fold(0i128, |acc, (offset, weight)| {
            let power = i128::from(offset).checked_pow(l).ok_or_else(overflow)?;
            let term = weight.checked_mul(power).ok_or_else(overflow)?;
            acc.checked_add(term).ok_or_else(overflow)
        })
}

pub fn difference_moment(p: u32, l: u32) -> Result<f64> {
    if p > DEFAULT_P_MAX {
        return Err(Error::StencilOrderTooLarge {
            p,
            p_max: DEFAULT_P_MAX,
        });
    }
    if l > 3 * (2 * p + 1) {
        return Err(Error::InvalidScheme(format!(
            "moment exponent {l} exceeds 3(2p+1) = {}",
            3 * (2 * p + 1)
        )));
    }
    difference_moment_exact(p, l).map(|v| v as f64)
}

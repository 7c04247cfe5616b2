use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid scheme: {0}")]
    InvalidScheme(String),

    #[error("invalid datum: {0}")]
    InvalidDatum(String),

    #[error("non-finite field")]
    NonFiniteField,

    #[error("field has {found} cells but the grid has {expected}")]
    GridMismatch { expected: usize, found: usize },

    #[error("stencil order too large: p = {p} exceeds p_max = {p_max}")]
    StencilOrderTooLarge { p: u32, p_max: u32 },

    #[error("grid too fine for order: dx^{order} underflows")]
    GridTooFine { order: u32 },

    #[error("exact integer arithmetic overflowed for p = {p}, l = {l}")]
    IntegerOverflow { p: u32, l: u32 },

    #[error("singular symbol at xi = {xi}")]
    SingularSymbol { xi: f64 },

    #[error("singular symbol at discrete frequency k = {k}")]
    SingularMode { k: usize },

    #[error("blow-up at step {step}")]
    BlowUp { step: usize },

    #[error("degenerate error value {0}")]
    DegenerateError(f64),

    #[error("invalid refinement sequence: {0}")]
    InvalidRefinement(String),

    #[error("no convergent scheme for this parity: {kind} with p = {p}")]
    NoConvergentScheme { kind: String, p: u32 },

    #[error("odd cell count {0} cannot be coarsened")]
    OddCellCount(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared across the crate.

use thiserror::Error;

/// Which structural axiom of a compatible group failed during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructureAxiom {
    /// A k-basis element is not skew-symmetric.
    KSkew,
    /// A p-basis element is not symmetric.
    PSymmetric,
    /// A bracket of basis elements leaves its graded target span.
    BracketClosure,
    /// The combined basis is linearly dependent.
    LinearIndependence,
    /// A discrete representative is not orthogonal.
    RepOrthogonal,
    /// A discrete representative does not preserve span(k) and span(p).
    RepAdInvariance,
}

impl std::fmt::Display for StructureAxiom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StructureAxiom::KSkew => "k-basis skew-symmetry",
            StructureAxiom::PSymmetric => "p-basis symmetry",
            StructureAxiom::BracketClosure => "bracket closure",
            StructureAxiom::LinearIndependence => "basis linear independence",
            StructureAxiom::RepOrthogonal => "representative orthogonality",
            StructureAxiom::RepAdInvariance => "representative Ad-invariance",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("structure violation ({axiom}) at basis pair ({i}, {j}): residual {residual:.3e}")]
    StructureViolation {
        axiom: StructureAxiom,
        i: usize,
        j: usize,
        residual: f64,
    },

    #[error("dimension mismatch: {what} has {got}, expected {expected}")]
    DimensionMismatch {
        what: String,
        got: usize,
        expected: usize,
    },

    #[error("non-finite value during flow at iteration {iteration} (last f = {f_last})")]
    NonFinite { iteration: usize, f_last: f64 },

    #[error("flow failed: {0}")]
    FlowFailed(String),

    #[error("point is not minimal: gradient residual {residual:.3e} exceeds {tol:.3e}")]
    NotMinimal { residual: f64, tol: f64 },

    #[error("no invariant complement: commutation residual {residual:.3e} exceeds {tol:.3e}")]
    NoInvariantComplement { residual: f64, tol: f64 },

    #[error("no sample passed the filters: {0}")]
    EmptyResult(String),

    #[error("no dense stratum: {open} open strata remain after conjugacy merging")]
    NoDenseStratum { open: usize },

    #[error("search budget exhausted: {0}")]
    SearchBudgetExhausted(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e})")]
    NotSymmetricMatrix { asymmetry: f64 },

    #[error("symmetric eigensolver did not converge")]
    EigenNonConvergence,

    #[error("range inclusion fails: best least-squares factor leaves residual {residual:.3e}")]
    NotCompletable { residual: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error(
        "parameter is not J-contractive (most negative defect eigenvalue {min_eigenvalue:.3e})"
    )]
    NotJContractive { min_eigenvalue: f64 },

    #[error("target negative index {kappa} - {exit_index} is negative")]
    NegativeTargetIndex { kappa: usize, exit_index: usize },

    #[error("range inclusion failed (residual {residual:.3e})")]
    RangeInclusionFailed { residual: f64 },

    #[error("operator does not compress to the given T (mismatch {mismatch:.3e})")]
    NotALifting { mismatch: f64 },

    #[error("negative index mismatch: expected {expected}, eigenvalue count gives {found}")]
    IndexMismatch { expected: usize, found: usize },

    #[error("lifting parameter invariant violated: {0}")]
    ParameterInvariantViolated(String),

    #[error("column is not solvable: nu_-(I - T11^2) = {kappa11} but nu_-(I - T1*T1) = {kappa1}")]
    NotSolvable { kappa11: usize, kappa1: usize },

    #[error("operator is not an extension (mismatch {mismatch:.3e})")]
    NotAnExtension { mismatch: f64 },

    #[error("relation is not symmetric")]
    NotSymmetric,

    #[error("relation is not selfadjoint")]
    NotSelfadjoint,

    #[error("-1 is an eigenvalue of the relation, so its Cayley transform is multivalued")]
    CayleyNotOperator,

    #[error("shift {shift} is not admissible; it must exceed {bound}")]
    ShiftNotAdmissible { shift: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("internal identity check failed: {0}")]
    IdentityViolated(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

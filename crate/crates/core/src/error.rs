use num_complex::Complex64;
use thiserror::Error;

/// Every failure mode of the library. Variants are grouped by the module that raises them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // model
    #[error("grid is not uniform (deviation {0:e})")]
    NonUniformGrid(f64),
    #[error("boundary values violate declared asymptotics: {0}")]
    BoundaryMismatch(String),
    #[error("coupling {0} is neither focusing, defocusing nor free")]
    InvalidCoupling(Complex64),
    #[error("spectral grid is empty: {0}")]
    EmptyGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),

    // specfun
    #[error("Gamma pole at non-positive integer {0}")]
    PoleAtNonPositiveInteger(Complex64),
    #[error("hypergeometric parameter c = {0} is a pole")]
    ParameterPole(Complex64),
    #[error("series did not converge: {0}")]
    NonConvergent(String),

    // zs-direct
    #[error("k = {0} is a branch point of mu(k)")]
    BranchPoint(Complex64),
    #[error("integration diverged at x = {x} (k = {k})")]
    IntegratorDiverged { x: f64, k: Complex64 },
    #[error("det S(k) drifted by {drift:e} at k = {k}")]
    DeterminantDrift { k: f64, drift: f64 },
    #[error("contour passes through a zero of a(k) near {0}")]
    ContourThroughZero(Complex64),
    #[error("Newton refinement stalled near {0}")]
    NewtonStalled(Complex64),
    #[error("a(k) vanishes at k = {0}")]
    DivisionByZeroA(f64),
    #[error("region crosses the branch cut: {0}")]
    BranchCutInRegion(String),

    // closed-forms
    #[error("Gamma argument {0} hits a pole")]
    GammaPole(Complex64),
    #[error("degenerate background phase: {0}")]
    DegeneratePhase(String),

    // glm-rosales
    #[error("Neumann series diverging (term ratio {0})")]
    SeriesDiverging(f64),
    #[error("resolvent is singular at x = {0}")]
    SingularResolvent(f64),

    // darboux
    #[error("dressing matrix H is singular at x = {0}")]
    SingularH(f64),
    #[error("k0 = {0} is not a zero of a(k)")]
    RemoveNonexistentZero(Complex64),
    #[error("zero at {0} has order {1}; only simple zeros are supported")]
    HigherOrderZero(Complex64, u32),
    #[error("mixing coefficient annihilates the seed solution (mu * b0 = 1)")]
    DegenerateMixing,

    // nls-oracle
    #[error("field blew up at t = {0}")]
    BlowUp(f64),
    #[error("unsupported boundary for periodic evolution: {0}")]
    UnsupportedBoundary(String),
}

pub type Result<T> = std::result::Result<T, Error>;

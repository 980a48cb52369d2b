use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ghost count mismatch: {left} vs {right}")]
    GhostCountMismatch { left: usize, right: usize },

    #[error("observable has mixed parity")]
    MixedParity,

    #[error("monomial is not in the image of the Koszul-Tate differential (G- and P-degree both zero)")]
    NotInImage,

    #[error("perturbation did not terminate by rank {max_rank}; residual obstruction has {terms} terms")]
    RankOverflow { max_rank: usize, terms: usize },

    #[error("BRST construction failed: {0}")]
    Construction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("constraint algebra inconsistent: max |[G_a,G_b] + i C_ab^c G_c| = {residual:e} exceeds {tolerance:e}")]
    Consistency { residual: f64, tolerance: f64 },

    #[error("operator has no adjoint: residual {residual:e}")]
    NoAdjoint { residual: f64 },

    #[error("BRST operator is not nilpotent: max |Omega^2| = {residual:e}, concentrated in ghost sector {sector}")]
    Nilpotency { residual: f64, sector: usize },

    #[error("invalid cochain complex: max |d_(k+1) d_k| = {residual:e} at degree {degree}")]
    InvalidComplex { residual: f64, degree: usize },

    #[error("numerical rank is ambiguous at degree {degree}: {harmonic} harmonic vectors for a cohomology of dimension {cohomology}; adjust the rank tolerance")]
    RankAmbiguity { degree: usize, harmonic: usize, cohomology: usize },

    #[error("theorem violation: {0}")]
    TheoremViolation(String),
}

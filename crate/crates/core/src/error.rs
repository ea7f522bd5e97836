use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("eigensolver failed on matrix {fingerprint}: {reason}")]
    Solver { fingerprint: String, reason: String },

    /// Band tracking could not resolve an assignment even after local refinement.
    #[error("degenerate spectrum near k = {k:.9}")]
    DegenerateSpectrum { k: f64 },

    /// Right eigenvectors are (numerically) linearly dependent.
    #[error("near exceptional point: eigenvector condition number {condition:.3e}")]
    NearExceptionalPoint { condition: f64 },

    #[error("braid extraction grid too coarse near k = {k:.9}")]
    GridTooCoarse { k: f64 },

    #[error("projection stayed degenerate after {attempts} angle perturbations")]
    DegenerateProjection { attempts: usize },

    /// det(H(k) - Tr/4) came within tolerance of zero.
    #[error("gapless point: min |det| = {min_abs_f:.3e} at k = {k:.9}")]
    Gapless { min_abs_f: f64, k: f64 },

    #[error("winding accumulation did not resolve below n_k = {n_k}")]
    Resolution { n_k: usize },

    /// Occupied and unoccupied levels coincide at the Fermi level.
    #[error("degenerate filling: Fermi gap {gap:.3e}")]
    DegenerateFilling { gap: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors that mark a parameter point as lying on (or next to) a phase
    /// boundary rather than signalling a bug or bad input.
    pub fn is_boundary(&self) -> bool {
        matches!(
            self,
            Error::Gapless { .. }
                | Error::NearExceptionalPoint { .. }
                | Error::DegenerateFilling { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::Resolution { .. }
        )
    }
}

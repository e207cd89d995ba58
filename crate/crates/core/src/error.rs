use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (symmetry defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("cutoff {mu} lies within {gap_tol} of the spectrum")]
    CutoffOnSpectrum { mu: f64, gap_tol: f64 },

    #[error("no spectral gap wider than 2*{gap_tol} below {lambda_max}{}", patch_suffix(.patch))]
    NoGap {
        lambda_max: f64,
        gap_tol: f64,
        patch: Option<usize>,
    },

    #[error("subspaces live in different graded spaces")]
    AmbientMismatch,

    #[error("degree {degree} out of range (allowed {min}..={max})")]
    DegreeOutOfRange {
        degree: usize,
        min: usize,
        max: usize,
    },

    #[error("cochain of degree {degree} is not a cocycle")]
    NotACocycle { degree: usize },

    #[error("triple product on {simplex:?} is not scalar (defect {defect:.3e})")]
    NotProjectivelyFlat { simplex: Vec<usize>, defect: f64 },

    #[error("phase {phase} on {simplex:?} has no rational form with denominator <= {q_max}")]
    IrrationalPhase {
        simplex: Vec<usize>,
        phase: f64,
        q_max: u32,
    },

    #[error("complex is not a closed oriented surface: {0}")]
    NotClosedSurface(String),

    #[error(
        "transition phase jumps by {hop:.3} turns inside overlap {edge:?}; sampling too coarse"
    )]
    UnderResolved { edge: (usize, usize), hop: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("twist cocycles do not match")]
    TwistMismatch,

    #[error("bundles are defined over different covers")]
    CoverMismatch,

    #[error("graded index is inconsistent: {0}")]
    InconsistentIndex(String),

    #[error(
        "local families on patches {patches:?} disagree at sample {sample:?} (defect {defect:.3e})"
    )]
    IncompatibleSection {
        patches: (usize, usize),
        sample: Vec<usize>,
        defect: f64,
    },

    #[error("ambient dimension {given} is smaller than the {needed} needed for the embedding")]
    EmbeddingTooSmall { needed: usize, given: usize },

    #[error("bundle fails verification: {}", .0.join(", "))]
    VerificationFailed(Vec<String>),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn patch_suffix(patch: &Option<usize>) -> String {
    match patch {
        Some(p) => format!(" on patch {p}"),
        None => String::new(),
    }
}

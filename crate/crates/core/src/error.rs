use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("angular density undefined for zero spread")]
    DegenerateSpread,

    #[error("composite covariance is not positive semidefinite (min eigenvalue {min_eig:e}, norm {norm:e})")]
    NotPsd { min_eig: f64, norm: f64 },

    #[error("extended covariance is singular (eigenvalue ratio {ratio:e})")]
    SingularCovariance { ratio: f64 },

    #[error("noncircularity phase undefined: |z2| = {magnitude:e}")]
    UndefinedPhase { magnitude: f64 },

    #[error("auxiliary vector violates monotone box constraints by {violation:e}")]
    InfeasibleZ { violation: f64 },

    #[error("found {found} local minima, {wanted} requested")]
    InsufficientMinima { wanted: usize, found: usize, locations: Vec<f64> },

    #[error("robust estimator requires a uniformly spaced linear geometry")]
    NonSeparableGeometry,

    #[error("hessian is ill-conditioned (condition number {cond:e})")]
    IllConditionedHessian { cond: f64 },

    #[error("complex residue too large in a real-valued quantity (ratio {ratio:e})")]
    ComplexResidue { ratio: f64 },

    #[error("model covariance is singular")]
    SingularModel,

    #[error("nuisance block of the Fisher information is singular")]
    SingularNuisance,

    #[error("{failed} self-check(s) failed")]
    SelfTest { failed: usize },

    #[error("malformed csv: {0}")]
    MalformedCsv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidSpec(_) | Error::MalformedCsv(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

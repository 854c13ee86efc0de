use thiserror::Error;

/// Errors raised anywhere in the reconstruction chain.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid curve parameters: {0}")]
    InvalidCurveParameters(String),

    #[error("cavities {0} and {1} overlap or touch")]
    OverlappingCavities(usize, usize),

    #[error("cavity {0} is not strictly inside the outer boundary")]
    CavityTouchesOuter(usize),

    #[error("nodes per curve must be even and at least 16 (got {0})")]
    OddNodeCount(usize),

    #[error(
        "evaluation point {index} lies {distance:.3e} from the boundary, closer than {limit:.3e}"
    )]
    PointTooCloseToBoundary {
        index: usize,
        distance: f64,
        limit: f64,
    },

    #[error("singular system: {0} (try rescaling the scene so its diameter is below 1)")]
    SingularSystem(String),

    #[error("all moments vanish; the measure is empty")]
    RankZero,

    #[error("need at least {needed} moments, got {got}")]
    NotEnoughMoments { needed: usize, got: usize },

    #[error("eigenvalue iteration did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("disks overlap: centre distance {distance} <= radius sum {radii}")]
    DisksOverlap { distance: f64, radii: f64 },

    #[error("conformal map is not injective on the unit circle")]
    SelfIntersectingMap,

    #[error("no analytic oracle applies: {0}")]
    OracleNotApplicable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::InvalidCurveParameters(_)
            | Error::OverlappingCavities(..)
            | Error::CavityTouchesOuter(_)
            | Error::OddNodeCount(_)
            | Error::OracleNotApplicable(_)
            | Error::NotEnoughMoments { .. }
            | Error::DisksOverlap { .. }
            | Error::SelfIntersectingMap => 2,
            Error::Io(_) => 1,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

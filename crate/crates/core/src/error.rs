use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants carry enough context (curve index, sample index, achieved
/// residual) for the CLI to write a machine-readable reason.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("curve {curve}: base sample has modulus {modulus}, expected 1")]
    BaseNotOnCircle { curve: usize, modulus: f64 },
    #[error("curve {curve}, sample {sample}: point has modulus {modulus}, must lie inside the unit disk")]
    OutsideDisk { curve: usize, sample: usize, modulus: f64 },
    #[error("curve {curve}: segments {first} and {second} intersect")]
    SelfIntersection { curve: usize, first: usize, second: usize },
    #[error("curves {first} (segment {first_segment}) and {second} (segment {second_segment}) intersect")]
    CurvesIntersect { first: usize, first_segment: usize, second: usize, second_segment: usize },
    #[error("curve {curve}, segment {segment}: curve meets the interior slit {slit} of the initial domain")]
    HitsDomainSlit { curve: usize, segment: usize, slit: usize },
    #[error("curve {curve}, sample {sample}: curve passes through the origin")]
    OriginHit { curve: usize, sample: usize },
    #[error("curve {curve}, sample {sample}: times must start at 0 and increase strictly")]
    NonMonotoneTimes { curve: usize, sample: usize },
    #[error("curve {curve}: last time {last} does not match the horizon {horizon}")]
    HorizonMismatch { curve: usize, last: f64, horizon: f64 },
    #[error("invalid circular slit disk: {0}")]
    InvalidDomain(String),
    #[error("time {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("partition needs at least two strictly increasing knots")]
    DegeneratePartition,
    #[error("truncation time {t} for slit {slit} outside [0, {horizon}]")]
    TruncationOutOfRange { slit: usize, t: f64, horizon: f64 },
    #[error("accuracy not reached: residual {residual:e} exceeds {tolerance:e}")]
    AccuracyNotReached { residual: f64, tolerance: f64 },
    #[error("point {re}+{im}i lies outside the map's source domain")]
    OutsideDomain { re: f64, im: f64 },
    #[error("point {re}+{im}i is not in the image of the map")]
    NotInImage { re: f64, im: f64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("degenerate window: denominator {denominator:e}")]
    DegenerateWindow { denominator: f64 },
    #[error("evaluation within {distance:e} of the kernel pole")]
    PoleHit { distance: f64 },
    #[error("marked point {point} approached driving point of slit {slit} at t = {t}")]
    SingularApproach { point: usize, slit: usize, t: f64 },
    #[error("invalid driving: {0}")]
    InvalidDriving(String),
    #[error("Laplace fit residual {residual:e} exceeds {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("ill-conditioned least-squares system: {0}")]
    IllConditioned(String),
    #[error("period matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("integrator failure: {0}")]
    Integrator(String),
}

impl Error {
    /// Input errors exit with code 2 at the CLI, everything else with 3.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::BaseNotOnCircle { .. }
                | Error::OutsideDisk { .. }
                | Error::SelfIntersection { .. }
                | Error::CurvesIntersect { .. }
                | Error::HitsDomainSlit { .. }
                | Error::OriginHit { .. }
                | Error::NonMonotoneTimes { .. }
                | Error::HorizonMismatch { .. }
                | Error::InvalidDomain(_)
                | Error::OutOfRange { .. }
                | Error::DegeneratePartition
                | Error::TruncationOutOfRange { .. }
                | Error::InvalidDriving(_)
        )
    }

    /// Short stable identifier, written to run manifests.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BaseNotOnCircle { .. } => "BaseNotOnCircle",
            Error::OutsideDisk { .. } => "OutsideDisk",
            Error::SelfIntersection { .. } => "SelfIntersection",
            Error::CurvesIntersect { .. } => "CurvesIntersect",
            Error::HitsDomainSlit { .. } => "HitsDomainSlit",
            Error::OriginHit { .. } => "OriginHit",
            Error::NonMonotoneTimes { .. } => "NonMonotoneTimes",
            Error::HorizonMismatch { .. } => "HorizonMismatch",
            Error::InvalidDomain(_) => "InvalidDomain",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::DegeneratePartition => "DegeneratePartition",
            Error::TruncationOutOfRange { .. } => "TruncationOutOfRange",
            Error::AccuracyNotReached { .. } => "AccuracyNotReached",
            Error::OutsideDomain { .. } => "OutsideDomain",
            Error::NotInImage { .. } => "NotInImage",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DegenerateWindow { .. } => "DegenerateWindow",
            Error::PoleHit { .. } => "PoleHit",
            Error::SingularApproach { .. } => "SingularApproach",
            Error::InvalidDriving(_) => "InvalidDriving",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::IllConditioned(_) => "IllConditioned",
            Error::NotPositiveDefinite { .. } => "NotPositiveDefinite",
            Error::Integrator(_) => "Integrator",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShError {
    #[error("non-finite direction (theta={theta}, phi={phi})")]
    NonFiniteAngle { theta: f64, phi: f64 },
    #[error("evaluation radius {r} m lies inside the sphere of radius {a} m")]
    InsideSphere { r: f64, a: f64 },
    #[error("invalid sphere radius {0} m")]
    InvalidRadius(f64),
    #[error("negative frequency {0} Hz")]
    NegativeFrequency(f64),
    #[error("negative wavenumber {0}")]
    NegativeWavenumber(f64),
    #[error(
        "SH fit of order {order} needs at least {needed} grid points, the set has {available}"
    )]
    UnderdeterminedFit {
        order: usize,
        needed: usize,
        available: usize,
    },
    #[error("the SH normal matrix is not positive definite (order {0})")]
    SingularFit(usize),
    #[error("HRIR length mismatch: left has {left} samples, right has {right} (direction {index})")]
    HrirLengthMismatch {
        index: usize,
        left: usize,
        right: usize,
    },
    #[error("HRTF set has {grid} directions but {irs} impulse responses")]
    GridMismatch { grid: usize, irs: usize },
    #[error("array needs at least one microphone")]
    NoMicrophones,
}

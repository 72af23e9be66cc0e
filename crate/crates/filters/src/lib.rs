//! Binaural filter design for array recordings: least-squares and
//! magnitude-least-squares signal matching, LCMV extraction of direct
//! sources, the hybrid parametric renderer and the directional variant.

mod bank;
mod design;
mod informed;
mod lcmv;
mod solve;

pub use bank::{BinauralFilterBank, DesignMeta, Method};
pub use design::{design_bsm, design_com, design_dbsm, grid_matrices, InformedInputs};
pub use informed::{com_filter, dbsm_filter, dbsm_magls, estimate_source_stats, SourceStatistics};
pub use lcmv::{lcmv, lcmv_bank, LCMV_LOADING};
pub use solve::{
    bsm_ls, hermitian_solve, mag_ls, magls_core, MagLsOptions, MagLsSolution, MONOTONE_SLACK,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const DEFAULT_MAGLS_CUTOFF: f64 = 1500.0;

#[derive(Debug, thiserror::Error)]
pub enum FilterError {
    #[error("SNR must be positive, got {0}")]
    NonPositiveSnr(f64),
    #[error("regularized system is not positive definite{}", hint(*.loading))]
    Singular { loading: f64 },
    #[error("direct-path steering matrix is rank deficient at {freq} Hz (sigma ratio {ratio:e})")]
    RankDeficient { freq: f64, ratio: f64 },
    #[error("magnitude fit diverged at iteration {iteration}: objective trace {trace:?}")]
    Divergence { iteration: usize, trace: Vec<f64> },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Sh(#[from] sh_core::ShError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
}

fn hint(loading: f64) -> &'static str {
    if loading == 0.0 {
        "; add noise loading (sigma_n^2 > 0)"
    } else {
        ""
    }
}

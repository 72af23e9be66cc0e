use num_complex::Complex64;
use sh_core::SteeringMatrix;
use spectral::SpatialCorrelation;

use crate::{CMatrix, FilterError};

/// Diagonal loading of the correlation matrix, relative to `trace/M`.
pub const LCMV_LOADING: f64 = 1e-6;

const RANK_TOL: f64 = 1e-10;

/// Distortionless minimum-variance extraction matrix
/// `W = (V^H R^{-1} V)^{-1} V^H R^{-1}` (`D x M`), satisfying `W V = I`.
pub fn lcmv(vd: &CMatrix, rx: &CMatrix, freq: f64) -> Result<CMatrix, FilterError> {
    let (m, d) = vd.shape();
    if rx.shape() != (m, m) {
        return Err(FilterError::Shape(format!("R_x is {:?}, expected {m}x{m}", rx.shape())));
    }
    if d == 0 {
        return Ok(CMatrix::zeros(0, m));
    }
    let sv = vd.clone().svd(false, false).singular_values;
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if d > m || ratio < RANK_TOL {
        return Err(FilterError::RankDeficient { freq, ratio });
    }
    let eps = LCMV_LOADING * rx.trace().re / m as f64;
    let mut loaded = rx.clone();
    for i in 0..m {
        loaded[(i, i)] += Complex64::new(eps, 0.0);
    }
    let chol = loaded.cholesky().ok_or(FilterError::Singular { loading: eps })?;
    let z = chol.solve(vd);
    let gram = vd.adjoint() * &z;
    gram.lu()
        .solve(&z.adjoint())
        .ok_or(FilterError::RankDeficient { freq, ratio })
}

/// [`lcmv`] at every bin.
pub fn lcmv_bank(vd: &SteeringMatrix, rx: &SpatialCorrelation) -> Result<Vec<CMatrix>, FilterError> {
    if vd.len() != rx.len() {
        return Err(FilterError::Shape(format!("{} steering bins vs {} correlation bins", vd.len(), rx.len())));
    }
    (0..vd.len())
        .map(|k| lcmv(vd.at(k), rx.at(k), vd.freqs[k]))
        .collect()
}

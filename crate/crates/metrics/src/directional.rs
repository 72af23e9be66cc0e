use filters::BinauralFilterBank;
use ndarray::Array3;
use sh_core::{ArrayGeometry, Direction, HrtfSet, SphereGrid};

use crate::{MetricError, MAGNITUDE_CUTOFF};

/// Directional error surface `[bins, directions, ear]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalErrors {
    pub freqs: Vec<f64>,
    pub directions: Vec<Direction>,
    pub values: Array3<f64>,
}

// `response` is `c^H v`, the conjugate of `v^H c`, so it is compared with `h`.
fn relative_error(response: num_complex::Complex64, h: num_complex::Complex64, freq: f64) -> f64 {
    let mag = h.norm();
    if freq < MAGNITUDE_CUTOFF {
        (response - h).norm() / mag
    } else {
        (response.norm() - mag).abs() / mag
    }
}

fn bin_of(bank: &BinauralFilterBank, freq: f64) -> Result<usize, MetricError> {
    bank.freqs
        .iter()
        .position(|&f| (f - freq).abs() <= 1e-9 * freq.abs().max(1.0))
        .ok_or(MetricError::NoBin(freq))
}

/// How well the bank renders a plane wave from `dir` at `freq`, per ear,
/// relative to the HRTF magnitude. `freq` must be one of the bank's bins.
pub fn directional_error(
    bank: &BinauralFilterBank,
    geom: &ArrayGeometry,
    hrtf: &HrtfSet,
    dir: Direction,
    freq: f64,
) -> Result<[f64; 2], MetricError> {
    let k = bin_of(bank, freq)?;
    let v = geom.steering_matrix(&[dir], &[freq])?;
    let h = hrtf.transfer(&[dir], &[freq])?;
    let response = bank.response(k, &v.column(0, 0));
    let mut out = [0.0; 2];
    for ear in 0..2 {
        let target = h[(0, 0, ear)];
        if target.norm() == 0.0 {
            return Err(MetricError::ZeroHrtf { freq });
        }
        out[ear] = relative_error(response[ear], target, freq);
    }
    Ok(out)
}

/// [`directional_error`] over every bin of the bank and every direction.
pub fn directional_error_map(
    bank: &BinauralFilterBank,
    geom: &ArrayGeometry,
    hrtf: &HrtfSet,
    dirs: &[Direction],
) -> Result<DirectionalErrors, MetricError> {
    let v = geom.steering_matrix(dirs, &bank.freqs)?;
    let h = hrtf.transfer(dirs, &bank.freqs)?;
    let mut values = Array3::zeros((bank.len(), dirs.len(), 2));
    for (k, &freq) in bank.freqs.iter().enumerate() {
        for d in 0..dirs.len() {
            let response = bank.response(k, &v.column(k, d));
            for ear in 0..2 {
                let target = h[(k, d, ear)];
                if target.norm() == 0.0 {
                    return Err(MetricError::ZeroHrtf { freq });
                }
                values[(k, d, ear)] = relative_error(response[ear], target, freq);
            }
        }
    }
    Ok(DirectionalErrors {
        freqs: bank.freqs.clone(),
        directions: dirs.to_vec(),
        values,
    })
}

/// Diffuse-field NMSE per bin and ear: the rendering error of plane waves
/// from every grid direction, weighted by the grid's quadrature weights and
/// normalized by the weighted HRTF energy. Magnitudes only from
/// [`MAGNITUDE_CUTOFF`] up.
pub fn diffuse_nmse(
    bank: &BinauralFilterBank,
    geom: &ArrayGeometry,
    hrtf: &HrtfSet,
    grid: &SphereGrid,
) -> Result<[Vec<f64>; 2], MetricError> {
    let dirs = grid.directions();
    let v = geom.steering_matrix(dirs, &bank.freqs)?;
    let h = hrtf.transfer(dirs, &bank.freqs)?;
    let mut out = [Vec::with_capacity(bank.len()), Vec::with_capacity(bank.len())];
    for (k, &freq) in bank.freqs.iter().enumerate() {
        let mut num = [0.0; 2];
        let mut den = [0.0; 2];
        for (d, &w) in grid.weights().iter().enumerate() {
            let response = bank.response(k, &v.column(k, d));
            for ear in 0..2 {
                let target = h[(k, d, ear)];
                num[ear] += w * if freq < MAGNITUDE_CUTOFF {
                    (response[ear] - target).norm_sqr()
                } else {
                    (response[ear].norm() - target.norm()).powi(2)
                };
                den[ear] += w * target.norm_sqr();
            }
        }
        for ear in 0..2 {
            if den[ear] == 0.0 {
                return Err(MetricError::ZeroReference { freq });
            }
            out[ear].push(num[ear] / den[ear]);
        }
    }
    Ok(out)
}

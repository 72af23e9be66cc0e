use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{SpectralError, TimeFreqSignal};

/// Per-bin spatial correlation estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCorrelation {
    pub matrices: Vec<DMatrix<Complex64>>,
    /// Smoothing half-width in bins.
    pub half_width: usize,
    pub delta_f: f64,
    pub num_frames: usize,
}

impl SpatialCorrelation {
    pub fn at(&self, bin: usize) -> &DMatrix<Complex64> {
        &self.matrices[bin]
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }
}

/// `R[f] = (1/T) sum_t sum_{|j| <= J} x[t, f+j] x[t, f+j]^H`, with the
/// `j` range truncated at the band edges. Note the normalization counts
/// frames only, not the `2J+1` smoothing terms.
pub fn estimate_correlation(
    tf: &TimeFreqSignal,
    half_width: usize,
) -> Result<SpatialCorrelation, SpectralError> {
    let (t_count, bins, m) = tf.frames.dim();
    if t_count == 0 {
        return Err(SpectralError::NoFrames);
    }
    let mut per_bin = Vec::with_capacity(bins);
    let mut x = DVector::zeros(m);
    for k in 0..bins {
        let mut acc = DMatrix::<Complex64>::zeros(m, m);
        for t in 0..t_count {
            for c in 0..m {
                x[c] = tf.frames[(t, k, c)];
            }
            acc.ger(Complex64::new(1.0, 0.0), &x, &x.conjugate(), Complex64::new(1.0, 0.0));
        }
        per_bin.push(acc);
    }
    let scale = 1.0 / t_count as f64;
    let matrices = (0..bins)
        .map(|k| {
            let lo = k.saturating_sub(half_width);
            let hi = (k + half_width).min(bins - 1);
            let mut r = DMatrix::zeros(m, m);
            for p in &per_bin[lo..=hi] {
                r += p;
            }
            r *= Complex64::new(scale, 0.0);
            hermitian_part(&r)
        })
        .collect();
    Ok(SpatialCorrelation {
        matrices,
        half_width,
        delta_f: tf.delta_f(),
        num_frames: t_count,
    })
}

fn hermitian_part(r: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = r.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(r[(i, i)].re, 0.0)
        } else if i < j {
            r[(i, j)]
        } else {
            r[(j, i)].conj()
        }
    })
}

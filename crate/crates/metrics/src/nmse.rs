use num_complex::Complex64;
use spectral::TimeFreqSignal;

use crate::{MetricError, MAGNITUDE_CUTOFF};

/// Lowest value reported by [`to_db`]; exact matches map here instead of `-inf`.
pub const NMSE_FLOOR_DB: f64 = -120.0;

/// Normalized squared error of `p_hat` against `p_ref` at `freq`. The phase
/// is ignored from [`MAGNITUDE_CUTOFF`] up.
pub fn nmse(p_hat: Complex64, p_ref: Complex64, freq: f64) -> Result<f64, MetricError> {
    let den = p_ref.norm_sqr();
    if den == 0.0 {
        return Err(MetricError::ZeroReference { freq });
    }
    let num = if freq < MAGNITUDE_CUTOFF {
        (p_hat - p_ref).norm_sqr()
    } else {
        (p_hat.norm() - p_ref.norm()).powi(2)
    };
    Ok(num / den)
}

/// Frame-aggregated NMSE per bin for channel `ch`:
/// `sum_t err(t, f) / sum_t |p_ref(t, f)|^2`. Bins with a silent reference
/// are `None`.
pub fn nmse_per_bin(
    estimate: &TimeFreqSignal,
    reference: &TimeFreqSignal,
    ch: usize,
) -> Result<Vec<Option<f64>>, MetricError> {
    let (t_e, k_e, c_e) = estimate.frames.dim();
    let (t_r, k_r, c_r) = reference.frames.dim();
    if (t_e, k_e) != (t_r, k_r) || ch >= c_e.min(c_r) {
        return Err(MetricError::Shape(format!(
            "estimate {t_e}x{k_e}x{c_e} vs reference {t_r}x{k_r}x{c_r}, channel {ch}"
        )));
    }
    let freqs = reference.bin_freqs();
    Ok((0..k_r)
        .map(|k| {
            let (mut num, mut den) = (0.0, 0.0);
            for t in 0..t_r {
                let (e, r) = (estimate.frames[(t, k, ch)], reference.frames[(t, k, ch)]);
                num += if freqs[k] < MAGNITUDE_CUTOFF {
                    (e - r).norm_sqr()
                } else {
                    (e.norm() - r.norm()).powi(2)
                };
                den += r.norm_sqr();
            }
            (den > 0.0).then(|| num / den)
        })
        .collect())
}

pub fn to_db(x: f64) -> f64 {
    if x > 0.0 {
        (10.0 * x.log10()).max(NMSE_FLOOR_DB)
    } else {
        NMSE_FLOOR_DB
    }
}

/// Mean in dB of the per-bin linear values whose frequency lies in `[lo, hi]`.
pub fn band_mean_db(values: &[Option<f64>], freqs: &[f64], lo: f64, hi: f64) -> Option<f64> {
    let db: Vec<f64> = values
        .iter()
        .zip(freqs)
        .filter(|(_, &f)| f >= lo && f <= hi)
        .filter_map(|(v, _)| v.map(to_db))
        .collect();
    (!db.is_empty()).then(|| db.iter().sum::<f64>() / db.len() as f64)
}

use std::f64::consts::PI;

use crate::ImageSourceSet;

const SINC_HALF: usize = 32;

/// Omnidirectional room impulse response of `len` samples. Each image is
/// placed with a Hann-windowed sinc fractional delay.
pub fn omni_rir(images: &ImageSourceSet, fs: f64, len: usize) -> Vec<f64> {
    let mut h = vec![0.0; len];
    for e in &images.entries {
        let t = e.delay * fs;
        let center = t.round() as i64;
        for k in -(SINC_HALF as i64)..=SINC_HALF as i64 {
            let idx = center + k;
            if idx < 0 || idx as usize >= len {
                continue;
            }
            let x = idx as f64 - t;
            let sinc = if x.abs() < 1e-12 { 1.0 } else { (PI * x).sin() / (PI * x) };
            let win = 0.5 * (1.0 + (PI * x / (SINC_HALF as f64 + 1.0)).cos());
            h[idx as usize] += e.gain * sinc * win;
        }
    }
    h
}

/// Reverberation time from Schroeder backward integration: a line fit to
/// the energy decay curve between -5 and -35 dB (or -25 dB when the curve
/// is too short), extrapolated to -60 dB.
pub fn schroeder_t60(rir: &[f64], fs: f64) -> Option<f64> {
    let mut edc = vec![0.0; rir.len()];
    let mut acc = 0.0;
    for i in (0..rir.len()).rev() {
        acc += rir[i] * rir[i];
        edc[i] = acc;
    }
    if acc <= 0.0 {
        return None;
    }
    let db: Vec<f64> = edc.iter().map(|&e| 10.0 * (e / acc).log10()).collect();
    let fit = |lo: f64, hi: f64| -> Option<f64> {
        let start = db.iter().position(|&v| v <= lo)?;
        let end = db.iter().position(|&v| v <= hi)?;
        if end <= start + 2 {
            return None;
        }
        let pts = (start..end).map(|i| (i as f64 / fs, db[i]));
        let n = (end - start) as f64;
        let (sx, sy, sxx, sxy) = pts.fold((0.0, 0.0, 0.0, 0.0), |(a, b, c, d), (x, y)| {
            (a + x, b + y, c + x * x, d + x * y)
        });
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        (slope < 0.0).then(|| -60.0 / slope)
    };
    fit(-5.0, -35.0).or_else(|| fit(-5.0, -25.0))
}

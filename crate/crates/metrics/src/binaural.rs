use std::f64::consts::PI;

use num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::MetricError;

/// Low-pass cutoff (Hz) applied before ITD estimation.
pub const ITD_CUTOFF: f64 = 1500.0;
/// Largest interaural lag searched, in seconds.
pub const ITD_MAX_LAG: f64 = 1e-3;
const ITD_FILTER_ORDER: usize = 8;

/// Direct-form-II-transposed second-order section, `a0` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    pub fn process(&self, x: &mut [f64]) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b[0] * input + s1;
            s1 = self.b[1] * input - self.a[0] * y + s2;
            s2 = self.b[2] * input - self.a[1] * y;
            *v = y;
        }
    }
}

/// Even-order Butterworth low-pass as cascaded bilinear-transform sections.
pub fn butterworth_lowpass(order: usize, cutoff: f64, fs: f64) -> Vec<Biquad> {
    assert!(order % 2 == 0 && order > 0, "order must be even");
    let w = 2.0 * PI * cutoff / fs;
    let (sw, cw) = w.sin_cos();
    (1..=order / 2)
        .map(|k| {
            let q = 1.0 / (2.0 * ((2 * k - 1) as f64 * PI / (2 * order) as f64).cos());
            let alpha = sw / (2.0 * q);
            let a0 = 1.0 + alpha;
            let b0 = (1.0 - cw) / 2.0 / a0;
            Biquad {
                b: [b0, 2.0 * b0, b0],
                a: [-2.0 * cw / a0, (1.0 - alpha) / a0],
            }
        })
        .collect()
}

/// Zero-phase filtering: the cascade run forward, then backward.
pub fn filtfilt(sections: &[Biquad], x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for s in sections {
        s.process(&mut y);
    }
    y.reverse();
    for s in sections {
        s.process(&mut y);
    }
    y.reverse();
    y
}

/// Interaural time difference in seconds; positive when the left signal
/// lags the right.
pub fn itd(left: &[f64], right: &[f64], fs: f64) -> Result<f64, MetricError> {
    if left.len() != right.len() {
        return Err(MetricError::LengthMismatch(left.len(), right.len()));
    }
    if left.iter().chain(right).all(|&v| v == 0.0) {
        return Err(MetricError::Silent);
    }
    let lp = butterworth_lowpass(ITD_FILTER_ORDER, ITD_CUTOFF, fs);
    let (l, r) = (filtfilt(&lp, left), filtfilt(&lp, right));
    let n = l.len() as isize;
    let max_lag = (ITD_MAX_LAG * fs).round() as isize;
    let mut best = (0isize, f64::NEG_INFINITY);
    for tau in -max_lag..=max_lag {
        let (start, end) = ((-tau).max(0), (n - tau).min(n));
        let acc: f64 = (start..end).map(|t| r[t as usize] * l[(t + tau) as usize]).sum();
        // prefer the smaller lag on ties so swapping channels negates exactly
        if acc.abs() > best.1 || (acc.abs() == best.1 && tau.abs() < best.0.abs()) {
            best = (tau, acc.abs());
        }
    }
    Ok(best.0 as f64 / fs)
}

pub fn itd_error(test: [&[f64]; 2], reference: [&[f64]; 2], fs: f64) -> Result<f64, MetricError> {
    Ok((itd(test[0], test[1], fs)? - itd(reference[0], reference[1], fs)?).abs())
}

/// Real impulse response of length `n_fft` from a one-sided spectrum of
/// `n_fft/2 + 1` bins, circularly shifted by `n_fft/2` so that non-causal
/// parts stay intact.
pub fn spectrum_to_ir(spectrum: &[Complex64], n_fft: usize) -> Result<Vec<f64>, MetricError> {
    if spectrum.len() != n_fft / 2 + 1 || n_fft % 2 != 0 {
        return Err(MetricError::Shape(format!(
            "{} bins do not match an FFT of length {n_fft}",
            spectrum.len()
        )));
    }
    let half = n_fft / 2;
    let mut spec: Vec<Complex64> = spectrum
        .iter()
        .enumerate()
        // the shift by n/2 is a sign flip on odd bins
        .map(|(k, &z)| if k % 2 == 1 { -z } else { z })
        .collect();
    spec[0].im = 0.0;
    spec[half].im = 0.0;
    let mut out = vec![0.0; n_fft];
    RealFftPlanner::<f64>::new()
        .plan_fft_inverse(n_fft)
        .process(&mut spec, &mut out)
        .expect("lengths checked above");
    let scale = 1.0 / n_fft as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

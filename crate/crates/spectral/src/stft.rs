use std::sync::Arc;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use realfft::{RealFftPlanner, RealToComplex, ComplexToReal};

use crate::SpectralError;

/// 32 ms at 48 kHz.
pub const DEFAULT_WIN_LEN: usize = 1536;
/// 8 ms at 48 kHz.
pub const DEFAULT_HOP: usize = 384;

/// Periodic triangular window: `w[n] = 1 - |2n/N - 1|`.
pub fn bartlett(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 1.0 - (2.0 * n as f64 / len as f64 - 1.0).abs())
        .collect()
}

/// Multichannel STFT frames, `[frames, bins, channels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeFreqSignal {
    pub frames: Array3<Complex64>,
    pub fs: f64,
    pub win_len: usize,
    pub hop: usize,
    /// Length of the analysed signal, restored by [`istft`].
    pub signal_len: usize,
}

impl TimeFreqSignal {
    pub fn num_frames(&self) -> usize {
        self.frames.dim().0
    }

    pub fn num_bins(&self) -> usize {
        self.frames.dim().1
    }

    pub fn num_channels(&self) -> usize {
        self.frames.dim().2
    }

    /// Bin spacing in Hz.
    pub fn delta_f(&self) -> f64 {
        self.fs / self.win_len as f64
    }

    pub fn bin_freqs(&self) -> Vec<f64> {
        (0..self.num_bins()).map(|k| k as f64 * self.delta_f()).collect()
    }

    /// Same geometry, new frame content (e.g. after per-bin filtering).
    pub fn with_frames(&self, frames: Array3<Complex64>) -> Self {
        Self {
            frames,
            ..self.clone()
        }
    }
}

fn check_geometry(win_len: usize, hop: usize) -> Result<(), SpectralError> {
    if win_len < 2 || win_len % 2 != 0 || hop == 0 || hop > win_len {
        return Err(SpectralError::InvalidGeometry { win_len, hop });
    }
    Ok(())
}

fn num_frames(len: usize, win_len: usize, hop: usize) -> usize {
    1 + (len.saturating_sub(win_len)).div_ceil(hop)
}

/// STFT of `signal` (`[channels, samples]`). Frames start at sample 0 and
/// the tail is zero padded so that every sample is covered.
pub fn stft(
    signal: &Array2<f64>,
    fs: f64,
    win_len: usize,
    hop: usize,
) -> Result<TimeFreqSignal, SpectralError> {
    check_geometry(win_len, hop)?;
    let (channels, len) = signal.dim();
    if channels == 0 || len == 0 {
        return Err(SpectralError::EmptySignal);
    }
    if len < win_len {
        return Err(SpectralError::TooShort { len, win_len });
    }
    let window = bartlett(win_len);
    let fft: Arc<dyn RealToComplex<f64>> = RealFftPlanner::new().plan_fft_forward(win_len);
    let t_count = num_frames(len, win_len, hop);
    let bins = win_len / 2 + 1;
    let mut frames = Array3::zeros((t_count, bins, channels));
    let mut input = fft.make_input_vec();
    let mut output = fft.make_output_vec();
    for c in 0..channels {
        let row = signal.row(c);
        for t in 0..t_count {
            let start = t * hop;
            for (n, slot) in input.iter_mut().enumerate() {
                *slot = row.get(start + n).map_or(0.0, |&v| v * window[n]);
            }
            fft.process(&mut input, &mut output).expect("buffer sizes match plan");
            for (k, v) in output.iter().enumerate() {
                frames[(t, k, c)] = *v;
            }
        }
    }
    Ok(TimeFreqSignal {
        frames,
        fs,
        win_len,
        hop,
        signal_len: len,
    })
}

/// Weighted overlap-add inverse: each frame is windowed again and the sum
/// is divided by the accumulated squared window.
pub fn istft(tf: &TimeFreqSignal) -> Result<Array2<f64>, SpectralError> {
    check_geometry(tf.win_len, tf.hop)?;
    let (t_count, bins, channels) = tf.frames.dim();
    if bins != tf.win_len / 2 + 1 {
        return Err(SpectralError::BinMismatch {
            bins,
            expected: tf.win_len / 2 + 1,
        });
    }
    let n = tf.win_len;
    let window = bartlett(n);
    let ifft: Arc<dyn ComplexToReal<f64>> = RealFftPlanner::new().plan_fft_inverse(n);
    let total = (t_count.max(1) - 1) * tf.hop + n;
    let mut norm = vec![0.0; total];
    for t in 0..t_count {
        for (i, w) in window.iter().enumerate() {
            norm[t * tf.hop + i] += w * w;
        }
    }
    let mut out = Array2::zeros((channels, tf.signal_len));
    let mut spec = ifft.make_input_vec();
    let mut buf = ifft.make_output_vec();
    let mut acc = vec![0.0; total];
    for c in 0..channels {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for t in 0..t_count {
            for (k, slot) in spec.iter_mut().enumerate() {
                *slot = tf.frames[(t, k, c)];
            }
            // DC and Nyquist bins of a real signal are real
            spec[0].im = 0.0;
            spec[bins - 1].im = 0.0;
            ifft.process(&mut spec, &mut buf).expect("buffer sizes match plan");
            for (i, v) in buf.iter().enumerate() {
                acc[t * tf.hop + i] += v / n as f64 * window[i];
            }
        }
        for (i, slot) in out.row_mut(c).iter_mut().enumerate() {
            if i < total && norm[i] > 1e-12 {
                *slot = acc[i] / norm[i];
            }
        }
    }
    Ok(out)
}

use num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::MetricError;

pub const ERB_BANDS: usize = 22;
const LOWEST_CENTER: f64 = 1500.0;
const HIGHEST_CENTER: f64 = 20_000.0;

/// Equivalent rectangular bandwidth (Hz) at `freq`.
pub fn erb_bandwidth(freq: f64) -> f64 {
    24.7 * (4.37 * freq / 1000.0 + 1.0)
}

/// Position of `freq` on the ERB-number scale.
pub fn erb_number(freq: f64) -> f64 {
    21.4 * (4.37 * freq / 1000.0 + 1.0).log10()
}

fn erb_number_inverse(e: f64) -> f64 {
    (10f64.powf(e / 21.4) - 1.0) * 1000.0 / 4.37
}

/// Gammatone filter bank with centers spaced evenly on the ERB-number scale
/// between 1.5 and 20 kHz.
#[derive(Debug, Clone, PartialEq)]
pub struct ErbBank {
    centers: Vec<f64>,
    fs: f64,
}

impl ErbBank {
    pub fn new(fs: f64) -> Result<Self, MetricError> {
        if fs < 2.0 * HIGHEST_CENTER {
            return Err(MetricError::SampleRate(fs));
        }
        let (lo, hi) = (erb_number(LOWEST_CENTER), erb_number(HIGHEST_CENTER));
        let step = (hi - lo) / (ERB_BANDS - 1) as f64;
        let mut centers: Vec<f64> =
            (0..ERB_BANDS).map(|i| erb_number_inverse(lo + step * i as f64)).collect();
        centers[0] = LOWEST_CENTER;
        centers[ERB_BANDS - 1] = HIGHEST_CENTER;
        Ok(Self { centers, fs })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    /// Magnitude of the fourth-order gammatone response of `band` at `freq`.
    pub fn gain(&self, band: usize, freq: f64) -> f64 {
        let fc = self.centers[band];
        let b = 1.019 * erb_bandwidth(fc);
        (1.0 + ((freq - fc) / b).powi(2)).powi(-2)
    }

    /// Highest frequency included in `band`'s energy sum.
    pub fn upper_limit(&self, band: usize) -> f64 {
        let fc = self.centers[band];
        (fc + 4.0 * erb_bandwidth(fc)).min(self.fs / 2.0)
    }
}

/// The standard 22-band bank at `fs`.
pub fn erb_bank(fs: f64) -> Result<ErbBank, MetricError> {
    ErbBank::new(fs)
}

/// Per-band level differences (dB) from one-sided spectra on `freqs`.
pub fn ild_bands_spectrum(
    left: &[Complex64],
    right: &[Complex64],
    freqs: &[f64],
    bank: &ErbBank,
) -> Result<Vec<f64>, MetricError> {
    if left.len() != right.len() || left.len() != freqs.len() {
        return Err(MetricError::LengthMismatch(left.len(), right.len()));
    }
    (0..ERB_BANDS)
        .map(|band| {
            let upper = bank.upper_limit(band);
            let (mut el, mut er) = (0.0, 0.0);
            for ((l, r), &f) in left.iter().zip(right).zip(freqs) {
                if f > upper {
                    break;
                }
                let g2 = bank.gain(band, f).powi(2);
                el += g2 * l.norm_sqr();
                er += g2 * r.norm_sqr();
            }
            let center = bank.centers[band];
            if er == 0.0 {
                return Err(MetricError::ZeroBand { channel: "right", center });
            }
            if el == 0.0 {
                return Err(MetricError::ZeroBand { channel: "left", center });
            }
            Ok(10.0 * (el / er).log10())
        })
        .collect()
}

/// Per-band level differences (dB) of two equal-length time signals.
pub fn ild_bands(left: &[f64], right: &[f64], bank: &ErbBank) -> Result<Vec<f64>, MetricError> {
    if left.len() != right.len() {
        return Err(MetricError::LengthMismatch(left.len(), right.len()));
    }
    let n = left.len();
    let fft = RealFftPlanner::<f64>::new().plan_fft_forward(n);
    let spectrum = |x: &[f64]| {
        let mut input = x.to_vec();
        let mut out = fft.make_output_vec();
        fft.process(&mut input, &mut out).expect("buffer sizes from the plan");
        out
    };
    let freqs: Vec<f64> = (0..n / 2 + 1).map(|k| k as f64 * bank.fs / n as f64).collect();
    ild_bands_spectrum(&spectrum(left), &spectrum(right), &freqs, bank)
}

/// Broadband ILD: the mean of the per-band values.
pub fn ild(left: &[f64], right: &[f64], bank: &ErbBank) -> Result<f64, MetricError> {
    let bands = ild_bands(left, right, bank)?;
    Ok(bands.iter().sum::<f64>() / bands.len() as f64)
}

/// Mean absolute per-band ILD difference (dB).
pub fn ild_error(test: [&[f64]; 2], reference: [&[f64]; 2], bank: &ErbBank) -> Result<f64, MetricError> {
    let t = ild_bands(test[0], test[1], bank)?;
    let r = ild_bands(reference[0], reference[1], bank)?;
    Ok(band_error(&t, &r))
}

pub(crate) fn band_error(test: &[f64], reference: &[f64]) -> f64 {
    test.iter().zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>() / test.len() as f64
}

use sh_core::Direction;

use crate::erb::band_error;
use crate::{ild_bands, itd, DirectionalErrors, ErbBank, MetricError};

/// Just-noticeable interaural time difference, seconds.
pub const ITD_JND: f64 = 100e-6;
/// Just-noticeable interaural level difference, dB.
pub const ILD_JND: f64 = 1.0;

/// Binaural cues of a rendering and its reference for one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CueErrors {
    pub direction: Direction,
    pub itd: f64,
    pub itd_ref: f64,
    pub ild: f64,
    pub ild_ref: f64,
    pub itd_error: f64,
    pub ild_error: f64,
}

impl CueErrors {
    /// Compares `test` against `reference` (both `[left, right]`).
    pub fn evaluate(
        direction: Direction,
        test: [&[f64]; 2],
        reference: [&[f64]; 2],
        bank: &ErbBank,
    ) -> Result<Self, MetricError> {
        let fs = bank.fs();
        let (itd_t, itd_r) = (itd(test[0], test[1], fs)?, itd(reference[0], reference[1], fs)?);
        let bands_t = ild_bands(test[0], test[1], bank)?;
        let bands_r = ild_bands(reference[0], reference[1], bank)?;
        let mean = |b: &[f64]| b.iter().sum::<f64>() / b.len() as f64;
        Ok(Self {
            direction,
            itd: itd_t,
            itd_ref: itd_r,
            ild: mean(&bands_t),
            ild_ref: mean(&bands_r),
            itd_error: (itd_t - itd_r).abs(),
            ild_error: band_error(&bands_t, &bands_r),
        })
    }

    pub fn itd_audible(&self) -> bool {
        self.itd_error > ITD_JND
    }

    pub fn ild_audible(&self) -> bool {
        self.ild_error > ILD_JND
    }
}

/// All measures gathered for one rendering method.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricReport {
    pub freqs: Vec<f64>,
    /// Per-bin NMSE in dB, `[left, right]`; `None` where the reference is silent.
    pub nmse_db: [Vec<Option<f64>>; 2],
    /// Per-bin diffuse-field NMSE of the filters in dB, `[left, right]`.
    pub diffuse_nmse_db: Option<[Vec<f64>; 2]>,
    pub directional: Option<DirectionalErrors>,
    pub cues: Vec<CueErrors>,
}

impl MetricReport {
    /// Mean dB NMSE of `ear` over bins in `[lo, hi]` Hz.
    pub fn band_nmse_db(&self, ear: usize, lo: f64, hi: f64) -> Option<f64> {
        let db: Vec<f64> = self.nmse_db[ear]
            .iter()
            .zip(&self.freqs)
            .filter(|(_, &f)| f >= lo && f <= hi)
            .filter_map(|(v, _)| *v)
            .collect();
        (!db.is_empty()).then(|| db.iter().sum::<f64>() / db.len() as f64)
    }

    /// Mean diffuse-field NMSE (dB) of `ear` over bins in `[lo, hi]` Hz.
    pub fn band_diffuse_nmse_db(&self, ear: usize, lo: f64, hi: f64) -> Option<f64> {
        let d = self.diffuse_nmse_db.as_ref()?;
        let db: Vec<f64> = d[ear]
            .iter()
            .zip(&self.freqs)
            .filter(|(_, &f)| f >= lo && f <= hi)
            .map(|(v, _)| *v)
            .collect();
        (!db.is_empty()).then(|| db.iter().sum::<f64>() / db.len() as f64)
    }

    pub fn mean_ild_error(&self) -> Option<f64> {
        (!self.cues.is_empty())
            .then(|| self.cues.iter().map(|c| c.ild_error).sum::<f64>() / self.cues.len() as f64)
    }
}

/// Pearson correlation coefficient; `None` for constant or mismatched input.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    (saa > 0.0 && sbb > 0.0).then(|| sab / (saa * sbb).sqrt())
}

//! Objective evaluation of binaural renderers.
//!
//! Spectral measures ([`nmse`], [`directional_error`]) switch from complex
//! to magnitude comparison at [`MAGNITUDE_CUTOFF`], matching the filter
//! design. Binaural cues ([`itd`], [`ild`]) operate on time signals.

mod binaural;
mod directional;
mod erb;
mod nmse;
mod report;

pub use binaural::{
    butterworth_lowpass, filtfilt, itd, itd_error, spectrum_to_ir, Biquad, ITD_CUTOFF, ITD_MAX_LAG,
};
pub use directional::{diffuse_nmse, directional_error, directional_error_map, DirectionalErrors};
pub use erb::{erb_bank, erb_bandwidth, erb_number, ild, ild_bands, ild_bands_spectrum, ild_error, ErbBank, ERB_BANDS};
pub use nmse::{band_mean_db, nmse, nmse_per_bin, to_db, NMSE_FLOOR_DB};
pub use report::{pearson, CueErrors, MetricReport, ILD_JND, ITD_JND};

/// Frequency (Hz) at and above which only magnitudes are compared.
pub const MAGNITUDE_CUTOFF: f64 = 1500.0;

#[derive(Debug, thiserror::Error)]
pub enum MetricError {
    #[error("reference is zero at {freq} Hz")]
    ZeroReference { freq: f64 },
    #[error("HRTF magnitude is zero at {freq} Hz")]
    ZeroHrtf { freq: f64 },
    #[error("ITD undefined: both signals are all zero")]
    Silent,
    #[error("ILD undefined: {channel} channel has no energy in the band at {center:.1} Hz")]
    ZeroBand { channel: &'static str, center: f64 },
    #[error("signal lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample rate {0} Hz too low for the ERB bank (needs at least 40 kHz)")]
    SampleRate(f64),
    #[error("filter bank has no bin at {0} Hz")]
    NoBin(f64),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Sh(#[from] sh_core::ShError),
}

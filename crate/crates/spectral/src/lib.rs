//! Short-time Fourier analysis/synthesis and spatial correlation estimates.

mod correlation;
mod stft;

pub use correlation::{estimate_correlation, SpatialCorrelation};
pub use stft::{bartlett, istft, stft, TimeFreqSignal, DEFAULT_HOP, DEFAULT_WIN_LEN};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SpectralError {
    #[error("signal is empty")]
    EmptySignal,
    #[error("signal of {len} samples is shorter than the {win_len}-sample window")]
    TooShort { len: usize, win_len: usize },
    #[error("invalid frame geometry: window {win_len}, hop {hop}")]
    InvalidGeometry { win_len: usize, hop: usize },
    #[error("frames have {bins} bins, expected {expected}")]
    BinMismatch { bins: usize, expected: usize },
    #[error("no frames to average")]
    NoFrames,
}

//! Shoebox-room image-source simulation: microphone-array captures and
//! reference binaural signals for a single source.

mod decay;
mod images;
mod scenario;
mod synth;

pub use decay::{omni_rir, schroeder_t60};
pub use images::{default_max_order, image_sources, ImageSource, ImageSourceSet};
pub use scenario::Scenario;
pub use synth::{
    synth_mic_signals, synth_reference_binaural, synth_reference_binaural_hoa, synthesize,
    Capture, HoaResponse, OmniResponse, DEFAULT_HOA_ORDER,
};

use sh_core::ShError;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("room dimensions must be positive, got {0:?}")]
    DegenerateRoom([f64; 3]),
    #[error("{what} at {position:?} is not strictly inside the room")]
    OutsideRoom { what: &'static str, position: [f64; 3] },
    #[error("T60 must be positive, got {0}")]
    InvalidT60(f64),
    #[error("duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("source distance must be positive, got {0}")]
    InvalidDistance(f64),
    #[error("image-source set is empty")]
    NoImages,
    #[error("source signal is empty")]
    EmptySignal,
    #[error(transparent)]
    Sh(#[from] ShError),
}

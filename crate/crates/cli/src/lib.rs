//! Experiment drivers for binaural signal matching with head-worn arrays:
//! scenario configuration, HRTF loading, simulation, filter design,
//! rendering and CSV/WAV reporting.

pub mod config;
pub mod hrtf_io;
pub mod io;
pub mod pipeline;
pub mod report;

pub use config::{ExperimentConfig, MethodChoice, ReferencePath, ScenarioConfig, ScenarioRef, SweepSpec};
pub use hrtf_io::{load_hrtf, save_hrtf};
pub use pipeline::{room_transfer, transfer_nmse, CueRow, DesignGrid, Experiment, ScenarioRun, Simulation};

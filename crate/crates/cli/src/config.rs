use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use filters::Method;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scene_sim::{default_max_order, Scenario};
use serde::{Deserialize, Serialize};
use sh_core::Direction;

pub const CONFIG_VERSION: u32 = 1;
pub const SAMPLE_RATE: f64 = 48_000.0;

/// Reverberation time used at desk scale, seconds.
pub const DESK_T60: f64 = 0.3;
/// Image-method order cap at desk scale.
pub const DESK_MAX_ORDER: usize = 10;
/// Signal length cap at desk scale, seconds.
pub const DESK_DURATION: f64 = 2.0;

const BUNDLED: [(&str, &str); 3] = [
    ("scenario1", include_str!("../scenarios/scenario1.json")),
    ("scenario2", include_str!("../scenarios/scenario2.json")),
    ("scenario3", include_str!("../scenarios/scenario3.json")),
];

/// A renderer under evaluation; `Reference` is the ground-truth path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum MethodChoice {
    Design(Method),
    Reference,
}

impl fmt::Display for MethodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodChoice::Design(m) => m.fmt(f),
            MethodChoice::Reference => f.write_str("REFERENCE"),
        }
    }
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("reference") || s.eq_ignore_ascii_case("ref") {
            Ok(MethodChoice::Reference)
        } else {
            s.parse().map(MethodChoice::Design)
        }
    }
}

impl TryFrom<String> for MethodChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<MethodChoice> for String {
    fn from(m: MethodChoice) -> Self {
        m.to_string()
    }
}

/// Room, array placement and source; directions are `[azimuth, theta]` in
/// degrees with `theta = 90` on the horizontal plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub id: String,
    pub room_dims: [f64; 3],
    pub t60: f64,
    pub array_position: [f64; 3],
    pub source_distance: f64,
    pub source_direction_deg: [f64; 2],
    pub duration: f64,
    /// Image-method order; defaults to the T60-coverage rule.
    #[serde(default)]
    pub max_order: Option<usize>,
    /// Mono WAV file; white noise when absent.
    #[serde(default)]
    pub signal: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Bundled(String),
    Inline(ScenarioConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            start_deg: 0.0,
            stop_deg: 355.0,
            step_deg: 5.0,
        }
    }
}

impl SweepSpec {
    pub fn azimuths(&self) -> Vec<f64> {
        let n = ((self.stop_deg - self.start_deg) / self.step_deg + 1e-9).floor().max(0.0) as usize;
        (0..=n).map(|i| self.start_deg + self.step_deg * i as f64).collect()
    }
}

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_methods() -> Vec<MethodChoice> {
    vec![
        MethodChoice::Design(Method::Bsm),
        MethodChoice::Design(Method::Com),
        MethodChoice::Design(Method::Dbsm),
    ]
}
fn default_hrtf() -> String {
    "analytic-sphere".into()
}
fn default_snr() -> Option<f64> {
    Some(20.0)
}
fn default_design_snr() -> f64 {
    20.0
}
fn default_smoothing() -> usize {
    1
}
fn default_grid() -> usize {
    400
}
fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferencePath {
    /// Exact plane-wave HRTF sum over the image sources.
    #[default]
    Exact,
    /// Order-14 ambisonic encoding and SH-domain decoding.
    Hoa,
}

/// One experiment: scenario, renderers and evaluation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub scenario: ScenarioRef,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodChoice>,
    /// Array rotation relative to the head, degrees (counter-clockwise).
    #[serde(default)]
    pub rotation_deg: f64,
    /// Error `[azimuth, theta]` (degrees) added to the DOA given to the
    /// informed designs.
    #[serde(default)]
    pub doa_error_deg: [f64; 2],
    #[serde(default)]
    pub sweep: SweepSpec,
    /// HRTF directory or `analytic-sphere(radius_mm, left_az, right_az)`.
    #[serde(default = "default_hrtf")]
    pub hrtf: String,
    /// Sensor SNR of the capture in dB; `null` disables noise.
    #[serde(default = "default_snr")]
    pub snr_db: Option<f64>,
    /// SNR assumed by the signal-independent design, dB.
    #[serde(default = "default_design_snr")]
    pub design_snr_db: f64,
    /// Frequency-smoothing half-width for correlation estimates, bins.
    #[serde(default = "default_smoothing")]
    pub smoothing: usize,
    /// Number of points in the design grid.
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default)]
    pub reference: ReferencePath,
    #[serde(default)]
    pub full_scale: bool,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults around a bundled scenario.
    pub fn bundled(id: &str) -> Result<Self> {
        bundled_scenario(id)?;
        Ok(Self {
            version: CONFIG_VERSION,
            scenario: ScenarioRef::Bundled(id.into()),
            methods: default_methods(),
            rotation_deg: 0.0,
            doa_error_deg: [0.0; 2],
            sweep: SweepSpec::default(),
            hrtf: default_hrtf(),
            snr_db: default_snr(),
            design_snr_db: default_design_snr(),
            smoothing: default_smoothing(),
            grid_size: default_grid(),
            reference: ReferencePath::Exact,
            full_scale: false,
            output_dir: default_output(),
            seed: 0,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("parsing experiment config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config is plain data")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!("unsupported config version {} (expected {CONFIG_VERSION})", self.version);
        }
        if self.methods.is_empty() {
            bail!("at least one method is required");
        }
        if !(self.sweep.step_deg > 0.0) {
            bail!("sweep step must be positive");
        }
        self.scenario_config()?;
        Ok(())
    }

    pub fn scenario_config(&self) -> Result<ScenarioConfig> {
        match &self.scenario {
            ScenarioRef::Bundled(id) => bundled_scenario(id),
            ScenarioRef::Inline(s) => Ok(s.clone()),
        }
    }

    pub fn scenario_id(&self) -> String {
        self.scenario_config().map(|s| s.id).unwrap_or_default()
    }

    pub fn design_methods(&self) -> Vec<Method> {
        self.methods
            .iter()
            .filter_map(|m| match m {
                MethodChoice::Design(d) => Some(*d),
                MethodChoice::Reference => None,
            })
            .collect()
    }

    /// The simulated scenario with desk-scale limits applied unless
    /// `full_scale` is set. The head is turned opposite to the array
    /// rotation, so the array stays aligned with the room.
    pub fn scenario(&self) -> Result<(Scenario, usize)> {
        let sc = self.scenario_config()?;
        let (t60, duration) = if self.full_scale {
            (sc.t60, sc.duration)
        } else {
            (DESK_T60, sc.duration.min(DESK_DURATION))
        };
        let [az, theta] = sc.source_direction_deg;
        let source_signal = match &sc.signal {
            Some(path) => crate::io::read_mono_wav(path)?,
            None => white_noise((duration * SAMPLE_RATE).round() as usize, SOURCE_SEED),
        };
        let scn = Scenario {
            room_dims: sc.room_dims,
            t60,
            array_position: sc.array_position,
            source_distance: sc.source_distance,
            source_direction: Direction::from_degrees(az, theta)?,
            source_signal,
            fs: SAMPLE_RATE,
            duration,
            head_rotation_deg: -self.rotation_deg,
            snr_db: self.snr_db.unwrap_or(f64::INFINITY),
        };
        scn.validate().with_context(|| format!("scenario {}", sc.id))?;
        let order = match sc.max_order {
            Some(o) => o,
            None if self.full_scale => default_max_order(&scn),
            None => default_max_order(&scn).min(DESK_MAX_ORDER),
        };
        Ok((scn, order))
    }
}

pub fn bundled_scenario(id: &str) -> Result<ScenarioConfig> {
    let text = BUNDLED
        .iter()
        .find(|(name, _)| *name == id)
        .map(|(_, text)| *text)
        .with_context(|| format!("unknown scenario {id:?} (bundled: scenario1, scenario2, scenario3)"))?;
    Ok(serde_json::from_str(text).expect("bundled scenarios are valid"))
}

pub fn bundled_ids() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(id, _)| *id)
}

/// Seed of the default white-noise source. Fixed so that the experiment
/// seed only drives sensor noise.
pub const SOURCE_SEED: u64 = 0x50_u64;

/// Unit-variance white Gaussian noise from a ChaCha8 stream.
pub fn white_noise(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use anyhow::{Context, Result};
use filters::{
    design_bsm, design_com, design_dbsm, BinauralFilterBank, InformedInputs, MagLsOptions, Method,
    DEFAULT_MAGLS_CUTOFF,
};
use metrics::{diffuse_nmse, nmse_per_bin, spectrum_to_ir, to_db, CueErrors, DirectionalErrors, ErbBank, MetricReport};
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use scene_sim::{
    image_sources, synth_mic_signals, synth_reference_binaural, synth_reference_binaural_hoa,
    Capture, ImageSourceSet, Scenario, DEFAULT_HOA_ORDER,
};
use sh_core::{nearly_uniform_grid, ArrayGeometry, ArrayResponse, Direction, HrtfSet, SteeringMatrix};
use spectral::{bartlett, istft, stft, TimeFreqSignal, DEFAULT_HOP, DEFAULT_WIN_LEN};

use crate::config::{ExperimentConfig, MethodChoice, ReferencePath};
use crate::hrtf_io::load_hrtf;

pub const MIC_COUNT: usize = 6;
pub const ARRAY_RADIUS: f64 = 0.1;
/// Directions in the diffuse-field NMSE evaluation grid.
pub const DIFFUSE_GRID_SIZE: usize = 1024;

/// Signal-independent design data for one array rotation.
pub struct DesignGrid {
    pub geom: ArrayGeometry,
    pub v: SteeringMatrix,
    pub h: Array3<Complex64>,
    pub bsm: BinauralFilterBank,
}

/// One simulated capture of the configured scenario.
pub struct Simulation {
    pub scenario: Scenario,
    /// Image sources in the room (array) frame.
    pub images: ImageSourceSet,
    pub capture: Capture,
    pub tf: TimeFreqSignal,
}

impl Simulation {
    /// True source direction in the room frame.
    pub fn source_direction(&self) -> Direction {
        self.images.direct().expect("image set includes the direct path").direction
    }
}

/// Output of [`Experiment::run_scenario`].
pub struct ScenarioRun {
    pub reference: Array2<f64>,
    pub results: Vec<MethodResult>,
}

pub struct MethodResult {
    pub method: MethodChoice,
    pub bank: Option<BinauralFilterBank>,
    pub binaural: Array2<f64>,
    pub report: MetricReport,
}

/// Binaural cues of one method for one (source, evaluation) direction pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CueRow {
    pub method: MethodChoice,
    pub source_azimuth_deg: f64,
    pub cues: CueErrors,
}

/// Experiment drivers sharing an HRTF set and cached BSM designs.
pub struct Experiment {
    pub cfg: ExperimentConfig,
    pub hrtf: Arc<HrtfSet>,
    pub grid: Vec<Direction>,
    pub opts: MagLsOptions,
    erb: ErbBank,
    designs: RefCell<HashMap<u64, Rc<DesignGrid>>>,
}

impl Experiment {
    pub fn new(cfg: ExperimentConfig) -> Result<Self> {
        let hrtf = load_hrtf(&cfg.hrtf).with_context(|| format!("loading HRTF {:?}", cfg.hrtf))?;
        Self::with_hrtf(cfg, Arc::new(hrtf))
    }

    pub fn with_hrtf(cfg: ExperimentConfig, hrtf: Arc<HrtfSet>) -> Result<Self> {
        cfg.validate()?;
        let grid = nearly_uniform_grid(cfg.grid_size).directions().to_vec();
        Ok(Self {
            erb: ErbBank::new(hrtf.fs())?,
            cfg,
            hrtf,
            grid,
            opts: MagLsOptions::default(),
            designs: RefCell::new(HashMap::new()),
        })
    }

    /// Same HRTF and caches, different settings.
    pub fn reconfigured(&self, cfg: ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let same_grid = self.cfg.grid_size == cfg.grid_size && self.cfg.design_snr_db == cfg.design_snr_db;
        Ok(Self {
            grid: nearly_uniform_grid(cfg.grid_size).directions().to_vec(),
            cfg,
            hrtf: self.hrtf.clone(),
            opts: self.opts,
            erb: self.erb.clone(),
            designs: RefCell::new(if same_grid { self.designs.borrow().clone() } else { HashMap::new() }),
        })
    }

    pub fn geometry(&self) -> ArrayGeometry {
        ArrayGeometry::semicircular(MIC_COUNT, ARRAY_RADIUS)
            .expect("fixed geometry")
            .with_rotation(self.cfg.rotation_deg)
    }

    pub fn freqs(&self) -> Vec<f64> {
        let n = DEFAULT_WIN_LEN;
        (0..=n / 2).map(|k| k as f64 * self.hrtf.fs() / n as f64).collect()
    }

    pub fn design_snr(&self) -> f64 {
        10f64.powf(self.cfg.design_snr_db / 10.0)
    }

    /// The BSM bank and grid matrices for the configured rotation (cached).
    pub fn design_grid(&self) -> Result<Rc<DesignGrid>> {
        let key = self.cfg.rotation_deg.to_bits();
        if let Some(d) = self.designs.borrow().get(&key) {
            return Ok(d.clone());
        }
        let geom = self.geometry();
        let freqs = self.freqs();
        let v = geom.steering_matrix(&self.grid, &freqs)?;
        let h = self.hrtf.transfer(&self.grid, &freqs)?;
        let bsm = design_bsm(&v, &h, self.design_snr(), DEFAULT_MAGLS_CUTOFF, &self.opts)
            .context("designing the BSM bank")?;
        let d = Rc::new(DesignGrid { geom, v, h, bsm });
        self.designs.borrow_mut().insert(key, d.clone());
        Ok(d)
    }

    /// Simulates the scenario, optionally with the source moved to
    /// `source_azimuth_deg` (room frame, horizontal plane).
    pub fn simulate(&self, source_azimuth_deg: Option<f64>) -> Result<Simulation> {
        let (mut scenario, order) = self.cfg.scenario()?;
        if let Some(az) = source_azimuth_deg {
            scenario.source_direction = Direction::from_degrees(az, scenario.source_direction.theta_deg())?;
            scenario.validate()?;
        }
        let id = self.cfg.scenario_id();
        let images = image_sources(&scenario, order).with_context(|| format!("image sources for {id}"))?;
        // the array is aligned with the room
        let room_geom = ArrayGeometry::semicircular(MIC_COUNT, ARRAY_RADIUS)?;
        let capture = synth_mic_signals(
            &images,
            &room_geom,
            &scenario.signal(),
            scenario.fs,
            scenario.snr_db,
            self.cfg.seed,
        )
        .with_context(|| format!("simulating {id}"))?;
        let tf = stft(&capture.signals, scenario.fs, DEFAULT_WIN_LEN, DEFAULT_HOP)?;
        Ok(Simulation {
            scenario,
            images,
            capture,
            tf,
        })
    }

    /// True source direction in the head frame.
    pub fn source_in_head(&self, sim: &Simulation) -> Direction {
        sim.source_direction().rotated(self.cfg.rotation_deg)
    }

    /// DOA handed to the informed designs: the true direction plus
    /// `doa_error_deg`, in the head frame.
    pub fn assumed_doa(&self, sim: &Simulation, doa_error_deg: [f64; 2]) -> Direction {
        let [d_az, d_theta] = doa_error_deg;
        self.source_in_head(sim).offset(d_az, d_theta)
    }

    /// Noise level of the correlation estimates implied by the sensor
    /// noise, or `None` when the capture is noiseless.
    pub fn known_noise(&self, sim: &Simulation) -> Option<f64> {
        (sim.capture.noise_variance > 0.0).then(|| {
            let w2: f64 = bartlett(DEFAULT_WIN_LEN).iter().map(|w| w * w).sum();
            (2 * self.cfg.smoothing + 1) as f64 * w2 * sim.capture.noise_variance
        })
    }

    /// Designs `method` with the configured DOA error.
    pub fn design(&self, method: Method, sim: &Simulation) -> Result<BinauralFilterBank> {
        self.design_with_error(method, sim, self.cfg.doa_error_deg)
    }

    pub fn design_with_error(
        &self,
        method: Method,
        sim: &Simulation,
        doa_error_deg: [f64; 2],
    ) -> Result<BinauralFilterBank> {
        let grid = self.design_grid()?;
        if method == Method::Bsm {
            return Ok(grid.bsm.clone());
        }
        let doa = self.assumed_doa(sim, doa_error_deg);
        let freqs = self.freqs();
        let vd = grid.geom.steering_matrix(&[doa], &freqs)?;
        let hd = self.hrtf.transfer(&[doa], &freqs)?;
        let inputs = InformedInputs {
            capture: &sim.tf,
            vd: &vd,
            hd: &hd,
            smoothing: self.cfg.smoothing,
        };
        let bank = match method {
            Method::Com => design_com(&inputs, &grid.bsm),
            Method::Dbsm => design_dbsm(
                &inputs,
                &grid.v,
                &grid.h,
                self.known_noise(sim),
                DEFAULT_MAGLS_CUTOFF,
                &self.opts,
            ),
            Method::Bsm => unreachable!(),
        };
        bank.with_context(|| format!("designing {method}"))
    }

    /// Ear signals of the listener; the head is turned opposite to the
    /// array rotation since the array stays aligned with the room.
    pub fn reference_binaural(&self, sim: &Simulation) -> Result<Array2<f64>> {
        let s = &sim.scenario;
        let head = -self.cfg.rotation_deg;
        let out = match self.cfg.reference {
            ReferencePath::Exact => synth_reference_binaural(&sim.images, &self.hrtf, &s.signal(), s.fs, head),
            ReferencePath::Hoa => {
                synth_reference_binaural_hoa(&sim.images, &self.hrtf, &s.signal(), s.fs, head, DEFAULT_HOA_ORDER)
            }
        };
        Ok(out?)
    }

    /// Simulate, design every configured method, render and score against
    /// the reference.
    pub fn run_scenario(&self) -> Result<ScenarioRun> {
        let sim = self.simulate(None)?;
        let reference = self.reference_binaural(&sim)?;
        let ref_tf = stft(&reference, sim.scenario.fs, DEFAULT_WIN_LEN, DEFAULT_HOP)?;
        let doa = self.source_in_head(&sim);
        let mut results = Vec::new();
        for &method in &self.cfg.methods {
            let (bank, est_tf) = match method {
                MethodChoice::Reference => (None, ref_tf.clone()),
                MethodChoice::Design(m) => {
                    let bank = self.design(m, &sim)?;
                    let est = bank.apply(&sim.tf)?;
                    (Some(bank), est)
                }
            };
            let binaural = match method {
                MethodChoice::Reference => reference.clone(),
                MethodChoice::Design(_) => istft(&est_tf)?,
            };
            let nmse_db = [0, 1].map(|ear| {
                nmse_per_bin(&est_tf, &ref_tf, ear).map(|bins| bins.into_iter().map(|v| v.map(to_db)).collect())
            });
            let [l, r] = nmse_db;
            let cues = self.free_field_cues(method, bank.as_ref(), doa)?;
            let diffuse = match &bank {
                Some(b) => {
                    let lin = diffuse_nmse(b, &self.geometry(), &self.hrtf, &nearly_uniform_grid(DIFFUSE_GRID_SIZE))?;
                    Some(lin.map(|ear| ear.into_iter().map(to_db).collect()))
                }
                None => None,
            };
            results.push(MethodResult {
                method,
                bank,
                binaural,
                report: MetricReport {
                    freqs: ref_tf.bin_freqs(),
                    nmse_db: [l?, r?],
                    diffuse_nmse_db: diffuse,
                    directional: None,
                    cues: vec![cues],
                },
            });
        }
        Ok(ScenarioRun { reference, results })
    }

    /// ITD/ILD of a plane wave from `dir` (head frame) rendered by `bank`,
    /// against the HRTF itself.
    pub fn free_field_cues(
        &self,
        method: MethodChoice,
        bank: Option<&BinauralFilterBank>,
        dir: Direction,
    ) -> Result<CueErrors> {
        let freqs = self.freqs();
        let h = self.hrtf.transfer(&[dir], &freqs)?;
        let reference = [0, 1].map(|ear| (0..freqs.len()).map(|k| h[(k, 0, ear)]).collect::<Vec<_>>());
        let rendered = match (method, bank) {
            (MethodChoice::Reference, _) | (_, None) => reference.clone(),
            (MethodChoice::Design(_), Some(bank)) => {
                let v = self.geometry().steering_matrix(&[dir], &freqs)?;
                let resp: Vec<[Complex64; 2]> = (0..freqs.len()).map(|k| bank.response(k, &v.column(k, 0))).collect();
                [0, 1].map(|ear| resp.iter().map(|r| r[ear]).collect())
            }
        };
        let n = DEFAULT_WIN_LEN;
        let to_ir = |s: &[Vec<Complex64>; 2]| -> Result<[Vec<f64>; 2]> {
            Ok([spectrum_to_ir(&s[0], n)?, spectrum_to_ir(&s[1], n)?])
        };
        let (test, refr) = (to_ir(&rendered)?, to_ir(&reference)?);
        Ok(CueErrors::evaluate(dir, [&test[0], &test[1]], [&refr[0], &refr[1]], &self.erb)?)
    }

    /// For every sweep azimuth: simulate the room with the source there,
    /// design, and evaluate the cues of a free-field source from the same
    /// direction.
    pub fn sweep_doa(&self) -> Result<Vec<CueRow>> {
        Ok(self.sweep_doa_errors(&[self.cfg.doa_error_deg])?.remove(0))
    }

    /// [`Experiment::sweep_doa`] for several DOA errors, sharing one
    /// simulation per azimuth. Returns one row set per error.
    pub fn sweep_doa_errors(&self, errors: &[[f64; 2]]) -> Result<Vec<Vec<CueRow>>> {
        let mut out = vec![Vec::new(); errors.len()];
        let needs_capture = self.cfg.design_methods().iter().any(|&m| m != Method::Bsm);
        for az in self.cfg.sweep.azimuths() {
            let sim = if needs_capture { Some(self.simulate(Some(az))?) } else { None };
            let dir = self.sweep_direction(az)?;
            for &method in &self.cfg.methods {
                for (rows, &err) in out.iter_mut().zip(errors) {
                    let bank = match method {
                        MethodChoice::Reference => None,
                        MethodChoice::Design(Method::Bsm) => Some(self.design_grid()?.bsm.clone()),
                        MethodChoice::Design(m) => {
                            Some(self.design_with_error(m, sim.as_ref().expect("simulated"), err)?)
                        }
                    };
                    rows.push(CueRow {
                        method,
                        source_azimuth_deg: az,
                        cues: self.free_field_cues(method, bank.as_ref(), dir)?,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Head-frame direction of a room-frame sweep azimuth.
    fn sweep_direction(&self, az: f64) -> Result<Direction> {
        let theta = self.cfg.scenario_config()?.source_direction_deg[1];
        Ok(Direction::from_degrees(az, theta)?.rotated(self.cfg.rotation_deg))
    }

    /// Designs once for the scenario's own source and evaluates the
    /// free-field cues at every sweep azimuth.
    pub fn off_source_analysis(&self) -> Result<Vec<CueRow>> {
        let sim = self.simulate(None)?;
        let source_az = sim.scenario.source_direction.azimuth_deg();
        let mut banks = Vec::new();
        for &method in &self.cfg.methods {
            let bank = match method {
                MethodChoice::Reference => None,
                MethodChoice::Design(m) => Some(self.design(m, &sim)?),
            };
            banks.push((method, bank));
        }
        let mut rows = Vec::new();
        for az in self.cfg.sweep.azimuths() {
            let dir = self.sweep_direction(az)?;
            for (method, bank) in &banks {
                rows.push(CueRow {
                    method: *method,
                    source_azimuth_deg: source_az,
                    cues: self.free_field_cues(*method, bank.as_ref(), dir)?,
                });
            }
        }
        Ok(rows)
    }

    /// Directional error over the sweep azimuths (head frame) and all STFT
    /// bins, for every configured design method.
    pub fn directional_error_map(&self) -> Result<Vec<(Method, DirectionalErrors)>> {
        let methods = self.cfg.design_methods();
        let sim = if methods.iter().any(|&m| m != Method::Bsm) {
            Some(self.simulate(None)?)
        } else {
            None
        };
        let theta = self.cfg.scenario_config()?.source_direction_deg[1];
        let dirs: Vec<Direction> = self
            .cfg
            .sweep
            .azimuths()
            .into_iter()
            .map(|az| Direction::from_degrees(az, theta))
            .collect::<Result<_, _>>()?;
        let geom = self.geometry();
        let mut out = Vec::new();
        for m in methods {
            let bank = match m {
                Method::Bsm => self.design_grid()?.bsm.clone(),
                _ => self.design(m, sim.as_ref().expect("simulated"))?,
            };
            out.push((m, metrics::directional_error_map(&bank, &geom, &self.hrtf, &dirs)?));
        }
        Ok(out)
    }
}

/// Exact room transfer functions `[freqs, channels]` of `response` for
/// image sources given in `response`'s frame.
pub fn room_transfer(images: &ImageSourceSet, response: &dyn ArrayResponse, freqs: &[f64]) -> Result<Array2<Complex64>> {
    let dirs: Vec<Direction> = images.entries.iter().map(|e| e.direction).collect();
    let max_f = freqs.iter().cloned().fold(0.0, f64::max);
    let block = response.prepare(&dirs, max_f)?.block(freqs)?;
    let mut out = Array2::zeros((freqs.len(), response.num_channels()));
    for (k, &f) in freqs.iter().enumerate() {
        for (i, e) in images.entries.iter().enumerate() {
            let w = Complex64::from_polar(e.gain, -2.0 * std::f64::consts::PI * f * e.delay);
            for c in 0..out.ncols() {
                out[(k, c)] += w * block[(k, i, c)];
            }
        }
    }
    Ok(out)
}

/// Per-bin NMSE (linear) of a bank rendering the exact room transfer
/// functions, `[left, right]`. `images` are in the head frame and `geom`
/// carries the array rotation.
pub fn transfer_nmse(
    bank: &BinauralFilterBank,
    images: &ImageSourceSet,
    geom: &ArrayGeometry,
    hrtf: &HrtfSet,
) -> Result<[Vec<Option<f64>>; 2]> {
    let x = room_transfer(images, geom, &bank.freqs)?;
    let p = room_transfer(images, hrtf, &bank.freqs)?;
    let mut out = [Vec::new(), Vec::new()];
    for (k, &f) in bank.freqs.iter().enumerate() {
        let xk = filters::CVector::from_iterator(x.ncols(), x.row(k).iter().cloned());
        let est = bank.response(k, &xk);
        for ear in 0..2 {
            out[ear].push(metrics::nmse(est[ear], p[(k, ear)], f).ok());
        }
    }
    Ok(out)
}

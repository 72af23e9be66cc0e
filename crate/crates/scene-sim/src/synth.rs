use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use realfft::RealFftPlanner;
use sh_core::{
    real_sph_harmonics, ArrayGeometry, ArrayResponse, Direction, HrtfSet, PreparedResponse,
    ShError,
};

use crate::{ImageSourceSet, SimError};

pub const DEFAULT_HOA_ORDER: usize = 14;

/// Samples of headroom before time zero in the room response, absorbing
/// the slightly acausal part of on-sphere responses.
const LEAD: usize = 512;
/// Extra response length past the longest path.
const GUARD: usize = 2048;

/// Unit response on every channel, for delay-only tests.
#[derive(Debug, Clone, Copy)]
pub struct OmniResponse(pub usize);

struct PreparedOmni {
    dirs: usize,
    channels: usize,
}

impl PreparedResponse for PreparedOmni {
    fn block(&self, freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        Ok(Array3::from_elem((freqs.len(), self.dirs, self.channels), Complex64::new(1.0, 0.0)))
    }
}

impl ArrayResponse for OmniResponse {
    fn num_channels(&self) -> usize {
        self.0
    }

    fn prepare<'a>(
        &'a self,
        dirs: &[Direction],
        _max_freq: f64,
    ) -> Result<Box<dyn PreparedResponse + 'a>, ShError> {
        Ok(Box::new(PreparedOmni {
            dirs: dirs.len(),
            channels: self.0,
        }))
    }
}

/// Binaural response through an order-`order` SH (ambisonic) expansion of
/// the HRTF: `h_N(Omega) = sum_q c_q Y_q(Omega)`, `q` up to order `N`.
pub struct HoaResponse<'h> {
    pub hrtf: &'h HrtfSet,
    pub order: usize,
}

struct PreparedHoa<'h> {
    hrtf: &'h HrtfSet,
    order: usize,
    basis: Array2<f64>,
}

impl PreparedResponse for PreparedHoa<'_> {
    fn block(&self, freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        let coeffs = self.hrtf.sh_coefficients(self.order, freqs)?;
        let nd = self.basis.nrows();
        let mut out = Array3::zeros((freqs.len(), nd, 2));
        for ear in 0..2 {
            let c = coeffs.index_axis(ndarray::Axis(2), ear);
            let re = c.mapv(|z| z.re).dot(&self.basis.t());
            let im = c.mapv(|z| z.im).dot(&self.basis.t());
            for f in 0..freqs.len() {
                for d in 0..nd {
                    out[(f, d, ear)] = Complex64::new(re[(f, d)], im[(f, d)]);
                }
            }
        }
        Ok(out)
    }
}

impl ArrayResponse for HoaResponse<'_> {
    fn num_channels(&self) -> usize {
        2
    }

    fn prepare<'a>(
        &'a self,
        dirs: &[Direction],
        _max_freq: f64,
    ) -> Result<Box<dyn PreparedResponse + 'a>, ShError> {
        Ok(Box::new(PreparedHoa {
            hrtf: self.hrtf,
            order: self.order,
            basis: real_sph_harmonics(self.order, dirs)?,
        }))
    }
}

/// A simulated capture.
#[derive(Debug, Clone)]
pub struct Capture {
    /// `[channels, samples]`
    pub signals: Array2<f64>,
    /// Per-sample variance of the added sensor noise (0 when disabled).
    pub noise_variance: f64,
    /// Direct-path signal power averaged over channels.
    pub direct_power: f64,
}

/// Room transfer functions per channel on an `n`-point grid, delayed by
/// `LEAD` samples: `H_c(f) = sum_i g_i e^{-j 2 pi f tau_i} r_c(Omega_i, f)`.
/// Returns the full response and the direct-path-only response.
fn room_spectra(
    images: &ImageSourceSet,
    response: &dyn ArrayResponse,
    fs: f64,
    n: usize,
) -> Result<(Array2<Complex64>, Array2<Complex64>), SimError> {
    let dirs: Vec<Direction> = images.entries.iter().map(|e| e.direction).collect();
    let prepared = response.prepare(&dirs, fs / 2.0)?;
    let channels = response.num_channels();
    let bins = n / 2 + 1;
    let freqs: Vec<f64> = (0..bins).map(|k| k as f64 * fs / n as f64).collect();
    let mut full = Array2::zeros((bins, channels));
    let mut direct = Array2::zeros((bins, channels));
    let block = (2_000_000 / (dirs.len() * channels).max(1)).clamp(1, 1024);
    let mut weights = vec![Complex64::new(0.0, 0.0); dirs.len()];
    for (b, chunk) in freqs.chunks(block).enumerate() {
        let resp = prepared.block(chunk)?;
        for (j, &f) in chunk.iter().enumerate() {
            let k = b * block + j;
            for (w, e) in weights.iter_mut().zip(&images.entries) {
                let t = e.delay + LEAD as f64 / fs;
                *w = Complex64::from_polar(e.gain, -2.0 * PI * f * t);
            }
            for c in 0..channels {
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, w) in weights.iter().enumerate() {
                    acc += w * resp[(j, i, c)];
                }
                full[(k, c)] = acc;
                direct[(k, c)] = weights[0] * resp[(j, 0, c)];
            }
        }
    }
    Ok((full, direct))
}

/// Filters `signal` through the room, one output channel per response
/// channel; output length equals the input length.
fn render(
    images: &ImageSourceSet,
    response: &dyn ArrayResponse,
    signal: &[f64],
    fs: f64,
    want_direct: bool,
) -> Result<(Array2<f64>, Option<Array2<f64>>), SimError> {
    if images.is_empty() {
        return Err(SimError::NoImages);
    }
    if signal.is_empty() {
        return Err(SimError::EmptySignal);
    }
    let span = (images.max_delay() * fs).ceil() as usize + LEAD + GUARD;
    let n_rir = span.next_power_of_two();
    let (full, direct) = room_spectra(images, response, fs, n_rir)?;

    let mut planner = RealFftPlanner::<f64>::new();
    let inv_r = planner.plan_fft_inverse(n_rir);
    let n_conv = (signal.len() + n_rir).next_power_of_two();
    let fwd = planner.plan_fft_forward(n_conv);
    let inv = planner.plan_fft_inverse(n_conv);

    let mut sig_buf = fwd.make_input_vec();
    sig_buf[..signal.len()].copy_from_slice(signal);
    let mut sig_spec = fwd.make_output_vec();
    fwd.process(&mut sig_buf, &mut sig_spec).expect("plan sizes");

    let channels = full.ncols();
    let len = signal.len();
    let convolve = |spectra: &Array2<Complex64>| -> Array2<f64> {
        let mut out = Array2::zeros((channels, len));
        let mut spec = inv_r.make_input_vec();
        let mut rir = inv_r.make_output_vec();
        let mut pad = fwd.make_input_vec();
        let mut rir_spec = fwd.make_output_vec();
        let mut time = inv.make_output_vec();
        for c in 0..channels {
            for (k, s) in spec.iter_mut().enumerate() {
                *s = spectra[(k, c)];
            }
            spec[0].im = 0.0;
            let last = spec.len() - 1;
            spec[last].im = 0.0;
            inv_r.process(&mut spec, &mut rir).expect("plan sizes");
            pad.iter_mut().for_each(|v| *v = 0.0);
            for (p, r) in pad.iter_mut().zip(&rir) {
                *p = r / n_rir as f64;
            }
            fwd.process(&mut pad, &mut rir_spec).expect("plan sizes");
            for (r, s) in rir_spec.iter_mut().zip(&sig_spec) {
                *r *= s;
            }
            rir_spec[0].im = 0.0;
            let last = rir_spec.len() - 1;
            rir_spec[last].im = 0.0;
            inv.process(&mut rir_spec, &mut time).expect("plan sizes");
            for t in 0..len {
                out[(c, t)] = time[t + LEAD] / n_conv as f64;
            }
        }
        out
    };
    let out = convolve(&full);
    let direct = want_direct.then(|| convolve(&direct));
    Ok((out, direct))
}

/// Noiseless rendering of `signal` through the room and `response`.
pub fn synthesize(
    images: &ImageSourceSet,
    response: &dyn ArrayResponse,
    signal: &[f64],
    fs: f64,
) -> Result<Array2<f64>, SimError> {
    Ok(render(images, response, signal, fs, false)?.0)
}

/// Microphone capture with white Gaussian sensor noise at `snr_db` relative
/// to the channel-averaged direct-path power. `snr_db = inf` disables noise.
pub fn synth_mic_signals(
    images: &ImageSourceSet,
    geom: &ArrayGeometry,
    signal: &[f64],
    fs: f64,
    snr_db: f64,
    seed: u64,
) -> Result<Capture, SimError> {
    let (mut signals, direct) = render(images, geom, signal, fs, true)?;
    let direct = direct.expect("requested");
    let direct_power = direct.iter().map(|v| v * v).sum::<f64>() / direct.len() as f64;
    let mut noise_variance = 0.0;
    if snr_db.is_finite() {
        noise_variance = direct_power / 10f64.powf(snr_db / 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_variance.sqrt()).expect("finite variance");
        signals.iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    }
    Ok(Capture {
        signals,
        noise_variance,
        direct_power,
    })
}

/// Ear signals `[2, samples]` from the exact plane-wave HRTF sum. Image
/// directions are given in the room frame; the head is turned by
/// `head_rotation_deg` in azimuth.
pub fn synth_reference_binaural(
    images: &ImageSourceSet,
    hrtf: &HrtfSet,
    signal: &[f64],
    fs: f64,
    head_rotation_deg: f64,
) -> Result<Array2<f64>, SimError> {
    synthesize(&images.in_rotated_frame(head_rotation_deg), hrtf, signal, fs)
}

/// As [`synth_reference_binaural`], rendered through an order-`order`
/// ambisonic encoding of the sound field and SH-domain HRTF decoding.
pub fn synth_reference_binaural_hoa(
    images: &ImageSourceSet,
    hrtf: &HrtfSet,
    signal: &[f64],
    fs: f64,
    head_rotation_deg: f64,
    order: usize,
) -> Result<Array2<f64>, SimError> {
    let hoa = HoaResponse { hrtf, order };
    synthesize(&images.in_rotated_frame(head_rotation_deg), &hoa, signal, fs)
}

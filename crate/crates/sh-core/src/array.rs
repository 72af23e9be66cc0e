//! Rigid-sphere array geometry and plane-wave steering.
//!
//! The pressure at a point on (or outside) a rigid sphere due to a unit plane
//! wave from `Omega` is
//! `v = sum_n b_n(k, r, a) sum_m [Y_n^m(Omega)]^* Y_n^m(Omega_mic)`;
//! by the addition theorem the inner sum collapses to
//! `(2n+1)/(4 pi) P_n(cos gamma)`, which is what the batched engine uses.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, Array3};
use num_complex::Complex64;

use crate::harmonics::{legendre_polynomials, sph_harmonics};
use crate::radial::{rigid_sphere_radial_all, truncation_order};
use crate::{Direction, ShError};

pub const SPEED_OF_SOUND: f64 = 343.0;

pub fn wavenumber(freq: f64) -> f64 {
    2.0 * PI * freq / SPEED_OF_SOUND
}

/// Anything that maps plane-wave arrival directions to per-channel transfer
/// functions: microphone arrays, or a pair of ears.
pub trait ArrayResponse {
    fn num_channels(&self) -> usize;

    /// Precomputes the direction-dependent part for `dirs`, valid for
    /// frequencies up to `max_freq`.
    fn prepare<'a>(
        &'a self,
        dirs: &[Direction],
        max_freq: f64,
    ) -> Result<Box<dyn PreparedResponse + 'a>, ShError>;
}

pub trait PreparedResponse {
    /// Transfer functions for a block of frequencies, shape
    /// `[freqs, dirs, channels]`.
    fn block(&self, freqs: &[f64]) -> Result<Array3<Complex64>, ShError>;
}

/// Evaluation points on or around a rigid sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidSphere {
    pub sphere_radius: f64,
    pub eval_radius: f64,
    pub points: Vec<Direction>,
}

pub(crate) struct PreparedSphere {
    sphere: RigidSphere,
    nmax: usize,
    n_dirs: usize,
    // [(dir, point), n] = (2n+1)/(4pi) P_n(cos gamma)
    legendre: Array2<f64>,
}

impl ArrayResponse for RigidSphere {
    fn num_channels(&self) -> usize {
        self.points.len()
    }

    fn prepare<'a>(
        &'a self,
        dirs: &[Direction],
        max_freq: f64,
    ) -> Result<Box<dyn PreparedResponse + 'a>, ShError> {
        Ok(Box::new(self.prepare_owned(dirs, max_freq)?))
    }
}

impl RigidSphere {
    pub(crate) fn prepare_owned(&self, dirs: &[Direction], max_freq: f64) -> Result<PreparedSphere, ShError> {
        if max_freq < 0.0 {
            return Err(ShError::NegativeFrequency(max_freq));
        }
        if self.eval_radius < self.sphere_radius {
            return Err(ShError::InsideSphere {
                r: self.eval_radius,
                a: self.sphere_radius,
            });
        }
        let nmax = truncation_order(wavenumber(max_freq), self.eval_radius);
        let npts = self.points.len();
        let mut legendre = Array2::zeros((dirs.len() * npts, nmax + 1));
        let mut p = vec![0.0; nmax + 1];
        for (d, dir) in dirs.iter().enumerate() {
            for (m, pt) in self.points.iter().enumerate() {
                legendre_polynomials(nmax, dir.cos_angle(pt), &mut p);
                let mut row = legendre.row_mut(d * npts + m);
                for n in 0..=nmax {
                    row[n] = (2 * n + 1) as f64 / (4.0 * PI) * p[n];
                }
            }
        }
        Ok(PreparedSphere {
            sphere: self.clone(),
            nmax,
            n_dirs: dirs.len(),
            legendre,
        })
    }
}

impl PreparedResponse for PreparedSphere {
    fn block(&self, freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        let nf = freqs.len();
        let mut b_re = Array2::zeros((nf, self.nmax + 1));
        let mut b_im = Array2::zeros((nf, self.nmax + 1));
        let mut used = 0;
        for (i, &f) in freqs.iter().enumerate() {
            if f < 0.0 {
                return Err(ShError::NegativeFrequency(f));
            }
            let k = wavenumber(f);
            let order = truncation_order(k, self.sphere.eval_radius).min(self.nmax);
            used = used.max(order);
            let b = rigid_sphere_radial_all(
                order,
                k,
                self.sphere.eval_radius,
                self.sphere.sphere_radius,
            )?;
            for (n, v) in b.iter().enumerate() {
                b_re[(i, n)] = v.re;
                b_im[(i, n)] = v.im;
            }
        }
        let cols = ndarray::s![.., 0..=used];
        let lt = self.legendre.slice(cols).t().to_owned();
        let re = b_re.slice(cols).dot(&lt);
        let im = b_im.slice(cols).dot(&lt);
        let npts = self.sphere.points.len();
        let mut out = Array3::zeros((nf, self.n_dirs, npts));
        for f in 0..nf {
            for d in 0..self.n_dirs {
                for m in 0..npts {
                    let col = d * npts + m;
                    out[(f, d, m)] = if freqs[f] == 0.0 {
                        // unit plane wave at DC
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(re[(f, col)], im[(f, col)])
                    };
                }
            }
        }
        Ok(out)
    }
}

/// Microphones on a rigid sphere, plus an azimuthal rotation of the whole
/// array relative to the listener's head.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    pub sphere_radius: f64,
    pub mic_radius: f64,
    pub mic_directions: Vec<Direction>,
    pub rotation_deg: f64,
}

impl ArrayGeometry {
    pub fn new(sphere_radius: f64, mic_directions: Vec<Direction>) -> Result<Self, ShError> {
        if mic_directions.is_empty() {
            return Err(ShError::NoMicrophones);
        }
        if !(sphere_radius > 0.0) {
            return Err(ShError::InvalidRadius(sphere_radius));
        }
        Ok(Self {
            sphere_radius,
            mic_radius: sphere_radius,
            mic_directions,
            rotation_deg: 0.0,
        })
    }

    /// `count` microphones on the horizontal semicircle facing +x, from the
    /// left (`phi = pi/2`) to the right (`phi = -pi/2`).
    pub fn semicircular(count: usize, radius: f64) -> Result<Self, ShError> {
        if count == 0 {
            return Err(ShError::NoMicrophones);
        }
        let dirs = (0..count)
            .map(|m| {
                let phi = if count == 1 {
                    PI / 2.0
                } else {
                    PI / 2.0 - PI * m as f64 / (count - 1) as f64
                };
                Direction::new(PI / 2.0, phi).expect("finite")
            })
            .collect();
        Self::new(radius, dirs)
    }

    pub fn with_rotation(mut self, rotation_deg: f64) -> Self {
        self.rotation_deg = rotation_deg;
        self
    }

    pub fn num_mics(&self) -> usize {
        self.mic_directions.len()
    }

    /// Microphone directions after applying the array rotation.
    pub fn mic_positions(&self) -> Vec<Direction> {
        crate::rotate_azimuth(&self.mic_directions, self.rotation_deg)
    }

    pub fn sphere(&self) -> RigidSphere {
        RigidSphere {
            sphere_radius: self.sphere_radius,
            eval_radius: self.mic_radius,
            points: self.mic_positions(),
        }
    }

    /// Steering matrices `V(f)` of shape `M x dirs.len()` for every frequency.
    pub fn steering_matrix(
        &self,
        dirs: &[Direction],
        freqs: &[f64],
    ) -> Result<SteeringMatrix, ShError> {
        let sphere = self.sphere();
        let max_f = freqs.iter().cloned().fold(0.0, f64::max);
        let prepared = sphere.prepare(dirs, max_f)?;
        let m = self.num_mics();
        let mut values = Vec::with_capacity(freqs.len());
        let block = (4_000_000 / (dirs.len() * m).max(1)).clamp(1, 512);
        for chunk in freqs.chunks(block) {
            let resp = prepared.block(chunk)?;
            for f in 0..chunk.len() {
                values.push(DMatrix::from_fn(m, dirs.len(), |i, j| resp[(f, j, i)]));
            }
        }
        Ok(SteeringMatrix {
            freqs: freqs.to_vec(),
            directions: dirs.to_vec(),
            values,
        })
    }
}

impl ArrayResponse for ArrayGeometry {
    fn num_channels(&self) -> usize {
        self.num_mics()
    }

    fn prepare<'a>(
        &'a self,
        dirs: &[Direction],
        max_freq: f64,
    ) -> Result<Box<dyn PreparedResponse + 'a>, ShError> {
        Ok(Box::new(self.sphere().prepare_owned(dirs, max_freq)?))
    }
}

/// Per-frequency `M x L` steering matrices.
#[derive(Debug, Clone)]
pub struct SteeringMatrix {
    pub freqs: Vec<f64>,
    pub directions: Vec<Direction>,
    pub values: Vec<DMatrix<Complex64>>,
}

impl SteeringMatrix {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn at(&self, bin: usize) -> &DMatrix<Complex64> {
        &self.values[bin]
    }

    /// Column `dir` at frequency `bin`.
    pub fn column(&self, bin: usize, dir: usize) -> DVector<Complex64> {
        self.values[bin].column(dir).into_owned()
    }
}

/// Steering vector for one direction and frequency, truncated at `order`.
///
/// Use an order of at least [`truncation_order`] for negligible truncation
/// error. At `f = 0` the result is exactly the all-ones vector.
pub fn steering_vector(
    geom: &ArrayGeometry,
    dir: &Direction,
    freq: f64,
    order: usize,
) -> Result<DVector<Complex64>, ShError> {
    if freq < 0.0 || !freq.is_finite() {
        return Err(ShError::NegativeFrequency(freq));
    }
    let m = geom.num_mics();
    if freq == 0.0 {
        return Ok(DVector::from_element(m, Complex64::new(1.0, 0.0)));
    }
    let k = wavenumber(freq);
    let b = rigid_sphere_radial_all(order, k, geom.mic_radius, geom.sphere_radius)?;
    let mut p = vec![0.0; order + 1];
    let mics = geom.mic_positions();
    Ok(DVector::from_fn(m, |i, _| {
        legendre_polynomials(order, dir.cos_angle(&mics[i]), &mut p);
        (0..=order)
            .map(|n| b[n] * ((2 * n + 1) as f64 / (4.0 * PI) * p[n]))
            .sum()
    }))
}

/// Same quantity evaluated through the explicit double sum over `(n, m)`
/// of complex harmonics; slower, used as an independent route in tests.
pub fn steering_vector_sh_sum(
    geom: &ArrayGeometry,
    dir: &Direction,
    freq: f64,
    order: usize,
) -> Result<DVector<Complex64>, ShError> {
    if freq < 0.0 {
        return Err(ShError::NegativeFrequency(freq));
    }
    let k = wavenumber(freq);
    let b = rigid_sphere_radial_all(order, k, geom.mic_radius, geom.sphere_radius)?;
    let y_src = sph_harmonics(order, std::slice::from_ref(dir))?;
    let mics = geom.mic_positions();
    let y_mic = sph_harmonics(order, &mics)?;
    Ok(DVector::from_fn(mics.len(), |i, _| {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..=order {
            for mm in -(n as i64)..=n as i64 {
                let q = crate::harmonics::acn(n, mm);
                acc += b[n] * y_src[(0, q)].conj() * y_mic[(i, q)];
            }
        }
        acc
    }))
}

//! HRTF sets: measured impulse responses on a direction grid, or the
//! closed-form rigid-sphere head model, with SH-domain interpolation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;

use crate::array::{wavenumber, ArrayResponse, PreparedResponse, RigidSphere};
use crate::harmonics::{num_coefficients, real_sph_harmonics};
use crate::radial::rigid_sphere_radial_all;
use crate::{nearly_uniform_grid, Direction, ShError};

pub const DEFAULT_SH_ORDER: usize = 30;

/// Length and bulk delay of the impulse responses synthesized for the
/// analytic head model.
pub const ANALYTIC_IR_LEN: usize = 512;
pub const ANALYTIC_IR_DELAY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum HrtfKind {
    Measured,
    /// Ears on a rigid sphere of radius `radius` (meters) at the given
    /// azimuths in degrees, on the horizontal plane.
    AnalyticSphere { radius: f64, ear_azimuths_deg: [f64; 2] },
}

pub struct HrtfSet {
    grid: Vec<Direction>,
    left: Vec<Vec<f32>>,
    right: Vec<Vec<f32>>,
    fs: f64,
    sh_order: usize,
    kind: HrtfKind,
    ir_delay: f64,
    pinv_cache: Mutex<HashMap<usize, Arc<Array2<f64>>>>,
}

impl Clone for HrtfSet {
    fn clone(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
            fs: self.fs,
            sh_order: self.sh_order,
            kind: self.kind.clone(),
            ir_delay: self.ir_delay,
            pinv_cache: Mutex::new(self.pinv_cache.lock().unwrap().clone()),
        }
    }
}

impl fmt::Debug for HrtfSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HrtfSet")
            .field("directions", &self.grid.len())
            .field("ir_len", &self.ir_len())
            .field("fs", &self.fs)
            .field("sh_order", &self.sh_order)
            .field("kind", &self.kind)
            .finish()
    }
}

impl HrtfSet {
    /// A measured set. `left[i]` and `right[i]` are the impulse responses
    /// for `grid[i]`.
    pub fn measured(
        grid: Vec<Direction>,
        left: Vec<Vec<f32>>,
        right: Vec<Vec<f32>>,
        fs: f64,
    ) -> Result<Self, ShError> {
        if left.len() != grid.len() || right.len() != grid.len() {
            return Err(ShError::GridMismatch {
                grid: grid.len(),
                irs: left.len().min(right.len()),
            });
        }
        let len = left.first().map_or(0, Vec::len);
        for (i, (l, r)) in left.iter().zip(&right).enumerate() {
            if l.len() != r.len() || l.len() != len {
                return Err(ShError::HrirLengthMismatch {
                    index: i,
                    left: l.len(),
                    right: r.len(),
                });
            }
        }
        Ok(Self {
            grid,
            left,
            right,
            fs,
            sh_order: DEFAULT_SH_ORDER,
            kind: HrtfKind::Measured,
            ir_delay: 0.0,
            pinv_cache: Mutex::new(HashMap::new()),
        })
    }

    /// Rigid-sphere head with ears at `ear_azimuths_deg = [left, right]`.
    ///
    /// Impulse responses are synthesized on a nearly uniform grid of
    /// `2 (N+1)^2` points for the default order, delayed by
    /// [`ANALYTIC_IR_DELAY`] samples; [`HrtfSet::transfer`] evaluates the
    /// model directly and is free of that delay.
    pub fn analytic_sphere(radius: f64, ear_azimuths_deg: [f64; 2], fs: f64) -> Result<Self, ShError> {
        if !(radius > 0.0) {
            return Err(ShError::InvalidRadius(radius));
        }
        let grid = nearly_uniform_grid(2 * num_coefficients(DEFAULT_SH_ORDER))
            .directions()
            .to_vec();
        let model = head_sphere(radius, ear_azimuths_deg);
        let n = ANALYTIC_IR_LEN;
        let freqs: Vec<f64> = (0..=n / 2).map(|k| k as f64 * fs / n as f64).collect();
        let resp = model.prepare_owned(&grid, fs / 2.0)?.block(&freqs)?;
        let delay = ANALYTIC_IR_DELAY as f64;

        // real inverse DFT as a matrix product: h = C Re(X) - S Im(X)
        let nb = freqs.len();
        let mut cos_t = Array2::zeros((n, nb));
        let mut sin_t = Array2::zeros((n, nb));
        for t in 0..n {
            for k in 0..nb {
                let w = if k == 0 || k == n / 2 { 1.0 } else { 2.0 } / n as f64;
                let arg = 2.0 * PI * (k * t % n) as f64 / n as f64;
                cos_t[(t, k)] = w * arg.cos();
                sin_t[(t, k)] = w * arg.sin();
            }
        }
        let mut irs = Vec::with_capacity(2);
        for ear in 0..2 {
            let mut x_re = Array2::zeros((nb, grid.len()));
            let mut x_im = Array2::zeros((nb, grid.len()));
            for k in 0..nb {
                let shift = Complex64::from_polar(1.0, -2.0 * PI * k as f64 * delay / n as f64);
                for d in 0..grid.len() {
                    let mut x = resp[(k, d, ear)] * shift;
                    if k == n / 2 {
                        x.im = 0.0;
                    }
                    x_re[(k, d)] = x.re;
                    x_im[(k, d)] = x.im;
                }
            }
            let h = cos_t.dot(&x_re) - sin_t.dot(&x_im);
            let per_dir: Vec<Vec<f32>> = h
                .axis_iter(Axis(1))
                .map(|col| col.iter().map(|&v| v as f32).collect())
                .collect();
            irs.push(per_dir);
        }
        let right = irs.pop().unwrap();
        let left = irs.pop().unwrap();
        let mut set = Self::measured(grid, left, right, fs)?;
        set.kind = HrtfKind::AnalyticSphere { radius, ear_azimuths_deg };
        set.ir_delay = delay;
        Ok(set)
    }

    pub fn with_sh_order(mut self, order: usize) -> Self {
        self.sh_order = order;
        self
    }

    /// Declares a bulk delay (in samples) contained in the stored impulse
    /// responses, removed when transfer functions are computed from them.
    pub fn with_ir_delay(mut self, samples: f64) -> Self {
        self.ir_delay = samples;
        self
    }

    pub fn grid(&self) -> &[Direction] {
        &self.grid
    }

    pub fn left(&self) -> &[Vec<f32>] {
        &self.left
    }

    pub fn right(&self) -> &[Vec<f32>] {
        &self.right
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn sh_order(&self) -> usize {
        self.sh_order
    }

    pub fn kind(&self) -> &HrtfKind {
        &self.kind
    }

    pub fn ir_len(&self) -> usize {
        self.left.first().map_or(0, Vec::len)
    }

    pub fn ir_delay(&self) -> f64 {
        self.ir_delay
    }

    fn ear_model(&self) -> Option<RigidSphere> {
        match self.kind {
            HrtfKind::AnalyticSphere { radius, ear_azimuths_deg } => {
                Some(head_sphere(radius, ear_azimuths_deg))
            }
            HrtfKind::Measured => None,
        }
    }

    /// Transfer functions at the grid directions, `[freqs, grid, 2]`.
    ///
    /// Analytic sets evaluate the model; measured sets take the DFT of the
    /// stored impulse responses.
    pub fn grid_transfer(&self, freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        match self.ear_model() {
            Some(model) => {
                let max_f = freqs.iter().cloned().fold(0.0, f64::max);
                model.prepare_owned(&self.grid, max_f)?.block(freqs)
            }
            None => {
                let to_f64 = |irs: &[Vec<f32>]| {
                    Array2::from_shape_fn((self.ir_len(), irs.len()), |(t, d)| irs[d][t] as f64)
                };
                let prepared = PreparedIrs {
                    left: to_f64(&self.left),
                    right: to_f64(&self.right),
                    fs: self.fs,
                    delay: self.ir_delay,
                };
                prepared.block(freqs)
            }
        }
    }

    /// Real-basis least-squares projector of shape `Q x grid` for `order`.
    fn projector(&self, order: usize) -> Result<Arc<Array2<f64>>, ShError> {
        if let Some(p) = self.pinv_cache.lock().unwrap().get(&order) {
            return Ok(p.clone());
        }
        let p = Arc::new(ls_projector(&self.grid, order)?);
        self.pinv_cache.lock().unwrap().insert(order, p.clone());
        Ok(p)
    }

    /// SH-interpolated transfer functions at `dirs`, `[freqs, dirs, 2]`,
    /// using a fit of order `sh_order` to the grid values.
    pub fn interpolate(&self, dirs: &[Direction], freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        let grid_h = self.grid_transfer(freqs)?;
        let coeffs = self.fit(&grid_h, self.sh_order)?;
        let y = real_sph_harmonics(self.sh_order, dirs)?;
        Ok(evaluate(&coeffs, &y))
    }

    /// Transfer functions at arbitrary directions: exact for the analytic
    /// model, SH-interpolated for measured sets.
    pub fn transfer(&self, dirs: &[Direction], freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        let max_f = freqs.iter().cloned().fold(0.0, f64::max);
        self.prepare(dirs, max_f)?.block(freqs)
    }

    /// Real-SH coefficients `[freqs, (order+1)^2, 2]` such that
    /// `h(Omega) = sum_q c_q Y_q(Omega)` with the real basis of
    /// [`real_sph_harmonics`]. Closed form for the analytic model.
    pub fn sh_coefficients(&self, order: usize, freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        match self.ear_model() {
            Some(model) => {
                let y_ear = real_sph_harmonics(order, &model.points)?;
                let q = num_coefficients(order);
                let mut out = Array3::zeros((freqs.len(), q, 2));
                for (fi, &f) in freqs.iter().enumerate() {
                    if f < 0.0 {
                        return Err(ShError::NegativeFrequency(f));
                    }
                    let b = rigid_sphere_radial_all(order, wavenumber(f), model.eval_radius, model.sphere_radius)?;
                    for n in 0..=order {
                        for idx in n * n..(n + 1) * (n + 1) {
                            for ear in 0..2 {
                                out[(fi, idx, ear)] = b[n] * y_ear[(ear, idx)];
                            }
                        }
                    }
                }
                Ok(out)
            }
            None => self.fit(&self.grid_transfer(freqs)?, order),
        }
    }

    fn fit(&self, grid_h: &Array3<Complex64>, order: usize) -> Result<Array3<Complex64>, ShError> {
        let p = self.projector(order)?;
        let (nf, ng, _) = grid_h.dim();
        let q = p.nrows();
        let mut out = Array3::zeros((nf, q, 2));
        for ear in 0..2 {
            let re = Array2::from_shape_fn((ng, nf), |(g, f)| grid_h[(f, g, ear)].re);
            let im = Array2::from_shape_fn((ng, nf), |(g, f)| grid_h[(f, g, ear)].im);
            let c_re = p.dot(&re);
            let c_im = p.dot(&im);
            for f in 0..nf {
                for k in 0..q {
                    out[(f, k, ear)] = Complex64::new(c_re[(k, f)], c_im[(k, f)]);
                }
            }
        }
        Ok(out)
    }
}

/// `[freqs, Q, ears]` coefficients evaluated with a `[dirs, Q]` basis.
fn evaluate(coeffs: &Array3<Complex64>, y: &Array2<f64>) -> Array3<Complex64> {
    let (nf, _, ears) = coeffs.dim();
    let nd = y.nrows();
    let mut out = Array3::zeros((nf, nd, ears));
    for ear in 0..ears {
        let c = coeffs.index_axis(Axis(2), ear);
        let re = c.mapv(|z| z.re).dot(&y.t());
        let im = c.mapv(|z| z.im).dot(&y.t());
        for f in 0..nf {
            for d in 0..nd {
                out[(f, d, ear)] = Complex64::new(re[(f, d)], im[(f, d)]);
            }
        }
    }
    out
}

fn head_sphere(radius: f64, ear_azimuths_deg: [f64; 2]) -> RigidSphere {
    RigidSphere {
        sphere_radius: radius,
        eval_radius: radius,
        points: ear_azimuths_deg.iter().map(|&a| Direction::horizontal(a)).collect(),
    }
}

/// `(Y^T Y + lambda I)^{-1} Y^T` for the real basis at `order` on `grid`.
///
/// Tikhonov loading `lambda = 1e-6 sigma_max^2` is used when the grid has
/// fewer than twice as many points as coefficients, or when the unloaded
/// Gram matrix is numerically singular.
fn ls_projector(grid: &[Direction], order: usize) -> Result<Array2<f64>, ShError> {
    let q = num_coefficients(order);
    if grid.len() < q {
        return Err(ShError::UnderdeterminedFit {
            order,
            needed: q,
            available: grid.len(),
        });
    }
    let y = real_sph_harmonics(order, grid)?;
    let gram = y.t().dot(&y);
    let gram = DMatrix::from_fn(q, q, |i, j| gram[(i, j)]);
    let loaded = |lambda: f64| {
        let mut g = gram.clone();
        for i in 0..q {
            g[(i, i)] += lambda;
        }
        g.cholesky()
    };
    let lambda = 1e-6 * largest_eigenvalue(&gram);
    let chol = if grid.len() < 2 * q {
        loaded(lambda)
    } else {
        loaded(0.0)
            .filter(|c| {
                let d = c.l_dirty().diagonal();
                let (lo, hi) = d.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                lo > 1e-7 * hi
            })
            .or_else(|| loaded(lambda))
    }
    .ok_or(ShError::SingularFit(order))?;
    let inv = chol.inverse();
    let inv = Array2::from_shape_fn((q, q), |(i, j)| inv[(i, j)]);
    Ok(inv.dot(&y.t()))
}

fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut v = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..200 {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= 1e-10 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Impulse responses `[taps, dirs]` per ear, evaluated by direct DFT.
struct PreparedIrs {
    left: Array2<f64>,
    right: Array2<f64>,
    fs: f64,
    delay: f64,
}

impl PreparedResponse for PreparedIrs {
    fn block(&self, freqs: &[f64]) -> Result<Array3<Complex64>, ShError> {
        let taps = self.left.nrows();
        let nd = self.left.ncols();
        let mut e_re = Array2::zeros((freqs.len(), taps));
        let mut e_im = Array2::zeros((freqs.len(), taps));
        for (i, &f) in freqs.iter().enumerate() {
            if f < 0.0 {
                return Err(ShError::NegativeFrequency(f));
            }
            for t in 0..taps {
                let arg = -2.0 * PI * f * (t as f64 - self.delay) / self.fs;
                e_re[(i, t)] = arg.cos();
                e_im[(i, t)] = arg.sin();
            }
        }
        let mut out = Array3::zeros((freqs.len(), nd, 2));
        for (ear, irs) in [&self.left, &self.right].into_iter().enumerate() {
            let re = e_re.dot(irs);
            let im = e_im.dot(irs);
            for f in 0..freqs.len() {
                for d in 0..nd {
                    out[(f, d, ear)] = Complex64::new(re[(f, d)], im[(f, d)]);
                }
            }
        }
        Ok(out)
    }
}

impl ArrayResponse for HrtfSet {
    fn num_channels(&self) -> usize {
        2
    }

    fn prepare<'a>(
        &'a self,
        dirs: &[Direction],
        max_freq: f64,
    ) -> Result<Box<dyn PreparedResponse + 'a>, ShError> {
        if let Some(model) = self.ear_model() {
            return Ok(Box::new(model.prepare_owned(dirs, max_freq)?));
        }
        // the SH fit is linear in the responses, so interpolate the IRs once
        let p = self.projector(self.sh_order)?;
        let y = real_sph_harmonics(self.sh_order, dirs)?;
        let map = p.t().dot(&y.t()); // grid x dirs
        let interp = |irs: &[Vec<f32>]| {
            let taps = Array2::from_shape_fn((self.ir_len(), irs.len()), |(t, d)| irs[d][t] as f64);
            taps.dot(&map)
        };
        Ok(Box::new(PreparedIrs {
            left: interp(&self.left),
            right: interp(&self.right),
            fs: self.fs,
            delay: self.ir_delay,
        }))
    }
}

/// Left/right values at `targets` from a least-squares SH fit of order
/// `set.sh_order()` at frequency `f`.
pub fn hrtf_interpolate(
    set: &HrtfSet,
    targets: &[Direction],
    f: f64,
) -> Result<Vec<(Complex64, Complex64)>, ShError> {
    let h = set.interpolate(targets, &[f])?;
    Ok((0..targets.len()).map(|d| (h[(0, d, 0)], h[(0, d, 1)])).collect())
}

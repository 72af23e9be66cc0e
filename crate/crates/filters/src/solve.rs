use num_complex::Complex64;

use crate::{CMatrix, CVector, FilterError};

/// Smallest admissible squared Cholesky pivot relative to the largest.
const PIVOT_RATIO: f64 = 1e-14;

/// Solves `A x = b` for Hermitian positive-definite `A`.
pub fn hermitian_solve(a: &CMatrix, b: &CVector, loading: f64) -> Result<CVector, FilterError> {
    let chol = a.clone().cholesky().ok_or(FilterError::Singular { loading })?;
    if loading > 0.0 {
        return Ok(chol.solve(b));
    }
    // unloaded: rounding lets Cholesky pass on numerically singular matrices
    let l = chol.l_dirty();
    let pivots = (0..l.nrows()).map(|i| l[(i, i)].re.powi(2));
    let (lo, hi) = pivots.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if !(lo > PIVOT_RATIO * hi) {
        return Err(FilterError::Singular { loading });
    }
    Ok(chol.solve(b))
}

fn regularized_gram(g: &CMatrix, lambda: f64) -> CMatrix {
    let mut a = g * g.adjoint();
    for i in 0..a.nrows() {
        a[(i, i)] += Complex64::new(lambda, 0.0);
    }
    a
}

/// `c = (V V^H + I/snr)^{-1} V h^*`: the filter whose response `V^H c`
/// best matches `h^*` in the least-squares sense.
pub fn bsm_ls(v: &CMatrix, h: &CVector, snr: f64) -> Result<CVector, FilterError> {
    if !(snr > 0.0) {
        return Err(FilterError::NonPositiveSnr(snr));
    }
    if v.ncols() != h.len() {
        return Err(FilterError::Shape(format!("V has {} columns, h has {}", v.ncols(), h.len())));
    }
    let a = regularized_gram(v, 1.0 / snr);
    hermitian_solve(&a, &(v * h.conjugate()), 1.0 / snr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagLsOptions {
    /// Phase assigned to the first target, in degrees.
    pub init_phase_deg: f64,
    /// Relative objective decrease below which iteration stops; values
    /// under 1e-12 are raised to 1e-12.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MagLsOptions {
    fn default() -> Self {
        Self {
            init_phase_deg: 90.0,
            tol: 1e-20,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MagLsSolution {
    pub c: CVector,
    /// `objective[0]` is the objective at `c = 0`; entry `k` follows the
    /// `k`-th exchange step.
    pub objective: Vec<f64>,
    pub converged: bool,
}

impl MagLsSolution {
    pub fn iterations(&self) -> usize {
        self.objective.len() - 1
    }

    pub fn final_objective(&self) -> f64 {
        *self.objective.last().expect("non-empty trace")
    }
}

/// Allowed per-step increase, relative to the objective at `c = 0`.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Variable-exchange minimization of `|| |G^H c| - b ||^2 + lambda ||c||^2`
/// over complex `c`, for nonnegative target magnitudes `b`.
///
/// Each step fixes the target phases to those of the current response and
/// solves the resulting regularized least-squares problem, so the
/// objective never increases (up to rounding).
pub fn magls_core(
    g: &CMatrix,
    b: &[f64],
    lambda: f64,
    opts: &MagLsOptions,
) -> Result<MagLsSolution, FilterError> {
    if g.ncols() != b.len() {
        return Err(FilterError::Shape(format!("G has {} columns, b has {}", g.ncols(), b.len())));
    }
    let a = regularized_gram(g, lambda);
    let chol = a.cholesky().ok_or(FilterError::Singular { loading: lambda })?;
    // K = A^{-1} G maps targets straight to filters
    let mut k = g.clone();
    chol.solve_mut(&mut k);

    let tol = opts.tol.max(1e-12);
    let init = Complex64::from_polar(1.0, opts.init_phase_deg.to_radians());
    let mut t = CVector::from_iterator(b.len(), b.iter().map(|&m| init * m));
    let mut c = CVector::zeros(g.nrows());
    let mut z = CVector::zeros(b.len());
    let energy: f64 = b.iter().map(|v| v * v).sum();
    let mut trace = vec![energy];
    let mut converged = false;
    for iter in 1..=opts.max_iter {
        c.gemv(Complex64::new(1.0, 0.0), &k, &t, Complex64::new(0.0, 0.0));
        z.gemv_ad(Complex64::new(1.0, 0.0), g, &c, Complex64::new(0.0, 0.0));
        let fit: f64 = z.iter().zip(b).map(|(zi, bi)| (zi.norm() - bi).powi(2)).sum();
        let obj = fit + lambda * c.norm_squared();
        let prev = *trace.last().unwrap();
        trace.push(obj);
        if obj > prev + MONOTONE_SLACK * energy {
            return Err(FilterError::Divergence { iteration: iter, trace });
        }
        if prev <= 0.0 || (prev - obj) <= tol * prev {
            converged = true;
            break;
        }
        for ((ti, zi), bi) in t.iter_mut().zip(z.iter()).zip(b) {
            let mag = zi.norm();
            *ti = if mag > 0.0 { zi * (bi / mag) } else { init * *bi };
        }
    }
    Ok(MagLsSolution {
        c,
        objective: trace,
        converged,
    })
}

/// Magnitude-least-squares BSM filter: fits `|V^H c|` to `|h|`.
pub fn mag_ls(v: &CMatrix, h: &CVector, snr: f64, opts: &MagLsOptions) -> Result<MagLsSolution, FilterError> {
    if !(snr > 0.0) {
        return Err(FilterError::NonPositiveSnr(snr));
    }
    let b: Vec<f64> = h.iter().map(|x| x.norm()).collect();
    magls_core(v, &b, 1.0 / snr, opts)
}

use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;
use sh_core::SteeringMatrix;
use spectral::{estimate_correlation, TimeFreqSignal};

use crate::solve::{hermitian_solve, magls_core, MagLsOptions, MagLsSolution};
use crate::{CMatrix, CVector, FilterError};

/// Direct-source and residual statistics per bin.
#[derive(Debug, Clone)]
pub struct SourceStatistics {
    pub r_sd: Vec<CMatrix>,
    pub sigma_r2: Vec<f64>,
    pub sigma_n2: f64,
}

impl SourceStatistics {
    pub fn with_noise(mut self, sigma_n2: f64) -> Self {
        self.sigma_n2 = sigma_n2;
        self
    }
}

/// Statistics of `s_d = W_d x` and `x_r = (I - V_d W_d) x`.
///
/// Each bin is separated with its own `W_d`, then averaged over frames and
/// over `+-smoothing` neighbouring bins (truncated at the edges), the same
/// way the spatial correlation is. The residual power is normalized by the
/// number of grid directions `l`. `sigma_n2` is left at zero.
pub fn estimate_source_stats(
    tf: &TimeFreqSignal,
    vd: &SteeringMatrix,
    wd: &[CMatrix],
    l: usize,
    smoothing: usize,
) -> Result<SourceStatistics, FilterError> {
    let bins = tf.num_bins();
    if vd.len() != bins || wd.len() != bins {
        return Err(FilterError::Shape(format!(
            "{bins} bins vs {} steering / {} extraction matrices",
            vd.len(),
            wd.len()
        )));
    }
    if l == 0 {
        return Err(FilterError::Shape("residual grid is empty".into()));
    }
    let per_bin = estimate_correlation(tf, 0)?;
    let m = tf.num_channels();
    let mut direct = Vec::with_capacity(bins);
    let mut residual = Vec::with_capacity(bins);
    for k in 0..bins {
        let r = per_bin.at(k);
        let w = &wd[k];
        direct.push(w * r * w.adjoint());
        let p = CMatrix::identity(m, m) - vd.at(k) * w;
        residual.push((&p * r * p.adjoint()).trace().re / l as f64);
    }
    let mut r_sd = Vec::with_capacity(bins);
    let mut sigma_r2 = Vec::with_capacity(bins);
    for k in 0..bins {
        let lo = k.saturating_sub(smoothing);
        let hi = (k + smoothing).min(bins - 1);
        let mut acc = direct[lo].clone();
        for d in &direct[lo + 1..=hi] {
            acc += d;
        }
        r_sd.push(hermitian_part(&acc));
        sigma_r2.push(residual[lo..=hi].iter().sum::<f64>().max(0.0));
    }
    Ok(SourceStatistics {
        r_sd,
        sigma_r2,
        sigma_n2: 0.0,
    })
}

fn hermitian_part(r: &CMatrix) -> CMatrix {
    (r + r.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Hybrid filter `c = (I - V_d W_d)^H c_bsm + W_d^H h_d^*`: a parametric
/// rendering of the extracted direct sources plus BSM on the residual.
pub fn com_filter(c_bsm: &CVector, vd: &CMatrix, wd: &CMatrix, hd: &CVector) -> CVector {
    let m = c_bsm.len();
    if wd.nrows() == 0 {
        return c_bsm.clone();
    }
    let p = CMatrix::identity(m, m) - vd * wd;
    p.adjoint() * c_bsm + wd.adjoint() * hd.conjugate()
}

/// `B = sigma_r^2 V_r V_r^H + V_d R_sd V_d^H + sigma_n^2 I`.
pub(crate) fn dbsm_system(vd: &CMatrix, vr: &CMatrix, r_sd: &CMatrix, sigma_r2: f64, sigma_n2: f64) -> CMatrix {
    let mut b = vr * vr.adjoint() * Complex64::new(sigma_r2, 0.0);
    if vd.ncols() > 0 {
        b += vd * r_sd * vd.adjoint();
    }
    for i in 0..b.nrows() {
        b[(i, i)] += Complex64::new(sigma_n2, 0.0);
    }
    (&b + b.adjoint()) * Complex64::new(0.5, 0.0)
}

pub(crate) fn dbsm_rhs(vd: &CMatrix, vr: &CMatrix, r_sd: &CMatrix, sigma_r2: f64, hd: &CVector, hr: &CVector) -> CVector {
    let mut rhs = vr * hr.conjugate() * Complex64::new(sigma_r2, 0.0);
    if vd.ncols() > 0 {
        rhs += vd * (r_sd * hd.conjugate());
    }
    rhs
}

/// Directional BSM filter `c = B^{-1} (V_d R_sd h_d^* + sigma_r^2 V_r h_r^*)`.
#[allow(clippy::too_many_arguments)]
pub fn dbsm_filter(
    vd: &CMatrix,
    vr: &CMatrix,
    r_sd: &CMatrix,
    sigma_r2: f64,
    sigma_n2: f64,
    hd: &CVector,
    hr: &CVector,
) -> Result<CVector, FilterError> {
    let b = dbsm_system(vd, vr, r_sd, sigma_r2, sigma_n2);
    hermitian_solve(&b, &dbsm_rhs(vd, vr, r_sd, sigma_r2, hd, hr), sigma_n2)
}

/// Principal square root of a Hermitian PSD matrix (negative eigenvalues
/// from rounding are clipped).
pub(crate) fn psd_sqrt(r: &CMatrix) -> CMatrix {
    let n = r.nrows();
    if n == 1 {
        return CMatrix::from_element(1, 1, Complex64::new(r[(0, 0)].re.max(0.0).sqrt(), 0.0));
    }
    let eig = SymmetricEigen::new(r.clone());
    let mut u = eig.eigenvectors.clone();
    for (j, lam) in eig.eigenvalues.iter().enumerate() {
        let s = Complex64::new(lam.max(0.0).sqrt(), 0.0);
        for i in 0..n {
            u[(i, j)] *= s;
        }
    }
    u * eig.eigenvectors.adjoint()
}

/// Magnitude-only directional fit:
/// `|| |R_s^{1/2} V^H c| - |R_s^{1/2} h^*| ||^2 + sigma_n^2 ||c||^2` with
/// `V = [V_d V_r]`, `h = [h_d; h_r]` and `R_s = diag(R_sd, sigma_r^2 I)`.
#[allow(clippy::too_many_arguments)]
pub fn dbsm_magls(
    vd: &CMatrix,
    vr: &CMatrix,
    r_sd: &CMatrix,
    sigma_r2: f64,
    sigma_n2: f64,
    hd: &CVector,
    hr: &CVector,
    opts: &MagLsOptions,
) -> Result<MagLsSolution, FilterError> {
    let (m, d) = vd.shape();
    let l = vr.ncols();
    let sigma_r = sigma_r2.max(0.0).sqrt();
    let mut g = CMatrix::zeros(m, d + l);
    let mut b = vec![0.0; d + l];
    if d > 0 {
        let root = psd_sqrt(r_sd);
        g.columns_mut(0, d).copy_from(&(vd * &root));
        let t = &root * hd.conjugate();
        for i in 0..d {
            b[i] = t[i].norm();
        }
    }
    g.columns_mut(d, l).copy_from(&(vr * Complex64::new(sigma_r, 0.0)));
    for i in 0..l {
        b[d + i] = sigma_r * hr[i].norm();
    }
    magls_core(&g, &b, sigma_n2, opts)
}

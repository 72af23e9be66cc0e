use ndarray::Array3;
use num_complex::Complex64;
use sh_core::{ArrayGeometry, Direction, HrtfSet, SteeringMatrix};
use spectral::{estimate_correlation, TimeFreqSignal};

use crate::informed::{com_filter, dbsm_magls, dbsm_rhs, dbsm_system, estimate_source_stats};
use crate::solve::{bsm_ls, hermitian_solve, mag_ls, MagLsOptions, MagLsSolution};
use crate::{lcmv_bank, BinauralFilterBank, CMatrix, CVector, DesignMeta, FilterError, Method};

/// Steering matrices and HRTFs `[freqs, dirs, 2]` on a direction grid, both
/// in the head frame.
pub fn grid_matrices(
    geom: &ArrayGeometry,
    hrtf: &HrtfSet,
    dirs: &[Direction],
    freqs: &[f64],
) -> Result<(SteeringMatrix, Array3<Complex64>), FilterError> {
    Ok((geom.steering_matrix(dirs, freqs)?, hrtf.transfer(dirs, freqs)?))
}

fn ear_vector(h: &Array3<Complex64>, bin: usize, ear: usize) -> CVector {
    CVector::from_iterator(h.dim().1, (0..h.dim().1).map(|d| h[(bin, d, ear)]))
}

fn check_shapes(v: &SteeringMatrix, h: &Array3<Complex64>) -> Result<(), FilterError> {
    let (nf, nd, ears) = h.dim();
    if nf != v.len() || nd != v.directions.len() || ears != 2 {
        return Err(FilterError::Shape(format!(
            "HRTF block {:?} vs steering {} bins x {} directions",
            h.dim(),
            v.len(),
            v.directions.len()
        )));
    }
    Ok(())
}

fn tally(meta: &mut DesignMeta, sol: &MagLsSolution) {
    meta.magls_iterations += sol.iterations();
    if !sol.converged {
        meta.unconverged_bins += 1;
    }
}

/// Signal-independent BSM bank: least squares below `cutoff`, magnitude
/// least squares at and above it. `h` holds the HRTFs on `v`'s grid.
pub fn design_bsm(
    v: &SteeringMatrix,
    h: &Array3<Complex64>,
    snr: f64,
    cutoff: f64,
    opts: &MagLsOptions,
) -> Result<BinauralFilterBank, FilterError> {
    check_shapes(v, h)?;
    let mut meta = DesignMeta {
        snr: Some(snr),
        ..Default::default()
    };
    let mut ears = [Vec::with_capacity(v.len()), Vec::with_capacity(v.len())];
    for (k, &f) in v.freqs.iter().enumerate() {
        for (ear, out) in ears.iter_mut().enumerate() {
            let target = ear_vector(h, k, ear);
            let c = if f < cutoff {
                bsm_ls(v.at(k), &target, snr)?
            } else {
                let sol = mag_ls(v.at(k), &target, snr, opts)?;
                tally(&mut meta, &sol);
                sol.c
            };
            out.push(c);
        }
    }
    let [left, right] = ears;
    Ok(BinauralFilterBank {
        method: Method::Bsm,
        freqs: v.freqs.clone(),
        left,
        right,
        magls_cutoff: cutoff,
        meta,
    })
}

/// Capture-dependent inputs shared by the informed designs.
pub struct InformedInputs<'a> {
    pub capture: &'a TimeFreqSignal,
    /// Direct-path steering (`M x D` per bin) at the assumed DOAs.
    pub vd: &'a SteeringMatrix,
    /// HRTFs `[freqs, D, 2]` at the assumed DOAs.
    pub hd: &'a Array3<Complex64>,
    /// Frequency smoothing half-width for correlation estimates.
    pub smoothing: usize,
}

impl InformedInputs<'_> {
    fn check(&self) -> Result<(), FilterError> {
        check_shapes(self.vd, self.hd)?;
        if self.capture.num_bins() != self.vd.len() {
            return Err(FilterError::Shape(format!(
                "capture has {} bins, steering {}",
                self.capture.num_bins(),
                self.vd.len()
            )));
        }
        Ok(())
    }
}

/// Hybrid bank: extracts direct sources with LCMV, renders them with
/// their HRTFs and the residual with the BSM bank.
pub fn design_com(inp: &InformedInputs, bsm: &BinauralFilterBank) -> Result<BinauralFilterBank, FilterError> {
    inp.check()?;
    if bsm.len() != inp.vd.len() {
        return Err(FilterError::Shape("BSM bank and capture bins differ".into()));
    }
    let rx = estimate_correlation(inp.capture, inp.smoothing)?;
    let w = lcmv_bank(inp.vd, &rx)?;
    let mut left = Vec::with_capacity(bsm.len());
    let mut right = Vec::with_capacity(bsm.len());
    for k in 0..bsm.len() {
        left.push(com_filter(&bsm.left[k], inp.vd.at(k), &w[k], &ear_vector(inp.hd, k, 0)));
        right.push(com_filter(&bsm.right[k], inp.vd.at(k), &w[k], &ear_vector(inp.hd, k, 1)));
    }
    Ok(BinauralFilterBank {
        method: Method::Com,
        freqs: bsm.freqs.clone(),
        left,
        right,
        magls_cutoff: bsm.magls_cutoff,
        meta: DesignMeta {
            snr: bsm.meta.snr,
            doa: inp.vd.directions.clone(),
            ..Default::default()
        },
    })
}

/// Fallback noise level relative to the capture: `1e-4 * mean(tr R_x) / M`.
pub(crate) fn fallback_noise(rx: &spectral::SpatialCorrelation) -> f64 {
    let m = rx.at(0).nrows() as f64;
    let mean_tr = rx.matrices.iter().map(|r| r.trace().re).sum::<f64>() / rx.len() as f64;
    1e-4 * mean_tr / m
}

/// Directional BSM bank. `v` and `h` describe the residual grid;
/// `sigma_n2 = None` selects the capture-relative fallback noise level.
pub fn design_dbsm(
    inp: &InformedInputs,
    v: &SteeringMatrix,
    h: &Array3<Complex64>,
    sigma_n2: Option<f64>,
    cutoff: f64,
    opts: &MagLsOptions,
) -> Result<BinauralFilterBank, FilterError> {
    inp.check()?;
    check_shapes(v, h)?;
    let rx = estimate_correlation(inp.capture, inp.smoothing)?;
    let w = lcmv_bank(inp.vd, &rx)?;
    let sigma_n2 = sigma_n2.unwrap_or_else(|| fallback_noise(&rx));
    let stats = estimate_source_stats(inp.capture, inp.vd, &w, v.directions.len(), inp.smoothing)?
        .with_noise(sigma_n2);
    let mut meta = DesignMeta {
        sigma_n2: Some(sigma_n2),
        doa: inp.vd.directions.clone(),
        ..Default::default()
    };
    let mut left = Vec::with_capacity(v.len());
    let mut right = Vec::with_capacity(v.len());
    for (k, &f) in v.freqs.iter().enumerate() {
        let (vd, vr) = (inp.vd.at(k), v.at(k));
        let (r_sd, s_r2) = (&stats.r_sd[k], stats.sigma_r2[k]);
        let hd = [ear_vector(inp.hd, k, 0), ear_vector(inp.hd, k, 1)];
        let hr = [ear_vector(h, k, 0), ear_vector(h, k, 1)];
        let pair: [CVector; 2] = if f < cutoff {
            let b: CMatrix = dbsm_system(vd, vr, r_sd, s_r2, sigma_n2);
            let solve = |e: usize| hermitian_solve(&b, &dbsm_rhs(vd, vr, r_sd, s_r2, &hd[e], &hr[e]), sigma_n2);
            [solve(0)?, solve(1)?]
        } else {
            let mut fit = |e: usize| -> Result<CVector, FilterError> {
                let sol = dbsm_magls(vd, vr, r_sd, s_r2, sigma_n2, &hd[e], &hr[e], opts)?;
                tally(&mut meta, &sol);
                Ok(sol.c)
            };
            [fit(0)?, fit(1)?]
        };
        let [l, r] = pair;
        left.push(l);
        right.push(r);
    }
    Ok(BinauralFilterBank {
        method: Method::Dbsm,
        freqs: v.freqs.clone(),
        left,
        right,
        magls_cutoff: cutoff,
        meta,
    })
}

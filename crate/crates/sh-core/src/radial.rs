//! Rigid-sphere radial functions.
//!
//! Time convention: spectra follow the forward DFT (`X(f) = sum x(t)
//! e^{-i 2 pi f t}`), so a free plane wave arriving from `Omega` reads
//! `e^{i k Omega . r}` and outgoing scattered waves use the spherical Hankel
//! function of the second kind, `h_n = j_n - i y_n`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bessel::{derivatives, spherical_jn, spherical_yn};
use crate::ShError;

fn i_pow(n: i64) -> Complex64 {
    match n.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `b_n(k, r, a)` for `n = 0..=nmax`.
pub fn rigid_sphere_radial_all(
    nmax: usize,
    k: f64,
    r: f64,
    a: f64,
) -> Result<Vec<Complex64>, ShError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(ShError::InvalidRadius(a));
    }
    if r < a {
        return Err(ShError::InsideSphere { r, a });
    }
    if k < 0.0 || !k.is_finite() {
        return Err(ShError::NegativeWavenumber(k));
    }
    let four_pi = 4.0 * PI;
    let mut out = vec![Complex64::new(0.0, 0.0); nmax + 1];
    if k == 0.0 {
        out[0] = Complex64::new(four_pi, 0.0);
        return Ok(out);
    }
    let ka = k * a;
    let ja = spherical_jn(nmax + 1, ka);
    let ya = spherical_yn(nmax + 1, ka);
    let dja = derivatives(&ja, ka);
    let dya = derivatives(&ya, ka);
    if r == a {
        // Wronskian form: b_n = 4 pi i^{n-1} / ((ka)^2 h_n'(ka))
        for n in 0..=nmax {
            if !dya[n].is_finite() {
                break;
            }
            let dh = Complex64::new(dja[n], -dya[n]);
            out[n] = i_pow(n as i64 - 1) * four_pi / (dh * ka * ka);
        }
        return Ok(out);
    }
    let kr = k * r;
    let jr = spherical_jn(nmax, kr);
    let yr = spherical_yn(nmax, kr);
    for n in 0..=nmax {
        let mut term = Complex64::new(jr[n], 0.0);
        if dya[n].is_finite() && yr[n].is_finite() {
            let dh = Complex64::new(dja[n], -dya[n]);
            let h = Complex64::new(jr[n], -yr[n]);
            let scat = dja[n] / dh * h;
            if scat.re.is_finite() && scat.im.is_finite() {
                term -= scat;
            }
        }
        out[n] = i_pow(n as i64) * four_pi * term;
    }
    Ok(out)
}

/// Single-order convenience wrapper around [`rigid_sphere_radial_all`].
pub fn rigid_sphere_radial(n: usize, k: f64, r: f64, a: f64) -> Result<Complex64, ShError> {
    Ok(rigid_sphere_radial_all(n, k, r, a)?[n])
}

/// Open-sphere (free-field) radial function `4 pi i^n j_n(kr)`.
pub fn open_sphere_radial_all(nmax: usize, kr: f64) -> Vec<Complex64> {
    spherical_jn(nmax, kr)
        .into_iter()
        .enumerate()
        .map(|(n, j)| i_pow(n as i64) * 4.0 * PI * j)
        .collect()
}

/// SH truncation order used for plane-wave responses on a sphere of radius
/// `r` at wavenumber `k`: `ceil(e k r / 2) + 8`, at least 20.
pub fn truncation_order(k: f64, r: f64) -> usize {
    let rule = (std::f64::consts::E * k * r / 2.0).ceil() as usize + 8;
    rule.max(20)
}

//! Complex and real spherical harmonics.
//!
//! Complex harmonics carry the Condon-Shortley phase and are orthonormal on
//! the sphere; columns follow ACN order, `(n, m) -> n^2 + n + m`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Direction, ShError};

/// Column index of degree `n`, order `m`.
pub fn acn(n: usize, m: i64) -> usize {
    ((n * n + n) as i64 + m) as usize
}

pub fn num_coefficients(order: usize) -> usize {
    (order + 1) * (order + 1)
}

/// Fully normalized associated Legendre values `P~_n^m(cos theta)` for
/// `0 <= m <= n <= order`, including the Condon-Shortley phase and the
/// `1/sqrt(4 pi)` factor, so `Y_n^m = P~_n^m e^{i m phi}`. Stored at
/// `n (n + 1) / 2 + m`.
fn normalized_legendre(order: usize, theta: f64) -> Vec<f64> {
    let (st, ct) = theta.sin_cos();
    let idx = |n: usize, m: usize| n * (n + 1) / 2 + m;
    let mut p = vec![0.0; (order + 1) * (order + 2) / 2];
    p[0] = 0.5 / std::f64::consts::PI.sqrt();
    for m in 1..=order {
        p[idx(m, m)] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * st * p[idx(m - 1, m - 1)];
    }
    for m in 0..order {
        p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * ct * p[idx(m, m)];
    }
    for m in 0..=order {
        for n in (m + 2)..=order {
            let nf = n as f64;
            let mf = m as f64;
            let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
            let b = (((nf - 1.0).powi(2) - mf * mf) / (4.0 * (nf - 1.0).powi(2) - 1.0)).sqrt();
            p[idx(n, m)] = a * (ct * p[idx(n - 1, m)] - b * p[idx(n - 2, m)]);
        }
    }
    p
}

fn check(dirs: &[Direction]) -> Result<(), ShError> {
    for d in dirs {
        if !d.theta().is_finite() || !d.phi().is_finite() {
            return Err(ShError::NonFiniteAngle {
                theta: d.theta(),
                phi: d.phi(),
            });
        }
    }
    Ok(())
}

/// Complex harmonics `Y_n^m(dir)`, shape `[dirs, (order+1)^2]`.
pub fn sph_harmonics(order: usize, dirs: &[Direction]) -> Result<Array2<Complex64>, ShError> {
    check(dirs)?;
    let mut out = Array2::zeros((dirs.len(), num_coefficients(order)));
    for (row, d) in dirs.iter().enumerate() {
        let p = normalized_legendre(order, d.theta());
        for n in 0..=order {
            for m in 0..=n {
                let val = p[n * (n + 1) / 2 + m];
                let e = Complex64::from_polar(1.0, m as f64 * d.phi());
                let y = e * val;
                out[(row, acn(n, m as i64))] = y;
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    out[(row, acn(n, -(m as i64)))] = y.conj() * sign;
                }
            }
        }
    }
    Ok(out)
}

/// Orthonormal real harmonics spanning the same space as the complex ones:
/// `m > 0` uses `sqrt(2) |P~| cos(m phi)`, `m < 0` uses `sin`.
pub fn real_sph_harmonics(order: usize, dirs: &[Direction]) -> Result<Array2<f64>, ShError> {
    check(dirs)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = Array2::zeros((dirs.len(), num_coefficients(order)));
    for (row, d) in dirs.iter().enumerate() {
        let p = normalized_legendre(order, d.theta());
        for n in 0..=order {
            out[(row, acn(n, 0))] = p[n * (n + 1) / 2];
            for m in 1..=n {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let val = sign * sqrt2 * p[n * (n + 1) / 2 + m];
                let (s, c) = (m as f64 * d.phi()).sin_cos();
                out[(row, acn(n, m as i64))] = val * c;
                out[(row, acn(n, -(m as i64)))] = val * s;
            }
        }
    }
    Ok(out)
}

/// Legendre polynomials `P_0(x) ..= P_nmax(x)` by Bonnet's recursion.
pub fn legendre_polynomials(nmax: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if nmax == 0 {
        return;
    }
    out[1] = x;
    for n in 1..nmax {
        out[n + 1] = ((2 * n + 1) as f64 * x * out[n] - n as f64 * out[n - 1]) / (n + 1) as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::nearly_uniform_grid;
    use approx::assert_relative_eq;
    use rand::{RngExt, SeedableRng};
    use std::f64::consts::PI;

    fn random_dirs(count: usize, seed: u64) -> Vec<Direction> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let z: f64 = rng.random_range(-1.0..1.0);
                Direction::new(z.acos(), rng.random_range(0.0..2.0 * PI)).unwrap()
            })
            .collect()
    }

    #[test]
    fn order_zero_is_constant() {
        let y = sph_harmonics(0, &random_dirs(5, 1)).unwrap();
        for v in y.iter() {
            assert_relative_eq!(v.re, 1.0 / (4.0 * PI).sqrt(), max_relative = 1e-14);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn known_low_orders() {
        let d = Direction::from_degrees(30.0, 50.0).unwrap();
        let y = sph_harmonics(1, &[d]).unwrap();
        let (st, ct) = d.theta().sin_cos();
        let y10 = (3.0 / (4.0 * PI)).sqrt() * ct;
        let y11 = -(3.0 / (8.0 * PI)).sqrt() * st * Complex64::from_polar(1.0, d.phi());
        assert_relative_eq!(y[(0, acn(1, 0))].re, y10, max_relative = 1e-13);
        assert!((y[(0, acn(1, 1))] - y11).norm() < 1e-14);
        assert!((y[(0, acn(1, -1))] + y11.conj()).norm() < 1e-14);
    }

    #[test]
    fn addition_theorem_at_zero_angle() {
        let order = 30;
        let y = sph_harmonics(order, &random_dirs(7, 2)).unwrap();
        for row in y.rows() {
            for n in 0..=order {
                let s: f64 = (-(n as i64)..=n as i64)
                    .map(|m| row[acn(n, m)].norm_sqr())
                    .sum();
                assert_relative_eq!(s, (2 * n + 1) as f64 / (4.0 * PI), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let order = 12;
        let y = sph_harmonics(order, &random_dirs(9, 3)).unwrap();
        for row in y.rows() {
            for n in 0..=order {
                for m in 1..=n as i64 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    let lhs = row[acn(n, -m)];
                    let rhs = row[acn(n, m)].conj() * sign;
                    assert!((lhs - rhs).norm() < 1e-14);
                }
            }
        }
    }

    /// Equal-weight quadrature on the 400-point spiral grid as the oracle
    /// for orthonormality at order 4.
    #[test]
    fn gram_on_spiral_grid() {
        let grid = nearly_uniform_grid(400);
        let y = sph_harmonics(4, grid.directions()).unwrap();
        let q = y.ncols();
        let mut max_off = 0.0_f64;
        let mut max_diag_err = 0.0_f64;
        for a in 0..q {
            for b in 0..q {
                let s: Complex64 = (0..y.nrows())
                    .map(|i| y[(i, a)].conj() * y[(i, b)] * grid.weights()[i])
                    .sum();
                if a == b {
                    max_diag_err = max_diag_err.max((s.re - 1.0).abs());
                } else {
                    max_off = max_off.max(s.norm());
                }
            }
        }
        assert!(max_off < 1e-2, "off-diagonal {max_off}");
        assert!(max_diag_err < 1e-2, "diagonal {max_diag_err}");
    }

    #[test]
    fn real_basis_addition_theorem() {
        let order = 8;
        let dirs = random_dirs(4, 4);
        let yr = real_sph_harmonics(order, &dirs).unwrap();
        let mut p = vec![0.0; order + 1];
        for a in 0..dirs.len() {
            for b in 0..dirs.len() {
                legendre_polynomials(order, dirs[a].cos_angle(&dirs[b]), &mut p);
                for n in 0..=order {
                    let s: f64 = (-(n as i64)..=n as i64)
                        .map(|m| yr[(a, acn(n, m))] * yr[(b, acn(n, m))])
                        .sum();
                    let expected = (2 * n + 1) as f64 / (4.0 * PI) * p[n];
                    assert!((s - expected).abs() < 1e-12, "n={n}");
                }
            }
        }
    }

    #[test]
    fn rejects_nan() {
        // Direction::new refuses NaN, so build one via a NaN unit vector path
        assert!(Direction::from_unit_vector([f64::NAN, 0.0, 0.0]).is_err());
    }
}

//! Spherical Bessel functions of the first and second kind.
//!
//! `j_n` uses Miller's downward recurrence, normalized against whichever of
//! `j_0`, `j_1` is larger in magnitude. `y_n` uses the (stable) upward
//! recurrence and saturates to `-inf` once it overflows.

/// `j_0(x) ..= j_nmax(x)`.
pub fn spherical_jn(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (nmax as f64).max(ax);
    let start = (top + 30.0 + (40.0 * top.max(1.0)).sqrt()).ceil() as usize;
    let mut next = 0.0_f64; // j_{n+1}
    let mut cur = 1e-300_f64; // j_n
    for n in (1..=start).rev() {
        let prev = (2 * n + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if n - 1 <= nmax {
            out[n - 1] = cur;
        }
        if n <= nmax {
            out[n] = next;
        }
        if cur.abs() > 1e200 {
            cur *= 1e-200;
            next *= 1e-200;
            for v in out.iter_mut() {
                *v *= 1e-200;
            }
        }
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    // `cur` holds the unnormalized j_0 and `next` the unnormalized j_1
    let scale = if j0.abs() >= j1.abs() { j0 / cur } else { j1 / next };
    for v in out.iter_mut() {
        *v *= scale;
    }
    out
}

/// `y_0(x) ..= y_nmax(x)`.
pub fn spherical_yn(nmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; nmax + 1];
    if x == 0.0 {
        return out;
    }
    let (s, c) = x.sin_cos();
    out[0] = -c / x;
    if nmax >= 1 {
        out[1] = -c / (x * x) - s / x;
    }
    for n in 1..nmax {
        let v = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        if !v.is_finite() {
            break;
        }
        out[n + 1] = v;
    }
    out
}

/// Derivatives from a table of values of order `0..=nmax+1`:
/// `f_n' = f_{n-1} - (n+1)/x f_n`, `f_0' = -f_1`.
pub fn derivatives(values: &[f64], x: f64) -> Vec<f64> {
    let nmax = values.len() - 2;
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(-values[1]);
    for n in 1..=nmax {
        let d = values[n - 1] - (n + 1) as f64 / x * values[n];
        out.push(if d.is_nan() { values[n - 1] } else { d });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn j_closed(n: usize, x: f64) -> f64 {
        let (s, c) = x.sin_cos();
        match n {
            0 => s / x,
            1 => s / x.powi(2) - c / x,
            2 => (3.0 / x.powi(2) - 1.0) * s / x - 3.0 * c / x.powi(2),
            3 => (15.0 / x.powi(3) - 6.0 / x) * s / x - (15.0 / x.powi(2) - 1.0) * c / x,
            _ => unreachable!(),
        }
    }

    fn y_closed(n: usize, x: f64) -> f64 {
        let (s, c) = x.sin_cos();
        match n {
            0 => -c / x,
            1 => -c / x.powi(2) - s / x,
            2 => (-3.0 / x.powi(2) + 1.0) * c / x - 3.0 * s / x.powi(2),
            _ => unreachable!(),
        }
    }

    #[test]
    fn matches_elementary_forms() {
        for &x in &[0.3, 1.0, 2.5, 7.0, 31.0] {
            let j = spherical_jn(3, x);
            let y = spherical_yn(2, x);
            for n in 0..=3 {
                assert_relative_eq!(j[n], j_closed(n, x), max_relative = 1e-10, epsilon = 1e-14);
            }
            for n in 0..=2 {
                assert_relative_eq!(y[n], y_closed(n, x), max_relative = 1e-10);
            }
        }
    }

    /// Oracle: `int_{-1}^{1} e^{ixt} P_n(t) dt = 2 i^n j_n(x)`, evaluated by
    /// composite Simpson quadrature with Legendre polynomials from Bonnet's
    /// recursion.
    #[test]
    fn quadrature_oracle_high_order() {
        let steps = 20_000;
        for &x in &[1.0, 10.0, 44.0] {
            let nmax = 60;
            let j = spherical_jn(nmax, x);
            // real part for even n, imaginary part for odd n
            let mut acc = vec![0.0; nmax + 1];
            for s in 0..=steps {
                let t = -1.0 + 2.0 * s as f64 / steps as f64;
                let w = if s == 0 || s == steps {
                    1.0
                } else if s % 2 == 1 {
                    4.0
                } else {
                    2.0
                } * (2.0 / steps as f64) / 3.0;
                let (sn, cs) = (x * t).sin_cos();
                let (mut p0, mut p1) = (1.0, t);
                for (n, a) in acc.iter_mut().enumerate() {
                    let p = if n == 0 { p0 } else { p1 };
                    // i^n e^{ixt}: pick the component that survives
                    let val = match n % 4 {
                        0 => cs,
                        1 => sn,
                        2 => -cs,
                        _ => -sn,
                    };
                    *a += w * val * p;
                    if n >= 1 {
                        let pn = ((2 * n + 1) as f64 * t * p1 - n as f64 * p0) / (n + 1) as f64;
                        p0 = p1;
                        p1 = pn;
                    }
                }
            }
            for n in 0..=nmax {
                let expected = acc[n] / 2.0;
                assert!(
                    (j[n] - expected).abs() < 1e-9 * (1.0 + expected.abs()),
                    "x={x} n={n}: {} vs {}",
                    j[n],
                    expected
                );
            }
        }
    }

    #[test]
    fn zero_argument() {
        let j = spherical_jn(4, 0.0);
        assert_eq!(j, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let y = spherical_yn(2, 0.0);
        assert!(y.iter().all(|v| *v == f64::NEG_INFINITY));
    }

    #[test]
    fn small_argument_series() {
        let x = 1e-3;
        let j = spherical_jn(5, x);
        // j_n(x) ~ x^n / (2n+1)!!
        let mut dfact = 1.0;
        for (n, v) in j.iter().enumerate() {
            dfact *= (2 * n + 1) as f64;
            let approx = x.powi(n as i32) / dfact;
            assert_relative_eq!(*v, approx, max_relative = 1e-5);
        }
    }

    #[test]
    fn wronskian_holds() {
        for &x in &[0.2, 1.7, 12.0] {
            let j = spherical_jn(21, x);
            let y = spherical_yn(21, x);
            let dj = derivatives(&j, x);
            let dy = derivatives(&y, x);
            for n in 0..=20 {
                let w = j[n] * dy[n] - dj[n] * y[n];
                assert_relative_eq!(w * x * x, 1.0, max_relative = 1e-8);
            }
        }
    }
}

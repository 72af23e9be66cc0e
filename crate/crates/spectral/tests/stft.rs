use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spectral::{istft, stft, SpectralError, DEFAULT_HOP, DEFAULT_WIN_LEN};

const FS: f64 = 48_000.0;

fn noise(channels: usize, len: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((channels, len), |_| StandardNormal.sample(&mut rng))
}

#[test]
fn zeros_in_zeros_out() {
    let x = Array2::zeros((3, 5000));
    let tf = stft(&x, FS, DEFAULT_WIN_LEN, DEFAULT_HOP).unwrap();
    assert!(tf.frames.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    assert!(istft(&tf).unwrap().iter().all(|v| *v == 0.0));
    assert_eq!(tf.num_bins(), 769);
}

#[test]
fn bin_aligned_tone_peaks_at_its_bin() {
    let k = 37;
    let n = DEFAULT_WIN_LEN;
    let x = Array2::from_shape_fn((1, 4 * n), |(_, t)| {
        (2.0 * std::f64::consts::PI * k as f64 * t as f64 / n as f64).cos()
    });
    let tf = stft(&x, FS, n, n).unwrap();
    for t in 0..tf.num_frames() {
        let peak = (0..tf.num_bins())
            .max_by(|&a, &b| tf.frames[(t, a, 0)].norm().total_cmp(&tf.frames[(t, b, 0)].norm()))
            .unwrap();
        assert_eq!(peak, k);
    }
}

#[test]
fn white_noise_round_trip() {
    let x = noise(2, 20_000, 11);
    let tf = stft(&x, FS, DEFAULT_WIN_LEN, DEFAULT_HOP).unwrap();
    let y = istft(&tf).unwrap();
    assert_eq!(y.dim(), x.dim());
    // interior: skip the first hop, where the window vanishes
    let range = DEFAULT_HOP..x.ncols();
    let mut num = 0.0;
    let mut den = 0.0;
    for c in 0..2 {
        for t in range.clone() {
            num += (y[(c, t)] - x[(c, t)]).powi(2);
            den += x[(c, t)].powi(2);
        }
    }
    assert!((num / den).sqrt() < 1e-6, "{}", (num / den).sqrt());
}

#[test]
fn istft_is_linear() {
    let a = stft(&noise(2, 6000, 1), FS, DEFAULT_WIN_LEN, DEFAULT_HOP).unwrap();
    let b = stft(&noise(2, 6000, 2), FS, DEFAULT_WIN_LEN, DEFAULT_HOP).unwrap();
    let sum = a.with_frames(&a.frames + &b.frames);
    let lhs = istft(&sum).unwrap();
    let rhs = istft(&a).unwrap() + istft(&b).unwrap();
    let err = (&lhs - &rhs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(err <= 1e-12 * scale);
}

#[test]
fn rejects_bad_input() {
    assert_eq!(
        stft(&Array2::zeros((1, 0)), FS, 1536, 384).unwrap_err(),
        SpectralError::EmptySignal
    );
    assert!(matches!(
        stft(&Array2::zeros((1, 100)), FS, 1536, 384),
        Err(SpectralError::TooShort { .. })
    ));
    assert!(matches!(
        stft(&Array2::zeros((1, 4000)), FS, 1536, 2000),
        Err(SpectralError::InvalidGeometry { .. })
    ));
    let tf = stft(&noise(1, 4000, 3), FS, 1536, 384).unwrap();
    let broken = tf.with_frames(Array3::zeros((tf.num_frames(), 10, 1)));
    assert!(matches!(istft(&broken), Err(SpectralError::BinMismatch { .. })));
}

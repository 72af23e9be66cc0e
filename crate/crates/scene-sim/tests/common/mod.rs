#![allow(dead_code)]

use scene_sim::Scenario;
use sh_core::Direction;

pub const FS: f64 = 48_000.0;

pub fn scenario(room: [f64; 3], t60: f64, array: [f64; 3], distance: f64) -> Scenario {
    Scenario {
        room_dims: room,
        t60,
        array_position: array,
        source_distance: distance,
        source_direction: Direction::from_degrees(40.0, 90.0).unwrap(),
        source_signal: Vec::new(),
        fs: FS,
        duration: 1.0,
        head_rotation_deg: 0.0,
        snr_db: f64::INFINITY,
    }
}

pub fn room1(t60: f64) -> Scenario {
    scenario([6.0, 4.0, 3.0], t60, [4.0, 3.0, 1.7], 0.6)
}

/// Deterministic pseudo-noise in [-0.5, 0.5).
pub fn test_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (0..len)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

pub fn rel_l2(a: &ndarray::Array2<f64>, b: &ndarray::Array2<f64>) -> f64 {
    let num: f64 = (a - b).iter().map(|v| v * v).sum();
    let den: f64 = b.iter().map(|v| v * v).sum();
    (num / den).sqrt()
}

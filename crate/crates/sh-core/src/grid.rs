use std::f64::consts::PI;

use crate::Direction;

/// Quadrature grid on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    directions: Vec<Direction>,
    weights: Vec<f64>,
}

impl SphereGrid {
    pub fn new(directions: Vec<Direction>, weights: Vec<f64>) -> Self {
        assert_eq!(directions.len(), weights.len());
        Self {
            directions,
            weights,
        }
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Fibonacci-spiral grid of `count` points with equal-area weights `4pi/L`.
///
/// Points sit at `z_i = 1 - (2i + 1)/L` and advance in azimuth by the golden
/// angle.
pub fn nearly_uniform_grid(count: usize) -> SphereGrid {
    assert!(count >= 1, "grid needs at least one point");
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    let l = count as f64;
    let directions = (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / l;
            Direction::new(z.clamp(-1.0, 1.0).acos(), i as f64 * golden)
                .expect("finite spiral angles")
        })
        .collect();
    SphereGrid {
        directions,
        weights: vec![4.0 * PI / l; count],
    }
}

use std::f64::consts::{PI, TAU};

use crate::ShError;

/// A direction on the unit sphere.
///
/// `theta` is the polar angle measured from +z (so the horizontal plane is
/// `theta = pi/2`) and `phi` the azimuth from +x towards +y. With the
/// listener facing +x, the left ear sits at `phi = pi/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

/// Wraps an azimuth into `[0, 2pi)`.
pub fn wrap_azimuth(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl Direction {
    /// Builds a direction, clamping `theta` to `[0, pi]` and wrapping `phi`.
    pub fn new(theta: f64, phi: f64) -> Result<Self, ShError> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(ShError::NonFiniteAngle { theta, phi });
        }
        Ok(Self {
            theta: theta.clamp(0.0, PI),
            phi: wrap_azimuth(phi),
        })
    }

    /// Azimuth and elevation-from-zenith in degrees, in that order.
    pub fn from_degrees(azimuth_deg: f64, theta_deg: f64) -> Result<Self, ShError> {
        Self::new(theta_deg.to_radians(), azimuth_deg.to_radians())
    }

    /// A direction on the horizontal plane.
    pub fn horizontal(azimuth_deg: f64) -> Self {
        Self {
            theta: PI / 2.0,
            phi: wrap_azimuth(azimuth_deg.to_radians()),
        }
    }

    pub fn from_unit_vector(v: [f64; 3]) -> Result<Self, ShError> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(ShError::NonFiniteAngle {
                theta: f64::NAN,
                phi: f64::NAN,
            });
        }
        let z = (v[2] / norm).clamp(-1.0, 1.0);
        Self::new(z.acos(), v[1].atan2(v[0]))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.phi.to_degrees()
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Cosine of the angle between two directions.
    pub fn cos_angle(&self, other: &Direction) -> f64 {
        let a = self.unit_vector();
        let b = other.unit_vector();
        (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0)
    }

    /// Rotates about the z axis.
    pub fn rotated(&self, angle_deg: f64) -> Direction {
        Direction {
            theta: self.theta,
            phi: wrap_azimuth(self.phi + angle_deg.to_radians()),
        }
    }

    /// Adds azimuth/elevation offsets in degrees. The polar angle is clamped
    /// at the poles.
    pub fn offset(&self, d_azimuth_deg: f64, d_theta_deg: f64) -> Direction {
        Direction {
            theta: (self.theta + d_theta_deg.to_radians()).clamp(0.0, PI),
            phi: wrap_azimuth(self.phi + d_azimuth_deg.to_radians()),
        }
    }
}

/// Rotates every direction about z by `angle_deg`.
pub fn rotate_azimuth(dirs: &[Direction], angle_deg: f64) -> Vec<Direction> {
    dirs.iter().map(|d| d.rotated(angle_deg)).collect()
}

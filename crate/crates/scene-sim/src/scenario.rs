use sh_core::Direction;

use crate::SimError;

/// One source in a shoebox room, observed by a head-worn array placed at
/// `array_position`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub room_dims: [f64; 3],
    pub t60: f64,
    pub array_position: [f64; 3],
    pub source_distance: f64,
    /// Source direction as seen from the array center.
    pub source_direction: Direction,
    pub source_signal: Vec<f64>,
    pub fs: f64,
    pub duration: f64,
    pub head_rotation_deg: f64,
    /// `f64::INFINITY` disables sensor noise.
    pub snr_db: f64,
}

impl Scenario {
    pub fn source_position(&self) -> [f64; 3] {
        let u = self.source_direction.unit_vector();
        std::array::from_fn(|i| self.array_position[i] + self.source_distance * u[i])
    }

    pub fn volume(&self) -> f64 {
        self.room_dims.iter().product()
    }

    pub fn surface(&self) -> f64 {
        let [x, y, z] = self.room_dims;
        2.0 * (x * y + x * z + y * z)
    }

    /// The source signal cut or zero-padded to `duration`.
    pub fn signal(&self) -> Vec<f64> {
        let len = (self.duration * self.fs).round() as usize;
        let mut s = self.source_signal.clone();
        s.resize(len, 0.0);
        s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.room_dims.iter().any(|&d| !(d > 0.0)) {
            return Err(SimError::DegenerateRoom(self.room_dims));
        }
        if !(self.t60 > 0.0) {
            return Err(SimError::InvalidT60(self.t60));
        }
        if !(self.duration > 0.0) {
            return Err(SimError::InvalidDuration(self.duration));
        }
        if !(self.source_distance > 0.0) {
            return Err(SimError::InvalidDistance(self.source_distance));
        }
        let inside = |p: &[f64; 3]| (0..3).all(|i| p[i] > 0.0 && p[i] < self.room_dims[i]);
        if !inside(&self.array_position) {
            return Err(SimError::OutsideRoom {
                what: "array",
                position: self.array_position,
            });
        }
        let src = self.source_position();
        if !inside(&src) {
            return Err(SimError::OutsideRoom {
                what: "source",
                position: src,
            });
        }
        Ok(())
    }
}

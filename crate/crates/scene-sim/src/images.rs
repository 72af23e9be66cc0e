use std::f64::consts::PI;

use sh_core::{Direction, SPEED_OF_SOUND};

use crate::{Scenario, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageSource {
    /// Arrival direction at the array center.
    pub direction: Direction,
    /// Propagation delay in seconds.
    pub delay: f64,
    pub gain: f64,
    /// Number of wall reflections.
    pub order: usize,
}

/// Image sources sorted by delay; entry 0 is the direct path.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSourceSet {
    pub entries: Vec<ImageSource>,
    pub speed_of_sound: f64,
}

impl ImageSourceSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn direct(&self) -> Option<&ImageSource> {
        self.entries.first()
    }

    /// Expresses all directions in a frame rotated by `angle_deg` in
    /// azimuth, i.e. applies `phi -> phi - angle`.
    pub fn in_rotated_frame(&self, angle_deg: f64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            e.direction = e.direction.rotated(-angle_deg);
        }
        out
    }

    pub fn max_delay(&self) -> f64 {
        self.entries.iter().map(|e| e.delay).fold(0.0, f64::max)
    }

    /// Scales every gain by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.entries.iter_mut().for_each(|e| e.gain *= factor);
        out
    }
}

/// Wall reflection coefficient from Sabine's formula with uniform
/// absorption, clamped to `[0, 1]`.
pub fn reflection_coefficient(scn: &Scenario) -> f64 {
    let alpha = (0.161 * scn.volume() / (scn.surface() * scn.t60)).clamp(0.0, 1.0);
    (1.0 - alpha).sqrt()
}

/// Smallest order covering propagation paths up to `t60` seconds, capped
/// at 40.
pub fn default_max_order(scn: &Scenario) -> usize {
    let min_dim = scn.room_dims.iter().cloned().fold(f64::INFINITY, f64::min);
    let reach = SPEED_OF_SOUND * scn.t60;
    ((reach / min_dim).ceil() as usize + 1).min(40)
}

/// All images up to `max_order` reflections (Allen–Berkley construction).
pub fn image_sources(scn: &Scenario, max_order: usize) -> Result<ImageSourceSet, SimError> {
    scn.validate()?;
    let beta = reflection_coefficient(scn);
    let src = scn.source_position();
    let rcv = scn.array_position;
    let dims = scn.room_dims;
    let n = max_order as i64;
    let mut entries = Vec::new();

    // per axis: (reflection count, image coordinate)
    let axis = |a: usize| {
        let mut v = Vec::new();
        for q in -n..=n {
            for u in 0..2i64 {
                let count = (q - u).unsigned_abs() + q.unsigned_abs();
                if count as i64 <= n {
                    let x = (1 - 2 * u) as f64 * src[a] + 2.0 * q as f64 * dims[a];
                    v.push((count as usize, x));
                }
            }
        }
        v
    };
    let (ax, ay, az) = (axis(0), axis(1), axis(2));
    for &(cx, x) in &ax {
        for &(cy, y) in &ay {
            if cx + cy > max_order {
                continue;
            }
            for &(cz, z) in &az {
                let order = cx + cy + cz;
                if order > max_order {
                    continue;
                }
                let d = [x - rcv[0], y - rcv[1], z - rcv[2]];
                let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
                let unit = [d[0] / dist, d[1] / dist, d[2] / dist];
                let gain = if order == 0 { 1.0 } else { beta.powi(order as i32) } / (4.0 * PI * dist);
                entries.push(ImageSource {
                    direction: Direction::from_unit_vector(unit)?,
                    delay: dist / SPEED_OF_SOUND,
                    gain,
                    order,
                });
            }
        }
    }
    // the direct path has order 0 and the shortest delay
    entries.sort_by(|a, b| a.order.min(1).cmp(&b.order.min(1)).then(a.delay.total_cmp(&b.delay)));
    Ok(ImageSourceSet {
        entries,
        speed_of_sound: SPEED_OF_SOUND,
    })
}

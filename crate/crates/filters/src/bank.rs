use std::fmt;
use std::str::FromStr;

use ndarray::Array3;
use num_complex::Complex64;
use sh_core::Direction;
use spectral::TimeFreqSignal;

use crate::{CVector, FilterError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bsm,
    Com,
    Dbsm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bsm => "BSM",
            Method::Com => "COM",
            Method::Dbsm => "DBSM",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "").as_str() {
            "BSM" => Ok(Method::Bsm),
            "COM" | "COMPASS" | "COMPASSBSM" => Ok(Method::Com),
            "DBSM" => Ok(Method::Dbsm),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DesignMeta {
    pub snr: Option<f64>,
    pub sigma_n2: Option<f64>,
    pub doa: Vec<Direction>,
    /// Total magnitude-fit iterations over all bins and ears.
    pub magls_iterations: usize,
    /// Bins where the magnitude fit hit the iteration cap.
    pub unconverged_bins: usize,
}

/// Per-bin filters for both ears; the ear signal is `c^H x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinauralFilterBank {
    pub method: Method,
    pub freqs: Vec<f64>,
    pub left: Vec<CVector>,
    pub right: Vec<CVector>,
    pub magls_cutoff: f64,
    pub meta: DesignMeta,
}

impl BinauralFilterBank {
    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn num_mics(&self) -> usize {
        self.left.first().map_or(0, |c| c.len())
    }

    pub fn filter(&self, ear: usize, bin: usize) -> &CVector {
        if ear == 0 {
            &self.left[bin]
        } else {
            &self.right[bin]
        }
    }

    /// `(c_l^H v, c_r^H v)` for an array response `v` at `bin`.
    pub fn response(&self, bin: usize, v: &CVector) -> [Complex64; 2] {
        [self.left[bin].dotc(v), self.right[bin].dotc(v)]
    }

    /// Renders binaural STFT frames from an array capture.
    pub fn apply(&self, tf: &TimeFreqSignal) -> Result<TimeFreqSignal, FilterError> {
        let (frames, bins, m) = tf.frames.dim();
        if bins != self.len() || m != self.num_mics() {
            return Err(FilterError::Shape(format!(
                "capture has {bins} bins x {m} channels, bank has {} x {}",
                self.len(),
                self.num_mics()
            )));
        }
        let mut out = Array3::zeros((frames, bins, 2));
        for k in 0..bins {
            for (ear, c) in [&self.left[k], &self.right[k]].into_iter().enumerate() {
                for t in 0..frames {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..m {
                        acc += c[i].conj() * tf.frames[(t, k, i)];
                    }
                    out[(t, k, ear)] = acc;
                }
            }
        }
        Ok(tf.with_frames(out))
    }
}

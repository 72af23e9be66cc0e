use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use ndarray::Array2;
use sh_core::{Direction, HrtfSet};

use crate::config::SAMPLE_RATE;
use crate::io::{read_wav_f32, write_wav};

pub const DEFAULT_HEAD_RADIUS_MM: f64 = 87.5;

/// Loads an HRTF set from an HRIR-grid directory, or builds the analytic
/// rigid-sphere head from `analytic-sphere[(radius_mm[, left_az, right_az])]`.
pub fn load_hrtf(spec: &str) -> Result<HrtfSet> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("analytic-sphere") {
        let args: Vec<f64> = match rest.trim() {
            "" => Vec::new(),
            r => r
                .strip_prefix('(')
                .and_then(|r| r.strip_suffix(')'))
                .with_context(|| format!("malformed analytic HRTF spec {spec:?}"))?
                .split(',')
                .map(|a| a.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("malformed analytic HRTF spec {spec:?}"))?,
        };
        let (radius_mm, ears) = match args.as_slice() {
            [] => (DEFAULT_HEAD_RADIUS_MM, [90.0, -90.0]),
            [a] => (*a, [90.0, -90.0]),
            [a, l, r] => (*a, [*l, *r]),
            _ => bail!("analytic-sphere takes a radius in mm and optionally both ear azimuths"),
        };
        return Ok(HrtfSet::analytic_sphere(radius_mm / 1000.0, ears, SAMPLE_RATE)?);
    }
    load_hrir_dir(Path::new(spec))
}

fn load_hrir_dir(dir: &Path) -> Result<HrtfSet> {
    let mut reader = csv::Reader::from_path(dir.join("directions.csv"))
        .with_context(|| format!("reading {}/directions.csv", dir.display()))?;
    let mut grid = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        ensure!(row.len() == 2, "directions.csv row {}: expected azimuth_deg,elevation_deg", i + 1);
        let az: f64 = row[0].trim().parse()?;
        let theta: f64 = row[1].trim().parse()?;
        grid.push(Direction::from_degrees(az, theta)?);
    }
    let (left, fs_l) = read_wav_f32(&dir.join("hrir_left.wav")).context("left HRIRs")?;
    let (right, fs_r) = read_wav_f32(&dir.join("hrir_right.wav")).context("right HRIRs")?;
    ensure!(fs_l == fs_r, "HRIR sample rates differ ({fs_l} vs {fs_r})");
    ensure!(
        left.len() == grid.len() && right.len() == grid.len(),
        "{} directions but {} left / {} right channels",
        grid.len(),
        left.len(),
        right.len()
    );
    Ok(HrtfSet::measured(grid, left, right, fs_l)?)
}

/// Writes `set` in the HRIR-grid layout under `dir`.
pub fn save_hrtf(set: &HrtfSet, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("directions.csv"))?;
    w.write_record(["azimuth_deg", "elevation_deg"])?;
    for d in set.grid() {
        w.write_record([d.azimuth_deg().to_string(), d.theta_deg().to_string()])?;
    }
    w.flush()?;
    for (name, irs) in [("hrir_left.wav", set.left()), ("hrir_right.wav", set.right())] {
        let block = Array2::from_shape_fn((irs.len(), set.ir_len()), |(d, t)| irs[d][t] as f64);
        write_wav(&dir.join(name), &block, set.fs(), 1.0)?;
    }
    Ok(())
}

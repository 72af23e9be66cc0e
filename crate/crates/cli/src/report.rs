use std::path::Path;

use anyhow::Result;
use filters::Method;
use metrics::DirectionalErrors;

use crate::config::{ExperimentConfig, MethodChoice};
use crate::pipeline::{CueRow, ScenarioRun};

const PROVENANCE: [&str; 6] = ["scenario", "method", "rotation_deg", "doa_err_az_deg", "doa_err_theta_deg", "seed"];

fn provenance(cfg: &ExperimentConfig, method: &str) -> Vec<String> {
    vec![
        cfg.scenario_id(),
        method.to_owned(),
        cfg.rotation_deg.to_string(),
        cfg.doa_error_deg[0].to_string(),
        cfg.doa_error_deg[1].to_string(),
        cfg.seed.to_string(),
    ]
}

fn header(extra: &[&str]) -> Vec<String> {
    PROVENANCE.iter().chain(extra).map(|s| s.to_string()).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-bin NMSE of every method, one row per (method, bin).
pub fn write_nmse_csv(path: &Path, cfg: &ExperimentConfig, run: &ScenarioRun) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(&[
        "freq_hz",
        "nmse_left_db",
        "nmse_right_db",
        "diffuse_nmse_left_db",
        "diffuse_nmse_right_db",
    ]))?;
    for res in &run.results {
        let r = &res.report;
        let diffuse = |ear: usize, k: usize| opt(r.diffuse_nmse_db.as_ref().map(|d| d[ear][k]));
        for (k, f) in r.freqs.iter().enumerate() {
            let mut row = provenance(cfg, &res.method.to_string());
            row.extend([f.to_string(), opt(r.nmse_db[0][k]), opt(r.nmse_db[1][k]), diffuse(0, k), diffuse(1, k)]);
            w.write_record(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Binaural-cue rows from a sweep or off-source analysis.
pub fn write_cues_csv(path: &Path, cfg: &ExperimentConfig, rows: &[CueRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(&[
        "source_az_deg",
        "eval_az_deg",
        "eval_theta_deg",
        "itd_us",
        "itd_ref_us",
        "itd_err_us",
        "ild_db",
        "ild_ref_db",
        "ild_err_db",
        "itd_above_jnd",
        "ild_above_jnd",
    ]))?;
    for r in rows {
        let c = &r.cues;
        let mut row = provenance(cfg, &r.method.to_string());
        row.extend([
            r.source_azimuth_deg.to_string(),
            c.direction.azimuth_deg().to_string(),
            c.direction.theta_deg().to_string(),
            (c.itd * 1e6).to_string(),
            (c.itd_ref * 1e6).to_string(),
            (c.itd_error * 1e6).to_string(),
            c.ild.to_string(),
            c.ild_ref.to_string(),
            c.ild_error.to_string(),
            c.itd_audible().to_string(),
            c.ild_audible().to_string(),
        ]);
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Azimuth x frequency directional-error surfaces.
pub fn write_dirmap_csv(path: &Path, cfg: &ExperimentConfig, maps: &[(Method, DirectionalErrors)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header(&["freq_hz", "azimuth_deg", "err_left", "err_right"]))?;
    for (method, map) in maps {
        for (k, f) in map.freqs.iter().enumerate() {
            for (d, dir) in map.directions.iter().enumerate() {
                let mut row = provenance(cfg, &method.to_string());
                row.extend([
                    f.to_string(),
                    dir.azimuth_deg().to_string(),
                    map.values[(k, d, 0)].to_string(),
                    map.values[(k, d, 1)].to_string(),
                ]);
                w.write_record(row)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-method means of the numeric columns of a report CSV.
pub fn summarize_csv(path: &Path) -> Result<Vec<(String, Vec<(String, f64)>)>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let method_col = headers.iter().position(|h| h == "method");
    let skip: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| PROVENANCE.contains(h) || h.ends_with("_deg") || *h == "freq_hz")
        .map(|(i, _)| i)
        .collect();
    let mut groups: Vec<(String, Vec<(f64, usize)>)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let method = method_col.map(|i| rec[i].to_string()).unwrap_or_default();
        let idx = match groups.iter().position(|(m, _)| *m == method) {
            Some(i) => i,
            None => {
                groups.push((method, vec![(0.0, 0); headers.len()]));
                groups.len() - 1
            }
        };
        for (i, field) in rec.iter().enumerate() {
            if skip.contains(&i) {
                continue;
            }
            let value = match field {
                "true" => Some(1.0),
                "false" => Some(0.0),
                f => f.parse::<f64>().ok().filter(|v| v.is_finite()),
            };
            if let Some(v) = value {
                groups[idx].1[i].0 += v;
                groups[idx].1[i].1 += 1;
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|(m, acc)| {
            let cols = acc
                .iter()
                .enumerate()
                .filter(|(_, (_, n))| *n > 0)
                .map(|(i, (sum, n))| (headers[i].to_string(), sum / *n as f64))
                .collect();
            (m, cols)
        })
        .collect())
}

/// Mean ILD error per method over `rows`.
pub fn mean_ild_error(rows: &[CueRow], method: MethodChoice) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter(|r| r.method == method).map(|r| r.cues.ild_error).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

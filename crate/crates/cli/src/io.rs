use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use filters::{BinauralFilterBank, CVector, DesignMeta, Method};
use hound::{SampleFormat, WavReader, WavSpec, WavWriter};
use ndarray::Array2;
use num_complex::Complex64;

/// Peak level of written binaural audio, dBFS.
pub const OUTPUT_PEAK_DBFS: f64 = -3.0;

/// Gain that brings the largest absolute sample over `signals` to
/// [`OUTPUT_PEAK_DBFS`]; 1 for silence.
pub fn normalization_gain<'a>(signals: impl IntoIterator<Item = &'a Array2<f64>>) -> f64 {
    let peak = signals
        .into_iter()
        .flat_map(|s| s.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        10f64.powf(OUTPUT_PEAK_DBFS / 20.0) / peak
    } else {
        1.0
    }
}

/// Writes `[channels, samples]` as 32-bit float WAV, scaled by `gain`.
pub fn write_wav(path: &Path, signals: &Array2<f64>, fs: f64, gain: f64) -> Result<()> {
    let channels = u16::try_from(signals.nrows()).context("too many channels for WAV")?;
    let spec = WavSpec {
        channels,
        sample_rate: fs.round() as u32,
        bits_per_sample: 32,
        sample_format: SampleFormat::Float,
    };
    let mut w = WavWriter::create(path, spec).with_context(|| format!("creating {}", path.display()))?;
    for t in 0..signals.ncols() {
        for ch in 0..signals.nrows() {
            w.write_sample((signals[(ch, t)] * gain) as f32)?;
        }
    }
    w.finalize()?;
    Ok(())
}

/// Reads a WAV file as `[channels, samples]` and its sample rate.
pub fn read_wav(path: &Path) -> Result<(Array2<f64>, f64)> {
    let (channels, fs) = read_wav_f32(path)?;
    let n = channels.first().map_or(0, Vec::len);
    let out = Array2::from_shape_fn((channels.len(), n), |(c, t)| channels[c][t] as f64);
    Ok((out, fs))
}

/// Per-channel samples without conversion, so float files round-trip exactly.
pub(crate) fn read_wav_f32(path: &Path) -> Result<(Vec<Vec<f32>>, f64)> {
    let reader = WavReader::open(path).with_context(|| format!("opening {}", path.display()))?;
    let spec = reader.spec();
    let nch = spec.channels as usize;
    let interleaved: Vec<f32> = match spec.sample_format {
        SampleFormat::Float => reader.into_samples::<f32>().collect::<Result<_, _>>()?,
        SampleFormat::Int => {
            let scale = 1.0 / (1u64 << (spec.bits_per_sample - 1)) as f32;
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| v as f32 * scale))
                .collect::<Result<_, _>>()?
        }
    };
    ensure!(interleaved.len() % nch == 0, "{}: truncated frame", path.display());
    let frames = interleaved.len() / nch;
    let mut out = vec![Vec::with_capacity(frames); nch];
    for frame in interleaved.chunks_exact(nch) {
        for (c, &v) in frame.iter().enumerate() {
            out[c].push(v);
        }
    }
    Ok((out, spec.sample_rate as f64))
}

pub fn read_mono_wav(path: &Path) -> Result<Vec<f64>> {
    let (signals, _) = read_wav(path)?;
    ensure!(signals.nrows() == 1, "{}: expected a mono file, found {} channels", path.display(), signals.nrows());
    Ok(signals.row(0).to_vec())
}

/// Filter bank as CSV: a `#` metadata line, then one row per
/// `(freq_hz, ear, mic)` with the real and imaginary coefficient parts.
pub fn write_bank(path: &Path, bank: &BinauralFilterBank) -> Result<()> {
    let mut f = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(
        f,
        "# method={} magls_cutoff={} mics={} bins={}",
        bank.method,
        bank.magls_cutoff,
        bank.num_mics(),
        bank.len()
    )?;
    writeln!(f, "freq_hz,ear,mic,re,im")?;
    for (k, freq) in bank.freqs.iter().enumerate() {
        for (ear, name) in ["left", "right"].iter().enumerate() {
            for (m, c) in bank.filter(ear, k).iter().enumerate() {
                writeln!(f, "{freq},{name},{m},{:e},{:e}", c.re, c.im)?;
            }
        }
    }
    f.flush()?;
    Ok(())
}

pub fn read_bank(path: &Path) -> Result<BinauralFilterBank> {
    let file = BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?);
    let mut lines = file.lines();
    let meta = lines.next().context("empty bank file")??;
    let field = |key: &str| -> Result<String> {
        meta.trim_start_matches('#')
            .split_whitespace()
            .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .map(str::to_owned)
            .with_context(|| format!("bank metadata lacks {key}"))
    };
    let method: Method = field("method")?.parse().map_err(anyhow::Error::msg)?;
    let cutoff: f64 = field("magls_cutoff")?.parse()?;
    let mics: usize = field("mics")?.parse()?;
    let bins: usize = field("bins")?.parse()?;
    lines.next().context("bank file lacks a header")??;
    let mut freqs = Vec::with_capacity(bins);
    let mut ears = [vec![CVector::zeros(mics); bins], vec![CVector::zeros(mics); bins]];
    for (i, line) in lines.enumerate() {
        let line = line?;
        let cols: Vec<&str> = line.split(',').collect();
        ensure!(cols.len() == 5, "bank line {}: expected 5 columns", i + 3);
        let k = i / (2 * mics);
        ensure!(k < bins, "bank has more rows than declared bins");
        let freq: f64 = cols[0].parse()?;
        if freqs.len() == k {
            freqs.push(freq);
        }
        let ear = match cols[1] {
            "left" => 0,
            "right" => 1,
            other => bail!("bank line {}: unknown ear {other:?}", i + 3),
        };
        let m: usize = cols[2].parse()?;
        ensure!(m < mics, "bank line {}: mic index {m} out of range", i + 3);
        ears[ear][k][m] = Complex64::new(cols[3].parse()?, cols[4].parse()?);
    }
    ensure!(freqs.len() == bins, "bank declares {bins} bins, found {}", freqs.len());
    let [left, right] = ears;
    Ok(BinauralFilterBank {
        method,
        freqs,
        left,
        right,
        magls_cutoff: cutoff,
        meta: DesignMeta::default(),
    })
}

//! Batch predictions from an external process.
//!
//! The command is split on whitespace and run as
//! `<command...> <request_dir> <response_dir>`. The request directory holds
//! `manifest.json` and `features.bin` in the dataset layout (no labels). The
//! command must write `probs_x.bin` (`n × S_x`) and `probs_y.bin`
//! (`n × S_y`), little-endian `f32`, row-major.
//!
//! Each row is accepted if every entry is finite and at least `-1e-6`, and
//! the row sums to 1 within `1e-4` after negatives are clipped to zero.
//! Accepted rows are renormalized.

use std::path::Path;
use std::process::Command;

use xlris_core::ProbabilityPair;

use crate::dataset::{DatasetManifest, FEATURES_FILE, MANIFEST_FILE};
use crate::error::{ExternalError, Result};
use crate::tensor;

pub const PROBS_X_FILE: &str = "probs_x.bin";
pub const PROBS_Y_FILE: &str = "probs_y.bin";
pub const NEGATIVE_CLIP: f32 = -1e-6;
pub const ROW_SUM_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct ExternalPredictor {
    program: String,
    args: Vec<String>,
}

impl ExternalPredictor {
    pub fn new(command: &str) -> Result<Self> {
        let mut parts = command.split_whitespace().map(String::from);
        let program = parts.next().ok_or(ExternalError::EmptyCommand)?;
        Ok(ExternalPredictor {
            program,
            args: parts.collect(),
        })
    }

    pub fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// One process invocation for the whole batch. `features` is
    /// `manifest.n_samples × Q × 2` interleaved values.
    pub fn predict_batch(&self, manifest: &DatasetManifest, features: &[f32]) -> Result<Vec<ProbabilityPair>> {
        let expected = manifest.n_samples * manifest.q * 2;
        if features.len() != expected {
            return Err(ExternalError::ShapeMismatch {
                file: FEATURES_FILE.into(),
                expected,
                got: features.len(),
            }
            .into());
        }
        let work = tempfile::tempdir()?;
        let request = work.path().join("request");
        let response = work.path().join("response");
        std::fs::create_dir(&request)?;
        std::fs::create_dir(&response)?;
        tensor::write_atomic(&request.join(FEATURES_FILE), &tensor::f32_bytes(features))?;
        tensor::write_atomic(&request.join(MANIFEST_FILE), manifest.to_json()?.as_bytes())?;

        log::debug!("running {} on {} samples", self.command_line(), manifest.n_samples);
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg(&request)
            .arg(&response)
            .output()
            .map_err(|source| ExternalError::Spawn {
                command: self.command_line(),
                source,
            })?;
        if !output.status.success() {
            return Err(ExternalError::NonZeroExit {
                command: self.command_line(),
                status: output.status.to_string(),
                stderr: String::from_utf8_lossy(&output.stderr).trim().to_string(),
            }
            .into());
        }
        read_response(&response, manifest.n_samples, manifest.s_x, manifest.s_y)
    }
}

/// Reads and validates a response directory.
pub fn read_response(dir: &Path, n: usize, s_x: usize, s_y: usize) -> Result<Vec<ProbabilityPair>> {
    let px = read_probability_rows(&dir.join(PROBS_X_FILE), n, s_x)?;
    let py = read_probability_rows(&dir.join(PROBS_Y_FILE), n, s_y)?;
    px.into_iter()
        .zip(py)
        .map(|(x, y)| Ok(ProbabilityPair::new(x, y)?))
        .collect()
}

pub fn read_probability_rows(path: &Path, rows: usize, cols: usize) -> Result<Vec<Vec<f64>>> {
    let file = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    if !path.is_file() {
        return Err(ExternalError::MissingFile(path.to_path_buf()).into());
    }
    let values = tensor::read_f32(path).map_err(|_| ExternalError::ShapeMismatch {
        file: file.clone(),
        expected: rows * cols * 4,
        got: std::fs::metadata(path).map(|m| m.len() as usize).unwrap_or(0),
    })?;
    if values.len() != rows * cols {
        return Err(ExternalError::ShapeMismatch {
            file,
            expected: rows * cols,
            got: values.len(),
        }
        .into());
    }
    if cols == 0 {
        return Ok(vec![Vec::new(); rows]);
    }
    values
        .chunks_exact(cols)
        .enumerate()
        .map(|(row, chunk)| normalize_row(&file, row, chunk))
        .collect()
}

fn normalize_row(file: &str, row: usize, chunk: &[f32]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(chunk.len());
    for &v in chunk {
        if !v.is_finite() || v < NEGATIVE_CLIP {
            return Err(ExternalError::InvalidEntry {
                file: file.into(),
                row,
                value: v,
            }
            .into());
        }
        out.push(f64::from(v.max(0.0)));
    }
    let sum: f64 = out.iter().sum();
    if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
        return Err(ExternalError::NotNormalized {
            file: file.into(),
            row,
            sum,
        }
        .into());
    }
    for v in &mut out {
        *v /= sum;
    }
    Ok(out)
}

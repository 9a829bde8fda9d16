//! Near-field codebook cache: `codebook.json` header plus `codewords.bin`
//! (`count × N × 2` little-endian `f32`, real then imaginary).
//!
//! Codewords are stored at single precision, so a reloaded codebook agrees
//! with a freshly built one to about 1e-7 per entry.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use xlris_core::codebook::CodewordMatrix;
use xlris_core::{ArrayGeometry, GridSpec, NearFieldCodebook, PhaseMode, Position3D};

use crate::error::{Result, SimError};
use crate::tensor;

pub const HEADER_FILE: &str = "codebook.json";
pub const CODEWORDS_FILE: &str = "codewords.bin";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookHeader {
    pub version: u32,
    pub count: usize,
    pub codeword_len: usize,
    pub grid: GridSpec,
    pub ris: ArrayGeometry,
    pub g_scatter: Position3D,
    pub user_height: f64,
    pub phase_mode: PhaseMode,
}

pub fn write_codebook(dir: &Path, codebook: &NearFieldCodebook, ris: &ArrayGeometry) -> Result<()> {
    if ris.len() != codebook.codewords().codeword_len() {
        return Err(SimError::Config("array geometry does not match the codebook".into()));
    }
    let header = CodebookHeader {
        version: 1,
        count: codebook.len(),
        codeword_len: ris.len(),
        grid: *codebook.grid(),
        ris: *ris,
        g_scatter: codebook.g_scatter(),
        user_height: codebook.user_height(),
        phase_mode: codebook.phase_mode(),
    };
    fs::create_dir_all(dir)?;
    let mut values = Vec::new();
    tensor::interleave(codebook.codewords().as_flat(), &mut values);
    tensor::write_atomic(&dir.join(CODEWORDS_FILE), &tensor::f32_bytes(&values))?;
    let mut json = serde_json::to_string_pretty(&header)?;
    json.push('\n');
    tensor::write_atomic(&dir.join(HEADER_FILE), json.as_bytes())?;
    Ok(())
}

pub fn read_codebook(dir: &Path) -> Result<(CodebookHeader, NearFieldCodebook)> {
    let header: CodebookHeader = serde_json::from_str(&fs::read_to_string(dir.join(HEADER_FILE))?)?;
    let values = tensor::read_f32(&dir.join(CODEWORDS_FILE))?;
    if values.len() != header.count * header.codeword_len * 2 {
        return Err(SimError::Format(format!(
            "{CODEWORDS_FILE} holds {} values, header implies {}",
            values.len(),
            header.count * header.codeword_len * 2
        )));
    }
    let matrix = CodewordMatrix::from_flat(header.codeword_len, tensor::deinterleave(&values))?;
    let codebook = NearFieldCodebook::from_parts(
        matrix,
        header.grid,
        header.g_scatter,
        header.user_height,
        header.phase_mode,
    )?;
    Ok((header, codebook))
}

//! Far-field DFT-grid and near-field position-grid codebooks.
//!
//! Codewords are stored conjugated, so a probe is the plain product
//! `codewordᵀ·steering`. Near-field indices are 1-based and y-major:
//! `s = (s_y − 1)·S_x + s_x`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::channel::{conj_vec, effective_near_field_steering, far_field_steering, PhaseMode};
use crate::config::GridSpec;
use crate::geometry::{ArrayGeometry, Position3D};
use crate::{Error, Result};

/// Contiguous codeword matrix, one row per codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct CodewordMatrix {
    len: usize,
    data: Vec<Complex64>,
}

impl CodewordMatrix {
    pub fn with_capacity(codeword_len: usize, count: usize) -> Self {
        CodewordMatrix {
            len: codeword_len,
            data: Vec::with_capacity(codeword_len * count),
        }
    }

    pub fn from_flat(codeword_len: usize, data: Vec<Complex64>) -> Result<Self> {
        if codeword_len == 0 || !data.len().is_multiple_of(codeword_len) {
            return Err(Error::LengthMismatch {
                expected: codeword_len,
                got: data.len(),
            });
        }
        Ok(CodewordMatrix {
            len: codeword_len,
            data,
        })
    }

    fn push(&mut self, codeword: &[Complex64]) {
        debug_assert_eq!(codeword.len(), self.len);
        self.data.extend_from_slice(codeword);
    }

    pub fn codeword_len(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.data.len() / self.len
    }

    /// 0-based row access.
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.len..(i + 1) * self.len]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[Complex64]> + '_ {
        self.data.chunks_exact(self.len)
    }

    pub fn as_flat(&self) -> &[Complex64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldCodebook {
    codewords: CodewordMatrix,
    /// `(θ, φ)` spatial-frequency pair per codeword.
    grid: Vec<(f64, f64)>,
}

/// Symmetric DFT grid `(2n − count − 1)/count`, `n = 1..=count`.
pub fn dft_grid(count: usize) -> Vec<f64> {
    (1..=count)
        .map(|n| (2.0 * n as f64 - count as f64 - 1.0) / count as f64)
        .collect()
}

impl FarFieldCodebook {
    /// `N₁·N₂` codewords, θ-major.
    pub fn build(geom: &ArrayGeometry) -> Result<Self> {
        geom.validate()?;
        let thetas = dft_grid(geom.n_rows);
        let phis = dft_grid(geom.n_cols);
        let mut codewords = CodewordMatrix::with_capacity(geom.len(), geom.len());
        let mut grid = Vec::with_capacity(geom.len());
        for &theta in &thetas {
            for &phi in &phis {
                codewords.push(&conj_vec(&far_field_steering(theta, phi, geom)?));
                grid.push((theta, phi));
            }
        }
        Ok(FarFieldCodebook { codewords, grid })
    }

    pub fn len(&self) -> usize {
        self.codewords.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn codewords(&self) -> &CodewordMatrix {
        &self.codewords
    }

    pub fn grid(&self) -> &[(f64, f64)] {
        &self.grid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NearFieldCodebook {
    codewords: CodewordMatrix,
    grid: GridSpec,
    g_scatter: Position3D,
    user_height: f64,
    phase_mode: PhaseMode,
}

impl NearFieldCodebook {
    pub fn build(
        grid: &GridSpec,
        geom: &ArrayGeometry,
        g_scatter: &Position3D,
        user_height: f64,
        phase_mode: PhaseMode,
    ) -> Result<Self> {
        grid.validate()?;
        geom.validate()?;
        let mut codewords = CodewordMatrix::with_capacity(geom.len(), grid.len());
        for s_y in 1..=grid.s_y_count {
            for s_x in 1..=grid.s_x_count {
                let (x, y) = grid.point(s_x, s_y);
                let target = Position3D::new(x, y, user_height);
                let steering = effective_near_field_steering(&target, g_scatter, geom, phase_mode)?;
                codewords.push(&conj_vec(&steering));
            }
        }
        Ok(NearFieldCodebook {
            codewords,
            grid: *grid,
            g_scatter: *g_scatter,
            user_height,
            phase_mode,
        })
    }

    /// Reassembles a codebook from stored parts (e.g. a cache file).
    pub fn from_parts(
        codewords: CodewordMatrix,
        grid: GridSpec,
        g_scatter: Position3D,
        user_height: f64,
        phase_mode: PhaseMode,
    ) -> Result<Self> {
        grid.validate()?;
        if codewords.count() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: codewords.count(),
            });
        }
        Ok(NearFieldCodebook {
            codewords,
            grid,
            g_scatter,
            user_height,
            phase_mode,
        })
    }

    pub fn len(&self) -> usize {
        self.codewords.count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn s_x_count(&self) -> usize {
        self.grid.s_x_count
    }

    pub fn s_y_count(&self) -> usize {
        self.grid.s_y_count
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn g_scatter(&self) -> Position3D {
        self.g_scatter
    }

    pub fn user_height(&self) -> f64 {
        self.user_height
    }

    pub fn phase_mode(&self) -> PhaseMode {
        self.phase_mode
    }

    pub fn codewords(&self) -> &CodewordMatrix {
        &self.codewords
    }

    /// Codeword at 1-based flat index `s`.
    pub fn codeword(&self, s: usize) -> Result<&[Complex64]> {
        if s == 0 || s > self.len() {
            return Err(Error::domain("flat index out of range"));
        }
        Ok(self.codewords.row(s - 1))
    }

    /// Position a codeword focuses on.
    pub fn position(&self, s: usize) -> Result<Position3D> {
        let (s_x, s_y) = index_pair(s, self.grid.s_x_count, self.grid.s_y_count)?;
        let (x, y) = self.grid.point(s_x, s_y);
        Ok(Position3D::new(x, y, self.user_height))
    }

    pub fn flat_index(&self, s_x: usize, s_y: usize) -> Result<usize> {
        flat_index(s_x, s_y, self.grid.s_x_count, self.grid.s_y_count)
    }

    pub fn index_pair(&self, s: usize) -> Result<(usize, usize)> {
        index_pair(s, self.grid.s_x_count, self.grid.s_y_count)
    }
}

/// `(s_y − 1)·S_x + s_x`, all 1-based.
pub fn flat_index(s_x: usize, s_y: usize, s_x_count: usize, s_y_count: usize) -> Result<usize> {
    if s_x == 0 || s_x > s_x_count || s_y == 0 || s_y > s_y_count {
        return Err(Error::domain("grid index out of range"));
    }
    Ok((s_y - 1) * s_x_count + s_x)
}

/// Inverse of [`flat_index`].
pub fn index_pair(s: usize, s_x_count: usize, s_y_count: usize) -> Result<(usize, usize)> {
    if s == 0 || s > s_x_count * s_y_count {
        return Err(Error::domain("flat index out of range"));
    }
    Ok(((s - 1) % s_x_count + 1, (s - 1) / s_x_count + 1))
}

/// Strictly increasing 1-based flat indices probed in the first phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeSet {
    flat_indices: Vec<usize>,
}

impl ProbeSet {
    /// Every `interval`-th codeword: `{D, 2D, …, ⌊total/D⌋·D}`.
    pub fn subsample(total: usize, interval: usize) -> Result<Self> {
        if interval == 0 {
            return Err(Error::domain("sampling interval must be at least 1"));
        }
        if interval > total {
            log::warn!("sampling interval {interval} exceeds codebook size {total}; probe set is empty");
        }
        let count = total / interval;
        Ok(ProbeSet {
            flat_indices: (1..=count).map(|i| i * interval).collect(),
        })
    }

    pub fn from_indices(flat_indices: Vec<usize>, total: usize) -> Result<Self> {
        let increasing = flat_indices.windows(2).all(|w| w[0] < w[1]);
        let in_range = flat_indices.iter().all(|&s| s >= 1 && s <= total);
        if !increasing || !in_range {
            return Err(Error::domain(
                "probe indices must be strictly increasing and within the codebook",
            ));
        }
        Ok(ProbeSet { flat_indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.flat_indices
    }

    pub fn len(&self) -> usize {
        self.flat_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat_indices.is_empty()
    }

    /// Position of `s` within the probe order, if probed.
    pub fn position_of(&self, s: usize) -> Option<usize> {
        self.flat_indices.binary_search(&s).ok()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.position_of(s).is_some()
    }
}

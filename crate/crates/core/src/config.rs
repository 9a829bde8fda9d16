//! System parameters shared by the channel sampler and the codebooks.

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::channel::PhaseMode;
use crate::geometry::{ArrayGeometry, Position3D};
use crate::{Error, Result};

/// Open rectangle in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !ok || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(Error::config("region is empty"));
        }
        Ok(())
    }
}

/// Sampling grid of the near-field codebook.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GridSpec {
    pub s_x_count: usize,
    pub s_y_count: usize,
    pub delta_x: f64,
    pub delta_y: f64,
    pub x_min: f64,
    pub y_min: f64,
}

impl GridSpec {
    /// Grid of cell centres tiling `region` with the given pitch.
    pub fn covering(region: &Region, delta_x: f64, delta_y: f64) -> Result<Self> {
        region.validate()?;
        if !(delta_x > 0.0 && delta_y > 0.0) {
            return Err(Error::config("grid pitch must be positive"));
        }
        let s_x_count = libm::round((region.x_max - region.x_min) / delta_x) as usize;
        let s_y_count = libm::round((region.y_max - region.y_min) / delta_y) as usize;
        let grid = GridSpec {
            s_x_count,
            s_y_count,
            delta_x,
            delta_y,
            x_min: region.x_min + delta_x / 2.0,
            y_min: region.y_min + delta_y / 2.0,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_x_count == 0 || self.s_y_count == 0 {
            return Err(Error::config("grid needs at least one point per axis"));
        }
        if !(self.delta_x > 0.0 && self.delta_y > 0.0) {
            return Err(Error::config("grid pitch must be positive"));
        }
        if !(self.x_min.is_finite() && self.y_min.is_finite()) {
            return Err(Error::config("grid origin must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.s_x_count * self.s_y_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of 1-based grid point `(s_x, s_y)`.
    pub fn point(&self, s_x: usize, s_y: usize) -> (f64, f64) {
        (
            self.x_min + (s_x as f64 - 1.0) * self.delta_x,
            self.y_min + (s_y as f64 - 1.0) * self.delta_y,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SystemConfig {
    pub carrier_hz: f64,
    pub ris: ArrayGeometry,
    pub bs: ArrayGeometry,
    pub bs_centre: Position3D,
    /// BS-side scatter of the strongest path; equal to `bs_centre` for a
    /// line-of-sight BS link.
    pub g_scatter: Position3D,
    pub user_region: Region,
    pub user_height: f64,
    /// Number of BS–RIS paths.
    pub paths_bs: usize,
    /// Number of RIS–user paths.
    pub paths_user: usize,
    pub strong_path_variance: f64,
    pub weak_path_variance: f64,
    pub grid: GridSpec,
    pub phase_mode: PhaseMode,
}

impl SystemConfig {
    /// Default system: 30 GHz, 512-element RIS and BS (16 × 32), users in
    /// x ∈ (−50, 50) m, y ∈ (−30, 30) m, 1 m codebook grid (100 × 60),
    /// three paths per hop, BS at (20, 20, 0) m.
    pub fn full() -> Self {
        let carrier_hz = 30e9;
        let ris = ArrayGeometry::half_wavelength(16, 32, carrier_hz).expect("valid");
        let region = Region {
            x_min: -50.0,
            x_max: 50.0,
            y_min: -30.0,
            y_max: 30.0,
        };
        let bs_centre = Position3D::new(20.0, 20.0, 0.0);
        SystemConfig {
            carrier_hz,
            ris,
            bs: ris,
            bs_centre,
            g_scatter: bs_centre,
            user_region: region,
            user_height: 0.0,
            paths_bs: 3,
            paths_user: 3,
            strong_path_variance: 1.0,
            weak_path_variance: 0.001,
            grid: GridSpec::covering(&region, 1.0, 1.0).expect("valid"),
            phase_mode: PhaseMode::Physical,
        }
    }

    /// Desk-scale system: 8 × 8 RIS and BS, 20 × 12 grid over
    /// x ∈ (−10, 10) m, y ∈ (0, 12) m.
    ///
    /// Users stay on the `y > 0` side: the panel lies in `y = 0`, so mirror
    /// positions `(x, ±y)` produce identical steering vectors.
    pub fn desk() -> Self {
        let carrier_hz = 30e9;
        let ris = ArrayGeometry::half_wavelength(8, 8, carrier_hz).expect("valid");
        let region = Region {
            x_min: -10.0,
            x_max: 10.0,
            y_min: 0.0,
            y_max: 12.0,
        };
        let bs_centre = Position3D::new(20.0, 20.0, 0.0);
        SystemConfig {
            carrier_hz,
            ris,
            bs: ris,
            bs_centre,
            g_scatter: bs_centre,
            user_region: region,
            user_height: 0.0,
            paths_bs: 3,
            paths_user: 3,
            strong_path_variance: 1.0,
            weak_path_variance: 0.001,
            grid: GridSpec::covering(&region, 1.0, 1.0).expect("valid"),
            phase_mode: PhaseMode::Physical,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ris.validate()?;
        self.bs.validate()?;
        self.user_region.validate()?;
        self.grid.validate()?;
        if self.paths_bs == 0 || self.paths_user == 0 {
            return Err(Error::config("path counts must be at least 1"));
        }
        if !(self.strong_path_variance >= 0.0 && self.weak_path_variance >= 0.0) {
            return Err(Error::config("path gain variances must be non-negative"));
        }
        if !(self.bs_centre.is_finite() && self.g_scatter.is_finite() && self.user_height.is_finite()) {
            return Err(Error::config("positions must be finite"));
        }
        Ok(())
    }
}

//! Panel layout for the RIS and the BS array.
//!
//! Panels lie in a plane parallel to x-z. Rows (index `n1`) step along z and
//! columns (index `n2`) step along x, so a row-major walk over `(n1, n2)`
//! matches the Kronecker ordering of the steering vectors.

use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Position3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3D {
    pub const ORIGIN: Position3D = Position3D { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position3D { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(&self, other: &Position3D) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        libm::sqrt(dx * dx + dy * dy + dz * dz)
    }

    pub fn offset(&self, by: &Position3D) -> Position3D {
        Position3D::new(self.x + by.x, self.y + by.y, self.z + by.z)
    }
}

/// A uniform planar array of `n_rows × n_cols` elements.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ArrayGeometry {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Element pitch in meters.
    pub spacing: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
}

impl ArrayGeometry {
    pub fn new(n_rows: usize, n_cols: usize, spacing: f64, wavelength: f64) -> Result<Self> {
        let geom = ArrayGeometry {
            n_rows,
            n_cols,
            spacing,
            wavelength,
        };
        geom.validate()?;
        Ok(geom)
    }

    /// Half-wavelength pitch at the given carrier frequency.
    pub fn half_wavelength(n_rows: usize, n_cols: usize, carrier_hz: f64) -> Result<Self> {
        if !(carrier_hz > 0.0 && carrier_hz.is_finite()) {
            return Err(Error::config("carrier frequency must be positive"));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        Self::new(n_rows, n_cols, wavelength / 2.0, wavelength)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::config("array needs at least one row and one column"));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::config("element spacing must be positive"));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::config("wavelength must be positive"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of element `(row, col)` relative to the panel centre.
    #[inline]
    pub fn element_offset(&self, row: usize, col: usize) -> Position3D {
        let row_c = (self.n_rows as f64 - 1.0) / 2.0;
        let col_c = (self.n_cols as f64 - 1.0) / 2.0;
        Position3D::new(
            (col as f64 - col_c) * self.spacing,
            0.0,
            (row as f64 - row_c) * self.spacing,
        )
    }

    /// Element positions of a panel centred at the origin, row-major.
    pub fn element_positions(&self) -> Vec<Position3D> {
        self.element_positions_at(&Position3D::ORIGIN)
    }

    /// Element positions of the same panel translated to `centre`.
    pub fn element_positions_at(&self, centre: &Position3D) -> Vec<Position3D> {
        let mut out = Vec::with_capacity(self.len());
        for row in 0..self.n_rows {
            for col in 0..self.n_cols {
                out.push(self.element_offset(row, col).offset(centre));
            }
        }
        out
    }

    /// Diagonal extent of the panel.
    pub fn aperture(&self) -> f64 {
        let h = (self.n_rows as f64 - 1.0) * self.spacing;
        let w = (self.n_cols as f64 - 1.0) * self.spacing;
        libm::sqrt(h * h + w * w)
    }

    pub fn rayleigh_distance(&self) -> f64 {
        rayleigh_distance(self.aperture(), self.wavelength)
    }
}

/// Near/far-field boundary `2·D²/λ`.
pub fn rayleigh_distance(aperture: f64, wavelength: f64) -> f64 {
    2.0 * aperture * aperture / wavelength
}

/// Point at `range` meters in the direction whose far-field steering vector
/// has spatial frequencies `(u, v)` (row axis, column axis), on the `y > 0`
/// side of the panel.
pub fn far_field_point(u: f64, v: f64, range: f64) -> Result<Position3D> {
    let rem = 1.0 - u * u - v * v;
    if !(rem >= -1e-12) {
        return Err(Error::domain("u² + v² must not exceed 1"));
    }
    let forward = libm::sqrt(rem.max(0.0));
    Ok(Position3D::new(-v * range, forward * range, -u * range))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAMBDA: f64 = 0.01;

    #[test]
    fn single_element_sits_at_origin() {
        let g = ArrayGeometry::new(1, 1, LAMBDA / 2.0, LAMBDA).unwrap();
        assert_eq!(g.element_positions(), vec![Position3D::ORIGIN]);
    }

    #[test]
    fn two_columns_straddle_origin() {
        let d = 0.005;
        let g = ArrayGeometry::new(1, 2, d, LAMBDA).unwrap();
        let p = g.element_positions();
        assert_eq!(
            p,
            vec![Position3D::new(-d / 2.0, 0.0, 0.0), Position3D::new(d / 2.0, 0.0, 0.0)]
        );
    }

    #[test]
    fn grid_is_centred() {
        for (r, c) in [(2, 2), (3, 5), (8, 8), (16, 32)] {
            let g = ArrayGeometry::new(r, c, 0.005, LAMBDA).unwrap();
            let p = g.element_positions();
            assert_eq!(p.len(), r * c);
            let (sx, sz) = p.iter().fold((0.0, 0.0), |(a, b), q| (a + q.x, b + q.z));
            let tol = 1e-12 * (r * c) as f64 * g.spacing;
            assert!(sx.abs() <= tol && sz.abs() <= tol);
            assert!(p.iter().all(|q| q.y == 0.0));
        }
    }

    #[test]
    fn pitch_along_axes() {
        let g = ArrayGeometry::new(3, 4, 0.005, LAMBDA).unwrap();
        let p = g.element_positions();
        let at = |r: usize, c: usize| p[r * 4 + c];
        // neighbours within a row differ along x only
        let (a, b) = (at(1, 1), at(1, 2));
        assert!(((b.x - a.x) - 0.005).abs() < 1e-15);
        assert_eq!(b.z, a.z);
        // neighbours within a column differ along z only
        let (a, b) = (at(0, 3), at(1, 3));
        assert!(((b.z - a.z) - 0.005).abs() < 1e-15);
        assert_eq!(b.x, a.x);
    }

    #[test]
    fn aperture_examples() {
        let d = 0.005;
        assert_eq!(ArrayGeometry::new(1, 1, d, LAMBDA).unwrap().aperture(), 0.0);
        assert!((ArrayGeometry::new(1, 2, d, LAMBDA).unwrap().aperture() - 0.005).abs() < 1e-15);
        let a = ArrayGeometry::new(8, 8, d, LAMBDA).unwrap().aperture();
        assert!((a - core::f64::consts::SQRT_2 * 0.035).abs() < 1e-15);
        assert!((a - 0.04950).abs() < 1e-5);
    }

    #[test]
    fn rayleigh_examples() {
        assert_eq!(rayleigh_distance(0.0, LAMBDA), 0.0);
        assert!((rayleigh_distance(1.0, 0.01) - 200.0).abs() < 1e-9);
        let z1 = rayleigh_distance(0.3, 0.01);
        let z2 = rayleigh_distance(0.6, 0.01);
        assert!((z2 - 4.0 * z1).abs() < 1e-12);
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(ArrayGeometry::new(0, 4, 0.005, LAMBDA).is_err());
        assert!(ArrayGeometry::new(4, 4, 0.0, LAMBDA).is_err());
        assert!(ArrayGeometry::new(4, 4, 0.005, -1.0).is_err());
        let g = ArrayGeometry::half_wavelength(8, 8, 30e9).unwrap();
        assert!((g.spacing - g.wavelength / 2.0).abs() < 1e-18);
    }

    proptest::proptest! {
        #[test]
        fn rayleigh_monotone(a in 0.0f64..10.0, b in 0.0f64..10.0, lambda in 1e-3f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            proptest::prop_assert!(rayleigh_distance(lo, lambda) <= rayleigh_distance(hi, lambda));
        }
    }
}

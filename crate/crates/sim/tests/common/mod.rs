//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use xlris_core::SystemConfig;

const C: f64 = 299_792_458.0;

/// Steering vector from raw geometry: panel in the x-z plane, rows along z,
/// half-wavelength spacing, physical wavenumber.
pub fn raw_steering(
    user: (f64, f64, f64),
    scatter: (f64, f64, f64),
    rows: usize,
    cols: usize,
    f: f64,
) -> Vec<(f64, f64)> {
    let lambda = C / f;
    let d = lambda / 2.0;
    let k = 2.0 * PI / lambda;
    let amp = 1.0 / ((rows * cols) as f64).sqrt();
    let dist = |p: (f64, f64, f64), ex: f64, ez: f64| ((p.0 - ex).powi(2) + p.1.powi(2) + (p.2 - ez).powi(2)).sqrt();
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let ex = (c as f64 - (cols as f64 - 1.0) / 2.0) * d;
            let ez = (r as f64 - (rows as f64 - 1.0) / 2.0) * d;
            let phase = -k * (dist(user, ex, ez) - dist(scatter, ex, ez));
            out.push((amp * phase.cos(), amp * phase.sin()));
        }
    }
    out
}

/// 1-based `(s_x, s_y)` of the grid point whose conjugate steering vector
/// collects the most power from `target`; first wins on ties.
pub fn brute_force_label(sys: &SystemConfig, target: &[(f64, f64)]) -> (u32, u32) {
    let g = &sys.g_scatter;
    let mut best = ((0, 0), f64::NEG_INFINITY);
    for iy in 0..sys.grid.s_y_count {
        for ix in 0..sys.grid.s_x_count {
            let x = sys.grid.x_min + ix as f64 * sys.grid.delta_x;
            let y = sys.grid.y_min + iy as f64 * sys.grid.delta_y;
            let a = raw_steering(
                (x, y, sys.user_height),
                (g.x, g.y, g.z),
                sys.ris.n_rows,
                sys.ris.n_cols,
                sys.carrier_hz,
            );
            let (mut re, mut im) = (0.0, 0.0);
            for (w, t) in a.iter().zip(target) {
                re += w.0 * t.0 + w.1 * t.1;
                im += w.0 * t.1 - w.1 * t.0;
            }
            let p = re * re + im * im;
            if p > best.1 {
                best = ((ix as u32 + 1, iy as u32 + 1), p);
            }
        }
    }
    best.0
}

pub fn write_f32(path: &Path, values: &[f32]) {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(path, bytes).unwrap();
}

/// Shell script that records its arguments and copies prepared response
/// files into the response directory.
pub fn stub_predictor(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("stub.sh");
    std::fs::write(&path, format!("#!/bin/sh\nset -e\n{body}\n")).unwrap();
    path
}

/// Uniform rows, `n × width`.
pub fn uniform_rows(n: usize, width: usize) -> Vec<f32> {
    vec![1.0 / width as f32; n * width]
}

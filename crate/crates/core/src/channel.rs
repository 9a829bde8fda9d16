//! Steering vectors, cascaded channel realizations and the pilot model.
//!
//! All steering vectors carry the `1/√N` amplitude per entry. A received
//! pilot through codeword `w` is `Σ gain·(wᵀ·steering) + n` with unit pilot.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::geometry::{ArrayGeometry, Position3D};
use crate::{Error, Result};

/// Wavenumber used in the spherical-wave phase term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PhaseMode {
    /// `κ = 2π/λ`.
    #[default]
    Physical,
    /// `κ = 2π·d/λ`, the prefactor as literally printed alongside the
    /// near-field steering vector.
    PaperLiteral,
}

impl PhaseMode {
    pub fn wavenumber(self, geom: &ArrayGeometry) -> f64 {
        match self {
            PhaseMode::Physical => 2.0 * PI / geom.wavelength,
            PhaseMode::PaperLiteral => 2.0 * PI * geom.spacing / geom.wavelength,
        }
    }
}

/// Bilinear product `aᵀ·b` (no conjugation).
#[inline]
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

pub fn conj_vec(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|c| c.conj()).collect()
}

#[inline]
fn unit_phasor(amplitude: f64, phase: f64) -> Complex64 {
    let (s, c) = libm::sincos(phase);
    Complex64::new(amplitude * c, amplitude * s)
}

/// Far-field steering vector for spatial frequencies `u` (rows) and `v`
/// (columns): entry `(n1, n2)` is `e^{−jπ(u·n1 + v·n2)}/√N`.
pub fn far_field_steering(u: f64, v: f64, geom: &ArrayGeometry) -> Result<Vec<Complex64>> {
    if !(-1.0..=1.0).contains(&u) || !(-1.0..=1.0).contains(&v) {
        return Err(Error::domain("spatial frequencies must lie in [-1, 1]"));
    }
    let amp = 1.0 / libm::sqrt(geom.len() as f64);
    let mut out = Vec::with_capacity(geom.len());
    for n1 in 0..geom.n_rows {
        for n2 in 0..geom.n_cols {
            out.push(unit_phasor(amp, -PI * (u * n1 as f64 + v * n2 as f64)));
        }
    }
    Ok(out)
}

/// Spherical-wave steering vector of an RIS centred at the origin towards
/// `target`.
pub fn near_field_steering(target: &Position3D, geom: &ArrayGeometry, mode: PhaseMode) -> Result<Vec<Complex64>> {
    near_field_steering_at(target, &Position3D::ORIGIN, geom, mode)
}

/// As [`near_field_steering`] for a panel centred at `centre`.
pub fn near_field_steering_at(
    target: &Position3D,
    centre: &Position3D,
    geom: &ArrayGeometry,
    mode: PhaseMode,
) -> Result<Vec<Complex64>> {
    if !target.is_finite() {
        return Err(Error::domain("target position must be finite"));
    }
    let kappa = mode.wavenumber(geom);
    let amp = 1.0 / libm::sqrt(geom.len() as f64);
    let mut out = Vec::with_capacity(geom.len());
    for n1 in 0..geom.n_rows {
        for n2 in 0..geom.n_cols {
            let element = geom.element_offset(n1, n2).offset(centre);
            out.push(unit_phasor(amp, -kappa * element.distance(target)));
        }
    }
    Ok(out)
}

/// Effective steering vector of the cascade BS-side scatter → RIS → user:
/// entry `(n1, n2)` is `e^{−jκ(D^user − D^scatter)}/√N`.
pub fn effective_near_field_steering(
    user: &Position3D,
    g_scatter: &Position3D,
    geom: &ArrayGeometry,
    mode: PhaseMode,
) -> Result<Vec<Complex64>> {
    if !user.is_finite() || !g_scatter.is_finite() {
        return Err(Error::domain("positions must be finite"));
    }
    let kappa = mode.wavenumber(geom);
    let amp = 1.0 / libm::sqrt(geom.len() as f64);
    let mut out = Vec::with_capacity(geom.len());
    for n1 in 0..geom.n_rows {
        for n2 in 0..geom.n_cols {
            let element = geom.element_offset(n1, n2);
            let diff = element.distance(user) - element.distance(g_scatter);
            out.push(unit_phasor(amp, -kappa * diff));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathTerm {
    pub gain: Complex64,
    pub steering: Vec<Complex64>,
}

/// One channel draw: a non-empty list of path terms, strongest first.
///
/// The superposition `Σ gain·steering` is cached at construction so that a
/// probe costs one inner product regardless of the path count.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    terms: Vec<PathTerm>,
    composite: Vec<Complex64>,
    user_position: Position3D,
    true_optimal_flat_index: Option<usize>,
}

impl ChannelRealization {
    pub fn new(terms: Vec<PathTerm>, user_position: Position3D) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::domain("channel needs at least one path"))?;
        let n = first.steering.len();
        if let Some(bad) = terms.iter().find(|t| t.steering.len() != n) {
            return Err(Error::LengthMismatch {
                expected: n,
                got: bad.steering.len(),
            });
        }
        let mut composite = alloc::vec![Complex64::new(0.0, 0.0); n];
        for term in &terms {
            for (acc, s) in composite.iter_mut().zip(&term.steering) {
                *acc += term.gain * s;
            }
        }
        Ok(ChannelRealization {
            terms,
            composite,
            user_position,
            true_optimal_flat_index: None,
        })
    }

    /// Single line-of-sight term, mostly for tests and calibration.
    pub fn single_path(gain: Complex64, steering: Vec<Complex64>, user_position: Position3D) -> Result<Self> {
        Self::new(alloc::vec![PathTerm { gain, steering }], user_position)
    }

    pub fn terms(&self) -> &[PathTerm] {
        &self.terms
    }

    pub fn strongest(&self) -> &PathTerm {
        &self.terms[0]
    }

    pub fn composite(&self) -> &[Complex64] {
        &self.composite
    }

    pub fn user_position(&self) -> Position3D {
        self.user_position
    }

    pub fn element_count(&self) -> usize {
        self.composite.len()
    }

    pub fn true_optimal_flat_index(&self) -> Option<usize> {
        self.true_optimal_flat_index
    }

    pub fn set_true_optimal_flat_index(&mut self, index: usize) {
        self.true_optimal_flat_index = Some(index);
    }
}

/// Receiver noise: circularly-symmetric complex Gaussian of variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma2: f64,
}

impl NoiseModel {
    pub const NOISELESS: NoiseModel = NoiseModel { sigma2: 0.0 };

    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 >= 0.0 && sigma2.is_finite()) {
            return Err(Error::domain("noise variance must be finite and non-negative"));
        }
        Ok(NoiseModel { sigma2 })
    }

    /// Noise variance for a transmit SNR in dB with unit pilot power.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(libm::pow(10.0, -snr_db / 10.0))
    }

    pub fn snr_db(&self) -> f64 {
        -10.0 * libm::log10(self.sigma2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        if self.sigma2 == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let scale = libm::sqrt(self.sigma2 / 2.0);
        complex_gaussian(rng, scale)
    }
}

/// `CN(0, 2·scale²)`: independent real and imaginary parts with std `scale`.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(scale * re, scale * im)
}

fn complex_normal_var<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    complex_gaussian(rng, libm::sqrt(variance / 2.0))
}

/// One pilot slot through `codeword`.
pub fn received_signal<R: Rng + ?Sized>(
    codeword: &[Complex64],
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Complex64> {
    if codeword.len() != chan.element_count() {
        return Err(Error::LengthMismatch {
            expected: chan.element_count(),
            got: codeword.len(),
        });
    }
    Ok(dot(codeword, chan.composite()) + noise.sample(rng))
}

/// One pilot slot per codeword, independent noise per slot.
pub fn receive_batch<'a, R, I>(
    codewords: I,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<Complex64>>
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = &'a [Complex64]>,
{
    codewords
        .into_iter()
        .map(|cw| received_signal(cw, chan, noise, rng))
        .collect()
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Where the BS sees path `scatter` arrive from: the scatter itself, or the
/// RIS when the scatter coincides with the BS (line of sight).
fn bs_arrival_point(scatter: &Position3D, bs_centre: &Position3D) -> Position3D {
    if scatter.distance(bs_centre) < 1e-9 {
        Position3D::ORIGIN
    } else {
        *scatter
    }
}

/// Draws a cascaded multipath channel.
///
/// The strongest pair uses `g_scatter` and the user position with gain
/// `√(M·N²/(L_G·L_k))·α^G₁·α^k₁`. Every other `(l₁, l₂)` pair contributes an
/// explicit weak term; weak scatters are uniform over the user region at user
/// height, and BS-side paths other than the first are attenuated by
/// `|a(l₁)ᴴ·a(1)|`, the response of a combiner aligned with path 1.
///
/// Draw order: user x, user y, BS-side gains `α^G`, user-side gains `α^k`,
/// then weak BS-side scatters and weak user-side scatters (x, y each).
pub fn sample_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Result<ChannelRealization> {
    cfg.validate()?;
    let region = &cfg.user_region;
    let user = Position3D::new(
        uniform_in(rng, region.x_min, region.x_max),
        uniform_in(rng, region.y_min, region.y_max),
        cfg.user_height,
    );

    let draw_gains = |rng: &mut R, count: usize| -> Vec<Complex64> {
        (0..count)
            .map(|l| {
                let var = if l == 0 {
                    cfg.strong_path_variance
                } else {
                    cfg.weak_path_variance
                };
                complex_normal_var(rng, var)
            })
            .collect()
    };
    let alpha_bs = draw_gains(rng, cfg.paths_bs);
    let alpha_user = draw_gains(rng, cfg.paths_user);

    let mut draw_scatters = |count: usize, first: Position3D| -> Vec<Position3D> {
        let mut out = Vec::with_capacity(count);
        out.push(first);
        for _ in 1..count {
            out.push(Position3D::new(
                uniform_in(rng, region.x_min, region.x_max),
                uniform_in(rng, region.y_min, region.y_max),
                cfg.user_height,
            ));
        }
        out
    };
    let bs_scatters = draw_scatters(cfg.paths_bs, cfg.g_scatter);
    let user_scatters = draw_scatters(cfg.paths_user, user);

    let attenuation = bs_attenuation(cfg, &bs_scatters)?;

    let m = cfg.bs.len() as f64;
    let n = cfg.ris.len() as f64;
    let scale = libm::sqrt(m * n * n / (cfg.paths_bs * cfg.paths_user) as f64);

    let mut terms = Vec::with_capacity(cfg.paths_bs * cfg.paths_user);
    for (l1, g_point) in bs_scatters.iter().enumerate() {
        for (l2, u_point) in user_scatters.iter().enumerate() {
            let gain = alpha_bs[l1] * alpha_user[l2] * (scale * attenuation[l1]);
            let steering = effective_near_field_steering(u_point, g_point, &cfg.ris, cfg.phase_mode)?;
            terms.push(PathTerm { gain, steering });
        }
    }
    ChannelRealization::new(terms, user)
}

fn bs_attenuation(cfg: &SystemConfig, bs_scatters: &[Position3D]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(bs_scatters.len());
    out.push(1.0);
    if bs_scatters.len() == 1 {
        return Ok(out);
    }
    let reference = near_field_steering_at(
        &bs_arrival_point(&bs_scatters[0], &cfg.bs_centre),
        &cfg.bs_centre,
        &cfg.bs,
        cfg.phase_mode,
    )?;
    for scatter in &bs_scatters[1..] {
        let a = near_field_steering_at(
            &bs_arrival_point(scatter, &cfg.bs_centre),
            &cfg.bs_centre,
            &cfg.bs,
            cfg.phase_mode,
        )?;
        let inner = a
            .iter()
            .zip(&reference)
            .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y);
        out.push(inner.norm());
    }
    Ok(out)
}

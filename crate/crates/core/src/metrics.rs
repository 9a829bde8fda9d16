//! Achievable rate, normalized beam gain and effective rate.
//!
//! All three are evaluated against the strongest-path steering vector only.

use num_complex::Complex64;

use crate::channel::{dot, ChannelRealization};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    /// bits/s/Hz
    pub achievable_rate: f64,
    pub normalized_gain: f64,
    /// bits/s/Hz
    pub effective_rate: f64,
    pub probes_used: usize,
}

/// `|wᵀ·c̄|²` against the strongest path.
pub fn beam_power(codeword: &[Complex64], chan: &ChannelRealization) -> Result<f64> {
    let steering = &chan.strongest().steering;
    if codeword.len() != steering.len() {
        return Err(Error::LengthMismatch {
            expected: steering.len(),
            got: codeword.len(),
        });
    }
    Ok(dot(codeword, steering).norm_sqr())
}

/// `log₂(1 + |wᵀ·c̄|²/σ²)`.
pub fn achievable_rate(codeword: &[Complex64], chan: &ChannelRealization, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::domain("noise variance must be positive"));
    }
    Ok(libm::log2(1.0 + beam_power(codeword, chan)? / sigma2))
}

/// `|ŵᵀ·c̄|² / |w*ᵀ·c̄|²`.
pub fn normalized_gain(chosen: &[Complex64], true_opt: &[Complex64], chan: &ChannelRealization) -> Result<f64> {
    let denom = beam_power(true_opt, chan)?;
    // beam power is at most 1; anything this small is rounding residue
    if !(denom > 1e-24) {
        return Err(Error::domain("reference codeword has zero gain"));
    }
    Ok(beam_power(chosen, chan)? / denom)
}

/// `(1 − T_tra/T_tot)·rate`.
pub fn effective_rate(rate: f64, training_slots: usize, total_slots: usize) -> Result<f64> {
    if total_slots == 0 {
        return Err(Error::domain("coherence interval must contain at least one slot"));
    }
    if training_slots > total_slots {
        return Err(Error::domain("training slots exceed the coherence interval"));
    }
    Ok((1.0 - training_slots as f64 / total_slots as f64) * rate)
}

//! Beam training schemes.
//!
//! Every argmax in this module breaks ties toward the smallest index. The
//! learned schemes are split into a probe phase and a decision phase so that
//! callers can batch the predictor across many trials; the one-shot functions
//! ([`fbt`], [`pnbt`], [`improved_pnbt`]) just chain the two.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{dot, receive_batch, received_signal, ChannelRealization, NoiseModel};
use crate::codebook::{flat_index, FarFieldCodebook, NearFieldCodebook, ProbeSet};
use crate::{Error, Result};

/// Tolerance on the sum of each probability vector.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-5;

/// Predicted distributions over the x-axis and y-axis grid indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityPair {
    p_x: Vec<f64>,
    p_y: Vec<f64>,
}

impl ProbabilityPair {
    pub fn new(p_x: Vec<f64>, p_y: Vec<f64>) -> Result<Self> {
        check_distribution(&p_x, "x")?;
        check_distribution(&p_y, "y")?;
        Ok(ProbabilityPair { p_x, p_y })
    }

    pub fn uniform(s_x_count: usize, s_y_count: usize) -> Self {
        ProbabilityPair {
            p_x: alloc::vec![1.0 / s_x_count as f64; s_x_count],
            p_y: alloc::vec![1.0 / s_y_count as f64; s_y_count],
        }
    }

    /// Probability one at the 1-based label `(s_x, s_y)`.
    pub fn one_hot(s_x_count: usize, s_y_count: usize, label: (usize, usize)) -> Result<Self> {
        if label.0 == 0 || label.0 > s_x_count || label.1 == 0 || label.1 > s_y_count {
            return Err(Error::domain("label out of range"));
        }
        let mut p_x = alloc::vec![0.0; s_x_count];
        let mut p_y = alloc::vec![0.0; s_y_count];
        p_x[label.0 - 1] = 1.0;
        p_y[label.1 - 1] = 1.0;
        Ok(ProbabilityPair { p_x, p_y })
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    pub fn check_shape(&self, s_x_count: usize, s_y_count: usize) -> Result<()> {
        if self.p_x.len() != s_x_count || self.p_y.len() != s_y_count {
            return Err(Error::Predictor(alloc::format!(
                "expected distributions of length ({s_x_count}, {s_y_count}), got ({}, {})",
                self.p_x.len(),
                self.p_y.len()
            )));
        }
        Ok(())
    }
}

fn check_distribution(p: &[f64], axis: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Predictor(alloc::format!("{axis}-axis distribution is empty")));
    }
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Predictor(alloc::format!(
            "{axis}-axis distribution has a negative or non-finite entry"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
        return Err(Error::Predictor(alloc::format!(
            "{axis}-axis distribution sums to {sum}"
        )));
    }
    Ok(())
}

/// Maps a received-signal vector to grid-axis distributions.
///
/// Implementations must be stateless: the same input always yields the same
/// output, and concurrent calls are allowed.
pub trait Predictor {
    fn predict(&self, features: &[Complex64]) -> Result<ProbabilityPair>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, features: &[Complex64]) -> Result<ProbabilityPair> {
        (**self).predict(features)
    }
}

/// Ignores its input and returns uniform distributions.
#[derive(Debug, Clone, Copy)]
pub struct UniformPredictor {
    pub s_x_count: usize,
    pub s_y_count: usize,
}

impl Predictor for UniformPredictor {
    fn predict(&self, _features: &[Complex64]) -> Result<ProbabilityPair> {
        Ok(ProbabilityPair::uniform(self.s_x_count, self.s_y_count))
    }
}

/// Test double that always points at a known label.
#[derive(Debug, Clone, Copy)]
pub struct OneHotOracle {
    pub s_x_count: usize,
    pub s_y_count: usize,
    pub label: (usize, usize),
}

impl OneHotOracle {
    /// Oracle for the channel's true optimum under `codebook`.
    pub fn for_channel(codebook: &NearFieldCodebook, chan: &ChannelRealization) -> Result<Self> {
        let s = true_optimal(codebook, chan)?;
        Ok(OneHotOracle {
            s_x_count: codebook.s_x_count(),
            s_y_count: codebook.s_y_count(),
            label: codebook.index_pair(s)?,
        })
    }
}

impl Predictor for OneHotOracle {
    fn predict(&self, _features: &[Complex64]) -> Result<ProbabilityPair> {
        ProbabilityPair::one_hot(self.s_x_count, self.s_y_count, self.label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    /// 1-based flat index into the near-field codebook.
    pub chosen_flat_index: usize,
    /// Pilot slots consumed.
    pub probes_used: usize,
    pub auxiliary: Option<ProbabilityPair>,
}

/// 0-based argmax of `|values|`; `None` when empty.
pub fn argmax_magnitude(values: &[Complex64]) -> Option<usize> {
    argmax_by_key(values.iter().map(|v| v.norm_sqr()))
}

/// 0-based argmax with ties toward the first occurrence.
pub fn argmax_by_key<I: IntoIterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(v > b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// 1-based indices of the `k` largest entries, descending by value, equal
/// values in ascending index order.
pub fn top_indices(p: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > p.len() {
        return Err(Error::domain("k must lie in 1..=len"));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    // stable sort keeps ascending index among equal values
    order.sort_by(|&a, &b| p[b].partial_cmp(&p[a]).unwrap_or(core::cmp::Ordering::Equal));
    Ok(order.into_iter().take(k).map(|i| i + 1).collect())
}

/// Probes every codeword and keeps the strongest.
pub fn exhaustive_sweep<R: Rng + ?Sized>(
    codebook: &NearFieldCodebook,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeResult> {
    if codebook.is_empty() {
        return Err(Error::domain("codebook is empty"));
    }
    let y = receive_batch(codebook.codewords().rows(), chan, noise, rng)?;
    let best = argmax_magnitude(&y).expect("non-empty");
    Ok(SchemeResult {
        chosen_flat_index: best + 1,
        probes_used: y.len(),
        auxiliary: None,
    })
}

/// Best codeword for the strongest path, noiseless.
pub fn true_optimal(codebook: &NearFieldCodebook, chan: &ChannelRealization) -> Result<usize> {
    let steering = &chan.strongest().steering;
    if steering.len() != codebook.codewords().codeword_len() {
        return Err(Error::LengthMismatch {
            expected: codebook.codewords().codeword_len(),
            got: steering.len(),
        });
    }
    argmax_by_key(codebook.codewords().rows().map(|cw| dot(cw, steering).norm_sqr()))
        .map(|i| i + 1)
        .ok_or_else(|| Error::domain("codebook is empty"))
}

/// Inclusive 1-based bounds of coarse cell `j` (0-based) along one axis.
fn cell_bounds(j: usize, factor: usize, count: usize) -> (usize, usize) {
    let lo = j * factor + 1;
    (lo, ((j + 1) * factor).min(count))
}

fn cell_representative(j: usize, factor: usize, count: usize) -> usize {
    let (lo, hi) = cell_bounds(j, factor, count);
    lo + (hi - lo) / 2
}

/// Two-level search: sweep one codeword per `c × c` cell (the cell centre),
/// then sweep every codeword of the winning cell. Cells at the grid edge are
/// clipped when `c` does not divide the grid size. `c = 1` is the exhaustive
/// sweep.
pub fn hierarchical_search<R: Rng + ?Sized>(
    codebook: &NearFieldCodebook,
    factor: usize,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeResult> {
    if factor == 0 {
        return Err(Error::domain("coarsening factor must be at least 1"));
    }
    if factor == 1 {
        return exhaustive_sweep(codebook, chan, noise, rng);
    }
    let (sx, sy) = (codebook.s_x_count(), codebook.s_y_count());
    let cells_x = sx.div_ceil(factor);
    let cells_y = sy.div_ceil(factor);

    let mut coarse = Vec::with_capacity(cells_x * cells_y);
    for jy in 0..cells_y {
        for jx in 0..cells_x {
            let s = flat_index(
                cell_representative(jx, factor, sx),
                cell_representative(jy, factor, sy),
                sx,
                sy,
            )?;
            coarse.push((jx, jy, s));
        }
    }
    let mut coarse_y = Vec::with_capacity(coarse.len());
    for &(_, _, s) in &coarse {
        coarse_y.push(received_signal(codebook.codeword(s)?, chan, noise, rng)?);
    }
    let (jx, jy, _) = coarse[argmax_magnitude(&coarse_y).expect("non-empty")];

    let (x_lo, x_hi) = cell_bounds(jx, factor, sx);
    let (y_lo, y_hi) = cell_bounds(jy, factor, sy);
    let mut fine = Vec::new();
    let mut fine_y = Vec::new();
    for s_y in y_lo..=y_hi {
        for s_x in x_lo..=x_hi {
            let s = flat_index(s_x, s_y, sx, sy)?;
            fine.push(s);
            fine_y.push(received_signal(codebook.codeword(s)?, chan, noise, rng)?);
        }
    }
    let best = fine[argmax_magnitude(&fine_y).expect("non-empty cell")];
    Ok(SchemeResult {
        chosen_flat_index: best,
        probes_used: coarse.len() + fine.len(),
        auxiliary: None,
    })
}

/// First phase of FBT: one slot per far-field codeword.
pub fn far_field_probe<R: Rng + ?Sized>(
    far: &FarFieldCodebook,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    receive_batch(far.codewords().rows(), chan, noise, rng)
}

/// First phase of PNBT: one slot per probed near-field codeword.
pub fn partial_probe<R: Rng + ?Sized>(
    near: &NearFieldCodebook,
    probes: &ProbeSet,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    probes
        .indices()
        .iter()
        .map(|&s| received_signal(near.codeword(s)?, chan, noise, rng))
        .collect()
}

/// Most likely grid point under `probs`, as a flat index.
pub fn select_from_probabilities(near: &NearFieldCodebook, probs: &ProbabilityPair) -> Result<usize> {
    probs.check_shape(near.s_x_count(), near.s_y_count())?;
    let s_x = argmax_by_key(probs.p_x().iter().copied()).expect("non-empty") + 1;
    let s_y = argmax_by_key(probs.p_y().iter().copied()).expect("non-empty") + 1;
    near.flat_index(s_x, s_y)
}

/// Far-field beam-based training: probe all far-field codewords, let the
/// predictor pick the near-field grid point.
pub fn fbt<P: Predictor + ?Sized, R: Rng + ?Sized>(
    far: &FarFieldCodebook,
    near: &NearFieldCodebook,
    predictor: &P,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeResult> {
    let y = far_field_probe(far, chan, noise, rng)?;
    let probs = predictor.predict(&y)?;
    let chosen = select_from_probabilities(near, &probs)?;
    Ok(SchemeResult {
        chosen_flat_index: chosen,
        probes_used: y.len(),
        auxiliary: Some(probs),
    })
}

/// Partial near-field beam-based training.
pub fn pnbt<P: Predictor + ?Sized, R: Rng + ?Sized>(
    near: &NearFieldCodebook,
    probes: &ProbeSet,
    predictor: &P,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeResult> {
    let y = partial_probe(near, probes, chan, noise, rng)?;
    let probs = predictor.predict(&y)?;
    let chosen = select_from_probabilities(near, &probs)?;
    Ok(SchemeResult {
        chosen_flat_index: chosen,
        probes_used: y.len(),
        auxiliary: Some(probs),
    })
}

/// Candidate bookkeeping of the refinement phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePlan {
    /// Cross product of the top-K x indices and top-L y indices, ascending.
    pub candidates: Vec<usize>,
    /// Candidates not covered by the first phase, ascending.
    pub reprobe: Vec<usize>,
    /// Candidates already measured in the first phase, ascending.
    pub reused: Vec<usize>,
}

impl CandidatePlan {
    pub fn new(
        near: &NearFieldCodebook,
        probes: &ProbeSet,
        probs: &ProbabilityPair,
        k: usize,
        l: usize,
    ) -> Result<Self> {
        probs.check_shape(near.s_x_count(), near.s_y_count())?;
        Self::from_parts(near.s_x_count(), probes, probs, k, l)
    }

    /// Plan from raw grid width; `probs` must already match the grid.
    pub fn from_parts(
        s_x_count: usize,
        probes: &ProbeSet,
        probs: &ProbabilityPair,
        k: usize,
        l: usize,
    ) -> Result<Self> {
        let top_x = top_indices(probs.p_x(), k)?;
        let top_y = top_indices(probs.p_y(), l)?;
        let mut candidates: Vec<usize> = top_y
            .iter()
            .flat_map(|&gamma| top_x.iter().map(move |&sigma| (gamma - 1) * s_x_count + sigma))
            .collect();
        candidates.sort_unstable();
        let (reused, reprobe) = candidates.iter().partition(|&&s| probes.contains(s));
        Ok(CandidatePlan {
            candidates,
            reprobe,
            reused,
        })
    }
}

/// Second phase of improved PNBT: probe the unmeasured candidates and pick
/// the strongest candidate, reusing first-phase measurements where present.
/// Returns the chosen flat index and the number of extra slots.
pub fn refine_candidates<R: Rng + ?Sized>(
    near: &NearFieldCodebook,
    probes: &ProbeSet,
    first_phase: &[Complex64],
    plan: &CandidatePlan,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<(usize, usize)> {
    if first_phase.len() != probes.len() {
        return Err(Error::LengthMismatch {
            expected: probes.len(),
            got: first_phase.len(),
        });
    }
    let mut fresh = Vec::with_capacity(plan.reprobe.len());
    for &s in &plan.reprobe {
        fresh.push((s, received_signal(near.codeword(s)?, chan, noise, rng)?));
    }
    let measured = plan.candidates.iter().map(|&s| match probes.position_of(s) {
        Some(pos) => first_phase[pos].norm_sqr(),
        None => {
            let i = fresh
                .binary_search_by_key(&s, |(t, _)| *t)
                .expect("candidate was re-probed");
            fresh[i].1.norm_sqr()
        }
    });
    let best = argmax_by_key(measured).ok_or_else(|| Error::domain("empty candidate set"))?;
    Ok((plan.candidates[best], fresh.len()))
}

/// Improved PNBT: PNBT followed by a re-probe of the top `K × L` candidates.
#[allow(clippy::too_many_arguments)]
pub fn improved_pnbt<P: Predictor + ?Sized, R: Rng + ?Sized>(
    near: &NearFieldCodebook,
    probes: &ProbeSet,
    predictor: &P,
    k: usize,
    l: usize,
    chan: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<SchemeResult> {
    if k == 0 || k > near.s_x_count() || l == 0 || l > near.s_y_count() {
        return Err(Error::domain("K and L must lie within the grid dimensions"));
    }
    let y = partial_probe(near, probes, chan, noise, rng)?;
    let probs = predictor.predict(&y)?;
    let plan = CandidatePlan::new(near, probes, &probs, k, l)?;
    let (chosen, extra) = refine_candidates(near, probes, &y, &plan, chan, noise, rng)?;
    Ok(SchemeResult {
        chosen_flat_index: chosen,
        probes_used: y.len() + extra,
        auxiliary: Some(probs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::effective_near_field_steering;
    use crate::config::GridSpec;
    use crate::geometry::{ArrayGeometry, Position3D};
    use crate::rng::derive_rng;
    use crate::PhaseMode;

    fn desk_codebook(sx: usize, sy: usize) -> NearFieldCodebook {
        let g = ArrayGeometry::half_wavelength(8, 8, 30e9).unwrap();
        let grid = GridSpec {
            s_x_count: sx,
            s_y_count: sy,
            delta_x: 1.0,
            delta_y: 1.0,
            x_min: -(sx as f64) / 2.0 + 0.5,
            y_min: 0.5,
        };
        NearFieldCodebook::build(&grid, &g, &Position3D::new(20.0, 20.0, 0.0), 0.0, PhaseMode::Physical).unwrap()
    }

    fn on_grid_channel(cb: &NearFieldCodebook, s: usize) -> ChannelRealization {
        let g = ArrayGeometry::half_wavelength(8, 8, 30e9).unwrap();
        let p = cb.position(s).unwrap();
        let steer = effective_near_field_steering(&p, &cb.g_scatter(), &g, PhaseMode::Physical).unwrap();
        ChannelRealization::single_path(Complex64::new(1.0, 0.0), steer, p).unwrap()
    }

    #[test]
    fn top_indices_examples() {
        assert_eq!(top_indices(&[0.1, 0.7, 0.2], 2).unwrap(), vec![2, 3]);
        assert_eq!(top_indices(&[0.25; 4], 2).unwrap(), vec![1, 2]);
        let mut all = top_indices(&[0.3, 0.1, 0.4, 0.2], 4).unwrap();
        assert_eq!(all, vec![3, 1, 4, 2]);
        all.sort();
        assert_eq!(all, vec![1, 2, 3, 4]);
        assert!(top_indices(&[0.5, 0.5], 0).is_err());
        assert!(top_indices(&[0.5, 0.5], 3).is_err());
    }

    #[test]
    fn argmax_ties_go_to_first() {
        assert_eq!(argmax_by_key([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_by_key(core::iter::empty()), None);
    }

    #[test]
    fn probability_pair_validation() {
        assert!(ProbabilityPair::new(vec![0.5, 0.5], vec![1.0]).is_ok());
        assert!(ProbabilityPair::new(vec![0.5, 0.5 + 0.9e-5], vec![1.0]).is_ok());
        assert!(ProbabilityPair::new(vec![0.5, 0.6], vec![1.0]).is_err());
        assert!(ProbabilityPair::new(vec![1.1, -0.1], vec![1.0]).is_err());
        assert!(ProbabilityPair::new(vec![], vec![1.0]).is_err());
        assert!(ProbabilityPair::one_hot(3, 2, (4, 1)).is_err());
    }

    #[test]
    fn exhaustive_on_grid_point_finds_it() {
        let cb = desk_codebook(6, 4);
        for s in [1, 7, 24] {
            let chan = on_grid_channel(&cb, s);
            let r = exhaustive_sweep(&cb, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
            assert_eq!(r.chosen_flat_index, s);
            assert_eq!(r.probes_used, 24);
            assert_eq!(true_optimal(&cb, &chan).unwrap(), s);
        }
    }

    #[test]
    fn single_codeword_sweep() {
        let cb = desk_codebook(1, 1);
        let chan = on_grid_channel(&cb, 1);
        let r = exhaustive_sweep(&cb, &chan, &NoiseModel::new(1.0).unwrap(), &mut derive_rng(0, 0)).unwrap();
        assert_eq!((r.chosen_flat_index, r.probes_used), (1, 1));
    }

    #[test]
    fn hierarchical_counts() {
        let cb = desk_codebook(4, 4);
        let chan = on_grid_channel(&cb, 6);
        let r = hierarchical_search(&cb, 2, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
        assert_eq!(r.probes_used, 8);
        let r1 = hierarchical_search(&cb, 1, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
        let ex = exhaustive_sweep(&cb, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
        assert_eq!(r1, ex);
        // clipped edge cells: 5 x 3 grid, c = 2 -> 3 x 2 coarse cells
        let cb = desk_codebook(5, 3);
        let chan = on_grid_channel(&cb, 15);
        let r = hierarchical_search(&cb, 2, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
        assert_eq!(r.probes_used, 6 + 1);
        assert!(hierarchical_search(&cb, 0, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).is_err());
    }

    #[test]
    fn uniform_stub_picks_first_point() {
        let cb = desk_codebook(6, 4);
        let far = FarFieldCodebook::build(&ArrayGeometry::half_wavelength(8, 8, 30e9).unwrap()).unwrap();
        let chan = on_grid_channel(&cb, 10);
        let stub = UniformPredictor {
            s_x_count: 6,
            s_y_count: 4,
        };
        let r = fbt(&far, &cb, &stub, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
        assert_eq!(r.chosen_flat_index, 1);
        assert_eq!(r.probes_used, 64);
    }

    #[test]
    fn shape_mismatch_is_contract_error() {
        let cb = desk_codebook(6, 4);
        let chan = on_grid_channel(&cb, 10);
        let probes = ProbeSet::subsample(cb.len(), 3).unwrap();
        let stub = UniformPredictor {
            s_x_count: 5,
            s_y_count: 4,
        };
        let err = pnbt(
            &cb,
            &probes,
            &stub,
            &chan,
            &NoiseModel::NOISELESS,
            &mut derive_rng(0, 0),
        );
        assert!(matches!(err, Err(Error::Predictor(_))));
    }

    #[test]
    fn oracle_pnbt_and_fbt_agree() {
        let cb = desk_codebook(6, 4);
        let far = FarFieldCodebook::build(&ArrayGeometry::half_wavelength(8, 8, 30e9).unwrap()).unwrap();
        let full = ProbeSet::subsample(cb.len(), 1).unwrap();
        for s in 1..=cb.len() {
            let chan = on_grid_channel(&cb, s);
            let oracle = OneHotOracle::for_channel(&cb, &chan).unwrap();
            let a = fbt(&far, &cb, &oracle, &chan, &NoiseModel::NOISELESS, &mut derive_rng(0, 0)).unwrap();
            let b = pnbt(
                &cb,
                &full,
                &oracle,
                &chan,
                &NoiseModel::NOISELESS,
                &mut derive_rng(0, 0),
            )
            .unwrap();
            assert_eq!(a.chosen_flat_index, s);
            assert_eq!(b.chosen_flat_index, s);
            assert_eq!(b.probes_used, cb.len());
        }
    }

    #[test]
    fn candidate_set_identity() {
        // B = {1, 2, 3}, D = {2}: top-3 x indices in a single row
        let probes = ProbeSet::from_indices(vec![2], 3).unwrap();
        let probs = ProbabilityPair::new(vec![0.5, 0.3, 0.2], vec![1.0]).unwrap();
        let plan = CandidatePlan::from_parts(3, &probes, &probs, 3, 1).unwrap();
        assert_eq!(plan.candidates, vec![1, 2, 3]);
        assert_eq!(plan.reprobe, vec![1, 3]);
        assert_eq!(plan.reused, vec![2]);
    }

    #[test]
    fn improved_pnbt_with_oracle_hits_optimum() {
        let cb = desk_codebook(6, 4);
        let probes = ProbeSet::subsample(cb.len(), 5).unwrap();
        for s in 1..=cb.len() {
            let chan = on_grid_channel(&cb, s);
            let oracle = OneHotOracle::for_channel(&cb, &chan).unwrap();
            let r = improved_pnbt(
                &cb,
                &probes,
                &oracle,
                2,
                2,
                &chan,
                &NoiseModel::NOISELESS,
                &mut derive_rng(1, 1),
            )
            .unwrap();
            assert_eq!(r.chosen_flat_index, s);
            assert!(r.probes_used <= probes.len() + 4);
        }
        let chan = on_grid_channel(&cb, 1);
        let oracle = OneHotOracle::for_channel(&cb, &chan).unwrap();
        assert!(improved_pnbt(
            &cb,
            &probes,
            &oracle,
            7,
            1,
            &chan,
            &NoiseModel::NOISELESS,
            &mut derive_rng(0, 0)
        )
        .is_err());
        assert!(improved_pnbt(
            &cb,
            &probes,
            &oracle,
            1,
            0,
            &chan,
            &NoiseModel::NOISELESS,
            &mut derive_rng(0, 0)
        )
        .is_err());
    }

    #[test]
    fn refine_reuses_first_phase_values() {
        // A bogus first-phase value on a reused candidate must be what the
        // final argmax sees.
        let cb = desk_codebook(4, 2);
        let chan = on_grid_channel(&cb, 1);
        let probes = ProbeSet::from_indices(vec![2], cb.len()).unwrap();
        let probs = ProbabilityPair::new(vec![0.4, 0.3, 0.2, 0.1], vec![1.0, 0.0]).unwrap();
        let plan = CandidatePlan::new(&cb, &probes, &probs, 2, 1).unwrap();
        assert_eq!(plan.candidates, vec![1, 2]);
        let fake = [Complex64::new(100.0, 0.0)];
        let (chosen, extra) = refine_candidates(
            &cb,
            &probes,
            &fake,
            &plan,
            &chan,
            &NoiseModel::NOISELESS,
            &mut derive_rng(0, 0),
        )
        .unwrap();
        assert_eq!((chosen, extra), (2, 1));
    }
}

//! Monte-Carlo evaluation of beam training schemes over an SNR sweep.
//!
//! Channels are drawn once per trial and shared by every SNR and scheme, so
//! differences between schemes are paired. Each (snr, scheme, trial) gets
//! its own noise stream. Trials within a cell run in parallel; means are
//! accumulated in trial order so the output is reproducible byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use xlris_core::channel::{sample_channel, ChannelRealization, NoiseModel};
use xlris_core::codebook::{FarFieldCodebook, NearFieldCodebook, ProbeSet};
use xlris_core::metrics::{achievable_rate, effective_rate, normalized_gain};
use xlris_core::rng::{derive_rng, subseed, SampleRng};
use xlris_core::schemes::{
    self, far_field_probe, partial_probe, refine_candidates, select_from_probabilities, CandidatePlan, SchemeResult,
};
use xlris_core::{ProbabilityPair, TrialMetrics};

use crate::config::{ExperimentConfig, PredictorBinding, ProbeType, SchemeKind};
use crate::dataset::DatasetManifest;
use crate::error::{Result, SimError};
use crate::external::ExternalPredictor;
use crate::tensor;

pub const CSV_HEADER: &str = "scheme,snr_db,n_trials,mean_rate,mean_norm_gain,mean_eff_rate,mean_probes";

const CHANNEL_LABEL: u64 = 0x4348_414e;
const NOISE_LABEL: u64 = 0x4e4f_4953_0000;

/// Mean metrics of one (scheme, snr) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub scheme: SchemeKind,
    pub snr_db: f64,
    pub n_trials: usize,
    pub mean_rate: f64,
    pub mean_norm_gain: f64,
    pub mean_eff_rate: f64,
    pub mean_probes: f64,
}

impl CellSummary {
    fn from_trials(scheme: SchemeKind, snr_db: f64, trials: &[TrialMetrics]) -> Self {
        let n = trials.len() as f64;
        let mut sums = [0.0f64; 4];
        for t in trials {
            sums[0] += t.achievable_rate;
            sums[1] += t.normalized_gain;
            sums[2] += t.effective_rate;
            sums[3] += t.probes_used as f64;
        }
        CellSummary {
            scheme,
            snr_db,
            n_trials: trials.len(),
            mean_rate: sums[0] / n,
            mean_norm_gain: sums[1] / n,
            mean_eff_rate: sums[2] / n,
            mean_probes: sums[3] / n,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6},{:.6},{:.6}",
            self.scheme,
            self.snr_db,
            self.n_trials,
            self.mean_rate,
            self.mean_norm_gain,
            self.mean_eff_rate,
            self.mean_probes
        )
    }
}

pub fn to_csv(rows: &[CellSummary]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Everything built once per evaluation.
pub struct Workspace {
    pub near: NearFieldCodebook,
    pub far: Option<FarFieldCodebook>,
    pub probes: ProbeSet,
    pub channels: Vec<ChannelRealization>,
}

impl Workspace {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let sys = &cfg.system;
        let near = NearFieldCodebook::build(&sys.grid, &sys.ris, &sys.g_scatter, sys.user_height, sys.phase_mode)?;
        let far = if cfg.schemes.contains(&SchemeKind::Fbt) {
            Some(FarFieldCodebook::build(&sys.ris)?)
        } else {
            None
        };
        let probes = ProbeSet::subsample(near.len(), cfg.sampling_interval)?;
        let seed = subseed(cfg.seed, CHANNEL_LABEL);
        let channels = (0..cfg.n_trials as u64)
            .into_par_iter()
            .map(|t| {
                let mut chan = sample_channel(sys, &mut derive_rng(seed, t))?;
                chan.set_true_optimal_flat_index(schemes::true_optimal(&near, &chan)?);
                Ok(chan)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Workspace {
            near,
            far,
            probes,
            channels,
        })
    }
}

/// Batch predictor behind the learned schemes.
enum BatchPredictor {
    Oracle,
    Uniform,
    External(ExternalPredictor),
}

impl BatchPredictor {
    fn new(binding: &PredictorBinding) -> Result<Self> {
        Ok(match binding {
            PredictorBinding::Oracle => BatchPredictor::Oracle,
            PredictorBinding::Uniform => BatchPredictor::Uniform,
            PredictorBinding::External(cmd) => BatchPredictor::External(ExternalPredictor::new(cmd)?),
        })
    }

    fn predict(
        &self,
        ws: &Workspace,
        manifest: impl FnOnce() -> Result<DatasetManifest>,
        features: &[Vec<Complex64>],
    ) -> Result<Vec<ProbabilityPair>> {
        let (sx, sy) = (ws.near.s_x_count(), ws.near.s_y_count());
        match self {
            BatchPredictor::Uniform => Ok(vec![ProbabilityPair::uniform(sx, sy); features.len()]),
            BatchPredictor::Oracle => ws
                .channels
                .iter()
                .map(|chan| {
                    let s = chan.true_optimal_flat_index().expect("set in Workspace::new");
                    Ok(ProbabilityPair::one_hot(sx, sy, ws.near.index_pair(s)?)?)
                })
                .collect(),
            BatchPredictor::External(ext) => {
                let manifest = manifest()?;
                let mut flat = Vec::with_capacity(features.len() * manifest.q * 2);
                for y in features {
                    tensor::interleave(y, &mut flat);
                }
                let probs = ext.predict_batch(&manifest, &flat)?;
                for p in &probs {
                    p.check_shape(sx, sy)?;
                }
                Ok(probs)
            }
        }
    }
}

fn noise_seed(seed: u64, snr_index: usize, scheme: SchemeKind) -> u64 {
    let scheme_id = SchemeKind::ALL.iter().position(|&s| s == scheme).expect("listed") as u64;
    subseed(seed, NOISE_LABEL | ((snr_index as u64) << 8) | scheme_id)
}

/// Runs one (scheme, snr) cell and returns per-trial results.
pub fn run_cell(
    cfg: &ExperimentConfig,
    ws: &Workspace,
    scheme: SchemeKind,
    snr_index: usize,
) -> Result<Vec<SchemeResult>> {
    let snr_db = cfg.snr_db[snr_index];
    let noise = if cfg.noisy_probes {
        NoiseModel::from_snr_db(snr_db)?
    } else {
        NoiseModel::NOISELESS
    };
    let seed = noise_seed(cfg.seed, snr_index, scheme);
    let rng_for = |t: usize| derive_rng(seed, t as u64);
    let near = &ws.near;

    let direct = |f: &(dyn Fn(&ChannelRealization, &mut SampleRng) -> xlris_core::Result<SchemeResult> + Sync)| {
        ws.channels
            .par_iter()
            .enumerate()
            .map(|(t, chan)| Ok(f(chan, &mut rng_for(t))?))
            .collect::<Result<Vec<_>>>()
    };
    match scheme {
        SchemeKind::Exhaustive => return direct(&|c, r| schemes::exhaustive_sweep(near, c, &noise, r)),
        SchemeKind::Hierarchical => {
            return direct(&|c, r| schemes::hierarchical_search(near, cfg.coarsening, c, &noise, r))
        }
        _ => {}
    }

    // two-phase schemes: probe, one batched prediction, then select
    let phase1: Vec<(Vec<Complex64>, SampleRng)> = ws
        .channels
        .par_iter()
        .enumerate()
        .map(|(t, chan)| {
            let mut rng = rng_for(t);
            let y = match scheme {
                SchemeKind::Fbt => far_field_probe(ws.far.as_ref().expect("built for fbt"), chan, &noise, &mut rng)?,
                _ => partial_probe(near, &ws.probes, chan, &noise, &mut rng)?,
            };
            Ok((y, rng))
        })
        .collect::<Result<_>>()?;
    let features: Vec<Vec<Complex64>> = phase1.iter().map(|(y, _)| y.clone()).collect();
    let manifest = || {
        let (probe_type, d) = match scheme {
            SchemeKind::Fbt => (ProbeType::FarField, None),
            _ => (ProbeType::NearSubsampled, Some(cfg.sampling_interval)),
        };
        DatasetManifest::new(&cfg.system, probe_type, d, snr_db, features.len(), cfg.seed)
    };
    let predictor = BatchPredictor::new(&cfg.predictor)?;
    let probs = predictor.predict(ws, manifest, &features)?;

    phase1
        .into_par_iter()
        .zip(probs)
        .zip(ws.channels.par_iter())
        .map(|(((y, mut rng), p), chan)| {
            let (chosen, extra) = match scheme {
                SchemeKind::ImprovedPnbt => {
                    let plan = CandidatePlan::new(near, &ws.probes, &p, cfg.top_k, cfg.top_l)?;
                    refine_candidates(near, &ws.probes, &y, &plan, chan, &noise, &mut rng)?
                }
                _ => (select_from_probabilities(near, &p)?, 0),
            };
            Ok(SchemeResult {
                chosen_flat_index: chosen,
                probes_used: y.len() + extra,
                auxiliary: Some(p),
            })
        })
        .collect()
}

/// Metrics of one trial. Training slots are capped at the coherence
/// interval, so a scheme that cannot finish within it scores zero
/// effective rate.
pub fn trial_metrics(
    near: &NearFieldCodebook,
    chan: &ChannelRealization,
    result: &SchemeResult,
    sigma2: f64,
    total_slots: usize,
) -> Result<TrialMetrics> {
    let chosen = near.codeword(result.chosen_flat_index)?;
    let best = near.codeword(chan.true_optimal_flat_index().expect("set in Workspace::new"))?;
    let rate = achievable_rate(chosen, chan, sigma2)?;
    Ok(TrialMetrics {
        achievable_rate: rate,
        normalized_gain: normalized_gain(chosen, best, chan)?,
        effective_rate: effective_rate(rate, result.probes_used.min(total_slots), total_slots)?,
        probes_used: result.probes_used,
    })
}

pub fn evaluate(cfg: &ExperimentConfig) -> Result<Vec<CellSummary>> {
    let ws = Workspace::new(cfg)?;
    evaluate_with(cfg, &ws)
}

pub fn evaluate_with(cfg: &ExperimentConfig, ws: &Workspace) -> Result<Vec<CellSummary>> {
    let mut rows = Vec::with_capacity(cfg.schemes.len() * cfg.snr_db.len());
    for &scheme in &cfg.schemes {
        for (si, &snr_db) in cfg.snr_db.iter().enumerate() {
            let sigma2 = NoiseModel::from_snr_db(snr_db)?.sigma2;
            let results = run_cell(cfg, ws, scheme, si)?;
            let metrics = results
                .par_iter()
                .zip(ws.channels.par_iter())
                .map(|(r, chan)| trial_metrics(&ws.near, chan, r, sigma2, cfg.total_slots))
                .collect::<Result<Vec<_>>>()?;
            let row = CellSummary::from_trials(scheme, snr_db, &metrics);
            log::info!("{}", row.csv_row());
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Concatenates result tables, prefixing each row with its source label.
pub fn compare(tables: &[(String, String)]) -> Result<String> {
    let mut out = format!("source,{CSV_HEADER}\n");
    for (label, text) in tables {
        if label.contains(',') {
            return Err(SimError::Format(format!("source label `{label}` contains a comma")));
        }
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(CSV_HEADER) {
            return Err(SimError::Format(format!("{label}: not a results table")));
        }
        for line in lines.filter(|l| !l.trim().is_empty()) {
            if line.split(',').count() != CSV_HEADER.split(',').count() {
                return Err(SimError::Format(format!("{label}: malformed row `{line}`")));
            }
            let _ = writeln!(out, "{label},{line}");
        }
    }
    Ok(out)
}

pub fn compare_files(paths: &[impl AsRef<Path>]) -> Result<String> {
    let tables = paths
        .iter()
        .map(|p| {
            let p = p.as_ref();
            let label = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((label, std::fs::read_to_string(p)?))
        })
        .collect::<Result<Vec<_>>>()?;
    compare(&tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Preset;

    fn small(schemes: Vec<SchemeKind>) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::preset(Preset::Desk);
        cfg.schemes = schemes;
        cfg.n_trials = 20;
        cfg.snr_db = vec![0.0, 20.0];
        cfg
    }

    #[test]
    fn csv_schema() {
        let rows = evaluate(&small(vec![SchemeKind::Pnbt, SchemeKind::Hierarchical])).unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[1].starts_with("pnbt,0,20,"));
        assert!(lines[4].starts_with("hierarchical,20,20,"));
    }

    #[test]
    fn probe_counts_per_scheme() {
        let cfg = small(SchemeKind::ALL.to_vec());
        let rows = evaluate(&cfg).unwrap();
        let probes = |k: SchemeKind| rows.iter().find(|r| r.scheme == k).unwrap().mean_probes;
        assert_eq!(probes(SchemeKind::Exhaustive), 240.0);
        assert_eq!(probes(SchemeKind::Fbt), 64.0);
        assert_eq!(probes(SchemeKind::Pnbt), 30.0);
        // 4 × 3 cells of 5 × 5 (clipped) plus at most 25 fine probes
        assert!(probes(SchemeKind::Hierarchical) <= 12.0 + 25.0);
        assert!(probes(SchemeKind::ImprovedPnbt) <= 30.0 + 10.0);
    }

    #[test]
    fn effective_rate_clamps_at_coherence_interval() {
        let mut cfg = small(vec![SchemeKind::Exhaustive]);
        cfg.total_slots = 100;
        let rows = evaluate(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.mean_eff_rate == 0.0 && r.mean_rate > 0.0));
    }

    #[test]
    fn noiseless_oracle_is_exact() {
        let mut cfg = small(vec![SchemeKind::Fbt, SchemeKind::Pnbt]);
        cfg.predictor = PredictorBinding::Oracle;
        cfg.noisy_probes = false;
        for r in evaluate(&cfg).unwrap() {
            assert_eq!(r.mean_norm_gain, 1.0, "{:?}", r.scheme);
        }
    }

    #[test]
    fn compare_joins_tables() {
        let a = format!("{CSV_HEADER}\nfbt,0,1,1.0,1.0,1.0,64.0\n");
        let out = compare(&[("a".into(), a.clone()), ("b".into(), a)]).unwrap();
        assert_eq!(out.lines().count(), 3);
        assert!(out.lines().nth(2).unwrap().starts_with("b,fbt,0,"));
        assert!(compare(&[("x".into(), "nope\n".into())]).is_err());
    }
}

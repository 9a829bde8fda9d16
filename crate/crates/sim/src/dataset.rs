//! Labeled training datasets and their on-disk layout.
//!
//! A dataset directory holds:
//!
//! * `manifest.json`: UTF-8 JSON, keys in [`DatasetManifest`] field order.
//! * `features.bin`: `n_samples × Q × 2` little-endian `f32`, row-major,
//!   real and imaginary parts interleaved.
//! * `labels.bin`: `n_samples × 2` little-endian `u32`, `(s_x, s_y)`,
//!   1-based.
//!
//! Sample `i` is generated from its own random stream (see
//! [`xlris_core::rng`]): the channel is drawn first, then the probe noise.
//! Labels are the noiseless strongest-path optimum.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use xlris_core::channel::{receive_batch, sample_channel, NoiseModel, PhaseMode};
use xlris_core::codebook::{FarFieldCodebook, NearFieldCodebook, ProbeSet};
use xlris_core::rng::{self, derive_rng};
use xlris_core::schemes::true_optimal;
use xlris_core::SystemConfig;

use crate::config::ProbeType;
use crate::error::{Result, SimError};
use crate::tensor;

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FEATURES_FILE: &str = "features.bin";
pub const LABELS_FILE: &str = "labels.bin";

/// Label folded into the seed for the train/eval shuffle.
const SPLIT_STREAM_LABEL: u64 = 0x0053_504c_4954;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngSpec {
    pub generator: String,
    pub key_derivation: String,
    pub stream: String,
}

impl Default for RngSpec {
    fn default() -> Self {
        RngSpec {
            generator: rng::GENERATOR.into(),
            key_derivation: rng::KEY_DERIVATION.into(),
            stream: "sample_index".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub seed: u64,
    pub probe_type: ProbeType,
    #[serde(rename = "Q")]
    pub q: usize,
    #[serde(rename = "S_x")]
    pub s_x: usize,
    #[serde(rename = "S_y")]
    pub s_y: usize,
    #[serde(rename = "D")]
    pub d: Option<usize>,
    pub snr_db: f64,
    pub n_samples: usize,
    pub system: SystemConfig,
    pub phase_mode: PhaseMode,
    pub rng: RngSpec,
}

impl DatasetManifest {
    pub fn new(
        system: &SystemConfig,
        probe_type: ProbeType,
        interval: Option<usize>,
        snr_db: f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let (q, d) = match probe_type {
            ProbeType::FarField => (system.ris.len(), None),
            ProbeType::NearSubsampled => {
                let d = interval.ok_or_else(|| SimError::Config("subsampled probes need an interval".into()))?;
                if d == 0 {
                    return Err(SimError::Config("sampling interval must be at least 1".into()));
                }
                (system.grid.len() / d, Some(d))
            }
        };
        Ok(DatasetManifest {
            version: FORMAT_VERSION,
            seed,
            probe_type,
            q,
            s_x: system.grid.s_x_count,
            s_y: system.grid.s_y_count,
            d,
            snr_db,
            n_samples,
            system: system.clone(),
            phase_mode: system.phase_mode,
            rng: RngSpec::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(SimError::Format(format!(
                "unsupported dataset version {}",
                self.version
            )));
        }
        self.system.validate()?;
        let expected_q = match (self.probe_type, self.d) {
            (ProbeType::FarField, _) => self.system.ris.len(),
            (ProbeType::NearSubsampled, Some(d)) if d > 0 => self.system.grid.len() / d,
            (ProbeType::NearSubsampled, _) => {
                return Err(SimError::Format("subsampled dataset without a valid D".into()))
            }
        };
        if self.q != expected_q {
            return Err(SimError::Format(format!(
                "Q = {} but probe type implies {expected_q}",
                self.q
            )));
        }
        if self.s_x != self.system.grid.s_x_count || self.s_y != self.system.grid.s_y_count {
            return Err(SimError::Format("S_x/S_y disagree with the system grid".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Codebooks needed to probe and label a dataset.
pub struct ProbePlan {
    pub near: NearFieldCodebook,
    far: Option<FarFieldCodebook>,
    probes: Option<ProbeSet>,
}

impl ProbePlan {
    pub fn new(manifest: &DatasetManifest) -> Result<Self> {
        let sys = &manifest.system;
        let near = NearFieldCodebook::build(&sys.grid, &sys.ris, &sys.g_scatter, sys.user_height, sys.phase_mode)?;
        let (far, probes) = match manifest.probe_type {
            ProbeType::FarField => (Some(FarFieldCodebook::build(&sys.ris)?), None),
            ProbeType::NearSubsampled => {
                let d = manifest.d.expect("validated");
                (None, Some(ProbeSet::subsample(near.len(), d)?))
            }
        };
        Ok(ProbePlan { near, far, probes })
    }

    pub fn probe_codewords(&self) -> Box<dyn Iterator<Item = &[num_complex::Complex64]> + '_> {
        match (&self.far, &self.probes) {
            (Some(far), _) => Box::new(far.codewords().rows()),
            (None, Some(p)) => Box::new(p.indices().iter().map(|&s| self.near.codeword(s).expect("in range"))),
            (None, None) => unreachable!(),
        }
    }
}

/// In-memory dataset, single precision as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    /// `n_samples × Q × 2`
    pub features: Vec<f32>,
    /// `n_samples × 2`
    pub labels: Vec<u32>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.manifest.n_samples
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_row(&self, i: usize) -> &[f32] {
        let w = self.manifest.q * 2;
        &self.features[i * w..(i + 1) * w]
    }

    pub fn label(&self, i: usize) -> (u32, u32) {
        (self.labels[2 * i], self.labels[2 * i + 1])
    }

    /// Subset in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.manifest.q * 2);
        let mut labels = Vec::with_capacity(indices.len() * 2);
        for &i in indices {
            features.extend_from_slice(self.feature_row(i));
            let (a, b) = self.label(i);
            labels.extend_from_slice(&[a, b]);
        }
        let mut manifest = self.manifest.clone();
        manifest.n_samples = indices.len();
        Dataset {
            manifest,
            features,
            labels,
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        tensor::write_atomic(&dir.join(FEATURES_FILE), &tensor::f32_bytes(&self.features))?;
        tensor::write_atomic(&dir.join(LABELS_FILE), &tensor::u32_bytes(&self.labels))?;
        tensor::write_atomic(&dir.join(MANIFEST_FILE), self.manifest.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Dataset> {
        let manifest = read_manifest(dir)?;
        let features = tensor::read_f32(&dir.join(FEATURES_FILE))?;
        let labels = tensor::read_u32(&dir.join(LABELS_FILE))?;
        let n = manifest.n_samples;
        if features.len() != n * manifest.q * 2 {
            return Err(SimError::Format(format!(
                "features.bin holds {} values, expected {}",
                features.len(),
                n * manifest.q * 2
            )));
        }
        if labels.len() != n * 2 {
            return Err(SimError::Format(format!(
                "labels.bin holds {} values, expected {}",
                labels.len(),
                n * 2
            )));
        }
        for pair in labels.chunks_exact(2) {
            let ok = (1..=manifest.s_x as u32).contains(&pair[0]) && (1..=manifest.s_y as u32).contains(&pair[1]);
            if !ok {
                return Err(SimError::Format(format!("label {pair:?} out of range")));
            }
        }
        Ok(Dataset {
            manifest,
            features,
            labels,
        })
    }
}

pub fn read_manifest(dir: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    let manifest: DatasetManifest = serde_json::from_str(&text)?;
    manifest.validate()?;
    Ok(manifest)
}

/// Generates sample `index` of a dataset: features and 1-based label.
pub fn generate_sample(
    manifest: &DatasetManifest,
    plan: &ProbePlan,
    noise: &NoiseModel,
    index: u64,
) -> Result<(Vec<f32>, (u32, u32))> {
    let mut rng = derive_rng(manifest.seed, index);
    let chan = sample_channel(&manifest.system, &mut rng)?;
    let best = true_optimal(&plan.near, &chan)?;
    let (s_x, s_y) = plan.near.index_pair(best)?;
    let y = receive_batch(plan.probe_codewords(), &chan, noise, &mut rng)?;
    let mut features = Vec::with_capacity(y.len() * 2);
    tensor::interleave(&y, &mut features);
    Ok((features, (s_x as u32, s_y as u32)))
}

pub fn generate_dataset(manifest: &DatasetManifest) -> Result<Dataset> {
    manifest.validate()?;
    let plan = ProbePlan::new(manifest)?;
    let noise = NoiseModel::from_snr_db(manifest.snr_db)?;
    let samples: Vec<_> = (0..manifest.n_samples as u64)
        .into_par_iter()
        .map(|i| generate_sample(manifest, &plan, &noise, i))
        .collect::<Result<_>>()?;
    let mut features = Vec::with_capacity(manifest.n_samples * manifest.q * 2);
    let mut labels = Vec::with_capacity(manifest.n_samples * 2);
    for (f, (a, b)) in samples {
        features.extend_from_slice(&f);
        labels.extend_from_slice(&[a, b]);
    }
    Ok(Dataset {
        manifest: manifest.clone(),
        features,
        labels,
    })
}

/// Seeded shuffle, then a contiguous cut: `⌊n·f⌋` train, the rest eval.
pub fn split(dataset: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    let (train, eval) = split_indices(dataset.len(), train_fraction, dataset.manifest.seed)?;
    Ok((dataset.select(&train), dataset.select(&eval)))
}

pub fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(SimError::Config("train fraction must lie in (0, 1)".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut derive_rng(rng::subseed(seed, SPLIT_STREAM_LABEL), 0));
    let cut = (n as f64 * train_fraction).floor() as usize;
    let eval = order.split_off(cut);
    Ok((order, eval))
}

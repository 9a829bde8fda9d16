use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use xlris_core::{NearFieldCodebook, PhaseMode};
use xlris_sim::config::{ExperimentConfig, PredictorBinding, Preset, ProbeType, SchemeKind};
use xlris_sim::dataset::{self, Dataset, DatasetManifest};
use xlris_sim::{cache, evaluate, tensor};

#[derive(Parser)]
#[command(
    name = "xlris",
    version,
    about = "Near-field beam training simulator for XL-RIS links"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled dataset directory.
    Generate {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Evaluate schemes over the SNR sweep and write a CSV table.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// CSV output file; stdout if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Join result tables, adding a `source` column (file stem).
    Compare {
        #[arg(required = true)]
        tables: Vec<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print a dataset manifest.
    Inspect { dataset: PathBuf },
    /// Build the near-field codebook and write it to a cache directory.
    Codebook {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Print the resolved configuration as TOML.
    ShowConfig {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Base system and defaults.
    #[arg(long, default_value = "desk")]
    preset: Preset,
    /// TOML file; its keys override command-line flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: exhaustive, hierarchical, fbt, pnbt, improved_pnbt.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<SchemeKind>>,
    /// Comma-separated SNR values in dB.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    snr_db: Option<Vec<f64>>,
    #[arg(long)]
    n_trials: Option<usize>,
    /// PNBT sampling interval D.
    #[arg(long)]
    sampling_interval: Option<usize>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    top_l: Option<usize>,
    /// Hierarchical cell size.
    #[arg(long)]
    coarsening: Option<usize>,
    /// Slots per coherence interval.
    #[arg(long)]
    total_slots: Option<usize>,
    /// Probe without receiver noise (metrics still use the SNR).
    #[arg(long)]
    noiseless_probes: bool,
    /// oracle, uniform or external:<command>.
    #[arg(long)]
    predictor: Option<PredictorBinding>,
    /// Dataset probes: far_field or near_subsampled.
    #[arg(long)]
    probe_type: Option<ProbeTypeArg>,
    #[arg(long)]
    n_samples: Option<usize>,
    /// Dataset SNR in dB.
    #[arg(long, allow_negative_numbers = true)]
    dataset_snr_db: Option<f64>,
    /// Train fraction; writes train/ and eval/ subdirectories.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long)]
    phase_mode: Option<PhaseModeArg>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProbeTypeArg {
    FarField,
    NearSubsampled,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PhaseModeArg {
    Physical,
    PaperLiteral,
}

impl CommonArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::preset(self.preset);
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.schemes {
            cfg.schemes = v.clone();
        }
        if let Some(v) = &self.snr_db {
            cfg.snr_db = v.clone();
        }
        if let Some(v) = self.n_trials {
            cfg.n_trials = v;
        }
        if let Some(v) = self.sampling_interval {
            cfg.sampling_interval = v;
        }
        if let Some(v) = self.top_k {
            cfg.top_k = v;
        }
        if let Some(v) = self.top_l {
            cfg.top_l = v;
        }
        if let Some(v) = self.coarsening {
            cfg.coarsening = v;
        }
        if let Some(v) = self.total_slots {
            cfg.total_slots = v;
        }
        if self.noiseless_probes {
            cfg.noisy_probes = false;
        }
        if let Some(v) = &self.predictor {
            cfg.predictor = v.clone();
        }
        if let Some(v) = self.probe_type {
            cfg.dataset.probe_type = match v {
                ProbeTypeArg::FarField => ProbeType::FarField,
                ProbeTypeArg::NearSubsampled => ProbeType::NearSubsampled,
            };
        }
        if let Some(v) = self.n_samples {
            cfg.dataset.n_samples = v;
        }
        if let Some(v) = self.dataset_snr_db {
            cfg.dataset.snr_db = v;
        }
        if let Some(v) = self.split {
            cfg.dataset.split = Some(v);
        }
        if let Some(v) = self.phase_mode {
            cfg.system.phase_mode = match v {
                PhaseModeArg::Physical => PhaseMode::Physical,
                PhaseModeArg::PaperLiteral => PhaseMode::PaperLiteral,
            };
        }
        if let Some(path) = &self.config {
            cfg = cfg
                .merge_file(path)
                .with_context(|| format!("reading {}", path.display()))?;
        }
        cfg.apply_env()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn output_path(flag: &Option<PathBuf>, cfg: &ExperimentConfig) -> Option<PathBuf> {
    flag.clone().or_else(|| cfg.output.clone())
}

fn write_text(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            tensor::write_atomic(p, text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn summary(m: &DatasetManifest) -> String {
    let d = m.d.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
    format!(
        "{} samples, probe_type {:?}, Q = {}, S_x = {}, S_y = {}, D = {}, snr {} dB, seed {}",
        m.n_samples, m.probe_type, m.q, m.s_x, m.s_y, d, m.snr_db, m.seed
    )
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate { common, output } => {
            let cfg = common.resolve()?;
            let Some(dir) = output_path(&output, &cfg) else {
                bail!("generate needs --output or `output` in the config");
            };
            let ds = &cfg.dataset;
            let manifest = DatasetManifest::new(
                &cfg.system,
                ds.probe_type,
                Some(cfg.sampling_interval),
                ds.snr_db,
                ds.n_samples,
                cfg.seed,
            )?;
            let data = dataset::generate_dataset(&manifest)?;
            data.write(&dir)?;
            if let Some(fraction) = ds.split {
                let (train, eval) = dataset::split(&data, fraction)?;
                train.write(&dir.join("train"))?;
                eval.write(&dir.join("eval"))?;
                println!("split: {} train, {} eval", train.len(), eval.len());
            }
            println!("{}: {}", dir.display(), summary(&manifest));
        }
        Command::Evaluate { common, output } => {
            let cfg = common.resolve()?;
            let rows = evaluate::evaluate(&cfg)?;
            write_text(output_path(&output, &cfg).as_deref(), &evaluate::to_csv(&rows))?;
        }
        Command::Compare { tables, output } => {
            write_text(output.as_deref(), &evaluate::compare_files(&tables)?)?;
        }
        Command::Inspect { dataset } => {
            let manifest = dataset::read_manifest(&dataset)?;
            eprintln!("{}", summary(&manifest));
            print!("{}", manifest.to_json()?);
            // touch the payload so truncated files are reported here
            Dataset::read(&dataset)?;
        }
        Command::Codebook { common, output } => {
            let cfg = common.resolve()?;
            let sys = &cfg.system;
            let cb = NearFieldCodebook::build(&sys.grid, &sys.ris, &sys.g_scatter, sys.user_height, sys.phase_mode)?;
            cache::write_codebook(&output, &cb, &sys.ris)?;
            println!(
                "{}: {} codewords of length {}",
                output.display(),
                cb.len(),
                sys.ris.len()
            );
        }
        Command::ShowConfig { common } => {
            print!("{}", common.resolve()?.to_toml()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

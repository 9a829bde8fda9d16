#![cfg(unix)]

mod common;

use std::path::Path;

use xlris_core::SystemConfig;
use xlris_sim::config::{ExperimentConfig, PredictorBinding, Preset, ProbeType, SchemeKind};
use xlris_sim::dataset::DatasetManifest;
use xlris_sim::evaluate::{run_cell, Workspace};
use xlris_sim::external::ExternalPredictor;
use xlris_sim::{ExternalError, SimError};

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    /// Stub that saves the request and answers with the prepared files.
    fn copying_stub(&self, px: &[f32], py: &[f32]) -> String {
        common::write_f32(&self.path().join("px.bin"), px);
        common::write_f32(&self.path().join("py.bin"), py);
        let d = self.path().display();
        let script = common::stub_predictor(
            self.path(),
            &format!("cp -r \"$1\" {d}/seen\ncp {d}/px.bin \"$2/probs_x.bin\"\ncp {d}/py.bin \"$2/probs_y.bin\""),
        );
        format!("sh {}", script.display())
    }
}

fn manifest(n: usize) -> DatasetManifest {
    DatasetManifest::new(&SystemConfig::desk(), ProbeType::NearSubsampled, Some(8), 10.0, n, 1).unwrap()
}

fn features(n: usize) -> Vec<f32> {
    (0..n * 30 * 2).map(|i| i as f32).collect()
}

fn external_err(r: xlris_sim::Result<impl std::fmt::Debug>) -> ExternalError {
    match r {
        Err(SimError::External(e)) => e,
        other => panic!("expected a protocol error, got {other:?}"),
    }
}

#[test]
fn uniform_echo_is_accepted_and_request_is_complete() {
    let fx = Fixture::new();
    let cmd = fx.copying_stub(&common::uniform_rows(4, 20), &common::uniform_rows(4, 12));
    let probs = ExternalPredictor::new(&cmd)
        .unwrap()
        .predict_batch(&manifest(4), &features(4))
        .unwrap();
    assert_eq!(probs.len(), 4);
    for p in &probs {
        assert!((p.p_x().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p.p_x().len(), 20);
    }
    let seen = fx.path().join("seen");
    let sent = std::fs::read(seen.join("features.bin")).unwrap();
    assert_eq!(sent.len(), 4 * 30 * 2 * 4);
    assert_eq!(&sent[4..8], &1.0f32.to_le_bytes());
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(seen.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["n_samples"], 4);
    assert_eq!(m["Q"], 30);
    assert!(!seen.join("labels.bin").exists());
}

#[test]
fn uniform_rows_pick_first_index() {
    let fx = Fixture::new();
    let mut cfg = ExperimentConfig::preset(Preset::Desk);
    cfg.n_trials = 6;
    cfg.snr_db = vec![10.0];
    cfg.schemes = vec![SchemeKind::Pnbt];
    cfg.predictor =
        PredictorBinding::External(fx.copying_stub(&common::uniform_rows(6, 20), &common::uniform_rows(6, 12)));
    let ws = Workspace::new(&cfg).unwrap();
    let results = run_cell(&cfg, &ws, SchemeKind::Pnbt, 0).unwrap();
    assert!(results.iter().all(|r| r.chosen_flat_index == 1 && r.probes_used == 30));
}

#[test]
fn wrong_row_count_is_shape_mismatch() {
    let fx = Fixture::new();
    let cmd = fx.copying_stub(&common::uniform_rows(3, 20), &common::uniform_rows(4, 12));
    let e = external_err(
        ExternalPredictor::new(&cmd)
            .unwrap()
            .predict_batch(&manifest(4), &features(4)),
    );
    assert!(
        matches!(
            e,
            ExternalError::ShapeMismatch {
                expected: 80,
                got: 60,
                ..
            }
        ),
        "{e}"
    );
}

#[test]
fn rows_within_tolerance_are_accepted() {
    let fx = Fixture::new();
    let mut px = vec![0.0f32; 2 * 20];
    px[0] = 1.0 + 1e-5;
    px[20] = 1.0 - 1e-5;
    let cmd = fx.copying_stub(&px, &common::uniform_rows(2, 12));
    let probs = ExternalPredictor::new(&cmd)
        .unwrap()
        .predict_batch(&manifest(2), &features(2))
        .unwrap();
    assert_eq!(probs[0].p_x()[0], 1.0);
    assert_eq!(probs[1].p_x()[0], 1.0);
}

#[test]
fn unnormalized_rows_are_rejected() {
    let fx = Fixture::new();
    let mut px = common::uniform_rows(2, 20);
    px[25] += 0.01;
    let cmd = fx.copying_stub(&px, &common::uniform_rows(2, 12));
    let e = external_err(
        ExternalPredictor::new(&cmd)
            .unwrap()
            .predict_batch(&manifest(2), &features(2)),
    );
    assert!(matches!(e, ExternalError::NotNormalized { row: 1, .. }), "{e}");
}

#[test]
fn negative_entries_are_rejected() {
    let fx = Fixture::new();
    let mut py = common::uniform_rows(1, 12);
    py[3] = -0.01;
    let cmd = fx.copying_stub(&common::uniform_rows(1, 20), &py);
    let e = external_err(
        ExternalPredictor::new(&cmd)
            .unwrap()
            .predict_batch(&manifest(1), &features(1)),
    );
    assert!(matches!(e, ExternalError::InvalidEntry { row: 0, .. }), "{e}");
}

#[test]
fn nonzero_exit_is_reported_with_stderr() {
    let fx = Fixture::new();
    let script = common::stub_predictor(fx.path(), "echo 'no checkpoint' >&2\nexit 3");
    let e = external_err(
        ExternalPredictor::new(&format!("sh {}", script.display()))
            .unwrap()
            .predict_batch(&manifest(1), &features(1)),
    );
    match e {
        ExternalError::NonZeroExit { stderr, .. } => assert_eq!(stderr, "no checkpoint"),
        other => panic!("{other}"),
    }
}

#[test]
fn missing_response_file_is_reported() {
    let fx = Fixture::new();
    common::write_f32(&fx.path().join("px.bin"), &common::uniform_rows(1, 20));
    let script = common::stub_predictor(
        fx.path(),
        &format!("cp {}/px.bin \"$2/probs_x.bin\"", fx.path().display()),
    );
    let e = external_err(
        ExternalPredictor::new(&format!("sh {}", script.display()))
            .unwrap()
            .predict_batch(&manifest(1), &features(1)),
    );
    assert!(
        matches!(&e, ExternalError::MissingFile(p) if p.ends_with("probs_y.bin")),
        "{e}"
    );
}

#[test]
fn unknown_program_fails_to_spawn() {
    let e = external_err(
        ExternalPredictor::new("/nonexistent/predictor")
            .unwrap()
            .predict_batch(&manifest(1), &features(1)),
    );
    assert!(matches!(e, ExternalError::Spawn { .. }));
}

//! Writes a synthesized trial to the plain-text matrix format, reads it
//! back and runs a single-shot detection against a calibrated threshold.

use spread_detect::cli::{self, ThresholdFile};
use spread_detect::detect::DetectorKind;
use spread_detect::mc;
use spread_detect::model::{Scenario, ScenarioConfig};
use spread_detect::synth::{synthesize_trial, Hypothesis, RngStream};

fn main() -> spread_detect::Result<()> {
    let mut cfg = ScenarioConfig::reference();
    let record = mc::calibrate_threshold(DetectorKind::BRaoI, &cfg, 1e-2, 5_000, cfg.seed)?;

    cfg.snr_db = 20.0;
    let scenario = Scenario::new(&cfg)?;
    let trial = synthesize_trial(&scenario, Hypothesis::H1, &mut RngStream::new(123, 0))?;
    let dir = std::env::temp_dir().join("spread-detect-ingest");
    std::fs::create_dir_all(&dir).map_err(|source| spread_detect::Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let (z_path, zl_path) = (dir.join("z.txt"), dir.join("zl.txt"));
    cli::write_complex_matrix(&z_path, &trial.z)?;
    cli::write_complex_matrix(&zl_path, &trial.z_l)?;

    let z = cli::read_complex_matrix(&z_path)?;
    let z_l = cli::read_complex_matrix(&zl_path)?;
    assert_eq!(z, trial.z);
    let thresholds = ThresholdFile {
        thresholds: vec![record],
        skipped: vec![],
    };
    let shot = cli::run_single(DetectorKind::BRaoI, z, &z_l, &cfg, Some(&thresholds))?;
    println!("{}", serde_json::to_string_pretty(&shot)?);
    Ok(())
}

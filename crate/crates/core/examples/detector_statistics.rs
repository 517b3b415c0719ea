//! Evaluates all six detectors on an H₀ and an H₁ trial.

use spread_detect::detect::{self, DetectorInput, DetectorKind};
use spread_detect::model::{Scenario, ScenarioConfig};
use spread_detect::synth::{synthesize_trial, Hypothesis, RngStream};

fn main() -> spread_detect::Result<()> {
    let mut cfg = ScenarioConfig::reference();
    cfg.snr_db = 15.0;
    let scenario = Scenario::new(&cfg)?;
    println!("{:<12} {:>12} {:>12}", "detector", "H0", "H1");
    let inputs: Vec<DetectorInput> = [Hypothesis::H0, Hypothesis::H1]
        .into_iter()
        .map(|h| {
            let trial = synthesize_trial(&scenario, h, &mut RngStream::new(3, 0))?;
            DetectorInput::from_trial(&trial, &scenario)
        })
        .collect::<spread_detect::Result<_>>()?;
    for kind in DetectorKind::ALL {
        let t0 = detect::evaluate(kind, &inputs[0])?;
        let t1 = detect::evaluate(kind, &inputs[1])?;
        println!("{:<12} {t0:>12.5} {t1:>12.5}", kind.label());
    }
    Ok(())
}

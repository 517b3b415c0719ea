//! MAP estimates of the covariance and the interference coordinates under
//! H₀, compared with the values that generated the data.

use spread_detect::detect::{self, DetectorInput};
use spread_detect::linalg;
use spread_detect::model::{Scenario, ScenarioConfig};
use spread_detect::synth::{synthesize_trial_detailed, Hypothesis, RngStream};

fn main() -> spread_detect::Result<()> {
    let mut cfg = ScenarioConfig::reference();
    cfg.k_cells = 40;
    cfg.l_train = 40;
    cfg.inr_db = 30.0;
    let scenario = Scenario::new(&cfg)?;
    let trial = synthesize_trial_detailed(&scenario, Hypothesis::H0, &mut RngStream::new(11, 0))?;
    let input = DetectorInput::from_trial(&trial.data, &scenario)?;

    let r0 = detect::map_r0(&input)?;
    let w0 = detect::map_w(&input)?;
    println!("relative error of R̂₀ vs drawn R: {:.3}", linalg::rel_diff(&r0, &trial.data.true_r));
    println!("relative error of Ŵ vs true W:   {:.3}", linalg::rel_diff(&w0, &trial.coords.w));

    let best = detect::log_joint_h0(&r0, &w0, &input)?;
    let at_truth = detect::log_joint_h0(&trial.data.true_r, &trial.coords.w, &input)?;
    println!("log joint density at the MAP point: {best:.3}");
    println!("log joint density at the truth:     {at_truth:.3}");

    let inv = detect::map_r0_inverse(&input)?;
    let direct = linalg::hpd_inverse(&r0, "R̂₀")?;
    println!("Woodbury vs direct inverse: {:.2e}", linalg::rel_diff(&inv, &direct));
    Ok(())
}

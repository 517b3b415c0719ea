//! Builds the reference scenario and prints Σ, the steering subspaces and
//! how well separated they are.

use spread_detect::linalg;
use spread_detect::model::{Scenario, ScenarioConfig};

fn main() -> spread_detect::Result<()> {
    let scenario = Scenario::new(&ScenarioConfig::reference())?;
    let cfg = &scenario.cfg;
    println!("N = {}, p = {}, q = {}", cfg.n_dim, cfg.p_sig, cfg.q_intf);
    println!("signal frequencies:       {:?}", cfg.sig_freqs);
    println!("interference frequencies: {:?}", cfg.intf_freqs);

    let sigma = scenario.sigma.matrix();
    println!("first row of Σ:");
    for j in 0..cfg.n_dim {
        print!(" {:.3}", sigma[(0, j)].re);
    }
    println!();

    let b = scenario.subspaces.b.clone();
    println!("smallest singular value of [Φ Υ]: {:.3e}", linalg::min_singular_value(&b));
    println!("smallest eigenvalue of Σ:         {:.3e}", linalg::min_eigenvalue(sigma));
    Ok(())
}

//! Runs the algebraic identity checks and the MAP optimality check on
//! random instances.

use spread_detect::selftest;

fn main() -> spread_detect::Result<()> {
    let report = selftest::run_identity_suite(100, 1)?;
    for check in &report.checks {
        println!(
            "{:<6} {:<60} max {:.2e} (tol {:.0e})",
            if check.passed() { "ok" } else { "FAIL" },
            check.name,
            check.max_error,
            check.tolerance
        );
    }
    let map = selftest::run_map_optimality(20, 50, 1e-2, 1)?;
    println!(
        "MAP optimality: {} violations in {} perturbations (smallest margin {:.2e})",
        map.violations, map.perturbations, map.min_margin
    );
    Ok(())
}

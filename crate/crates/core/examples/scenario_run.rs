//! Runs a scenario file and prints its verdicts.
//!
//! `cargo run --release --example scenario_run -- examples/scenarios/min_disturb_eta1.toml`

use std::path::PathBuf;

use akmeter::scenario::{run_scenario, Scenario};

fn main() -> akmeter::Result<()> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenarios/complete_opt_coherent.toml")
    });
    let report = run_scenario(&Scenario::load(&path)?)?;
    println!("{} ({} / {})", report.scenario, report.system, report.apparatus);
    for v in &report.verdicts {
        println!("  {:<5} {:<34} {:.9e} margin {:+.2e}", if v.passed { "ok" } else { "FAIL" }, v.name, v.value, v.margin);
    }
    if let Some(c) = &report.chi_square {
        println!("  chi-square {:.2} / {:.2}", c.statistic, c.critical);
    }
    Ok(())
}

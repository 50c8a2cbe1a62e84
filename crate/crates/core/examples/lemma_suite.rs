//! Runs every invariant, monotonicity and duality check for one parameter set.

use soliton_lab::analyze::{run_lemma_suite, DEFAULT_SEED};
use soliton_lab::{IntegrationOptions, SolitonParams};

fn main() -> soliton_lab::Result<()> {
    let n: u32 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2);
    let params = SolitonParams::new(n, 1.0)?;
    let report = run_lemma_suite(&params, DEFAULT_SEED, &IntegrationOptions::default())?;
    for c in &report.checks {
        println!("{:5} {}", if c.passed { "ok" } else { "FAIL" }, c.name);
    }
    println!("n = {n}: {}", if report.passed { "all passed" } else { "failures" });
    Ok(())
}

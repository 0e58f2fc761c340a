//! Runs a verification suite and prints its per-check results.
//!
//! Usage: `cargo run --example verify_suite -- [suite] [trials]`

use gyromat::verify::{run_suite, SuiteConfig, SuiteId};

fn main() -> gyromat::Result<()> {
    let mut args = std::env::args().skip(1);
    let suite: SuiteId = args.next().as_deref().unwrap_or("gr_axioms").parse()?;
    let trials = args.next().and_then(|t| t.parse().ok()).unwrap_or(50);
    let report = run_suite(&SuiteConfig::new(suite, trials, 42))?;
    for c in &report.checks {
        let worst = c.max_residual.map_or("null".into(), |r| format!("{r:.2e}"));
        println!("{:4} {:45} {worst:>9}  {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.anchor);
    }
    println!("{suite}: {}", if report.pass { "pass" } else { "fail" });
    Ok(())
}

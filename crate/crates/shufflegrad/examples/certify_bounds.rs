//! Runs the numerical certification suite at a reduced Monte Carlo budget
//! and prints the report.
//!
//! Each entry replays one analytical statement — the epoch-sum identity,
//! the non-increasing update norms, the shuffling variance formula, the
//! four convergence bounds, and the inner-size rule — against instrumented
//! runs, and records the worst observed margin.

use shufflegrad::certify::{run_certification, CertConfig};

fn main() -> shufflegrad::Result<()> {
    // 40 seeds keeps this example fast; the experiment harness and the
    // `verify` subcommand default to 200.
    let cfg = CertConfig {
        mc_seeds: 40,
        base_seed: 42,
    };
    let report = run_certification(&cfg)?;
    print!("{}", report.render_text());
    println!(
        "overall: {}",
        if report.passed() { "passed" } else { "FAILED" }
    );
    Ok(())
}

//! Runs the closed-form property suite on the default configuration.
//!
//! `cargo run --release --example verify_suite`

use breather_floquet::cli::verify::run_verify;
use breather_floquet::cli::{RunConfig, DEFAULT_SEED};

fn main() -> breather_floquet::Result<()> {
    let report = run_verify(&RunConfig::default_config(), DEFAULT_SEED, 0)?;
    for check in &report.checks {
        println!("{}", check.line());
    }
    println!("suite {}", if report.passed { "passed" } else { "failed" });
    Ok(())
}

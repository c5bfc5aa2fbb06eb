//! Searches for a pulsating soliton from a sech pulse and audits the
//! hypotheses on the recorded period.
//!
//! `cargo run --release --example find_breather`

use breather_floquet::breather::{find_breather, hypothesis_audit, BreatherReport};
use breather_floquet::cli::config::{RunConfig, SolutionSection};
use num_complex::Complex64;

fn main() -> breather_floquet::Result<()> {
    let config = RunConfig::load("pulsating")?;
    let SolutionSection::CglBreather { pulse } = &config.solution else { unreachable!() };
    let grid = config.grid()?;
    let search = find_breather(&config.params()?, &grid, &pulse.state(&grid), &config.breather_config()?)?;
    let audit = search.trajectory.as_ref().map(|t| hypothesis_audit(t, Complex64::default()));
    let report = BreatherReport::new(&search.detection, audit.as_ref());
    println!("{}", serde_json::to_string_pretty(&report).map_err(breather_floquet::Error::from)?);
    println!("co-rotating frame alpha = {:.6}", search.detection.frame_alpha);
    Ok(())
}

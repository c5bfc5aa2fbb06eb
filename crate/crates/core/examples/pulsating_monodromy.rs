//! Monodromy spectrum of the pulsating soliton at several resolutions,
//! compared with the mapped essential spectrum.
//!
//! `cargo run --release --example pulsating_monodromy -- [N ...]`

use breather_floquet::analytic::Background;
use breather_floquet::cli::config::RunConfig;
use breather_floquet::cli::pipeline::{monodromy_config, refinement_backgrounds, resolve_background};
use breather_floquet::monodromy::refinement_study;

fn main() -> breather_floquet::Result<()> {
    let mut config = RunConfig::load("pulsating")?;
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    if !sizes.is_empty() {
        config.monodromy.refinement = sizes;
    }
    let base = resolve_background(&config)?;
    let backgrounds = refinement_backgrounds(&config, &base)?;
    let mc = monodromy_config(&config, &backgrounds[0], 0)?;
    let report = refinement_study(&backgrounds, Background::Decaying, 0.0, &mc)?;
    for l in &report.levels {
        println!(
            "N = {:>3}: p95 {:.4e}, outliers {}, max |lambda| {:.4e} <= {:.4e}: {}",
            l.n,
            l.p95_non_outlier,
            l.outlier_count,
            l.summary.max_modulus,
            l.summary.radius_bound.unwrap_or(f64::NAN),
            l.radius_check
        );
    }
    println!("p95 non-increasing: {}, outliers stable: {}", report.monotone, report.outliers_stable);
    Ok(())
}

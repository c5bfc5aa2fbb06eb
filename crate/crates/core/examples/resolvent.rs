//! Resolvent norm of the diffusion symbol against the sector bound.
//!
//! `cargo run --release --example resolvent`

use breather_floquet::analytic::{resolvent_symbol_norm, sector_bound};
use breather_floquet::model::Parameters;
use num_complex::Complex64;

fn main() -> breather_floquet::Result<()> {
    let p = Parameters::linear(1.0, 0.125, -0.1, 0.0);
    for tau in [-10.0, -1.0, 0.5, 4.0] {
        for sigma in [0.1, 1.0, 10.0] {
            let r = resolvent_symbol_norm(&p, Complex64::new(sigma, tau))?;
            println!("lambda = {sigma:>4} {tau:+5}i: norm {r:.6}, bound {:.6}", sector_bound(&p, tau));
        }
    }
    for sigma in [0.1, 1.0, 10.0] {
        println!("lambda = {sigma}: norm * lambda = {:.6}", resolvent_symbol_norm(&p, Complex64::new(sigma, 0.0))? * sigma);
    }
    Ok(())
}

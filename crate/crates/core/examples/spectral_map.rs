//! Image of the essential spectrum under `λ ↦ e^{Tλ}` and its enclosing
//! disk of radius `e^{δT}`.
//!
//! `cargo run --release --example spectral_map -- [period]`

use breather_floquet::monodromy::predicted_curve;
use breather_floquet::analytic::Background;
use breather_floquet::model::{Grid, Parameters};

fn main() -> breather_floquet::Result<()> {
    let period: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10.0);
    let p = Parameters::linear(1.0, 0.125, -0.1, 0.0);
    let curve = predicted_curve(&p, Background::Decaying, &Grid::new(20.0, 64)?, period, 513)?;
    let max = curve.lambdas().map(|z| z.norm()).fold(0.0, f64::max);
    println!("T = {period}: max |z| on the mapped curve {max:.10}, e^(delta T) = {:.10}", (p.delta * period).exp());
    Ok(())
}

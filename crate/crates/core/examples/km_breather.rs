//! Kuznetsov-Ma breather: residual of the closed form under spectral
//! differentiation at increasing resolution, and a few field snapshots.
//!
//! `cargo run --release --example km_breather`

use breather_floquet::analytic::{km_residual, KmBreather};
use breather_floquet::model::Grid;

fn main() -> breather_floquet::Result<()> {
    let km = KmBreather::new(1.0, 1.2)?;
    println!("nu0 = 1, nu = 1.2: eta = {:.6}, period = {:.6}", km.eta, km.period);
    for n in [128, 256, 512, 1024] {
        let r = km_residual(&km, &Grid::new(40.0, n)?, 64);
        println!("L = 40, N = {n:>4}: max residual {r:.3e}");
    }
    for k in 0..=4 {
        let t = km.period * k as f64 / 4.0;
        println!("t = {t:.4}: |psi(t, 0)| = {:.6}", km.value(t, 0.0).norm());
    }
    Ok(())
}

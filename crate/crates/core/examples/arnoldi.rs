//! Leading monodromy eigenvalues from restarted Arnoldi against the dense
//! eigensolver.
//!
//! `cargo run --release --example arnoldi`

use breather_floquet::cli::DEFAULT_SEED;
use breather_floquet::evolve::{IntegratorConfig, Trajectory};
use breather_floquet::model::{Grid, Parameters};
use breather_floquet::monodromy::{arnoldi_monodromy, assemble_monodromy, eigen_cloud, MonodromyConfig};

fn main() -> breather_floquet::Result<()> {
    let p = Parameters::linear(1.0, 0.125, -0.1, 0.0);
    let bg = Trajectory::zero(p, Grid::new(20.0, 64)?, 1.0)?;
    let cfg = IntegratorConfig::default_for(&p, 0.01);
    let arnoldi = arnoldi_monodromy(&bg, 0.0, cfg, 6, 40, 20, DEFAULT_SEED)?;
    let dense = eigen_cloud(&assemble_monodromy(&bg, 0.0, &MonodromyConfig::new(cfg))?)?.values;
    println!("restarts {}", arnoldi.restarts);
    for (z, r) in arnoldi.values.iter().zip(&arnoldi.residual_estimates) {
        let gap = dense.iter().map(|d| (d - z).norm()).fold(f64::INFINITY, f64::min);
        println!("ritz {:.10} {:+.10}i  residual {r:.1e}  nearest dense eigenvalue {gap:.1e}", z.re, z.im);
    }
    Ok(())
}

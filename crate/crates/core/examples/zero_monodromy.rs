//! Monodromy of the zero solution against its closed-form spectrum, with
//! the Fourier block structure of the matrix.
//!
//! `cargo run --release --example zero_monodromy`

use breather_floquet::evolve::{IntegratorConfig, Trajectory};
use breather_floquet::model::{Grid, Parameters};
use breather_floquet::monodromy::{
    assemble_monodromy, eigen_cloud, fourier_block_check, match_eigenvalues, zero_background_eigenvalues, MonodromyConfig,
};

fn main() -> breather_floquet::Result<()> {
    let p = Parameters::linear(1.0, 0.125, -0.1, 0.0);
    let grid = Grid::new(20.0, 64)?;
    let bg = Trajectory::zero(p, grid.clone(), 1.0)?;
    let m = assemble_monodromy(&bg, 0.0, &MonodromyConfig::new(IntegratorConfig::default_for(&p, 0.01)))?;
    let cloud = eigen_cloud(&m)?;
    let err = match_eigenvalues(&cloud.values, &zero_background_eigenvalues(&p, &grid, 1.0));
    let block = fourier_block_check(&m);
    println!("{} eigenvalues, max matching error {err:.3e}", cloud.values.len());
    println!("off-block energy ratio {:.3e}, max block error {:.3e}", block.off_block_ratio, block.max_block_error);
    Ok(())
}

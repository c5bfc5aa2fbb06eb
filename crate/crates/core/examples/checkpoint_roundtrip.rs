//! Stores a KM period as a binary checkpoint and reloads it.
//!
//! `cargo run --release --example checkpoint_roundtrip`

use breather_floquet::cli::pipeline::km_trajectory;
use breather_floquet::evolve::{read_checkpoint, write_checkpoint};
use breather_floquet::model::Grid;

fn main() -> breather_floquet::Result<()> {
    let tr = km_trajectory(1.0, 1.2, &Grid::new(40.0, 128)?, 0.01)?;
    let path = std::env::temp_dir().join("km_period.bin");
    write_checkpoint(&path, &tr)?;
    let back = read_checkpoint(&path)?;
    let same = tr.states.iter().zip(&back.states).all(|(a, b)| a.re == b.re && a.im == b.im);
    println!("{} states, period {:?}, bitwise identical: {same}", back.states.len(), back.period);
    println!("periodicity deviation {:.3e}", back.periodicity_deviation());
    std::fs::remove_file(&path)?;
    Ok(())
}

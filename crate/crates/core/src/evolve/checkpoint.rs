//! Binary trajectory container.
//!
//! Layout, all little-endian:
//!
//! | offset | size     | content                                               |
//! |--------|----------|-------------------------------------------------------|
//! | 0      | 8        | magic `BFTRAJ01`                                      |
//! | 8      | 8        | `u64` grid points `N`                                 |
//! | 16     | 8        | `f64` grid length `L`                                 |
//! | 24     | 64       | `f64` × 8: `D, β, δ, α, γ, ε, ν, μ`                   |
//! | 88     | 8        | `f64` time step between stored states                 |
//! | 96     | 8        | `f64` time of the first state                         |
//! | 104    | 8        | `f64` period, NaN when not declared periodic          |
//! | 112    | 8        | `u64` state count `K`                                 |
//! | 120    | 16·N·K   | per state: `N` real parts, then `N` imaginary parts   |

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::model::{FieldState, Grid, Parameters};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"BFTRAJ01";

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn get_u64(r: &mut impl Read) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn param_array(p: &Parameters) -> [f64; 8] {
    [p.d, p.beta, p.delta, p.alpha, p.gamma, p.epsilon, p.nu, p.mu]
}

pub fn write_checkpoint(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(CHECKPOINT_MAGIC)?;
    w.write_all(&(trajectory.grid.n as u64).to_le_bytes())?;
    put_f64(&mut w, trajectory.grid.length)?;
    for v in param_array(&trajectory.params) {
        put_f64(&mut w, v)?;
    }
    put_f64(&mut w, trajectory.dt())?;
    put_f64(&mut w, trajectory.start())?;
    put_f64(&mut w, trajectory.period.unwrap_or(f64::NAN))?;
    w.write_all(&(trajectory.states.len() as u64).to_le_bytes())?;
    for s in &trajectory.states {
        for &v in s.re.iter().chain(&s.im) {
            put_f64(&mut w, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Trajectory> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!("{}: bad magic", path.display())));
    }
    let n = get_u64(&mut r)? as usize;
    let length = get_f64(&mut r)?;
    let mut p = [0.0; 8];
    for v in p.iter_mut() {
        *v = get_f64(&mut r)?;
    }
    let params = Parameters { d: p[0], beta: p[1], delta: p[2], alpha: p[3], gamma: p[4], epsilon: p[5], nu: p[6], mu: p[7] };
    let dt = get_f64(&mut r)?;
    let t0 = get_f64(&mut r)?;
    let period = get_f64(&mut r)?;
    let count = get_u64(&mut r)? as usize;
    if count == 0 || n > 1 << 24 || count > 1 << 24 {
        return Err(Error::Checkpoint(format!("implausible header: n = {n}, count = {count}")));
    }
    let grid = Grid::new(length, n)?;
    let mut states = Vec::with_capacity(count);
    for k in 0..count {
        let mut re = vec![0.0; n];
        let mut im = vec![0.0; n];
        for v in re.iter_mut().chain(im.iter_mut()) {
            *v = get_f64(&mut r).map_err(|_| Error::Checkpoint(format!("truncated at state {k}")))?;
        }
        states.push(FieldState { t: t0 + k as f64 * dt, re, im });
    }
    if r.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Checkpoint("trailing bytes after last state".into()));
    }
    let mut tr = Trajectory::new(states, params, grid)?;
    if period.is_finite() {
        tr.period = Some(period);
    }
    Ok(tr)
}

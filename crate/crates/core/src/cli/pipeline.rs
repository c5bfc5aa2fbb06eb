//! Resolution of a solution descriptor into a periodic background.

use crate::analytic::{Background, KmBreather};
use crate::breather::{find_breather, BreatherSearch, Outcome};
use crate::error::{Error, Result};
use crate::evolve::{read_checkpoint, IntegratorConfig, Trajectory, PERIODICITY_TOLERANCE};
use crate::model::{fnlse_params, FieldState, Grid};
use crate::monodromy::MonodromyConfig;
use crate::spectral::resample;

use super::config::{RunConfig, SolutionSection};

/// A periodic background with its far field and, for searched breathers,
/// the detection that produced it.
pub struct ResolvedBackground {
    pub trajectory: Trajectory,
    pub far_field: Background,
    pub search: Option<BreatherSearch>,
}

/// Closed-form KM breather stored at `round(T/dt)` steps over one period.
pub fn km_trajectory(nu0: f64, nu: f64, grid: &Grid, dt: f64) -> Result<Trajectory> {
    let km = KmBreather::new(nu0, nu)?;
    let steps = ((km.period / dt).round() as usize).max(4);
    Trajectory::from_fn(fnlse_params(nu0)?, grid.clone(), 0.0, km.period, steps, |t| {
        FieldState::from_complex(t, &km.sample(t, grid))
    })?
    .into_periodic(PERIODICITY_TOLERANCE)
}

fn periodic_search(search: BreatherSearch) -> Result<ResolvedBackground> {
    match (&search.trajectory, search.detection.outcome) {
        (Some(tr), Outcome::Periodic) => Ok(ResolvedBackground {
            trajectory: tr.clone(),
            far_field: Background::Decaying,
            search: Some(search),
        }),
        (_, Outcome::BlowUp) => Err(Error::BlowUp { t: search.detection.observable_trace.last().map_or(0.0, |s| s.t) }),
        _ => Err(Error::NotPeriodic { deviation: search.detection.deviation, tolerance: PERIODICITY_TOLERANCE }),
    }
}

/// Background at the configured grid.
pub fn resolve_background(config: &RunConfig) -> Result<ResolvedBackground> {
    let grid = config.grid()?;
    match &config.solution {
        SolutionSection::Km { nu0, nu } => Ok(ResolvedBackground {
            trajectory: km_trajectory(*nu0, *nu, &grid, config.integrator.dt)?,
            far_field: Background::Km { nu0: *nu0 },
            search: None,
        }),
        SolutionSection::Zero { period } => Ok(ResolvedBackground {
            trajectory: Trajectory::zero(config.params()?, grid, *period)?,
            far_field: Background::Decaying,
            search: None,
        }),
        SolutionSection::CustomCheckpoint { path } => {
            let tr = read_checkpoint(path)?;
            let tr = match tr.period {
                Some(_) => tr,
                None => tr.into_periodic(PERIODICITY_TOLERANCE)?,
            };
            Ok(ResolvedBackground { trajectory: tr, far_field: Background::Decaying, search: None })
        }
        SolutionSection::CglBreather { pulse } => {
            let params = config.params()?;
            let search = find_breather(&params, &grid, &pulse.state(&grid), &config.breather_config()?)?;
            periodic_search(search)
        }
    }
}

/// Backgrounds at every refinement size, smallest first. A searched
/// breather found at the configured grid seeds each resolution through
/// Fourier resampling.
pub fn refinement_backgrounds(config: &RunConfig, base: &ResolvedBackground) -> Result<Vec<Trajectory>> {
    let mut sizes = config.monodromy.refinement.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let params = config.params()?;
    let mut out = Vec::with_capacity(sizes.len());
    for n in sizes {
        let grid = Grid::new(config.grid.length, n)?;
        let tr = match (&config.solution, &base.search) {
            (_, _) if n == base.trajectory.grid.n => base.trajectory.clone(),
            (SolutionSection::CglBreather { .. }, Some(search)) => {
                let seed = search.final_state.as_ref().unwrap_or(&base.trajectory.states[0]);
                let init = FieldState::from_complex(0.0, &resample(&seed.to_complex(), n));
                let mut bc = config.breather_config()?;
                bc.transient_time = config.breather.refine_transient_time;
                // the seed is already in the co-rotating frame
                let frame = search.params;
                periodic_search(find_breather(&frame, &grid, &init, &bc)?)?.trajectory
            }
            (SolutionSection::Km { nu0, nu }, _) => km_trajectory(*nu0, *nu, &grid, config.integrator.dt)?,
            (SolutionSection::Zero { period }, _) => Trajectory::zero(params, grid, *period)?,
            _ => {
                return Err(Error::Config(format!(
                    "refinement to N = {n} needs a km, zero or cgl-breather descriptor"
                )))
            }
        };
        out.push(tr);
    }
    Ok(out)
}

/// Linearized integrator settings for a stored background.
pub fn monodromy_config(config: &RunConfig, background: &Trajectory, workers: usize) -> Result<MonodromyConfig> {
    let dt = config.monodromy.dt.unwrap_or(2.0 * background.dt());
    let integrator = IntegratorConfig { dt, ..config.integrator.build(&background.params) };
    let mut m = MonodromyConfig::new(integrator).with_workers(workers);
    m.batch = config.monodromy.batch.max(1);
    Ok(m)
}

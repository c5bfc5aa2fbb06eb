//! Periodically-stationary pulses found by long-time integration.
//!
//! A run integrates through a transient, estimates the period from the
//! autocorrelation of the `L²`-norm trace, refines it by minimizing the
//! full-state mismatch `‖ψ(t0 + T) e^{−iθ} − ψ(t0)‖`, and re-records one
//! period. A pulse that recurs up to a global phase `θ` is exactly periodic
//! in a frame rotating at `θ/T`, which amounts to replacing `α` by
//! `α − θ/T`; the returned trajectory carries the adjusted parameters.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{IntegratorConfig, NonlinearIntegrator, Trajectory, PERIODICITY_TOLERANCE};
use crate::model::{FieldState, Grid, Parameters};

/// Golden ratio conjugate used by the one-dimensional searches.
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Localized initial guess `amplitude · sech((x − center)/width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub amplitude: f64,
    pub width: f64,
    #[serde(default)]
    pub center: f64,
}

impl Default for Pulse {
    fn default() -> Self {
        Self { amplitude: 1.5, width: 1.0, center: 0.0 }
    }
}

impl Pulse {
    pub fn state(&self, grid: &Grid) -> FieldState {
        FieldState::from_fn(0.0, grid, |x| Complex64::new(self.amplitude / ((x - self.center) / self.width).cosh(), 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreatherConfig {
    pub integrator: IntegratorConfig,
    /// Integration time discarded before the first detection attempt.
    pub transient_time: f64,
    /// The transient is extended up to this many period estimates.
    pub transient_periods: f64,
    /// Optional wall-clock cap in seconds on the transient.
    pub wall_time: Option<f64>,
    /// Length of the norm trace used for autocorrelation.
    pub search_window: f64,
    /// Integrator steps between trace samples.
    pub trace_stride: usize,
    /// Relative `L²` mismatch accepted as periodic.
    pub tolerance: f64,
    /// Steps per period when re-recording the accepted orbit; `None` reuses
    /// the discretization the period was refined with.
    pub record_steps: Option<usize>,
    /// `L²` norm below which the run counts as decayed.
    pub decay_norm: f64,
    /// Relative variation of the norm trace below which the run counts as
    /// stationary.
    pub stationary_tolerance: f64,
    /// Allow recurrence up to a global phase.
    pub phase_frame: bool,
}

impl BreatherConfig {
    pub fn new(integrator: IntegratorConfig) -> Self {
        Self {
            integrator,
            transient_time: 200.0,
            transient_periods: 50.0,
            wall_time: None,
            search_window: 60.0,
            trace_stride: 5,
            tolerance: PERIODICITY_TOLERANCE,
            record_steps: None,
            decay_norm: 1e-8,
            stationary_tolerance: 1e-9,
            phase_frame: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Periodic,
    /// Time-independent modulus; any period fits.
    Stationary,
    Decayed,
    BlowUp,
    NoRecurrence,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Periodic => "periodic",
            Outcome::Stationary => "stationary",
            Outcome::Decayed => "decayed",
            Outcome::BlowUp => "blow-up",
            Outcome::NoRecurrence => "no-recurrence",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub norm: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodDetection {
    pub outcome: Outcome,
    /// Refined period; `None` unless the outcome is periodic.
    pub period: Option<f64>,
    /// Autocorrelation estimate before refinement.
    pub period_estimate: Option<f64>,
    /// Phase advance `θ` over one period.
    pub phase: f64,
    /// Relative `L²` mismatch over one period (in the rotating frame).
    pub deviation: f64,
    /// `α − θ/T`, the linear phase of the co-rotating frame.
    pub frame_alpha: f64,
    /// Time at which the accepted period starts.
    pub start_time: f64,
    pub observable_trace: Vec<TraceSample>,
}

/// Result of [`find_breather`]. The trajectory is present only for a
/// periodic outcome and is stored in the co-rotating frame.
#[derive(Debug, Clone)]
pub struct BreatherSearch {
    pub detection: PeriodDetection,
    pub trajectory: Option<Trajectory>,
    pub params: Parameters,
    pub final_state: Option<FieldState>,
}

fn inner(a: &FieldState, b: &FieldState) -> Complex64 {
    a.re.iter()
        .zip(&a.im)
        .zip(b.re.iter().zip(&b.im))
        .map(|((&ar, &ai), (&br, &bi))| Complex64::new(ar, -ai) * Complex64::new(br, bi))
        .sum()
}

/// `(deviation, θ)` with `θ` the phase aligning `later` onto `earlier`.
fn aligned_mismatch(earlier: &FieldState, later: &FieldState, dx: f64, phase_frame: bool) -> (f64, f64) {
    let theta = if phase_frame { inner(earlier, later).arg() } else { 0.0 };
    let rot = Complex64::from_polar(1.0, -theta);
    let mut d2 = 0.0;
    for j in 0..earlier.len() {
        let z = Complex64::new(later.re[j], later.im[j]) * rot - Complex64::new(earlier.re[j], earlier.im[j]);
        d2 += z.norm_sqr();
    }
    let n = earlier.norm_l2(dx);
    let d = (d2 * dx).sqrt();
    (if n > 0.0 { d / n } else { d }, theta)
}

/// First autocorrelation maximum after the first zero crossing, refined by a
/// parabola through the three neighbouring lags; in units of samples.
pub fn autocorrelation_period(trace: &[f64]) -> Option<f64> {
    let n = trace.len();
    if n < 8 {
        return None;
    }
    let mean = trace.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = trace.iter().map(|v| v - mean).collect();
    let var: f64 = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return None;
    }
    let r = |l: usize| -> f64 { x.iter().zip(&x[l..]).map(|(a, b)| a * b).sum::<f64>() / ((n - l) as f64 * var) };
    let max_lag = 2 * n / 3;
    let rs: Vec<f64> = (0..=max_lag).map(r).collect();
    let first_negative = rs.iter().position(|&v| v < 0.0)?;
    let mut best: Option<usize> = None;
    for l in first_negative.max(1)..max_lag {
        if rs[l] > rs[l - 1] && rs[l] >= rs[l + 1] && rs[l] > 0.3 {
            best = Some(l);
            break;
        }
    }
    let l = best?;
    let (a, b, c) = (rs[l - 1], rs[l], rs[l + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Some(l as f64 + shift.clamp(-0.5, 0.5))
}

struct Searcher<'a> {
    params: &'a Parameters,
    grid: &'a Grid,
    config: &'a BreatherConfig,
}

impl Searcher<'_> {
    /// Integrates `start` over exactly `span` using a step close to `dt`.
    fn flow(&self, params: &Parameters, start: &FieldState, span: f64) -> Result<FieldState> {
        let (n, h) = self.config.integrator.steps_for(span);
        let cfg = IntegratorConfig { dt: h, ..self.config.integrator };
        NonlinearIntegrator::new(params, self.grid, cfg)?.advance(start, n)
    }

    fn mismatch(&self, start: &FieldState, period: f64) -> Result<(f64, f64)> {
        let end = self.flow(self.params, start, period)?;
        Ok(aligned_mismatch(start, &end, self.grid.dx(), self.config.phase_frame))
    }

    /// Golden-section minimization of the mismatch over `[a, b]`.
    fn refine(&self, start: &FieldState, mut a: f64, mut b: f64) -> Result<(f64, f64, f64)> {
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let mut fc = self.mismatch(start, c)?;
        let mut fd = self.mismatch(start, d)?;
        while b - a > 1e-10 * b {
            if fc.0 < fd.0 {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = self.mismatch(start, c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = self.mismatch(start, d)?;
            }
        }
        let t = 0.5 * (a + b);
        let (dev, theta) = self.mismatch(start, t)?;
        Ok((t, dev, theta))
    }
}

fn sample(state: &FieldState, dx: f64) -> TraceSample {
    TraceSample { t: state.t, norm: state.norm_l2(dx), peak: state.max_abs() }
}

/// Searches for a periodically-stationary solution from `initial`.
pub fn find_breather(params: &Parameters, grid: &Grid, initial: &FieldState, config: &BreatherConfig) -> Result<BreatherSearch> {
    params.validate()?;
    config.integrator.validate()?;
    if initial.len() != grid.n {
        return Err(Error::InvalidConfig("initial state does not match the grid".into()));
    }
    let searcher = Searcher { params, grid, config };
    let integ = NonlinearIntegrator::new(params, grid, config.integrator)?;
    let dx = grid.dx();
    let dt = integ.dt();
    let stride = config.trace_stride.max(1);
    let clock = Instant::now();

    let mut detection = PeriodDetection {
        outcome: Outcome::NoRecurrence,
        period: None,
        period_estimate: None,
        phase: 0.0,
        deviation: f64::INFINITY,
        frame_alpha: params.alpha,
        start_time: 0.0,
        observable_trace: vec![sample(initial, dx)],
    };
    let finish = |mut detection: PeriodDetection, outcome: Outcome, state: Option<FieldState>| BreatherSearch {
        detection: {
            detection.outcome = outcome;
            detection
        },
        trajectory: None,
        params: *params,
        final_state: state,
    };

    // advances by `span`, tracing; Ok(None) when the run decayed
    let advance = |state: &mut FieldState, span: f64, trace: &mut Vec<TraceSample>| -> Result<Option<()>> {
        let steps = (span / dt).round() as usize;
        let mut done = 0;
        while done < steps {
            let k = stride.min(steps - done);
            *state = integ.advance(state, k)?;
            done += k;
            let s = sample(state, dx);
            trace.push(s);
            if s.norm < config.decay_norm {
                return Ok(None);
            }
        }
        Ok(Some(()))
    };

    let mut state = initial.clone();
    let mut trace = std::mem::take(&mut detection.observable_trace);
    let mut elapsed_transient = config.transient_time;
    match advance(&mut state, config.transient_time, &mut trace) {
        Err(Error::BlowUp { .. }) => {
            detection.observable_trace = trace;
            return Ok(finish(detection, Outcome::BlowUp, None));
        }
        Err(e) => return Err(e),
        Ok(None) => {
            detection.observable_trace = trace;
            return Ok(finish(detection, Outcome::Decayed, Some(state)));
        }
        Ok(Some(())) => {}
    }

    loop {
        let t0_state = state.clone();
        let window_start = trace.len();
        match advance(&mut state, config.search_window, &mut trace) {
            Err(Error::BlowUp { .. }) => {
                detection.observable_trace = trace;
                return Ok(finish(detection, Outcome::BlowUp, None));
            }
            Err(e) => return Err(e),
            Ok(None) => {
                detection.observable_trace = trace;
                return Ok(finish(detection, Outcome::Decayed, Some(state)));
            }
            Ok(Some(())) => {}
        }
        let norms: Vec<f64> = trace[window_start..].iter().map(|s| s.norm).collect();
        let (lo, hi) = norms.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        let mean = norms.iter().sum::<f64>() / norms.len() as f64;
        if (hi - lo) <= config.stationary_tolerance * mean {
            let (dev, theta) = aligned_mismatch(&t0_state, &state, dx, true);
            detection.deviation = dev;
            detection.phase = theta;
            detection.start_time = t0_state.t;
            detection.observable_trace = trace;
            let outcome = if dev < config.tolerance { Outcome::Stationary } else { Outcome::NoRecurrence };
            return Ok(finish(detection, outcome, Some(state)));
        }

        let sample_dt = dt * stride as f64;
        let estimate = autocorrelation_period(&norms).map(|l| l * sample_dt);
        if let Some(t_est) = estimate {
            detection.period_estimate = Some(t_est);
            let half_width = (2.0 * sample_dt).max(0.02 * t_est);
            let mut best: Option<(f64, f64, f64)> = None;
            // subharmonic guard: smallest divisor meeting tolerance wins
            for k in [3.0, 2.0, 1.0] {
                let guess = t_est / k;
                if guess < 10.0 * dt || guess - half_width / k <= 0.0 {
                    continue;
                }
                let cand = searcher.refine(&t0_state, guess - half_width / k, guess + half_width / k)?;
                if cand.1 < config.tolerance {
                    best = Some(cand);
                    break;
                }
                if k == 1.0 {
                    best = Some(cand);
                }
            }
            if let Some((period, dev, theta)) = best {
                detection.period = Some(period);
                detection.deviation = dev;
                detection.phase = theta;
                detection.start_time = t0_state.t;
                if dev < config.tolerance {
                    // any off-period span also recurring means a stationary state
                    let (off, off_theta) = searcher.mismatch(&t0_state, GOLDEN * period)?;
                    if off < config.tolerance {
                        detection.period = None;
                        detection.deviation = off;
                        detection.phase = off_theta;
                        detection.observable_trace = trace;
                        return Ok(finish(detection, Outcome::Stationary, Some(state)));
                    }
                    detection.frame_alpha = if config.phase_frame { params.alpha - theta / period } else { params.alpha };
                    detection.observable_trace = trace;
                    return record_period(params, grid, config, t0_state, detection);
                }
            }
        }

        let cap = config.transient_periods * detection.period_estimate.unwrap_or(config.search_window);
        let out_of_time = config.wall_time.is_some_and(|w| clock.elapsed().as_secs_f64() > w);
        if elapsed_transient >= cap || out_of_time {
            detection.period = None;
            detection.observable_trace = trace;
            return Ok(finish(detection, Outcome::NoRecurrence, Some(state)));
        }
        elapsed_transient += config.search_window;
    }
}

/// Re-integrates one period in the co-rotating frame at `record_steps`
/// steps, storing every step.
fn record_period(
    params: &Parameters,
    grid: &Grid,
    config: &BreatherConfig,
    start: FieldState,
    mut detection: PeriodDetection,
) -> Result<BreatherSearch> {
    let period = detection.period.expect("periodic outcome");
    let frame = Parameters { alpha: detection.frame_alpha, ..*params };
    let steps = config.record_steps.unwrap_or_else(|| config.integrator.steps_for(period).0).max(4);
    let cfg = IntegratorConfig { dt: period / steps as f64, ..config.integrator };
    let integ = NonlinearIntegrator::new(&frame, grid, cfg)?;
    let origin = FieldState { t: 0.0, ..start };
    let trajectory = integ.record(&origin, steps, 1)?;
    let dev = trajectory.periodicity_deviation();
    detection.deviation = dev;
    if !(dev < config.tolerance) {
        let last = trajectory.states.last().cloned();
        detection.outcome = Outcome::NoRecurrence;
        return Ok(BreatherSearch { detection, trajectory: None, params: frame, final_state: last });
    }
    let trajectory = trajectory.into_periodic(config.tolerance)?;
    detection.outcome = Outcome::Periodic;
    let last = trajectory.states.last().cloned();
    Ok(BreatherSearch { detection, trajectory: Some(trajectory), params: frame, final_state: last })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    /// Bounded, and the tail decays exponentially at every stored time.
    Certified,
    /// At least one audited hypothesis failed numerically.
    Downgraded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisAudit {
    pub sup_norm_psi: f64,
    pub sup_norm_psi_t: f64,
    /// Minimum over stored times of the fitted tail rate; `None` when the
    /// deviation from the background vanishes identically.
    pub tail_rate: Option<f64>,
    pub certification: Certification,
    pub reasons: Vec<String>,
}

/// Smallest tail rate accepted as exponential decay.
pub const MIN_TAIL_RATE: f64 = 0.05;

/// Least-squares slope of `ln |ψ(x) − ψ∞|` against `|x|` over the outer
/// quarter of the domain, negated; `None` if fewer than four points rise
/// above rounding level.
pub fn tail_rate(grid: &Grid, state: &FieldState, psi_inf: Complex64) -> Option<f64> {
    let cut = 0.375 * grid.length;
    let scale = state.max_abs().max(psi_inf.norm()).max(f64::MIN_POSITIVE);
    let pts: Vec<(f64, f64)> = grid
        .x
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() >= cut)
        .filter_map(|(j, x)| {
            let d = (Complex64::new(state.re[j], state.im[j]) - psi_inf).norm();
            (d > 1e-13 * scale).then(|| (x.abs(), d.ln()))
        })
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Numerical audit of boundedness of `ψ`, `ψ_t` and exponential approach to
/// the background `psi_inf` along a stored trajectory.
pub fn hypothesis_audit(trajectory: &Trajectory, psi_inf: Complex64) -> HypothesisAudit {
    let mut reasons = Vec::new();
    let sup_norm_psi = trajectory.states.iter().map(|s| s.max_abs()).fold(0.0, f64::max);
    let k = trajectory.states.len();
    let dt = trajectory.dt();
    let mut sup_norm_psi_t: f64 = 0.0;
    if k >= 2 && dt > 0.0 {
        // centred differences, one-sided at the ends unless periodic
        let last = if trajectory.period.is_some() { k - 1 } else { k };
        for i in 0..k {
            let (a, b, h) = match (i, trajectory.period.is_some()) {
                (0, true) => (last - 1, 1, 2.0 * dt),
                (i, true) if i == k - 1 => (k - 2, 1, 2.0 * dt),
                (0, false) => (0, 1, dt),
                (i, false) if i == k - 1 => (k - 2, k - 1, dt),
                (i, _) => (i - 1, i + 1, 2.0 * dt),
            };
            let (sa, sb) = (&trajectory.states[a], &trajectory.states[b]);
            for j in 0..sa.len() {
                let d = Complex64::new(sb.re[j] - sa.re[j], sb.im[j] - sa.im[j]).norm() / h;
                sup_norm_psi_t = sup_norm_psi_t.max(d);
            }
        }
    }
    if !(sup_norm_psi.is_finite() && sup_norm_psi_t.is_finite()) {
        reasons.push("unbounded field or time derivative".to_string());
    }
    let identically_background = trajectory.states.iter().all(|s| {
        s.re.iter().zip(&s.im).all(|(&r, &i)| Complex64::new(r, i) == psi_inf)
    });
    let tail = if identically_background {
        None
    } else {
        let rates: Vec<Option<f64>> = trajectory.states.iter().map(|s| tail_rate(&trajectory.grid, s, psi_inf)).collect();
        if rates.iter().any(|r| r.is_none()) {
            reasons.push("tail fit failed at some stored time".to_string());
        }
        let min = rates.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            if min < MIN_TAIL_RATE {
                reasons.push(format!("tail rate {min:.3e} below {MIN_TAIL_RATE}"));
            }
            Some(min)
        } else {
            reasons.push("no decaying tail".to_string());
            Some(0.0)
        }
    };
    HypothesisAudit {
        sup_norm_psi,
        sup_norm_psi_t,
        tail_rate: tail,
        certification: if reasons.is_empty() { Certification::Certified } else { Certification::Downgraded },
        reasons,
    }
}

/// JSON digest of a detection run and its audit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BreatherReport {
    pub outcome: Outcome,
    pub period: Option<f64>,
    pub deviation: f64,
    pub sup_norm_psi: Option<f64>,
    pub sup_norm_psi_t: Option<f64>,
    pub tail_rate: Option<f64>,
    pub certification: Option<Certification>,
}

impl BreatherReport {
    pub fn new(detection: &PeriodDetection, audit: Option<&HypothesisAudit>) -> Self {
        Self {
            outcome: detection.outcome,
            period: detection.period,
            deviation: detection.deviation,
            sup_norm_psi: audit.map(|a| a.sup_norm_psi),
            sup_norm_psi_t: audit.map(|a| a.sup_norm_psi_t),
            tail_rate: audit.and_then(|a| a.tail_rate),
            certification: audit.map(|a| a.certification),
        }
    }
}

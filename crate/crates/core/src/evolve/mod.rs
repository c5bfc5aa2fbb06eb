//! Time integration of the nonlinear system and of its linearization about a
//! stored background trajectory, i.e. the discrete evolution family `U(t, s)`.
//!
//! Both problems are split as `u_t = L u + N(t, u)` where `L = B∂x² + N0` is
//! constant-coefficient and acts on `ψ̂_k` as multiplication by
//! `(δ − ξ²β) + i(α − ξ²D/2)`. `L` is always treated exactly; the schemes
//! differ only in how `N` enters.

mod checkpoint;
mod stepper;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::multiplication_matrix;
use crate::error::{Error, Result};
use crate::model::{coef_matrices, FieldState, Grid, Mat2, Parameters, PerturbationState};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub(crate) use stepper::{Forcing, Stepper, Workspace};

/// Relative `L²` deviation below which a trajectory counts as `T`-periodic.
pub const PERIODICITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Exponential time differencing RK4 (Cox-Matthews).
    EtdRk4,
    /// Strang splitting.
    SplitStep,
    /// Integrating-factor RK4.
    Rk4Reference,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::EtdRk4 => "etd-rk4",
            Scheme::SplitStep => "split-step",
            Scheme::Rk4Reference => "rk4-reference",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "etd-rk4" => Ok(Scheme::EtdRk4),
            "split-step" => Ok(Scheme::SplitStep),
            "rk4-reference" => Ok(Scheme::Rk4Reference),
            other => Err(Error::InvalidConfig(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    pub dealias: bool,
}

impl IntegratorConfig {
    /// ETDRK4 when `β > 0`, Strang splitting when `β = 0`; dealiasing on for
    /// quintic nonlinearities.
    pub fn default_for(params: &Parameters, dt: f64) -> Self {
        Self {
            dt,
            scheme: if params.beta > 0.0 { Scheme::EtdRk4 } else { Scheme::SplitStep },
            dealias: params.has_quintic(),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// Number of steps of size close to `dt` covering `span`, and the exact
    /// step that lands on the end point.
    pub fn steps_for(&self, span: f64) -> (usize, f64) {
        if span <= 0.0 {
            return (0, self.dt);
        }
        let n = ((span / self.dt).round() as usize).max(1);
        (n, span / n as f64)
    }
}

fn symbol(params: &Parameters, grid: &Grid) -> Vec<Complex64> {
    grid.wavenumbers.iter().map(|&xi| params.linear_symbol(xi)).collect()
}

/// Cubic-quintic forcing `(ε + iγ)|u|²u + (μ + iν)|u|⁴u`.
struct NonlinearForcing {
    cubic: Complex64,
    quintic: Complex64,
}

impl NonlinearForcing {
    fn rhs(&self, u: Complex64) -> Complex64 {
        let r2 = u.norm_sqr();
        (self.cubic + self.quintic * r2) * r2 * u
    }
}

impl Forcing for NonlinearForcing {
    type Coeff = ();

    fn coeff(&self, _t: f64) -> Result<()> {
        Ok(())
    }

    fn apply(&self, _: &(), u: &[Complex64], out: &mut [Complex64]) {
        for (o, &z) in out.iter_mut().zip(u) {
            *o = self.rhs(z);
        }
    }

    fn flow(&self, _: &(), h: f64, u: &mut [Complex64]) {
        if self.cubic.re == 0.0 && self.quintic.re == 0.0 {
            // modulus is conserved: exact phase rotation
            for z in u.iter_mut() {
                let r2 = z.norm_sqr();
                *z *= Complex64::from_polar(1.0, h * (self.cubic.im + self.quintic.im * r2) * r2);
            }
        } else {
            for z in u.iter_mut() {
                let k1 = self.rhs(*z);
                let k2 = self.rhs(*z + 0.5 * h * k1);
                let k3 = self.rhs(*z + 0.5 * h * k2);
                let k4 = self.rhs(*z + h * k3);
                *z += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4);
            }
        }
    }
}

/// Integrator for the nonlinear system on a fixed grid and step.
pub struct NonlinearIntegrator {
    pub params: Parameters,
    pub grid: Grid,
    pub config: IntegratorConfig,
    stepper: Stepper,
    forcing: NonlinearForcing,
}

impl NonlinearIntegrator {
    pub fn new(params: &Parameters, grid: &Grid, config: IntegratorConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        Ok(Self {
            params: *params,
            grid: grid.clone(),
            config,
            stepper: Stepper::new(&symbol(params, grid), config.dt, config.scheme, config.dealias),
            forcing: NonlinearForcing { cubic: params.cubic_coef(), quintic: params.quintic_coef() },
        })
    }

    pub fn dt(&self) -> f64 {
        self.stepper.h()
    }

    /// Advances `state` by `n_steps` steps of `dt`.
    pub fn advance(&self, state: &FieldState, n_steps: usize) -> Result<FieldState> {
        let mut ws = vec![self.stepper.workspace()];
        let mut batch = vec![state.to_complex()];
        self.stepper.to_fourier(&mut batch[0], &mut ws[0]);
        self.stepper.run(&self.forcing, state.t, n_steps, &mut batch, &mut ws)?;
        self.stepper.to_physical(&mut batch[0], &mut ws[0]);
        Ok(FieldState::from_complex(state.t + n_steps as f64 * self.dt(), &batch[0]))
    }

    /// Integrates `n_steps` steps storing every `stride`-th state (first
    /// and last included when `n_steps` is a multiple of `stride`).
    pub fn record(&self, state: &FieldState, n_steps: usize, stride: usize) -> Result<Trajectory> {
        let stride = stride.max(1);
        let mut ws = vec![self.stepper.workspace()];
        let mut v = vec![state.to_complex()];
        self.stepper.to_fourier(&mut v[0], &mut ws[0]);
        let t0 = state.t;
        let mut states = vec![FieldState { t: t0, ..state.clone() }];
        let mut done = 0;
        while done < n_steps {
            let chunk = stride.min(n_steps - done);
            self.stepper.run(&self.forcing, t0 + done as f64 * self.dt(), chunk, &mut v, &mut ws)?;
            done += chunk;
            if chunk == stride {
                let mut u = v[0].clone();
                self.stepper.to_physical(&mut u, &mut ws[0]);
                states.push(FieldState::from_complex(t0 + done as f64 * self.dt(), &u));
            }
        }
        Trajectory::new(states, self.params, self.grid.clone())
    }
}

/// One step of the nonlinear system.
pub fn step_nonlinear(state: &FieldState, params: &Parameters, grid: &Grid, config: &IntegratorConfig) -> Result<FieldState> {
    if !state.is_finite() {
        return Err(Error::BlowUp { t: state.t });
    }
    NonlinearIntegrator::new(params, grid, *config)?.advance(state, 1)
}

/// Stored solution on a uniform time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FieldState>,
    pub params: Parameters,
    pub grid: Grid,
    /// Set once the trajectory is accepted as one full period; lookups then
    /// wrap modulo the period.
    pub period: Option<f64>,
}

/// Lagrange weights for nodes at integer offsets `nodes` evaluated at `theta`.
fn lagrange_weights(nodes: [f64; 4], theta: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                w[i] *= (theta - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    w
}

impl Trajectory {
    pub fn new(states: Vec<FieldState>, params: Parameters, grid: Grid) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidConfig("a trajectory needs at least one state".into()));
        }
        if states.iter().any(|s| s.len() != grid.n) {
            return Err(Error::InvalidConfig("state length does not match the grid".into()));
        }
        let times: Vec<f64> = states.iter().map(|s| s.t).collect();
        if times.len() > 1 {
            let dt = times[1] - times[0];
            let uniform = dt > 0.0
                && times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.max(1.0));
            if !uniform {
                return Err(Error::InvalidConfig("trajectory times must be uniform and increasing".into()));
            }
        }
        Ok(Self { times, states, params, grid, period: None })
    }

    /// Samples `f(t)` at `n_intervals + 1` equally spaced times on `[t0, t1]`.
    pub fn from_fn(
        params: Parameters,
        grid: Grid,
        t0: f64,
        t1: f64,
        n_intervals: usize,
        f: impl Fn(f64) -> FieldState,
    ) -> Result<Self> {
        let n_intervals = n_intervals.max(1);
        let states = (0..=n_intervals)
            .map(|k| {
                let t = t0 + (t1 - t0) * k as f64 / n_intervals as f64;
                FieldState { t, ..f(t) }
            })
            .collect();
        Self::new(states, params, grid)
    }

    /// The identically-zero solution regarded as `period`-periodic.
    pub fn zero(params: Parameters, grid: Grid, period: f64) -> Result<Self> {
        let n = grid.n;
        let mut tr = Self::from_fn(params, grid, 0.0, period, 1, |t| FieldState::zeros(t, n))?;
        tr.period = Some(period);
        Ok(tr)
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn dt(&self) -> f64 {
        if self.times.len() > 1 { self.times[1] - self.times[0] } else { 0.0 }
    }

    /// `‖ψ(end) − ψ(start)‖ / ‖ψ(start)‖`, absolute when the start is zero.
    pub fn periodicity_deviation(&self) -> f64 {
        let dx = self.grid.dx();
        let first = &self.states[0];
        let last = self.states.last().expect("non-empty");
        let d = last.distance_l2(first, dx);
        let n = first.norm_l2(dx);
        if n > 0.0 { d / n } else { d }
    }

    /// Declares the stored span to be one period, after checking the
    /// endpoints agree within `tolerance`.
    pub fn into_periodic(mut self, tolerance: f64) -> Result<Self> {
        let deviation = self.periodicity_deviation();
        if !(deviation < tolerance) || self.states.len() < 2 {
            return Err(Error::NotPeriodic { deviation, tolerance });
        }
        self.period = Some(self.end() - self.start());
        Ok(self)
    }

    /// `ψ(t)` by four-point Lagrange interpolation in time; exact at the
    /// stored times. Periodic trajectories accept any `t`.
    pub fn interpolate(&self, t: f64) -> Result<FieldState> {
        let n_states = self.states.len();
        if n_states == 1 {
            if self.period.is_some() || t == self.start() {
                return Ok(FieldState { t, ..self.states[0].clone() });
            }
            return Err(Error::CoverageGap { t, start: self.start(), end: self.end() });
        }
        let dt = self.dt();
        let start = self.start();
        let intervals = n_states - 1;
        let rel = match self.period {
            Some(p) => (t - start).rem_euclid(p) / dt,
            None => {
                let slack = 1e-9 * dt;
                if t < start - slack || t > self.end() + slack {
                    return Err(Error::CoverageGap { t, start, end: self.end() });
                }
                ((t - start) / dt).clamp(0.0, intervals as f64)
            }
        };
        let k = rel.floor();
        let theta = rel - k;
        let k = k as usize;
        let node_tol = 1e-9;
        if theta < node_tol || theta > 1.0 - node_tol {
            let idx = if theta < node_tol { k } else { k + 1 };
            let idx = if self.period.is_some() { idx % intervals } else { idx.min(intervals) };
            return Ok(FieldState { t, ..self.states[idx].clone() });
        }
        // stencil base..base+3, centred on [k, k+1] where possible
        let base: isize = if self.period.is_some() {
            k as isize - 1
        } else if intervals < 3 {
            0
        } else {
            (k as isize - 1).clamp(0, intervals as isize - 3)
        };
        let w = lagrange_weights([0.0, 1.0, 2.0, 3.0], rel - base as f64);
        let index = |offset: usize| -> usize {
            let raw = base + offset as isize;
            if self.period.is_some() {
                raw.rem_euclid(intervals as isize) as usize
            } else {
                raw.clamp(0, intervals as isize) as usize
            }
        };
        let n = self.grid.n;
        let mut out = FieldState::zeros(t, n);
        for (o, wk) in w.iter().enumerate() {
            let s = &self.states[index(o)];
            for j in 0..n {
                out.re[j] += wk * s.re[j];
                out.im[j] += wk * s.im[j];
            }
        }
        Ok(out)
    }
}

/// Forcing of the linearized problem: `(M̃(t, x) − N0) p`.
pub(crate) struct LinearizedForcing<'a> {
    background: &'a Trajectory,
    params: Parameters,
    n0: Mat2,
}

impl<'a> LinearizedForcing<'a> {
    pub fn new(background: &'a Trajectory) -> Result<Self> {
        let params = background.params;
        Ok(Self { background, params, n0: coef_matrices(&params)?.n0 })
    }
}

/// 2×2 real matrix exponential in closed form.
fn expm2(m: &Mat2) -> Mat2 {
    let half_trace = 0.5 * m.trace();
    let k = m - Mat2::identity() * half_trace;
    // K traceless ⇒ K² = q I with q = −det K
    let q = -k.determinant();
    let (c, s) = if q.abs() < 1e-8 {
        (1.0 + q / 2.0 + q * q / 24.0, 1.0 + q / 6.0 + q * q / 120.0)
    } else if q > 0.0 {
        let r = q.sqrt();
        (r.cosh(), r.sinh() / r)
    } else {
        let r = (-q).sqrt();
        (r.cos(), r.sin() / r)
    };
    (Mat2::identity() * c + k * s) * half_trace.exp()
}

impl Forcing for LinearizedForcing<'_> {
    type Coeff = Vec<[f64; 4]>;

    fn coeff(&self, t: f64) -> Result<Self::Coeff> {
        let psi = self.background.interpolate(t)?;
        Ok(psi
            .re
            .iter()
            .zip(&psi.im)
            .map(|(&a, &b)| {
                let w = multiplication_matrix(&self.params, [a, b]) - self.n0;
                [w[(0, 0)], w[(0, 1)], w[(1, 0)], w[(1, 1)]]
            })
            .collect())
    }

    fn apply(&self, coeff: &Self::Coeff, u: &[Complex64], out: &mut [Complex64]) {
        for ((o, z), w) in out.iter_mut().zip(u).zip(coeff) {
            *o = Complex64::new(w[0] * z.re + w[1] * z.im, w[2] * z.re + w[3] * z.im);
        }
    }

    fn flow(&self, coeff: &Self::Coeff, h: f64, u: &mut [Complex64]) {
        for (z, w) in u.iter_mut().zip(coeff) {
            let e = expm2(&(Mat2::new(w[0], w[1], w[2], w[3]) * h));
            *z = Complex64::new(e[(0, 0)] * z.re + e[(0, 1)] * z.im, e[(1, 0)] * z.re + e[(1, 1)] * z.im);
        }
    }
}

/// Integrator for `∂t p = (B∂x² + M̃(t)) p` about a stored background.
pub struct LinearizedIntegrator<'a> {
    background: &'a Trajectory,
    config: IntegratorConfig,
    forcing: LinearizedForcing<'a>,
    symbol: Vec<Complex64>,
}

impl<'a> LinearizedIntegrator<'a> {
    pub fn new(background: &'a Trajectory, config: IntegratorConfig) -> Result<Self> {
        background.params.validate()?;
        config.validate()?;
        Ok(Self {
            background,
            config,
            forcing: LinearizedForcing::new(background)?,
            symbol: symbol(&background.params, &background.grid),
        })
    }

    pub fn background(&self) -> &Trajectory {
        self.background
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.config
    }

    fn check_coverage(&self, s: f64, t: f64) -> Result<()> {
        if self.background.period.is_some() {
            return Ok(());
        }
        let (a, b) = (self.background.start(), self.background.end());
        let slack = 1e-9 * self.background.dt().max(1e-300);
        for x in [s, t] {
            if x < a - slack || x > b + slack {
                return Err(Error::CoverageGap { t: x, start: a, end: b });
            }
        }
        Ok(())
    }

    pub(crate) fn stepper(&self, span: f64) -> (usize, Stepper) {
        let (n, h) = self.config.steps_for(span);
        (n, Stepper::new(&self.symbol, h, self.config.scheme, self.config.dealias))
    }

    /// Propagates complex-packed perturbations `p1 + i p2` from `s` to `t`.
    pub(crate) fn propagate_batch(&self, s: f64, t: f64, batch: &mut [Vec<Complex64>]) -> Result<()> {
        if t < s {
            return Err(Error::InvalidConfig(format!("cannot evolve backwards from {s} to {t}")));
        }
        self.check_coverage(s, t)?;
        if t == s || batch.is_empty() {
            return Ok(());
        }
        let (n_steps, stepper) = self.stepper(t - s);
        let mut ws: Vec<Workspace> = batch.iter().map(|_| stepper.workspace()).collect();
        for (v, w) in batch.iter_mut().zip(ws.iter_mut()) {
            stepper.to_fourier(v, w);
        }
        stepper.run(&self.forcing, s, n_steps, batch, &mut ws)?;
        for (v, w) in batch.iter_mut().zip(ws.iter_mut()) {
            stepper.to_physical(v, w);
        }
        Ok(())
    }

    /// `U(t, s) p` with `s = p.t`.
    pub fn evolve(&self, p: &PerturbationState, t: f64) -> Result<PerturbationState> {
        let mut batch = vec![p.to_complex()];
        self.propagate_batch(p.t, t, &mut batch)?;
        Ok(PerturbationState::from_complex(t, &batch[0]))
    }

    /// One step of size `dt`.
    pub fn step(&self, p: &PerturbationState) -> Result<PerturbationState> {
        self.evolve(p, p.t + self.config.dt)
    }
}

pub fn step_linearized(p: &PerturbationState, background: &Trajectory, config: &IntegratorConfig) -> Result<PerturbationState> {
    LinearizedIntegrator::new(background, *config)?.step(p)
}

/// `U(t, s) v` for `v = initial` given at `s = initial.t`.
pub fn evolve_interval(
    initial: &PerturbationState,
    t: f64,
    background: &Trajectory,
    config: &IntegratorConfig,
) -> Result<PerturbationState> {
    LinearizedIntegrator::new(background, *config)?.evolve(initial, t)
}

/// `sup_(t,x) ‖M̃(t, x)‖` over the stored states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtildeNorm {
    /// Spectral (2-norm) supremum.
    pub two_norm: f64,
    /// Frobenius supremum, an upper bound for `two_norm`.
    pub frobenius: f64,
}

pub fn sup_norm_mtilde(background: &Trajectory) -> MtildeNorm {
    let mut out = MtildeNorm { two_norm: 0.0, frobenius: 0.0 };
    for s in &background.states {
        for (&a, &b) in s.re.iter().zip(&s.im) {
            let m = multiplication_matrix(&background.params, [a, b]);
            let sv = m.singular_values();
            out.two_norm = out.two_norm.max(sv[0].max(sv[1]));
            out.frobenius = out.frobenius.max(m.norm());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::KmBreather;
    use crate::model::fnlse_params;

    #[test]
    fn expm2_matches_series() {
        for m in [
            Mat2::new(0.3, -1.2, 0.7, -0.1),
            Mat2::new(0.0, 2.0, 3.0, 0.0),
            Mat2::new(1e-5, 0.0, 0.0, 1e-5),
            Mat2::new(-2.0, 1.0, -1.0, -2.0),
        ] {
            let mut term = Mat2::identity();
            let mut sum = Mat2::identity();
            for k in 1..40 {
                term = term * m / k as f64;
                sum += term;
            }
            assert!((expm2(&m) - sum).norm() < 1e-13 * sum.norm(), "{m}");
        }
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let nodes = [-1.0, 0.0, 1.0, 2.0];
        let w = lagrange_weights(nodes, 0.37);
        let v: f64 = w.iter().zip(nodes).map(|(w, n)| w * f(n)).sum();
        assert!((v - f(0.37)).abs() < 1e-14);
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let p = Parameters::linear(1.0, 0.1, 0.0, 0.0);
        let g = Grid::new(10.0, 32).unwrap();
        let cfg = IntegratorConfig::default_for(&p, 0.01);
        let s = step_nonlinear(&FieldState::zeros(0.0, 32), &p, &g, &cfg).unwrap();
        assert!(s.max_abs() == 0.0);
        assert!((s.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn plane_wave_stays_put() {
        let nu0 = 1.3;
        let p = fnlse_params(nu0).unwrap();
        let g = Grid::new(20.0, 64).unwrap();
        for scheme in [Scheme::EtdRk4, Scheme::SplitStep, Scheme::Rk4Reference] {
            let cfg = IntegratorConfig::default_for(&p, 0.01).with_scheme(scheme);
            let integ = NonlinearIntegrator::new(&p, &g, cfg).unwrap();
            let s0 = FieldState::from_fn(0.0, &g, |_| Complex64::new(nu0, 0.0));
            let s = integ.advance(&s0, 500).unwrap();
            // the integrating-factor frame rotates, so RK4 truncation error shows
            let tol = if scheme == Scheme::Rk4Reference { 1e-6 } else { 1e-12 };
            for (r, i) in s.re.iter().zip(&s.im) {
                assert!((r - nu0).abs() < tol && i.abs() < tol, "{scheme}: {r} {i}");
            }
        }
    }

    #[test]
    fn blow_up_is_reported() {
        // strong cubic gain without saturation
        let p = Parameters { d: 1.0, beta: 0.1, delta: 0.0, alpha: 0.0, gamma: 0.0, epsilon: 5.0, nu: 0.0, mu: 0.0 };
        let g = Grid::new(10.0, 32).unwrap();
        let integ = NonlinearIntegrator::new(&p, &g, IntegratorConfig::default_for(&p, 0.05)).unwrap();
        let s0 = FieldState::from_fn(0.0, &g, |x| Complex64::new(3.0 / x.cosh(), 0.0));
        match integ.advance(&s0, 2000) {
            Err(Error::BlowUp { t }) => assert!(t > 0.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn interpolation_exact_at_nodes_and_accurate_between() {
        let km = KmBreather::new(1.0, 1.2).unwrap();
        let g = Grid::new(20.0, 32).unwrap();
        let p = fnlse_params(1.0).unwrap();
        let tr = Trajectory::from_fn(p, g.clone(), 0.0, km.period, 400, |t| FieldState::from_complex(t, &km.sample(t, &g))).unwrap();
        let at = tr.interpolate(tr.times[17]).unwrap();
        assert_eq!(at.re, tr.states[17].re);
        let t = 0.123456;
        let exact = FieldState::from_complex(t, &km.sample(t, &g));
        let approx = tr.interpolate(t).unwrap();
        assert!(approx.distance_l2(&exact, 1.0) < 1e-6);
        assert!(tr.interpolate(km.period * 1.5).is_err());
        let periodic = tr.into_periodic(1e-10).unwrap();
        let wrapped = periodic.interpolate(t + 3.0 * km.period).unwrap();
        assert!(wrapped.distance_l2(&approx, 1.0) < 1e-9);
    }

    #[test]
    fn sup_norm_of_rotation_scaling_background() {
        let p = Parameters::linear(1.0, 0.1, -0.3, 0.4);
        let tr = Trajectory::zero(p, Grid::new(5.0, 8).unwrap(), 1.0).unwrap();
        let n = sup_norm_mtilde(&tr);
        assert!((n.two_norm - 0.5).abs() < 1e-14);
        assert!(n.frobenius >= n.two_norm);
        let z = sup_norm_mtilde(&Trajectory::zero(Parameters::linear(1.0, 0.1, 0.0, 0.0), Grid::new(5.0, 8).unwrap(), 1.0).unwrap());
        assert_eq!(z.two_norm, 0.0);
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in [Scheme::EtdRk4, Scheme::SplitStep, Scheme::Rk4Reference] {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
        assert!("euler".parse::<Scheme>().is_err());
    }
}

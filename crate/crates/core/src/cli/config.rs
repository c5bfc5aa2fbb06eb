//! Run configuration: one TOML file per run, sections mirroring modules.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::breather::{BreatherConfig, Pulse};
use crate::error::{Error, Result};
use crate::evolve::{IntegratorConfig, Scheme, PERIODICITY_TOLERANCE};
use crate::model::{fnlse_params, Grid, Parameters};

/// Named configurations shipped with the crate.
pub const LIBRARY: &[(&str, &str)] = &[
    ("default", include_str!("../../configs/default.toml")),
    ("pulsating", include_str!("../../configs/pulsating.toml")),
    ("km", include_str!("../../configs/km.toml")),
    ("decay", include_str!("../../configs/decay.toml")),
    ("stationary", include_str!("../../configs/stationary.toml")),
    ("zero-map", include_str!("../../configs/zero-map.toml")),
];

pub fn library(name: &str) -> Option<&'static str> {
    LIBRARY.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub length: f64,
    pub n: usize,
}

impl GridSection {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.length, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
}

impl IntegratorSection {
    pub fn build(&self, params: &Parameters) -> IntegratorConfig {
        let mut c = IntegratorConfig::default_for(params, self.dt);
        if let Some(s) = self.scheme {
            c.scheme = s;
        }
        if let Some(d) = self.dealias {
            c.dealias = d;
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SolutionSection {
    Km { nu0: f64, nu: f64 },
    CglBreather {
        #[serde(default)]
        pulse: Pulse,
    },
    Zero { period: f64 },
    CustomCheckpoint { path: PathBuf },
}

impl SolutionSection {
    pub fn kind(&self) -> &'static str {
        match self {
            SolutionSection::Km { .. } => "km",
            SolutionSection::CglBreather { .. } => "cgl-breather",
            SolutionSection::Zero { .. } => "zero",
            SolutionSection::CustomCheckpoint { .. } => "custom-checkpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreatherSection {
    pub transient_time: f64,
    /// Transient used when a converged state seeds another resolution.
    pub refine_transient_time: f64,
    pub transient_periods: f64,
    pub wall_time: Option<f64>,
    pub search_window: f64,
    pub trace_stride: usize,
    pub tolerance: f64,
    pub record_steps: Option<usize>,
    pub decay_norm: f64,
    pub stationary_tolerance: f64,
    pub phase_frame: bool,
}

impl Default for BreatherSection {
    fn default() -> Self {
        let b = BreatherConfig::new(IntegratorConfig::default_for(&Parameters::linear(1.0, 0.0, 0.0, 0.0), 0.01));
        Self {
            transient_time: b.transient_time,
            refine_transient_time: 0.5 * b.transient_time,
            transient_periods: b.transient_periods,
            wall_time: b.wall_time,
            search_window: b.search_window,
            trace_stride: b.trace_stride,
            tolerance: b.tolerance,
            record_steps: b.record_steps,
            decay_norm: b.decay_norm,
            stationary_tolerance: b.stationary_tolerance,
            phase_frame: b.phase_frame,
        }
    }
}

impl BreatherSection {
    pub fn build(&self, integrator: IntegratorConfig) -> BreatherConfig {
        BreatherConfig {
            integrator,
            transient_time: self.transient_time,
            transient_periods: self.transient_periods,
            wall_time: self.wall_time,
            search_window: self.search_window,
            trace_stride: self.trace_stride,
            tolerance: self.tolerance,
            record_steps: self.record_steps,
            decay_norm: self.decay_norm,
            stationary_tolerance: self.stationary_tolerance,
            phase_frame: self.phase_frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonodromySection {
    /// Base time within the stored period.
    pub s: f64,
    /// Linearized step; defaults to twice the stored spacing so every
    /// stage time of the integrator falls on a stored state.
    pub dt: Option<f64>,
    /// Overrides the period of the solution for the mapped curve.
    pub period: Option<f64>,
    /// Grid sizes of a refinement study; empty for a single run.
    pub refinement: Vec<usize>,
    /// Treat the comparison as a pass/fail property check.
    pub acceptance: bool,
    /// Also compare the clouds at `s` and `s + T/4`.
    pub shift_check: bool,
    pub batch: usize,
    pub curve_samples: Option<usize>,
    /// Restarted Arnoldi instead of dense assembly for `N > 512`.
    pub matrix_free: bool,
    /// Ritz values kept per matrix-free level.
    pub arnoldi_wanted: usize,
}

impl Default for MonodromySection {
    fn default() -> Self {
        Self {
            s: 0.0,
            dt: None,
            period: None,
            refinement: Vec::new(),
            acceptance: false,
            shift_check: false,
            batch: 16,
            curve_samples: None,
            matrix_free: false,
            arnoldi_wanted: 16,
        }
    }
}

/// Closed-form Kuznetsov-Ma checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KmSection {
    pub nu0: f64,
    pub nu: f64,
    pub length: f64,
    pub n: usize,
    pub snapshots: usize,
    pub residual_tolerance: f64,
}

impl Default for KmSection {
    fn default() -> Self {
        Self { nu0: 1.0, nu: 1.2, length: 40.0, n: 1024, snapshots: 64, residual_tolerance: 1e-8 }
    }
}

/// Sizes of the verify suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub schur_samples: usize,
    pub schur_tolerance: f64,
    pub resolvent_grid: usize,
    pub monodromy_n: usize,
    pub monodromy_period: f64,
    pub monodromy_tolerance: f64,
    pub off_block_tolerance: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            schur_samples: 100,
            schur_tolerance: 1e-10,
            resolvent_grid: 50,
            monodromy_n: 64,
            monodromy_period: 1.0,
            monodromy_tolerance: 1e-8,
            off_block_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    /// Absent for the `km` descriptor, which fixes the equation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Parameters>,
    pub grid: GridSection,
    pub integrator: IntegratorSection,
    pub solution: SolutionSection,
    #[serde(default)]
    pub breather: BreatherSection,
    #[serde(default)]
    pub monodromy: MonodromySection,
    #[serde(default)]
    pub km: KmSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `source` as a file, or as a library name when no such file
    /// exists. Relative checkpoint paths resolve against the file's folder.
    pub fn load(source: &str) -> Result<Self> {
        let path = Path::new(source);
        if path.is_file() {
            let text = std::fs::read_to_string(path)?;
            let mut cfg = Self::parse(&text)?;
            if let SolutionSection::CustomCheckpoint { path: p } = &mut cfg.solution {
                if p.is_relative() {
                    *p = path.parent().unwrap_or(Path::new(".")).join(&*p);
                }
            }
            return Ok(cfg);
        }
        match library(source) {
            Some(text) => Self::parse(text),
            None => Err(Error::Config(format!("'{source}' is neither a file nor a library configuration"))),
        }
    }

    pub fn default_config() -> Self {
        Self::parse(library("default").expect("default configuration is embedded")).expect("default configuration parses")
    }

    /// Equation coefficients; the `km` descriptor forces the focusing NLS
    /// on its background, so `β = 0`.
    pub fn params(&self) -> Result<Parameters> {
        match &self.solution {
            SolutionSection::Km { nu0, .. } => {
                let p = fnlse_params(*nu0)?;
                if let Some(m) = &self.model {
                    if *m != p {
                        return Err(Error::Config(
                            "the km descriptor fixes the equation (beta = 0); drop the [model] section".into(),
                        ));
                    }
                }
                Ok(p)
            }
            _ => self.model.ok_or_else(|| Error::Config("missing [model] section".into())),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid.build()
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        Ok(self.integrator.build(&self.params()?))
    }

    pub fn breather_config(&self) -> Result<BreatherConfig> {
        Ok(self.breather.build(self.integrator()?))
    }

    /// Outputs for a `β = 0` background are conjectural.
    pub fn conjectural(&self) -> Result<bool> {
        Ok(self.params()?.beta == 0.0)
    }

    /// Rejects inconsistent configurations before any computation.
    pub fn validate(&self) -> Result<()> {
        let p = self.params()?;
        p.validate()?;
        self.grid()?;
        self.integrator()?.validate()?;
        if p.beta == 0.0 && self.monodromy.acceptance {
            return Err(Error::Config(
                "conjectural regime: beta = 0 has no proven spectral mapping; monodromy acceptance is unavailable".into(),
            ));
        }
        match &self.solution {
            SolutionSection::Km { nu0, nu } => {
                crate::analytic::KmBreather::new(*nu0, *nu)?;
            }
            SolutionSection::Zero { period } if !(*period > 0.0 && period.is_finite()) => {
                return Err(Error::Config(format!("zero solution needs a positive period, got {period}")));
            }
            SolutionSection::CustomCheckpoint { path } if !path.is_file() => {
                return Err(Error::Config(format!("checkpoint {} does not exist", path.display())));
            }
            _ => {}
        }
        if let Some(t) = self.monodromy.period {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("monodromy period must be positive, got {t}")));
            }
        }
        for &n in &self.monodromy.refinement {
            Grid::new(self.grid.length, n)?;
        }
        if !(self.breather.tolerance > 0.0 && self.breather.tolerance <= PERIODICITY_TOLERANCE) && self.monodromy.acceptance {
            return Err(Error::Config(format!(
                "periodicity tolerance must lie in (0, {PERIODICITY_TOLERANCE}] for acceptance runs"
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

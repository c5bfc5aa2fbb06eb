//! Command-line front end: configuration, dispatch, artifacts.
//!
//! Exit codes: 0 success, 1 property failure, 2 configuration error,
//! 3 numerical failure.

pub mod config;
pub mod pipeline;
pub mod svg;
pub mod verify;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::{asymptotic_data, ess_spectrum_curve, km_spectrum_summary, spectral_map, Background, KmBreather};
use crate::breather::{find_breather, hypothesis_audit, BreatherReport, Outcome};
use crate::error::{Error, Result};
use crate::evolve::write_checkpoint;
use crate::model::Grid;
use crate::monodromy::{
    analyze, arnoldi_monodromy, curve_distance, hausdorff_distance, predicted_curve, MonodromyAnalysis, RefinementLevel, RefinementReport, EIGEN_TOLERANCE, NEAR_ZERO,
    OUTLIER_FACTOR, RADIUS_SLACK, REFINEMENT_SLACK,
};

pub use config::RunConfig;
pub use verify::DEFAULT_SEED;

/// Hausdorff tolerance between clouds at `s` and `s + T/4`.
pub const SHIFT_TOLERANCE: f64 = 1e-3;
/// Slack on `|λ| ≤ e^{δT}` for sampled mapped curves.
pub const MAP_SLACK: f64 = 1e-9;

pub const EXIT_OK: u8 = 0;
pub const EXIT_PROPERTY: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "breather-floquet", version, about = "Floquet spectra of breathers of the cubic-quintic Ginzburg-Landau equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration: a TOML file or a library name.
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for monodromy assembly; 0 uses every logical core.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
    /// Seed of randomized oracles, hexadecimal.
    #[arg(long, global = true, default_value = "0x5EED", value_parser = parse_seed)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Run the property suite.
    Verify,
    /// Spectrum artifacts.
    Spectrum {
        #[arg(value_enum)]
        target: SpectrumTarget,
    },
    /// Search for a periodically-stationary pulse.
    FindBreather,
    /// Kuznetsov-Ma closed form.
    Km {
        #[arg(value_enum)]
        target: KmTarget,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectrumTarget {
    /// Essential spectrum of the asymptotic operator.
    Linf,
    /// Monodromy eigenvalues against the mapped curve.
    Monodromy,
    /// The mapped curve `exp(T σ_ess)`.
    Map,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KmTarget {
    Field,
    Residual,
}

pub fn parse_seed(s: &str) -> std::result::Result<u64, String> {
    let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|e| format!("invalid hexadecimal seed '{s}': {e}"))
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Verify => "verify".into(),
            Command::Spectrum { target } => format!("spectrum {}", target.to_possible_value().expect("named").get_name()),
            Command::FindBreather => "find-breather".into(),
            Command::Km { target } => format!("km {}", target.to_possible_value().expect("named").get_name()),
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameters(_)
        | Error::InvalidGrid(_)
        | Error::InvalidConfig(_)
        | Error::Config(_)
        | Error::Checkpoint(_)
        | Error::Io(_)
        | Error::Json(_) => EXIT_CONFIG,
        Error::BlowUp { .. }
        | Error::CoverageGap { .. }
        | Error::NotPeriodic { .. }
        | Error::OnSpectrum(_)
        | Error::Eigen(_) => EXIT_NUMERICAL,
    }
}

/// Everything needed to rerun a command bit-for-bit on the same platform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_name: String,
    pub config_sha256: String,
    pub config: String,
    pub crate_version: String,
    pub dependencies: BTreeMap<String, String>,
    pub seed: String,
    pub workers: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub platform: String,
    pub exit_code: u8,
    pub files: Vec<String>,
}

const LOCKFILE: &str = include_str!("../../../../Cargo.lock");

/// Locked versions of the direct dependencies.
pub fn dependency_versions() -> BTreeMap<String, String> {
    const DIRECT: &[&str] = &[
        "clap", "faer", "nalgebra", "num-complex", "rand", "rand_chacha", "rayon", "rustfft", "serde", "serde_json", "sha2",
        "thiserror", "toml",
    ];
    let lock: toml::Value = toml::from_str(LOCKFILE).unwrap_or(toml::Value::Table(Default::default()));
    let mut out = BTreeMap::new();
    for pkg in lock.get("package").and_then(|p| p.as_array()).into_iter().flatten() {
        let (Some(name), Some(version)) = (pkg.get("name").and_then(|v| v.as_str()), pkg.get("version").and_then(|v| v.as_str()))
        else {
            continue;
        };
        if DIRECT.contains(&name) {
            // several major versions may be locked; keep the newest
            let e = out.entry(name.to_string()).or_insert_with(String::new);
            if version_key(version) > version_key(e) {
                *e = version.to_string();
            }
        }
    }
    out
}

fn version_key(v: &str) -> Vec<u64> {
    v.split(['.', '-', '+']).map(|p| p.parse().unwrap_or(0)).collect()
}

pub fn tolerances(config: &RunConfig) -> BTreeMap<String, f64> {
    [
        ("periodicity", config.breather.tolerance),
        ("eigen_residual", EIGEN_TOLERANCE),
        ("near_zero", NEAR_ZERO),
        ("outlier_factor", OUTLIER_FACTOR),
        ("radius_slack", RADIUS_SLACK),
        ("refinement_slack", REFINEMENT_SLACK),
        ("shift_hausdorff", SHIFT_TOLERANCE),
        ("map_slack", MAP_SLACK),
        ("km_residual", config.km.residual_tolerance),
        ("schur", config.verify.schur_tolerance),
        ("zero_monodromy", config.verify.monodromy_tolerance),
        ("fourier_off_block", config.verify.off_block_tolerance),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Output sink that remembers what it wrote.
pub struct Artifacts {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn path(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.dir.join(name)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(&mut f, value)?;
        f.write_all(b"\n")?;
        Ok(())
    }
}

/// Result of a command: exit code plus human-readable lines.
pub struct CommandOutput {
    pub code: u8,
    pub lines: Vec<String>,
}

type CommandResult = Result<CommandOutput>;

fn done(code: u8, lines: Vec<String>) -> CommandResult {
    Ok(CommandOutput { code, lines })
}

/// Runs a parsed command line, prints its report and returns the exit code.
pub fn run(cli: &Cli) -> u8 {
    let out = execute(cli);
    for l in &out.lines {
        println!("{l}");
    }
    out.code
}

/// Runs a parsed command line without printing the report lines.
pub fn execute(cli: &Cli) -> CommandOutput {
    let fail = |code| CommandOutput { code, lines: Vec::new() };
    let config = match &cli.config {
        Some(src) => RunConfig::load(src),
        None => Ok(RunConfig::default_config()),
    };
    let config = match config.and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return fail(exit_code(&e));
        }
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut art = match Artifacts::new(dir) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("cannot create output directory: {e}");
            return fail(EXIT_CONFIG);
        }
    };
    let result = match cli.command {
        Command::Verify => cmd_verify(&config, cli.seed, cli.workers, &mut art),
        Command::Spectrum { target } => cmd_spectrum(&config, target, cli.workers, cli.seed, &mut art),
        Command::FindBreather => cmd_find_breather(&config, &mut art),
        Command::Km { target } => cmd_km(&config, target, &mut art),
    };
    let (code, lines) = match result {
        Ok(o) => (o.code, o.lines),
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            (exit_code(&e), Vec::new())
        }
    };
    let manifest = Manifest {
        command: cli.command.name(),
        config_name: config.name.clone(),
        config_sha256: config.hash(),
        config: config.to_toml(),
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        dependencies: dependency_versions(),
        seed: format!("{:#x}", cli.seed),
        workers: cli.workers,
        tolerances: tolerances(&config),
        platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        exit_code: code,
        files: art.files.clone(),
    };
    if let Err(e) = art.json("manifest.json", &manifest) {
        eprintln!("cannot write manifest: {e}");
        return CommandOutput { code: code.max(EXIT_CONFIG), lines };
    }
    CommandOutput { code, lines }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}

fn cmd_verify(config: &RunConfig, seed: u64, workers: usize, art: &mut Artifacts) -> CommandResult {
    let report = verify::run_verify(config, seed, workers)?;
    art.json("verify.json", &report)?;
    let mut lines: Vec<String> = report.checks.iter().map(|c| c.line()).collect();
    match report.first_failure() {
        Some(c) => {
            lines.push(format!("property failed: {}", c.name));
            done(EXIT_PROPERTY, lines)
        }
        None => done(EXIT_OK, lines),
    }
}

fn far_field(config: &RunConfig) -> Background {
    match config.solution {
        config::SolutionSection::Km { nu0, .. } => Background::Km { nu0 },
        _ => Background::Decaying,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveReport {
    pub description: String,
    pub samples: usize,
    pub period: Option<f64>,
    pub max_re: f64,
    pub max_modulus: f64,
    /// Half-width of the real segment for the KM background.
    pub real_half_width: Option<f64>,
    pub radius_bound: Option<f64>,
    pub radius_check: Option<bool>,
    pub conjectural: bool,
}

fn curve_points(curve: &crate::analytic::SpectrumCurve, branch: crate::analytic::Branch) -> Vec<Complex64> {
    let mut pts: Vec<(f64, Complex64)> = curve.samples.iter().filter(|s| s.branch == branch).map(|s| (s.mu, s.lambda)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.into_iter().map(|p| p.1).collect()
}

fn plot_curve(plot: &mut svg::Plot, curve: &crate::analytic::SpectrumCurve) {
    let scale = curve.lambdas().map(|l| l.norm()).fold(0.0, f64::max).max(1e-12);
    for branch in [crate::analytic::Branch::Upper, crate::analytic::Branch::Lower] {
        plot.line(&curve_points(curve, branch), 0.1 * scale, "black");
    }
}

fn solution_period(config: &RunConfig) -> Result<f64> {
    if let Some(t) = config.monodromy.period {
        return Ok(t);
    }
    match &config.solution {
        config::SolutionSection::Zero { period } => Ok(*period),
        config::SolutionSection::Km { nu0, nu } => Ok(KmBreather::new(*nu0, *nu)?.period),
        _ => {
            let bg = pipeline::resolve_background(config)?;
            Ok(bg.trajectory.period.expect("resolved backgrounds are periodic"))
        }
    }
}

fn cmd_spectrum(config: &RunConfig, target: SpectrumTarget, workers: usize, seed: u64, art: &mut Artifacts) -> CommandResult {
    let params = config.params()?;
    let grid = config.grid()?;
    let conjectural = params.beta == 0.0;
    let samples = config.monodromy.curve_samples.unwrap_or(2 * grid.n + 1);
    match target {
        SpectrumTarget::Linf => {
            let ff = far_field(config);
            let m_inf = asymptotic_data(&params, ff).m_inf;
            let mu_max = grid.max_wavenumber();
            let curve = ess_spectrum_curve(&params, &m_inf, (-mu_max, mu_max), samples)?;
            curve.save_csv(&art.path("linf_curve.csv"))?;
            let report = CurveReport {
                description: curve.description.clone(),
                samples: curve.samples.len(),
                period: None,
                max_re: curve.lambdas().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max),
                max_modulus: curve.lambdas().map(|l| l.norm()).fold(0.0, f64::max),
                real_half_width: match ff {
                    Background::Km { nu0 } => Some(km_spectrum_summary(&curve, nu0).real_half_width),
                    _ => None,
                },
                radius_bound: None,
                radius_check: None,
                conjectural,
            };
            art.json("linf_summary.json", &report)?;
            let mut plot = svg::Plot::new(format!("essential spectrum of L_inf ({})", config.name));
            plot_curve(&mut plot, &curve);
            plot.save(&art.path("linf.svg"))?;
            let mut lines = vec![format!("linf curve: {} samples, max Re = {:.6e}", report.samples, report.max_re)];
            if let Some(h) = report.real_half_width {
                lines.push(format!("real segment [-{h:.12}, {h:.12}]"));
            }
            done(EXIT_OK, lines)
        }
        SpectrumTarget::Map => {
            let period = solution_period(config)?;
            let m_inf = asymptotic_data(&params, far_field(config)).m_inf;
            let mu_max = grid.max_wavenumber();
            let curve = spectral_map(&ess_spectrum_curve(&params, &m_inf, (-mu_max, mu_max), samples)?, period)?;
            curve.save_csv(&art.path("map_curve.csv"))?;
            let max_modulus = curve.lambdas().map(|l| l.norm()).fold(0.0, f64::max);
            let radius_bound = (params.delta < 0.0 && far_field(config) == Background::Decaying).then(|| (params.delta * period).exp());
            let radius_check = radius_bound.map(|r| max_modulus <= r + MAP_SLACK);
            let report = CurveReport {
                description: curve.description.clone(),
                samples: curve.samples.len(),
                period: Some(period),
                max_re: curve.lambdas().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max),
                max_modulus,
                real_half_width: None,
                radius_bound,
                radius_check,
                conjectural,
            };
            art.json("map_summary.json", &report)?;
            let mut plot = svg::Plot::new(format!("exp(T sigma_ess), T = {period:.6} ({})", config.name));
            plot_curve(&mut plot, &curve);
            if let Some(r) = radius_bound {
                plot.circle(Complex64::default(), r, "blue");
            }
            plot.save(&art.path("map.svg"))?;
            let mut lines = vec![format!("mapped curve: T = {period:.9}, max |lambda| = {max_modulus:.9e}")];
            if let (Some(r), Some(ok)) = (radius_bound, radius_check) {
                lines.push(format!("{} radius e^(delta T) = {r:.9e}", if ok { "PASS" } else { "FAIL" }));
                if !ok {
                    return done(EXIT_PROPERTY, lines);
                }
            }
            done(EXIT_OK, lines)
        }
        SpectrumTarget::Monodromy => cmd_monodromy(config, workers, seed, art),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftCheck {
    pub s: f64,
    pub shifted_s: f64,
    pub hausdorff: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub conjectural: bool,
    pub solution: String,
    pub n: usize,
    pub s: f64,
    pub period: f64,
    pub summary: crate::monodromy::ComparisonSummary,
    pub refinement: Option<RefinementReport>,
    pub shift: Option<ShiftCheck>,
    /// `None` when acceptance was not requested or the run is conjectural.
    pub acceptance: Option<bool>,
    pub failures: Vec<String>,
    /// Arnoldi levels; approximate and outside pass/fail.
    pub matrix_free: Vec<MatrixFreeLevel>,
}

/// Smallest grid size that switches to the matrix-free mode.
pub const MATRIX_FREE_MIN_N: usize = 513;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFreeLevel {
    pub n: usize,
    pub restarts: usize,
    pub approximate: bool,
    pub ritz_count: usize,
    pub max_modulus: f64,
    pub max_residual_estimate: f64,
    pub max_curve_distance: f64,
}

fn matrix_free_level(
    art: &mut Artifacts,
    config: &RunConfig,
    bg: &crate::evolve::Trajectory,
    ff: Background,
    mc: &crate::monodromy::MonodromyConfig,
    seed: u64,
    suffix: &str,
) -> Result<MatrixFreeLevel> {
    let wanted = config.monodromy.arnoldi_wanted.max(1);
    let r = arnoldi_monodromy(bg, config.monodromy.s, mc.integrator, wanted, 4 * wanted, 30, seed)?;
    let period = bg.period.expect("resolved backgrounds are periodic");
    let curve = predicted_curve(&bg.params, ff, &bg.grid, period, 2 * bg.grid.n + 1)?;
    let dist: Vec<f64> = r.values.iter().map(|&z| curve_distance(&curve, z)).collect();
    let path = art.path(&format!("monodromy_arnoldi{suffix}.csv"));
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "re,im,residual_estimate,curve_distance")?;
    for ((z, e), d) in r.values.iter().zip(&r.residual_estimates).zip(&dist) {
        writeln!(w, "{:.16e},{:.16e},{e:.6e},{d:.6e}", z.re, z.im)?;
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    Ok(MatrixFreeLevel {
        n: bg.grid.n,
        restarts: r.restarts,
        approximate: r.approximate,
        ritz_count: r.values.len(),
        max_modulus: r.values.iter().map(|z| z.norm()).fold(0.0, f64::max),
        max_residual_estimate: max(&r.residual_estimates),
        max_curve_distance: max(&dist),
    })
}

fn save_analysis(art: &mut Artifacts, a: &MonodromyAnalysis, suffix: &str, title: &str) -> Result<()> {
    a.comparison.save_csv(&art.path(&format!("monodromy_eigenvalues{suffix}.csv")))?;
    a.curve.save_csv(&art.path(&format!("monodromy_curve{suffix}.csv")))?;
    let mut plot = svg::Plot::new(title);
    plot_curve(&mut plot, &a.curve);
    plot.points(&a.comparison.essential_cloud(), "red").points(&a.comparison.outliers(), "orange");
    if let Some(r) = a.comparison.radius_bound {
        plot.circle(Complex64::default(), r, "blue");
    }
    plot.save(&art.path(&format!("monodromy{suffix}.svg")))
}

fn cmd_monodromy(config: &RunConfig, workers: usize, seed: u64, art: &mut Artifacts) -> CommandResult {
    let base = pipeline::resolve_background(config)?;
    let ff = base.far_field;
    let conjectural = base.trajectory.params.beta == 0.0;
    let s = config.monodromy.s;
    let mut levels = Vec::new();
    let mut lines = Vec::new();
    let backgrounds = if config.monodromy.refinement.is_empty() {
        vec![base.trajectory.clone()]
    } else {
        pipeline::refinement_backgrounds(config, &base)?
    };
    let mut last: Option<(MonodromyAnalysis, crate::evolve::Trajectory)> = None;
    let mut matrix_free = Vec::new();
    for bg in backgrounds {
        let mc = pipeline::monodromy_config(config, &bg, workers)?;
        let n = bg.grid.n;
        let suffix = if config.monodromy.refinement.is_empty() { String::new() } else { format!("_n{n}") };
        if config.monodromy.matrix_free && n >= MATRIX_FREE_MIN_N {
            let l = matrix_free_level(art, config, &bg, ff, &mc, seed, &suffix)?;
            lines.push(format!(
                "N = {n}: {} Ritz values (approximate), max |lambda| {:.6e}, max curve distance {:.3e}",
                l.ritz_count, l.max_modulus, l.max_curve_distance
            ));
            matrix_free.push(l);
            continue;
        }
        let a = analyze(&bg, ff, s, &mc)?;
        save_analysis(art, &a, &suffix, &format!("monodromy N = {n}, T = {:.6} ({})", a.matrix.period, config.name))?;
        lines.push(format!(
            "N = {n}: p95 = {:.3e} (non-outlier {:.3e}), outliers {}, max |lambda| {:.6e}, radius check {}",
            a.comparison.p95_distance,
            a.comparison.p95_non_outlier,
            a.comparison.outlier_count,
            a.comparison.max_modulus,
            a.comparison.radius_check
        ));
        levels.push(RefinementLevel {
            n,
            p95_non_outlier: a.comparison.p95_non_outlier,
            outlier_count: a.comparison.outlier_count,
            radius_check: a.comparison.radius_check,
            summary: a.comparison.summary(&a.cloud),
        });
        last = Some((a, bg));
    }
    let Some((a, bg)) = last else {
        return Err(Error::Config(format!("matrix-free mode needs at least one level with N < {MATRIX_FREE_MIN_N}")));
    };
    let period = a.matrix.period;
    let shift = if config.monodromy.shift_check {
        let mc = pipeline::monodromy_config(config, &bg, workers)?;
        let shifted_s = s + 0.25 * period;
        let b = analyze(&bg, ff, shifted_s, &mc)?;
        let h = hausdorff_distance(&a.comparison.essential_cloud(), &b.comparison.essential_cloud());
        lines.push(format!("shift s -> s + T/4: Hausdorff {h:.3e}"));
        Some(ShiftCheck { s, shifted_s, hausdorff: h, tolerance: SHIFT_TOLERANCE, passed: h <= SHIFT_TOLERANCE })
    } else {
        None
    };
    let refinement = (levels.len() > 1).then(|| RefinementReport::from_levels(levels.clone()));
    let mut failures = Vec::new();
    for l in &levels {
        if !l.radius_check {
            failures.push(format!("radius check at N = {}", l.n));
        }
    }
    if let Some(r) = &refinement {
        if !r.monotone {
            failures.push("p95 distance increases under refinement".into());
        }
    }
    if let Some(sc) = &shift {
        if !sc.passed {
            failures.push("clouds at s and s + T/4 differ".into());
        }
    }
    let acceptance = (config.monodromy.acceptance && !conjectural).then_some(failures.is_empty());
    let report = MonodromyReport {
        conjectural,
        solution: config.solution.kind().into(),
        n: bg.grid.n,
        s,
        period,
        summary: a.comparison.summary(&a.cloud),
        refinement,
        shift,
        acceptance,
        failures: failures.clone(),
        matrix_free,
    };
    art.json("monodromy_summary.json", &report)?;
    if conjectural {
        lines.push("conjectural: beta = 0, excluded from pass/fail".into());
    }
    match acceptance {
        Some(false) => {
            lines.extend(failures.iter().map(|f| format!("property failed: {f}")));
            done(EXIT_PROPERTY, lines)
        }
        _ => done(EXIT_OK, lines),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionDetails {
    pub outcome: Outcome,
    pub period: Option<f64>,
    pub period_estimate: Option<f64>,
    pub phase: f64,
    pub deviation: f64,
    pub frame_alpha: f64,
    pub start_time: f64,
    pub audit_reasons: Vec<String>,
    pub checkpoint: Option<String>,
}

fn cmd_find_breather(config: &RunConfig, art: &mut Artifacts) -> CommandResult {
    let config::SolutionSection::CglBreather { pulse } = &config.solution else {
        return Err(Error::Config(format!("find-breather needs a cgl-breather solution, got {}", config.solution.kind())));
    };
    let params = config.params()?;
    let grid = config.grid()?;
    let search = find_breather(&params, &grid, &pulse.state(&grid), &config.breather_config()?)?;
    let d = &search.detection;
    let audit = search.trajectory.as_ref().map(|t| hypothesis_audit(t, Complex64::default()));
    art.json("detection.json", &BreatherReport::new(d, audit.as_ref()))?;
    {
        let path = art.path("trace.csv");
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "t,norm,peak")?;
        for s in &d.observable_trace {
            writeln!(w, "{:.12e},{:.12e},{:.12e}", s.t, s.norm, s.peak)?;
        }
    }
    let checkpoint = match &search.trajectory {
        Some(tr) => {
            write_checkpoint(&art.path("trajectory.bin"), tr)?;
            Some("trajectory.bin".to_string())
        }
        None => None,
    };
    art.json(
        "detection_details.json",
        &DetectionDetails {
            outcome: d.outcome,
            period: d.period,
            period_estimate: d.period_estimate,
            phase: d.phase,
            deviation: d.deviation,
            frame_alpha: d.frame_alpha,
            start_time: d.start_time,
            audit_reasons: audit.map(|a| a.reasons).unwrap_or_default(),
            checkpoint,
        },
    )?;
    let mut lines = vec![format!("outcome: {}", d.outcome.as_str())];
    if let Some(t) = d.period {
        lines.push(format!("period {t:.12}, deviation {:.3e}, frame alpha {:.9}", d.deviation, d.frame_alpha));
    }
    let code = match d.outcome {
        Outcome::Periodic | Outcome::Stationary | Outcome::Decayed => EXIT_OK,
        Outcome::BlowUp | Outcome::NoRecurrence => EXIT_NUMERICAL,
    };
    done(code, lines)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KmResidualReport {
    pub nu0: f64,
    pub nu: f64,
    pub length: f64,
    pub n: usize,
    pub snapshots: usize,
    pub period: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

fn cmd_km(config: &RunConfig, target: KmTarget, art: &mut Artifacts) -> CommandResult {
    let k = config.km;
    let km = KmBreather::new(k.nu0, k.nu)?;
    let grid = Grid::new(k.length, k.n)?;
    match target {
        KmTarget::Field => {
            let path = art.path("km_field.csv");
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            writeln!(w, "t,x,re,im")?;
            let snaps = k.snapshots.max(2);
            for i in 0..snaps {
                let t = km.period * i as f64 / (snaps - 1) as f64;
                for (x, z) in grid.x.iter().zip(km.sample(t, &grid)) {
                    writeln!(w, "{t:.12e},{x:.12e},{:.17e},{:.17e}", z.re, z.im)?;
                }
            }
            done(EXIT_OK, vec![format!("km field: {snaps} snapshots x {} points over T = {:.9}", grid.n, km.period)])
        }
        KmTarget::Residual => {
            let c = verify::km_residual_check(k.nu0, k.nu, k.length, k.n, k.snapshots, k.residual_tolerance)?;
            art.json(
                "km_residual.json",
                &KmResidualReport {
                    nu0: k.nu0,
                    nu: k.nu,
                    length: k.length,
                    n: k.n,
                    snapshots: k.snapshots,
                    period: km.period,
                    residual: c.value,
                    tolerance: c.tolerance,
                    passed: c.passed,
                },
            )?;
            done(if c.passed { EXIT_OK } else { EXIT_PROPERTY }, vec![c.line()])
        }
    }
}

/// Writes `config` as TOML into `dir` and returns the path, for scripted
/// runs.
pub fn write_config(config: &RunConfig, dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, config.to_toml())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_as_hex() {
        assert_eq!(parse_seed("0x5EED").unwrap(), 0x5EED);
        assert_eq!(parse_seed("ff").unwrap(), 255);
        assert!(parse_seed("0xzz").is_err());
    }

    #[test]
    fn locked_versions_are_found() {
        let v = dependency_versions();
        assert!(v.contains_key("faer") && v.contains_key("rustfft"), "{v:?}");
    }

    #[test]
    fn command_names() {
        assert_eq!(Command::Spectrum { target: SpectrumTarget::Linf }.name(), "spectrum linf");
        assert_eq!(Command::Km { target: KmTarget::Residual }.name(), "km residual");
    }

    #[test]
    fn flags_parse() {
        let c = Cli::try_parse_from(["x", "spectrum", "map", "--workers", "2", "--seed", "0x10", "--out", "o"]).unwrap();
        assert_eq!(c.command, Command::Spectrum { target: SpectrumTarget::Map });
        assert_eq!((c.workers, c.seed), (2, 16));
        assert_eq!(Cli::try_parse_from(["x", "verify"]).unwrap().seed, DEFAULT_SEED);
    }
}

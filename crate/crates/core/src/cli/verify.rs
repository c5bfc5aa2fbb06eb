//! The property suite behind `verify`: closed-form oracles that need no
//! background computation beyond the zero solution.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::analytic::{
    asymptotic_data, ess_spectrum_curve, km_residual, resolvent_symbol_norm, schur_equivalence_check, sector_bound,
    Background, KmBreather, CURVE_TOLERANCE,
};
use crate::error::Result;
use crate::evolve::{IntegratorConfig, Trajectory};
use crate::model::{fnlse_params, Grid, Parameters};
use crate::monodromy::{
    assemble_monodromy, eigen_cloud, fourier_block_check, match_eigenvalues, zero_background_eigenvalues, MonodromyConfig,
};

/// Default seed of randomized oracles.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn at_most(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed: value <= tolerance, value, tolerance, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {:<24} value={:.3e} tol={:.1e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.tolerance,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Largest relative gap between the companion and Schur determinants over
/// `samples` random `(λ, μ)` per parameter set.
pub fn schur_check(sets: &[(Parameters, Background)], samples: usize, tolerance: f64, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (p, bg) in sets {
        let m_inf = asymptotic_data(p, *bg).m_inf;
        for _ in 0..samples {
            let lambda = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let mu = rng.random_range(-5.0..5.0);
            let c = schur_equivalence_check(p, &m_inf, lambda, mu, tolerance)?;
            worst = worst.max((c.d4_premultiplied - c.d2).norm() / c.d2.norm());
        }
    }
    Ok(CheckResult::at_most(
        "schur-equivalence",
        worst,
        tolerance,
        format!("{} sets x {samples} samples", sets.len()),
    ))
}

/// Counts violations of the sector bound `√(1+(D/2β)²)/|τ|` over an
/// `n × n` grid of `σ ∈ (0, 10]`, `τ ∈ [−10, 10] \ {0}`, and of `1/σ` on the
/// positive real ray.
pub fn resolvent_check(params: &Parameters, n: usize) -> Result<CheckResult> {
    let mut violations = 0usize;
    let mut worst_ratio: f64 = 0.0;
    let sigmas: Vec<f64> = (1..=n).map(|k| 10.0 * k as f64 / n as f64).collect();
    if params.beta > 0.0 {
        for &sigma in &sigmas {
            for j in 0..n {
                let tau = -10.0 + 20.0 * j as f64 / (n - 1).max(1) as f64;
                if tau == 0.0 {
                    continue;
                }
                let r = resolvent_symbol_norm(params, Complex64::new(sigma, tau))? / sector_bound(params, tau);
                worst_ratio = worst_ratio.max(r);
                violations += usize::from(r > 1.0);
            }
        }
    }
    for &sigma in &sigmas {
        let r = resolvent_symbol_norm(params, Complex64::new(sigma, 0.0))? * sigma;
        worst_ratio = worst_ratio.max(r);
        violations += usize::from(r > 1.0);
    }
    let detail = if params.beta > 0.0 {
        format!("{violations} violations, worst bound ratio {worst_ratio:.6}")
    } else {
        format!("real ray only (beta = 0), {violations} violations")
    };
    Ok(CheckResult::at_most("resolvent-bounds", violations as f64, 0.0, detail))
}

pub fn km_residual_check(nu0: f64, nu: f64, length: f64, n: usize, snapshots: usize, tolerance: f64) -> Result<CheckResult> {
    let km = KmBreather::new(nu0, nu)?;
    let r = km_residual(&km, &Grid::new(length, n)?, snapshots);
    Ok(CheckResult::at_most("km-residual", r, tolerance, format!("L = {length}, N = {n}, {snapshots} snapshots")))
}

/// Distance of the KM asymptotic curve from `iℝ ∪ [−ν0², ν0²]`.
pub fn km_curve_check(nu0: f64, mu_max: f64, samples: usize) -> Result<CheckResult> {
    let p = fnlse_params(nu0)?;
    let m_inf = asymptotic_data(&p, Background::Km { nu0 }).m_inf;
    let curve = ess_spectrum_curve(&p, &m_inf, (-mu_max, mu_max), samples)?;
    let half = nu0 * nu0;
    let worst = curve
        .lambdas()
        .map(|l| l.re.abs().min(l.im.abs().max(l.re.abs() - half)))
        .fold(0.0, f64::max);
    Ok(CheckResult::at_most(
        "km-curve",
        worst,
        CURVE_TOLERANCE,
        format!("imaginary axis and [-{half}, {half}]"),
    ))
}

/// Pointwise gap between the computed curve about the zero background
/// and `δ − μ²β ± i(α − μ²D/2)`.
pub fn cgl_curve_check(params: &Parameters, mu_max: f64, samples: usize) -> Result<CheckResult> {
    let m_inf = asymptotic_data(params, Background::Decaying).m_inf;
    let curve = ess_spectrum_curve(params, &m_inf, (-mu_max, mu_max), samples)?;
    let worst = curve
        .samples
        .iter()
        .map(|s| {
            let z = params.linear_symbol(s.mu);
            (s.lambda - z).norm().min((s.lambda - z.conj()).norm()) / (1.0 + s.lambda.norm())
        })
        .fold(0.0, f64::max);
    Ok(CheckResult::at_most("cgl-curve", worst, 1e-12, format!("{} samples", curve.samples.len())))
}

/// Monodromy of the zero solution against `exp(T(δ − ξ_k²(β ± iD/2)))`,
/// plus the Fourier block structure.
pub fn zero_monodromy_checks(
    params: &Parameters,
    grid: &Grid,
    period: f64,
    integrator: IntegratorConfig,
    workers: usize,
    tolerance: f64,
    off_block_tolerance: f64,
) -> Result<[CheckResult; 2]> {
    let bg = Trajectory::zero(*params, grid.clone(), period)?;
    let m = assemble_monodromy(&bg, 0.0, &MonodromyConfig::new(integrator).with_workers(workers))?;
    let cloud = eigen_cloud(&m)?;
    let err = match_eigenvalues(&cloud.values, &zero_background_eigenvalues(params, grid, period));
    let block = fourier_block_check(&m);
    Ok([
        CheckResult::at_most("zero-monodromy", err, tolerance, format!("{} eigenvalues", cloud.values.len())),
        CheckResult::at_most(
            "fourier-off-block",
            block.off_block_ratio,
            off_block_tolerance,
            format!("max block error {:.2e}", block.max_block_error),
        ),
    ])
}

/// A `β = 0` monodromy carries the conjectural flag and a `β > 0` one
/// does not.
pub fn conjectural_flag_check(params: &Parameters, workers: usize) -> Result<CheckResult> {
    let g = Grid::new(10.0, 8)?;
    let flag = |p: Parameters| -> Result<bool> {
        let bg = Trajectory::zero(p, g.clone(), 0.5)?;
        let cfg = MonodromyConfig::new(IntegratorConfig::default_for(&p, 0.05)).with_workers(workers);
        Ok(assemble_monodromy(&bg, 0.0, &cfg)?.conjectural)
    };
    let conservative = Parameters { beta: 0.0, d: params.d.max(1.0), ..*params };
    let filtered = Parameters { beta: params.beta.max(0.1), ..*params };
    let ok = flag(conservative)? && !flag(filtered)?;
    Ok(CheckResult {
        name: "conjectural-flag".into(),
        passed: ok,
        value: f64::from(u8::from(!ok)),
        tolerance: 0.0,
        detail: "set iff beta = 0".into(),
    })
}

/// Runs every check; the configuration must already be validated.
pub fn run_verify(config: &RunConfig, seed: u64, workers: usize) -> Result<VerifyReport> {
    let params = config.params()?;
    let grid = config.grid()?;
    let v = &config.verify;
    let k = &config.km;
    let km_params = fnlse_params(k.nu0)?;
    let own_background = match config.solution {
        super::config::SolutionSection::Km { nu0, .. } => Background::Km { nu0 },
        _ => Background::Decaying,
    };
    let mut checks = vec![
        schur_check(
            &[(params, own_background), (km_params, Background::Km { nu0: k.nu0 })],
            v.schur_samples,
            v.schur_tolerance,
            seed,
        )?,
        resolvent_check(&params, v.resolvent_grid)?,
        km_residual_check(k.nu0, k.nu, k.length, k.n, k.snapshots, k.residual_tolerance)?,
        km_curve_check(k.nu0, grid.max_wavenumber(), 2001)?,
    ];
    if own_background == Background::Decaying {
        checks.push(cgl_curve_check(&params, grid.max_wavenumber(), 2001)?);
        let mono_grid = Grid::new(grid.length, v.monodromy_n)?;
        checks.extend(zero_monodromy_checks(
            &params,
            &mono_grid,
            v.monodromy_period,
            config.integrator()?,
            workers,
            v.monodromy_tolerance,
            v.off_block_tolerance,
        )?);
    }
    checks.push(conjectural_flag_check(&params, workers)?);
    Ok(VerifyReport { config: config.name.clone(), seed, passed: checks.iter().all(|c| c.passed), checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let r = run_verify(&RunConfig::default_config(), DEFAULT_SEED, 1).unwrap();
        for c in &r.checks {
            assert!(c.passed, "{}", c.line());
        }
        assert!(r.passed && r.first_failure().is_none());
        assert_eq!(r.checks.len(), 8);
    }

    #[test]
    fn failing_tolerance_is_reported() {
        let c = km_residual_check(1.0, 1.2, 40.0, 64, 8, 1e-8).unwrap();
        assert!(!c.passed && c.line().starts_with("FAIL"));
    }
}

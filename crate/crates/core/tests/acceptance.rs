//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero when any
//! criterion fails.

use std::time::{Duration, Instant};

use breather_floquet::analytic::{km_residual, Background, KmBreather};
use breather_floquet::cli::config::RunConfig;
use breather_floquet::cli::pipeline::{km_trajectory, monodromy_config, refinement_backgrounds, resolve_background};
use breather_floquet::cli::verify::{cgl_curve_check, km_curve_check, resolvent_check, schur_check, zero_monodromy_checks};
use breather_floquet::cli::{Cli, DEFAULT_SEED, SHIFT_TOLERANCE};
use breather_floquet::evolve::{IntegratorConfig, LinearizedIntegrator, NonlinearIntegrator, Scheme, sup_norm_mtilde};
use breather_floquet::model::{FieldState, Grid, Parameters, PerturbationState, fnlse_params};
use breather_floquet::monodromy::{MonodromyConfig, REFINEMENT_SLACK, analyze, hausdorff_distance};
use clap::Parser;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    Verdict {
        passed: v.passed && took <= limit,
        detail: format!("{}; {:.2} s (limit {} s)", v.detail, took.as_secs_f64(), limit.as_secs()),
    }
}

fn cqcgl() -> Parameters {
    Parameters::linear(1.0, 0.125, -0.1, 0.0)
}

fn km_residual_256() -> Verdict {
    let km = KmBreather::new(1.0, 1.2).unwrap();
    let r = km_residual(&km, &Grid::new(40.0, 256).unwrap(), 64);
    Verdict { passed: r < 1e-8, detail: format!("max residual {r:.3e} (< 1e-8) at L = 40, N = 256") }
}

fn km_period_error(scheme: Scheme, grid: &Grid, steps: usize) -> f64 {
    let km = KmBreather::new(1.0, 1.2).unwrap();
    let p = fnlse_params(1.0).unwrap();
    let cfg = IntegratorConfig { dt: km.period / steps as f64, scheme, dealias: false };
    let start = FieldState::from_complex(0.0, &km.sample(0.0, grid));
    let end = NonlinearIntegrator::new(&p, grid, cfg).unwrap().advance(&start, steps).unwrap();
    let exact = km.sample(km.period, grid);
    end.to_complex().iter().zip(&exact).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn integrator_oracle() -> Verdict {
    let grid = Grid::new(40.0, 512).unwrap();
    let steps = [512, 1024, 2048, 4096];
    let order = |e: &[f64]| e.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
    let etd: Vec<f64> = steps.iter().map(|&n| km_period_error(Scheme::EtdRk4, &grid, n)).collect();
    let split: Vec<f64> = steps.iter().map(|&n| km_period_error(Scheme::SplitStep, &grid, n)).collect();
    let (oe, os) = (order(&etd), order(&split));
    let finest = etd[3];
    Verdict {
        passed: finest < 1e-6 && oe >= 3.5 && os >= 1.9,
        detail: format!(
            "etd-rk4 error {finest:.3e} at T/4096 (< 1e-6), orders etd-rk4 {oe:.2} (>= 3.5), split-step {os:.2} (>= 1.9), N = 512"
        ),
    }
}

fn schur() -> Verdict {
    let c = schur_check(
        &[(fnlse_params(1.0).unwrap(), Background::Km { nu0: 1.0 }), (cqcgl(), Background::Decaying)],
        100,
        1e-10,
        DEFAULT_SEED,
    )
    .unwrap();
    Verdict { passed: c.passed, detail: format!("max relative gap {:.3e} (< 1e-10) over 2 x 100 samples", c.value) }
}

fn curves() -> Verdict {
    let km = km_curve_check(1.0, 20.0, 4001).unwrap();
    let cgl = cgl_curve_check(&cqcgl(), 20.0, 4001).unwrap();
    Verdict {
        passed: km.passed && cgl.passed,
        detail: format!("KM distance {:.3e} (< 1e-10), CQ-CGL gap {:.3e} (< 1e-12)", km.value, cgl.value),
    }
}

fn resolvent() -> Verdict {
    let c = resolvent_check(&cqcgl(), 50).unwrap();
    Verdict { passed: c.passed, detail: c.detail }
}

fn zero_monodromy() -> Verdict {
    let p = cqcgl();
    let [m, b] = zero_monodromy_checks(&p, &Grid::new(20.0, 64).unwrap(), 1.0, IntegratorConfig::default_for(&p, 0.01), 0, 1e-8, 1e-10)
        .unwrap();
    Verdict {
        passed: m.passed && b.passed,
        detail: format!("eigenvalue error {:.3e} (< 1e-8), off-block {:.3e} (< 1e-10)", m.value, b.value),
    }
}

fn spectral_mapping() -> Verdict {
    let config = RunConfig::load("pulsating").unwrap();
    let base = resolve_background(&config).unwrap();
    let backgrounds = refinement_backgrounds(&config, &base).unwrap();
    let mut radius_ok = true;
    let mut p95 = Vec::new();
    let mut parts = Vec::new();
    let mut shift = f64::NAN;
    for (k, bg) in backgrounds.iter().enumerate() {
        let mc = monodromy_config(&config, bg, 0).unwrap();
        let a = analyze(bg, Background::Decaying, 0.0, &mc).unwrap();
        radius_ok &= a.comparison.radius_check;
        p95.push(a.comparison.p95_non_outlier);
        parts.push(format!("N={} p95 {:.3e} max|l| {:.4e}/{:.4e}", bg.grid.n, a.comparison.p95_non_outlier, a.comparison.max_modulus, a.comparison.radius_bound.unwrap_or(f64::NAN)));
        if k == backgrounds.len() - 1 {
            let b = analyze(bg, Background::Decaying, 0.25 * a.matrix.period, &mc).unwrap();
            shift = hausdorff_distance(&a.comparison.essential_cloud(), &b.comparison.essential_cloud());
        }
    }
    let monotone = p95.windows(2).all(|w| w[1] <= (1.0 + REFINEMENT_SLACK) * w[0]);
    Verdict {
        passed: radius_ok && monotone && shift <= SHIFT_TOLERANCE && backgrounds.len() == 3,
        detail: format!(
            "(a) radius {radius_ok} (b) p95 non-increasing {monotone} (c) s-shift Hausdorff {shift:.3e} (<= 1e-3); {}",
            parts.join(", ")
        ),
    }
}

fn evolution_family() -> Verdict {
    let grid = Grid::new(40.0, 256).unwrap();
    let km = KmBreather::new(1.0, 1.2).unwrap();
    let t_end = km.period;
    let dt = t_end / 512.0;
    let bg = km_trajectory(1.0, 1.2, &grid, 0.5 * dt).unwrap();
    let cfg = IntegratorConfig { dt, scheme: Scheme::EtdRk4, dealias: false };
    let u = LinearizedIntegrator::new(&bg, cfg).unwrap();
    let bound = sup_norm_mtilde(&bg).two_norm;
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut semigroup, mut ratio) = (0.0f64, 0.0f64);
    let r = 0.25 * t_end;
    for _ in 0..20 {
        let v: Vec<Complex64> = (0..grid.n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let v = PerturbationState::from_complex(0.0, &v);
        let direct = u.evolve(&v, t_end).unwrap();
        let composed = u.evolve(&u.evolve(&v, r).unwrap(), t_end).unwrap();
        let diff: f64 = direct.stacked().iter().zip(composed.stacked()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        semigroup = semigroup.max(diff / v.norm());
        ratio = ratio.max(direct.norm() / (v.norm() * (bound * t_end).exp() * (1.0 + 10.0 * dt)));
    }
    Verdict {
        passed: semigroup <= 1e-10 && ratio <= 1.0,
        detail: format!("composition gap {semigroup:.3e} (<= 1e-10), norm over bound {ratio:.3e} (<= 1) on 20 vectors"),
    }
}

fn conjectural_mode() -> Verdict {
    let grid = Grid::new(40.0, 128).unwrap();
    let km = KmBreather::new(1.0, 1.2).unwrap();
    let bg = km_trajectory(1.0, 1.2, &grid, km.period / 512.0).unwrap();
    let mc = MonodromyConfig::new(IntegratorConfig { dt: km.period / 256.0, scheme: Scheme::EtdRk4, dealias: false });
    let a = analyze(&bg, Background::Km { nu0: 1.0 }, 0.0, &mc).unwrap();
    let flags = a.matrix.conjectural && a.comparison.conjectural && a.comparison.summary(&a.cloud).conjectural_flag;
    let filtered = analyze(
        &breather_floquet::evolve::Trajectory::zero(cqcgl(), Grid::new(20.0, 16).unwrap(), 1.0).unwrap(),
        Background::Decaying,
        0.0,
        &MonodromyConfig::new(IntegratorConfig::default_for(&cqcgl(), 0.01)),
    )
    .unwrap();
    let mut k = RunConfig::load("km").unwrap();
    k.monodromy.acceptance = true;
    let rejected = k.validate().is_err_and(|e| e.to_string().contains("conjectural regime"));
    let out = std::env::temp_dir().join(format!("bf-acceptance-{}", std::process::id()));
    let cli = Cli::parse_from(["breather-floquet", "spectrum", "monodromy", "--config", "km", "--out", out.to_str().unwrap()]);
    let code = breather_floquet::cli::execute(&cli).code;
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("monodromy_summary.json")).unwrap_or_default()).unwrap_or_default();
    let excluded = code == 0 && summary["conjectural"] == true && summary["acceptance"].is_null();
    let _ = std::fs::remove_dir_all(&out);
    Verdict {
        passed: flags && !filtered.matrix.conjectural && rejected && excluded,
        detail: format!(
            "flag on KM outputs {flags}, absent for beta > 0 {}, acceptance request rejected {rejected}, excluded from pass/fail {excluded}",
            !filtered.matrix.conjectural
        ),
    }
}

fn main() {
    type Criterion = (&'static str, u64, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("KM exact-solution residual", 5, km_residual_256),
        ("nonlinear integrator oracle", 60, integrator_oracle),
        ("Schur/companion equivalence", 1, schur),
        ("essential-spectrum curves", 1, curves),
        ("resolvent bounds", 5, resolvent),
        ("zero-background monodromy oracle", 30, zero_monodromy),
        ("spectral mapping property suite", 1800, spectral_mapping),
        ("evolution-family contracts", 60, evolution_family),
        ("KM conjectural mode", 60, conjectural_mode),
    ];
    let mut failed = 0;
    for (k, (name, limit, f)) in criteria.iter().enumerate() {
        let v = timed(Duration::from_secs(*limit), *f);
        failed += usize::from(!v.passed);
        println!("{} criterion {} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, k + 1, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

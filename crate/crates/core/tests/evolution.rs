use breather_floquet::analytic::KmBreather;
use breather_floquet::cli::pipeline::km_trajectory;
use breather_floquet::evolve::{sup_norm_mtilde, IntegratorConfig, LinearizedIntegrator, NonlinearIntegrator, Scheme};
use breather_floquet::model::{fnlse_params, FieldState, Grid, Parameters, PerturbationState};
use num_complex::Complex64;
use breather_floquet::evolve::Trajectory;
use breather_floquet::spectral::Fourier;

fn km_error(grid: &Grid, scheme: Scheme, steps: usize) -> f64 {
    let km = KmBreather::new(1.0, 1.2).unwrap();
    let cfg = IntegratorConfig { dt: km.period / steps as f64, scheme, dealias: false };
    let integ = NonlinearIntegrator::new(&fnlse_params(1.0).unwrap(), grid, cfg).unwrap();
    let end = integ.advance(&FieldState::from_complex(0.0, &km.sample(0.0, grid)), steps).unwrap();
    end.to_complex().iter().zip(km.sample(km.period, grid)).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

#[test]
fn km_convergence_orders() {
    let grid = Grid::new(40.0, 512).unwrap();
    let etd: Vec<f64> = [256, 512, 1024].iter().map(|&n| km_error(&grid, Scheme::EtdRk4, n)).collect();
    let split: Vec<f64> = [256, 512, 1024].iter().map(|&n| km_error(&grid, Scheme::SplitStep, n)).collect();
    for w in etd.windows(2) {
        assert!((w[0] / w[1]).log2() > 3.5, "{etd:?}");
    }
    for w in split.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.9, "{split:?}");
    }
}

#[test]
fn linear_flow_is_exact_in_fourier_space() {
    let p = Parameters::linear(1.0, 0.125, -0.1, 0.3);
    let grid = Grid::new(20.0, 64).unwrap();
    let psi0 = FieldState::from_fn(0.0, &grid, |x| Complex64::new((-x * x).exp(), 0.5 * x * (-x * x).exp()));
    let t = 1.7;
    for scheme in [Scheme::EtdRk4, Scheme::SplitStep, Scheme::Rk4Reference] {
        let cfg = IntegratorConfig { dt: t / 17.0, scheme, dealias: false };
        let got = NonlinearIntegrator::new(&p, &grid, cfg).unwrap().advance(&psi0, 17).unwrap().to_complex();
        let fft = Fourier::new(grid.n);
        let mut scratch = fft.scratch();
        let mut hat = psi0.to_complex();
        fft.forward(&mut hat, &mut scratch);
        for (h, &k) in hat.iter_mut().zip(&grid.wavenumbers) {
            *h *= (p.linear_symbol(k) * t).exp();
        }
        fft.inverse(&mut hat, &mut scratch);
        let err = got.iter().zip(&hat).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{scheme}: {err:e}");
    }
}

#[test]
fn split_step_conserves_nls_mass() {
    let p = Parameters { delta: 0.0, ..fnlse_params(1.0).unwrap() };
    let grid = Grid::new(40.0, 256).unwrap();
    let psi0 = FieldState::from_fn(0.0, &grid, |x| Complex64::new(1.2 / x.cosh(), 0.0) * Complex64::from_polar(1.0, 0.3 * x));
    let integ = NonlinearIntegrator::new(&p, &grid, IntegratorConfig { dt: 0.01, scheme: Scheme::SplitStep, dealias: false }).unwrap();
    let end = integ.advance(&psi0, 500).unwrap();
    let (m0, m1) = (psi0.norm_l2(grid.dx()), end.norm_l2(grid.dx()));
    assert!((m1 - m0).abs() < 1e-12 * m0, "{m0} -> {m1}");
}

fn km_family(n: usize) -> (Trajectory, f64) {
    let grid = Grid::new(40.0, n).unwrap();
    let km = KmBreather::new(1.0, 1.2).unwrap();
    (km_trajectory(1.0, 1.2, &grid, km.period / 512.0).unwrap(), km.period)
}

fn random_state(n: usize, seed: u64) -> PerturbationState {
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
    PerturbationState::from_complex(0.0, &v)
}

fn distance(a: &PerturbationState, b: &PerturbationState) -> f64 {
    a.stacked().iter().zip(b.stacked()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

#[test]
fn linearized_flow_composes() {
    let (bg, period) = km_family(64);
    let u = LinearizedIntegrator::new(&bg, IntegratorConfig { dt: period / 256.0, scheme: Scheme::EtdRk4, dealias: false }).unwrap();
    let v = random_state(64, 7);
    let direct = u.evolve(&v, period).unwrap();
    let mid = u.evolve(&v, 0.375 * period).unwrap();
    let composed = u.evolve(&mid, period).unwrap();
    assert!(distance(&direct, &composed) < 1e-10 * v.norm());
}

#[test]
fn linearized_flow_is_linear_and_bounded() {
    let (bg, period) = km_family(64);
    let dt = period / 256.0;
    let u = LinearizedIntegrator::new(&bg, IntegratorConfig { dt, scheme: Scheme::EtdRk4, dealias: false }).unwrap();
    let (v, w) = (random_state(64, 1), random_state(64, 2));
    let (a, b) = (0.7, -2.3);
    let combo: Vec<f64> = v.stacked().iter().zip(w.stacked()).map(|(x, y)| a * x + b * y).collect();
    let lhs = u.evolve(&PerturbationState::from_stacked(0.0, &combo), period).unwrap();
    let (uv, uw) = (u.evolve(&v, period).unwrap(), u.evolve(&w, period).unwrap());
    let rhs: Vec<f64> = uv.stacked().iter().zip(uw.stacked()).map(|(x, y)| a * x + b * y).collect();
    let rhs = PerturbationState::from_stacked(period, &rhs);
    assert!(distance(&lhs, &rhs) < 1e-11 * (lhs.norm() + rhs.norm()));
    let growth = (sup_norm_mtilde(&bg).two_norm * period).exp() * (1.0 + 10.0 * dt);
    assert!(uv.norm() <= growth * v.norm());
}

//! Periodic Fourier transforms on a [`Grid`].

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::model::Grid;

/// Forward/inverse FFT pair for one grid size. Cheap to clone; the plans are
/// shared. The inverse is normalized so `inverse(forward(u)) == u`.
#[derive(Clone)]
pub struct Fourier {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for Fourier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fourier").field("n", &self.n).finish()
    }
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { n, forward, inverse, scratch_len }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch(&self) -> Vec<Complex64> {
        vec![Complex64::default(); self.scratch_len]
    }

    pub fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(data, scratch);
    }

    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, scratch);
        let s = 1.0 / self.n as f64;
        data.iter_mut().for_each(|z| *z *= s);
    }
}

/// Spectral second derivative of a periodic complex field.
pub fn second_derivative(grid: &Grid, u: &[Complex64]) -> Vec<Complex64> {
    let fourier = Fourier::new(grid.n);
    let mut scratch = fourier.scratch();
    let mut v = u.to_vec();
    fourier.forward(&mut v, &mut scratch);
    for (z, &xi) in v.iter_mut().zip(&grid.wavenumbers) {
        *z *= -xi * xi;
    }
    fourier.inverse(&mut v, &mut scratch);
    v
}

/// 2/3-rule mask: `1` for `|k| < N/3`, `0` otherwise.
pub fn dealias_mask(n: usize) -> Vec<f64> {
    let cutoff = n as f64 / 3.0;
    (0..n)
        .map(|j| {
            let k = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            if k.abs() < cutoff { 1.0 } else { 0.0 }
        })
        .collect()
}

/// Trigonometric interpolation of a periodic field onto a grid of the same
/// length with a different point count. Modes beyond the target Nyquist
/// are dropped; the Nyquist mode is split symmetrically when refining.
pub fn resample(u: &[Complex64], target: usize) -> Vec<Complex64> {
    let n = u.len();
    if n == target {
        return u.to_vec();
    }
    let f = Fourier::new(n);
    let mut v = u.to_vec();
    f.forward(&mut v, &mut f.scratch());
    let mut w = vec![Complex64::default(); target];
    let keep = n.min(target) / 2;
    for k in 0..keep {
        w[k] = v[k];
        if k > 0 {
            w[target - k] = v[n - k];
        }
    }
    if target > n {
        let nyq = v[n / 2] * 0.5;
        w[n / 2] = nyq;
        w[target - n / 2] = nyq;
    } else {
        w[target / 2] = v[target / 2] + v[n - target / 2];
    }
    let scale = target as f64 / n as f64;
    w.iter_mut().for_each(|z| *z *= scale);
    let g = Fourier::new(target);
    g.inverse(&mut w, &mut g.scratch());
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_derivative_of_trig_mode() {
        let g = Grid::new(2.0 * std::f64::consts::PI, 32).unwrap();
        let u: Vec<_> = g.x.iter().map(|&x| Complex64::new((3.0 * x).sin(), (2.0 * x).cos())).collect();
        let d2 = second_derivative(&g, &u);
        for (z, &x) in d2.iter().zip(&g.x) {
            assert!((z.re + 9.0 * (3.0 * x).sin()).abs() < 1e-11);
            assert!((z.im + 4.0 * (2.0 * x).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn roundtrip() {
        let f = Fourier::new(16);
        let mut s = f.scratch();
        let u: Vec<_> = (0..16).map(|j| Complex64::new(j as f64, -(j as f64).sqrt())).collect();
        let mut v = u.clone();
        f.forward(&mut v, &mut s);
        f.inverse(&mut v, &mut s);
        for (a, b) in u.iter().zip(&v) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn resample_is_exact_for_band_limited_fields() {
        let f = |n: usize| -> Vec<Complex64> {
            (0..n)
                .map(|j| {
                    let x = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                    Complex64::new((3.0 * x).cos() + 0.5, (2.0 * x).sin())
                })
                .collect()
        };
        for (a, b) in [(16, 64), (64, 16), (32, 32)] {
            let got = resample(&f(a), b);
            for (x, y) in got.iter().zip(&f(b)) {
                assert!((x - y).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn mask_keeps_low_modes() {
        let m = dealias_mask(12);
        assert_eq!(m, vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }
}

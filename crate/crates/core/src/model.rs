//! Equation parameters, the periodic grid and field containers.
//!
//! The wave equation
//!
//! ```text
//! i ψ_t + (D/2 − iβ) ψ_xx + (α − iδ) ψ + [γ − iε + (ν − iμ)|ψ|²] |ψ|² ψ = 0
//! ```
//!
//! is handled as a real system for `(Re ψ, Im ψ)`:
//!
//! ```text
//! ∂t 𝛙 = (B ∂x² + N0 + N1 |𝛙|² + N2 |𝛙|⁴) 𝛙
//! ```
//!
//! Every coefficient matrix has the rotation-scaling form `aI + bJ` with
//! `J = [[0, −1], [1, 0]]`, so on the complex field it acts as multiplication
//! by `a + ib`. The integrators use that complex view; storage stays real.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Mat2 = Matrix2<f64>;

/// The eight real coefficients of the wave equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    /// Dispersion.
    #[serde(rename = "D", alias = "d")]
    pub d: f64,
    /// Spectral filtering, must be non-negative.
    #[serde(default)]
    pub beta: f64,
    /// Linear gain (> 0) or loss (< 0).
    #[serde(default)]
    pub delta: f64,
    /// Linear phase.
    #[serde(default)]
    pub alpha: f64,
    /// Cubic phase (Kerr).
    #[serde(default)]
    pub gamma: f64,
    /// Cubic gain.
    #[serde(default)]
    pub epsilon: f64,
    /// Quintic phase.
    #[serde(default)]
    pub nu: f64,
    /// Quintic gain.
    #[serde(default)]
    pub mu: f64,
}

impl Parameters {
    /// Cubic-quintic Ginzburg-Landau parameters (`α = 0`).
    #[allow(clippy::too_many_arguments)]
    pub fn cq_cgl(d: f64, beta: f64, delta: f64, gamma: f64, epsilon: f64, nu: f64, mu: f64) -> Self {
        Self { d, beta, delta, alpha: 0.0, gamma, epsilon, nu, mu }
    }

    /// All coefficients zero except the dispersion/filter pair.
    pub fn linear(d: f64, beta: f64, delta: f64, alpha: f64) -> Self {
        Self { d, beta, delta, alpha, gamma: 0.0, epsilon: 0.0, nu: 0.0, mu: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.d, self.beta, self.delta, self.alpha, self.gamma, self.epsilon, self.nu, self.mu];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("all coefficients must be finite".into()));
        }
        if self.d == 0.0 && self.beta == 0.0 {
            return Err(Error::InvalidParameters("(D, beta) must not both vanish".into()));
        }
        if self.beta < 0.0 {
            return Err(Error::InvalidParameters(format!("beta must be non-negative, got {}", self.beta)));
        }
        Ok(())
    }

    pub fn has_quintic(&self) -> bool {
        self.nu != 0.0 || self.mu != 0.0
    }

    /// `a + ib` for `B = βI + (D/2)J`.
    pub fn diffusion_coef(&self) -> Complex64 {
        Complex64::new(self.beta, 0.5 * self.d)
    }

    /// `a + ib` for `N0 = δI + αJ`.
    pub fn linear_coef(&self) -> Complex64 {
        Complex64::new(self.delta, self.alpha)
    }

    /// `a + ib` for `N1 = εI + γJ`.
    pub fn cubic_coef(&self) -> Complex64 {
        Complex64::new(self.epsilon, self.gamma)
    }

    /// `a + ib` for `N2 = μI + νJ`.
    pub fn quintic_coef(&self) -> Complex64 {
        Complex64::new(self.mu, self.nu)
    }

    /// Fourier symbol of `B ∂x² + N0` at angular wavenumber `xi`, as a
    /// complex scalar acting on `ψ̂`.
    pub fn linear_symbol(&self, xi: f64) -> Complex64 {
        self.linear_coef() - self.diffusion_coef() * (xi * xi)
    }
}

/// Parameters that turn the general equation into the focusing NLS on a
/// background of amplitude `nu0`: `i ψ_t + ½ ψ_xx + (|ψ|² − ν0²) ψ = 0`.
pub fn fnlse_params(nu0: f64) -> Result<Parameters> {
    if !(nu0 > 0.0 && nu0.is_finite()) {
        return Err(Error::InvalidParameters(format!("background amplitude must be positive, got {nu0}")));
    }
    Ok(Parameters {
        d: 1.0,
        beta: 0.0,
        delta: 0.0,
        alpha: -nu0 * nu0,
        gamma: 1.0,
        epsilon: 0.0,
        nu: 0.0,
        mu: 0.0,
    })
}

/// The real 2×2 coefficient matrices of the system form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefMatrices {
    pub b: Mat2,
    pub n0: Mat2,
    pub n1: Mat2,
    pub n2: Mat2,
}

/// `aI + bJ`.
pub fn rot_scale(a: f64, b: f64) -> Mat2 {
    Mat2::new(a, -b, b, a)
}

pub fn coef_matrices(params: &Parameters) -> Result<CoefMatrices> {
    if params.d == 0.0 && params.beta == 0.0 {
        return Err(Error::InvalidParameters("(D, beta) must not both vanish".into()));
    }
    Ok(CoefMatrices {
        b: rot_scale(params.beta, 0.5 * params.d),
        n0: rot_scale(params.delta, params.alpha),
        n1: rot_scale(params.epsilon, params.gamma),
        n2: rot_scale(params.mu, params.nu),
    })
}

/// Uniform periodic grid on `[−L/2, L/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub length: f64,
    pub n: usize,
    pub x: Vec<f64>,
    /// Angular wavenumbers `2πk/L` in FFT order (`0, 1, …, N/2−1, −N/2, …, −1`).
    pub wavenumbers: Vec<f64>,
}

impl Grid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("length must be positive, got {length}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("point count must be a power of two >= 2, got {n}")));
        }
        let dx = length / n as f64;
        let x = (0..n).map(|j| -0.5 * length + j as f64 * dx).collect();
        let wavenumbers = (0..n)
            .map(|j| {
                let k = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                2.0 * PI * k as f64 / length
            })
            .collect();
        Ok(Self { length, n, x, wavenumbers })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Largest wavenumber magnitude resolved, `πN/L`.
    pub fn max_wavenumber(&self) -> f64 {
        PI * self.n as f64 / self.length
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self::new(40.0, 256).expect("default grid is valid")
    }
}

/// `ψ(t, ·)` stored as separate real and imaginary arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub t: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl FieldState {
    pub fn zeros(t: f64, n: usize) -> Self {
        Self { t, re: vec![0.0; n], im: vec![0.0; n] }
    }

    pub fn from_complex(t: f64, psi: &[Complex64]) -> Self {
        Self { t, re: psi.iter().map(|z| z.re).collect(), im: psi.iter().map(|z| z.im).collect() }
    }

    pub fn from_fn(t: f64, grid: &Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let psi: Vec<_> = grid.x.iter().map(|&x| f(x)).collect();
        Self::from_complex(t, &psi)
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.re.iter().chain(&self.im).all(|v| v.is_finite())
    }

    /// Discrete `L²` norm, `sqrt(Σ |ψ_j|² dx)`.
    pub fn norm_l2(&self, dx: f64) -> f64 {
        (self.re.iter().zip(&self.im).map(|(r, i)| r * r + i * i).sum::<f64>() * dx).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.re.iter().zip(&self.im).map(|(r, i)| r.hypot(*i)).fold(0.0, f64::max)
    }

    /// `‖self − other‖₂` with the same weighting as [`Self::norm_l2`].
    pub fn distance_l2(&self, other: &FieldState, dx: f64) -> f64 {
        let s: f64 = self
            .re
            .iter()
            .zip(&self.im)
            .zip(other.re.iter().zip(&other.im))
            .map(|((a, b), (c, d))| (a - c).powi(2) + (b - d).powi(2))
            .sum();
        (s * dx).sqrt()
    }
}

/// A perturbation `p = (p1, p2)` of the real system.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub t: f64,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl PerturbationState {
    pub fn zeros(t: f64, n: usize) -> Self {
        Self { t, p1: vec![0.0; n], p2: vec![0.0; n] }
    }

    /// The `j`-th canonical basis vector of `R^{2N}` (`p1` block first).
    pub fn basis(t: f64, n: usize, j: usize) -> Self {
        let mut p = Self::zeros(t, n);
        if j < n {
            p.p1[j] = 1.0;
        } else {
            p.p2[j - n] = 1.0;
        }
        p
    }

    /// Builds a perturbation from a stacked `[p1; p2]` vector.
    pub fn from_stacked(t: f64, v: &[f64]) -> Self {
        let n = v.len() / 2;
        Self { t, p1: v[..n].to_vec(), p2: v[n..].to_vec() }
    }

    pub fn stacked(&self) -> Vec<f64> {
        self.p1.iter().chain(&self.p2).copied().collect()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.p1.iter().zip(&self.p2).map(|(&a, &b)| Complex64::new(a, b)).collect()
    }

    pub fn from_complex(t: f64, p: &[Complex64]) -> Self {
        Self { t, p1: p.iter().map(|z| z.re).collect(), p2: p.iter().map(|z| z.im).collect() }
    }

    /// Euclidean norm of the stacked vector.
    pub fn norm(&self) -> f64 {
        self.p1.iter().chain(&self.p2).map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.p1.iter().chain(&self.p2).all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn coef_matrices_fnlse_example() {
        let p = Parameters { d: 1.0, beta: 0.0, delta: 0.0, alpha: -1.0, gamma: 1.0, epsilon: 0.0, nu: 0.0, mu: 0.0 };
        let c = coef_matrices(&p).unwrap();
        assert_eq!(c.b, Mat2::new(0.0, -0.5, 0.5, 0.0));
        assert_eq!(c.n0, Mat2::new(0.0, 1.0, -1.0, 0.0));
        assert_eq!(c.n1, Mat2::new(0.0, -1.0, 1.0, 0.0));
        assert_eq!(c.n2, Mat2::zeros());
    }

    #[test]
    fn pure_filter_gives_diagonal_b() {
        let c = coef_matrices(&Parameters::linear(0.0, 0.5, 0.0, 0.0)).unwrap();
        assert_eq!(c.b, Mat2::identity() * 0.5);
    }

    #[test]
    fn rejects_vanishing_dispersion_and_filter() {
        assert!(coef_matrices(&Parameters::linear(0.0, 0.0, 0.0, 0.0)).is_err());
        assert!(Parameters::linear(0.0, 0.0, 1.0, 0.0).validate().is_err());
        assert!(Parameters::linear(1.0, -0.1, 0.0, 0.0).validate().is_err());
    }

    #[test]
    fn fnlse_parameter_matching() {
        let p = fnlse_params(1.0).unwrap();
        assert_eq!((p.d, p.gamma, p.alpha), (1.0, 1.0, -1.0));
        assert_eq!((p.beta, p.delta, p.epsilon, p.nu, p.mu), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(fnlse_params(2.0).unwrap().alpha, -4.0);
        assert!(fnlse_params(0.0).is_err());
        assert!(fnlse_params(-1.0).is_err());
    }

    #[test]
    fn symbol_matches_matrix_form() {
        // −ξ²B + N0 = aI + bJ  ⇔  symbol a + ib
        let p = Parameters { d: 0.7, beta: 0.2, delta: -0.3, alpha: 0.4, gamma: 1.0, epsilon: 0.1, nu: 0.0, mu: 0.0 };
        let c = coef_matrices(&p).unwrap();
        let xi = 1.7;
        let m = -c.b * (xi * xi) + c.n0;
        let s = p.linear_symbol(xi);
        assert_abs_diff_eq!(m[(0, 0)], s.re, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 0)], s.im, epsilon = 1e-15);
    }

    #[test]
    fn grid_wavenumbers_are_fft_ordered() {
        let g = Grid::new(2.0 * PI, 8).unwrap();
        let k: Vec<f64> = g.wavenumbers.iter().map(|w| w.round()).collect();
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_abs_diff_eq!(g.x[0], -PI, epsilon = 1e-15);
        assert!(Grid::new(1.0, 12).is_err());
        assert!(Grid::new(0.0, 8).is_err());
    }

    #[test]
    fn grid_wavenumbers_are_periodic() {
        let g = Grid::default();
        for &xi in &g.wavenumbers {
            let z = Complex64::new(0.0, xi * g.length).exp();
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
    }

    proptest::proptest! {
        #[test]
        fn b_symmetric_and_skew_parts(d in -5.0..5.0f64, beta in 0.0..5.0f64) {
            proptest::prop_assume!(d != 0.0 || beta != 0.0);
            let c = coef_matrices(&Parameters::linear(d, beta, 0.0, 0.0)).unwrap();
            let sym = c.b + c.b.transpose();
            let skew = c.b - c.b.transpose();
            proptest::prop_assert!((sym - Mat2::identity() * (2.0 * beta)).norm() < 1e-14);
            proptest::prop_assert!((skew - Mat2::new(0.0, -d, d, 0.0)).norm() < 1e-14);
            proptest::prop_assert!((c.b.determinant() - (beta * beta + d * d / 4.0)).abs() < 1e-12);
        }
    }
}

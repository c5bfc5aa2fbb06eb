//! Closed-form objects: the Kuznetsov-Ma breather, the pointwise
//! linearization matrix, the asymptotic operator and its essential spectrum,
//! the spatial companion matrix, the exponential image of the spectrum under
//! one period, and the resolvent bound for `B ∂x²`.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{coef_matrices, Grid, Mat2, Parameters};
use crate::spectral::second_derivative;

/// Membership tolerance for curve samples, scaled by `(1 + |λ|)²`.
pub const CURVE_TOLERANCE: f64 = 1e-10;

/// Kuznetsov-Ma breather on a background of amplitude `nu0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmBreather {
    pub nu0: f64,
    pub nu: f64,
    pub eta: f64,
    pub period: f64,
}

impl KmBreather {
    pub fn new(nu0: f64, nu: f64) -> Result<Self> {
        if !(nu0 > 0.0 && nu > nu0 && nu.is_finite()) {
            return Err(Error::InvalidParameters(format!("need nu > nu0 > 0, got nu0 = {nu0}, nu = {nu}")));
        }
        let eta = ((nu - nu0) * (nu + nu0)).sqrt();
        Ok(Self { nu0, nu, eta, period: PI / (nu * eta) })
    }

    fn omega(&self) -> f64 {
        2.0 * self.nu * self.eta
    }

    pub fn value(&self, t: f64, x: f64) -> Complex64 {
        let (s, c) = (self.omega() * t).sin_cos();
        let num = Complex64::new(self.eta * c, self.nu * s);
        let den = self.nu0 * c - self.nu * (2.0 * self.eta * x).cosh();
        self.nu0 + num * (2.0 * self.eta / den)
    }

    /// Exact `∂t ψ`.
    pub fn time_derivative(&self, t: f64, x: f64) -> Complex64 {
        let w = self.omega();
        let (s, c) = (w * t).sin_cos();
        let num = Complex64::new(self.eta * c, self.nu * s);
        let dnum = Complex64::new(-self.eta * s, self.nu * c) * w;
        let den = self.nu0 * c - self.nu * (2.0 * self.eta * x).cosh();
        let dden = -w * self.nu0 * s;
        (dnum * den - num * dden) * (2.0 * self.eta / (den * den))
    }

    /// Exponential decay rate of `ψ − ν0` in `|x|`.
    pub fn tail_rate(&self) -> f64 {
        2.0 * self.eta
    }

    pub fn sample(&self, t: f64, grid: &Grid) -> Vec<Complex64> {
        grid.x.iter().map(|&x| self.value(t, x)).collect()
    }
}

pub fn km_breather(km: &KmBreather, t: f64, x: f64) -> Complex64 {
    km.value(t, x)
}

/// Max-norm residual of `i ψ_t + ½ ψ_xx + (|ψ|² − ν0²) ψ` for the closed form,
/// with `ψ_t` exact and `ψ_xx` spectral on `grid`, over `n_times` equally
/// spaced instants of `[0, T]`.
pub fn km_residual(km: &KmBreather, grid: &Grid, n_times: usize) -> f64 {
    let n_times = n_times.max(2);
    let i = Complex64::i();
    let nu0sq = km.nu0 * km.nu0;
    (0..n_times)
        .map(|k| {
            let t = km.period * k as f64 / (n_times - 1) as f64;
            let psi = km.sample(t, grid);
            let psi_xx = second_derivative(grid, &psi);
            psi.iter()
                .zip(&psi_xx)
                .zip(&grid.x)
                .map(|((&u, &uxx), &x)| {
                    let r = i * km.time_derivative(t, x) + 0.5 * uxx + (u.norm_sqr() - nu0sq) * u;
                    r.norm()
                })
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Pointwise linearization matrix
/// `N0 + N1|𝛙|² + N2|𝛙|⁴ + (2N1 + 4N2|𝛙|²) 𝛙𝛙ᵀ` at the real 2-vector `psi`.
pub fn multiplication_matrix(params: &Parameters, psi: [f64; 2]) -> Mat2 {
    let (a, b) = (psi[0], psi[1]);
    let r2 = a * a + b * b;
    // scalar parts of N1 and N2 combine into one rotation-scaling matrix
    let s = params.delta + params.epsilon * r2 + params.mu * r2 * r2;
    let w = params.alpha + params.gamma * r2 + params.nu * r2 * r2;
    // (2N1 + 4N2 r²) = p I + q J
    let p = 2.0 * params.epsilon + 4.0 * params.mu * r2;
    let q = 2.0 * params.gamma + 4.0 * params.nu * r2;
    // (pI + qJ) 𝛙𝛙ᵀ, with J𝛙 = (−b, a)
    let (aa, ab, bb) = (a * a, a * b, b * b);
    Mat2::new(
        s + p * aa - q * ab,
        -w + p * ab - q * bb,
        w + p * ab + q * aa,
        s + p * bb + q * ab,
    )
}

/// The limiting coefficient matrix as `|x| → ∞` and the background value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticData {
    pub m_inf: Mat2,
    pub psi_inf: Complex64,
}

/// Far-field behaviour of a solution family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Background {
    /// Constant background `ν0` (Kuznetsov-Ma).
    Km { nu0: f64 },
    /// Pulses decaying to zero (Ginzburg-Landau breathers, zero solution).
    Decaying,
    Constant(Complex64),
}

impl Background {
    pub fn psi_inf(&self) -> Complex64 {
        match *self {
            Background::Km { nu0 } => Complex64::new(nu0, 0.0),
            Background::Decaying => Complex64::new(0.0, 0.0),
            Background::Constant(z) => z,
        }
    }
}

pub fn asymptotic_data(params: &Parameters, background: Background) -> AsymptoticData {
    let psi_inf = background.psi_inf();
    AsymptoticData { m_inf: multiplication_matrix(params, [psi_inf.re, psi_inf.im]), psi_inf }
}

fn to_complex2(m: &Mat2) -> Matrix2<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `A∞(λ) = [[0, I], [B⁻¹(λ − M∞), 0]]`.
pub fn companion_matrix(params: &Parameters, m_inf: &Mat2, lambda: Complex64) -> Result<Matrix4<Complex64>> {
    let b = coef_matrices(params)?.b;
    let b_inv = b
        .try_inverse()
        .ok_or_else(|| Error::InvalidParameters("B is singular".into()))?;
    let shifted = Matrix2::from_diagonal_element(lambda) - to_complex2(m_inf);
    let lower = to_complex2(&b_inv) * shifted;
    let mut a = Matrix4::zeros();
    a[(0, 2)] = Complex64::new(1.0, 0.0);
    a[(1, 3)] = Complex64::new(1.0, 0.0);
    a.fixed_view_mut::<2, 2>(2, 0).copy_from(&lower);
    Ok(a)
}

/// Roots of `z² + b z + c = 0`, avoiding cancellation.
pub fn quadratic_roots(b: Complex64, c: Complex64) -> [Complex64; 2] {
    let sq = (b * b - 4.0 * c).sqrt();
    let sgn = if (b.conj() * sq).re >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sgn * sq);
    if q.norm() == 0.0 {
        return [Complex64::new(0.0, 0.0); 2];
    }
    [q, c / q]
}

/// Both solutions `λ` of `det[λI − M∞ + μ²B] = 0`.
pub fn dispersion_roots(b: &Mat2, m_inf: &Mat2, mu: f64) -> [Complex64; 2] {
    let a = m_inf - b * (mu * mu);
    quadratic_roots(Complex64::new(-a.trace(), 0.0), Complex64::new(a.determinant(), 0.0))
}

/// `det[λI − M∞ + μ²B]`.
pub fn dispersion_det(b: &Mat2, m_inf: &Mat2, mu: f64, lambda: Complex64) -> Complex64 {
    let m = Matrix2::from_diagonal_element(lambda) - to_complex2(&(m_inf - b * (mu * mu)));
    m.determinant()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub mu: f64,
    pub lambda: Complex64,
    pub branch: Branch,
}

/// Data needed to re-evaluate a curve at arbitrary `μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveGenerator {
    pub params: Parameters,
    pub b: Mat2,
    pub m_inf: Mat2,
    pub mu_max: f64,
    /// `Some(T)` once the curve has been mapped through `λ ↦ e^{Tλ}`.
    pub period: Option<f64>,
}

impl CurveGenerator {
    /// Both curve points at `μ`, mapped if the curve is mapped.
    pub fn points(&self, mu: f64) -> [Complex64; 2] {
        let r = dispersion_roots(&self.b, &self.m_inf, mu);
        match self.period {
            Some(t) => [(r[0] * t).exp(), (r[1] * t).exp()],
            None => r,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    pub samples: Vec<CurveSample>,
    pub description: String,
    pub generator: Option<CurveGenerator>,
}

impl SpectrumCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "mu,re_lambda,im_lambda,branch")?;
        for s in &self.samples {
            writeln!(w, "{:.17e},{:.17e},{:.17e},{}", s.mu, s.lambda.re, s.lambda.im, s.branch.as_str())?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &std::path::Path) -> Result<()> {
        let f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv(f)
    }

    pub fn lambdas(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.samples.iter().map(|s| s.lambda)
    }
}

/// Samples `σ_ess(L∞) = {λ : ∃μ ∈ ℝ, det[λ − M∞ + μ²B] = 0}` over
/// `mu_range` with `n_samples` uniformly spaced `μ`, both roots per `μ`.
///
/// Branches are labelled by the sign of `Im λ` at the largest `|μ|` and then
/// followed by continuity as `|μ|` decreases.
pub fn ess_spectrum_curve(
    params: &Parameters,
    m_inf: &Mat2,
    mu_range: (f64, f64),
    n_samples: usize,
) -> Result<SpectrumCurve> {
    if n_samples < 2 {
        return Err(Error::InvalidConfig("a curve needs at least two samples".into()));
    }
    let (lo, hi) = mu_range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(Error::InvalidConfig(format!("bad mu range [{lo}, {hi}]")));
    }
    let b = coef_matrices(params)?.b;
    let mus: Vec<f64> = (0..n_samples).map(|k| lo + (hi - lo) * k as f64 / (n_samples - 1) as f64).collect();

    // label as a function of |μ|, tracked from the outside in
    let mut order: Vec<usize> = (0..n_samples).collect();
    order.sort_by(|&i, &j| mus[j].abs().total_cmp(&mus[i].abs()));
    let mut labelled: Vec<[Complex64; 2]> = vec![[Complex64::default(); 2]; n_samples];
    let mut history: Vec<[Complex64; 2]> = Vec::new();
    let mut abs_history: Vec<f64> = Vec::new();
    let mut last_abs = f64::NAN;
    for &i in &order {
        let a = mus[i].abs();
        if (a - last_abs).abs() <= 1e-12 * (1.0 + a) {
            labelled[i] = *history.last().expect("history is non-empty once last_abs is set");
            continue;
        }
        let r = dispersion_roots(&b, m_inf, a);
        let pair = match history.len() {
            0 => {
                let upper_first = r[0].im > r[1].im || (r[0].im == r[1].im && r[0].re >= r[1].re);
                if upper_first { r } else { [r[1], r[0]] }
            }
            len => {
                let prev = history[len - 1];
                // the roots depend on μ², so extrapolate linearly in μ²
                let pred = if len >= 2 {
                    let pp = history[len - 2];
                    let (s1, s0) = (abs_history[len - 1].powi(2), abs_history[len - 2].powi(2));
                    let w = (a * a - s1) / (s1 - s0);
                    [prev[0] + w * (prev[0] - pp[0]), prev[1] + w * (prev[1] - pp[1])]
                } else {
                    prev
                };
                let keep = (r[0] - pred[0]).norm() + (r[1] - pred[1]).norm();
                let swap = (r[1] - pred[0]).norm() + (r[0] - pred[1]).norm();
                if keep <= swap { r } else { [r[1], r[0]] }
            }
        };
        history.push(pair);
        abs_history.push(a);
        labelled[i] = pair;
        last_abs = a;
    }

    let mut samples = Vec::with_capacity(2 * n_samples);
    for (mu, pair) in mus.iter().zip(&labelled) {
        samples.push(CurveSample { mu: *mu, lambda: pair[0], branch: Branch::Upper });
        samples.push(CurveSample { mu: *mu, lambda: pair[1], branch: Branch::Lower });
    }
    Ok(SpectrumCurve {
        samples,
        description: format!("essential spectrum of the asymptotic operator, mu in [{lo}, {hi}]"),
        generator: Some(CurveGenerator {
            params: *params,
            b,
            m_inf: *m_inf,
            mu_max: lo.abs().max(hi.abs()),
            period: None,
        }),
    })
}

/// Scaled membership residual `|det[λ − M∞ + μ²B]| / (1 + |λ|)²`.
pub fn curve_residual(b: &Mat2, m_inf: &Mat2, mu: f64, lambda: Complex64) -> f64 {
    dispersion_det(b, m_inf, mu, lambda).norm() / (1.0 + lambda.norm()).powi(2)
}

/// Extent of the real part of the Kuznetsov-Ma asymptotic spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KmSpectrumSummary {
    /// Half-width of the real segment, `ν0²`.
    pub real_half_width: f64,
    /// True when the segment equals `[−ν0, ν0]`, which happens only for `ν0 = 1`.
    pub matches_amplitude_interval: bool,
}

pub fn km_spectrum_summary(curve: &SpectrumCurve, nu0: f64) -> KmSpectrumSummary {
    let real_abs = |l: Complex64| if l.im.abs() <= CURVE_TOLERANCE { l.re.abs() } else { 0.0 };
    let (best, mut half) = curve
        .samples
        .iter()
        .map(|s| (s.mu, real_abs(s.lambda)))
        .fold((0.0, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
    // sharpen the sampled maximum on the generator
    if let (Some(g), true) = (curve.generator.filter(|g| g.period.is_none()), half > 0.0) {
        let h = curve.samples.windows(2).map(|w| (w[1].mu - w[0].mu).abs()).fold(0.0, f64::max);
        let f = |mu: f64| g.points(mu).into_iter().map(real_abs).fold(0.0, f64::max);
        let (mut a, mut b) = (best - h, best + h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let (c, d) = (b - r * (b - a), a + r * (b - a));
            if f(c) > f(d) { b = d } else { a = c }
        }
        half = half.max(f(0.5 * (a + b)));
    }
    KmSpectrumSummary { real_half_width: half, matches_amplitude_interval: (half - nu0).abs() <= 1e-9 * (1.0 + nu0) }
}

/// Result of comparing the 4×4 companion route with the 2×2 route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCheck {
    /// `det(A∞(λ) − iμ I₄)`.
    pub d4: Complex64,
    /// `det(P (A∞(λ) − iμ I₄))` with `P = [[0, B], [B, 0]]`.
    pub d4_premultiplied: Complex64,
    /// `det B · det[λ − M∞ + μ²B]`.
    pub d2: Complex64,
    pub consistent: bool,
}

/// Evaluates both sides of the Schur-complement identity
/// `det[[λ − M∞, −iμB], [−iμB, B]] = det B · det[λ − M∞ + μ²B]`, where the
/// left side is the 4×4 determinant of `P (A∞(λ) − iμ)`.
pub fn schur_equivalence_check(
    params: &Parameters,
    m_inf: &Mat2,
    lambda: Complex64,
    mu: f64,
    tol: f64,
) -> Result<SchurCheck> {
    let b = coef_matrices(params)?.b;
    let a = companion_matrix(params, m_inf, lambda)?;
    let shifted = a - Matrix4::from_diagonal_element(Complex64::new(0.0, mu));
    let mut p = Matrix4::<Complex64>::zeros();
    p.fixed_view_mut::<2, 2>(0, 2).copy_from(&to_complex2(&b));
    p.fixed_view_mut::<2, 2>(2, 0).copy_from(&to_complex2(&b));
    let d4 = shifted.determinant();
    let d4_premultiplied = (p * shifted).determinant();
    let d2 = b.determinant() * dispersion_det(&b, m_inf, mu, lambda);
    let consistent = (d4_premultiplied - d2).norm() <= tol * (1.0 + d2.norm());
    Ok(SchurCheck { d4, d4_premultiplied, d2, consistent })
}

/// Maps every sample through `λ ↦ e^{Tλ}`, keeping labels.
pub fn spectral_map(curve: &SpectrumCurve, period: f64) -> Result<SpectrumCurve> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidConfig(format!("period must be positive, got {period}")));
    }
    let samples = curve
        .samples
        .iter()
        .map(|s| CurveSample { mu: s.mu, lambda: (s.lambda * period).exp(), branch: s.branch })
        .collect();
    // a curve that is already mapped loses its generator
    let generator = curve
        .generator
        .filter(|g| g.period.is_none())
        .map(|g| CurveGenerator { period: Some(period), ..g });
    Ok(SpectrumCurve { samples, description: format!("exp(T * ({})) with T = {period}", curve.description), generator })
}

/// Smallest singular value of a complex 2×2 matrix.
pub fn sigma_min_2x2(m: &Matrix2<Complex64>) -> f64 {
    let fro2: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = m.determinant().norm();
    // σ_max² + σ_min² = ‖m‖_F², σ_max σ_min = |det m|
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
    let big = 0.5 * (fro2 + disc);
    if big == 0.0 {
        return 0.0;
    }
    det / big.sqrt()
}

/// Distance from `lambda` to `σ(B∂x²) = {−s(β ± iD/2) : s ≥ 0}`.
pub fn distance_to_filter_spectrum(params: &Parameters, lambda: Complex64) -> f64 {
    let w = params.diffusion_coef();
    [-w, -w.conj()]
        .iter()
        .map(|dir| {
            let s = ((lambda * dir.conj()).re / dir.norm_sqr()).max(0.0);
            (lambda - dir * s).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

/// `sup_ξ ‖(−ξ²B − λ)⁻¹‖₂`, the operator norm of the resolvent of `B∂x²`.
///
/// A dense ξ-sweep gives a lower estimate; it is completed by the exact
/// minimal distance from `λ` to the two spectral half-lines, which is where
/// the supremum is attained.
pub fn resolvent_symbol_norm(params: &Parameters, lambda: Complex64) -> Result<f64> {
    params.validate()?;
    let dist = distance_to_filter_spectrum(params, lambda);
    if dist <= 1e-14 * (1.0 + lambda.norm()) {
        return Err(Error::OnSpectrum(lambda));
    }
    let b = to_complex2(&coef_matrices(params)?.b);
    let w = params.diffusion_coef();
    // sweep s = ξ² past the orthogonal projection onto either half-line
    let s_star = [-w, -w.conj()]
        .iter()
        .map(|d| ((lambda * d.conj()).re / d.norm_sqr()).max(0.0))
        .fold(0.0, f64::max);
    let s_max = 2.0 * s_star + 10.0;
    let n = 2048;
    let swept = (0..=n)
        .map(|k| {
            let s = s_max * k as f64 / n as f64;
            let m = -b * Complex64::new(s, 0.0) - Matrix2::from_diagonal_element(lambda);
            1.0 / sigma_min_2x2(&m)
        })
        .fold(0.0, f64::max);
    Ok(swept.max(1.0 / dist))
}

/// `√(1 + (D/2β)²) / |τ|`, the sectorial bound for `λ = σ + iτ`, `σ > 0`.
pub fn sector_bound(params: &Parameters, tau: f64) -> f64 {
    let m = (params.d / (2.0 * params.beta)).abs();
    (1.0 + m * m).sqrt() / tau.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fnlse_params;
    use approx::assert_abs_diff_eq;

    fn cgl() -> Parameters {
        Parameters::linear(1.0, 0.125, -0.1, 0.0)
    }

    #[test]
    fn km_peak_value() {
        let km = KmBreather::new(1.0, 1.2).unwrap();
        let v = km.value(0.0, 0.0);
        assert_abs_diff_eq!(v.re, -3.4, epsilon = 1e-12);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        // independent arithmetic for π/(νη) with η = √0.44
        assert_abs_diff_eq!(km.period, std::f64::consts::PI / (1.2 * 0.44f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(km.period, 3.946774, epsilon = 1e-6);
    }

    #[test]
    fn km_far_field_and_periodicity() {
        let km = KmBreather::new(1.0, 1.2).unwrap();
        assert!((km.value(0.0, 20.0) - 1.0).norm() < 1e-10);
        for &(t, x) in &[(0.3, 0.1), (1.7, -2.0), (2.9, 4.5)] {
            assert!((km.value(t, x) - km.value(t + km.period, x)).norm() < 1e-12);
        }
        assert!(KmBreather::new(1.0, 0.9).is_err());
    }

    #[test]
    fn km_time_derivative_matches_finite_difference() {
        let km = KmBreather::new(1.0, 1.2).unwrap();
        let h = 1e-5;
        for &(t, x) in &[(0.2, 0.0), (1.1, 0.7), (3.0, -1.3)] {
            let fd = (km.value(t + h, x) - km.value(t - h, x)) / (2.0 * h);
            assert!((fd - km.time_derivative(t, x)).norm() < 1e-7);
        }
    }

    #[test]
    fn multiplication_matrix_examples() {
        let m = multiplication_matrix(&fnlse_params(1.0).unwrap(), [1.0, 0.0]);
        assert_eq!(m, Mat2::new(0.0, 0.0, 2.0, 0.0));
        let p = Parameters { d: 1.0, beta: 0.1, delta: -0.2, alpha: 0.3, gamma: 1.0, epsilon: 0.5, nu: -0.1, mu: -0.2 };
        assert_eq!(multiplication_matrix(&p, [0.0, 0.0]), coef_matrices(&p).unwrap().n0);
    }

    #[test]
    fn multiplication_matrix_matches_matrix_formula() {
        let p = Parameters { d: 1.0, beta: 0.1, delta: -0.2, alpha: 0.3, gamma: 1.0, epsilon: 0.5, nu: -0.1, mu: -0.2 };
        let c = coef_matrices(&p).unwrap();
        let psi = nalgebra::Vector2::new(0.7, -1.3);
        let r2 = psi.norm_squared();
        let expected = c.n0 + c.n1 * r2 + c.n2 * r2 * r2 + (c.n1 * 2.0 + c.n2 * (4.0 * r2)) * psi * psi.transpose();
        assert!((multiplication_matrix(&p, [psi[0], psi[1]]) - expected).norm() < 1e-14);
    }

    #[test]
    fn asymptotic_examples() {
        let km = asymptotic_data(&fnlse_params(1.0).unwrap(), Background::Km { nu0: 1.0 });
        assert_eq!(km.m_inf, Mat2::new(0.0, 0.0, 2.0, 0.0));
        let g = asymptotic_data(&cgl(), Background::Decaying);
        assert_eq!(g.m_inf, Mat2::identity() * -0.1);
        let z = asymptotic_data(&Parameters::linear(1.0, 0.2, 0.0, 0.0), Background::Decaying);
        assert_eq!(z.m_inf, Mat2::zeros());
    }

    #[test]
    fn companion_identity_b() {
        let p = Parameters::linear(0.0, 1.0, 0.0, 0.0);
        let a = companion_matrix(&p, &Mat2::zeros(), Complex64::new(0.0, 0.0)).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let mut expected = Matrix4::zeros();
        expected[(0, 2)] = one;
        expected[(1, 3)] = one;
        assert_eq!(a, expected);
    }

    #[test]
    fn companion_km_lower_block() {
        let p = fnlse_params(1.0).unwrap();
        let m_inf = Mat2::new(0.0, 0.0, 2.0, 0.0);
        let a = companion_matrix(&p, &m_inf, Complex64::new(1.0, 0.0)).unwrap();
        // B = [[0, −½], [½, 0]] ⇒ B⁻¹ = [[0, 2], [−2, 0]] by the adjugate formula
        let b_inv = Mat2::new(0.0, 2.0, -2.0, 0.0);
        let expected = b_inv * (Mat2::identity() - m_inf);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(a[(2 + i, j)].re, expected[(i, j)], epsilon = 1e-15);
                assert_abs_diff_eq!(a[(2 + i, j)].im, 0.0);
            }
        }
    }

    #[test]
    fn km_curve_examples() {
        let p = fnlse_params(1.0).unwrap();
        let m_inf = Mat2::new(0.0, 0.0, 2.0, 0.0);
        let b = coef_matrices(&p).unwrap().b;
        let r0 = dispersion_roots(&b, &m_inf, 0.0);
        assert!(r0.iter().all(|z| z.norm() < 1e-15));
        let mut r1 = dispersion_roots(&b, &m_inf, 1.0);
        r1.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert_abs_diff_eq!(r1[0].re, -0.75f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(r1[1].re, 0.75f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(r1[0].im, 0.0);
    }

    #[test]
    fn cgl_curve_example() {
        let p = cgl();
        let b = coef_matrices(&p).unwrap().b;
        let r = dispersion_roots(&b, &(Mat2::identity() * -0.1), 1.0);
        let mut ims: Vec<f64> = r.iter().map(|z| z.im).collect();
        ims.sort_by(f64::total_cmp);
        for z in r {
            assert_abs_diff_eq!(z.re, -0.225, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(ims[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ims[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn curve_samples_satisfy_determinant() {
        let p = cgl();
        let m_inf = Mat2::identity() * -0.1;
        let c = ess_spectrum_curve(&p, &m_inf, (-20.0, 20.0), 801).unwrap();
        assert_eq!(c.samples.len(), 1602);
        let b = coef_matrices(&p).unwrap().b;
        for s in &c.samples {
            assert!(curve_residual(&b, &m_inf, s.mu, s.lambda) < CURVE_TOLERANCE);
        }
        // upper branch stays in the upper half plane for D > 0
        assert!(c.samples.iter().filter(|s| s.branch == Branch::Upper).all(|s| s.lambda.im >= -1e-15));
        assert!(ess_spectrum_curve(&p, &m_inf, (0.0, 1.0), 1).is_err());
    }

    #[test]
    fn km_summary_flags_nonunit_background() {
        for (nu0, expect) in [(1.0, true), (2.0, false), (0.5, false)] {
            let p = fnlse_params(nu0).unwrap();
            let a = asymptotic_data(&p, Background::Km { nu0 });
            let c = ess_spectrum_curve(&p, &a.m_inf, (-8.0, 8.0), 16001).unwrap();
            let s = km_spectrum_summary(&c, nu0);
            assert!((s.real_half_width - nu0 * nu0).abs() < 1e-12, "{nu0}: {}", s.real_half_width);
            assert_eq!(s.matches_amplitude_interval, expect);
        }
    }

    #[test]
    fn schur_examples() {
        let p = cgl();
        let m_inf = Mat2::identity() * -0.1;
        let c = schur_equivalence_check(&p, &m_inf, Complex64::new(1.0, 0.0), 0.7, 1e-10).unwrap();
        assert!(c.consistent);
        let z = schur_equivalence_check(&p, &Mat2::zeros(), Complex64::new(0.0, 0.0), 0.0, 1e-10).unwrap();
        assert!(z.d4.norm() < 1e-15 && z.d2.norm() < 1e-15);
    }

    #[test]
    fn spectral_map_examples() {
        let mk = |l: Complex64| SpectrumCurve {
            samples: vec![CurveSample { mu: 0.0, lambda: l, branch: Branch::Upper }],
            description: String::new(),
            generator: None,
        };
        let a = spectral_map(&mk(Complex64::new(-0.1, 0.0)), 10.0).unwrap();
        assert_abs_diff_eq!(a.samples[0].lambda.re, (-1.0f64).exp(), epsilon = 1e-15);
        let b = spectral_map(&mk(Complex64::new(0.0, 0.0)), 3.0).unwrap();
        assert_eq!(b.samples[0].lambda, Complex64::new(1.0, 0.0));
        let c = spectral_map(&mk(Complex64::new(-0.225, -0.5)), 2.0).unwrap();
        let e = (-0.45f64).exp();
        assert_abs_diff_eq!(c.samples[0].lambda.re, e * 1f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.samples[0].lambda.im, -e * 1f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(c.samples[0].lambda.re, 0.344512, epsilon = 1e-6);
        assert_abs_diff_eq!(c.samples[0].lambda.im, -0.536546, epsilon = 1e-6);
        assert!(spectral_map(&mk(Complex64::new(0.0, 0.0)), 0.0).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let p = Parameters::linear(1.0, 0.5, 0.0, 0.0);
        assert!(resolvent_symbol_norm(&p, Complex64::new(1.0, 0.0)).unwrap() <= 1.0 + 1e-15);
        let v = resolvent_symbol_norm(&p, Complex64::new(1.0, 1.0)).unwrap();
        assert!(v <= 2f64.sqrt());
        for k in 1..=8 {
            let sigma = 10f64.powi(-k);
            let v = resolvent_symbol_norm(&p, Complex64::new(sigma, 1.0)).unwrap();
            assert!(v <= sector_bound(&p, 1.0), "sigma = {sigma}: {v}");
        }
        // on the half-line −s(β + iD/2)
        assert!(resolvent_symbol_norm(&p, Complex64::new(-1.0, -1.0)).is_err());
        assert!(resolvent_symbol_norm(&p, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn sigma_min_of_diagonal() {
        let m = Matrix2::new(Complex64::new(3.0, 0.0), Complex64::default(), Complex64::default(), Complex64::new(0.0, -0.5));
        assert_abs_diff_eq!(sigma_min_2x2(&m), 0.5, epsilon = 1e-15);
    }
}

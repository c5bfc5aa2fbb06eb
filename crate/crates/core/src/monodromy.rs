//! The discretized monodromy operator `M(s) = U(s + T, s)`, its eigenvalues,
//! and their comparison with the mapped essential spectrum
//! `exp(T σ_ess(L∞))`.

use std::io::Write;
use std::path::Path;

use faer::Mat;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{asymptotic_data, ess_spectrum_curve, spectral_map, Background, CurveGenerator, SpectrumCurve};
use crate::error::{Error, Result};
use crate::evolve::{IntegratorConfig, LinearizedIntegrator, Trajectory, PERIODICITY_TOLERANCE};
use crate::model::{Grid, Mat2, Parameters};
use crate::spectral::Fourier;

/// Eigenpairs with residual above `EIGEN_TOLERANCE · ‖M‖` are uncertified.
pub const EIGEN_TOLERANCE: f64 = 1e-8;
/// Eigenvalues below `NEAR_ZERO · ‖M‖` in modulus are not compared.
pub const NEAR_ZERO: f64 = 1e-12;
/// Outlier threshold as a multiple of the 95th-percentile distance.
pub const OUTLIER_FACTOR: f64 = 10.0;
/// Relative slack on the disk radius `e^{δT}`.
pub const RADIUS_SLACK: f64 = 1e-6;
/// Allowed growth of the p95 distance from one refinement level to the next.
pub const REFINEMENT_SLACK: f64 = 0.2;
/// Allowed change in outlier count between refinement levels.
pub const OUTLIER_COUNT_SLACK: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyConfig {
    pub integrator: IntegratorConfig,
    /// Worker threads for column propagation; 0 uses every logical core.
    pub workers: usize,
    /// Columns propagated together so stage coefficients are shared.
    pub batch: usize,
}

impl MonodromyConfig {
    pub fn new(integrator: IntegratorConfig) -> Self {
        Self { integrator, workers: 0, batch: 16 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Dense real `2N × 2N` matrix of `U(s + T, s)` in the basis
/// `(e_1, 0), …, (e_N, 0), (0, e_1), …, (0, e_N)`.
#[derive(Debug, Clone)]
pub struct MonodromyMatrix {
    pub s: f64,
    pub period: f64,
    pub entries: Mat<f64>,
    pub grid: Grid,
    pub params: Parameters,
    /// `β = 0`: the mapping theorem is not available, only conjectured.
    pub conjectural: bool,
}

impl MonodromyMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `M v` for a stacked `[p1; p2]` vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let vj = v[j];
            if vj != 0.0 {
                let col = self.entries.col(j);
                for i in 0..n {
                    out[i] += col[i] * vj;
                }
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        (0..self.dim()).all(|j| self.entries.col(j).iter().all(|v| v.is_finite()))
    }
}

/// Returns the background with its period declared, or the deviation that
/// prevents it.
fn periodic_background(background: &Trajectory) -> Result<Trajectory> {
    match background.period {
        Some(_) => Ok(background.clone()),
        None => background.clone().into_periodic(PERIODICITY_TOLERANCE),
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))
}

/// Propagates every canonical basis vector over one period from `s`.
pub fn assemble_monodromy(background: &Trajectory, s: f64, config: &MonodromyConfig) -> Result<MonodromyMatrix> {
    let params = background.params;
    if params.beta < 0.0 {
        return Err(Error::InvalidParameters(format!("beta must be non-negative, got {}", params.beta)));
    }
    let bg = periodic_background(background)?;
    let period = bg.period.expect("periodic background");
    let slack = 1e-9 * period;
    if s < bg.start() - slack || s > bg.start() + period + slack {
        return Err(Error::InvalidConfig(format!(
            "base time {s} is outside the stored period [{}, {}]",
            bg.start(),
            bg.start() + period
        )));
    }
    let integ = LinearizedIntegrator::new(&bg, config.integrator)?;
    let n = bg.grid.n;
    let dim = 2 * n;
    let batch = config.batch.max(1);
    let chunks: Vec<(usize, usize)> = (0..dim).step_by(batch).map(|a| (a, (a + batch).min(dim))).collect();
    let run = || {
        chunks
            .par_iter()
            .map(|&(a, b)| {
                let mut cols: Vec<Vec<Complex64>> = (a..b)
                    .map(|j| {
                        let mut v = vec![Complex64::default(); n];
                        v[j % n] = if j < n { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
                        v
                    })
                    .collect();
                integ.propagate_batch(s, s + period, &mut cols)?;
                Ok(cols)
            })
            .collect::<Result<Vec<_>>>()
    };
    let blocks = pool(config.workers)?.install(run)?;
    let mut entries = Mat::<f64>::zeros(dim, dim);
    for (&(a, _), cols) in chunks.iter().zip(blocks) {
        for (k, v) in cols.into_iter().enumerate() {
            let mut col = entries.col_mut(a + k);
            for i in 0..n {
                col[i] = v[i].re;
                col[n + i] = v[i].im;
            }
        }
    }
    Ok(MonodromyMatrix { s, period, entries, grid: bg.grid.clone(), params, conjectural: params.beta == 0.0 })
}

/// Eigenvalues of a monodromy matrix with right-eigenvector residuals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenCloud {
    pub values: Vec<Complex64>,
    /// `‖Mv − λv‖ / ‖v‖`; NaN when eigenvectors are unavailable.
    pub residuals: Vec<f64>,
    /// Spectral norm estimate `‖M‖₂`.
    pub norm: f64,
    /// `‖MᵀM − MMᵀ‖_F / ‖M‖_F²`, zero for normal matrices.
    pub departure_from_normality: f64,
    /// Every residual is below `EIGEN_TOLERANCE · ‖M‖`.
    pub certified: bool,
}

/// `‖M‖₂` by power iteration on `MᵀM`.
fn spectral_norm(m: &Mat<f64>) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    let mut v = Mat::<f64>::from_fn(n, 1, |i, _| 1.0 + (i as f64 * 0.618_033_988_75).fract());
    let mut sigma = 0.0;
    for _ in 0..200 {
        let w = m.transpose() * (m * &v);
        let nw = w.norm_l2();
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw / v.norm_l2();
        v = w * (1.0 / nw);
        if (next - sigma).abs() <= 1e-12 * next {
            sigma = next;
            break;
        }
        sigma = next;
    }
    sigma.sqrt()
}

pub fn eigen_cloud(m: &MonodromyMatrix) -> Result<EigenCloud> {
    eigen_cloud_of(&m.entries)
}

pub fn eigen_cloud_of(a: &Mat<f64>) -> Result<EigenCloud> {
    if !(0..a.ncols()).all(|j| a.col(j).iter().all(|v| v.is_finite())) {
        return Err(Error::Eigen("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let norm = spectral_norm(a);
    let fro = a.norm_l2();
    let commutator = a.transpose() * a - a * a.transpose();
    let departure_from_normality = if fro > 0.0 { commutator.norm_l2() / (fro * fro) } else { 0.0 };

    let (values, residuals) = match a.eigen() {
        Ok(evd) => {
            let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
            let u = evd.U();
            let ure = Mat::<f64>::from_fn(n, n, |i, j| u[(i, j)].re);
            let uim = Mat::<f64>::from_fn(n, n, |i, j| u[(i, j)].im);
            let are = a * &ure;
            let aim = a * &uim;
            let residuals = (0..n)
                .map(|j| {
                    let l = values[j];
                    let (mut r2, mut v2) = (0.0, 0.0);
                    for i in 0..n {
                        let v = Complex64::new(ure[(i, j)], uim[(i, j)]);
                        let r = Complex64::new(are[(i, j)], aim[(i, j)]) - l * v;
                        r2 += r.norm_sqr();
                        v2 += v.norm_sqr();
                    }
                    if v2 > 0.0 { (r2 / v2).sqrt() } else { f64::NAN }
                })
                .collect();
            (values, residuals)
        }
        Err(_) => {
            let values = a.eigenvalues().map_err(|e| Error::Eigen(format!("{e:?}")))?;
            let residuals = vec![f64::NAN; values.len()];
            (values, residuals)
        }
    };
    let tol = EIGEN_TOLERANCE * norm.max(f64::MIN_POSITIVE);
    let certified = residuals.iter().all(|&r| r <= tol);
    Ok(EigenCloud { values, residuals, norm, departure_from_normality, certified })
}

/// The mapped essential spectrum `exp(T σ_ess(L∞))` over the grid's
/// wavenumber window.
pub fn predicted_curve(params: &Parameters, background: Background, grid: &Grid, period: f64, n_samples: usize) -> Result<SpectrumCurve> {
    let m_inf = asymptotic_data(params, background).m_inf;
    let mu_max = grid.max_wavenumber();
    let curve = ess_spectrum_curve(params, &m_inf, (-mu_max, mu_max), n_samples.max(2))?;
    spectral_map(&curve, period)
}

/// Polyline of curve points used as starting guesses for the distance
/// minimization.
struct CurveIndex {
    generator: Option<CurveGenerator>,
    mus: Vec<f64>,
    points: Vec<[Complex64; 2]>,
}

fn pair_gap(p: &[Complex64; 2], q: &[Complex64; 2]) -> f64 {
    let keep = (p[0] - q[0]).norm().max((p[1] - q[1]).norm());
    let swap = (p[0] - q[1]).norm().max((p[1] - q[0]).norm());
    keep.min(swap)
}

impl CurveIndex {
    fn new(curve: &SpectrumCurve) -> Self {
        match curve.generator {
            Some(g) => {
                // both roots depend on μ² only, so [0, μmax] suffices
                let mut mus: Vec<f64> = (0..=256).map(|k| g.mu_max * k as f64 / 256.0).collect();
                let mut points: Vec<[Complex64; 2]> = mus.iter().map(|&m| g.points(m)).collect();
                let scale = points.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
                let floor = 1e-15 * scale.max(1e-300);
                let mut i = 0;
                while i + 1 < mus.len() {
                    let (a, b) = (mus[i], mus[i + 1]);
                    let local = points[i].iter().chain(&points[i + 1]).map(|z| z.norm()).fold(0.0, f64::max);
                    if pair_gap(&points[i], &points[i + 1]) > 0.02 * local + floor && b - a > 1e-12 * (1.0 + b) {
                        let m = 0.5 * (a + b);
                        mus.insert(i + 1, m);
                        points.insert(i + 1, g.points(m));
                    } else {
                        i += 1;
                    }
                }
                Self { generator: Some(g), mus, points }
            }
            None => {
                let mus = curve.samples.iter().map(|s| s.mu).collect();
                let points = curve.samples.iter().map(|s| [s.lambda, s.lambda]).collect();
                Self { generator: None, mus, points }
            }
        }
    }

    fn distance(&self, z: Complex64) -> f64 {
        let (mut best, mut idx) = (f64::INFINITY, 0);
        for (k, p) in self.points.iter().enumerate() {
            let d = (z - p[0]).norm().min((z - p[1]).norm());
            if d < best {
                best = d;
                idx = k;
            }
        }
        let Some(g) = self.generator else { return best };
        let f = |mu: f64| {
            let p = g.points(mu);
            (z - p[0]).norm().min((z - p[1]).norm())
        };
        let mut a = self.mus[idx.saturating_sub(1)];
        let mut b = self.mus[(idx + 1).min(self.mus.len() - 1)];
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if b - a <= 1e-15 * (1.0 + b.abs()) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        best.min(fc).min(fd).min(f(0.5 * (a + b)))
    }
}

/// Distance from `z` to a sampled spectrum curve, refined on its generator.
pub fn curve_distance(curve: &SpectrumCurve, z: Complex64) -> f64 {
    CurveIndex::new(curve).distance(z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparedEigenvalue {
    pub value: Complex64,
    pub residual: f64,
    /// NaN for near-zero eigenvalues, which are not compared.
    pub curve_distance: f64,
    pub outlier: bool,
    pub near_zero: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub period: f64,
    pub entries: Vec<ComparedEigenvalue>,
    /// 95th percentile of all compared distances.
    pub p95_distance: f64,
    /// 95th percentile over non-outliers only.
    pub p95_non_outlier: f64,
    pub outlier_threshold: f64,
    pub outlier_count: usize,
    pub near_zero_count: usize,
    /// `e^{δT}` when `δ < 0`.
    pub radius_bound: Option<f64>,
    /// Largest non-outlier modulus.
    pub max_modulus: f64,
    /// Every non-outlier lies in the disk of radius `e^{δT}(1 + 1e−6)`;
    /// vacuously true when no bound applies.
    pub radius_check: bool,
    pub conjectural: bool,
}

/// Nearest-rank percentile of an unsorted slice; NaN when empty.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Per-eigenvalue distances to the mapped curve, outlier split and the disk
/// radius check.
pub fn compare_to_prediction(cloud: &EigenCloud, curve: &SpectrumCurve, period: f64, params: &Parameters) -> SpectrumComparison {
    let index = CurveIndex::new(curve);
    let zero_cut = NEAR_ZERO * cloud.norm;
    let mut entries: Vec<ComparedEigenvalue> = cloud
        .values
        .par_iter()
        .zip(cloud.residuals.par_iter())
        .map(|(&value, &residual)| {
            let near_zero = value.norm() < zero_cut;
            let curve_distance = if near_zero { f64::NAN } else { index.distance(value) };
            ComparedEigenvalue { value, residual, curve_distance, outlier: false, near_zero }
        })
        .collect();
    let distances: Vec<f64> = entries.iter().filter(|e| !e.near_zero).map(|e| e.curve_distance).collect();
    let p95_distance = percentile(&distances, 0.95);
    // eigenvalues within solver accuracy of the curve are never outliers
    let outlier_threshold = (OUTLIER_FACTOR * p95_distance).max(EIGEN_TOLERANCE * cloud.norm);
    for e in entries.iter_mut().filter(|e| !e.near_zero) {
        e.outlier = e.curve_distance > outlier_threshold;
    }
    let kept: Vec<&ComparedEigenvalue> = entries.iter().filter(|e| !e.near_zero && !e.outlier).collect();
    let p95_non_outlier = percentile(&kept.iter().map(|e| e.curve_distance).collect::<Vec<_>>(), 0.95);
    let max_modulus = kept.iter().map(|e| e.value.norm()).fold(0.0, f64::max);
    let radius_bound = (params.delta < 0.0).then(|| (params.delta * period).exp());
    let radius_check = radius_bound.is_none_or(|r| max_modulus <= r * (1.0 + RADIUS_SLACK));
    SpectrumComparison {
        period,
        outlier_count: entries.iter().filter(|e| e.outlier).count(),
        near_zero_count: entries.iter().filter(|e| e.near_zero).count(),
        entries,
        p95_distance,
        p95_non_outlier,
        outlier_threshold,
        radius_bound,
        max_modulus,
        radius_check,
        conjectural: params.beta == 0.0,
    }
}

/// Machine-readable digest of a comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub eigenvalue_count: usize,
    pub compared_count: usize,
    pub outlier_count: usize,
    pub near_zero_count: usize,
    pub p95_distance: f64,
    pub p95_non_outlier: f64,
    pub outlier_threshold: f64,
    pub radius_bound: Option<f64>,
    pub max_modulus: f64,
    pub radius_check: bool,
    pub conjectural_flag: bool,
    pub max_residual: f64,
    pub certified: bool,
    pub departure_from_normality: f64,
}

impl SpectrumComparison {
    /// Non-outlier, non-near-zero eigenvalues.
    pub fn essential_cloud(&self) -> Vec<Complex64> {
        self.entries.iter().filter(|e| !e.near_zero && !e.outlier).map(|e| e.value).collect()
    }

    pub fn outliers(&self) -> Vec<Complex64> {
        self.entries.iter().filter(|e| e.outlier).map(|e| e.value).collect()
    }

    pub fn summary(&self, cloud: &EigenCloud) -> ComparisonSummary {
        ComparisonSummary {
            eigenvalue_count: self.entries.len(),
            compared_count: self.entries.len() - self.near_zero_count,
            outlier_count: self.outlier_count,
            near_zero_count: self.near_zero_count,
            p95_distance: self.p95_distance,
            p95_non_outlier: self.p95_non_outlier,
            outlier_threshold: self.outlier_threshold,
            radius_bound: self.radius_bound,
            max_modulus: self.max_modulus,
            radius_check: self.radius_check,
            conjectural_flag: self.conjectural,
            max_residual: cloud.residuals.iter().copied().fold(0.0, f64::max),
            certified: cloud.certified,
            departure_from_normality: cloud.departure_from_normality,
        }
    }

    /// Columns `re,im,residual,curve_distance,outlier_flag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "re,im,residual,curve_distance,outlier_flag")?;
        for e in &self.entries {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.6e},{:.6e},{}",
                e.value.re,
                e.value.im,
                e.residual,
                e.curve_distance,
                u8::from(e.outlier)
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let one_sided = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Largest distance in a greedy nearest-neighbour pairing of two equally
/// sized multisets, processed in order of decreasing modulus of `expected`.
pub fn match_eigenvalues(computed: &[Complex64], expected: &[Complex64]) -> f64 {
    if computed.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&i, &j| expected[j].norm().total_cmp(&expected[i].norm()));
    let mut used = vec![false; computed.len()];
    let mut worst: f64 = 0.0;
    for i in order {
        let (k, d) = computed
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, z)| (k, (z - expected[i]).norm()))
            .fold((usize::MAX, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
        used[k] = true;
        worst = worst.max(d);
    }
    worst
}

/// `exp(T(−ξ²B + N0))` for a rotation-scaling symbol.
pub fn symbol_exponential(params: &Parameters, xi: f64, period: f64) -> Mat2 {
    let c = params.linear_symbol(xi) * period;
    let (s, co) = c.im.sin_cos();
    let r = c.re.exp();
    Mat2::new(r * co, -r * s, r * s, r * co)
}

/// The two eigenvalues `exp(T(δ − ξ²β ± i(α − ξ²D/2)))` of each Fourier
/// block, for every grid wavenumber.
pub fn zero_background_eigenvalues(params: &Parameters, grid: &Grid, period: f64) -> Vec<Complex64> {
    grid.wavenumbers
        .iter()
        .flat_map(|&xi| {
            let z = (params.linear_symbol(xi) * period).exp();
            [z, z.conj()]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierBlockCheck {
    /// Frobenius norm of the entries outside the `2×2` mode blocks, relative
    /// to the whole matrix.
    pub off_block_ratio: f64,
    /// Largest entrywise deviation of a mode block from the symbol exponential.
    pub max_block_error: f64,
}

/// Conjugates `M` by the componentwise DFT and compares each mode block with
/// `exp(T(−ξ_k²B + N0))`.
pub fn fourier_block_check(m: &MonodromyMatrix) -> FourierBlockCheck {
    let n = m.grid.n;
    let f = Fourier::new(n);
    let mut scratch = f.scratch();
    let dim = 2 * n;
    // X = G M G⁻¹ with G = F ⊕ F; rows first (F⁻¹ is symmetric), then columns
    let mut x = vec![vec![Complex64::default(); dim]; dim]; // x[row][col]
    for (r, row) in x.iter_mut().enumerate() {
        for half in 0..2 {
            let mut v: Vec<Complex64> = (0..n).map(|j| Complex64::new(m.entries[(r, half * n + j)], 0.0)).collect();
            f.inverse(&mut v, &mut scratch);
            row[half * n..(half + 1) * n].copy_from_slice(&v);
        }
    }
    for c in 0..dim {
        for half in 0..2 {
            let mut v: Vec<Complex64> = (0..n).map(|i| x[half * n + i][c]).collect();
            f.forward(&mut v, &mut scratch);
            for i in 0..n {
                x[half * n + i][c] = v[i];
            }
        }
    }
    let (mut total, mut off, mut worst) = (0.0, 0.0, 0.0f64);
    for (r, row) in x.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            let e = z.norm_sqr();
            total += e;
            if r % n != c % n {
                off += e;
            }
        }
    }
    for k in 0..n {
        let expected = symbol_exponential(&m.params, m.grid.wavenumbers[k], m.period);
        for a in 0..2 {
            for b in 0..2 {
                let got = x[a * n + k][b * n + k];
                worst = worst.max((got - expected[(a, b)]).norm());
            }
        }
    }
    FourierBlockCheck { off_block_ratio: if total > 0.0 { (off / total).sqrt() } else { 0.0 }, max_block_error: worst }
}

/// One resolution level of a refinement study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub n: usize,
    pub p95_non_outlier: f64,
    pub outlier_count: usize,
    pub radius_check: bool,
    pub summary: ComparisonSummary,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefinementReport {
    pub levels: Vec<RefinementLevel>,
    /// `p95[k+1] ≤ (1 + 0.2) p95[k]` for every consecutive pair.
    pub monotone: bool,
    /// Outlier counts differ by at most two between consecutive levels.
    pub outliers_stable: bool,
}

impl RefinementReport {
    pub fn from_levels(levels: Vec<RefinementLevel>) -> Self {
        let monotone = levels
            .windows(2)
            .all(|w| w[1].p95_non_outlier <= (1.0 + REFINEMENT_SLACK) * w[0].p95_non_outlier);
        let outliers_stable = levels
            .windows(2)
            .all(|w| w[1].outlier_count.abs_diff(w[0].outlier_count) <= OUTLIER_COUNT_SLACK);
        Self { levels, monotone, outliers_stable }
    }
}

/// Full pipeline for one background: assemble, diagonalize, compare.
pub struct MonodromyAnalysis {
    pub matrix: MonodromyMatrix,
    pub cloud: EigenCloud,
    pub curve: SpectrumCurve,
    pub comparison: SpectrumComparison,
}

pub fn analyze(background: &Trajectory, far_field: Background, s: f64, config: &MonodromyConfig) -> Result<MonodromyAnalysis> {
    let matrix = assemble_monodromy(background, s, config)?;
    let cloud = eigen_cloud(&matrix)?;
    let curve = predicted_curve(&matrix.params, far_field, &matrix.grid, matrix.period, 2 * matrix.grid.n + 1)?;
    let comparison = compare_to_prediction(&cloud, &curve, matrix.period, &matrix.params);
    Ok(MonodromyAnalysis { matrix, cloud, curve, comparison })
}

/// Runs [`analyze`] on the same physical configuration at several
/// resolutions, ordered by increasing `N`.
pub fn refinement_study(
    backgrounds: &[Trajectory],
    far_field: Background,
    s: f64,
    config: &MonodromyConfig,
) -> Result<RefinementReport> {
    let mut levels = Vec::with_capacity(backgrounds.len());
    for bg in backgrounds {
        let a = analyze(bg, far_field, s, config)?;
        levels.push(RefinementLevel {
            n: bg.grid.n,
            p95_non_outlier: a.comparison.p95_non_outlier,
            outlier_count: a.comparison.outlier_count,
            radius_check: a.comparison.radius_check,
            summary: a.comparison.summary(&a.cloud),
        });
    }
    levels.sort_by_key(|l| l.n);
    Ok(RefinementReport::from_levels(levels))
}

/// Approximate leading eigenvalues of `M(s)` without forming the matrix:
/// explicitly restarted Arnoldi on the one-period propagator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArnoldiResult {
    pub values: Vec<Complex64>,
    /// Ritz residual estimates `|h_{m+1,m} y_m|`.
    pub residual_estimates: Vec<f64>,
    pub restarts: usize,
    /// Always set: no shift-invert refinement is applied.
    pub approximate: bool,
}

pub fn arnoldi_monodromy(
    background: &Trajectory,
    s: f64,
    integrator: IntegratorConfig,
    wanted: usize,
    krylov_dim: usize,
    max_restarts: usize,
    seed: u64,
) -> Result<ArnoldiResult> {
    let bg = periodic_background(background)?;
    let period = bg.period.expect("periodic background");
    let integ = LinearizedIntegrator::new(&bg, integrator)?;
    let n = bg.grid.n;
    let dim = 2 * n;
    let m = krylov_dim.clamp(wanted.max(1) + 1, dim);
    let apply = |v: &[f64]| -> Result<Vec<f64>> {
        let mut batch = vec![(0..n).map(|i| Complex64::new(v[i], v[n + i])).collect::<Vec<_>>()];
        integ.propagate_batch(s, s + period, &mut batch)?;
        Ok(batch[0].iter().map(|z| z.re).chain(batch[0].iter().map(|z| z.im)).collect())
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut result = ArnoldiResult { values: vec![], residual_estimates: vec![], restarts: 0, approximate: true };
    for restart in 0..=max_restarts {
        let s0 = norm(&start);
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / s0).collect()];
        let mut h = Mat::<f64>::zeros(m + 1, m);
        let mut steps = m;
        for j in 0..m {
            let mut w = apply(&basis[j])?;
            // modified Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                    h[(i, j)] += c;
                    w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                }
            }
            let hn = norm(&w);
            h[(j + 1, j)] = hn;
            if hn <= 1e-14 {
                steps = j + 1;
                break;
            }
            basis.push(w.into_iter().map(|x| x / hn).collect());
        }
        let hm = Mat::<f64>::from_fn(steps, steps, |i, j| h[(i, j)]);
        let evd = hm.eigen().map_err(|e| Error::Eigen(format!("{e:?}")))?;
        let vals: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
        let y = evd.U();
        let mut order: Vec<usize> = (0..steps).collect();
        order.sort_by(|&a, &b| vals[b].norm().total_cmp(&vals[a].norm()));
        order.truncate(wanted.min(steps));
        let beta = h[(steps, steps - 1)];
        result.values = order.iter().map(|&k| vals[k]).collect();
        result.residual_estimates = order.iter().map(|&k| (beta * y[(steps - 1, k)]).norm()).collect();
        result.restarts = restart;
        let scale = result.values.first().map(|v| v.norm()).unwrap_or(1.0).max(1e-300);
        if steps < m || result.residual_estimates.iter().all(|&r| r <= 1e-8 * scale) {
            break;
        }
        // restart from the real part of the sum of the wanted Ritz vectors
        start = vec![0.0; dim];
        for &k in &order {
            for (i, q) in basis.iter().take(steps).enumerate() {
                let c = y[(i, k)].re + y[(i, k)].im;
                start.iter_mut().zip(q).for_each(|(a, b)| *a += c * b);
            }
        }
    }
    Ok(result)
}

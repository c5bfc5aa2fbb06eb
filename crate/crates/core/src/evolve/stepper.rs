//! Fixed-step integrators for `u_t = L u + N(t, u)` with `L` diagonal in
//! Fourier space. The state is carried in Fourier space between steps.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::Scheme;
use crate::error::{Error, Result};
use crate::spectral::{dealias_mask, Fourier};

const CONTOUR_POINTS: usize = 32;

/// Right-hand side `N(t, u)`, evaluated in physical space.
///
/// Coefficients for a time are computed once and shared by every state in a
/// batch.
pub(crate) trait Forcing: Sync {
    type Coeff: Send + Sync;

    fn coeff(&self, t: f64) -> Result<Self::Coeff>;

    fn apply(&self, coeff: &Self::Coeff, u: &[Complex64], out: &mut [Complex64]);

    /// Pointwise flow of `u_t = N(u)` over `h` with coefficients frozen at `coeff`.
    fn flow(&self, coeff: &Self::Coeff, h: f64, u: &mut [Complex64]);
}

/// Coefficients at the stage times of one step.
pub(crate) struct StageCoeffs<C> {
    pub start: Option<C>,
    pub mid: C,
    pub end: Option<C>,
}

/// Per-state scratch buffers.
pub(crate) struct Workspace {
    scratch: Vec<Complex64>,
    u: Vec<Complex64>,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
}

/// Per-step coefficient tables for one symbol and one step size.
pub(crate) struct Stepper {
    n: usize,
    h: f64,
    scheme: Scheme,
    fourier: Fourier,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    mask: Option<Vec<f64>>,
}

/// ETDRK4 weights `(Q, f1, f2, f3)` for `z = hL`, divided by `h`, by contour
/// averaging over a unit circle around `z`.
fn etd_weights(z: Complex64) -> [Complex64; 4] {
    let mut acc = [Complex64::default(); 4];
    for j in 0..CONTOUR_POINTS {
        let theta = 2.0 * PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let r = z + Complex64::from_polar(1.0, theta);
        let er = r.exp();
        let r3 = r * r * r;
        acc[0] += ((r * 0.5).exp() - 1.0) / r;
        acc[1] += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / r3;
        acc[2] += (2.0 + r + er * (r - 2.0)) / r3;
        acc[3] += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / r3;
    }
    acc.map(|a| a / CONTOUR_POINTS as f64)
}

impl Stepper {
    pub fn new(symbol: &[Complex64], h: f64, scheme: Scheme, dealias: bool) -> Self {
        let n = symbol.len();
        let mut e = Vec::with_capacity(n);
        let mut e2 = Vec::with_capacity(n);
        let (mut q, mut f1, mut f2, mut f3) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for &l in symbol {
            let z = l * h;
            e.push(z.exp());
            e2.push((z * 0.5).exp());
            if scheme == Scheme::EtdRk4 {
                let w = etd_weights(z);
                q.push(w[0] * h);
                f1.push(w[1] * h);
                f2.push(w[2] * h);
                f3.push(w[3] * h);
            }
        }
        Self {
            n,
            h,
            scheme,
            fourier: Fourier::new(n),
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            mask: dealias.then(|| dealias_mask(n)),
        }
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn needs_endpoints(&self) -> bool {
        self.scheme != Scheme::SplitStep
    }

    pub fn workspace(&self) -> Workspace {
        let z = vec![Complex64::default(); self.n];
        Workspace {
            scratch: self.fourier.scratch(),
            u: z.clone(),
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            a: z.clone(),
            b: z.clone(),
            c: z,
        }
    }

    pub fn to_fourier(&self, u: &mut [Complex64], ws: &mut Workspace) {
        self.fourier.forward(u, &mut ws.scratch);
    }

    pub fn to_physical(&self, v: &mut [Complex64], ws: &mut Workspace) {
        self.fourier.inverse(v, &mut ws.scratch);
    }

    /// `out = mask · F[N(F⁻¹ v)]`.
    fn forcing_hat<F: Forcing>(
        &self,
        forcing: &F,
        coeff: &F::Coeff,
        v: &[Complex64],
        u: &mut [Complex64],
        out: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        u.copy_from_slice(v);
        self.fourier.inverse(u, scratch);
        forcing.apply(coeff, u, out);
        self.fourier.forward(out, scratch);
        if let Some(mask) = &self.mask {
            out.iter_mut().zip(mask).for_each(|(z, m)| *z *= m);
        }
    }

    /// Advances the Fourier-space state `v` by one step.
    pub fn step<F: Forcing>(&self, forcing: &F, coeffs: &StageCoeffs<F::Coeff>, v: &mut [Complex64], ws: &mut Workspace) {
        match self.scheme {
            Scheme::EtdRk4 => self.step_etdrk4(forcing, coeffs, v, ws),
            Scheme::Rk4Reference => self.step_lawson(forcing, coeffs, v, ws),
            Scheme::SplitStep => self.step_strang(forcing, coeffs, v, ws),
        }
    }

    fn step_etdrk4<F: Forcing>(&self, forcing: &F, coeffs: &StageCoeffs<F::Coeff>, v: &mut [Complex64], ws: &mut Workspace) {
        let start = coeffs.start.as_ref().expect("ETDRK4 needs start coefficients");
        let end = coeffs.end.as_ref().expect("ETDRK4 needs end coefficients");
        let Workspace { scratch, u, k1: nv, k2: na, k3: nb, k4: nc, a, b, c } = ws;

        self.forcing_hat(forcing, start, v, u, nv, scratch);
        for j in 0..self.n {
            a[j] = self.e2[j] * v[j] + self.q[j] * nv[j];
        }
        self.forcing_hat(forcing, &coeffs.mid, a, u, na, scratch);
        for j in 0..self.n {
            b[j] = self.e2[j] * v[j] + self.q[j] * na[j];
        }
        self.forcing_hat(forcing, &coeffs.mid, b, u, nb, scratch);
        for j in 0..self.n {
            c[j] = self.e2[j] * a[j] + self.q[j] * (2.0 * nb[j] - nv[j]);
        }
        self.forcing_hat(forcing, end, c, u, nc, scratch);
        for j in 0..self.n {
            v[j] = self.e[j] * v[j] + self.f1[j] * nv[j] + 2.0 * self.f2[j] * (na[j] + nb[j]) + self.f3[j] * nc[j];
        }
    }

    /// Integrating-factor (Lawson) RK4.
    fn step_lawson<F: Forcing>(&self, forcing: &F, coeffs: &StageCoeffs<F::Coeff>, v: &mut [Complex64], ws: &mut Workspace) {
        let start = coeffs.start.as_ref().expect("RK4 needs start coefficients");
        let end = coeffs.end.as_ref().expect("RK4 needs end coefficients");
        let h = self.h;
        let Workspace { scratch, u, k1, k2, k3, k4, a, .. } = ws;

        self.forcing_hat(forcing, start, v, u, k1, scratch);
        for j in 0..self.n {
            a[j] = self.e2[j] * (v[j] + 0.5 * h * k1[j]);
        }
        self.forcing_hat(forcing, &coeffs.mid, a, u, k2, scratch);
        for j in 0..self.n {
            a[j] = self.e2[j] * v[j] + 0.5 * h * k2[j];
        }
        self.forcing_hat(forcing, &coeffs.mid, a, u, k3, scratch);
        for j in 0..self.n {
            a[j] = self.e[j] * v[j] + h * self.e2[j] * k3[j];
        }
        self.forcing_hat(forcing, end, a, u, k4, scratch);
        for j in 0..self.n {
            v[j] = self.e[j] * v[j]
                + (h / 6.0) * (self.e[j] * k1[j] + 2.0 * self.e2[j] * (k2[j] + k3[j]) + k4[j]);
        }
    }

    /// Strang splitting: half linear, full pointwise flow, half linear.
    fn step_strang<F: Forcing>(&self, forcing: &F, coeffs: &StageCoeffs<F::Coeff>, v: &mut [Complex64], ws: &mut Workspace) {
        let Workspace { scratch, u, a, .. } = ws;
        for j in 0..self.n {
            v[j] *= self.e2[j];
        }
        u.copy_from_slice(v);
        self.fourier.inverse(u, scratch);
        forcing.flow(&coeffs.mid, self.h, u);
        self.fourier.forward(u, scratch);
        match &self.mask {
            // only the forcing increment is filtered
            Some(mask) => {
                a.copy_from_slice(v);
                for j in 0..self.n {
                    v[j] = a[j] + mask[j] * (u[j] - a[j]);
                }
            }
            None => v.copy_from_slice(u),
        }
        for j in 0..self.n {
            v[j] *= self.e2[j];
        }
    }

    /// Runs `n_steps` from `t0` on a batch of Fourier-space states.
    pub fn run<F: Forcing>(
        &self,
        forcing: &F,
        t0: f64,
        n_steps: usize,
        batch: &mut [Vec<Complex64>],
        workspaces: &mut [Workspace],
    ) -> Result<()> {
        debug_assert_eq!(batch.len(), workspaces.len());
        let mut carry: Option<F::Coeff> = None;
        for k in 0..n_steps {
            let t = t0 + k as f64 * self.h;
            let coeffs = if self.needs_endpoints() {
                let start = match carry.take() {
                    Some(c) => c,
                    None => forcing.coeff(t)?,
                };
                StageCoeffs {
                    start: Some(start),
                    mid: forcing.coeff(t + 0.5 * self.h)?,
                    end: Some(forcing.coeff(t0 + (k + 1) as f64 * self.h)?),
                }
            } else {
                StageCoeffs { start: None, mid: forcing.coeff(t + 0.5 * self.h)?, end: None }
            };
            for (v, ws) in batch.iter_mut().zip(workspaces.iter_mut()) {
                self.step(forcing, &coeffs, v, ws);
                if !v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::BlowUp { t: t0 + (k + 1) as f64 * self.h });
                }
            }
            carry = coeffs.end;
        }
        Ok(())
    }
}

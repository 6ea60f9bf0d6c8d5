//! Differential geometry of `G = F²_{t,k}`: Levi matrix, real Hessian,
//! Chern-Finsler and Berwald connection coefficients, curvature blocks and
//! the Finsler-Einstein factor against the Bergman metric.
//!
//! Notation used throughout the closed forms, with `α = 1/(1+t)`,
//! `β = t/(1+t)`:
//!
//! ```text
//! q_h = a_h |v^h|²      N = (Σ q_h^k)^{1/k}    r_h = q_h / N    ρ_h = r_h^{k-1}
//! u_h = a_h conj(v^h)   Q_h = a_h v^h ρ_h      e_l = 2 conj(z^l) / (1 - |z^l|²)
//! ```

mod connection;
mod curvature;
pub(crate) mod fd;
mod levi;

pub use connection::{
    connection, connection_with_probes, derivative_crosscheck, kahler_berwald_check, ConnectionReport,
    DerivativeCheck, KahlerBerwaldReport,
};
pub use curvature::{
    curvature, curvature_at, einstein_check, reference_vector, CurvatureReport, EinsteinReport,
};
pub use levi::{gradient, levi_matrix, real_hessian, LeviReport};

use nalgebra::DMatrix;

use crate::domain::{ensure_dim, Complex, MetricParams};
use crate::error::{Error, Result};
use crate::metrics::{lk_norm, weights};

/// Per-point quantities shared by every closed-form derivative.
#[derive(Debug, Clone)]
pub(crate) struct FiberData {
    pub m: usize,
    pub alpha: f64,
    pub beta: f64,
    pub k: f64,
    pub ki: i32,
    pub a: Vec<f64>,
    pub v: Vec<Complex>,
    pub q: Vec<f64>,
    pub norm: f64,
    pub r: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<Complex>,
    pub big_q: Vec<Complex>,
    pub e: Vec<Complex>,
}

impl FiberData {
    pub fn new(p: &MetricParams, z: &[Complex], v: &[Complex]) -> Result<Self> {
        ensure_dim(z.len(), v.len())?;
        let m = z.len();
        let a = weights(z);
        let q: Vec<f64> = a.iter().zip(v).map(|(a, c)| a * c.norm_sqr()).collect();
        let ki = p.k() as i32;
        let norm = lk_norm(&q, p.k());
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let r: Vec<f64> = q.iter().map(|x| x / norm).collect();
        let rho: Vec<f64> = r.iter().map(|x| x.powi(ki - 1)).collect();
        let u = a.iter().zip(v).map(|(a, c)| c.conj() * *a).collect();
        let big_q = (0..m).map(|h| v[h] * (a[h] * rho[h])).collect();
        let e = z.iter().map(|c| c.conj() * (2.0 / (1.0 - c.norm_sqr()))).collect();
        Ok(Self {
            m,
            alpha: 1.0 / (1.0 + p.t()),
            beta: p.t() / (1.0 + p.t()),
            k: p.k() as f64,
            ki,
            a,
            v: v.to_vec(),
            q,
            norm,
            r,
            rho,
            u,
            big_q,
            e,
        })
    }

    pub fn g(&self) -> f64 {
        self.alpha * self.q.iter().sum::<f64>() + self.beta * self.norm
    }

    /// `∂G/∂v̄^j`.
    pub fn gradient(&self) -> Vec<Complex> {
        (0..self.m)
            .map(|j| self.v[j] * (self.alpha * self.a[j]) + self.big_q[j] * self.beta)
            .collect()
    }

    /// `L[(i, s)] = ∂²G/∂v^i∂v̄^s`.
    pub fn levi(&self) -> DMatrix<Complex> {
        let (k, n) = (self.k, self.norm);
        DMatrix::from_fn(self.m, self.m, |i, s| {
            let mut x = self.big_q[i].conj() * self.big_q[s] * ((1.0 - k) / n);
            if i == s {
                x += k * self.a[i] * self.rho[i];
            }
            x *= self.beta;
            if i == s {
                x += self.alpha * self.a[i];
            }
            x
        })
    }

    /// `M[(s, l)] = ∂²G/∂v̄^s∂z^l`.
    pub fn mixed(&self) -> DMatrix<Complex> {
        let k = self.k;
        DMatrix::from_fn(self.m, self.m, |s, l| {
            let mut x = -self.big_q[s] * ((k - 1.0) * self.r[l].powi(self.ki));
            if s == l {
                x += self.big_q[s] * k;
            }
            x *= self.beta;
            if s == l {
                x += self.v[s] * (self.alpha * self.a[s]);
            }
            x * self.e[l]
        })
    }

    /// `∂r_h/∂v^j`.
    fn d_r(&self, j: usize, h: usize) -> Complex {
        let delta = if h == j { 1.0 } else { 0.0 };
        self.u[j] * ((delta - self.r[h] * self.rho[j]) / self.norm)
    }

    /// `∂ρ_h/∂v^j`.
    fn d_rho(&self, j: usize, h: usize) -> Complex {
        self.d_r(j, h) * ((self.k - 1.0) * self.r[h].powi(self.ki - 2))
    }

    /// `∂Q_s/∂v^j`.
    fn d_big_q(&self, j: usize, s: usize) -> Complex {
        let mut x = self.v[s] * self.a[s] * self.d_rho(j, s);
        if s == j {
            x += self.a[s] * self.rho[s];
        }
        x
    }

    /// `∂L/∂v^j`.
    fn d_levi(&self, j: usize) -> DMatrix<Complex> {
        let (k, n) = (self.k, self.norm);
        let d_norm = self.u[j] * self.rho[j];
        DMatrix::from_fn(self.m, self.m, |i, s| {
            let qi = self.big_q[i].conj();
            let d_qi = self.u[i] * self.d_rho(j, i);
            let mut x = (d_qi * self.big_q[s] + qi * self.d_big_q(j, s)) / n
                - qi * self.big_q[s] * d_norm / (n * n);
            x *= 1.0 - k;
            if i == s {
                x += self.d_rho(j, i) * (k * self.a[i]);
            }
            x * self.beta
        })
    }

    /// `∂M/∂v^j`.
    fn d_mixed(&self, j: usize) -> DMatrix<Complex> {
        let k = self.k;
        DMatrix::from_fn(self.m, self.m, |s, l| {
            let dq = self.d_big_q(j, s);
            let mut x = -(dq * self.r[l].powi(self.ki)
                + self.big_q[s] * self.d_r(j, l) * (k * self.r[l].powi(self.ki - 1)))
                * (k - 1.0);
            if s == l {
                x += dq * k;
            }
            x *= self.beta;
            if s == j && s == l {
                x += self.alpha * self.a[s];
            }
            x * self.e[l]
        })
    }

    /// Nonlinear connection `Γ[(i, l)] = Γ^i_{;l}`, solving `Lᵀ Γ = M`.
    pub fn nonlinear_connection(&self) -> Result<(DMatrix<Complex>, nalgebra::LU<Complex, nalgebra::Dyn, nalgebra::Dyn>)> {
        let lu = self.levi().transpose().lu();
        let gamma = lu.solve(&self.mixed()).ok_or(Error::Singular)?;
        Ok((gamma, lu))
    }

    /// Horizontal coefficients, indexed `[j][(i, l)] = Γ^i_{j;l} = ∂Γ^i_{;l}/∂v^j`,
    /// from differentiating `Lᵀ Γ = M`.
    pub fn horizontal(&self) -> Result<(DMatrix<Complex>, Vec<DMatrix<Complex>>)> {
        let (gamma, lu) = self.nonlinear_connection()?;
        let mut out = Vec::with_capacity(self.m);
        for j in 0..self.m {
            let rhs = self.d_mixed(j) - self.d_levi(j).transpose() * &gamma;
            out.push(lu.solve(&rhs).ok_or(Error::Singular)?);
        }
        Ok((gamma, out))
    }
}

/// `𝔾^i_l = ½(Γ^i_{;l} + Σ_r Γ^i_{l;r} v^r)`, the `v^l`-derivative of
/// `½ Γ^i_{;r} v^r`.
pub(crate) fn berwald_nonlinear(
    gamma: &DMatrix<Complex>,
    horizontal: &[DMatrix<Complex>],
    v: &[Complex],
) -> DMatrix<Complex> {
    let m = v.len();
    DMatrix::from_fn(m, m, |i, l| {
        let transport: Complex = (0..m).map(|r| horizontal[l][(i, r)] * v[r]).sum();
        (gamma[(i, l)] + transport) * 0.5
    })
}

pub(crate) fn to_rows<T: nalgebra::Scalar + Copy>(a: &DMatrix<T>) -> Vec<Vec<T>> {
    (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
}

/// Largest entrywise deviation, relative to the largest entry of `reference`.
pub(crate) fn max_rel_diff(value: &[Complex], reference: &[Complex]) -> f64 {
    let scale = reference.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let diff = value.iter().zip(reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

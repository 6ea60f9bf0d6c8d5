use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{to_rows, FiberData};
use crate::domain::{ensure_dim, Complex, MetricParams, PolydiscPoint, TangentVector};
use crate::error::{Error, Result};

/// Levi matrix, its inverse and the real Hessian at one `(z; v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeviReport {
    /// `G = F²`.
    pub g: f64,
    /// `levi[i][s] = ∂²G/∂v^i∂v̄^s`.
    pub levi: Vec<Vec<Complex>>,
    pub levi_inverse: Vec<Vec<Complex>>,
    pub min_eigenvalue: f64,
    /// Hessian in the real fiber coordinates `(Re v, Im v)`.
    pub hessian_real: Vec<Vec<f64>>,
    pub hessian_min_eigenvalue: f64,
}

fn fiber(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<FiberData> {
    ensure_dim(z.dim(), v.dim())?;
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    FiberData::new(p, z.coords(), v.coords())
}

/// `∂G/∂v̄^j` in closed form.
pub fn gradient(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<Vec<Complex>> {
    Ok(fiber(p, z, v)?.gradient())
}

pub fn levi_matrix(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<LeviReport> {
    let data = fiber(p, z, v)?;
    let levi = data.levi();
    let inverse = levi.clone().try_inverse().ok_or(Error::Singular)?;
    let min_eigenvalue = levi.clone().symmetric_eigenvalues().min();
    let hessian = real_hessian(p, z, v)?;
    let hessian_min_eigenvalue = hessian.clone().symmetric_eigenvalues().min();
    Ok(LeviReport {
        g: data.g(),
        levi: to_rows(&levi),
        levi_inverse: to_rows(&inverse),
        min_eigenvalue,
        hessian_real: to_rows(&hessian),
        hessian_min_eigenvalue,
    })
}

/// Real `2m × 2m` Hessian of `G` in `u = (Re v, Im v)`: central differences
/// of the closed-form real gradient `(2 Re ∂G/∂v̄, 2 Im ∂G/∂v̄)`, symmetrized.
pub fn real_hessian(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<DMatrix<f64>> {
    fiber(p, z, v)?;
    let m = v.dim();
    let h = 1e-5 * v.sup_norm();
    let real_gradient = |a: usize, s: f64| -> Result<Vec<f64>> {
        let mut u = v.coords().to_vec();
        if a < m {
            u[a].re += s;
        } else {
            u[a - m].im += s;
        }
        let w = FiberData::new(p, z.coords(), &u)?.gradient();
        Ok(w.iter().map(|c| 2.0 * c.re).chain(w.iter().map(|c| 2.0 * c.im)).collect())
    };
    let mut hess = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for a in 0..2 * m {
        let (plus, minus) = (real_gradient(a, h)?, real_gradient(a, -h)?);
        for b in 0..2 * m {
            hess[(b, a)] = (plus[b] - minus[b]) / (2.0 * h);
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

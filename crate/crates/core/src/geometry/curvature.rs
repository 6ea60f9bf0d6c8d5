use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fd::{wirtinger, Stencil};
use super::FiberData;
use crate::domain::{ensure_dim, Complex, MetricParams, PolydiscPoint, TangentVector, Tolerance};
use crate::error::{Error, Result};
use crate::rng::{sample_polydisc_point, TrialRng};

/// Horizontal curvature blocks and the mean curvature against the Bergman
/// metric at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport {
    pub z: PolydiscPoint,
    /// `r[s][l][i][j] = R^s_{l i j̄} = −∂Γ^s_{l;i}/∂z̄^j`, by five-point
    /// differences of the closed-form connection.
    pub r: Vec<Vec<Vec<Vec<Complex>>>>,
    /// `−2 / (1 − |z^l|²)²`, the expected value of `R^l_{l l l̄}`.
    pub analytic_diagonal: Vec<f64>,
    /// Largest deviation of `r` from the diagonal-supported analytic tensor,
    /// relative to its largest entry.
    pub fd_residual: f64,
    /// `K^s_l = Σ_i R^s_{l i ī} / a_i`.
    pub mean_curvature: Vec<Vec<Complex>>,
    /// `φ` when `K = φ·I` to `rel_eq`.
    pub einstein_factor: Option<Complex>,
}

/// Fixed nondegenerate fiber vector used by [`curvature`].
pub fn reference_vector(m: usize) -> TangentVector {
    let coords = (0..m.max(1))
        .map(|l| Complex::from_polar(1.0 / (1.0 + 0.25 * l as f64), 0.7 * l as f64))
        .collect();
    TangentVector::new(coords).expect("finite reference vector")
}

pub fn curvature(p: &MetricParams, z: &PolydiscPoint) -> Result<CurvatureReport> {
    curvature_at(p, z, &reference_vector(z.dim()), &Tolerance::default())
}

#[allow(clippy::needless_range_loop)]
pub fn curvature_at(
    p: &MetricParams,
    z: &PolydiscPoint,
    v: &TangentVector,
    tol: &Tolerance,
) -> Result<CurvatureReport> {
    ensure_dim(z.dim(), v.dim())?;
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let m = z.dim();
    let zero = Complex::new(0.0, 0.0);
    let mut r = vec![vec![vec![vec![zero; m]; m]; m]; m];
    for j in 0..m {
        let h = 2e-3 * (1.0 - z.coords()[j].norm());
        let (_, anti) = wirtinger(
            |w| {
                let mut zz = z.coords().to_vec();
                zz[j] += w;
                let (_, horizontal) = FiberData::new(p, &zz, v.coords())?.horizontal()?;
                Ok(horizontal.iter().flat_map(|a| a.iter().copied()).collect())
            },
            h,
            Stencil::FivePoint,
        )?;
        // Flattened as [l][(s, i)] in column-major order.
        for l in 0..m {
            for s in 0..m {
                for i in 0..m {
                    r[s][l][i][j] = -anti[l * m * m + s + i * m];
                }
            }
        }
    }

    let analytic_diagonal: Vec<f64> = z
        .coords()
        .iter()
        .map(|c| {
            let d = 1.0 - c.norm_sqr();
            -2.0 / (d * d)
        })
        .collect();
    let scale = analytic_diagonal.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut deviation = 0.0_f64;
    for s in 0..m {
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let expect = if s == l && l == i && i == j { analytic_diagonal[l] } else { 0.0 };
                    deviation = deviation.max((r[s][l][i][j] - expect).norm());
                }
            }
        }
    }

    let inv_weights: Vec<f64> = z.coords().iter().map(|c| (1.0 - c.norm_sqr()).powi(2)).collect();
    let mean_curvature: Vec<Vec<Complex>> = (0..m)
        .map(|s| (0..m).map(|l| (0..m).map(|i| r[s][l][i][i] * inv_weights[i]).sum()).collect())
        .collect();
    let einstein_factor = scalar_factor(&mean_curvature, tol);
    Ok(CurvatureReport {
        z: z.clone(),
        r,
        analytic_diagonal,
        fd_residual: deviation / scale,
        mean_curvature,
        einstein_factor,
    })
}

/// Relative distance of `k` from `φ·I`, with `φ` the mean diagonal entry.
fn scalar_deviation(k: &[Vec<Complex>]) -> (Complex, f64) {
    let m = k.len();
    let phi = (0..m).map(|i| k[i][i]).sum::<Complex>() / m as f64;
    let mut worst = 0.0_f64;
    for (s, row) in k.iter().enumerate() {
        for (l, x) in row.iter().enumerate() {
            let expect = if s == l { phi } else { Complex::new(0.0, 0.0) };
            worst = worst.max((x - expect).norm());
        }
    }
    (phi, worst / phi.norm())
}

fn scalar_factor(k: &[Vec<Complex>], tol: &Tolerance) -> Option<Complex> {
    let (phi, dev) = scalar_deviation(k);
    (dev <= tol.rel_eq).then_some(phi)
}

/// Mean curvature over random base points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EinsteinReport {
    pub samples: u64,
    /// Largest `max |K^s_l − φ δ^s_l| / |φ|` over samples, with `φ` the
    /// common factor (mean of all diagonal entries seen).
    pub max_relative_deviation: f64,
    /// Largest curvature-tensor finite-difference residual over samples.
    pub max_fd_residual: f64,
    /// The common factor when every sample is within `rel_eq` of it.
    pub einstein_factor: Option<Complex>,
    /// Report at the sample with the largest deviation.
    pub worst: CurvatureReport,
}

pub fn einstein_check(
    p: &MetricParams,
    m: usize,
    samples: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
) -> Result<EinsteinReport> {
    if samples == 0 {
        return Err(Error::InvalidMap("samples must be >= 1".into()));
    }
    let reports: Vec<CurvatureReport> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream(i);
            let z = sample_polydisc_point(&mut r, m, radius_cap)?;
            curvature_at(p, &z, &reference_vector(m), tol)
        })
        .collect::<Result<_>>()?;

    let diagonal_count = (reports.len() * m) as f64;
    let phi = reports
        .iter()
        .flat_map(|c| (0..m).map(move |i| c.mean_curvature[i][i]))
        .sum::<Complex>()
        / diagonal_count;
    let mut worst_index = 0;
    let mut worst_dev = f64::NEG_INFINITY;
    let mut max_fd = 0.0_f64;
    for (index, c) in reports.iter().enumerate() {
        max_fd = max_fd.max(c.fd_residual);
        let mut dev = 0.0_f64;
        for (s, row) in c.mean_curvature.iter().enumerate() {
            for (l, x) in row.iter().enumerate() {
                let expect = if s == l { phi } else { Complex::new(0.0, 0.0) };
                dev = dev.max((x - expect).norm() / phi.norm());
            }
        }
        if dev > worst_dev {
            worst_dev = dev;
            worst_index = index;
        }
    }
    Ok(EinsteinReport {
        samples,
        max_relative_deviation: worst_dev,
        max_fd_residual: max_fd,
        einstein_factor: (worst_dev <= tol.rel_eq).then_some(phi),
        worst: reports.into_iter().nth(worst_index).ok_or(Error::EmptyDimension)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_has_diagonal_minus_two() {
        let z = PolydiscPoint::origin(2).unwrap();
        let c = curvature(&MetricParams::new(1.0, 2).unwrap(), &z).unwrap();
        assert_eq!(c.analytic_diagonal, vec![-2.0, -2.0]);
        assert!(c.fd_residual < 1e-8, "{}", c.fd_residual);
    }

    #[test]
    fn half_point_diagonal() {
        let z = PolydiscPoint::new(vec![Complex::new(0.5, 0.0), Complex::new(0.0, 0.0)]).unwrap();
        let c = curvature(&MetricParams::new(3.0, 5).unwrap(), &z).unwrap();
        assert!((c.analytic_diagonal[0] + 32.0 / 9.0).abs() < 1e-14);
        assert!((c.r[0][0][0][0].re + 32.0 / 9.0).abs() < 1e-8);
        assert!((c.r[1][1][1][1].re + 2.0).abs() < 1e-8);
    }

    #[test]
    fn scalar_deviation_detects_off_diagonal() {
        let k = vec![
            vec![Complex::new(-2.0, 0.0), Complex::new(0.1, 0.0)],
            vec![Complex::new(0.0, 0.0), Complex::new(-2.0, 0.0)],
        ];
        let (phi, dev) = scalar_deviation(&k);
        assert_eq!(phi, Complex::new(-2.0, 0.0));
        assert!((dev - 0.05).abs() < 1e-15);
    }
}

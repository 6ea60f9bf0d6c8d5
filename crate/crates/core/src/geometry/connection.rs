use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fd::{wirtinger, Stencil};
use super::{berwald_nonlinear, max_rel_diff, to_rows, FiberData};
use crate::domain::{ensure_dim, Complex, MetricParams, PolydiscPoint, TangentVector};
use crate::error::{Error, Result};
use crate::rng::{sample_polydisc_point, sample_tangent_vector, TrialRng};

/// Connection coefficients at one `(z; v)` plus the Kähler and Berwald
/// residuals over a set of probe vectors at the same `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConnectionReport {
    /// `gamma_nl[i][l] = Γ^i_{;l}`.
    pub gamma_nl: Vec<Vec<Complex>>,
    /// `gamma_h[i][j][l] = Γ^i_{j;l}`.
    pub gamma_h: Vec<Vec<Vec<Complex>>>,
    /// `berwald_nl[i][l] = 𝔾^i_l`.
    pub berwald_nl: Vec<Vec<Complex>>,
    /// `berwald[i][j][l] = 𝔾^i_{jl}`.
    pub berwald: Vec<Vec<Vec<Complex>>>,
    /// `max |Γ^i_{j;l} − Γ^i_{l;j}|` over `v` and the probes.
    pub kahler_residual: f64,
    /// `max |Γ^i_{j;l}(probe) − Γ^i_{j;l}(v)|`.
    pub berwald_v_residual: f64,
    pub v_samples: usize,
}

fn horizontal_raw(p: &MetricParams, z: &[Complex], v: &[Complex]) -> Result<(DMatrix<Complex>, Vec<DMatrix<Complex>>)> {
    FiberData::new(p, z, v)?.horizontal()
}

fn to_cube(h: &[DMatrix<Complex>]) -> Vec<Vec<Vec<Complex>>> {
    let m = h.len();
    (0..m).map(|i| (0..m).map(|j| (0..m).map(|l| h[j][(i, l)]).collect()).collect()).collect()
}

fn kahler_residual(h: &[DMatrix<Complex>]) -> f64 {
    let m = h.len();
    let mut worst = 0.0_f64;
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                worst = worst.max((h[j][(i, l)] - h[l][(i, j)]).norm());
            }
        }
    }
    worst
}

fn validate(z: &PolydiscPoint, v: &TangentVector) -> Result<()> {
    ensure_dim(z.dim(), v.dim())?;
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(())
}

/// Fixed probe set used by [`connection`].
fn default_probes(m: usize) -> Vec<TangentVector> {
    let mut rng = TrialRng::new(0x005e_ed0f_be7a).stream(m as u64);
    (0..4).map(|_| sample_tangent_vector(&mut rng, m)).collect()
}

pub fn connection(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<ConnectionReport> {
    connection_with_probes(p, z, v, &default_probes(v.dim()))
}

pub fn connection_with_probes(
    p: &MetricParams,
    z: &PolydiscPoint,
    v: &TangentVector,
    probes: &[TangentVector],
) -> Result<ConnectionReport> {
    validate(z, v)?;
    let m = v.dim();
    let (gamma, horizontal) = horizontal_raw(p, z.coords(), v.coords())?;
    let berwald_nl = berwald_nonlinear(&gamma, &horizontal, v.coords());

    // 𝔾^i_{jl} = ∂𝔾^i_l/∂v^j by central differences of the closed form.
    let h = 1e-5 * v.sup_norm();
    let mut berwald = vec![vec![vec![Complex::new(0.0, 0.0); m]; m]; m];
    for j in 0..m {
        let (d, _) = wirtinger(
            |w| {
                let mut u = v.coords().to_vec();
                u[j] += w;
                let (g, hz) = horizontal_raw(p, z.coords(), &u)?;
                Ok(berwald_nonlinear(&g, &hz, &u).iter().copied().collect())
            },
            h,
            Stencil::ThreePoint,
        )?;
        // Column-major flattening: entry (i, l) sits at i + l·m.
        for i in 0..m {
            for l in 0..m {
                berwald[i][j][l] = d[i + l * m];
            }
        }
    }

    let mut kahler = kahler_residual(&horizontal);
    let mut berwald_v = 0.0_f64;
    for probe in probes {
        ensure_dim(m, probe.dim())?;
        let (_, other) = horizontal_raw(p, z.coords(), probe.coords())?;
        kahler = kahler.max(kahler_residual(&other));
        for (a, b) in other.iter().zip(&horizontal) {
            berwald_v = (a - b).iter().fold(berwald_v, |acc, x| acc.max(x.norm()));
        }
    }
    Ok(ConnectionReport {
        gamma_nl: to_rows(&gamma),
        gamma_h: to_cube(&horizontal),
        berwald_nl: to_rows(&berwald_nl),
        berwald,
        kahler_residual: kahler,
        berwald_v_residual: berwald_v,
        v_samples: probes.len() + 1,
    })
}

/// Closed-form derivatives compared with central differences of the
/// quantity they differentiate, as relative max-entry deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeCheck {
    /// `∂G/∂v̄` against differences of `G`.
    pub gradient_rel: f64,
    /// Levi matrix against differences of `∂G/∂v̄` in `v`.
    pub levi_rel: f64,
    /// `∂²G/∂v̄∂z` against differences of `∂G/∂v̄` in `z`.
    pub mixed_rel: f64,
    /// `Γ^i_{j;l}` against differences of `Γ^i_{;l}` in `v`.
    pub horizontal_rel: f64,
}

impl DerivativeCheck {
    pub fn max(&self) -> f64 {
        self.gradient_rel.max(self.levi_rel).max(self.mixed_rel).max(self.horizontal_rel)
    }
}

pub fn derivative_crosscheck(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<DerivativeCheck> {
    validate(z, v)?;
    let m = v.dim();
    let (zc, vc) = (z.coords(), v.coords());
    let data = FiberData::new(p, zc, vc)?;
    let hv = 1e-5 * v.sup_norm();
    let zero = Complex::new(0.0, 0.0);

    let shifted = |coords: &[Complex], j: usize, w: Complex| {
        let mut u = coords.to_vec();
        u[j] += w;
        u
    };
    let at_v = |j: usize, w: Complex| FiberData::new(p, zc, &shifted(vc, j, w));
    let at_z = |l: usize, w: Complex| FiberData::new(p, &shifted(zc, l, w), vc);

    let mut grad_fd = Vec::with_capacity(m);
    let mut levi_fd = DMatrix::from_element(m, m, zero);
    let mut mixed_fd = DMatrix::from_element(m, m, zero);
    let mut horiz_fd = Vec::with_capacity(m);
    for j in 0..m {
        let (_, db) = wirtinger(|w| Ok(vec![Complex::new(at_v(j, w)?.g(), 0.0)]), hv, Stencil::ThreePoint)?;
        grad_fd.push(db[0]);

        let (d, _) = wirtinger(|w| Ok(at_v(j, w)?.gradient()), hv, Stencil::ThreePoint)?;
        for s in 0..m {
            levi_fd[(j, s)] = d[s];
        }

        let hz = 1e-5 * (1.0 - zc[j].norm());
        let (d, _) = wirtinger(|w| Ok(at_z(j, w)?.gradient()), hz, Stencil::ThreePoint)?;
        for s in 0..m {
            mixed_fd[(s, j)] = d[s];
        }

        let (d, _) = wirtinger(
            |w| Ok(at_v(j, w)?.nonlinear_connection()?.0.iter().copied().collect()),
            hv,
            Stencil::ThreePoint,
        )?;
        horiz_fd.push(DMatrix::from_column_slice(m, m, &d));
    }

    let (_, horizontal) = data.horizontal()?;
    let flat = |x: &[DMatrix<Complex>]| x.iter().flat_map(|a| a.iter().copied()).collect::<Vec<_>>();
    Ok(DerivativeCheck {
        gradient_rel: max_rel_diff(&data.gradient(), &grad_fd),
        levi_rel: max_rel_diff(data.levi().as_slice(), levi_fd.as_slice()),
        mixed_rel: max_rel_diff(data.mixed().as_slice(), mixed_fd.as_slice()),
        horizontal_rel: max_rel_diff(&flat(&horizontal), &flat(&horiz_fd)),
    })
}

/// Kähler and Berwald residuals over random base points with several
/// fiber vectors each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KahlerBerwaldReport {
    pub z_samples: u64,
    pub v_per_z: usize,
    pub max_kahler_residual: f64,
    pub max_berwald_v_residual: f64,
    pub worst_z: PolydiscPoint,
}

pub fn kahler_berwald_check(
    p: &MetricParams,
    m: usize,
    z_samples: u64,
    v_per_z: usize,
    rng: &TrialRng,
    radius_cap: f64,
) -> Result<KahlerBerwaldReport> {
    if z_samples == 0 || v_per_z == 0 {
        return Err(Error::InvalidMap("sample counts must be >= 1".into()));
    }
    let (kahler, berwald, worst_z) = (0..z_samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream(i);
            let z = sample_polydisc_point(&mut r, m, radius_cap)?;
            let v = sample_tangent_vector(&mut r, m);
            let probes: Vec<_> = (1..v_per_z).map(|_| sample_tangent_vector(&mut r, m)).collect();
            let c = connection_with_probes(p, &z, &v, &probes)?;
            Ok((c.kahler_residual, c.berwald_v_residual, z))
        })
        .try_reduce_with(|a, b| {
            let worse = if a.0.max(a.1) >= b.0.max(b.1) { a.2.clone() } else { b.2.clone() };
            Ok((a.0.max(b.0), a.1.max(b.1), worse))
        })
        .transpose()?
        .ok_or(Error::EmptyDimension)?;
    Ok(KahlerBerwaldReport {
        z_samples,
        v_per_z,
        max_kahler_residual: kahler,
        max_berwald_v_residual: berwald,
        worst_z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn bergman_connection_is_diagonal() {
        let z = PolydiscPoint::new(vec![c(0.5, 0.0), c(0.1, -0.4)]).unwrap();
        let v = TangentVector::new(vec![c(1.0, 0.2), c(-0.3, 0.6)]).unwrap();
        let r = connection(&MetricParams::bergman(), &z, &v).unwrap();
        // 2 z̄ / (1 − |z|²) at z = 0.5
        assert!((r.gamma_h[0][0][0] - c(4.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!(r.gamma_h[0][1][1].norm() < 1e-12);
        assert!(r.kahler_residual < 1e-12 && r.berwald_v_residual < 1e-12);
    }

    #[test]
    fn closed_forms_match_differences() {
        let p = MetricParams::new(1.0, 3).unwrap();
        let z = PolydiscPoint::new(vec![c(0.2, 0.5), c(-0.6, 0.1), c(0.0, 0.3)]).unwrap();
        let v = TangentVector::new(vec![c(0.4, -0.9), c(0.3, 0.2), c(-0.5, 0.5)]).unwrap();
        let check = derivative_crosscheck(&p, &z, &v).unwrap();
        assert!(check.max() < 1e-6, "{check:?}");
    }
}

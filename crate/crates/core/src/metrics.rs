//! Closed-form evaluation of the metrics
//!
//! ```text
//! F²_{t,k}(z; v) = 1/(1+t) · [ Σ_l a_l |v^l|²  +  t · (Σ_l a_l^k |v^l|^{2k})^{1/k} ],
//! a_l = (1 - |z^l|²)^{-2},
//! ```
//!
//! the origin norm `φ_{t,k}(v) = F_{t,k}(0; v)`, the Bergman metric (`t = 0`)
//! and the Minkowski functional of the polydisc.

use serde::{Deserialize, Serialize};

use crate::domain::{ensure_dim, Complex, MetricParams, PolydiscPoint, TangentVector};
use crate::error::{Error, Result};
use crate::rng::{sample_tangent_vector, TrialRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub f: f64,
    pub f2: f64,
}

impl MetricValue {
    fn from_f2(f2: f64) -> Self {
        Self { f: f2.sqrt(), f2 }
    }
}

/// `(Σ_l q_l^k)^{1/k}` for nonnegative `q`, rescaled by the largest term so
/// large `k` cannot overflow.
pub(crate) fn lk_norm(q: &[f64], k: u32) -> f64 {
    let max = q.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let s: f64 = q.iter().map(|&x| (x / max).powi(k as i32)).sum();
    max * (s.ln() / k as f64).exp()
}

/// Combines the squared weighted moduli `q_l = a_l |v^l|²` into `F²`.
pub(crate) fn combine(p: &MetricParams, q: &[f64]) -> f64 {
    let quad: f64 = q.iter().sum();
    if p.t() == 0.0 {
        return quad;
    }
    (quad + p.t() * lk_norm(q, p.k())) / (1.0 + p.t())
}

/// `a_l = (1 - |z^l|²)^{-2}`.
pub fn weights(z: &[Complex]) -> Vec<f64> {
    z.iter()
        .map(|c| {
            let d = 1.0 - c.norm_sqr();
            1.0 / (d * d)
        })
        .collect()
}

pub fn eval_f2(p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<MetricValue> {
    ensure_dim(z.dim(), v.dim())?;
    let q: Vec<f64> = weights(z.coords())
        .iter()
        .zip(v.coords())
        .map(|(a, c)| a * c.norm_sqr())
        .collect();
    Ok(MetricValue::from_f2(combine(p, &q)))
}

/// `φ²_{t,k}(v)` on raw coordinates of any length.
pub fn phi2_raw(p: &MetricParams, v: &[Complex]) -> f64 {
    let q: Vec<f64> = v.iter().map(|c| c.norm_sqr()).collect();
    combine(p, &q)
}

pub fn eval_phi2(p: &MetricParams, v: &TangentVector) -> f64 {
    phi2_raw(p, v.coords())
}

pub fn eval_bergman_f2(z: &PolydiscPoint, v: &TangentVector) -> Result<f64> {
    Ok(eval_f2(&MetricParams::bergman(), z, v)?.f2)
}

/// Minkowski functional of `P_m`: `p(z) = max_l |z^l|`, defined on all of `ℂ^m`.
pub fn minkowski_p(z: &[Complex]) -> f64 {
    z.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Strict membership in the indicatrix `{v : φ_{t,k}(v) < 1}`.
pub fn indicatrix_contains(p: &MetricParams, v: &TangentVector) -> bool {
    eval_phi2(p, v) < 1.0
}

/// `(m + t·m^{1/k}) / (1+t)`: the value of `φ²` on `(1, …, 1)`.
pub fn polydisc_constant(m: usize, p: &MetricParams) -> f64 {
    let m = m as f64;
    (m + p.t() * m.powf(1.0 / p.k() as f64)) / (1.0 + p.t())
}

/// A unit direction of `ℂ^m` and the radius at which it meets the boundary
/// of the indicatrix, `radius = 1 / φ(direction)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatrixPoint {
    pub direction: TangentVector,
    pub radius: f64,
}

impl IndicatrixPoint {
    pub fn point(&self) -> TangentVector {
        self.direction.scale(Complex::new(self.radius, 0.0))
    }
}

/// Boundary samples of `{v : φ_{t,k}(v) < 1}`: the coordinate axes, the
/// diagonal, then `resolution` seeded random directions (evenly spaced
/// phases when `m = 1`).
pub fn indicatrix_boundary(
    p: &MetricParams,
    m: usize,
    resolution: usize,
    rng: &TrialRng,
) -> Result<Vec<IndicatrixPoint>> {
    if m == 0 {
        return Err(Error::EmptyDimension);
    }
    if resolution < 8 {
        return Err(Error::InvalidResolution(resolution));
    }
    let unit = |v: TangentVector| {
        let norm = v.euclidean_norm();
        v.scale(Complex::new(1.0 / norm, 0.0))
    };
    let mut directions: Vec<TangentVector> = (0..m).map(|l| TangentVector::basis(m, l)).collect();
    if m > 1 {
        directions.push(unit(TangentVector::new(vec![Complex::new(1.0, 0.0); m])?));
    }
    for j in 0..resolution {
        let d = if m == 1 {
            let angle = std::f64::consts::TAU * j as f64 / resolution as f64;
            TangentVector::new(vec![Complex::from_polar(1.0, angle)])?
        } else {
            unit(sample_tangent_vector(&mut rng.stream(j as u64), m))
        };
        directions.push(d);
    }
    Ok(directions
        .into_iter()
        .map(|direction| {
            let radius = 1.0 / eval_phi2(p, &direction).sqrt();
            IndicatrixPoint { direction, radius }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn params(t: f64, k: u32) -> MetricParams {
        MetricParams::new(t, k).unwrap()
    }

    #[test]
    fn origin_basis_vector_has_unit_length() {
        for (t, k) in [(0.0, 2), (0.5, 3), (3.0, 5), (100.0, 7)] {
            let z = PolydiscPoint::origin(3).unwrap();
            let v = TangentVector::basis(3, 0);
            assert!((eval_f2(&params(t, k), &z, &v).unwrap().f2 - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn one_dimensional_bergman_value() {
        let z = PolydiscPoint::new(vec![c(0.5, 0.0)]).unwrap();
        let v = TangentVector::new(vec![c(1.0, 0.0)]).unwrap();
        let val = eval_f2(&params(0.0, 2), &z, &v).unwrap();
        assert!((val.f2 - 16.0 / 9.0).abs() < 1e-14);
        assert!((val.f - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_vector_at_origin() {
        let z = PolydiscPoint::origin(2).unwrap();
        let v = TangentVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let f2 = eval_f2(&params(1.0, 2), &z, &v).unwrap().f2;
        assert!((f2 - (2.0 + 2f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn phi2_examples() {
        assert_eq!(eval_phi2(&params(2.0, 3), &TangentVector::zero(4)), 0.0);
        assert!((eval_phi2(&params(1.0, 2), &TangentVector::basis(2, 0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bergman_examples() {
        let z = PolydiscPoint::origin(2).unwrap();
        let v = TangentVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((eval_bergman_f2(&z, &v).unwrap() - 2.0).abs() < 1e-15);
        let z = PolydiscPoint::new(vec![c(0.5, 0.0), c(0.0, 0.0)]).unwrap();
        let v = TangentVector::basis(2, 0);
        assert!((eval_bergman_f2(&z, &v).unwrap() - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn minkowski_examples() {
        assert_eq!(minkowski_p(&[c(0.3, 0.0), c(0.0, -0.7)]), 0.7);
        assert_eq!(minkowski_p(&[c(0.0, 0.0)]), 0.0);
        let z = [c(0.3, 0.1), c(-0.2, 0.4)];
        let lambda = c(0.6, -1.3);
        let scaled: Vec<_> = z.iter().map(|x| x * lambda).collect();
        assert!((minkowski_p(&scaled) - lambda.norm() * minkowski_p(&z)).abs() < 1e-15);
    }

    #[test]
    fn indicatrix_boundary_and_ball() {
        let p = params(1.0, 2);
        assert!(!indicatrix_contains(&p, &TangentVector::basis(3, 0)));
        let v = TangentVector::new(vec![c(0.5, 0.2), c(-0.3, 0.6)]).unwrap();
        assert!(v.euclidean_norm() < 1.0);
        assert!(indicatrix_contains(&p, &v));
    }

    #[test]
    fn indicatrix_diagonal_radius() {
        let pts = indicatrix_boundary(&params(1.0, 2), 2, 8, &TrialRng::new(1)).unwrap();
        assert_eq!(pts.len(), 2 + 1 + 8);
        assert!((pts[0].radius - 1.0).abs() < 1e-15);
        assert!((pts[2].radius - 2.0 / (2.0 + 2f64.sqrt()).sqrt()).abs() < 1e-14);
        assert!(indicatrix_boundary(&params(1.0, 2), 2, 7, &TrialRng::new(1)).is_err());
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let z = PolydiscPoint::origin(2).unwrap();
        let v = TangentVector::basis(3, 0);
        assert!(eval_f2(&params(1.0, 2), &z, &v).is_err());
    }

    #[test]
    fn large_k_does_not_overflow() {
        let z = PolydiscPoint::new(vec![c(0.999, 0.0), c(0.0, 0.0)]).unwrap();
        let v = TangentVector::new(vec![c(1e3, 0.0), c(1.0, 0.0)]).unwrap();
        let f2 = eval_f2(&params(1.0, 200), &z, &v).unwrap().f2;
        assert!(f2.is_finite() && f2 > 0.0);
    }
}

//! Validated domain types shared by every module: points of the open unit
//! polydisc, tangent vectors, metric parameters and the tolerance policy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

fn check_finite(coords: &[Complex]) -> Result<()> {
    for (index, c) in coords.iter().enumerate() {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

/// Builds a finite complex scalar.
pub fn complex(re: f64, im: f64) -> Result<Complex> {
    let c = Complex::new(re, im);
    check_finite(&[c])?;
    Ok(c)
}

/// A point of the open unit polydisc `P_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<[f64; 2]>")]
pub struct PolydiscPoint {
    coords: Vec<Complex>,
}

impl PolydiscPoint {
    pub fn new(coords: Vec<Complex>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyDimension);
        }
        check_finite(&coords)?;
        for (index, c) in coords.iter().enumerate() {
            let modulus = c.norm();
            if modulus >= 1.0 {
                return Err(Error::OutsidePolydisc { index, modulus });
            }
        }
        Ok(Self { coords })
    }

    pub fn origin(m: usize) -> Result<Self> {
        Self::new(vec![Complex::new(0.0, 0.0); m])
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex] {
        &self.coords
    }

    /// Sup-norm of the point, i.e. the Minkowski functional of the polydisc.
    pub fn sup_norm(&self) -> f64 {
        crate::metrics::minkowski_p(&self.coords)
    }
}

impl From<PolydiscPoint> for Vec<[f64; 2]> {
    fn from(p: PolydiscPoint) -> Self {
        p.coords.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl TryFrom<Vec<[f64; 2]>> for PolydiscPoint {
    type Error = Error;
    fn try_from(raw: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(raw.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
    }
}

impl<'de> Deserialize<'de> for PolydiscPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Self::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// A vector of `T^{1,0}_z P_m ≅ ℂ^m`. The zero vector is allowed.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(into = "Vec<[f64; 2]>")]
pub struct TangentVector {
    coords: Vec<Complex>,
}

impl TangentVector {
    pub fn new(coords: Vec<Complex>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyDimension);
        }
        check_finite(&coords)?;
        Ok(Self { coords })
    }

    pub fn zero(m: usize) -> Self {
        Self { coords: vec![Complex::new(0.0, 0.0); m.max(1)] }
    }

    /// The coordinate vector `e_l` (0-based axis).
    pub fn basis(m: usize, axis: usize) -> Self {
        let mut v = Self::zero(m);
        v.coords[axis] = Complex::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    pub fn scale(&self, lambda: Complex) -> Self {
        Self { coords: self.coords.iter().map(|c| c * lambda).collect() }
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        crate::metrics::minkowski_p(&self.coords)
    }

    pub(crate) fn from_raw(coords: Vec<Complex>) -> Self {
        Self { coords }
    }
}

impl From<TangentVector> for Vec<[f64; 2]> {
    fn from(v: TangentVector) -> Self {
        v.coords.iter().map(|c| [c.re, c.im]).collect()
    }
}

impl<'de> Deserialize<'de> for TangentVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Self::new(raw.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
            .map_err(serde::de::Error::custom)
    }
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Selects one member `F_{t,k}` of the metric family. `t = 0` is the
/// Bergman metric for every `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricParams {
    t: f64,
    k: u32,
}

impl MetricParams {
    pub fn new(t: f64, k: u32) -> Result<Self> {
        if !t.is_finite() || t < 0.0 || k < 2 {
            return Err(Error::InvalidParams { t, k });
        }
        Ok(Self { t, k })
    }

    pub fn bergman() -> Self {
        Self { t: 0.0, k: 2 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

/// Numeric comparison policy. Every module takes one of these rather than
/// hard-coding thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs_eq: f64,
    pub rel_eq: f64,
    pub fd_rel: f64,
    pub psd_min_eig: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs_eq: 1e-10, rel_eq: 1e-9, fd_rel: 1e-5, psd_min_eig: 1e-12 }
    }
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("abs_eq", self.abs_eq),
            ("rel_eq", self.rel_eq),
            ("fd_rel", self.fd_rel),
            ("psd_min_eig", self.psd_min_eig),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidTolerance(format!("{name} = {value} must be > 0")));
            }
        }
        Ok(())
    }
}

/// `|a - b| <= abs_eq + rel_eq * max(|a|, |b|)`.
pub fn approx_eq(a: f64, b: f64, tol: &Tolerance) -> bool {
    (a - b).abs() <= tol.abs_eq + tol.rel_eq * a.abs().max(b.abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn approx_eq_defaults() {
        let tol = Tolerance::default();
        assert!(approx_eq(1.0, 1.0, &tol));
        assert!(!approx_eq(1.0, 1.0 + 1e-6, &tol));
        assert!(approx_eq(0.0, 5e-11, &tol));
    }

    #[test]
    fn point_rejects_boundary_and_nan() {
        let c = |re, im| Complex::new(re, im);
        assert!(PolydiscPoint::new(vec![c(0.3, 0.0), c(1.0, 0.0)]).is_err());
        assert!(PolydiscPoint::new(vec![c(0.6, 0.8)]).is_err());
        assert!(PolydiscPoint::new(vec![c(f64::NAN, 0.0)]).is_err());
        assert!(PolydiscPoint::new(vec![]).is_err());
        assert!(TangentVector::new(vec![c(f64::INFINITY, 0.0)]).is_err());
        assert!(PolydiscPoint::new(vec![c(0.5, 0.5)]).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(MetricParams::new(-0.1, 2).is_err());
        assert!(MetricParams::new(1.0, 1).is_err());
        assert!(MetricParams::new(f64::NAN, 3).is_err());
        assert!(MetricParams::new(0.0, 2).is_ok());
    }

    #[test]
    fn tolerance_must_be_positive() {
        assert!(Tolerance::default().validate().is_ok());
        let bad = Tolerance { rel_eq: 0.0, ..Tolerance::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn point_json_round_trip() {
        let p = PolydiscPoint::new(vec![Complex::new(0.1, -0.2), Complex::new(0.0, 0.5)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[0.1,-0.2],[0.0,0.5]]");
        let back: PolydiscPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<PolydiscPoint>("[[1.0,0.0]]").is_err());
    }
}

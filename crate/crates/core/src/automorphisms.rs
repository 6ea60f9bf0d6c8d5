//! The automorphism group of the polydisc. Every element has the normal form
//!
//! ```text
//! g(z)_l = e^{iθ_l} (z^{σ(l)} - c_l) / (1 - conj(c_l) z^{σ(l)})
//! ```
//!
//! with center `c ∈ P_m`, phases `θ` and a permutation `σ`. Products and
//! inverses are brought back into this form exactly, one coordinate at a time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{ensure_dim, Complex, PolydiscPoint, TangentVector};
use crate::error::{Error, Result};
use crate::rng::{sample_permutation, sample_phase};

/// A disc automorphism `ζ ↦ e^{iθ} (ζ - a) / (1 - conj(a) ζ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscMoebius {
    pub a: Complex,
    pub theta: f64,
}

impl DiscMoebius {
    pub fn identity() -> Self {
        Self { a: Complex::new(0.0, 0.0), theta: 0.0 }
    }

    pub fn apply(&self, z: Complex) -> Complex {
        Complex::from_polar(1.0, self.theta) * (z - self.a) / (1.0 - self.a.conj() * z)
    }

    /// `e^{iθ} (1 - |a|²) / (1 - conj(a) z)²`.
    pub fn derivative(&self, z: Complex) -> Complex {
        let d = 1.0 - self.a.conj() * z;
        Complex::from_polar(1.0, self.theta) * (1.0 - self.a.norm_sqr()) / (d * d)
    }

    pub fn inverse(&self) -> Self {
        let rot = Complex::from_polar(1.0, self.theta);
        Self { a: -rot * self.a, theta: -self.theta }
    }

    fn inverse_apply(&self, w: Complex) -> Complex {
        let u = Complex::from_polar(1.0, -self.theta) * w;
        (u + self.a) / (1.0 + self.a.conj() * u)
    }

    /// `self ∘ other` in normal form: the new center is the preimage of 0 and
    /// the phase is read off the derivative there.
    pub fn compose(&self, other: &Self) -> Self {
        let a = other.inverse_apply(self.inverse_apply(Complex::new(0.0, 0.0)));
        let slope = self.derivative(other.apply(a)) * other.derivative(a);
        let lambda = slope * (1.0 - a.norm_sqr());
        Self { a, theta: lambda.arg() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AutElementSpec", into = "AutElementSpec")]
pub struct AutElement {
    center: PolydiscPoint,
    phases: Vec<f64>,
    perm: Vec<usize>,
}

/// JSON encoding: `{"center": [[re,im],…], "phases": […], "perm": […]}`
/// with a 0-based permutation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutElementSpec {
    pub center: Vec<[f64; 2]>,
    pub phases: Vec<f64>,
    pub perm: Vec<usize>,
}

impl TryFrom<AutElementSpec> for AutElement {
    type Error = Error;
    fn try_from(spec: AutElementSpec) -> Result<Self> {
        let center = PolydiscPoint::try_from(spec.center)?;
        AutElement::new(center, spec.phases, spec.perm)
    }
}

impl From<AutElement> for AutElementSpec {
    fn from(g: AutElement) -> Self {
        Self { center: g.center.clone().into(), phases: g.phases, perm: g.perm }
    }
}

pub(crate) fn is_permutation(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

impl AutElement {
    pub fn new(center: PolydiscPoint, phases: Vec<f64>, perm: Vec<usize>) -> Result<Self> {
        let m = center.dim();
        ensure_dim(m, phases.len())?;
        ensure_dim(m, perm.len())?;
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidMap("non-finite phase".into()));
        }
        if !is_permutation(&perm) {
            return Err(Error::InvalidPermutation(m));
        }
        Ok(Self { center, phases, perm })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(PolydiscPoint::origin(m)?, vec![0.0; m], (0..m).collect())
    }

    fn from_factors(factors: Vec<DiscMoebius>, perm: Vec<usize>) -> Result<Self> {
        let center = PolydiscPoint::new(factors.iter().map(|f| f.a).collect())?;
        let phases = factors.iter().map(|f| f.theta).collect();
        Self::new(center, phases, perm)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn center(&self) -> &PolydiscPoint {
        &self.center
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    /// The one-variable factor acting on target coordinate `l`.
    pub fn factor(&self, l: usize) -> DiscMoebius {
        DiscMoebius { a: self.center.coords()[l], theta: self.phases[l] }
    }

    pub fn is_isotropy(&self) -> bool {
        self.center.coords().iter().all(|c| c.norm() == 0.0)
    }

    pub(crate) fn apply_raw(&self, z: &[Complex]) -> Vec<Complex> {
        (0..self.dim()).map(|l| self.factor(l).apply(z[self.perm[l]])).collect()
    }

    pub fn apply(&self, z: &PolydiscPoint) -> Result<PolydiscPoint> {
        ensure_dim(self.dim(), z.dim())?;
        PolydiscPoint::new(self.apply_raw(z.coords()))
    }

    /// Exact pushforward `g_*(v) ∈ T_{g(z)}`.
    pub fn differential(&self, z: &PolydiscPoint, v: &TangentVector) -> Result<TangentVector> {
        ensure_dim(self.dim(), z.dim())?;
        ensure_dim(self.dim(), v.dim())?;
        let (zc, vc) = (z.coords(), v.coords());
        let out = (0..self.dim())
            .map(|l| {
                let src = self.perm[l];
                self.factor(l).derivative(zc[src]) * vc[src]
            })
            .collect();
        TangentVector::new(out)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AutElement) -> Result<AutElement> {
        ensure_dim(self.dim(), other.dim())?;
        let (factors, perm) = (0..self.dim())
            .map(|l| {
                let mid = self.perm[l];
                (self.factor(l).compose(&other.factor(mid)), other.perm[mid])
            })
            .unzip();
        Self::from_factors(factors, perm)
    }

    pub fn invert(&self) -> Result<AutElement> {
        let m = self.dim();
        let mut factors = vec![DiscMoebius::identity(); m];
        let mut perm = vec![0; m];
        for l in 0..m {
            let j = self.perm[l];
            factors[j] = self.factor(l).inverse();
            perm[j] = l;
        }
        Self::from_factors(factors, perm)
    }
}

/// `h_{z0}(z) = ((z^l - z0^l) / (1 - conj(z0^l) z^l))_l`, sending `z0` to 0.
pub fn moebius_transport(z0: &PolydiscPoint) -> AutElement {
    let m = z0.dim();
    AutElement { center: z0.clone(), phases: vec![0.0; m], perm: (0..m).collect() }
}

/// Random element of the isotropy group at the origin.
pub fn sample_isotropy<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<AutElement> {
    let phases = (0..m).map(|_| sample_phase(rng)).collect();
    let perm = sample_permutation(rng, m);
    AutElement::new(PolydiscPoint::origin(m)?, phases, perm)
}

/// Random automorphism with center drawn inside `radius_cap`.
pub fn sample_automorphism<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    radius_cap: f64,
) -> Result<AutElement> {
    let center = crate::rng::sample_polydisc_point(rng, m, radius_cap)?;
    let phases = (0..m).map(|_| sample_phase(rng)).collect();
    let perm = sample_permutation(rng, m);
    AutElement::new(center, phases, perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{eval_f2, eval_phi2};
    use crate::rng::{sample_polydisc_point, sample_tangent_vector, TrialRng};
    use crate::MetricParams;

    fn close(a: &[Complex], b: &[Complex], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn transport_sends_center_to_origin() {
        let mut rng = TrialRng::new(3).stream(0);
        for _ in 0..50 {
            let z0 = sample_polydisc_point(&mut rng, 3, 0.95).unwrap();
            let h = moebius_transport(&z0);
            let w = h.apply(&z0).unwrap();
            assert!(w.sup_norm() < 1e-15);
            let v = sample_tangent_vector(&mut rng, 3);
            let hv = h.differential(&z0, &v).unwrap();
            for l in 0..3 {
                let expect = v.coords()[l] / (1.0 - z0.coords()[l].norm_sqr());
                assert!((hv.coords()[l] - expect).norm() < 1e-12 * expect.norm().max(1.0));
            }
        }
    }

    #[test]
    fn transport_at_origin_is_identity() {
        let h = moebius_transport(&PolydiscPoint::origin(4).unwrap());
        assert_eq!(h, AutElement::identity(4).unwrap());
    }

    #[test]
    fn identity_and_pure_permutation() {
        let z = PolydiscPoint::new(vec![Complex::new(0.1, 0.2), Complex::new(-0.4, 0.3)]).unwrap();
        let id = AutElement::identity(2).unwrap();
        assert_eq!(id.apply(&z).unwrap(), z);
        let v = TangentVector::new(vec![Complex::new(1.0, 2.0), Complex::new(3.0, -1.0)]).unwrap();
        assert_eq!(id.differential(&z, &v).unwrap(), v);
        let swap = AutElement::new(PolydiscPoint::origin(2).unwrap(), vec![0.0; 2], vec![1, 0]).unwrap();
        let w = swap.apply(&z).unwrap();
        assert_eq!(w.coords(), &[z.coords()[1], z.coords()[0]]);
        assert_eq!(id.invert().unwrap(), id);
    }

    #[test]
    fn group_laws_hold_pointwise() {
        let mut rng = TrialRng::new(11).stream(0);
        for _ in 0..100 {
            let m = rng.random_range(1..=4);
            let g = sample_automorphism(&mut rng, m, 0.9).unwrap();
            let h = sample_automorphism(&mut rng, m, 0.9).unwrap();
            let k = sample_automorphism(&mut rng, m, 0.9).unwrap();
            let z = sample_polydisc_point(&mut rng, m, 0.9).unwrap();

            let gh = g.compose(&h).unwrap();
            let direct = g.apply(&h.apply(&z).unwrap()).unwrap();
            assert!(close(gh.apply(&z).unwrap().coords(), direct.coords(), 1e-10));

            let id = g.compose(&g.invert().unwrap()).unwrap();
            assert!(close(id.apply(&z).unwrap().coords(), z.coords(), 1e-10));
            let id2 = g.invert().unwrap().compose(&g).unwrap();
            assert!(close(id2.apply(&z).unwrap().coords(), z.coords(), 1e-10));

            let left = gh.compose(&k).unwrap();
            let right = g.compose(&h.compose(&k).unwrap()).unwrap();
            assert!(close(left.apply(&z).unwrap().coords(), right.apply(&z).unwrap().coords(), 1e-10));
        }
    }

    #[test]
    fn differential_chain_rule() {
        let mut rng = TrialRng::new(12).stream(0);
        for _ in 0..100 {
            let m = rng.random_range(1..=4);
            let g = sample_automorphism(&mut rng, m, 0.9).unwrap();
            let h = sample_automorphism(&mut rng, m, 0.9).unwrap();
            let z = sample_polydisc_point(&mut rng, m, 0.9).unwrap();
            let v = sample_tangent_vector(&mut rng, m);
            let lhs = g.compose(&h).unwrap().differential(&z, &v).unwrap();
            let hz = h.apply(&z).unwrap();
            let rhs = g.differential(&hz, &h.differential(&z, &v).unwrap()).unwrap();
            let scale = rhs.sup_norm().max(1.0);
            assert!(close(lhs.coords(), rhs.coords(), 1e-9 * scale));
        }
    }

    #[test]
    fn conjugated_element_fixes_origin() {
        let mut rng = TrialRng::new(13).stream(0);
        for _ in 0..50 {
            let phi = sample_automorphism(&mut rng, 3, 0.9).unwrap();
            let z0 = sample_polydisc_point(&mut rng, 3, 0.9).unwrap();
            let b = phi.apply(&z0).unwrap();
            let g = moebius_transport(&b)
                .compose(&phi)
                .unwrap()
                .compose(&moebius_transport(&z0).invert().unwrap())
                .unwrap();
            assert!(g.center().sup_norm() < 1e-12);
            assert!(g.apply(&PolydiscPoint::origin(3).unwrap()).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn isotropy_preserves_phi_and_origin() {
        let mut rng = TrialRng::new(14).stream(0);
        let p = MetricParams::new(1.5, 3).unwrap();
        let origin = PolydiscPoint::origin(4).unwrap();
        for _ in 0..100 {
            let g = sample_isotropy(&mut rng, 4).unwrap();
            assert!(g.is_isotropy());
            assert_eq!(g.apply(&origin).unwrap().sup_norm(), 0.0);
            let v = sample_tangent_vector(&mut rng, 4);
            let gv = g.differential(&origin, &v).unwrap();
            assert!((eval_phi2(&p, &gv) - eval_phi2(&p, &v)).abs() < 1e-14);
            assert!(g.compose(&g).unwrap().is_isotropy());
        }
    }

    #[test]
    fn transport_identity_for_metric() {
        let mut rng = TrialRng::new(15).stream(0);
        let p = MetricParams::new(0.7, 4).unwrap();
        for _ in 0..200 {
            let z0 = sample_polydisc_point(&mut rng, 3, 0.95).unwrap();
            let v = sample_tangent_vector(&mut rng, 3);
            let f2 = eval_f2(&p, &z0, &v).unwrap().f2;
            let hv = moebius_transport(&z0).differential(&z0, &v).unwrap();
            assert!((f2 - eval_phi2(&p, &hv)).abs() <= 1e-12 * f2);
        }
    }

    #[test]
    fn json_encoding() {
        let g = AutElement::new(
            PolydiscPoint::new(vec![Complex::new(0.5, 0.0), Complex::new(0.0, -0.25)]).unwrap(),
            vec![0.0, 1.5],
            vec![1, 0],
        )
        .unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"center":[[0.5,0.0],[0.0,-0.25]],"phases":[0.0,1.5],"perm":[1,0]}"#);
        assert_eq!(serde_json::from_str::<AutElement>(&s).unwrap(), g);
        let bad = r#"{"center":[[0.5,0.0],[0.0,0.0]],"phases":[0.0,0.0],"perm":[0,0]}"#;
        assert!(serde_json::from_str::<AutElement>(bad).is_err());
    }
}

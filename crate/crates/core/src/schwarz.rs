//! Verification engines for the sharp Schwarz inequality
//!
//! ```text
//! f^*F̃²_{t̃,k̃}(z; v) <= C · F²_{t,k}(z; v),    C = (n + t̃·n^{1/k̃}) / (1 + t̃),
//! ```
//!
//! its norm-level form `φ̃²(f(z)) <= C φ²(z)` for maps fixing the origin (with
//! `φ^{2N}` for maps homogeneous of degree `N`), the axis equality
//! characterization, and a necessary-condition diagnostic for the rigidity
//! statement (a map expanding the metric at one point is an automorphism).

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::automorphisms::moebius_transport;
use crate::domain::{Complex, MetricParams, PolydiscPoint, TangentVector, Tolerance};
use crate::error::{Error, Result};
use crate::maps::{sample_map, HolomorphicMap, MapFamily};
use crate::metrics::{eval_f2, minkowski_p, phi2_raw, polydisc_constant};
use crate::rng::{sample_polydisc_point, sample_tangent_vector, TrialRng};

/// `(n + t̃·n^{1/k̃}) / (1 + t̃)`.
pub fn sharp_constant(n: usize, p_target: &MetricParams) -> f64 {
    polydisc_constant(n, p_target)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzWorstCase {
    pub trial: u64,
    pub ratio: f64,
    pub map_spec: HolomorphicMap,
    pub source_params: MetricParams,
    pub z: PolydiscPoint,
    pub v: Option<TangentVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchwarzReport {
    pub trials: u64,
    pub max_ratio: f64,
    pub sharp_constant: f64,
    pub worst_case: Option<SchwarzWorstCase>,
    pub violated: bool,
}

impl SchwarzReport {
    fn from_worst(trials: u64, sharp: f64, worst: Option<SchwarzWorstCase>, tol: &Tolerance) -> Self {
        let max_ratio = worst.as_ref().map_or(f64::NEG_INFINITY, |w| w.ratio);
        Self {
            trials,
            max_ratio,
            sharp_constant: sharp,
            worst_case: worst,
            violated: max_ratio > sharp * (1.0 + tol.rel_eq),
        }
    }
}

fn pick_worst(a: SchwarzWorstCase, b: SchwarzWorstCase) -> SchwarzWorstCase {
    match a.ratio.total_cmp(&b.ratio) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal if a.trial <= b.trial => a,
        std::cmp::Ordering::Equal => b,
    }
}

/// Settings of one Schwarz campaign cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzCampaign {
    /// Source metrics, cycled by trial index.
    pub source: Vec<MetricParams>,
    pub target: MetricParams,
    pub m: usize,
    pub n: usize,
    /// Map families, cycled by trial index.
    pub families: Vec<MapFamily>,
    pub trials: u64,
    pub radius_cap: f64,
    /// Replace trial 0 by the extremal map at `(z, v) = (0, e_1)`.
    pub force_witness: bool,
    pub tol: Tolerance,
}

impl SchwarzCampaign {
    pub fn new(source: MetricParams, target: MetricParams, m: usize, n: usize) -> Self {
        Self {
            source: vec![source],
            target,
            m,
            n,
            families: vec![MapFamily::Linear, MapFamily::CoordMoebius, MapFamily::Extremal],
            trials: 1000,
            radius_cap: crate::rng::DEFAULT_RADIUS_CAP,
            force_witness: false,
            tol: Tolerance::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidMap("trials must be >= 1".into()));
        }
        if self.families.is_empty() || self.source.is_empty() {
            return Err(Error::InvalidMap("families and source params must be nonempty".into()));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::EmptyDimension);
        }
        if !(self.radius_cap > 0.0 && self.radius_cap < 1.0) {
            return Err(Error::InvalidRadiusCap(self.radius_cap));
        }
        self.tol.validate()
    }

    fn trial(&self, rng: &TrialRng, index: u64) -> Result<SchwarzWorstCase> {
        let p_src = self.source[(index % self.source.len() as u64) as usize];
        let (map, z, v) = if index == 0 && self.force_witness {
            (
                HolomorphicMap::extremal(self.m, self.n)?,
                PolydiscPoint::origin(self.m)?,
                TangentVector::basis(self.m, 0),
            )
        } else {
            let mut r = rng.stream(index);
            let family = self.families[(index % self.families.len() as u64) as usize];
            let map = sample_map(&mut r, family, self.m, self.n, self.radius_cap)?;
            let z = sample_polydisc_point(&mut r, self.m, self.radius_cap)?;
            let v = sample_tangent_vector(&mut r, self.m);
            (map, z, v)
        };
        // F² is 2-homogeneous in v, so normalizing to F² = 1 is harmless.
        let norm = eval_f2(&p_src, &z, &v)?.f;
        let v = v.scale(Complex::new(1.0 / norm, 0.0));
        let base = eval_f2(&p_src, &z, &v)?.f2;
        let ratio = map.pullback_f2(&self.target, &z, &v)? / base;
        Ok(SchwarzWorstCase { trial: index, ratio, map_spec: map, source_params: p_src, z, v: Some(v) })
    }

    pub fn run(&self, rng: &TrialRng) -> Result<SchwarzReport> {
        self.validate()?;
        let worst = (0..self.trials)
            .into_par_iter()
            .map(|i| self.trial(rng, i))
            .try_reduce_with(|a, b| Ok(pick_worst(a, b)))
            .transpose()?;
        Ok(SchwarzReport::from_worst(self.trials, sharp_constant(self.n, &self.target), worst, &self.tol))
    }
}

/// Samples `(f, z, v)` and records the largest ratio `f^*F̃²(z; v) / F²(z; v)`.
pub fn verify_schwarz(
    p_src: &MetricParams,
    p_tgt: &MetricParams,
    m: usize,
    n: usize,
    families: &[MapFamily],
    trials: u64,
    rng: &TrialRng,
) -> Result<SchwarzReport> {
    let mut campaign = SchwarzCampaign::new(*p_src, *p_tgt, m, n);
    campaign.families = families.to_vec();
    campaign.trials = trials;
    campaign.run(rng)
}

fn ensure_fixes_origin(f: &HolomorphicMap, m: usize) -> Result<()> {
    let at_origin = minkowski_p(&f.eval_raw(&vec![Complex::new(0.0, 0.0); m]));
    if at_origin > 1e-12 {
        return Err(Error::OriginNotFixed(at_origin));
    }
    Ok(())
}

/// Checks `φ̃²(f(z)) <= C φ^{2N}(z)` over random `z ≠ 0`, where `N` is the
/// homogeneity degree of `f` when known and 1 otherwise.
pub fn verify_norm_schwarz(
    p_src: &MetricParams,
    p_tgt: &MetricParams,
    f: &HolomorphicMap,
    trials: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
) -> Result<SchwarzReport> {
    let (m, n) = f.dims()?;
    ensure_fixes_origin(f, m)?;
    if trials == 0 {
        return Err(Error::InvalidMap("trials must be >= 1".into()));
    }
    let degree = f.homogeneous_degree().unwrap_or(1);
    let worst = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng.stream(trial);
            let z = loop {
                let z = sample_polydisc_point(&mut r, m, radius_cap)?;
                if z.sup_norm() > 0.0 {
                    break z;
                }
            };
            let ratio = norm_schwarz_ratio(p_src, p_tgt, f, &z, degree)?;
            Ok(SchwarzWorstCase {
                trial,
                ratio,
                map_spec: f.clone(),
                source_params: *p_src,
                z,
                v: None,
            })
        })
        .try_reduce_with(|a, b| Ok(pick_worst(a, b)))
        .transpose()?;
    Ok(SchwarzReport::from_worst(trials, sharp_constant(n, p_tgt), worst, tol))
}

/// As [`verify_norm_schwarz`] with a fresh map from `families` in every
/// trial. Only families whose members fix the origin are accepted.
#[allow(clippy::too_many_arguments)]
pub fn verify_norm_schwarz_sampled(
    p_src: &MetricParams,
    p_tgt: &MetricParams,
    m: usize,
    n: usize,
    families: &[MapFamily],
    trials: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
) -> Result<SchwarzReport> {
    if let Some(f) = families
        .iter()
        .find(|f| matches!(f, MapFamily::CoordMoebius | MapFamily::Composed))
    {
        return Err(Error::UnsupportedFamily(format!("{f} maps need not fix the origin")));
    }
    if families.is_empty() || trials == 0 {
        return Err(Error::InvalidMap("families and trials must be nonempty".into()));
    }
    let worst = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng.stream(trial);
            let family = families[(trial % families.len() as u64) as usize];
            let f = sample_map(&mut r, family, m, n, radius_cap)?;
            let z = loop {
                let z = sample_polydisc_point(&mut r, m, radius_cap)?;
                if z.sup_norm() > 0.0 {
                    break z;
                }
            };
            let degree = f.homogeneous_degree().unwrap_or(1);
            let ratio = norm_schwarz_ratio(p_src, p_tgt, &f, &z, degree)?;
            Ok(SchwarzWorstCase { trial, ratio, map_spec: f, source_params: *p_src, z, v: None })
        })
        .try_reduce_with(|a, b| Ok(pick_worst(a, b)))
        .transpose()?;
    Ok(SchwarzReport::from_worst(trials, sharp_constant(n, p_tgt), worst, tol))
}

/// `φ̃²(f(z)) / φ^{2N}(z)`.
pub fn norm_schwarz_ratio(
    p_src: &MetricParams,
    p_tgt: &MetricParams,
    f: &HolomorphicMap,
    z: &PolydiscPoint,
    degree: u32,
) -> Result<f64> {
    let w = f.eval(z)?;
    let src = phi2_raw(p_src, z.coords()).powi(degree as i32);
    Ok(phi2_raw(p_tgt, w.coords()) / src)
}

/// Result of probing one coordinate axis for the equality case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisEquality {
    /// Every `f_j(ζ e_l)` equals `e^{iθ_j} ζ^N` on the sampled axis points.
    pub restriction_unimodular: bool,
    /// The Schwarz bound is attained on the axis: at the origin along `e_l`
    /// for `N = 1`, at the sampled axis points in the `φ^{2N}` form otherwise.
    pub bound_attained: bool,
    /// Fitted `f_j(ζ e_l) / ζ^N`, one per target coordinate.
    pub coefficients: Vec<Complex>,
}

const AXIS_RADII: [f64; 4] = [0.15, 0.4, 0.65, 0.9];
const AXIS_ANGLES: usize = 5;

fn axis_samples() -> impl Iterator<Item = Complex> {
    AXIS_RADII.into_iter().flat_map(|r| {
        (0..AXIS_ANGLES).map(move |a| {
            Complex::from_polar(r, 0.37 + std::f64::consts::TAU * a as f64 / AXIS_ANGLES as f64)
        })
    })
}

/// Tests whether `f` restricted to axis `l` is a unimodular multiple of
/// `(z^l)^N` in each target coordinate, by fitting the single coefficient on
/// a fixed set of axis points, and whether the Schwarz bound is attained there.
pub fn check_equality_axis(
    p_src: &MetricParams,
    p_tgt: &MetricParams,
    f: &HolomorphicMap,
    axis: usize,
    degree: u32,
    tol: &Tolerance,
) -> Result<AxisEquality> {
    let (m, n) = f.dims()?;
    ensure_fixes_origin(f, m)?;
    if degree == 0 {
        return Err(Error::InvalidMap("degree must be >= 1".into()));
    }
    let mut coefficients: Vec<Option<Complex>> = vec![None; n];
    let mut unimodular = true;
    for zeta in axis_samples() {
        let w = f.restrict_to_axis(axis, zeta)?;
        let scale = zeta.powu(degree);
        for (j, wj) in w.iter().enumerate() {
            let coef = wj / scale;
            match coefficients[j] {
                None => coefficients[j] = Some(coef),
                Some(c0) => unimodular &= (coef - c0).norm() <= tol.abs_eq + tol.rel_eq * c0.norm(),
            }
            unimodular &= (coef.norm() - 1.0).abs() <= tol.abs_eq;
        }
    }
    let c = sharp_constant(n, p_tgt);
    let bound_attained = if degree == 1 {
        let origin = PolydiscPoint::origin(m)?;
        let e = TangentVector::basis(m, axis);
        let lhs = f.pullback_f2(p_tgt, &origin, &e)?;
        let rhs = c * eval_f2(p_src, &origin, &e)?.f2;
        (lhs - rhs).abs() <= tol.abs_eq + tol.rel_eq * rhs
    } else {
        axis_samples().all(|zeta| {
            let mut z = vec![Complex::new(0.0, 0.0); m];
            z[axis] = zeta;
            let Ok(z) = PolydiscPoint::new(z) else { return false };
            let Ok(w) = f.eval(&z) else { return false };
            let lhs = phi2_raw(p_tgt, w.coords());
            let rhs = c * phi2_raw(p_src, z.coords()).powi(degree as i32);
            (lhs - rhs).abs() <= tol.abs_eq + tol.rel_eq * rhs
        })
    };
    Ok(AxisEquality {
        restriction_unimodular: unimodular,
        bound_attained,
        coefficients: coefficients.into_iter().map(|c| c.unwrap_or_default()).collect(),
    })
}

/// Sampled evidence for the rigidity statement at one point. This is a
/// necessary-condition check, not a decision procedure for membership in
/// the automorphism group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityDiagnostic {
    pub probes: usize,
    /// Smallest `f^*F²(z0; v) / F²(z0; v)` over the probes.
    pub min_probe_ratio: f64,
    /// `f^*F² >= F²` held (to `rel_eq`) on every probe.
    pub hypothesis_held: bool,
    /// Moduli of the eigenvalues of the differential at the fixed origin of
    /// `h_{f(z0)} ∘ f ∘ h_{z0}^{-1}`.
    pub eigenvalue_moduli: Vec<f64>,
    pub abs_det: f64,
    pub det_at_least_one: bool,
}

pub fn cartan_rigidity_diagnostic<R: Rng + ?Sized>(
    p: &MetricParams,
    f: &HolomorphicMap,
    z0: &PolydiscPoint,
    probe_vectors: usize,
    rng: &mut R,
    tol: &Tolerance,
) -> Result<RigidityDiagnostic> {
    let (m, n) = f.dims()?;
    crate::domain::ensure_dim(m, n)?;
    let w0 = f.eval(z0)?;
    let conjugated = HolomorphicMap::Composed {
        maps: vec![
            HolomorphicMap::from_automorphism(&moebius_transport(z0).invert()?),
            f.clone(),
            HolomorphicMap::from_automorphism(&moebius_transport(&w0)),
        ],
    };
    let jac: DMatrix<Complex> = conjugated.jacobian(&PolydiscPoint::origin(m)?)?.entries;
    let abs_det = jac.determinant().norm();
    let eigenvalue_moduli = nalgebra::Schur::new(jac)
        .eigenvalues()
        .map(|e| e.iter().map(|x| x.norm()).collect())
        .unwrap_or_default();

    let mut min_probe_ratio = f64::INFINITY;
    for _ in 0..probe_vectors {
        let v = sample_tangent_vector(rng, m);
        let ratio = f.pullback_f2(p, z0, &v)? / eval_f2(p, z0, &v)?.f2;
        min_probe_ratio = min_probe_ratio.min(ratio);
    }
    Ok(RigidityDiagnostic {
        probes: probe_vectors,
        min_probe_ratio,
        hypothesis_held: min_probe_ratio >= 1.0 - tol.rel_eq,
        eigenvalue_moduli,
        abs_det,
        det_at_least_one: abs_det >= 1.0 - tol.rel_eq,
    })
}

//! Normalized convex mappings of the polydisc and the distortion bounds
//!
//! ```text
//! [(1-p)/(1+p)]² F²(z; v) <= F²(0; f_*(z) v) <= [(1+p)/(1-p)]² F²(z; v),   p = p(z).
//! ```
//!
//! A normalized biholomorphic convex mapping of `P_m` is a product of
//! normalized convex functions of one variable, one per coordinate, so a
//! [`ConvexMapping`] is just a list of [`ConvexFactor`]s.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ensure_dim, Complex, MetricParams, PolydiscPoint, TangentVector, Tolerance};
use crate::error::{Error, Result};
use crate::metrics::{eval_f2, minkowski_p, phi2_raw, polydisc_constant};
use crate::rng::{sample_phase, sample_polydisc_point, sample_tangent_vector, TrialRng};

/// A normalized (`f(0) = 0`, `f'(0) = 1`) convex univalent function on the disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ConvexFactor {
    /// `z / (1 - c z)` with `|c| <= 1`; a half-plane map when `|c| = 1`.
    #[serde(rename = "moebius")]
    HalfPlaneMoebius { c: Complex },
    /// `½ log((1+z)/(1-z))`, onto the strip `|Im w| < π/4`.
    #[serde(rename = "log")]
    LogHalf,
    #[serde(rename = "id")]
    Identity,
}

impl ConvexFactor {
    pub fn validate(&self) -> Result<()> {
        if let Self::HalfPlaneMoebius { c } = self {
            if !(c.re.is_finite() && c.im.is_finite()) || c.norm() > 1.0 + 1e-15 {
                return Err(Error::InvalidFactor(format!("|c| = {} exceeds 1", c.norm())));
            }
        }
        Ok(())
    }

    pub fn eval(&self, z: Complex) -> Complex {
        match self {
            Self::HalfPlaneMoebius { c } => z / (1.0 - c * z),
            Self::LogHalf => 0.5 * ((1.0 + z) / (1.0 - z)).ln(),
            Self::Identity => z,
        }
    }

    pub fn derivative(&self, z: Complex) -> Complex {
        match self {
            Self::HalfPlaneMoebius { c } => {
                let d = 1.0 - c * z;
                1.0 / (d * d)
            }
            Self::LogHalf => 1.0 / (1.0 - z * z),
            Self::Identity => Complex::new(1.0, 0.0),
        }
    }

    /// Whether this is one of the extremal functions `z / (1 - e^{iθ} z)`.
    pub fn is_extremal(&self) -> bool {
        matches!(self, Self::HalfPlaneMoebius { c } if (c.norm() - 1.0).abs() < 1e-12)
    }
}

/// Lower bound, `|f'(z)|`, upper bound of the one-variable distortion sandwich
/// `1/(1+|z|)² <= |f'(z)| <= 1/(1-|z|)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoewnerBounds {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl LoewnerBounds {
    pub fn holds(&self, tol: &Tolerance) -> bool {
        self.lower <= self.value * (1.0 + tol.rel_eq) && self.value <= self.upper * (1.0 + tol.rel_eq)
    }
}

pub fn loewner_bounds(factor: &ConvexFactor, z: Complex) -> Result<LoewnerBounds> {
    let r = z.norm();
    if r.is_nan() || r >= 1.0 {
        return Err(Error::OutsidePolydisc { index: 0, modulus: r });
    }
    factor.validate()?;
    Ok(LoewnerBounds {
        lower: 1.0 / ((1.0 + r) * (1.0 + r)),
        value: factor.derivative(z).norm(),
        upper: 1.0 / ((1.0 - r) * (1.0 - r)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexMapping {
    pub factors: Vec<ConvexFactor>,
}

impl ConvexMapping {
    pub fn new(factors: Vec<ConvexFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyDimension);
        }
        for f in &factors {
            f.validate()?;
        }
        Ok(Self { factors })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(vec![ConvexFactor::Identity; m])
    }

    /// `f_l(z) = z / (1 - e^{iθ_l} z)` for every coordinate.
    pub fn extremal(thetas: &[f64]) -> Result<Self> {
        Self::new(
            thetas
                .iter()
                .map(|&t| ConvexFactor::HalfPlaneMoebius { c: Complex::from_polar(1.0, t) })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn eval_convex(&self, z: &PolydiscPoint) -> Result<Vec<Complex>> {
        ensure_dim(self.dim(), z.dim())?;
        Ok(self.factors.iter().zip(z.coords()).map(|(f, zl)| f.eval(*zl)).collect())
    }

    /// Diagonal of the Jacobian, `(f_l'(z^l))_l`.
    pub fn derivative_diag(&self, z: &PolydiscPoint) -> Result<Vec<Complex>> {
        ensure_dim(self.dim(), z.dim())?;
        Ok(self.factors.iter().zip(z.coords()).map(|(f, zl)| f.derivative(*zl)).collect())
    }

    /// `F²_{t,k}(0; f_*(z) v)`.
    pub fn image_norm2(&self, p: &MetricParams, z: &PolydiscPoint, v: &TangentVector) -> Result<f64> {
        ensure_dim(self.dim(), v.dim())?;
        let d = self.derivative_diag(z)?;
        let w: Vec<Complex> = d.iter().zip(v.coords()).map(|(a, b)| a * b).collect();
        Ok(phi2_raw(p, &w))
    }

    fn extremal_phases(&self) -> Option<Vec<Complex>> {
        self.factors
            .iter()
            .map(|f| match f {
                ConvexFactor::HalfPlaneMoebius { c } if f.is_extremal() => Some(*c),
                _ => None,
            })
            .collect()
    }

    /// For `f_l = z/(1 - c_l z)` with `|c_l| = 1`, the point `(b·conj(c_l))_l`
    /// where the upper distortion bound is attained.
    pub fn upper_witness(&self, b: f64) -> Option<PolydiscPoint> {
        let cs = self.extremal_phases()?;
        PolydiscPoint::new(cs.iter().map(|c| b * c.conj()).collect()).ok()
    }

    /// The mirrored point `(-a·conj(c_l))_l` attaining the lower bound.
    pub fn lower_witness(&self, a: f64) -> Option<PolydiscPoint> {
        self.upper_witness(-a)
    }
}

pub fn sample_convex_factor<R: Rng + ?Sized>(rng: &mut R) -> ConvexFactor {
    let u: f64 = rng.random();
    if u < 0.4 {
        ConvexFactor::HalfPlaneMoebius { c: Complex::from_polar(1.0, sample_phase(rng)) }
    } else if u < 0.7 {
        let r: f64 = rng.random();
        ConvexFactor::HalfPlaneMoebius { c: Complex::from_polar(r, sample_phase(rng)) }
    } else if u < 0.85 {
        ConvexFactor::LogHalf
    } else {
        ConvexFactor::Identity
    }
}

pub fn sample_convex_mapping<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Result<ConvexMapping> {
    ConvexMapping::new((0..m).map(|_| sample_convex_factor(rng)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionWorstCase {
    pub trial: u64,
    pub mapping: ConvexMapping,
    pub z: PolydiscPoint,
    pub v: TangentVector,
}

/// Extremal ratios of a distortion campaign. Each ratio is "bound side over
/// the other side" arranged so that the inequality reads `ratio <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub trials: u64,
    /// `max F²(0; f_* v) / ([(1+p)/(1-p)]² F²(z; v))`.
    pub max_upper_ratio: f64,
    /// `max [(1-p)/(1+p)]² F²(z; v) / F²(0; f_* v)`.
    pub max_lower_ratio: f64,
    pub max_ratio: f64,
    pub violated: bool,
    pub worst_case: Option<DistortionWorstCase>,
}

#[derive(Debug, Clone, Copy)]
pub struct DistortionRatios {
    pub upper: f64,
    pub lower: f64,
}

/// Both distortion ratios at one `(z, v)`.
pub fn distortion_ratios(
    p: &MetricParams,
    f: &ConvexMapping,
    z: &PolydiscPoint,
    v: &TangentVector,
) -> Result<DistortionRatios> {
    let middle = f.image_norm2(p, z, v)?;
    let base = eval_f2(p, z, v)?.f2;
    let pz = z.sup_norm();
    let grow = ((1.0 + pz) / (1.0 - pz)).powi(2);
    Ok(DistortionRatios { upper: middle / (grow * base), lower: base / (grow * middle) })
}

struct Sample {
    trial: u64,
    upper: f64,
    lower: f64,
    mapping: ConvexMapping,
    z: PolydiscPoint,
    v: TangentVector,
}

fn reduce_distortion(samples: Vec<Sample>, tol: &Tolerance) -> DistortionReport {
    let trials = samples.len() as u64;
    let max_upper_ratio = samples.iter().map(|s| s.upper).fold(f64::NEG_INFINITY, f64::max);
    let max_lower_ratio = samples.iter().map(|s| s.lower).fold(f64::NEG_INFINITY, f64::max);
    let worst = samples
        .into_iter()
        .max_by(|a, b| a.upper.max(a.lower).total_cmp(&b.upper.max(b.lower)).then(b.trial.cmp(&a.trial)));
    let max_ratio = max_upper_ratio.max(max_lower_ratio);
    DistortionReport {
        trials,
        max_upper_ratio,
        max_lower_ratio,
        max_ratio,
        violated: max_ratio > 1.0 + tol.rel_eq,
        worst_case: worst.map(|s| DistortionWorstCase { trial: s.trial, mapping: s.mapping, z: s.z, v: s.v }),
    }
}

fn run_distortion<F>(
    p: &MetricParams,
    m: usize,
    trials: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
    mapping_for: F,
) -> Result<DistortionReport>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<ConvexMapping> + Sync,
{
    if trials == 0 {
        return Err(Error::InvalidMap("trials must be >= 1".into()));
    }
    let samples = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng.stream(trial);
            let mapping = mapping_for(&mut r)?;
            let z = sample_polydisc_point(&mut r, m, radius_cap)?;
            let v = sample_tangent_vector(&mut r, m);
            let ratios = distortion_ratios(p, &mapping, &z, &v)?;
            Ok(Sample { trial, upper: ratios.upper, lower: ratios.lower, mapping, z, v })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce_distortion(samples, tol))
}

/// Checks both distortion bounds for a fixed mapping over random `(z, v)`.
pub fn verify_distortion(
    p: &MetricParams,
    f: &ConvexMapping,
    trials: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
) -> Result<DistortionReport> {
    run_distortion(p, f.dim(), trials, rng, radius_cap, tol, |_| Ok(f.clone()))
}

/// As [`verify_distortion`] with a fresh random mapping in every trial.
pub fn verify_distortion_sampled(
    p: &MetricParams,
    m: usize,
    trials: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
) -> Result<DistortionReport> {
    run_distortion(p, m, trials, rng, radius_cap, tol, |r| sample_convex_mapping(r, m))
}

/// The four radial distortion bounds at one point `z ≠ 0`:
///
/// ```text
/// p²/(1+p)⁴ <= F²(0; f_*(z) z) <= C_m p²/(1-p)⁴
/// p²/(1-p²)² <= F²(z; z)       <= C_m p²/(1-p²)²
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBounds {
    pub p: f64,
    pub image_lower: f64,
    pub image_value: f64,
    pub image_upper: f64,
    pub self_lower: f64,
    pub self_value: f64,
    pub self_upper: f64,
}

impl RadialBounds {
    /// Largest of the four "bound over value" ratios; `<= 1` when all hold.
    pub fn max_ratio(&self) -> f64 {
        [
            self.image_lower / self.image_value,
            self.image_value / self.image_upper,
            self.self_lower / self.self_value,
            self.self_value / self.self_upper,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn radial_bounds(p: &MetricParams, f: &ConvexMapping, z: &PolydiscPoint) -> Result<RadialBounds> {
    ensure_dim(f.dim(), z.dim())?;
    let as_vector = TangentVector::new(z.coords().to_vec())?;
    let pz = minkowski_p(z.coords());
    let c = polydisc_constant(z.dim(), p);
    let p2 = pz * pz;
    let one_minus_sq = (1.0 - p2) * (1.0 - p2);
    Ok(RadialBounds {
        p: pz,
        image_lower: p2 / (1.0 + pz).powi(4),
        image_value: f.image_norm2(p, z, &as_vector)?,
        image_upper: c * p2 / (1.0 - pz).powi(4),
        self_lower: p2 / one_minus_sq,
        self_value: eval_f2(p, z, &as_vector)?.f2,
        self_upper: c * p2 / one_minus_sq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialReport {
    pub trials: u64,
    pub max_ratio: f64,
    pub violated: bool,
    pub worst_case: Option<DistortionWorstCase>,
}

/// Checks the radial distortion bounds and the `F²(z; z)` sandwich for a fixed
/// mapping over random `z ≠ 0`.
pub fn verify_distortion_radial(
    p: &MetricParams,
    f: &ConvexMapping,
    trials: u64,
    rng: &TrialRng,
    radius_cap: f64,
    tol: &Tolerance,
) -> Result<RadialReport> {
    if trials == 0 {
        return Err(Error::InvalidMap("trials must be >= 1".into()));
    }
    let m = f.dim();
    let samples = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut r = rng.stream(trial);
            let z = loop {
                let z = sample_polydisc_point(&mut r, m, radius_cap)?;
                if z.sup_norm() > 0.0 {
                    break z;
                }
            };
            let ratio = radial_bounds(p, f, &z)?.max_ratio();
            Ok((trial, ratio, z))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = samples.into_iter().max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
    let (max_ratio, worst_case) = match worst {
        Some((trial, ratio, z)) => {
            let v = TangentVector::new(z.coords().to_vec())?;
            (ratio, Some(DistortionWorstCase { trial, mapping: f.clone(), z, v }))
        }
        None => (f64::NEG_INFINITY, None),
    };
    Ok(RadialReport { trials, max_ratio, violated: max_ratio > 1.0 + tol.rel_eq, worst_case })
}

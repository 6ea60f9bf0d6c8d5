//! Holomorphic map families `P_m → P_n` with closed-form Jacobians.
//!
//! Index convention follows the linear case `w^l = Σ_j a_{jl} z^j`: a
//! Jacobian is an `m × n` matrix whose entry `(i, j)` is `∂f_j/∂z^i`, so the
//! pushforward of `v` is `Jᵀ v` and the Jacobian of `g ∘ f` is `J_f · J_g`.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::automorphisms::{AutElement, DiscMoebius};
use crate::distortion::ConvexFactor;
use crate::domain::{ensure_dim, Complex, MetricParams, PolydiscPoint, TangentVector};
use crate::error::{Error, Result};
use crate::metrics::{eval_f2, minkowski_p};
use crate::rng::{sample_disc, sample_phase};

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// One target coordinate of a [`HolomorphicMap::CoordMoebius`] map:
/// `w = e^{iθ} (z^{source} - a) / (1 - conj(a) z^{source})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusCoordinate {
    pub source: usize,
    pub a: Complex,
    pub phase: f64,
}

impl MoebiusCoordinate {
    fn disc_map(&self) -> DiscMoebius {
        DiscMoebius { a: self.a, theta: self.phase }
    }
}

/// A map specification. Serialized as a tagged union keyed by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HolomorphicMap {
    /// `matrix[j][l] = a_{jl}`: `m` rows (source), `n` columns (target).
    Linear { matrix: Vec<Vec<Complex>> },
    CoordMoebius { m: usize, coords: Vec<MoebiusCoordinate> },
    /// `f_0(z) = (z^1, …, z^1)`.
    Extremal { m: usize, n: usize },
    /// Coordinatewise `N`-th power of the inner map.
    Homogeneous { inner: Box<HolomorphicMap>, degree: u32 },
    ConvexProduct { factors: Vec<ConvexFactor> },
    /// Applied left to right: `maps[0]` first.
    Composed { maps: Vec<HolomorphicMap> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub entries: DMatrix<Complex>,
}

impl Jacobian {
    pub fn source_dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn target_dim(&self) -> usize {
        self.entries.ncols()
    }

    /// `∂f_j/∂z^i`.
    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.entries[(i, j)]
    }

    pub fn apply(&self, v: &[Complex]) -> Vec<Complex> {
        (0..self.target_dim())
            .map(|j| (0..self.source_dim()).map(|i| self.entries[(i, j)] * v[i]).sum())
            .collect()
    }
}

/// Supported sampling families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapFamily {
    Linear,
    CoordMoebius,
    Extremal,
    Homogeneous,
    Composed,
}

impl MapFamily {
    pub const ALL: [MapFamily; 5] = [
        MapFamily::Linear,
        MapFamily::CoordMoebius,
        MapFamily::Extremal,
        MapFamily::Homogeneous,
        MapFamily::Composed,
    ];
}

impl std::str::FromStr for MapFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "coord_moebius" | "moebius" => Ok(Self::CoordMoebius),
            "extremal" => Ok(Self::Extremal),
            "homogeneous" => Ok(Self::Homogeneous),
            "composed" => Ok(Self::Composed),
            other => Err(Error::UnsupportedFamily(other.to_string())),
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Linear => "linear",
            Self::CoordMoebius => "coord_moebius",
            Self::Extremal => "extremal",
            Self::Homogeneous => "homogeneous",
            Self::Composed => "composed",
        };
        f.write_str(s)
    }
}

fn matrix_from_rows(rows: &[Vec<Complex>]) -> DMatrix<Complex> {
    let m = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

/// Maximum over target coordinates `l` of `Σ_i |a_{il}|`.
pub fn max_row_sum(a: &DMatrix<Complex>) -> (usize, f64) {
    (0..a.ncols())
        .map(|l| (l, (0..a.nrows()).map(|i| a[(i, l)].norm()).sum::<f64>()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// The linear map `w^l = Σ_i a_{il} z^i` carries `P_m` into `P_n` iff every
/// target coordinate has `Σ_i |a_{il}| <= 1`.
pub fn row_sum_admissible(a: &DMatrix<Complex>) -> bool {
    a.ncols() == 0 || max_row_sum(a).1 <= 1.0
}

impl HolomorphicMap {
    pub fn linear(a: &DMatrix<Complex>) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::EmptyDimension);
        }
        if a.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidMap("non-finite matrix entry".into()));
        }
        let rows = (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect();
        Ok(Self::Linear { matrix: rows })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::linear(&DMatrix::identity(m, m))
    }

    pub fn extremal(m: usize, n: usize) -> Result<Self> {
        let f = Self::Extremal { m, n };
        f.dims()?;
        Ok(f)
    }

    pub fn from_automorphism(g: &AutElement) -> Self {
        let coords = (0..g.dim())
            .map(|l| {
                let d = g.factor(l);
                MoebiusCoordinate { source: g.perm()[l], a: d.a, phase: d.theta }
            })
            .collect();
        Self::CoordMoebius { m: g.dim(), coords }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(s).map_err(|e| Error::InvalidMap(e.to_string()))?;
        f.dims()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("map specs always serialize")
    }

    /// Source and target dimensions, validating the specification.
    pub fn dims(&self) -> Result<(usize, usize)> {
        match self {
            Self::Linear { matrix } => {
                let m = matrix.len();
                let n = matrix.first().map_or(0, Vec::len);
                if m == 0 || n == 0 {
                    return Err(Error::EmptyDimension);
                }
                if matrix.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidMap("ragged linear matrix".into()));
                }
                if matrix.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                    return Err(Error::InvalidMap("non-finite matrix entry".into()));
                }
                Ok((m, n))
            }
            Self::CoordMoebius { m, coords } => {
                if *m == 0 || coords.is_empty() {
                    return Err(Error::EmptyDimension);
                }
                for c in coords {
                    if c.source >= *m {
                        return Err(Error::InvalidMap(format!("source index {} >= m = {m}", c.source)));
                    }
                    if c.a.norm().is_nan() || c.a.norm() >= 1.0 || !c.phase.is_finite() {
                        return Err(Error::InvalidMap("Möbius parameter must lie in the unit disc".into()));
                    }
                }
                Ok((*m, coords.len()))
            }
            Self::Extremal { m, n } => {
                if *m == 0 || *n == 0 {
                    return Err(Error::EmptyDimension);
                }
                Ok((*m, *n))
            }
            Self::Homogeneous { inner, degree } => {
                if *degree == 0 {
                    return Err(Error::InvalidMap("degree must be >= 1".into()));
                }
                inner.dims()
            }
            Self::ConvexProduct { factors } => {
                if factors.is_empty() {
                    return Err(Error::EmptyDimension);
                }
                for f in factors {
                    f.validate()?;
                }
                Ok((factors.len(), factors.len()))
            }
            Self::Composed { maps } => {
                let first = maps.first().ok_or(Error::EmptyDimension)?;
                let (m, mut n) = first.dims()?;
                for f in &maps[1..] {
                    let (src, tgt) = f.dims()?;
                    ensure_dim(n, src)?;
                    n = tgt;
                }
                Ok((m, n))
            }
        }
    }

    pub fn source_dim(&self) -> Result<usize> {
        Ok(self.dims()?.0)
    }

    pub fn target_dim(&self) -> Result<usize> {
        Ok(self.dims()?.1)
    }

    /// Degree `N` with `f(λz) = λ^N f(z)`, when the family guarantees one.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        match self {
            Self::Linear { .. } | Self::Extremal { .. } => Some(1),
            Self::CoordMoebius { coords, .. } => {
                coords.iter().all(|c| c.a.norm() == 0.0).then_some(1)
            }
            Self::Homogeneous { inner, degree } => inner.homogeneous_degree().map(|d| d * degree),
            Self::ConvexProduct { factors } => {
                factors.iter().all(|f| matches!(f, ConvexFactor::Identity)).then_some(1)
            }
            Self::Composed { maps } => {
                maps.iter().try_fold(1, |acc, f| f.homogeneous_degree().map(|d| acc * d))
            }
        }
    }

    /// Evaluates on raw coordinates of `ℂ^m` with no domain checks.
    pub fn eval_raw(&self, z: &[Complex]) -> Vec<Complex> {
        match self {
            Self::Linear { matrix } => {
                let n = matrix[0].len();
                (0..n).map(|l| matrix.iter().zip(z).map(|(row, zi)| row[l] * zi).sum()).collect()
            }
            Self::CoordMoebius { coords, .. } => {
                coords.iter().map(|c| c.disc_map().apply(z[c.source])).collect()
            }
            Self::Extremal { n, .. } => vec![z[0]; *n],
            Self::Homogeneous { inner, degree } => {
                inner.eval_raw(z).into_iter().map(|w| w.powu(*degree)).collect()
            }
            Self::ConvexProduct { factors } => {
                factors.iter().zip(z).map(|(f, zl)| f.eval(*zl)).collect()
            }
            Self::Composed { maps } => {
                maps.iter().fold(z.to_vec(), |acc, f| f.eval_raw(&acc))
            }
        }
    }

    fn check_admissible(&self) -> Result<()> {
        match self {
            Self::Linear { matrix } => {
                let a = matrix_from_rows(matrix);
                let (row, sum) = max_row_sum(&a);
                if sum > 1.0 {
                    return Err(Error::InadmissibleLinear { row, sum });
                }
                Ok(())
            }
            Self::Homogeneous { inner, .. } => inner.check_admissible(),
            Self::Composed { maps } => maps.iter().try_for_each(Self::check_admissible),
            _ => Ok(()),
        }
    }

    /// `f(z)`, which must land strictly inside the target polydisc.
    pub fn eval(&self, z: &PolydiscPoint) -> Result<PolydiscPoint> {
        let (m, _) = self.dims()?;
        ensure_dim(m, z.dim())?;
        self.check_admissible()?;
        let w = self.eval_raw(z.coords());
        for (index, c) in w.iter().enumerate() {
            let modulus = c.norm();
            if modulus.is_nan() || modulus >= 1.0 {
                return Err(Error::LeavesTarget { index, modulus });
            }
        }
        PolydiscPoint::new(w)
    }

    pub fn jacobian_raw(&self, z: &[Complex]) -> DMatrix<Complex> {
        match self {
            Self::Linear { matrix } => matrix_from_rows(matrix),
            Self::CoordMoebius { m, coords } => {
                let mut j = DMatrix::from_element(*m, coords.len(), ZERO);
                for (l, c) in coords.iter().enumerate() {
                    j[(c.source, l)] = c.disc_map().derivative(z[c.source]);
                }
                j
            }
            Self::Extremal { m, n } => {
                let mut j = DMatrix::from_element(*m, *n, ZERO);
                j.row_mut(0).fill(ONE);
                j
            }
            Self::Homogeneous { inner, degree } => {
                let w = inner.eval_raw(z);
                let mut j = inner.jacobian_raw(z);
                let n = f64::from(*degree);
                for (col, wj) in w.iter().enumerate() {
                    let scale = wj.powu(degree - 1) * n;
                    for row in 0..j.nrows() {
                        j[(row, col)] *= scale;
                    }
                }
                j
            }
            Self::ConvexProduct { factors } => {
                let m = factors.len();
                let mut j = DMatrix::from_element(m, m, ZERO);
                for (l, f) in factors.iter().enumerate() {
                    j[(l, l)] = f.derivative(z[l]);
                }
                j
            }
            Self::Composed { maps } => {
                let mut point = z.to_vec();
                let mut acc: Option<DMatrix<Complex>> = None;
                for f in maps {
                    let jf = f.jacobian_raw(&point);
                    acc = Some(match acc {
                        None => jf,
                        Some(prev) => prev * jf,
                    });
                    point = f.eval_raw(&point);
                }
                acc.expect("composed maps are nonempty")
            }
        }
    }

    pub fn jacobian(&self, z: &PolydiscPoint) -> Result<Jacobian> {
        let (m, _) = self.dims()?;
        ensure_dim(m, z.dim())?;
        Ok(Jacobian { entries: self.jacobian_raw(z.coords()) })
    }

    pub fn pushforward(&self, z: &PolydiscPoint, v: &TangentVector) -> Result<TangentVector> {
        let (m, _) = self.dims()?;
        ensure_dim(m, z.dim())?;
        ensure_dim(m, v.dim())?;
        let jac = Jacobian { entries: self.jacobian_raw(z.coords()) };
        TangentVector::new(jac.apply(v.coords()))
    }

    /// `f^*F̃²(z; v) = F̃²(f(z); f_*(v))`.
    pub fn pullback_f2(
        &self,
        p_target: &MetricParams,
        z: &PolydiscPoint,
        v: &TangentVector,
    ) -> Result<f64> {
        let w = self.eval(z)?;
        let fv = self.pushforward(z, v)?;
        Ok(eval_f2(p_target, &w, &fv)?.f2)
    }

    /// The linear part `Linear(J_f(0))` of a map fixing the origin.
    pub fn linear_part(&self) -> Result<HolomorphicMap> {
        let (m, _) = self.dims()?;
        let origin = vec![ZERO; m];
        let at_origin = minkowski_p(&self.eval_raw(&origin));
        if at_origin > 1e-12 {
            return Err(Error::OriginNotFixed(at_origin));
        }
        Self::linear(&self.jacobian_raw(&origin))
    }

    /// Maps a point of one axis, `ζ e_l`, through every target coordinate.
    pub fn restrict_to_axis(&self, axis: usize, zeta: Complex) -> Result<Vec<Complex>> {
        let (m, _) = self.dims()?;
        if axis >= m {
            return Err(Error::DimensionMismatch { expected: m, found: axis + 1 });
        }
        let mut z = vec![ZERO; m];
        z[axis] = zeta;
        Ok(self.eval_raw(&z))
    }
}

/// Random admissible linear map: each target column gets Dirichlet weights
/// scaled to a total `s <= 1` (`s = 1` half of the time) and random phases.
pub fn sample_linear<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Result<HolomorphicMap> {
    let mut a = DMatrix::from_element(m, n, ZERO);
    for l in 0..n {
        let total = if rng.random_bool(0.5) { 1.0 } else { rng.random::<f64>() };
        let raw: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let norm: f64 = raw.iter().sum();
        for (i, w) in raw.iter().enumerate() {
            a[(i, l)] = Complex::from_polar(total * w / norm, sample_phase(rng));
        }
        // Rounding in the weights and in the polar form can push the sum a few ulps past 1.
        while (0..m).map(|i| a[(i, l)].norm()).sum::<f64>() > 1.0 {
            a.column_mut(l).iter_mut().for_each(|c| *c *= 1.0 - 4.0 * f64::EPSILON);
        }
    }
    HolomorphicMap::linear(&a)
}

pub fn sample_coord_moebius<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    n: usize,
    radius_cap: f64,
) -> HolomorphicMap {
    let coords = (0..n)
        .map(|_| MoebiusCoordinate {
            source: rng.random_range(0..m),
            a: sample_disc(rng, radius_cap),
            phase: sample_phase(rng),
        })
        .collect();
    HolomorphicMap::CoordMoebius { m, coords }
}

/// Draws one map of the given family carrying `P_m` into `P_n`.
pub fn sample_map<R: Rng + ?Sized>(
    rng: &mut R,
    family: MapFamily,
    m: usize,
    n: usize,
    radius_cap: f64,
) -> Result<HolomorphicMap> {
    if m == 0 || n == 0 {
        return Err(Error::EmptyDimension);
    }
    if !(radius_cap > 0.0 && radius_cap < 1.0) {
        return Err(Error::InvalidRadiusCap(radius_cap));
    }
    match family {
        MapFamily::Linear => sample_linear(rng, m, n),
        MapFamily::CoordMoebius => Ok(sample_coord_moebius(rng, m, n, radius_cap)),
        MapFamily::Extremal => HolomorphicMap::extremal(m, n),
        MapFamily::Homogeneous => Ok(HolomorphicMap::Homogeneous {
            inner: Box::new(sample_linear(rng, m, n)?),
            degree: rng.random_range(1..=4),
        }),
        MapFamily::Composed => Ok(HolomorphicMap::Composed {
            maps: vec![sample_linear(rng, m, n)?, sample_coord_moebius(rng, n, n, radius_cap)],
        }),
    }
}

//! Counter-based random streams. A campaign owns one seed; trial `i` draws
//! from its own ChaCha stream, so the inputs of every trial are fixed by
//! `(seed, i)` alone, independent of scheduling.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Complex, PolydiscPoint, TangentVector};
use crate::error::{Error, Result};

pub const DEFAULT_RADIUS_CAP: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRng {
    seed: u64,
}

impl TrialRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream for trial `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Derives a child generator, e.g. one per grid cell.
    pub fn child(&self, salt: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        rng.set_stream(salt);
        Self { seed: rng.random() }
    }
}

/// Uniform point of the closed disc of radius `r_max`.
pub fn sample_disc<R: Rng + ?Sized>(rng: &mut R, r_max: f64) -> Complex {
    let r = r_max * rng.random::<f64>().sqrt();
    Complex::from_polar(r, TAU * rng.random::<f64>())
}

pub fn sample_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    TAU * rng.random::<f64>()
}

/// Each coordinate uniform on the disc of radius `radius_cap`.
pub fn sample_polydisc_point<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    radius_cap: f64,
) -> Result<PolydiscPoint> {
    if !(radius_cap > 0.0 && radius_cap < 1.0) {
        return Err(Error::InvalidRadiusCap(radius_cap));
    }
    if m == 0 {
        return Err(Error::EmptyDimension);
    }
    PolydiscPoint::new((0..m).map(|_| sample_disc(rng, radius_cap)).collect())
}

/// A nonzero vector with coordinates uniform in the unit disc. Coordinates
/// are kept away from exact zero, which only matters for derivative
/// evaluations of the `k`-power term.
pub fn sample_tangent_vector<R: Rng + ?Sized>(rng: &mut R, m: usize) -> TangentVector {
    let coords = (0..m.max(1))
        .map(|_| loop {
            let c = sample_disc(rng, 1.0);
            if c.norm() > 1e-8 {
                break c;
            }
        })
        .collect();
    TangentVector::from_raw(coords)
}

/// Uniform random permutation of `0..m`.
pub fn sample_permutation<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..m).collect();
    for i in (1..m).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

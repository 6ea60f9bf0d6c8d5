//! Holomorphic-invariant Kähler-Berwald metrics `F_{t,k}` on the unit
//! polydisc and verification engines for their Schwarz lemma, distortion
//! theorem, convexity and Finsler-Einstein property.

pub mod automorphisms;
pub mod distortion;
pub mod domain;
pub mod error;
pub mod geometry;
pub mod maps;
pub mod metrics;
pub mod rng;
pub mod schwarz;

pub use automorphisms::{moebius_transport, sample_automorphism, sample_isotropy, AutElement, DiscMoebius};
pub use domain::{approx_eq, complex, Complex, MetricParams, PolydiscPoint, TangentVector, Tolerance};
pub use error::{Error, Result};
pub use maps::{HolomorphicMap, Jacobian, MapFamily};
pub use metrics::{
    eval_bergman_f2, eval_f2, eval_phi2, indicatrix_boundary, indicatrix_contains, minkowski_p, IndicatrixPoint, MetricValue,
};
pub use rng::TrialRng;

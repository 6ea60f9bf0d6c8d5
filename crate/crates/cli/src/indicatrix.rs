use std::fmt::Write;

use finsler_core::{indicatrix_boundary, MetricParams, TrialRng};

use crate::error::Result;

/// Slack allowed on the inclusion checks of emitted points.
pub const INCLUSION_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatrixSummary {
    pub rows: usize,
    /// Points with euclidean norm below 1 or sup norm above 1, beyond the slack.
    pub violations: usize,
}

pub fn header(m: usize) -> String {
    let mut h = String::new();
    for l in 1..=m {
        write!(h, "dir_re_{l},dir_im_{l},").expect("writing to a String");
    }
    h.push_str("radius");
    h
}

/// Boundary samples as CSV, one unit direction and its radius per row.
pub fn indicatrix_csv(p: &MetricParams, m: usize, resolution: usize, rng: &TrialRng) -> Result<(String, IndicatrixSummary)> {
    let points = indicatrix_boundary(p, m, resolution, rng)?;
    let mut out = header(m);
    out.push('\n');
    let mut violations = 0;
    for pt in &points {
        for c in pt.direction.coords() {
            write!(out, "{},{},", c.re, c.im).expect("writing to a String");
        }
        writeln!(out, "{}", pt.radius).expect("writing to a String");
        let x = pt.point();
        if x.euclidean_norm() < 1.0 - INCLUSION_SLACK || x.sup_norm() > 1.0 + INCLUSION_SLACK {
            violations += 1;
        }
    }
    Ok((out, IndicatrixSummary { rows: points.len(), violations }))
}

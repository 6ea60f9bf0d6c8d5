use std::collections::BTreeMap;
use std::time::Instant;

use finsler_core::distortion::{verify_distortion_radial, verify_distortion_sampled, ConvexMapping};
use finsler_core::metrics::polydisc_constant;
use finsler_core::geometry::{derivative_crosscheck, einstein_check, kahler_berwald_check, levi_matrix};
use finsler_core::rng::{sample_polydisc_point, sample_tangent_vector};
use finsler_core::schwarz::{verify_norm_schwarz, verify_norm_schwarz_sampled, SchwarzCampaign, SchwarzReport};
use finsler_core::{
    eval_bergman_f2, eval_f2, eval_phi2, minkowski_p, Complex, MetricParams, TangentVector, TrialRng,
};

use crate::config::{CampaignConfig, CommandKind};
use crate::error::{CliError, Result};
use crate::indicatrix::{indicatrix_csv, IndicatrixSummary};
use crate::report::{CellReport, GridCell, Report, WorstCase};

/// Result of a campaign: the bytes to emit and whether any check failed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub violated: bool,
    pub output: Vec<u8>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.violated {
            2
        } else {
            0
        }
    }
}

pub fn run(config: &CampaignConfig) -> Result<Outcome> {
    if config.command == CommandKind::EmitIndicatrix {
        return emit_indicatrix(config);
    }
    let start = Instant::now();
    let root = TrialRng::new(config.seed);
    let mut cells = Vec::new();
    for (index, job) in jobs(config).into_iter().enumerate() {
        let rng = root.child(index as u64);
        let cell_start = Instant::now();
        let mut cell = run_cell(config, &job, &rng)?;
        cell.elapsed_ms = cell_start.elapsed().as_millis() as u64;
        cells.push(cell);
    }
    let violated = cells.iter().any(|c| c.violated);
    let report = Report {
        command: config.command.name().to_string(),
        seed: config.seed,
        elapsed_ms: start.elapsed().as_millis() as u64,
        violated,
        cells,
    };
    let mut output = serde_json::to_vec_pretty(&report)?;
    output.push(b'\n');
    Ok(Outcome { violated, output })
}

struct Job {
    source: MetricParams,
    target: Option<MetricParams>,
}

fn jobs(config: &CampaignConfig) -> Vec<Job> {
    let paired = matches!(config.command, CommandKind::VerifySchwarz | CommandKind::VerifyNormSchwarz);
    let mut out = Vec::new();
    for &source in &config.source {
        if paired {
            out.extend(config.target.iter().map(|&t| Job { source, target: Some(t) }));
        } else {
            out.push(Job { source, target: None });
        }
    }
    out
}

fn cell(config: &CampaignConfig, grid_cell: GridCell, trials: u64, seed: u64) -> CellReport {
    CellReport {
        command: config.command.name().to_string(),
        grid_cell,
        trials,
        max_ratio: 0.0,
        sharp_constant: 1.0,
        worst_case: None,
        residuals: BTreeMap::new(),
        seed,
        elapsed_ms: 0,
        violated: false,
    }
}

fn run_cell(config: &CampaignConfig, job: &Job, rng: &TrialRng) -> Result<CellReport> {
    let p = &job.source;
    match config.command {
        CommandKind::Eval => eval_cell(config, p, rng),
        CommandKind::VerifySchwarz => {
            let target = job.target.expect("paired job");
            let campaign = SchwarzCampaign {
                source: vec![*p],
                target,
                m: config.m,
                n: config.n,
                families: config.families.clone(),
                trials: config.trials,
                radius_cap: config.radius_cap,
                force_witness: config.force_witness,
                tol: config.tolerance,
            };
            let report = campaign.run(rng)?;
            Ok(schwarz_cell(config, GridCell::pair(p, &target, config.m, config.n), report, rng))
        }
        CommandKind::VerifyNormSchwarz => {
            let target = job.target.expect("paired job");
            let (m, n, report) = match &config.map {
                Some(f) => {
                    let (m, n) = f.dims()?;
                    let r = verify_norm_schwarz(
                        p,
                        &target,
                        f,
                        config.trials,
                        rng,
                        config.radius_cap,
                        &config.tolerance,
                    )?;
                    (m, n, r)
                }
                None => {
                    let r = verify_norm_schwarz_sampled(
                        p,
                        &target,
                        config.m,
                        config.n,
                        &config.families,
                        config.trials,
                        rng,
                        config.radius_cap,
                        &config.tolerance,
                    )?;
                    (config.m, config.n, r)
                }
            };
            Ok(schwarz_cell(config, GridCell::pair(p, &target, m, n), report, rng))
        }
        CommandKind::VerifyDistortion => distortion_cell(config, p, rng),
        CommandKind::CheckLevi => levi_cell(config, p, rng),
        CommandKind::CheckKahlerBerwald => {
            let r = kahler_berwald_check(p, config.m, config.trials, config.v_per_z, rng, config.radius_cap)?;
            let mut c = cell(config, GridCell::single(p, config.m), config.trials, rng.seed());
            c.max_ratio = r.max_kahler_residual.max(r.max_berwald_v_residual);
            c.sharp_constant = config.residual_tol;
            c.residuals.insert("kahler".into(), r.max_kahler_residual);
            c.residuals.insert("berwald_v".into(), r.max_berwald_v_residual);
            c.violated = c.max_ratio > config.residual_tol;
            c.worst_case = Some(WorstCase { trial: None, map_spec: None, z: r.worst_z, v: None });
            Ok(c)
        }
        CommandKind::CheckEinstein => {
            let r = einstein_check(p, config.m, config.trials, rng, config.radius_cap, &config.tolerance)?;
            let mut c = cell(config, GridCell::single(p, config.m), config.trials, rng.seed());
            // Compare with the Bergman factor directly so a wrong but uniform factor still fails.
            let factor_error = r
                .einstein_factor
                .map_or(f64::INFINITY, |phi| (phi - Complex::new(-2.0, 0.0)).norm() / 2.0);
            c.max_ratio = r.max_relative_deviation.max(factor_error);
            c.sharp_constant = config.residual_tol;
            c.residuals.insert("relative_deviation".into(), r.max_relative_deviation);
            c.residuals.insert("factor_error".into(), factor_error);
            c.residuals.insert("fd_residual".into(), r.max_fd_residual);
            if let Some(phi) = r.einstein_factor {
                c.residuals.insert("factor_re".into(), phi.re);
                c.residuals.insert("factor_im".into(), phi.im);
            }
            c.violated = c.max_ratio > config.residual_tol;
            c.worst_case = Some(WorstCase { trial: None, map_spec: None, z: r.worst.z, v: None });
            Ok(c)
        }
        CommandKind::EmitIndicatrix => unreachable!("handled before the grid loop"),
    }
}

fn schwarz_cell(config: &CampaignConfig, grid_cell: GridCell, report: SchwarzReport, rng: &TrialRng) -> CellReport {
    let mut c = cell(config, grid_cell, report.trials, rng.seed());
    c.max_ratio = report.max_ratio;
    c.sharp_constant = report.sharp_constant;
    c.residuals.insert("ratio_over_constant".into(), report.max_ratio / report.sharp_constant);
    c.violated = report.violated;
    c.worst_case = report.worst_case.map(|w| WorstCase {
        trial: Some(w.trial),
        map_spec: serde_json::to_value(&w.map_spec).ok(),
        z: w.z,
        v: w.v,
    });
    c
}

fn eval_cell(config: &CampaignConfig, p: &MetricParams, rng: &TrialRng) -> Result<CellReport> {
    let (z, v) = match (&config.z, &config.v) {
        (Some(z), Some(v)) => (z.clone(), v.clone()),
        _ => return Err(CliError::Config("eval needs --z and --v".into())),
    };
    let value = eval_f2(p, &z, &v)?;
    let mut c = cell(config, GridCell::single(p, z.dim()), 1, rng.seed());
    c.max_ratio = value.f2;
    c.sharp_constant = polydisc_constant(z.dim(), p);
    c.residuals.insert("f".into(), value.f);
    c.residuals.insert("f2".into(), value.f2);
    c.residuals.insert("phi2_of_v".into(), eval_phi2(p, &v));
    c.residuals.insert("bergman_f2".into(), eval_bergman_f2(&z, &v)?);
    c.residuals.insert("minkowski_p".into(), minkowski_p(z.coords()));
    c.worst_case = Some(WorstCase { trial: None, map_spec: None, z, v: Some(v) });
    Ok(c)
}

fn distortion_cell(config: &CampaignConfig, p: &MetricParams, rng: &TrialRng) -> Result<CellReport> {
    let m = config.m;
    let tol = &config.tolerance;
    let sampled = verify_distortion_sampled(p, m, config.trials, &rng.child(0), config.radius_cap, tol)?;
    let thetas: Vec<f64> = (0..m).map(|l| 0.7 * l as f64).collect();
    let extremal = ConvexMapping::extremal(&thetas)?;
    let radial = verify_distortion_radial(p, &extremal, config.trials, &rng.child(1), config.radius_cap, tol)?;

    let mut c = cell(config, GridCell::single(p, m), config.trials, rng.seed());
    c.max_ratio = sampled.max_ratio.max(radial.max_ratio);
    c.residuals.insert("upper_ratio".into(), sampled.max_upper_ratio);
    c.residuals.insert("lower_ratio".into(), sampled.max_lower_ratio);
    c.residuals.insert("radial_ratio".into(), radial.max_ratio);
    c.violated = sampled.violated || radial.violated;
    let worst = if sampled.max_ratio >= radial.max_ratio { sampled.worst_case } else { radial.worst_case };
    c.worst_case = worst.map(|w| WorstCase {
        trial: Some(w.trial),
        map_spec: serde_json::to_value(&w.mapping).ok(),
        z: w.z,
        v: Some(w.v),
    });
    Ok(c)
}

fn levi_cell(config: &CampaignConfig, p: &MetricParams, rng: &TrialRng) -> Result<CellReport> {
    let m = config.m;
    let mut min_levi = f64::INFINITY;
    let mut min_hessian = f64::INFINITY;
    let mut max_fd = 0.0_f64;
    let mut worst: Option<(u64, f64, WorstCase)> = None;
    for trial in 0..config.trials {
        let mut r = rng.stream(trial);
        let z = sample_polydisc_point(&mut r, m, config.radius_cap)?;
        let v = nonzero_vector(&mut r, m);
        let levi = levi_matrix(p, &z, &v)?;
        let fd = derivative_crosscheck(p, &z, &v)?.max();
        min_levi = min_levi.min(levi.min_eigenvalue);
        min_hessian = min_hessian.min(levi.hessian_min_eigenvalue);
        max_fd = max_fd.max(fd);
        let margin = levi.min_eigenvalue.min(levi.hessian_min_eigenvalue);
        if worst.as_ref().is_none_or(|w| margin < w.1) {
            worst = Some((trial, margin, WorstCase { trial: Some(trial), map_spec: None, z, v: Some(v) }));
        }
    }
    let tol = &config.tolerance;
    let mut c = cell(config, GridCell::single(p, m), config.trials, rng.seed());
    c.max_ratio = max_fd;
    c.sharp_constant = tol.fd_rel;
    c.residuals.insert("min_levi_eigenvalue".into(), min_levi);
    c.residuals.insert("min_hessian_eigenvalue".into(), min_hessian);
    c.residuals.insert("derivative_fd_rel".into(), max_fd);
    c.violated = min_levi <= tol.psd_min_eig || min_hessian <= tol.psd_min_eig || max_fd > tol.fd_rel;
    c.worst_case = worst.map(|w| w.2);
    Ok(c)
}

fn nonzero_vector<R: rand::Rng + ?Sized>(r: &mut R, m: usize) -> TangentVector {
    loop {
        let v = sample_tangent_vector(r, m);
        if !v.is_zero() {
            return v;
        }
    }
}

fn emit_indicatrix(config: &CampaignConfig) -> Result<Outcome> {
    let [p] = config.source.as_slice() else {
        return Err(CliError::Config("emit-indicatrix takes a single t and k".into()));
    };
    let (csv, summary): (String, IndicatrixSummary) =
        indicatrix_csv(p, config.m, config.resolution, &TrialRng::new(config.seed))?;
    if summary.violations > 0 {
        eprintln!(
            "{} of {} indicatrix points break the ball/polycylinder inclusions",
            summary.violations, summary.rows
        );
    }
    Ok(Outcome { violated: summary.violations > 0, output: csv.into_bytes() })
}

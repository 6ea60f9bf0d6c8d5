use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use finsler_core::{HolomorphicMap, MapFamily, MetricParams, PolydiscPoint, TangentVector, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Eval,
    VerifySchwarz,
    VerifyNormSchwarz,
    VerifyDistortion,
    CheckLevi,
    CheckKahlerBerwald,
    CheckEinstein,
    EmitIndicatrix,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Eval => "eval",
            Self::VerifySchwarz => "verify-schwarz",
            Self::VerifyNormSchwarz => "verify-norm-schwarz",
            Self::VerifyDistortion => "verify-distortion",
            Self::CheckLevi => "check-levi",
            Self::CheckKahlerBerwald => "check-kahler-berwald",
            Self::CheckEinstein => "check-einstein",
            Self::EmitIndicatrix => "emit-indicatrix",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "finsler-polydisc", version, about = "Seeded verification campaigns for Kähler-Berwald metrics on polydiscs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Evaluate F, F² and φ² at a given point and vector.
    Eval(CampaignArgs),
    /// Randomized check of the sharp Schwarz inequality.
    VerifySchwarz(CampaignArgs),
    /// Norm-level Schwarz inequality for maps fixing the origin.
    VerifyNormSchwarz(CampaignArgs),
    /// Distortion bounds for normalized convex mappings.
    VerifyDistortion(CampaignArgs),
    /// Positivity of the Levi matrix and real Hessian, with derivative cross-checks.
    CheckLevi(CampaignArgs),
    /// Kähler and Berwald residuals of the connection.
    CheckKahlerBerwald(CampaignArgs),
    /// Mean curvature against the Bergman metric.
    CheckEinstein(CampaignArgs),
    /// Boundary samples of the indicatrix at the origin, as CSV.
    EmitIndicatrix(CampaignArgs),
}

impl CliCommand {
    pub fn split(self) -> (CommandKind, CampaignArgs) {
        match self {
            Self::Eval(a) => (CommandKind::Eval, a),
            Self::VerifySchwarz(a) => (CommandKind::VerifySchwarz, a),
            Self::VerifyNormSchwarz(a) => (CommandKind::VerifyNormSchwarz, a),
            Self::VerifyDistortion(a) => (CommandKind::VerifyDistortion, a),
            Self::CheckLevi(a) => (CommandKind::CheckLevi, a),
            Self::CheckKahlerBerwald(a) => (CommandKind::CheckKahlerBerwald, a),
            Self::CheckEinstein(a) => (CommandKind::CheckEinstein, a),
            Self::EmitIndicatrix(a) => (CommandKind::EmitIndicatrix, a),
        }
    }
}

/// Flags shared by every command. Unset flags fall back to the config file,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CampaignArgs {
    /// Source metric parameter t (comma-separated list).
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Source metric exponent k (comma-separated list).
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<u32>>,
    /// Target metric parameter t̃ (comma-separated list).
    #[arg(long, value_delimiter = ',')]
    pub tt: Option<Vec<f64>>,
    /// Target metric exponent k̃ (comma-separated list).
    #[arg(long, value_delimiter = ',')]
    pub kk: Option<Vec<u32>>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub radius_cap: Option<f64>,
    /// Map families to sample (comma-separated).
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Make trial 0 the extremal map at (0, e_1).
    #[arg(long)]
    pub force_witness: bool,
    /// Fiber vectors per base point for check-kahler-berwald.
    #[arg(long)]
    pub v_per_z: Option<usize>,
    /// Number of random directions for emit-indicatrix.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Map specification (JSON) for verify-norm-schwarz.
    #[arg(long)]
    pub map: Option<String>,
    /// Point as JSON `[[re, im], ...]`.
    #[arg(long)]
    pub z: Option<String>,
    /// Tangent vector as JSON `[[re, im], ...]`.
    #[arg(long)]
    pub v: Option<String>,
    #[arg(long)]
    pub abs_eq: Option<f64>,
    #[arg(long)]
    pub rel_eq: Option<f64>,
    #[arg(long)]
    pub fd_rel: Option<f64>,
    #[arg(long)]
    pub psd_min_eig: Option<f64>,
    /// Threshold for connection residuals.
    #[arg(long)]
    pub residual_tol: Option<f64>,
    /// Output file; written atomically. Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file; flags take precedence over its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Config file contents. Every entry is optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub t: Option<Vec<f64>>,
    pub k: Option<Vec<u32>>,
    pub tt: Option<Vec<f64>>,
    pub kk: Option<Vec<u32>>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub radius_cap: Option<f64>,
    pub families: Option<Vec<MapFamily>>,
    pub force_witness: Option<bool>,
    pub v_per_z: Option<usize>,
    pub resolution: Option<usize>,
    pub map: Option<HolomorphicMap>,
    pub z: Option<PolydiscPoint>,
    pub v: Option<TangentVector>,
    pub abs_eq: Option<f64>,
    pub rel_eq: Option<f64>,
    pub fd_rel: Option<f64>,
    pub psd_min_eig: Option<f64>,
    pub residual_tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// A fully resolved campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub command: CommandKind,
    pub source: Vec<MetricParams>,
    pub target: Vec<MetricParams>,
    pub m: usize,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub radius_cap: f64,
    pub families: Vec<MapFamily>,
    pub force_witness: bool,
    pub v_per_z: usize,
    pub resolution: usize,
    pub map: Option<HolomorphicMap>,
    pub z: Option<PolydiscPoint>,
    pub v: Option<TangentVector>,
    pub tolerance: Tolerance,
    pub residual_tol: f64,
    pub out: Option<PathBuf>,
}

fn param_grid(t: &[f64], k: &[u32], what: &str) -> Result<Vec<MetricParams>> {
    if t.is_empty() || k.is_empty() {
        return Err(CliError::Config(format!("{what} parameter grid is empty")));
    }
    let mut out = Vec::with_capacity(t.len() * k.len());
    for &ti in t {
        for &ki in k {
            out.push(MetricParams::new(ti, ki)?);
        }
    }
    Ok(out)
}

fn parse_json<T: serde::de::DeserializeOwned>(flag: &str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("--{flag}: {e}")))
}

impl CampaignConfig {
    pub fn resolve(command: CommandKind, args: CampaignArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let families = match args.families {
            Some(names) => names.iter().map(|s| s.parse()).collect::<std::result::Result<Vec<_>, _>>()?,
            None => file.families.unwrap_or_else(|| match command {
                CommandKind::VerifyNormSchwarz => {
                    vec![MapFamily::Linear, MapFamily::Homogeneous, MapFamily::Extremal]
                }
                _ => vec![MapFamily::Linear, MapFamily::CoordMoebius, MapFamily::Extremal],
            }),
        };
        let map = match args.map {
            Some(text) => Some(HolomorphicMap::from_json(&text)?),
            None => file.map,
        };
        let z = match args.z {
            Some(text) => Some(parse_json("z", &text)?),
            None => file.z,
        };
        let v = match args.v {
            Some(text) => Some(parse_json("v", &text)?),
            None => file.v,
        };
        let defaults = Tolerance::default();
        let tolerance = Tolerance {
            abs_eq: args.abs_eq.or(file.abs_eq).unwrap_or(defaults.abs_eq),
            rel_eq: args.rel_eq.or(file.rel_eq).unwrap_or(defaults.rel_eq),
            fd_rel: args.fd_rel.or(file.fd_rel).unwrap_or(defaults.fd_rel),
            psd_min_eig: args.psd_min_eig.or(file.psd_min_eig).unwrap_or(defaults.psd_min_eig),
        };
        tolerance.validate()?;

        let config = Self {
            command,
            source: param_grid(
                &args.t.or(file.t).unwrap_or_else(|| vec![1.0]),
                &args.k.or(file.k).unwrap_or_else(|| vec![2]),
                "source",
            )?,
            target: param_grid(
                &args.tt.or(file.tt).unwrap_or_else(|| vec![1.0]),
                &args.kk.or(file.kk).unwrap_or_else(|| vec![2]),
                "target",
            )?,
            m: args.m.or(file.m).unwrap_or(2),
            n: args.n.or(file.n).unwrap_or(2),
            trials: args.trials.or(file.trials).unwrap_or(1000),
            seed: args.seed.or(file.seed).unwrap_or(0),
            radius_cap: args.radius_cap.or(file.radius_cap).unwrap_or(finsler_core::rng::DEFAULT_RADIUS_CAP),
            families,
            force_witness: args.force_witness || file.force_witness.unwrap_or(false),
            v_per_z: args.v_per_z.or(file.v_per_z).unwrap_or(20),
            resolution: args.resolution.or(file.resolution).unwrap_or(64),
            map,
            z,
            v,
            tolerance,
            residual_tol: args.residual_tol.or(file.residual_tol).unwrap_or(1e-8),
            out: args.out.or(file.out),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::Config("trials must be >= 1".into()));
        }
        if self.m == 0 || self.n == 0 {
            return Err(CliError::Config("dimensions m and n must be >= 1".into()));
        }
        if !(self.radius_cap > 0.0 && self.radius_cap < 1.0) {
            return Err(CliError::Config(format!("radius cap {} must lie in (0, 1)", self.radius_cap)));
        }
        if self.families.is_empty() {
            return Err(CliError::Config("at least one map family is required".into()));
        }
        if self.v_per_z == 0 {
            return Err(CliError::Config("v-per-z must be >= 1".into()));
        }
        if self.residual_tol.is_nan() || self.residual_tol <= 0.0 {
            return Err(CliError::Config("residual tolerance must be > 0".into()));
        }
        if self.command == CommandKind::Eval && (self.z.is_none() || self.v.is_none()) {
            return Err(CliError::Config("eval needs --z and --v".into()));
        }
        Ok(())
    }
}

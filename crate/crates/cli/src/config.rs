//! Run configuration: command-line flags, an optional JSON file and defaults,
//! merged in that order of precedence.

use std::path::{Path, PathBuf};

use bicwave::bic::GridSpec;
use bicwave::{QuadratureConfig, WaveguideModel};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Waveguide mass m.
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Coupling strength gamma.
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Emitter spacing d.
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Number of emitters.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Resonance order nu (E = E_nu).
    #[arg(long, global = true)]
    pub nu: Option<u32>,
    /// Wave index j (1-based, ordered by decreasing chi).
    #[arg(long, global = true)]
    pub j: Option<usize>,
    /// Override the nearest-neighbour coefficient b1 = beta_1/Z.
    #[arg(long, global = true)]
    pub b1: Option<f64>,
    /// Classify with b1 alone, without any quadrature.
    #[arg(long, global = true)]
    pub model_free: bool,
    /// Energy: a number or `resonant:NU`.
    #[arg(long = "E", global = true)]
    pub energy: Option<String>,
    /// Quadrature split point on the real axis.
    #[arg(long, global = true)]
    pub k_max: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Field samples per emitter spacing.
    #[arg(long, global = true)]
    pub grid_per_cell: Option<usize>,
    /// Field padding beyond the outer emitters (default 6/m).
    #[arg(long, global = true)]
    pub pad: Option<f64>,
    /// Momentum points of the discretized oracle.
    #[arg(long, global = true)]
    pub n_k: Option<usize>,
    /// Oracle detuning of epsilon, in units of Z(E_nu).
    #[arg(long, global = true)]
    pub detuning: Option<f64>,
    /// Output directory (overrides BICWAVE_OUT).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Seed recorded for randomized checks.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub m: Option<f64>,
    pub gamma: Option<f64>,
    pub d: Option<f64>,
    pub n: Option<usize>,
    pub nu: Option<u32>,
    pub j: Option<usize>,
    pub b1: Option<f64>,
    pub model_free: Option<bool>,
    #[serde(rename = "E")]
    pub energy: Option<String>,
    pub k_max: Option<f64>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub grid_per_cell: Option<usize>,
    pub pad: Option<f64>,
    pub n_k: Option<usize>,
    pub detuning: Option<f64>,
    pub out: Option<PathBuf>,
    pub svg: Option<bool>,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Energy selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EnergySpec {
    Resonant(u32),
    Value(f64),
}

impl EnergySpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("cannot parse energy `{s}` (expected a number or resonant:NU)"));
        match s.strip_prefix("resonant:") {
            Some(nu) => nu.trim().parse().map(Self::Resonant).map_err(|_| bad()),
            None => s.trim().parse().map(Self::Value).map_err(|_| bad()),
        }
    }

    pub fn resolve(self, model: &WaveguideModel, d: f64) -> f64 {
        match self {
            Self::Resonant(nu) => model.resonant_energy(d, nu),
            Self::Value(e) => e,
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub m: f64,
    pub gamma: f64,
    pub d: f64,
    pub n: usize,
    pub nu: u32,
    pub j: Option<usize>,
    pub b1_override: Option<f64>,
    pub model_free: bool,
    pub energy: Option<EnergySpec>,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub k_max: Option<f64>,
    pub grid_per_cell: usize,
    pub pad: Option<f64>,
    pub n_k: usize,
    pub detuning: f64,
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub svg: bool,
    #[serde(skip)]
    pub jobs: usize,
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let quad = QuadratureConfig::default();
        let grid = GridSpec::default();
        let energy = match args.energy.clone().or(file.energy) {
            Some(s) => Some(EnergySpec::parse(&s)?),
            None => None,
        };
        let output_dir = args
            .out
            .clone()
            .or_else(|| std::env::var_os("BICWAVE_OUT").map(PathBuf::from))
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out"));
        let cfg = Self {
            m: args.m.or(file.m).unwrap_or(1.0),
            gamma: args.gamma.or(file.gamma).unwrap_or(0.1),
            d: args.d.or(file.d).unwrap_or(5.0),
            n: args.n.or(file.n).unwrap_or(30),
            nu: args.nu.or(file.nu).unwrap_or(1),
            j: args.j.or(file.j),
            b1_override: args.b1.or(file.b1),
            model_free: args.model_free || file.model_free.unwrap_or(false),
            energy,
            rel_tol: args.rel_tol.or(file.rel_tol).unwrap_or(quad.rel_tol),
            abs_tol: file.abs_tol.unwrap_or(quad.abs_tol),
            k_max: args.k_max.or(file.k_max),
            grid_per_cell: args.grid_per_cell.or(file.grid_per_cell).unwrap_or(grid.per_cell),
            pad: args.pad.or(file.pad),
            n_k: args.n_k.or(file.n_k).unwrap_or(2000),
            detuning: args.detuning.or(file.detuning).unwrap_or(0.0),
            seed: args.seed.or(file.seed).unwrap_or(0),
            output_dir,
            svg: args.svg || file.svg.unwrap_or(false),
            jobs: args.jobs.or(file.jobs).unwrap_or(1),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("m", self.m),
            ("gamma", self.gamma),
            ("d", self.d),
            ("rel-tol", self.rel_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("--{name} must be positive, got {v}")));
            }
        }
        if self.n == 0 {
            return Err(CliError::Config("--n must be at least 1".into()));
        }
        if self.nu == 0 {
            return Err(CliError::Config("--nu must be at least 1".into()));
        }
        if self.jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        if self.model_free && self.b1_override.is_none() {
            return Err(CliError::Config("--model-free needs --b1".into()));
        }
        Ok(())
    }

    /// Warn when the spacing is outside the well-separated regime.
    pub fn regime_warning(&self) -> Option<String> {
        (self.m * self.d < 1.0).then(|| {
            format!(
                "warning: m*d = {:.3} < 1; evanescent couplings are not small",
                self.m * self.d
            )
        })
    }

    pub fn model(&self) -> Result<WaveguideModel, CliError> {
        Ok(WaveguideModel::new(self.m, self.gamma)?)
    }

    pub fn quad(&self) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            k_max: self.k_max,
            ..QuadratureConfig::default()
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            per_cell: self.grid_per_cell,
            pad: self.pad,
        }
    }

    /// Short hash of every setting that influences the numbers.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..6].iter().map(|b| format!("{b:02x}")).collect()
    }
}

//! Pipeline behind the `modelrisk` binary: embed the models, build the
//! neighbourhood and its weight kernel, evaluate the norms, and write the
//! report plus one CSV table per direction.

pub mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use modelrisk_core::densities::{discretize_on, FamilyParams};
use modelrisk_core::kernel::{make_profile, pull_forward, ProfileKind};
use modelrisk_core::neighbourhood::Neighbourhood;
use modelrisk_core::risk::{assess, NormValue, RiskReport, WorstCase};
use modelrisk_core::sphere::{distance, sqrt_embed, GridFunction};

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(#[from] modelrisk_core::Error),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub x0: f64,
    pub dx: f64,
    pub points: usize,
    pub t_samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionSummary {
    pub index: usize,
    pub target: FamilyParams,
    /// Great-circle distance from the base model to the target.
    pub distance: f64,
    pub rho: f64,
    /// `(c1, c2)` with `K(t) = c1 (1 - c2 t)`, linear profiles only.
    pub kernel_coefficients: Option<[f64; 2]>,
    pub csv: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub profile: ProfileKind,
    pub normalization_constant: f64,
    pub normalization_residual: f64,
}

/// Everything written to the report file.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub base: FamilyParams,
    pub functional: String,
    pub f0: f64,
    pub norms: Vec<NormValue>,
    pub worst_case: WorstCase,
    pub kernel: KernelSummary,
    pub directions: Vec<DirectionSummary>,
    pub grid: GridSummary,
}

/// Runs the pipeline and returns the report together with the per-node
/// risk table (not written to disk).
pub fn compute(cfg: &RunConfig) -> Result<(RunReport, RiskReport), CliError> {
    cfg.validate()?;
    let spec = cfg.grid.spec();
    let nb = Neighbourhood::from_targets(&cfg.base, &cfg.targets, &spec, cfg.grid.t_samples)?;
    let profile = make_profile(cfg.kernel, nb.directions().len())?;
    let kernel = pull_forward(&profile, &nb)?;
    let request = cfg.request()?;
    let risk = assess(&nb, &kernel, &request)?;

    let grid = *nb.base().grid();
    let mut directions = Vec::with_capacity(cfg.targets.len());
    for (i, (target, dir)) in cfg.targets.iter().zip(nb.directions()).enumerate() {
        let psi = sqrt_embed(&discretize_on(target, &grid)?)?;
        directions.push(DirectionSummary {
            index: i,
            target: *target,
            distance: distance(nb.base(), &psi)?,
            rho: dir.rho(),
            kernel_coefficients: kernel.linear_coefficients(i).map(|(a, b)| [a, b]),
            csv: csv_name(i),
        });
    }
    let report = RunReport {
        base: cfg.base,
        functional: risk.functional.clone(),
        f0: risk.f0,
        norms: risk.values.clone(),
        worst_case: risk.worst_case,
        kernel: KernelSummary {
            profile: cfg.kernel,
            normalization_constant: profile.normalization(),
            normalization_residual: kernel.normalization_residual(),
        },
        directions,
        grid: GridSummary {
            x0: grid.x0(),
            dx: grid.dx(),
            points: grid.len(),
            t_samples: nb.t_samples(),
        },
    };
    Ok((report, risk))
}

pub fn csv_name(direction: usize) -> String {
    format!("direction_{direction}.csv")
}

#[derive(Serialize)]
struct CsvRow {
    t: f64,
    d: f64,
    f: f64, // f(γ(t))
    #[serde(rename = "K")]
    k: f64,
    w: f64,
}

/// Runs the pipeline and writes the report and CSV tables under `out`
/// (or the configured directory). Returns the directory written to.
pub fn run(cfg: &RunConfig, out: Option<&Path>) -> Result<(RunReport, PathBuf), CliError> {
    let (report, risk) = compute(cfg)?;
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output.dir.clone());
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
    fs::create_dir_all(&dir).map_err(io)?;

    let mut json =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
    json.push('\n');
    fs::write(dir.join(&cfg.output.report), json).map_err(io)?;

    for d in &report.directions {
        let path = dir.join(&d.csv);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Io(e.to_string()))?;
        for row in risk.nodes.iter().filter(|n| n.direction == d.index) {
            w.serialize(CsvRow {
                t: row.t,
                d: row.d,
                f: row.f,
                k: row.k,
                w: row.w,
            })
            .map_err(|e| CliError::Io(e.to_string()))?;
        }
        w.flush().map_err(io)?;
    }
    Ok((report, dir))
}

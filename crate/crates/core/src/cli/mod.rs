//! `piston` command line: generate hull caches, estimate energies, tabulate
//! references.
//!
//! Exit status: 0 on success, 2 for configuration errors, 3 for I/O and
//! cache errors, 4 for numerical failures.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::bridges::{dz4_moment_of_streams, BridgeError, DZ4_CONTINUUM};
use crate::estimator::{
    self, delta_to_semiclassical, estimate_energy, write_delta_csv, write_energy_csv,
    EstimatorError, SweepRow,
};
use crate::hulls::{generate_hulls, load_hulls, save_hulls, CacheError, ConvexHull, HullError};
use crate::piston_region::{Head, PistonGeometry};
use crate::reference::{self, ReferenceError};

pub use config::RunConfig;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("hull cache {}: {source}", path.display())]
    Cache { path: PathBuf, source: CacheError },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Cache { .. } => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        match e {
            EstimatorError::TooFewHulls(_)
            | EstimatorError::MixedPointCounts { .. }
            | EstimatorError::NotHemisphere(_)
            | EstimatorError::Geometry(_) => CliError::Config(e.to_string()),
            EstimatorError::Io(source) => CliError::Io {
                path: PathBuf::from("<output>"),
                source,
            },
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<ReferenceError> for CliError {
    fn from(e: ReferenceError) -> Self {
        match e {
            ReferenceError::Quadrature(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<HullError> for CliError {
    fn from(e: HullError) -> Self {
        match e {
            HullError::Bridge(BridgeError::NoSteps) | HullError::TooFewLoops { .. } => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "piston",
    version,
    about = "Worldline Monte Carlo for the Casimir piston in a capped cylinder"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample loops, reduce them to hulls and write a hull cache.
    Generate,
    /// Energy at a single geometry, as one CSV row.
    Energy,
    /// Energies on the grid of a/r and R/r values, one ensemble for all rows.
    Sweep,
    /// <(Delta z)^4> of unit loops against pi^4/30.
    Moments,
    /// Table of closed-form reference values at one geometry.
    Reference,
    /// Residual E + 1/(96 pi a) for a hemispherical head.
    Compare,
}

/// Flags mirror the config-file keys and override them.
#[derive(Debug, Args)]
pub struct Overrides {
    /// key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Points (steps) per loop.
    #[arg(long = "n-points", global = true)]
    pub n_points: Option<String>,
    /// Number of hulls (loops for `moments`).
    #[arg(long, global = true)]
    pub hulls: Option<String>,
    /// Cylinder radius r (lengths are given in units of r).
    #[arg(long = "radius", global = true)]
    pub radius: Option<String>,
    /// Comma-separated piston heights a/r.
    #[arg(long = "a-over-r", global = true)]
    pub a_over_r: Option<String>,
    /// Comma-separated cap radii R/r; `flat` for a planar head.
    #[arg(long = "R-over-r", global = true)]
    pub cap_over_r: Option<String>,
    /// Planar head; replaces any R/r list.
    #[arg(long = "flat-head", global = true)]
    pub flat_head: bool,
    /// adaptive or fixed:<k>.
    #[arg(long, global = true)]
    pub quad: Option<String>,
    /// dirichlet or neumann (reference forces only).
    #[arg(long, global = true)]
    pub bc: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub cache: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<String>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let pairs = [
            ("seed", &self.seed),
            ("n_points", &self.n_points),
            ("hulls", &self.hulls),
            ("radius", &self.radius),
            ("a_over_r", &self.a_over_r),
            ("R_over_r", &self.cap_over_r),
            ("quad", &self.quad),
            ("bc", &self.bc),
            ("out", &self.out),
            ("cache", &self.cache),
            ("threads", &self.threads),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.flat_head {
            cfg.set("flat_head", "true")?;
        }
        Ok(cfg)
    }
}

/// Parse `args` (program name first) and run. Reports go to `out`,
/// warnings and progress to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}").map_err(stdout_error)?;
                return Ok(());
            }
            return Err(CliError::Config(e.to_string()));
        }
    };
    let cfg = cli.overrides.resolve()?;
    match cfg.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
            // the pool's closure must be Send, so report through buffers
            let (mut obuf, mut ebuf) = (Vec::new(), Vec::new());
            let result = pool.install(|| dispatch(&cli.command, &cfg, &mut obuf, &mut ebuf));
            err.write_all(&ebuf).map_err(stdout_error)?;
            out.write_all(&obuf).map_err(stdout_error)?;
            result
        }
        None => dispatch(&cli.command, &cfg, out, err),
    }
}

fn stdout_error(source: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn dispatch(
    command: &Command,
    cfg: &RunConfig,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    match command {
        Command::Generate => cmd_generate(cfg, out, err),
        Command::Energy => cmd_energy(cfg, out, err),
        Command::Sweep => cmd_sweep(cfg, out, err),
        Command::Moments => cmd_moments(cfg, out),
        Command::Reference => cmd_reference(cfg, out),
        Command::Compare => cmd_compare(cfg, out, err),
    }
}

pub fn cmd_generate(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let path = cfg
        .cache
        .clone()
        .or_else(|| cfg.out.clone())
        .ok_or_else(|| CliError::Config("generate needs --cache <path>".into()))?;
    let count = cfg.hull_count();
    if count == 0 {
        writeln!(err, "warning: hull count is 0, writing an empty cache").map_err(stdout_error)?;
    }
    let ensemble = generate_hulls(cfg.seed(), cfg.points_per_loop(), count, false)?;
    save_hulls(&path, cfg.seed(), &ensemble.hulls).map_err(|source| CliError::Cache {
        path: path.clone(),
        source,
    })?;
    let s = &ensemble.stats;
    writeln!(
        out,
        "wrote {} hulls to {}\nseed = {}\nn = {}\ndegenerate = {}\nmean vertices = {:.3} +- {:.3}\nmean faces = {:.3} +- {:.3}\nseconds per hull = {:.6}",
        ensemble.hulls.len(),
        path.display(),
        cfg.seed(),
        s.n,
        s.degenerate,
        s.mean_vertices,
        s.se_vertices,
        s.mean_faces,
        s.se_faces,
        s.mean_seconds
    )
    .map_err(stdout_error)?;
    Ok(())
}

/// The ensemble to estimate with, and its seed: a prefix of the cache if
/// one is configured, otherwise freshly generated loops.
pub fn load_ensemble(cfg: &RunConfig, err: &mut dyn Write) -> Result<(Vec<ConvexHull>, u64), CliError> {
    let Some(path) = &cfg.cache else {
        let n = cfg.points_per_loop();
        writeln!(err, "no cache given, generating {} hulls of {n} points", cfg.hull_count())
            .map_err(stdout_error)?;
        let e = generate_hulls(cfg.seed(), n, cfg.hull_count(), false)?;
        return Ok((e.hulls, cfg.seed()));
    };
    let cache = load_hulls(path).map_err(|source| CliError::Cache {
        path: path.clone(),
        source,
    })?;
    if let Some(seed) = cfg.seed {
        if seed != cache.master_seed {
            return Err(CliError::Config(format!(
                "cache {} was generated with seed {}, config asks for {seed}",
                path.display(),
                cache.master_seed
            )));
        }
    }
    if let Some(n) = cfg.n_points {
        if let Some(h) = cache.hulls.iter().find(|h| h.source_n() != n as u64) {
            return Err(CliError::Config(format!(
                "cache {} holds loops of {} points, config asks for n = {n}",
                path.display(),
                h.source_n()
            )));
        }
    }
    let mut hulls = cache.hulls;
    if let Some(k) = cfg.hulls {
        if k > hulls.len() {
            return Err(CliError::Config(format!(
                "cache {} holds {} hulls, {k} requested",
                path.display(),
                hulls.len()
            )));
        }
        hulls.truncate(k);
    }
    Ok((hulls, cache.master_seed))
}

fn geometries(cfg: &RunConfig) -> Result<Vec<PistonGeometry>, CliError> {
    let r = cfg.radius;
    let mut out = Vec::new();
    for &cap in &cfg.caps {
        for &a in &cfg.a_over_r {
            let head = estimator::cap_ratio_head(cap, r);
            out.push(
                PistonGeometry::new(a * r, r, head).map_err(|e| CliError::Config(e.to_string()))?,
            );
        }
    }
    Ok(out)
}

fn write_output(
    cfg: &RunConfig,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<(), EstimatorError>,
) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            f(&mut w).map_err(|e| match e {
                EstimatorError::Io(source) => CliError::Io {
                    path: path.clone(),
                    source,
                },
                other => other.into(),
            })
        }
        None => f(out).map_err(CliError::from),
    }
}

fn energy_rows(cfg: &RunConfig, err: &mut dyn Write) -> Result<Vec<SweepRow>, CliError> {
    let (hulls, seed) = load_ensemble(cfg, err)?;
    geometries(cfg)?
        .iter()
        .map(|g| {
            let est = estimate_energy(&hulls, g, cfg.quad)?;
            Ok(SweepRow::from_estimate(&est, seed)?)
        })
        .collect()
}

pub fn cmd_energy(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if cfg.a_over_r.len() != 1 || cfg.caps.len() != 1 {
        return Err(CliError::Config(
            "energy takes one a/r and one R/r value; use sweep for grids".into(),
        ));
    }
    let rows = energy_rows(cfg, err)?;
    write_output(cfg, out, |w| write_energy_csv(w, &rows))
}

pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let rows = energy_rows(cfg, err)?;
    write_output(cfg, out, |w| write_energy_csv(w, &rows))
}

pub fn cmd_compare(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if cfg.caps != [Some(1.0)] {
        return Err(CliError::Config("compare needs R/r = 1".into()));
    }
    let (hulls, _) = load_ensemble(cfg, err)?;
    let estimates = geometries(cfg)?
        .iter()
        .map(|g| estimate_energy(&hulls, g, cfg.quad))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = delta_to_semiclassical(&estimates)?;
    write_output(cfg, out, |w| write_delta_csv(w, &rows))
}

pub fn cmd_moments(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let n = cfg.points_per_loop();
    let loops = cfg.hull_count();
    let m = dz4_moment_of_streams(cfg.seed(), n, loops)
        .map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(
        out,
        "loops = {loops}\nn = {n}\n<dz^4> = {:.6} +- {:.6}\ncontinuum = {:.6}\nrelative deviation = {:+.4}\nz-score = {:+.2}",
        m.mean,
        m.std_error,
        DZ4_CONTINUUM,
        m.mean / DZ4_CONTINUUM - 1.0,
        m.z_score(DZ4_CONTINUUM)
    )
    .map_err(stdout_error)
}

pub fn cmd_reference(cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let r = cfg.radius;
    let a = cfg.a_over_r.first().copied().unwrap_or(1.0) * r;
    let head = estimator::cap_ratio_head(cfg.caps.first().copied().flatten(), r);
    let g = PistonGeometry::new(a, r, head).map_err(|e| CliError::Config(e.to_string()))?;
    let mut lines = vec![
        format!("geometry = {g}"),
        format!("boundary condition = {:?}", cfg.bc),
        format!("parallel plates energy = {:.7e}", reference::parallel_plates_energy(a, r)?),
        format!("PFA energy = {:.7e}", reference::pfa_energy(&g)?),
    ];
    if let Head::Spherical(cap) = head {
        lines.extend([
            format!("asymptotic energy = {:.7e}", reference::asymptotic_energy(a, r, cap)?),
            format!(
                "fitted asymptotic energy = {:.7e}",
                reference::fitted_asymptotic_energy(a, r, cap)?
            ),
            format!("semiclassical energy = {:.7e}", reference::semiclassical_energy(a, r, cap)?),
            format!(
                "semiclassical force = {:.7e}",
                reference::semiclassical_force(a, r, cap, cfg.bc)?
            ),
            format!(
                "semiclassical force (integral) = {:.7e}",
                reference::semiclassical_force_integral(a, r, cap, cfg.bc)?
            ),
            format!("periodic orbit energy = {:.7e}", reference::periodic_orbit_energy(cap)?),
        ]);
    }
    for line in lines {
        writeln!(out, "{line}").map_err(stdout_error)?;
    }
    Ok(())
}

//! Run configuration: built-in defaults, then a `key = value` file, then flags.

use std::fs;
use std::path::{Path, PathBuf};

use crate::bridges::DEFAULT_POINTS_PER_LOOP;
use crate::piston_region::QuadraturePolicy;
use crate::reference::BoundaryCondition;

use super::CliError;

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_HULLS: usize = 10_000;
pub const DEFAULT_A_OVER_R: [f64; 3] = [0.02, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Unset fields fall back to defaults, or to what a hull cache holds.
    pub seed: Option<u64>,
    pub n_points: Option<usize>,
    pub hulls: Option<usize>,
    pub radius: f64,
    pub a_over_r: Vec<f64>,
    /// R/r per head, `None` for a flat head.
    pub caps: Vec<Option<f64>>,
    pub quad: QuadraturePolicy,
    pub bc: BoundaryCondition,
    pub cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            n_points: None,
            hulls: None,
            radius: 1.0,
            a_over_r: DEFAULT_A_OVER_R.to_vec(),
            caps: vec![Some(1.0)],
            quad: QuadraturePolicy::default(),
            bc: BoundaryCondition::Dirichlet,
            cache: None,
            out: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn points_per_loop(&self) -> usize {
        self.n_points.unwrap_or(DEFAULT_POINTS_PER_LOOP)
    }

    pub fn hull_count(&self) -> usize {
        self.hulls.unwrap_or(DEFAULT_HULLS)
    }

    /// Apply one setting; `key` uses the file spelling (underscores) or the flag spelling.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |why: &str| CliError::Config(format!("{key} = {value:?}: {why}"));
        match key.as_str() {
            "seed" => {
                self.seed = Some(value.parse().map_err(|_| bad("expected an unsigned integer"))?)
            }
            "n_points" => {
                let n: usize = value.parse().map_err(|_| bad("expected a positive integer"))?;
                if n == 0 {
                    return Err(bad("must be positive"));
                }
                self.n_points = Some(n);
            }
            "hulls" => self.hulls = Some(value.parse().map_err(|_| bad("expected an integer"))?),
            "r" | "radius" => {
                let r: f64 = value.parse().map_err(|_| bad("expected a number"))?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(bad("must be positive"));
                }
                self.radius = r;
            }
            "a_over_r" => {
                let list = parse_list(value).map_err(|e| bad(&e))?;
                if list.is_empty() || list.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
                    return Err(bad("values must be positive"));
                }
                self.a_over_r = list;
            }
            "R_over_r" | "r_over_r" | "cap_over_r" => {
                let mut caps = Vec::new();
                for item in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    caps.push(parse_cap(item).map_err(|e| bad(&e))?);
                }
                if caps.is_empty() {
                    return Err(bad("empty list"));
                }
                self.caps = caps;
            }
            "flat_head" => {
                if parse_bool(value).map_err(|e| bad(&e))? {
                    self.caps = vec![None];
                }
            }
            "quad" => self.quad = value.parse().map_err(|e| bad(&format!("{e}")))?,
            "bc" => {
                self.bc = match value.to_ascii_lowercase().as_str() {
                    "d" | "dirichlet" => BoundaryCondition::Dirichlet,
                    "n" | "neumann" => BoundaryCondition::Neumann,
                    _ => return Err(bad("expected dirichlet or neumann")),
                }
            }
            "cache" => self.cache = Some(PathBuf::from(value)),
            "out" => self.out = Some(PathBuf::from(value)),
            "threads" => {
                let t: usize = value.parse().map_err(|_| bad("expected a positive integer"))?;
                if t == 0 {
                    return Err(bad("must be positive"));
                }
                self.threads = Some(t);
            }
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Apply every `key = value` line of `text`. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("{origin}:{}: expected key = value", no + 1))
            })?;
            self.set(k, v)
                .map_err(|e| CliError::Config(format!("{origin}:{}: {e}", no + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        self.apply_text(&text, &path.display().to_string())
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("{s:?} is not a number")))
        .collect()
}

fn parse_cap(item: &str) -> Result<Option<f64>, String> {
    match item.to_ascii_lowercase().as_str() {
        "flat" | "inf" | "infinity" => Ok(None),
        s => {
            let q: f64 = s.parse().map_err(|_| format!("{item:?} is not a number or flat"))?;
            if q.is_infinite() && q > 0.0 {
                Ok(None)
            } else if q >= 1.0 && q.is_finite() {
                Ok(Some(q))
            } else {
                Err(format!("R/r must be at least 1, got {item}"))
            }
        }
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

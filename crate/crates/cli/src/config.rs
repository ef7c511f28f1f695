//! Flat `key = value` configuration with typed keys.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use genuslab_core::equid::{Weighting, DEFAULT_COUNT_CAP};
use genuslab_core::genus::{GenusPolicy, PrimeSelection};

use crate::CliError;

pub const CACHE_ENV: &str = "GENUSLAB_CACHE";

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub p_max: u64,
    pub class_budget: usize,
    pub prime_selection: PrimeSelection,
    pub floor: u64,
    pub radii: Vec<f64>,
    pub weighting: Weighting,
    pub cache_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub seed: u64,
    pub count_cap: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            p_max: 50,
            class_budget: 20_000,
            prime_selection: PrimeSelection::SpinorMinimal,
            floor: 3,
            radii: vec![1.0, 1.5, 2.0],
            weighting: Weighting::Mass,
            cache_dir: PathBuf::from(".genuslab-cache"),
            workers: 0,
            seed: 24_301,
            count_cap: DEFAULT_COUNT_CAP,
        }
    }
}

fn bad(key: &str, value: &str) -> CliError {
    CliError::input(format!("invalid value `{value}` for config key `{key}`"))
}

fn positive<T: std::str::FromStr + PartialOrd + Default>(key: &str, value: &str) -> Result<T, CliError> {
    match value.parse::<T>() {
        Ok(v) if v > T::default() => Ok(v),
        _ => Err(bad(key, value)),
    }
}

pub fn parse_radii(value: &str) -> Result<Vec<f64>, CliError> {
    let radii: Vec<f64> = value
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad("radii", value)))
        .collect::<Result<_, _>>()?;
    if radii.is_empty() || radii.iter().any(|r| !r.is_finite() || *r <= 0.0) || radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("radii", value));
    }
    Ok(radii)
}

pub fn parse_weighting(value: &str) -> Result<Weighting, CliError> {
    match value {
        "mass" => Ok(Weighting::Mass),
        "uniform" => Ok(Weighting::Uniform),
        _ => Err(bad("weighting", value)),
    }
}

pub fn parse_selection(value: &str) -> Result<PrimeSelection, CliError> {
    match value {
        "spinor-minimal" => Ok(PrimeSelection::SpinorMinimal),
        "all" => Ok(PrimeSelection::All),
        _ => Err(bad("prime_selection", value)),
    }
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "p_max" => self.p_max = positive(key, value)?,
            "class_budget" => self.class_budget = positive(key, value)?,
            "prime_selection" => self.prime_selection = parse_selection(value)?,
            "floor" => {
                self.floor = value.parse().map_err(|_| bad(key, value))?;
                if self.floor < 3 {
                    return Err(bad(key, value));
                }
            }
            "radii" => self.radii = parse_radii(value)?,
            "weighting" => self.weighting = parse_weighting(value)?,
            "cache_dir" => self.cache_dir = PathBuf::from(value),
            "workers" => self.workers = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "count_cap" => self.count_cap = positive(key, value)?,
            _ => return Err(CliError::input(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("config line {}: expected `key = value`", i + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Defaults, then the file, then the cache environment variable.
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let mut cfg = Config::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        if let Some(dir) = std::env::var_os(CACHE_ENV) {
            cfg.cache_dir = PathBuf::from(dir);
        }
        Ok(cfg)
    }

    pub fn policy(&self) -> GenusPolicy {
        GenusPolicy {
            p_max: self.p_max,
            class_budget: self.class_budget,
            selection: self.prime_selection,
            descending: false,
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let radii: Vec<String> = self.radii.iter().map(|r| r.to_string()).collect();
        let selection = match self.prime_selection {
            PrimeSelection::SpinorMinimal => "spinor-minimal",
            PrimeSelection::All => "all",
        };
        let weighting = match self.weighting {
            Weighting::Mass => "mass",
            Weighting::Uniform => "uniform",
        };
        let _ = writeln!(s, "p_max = {}", self.p_max);
        let _ = writeln!(s, "class_budget = {}", self.class_budget);
        let _ = writeln!(s, "prime_selection = {selection}");
        let _ = writeln!(s, "floor = {}", self.floor);
        let _ = writeln!(s, "radii = {}", radii.join(","));
        let _ = writeln!(s, "weighting = {weighting}");
        let _ = writeln!(s, "cache_dir = {}", self.cache_dir.display());
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "count_cap = {}", self.count_cap);
        s
    }
}

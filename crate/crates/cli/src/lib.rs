//! Command-line front end: argument parsing, configuration, the genus cache
//! and batch scans over families of forms.

pub mod cache;
pub mod config;
pub mod scan;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use genuslab_core::equid::equid_experiment_capped;
use genuslab_core::{
    disc_homogeneous, genus_enumerate, genus_mass, good_place, spin_genus_partition, CompleteFlag, Error,
    GenusEnumeration, MassWeighting, QuadraticForm,
};
use serde_json::json;

use crate::cache::{cache_key, Cache};
use crate::config::{parse_radii, parse_selection, parse_weighting, Config};
use crate::scan::{family_forms, fit_rows, ScanResult, ScanRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError { code: EXIT_RUNTIME, message: message.into() }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_)
        | Error::NotSquare
        | Error::NotSymmetric
        | Error::NotPositiveDefinite
        | Error::DimensionOutOfRange(..)
        | Error::EntryTooLarge(_)
        | Error::InvalidArgument(_)
        | Error::BadPrime(..)
        | Error::OracleOutOfRange(_) => EXIT_INPUT,
        Error::Unsupported(_) => EXIT_UNSUPPORTED,
        Error::BudgetExhausted(_) | Error::RadiusTooLarge(_) => EXIT_RESOURCE,
        Error::InconsistentSpinorData(_) | Error::InsufficientData(_) | Error::DegenerateBasis => EXIT_RUNTIME,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: exit_code(&e), message: e.to_string() }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Parser, Debug)]
#[command(name = "genuslab", version, about = "Genera of positive-definite integral quadratic forms")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Skip the genus cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[arg(long, global = true)]
    p_max: Option<u64>,
    #[arg(long, global = true)]
    class_budget: Option<usize>,
    /// `spinor-minimal` or `all`.
    #[arg(long, global = true)]
    prime_selection: Option<String>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct EquidOpts {
    /// Comma-separated ascending radii.
    #[arg(long)]
    radii: Option<String>,
    /// `mass` or `uniform`.
    #[arg(long)]
    weighting: Option<String>,
    /// Largest number of lattice points counted per class.
    #[arg(long)]
    count_cap: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the classes of the genus of FORM.
    Genus {
        /// A form file, a JSON Gram matrix, or text `n` followed by rows.
        form: String,
        #[arg(long)]
        json: bool,
    },
    /// Partition the genus into spinor genera.
    SpinGenus {
        form: String,
        #[arg(long)]
        json: bool,
    },
    /// Mass of the genus, optionally split by spinor genus.
    Mass {
        form: String,
        #[arg(long)]
        per_spinor: bool,
    },
    /// Discriminant of the orthogonal homogeneous set of FORM.
    Disc { form: String },
    /// Smallest good prime and its ratio against the logarithmic bound.
    GoodPlace {
        form: String,
        #[arg(long)]
        floor: Option<u64>,
    },
    /// Ball counts over the genus against the ball volume.
    Equid {
        form: String,
        #[command(flatten)]
        opts: EquidOpts,
        /// Also write the report as JSON to this path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Scan a family `template:range` or a directory of form files.
    Scan {
        family: String,
        #[command(flatten)]
        opts: EquidOpts,
        #[arg(long)]
        floor: Option<u64>,
        /// Write the fits as JSON to this path.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Configuration commands.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
    /// Cache maintenance.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug)]
enum ConfigAction {
    /// Print the effective configuration.
    Show,
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    /// Remove unreadable or stale cache entries.
    Gc,
}

/// Reads a form from a file path, or parses the argument itself.
pub fn read_form(arg: &str) -> Result<QuadraticForm, CliError> {
    let path = Path::new(arg);
    let text = if !arg.trim_start().starts_with('[') && path.is_file() {
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {arg}: {e}")))?
    } else if arg.trim_start().starts_with('[') || arg.contains(char::is_whitespace) {
        arg.to_string()
    } else {
        return Err(CliError::input(format!("cannot read form file {arg}")));
    };
    QuadraticForm::parse(&text).map_err(CliError::from)
}

struct Session<'a> {
    config: Config,
    cache: Option<Cache>,
    err: &'a mut Vec<u8>,
}

impl Session<'_> {
    fn enumerate(&mut self, q: &QuadraticForm) -> Result<GenusEnumeration, CliError> {
        let policy = self.config.policy();
        let key = match self.cache {
            Some(_) => Some(cache_key(q, &policy)?),
            None => None,
        };
        if let (Some(cache), Some(key)) = (self.cache.as_mut(), key.as_ref()) {
            if let Some(g) = cache.get(key) {
                let _ = writeln!(self.err, "cache hit {key}");
                return Ok(g);
            }
            let _ = writeln!(self.err, "cache miss {key}");
        }
        let g = match genus_enumerate(q, &policy) {
            Err(Error::BudgetExhausted(partial)) => return Ok(*partial),
            r => r?,
        };
        if let (Some(cache), Some(key)) = (self.cache.as_ref(), key.as_ref()) {
            cache.put(key, &g)?;
        }
        Ok(g)
    }
}

fn load_config(global: &GlobalOpts) -> Result<Config, CliError> {
    let mut config = Config::load(global.config.as_deref())?;
    if let Some(d) = &global.cache_dir {
        config.cache_dir = d.clone();
    }
    if let Some(v) = global.p_max {
        config.set("p_max", &v.to_string())?;
    }
    if let Some(v) = global.class_budget {
        config.set("class_budget", &v.to_string())?;
    }
    if let Some(v) = &global.prime_selection {
        config.prime_selection = parse_selection(v)?;
    }
    if let Some(v) = global.workers {
        config.workers = v;
    }
    if let Some(v) = global.seed {
        config.seed = v;
    }
    Ok(config)
}

fn apply_equid_opts(config: &mut Config, opts: &EquidOpts) -> Result<(), CliError> {
    if let Some(r) = &opts.radii {
        config.radii = parse_radii(r)?;
    }
    if let Some(w) = &opts.weighting {
        config.weighting = parse_weighting(w)?;
    }
    if let Some(c) = opts.count_cap {
        config.set("count_cap", &c.to_string())?;
    }
    Ok(())
}

fn flag(g: &GenusEnumeration) -> &'static str {
    match g.complete_flag {
        CompleteFlag::Closed => "closed",
        CompleteFlag::BudgetExhausted => "budget_exhausted",
    }
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let mut config = load_config(&cli.global)?;
    let uses_cache = matches!(
        cli.command,
        Command::Genus { .. }
            | Command::SpinGenus { .. }
            | Command::Mass { .. }
            | Command::Equid { .. }
            | Command::Scan { .. }
    );
    let cache = if matches!(cli.command, Command::Cache { .. }) || (uses_cache && !cli.global.no_cache) {
        Some(Cache::open(&config.cache_dir)?)
    } else {
        None
    };
    if let Command::Equid { opts, .. } | Command::Scan { opts, .. } = &cli.command {
        apply_equid_opts(&mut config, opts)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::runtime(format!("cannot start workers: {e}")))?;
    let mut obuf: Vec<u8> = Vec::new();
    let mut ebuf: Vec<u8> = Vec::new();
    let result = pool.install(|| dispatch(cli.command, Session { config, cache, err: &mut ebuf }, &mut obuf));
    out.write_all(&obuf).map_err(|e| CliError::runtime(format!("cannot write output: {e}")))?;
    let _ = err.write_all(&ebuf);
    result
}

fn w(out: &mut Vec<u8>, s: &str) -> Result<(), CliError> {
    out.extend_from_slice(s.as_bytes());
    Ok(())
}

fn dispatch(command: Command, mut session: Session<'_>, out: &mut Vec<u8>) -> Result<(), CliError> {
    match command {
        Command::Genus { form, json } => {
            let q = read_form(&form)?;
            let g = session.enumerate(&q)?;
            let mass = genus_mass(&g, MassWeighting::Full)?.total;
            if json {
                w(out, &(to_json(&g) + "\n"))?;
            } else {
                w(out, &format!("classes={} mass={} {}\n", g.len(), mass, flag(&g)))?;
                for c in &g.classes {
                    w(out, &format!("{c}\n"))?;
                }
            }
            if g.is_closed() {
                Ok(())
            } else {
                Err(Error::BudgetExhausted(Box::new(g)).into())
            }
        }
        Command::SpinGenus { form, json } => {
            let q = read_form(&form)?;
            let g = session.enumerate(&q)?;
            if !g.is_closed() {
                return Err(Error::BudgetExhausted(Box::new(g)).into());
            }
            let part = spin_genus_partition(&g)?;
            if json {
                let v = json!({
                    "classes": g.classes.iter().map(|c| c.rows()).collect::<Vec<_>>(),
                    "labels": part.labels,
                    "group_order": part.group_order,
                    "sizes": part.sizes(),
                });
                w(out, &(to_json(&v) + "\n"))?;
            } else {
                w(
                    out,
                    &format!("classes={} spinor_genera={} group_order={}\n", g.len(), part.spinor_genus_count(), part.group_order),
                )?;
                for (c, l) in g.classes.iter().zip(&part.labels) {
                    w(out, &format!("{l} {c}\n"))?;
                }
            }
            Ok(())
        }
        Command::Mass { form, per_spinor } => {
            let q = read_form(&form)?;
            let g = session.enumerate(&q)?;
            if !g.is_closed() {
                return Err(Error::BudgetExhausted(Box::new(g)).into());
            }
            let weighting = if per_spinor { MassWeighting::PerSpinor } else { MassWeighting::Full };
            let m = genus_mass(&g, weighting)?;
            w(out, &format!("mass={}\n", m.total))?;
            for (l, v) in &m.per_spinor {
                w(out, &format!("spinor_genus={l} mass={v}\n"))?;
            }
            Ok(())
        }
        Command::Disc { form } => {
            let q = read_form(&form)?;
            let d = disc_homogeneous(&q)?;
            w(out, &(to_json(&d) + "\n"))
        }
        Command::GoodPlace { form, floor } => {
            let q = read_form(&form)?;
            let gp = good_place(&q, floor.unwrap_or(session.config.floor))?;
            w(out, &(to_json(&gp) + "\n"))
        }
        Command::Equid { form, json, .. } => {
            let q = read_form(&form)?;
            let g = session.enumerate(&q)?;
            if !g.is_closed() {
                return Err(Error::BudgetExhausted(Box::new(g)).into());
            }
            let c = &session.config;
            let report = equid_experiment_capped(&g, &c.radii, c.weighting, c.count_cap)?;
            w(out, &report.to_csv())?;
            if let Some(p) = json {
                write_file(&p, &(to_json(&report) + "\n"))?;
            }
            Ok(())
        }
        Command::Scan { family, floor, fits, .. } => {
            let forms = family_forms(&family)?;
            let floor = floor.unwrap_or(session.config.floor);
            let mut rows: Vec<ScanRow> = forms.iter().map(|(label, q)| scan_row(&mut session, label, q, floor)).collect();
            rows.sort_by(|a, b| {
                let key = |r: &ScanRow| num_bigint::BigInt::parse_bytes(r.det.as_bytes(), 10).unwrap_or_default();
                key(a).cmp(&key(b)).then_with(|| a.label.cmp(&b.label))
            });
            let result = ScanResult {
                family: family.clone(),
                fits: fit_rows(&rows, session.config.seed),
                rows,
            };
            w(out, &result.to_csv())?;
            if let Some(p) = fits {
                write_file(&p, &(to_json(&result.fits) + "\n"))?;
            }
            if let Some(c) = &session.cache {
                let _ = writeln!(session.err, "cache hits={} misses={}", c.hits, c.misses);
            }
            let failed = result.rows.iter().filter(|r| r.status != "ok").count();
            if failed > 0 {
                let _ = writeln!(session.err, "{failed} of {} rows did not complete", result.rows.len());
            }
            Ok(())
        }
        Command::Config { action: ConfigAction::Show } => w(out, &session.config.render()),
        Command::Cache { action: CacheAction::Gc } => {
            let cache = session.cache.as_ref().expect("cache opened");
            let (kept, removed) = cache.gc()?;
            w(out, &format!("kept={kept} removed={removed}\n"))
        }
    }
}

fn scan_row(session: &mut Session<'_>, label: &str, q: &QuadraticForm, floor: u64) -> ScanRow {
    let mut row = ScanRow {
        label: label.to_string(),
        form: q.to_string(),
        det: q.det().to_string(),
        classes: None,
        spinor_genera: None,
        mass: None,
        disc: None,
        log2_disc: None,
        good_prime: None,
        good_place_ratio: None,
        sup_discrepancy: None,
        status: "ok".into(),
        report: None,
    };
    let mut failures: Vec<String> = Vec::new();
    let mut note = |stage: &str, e: CliError| failures.push(format!("{stage}:{}", e.code));
    match disc_homogeneous(q) {
        Ok(d) => {
            row.disc = Some(d.disc);
            row.log2_disc = Some(d.log2_disc);
        }
        Err(e) => note("disc", e.into()),
    }
    match good_place(q, floor) {
        Ok(gp) => {
            row.good_prime = Some(gp.prime);
            row.good_place_ratio = Some(gp.ratio);
        }
        Err(e) => note("good_place", e.into()),
    }
    match session.enumerate(q) {
        Ok(g) if g.is_closed() => {
            row.classes = Some(g.len());
            match genus_mass(&g, MassWeighting::Full) {
                Ok(m) => row.mass = Some(m.total.to_string()),
                Err(e) => note("mass", e.into()),
            }
            match spin_genus_partition(&g) {
                Ok(p) => row.spinor_genera = Some(p.spinor_genus_count()),
                Err(e) => note("spin_genus", e.into()),
            }
            let c = &session.config;
            match equid_experiment_capped(&g, &c.radii, c.weighting, c.count_cap) {
                Ok(r) => {
                    row.sup_discrepancy = Some(r.sup_discrepancy);
                    row.report = Some(r);
                }
                Err(e) => note("equid", e.into()),
            }
        }
        Ok(g) => {
            row.classes = Some(g.len());
            note("genus", Error::BudgetExhausted(Box::new(g)).into());
        }
        Err(e) => note("genus", e),
    }
    if !failures.is_empty() {
        row.status = failures.join(";");
    }
    row
}

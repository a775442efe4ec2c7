//! Command-line front end. Exit codes: 0 success, 1 parse or validation failure, 2 solver or I/O failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use super::config::{config_from_table, Config};
use super::{audit_battery, bundled, bundled_names, run_scenario, validate, ScenarioError, RULES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "poromech", version, about = "Two-phase flow in deformable porous media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the transient problem
    Run(RunArgs),
    /// Validate a scenario and estimate the weak-coupling constant
    Check {
        #[command(flatten)]
        source: Source,
        /// Print the assumption-to-rule mapping
        #[arg(long)]
        explain: bool,
    },
    /// Independent runs over values of one parameter
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Dotted key path such as `material.lame_lambda_pa`, or `eps_final`
        #[arg(long)]
        param: String,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Property battery on the configured scenario
    Audit {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Scenario file, given positionally or with `--config`; `builtin:<name>` selects a bundled one.
#[derive(Debug, Args)]
pub struct Source {
    #[arg(value_name = "CONFIG")]
    pub path: Option<String>,
    #[arg(long = "config", value_name = "CONFIG", conflicts_with = "path")]
    pub flag: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Truncate the ε schedule at this value
    #[arg(long)]
    pub eps_final: Option<f64>,
    /// Time step
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

struct Loaded {
    table: toml::Table,
    base_dir: PathBuf,
}

fn load(source: &Source) -> Result<Loaded, ScenarioError> {
    let name = source
        .path
        .as_deref()
        .or(source.flag.as_deref())
        .ok_or_else(|| ScenarioError::Parse("no scenario given (path or builtin:<name>)".into()))?;
    let (text, base_dir) = if let Some(b) = name.strip_prefix("builtin:") {
        let text = bundled(b).ok_or_else(|| {
            ScenarioError::Parse(format!(
                "unknown bundled scenario `{b}` (available: {})",
                bundled_names().collect::<Vec<_>>().join(", ")
            ))
        })?;
        (text.to_string(), PathBuf::new())
    } else {
        let path = Path::new(name);
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        (text, path.parent().map(Path::to_path_buf).unwrap_or_default())
    };
    let table = toml::from_str(&text).map_err(|e: toml::de::Error| ScenarioError::Parse(e.to_string()))?;
    Ok(Loaded { table, base_dir })
}

fn to_config(table: toml::Table, base_dir: &Path) -> Result<Config, ScenarioError> {
    let mut cfg = config_from_table(table)?;
    cfg.base_dir = base_dir.to_path_buf();
    Ok(cfg)
}

/// Keeps the schedule entries above `eps` and ends it at `eps`.
pub fn truncate_schedule(schedule: &[f64], eps: f64) -> Vec<f64> {
    let mut out: Vec<f64> = schedule.iter().copied().filter(|e| *e > eps).collect();
    out.push(eps);
    out
}

fn apply_overrides(cfg: &mut Config, args: &RunArgs) {
    if let Some(s) = args.seed {
        cfg.run.seed = s;
    }
    if let Some(e) = args.eps_final {
        cfg.controls.eps_schedule = truncate_schedule(&cfg.controls.eps_schedule, e);
    }
    if let Some(h) = args.h {
        cfg.controls.h = h;
    }
    if let Some(n) = args.steps {
        cfg.run.steps = n;
    }
}

/// Sets `path` (dot separated) in `table`, creating intermediate tables.
pub fn set_path(table: &mut toml::Table, path: &str, value: toml::Value) -> Result<(), ScenarioError> {
    let keys: Vec<&str> = path.split('.').collect();
    let (last, inner) = keys.split_last().expect("split yields at least one key");
    let mut cur = table;
    for k in inner {
        let entry = cur
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| ScenarioError::Parse(format!("`{k}` in `{path}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Parses a sweep value as a TOML scalar, falling back to a string.
pub fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    toml::from_str::<toml::Table>(&doc)
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn effective_text(cfg: &Config) -> String {
    toml::to_string(cfg).unwrap_or_default()
}

fn report(err: &ScenarioError) -> i32 {
    eprintln!("error: {err}");
    match err {
        ScenarioError::Parse(_) | ScenarioError::Field { .. } | ScenarioError::Validation(_) => EXIT_INVALID,
        _ => EXIT_SOLVER,
    }
}

fn run_one(cfg: &Config, out: &Path, quiet: bool) -> i32 {
    match run_scenario(cfg, &effective_text(cfg), out, quiet) {
        Ok(r) => match r.failure {
            None => {
                if !quiet {
                    eprintln!("{} steps written to {}", r.manifest.steps_completed, out.display());
                }
                EXIT_OK
            }
            Some(e) => {
                eprintln!(
                    "solver failure after {} of {} steps: {e}",
                    r.manifest.steps_completed, r.manifest.steps_requested
                );
                EXIT_SOLVER
            }
        },
        Err(e) => report(&e),
    }
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '.' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn sweep(run: &RunArgs, param: &str, values: &[String]) -> Result<i32, ScenarioError> {
    let loaded = load(&run.source)?;
    let mut jobs = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        let mut table = loaded.table.clone();
        let eps_final = if param == "eps_final" {
            Some(
                v.parse::<f64>()
                    .map_err(|e| ScenarioError::Parse(format!("eps_final `{v}`: {e}")))?,
            )
        } else {
            set_path(&mut table, param, parse_value(v))?;
            None
        };
        let mut cfg = to_config(table, &loaded.base_dir)?;
        apply_overrides(&mut cfg, run);
        if let Some(e) = eps_final {
            cfg.controls.eps_schedule = truncate_schedule(&cfg.controls.eps_schedule, e);
        }
        let dir = run.out.join(format!("{i:03}_{}_{}", sanitize(param), sanitize(v)));
        jobs.push((cfg, dir));
    }
    let codes: Vec<i32> = jobs.par_iter().map(|(cfg, dir)| run_one(cfg, dir, true)).collect();
    for ((_, dir), code) in jobs.iter().zip(&codes) {
        eprintln!("{}: exit {code}", dir.display());
    }
    Ok(codes.into_iter().max().unwrap_or(EXIT_OK))
}

fn check(source: &Source, explain: bool) -> Result<i32, ScenarioError> {
    if explain {
        for (label, rule) in RULES {
            println!("{label:<9} {rule}");
        }
    }
    let loaded = load(source)?;
    let cfg = to_config(loaded.table, &loaded.base_dir)?;
    let r = validate(&cfg);
    eprint!("{r}");
    if let Some(w) = &r.weak_coupling {
        println!("C1 estimate: {:.6e}", w.c1_estimate);
        println!("H7 margin (lambda - M b^2 C1): {:.6e}", w.margin);
    }
    Ok(if r.is_ok() { EXIT_OK } else { EXIT_INVALID })
}

fn audit(source: &Source, samples: usize, seed: Option<u64>) -> Result<i32, ScenarioError> {
    let loaded = load(source)?;
    let mut cfg = to_config(loaded.table, &loaded.base_dir)?;
    if let Some(s) = seed {
        cfg.run.seed = s;
    }
    let sc = cfg.build()?;
    let checks = audit_battery(&sc, samples)?;
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        println!(
            "{} {:<48} {:>13.6e} (limit {:.1e})",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.value,
            c.limit
        );
    }
    Ok(if ok { EXIT_OK } else { EXIT_SOLVER })
}

fn init_threads() {
    if let Some(n) = std::env::var("POROMECH_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    let result = match &cli.command {
        Command::Run(args) => load(&args.source).and_then(|l| {
            let mut cfg = to_config(l.table, &l.base_dir)?;
            apply_overrides(&mut cfg, args);
            Ok(run_one(&cfg, &args.out, args.quiet))
        }),
        Command::Check { source, explain } => check(source, *explain),
        Command::Sweep { run, param, values } => sweep(run, param, values),
        Command::Audit { source, samples, seed } => audit(source, *samples, *seed),
    };
    result.unwrap_or_else(|e| report(&e))
}

//! The `orlicz-lab` command line: norms, constants, verification batteries
//! and the sharpness probe, driven by a JSON experiment config.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::config::{BuiltFunction, ConfigError, ConfigFile};
use crate::constants::{k1_phi, kp_pair};
use crate::error::Error;
use crate::function::Axis;
use crate::norms::{
    gauge_norm_1d_report, gauge_norm_2d_report, lp_norm, repeated_norm_report, Norm1D, RepeatedNormReport,
};
use crate::report::{self, num};
use crate::verify::{
    battery, run_battery, sharpness_probe, BatterySpec, ExperimentConfig, NamedFunction, StatementExponent,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Parser)]
#[command(name = "orlicz-lab", version, about = "Weighted Orlicz norms and product-space Poincaré inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Experiment config (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for JSON/CSV reports and the run manifest.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overrides the battery seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, env = "ORLICZ_LAB_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub statement_exponent: Option<ExponentArg>,
    /// Relative tolerance for the inequality checks.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Scales C₁; negative controls only.
    #[arg(long, global = true, hide = true)]
    pub c1_scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExponentArg {
    Proof,
    Statement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Gauge1d,
    Gauge2d,
    Lp,
    Mixed,
    Hat,
    Iterated,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluates a norm of the config's `function`.
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        /// Variable (1 or 2) for the one-dimensional kinds.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        axis: u8,
    },
    /// Computes K and K̃ along one axis.
    Kconst {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        axis: u8,
    },
    /// Runs the verification battery; exits 1 if any check fails.
    Verify,
    /// Ramp-family ratio table along one axis.
    Probe {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        axis: Option<u8>,
        #[arg(long)]
        family_size: Option<usize>,
        #[arg(long)]
        decades: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Norm { .. } => "norm",
            Command::Kconst { .. } => "kconst",
            Command::Verify => "verify",
            Command::Probe { .. } => "probe",
        }
    }
}

fn axis_of(a: u8) -> Axis {
    if a == 2 {
        Axis::Y
    } else {
        Axis::X
    }
}

struct Run {
    file: ConfigFile,
    cfg: ExperimentConfig,
    config_path: PathBuf,
    seed: u64,
}

impl Run {
    fn load(common: &Common) -> Result<Self, CliError> {
        let path = common.config.clone().ok_or_else(|| CliError::Usage("--config is required".into()))?;
        let file = ConfigFile::load(&path)?;
        let mut cfg = file.experiment()?;
        if let Some(e) = common.statement_exponent {
            cfg.statement_exponent = match e {
                ExponentArg::Proof => StatementExponent::Proof,
                ExponentArg::Statement => StatementExponent::Statement,
            };
        }
        if let Some(t) = common.tolerance {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--tolerance {t} is not a valid tolerance")));
            }
            cfg.tol_verify = t;
        }
        if let Some(s) = common.c1_scale {
            cfg.c1_scale = s;
        }
        let seed = common.seed.or(file.battery.as_ref().map(|b| b.seed)).unwrap_or(0);
        Ok(Self { file, cfg, config_path: path, seed })
    }

    fn function(&self) -> Result<BuiltFunction, CliError> {
        let spec = self.file.function.as_ref().ok_or_else(|| CliError::Usage("config has no `function`".into()))?;
        spec.build().map_err(|source| ConfigError::Invalid { field: "function".into(), source }.into())
    }
}

/// What a command produced: the document printed to stdout, files for
/// `--out`, and the exit code.
struct Output {
    stdout: Value,
    files: Vec<(String, Vec<u8>)>,
    code: i32,
}

fn json_file(name: &str, v: &Value) -> (String, Vec<u8>) {
    let mut bytes = serde_json::to_vec_pretty(v).expect("JSON values serialize");
    bytes.push(b'\n');
    (name.to_string(), bytes)
}

fn repeated_json(r: &RepeatedNormReport) -> Value {
    json!({
        "subdivisions": r.subdivisions,
        "last_change": num(r.last_change),
        "converged": r.converged,
    })
}

fn cmd_norm(run: &Run, kind: NormKind, axis: Axis) -> Result<Output, CliError> {
    let cfg = &run.cfg;
    let phi = &cfg.phi;
    let (m, p) = match axis {
        Axis::X => (&cfg.mu.first, cfg.p1),
        Axis::Y => (&cfg.mu.second, cfg.p2),
    };
    let f = run.function()?;
    let wrong_dim = |want: &str| CliError::Usage(format!("norm kind {kind:?} needs a {want} function"));
    let mut doc = json!({ "kind": format!("{kind:?}").to_lowercase() });
    let value = match (kind, &f) {
        (NormKind::Gauge1d, BuiltFunction::OneD(g)) => {
            let r = gauge_norm_1d_report(phi, m, g)?;
            doc["modular_evaluations"] = json!(r.modular_evaluations);
            doc["axis"] = json!(if axis == Axis::X { 1 } else { 2 });
            r.value
        }
        (NormKind::Lp, BuiltFunction::OneD(g)) => {
            doc["axis"] = json!(if axis == Axis::X { 1 } else { 2 });
            doc["p"] = num(p);
            lp_norm(m, p, g)?
        }
        (NormKind::Gauge1d | NormKind::Lp, BuiltFunction::TwoD(_)) => return Err(wrong_dim("one-dimensional")),
        (_, BuiltFunction::OneD(_)) => return Err(wrong_dim("two-dimensional")),
        (NormKind::Gauge2d, BuiltFunction::TwoD(g)) => {
            let r = gauge_norm_2d_report(phi, &cfg.mu, g)?;
            doc["modular_evaluations"] = json!(r.modular_evaluations);
            r.value
        }
        (_, BuiltFunction::TwoD(g)) => {
            let (m1, m2) = (&cfg.mu.first, &cfg.mu.second);
            let r = match kind {
                NormKind::Mixed => repeated_norm_report(
                    g,
                    Axis::X,
                    Norm1D::Lp { measure: m1, p: cfg.p1 },
                    Norm1D::Gauge { measure: m2, phi },
                )?,
                NormKind::Hat => repeated_norm_report(
                    g,
                    Axis::Y,
                    Norm1D::Lp { measure: m2, p: cfg.p2 },
                    Norm1D::Lp { measure: m1, p: cfg.s1 },
                )?,
                _ => repeated_norm_report(
                    g,
                    Axis::X,
                    Norm1D::Gauge { measure: m1, phi },
                    Norm1D::Gauge { measure: m2, phi },
                )?,
            };
            doc["refinement"] = repeated_json(&r);
            r.value
        }
    };
    doc["value"] = num(value);
    Ok(Output { files: vec![json_file("norm.json", &doc)], stdout: doc, code: EXIT_OK })
}

fn cmd_kconst(run: &Run, axis: Axis) -> Result<Output, CliError> {
    let cfg = &run.cfg;
    let (mu, nu, w, p) = match axis {
        Axis::X => (&cfg.mu.first, &cfg.nu.first, &cfg.w.first, cfg.p1),
        Axis::Y => (&cfg.mu.second, &cfg.nu.second, &cfg.w.second, cfg.p2),
    };
    let (k, kt) = if p == 1.0 {
        let k = k1_phi(&cfg.phi, mu, nu, w)?;
        (k.clone(), k)
    } else {
        kp_pair(&cfg.phi, mu, nu, w, p)?
    };
    let constant = if p == 1.0 { k.value } else { cfg.phi.c0()? * k.value };
    let doc = json!({
        "K": num(k.value),
        "K_tilde": num(kt.value),
        "axis": if axis == Axis::X { 1 } else { 2 },
        "p": num(p),
        "single_sup": p == 1.0,
        "constant": num(constant),
        "report": report::kconstant_json(&k),
        "tilde_report": report::kconstant_json(&kt),
    });
    Ok(Output { files: vec![json_file("kconst.json", &doc)], stdout: doc, code: EXIT_OK })
}

fn cmd_verify(run: &Run) -> Result<Output, CliError> {
    let cfg = &run.cfg;
    let spec = match &run.file.battery {
        Some(b) => b.spec(Some(run.seed)),
        None => BatterySpec { seed: run.seed, ..BatterySpec::default() },
    };
    let mut functions = battery(cfg.x_interval(), cfg.y_interval(), &spec)?;
    if run.file.function.is_some() {
        match run.function()? {
            BuiltFunction::TwoD(f) => functions.push(NamedFunction::new("config_function", f)),
            BuiltFunction::OneD(_) => return Err(CliError::Usage("verify needs a two-dimensional `function`".into())),
        }
    }
    let rows = run_battery(cfg, &functions)?;
    let failed: Vec<_> = rows.iter().filter(|r| !r.report.passed).collect();
    let skipped = rows.iter().filter(|r| r.report.status == crate::verify::Status::Skipped).count();
    for row in &failed {
        eprintln!(
            "FAILED {}",
            serde_json::to_string_pretty(&report::verification_json(&row.report)).unwrap_or_default()
        );
    }
    let reports: Vec<Value> = rows.iter().map(|r| report::verification_json(&r.report)).collect();
    let summary = json!({
        "checks": rows.len(),
        "passed": rows.len() - failed.len() - skipped,
        "failed": failed.len(),
        "skipped": skipped,
        "functions": functions.len(),
        "seed": run.seed,
    });
    let files = vec![
        ("summary.csv".to_string(), report::csv_bytes(&rows, run.seed)),
        json_file("reports.json", &json!({ "summary": summary, "reports": reports })),
    ];
    let code = if failed.is_empty() { EXIT_OK } else { EXIT_FAILED };
    Ok(Output { stdout: summary, files, code })
}

fn cmd_probe(
    run: &Run,
    axis: Option<u8>,
    family_size: Option<usize>,
    decades: Option<usize>,
) -> Result<Output, CliError> {
    let probe = run.file.probe.as_ref();
    let axis = axis.or(probe.map(|p| p.axis)).unwrap_or(2);
    if !(1..=2).contains(&axis) {
        return Err(ConfigError::Invalid {
            field: "probe.axis".into(),
            source: Error::InvalidParameter(format!("axis must be 1 or 2, got {axis}")),
        }
        .into());
    }
    let family_size = family_size.or(probe.map(|p| p.family_size)).unwrap_or(9);
    let decades = decades.or(probe.map(|p| p.decades)).unwrap_or(5);
    let r = sharpness_probe(&run.cfg, axis_of(axis), family_size, decades)?;
    let doc = report::sharpness_json(&r);
    Ok(Output { files: vec![json_file("probe.json", &doc)], stdout: doc, code: EXIT_OK })
}

fn write_outputs(
    dir: &Path,
    run: &Run,
    command: &str,
    files: &[(String, Vec<u8>)],
    started: Instant,
) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        report::write_atomic(&path, bytes).map_err(io(&path))?;
    }
    let manifest = json!({
        "config": run.config_path.display().to_string(),
        "command": command,
        "seed": run.seed,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_clock_seconds": num(started.elapsed().as_secs_f64()),
        "result_files": files.iter().map(|(n, _)| n.as_str()).collect::<Vec<_>>(),
    });
    let path = dir.join("manifest.json");
    report::write_json(&path, &manifest).map_err(io(&path))
}

fn execute(cli: &Cli, started: Instant) -> Result<i32, CliError> {
    if let Some(jobs) = cli.common.jobs {
        // A second initialisation (e.g. in-process tests) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let run = Run::load(&cli.common)?;
    let out = match &cli.command {
        Command::Norm { kind, axis } => cmd_norm(&run, *kind, axis_of(*axis))?,
        Command::Kconst { axis } => cmd_kconst(&run, axis_of(*axis))?,
        Command::Verify => cmd_verify(&run)?,
        Command::Probe { axis, family_size, decades } => cmd_probe(&run, *axis, *family_size, *decades)?,
    };
    if let Some(dir) = &cli.common.out {
        write_outputs(dir, &run, cli.command.name(), &out.files, started)?;
    }
    let mut stdout = std::io::stdout().lock();
    let text = serde_json::to_string_pretty(&out.stdout).expect("JSON values serialize");
    match writeln!(stdout, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            return Err(CliError::Io { path: "stdout".into(), source: e });
        }
        _ => {}
    }
    Ok(out.code)
}

/// Runs the parsed command and returns the process exit code. Errors are
/// reported on stderr.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli, Instant::now()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn hidden_flag_parses() {
        let cli = Cli::try_parse_from(["orlicz-lab", "verify", "--config", "x.json", "--c1-scale", "0.5"]).unwrap();
        assert_eq!(cli.common.c1_scale, Some(0.5));
        assert!(Cli::try_parse_from(["orlicz-lab", "kconst", "--axis", "3"]).is_err());
    }
}

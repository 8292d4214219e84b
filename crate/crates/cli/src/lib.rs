//! Front end for `derham-core`: reads a system from a JSON config or a
//! preset flag and writes CSV grids or JSON reports.

pub mod config;
pub mod error;

use std::f64::consts::LN_2;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use derham_core::analysis::singular_dim_upper_bound_with;
use derham_core::measure::{entropy_rate_of_path, neg_log_interval_measure, DEFAULT_SEED};
use derham_core::solution::f_at_dyadic;
use derham_core::*;
use serde_json::{json, Value};

pub use config::{SystemConfig, SCHEMA};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "derham-lft",
    version,
    about = "De Rham functional equations with linear fractional maps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check admissibility and print the derived constants.
    Validate(Common),
    /// Evaluate f on a dyadic grid (CSV), or at one point with --x (JSON).
    Eval(EvalArgs),
    /// Evaluate f on a dyadic grid (CSV).
    Plot(GridArgs),
    /// Absolutely continuous or singular.
    Classify(ClassifyArgs),
    /// Dimension bounds of the measure with distribution function f.
    Dimension(ClassifyArgs),
    /// Sample digits of a random point and estimate the entropy rate.
    Sample(SampleArgs),
    /// Stationary-measure and change-of-measure checks.
    Stationary(StationaryArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exact,
    Approx,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Approx => Mode::Approx,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON system configuration.
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with = "preset",
        required_unless_present = "preset"
    )]
    pub config: Option<PathBuf>,
    /// `lebesgue:P` or `walk:U`.
    #[arg(long, value_name = "NAME:PARAM")]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Write output here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: Common,
    /// Grid points j / 2^K.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=20))]
    pub depth: u32,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Evaluate at this point only.
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Require the entropy-defect bound (fails when condition (i) holds).
    #[arg(long)]
    pub defect: bool,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of digits.
    #[arg(short = 'n', default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Include the sampled digits in the report.
    #[arg(long)]
    pub digits: bool,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(1..=20))]
    pub depth: u32,
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    /// Also run the change-of-measure check with cells of this depth.
    #[arg(long)]
    pub quad_depth: Option<u32>,
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Validate(c) => validate(c, stdout),
        Command::Eval(a) => match &a.x {
            Some(x) => eval_point(&a.grid.common, x, a.tol, stdout),
            None => grid(&a.grid, stdout),
        },
        Command::Plot(a) => grid(a, stdout),
        Command::Classify(a) => classify_cmd(a, stdout, stderr),
        Command::Dimension(a) => dimension(a, stdout),
        Command::Sample(a) => sample(a, stdout),
        Command::Stationary(a) => stationary(a, stdout),
    }
}

fn load(common: &Common) -> Result<SystemConfig, CliError> {
    match (&common.config, &common.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            SystemConfig::from_json(&text)
        }
        (None, Some(p)) => SystemConfig::from_preset_flag(p),
        (None, None) => Err(CliError::Parse("need --config or --preset".into())),
    }
}

fn load_system(common: &Common) -> Result<(SystemConfig, DeRhamSystem), CliError> {
    let cfg = load(common)?;
    let sys = cfg.build(common.mode.map(Mode::from))?;
    Ok((cfg, sys))
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn emit_json(common: &Common, mut report: Value, stdout: &mut dyn Write) -> Result<(), CliError> {
    report["schema"] = json!(SCHEMA);
    let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
    text.push('\n');
    emit(common.out.as_deref(), &text, stdout)
}

fn matrix_json(m: &MoebiusMatrix) -> Value {
    json!(m.entries())
}

fn system_json(cfg: &SystemConfig, sys: &DeRhamSystem) -> Value {
    json!({
        "source": cfg.describe(),
        "label": cfg.label,
        "A0": matrix_json(sys.a0()),
        "A1": matrix_json(sys.a1()),
        "mode": sys.mode(),
    })
}

fn validate(common: &Common, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = load(common)?;
    match cfg.build(common.mode.map(Mode::from)) {
        Ok(sys) => {
            let report = json!({
                "valid": true,
                "system": system_json(&cfg, &sys),
                "conditions": {"A1": true, "A2": true, "A3": true},
                "alpha": sys.alpha(),
                "beta": sys.beta(),
                "gamma": sys.gamma(),
                "fixed_points": sys.fixed_points(),
            });
            emit_json(common, report, stdout)?;
            Ok(0)
        }
        Err(CliError::Invalid(violations)) => {
            let failed = |c: Condition| violations.iter().any(|v| v.condition == c);
            let report = json!({
                "valid": false,
                "source": cfg.describe(),
                "conditions": {
                    "A1": !failed(Condition::A1),
                    "A2": !failed(Condition::A2),
                    "A3": !failed(Condition::A3),
                },
                "violations": violations,
            });
            emit_json(common, report, stdout)?;
            Ok(1)
        }
        Err(e) => Err(e),
    }
}

fn grid(args: &GridArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (_, sys) = load_system(&args.common)?;
    let k = args.depth;
    let n = 1u64 << k;
    let mut text = String::from("x,f_lower,f_upper\n");
    for j in 0..=n {
        let x = j as f64 / n as f64;
        let v = f_at_dyadic(&sys, j, k).to_f64();
        text.push_str(&format!("{x},{v},{v}\n"));
    }
    emit(args.common.out.as_deref(), &text, stdout)?;
    Ok(0)
}

fn eval_point(common: &Common, x: &str, tol: f64, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (cfg, sys) = load_system(common)?;
    if !(tol > 0.0) {
        return Err(CliError::Parse(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    let x = match sys.mode() {
        Mode::Exact => Scalar::parse_exact(x)?,
        Mode::Approx => Scalar::parse(x)?.to_mode(Mode::Approx),
    };
    let f = eval(&sys, &x, tol)?;
    let report = json!({
        "system": system_json(&cfg, &sys),
        "x": x,
        "f": f,
        "tol": tol,
    });
    emit_json(common, report, stdout)?;
    Ok(0)
}

fn bounds_json(b: &DimensionBounds) -> Value {
    json!({
        "nats": {"theta1": b.theta1, "theta2": b.theta2},
        "dimension": {"upper": b.dim_upper, "lower": b.dim_lower},
        "argmax_location": b.argmax_location,
    })
}

fn classify_cmd(
    args: &ClassifyArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    let (cfg, sys) = load_system(&args.common)?;
    let report = classify(&sys);
    if report.exactness == Mode::Approx {
        let _ = writeln!(
            stderr,
            "warning: approximate classification; conditions (i) and (ii) tested to relative tolerance {:e}",
            analysis::CONDITION_TOL
        );
    }
    let mut out = json!({
        "system": system_json(&cfg, &sys),
        "verdict": report.verdict.name(),
        "condition_i": report.condition_i,
        "condition_ii": report.condition_ii,
        "exactness": report.exactness,
    });
    match &report.verdict {
        Verdict::AbsolutelyContinuous { c0 } => {
            if args.defect {
                return Err(Error::ConditionHolds.into());
            }
            let (n0, n1) = verify_normal_form(&sys)?;
            out["c0"] = json!(c0);
            out["density"] = json!("(1 + 2 c0) / (-2 c0 x + 1 + 2 c0)^2");
            out["normal_form"] = json!({"A0": matrix_json(&n0), "A1": matrix_json(&n1)});
        }
        Verdict::Singular {
            bounds,
            defect_bound,
        } => {
            if args.defect && defect_bound.is_none() {
                return Err(Error::ConditionHolds.into());
            }
            out["dim_upper"] = json!(bounds.dim_upper);
            out["dim_lower"] = json!(bounds.dim_lower);
            out["bounds"] = bounds_json(bounds);
            out["defect_bound"] = json!(defect_bound);
        }
    }
    emit_json(&args.common, out, stdout)?;
    Ok(0)
}

fn dimension(args: &ClassifyArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (cfg, sys) = load_system(&args.common)?;
    let mut out = bounds_json(&dimension_bounds(&sys));
    out["system"] = system_json(&cfg, &sys);
    out["alpha"] = json!(sys.alpha());
    out["beta"] = json!(sys.beta());
    out["gamma"] = json!(sys.gamma());
    if args.defect {
        let eps = epsilon0(&sys)?;
        let bound = singular_dim_upper_bound_with(&sys, &eps)?;
        out["defect"] = json!({"epsilon0": eps, "dim_upper_bound": bound});
    }
    emit_json(&args.common, out, stdout)?;
    Ok(0)
}

fn sample(args: &SampleArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = load(&args.common)?;
    // Exact states grow without bound along a path; sample in floats unless asked.
    let mode = args.common.mode.map(Mode::from).unwrap_or(Mode::Approx);
    let sys = cfg.build(Some(mode))?;
    let path = sample_path(&sys, args.n, args.seed);
    let rate = entropy_rate_of_path(&sys, &path, path.len());
    let direct = if path.is_empty() {
        0.0
    } else {
        neg_log_interval_measure(&sys, &path.digits) / path.len() as f64
    };
    let b = dimension_bounds(&sys);
    let mut out = json!({
        "system": system_json(&cfg, &sys),
        "seed": args.seed,
        "n": path.len(),
        "point": path.point(),
        "digit0_frequency": path.digit0_frequency(),
        "entropy_rate": {"nats": rate, "dimension": rate / LN_2},
        "neg_log_mass_rate": {"nats": direct, "dimension": direct / LN_2},
        "bounds": bounds_json(&b),
    });
    if args.digits {
        let digits: String = path.digits.iter().map(|d| char::from(b'0' + d)).collect();
        out["digits"] = json!(digits);
    }
    emit_json(&args.common, out, stdout)?;
    Ok(0)
}

fn stationary(args: &StationaryArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (cfg, sys) = load_system(&args.common)?;
    if !(args.tol > 0.0) {
        return Err(CliError::Parse(format!(
            "--tol must be positive, got {}",
            args.tol
        )));
    }
    let report = stationarity_check(&sys, args.depth, args.tol)?;
    let mut out = serde_json::to_value(&report).expect("reports serialize");
    out["system"] = system_json(&cfg, &sys);
    out["tol"] = json!(args.tol);
    if let Some(q) = args.quad_depth {
        let r = shift_change_of_measure_check(&sys, args.depth, q)?;
        out["shift_change_of_measure"] = json!({
            "depth": args.depth,
            "quad_depth": q,
            "max_residual": r,
        });
    }
    emit_json(&args.common, out, stdout)?;
    Ok(0)
}

//! `eqbif` command line.
//!
//! Every subcommand prints one JSON document to stdout (or to `--out`).
//! Errors go to stderr as `{"error": kind, "message": ...}`; exit code 2 for
//! bad input, 1 for failed computations.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{load_config, RunConfig, RunOptions};
use crate::error::{Error, Result};
use crate::euler_ring::{
    add, deg_minus_id, product_decision, push_forward, scalar_unit_test, star, AtomSide, EulerElement,
    MultiplicationTable, RepresentationDescriptor, SymbolicDegree,
};
use crate::potentials::check_assumptions;
use crate::predictor::{auto_epsilon, degree_jump, lambda_set, predict, EpsilonPolicy};
use crate::verify::{verify, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "eqbif", version, about = "Symmetry-breaking bifurcation levels for -Δu = ∇F(u, λ) on spheres and balls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Laplace eigenvalues with multiplicities up to --beta-cutoff.
    Spectrum(RunArgs),
    /// Report on the standing assumptions for a potential.
    Check(RunArgs),
    /// Bifurcation levels and degree-jump candidates.
    Levels(RunArgs),
    /// Degree-jump detail at --lambda0.
    Jump(RunArgs),
    /// Predicted levels against detected and continued branches.
    Verify(RunArgs),
    /// Euler-ring arithmetic on a JSON request.
    Euler(EulerArgs),
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    /// Config file with [run] and optional [potential] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// sphere or ball.
    #[arg(long)]
    domain: Option<String>,
    /// Ambient dimension N.
    #[arg(long)]
    dim: Option<usize>,
    /// Builtin potential name.
    #[arg(long)]
    potential: Option<String>,
    /// File holding a [potential] section.
    #[arg(long)]
    potential_file: Option<PathBuf>,
    #[arg(long)]
    beta_cutoff: Option<String>,
    /// Number of distinct Laplace eigenvalues kept by the Galerkin solver.
    #[arg(long)]
    truncation: Option<usize>,
    /// Parameter window a:b.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda0: Option<String>,
    /// Output file (directory for verify).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json_pretty: bool,
    /// Comma-separated λ samples for check.
    #[arg(long, allow_hyphen_values = true)]
    samples: Option<String>,
    /// Grid steps for detection.
    #[arg(long)]
    steps: Option<usize>,
    /// Branch-switching amplitude.
    #[arg(long, allow_hyphen_values = true)]
    amplitude: Option<String>,
    /// Continuation step budget per branch.
    #[arg(long)]
    max_steps: Option<usize>,
    /// Include coefficient vectors in branch JSON.
    #[arg(long)]
    coefficients: bool,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Args)]
struct EulerArgs {
    /// JSON request file, `-` for stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json_pretty: bool,
}

impl RunArgs {
    fn options(&self) -> Result<RunOptions> {
        let num = |s: &Option<String>| s.as_deref().map(crate::config::parse_number).transpose();
        Ok(RunOptions {
            domain: self.domain.clone(),
            dim: self.dim,
            potential: self.potential.clone(),
            potential_file: self.potential_file.clone(),
            beta_cutoff: num(&self.beta_cutoff)?,
            truncation: self.truncation,
            window: self.window.clone(),
            epsilon: num(&self.epsilon)?,
            lambda0: num(&self.lambda0)?,
            out: self.out.clone(),
            seed: self.seed,
            json_pretty: self.json_pretty.then_some(true),
            samples: self.samples.clone(),
            steps: self.steps,
            amplitude: num(&self.amplitude)?,
            max_steps: self.max_steps,
            coefficients: self.coefficients.then_some(true),
            tol: self.tol,
        })
    }

    fn resolve(&self) -> Result<RunConfig> {
        let (file, inline) = match &self.config {
            Some(path) => {
                let c = load_config(path)?;
                (c.run, c.potential)
            }
            None => (RunOptions::default(), None),
        };
        RunConfig::resolve(file.merged(self.options()?), inline)
    }
}

fn render(v: &Value, pretty: bool) -> String {
    let mut s = if pretty { serde_json::to_string_pretty(v) } else { serde_json::to_string(v) }
        .expect("json values serialise");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serialises")
}

fn spectrum(cfg: &RunConfig) -> Result<Value> {
    let eigenvalues = cfg.domain.spectrum_upto(cfg.beta_cutoff)?;
    Ok(json!({
        "domain": cfg.domain.to_string(),
        "beta_cutoff": cfg.beta_cutoff,
        "eigenvalues": eigenvalues,
    }))
}

fn check(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.require_potential()?;
    Ok(to_value(&check_assumptions(spec, &cfg.samples, cfg.tol, cfg.seed)))
}

fn policy(cfg: &RunConfig) -> EpsilonPolicy {
    cfg.epsilon.map(EpsilonPolicy::Fixed).unwrap_or(EpsilonPolicy::Auto)
}

fn levels(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.require_potential()?;
    Ok(to_value(&predict(spec, &cfg.domain, cfg.beta_cutoff, policy(cfg), cfg.seed)?))
}

fn jump(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.require_potential()?;
    let l0 = cfg.lambda0.ok_or_else(|| Error::Config("jump needs --lambda0".into()))?;
    let eps = match cfg.epsilon {
        Some(e) => e,
        None => {
            let wide = lambda_set(spec, &cfg.domain, 2.0 * cfg.beta_cutoff.max(l0.abs()) + 10.0)?;
            auto_epsilon(l0, &wide)
        }
    };
    let mut v = to_value(&degree_jump(spec, &cfg.domain, l0, eps, cfg.seed)?);
    v["seed"] = json!(cfg.seed);
    Ok(v)
}

fn run_verify(cfg: &RunConfig) -> Result<Value> {
    let spec = cfg.require_potential()?;
    let opts = VerifyOptions {
        window: cfg.window.unwrap_or((0.1, cfg.beta_cutoff.max(0.2))),
        truncation: cfg.truncation,
        epsilon: policy(cfg),
        steps: cfg.steps,
        amplitude: cfg.amplitude,
        max_steps: cfg.max_steps,
        seed: cfg.seed,
    };
    let (report, branches) = verify(spec, &cfg.domain, &opts)?;
    let value = to_value(&report);
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for (k, b) in branches.iter().enumerate() {
            write_file(&dir.join(format!("branch_{}.csv", k + 1)), &b.to_csv()?)?;
            write_file(&dir.join(format!("branch_{}.json", k + 1)), &render(&b.to_json(cfg.coefficients), cfg.json_pretty))?;
        }
        write_file(&dir.join("report.json"), &render(&value, cfg.json_pretty))?;
    }
    Ok(value)
}

/// Request accepted by `eqbif euler`.
#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum EulerRequest {
    Add { a: EulerElement, b: EulerElement },
    Star { a: EulerElement, b: EulerElement, table: Value },
    PushForward {
        element: EulerElement,
        class_map: BTreeMap<String, String>,
        target_context: String,
        #[serde(default = "yes")]
        admissible: bool,
    },
    DegMinusId { context: String, rep: RepresentationDescriptor },
    ScalarUnitTest { element: EulerElement },
    ProductDecision { b_plus: i64, b_minus: i64, degree: SymbolicDegree, side: AtomSide },
}

fn yes() -> bool {
    true
}

pub fn euler_request(req: EulerRequest) -> Result<Value> {
    Ok(match req {
        EulerRequest::Add { a, b } => json!({ "result": add(&a.canonical(), &b.canonical())? }),
        EulerRequest::Star { a, b, table } => {
            let table = MultiplicationTable::from_json(&table.to_string())?;
            json!({ "result": star(&a.canonical(), &b.canonical(), &table)? })
        }
        EulerRequest::PushForward { element, class_map, target_context, admissible } => {
            json!({ "result": push_forward(&element.canonical(), &class_map, &target_context, admissible)? })
        }
        EulerRequest::DegMinusId { context, rep } => {
            let rep = RepresentationDescriptor::new(rep.blocks);
            json!({ "result": deg_minus_id(&context, &rep) })
        }
        EulerRequest::ScalarUnitTest { element } => json!({ "result": scalar_unit_test(&element.canonical()) }),
        EulerRequest::ProductDecision { b_plus, b_minus, degree, side } => {
            json!({ "result": product_decision(b_plus, b_minus, &degree, side) })
        }
    })
}

fn euler(args: &EulerArgs) -> Result<Value> {
    let text = if args.input.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| Error::Io(e.to_string()))?
    } else {
        std::fs::read_to_string(&args.input).map_err(|e| Error::Io(format!("{}: {e}", args.input.display())))?
    };
    let req: EulerRequest = serde_json::from_str(&text).map_err(|e| Error::Json(e.to_string()))?;
    euler_request(req)
}

fn dispatch(cmd: &Command) -> Result<(Value, bool, Option<PathBuf>)> {
    if let Command::Euler(a) = cmd {
        return Ok((euler(a)?, a.json_pretty, a.out.clone()));
    }
    let args = match cmd {
        Command::Spectrum(a) | Command::Check(a) | Command::Levels(a) | Command::Jump(a) | Command::Verify(a) => a,
        Command::Euler(_) => unreachable!(),
    };
    let cfg = args.resolve()?;
    let value = match cmd {
        Command::Spectrum(_) => spectrum(&cfg)?,
        Command::Check(_) => check(&cfg)?,
        Command::Levels(_) => levels(&cfg)?,
        Command::Jump(_) => jump(&cfg)?,
        Command::Verify(_) => return Ok((run_verify(&cfg)?, cfg.json_pretty, None)),
        Command::Euler(_) => unreachable!(),
    };
    Ok((value, cfg.json_pretty, cfg.out.clone()))
}

fn report_error(err: &mut dyn Write, kind: &str, message: &str) {
    let _ = writeln!(err, "{}", json!({ "error": kind, "message": message }));
}

/// Run the CLI on `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayHelpOnMissingArgumentOrSubcommand, DisplayVersion};
            return match e.kind() {
                DisplayHelp | DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
                _ => {
                    report_error(err, "config", e.render().to_string().trim());
                    2
                }
            };
        }
    };
    match dispatch(&cli.command) {
        Ok((value, pretty, path)) => {
            let text = render(&value, pretty);
            let written = match path {
                Some(p) => write_file(&p, &text),
                None => out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
            };
            match written {
                Ok(()) => 0,
                Err(e) => {
                    report_error(err, e.kind(), &e.to_string());
                    1
                }
            }
        }
        Err(e) => {
            report_error(err, e.kind(), &e.to_string());
            if e.is_config() { 2 } else { 1 }
        }
    }
}

pub fn main_with_args() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

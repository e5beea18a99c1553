//! Run configuration: a flat `key = value` file with `[run]` and
//! `[potential]` sections. Command-line flags use the same key names and
//! override the file.

use std::path::{Path, PathBuf};

use ini::Ini;
use nalgebra::DMatrix;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::potentials::{builtin, GroupAction, GroupKind, Polynomial, PotentialSpec};
use crate::spectral::{Domain, DomainKind};

pub const RUN_KEYS: &[&str] = &[
    "domain",
    "dim",
    "potential",
    "potential-file",
    "beta-cutoff",
    "truncation",
    "window",
    "epsilon",
    "lambda0",
    "out",
    "seed",
    "json-pretty",
    "samples",
    "steps",
    "amplitude",
    "max-steps",
    "coefficients",
    "tol",
];

pub const POTENTIAL_KEYS: &[&str] = &["name", "p", "action", "u0", "A", "F", "growth"];

/// Unvalidated options; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub domain: Option<String>,
    pub dim: Option<usize>,
    pub potential: Option<String>,
    pub potential_file: Option<PathBuf>,
    pub beta_cutoff: Option<f64>,
    pub truncation: Option<usize>,
    pub window: Option<String>,
    pub epsilon: Option<f64>,
    pub lambda0: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub json_pretty: Option<bool>,
    pub samples: Option<String>,
    pub steps: Option<usize>,
    pub amplitude: Option<f64>,
    pub max_steps: Option<usize>,
    pub coefficients: Option<bool>,
    pub tol: Option<f64>,
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Config(format!("invalid value {v:?} for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean {v:?} for {key}"))),
    }
}

/// Exact rational constant such as `-3/4` or `0.25`.
pub fn parse_number(text: &str) -> Result<f64> {
    let p = Polynomial::parse(text, 0).map_err(|e| Error::Config(format!("bad number {text:?}: {e}")))?;
    p.as_constant()
        .and_then(|r| r.to_f64())
        .ok_or_else(|| Error::Config(format!("{text:?} is not a constant")))
}

impl RunOptions {
    /// Values from `other` win.
    pub fn merged(self, other: RunOptions) -> RunOptions {
        RunOptions {
            domain: other.domain.or(self.domain),
            dim: other.dim.or(self.dim),
            potential: other.potential.or(self.potential),
            potential_file: other.potential_file.or(self.potential_file),
            beta_cutoff: other.beta_cutoff.or(self.beta_cutoff),
            truncation: other.truncation.or(self.truncation),
            window: other.window.or(self.window),
            epsilon: other.epsilon.or(self.epsilon),
            lambda0: other.lambda0.or(self.lambda0),
            out: other.out.or(self.out),
            seed: other.seed.or(self.seed),
            json_pretty: other.json_pretty.or(self.json_pretty),
            samples: other.samples.or(self.samples),
            steps: other.steps.or(self.steps),
            amplitude: other.amplitude.or(self.amplitude),
            max_steps: other.max_steps.or(self.max_steps),
            coefficients: other.coefficients.or(self.coefficients),
            tol: other.tol.or(self.tol),
        }
    }

    fn set(&mut self, key: &str, v: &str, base: &Path) -> Result<()> {
        match key {
            "domain" => self.domain = Some(v.trim().to_string()),
            "dim" => self.dim = Some(parse_value(key, v)?),
            "potential" => self.potential = Some(v.trim().to_string()),
            "potential-file" => self.potential_file = Some(base.join(v.trim())),
            "beta-cutoff" => self.beta_cutoff = Some(parse_number(v)?),
            "truncation" => self.truncation = Some(parse_value(key, v)?),
            "window" => self.window = Some(v.trim().to_string()),
            "epsilon" => self.epsilon = Some(parse_number(v)?),
            "lambda0" => self.lambda0 = Some(parse_number(v)?),
            "out" => self.out = Some(base.join(v.trim())),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "json-pretty" => self.json_pretty = Some(parse_bool(key, v)?),
            "samples" => self.samples = Some(v.trim().to_string()),
            "steps" => self.steps = Some(parse_value(key, v)?),
            "amplitude" => self.amplitude = Some(parse_number(v)?),
            "max-steps" => self.max_steps = Some(parse_value(key, v)?),
            "coefficients" => self.coefficients = Some(parse_bool(key, v)?),
            "tol" => self.tol = Some(parse_value(key, v)?),
            _ => {
                return Err(Error::Config(format!("unknown key {key:?} in [run]; known: {}", RUN_KEYS.join(", "))));
            }
        }
        Ok(())
    }
}

/// Contents of a config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    pub run: RunOptions,
    pub potential: Option<PotentialSpec>,
}

fn load_ini(text: &str) -> Result<Ini> {
    Ini::load_from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
}

/// Parse config text; relative paths are resolved against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<ConfigFile> {
    let ini = load_ini(text)?;
    let mut out = ConfigFile::default();
    for (section, props) in ini.iter() {
        match section {
            None if props.is_empty() => {}
            Some("run") => {
                for (k, v) in props.iter() {
                    out.run.set(k, v, base)?;
                }
            }
            Some("potential") => out.potential = Some(potential_from_section(props)?),
            None => return Err(Error::Config("keys must be inside a [run] or [potential] section".into())),
            Some(other) => return Err(Error::Config(format!("unknown section [{other}]"))),
        }
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text, path.parent().unwrap_or(Path::new(".")))
}

/// User potential from a file holding a `[potential]` section.
pub fn load_potential_file(path: &Path) -> Result<PotentialSpec> {
    load_config(path)?
        .potential
        .ok_or_else(|| Error::Config(format!("{} has no [potential] section", path.display())))
}

fn potential_from_section(props: &ini::Properties) -> Result<PotentialSpec> {
    for (k, _) in props.iter() {
        if !POTENTIAL_KEYS.contains(&k) {
            return Err(Error::Config(format!(
                "unknown key {k:?} in [potential]; known: {}",
                POTENTIAL_KEYS.join(", ")
            )));
        }
    }
    let get = |k: &str| props.get(k).ok_or_else(|| Error::Config(format!("[potential] needs {k}")));
    let p: usize = parse_value("p", get("p")?)?;
    let kind = match props.get("action") {
        Some(a) => GroupKind::parse(a)?,
        None => GroupKind::Trivial,
    };
    let action = GroupAction::new(kind, p)?;
    let u0 = match props.get("u0") {
        Some(s) => s.split(',').map(parse_number).collect::<Result<Vec<_>>>()?,
        None => vec![0.0; p],
    };
    let rows: Vec<Vec<f64>> = get("A")?
        .split(';')
        .map(|r| r.split(',').map(parse_number).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Config(format!("A must be a {p}x{p} matrix written as rows separated by ';'")));
    }
    let a = DMatrix::from_fn(p, p, |i, j| rows[i][j]);
    let growth = props.get("growth").map(parse_number).transpose()?;
    let name = props.get("name").unwrap_or("user").to_string();
    PotentialSpec::new(name, action, u0, a, get("F")?, growth)
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub domain: Domain,
    pub potential: Option<PotentialSpec>,
    pub beta_cutoff: f64,
    pub truncation: Option<usize>,
    pub window: Option<(f64, f64)>,
    pub epsilon: Option<f64>,
    pub lambda0: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub json_pretty: bool,
    pub samples: Vec<f64>,
    pub steps: usize,
    pub amplitude: f64,
    pub max_steps: usize,
    pub coefficients: bool,
    pub tol: f64,
}

pub const DEFAULT_BETA_CUTOFF: f64 = 10.0;
pub const DEFAULT_SAMPLES: &[f64] = &[-2.0, -0.5, 0.5, 1.0, 2.0, 5.0];
pub const DEFAULT_STEPS: usize = 200;
pub const DEFAULT_MAX_STEPS: usize = 100;

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("window must be a:b, got {s:?}")))?;
    let (a, b) = (parse_number(a)?, parse_number(b)?);
    if !(a < b) {
        return Err(Error::Config(format!("window {a}:{b} is empty")));
    }
    Ok((a, b))
}

fn check_range<T: PartialOrd + std::fmt::Display + Copy>(key: &str, v: T, lo: T, hi: T) -> Result<T> {
    if v < lo || v > hi {
        return Err(Error::Config(format!("{key} = {v} outside [{lo}, {hi}]")));
    }
    Ok(v)
}

impl RunConfig {
    pub fn resolve(opts: RunOptions, inline_potential: Option<PotentialSpec>) -> Result<Self> {
        let dim = opts.dim.unwrap_or(2);
        let domain = match opts.domain.as_deref().unwrap_or("sphere") {
            "sphere" => Domain::sphere(dim),
            "ball" => Domain::ball(dim),
            other => return Err(Error::Config(format!("domain must be sphere or ball, got {other:?}"))),
        }
        .map_err(|e| Error::Config(e.to_string()))?;
        let potential = match (&opts.potential, &opts.potential_file, inline_potential) {
            (Some(_), Some(_), _) => {
                return Err(Error::Config("give either potential or potential-file, not both".into()));
            }
            (Some(name), None, _) => Some(builtin(name)?),
            (None, Some(path), _) => Some(load_potential_file(path)?),
            (None, None, inline) => inline,
        };
        let beta_cutoff = opts.beta_cutoff.unwrap_or(DEFAULT_BETA_CUTOFF);
        if !beta_cutoff.is_finite() {
            return Err(Error::Config("beta-cutoff must be finite".into()));
        }
        check_range("beta-cutoff", beta_cutoff, 0.0, 1e4)?;
        if let Some(t) = opts.truncation {
            check_range("truncation", t, 1, 64)?;
        }
        let window = opts.window.as_deref().map(parse_window).transpose()?;
        if let Some(e) = opts.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Config(format!("epsilon must be positive, got {e}")));
            }
        }
        if let Some(l) = opts.lambda0 {
            if !l.is_finite() {
                return Err(Error::Config("lambda0 must be finite".into()));
            }
        }
        let samples = match &opts.samples {
            Some(s) => s.split(',').map(parse_number).collect::<Result<Vec<_>>>()?,
            None => DEFAULT_SAMPLES.to_vec(),
        };
        if !samples.iter().any(|l| *l != 0.0) {
            return Err(Error::Config("samples need at least one nonzero lambda".into()));
        }
        let amplitude = opts.amplitude.unwrap_or(crate::continuation::DEFAULT_AMPLITUDE);
        if amplitude == 0.0 || !amplitude.is_finite() || amplitude.abs() > 10.0 {
            return Err(Error::Config(format!("amplitude must be nonzero with |amplitude| <= 10, got {amplitude}")));
        }
        let tol = opts.tol.unwrap_or(1e-10);
        check_range("tol", tol, 1e-15, 1e-2)?;
        Ok(RunConfig {
            domain,
            potential,
            beta_cutoff,
            truncation: opts.truncation,
            window,
            epsilon: opts.epsilon,
            lambda0: opts.lambda0,
            out: opts.out,
            seed: opts.seed.unwrap_or(0),
            json_pretty: opts.json_pretty.unwrap_or(false),
            samples,
            steps: check_range("steps", opts.steps.unwrap_or(DEFAULT_STEPS), 1, 100_000)?,
            amplitude,
            max_steps: check_range("max-steps", opts.max_steps.unwrap_or(DEFAULT_MAX_STEPS), 1, 10_000)?,
            coefficients: opts.coefficients.unwrap_or(false),
            tol,
        })
    }

    pub fn require_potential(&self) -> Result<&PotentialSpec> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::Config("no potential given (use --potential or --potential-file)".into()))
    }

    pub fn is_disk(&self) -> bool {
        self.domain.kind == DomainKind::Ball && self.domain.ambient_dim == 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RING: &str = "
[run]
domain = sphere
dim = 3
beta-cutoff = 13
seed = 4

[potential]
name = ring
p = 2
action = so2(1,2)
u0 = 1, 0
A = 1, 0; 0, 0
F = lambda*(u1^2 + u2^2 - 1)^2/8
growth = 4
";

    #[test]
    fn parses_run_and_potential_sections() {
        let cfg = parse_config(RING, Path::new("/tmp")).unwrap();
        assert_eq!(cfg.run.dim, Some(3));
        assert_eq!(cfg.run.beta_cutoff, Some(13.0));
        let spec = cfg.potential.unwrap();
        let reference = builtin("so2-ring").unwrap();
        assert_eq!(spec.a, reference.a);
        assert_eq!(spec.grad(&[0.3, 0.4], 1.5), reference.grad(&[0.3, 0.4], 1.5));
        let rc = RunConfig::resolve(cfg.run, Some(spec)).unwrap();
        assert_eq!(rc.domain, Domain::sphere2());
        assert_eq!(rc.seed, 4);
    }

    #[test]
    fn flags_override_file() {
        let file = parse_config(RING, Path::new(".")).unwrap().run;
        let flags = RunOptions { dim: Some(2), ..Default::default() };
        let merged = file.merged(flags);
        assert_eq!(merged.dim, Some(2));
        assert_eq!(merged.seed, Some(4));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = |t: &str| parse_config(t, Path::new(".")).unwrap_err();
        assert!(bad("[run]\ncolour = red\n").is_config());
        assert!(bad("[other]\nx = 1\n").is_config());
        assert!(bad("[potential]\np = 1\nA = 1\nF = u2\n").is_config());
        assert!(bad("[potential]\np = 2\nA = 1, 0\nF = u1\n").is_config());
        let resolve = |o: RunOptions| RunConfig::resolve(o, None).unwrap_err();
        assert!(resolve(RunOptions { window: Some("3:1".into()), ..Default::default() }).is_config());
        assert!(resolve(RunOptions { domain: Some("torus".into()), ..Default::default() }).is_config());
        assert!(resolve(RunOptions { domain: Some("ball".into()), dim: Some(5), ..Default::default() }).is_config());
        assert!(resolve(RunOptions { epsilon: Some(-1.0), ..Default::default() }).is_config());
        assert!(resolve(RunOptions { samples: Some("0, 0".into()), ..Default::default() }).is_config());
        assert!(resolve(RunOptions { potential: Some("nope".into()), ..Default::default() }).is_config());
        assert!(resolve(RunOptions { beta_cutoff: Some(-1.0), ..Default::default() }).is_config());
    }

    #[test]
    fn numbers_are_exact_rationals() {
        assert_eq!(parse_number("-3/4").unwrap(), -0.75);
        assert_eq!(parse_number("0.1").unwrap(), 0.1);
        assert!(parse_number("lambda").is_err());
    }
}

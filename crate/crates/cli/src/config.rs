//! Experiment configuration: a line-based `key = value` file with
//! `[section]` headers, plus command-line flag overrides.

use std::fmt;
use std::path::PathBuf;

use quasilog_core::{SolverConfig, WeightShape};

/// Which experiment the binary runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    VerifyF,
    Eig,
    Solve,
    Branch,
    LambdaSweep,
    KappaSweep,
    Large,
    Stability,
}

impl ExperimentKind {
    pub fn from_str(s: &str) -> Option<Self> {
        Some(match s {
            "verify-f" => Self::VerifyF,
            "eig" => Self::Eig,
            "solve" => Self::Solve,
            "branch" => Self::Branch,
            "lambda-sweep" => Self::LambdaSweep,
            "kappa-sweep" => Self::KappaSweep,
            "large" => Self::Large,
            "stability" => Self::Stability,
            _ => return None,
        })
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::VerifyF => "verify-f",
            Self::Eig => "eig",
            Self::Solve => "solve",
            Self::Branch => "branch",
            Self::LambdaSweep => "lambda-sweep",
            Self::KappaSweep => "kappa-sweep",
            Self::Large => "large",
            Self::Stability => "stability",
        };
        f.write_str(s)
    }
}

/// Weight mode named in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Zero,
    Constant,
    DiskBump,
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    // [domain]
    pub dimension: usize,
    pub n: usize,
    pub extents_x: (f64, f64),
    pub extents_y: (f64, f64),
    // [weight]
    pub weight_mode: WeightMode,
    pub b0: f64,
    pub center: (f64, f64),
    pub radius: f64,
    // [transform]
    pub kappa: f64,
    pub p: f64,
    // [solver]
    pub solver: SolverConfig,
    // [sweep]  (0.0 selects the documented automatic value)
    pub lambda: f64,
    pub lambda_from: f64,
    pub lambda_to: f64,
    pub steps: usize,
    pub lambdas: Vec<f64>,
    pub kappas: Vec<f64>,
    pub warm: bool,
    pub mesh_n: usize,
    pub ball_dimension: usize,
    pub ball_radius: f64,
    // [output]
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self {
            kind,
            dimension: 1,
            n: 99,
            extents_x: (0.0, 1.0),
            extents_y: (0.0, 1.0),
            weight_mode: WeightMode::Constant,
            b0: 1.0,
            center: (0.5, 0.5),
            radius: 0.25,
            kappa: 1.0,
            p: 3.0,
            solver: SolverConfig::default(),
            lambda: 0.0,
            lambda_from: 0.0,
            lambda_to: 0.0,
            steps: 40,
            lambdas: Vec::new(),
            kappas: vec![1e-1, 10f64.powf(-1.5), 1e-2, 10f64.powf(-2.5), 1e-3],
            warm: false,
            mesh_n: 840,
            ball_dimension: 2,
            ball_radius: 0.3,
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn weight_shape(&self) -> WeightShape {
        match self.weight_mode {
            WeightMode::Zero => WeightShape::Zero,
            WeightMode::Constant => WeightShape::Constant { b0: self.b0 },
            WeightMode::DiskBump => WeightShape::DiskBump {
                b0: self.b0,
                center: self.center,
                radius: self.radius,
            },
        }
    }
}

/// A parse or validation failure; the message names the offending
/// location and key.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(loc: &str, key: &str, what: &str) -> Result<T, ConfigError> {
    Err(ConfigError(format!("{loc}: key `{key}`: {what}")))
}

fn parse_f64(loc: &str, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("{loc}: key `{key}`: expected a real number, got `{v}`")))
}

fn parse_usize(loc: &str, key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| ConfigError(format!("{loc}: key `{key}`: expected a non-negative integer, got `{v}`")))
}

fn parse_bool(loc: &str, key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => err(loc, key, &format!("expected true/false, got `{v}`")),
    }
}

fn parse_list(loc: &str, key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|s| parse_f64(loc, key, s.trim()))
        .collect()
}

/// Applies one `section.key = value` assignment; `loc` names the source
/// (a file line or a command-line flag) for error messages.
fn apply(
    cfg: &mut ExperimentConfig,
    section: &str,
    key: &str,
    value: &str,
    loc: &str,
) -> Result<(), ConfigError> {
    match (section, key) {
        ("domain", "dimension") => {
            let d = parse_usize(loc, key, value)?;
            if d != 1 && d != 2 {
                return err(loc, key, &format!("dimension must be 1 or 2, got {d}"));
            }
            cfg.dimension = d;
        }
        ("domain", "n") => {
            let n = parse_usize(loc, key, value)?;
            if n < 3 {
                return err(loc, key, &format!("n must be at least 3, got {n}"));
            }
            cfg.n = n;
        }
        ("domain", "x_min") => cfg.extents_x.0 = parse_f64(loc, key, value)?,
        ("domain", "x_max") => cfg.extents_x.1 = parse_f64(loc, key, value)?,
        ("domain", "y_min") => cfg.extents_y.0 = parse_f64(loc, key, value)?,
        ("domain", "y_max") => cfg.extents_y.1 = parse_f64(loc, key, value)?,
        ("weight", "mode") => {
            cfg.weight_mode = match value {
                "zero" => WeightMode::Zero,
                "constant" => WeightMode::Constant,
                "disk-bump" => WeightMode::DiskBump,
                _ => return err(loc, key, &format!("expected zero|constant|disk-bump, got `{value}`")),
            };
        }
        ("weight", "b0") => {
            let b = parse_f64(loc, key, value)?;
            if !(b >= 0.0) {
                return err(loc, key, &format!("b0 must be >= 0, got {b}"));
            }
            cfg.b0 = b;
        }
        ("weight", "center_x") => cfg.center.0 = parse_f64(loc, key, value)?,
        ("weight", "center_y") => cfg.center.1 = parse_f64(loc, key, value)?,
        ("weight", "radius") => {
            let r = parse_f64(loc, key, value)?;
            if !(r > 0.0) {
                return err(loc, key, &format!("radius must be > 0, got {r}"));
            }
            cfg.radius = r;
        }
        ("transform", "kappa") => {
            let k = parse_f64(loc, key, value)?;
            if !(k >= 0.0) {
                return err(loc, key, &format!("kappa must be >= 0, got {k}"));
            }
            cfg.kappa = k;
        }
        ("transform", "p") => {
            let p = parse_f64(loc, key, value)?;
            if !(p > 1.0) {
                return err(loc, key, &format!("p must be > 1, got {p}"));
            }
            cfg.p = p;
        }
        ("solver", "newton_tol") => {
            let t = parse_f64(loc, key, value)?;
            if !(t > 0.0) {
                return err(loc, key, &format!("newton_tol must be > 0, got {t}"));
            }
            cfg.solver.newton_tol = t;
        }
        ("solver", "max_newton") => cfg.solver.max_newton = parse_usize(loc, key, value)?,
        ("solver", "damping") => {
            let d = parse_f64(loc, key, value)?;
            if !(d > 0.0 && d < 1.0) {
                return err(loc, key, &format!("damping must lie in (0,1), got {d}"));
            }
            cfg.solver.damping = d;
        }
        ("solver", "monotone_fallback") => {
            cfg.solver.monotone_fallback = parse_bool(loc, key, value)?
        }
        ("solver", "monotone_shift") => {
            let s = parse_f64(loc, key, value)?;
            if !(s >= 0.0) {
                return err(loc, key, &format!("monotone_shift must be >= 0, got {s}"));
            }
            cfg.solver.monotone_shift = s;
        }
        ("solver", "max_monotone") => cfg.solver.max_monotone = parse_usize(loc, key, value)?,
        ("solver", "zero_threshold") => {
            let z = parse_f64(loc, key, value)?;
            if !(z > 0.0) {
                return err(loc, key, &format!("zero_threshold must be > 0, got {z}"));
            }
            cfg.solver.zero_threshold = z;
        }
        ("solver", "seed") => {
            cfg.solver.seed = value.parse().map_err(|_| {
                ConfigError(format!("{loc}: key `seed`: expected an unsigned integer, got `{value}`"))
            })?;
        }
        ("sweep", "lambda") => {
            let l = parse_f64(loc, key, value)?;
            if !(l >= 0.0) {
                return err(loc, key, &format!("lambda must be >= 0, got {l}"));
            }
            cfg.lambda = l;
        }
        ("sweep", "lambda_from") => cfg.lambda_from = parse_f64(loc, key, value)?,
        ("sweep", "lambda_to") => cfg.lambda_to = parse_f64(loc, key, value)?,
        ("sweep", "steps") => {
            let s = parse_usize(loc, key, value)?;
            if s < 2 {
                return err(loc, key, &format!("steps must be at least 2, got {s}"));
            }
            cfg.steps = s;
        }
        ("sweep", "lambdas") => {
            let xs = parse_list(loc, key, value)?;
            if xs.windows(2).any(|w| w[1] <= w[0]) {
                return err(loc, key, "lambdas must be strictly increasing");
            }
            cfg.lambdas = xs;
        }
        ("sweep", "kappas") => {
            let xs = parse_list(loc, key, value)?;
            if xs.iter().any(|&k| !(k > 0.0)) || xs.windows(2).any(|w| w[1] >= w[0]) {
                return err(loc, key, "kappas must be positive and strictly decreasing");
            }
            cfg.kappas = xs;
        }
        ("sweep", "warm") => cfg.warm = parse_bool(loc, key, value)?,
        ("sweep", "mesh_n") => {
            let m = parse_usize(loc, key, value)?;
            if m < 10 {
                return err(loc, key, &format!("mesh_n must be at least 10, got {m}"));
            }
            cfg.mesh_n = m;
        }
        ("sweep", "ball_dimension") => {
            let d = parse_usize(loc, key, value)?;
            if !(1..=3).contains(&d) {
                return err(loc, key, &format!("ball_dimension must be 1, 2 or 3, got {d}"));
            }
            cfg.ball_dimension = d;
        }
        ("sweep", "ball_radius") => {
            let r = parse_f64(loc, key, value)?;
            if !(r > 0.0) {
                return err(loc, key, &format!("ball_radius must be > 0, got {r}"));
            }
            cfg.ball_radius = r;
        }
        ("output", "dir") => cfg.out_dir = PathBuf::from(value),
        _ => {
            return Err(ConfigError(format!(
                "{loc}: unknown key `{key}` in section [{section}]"
            )))
        }
    }
    Ok(())
}

/// Parses a config file into `cfg`; errors name the file line and key.
pub fn apply_file(cfg: &mut ExperimentConfig, path: &str) -> Result<(), ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config file `{path}`: {e}")))?;
    let mut section = String::from("sweep");
    for (i, raw) in text.lines().enumerate() {
        let loc = format!("{path}:{}", i + 1);
        let line = match raw.find('#') {
            Some(j) => &raw[..j],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ConfigError(format!("{loc}: malformed section header `{line}`")))?
                .trim();
            if !matches!(name, "domain" | "weight" | "transform" | "solver" | "sweep" | "output") {
                return Err(ConfigError(format!("{loc}: unknown section [{name}]")));
            }
            section = name.to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("{loc}: expected `key = value`, got `{line}`")))?;
        apply(cfg, &section, key.trim(), value.trim(), &loc)?;
    }
    Ok(())
}

/// Flags understood on the command line, with the `section.key` they
/// override. Kept in one table so `--help` and the parser agree.
pub const FLAGS: &[(&str, &str, &str)] = &[
    ("--dimension", "domain.dimension", "domain dimension, 1 or 2"),
    ("--n", "domain.n", "interior grid points per axis"),
    ("--mode", "weight.mode", "weight mode: zero|constant|disk-bump"),
    ("--b0", "weight.b0", "weight amplitude b0"),
    ("--center-x", "weight.center_x", "bump center x"),
    ("--center-y", "weight.center_y", "bump center y"),
    ("--radius", "weight.radius", "bump radius"),
    ("--kappa", "transform.kappa", "quasilinear strength kappa"),
    ("--p", "transform.p", "absorption exponent p"),
    ("--newton-tol", "solver.newton_tol", "Newton residual target"),
    ("--seed", "solver.seed", "seed for randomized probes"),
    ("--lambda", "sweep.lambda", "single lambda value"),
    ("--lambda-from", "sweep.lambda_from", "branch/sweep start lambda"),
    ("--lambda-to", "sweep.lambda_to", "branch/sweep end lambda"),
    ("--steps", "sweep.steps", "branch/sweep point count"),
    ("--lambdas", "sweep.lambdas", "explicit lambda grid a,b,c"),
    ("--kappas", "sweep.kappas", "decreasing kappa grid a,b,c"),
    ("--warm", "sweep.warm", "warm-start sweeps (true|false)"),
    ("--mesh-n", "sweep.mesh_n", "radial mesh resolution"),
    ("--ball-dimension", "sweep.ball_dimension", "ball dimension for `large`"),
    ("--ball-radius", "sweep.ball_radius", "ball radius for `large`"),
    ("--out", "output.dir", "output directory"),
];

/// Applies one `--flag value` override.
pub fn apply_flag(cfg: &mut ExperimentConfig, flag: &str, value: &str) -> Result<(), ConfigError> {
    let target = FLAGS
        .iter()
        .find(|(f, _, _)| *f == flag)
        .map(|(_, t, _)| *t)
        .ok_or_else(|| ConfigError(format!("unknown flag `{flag}`")))?;
    let (section, key) = target.split_once('.').expect("flag table entries are section.key");
    apply(cfg, section, key, value, &format!("flag {flag}"))
}

/// Post-parse consistency checks that span several keys.
pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.weight_mode == WeightMode::DiskBump && cfg.dimension != 2 {
        return Err(ConfigError(
            "weight mode disk-bump requires domain.dimension = 2".into(),
        ));
    }
    if cfg.extents_x.1 <= cfg.extents_x.0 || (cfg.dimension == 2 && cfg.extents_y.1 <= cfg.extents_y.0) {
        return Err(ConfigError("domain extents must satisfy min < max".into()));
    }
    if cfg.kappas.len() < 2 {
        return Err(ConfigError("sweep.kappas needs at least 2 entries".into()));
    }
    Ok(())
}

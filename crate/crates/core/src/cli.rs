//! Command-line front end.
//!
//! Configuration comes from an optional JSON file overridden by flags. Every
//! command writes its data files plus a `manifest.json` carrying the SHA-256
//! of the resolved configuration and the tool version.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration or I/O
//! error, 3 numerical failure.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::analyze::{
    bisect_heteroclinic, classify, estimate_completeness, integrate_orbit, run_lemma_suite,
    suggested_bracket, sweep_unstable, BisectOptions, OrbitOptions, DEFAULT_SEED,
};
use crate::equilibria::{unstable_seed, DEFAULT_DELTA};
use crate::error::Error;
use crate::integrate::{
    integrate, EventSpec, IntegrationOptions, Sample, Start, Termination, Tolerances, Trajectory,
};
use crate::phase::{PhasePoint, SolitonParams};
use crate::reconstruct::{hamilton_identity, reconstruct_profile, reconstruct_profile_dense};

pub const TOOL_NAME: &str = "soliton-lab";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Fully defaulted run configuration. Unset optional fields fall back to a
/// per-command default that is recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: u32,
    pub lambda: f64,
    pub steady: bool,
    /// Explicit start; all three or none.
    pub omega: Option<f64>,
    pub x: Option<f64>,
    pub y: Option<f64>,
    /// Seed angle on the unstable manifold of `P0`, used when no state is given.
    pub theta: Option<f64>,
    pub delta: f64,
    pub t0: f64,
    pub t1: f64,
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub seed: u64,
    pub events: Vec<EventSpec>,
    /// Emit `count` dense-output samples instead of the accepted steps.
    pub dense: Option<usize>,
    /// Horizon for classification, sweeps and bisection shots.
    pub horizon: Option<f64>,
    pub count: usize,
    pub theta_lo: Option<f64>,
    pub theta_hi: Option<f64>,
    pub iters: usize,
    pub out: PathBuf,
    /// Also write whitespace-separated `.dat` files with a `#` header.
    pub gnuplot: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            lambda: 1.0,
            steady: false,
            omega: None,
            x: None,
            y: None,
            theta: None,
            delta: DEFAULT_DELTA,
            t0: 0.0,
            t1: 10.0,
            rtol: Tolerances::default().rtol,
            atol: Tolerances::default().atol,
            max_step: IntegrationOptions::default().max_step,
            seed: DEFAULT_SEED,
            events: Vec::new(),
            dense: None,
            horizon: None,
            count: 31,
            theta_lo: None,
            theta_hi: None,
            iters: 60,
            out: PathBuf::from("out"),
            gnuplot: false,
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// A bad configuration value; `key` names it.
    Config { key: String, message: String },
    Io { path: PathBuf, message: String },
    Numerical(String),
}

impl CliError {
    fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config {
            key: key.to_string(),
            message: message.into(),
        }
    }

    fn io(path: &Path, err: impl fmt::Display) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { key, message } => write!(f, "config error in `{key}`: {message}"),
            CliError::Io { path, message } => write!(f, "cannot write {}: {message}", path.display()),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Library errors raised while running a command. Bad requests are blamed on
/// the key that produced them where that is unambiguous.
fn lib_err(key: &str) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Numerical(m) => CliError::Numerical(m),
        other => CliError::config(key, other.to_string()),
    }
}

fn take<T: DeserializeOwned>(key: &str, v: &Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| CliError::config(key, e.to_string()))
}

impl RunConfig {
    /// Overlays the keys of a JSON object, one at a time so that errors name
    /// the offending key.
    pub fn apply_json(&mut self, v: &Value) -> Result<(), CliError> {
        let obj: &Map<String, Value> = v
            .as_object()
            .ok_or_else(|| CliError::config("<root>", "expected a JSON object"))?;
        for (key, val) in obj {
            let k = key.as_str();
            match k {
                "n" => self.n = take(k, val)?,
                "lambda" => self.lambda = take(k, val)?,
                "steady" => self.steady = take(k, val)?,
                "omega" => self.omega = take(k, val)?,
                "x" => self.x = take(k, val)?,
                "y" => self.y = take(k, val)?,
                "theta" => self.theta = take(k, val)?,
                "delta" => self.delta = take(k, val)?,
                "t0" => self.t0 = take(k, val)?,
                "t1" => self.t1 = take(k, val)?,
                "rtol" => self.rtol = take(k, val)?,
                "atol" => self.atol = take(k, val)?,
                "max_step" => self.max_step = take(k, val)?,
                "seed" => self.seed = take(k, val)?,
                "events" => self.events = take(k, val)?,
                "dense" => self.dense = take(k, val)?,
                "horizon" => self.horizon = take(k, val)?,
                "count" => self.count = take(k, val)?,
                "theta_lo" => self.theta_lo = take(k, val)?,
                "theta_hi" => self.theta_hi = take(k, val)?,
                "iters" => self.iters = take(k, val)?,
                "out" => self.out = take(k, val)?,
                "gnuplot" => self.gnuplot = take(k, val)?,
                _ => return Err(CliError::config(k, "unknown key")),
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self, CliError> {
        let v: Value =
            serde_json::from_str(s).map_err(|e| CliError::config("<root>", e.to_string()))?;
        let mut cfg = Self::default();
        cfg.apply_json(&v)?;
        Ok(cfg)
    }

    /// Semantic checks; runs before any integration.
    pub fn validate(&self) -> Result<(), CliError> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(CliError::config(key, format!("must be finite, got {v}")))
            }
        };
        if self.n < 2 {
            return Err(CliError::config("n", format!("must be >= 2, got {}", self.n)));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(CliError::config("lambda", format!("must be > 0, got {}", self.lambda)));
        }
        let given = [("omega", self.omega), ("x", self.x), ("y", self.y)];
        let set = given.iter().filter(|(_, v)| v.is_some()).count();
        if set != 0 && set != 3 {
            let missing = given.iter().find(|(_, v)| v.is_none()).map(|(k, _)| *k).unwrap_or("omega");
            return Err(CliError::config(missing, "omega, x and y must be given together"));
        }
        for (k, v) in given {
            if let Some(v) = v {
                finite(k, v)?;
            }
        }
        if let Some(w) = self.omega {
            if w < 0.0 {
                return Err(CliError::config("omega", format!("must be >= 0, got {w}")));
            }
        }
        if let Some(th) = self.theta {
            if !(th > -std::f64::consts::PI && th <= std::f64::consts::PI) {
                return Err(CliError::config("theta", format!("must lie in (-pi, pi], got {th}")));
            }
        }
        if !(self.delta > 0.0 && self.delta <= crate::equilibria::MAX_SEED_DELTA) {
            return Err(CliError::config(
                "delta",
                format!("must lie in (0, {}], got {}", crate::equilibria::MAX_SEED_DELTA, self.delta),
            ));
        }
        finite("t0", self.t0)?;
        finite("t1", self.t1)?;
        if self.t0 != 0.0 {
            return Err(CliError::config("t0", "runs start at t0 = 0; use a negative t1 to run backward"));
        }
        if self.t1 == self.t0 {
            return Err(CliError::config("t1", "must differ from t0"));
        }
        let tol = Tolerances::new(self.rtol, self.atol);
        if !(self.rtol.is_finite() && self.rtol >= 1e-13) {
            return Err(CliError::config("rtol", format!("must be >= 1e-13, got {}", self.rtol)));
        }
        tol.validate().map_err(|e| CliError::config("atol", e.to_string()))?;
        if !(self.max_step.is_finite() && self.max_step > 1e-12) {
            return Err(CliError::config("max_step", format!("must be > 1e-12, got {}", self.max_step)));
        }
        for ev in &self.events {
            ev.validate().map_err(|e| CliError::config("events", e.to_string()))?;
        }
        if self.dense.is_some_and(|c| c < 2) {
            return Err(CliError::config("dense", "needs at least 2 samples"));
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::config("horizon", format!("must be > 0, got {h}")));
            }
        }
        if self.count < 2 {
            return Err(CliError::config("count", format!("must be >= 2, got {}", self.count)));
        }
        for (k, v) in [("theta_lo", self.theta_lo), ("theta_hi", self.theta_hi)] {
            if let Some(v) = v {
                finite(k, v)?;
            }
        }
        if self.iters == 0 {
            return Err(CliError::config("iters", "must be >= 1"));
        }
        Ok(())
    }

    pub fn params(&self) -> Result<SolitonParams, CliError> {
        SolitonParams::new(self.n, self.lambda)
            .map(|p| p.with_steady(self.steady))
            .map_err(|e| CliError::config("n", e.to_string()))
    }

    pub fn options(&self) -> IntegrationOptions {
        IntegrationOptions::default()
            .with_tolerances(Tolerances::new(self.rtol, self.atol))
            .with_max_step(self.max_step)
    }

    /// The explicit state if given, else the seed at `theta`.
    pub fn start(&self, params: &SolitonParams) -> Result<Start, CliError> {
        if let (Some(w), Some(x), Some(y)) = (self.omega, self.x, self.y) {
            return Ok(Start::from(PhasePoint::new(w, x, y)));
        }
        match self.theta {
            Some(th) => unstable_seed(params, th, self.delta)
                .map(Start::from)
                .map_err(|e| CliError::config("theta", e.to_string())),
            None => Err(CliError::config(
                "omega",
                "no start given: set omega, x and y, or theta",
            )),
        }
    }

    /// SHA-256 of the canonical JSON form, leaving out the output directory
    /// so that identical runs written to different places share a hash.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let canon = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(canon.as_bytes()))
    }
}

#[derive(Parser, Debug)]
#[command(name = TOOL_NAME, version, about = "Phase-space laboratory for rotationally symmetric shrinking Ricci solitons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Integrate one trajectory and write it as CSV.
    Integrate,
    /// Classify seeds across a range of angles on the unstable manifold.
    Sweep,
    /// Bisect for the heteroclinic orbit joining the two poles.
    Bisect,
    /// Classify one solution integrated both ways.
    Classify,
    /// Reconstruct the radial metric profile of a trajectory.
    Reconstruct,
    /// Run the invariant and monotonicity suite.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Integrate => "integrate",
            Command::Sweep => "sweep",
            Command::Bisect => "bisect",
            Command::Classify => "classify",
            Command::Reconstruct => "reconstruct",
            Command::Verify => "verify",
        }
    }
}

/// Flags override the configuration file.
#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub steady: bool,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub x: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub y: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t1: Option<f64>,
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
    #[arg(long, global = true)]
    pub atol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true)]
    pub dense: Option<usize>,
    #[arg(long = "theta-lo", global = true, allow_negative_numbers = true)]
    pub theta_lo: Option<f64>,
    #[arg(long = "theta-hi", global = true, allow_negative_numbers = true)]
    pub theta_hi: Option<f64>,
    #[arg(long, global = true)]
    pub iters: Option<usize>,
    /// Also write gnuplot-ready `.dat` files.
    #[arg(long, global = true)]
    pub gnuplot: bool,
}

impl Flags {
    fn overlay(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($f:ident),*) => {$(if let Some(v) = self.$f.clone() { cfg.$f = v; })*};
        }
        macro_rules! set_opt {
            ($($f:ident),*) => {$(if self.$f.is_some() { cfg.$f = self.$f; })*};
        }
        set!(n, lambda, delta, t0, t1, rtol, atol, seed, out, count, iters);
        set_opt!(omega, x, y, theta, horizon, dense, theta_lo, theta_hi);
        cfg.steady |= self.steady;
        cfg.gnuplot |= self.gnuplot;
    }
}

/// File contents merged with flags, then validated.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        cfg.apply_json(&v)?;
    }
    flags.overlay(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub exit_code: i32,
    pub summary: String,
}

struct Output<'a> {
    cfg: &'a RunConfig,
    command: Command,
    files: Vec<(PathBuf, String)>,
}

impl<'a> Output<'a> {
    fn new(cfg: &'a RunConfig, command: Command) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out).map_err(|e| CliError::io(&cfg.out, e))?;
        Ok(Self {
            cfg,
            command,
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.cfg.out.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.files.push((path, hex::encode(Sha256::digest(bytes))));
        Ok(())
    }

    fn table(&mut self, stem: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        self.write(&format!("{stem}.csv"), &csv_bytes(header, rows)?)?;
        if self.cfg.gnuplot {
            self.write(&format!("{stem}.dat"), &dat_bytes(header, rows).into_bytes())?;
        }
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(v).expect("json serializes");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn finish(mut self, extra: Value, exit_code: i32, summary: String) -> Result<Outcome, CliError> {
        let outputs: Vec<Value> = self
            .files
            .iter()
            .map(|(p, h)| {
                json!({
                    "file": p.file_name().map(|s| s.to_string_lossy().into_owned()),
                    "sha256": h,
                })
            })
            .collect();
        let manifest = json!({
            "tool": TOOL_NAME,
            "version": TOOL_VERSION,
            "command": self.command.name(),
            "config_hash": self.cfg.hash(),
            "config": self.cfg,
            "outputs": outputs,
            "result": extra,
        });
        self.json("manifest.json", &manifest)?;
        Ok(Outcome {
            files: self.files.into_iter().map(|(p, _)| p).collect(),
            exit_code,
            summary,
        })
    }
}

fn csv_bytes(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Numerical(format!("csv encoding: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Numerical(format!("csv encoding: {e}")))
}

fn dat_bytes(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("# {}\n", header.join(" "));
    for row in rows {
        let cols: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        s.push_str(&cols.join(" "));
        s.push('\n');
    }
    s
}

const TRAJ_HEADER: [&str; 6] = ["t", "omega", "x", "y", "r", "f"];

fn traj_row(s: &Sample) -> Vec<f64> {
    vec![s.t, s.omega(), s.x(), s.y(), s.r(), s.f()]
}

fn traj_rows(traj: &Trajectory, dense: Option<usize>) -> Vec<Vec<f64>> {
    match dense {
        Some(c) => traj.resample(c).iter().map(traj_row).collect(),
        None => traj.samples().iter().map(traj_row).collect(),
    }
}

fn run_summary(traj: &Trajectory) -> Value {
    json!({
        "termination": traj.termination(),
        "t_end": traj.last().t,
        "events": traj.events(),
        "stats": traj.stats(),
    })
}

fn underflow_code(trajs: &[&Trajectory]) -> i32 {
    if trajs.iter().any(|t| t.termination() == Termination::StepUnderflow) {
        EXIT_NUMERICAL
    } else {
        EXIT_OK
    }
}

pub fn cmd_integrate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let start = cfg.start(&params)?;
    let traj = integrate(&params, start, (cfg.t0, cfg.t1), &cfg.options(), &cfg.events)
        .map_err(lib_err("events"))?;
    let mut out = Output::new(cfg, Command::Integrate)?;
    out.table("trajectory", &TRAJ_HEADER, &traj_rows(&traj, cfg.dense))?;
    let code = underflow_code(&[&traj]);
    let summary = format!("{} samples, {}", traj.samples().len(), traj.termination());
    out.finish(run_summary(&traj), code, summary)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let lo = cfg.theta_lo.unwrap_or(-1.5);
    let hi = cfg.theta_hi.unwrap_or(1.5);
    let horizon = cfg.horizon.unwrap_or(40.0);
    let orbit = OrbitOptions {
        t_forward: horizon,
        t_backward: horizon,
        integration: cfg.options(),
    };
    let entries =
        sweep_unstable(&params, (lo, hi), cfg.count, cfg.delta, &orbit).map_err(lib_err("theta_lo"))?;
    let mut out = Output::new(cfg, Command::Sweep)?;
    let mut csv = b"theta,tag\n".to_vec();
    for e in &entries {
        csv.extend_from_slice(format!("{},{}\n", e.theta, e.classification.tag).as_bytes());
    }
    out.write("sweep.csv", &csv)?;
    out.json("sweep.json", &serde_json::to_value(&entries).unwrap_or(Value::Null))?;
    let summary = format!("{} seeds classified", entries.len());
    out.finish(json!({"theta_range": [lo, hi], "horizon": horizon}), EXIT_OK, summary)
}

pub fn cmd_bisect(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let opts = BisectOptions {
        delta: cfg.delta,
        iters: cfg.iters,
        horizon: cfg.horizon.unwrap_or(400.0),
        integration: cfg.options(),
        ..Default::default()
    };
    let (dlo, dhi) = suggested_bracket(&params, cfg.delta);
    let lo = cfg.theta_lo.unwrap_or(dlo);
    let hi = cfg.theta_hi.unwrap_or(dhi);
    let res = bisect_heteroclinic(&params, lo, hi, &opts).map_err(lib_err("theta_lo"))?;
    let mut out = Output::new(cfg, Command::Bisect)?;
    let rows: Vec<Vec<f64>> = res
        .backward
        .samples()
        .iter()
        .rev()
        .chain(res.trajectory.samples().iter().skip(1))
        .map(traj_row)
        .collect();
    out.table("heteroclinic", &TRAJ_HEADER, &rows)?;
    let report = json!({
        "theta": res.theta,
        "bracket": [res.bracket.0, res.bracket.1],
        "iterations": res.iterations,
        "reached_p1": res.reached_p1,
        "min_distance_p1": res.min_distance_p1,
        "max_line_deviation": res.max_line_deviation,
        "max_ellipse_deviation": res.max_ellipse_deviation,
        "horizon": opts.horizon,
        "rho": opts.rho,
    });
    out.json("bisect.json", &report)?;
    let summary = format!(
        "theta* = {} after {} iterations, ellipse deviation {:.3e}",
        res.theta, res.iterations, res.max_ellipse_deviation
    );
    let code = underflow_code(&[&res.trajectory, &res.backward]);
    out.finish(report, code, summary)
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let start = cfg.start(&params)?;
    let horizon = cfg.horizon.unwrap_or(40.0);
    let orbit = integrate_orbit(
        &params,
        start,
        &OrbitOptions {
            t_forward: horizon,
            t_backward: horizon,
            integration: cfg.options(),
        },
    )
    .map_err(lib_err("omega"))?;
    let c = classify(&orbit);
    let report = json!({
        "tag": c.tag.to_string(),
        "evidence": c.evidence,
        "forward": {
            "termination": orbit.forward.termination(),
            "completeness": estimate_completeness(&orbit.forward),
        },
        "backward": {
            "termination": orbit.backward.termination(),
            "completeness": estimate_completeness(&orbit.backward),
        },
        "horizon": horizon,
    });
    let mut out = Output::new(cfg, Command::Classify)?;
    out.json("classification.json", &report)?;
    let code = underflow_code(&[&orbit.forward, &orbit.backward]);
    out.finish(report, code, c.tag.to_string())
}

pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let start = cfg.start(&params)?;
    let traj = integrate(&params, start, (cfg.t0, cfg.t1), &cfg.options(), &cfg.events)
        .map_err(lib_err("events"))?;
    let profile = match cfg.dense {
        Some(c) => reconstruct_profile_dense(&traj, 0.0, c),
        None => reconstruct_profile(&traj, 0.0),
    }
    .map_err(lib_err("omega"))?;
    let identity = hamilton_identity(&params, &profile);
    let rows: Vec<Vec<f64>> = (0..profile.len())
        .map(|i| {
            vec![
                profile.r[i],
                profile.omega[i],
                profile.x[i],
                profile.fprime[i],
                profile.f[i],
                profile.nu1[i],
                profile.nu2[i],
                profile.scalar[i],
                identity[i],
            ]
        })
        .collect();
    let mut out = Output::new(cfg, Command::Reconstruct)?;
    out.table(
        "profile",
        &["r", "omega", "x", "fprime", "f", "nu1", "nu2", "R", "identity"],
        &rows,
    )?;
    let spread = identity.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - identity.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut extra = run_summary(&traj);
    extra["identity_spread"] = json!(spread);
    let code = underflow_code(&[&traj]);
    out.finish(extra, code, format!("{} profile points", profile.len()))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let report = run_lemma_suite(&params, cfg.seed, &cfg.options()).map_err(lib_err("n"))?;
    let mut out = Output::new(cfg, Command::Verify)?;
    let v = serde_json::to_value(&report).unwrap_or(Value::Null);
    out.json("report.json", &v)?;
    let failed: Vec<&str> = report
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    let summary = if failed.is_empty() {
        format!("all {} checks passed", report.checks.len())
    } else {
        format!("failed: {}", failed.join(", "))
    };
    let code = if report.passed { EXIT_OK } else { EXIT_VERIFY };
    out.finish(json!({"passed": report.passed, "failed": failed}), code, summary)
}

pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Integrate => cmd_integrate(cfg),
        Command::Sweep => cmd_sweep(cfg),
        Command::Bisect => cmd_bisect(cfg),
        Command::Classify => cmd_classify(cfg),
        Command::Reconstruct => cmd_reconstruct(cfg),
        Command::Verify => cmd_verify(cfg),
    }
}

/// Parses `args` (program name first), runs, reports on stderr and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = resolve_config(&cli.flags).and_then(|cfg| execute(cli.command, &cfg));
    match result {
        Ok(o) => {
            eprintln!("{}: {}", cli.command.name(), o.summary);
            o.exit_code
        }
        Err(e) => {
            eprintln!("{TOOL_NAME}: {e}");
            e.exit_code()
        }
    }
}

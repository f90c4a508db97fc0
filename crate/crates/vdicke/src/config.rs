//! Run configuration: the TOML schema, command-line overrides and validation.
//!
//! A config file looks like
//!
//! ```toml
//! schema_version = 1
//! task = "sweep-closed"          # optional; must match the subcommand
//! description = "free text"
//! seed = 7                       # seeds the extra solver restarts
//! workers = 4
//!
//! [params]                       # absent keys keep the reference values
//! omega = 2.0
//! omega0 = 0.5
//! lambda1 = 0.3                  # or lambda_r + nu
//! phi = "7pi/16"                 # angles accept "pi" expressions
//! kappa = 0.1
//!
//! [grid]                         # optional; absent means a single point
//! x = { axis = "lambda1", start = 0.0, stop = 1.5, count = 101 }
//! y = { axis = "lambda2", start = 0.0, stop = 1.5, count = 101 }
//! ratio = 0.41                   # fixed lambda2/lambda1 for lambda_r axes
//!
//! [tolerances]
//! [dynamics]
//! [inverted]
//! [output]
//! ```
//!
//! Every numeric field accepts either a number or a string such as `"0.25pi"`,
//! `"pi/4"` or `"-7pi/16"`. Unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;
use vdicke_core::grid::{Axis, AxisRange, GridSpec};
use vdicke_core::model::ModelParams;

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on the number of grid points in one run.
pub const MAX_POINTS: usize = 10_000_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{origin}{}: field `{field}`: {message}", line.map(|l| format!(":{l}")).unwrap_or_default())]
    Invalid {
        origin: String,
        line: Option<usize>,
        field: String,
        message: String,
    },
    #[error("bad override `{0}`: {1}")]
    Override(String, String),
    #[error("{0}")]
    Usage(String),
}

/// A real number that may be written as a `pi` expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Num(i as f64)),
            Raw::Float(x) => Ok(Num(x)),
            Raw::Text(s) => parse_num(&s).map(Num).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses `1.5`, `pi`, `-pi/4`, `0.25pi`, `7pi/16` or `7*pi/16`.
pub fn parse_num(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let bad = || format!("`{text}` is not a number or pi expression");
    let Some((pre, post)) = s.split_once("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let coef = match pre.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let den = match post {
        "" => 1.0,
        d => d.strip_prefix('/').ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?,
    };
    if den == 0.0 {
        return Err(bad());
    }
    Ok(coef * PI / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    SweepClosed,
    SweepOpen,
    Evolve,
    InvertedRegion,
    FidelityScan,
    Spectrum,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        TaskKind::SweepClosed,
        TaskKind::SweepOpen,
        TaskKind::Evolve,
        TaskKind::InvertedRegion,
        TaskKind::FidelityScan,
        TaskKind::Spectrum,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::SweepClosed => "sweep-closed",
            TaskKind::SweepOpen => "sweep-open",
            TaskKind::Evolve => "evolve",
            TaskKind::InvertedRegion => "inverted-region",
            TaskKind::FidelityScan => "fidelity-scan",
            TaskKind::Spectrum => "spectrum",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub omega: Option<Num>,
    pub omega0: Option<Num>,
    pub lambda1: Option<Num>,
    pub lambda2: Option<Num>,
    /// Polar form of the couplings; needs `nu` as well.
    pub lambda_r: Option<Num>,
    pub nu: Option<Num>,
    pub phi: Option<Num>,
    pub kappa: Option<Num>,
    pub n_atoms: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub axis: String,
    pub start: Num,
    pub stop: Num,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x: AxisSection,
    pub y: Option<AxisSection>,
    pub ratio: Option<Num>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest imaginary part for a spectrum to count as real.
    pub spectrum: f64,
    /// Margin on `min Re zeta` for rapidity stability.
    pub rapidity: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Relative state deviation accepted as a fixed point.
    pub fixed_point: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum: vdicke_core::closed::DEFAULT_SPECTRUM_TOL,
            rapidity: vdicke_core::open::RAPIDITY_TOL,
            rtol: 1e-9,
            atol: 1e-12,
            fixed_point: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Every atom in the lowest level.
    Normal,
    /// Every atom in the collective dark state of the point.
    Dark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMapKind {
    SingleAtom,
    ManyBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSection {
    /// Length of stored trajectories (`evolve`).
    pub t_end: f64,
    /// Sampling interval of stored trajectories.
    pub stride: f64,
    pub initial: InitialState,
    /// Initial cavity amplitude per square root of the atom number.
    pub initial_alpha: Num,
    /// Time before the attractor analysis starts; default depends on kappa.
    pub transient: Option<f64>,
    /// Length of each attractor analysis window.
    pub window: Option<f64>,
    /// Give up resolving the attractor after this time.
    pub max_time: Option<f64>,
    /// Run trajectories in `sweep-open` when no fixed point is stable.
    pub use_dynamics: bool,
    pub fidelity_map: FidelityMapKind,
    /// Random restarts added to the steady-state solver at every point.
    pub n_random_seeds: usize,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        Self {
            t_end: 200.0,
            stride: 0.1,
            initial: InitialState::Normal,
            initial_alpha: Num(0.01),
            transient: None,
            window: None,
            max_time: None,
            use_dynamics: true,
            fidelity_map: FidelityMapKind::SingleAtom,
            n_random_seeds: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvertedSection {
    pub n_theta: usize,
    pub n_n1: usize,
}

impl Default for InvertedSection {
    fn default() -> Self {
        Self { n_theta: 64, n_n1: 64 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    /// File stem of the outputs; defaults to the task name.
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub task: Option<TaskKind>,
    pub description: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub workers: Option<usize>,
    /// File in the `key = value` parameter format; `[params]` entries win.
    pub params_file: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsSection,
    pub grid: Option<GridSection>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub inverted: InvertedSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// Raw config text and where it came from.
#[derive(Debug, Clone)]
pub struct Source {
    pub origin: String,
    pub text: String,
    /// Directory for resolving relative paths inside the config.
    pub base_dir: PathBuf,
}

impl Source {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self {
            origin: path.display().to_string(),
            text,
            base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    pub fn inline(origin: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            origin: origin.into(),
            text: text.into(),
            base_dir: PathBuf::from("."),
        }
    }
}

/// Parses `source` and applies `key=value` overrides on top of it.
pub fn load(source: &Source, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let parse_err = |message: String| ConfigError::Parse {
        origin: source.origin.clone(),
        message,
    };
    if overrides.is_empty() {
        return toml::from_str(&source.text).map_err(|e| parse_err(e.to_string()));
    }
    let mut table: toml::Table = source.text.parse().map_err(|e: toml::de::Error| parse_err(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| parse_err(format!("after overrides: {e}")))
}

fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let err = |msg: &str| ConfigError::Override(item.to_string(), msg.to_string());
    let (key, raw) = item.split_once('=').ok_or_else(|| err("expected key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|k| k.is_empty()) {
        return Err(err("empty key segment"));
    }
    let raw = raw.trim();
    // Anything that is not a TOML literal is taken as a bare string.
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("split yields at least one segment");
    let mut node = table;
    for k in parents {
        let entry = node
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry.as_table_mut().ok_or_else(|| err("path crosses a non-table value"))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

/// 1-based line of `field` (dotted path) in TOML `text`, if it is written
/// there as `key = ...` under its table header or as an inline table.
pub fn locate(text: &str, field: &str) -> Option<usize> {
    let (table, key) = match field.rsplit_once('.') {
        Some((t, k)) => (t, k),
        None => ("", field),
    };
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(h) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = h.trim().to_string();
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        let k = k.trim();
        if current == table && k == key {
            return Some(i + 1);
        }
        // `x = { axis = ... }` inside `[grid]` holds `grid.x.axis`
        if let Some((outer, _)) = table.rsplit_once('.') {
            if current == outer && table.ends_with(&format!(".{k}")) {
                return Some(i + 1);
            }
        } else if current.is_empty() && table == k {
            return Some(i + 1);
        }
    }
    None
}

/// A config checked against the schema and resolved into core types.
#[derive(Debug, Clone)]
pub struct ValidatedRun {
    pub config: RunConfig,
    pub task: TaskKind,
    pub base: ModelParams,
    pub grid: Option<GridSpec>,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub name: String,
}

impl ValidatedRun {
    pub fn n_points(&self) -> usize {
        self.grid.as_ref().map_or(1, GridSpec::len)
    }
}

struct Checker<'a> {
    source: &'a Source,
}

impl Checker<'_> {
    fn fail(&self, field: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            origin: self.source.origin.clone(),
            line: locate(&self.source.text, field),
            field: field.to_string(),
            message: message.into(),
        }
    }

    fn positive(&self, field: &str, v: f64) -> Result<(), ConfigError> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(self.fail(field, format!("must be finite and positive, got {v}")))
        }
    }

    fn params(&self, cfg: &RunConfig) -> Result<ModelParams, ConfigError> {
        let mut p = match &cfg.params_file {
            Some(rel) => {
                let path = self.source.base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io { path, source })?;
                ModelParams::from_kv_str(&text).map_err(|e| self.fail("params_file", e.to_string()))?
            }
            None => ModelParams::reference(),
        };
        let s = &cfg.params;
        let v = |n: Option<Num>, default: f64| n.map_or(default, |n| n.0);
        p = p
            .with_frequencies(v(s.omega, p.omega()), v(s.omega0, p.omega0()))
            .map_err(|e| self.fail("params.omega", e.to_string()))?;
        p = p.with_phi(v(s.phi, p.phi())).map_err(|e| self.fail("params.phi", e.to_string()))?;
        p = p.with_kappa(v(s.kappa, p.kappa())).map_err(|e| self.fail("params.kappa", e.to_string()))?;
        p = p
            .with_n_atoms(v(s.n_atoms, p.n_atoms()))
            .map_err(|e| self.fail("params.n_atoms", e.to_string()))?;
        match (s.lambda_r, s.nu) {
            (Some(lr), Some(nu)) => {
                if s.lambda1.is_some() || s.lambda2.is_some() {
                    return Err(self.fail("params.lambda_r", "give either lambda1/lambda2 or lambda_r/nu"));
                }
                p = p
                    .with_polar_couplings(lr.0, nu.0)
                    .map_err(|e| self.fail("params.lambda_r", e.to_string()))?;
            }
            (None, None) => {
                p = p
                    .with_couplings(v(s.lambda1, p.lambda1()), v(s.lambda2, p.lambda2()))
                    .map_err(|e| self.fail("params.lambda1", e.to_string()))?;
            }
            (Some(_), None) => return Err(self.fail("params.lambda_r", "lambda_r needs nu")),
            (None, Some(_)) => return Err(self.fail("params.nu", "nu needs lambda_r")),
        }
        Ok(p)
    }

    fn axis(&self, field: &str, a: &AxisSection) -> Result<AxisRange, ConfigError> {
        let axis = Axis::parse(&a.axis).ok_or_else(|| {
            let names: Vec<&str> = Axis::ALL.iter().map(|a| a.name()).collect();
            self.fail(&format!("{field}.axis"), format!("unknown axis `{}`; expected one of {}", a.axis, names.join(", ")))
        })?;
        AxisRange::new(axis, a.start.0, a.stop.0, a.count).map_err(|e| self.fail(&format!("{field}.start"), e.to_string()))
    }

    fn grid(&self, g: &GridSection) -> Result<GridSpec, ConfigError> {
        let x = self.axis("grid.x", &g.x)?;
        let mut spec = match &g.y {
            Some(y) => GridSpec::plane(x, self.axis("grid.y", y)?),
            None => GridSpec::line(x),
        };
        if let Some(r) = g.ratio {
            spec = spec.with_ratio(r.0);
        }
        spec.validate().map_err(|e| self.fail("grid", e.to_string()))?;
        let total = g.x.count.checked_mul(g.y.as_ref().map_or(1, |y| y.count));
        if total.map_or(true, |n| n > MAX_POINTS) {
            return Err(self.fail("grid", format!("more than {MAX_POINTS} points")));
        }
        Ok(spec)
    }
}

/// Checks `cfg` for the subcommand `task` and resolves it. Nothing is
/// written to disk here.
pub fn validate(cfg: RunConfig, task: TaskKind, source: &Source) -> Result<ValidatedRun, ConfigError> {
    let c = Checker { source };
    if cfg.schema_version != SCHEMA_VERSION {
        return Err(c.fail(
            "schema_version",
            format!("unsupported version {} (this build reads {SCHEMA_VERSION})", cfg.schema_version),
        ));
    }
    if let Some(t) = cfg.task {
        if t != task {
            return Err(c.fail("task", format!("config is for `{t}` but the subcommand is `{task}`")));
        }
    }
    let base = c.params(&cfg)?;
    let grid = cfg.grid.as_ref().map(|g| c.grid(g)).transpose()?;
    let workers = match cfg.workers {
        Some(0) => return Err(c.fail("workers", "must be at least 1")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let t = &cfg.tolerances;
    for (name, v) in [
        ("tolerances.spectrum", t.spectrum),
        ("tolerances.rapidity", t.rapidity),
        ("tolerances.rtol", t.rtol),
        ("tolerances.atol", t.atol),
        ("tolerances.fixed_point", t.fixed_point),
    ] {
        c.positive(name, v)?;
    }
    let d = &cfg.dynamics;
    c.positive("dynamics.t_end", d.t_end)?;
    c.positive("dynamics.stride", d.stride)?;
    if d.stride > d.t_end {
        return Err(c.fail("dynamics.stride", "must not exceed t_end"));
    }
    if !d.initial_alpha.0.is_finite() {
        return Err(c.fail("dynamics.initial_alpha", "must be finite"));
    }
    for (name, v) in [
        ("dynamics.transient", d.transient),
        ("dynamics.window", d.window),
        ("dynamics.max_time", d.max_time),
    ] {
        if let Some(v) = v {
            c.positive(name, v)?;
        }
    }
    let min = vdicke_core::open::MIN_INVERTED_GRID;
    if cfg.inverted.n_theta < min || cfg.inverted.n_n1 < min {
        return Err(c.fail("inverted.n_theta", format!("inverted grid needs at least {min} points per axis")));
    }
    let name = cfg.output.name.clone().unwrap_or_else(|| task.as_str().to_string());
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(c.fail("output.name", "must be a non-empty file stem"));
    }
    let out_dir = cfg.output.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    Ok(ValidatedRun {
        config: cfg,
        task,
        base,
        grid,
        workers,
        out_dir,
        name,
    })
}

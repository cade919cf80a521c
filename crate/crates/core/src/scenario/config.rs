//! INI-style scenario files.
//!
//! ```text
//! experiment = kg_locality
//!
//! [grid]
//! extent = 2048
//! length = 32
//!
//! [solver]
//! cfl = 1
//! seeds = 0..32
//! ```
//!
//! Top-level keys come before the first section. Lists are comma separated;
//! seeds also accept a half-open range `a..b`. `#` and `;` start comments.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    EmLocality,
    KgLocality,
    DiracLocality,
    SqrtKgLeakage,
    GaussianLocality,
    EntropyScan,
    TwoPointScan,
    NwProbe,
    FockRegional,
    Nonseparability,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::EmLocality,
        Experiment::KgLocality,
        Experiment::DiracLocality,
        Experiment::SqrtKgLeakage,
        Experiment::GaussianLocality,
        Experiment::EntropyScan,
        Experiment::TwoPointScan,
        Experiment::NwProbe,
        Experiment::FockRegional,
        Experiment::Nonseparability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::EmLocality => "em_locality",
            Experiment::KgLocality => "kg_locality",
            Experiment::DiracLocality => "dirac_locality",
            Experiment::SqrtKgLeakage => "sqrt_kg_leakage",
            Experiment::GaussianLocality => "gaussian_locality",
            Experiment::EntropyScan => "entropy_scan",
            Experiment::TwoPointScan => "two_point_scan",
            Experiment::NwProbe => "nw_probe",
            Experiment::FockRegional => "fock_regional",
            Experiment::Nonseparability => "nonseparability",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn summary(self) -> &'static str {
        match self {
            Experiment::EmLocality => "Lorenz-gauge potentials with a moving dipole, twin runs against the light cone",
            Experiment::KgLocality => "Klein-Gordon twin runs over random exterior bumps",
            Experiment::DiracLocality => "split-step Dirac twin runs over random exterior bumps",
            Experiment::SqrtKgLeakage => "square-root Klein-Gordon leakage against a second-order control",
            Experiment::GaussianLocality => "harmonic chain vacuum: lattice light cone and beyond-cone tail",
            Experiment::EntropyScan => "vacuum entanglement entropy of intervals",
            Experiment::TwoPointScan => "Wightman, commutator and Newton-Wigner two-point functions",
            Experiment::NwProbe => "Newton-Wigner wave function reaching a contracting slice",
            Experiment::FockRegional => "regional density matrices of random few-particle states",
            Experiment::Nonseparability => "singlet and triplet under a local flip",
        }
    }

    /// Experiments that draw random data and therefore need seeds.
    pub fn is_randomized(self) -> bool {
        matches!(
            self,
            Experiment::KgLocality | Experiment::DiracLocality | Experiment::EntropyScan | Experiment::FockRegional
        )
    }

    fn uses_grid(self) -> bool {
        !matches!(self, Experiment::TwoPointScan | Experiment::Nonseparability)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Int,
    Float,
    FloatList,
    IntList,
    Seeds,
    Bool,
    Text,
    Choice(&'static [&'static str]),
}

const BOUNDARIES: &[&str] = &["periodic", "absorbing_pad"];
const EVOLUTIONS: &[&str] = &["exact_spectral", "symplectic"];

const GRID_KEYS: &[(&str, Kind)] = &[
    ("dim", Kind::Int),
    ("extent", Kind::Int),
    ("length", Kind::Float),
    ("boundary", Kind::Choice(BOUNDARIES)),
];

const REGION_KEYS: &[(&str, Kind)] = &[
    ("center", Kind::FloatList),
    ("radius", Kind::Float),
    ("start", Kind::Int),
    ("len", Kind::Int),
];

const SOLVER_KEYS: &[(&str, Kind)] = &[
    ("mass", Kind::Float),
    ("cfl", Kind::Float),
    ("steps", Kind::Int),
    ("seeds", Kind::Seeds),
    ("half_width", Kind::Float),
    ("guard", Kind::Int),
    ("time", Kind::Float),
    ("dt", Kind::Float),
    ("evolution", Kind::Choice(EVOLUTIONS)),
    ("margin", Kind::Int),
    ("margins", Kind::IntList),
    ("displacement", Kind::Float),
    ("levels", Kind::IntList),
    ("lengths", Kind::IntList),
    ("distances", Kind::FloatList),
    ("r", Kind::FloatList),
    ("t", Kind::FloatList),
    ("falloff_r", Kind::FloatList),
    ("sigma", Kind::Float),
    ("cutoff", Kind::Float),
    ("nodes", Kind::Int),
    ("n_max", Kind::Int),
    ("velocity", Kind::Float),
    ("charge", Kind::Float),
    ("intervals", Kind::Int),
];

const OUTPUT_KEYS: &[(&str, Kind)] = &[("dir", Kind::Text), ("csv", Kind::Bool), ("plot_script", Kind::Bool)];

/// Per-experiment defaults as raw text, typed by the schema above. Keys not
/// listed for an experiment are rejected.
fn defaults(exp: Experiment) -> &'static [(&'static str, &'static str, &'static str)] {
    use Experiment::*;
    match exp {
        KgLocality => &[
            ("grid", "dim", "1"),
            ("grid", "extent", "2048"),
            ("grid", "length", "32"),
            ("grid", "boundary", "periodic"),
            ("region", "center", "16"),
            ("region", "radius", "8"),
            ("solver", "mass", "0"),
            ("solver", "cfl", "1"),
            ("solver", "steps", "0"),
            ("solver", "seeds", "0..32"),
            ("solver", "half_width", "2"),
            ("solver", "guard", "2"),
            ("checks", "inside_max", "1e-13"),
            ("checks", "frustum_slack_max", "1e-12"),
        ],
        EmLocality => &[
            ("grid", "dim", "1"),
            ("grid", "extent", "2048"),
            ("grid", "length", "32"),
            ("grid", "boundary", "periodic"),
            ("region", "center", "16"),
            ("region", "radius", "8"),
            ("solver", "cfl", "1"),
            ("solver", "steps", "0"),
            ("solver", "velocity", "0.3"),
            ("solver", "charge", "1"),
            ("solver", "half_width", "1"),
            ("solver", "guard", "2"),
            ("checks", "inside_max", "1e-13"),
            ("checks", "lorenz_constant", "1"),
            ("checks", "continuity_constant", "10"),
        ],
        DiracLocality => &[
            ("grid", "dim", "1"),
            ("grid", "extent", "2048"),
            ("grid", "length", "32"),
            ("grid", "boundary", "periodic"),
            ("region", "center", "16"),
            ("region", "radius", "8"),
            ("solver", "mass", "1"),
            ("solver", "cfl", "1"),
            ("solver", "steps", "0"),
            ("solver", "seeds", "0..8"),
            ("solver", "half_width", "2"),
            ("solver", "guard", "2"),
            ("checks", "inside_max", "1e-13"),
            ("checks", "frustum_slack_max", "1e-12"),
        ],
        SqrtKgLeakage => &[
            ("grid", "length", "64"),
            ("solver", "levels", "4096, 8192, 16384"),
            ("solver", "mass", "1"),
            ("solver", "time", "0.25"),
            ("solver", "half_width", "0.0625"),
            ("solver", "cfl", "0.5"),
            ("checks", "leak_min", "1e-8"),
            ("checks", "stability_max", "0.25"),
            ("checks", "control_order_min", "1.9"),
            ("checks", "contrast_min", "1e3"),
        ],
        GaussianLocality => &[
            ("grid", "extent", "256"),
            ("region", "center", "128"),
            ("region", "radius", "48"),
            ("solver", "mass", "0.5"),
            ("solver", "dt", "0.5"),
            ("solver", "margin", "32"),
            ("solver", "displacement", "1"),
            ("solver", "time", "8"),
            ("solver", "margins", "2, 4, 6, 8, 10, 12"),
            ("checks", "vacuum_nu_max", "1e-10"),
            ("checks", "tail_r2_min", "0.95"),
        ],
        EntropyScan => &[
            ("grid", "extent", "128"),
            ("solver", "mass", "1e-3"),
            ("solver", "lengths", "4, 6, 8, 12, 16, 24, 32"),
            ("solver", "seeds", "0..10"),
            ("checks", "slope_min", "0.25"),
            ("checks", "slope_max", "0.45"),
            ("checks", "symmetry_max", "1e-8"),
        ],
        TwoPointScan => &[
            ("solver", "mass", "1"),
            ("solver", "r", "2, 3, 4, 5"),
            ("solver", "t", "0.5, 1"),
            ("solver", "falloff_r", "14, 16, 18, 20"),
            ("solver", "sigma", "0.1"),
            ("solver", "cutoff", "400"),
            ("solver", "nodes", "16"),
            ("checks", "commutator_max", "1e-8"),
            ("checks", "contrast_min", "1e3"),
            ("checks", "falloff_rel_tol", "0.2"),
        ],
        NwProbe => &[
            ("grid", "extent", "4096"),
            ("grid", "length", "64"),
            ("region", "center", "24"),
            ("region", "radius", "8"),
            ("solver", "mass", "1"),
            ("solver", "time", "1"),
            ("solver", "half_width", "0.5"),
            ("solver", "distances", "8, 10, 12, 14"),
            ("checks", "penetration_min", "1e-10"),
            ("checks", "falloff_rel_tol", "0.2"),
        ],
        FockRegional => &[
            ("grid", "extent", "12"),
            ("grid", "length", "12"),
            ("region", "start", "0"),
            ("region", "len", "6"),
            ("solver", "n_max", "2"),
            ("solver", "seeds", "0..8"),
            ("checks", "trace_tol", "1e-10"),
            ("checks", "eigen_floor", "1e-10"),
            ("checks", "hermitian_tol", "1e-12"),
        ],
        Nonseparability => &[("checks", "reduced_tol", "1e-15"), ("checks", "fidelity_tol", "1e-15")],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(usize),
    Float(f64),
    FloatList(Vec<f64>),
    IntList(Vec<usize>),
    Seeds(Vec<u64>),
    Bool(bool),
    Text(String),
}

/// One problem found while reading a scenario, with its line when known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub name: String,
    /// Every setting as `section.key`, defaults filled in.
    pub values: BTreeMap<String, Value>,
    pub out_dir: PathBuf,
    pub write_csv: bool,
    pub plot_script: bool,
}

impl ScenarioConfig {
    fn get(&self, key: &str) -> &Value {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("{key} is not a setting of {}", self.experiment))
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn float(&self, key: &str) -> f64 {
        match self.get(key) {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            v => panic!("{key} is not a number: {v:?}"),
        }
    }

    pub fn int(&self, key: &str) -> usize {
        match self.get(key) {
            Value::Int(v) => *v,
            v => panic!("{key} is not an integer: {v:?}"),
        }
    }

    pub fn floats(&self, key: &str) -> Vec<f64> {
        match self.get(key) {
            Value::FloatList(v) => v.clone(),
            v => panic!("{key} is not a list: {v:?}"),
        }
    }

    pub fn ints(&self, key: &str) -> Vec<usize> {
        match self.get(key) {
            Value::IntList(v) => v.clone(),
            v => panic!("{key} is not a list: {v:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        match self.get(key) {
            Value::Text(v) => v,
            v => panic!("{key} is not text: {v:?}"),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        match self.values.get("solver.seeds") {
            Some(Value::Seeds(v)) => v.clone(),
            _ => Vec::new(),
        }
    }

    /// Replaces the seed list with a single seed; a no-op for experiments
    /// without randomness.
    pub fn override_seed(&mut self, seed: u64) {
        if self.experiment.is_randomized() {
            self.values.insert("solver.seeds".into(), Value::Seeds(vec![seed]));
        }
    }
}

fn schema(section: &str) -> Option<&'static [(&'static str, Kind)]> {
    match section {
        "grid" => Some(GRID_KEYS),
        "region" => Some(REGION_KEYS),
        "solver" => Some(SOLVER_KEYS),
        "output" => Some(OUTPUT_KEYS),
        _ => None,
    }
}

fn kind_of(exp: Experiment, section: &str, key: &str) -> Option<Kind> {
    if section == "checks" {
        return defaults(exp).iter().any(|(s, k, _)| *s == "checks" && *k == key).then_some(Kind::Float);
    }
    schema(section)?.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn parse_value(kind: Kind, raw: &str) -> Result<Value, String> {
    let float = |s: &str| -> Result<f64, String> {
        let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("`{}` is not finite", s.trim()))
        }
    };
    let int = |s: &str| -> Result<usize, String> {
        s.trim().parse().map_err(|_| format!("`{}` is not a non-negative integer", s.trim()))
    };
    let items = |s: &str| -> Vec<String> {
        s.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect()
    };
    match kind {
        Kind::Int => int(raw).map(Value::Int),
        Kind::Float => float(raw).map(Value::Float),
        Kind::FloatList => items(raw).iter().map(|s| float(s)).collect::<Result<_, _>>().map(Value::FloatList),
        Kind::IntList => items(raw).iter().map(|s| int(s)).collect::<Result<_, _>>().map(Value::IntList),
        Kind::Seeds => {
            if let Some((a, b)) = raw.split_once("..") {
                let (a, b) = (int(a)? as u64, int(b)? as u64);
                Ok(Value::Seeds((a..b).collect()))
            } else {
                items(raw)
                    .iter()
                    .map(|s| int(s).map(|v| v as u64))
                    .collect::<Result<_, _>>()
                    .map(Value::Seeds)
            }
        }
        Kind::Bool => match raw.trim() {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            other => Err(format!("`{other}` is not true or false")),
        },
        Kind::Text => Ok(Value::Text(raw.trim().to_string())),
        Kind::Choice(options) => {
            let v = raw.trim();
            if options.contains(&v) {
                Ok(Value::Text(v.to_string()))
            } else {
                Err(format!("`{v}` is not one of {}", options.join(", ")))
            }
        }
    }
}

struct Entry {
    section: String,
    key: String,
    raw: String,
    line: usize,
}

/// Splits the text into entries; syntax problems are collected, not fatal.
fn tokenize(text: &str, issues: &mut Vec<ConfigIssue>) -> Vec<Entry> {
    let mut section = String::new();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw_line.split(['#', ';']).next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name) => {
                    let name = name.trim();
                    if name != "checks" && schema(name).is_none() {
                        issues.push(ConfigIssue {
                            line: Some(line),
                            message: format!(
                                "unknown section [{name}]; expected one of [grid], [region], [solver], [checks], [output]"
                            ),
                        });
                    }
                    section = name.to_string();
                }
                None => issues.push(ConfigIssue { line: Some(line), message: format!("malformed section header `{body}`") }),
            }
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            issues.push(ConfigIssue { line: Some(line), message: format!("expected `key = value`, got `{body}`") });
            continue;
        };
        let key = key.trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_') {
            issues.push(ConfigIssue { line: Some(line), message: format!("key `{key}` must be lower_snake_case") });
            continue;
        }
        if !seen.insert((section.clone(), key.to_string())) {
            issues.push(ConfigIssue { line: Some(line), message: format!("duplicate key `{key}`") });
            continue;
        }
        out.push(Entry { section: section.clone(), key: key.to_string(), raw: value.trim().to_string(), line });
    }
    out
}

/// Parses and validates a scenario. Every problem found is returned, each
/// with its line number when it has one.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<ConfigIssue>> {
    let mut issues = Vec::new();
    let entries = tokenize(text, &mut issues);

    let mut name = String::new();
    let mut experiment = None;
    let mut exp_line = None;
    for e in entries.iter().filter(|e| e.section.is_empty()) {
        match e.key.as_str() {
            "experiment" => {
                exp_line = Some(e.line);
                match Experiment::from_name(&e.raw) {
                    Some(x) => experiment = Some(x),
                    None => issues.push(ConfigIssue {
                        line: Some(e.line),
                        message: format!(
                            "unknown experiment `{}`; valid names: {}",
                            e.raw,
                            Experiment::ALL.map(|x| x.name()).join(", ")
                        ),
                    }),
                }
            }
            "name" => name = e.raw.clone(),
            other => issues.push(ConfigIssue {
                line: Some(e.line),
                message: format!("unknown top-level key `{other}`; expected experiment or name"),
            }),
        }
    }
    let Some(exp) = experiment else {
        if exp_line.is_none() {
            issues.push(ConfigIssue { line: None, message: "missing required key `experiment`".into() });
        }
        return Err(issues);
    };

    let mut values = BTreeMap::new();
    let mut lines = BTreeMap::new();
    for (s, k, raw) in defaults(exp) {
        let kind = kind_of(exp, s, k).expect("default outside the schema");
        values.insert(format!("{s}.{k}"), parse_value(kind, raw).expect("bad default"));
    }
    let (mut out_dir, mut write_csv, mut plot_script) = (PathBuf::from("out"), true, true);
    for e in entries.iter().filter(|e| !e.section.is_empty()) {
        let full = format!("{}.{}", e.section, e.key);
        if e.section == "output" {
            match kind_of(exp, "output", &e.key).map(|k| parse_value(k, &e.raw)) {
                Some(Ok(Value::Text(d))) => out_dir = PathBuf::from(d),
                Some(Ok(Value::Bool(b))) if e.key == "csv" => write_csv = b,
                Some(Ok(Value::Bool(b))) => plot_script = b,
                Some(Ok(_)) => unreachable!(),
                Some(Err(m)) => issues.push(ConfigIssue { line: Some(e.line), message: format!("{full}: {m}") }),
                None => issues.push(ConfigIssue {
                    line: Some(e.line),
                    message: format!("unknown key `{full}`; expected dir, csv or plot_script"),
                }),
            }
            continue;
        }
        if schema(&e.section).is_none() && e.section != "checks" {
            continue; // already reported as an unknown section
        }
        let Some(kind) = kind_of(exp, &e.section, &e.key) else {
            issues.push(ConfigIssue { line: Some(e.line), message: format!("unknown key `{full}`") });
            continue;
        };
        if !values.contains_key(&full) {
            issues.push(ConfigIssue { line: Some(e.line), message: format!("`{full}` is not used by {exp}") });
            continue;
        }
        match parse_value(kind, &e.raw) {
            Ok(v) => {
                values.insert(full.clone(), v);
                lines.insert(full, e.line);
            }
            Err(m) => issues.push(ConfigIssue { line: Some(e.line), message: format!("{full}: {m}") }),
        }
    }

    let cfg = ScenarioConfig { experiment: exp, name, values, out_dir, write_csv, plot_script };
    validate_ranges(&cfg, &lines, &mut issues);
    if issues.is_empty() {
        Ok(cfg)
    } else {
        issues.sort_by_key(|i| i.line.unwrap_or(0));
        Err(issues)
    }
}

fn validate_ranges(cfg: &ScenarioConfig, lines: &BTreeMap<String, usize>, issues: &mut Vec<ConfigIssue>) {
    let mut bad = |key: &str, msg: String| {
        issues.push(ConfigIssue { line: lines.get(key).copied(), message: msg });
    };
    let exp = cfg.experiment;
    for (key, v) in &cfg.values {
        if let (true, Value::Float(x)) = (key.starts_with("checks."), v) {
            if !(*x > 0.0) {
                bad(key, format!("{key} must be > 0, got {x}"));
            }
        }
    }
    if cfg.has("grid.dim") {
        let dim = cfg.int("grid.dim");
        if dim != 1 && dim != 3 {
            bad("grid.dim", format!("grid.dim must be 1 or 3, got {dim}"));
        }
    }
    if exp.uses_grid() && cfg.has("grid.extent") && cfg.int("grid.extent") < 4 {
        bad("grid.extent", format!("grid.extent must be >= 4, got {}", cfg.int("grid.extent")));
    }
    if cfg.has("grid.length") && !(cfg.float("grid.length") > 0.0) {
        bad("grid.length", "grid.length must be > 0".into());
    }
    if cfg.has("solver.cfl") {
        let c = cfg.float("solver.cfl");
        if !(c > 0.0 && c <= 1.0) {
            bad("solver.cfl", format!("cfl must be in (0,1], got {c}"));
        }
    }
    if cfg.has("solver.mass") {
        let m = cfg.float("solver.mass");
        let needs_positive = matches!(
            exp,
            Experiment::SqrtKgLeakage | Experiment::TwoPointScan | Experiment::NwProbe | Experiment::GaussianLocality
        );
        if m < 0.0 || (needs_positive && m == 0.0) {
            let rule = if needs_positive { "> 0" } else { ">= 0" };
            bad("solver.mass", format!("mass must be {rule} for {exp}, got {m}"));
        }
    }
    for key in ["region.radius", "solver.half_width", "solver.time", "solver.dt", "solver.sigma", "solver.cutoff"] {
        if cfg.has(key) && !(cfg.float(key) > 0.0) {
            bad(key, format!("{key} must be > 0, got {}", cfg.float(key)));
        }
    }
    if exp.is_randomized() && cfg.seeds().is_empty() {
        bad("solver.seeds", "solver.seeds must not be empty".into());
    }
    if cfg.has("solver.n_max") && cfg.int("solver.n_max") > 3 {
        bad("solver.n_max", format!("n_max must be <= 3, got {}", cfg.int("solver.n_max")));
    }
    if cfg.has("solver.nodes") && cfg.int("solver.nodes") < 4 {
        bad("solver.nodes", "solver.nodes must be >= 4".into());
    }
    if cfg.has("solver.velocity") && cfg.float("solver.velocity").abs() >= 1.0 {
        bad("solver.velocity", "source velocity must satisfy |v| < 1".into());
    }
    if cfg.has("region.center") && cfg.has("grid.dim") {
        let (n, dim) = (cfg.floats("region.center").len(), cfg.int("grid.dim"));
        if (dim == 1 || dim == 3) && n != dim {
            bad("region.center", format!("region.center has {n} coordinates for a {dim}-d grid"));
        }
    }
    for key in ["solver.levels", "solver.lengths", "solver.margins"] {
        if cfg.has(key) {
            let v = cfg.ints(key);
            if v.len() < 2 {
                bad(key, format!("{key} needs at least two entries"));
            } else if v.windows(2).any(|w| w[0] >= w[1]) {
                bad(key, format!("{key} must be strictly increasing"));
            }
        }
    }
    for key in ["solver.distances", "solver.falloff_r", "solver.r", "solver.t"] {
        if cfg.has(key) && cfg.floats(key).is_empty() {
            bad(key, format!("{key} must not be empty"));
        }
    }
    for key in ["solver.distances", "solver.falloff_r"] {
        if cfg.has(key) && cfg.floats(key).len() < 2 {
            bad(key, format!("a decay fit needs at least two points in {key}"));
        }
    }
    if cfg.has("checks.slope_min") && cfg.float("checks.slope_min") >= cfg.float("checks.slope_max") {
        bad("checks.slope_min", "checks.slope_min must be below checks.slope_max".into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config("experiment = kg_locality\n").unwrap();
        assert_eq!(cfg.int("grid.extent"), 2048);
        assert_eq!(cfg.float("solver.cfl"), 1.0);
        assert_eq!(cfg.seeds().len(), 32);
    }

    #[test]
    fn cfl_out_of_range() {
        let err = parse_config("experiment = kg_locality\n[solver]\ncfl = 1.5\n").unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, Some(3));
        assert!(err[0].message.contains("cfl must be in (0,1]"));
    }

    #[test]
    fn unknown_experiment_lists_names() {
        let err = parse_config("experiment = warp_drive\n").unwrap_err();
        assert!(err[0].message.contains("kg_locality") && err[0].message.contains("nonseparability"));
    }

    #[test]
    fn collects_every_error() {
        let text = "experiment = kg_locality\n[grid]\nextent = two\n[solver]\ncfl = 0\nwibble = 3\nseeds = \n";
        let err = parse_config(text).unwrap_err();
        let lines: Vec<_> = err.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![Some(3), Some(5), Some(6), Some(7)]);
    }
}

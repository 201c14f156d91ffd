//! Experiment runner: JSON configs in, reports and CSV plot data out.
//!
//! A run is a pure function of its resolved configuration. The report file
//! carries no timing information, so two runs with the same configuration and
//! seed write byte-identical reports; wall time goes to a sidecar file.

mod kinds;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::Error;

pub const TOOL: &str = "spectral-renorm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ValidateCovering,
    RenormIterate,
    RenormPoly,
    VerifyIdentities,
    Cmv,
    Measure,
    Lipschitz,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        Self::ValidateCovering,
        Self::RenormIterate,
        Self::RenormPoly,
        Self::VerifyIdentities,
        Self::Cmv,
        Self::Measure,
        Self::Lipschitz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ValidateCovering => "validate_covering",
            Self::RenormIterate => "renorm_iterate",
            Self::RenormPoly => "renorm_poly",
            Self::VerifyIdentities => "verify_identities",
            Self::Cmv => "cmv",
            Self::Measure => "measure",
            Self::Lipschitz => "lipschitz",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("numerical failure in check `{check}`: {source}")]
    Numeric {
        check: String,
        #[source]
        source: Error,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Schema(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn numeric(check: impl Into<String>) -> impl FnOnce(Error) -> Self {
        let check = check.into();
        move |source| Self::Numeric { check, source }
    }

    pub(crate) fn schema<E: fmt::Display>(context: &str) -> impl FnOnce(E) -> Self + '_ {
        move |e| Self::Schema(format!("{context}: {e}"))
    }
}

/// The on-disk configuration document.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    kind: Option<ExperimentKind>,
    #[serde(default)]
    parameters: Option<Value>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
}

/// A fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Kind-specific parameters; missing keys take their defaults.
    pub parameters: Value,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        Self { kind, parameters: Value::Object(Map::new()), seed: 0, output_dir: None }
    }

    pub fn with_parameters(mut self, parameters: Value) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Parses a configuration document. A kind given on the command line must
    /// agree with the one in the file, if the file names one.
    pub fn from_json(text: &str, kind: Option<ExperimentKind>) -> Result<Self, HarnessError> {
        let doc: ConfigDoc = serde_json::from_str(text).map_err(HarnessError::schema("config"))?;
        let kind = match (kind, doc.kind) {
            (Some(a), Some(b)) if a != b => {
                return Err(HarnessError::Schema(format!("config is for `{b}` but `{a}` was requested")))
            }
            (Some(k), _) | (None, Some(k)) => k,
            (None, None) => return Err(HarnessError::Schema("config does not name a kind".into())),
        };
        let parameters = match doc.parameters {
            None | Some(Value::Null) => Value::Object(Map::new()),
            Some(v @ Value::Object(_)) => v,
            Some(_) => return Err(HarnessError::Schema("parameters must be a JSON object".into())),
        };
        Ok(Self { kind, parameters, seed: doc.seed.unwrap_or(0), output_dir: doc.output_dir })
    }

    pub fn from_file(path: &Path, kind: Option<ExperimentKind>) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Schema(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text, kind)
    }
}

/// Typed parameters from a JSON object, rejecting unknown keys.
pub(crate) fn parse_params<T: DeserializeOwned>(v: &Value) -> Result<T, HarnessError> {
    let v = if v.is_null() { Value::Object(Map::new()) } else { v.clone() };
    serde_json::from_value(v).map_err(HarnessError::schema("parameters"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `value <= tolerance`.
    AtMost,
    /// `value < tolerance`.
    Below,
    /// `value >= tolerance`.
    AtLeast,
    /// `value` is finite; `tolerance` is unused.
    Finite,
    /// Reported measurement with no bound asserted.
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::Below => value < tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Finite => value.is_finite(),
            Comparison::Report => true,
        };
        Self { name: name.into(), value, tolerance, comparison, pass }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let bound = match self.comparison {
            Comparison::AtMost => format!("<= {:e}", self.tolerance),
            Comparison::Below => format!("< {:e}", self.tolerance),
            Comparison::AtLeast => format!(">= {:e}", self.tolerance),
            Comparison::Finite => "finite".to_string(),
            Comparison::Report => "reported".to_string(),
        };
        write!(f, "{status} {} = {:e} ({bound})", self.name, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub kind: ExperimentKind,
    /// Resolved configuration: parameters with defaults filled in, and seed.
    pub config: Value,
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub results: Map<String, Value>,
    pub passed: bool,
}

impl Report {
    pub fn failing(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A finished run: the report plus named CSV documents.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub plots: BTreeMap<String, Vec<u8>>,
    pub wall_time_s: f64,
}

impl RunOutput {
    /// Common prefix of every file written for this run.
    pub fn stem(&self) -> String {
        format!("{}-{}", self.report.kind, self.report.config_hash)
    }
}

/// Collects checks, results and plot data while a kind runs.
#[derive(Debug, Default)]
pub(crate) struct Context {
    prefix: String,
    checks: Vec<Check>,
    results: Map<String, Value>,
    plots: BTreeMap<String, Vec<u8>>,
}

impl Context {
    pub(crate) fn check(&mut self, name: &str, value: f64, tolerance: f64, cmp: Comparison) -> bool {
        let c = Check::new(format!("{}{name}", self.prefix), value, tolerance, cmp);
        log::debug!("{c}");
        let pass = c.pass;
        self.checks.push(c);
        pass
    }

    pub(crate) fn at_most(&mut self, name: &str, value: f64, tolerance: f64) -> bool {
        self.check(name, value, tolerance, Comparison::AtMost)
    }

    pub(crate) fn report(&mut self, name: &str, value: f64) {
        self.check(name, value, 0.0, Comparison::Report);
    }

    pub(crate) fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("result serializes");
        self.results.insert(format!("{}{key}", self.prefix), v);
    }

    pub(crate) fn plot(&mut self, name: &str, csv: Vec<u8>) {
        self.plots.insert(format!("{}{name}", self.prefix), csv);
    }

    /// Runs `f` with every name it records prefixed by `prefix.`.
    pub(crate) fn scoped<T>(&mut self, prefix: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let scoped = format!("{}{prefix}.", self.prefix);
        let saved = std::mem::replace(&mut self.prefix, scoped);
        let out = f(self);
        self.prefix = saved;
        out
    }
}

/// Numeric table as CSV with `{:?}` (shortest round-trip) formatting.
pub(crate) fn table_csv(header: &[String], rows: &[Vec<f64>]) -> Vec<u8> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    wr.write_record(header).expect("in-memory csv");
    for r in rows {
        wr.write_record(r.iter().map(|v| format!("{v:?}"))).expect("in-memory csv");
    }
    wr.into_inner().expect("in-memory csv")
}

pub(crate) fn measure_csv(rows: impl IntoIterator<Item = (f64, f64)>) -> Vec<u8> {
    let mut buf = Vec::new();
    crate::transfer::write_measure_csv(&mut buf, rows).expect("in-memory csv");
    buf
}

fn config_hash(config: &Value) -> String {
    let digest = Sha256::digest(serde_json::to_string(config).expect("config serializes").as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Runs one experiment. Checks that fail do not make this an error; inspect
/// [`Report::passed`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, HarnessError> {
    let start = Instant::now();
    let mut ctx = Context::default();
    log::info!("running {} (seed {})", cfg.kind, cfg.seed);
    let params = kinds::run(cfg.kind, &cfg.parameters, cfg.seed, &mut ctx)?;
    let config = serde_json::json!({
        "kind": cfg.kind,
        "parameters": params,
        "seed": cfg.seed,
    });
    let passed = ctx.checks.iter().all(|c| c.pass);
    let report = Report {
        tool: TOOL.into(),
        version: VERSION.into(),
        kind: cfg.kind,
        config_hash: config_hash(&config),
        config,
        checks: ctx.checks,
        results: ctx.results,
        passed,
    };
    Ok(RunOutput { report, plots: ctx.plots, wall_time_s: start.elapsed().as_secs_f64() })
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
    std::fs::write(&path, bytes).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    Ok(path)
}

fn ensure_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })
}

/// Writes `report-<kind>-<hash>.json` and the `.timing.json` sidecar.
pub fn write_report(run: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    let stem = format!("report-{}", run.stem());
    let timing = serde_json::json!({ "wall_time_s": run.wall_time_s });
    Ok(vec![
        write_file(dir.join(format!("{stem}.json")), run.report.to_json().as_bytes())?,
        write_file(
            dir.join(format!("{stem}.timing.json")),
            format!("{}\n", serde_json::to_string_pretty(&timing).unwrap()).as_bytes(),
        )?,
    ])
}

/// Writes every CSV document of the run as `<kind>-<hash>-<name>.csv`.
pub fn emit_plotdata(run: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    ensure_dir(dir)?;
    run.plots
        .iter()
        .map(|(name, bytes)| write_file(dir.join(format!("{}-{}.csv", run.stem(), name.replace('.', "-"))), bytes))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_must_agree() {
        let text = r#"{"kind": "cmv", "parameters": {}}"#;
        assert!(ExperimentConfig::from_json(text, Some(ExperimentKind::Cmv)).is_ok());
        let err = ExperimentConfig::from_json(text, Some(ExperimentKind::Measure)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_top_level_key_is_schema_error() {
        let err = ExperimentConfig::from_json(r#"{"kind": "cmv", "sed": 3}"#, None).unwrap_err();
        assert!(matches!(err, HarnessError::Schema(_)));
    }

    #[test]
    fn check_comparisons() {
        assert!(Check::new("a", 1.0, 1.0, Comparison::AtMost).pass);
        assert!(!Check::new("a", 1.0, 1.0, Comparison::Below).pass);
        assert!(!Check::new("a", f64::NAN, 1.0, Comparison::AtMost).pass);
        assert!(!Check::new("a", f64::INFINITY, 0.0, Comparison::Finite).pass);
        assert!(Check::new("a", f64::NAN, 0.0, Comparison::Report).pass);
    }

    #[test]
    fn hash_is_sixteen_hex_digits() {
        let h = config_hash(&serde_json::json!({"a": 1}));
        assert_eq!(h.len(), 16);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }

    #[test]
    fn empty_plot_measure_is_header_only() {
        assert_eq!(measure_csv(std::iter::empty()), b"support,weight\n");
    }
}

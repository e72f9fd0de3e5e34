//! Run directories, CSV tables and the summary record.

use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::RunError;

/// Environment variable naming the default output root.
pub const OUTPUT_DIR_ENV: &str = "RBK_OUTPUT_DIR";

const DEFAULT_OUTPUT_DIR: &str = "rbk-out";

/// `--out`, then `$RBK_OUTPUT_DIR`, then `./rbk-out`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

/// `<root>/<name>-<hash8>`, created if missing.
pub fn run_dir(root: &Path, config: &ExperimentConfig) -> Result<PathBuf, RunError> {
    let dir = root.join(format!("{}-{}", config.name, config.hash8()));
    fs::create_dir_all(&dir).map_err(|e| RunError::Io(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, path: &Path) -> Result<(), RunError> {
        let io = |e: csv::Error| RunError::Io(format!("{}: {e}", path.display()));
        let mut w = csv::Writer::from_path(path).map_err(io)?;
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row).map_err(io)?;
        }
        w.flush().map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        }
    }
}

/// Structured record written to `summary.toml` by every run.
pub struct Summary {
    pub command: &'static str,
    pub status: Status,
    pub threshold: f64,
    pub gated_value: Option<f64>,
    pub message: Option<String>,
    pub report: toml::Table,
    pub artifacts: Vec<String>,
}

impl Summary {
    pub fn new(command: &'static str, threshold: f64) -> Self {
        Self {
            command,
            status: Status::Error,
            threshold,
            gated_value: None,
            message: None,
            report: toml::Table::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn set<V: Into<toml::Value>>(&mut self, key: &str, value: V) {
        self.report.insert(key.to_string(), value.into());
    }

    pub fn set_serialized<T: serde::Serialize>(&mut self, key: &str, value: &T) {
        if let Ok(v) = toml::Value::try_from(value) {
            self.report.insert(key.to_string(), v);
        }
    }

    pub fn to_toml(&self, config: &ExperimentConfig) -> String {
        let mut root = toml::Table::new();
        root.insert("name".into(), config.name.clone().into());
        root.insert("command".into(), self.command.into());
        root.insert("config_hash".into(), config.hash8().into());
        root.insert("status".into(), self.status.as_str().into());
        root.insert("threshold".into(), self.threshold.into());
        if let Some(v) = self.gated_value {
            root.insert("gated_value".into(), v.into());
        }
        if let Some(m) = &self.message {
            root.insert("message".into(), m.clone().into());
        }
        root.insert("report".into(), toml::Value::Table(self.report.clone()));
        root.insert(
            "artifacts".into(),
            toml::Value::Array(self.artifacts.iter().cloned().map(toml::Value::String).collect()),
        );
        let echo: toml::Value = toml::from_str(&config.canonical()).expect("canonical config reparses");
        root.insert("config".into(), echo);
        toml::to_string(&root).expect("summary serializes")
    }

    pub fn write(&self, dir: &Path, config: &ExperimentConfig) -> Result<PathBuf, RunError> {
        let path = dir.join("summary.toml");
        fs::write(&path, self.to_toml(config)).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

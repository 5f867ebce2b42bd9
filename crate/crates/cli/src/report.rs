use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use lcslab_core::instanton::InstantonState;
use lcslab_core::DomainSpec;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `value <= tolerance`.
    AtMost,
    /// `value >= tolerance`.
    AtLeast,
    /// `|value - target| <= tolerance`.
    Near,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn evaluate(comparison: Comparison, value: f64, tolerance: f64, target: Option<f64>) -> bool {
        match comparison {
            Comparison::AtMost => value <= tolerance,
            Comparison::AtLeast => value >= tolerance,
            Comparison::Near => (value - target.unwrap_or(0.0)).abs() <= tolerance,
        }
    }
}

/// Collects checks for one command. Tolerances come from the command's
/// table, overridden by the config; overrides naming no check are rejected
/// before anything is computed.
pub struct Checks {
    table: BTreeMap<&'static str, f64>,
    pub list: Vec<Check>,
}

impl Checks {
    pub fn new(defaults: &[(&'static str, f64)], overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut table: BTreeMap<&'static str, f64> = defaults.iter().copied().collect();
        for (name, v) in overrides {
            match table.get_mut(name.as_str()) {
                Some(slot) => *slot = *v,
                None => bail!(
                    "tolerance override {name:?} names no check of this command (known: {})",
                    defaults.iter().map(|d| d.0).collect::<Vec<_>>().join(", ")
                ),
            }
        }
        Ok(Self { table, list: Vec::new() })
    }

    /// `name` may carry a `/instance` suffix; the tolerance is looked up by
    /// the part before it.
    fn tol(&self, name: &str) -> f64 {
        let key = name.split('/').next().unwrap_or(name);
        *self.table.get(key).unwrap_or_else(|| panic!("check {name} has no tolerance entry"))
    }

    fn push(&mut self, name: &str, value: f64, comparison: Comparison, target: Option<f64>) {
        let tolerance = self.tol(name);
        let pass = Check::evaluate(comparison, value, tolerance, target);
        self.list.push(Check { name: name.to_string(), value, tolerance, comparison, target, pass });
    }

    pub fn at_most(&mut self, name: &str, value: f64) {
        self.push(name, value, Comparison::AtMost, None);
    }

    pub fn at_least(&mut self, name: &str, value: f64) {
        self.push(name, value, Comparison::AtLeast, None);
    }

    pub fn near(&mut self, name: &str, value: f64, target: f64) {
        self.push(name, value, Comparison::Near, Some(target));
    }

    pub fn all_pass(&self) -> bool {
        self.list.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Serialize)]
pub struct ReportEnvelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub results: Value,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub artifacts: Vec<String>,
}

/// Files written next to the report.
pub struct Artifacts {
    dir: PathBuf,
    prefix: String,
    pub written: Vec<String>,
}

fn domain_line(spec: &DomainSpec) -> String {
    format!(
        "# domain kind={} half_length={} n_tau={} n_t={}",
        serde_json::to_value(spec.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        spec.half_length,
        spec.n_tau,
        spec.n_t
    )
}

impl Artifacts {
    pub fn new(dir: &Path, command: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), prefix: command.replace('-', "_"), written: Vec::new() })
    }

    fn path(&mut self, suffix: &str) -> PathBuf {
        let name = format!("{}_{suffix}", self.prefix);
        self.written.push(name.clone());
        self.dir.join(name)
    }

    /// Plain table with a header row.
    pub fn table(&mut self, suffix: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let file = File::create(self.path(suffix))?;
        write_rows(file, None, header, rows)
    }

    /// Row-major node table of a state plus extra per-node columns, preceded
    /// by a comment line with the domain spec.
    pub fn node_table(&mut self, suffix: &str, u: &InstantonState, extra: &[(&str, &[f64])]) -> Result<()> {
        let d = &u.domain;
        let mut header = vec!["i", "j", "tau", "t", "x1", "y1", "x2", "y2", "f"];
        header.extend(extra.iter().map(|e| e.0));
        let rows: Vec<Vec<f64>> = (0..d.len())
            .map(|k| {
                let (i, j) = d.coords(k);
                let (tau, t) = d.node_position(k);
                let w = &u.w[k];
                let mut row = vec![i as f64, j as f64, tau, t, w[0], w[1], w[2], w[3], u.f[k]];
                row.extend(extra.iter().map(|e| e.1[k]));
                row
            })
            .collect();
        let file = File::create(self.path(suffix))?;
        write_rows(file, Some(domain_line(&d.spec)), &header, &rows)
    }

    pub fn svg(&mut self, suffix: &str, body: String) -> Result<()> {
        std::fs::write(self.path(suffix), body)?;
        Ok(())
    }

    pub fn report(&self, envelope: &ReportEnvelope) -> Result<PathBuf> {
        let path = self.dir.join(format!("{}_report.json", self.prefix));
        let text = serde_json::to_string_pretty(envelope)?;
        std::fs::write(&path, text + "\n")?;
        Ok(path)
    }
}

fn write_rows<W: Write>(mut out: W, comment: Option<String>, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    if let Some(c) = comment {
        writeln!(out, "{c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(anyhow!("row has {} fields for {} columns", r.len(), header.len()));
        }
        w.write_record(r.iter().map(|v| format!("{v:e}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_defaults() {
        let mut o = BTreeMap::new();
        o.insert("gap".to_string(), 0.5);
        let mut c = Checks::new(&[("gap", 1e-6), ("order", 1.9)], &o).unwrap();
        c.at_most("gap", 0.4);
        c.at_least("order", 1.8);
        c.near("gap/second", 1.2, 1.0);
        assert_eq!(c.list[0].tolerance, 0.5);
        assert_eq!(c.list[2].tolerance, 0.5);
        assert!(c.list[0].pass && !c.list[1].pass && c.list[2].pass);
        assert!(!c.all_pass());
    }

    #[test]
    fn unknown_override_rejected() {
        let mut o = BTreeMap::new();
        o.insert("nope".to_string(), 0.5);
        assert!(Checks::new(&[("gap", 1e-6)], &o).is_err());
    }

    #[test]
    fn nan_never_passes() {
        let mut c = Checks::new(&[("x", 1.0)], &BTreeMap::new()).unwrap();
        c.at_most("x", f64::NAN);
        c.at_least("x", f64::NAN);
        c.near("x", f64::NAN, 0.0);
        assert!(c.list.iter().all(|k| !k.pass));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_rows(&mut buf, Some("# note".into()), &["a", "b"], &[vec![1.0, 0.5], vec![-2.0, 3e-9]]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "# note\na,b\n1e0,5e-1\n-2e0,3e-9\n");
        assert!(write_rows(Vec::new(), None, &["a"], &[vec![1.0, 2.0]]).is_err());
    }
}

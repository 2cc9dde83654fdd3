//! Verification reports and atomic output.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// A command failure, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments or unreadable input; exit code 2.
    Usage(anyhow::Error),
    /// The input is well formed but the mathematics refuses it; exit code 1.
    Domain(anyhow::Error),
}

impl From<dilationkit::Error> for Failure {
    fn from(e: dilationkit::Error) -> Self {
        Failure::Domain(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= threshold`.
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    /// Passes when `value > threshold`.
    pub fn above(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value > threshold,
        }
    }

    /// A yes/no check reported as value 1 or 0 against threshold 1.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: 1.0,
            pass: ok,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub inputs_digest: String,
    pub checks: Vec<Check>,
    pub artifacts: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, inputs: &[u8]) -> Self {
        Self {
            command: command.to_string(),
            inputs_digest: digest(inputs),
            checks: Vec::new(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn artifact(&mut self, key: &str, value: Value) {
        self.artifacts.insert(key.to_string(), value);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn to_json(&self) -> String {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "value": c.value,
                    "threshold": c.threshold,
                    "pass": c.pass,
                })
            })
            .collect();
        let value = json!({
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "checks": checks,
            "artifacts": self.artifacts,
            "pass": self.pass(),
        });
        let mut out = serde_json::to_string_pretty(&value).expect("reports serialize");
        out.push('\n');
        out
    }
}

/// Lowercase hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Write through a sibling temporary file and rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .with_context(|| format!("{} is not a file path", path.display()))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_keys_are_sorted_and_pass_is_conjunction() {
        let mut r = Report::new("demo", b"input");
        r.check(Check::at_most("a", 0.5, 1.0));
        r.artifact("zeta", json!(1));
        r.artifact("alpha", json!({"b": 1, "a": 2}));
        let s = r.to_json();
        let keys: Vec<usize> = ["\"artifacts\"", "\"checks\"", "\"command\"", "\"inputs_digest\"", "\"pass\""]
            .iter()
            .map(|k| s.rfind(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
        assert!(s.find("\"alpha\"").unwrap() < s.find("\"zeta\"").unwrap());
        assert!(r.pass());
        r.check(Check::flag("b", false));
        assert!(!r.pass());
    }

    #[test]
    fn check_comparisons() {
        assert!(Check::at_most("x", 1.0, 1.0).pass);
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(!Check::above("x", 0.0, 0.0).pass);
        assert_eq!(Check::flag("x", true).value, 1.0);
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            digest(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}

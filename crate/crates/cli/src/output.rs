//! CSV and JSON emission.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Decimal with 17 significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// SHA-256 of the canonical JSON of `config`.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(config).expect("config is plain JSON");
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub struct Csv {
    text: String,
}

impl Csv {
    /// Starts with the provenance comment and the header row.
    pub fn new(command: &str, config: &Value, header: &[&str]) -> Self {
        let mut text = format!("# densejump {command} config-sha256={}\n", config_hash(config));
        text.push_str(&header.join(","));
        text.push('\n');
        Csv { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn emit(&self, out: Option<&Path>) -> Result<(), Failure> {
        write_or_print(out, &self.text)
    }
}

pub fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Line-by-line comparison; `None` when identical.
pub fn diff(expected: &str, got: &str) -> Option<String> {
    let (a, b): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), got.lines().collect());
    let mut report = String::new();
    let mut count = 0;
    for i in 0..a.len().max(b.len()) {
        let (x, y) = (a.get(i).copied(), b.get(i).copied());
        if x != y {
            count += 1;
            if count <= 20 {
                let _ = writeln!(report, "line {}: expected {:?}, got {:?}", i + 1, x.unwrap_or("<missing>"), y.unwrap_or("<missing>"));
            }
        }
    }
    (count > 0).then(|| format!("{count} differing line(s)\n{report}"))
}

//! CSV tables with `#` header lines. Data values use `{:.17e}` so that
//! identical results give identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Exponent form with 17 significant digits; round-trips every `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.17e}")
}

/// Shortest round-trip form, used for configuration values.
pub fn fmt_cfg(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<String>,
}

impl Table {
    /// Starts a table with the version, command, scene hash and sorted config.
    pub fn new(command: &str, scene_hash: Option<&str>, config: &BTreeMap<String, String>) -> Self {
        let mut header = vec![format!("pldos {VERSION}"), format!("command = {command}")];
        if let Some(h) = scene_hash {
            header.push(format!("scene_sha256 = {h}"));
        }
        for (k, v) in config {
            header.push(format!("config.{k} = {v}"));
        }
        Self {
            header,
            columns: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.header.push(format!("{key} = {value}"));
    }

    pub fn columns(&mut self, names: &[&'static str]) {
        self.columns = names.to_vec();
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns.len());
        let cells: Vec<String> = values.iter().map(|&v| fmt_num(v)).collect();
        self.rows.push(cells.join(","));
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            let _ = writeln!(out, "# {h}");
        }
        if !self.columns.is_empty() {
            let _ = writeln!(out, "{}", self.columns.join(","));
        }
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.0, -0.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -f64::MIN_POSITIVE] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn header_is_sorted_and_prefixed() {
        let mut cfg = BTreeMap::new();
        cfg.insert("zeta".to_string(), "1".to_string());
        cfg.insert("alpha".to_string(), "2".to_string());
        let mut t = Table::new("decay", Some("abc"), &cfg);
        t.columns(&["a", "b"]);
        t.row(&[1.0, 2.0]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("# pldos {VERSION}"));
        assert_eq!(lines[2], "# scene_sha256 = abc");
        assert_eq!(lines[3], "# config.alpha = 2");
        assert_eq!(lines[4], "# config.zeta = 1");
        assert_eq!(lines[5], "a,b");
        assert_eq!(lines[6], "1.00000000000000000e0,2.00000000000000000e0");
    }
}

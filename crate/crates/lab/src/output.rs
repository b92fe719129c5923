//! CSV tables with a `#` metadata preamble.

use std::io::Write;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::rng::GENERATOR_ID;

pub const ARTIFACT_VERSION: &str = concat!("zeno-lab ", env!("CARGO_PKG_VERSION"));

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    /// Starts a table whose preamble identifies the configuration, seed,
    /// generator and artifact version.
    pub fn for_config(cfg: &ExperimentConfig, experiment: &str, header: &[&str]) -> Self {
        let meta = vec![
            ("experiment".to_string(), experiment.to_string()),
            ("version".to_string(), ARTIFACT_VERSION.to_string()),
            ("config_sha256".to_string(), cfg.digest()),
            ("seed".to_string(), cfg.seed.to_string()),
            ("generator".to_string(), GENERATOR_ID.to_string()),
            ("omega_hz".to_string(), num(cfg.model.omega_hz)),
        ];
        Self {
            meta,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: impl Into<String>) {
        self.meta.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.meta {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }
}

/// The part of a CSV file after the `#` preamble.
pub fn csv_body(bytes: &[u8]) -> &[u8] {
    let mut start = 0;
    while bytes[start..].starts_with(b"#") {
        match bytes[start..].iter().position(|&b| b == b'\n') {
            Some(i) => start += i + 1,
            None => return &[],
        }
    }
    &bytes[start..]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        let x = std::f64::consts::PI * 1e-7;
        assert_eq!(num(x).parse::<f64>().unwrap(), x);
        assert_eq!(num(f64::NAN), "NaN");
    }

    #[test]
    fn preamble_then_header() {
        let cfg = ExperimentConfig::reference();
        let mut t = CsvTable::for_config(&cfg, "demo", &["a", "b"]);
        t.push(vec![num(1.0), "x".into()]);
        let bytes = t.to_bytes().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("# experiment: demo\n"));
        assert!(text.contains(&format!("# config_sha256: {}\n", cfg.digest())));
        assert_eq!(csv_body(&bytes), b"a,b\n1.0000000000000000e0,x\n");
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One CSV line. Empty optional cells mark quantities a failed run did not
/// produce; exact-measurement runs record zero shots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub u: f64,
    pub algorithm: String,
    pub energy: Option<f64>,
    pub ed_energy: f64,
    pub rel_err: Option<f64>,
    pub m_af: Option<f64>,
    pub delta_s: Option<f64>,
    pub gate_time_over_t2: f64,
    pub mitigated: bool,
    pub shots: usize,
    pub seed: u64,
    pub restart_index: Option<usize>,
    pub gate_count: Option<usize>,
    pub circuit_duration: Option<f64>,
    pub n_evals: Option<usize>,
    pub error: String,
    /// Final energy of every restart, `;`-separated.
    pub restart_energies: String,
    pub config_hash: String,
    pub version: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<Row>,
}

fn csv_error(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

impl SweepTable {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row).map_err(csv_error)?;
        }
        let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let rows = csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .map_err(csv_error)?;
        Ok(Self { rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    /// Successful rows of one algorithm, in table order.
    pub fn series<'a>(&'a self, algorithm: &'a str, mitigated: bool) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.algorithm == algorithm && r.mitigated == mitigated && r.error.is_empty())
    }

    /// Algorithm labels in order of first appearance.
    pub fn algorithms(&self) -> Vec<String> {
        let mut seen: Vec<String> = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.algorithm) {
                seen.push(r.algorithm.clone());
            }
        }
        seen
    }
}

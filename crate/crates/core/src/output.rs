//! CSV and JSON artifacts.
//!
//! Floats are written with 17 significant digits so that a rerun of the
//! same config reproduces every file byte for byte. Each CSV starts with a
//! `#` line naming the tool version, then the header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AmplitudeState, FieldState};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const FIELD_COLUMNS: [&str; 9] = [
    "z", "tau", "omega_p", "omega_s", "phi_p", "phi_s", "pop1", "pop2", "pop3",
];

/// `{:.16e}`: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Write `bytes` to a temporary sibling and rename it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    file.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// In-memory CSV table with the version comment line.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Result<Table> {
        let mut buf = Vec::new();
        writeln!(buf, "# tristate-prop {VERSION}").expect("write to Vec");
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(header)?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        Ok(self.writer.write_record(fields)?)
    }

    pub fn into_bytes(self) -> Result<Vec<u8>> {
        self.writer
            .into_inner()
            .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))
    }

    pub fn save(self, path: &Path) -> Result<()> {
        let bytes = self.into_bytes()?;
        write_atomic(path, &bytes)
    }
}

/// One row per `(z, τ)` cell. Populations are left empty without amplitudes.
pub fn fields_table(fields: &FieldState, amplitudes: Option<&AmplitudeState>) -> Result<Table> {
    let mut table = Table::new(&FIELD_COLUMNS)?;
    for (k, slice) in fields.slices.iter().enumerate() {
        let amps = amplitudes.map(|a| &a.slices[k]);
        for (i, &tau) in fields.tau.iter().enumerate() {
            let pops = match amps {
                Some(a) => a.populations(i).map(fmt_f64),
                None => Default::default(),
            };
            let row = [
                fmt_f64(slice.z),
                fmt_f64(tau),
                fmt_f64(slice.omega_p[i]),
                fmt_f64(slice.omega_s[i]),
                fmt_f64(slice.phi_p[i]),
                fmt_f64(slice.phi_s[i]),
            ];
            table.row(row.iter().chain(pops.iter()))?;
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command invocation, written last.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub output_dir: PathBuf,
    pub version: String,
    pub wall_clock_seconds: f64,
    pub stages: Vec<StageTiming>,
    /// Paths relative to `output_dir`.
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

//! Record files: CSV text or a little-endian binary layout, plus a JSON
//! metadata side-file.
//!
//! Binary layout: the magic `QHD1`, a `u64` record count, then four `f64`
//! values per record in the order `x1, theta1, x2, theta2`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{PhaseSchedule, QuadratureRecord};
use crate::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"QHD1";
const CSV_HEADER: &str = "x1,theta1,x2,theta2";
const RECORD_BYTES: usize = 32;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    #[default]
    Csv,
    Bin,
}

impl FromStr for RecordFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "bin" => Ok(Self::Bin),
            other => Err(Error::Argument(format!("unknown record format '{other}' (expected csv or bin)"))),
        }
    }
}

pub fn write_records(path: impl AsRef<Path>, records: &[QuadratureRecord], format: RecordFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        RecordFormat::Csv => {
            writeln!(w, "{CSV_HEADER}")?;
            for r in records {
                writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", r.x1, r.theta1, r.x2, r.theta2)?;
            }
        }
        RecordFormat::Bin => {
            w.write_all(BINARY_MAGIC)?;
            w.write_all(&(records.len() as u64).to_le_bytes())?;
            for r in records {
                for v in [r.x1, r.theta1, r.x2, r.theta2] {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads either format, detected from the leading bytes.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<QuadratureRecord>> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.starts_with(b"QHD") {
        if bytes.len() < 4 || &bytes[..4] != BINARY_MAGIC {
            let found = bytes.get(3).map(|&b| (b as char).to_string()).unwrap_or_default();
            return Err(Error::Version {
                found: format!("QHD{found}"),
                expected: "QHD1".into(),
            });
        }
        parse_binary(&bytes)
    } else {
        parse_csv(BufReader::new(bytes.as_slice()))
    }
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<QuadratureRecord>> {
    if bytes.len() < 12 {
        return Err(Error::parse(format!("byte {}", bytes.len()), "truncated header"));
    }
    let count = u64::from_le_bytes(bytes[4..12].try_into().expect("8-byte slice"));
    let body = &bytes[12..];
    let expected = (count as u128) * RECORD_BYTES as u128;
    if (body.len() as u128) != expected {
        return Err(Error::parse(
            format!("byte {}", bytes.len()),
            format!("header declares {count} records ({expected} bytes) but body has {} bytes", body.len()),
        ));
    }
    body.chunks_exact(RECORD_BYTES)
        .enumerate()
        .map(|(i, chunk)| {
            let mut v = [0.0; 4];
            for (j, slot) in v.iter_mut().enumerate() {
                *slot = f64::from_le_bytes(chunk[8 * j..8 * j + 8].try_into().expect("8-byte slice"));
            }
            QuadratureRecord::new(v[0], v[1], v[2], v[3])
                .map_err(|e| Error::parse(format!("byte {}", 12 + i * RECORD_BYTES), e.to_string()))
        })
        .collect()
}

fn parse_csv(reader: impl BufRead) -> Result<Vec<QuadratureRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if i == 0 && trimmed.starts_with(|c: char| c.is_ascii_alphabetic()) {
            if trimmed.replace(' ', "") != CSV_HEADER {
                return Err(Error::parse(format!("line {lineno}"), format!("unexpected header '{trimmed}'")));
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::parse(format!("line {lineno}"), format!("expected 4 fields, found {}", fields.len())));
        }
        let mut v = [0.0; 4];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .parse::<f64>()
                .map_err(|e| Error::parse(format!("line {lineno}"), format!("'{f}': {e}")))?;
        }
        out.push(QuadratureRecord::new(v[0], v[1], v[2], v[3]).map_err(|e| Error::parse(format!("line {lineno}"), e.to_string()))?);
    }
    Ok(out)
}

/// Side-file describing how a record file was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimMetadata {
    pub seed: u64,
    pub n_records: usize,
    pub schedule: PhaseSchedule,
    pub state: String,
    pub generator: String,
    pub shard_size: usize,
}

/// `<path>.meta.json`
pub fn metadata_path(path: impl AsRef<Path>) -> PathBuf {
    let mut s = path.as_ref().as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn write_metadata(records_path: impl AsRef<Path>, meta: &SimMetadata) -> Result<PathBuf> {
    let path = metadata_path(records_path);
    let w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(w, meta)?;
    Ok(path)
}

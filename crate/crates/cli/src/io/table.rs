//! CSV files: single-column signals, feasible-set samples and solver traces.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{ensure, Context, Result};
use orderbound::lattice::SamplePoint;
use orderbound::solver::TraceRecord;
use orderbound::ImageGrid;

/// Reads one value per record. A non-numeric first record is taken as a header.
pub fn parse_signal(reader: impl Read) -> Result<ImageGrid> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let mut values = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        ensure!(rec.len() == 1, "record {} has {} fields, expected 1", k + 1, rec.len());
        match rec[0].parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if k == 0 => {}
            Err(_) => anyhow::bail!("record {} is not a number: {:?}", k + 1, &rec[0]),
        }
    }
    ensure!(!values.is_empty(), "no values");
    Ok(ImageGrid::from_signal(values)?)
}

pub fn format_signal(writer: impl Write, signal: &ImageGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["value"])?;
    for v in signal.values() {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_signal(path: &Path) -> Result<ImageGrid> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    parse_signal(file).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_signal(path: &Path, signal: &ImageGrid) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    format_signal(file, signal).with_context(|| format!("writing {}", path.display()))
}

pub fn format_samples(writer: impl Write, points: &[SamplePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u1", "u2", "in_U", "in_Ustarstar"])?;
    for p in points {
        w.write_record([
            p.u[0].to_string(),
            p.u[1].to_string(),
            u8::from(p.in_u).to_string(),
            u8::from(p.in_ustarstar).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_samples(path: &Path, points: &[SamplePoint]) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    format_samples(file, points).with_context(|| format!("writing {}", path.display()))
}

pub fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for t in trace {
        w.serialize(t)?;
    }
    w.flush()?;
    Ok(())
}

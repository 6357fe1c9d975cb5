use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::profile::{format_number, parse_number};

pub const DATA_HEADER: [&str; 2] = ["depth_m", "deflection_m"];

/// One monitored pile deflection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub depth: f64,
    pub deflection: f64,
}

/// Monitored (or pseudo-observed) deflections entering the loss as data rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitoredDataset {
    entries: Vec<Observation>,
}

impl MonitoredDataset {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(entries: Vec<Observation>) -> Result<Self> {
        if let Some(bad) = entries
            .iter()
            .find(|o| !o.depth.is_finite() || !o.deflection.is_finite() || o.depth < 0.0)
        {
            return Err(Error::InvalidData(format!(
                "observation ({}, {}) must be finite with non-negative depth",
                bad.depth, bad.deflection
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(depth, deflection)| Observation { depth, deflection })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Observation] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn depths(&self) -> Vec<f64> {
        self.entries.iter().map(|o| o.depth).collect()
    }

    /// Checks every depth against the pile length.
    pub fn check_within(&self, length: f64) -> Result<()> {
        match self.entries.iter().find(|o| o.depth > length) {
            Some(o) => Err(Error::Domain {
                what: "observation depth",
                value: o.depth,
                min: 0.0,
                max: length,
            }),
            None => Ok(()),
        }
    }

    /// Parses `depth_m,deflection_m` CSV.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = reader
            .headers()
            .map_err(|e| Error::InvalidData(format!("data header: {e}")))?
            .clone();
        if header.iter().ne(DATA_HEADER) {
            return Err(Error::InvalidData(format!(
                "data header must be `{}`, found `{}`",
                DATA_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut entries = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidData(format!("data row {}: {e}", line + 1)))?;
            entries.push(Observation {
                depth: parse_number(record.get(0).unwrap_or(""), DATA_HEADER[0], line + 1)?,
                deflection: parse_number(record.get(1).unwrap_or(""), DATA_HEADER[1], line + 1)?,
            });
        }
        Self::new(entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidData(format!("writing data: {e}"));
        writer.write_record(DATA_HEADER).map_err(io)?;
        for o in &self.entries {
            writer
                .write_record([format_number(o.depth), format_number(o.deflection)])
                .map_err(io)?;
        }
        writer
            .flush()
            .map_err(|e| Error::InvalidData(format!("writing data: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rewrites() {
        let text = "depth_m,deflection_m\n0,1.5e-3\n17.5, -2e-4\n";
        let data = MonitoredDataset::read_csv(text.as_bytes()).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.entries()[1].depth, 17.5);
        let mut out = Vec::new();
        data.write_csv(&mut out).unwrap();
        assert_eq!(MonitoredDataset::read_csv(out.as_slice()).unwrap(), data);
    }

    #[test]
    fn header_is_checked() {
        let err = MonitoredDataset::read_csv("z,w\n1,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("depth_m,deflection_m"), "{err}");
    }

    #[test]
    fn depth_range_is_checked() {
        let data = MonitoredDataset::from_pairs(&[(26.0, 0.0)]).unwrap();
        assert!(data.check_within(25.0).is_err());
        assert!(MonitoredDataset::from_pairs(&[(-1.0, 0.0)]).is_err());
        assert!(MonitoredDataset::from_pairs(&[(1.0, f64::NAN)]).is_err());
    }
}

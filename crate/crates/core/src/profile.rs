//! Sampled pile response and its CSV form `z_m,w_m,theta_rad,M_Nm,Q_N`.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! so a parsed profile re-emits byte for byte.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const PROFILE_HEADER: [&str; 5] = ["z_m", "w_m", "theta_rad", "M_Nm", "Q_N"];

/// Deflection, rotation, bending moment and shear force at a list of depths.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResponseProfile {
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub theta: Vec<f64>,
    pub moment: Vec<f64>,
    pub shear: Vec<f64>,
}

impl ResponseProfile {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            z: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            theta: Vec::with_capacity(n),
            moment: Vec::with_capacity(n),
            shear: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn push(&mut self, z: f64, w: f64, theta: f64, moment: f64, shear: f64) {
        self.z.push(z);
        self.w.push(w);
        self.theta.push(theta);
        self.moment.push(moment);
        self.shear.push(shear);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidData(format!("writing profile: {e}"));
        writer.write_record(PROFILE_HEADER).map_err(io)?;
        for i in 0..self.len() {
            writer
                .write_record(
                    [self.z[i], self.w[i], self.theta[i], self.moment[i], self.shear[i]].map(format_number),
                )
                .map_err(io)?;
        }
        writer
            .flush()
            .map_err(|e| Error::InvalidData(format!("writing profile: {e}")))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is ASCII")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = reader
            .headers()
            .map_err(|e| Error::InvalidData(format!("profile header: {e}")))?
            .clone();
        if header.iter().ne(PROFILE_HEADER) {
            return Err(Error::InvalidData(format!(
                "profile header must be `{}`, found `{}`",
                PROFILE_HEADER.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut profile = ResponseProfile::default();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidData(format!("profile row {}: {e}", line + 1)))?;
            let mut values = [0.0; 5];
            for (k, v) in values.iter_mut().enumerate() {
                *v = parse_number(record.get(k).unwrap_or(""), PROFILE_HEADER[k], line + 1)?;
            }
            profile.push(values[0], values[1], values[2], values[3], values[4]);
        }
        Ok(profile)
    }
}

/// Full-precision scientific notation (17 significant digits).
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn parse_number(field: &str, column: &str, row: usize) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::InvalidData(format!("row {row}, column `{column}`: `{field}` is not a number")))
}

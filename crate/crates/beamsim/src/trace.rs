//! Frequency/time-indexed traces and their CSV wire format.
//!
//! CSV schema (bit-exact for golden diffing): a metadata header row
//! `axis_unit,value_unit,rbw_hz,vbw_hz,averages,seed`, one metadata value
//! row, a `axis,value` header, then the sample rows. Floats carry 17
//! significant digits.

use crate::error::{Error, Result};

/// Spectrum-analyser style settings attached to a trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsaSettings {
    pub center_freq: f64,
    pub span: f64,
    /// Resolution bandwidth, Hz.
    pub rbw: f64,
    /// Video bandwidth, Hz.
    pub vbw: f64,
    pub averages: u32,
    pub samples: usize,
}

impl EsaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.rbw <= 0.0 {
            return Err(Error::config("esa.rbw", "must be positive"));
        }
        if self.vbw <= 0.0 {
            return Err(Error::config("esa.vbw", "must be positive"));
        }
        if self.averages < 1 {
            return Err(Error::config("esa.averages", "must be >= 1"));
        }
        if self.samples < 2 {
            return Err(Error::config("esa.samples", "need at least 2 samples"));
        }
        Ok(())
    }

    /// Measurement interval T = 1/RBW.
    pub fn measurement_interval(&self) -> f64 {
        1.0 / self.rbw
    }
}

/// A trace of noise-power (or displacement-squared) samples over a
/// frequency or time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub axis: Vec<f64>,
    pub values: Vec<f64>,
    pub axis_unit: String,
    pub value_unit: String,
    pub rbw_hz: f64,
    pub vbw_hz: f64,
    pub averages: u32,
    pub seed: u64,
}

impl SpectrumTrace {
    pub fn new(
        axis: Vec<f64>,
        values: Vec<f64>,
        axis_unit: &str,
        value_unit: &str,
        settings: &EsaSettings,
        seed: u64,
    ) -> Self {
        assert_eq!(axis.len(), values.len());
        assert!(
            axis.windows(2).all(|w| w[1] > w[0]),
            "axis must be strictly increasing"
        );
        SpectrumTrace {
            axis,
            values,
            axis_unit: axis_unit.to_string(),
            value_unit: value_unit.to_string(),
            rbw_hz: settings.rbw,
            vbw_hz: settings.vbw,
            averages: settings.averages,
            seed,
        }
    }

    pub fn mean_value(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("axis_unit,value_unit,rbw_hz,vbw_hz,averages,seed\n");
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            self.axis_unit,
            self.value_unit,
            fmt_float(self.rbw_hz),
            fmt_float(self.vbw_hz),
            self.averages,
            self.seed
        ));
        out.push_str("axis,value\n");
        for (a, v) in self.axis.iter().zip(&self.values) {
            out.push_str(&format!("{},{}\n", fmt_float(*a), fmt_float(*v)));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let head = lines
            .next()
            .ok_or_else(|| Error::CsvFormat("empty file".into()))?;
        if head != "axis_unit,value_unit,rbw_hz,vbw_hz,averages,seed" {
            return Err(Error::CsvFormat(format!("bad metadata header: {head}")));
        }
        let meta = lines
            .next()
            .ok_or_else(|| Error::CsvFormat("missing metadata row".into()))?;
        let fields: Vec<&str> = meta.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::CsvFormat(format!("bad metadata row: {meta}")));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::CsvFormat(format!("bad float: {s}")))
        };
        let cols = lines
            .next()
            .ok_or_else(|| Error::CsvFormat("missing column header".into()))?;
        if cols != "axis,value" {
            return Err(Error::CsvFormat(format!("bad column header: {cols}")));
        }
        let mut axis = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let (a, v) = line
                .split_once(',')
                .ok_or_else(|| Error::CsvFormat(format!("bad row: {line}")))?;
            axis.push(parse_f(a)?);
            values.push(parse_f(v)?);
        }
        Ok(SpectrumTrace {
            axis,
            values,
            axis_unit: fields[0].to_string(),
            value_unit: fields[1].to_string(),
            rbw_hz: parse_f(fields[2])?,
            vbw_hz: parse_f(fields[3])?,
            averages: fields[4]
                .parse()
                .map_err(|_| Error::CsvFormat(format!("bad averages: {}", fields[4])))?,
            seed: fields[5]
                .parse()
                .map_err(|_| Error::CsvFormat(format!("bad seed: {}", fields[5])))?,
        })
    }
}

/// 17 significant digits: round-trips every f64 exactly.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

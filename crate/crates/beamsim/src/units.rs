//! Strict physical-quantity parsing for scenario configs.
//!
//! Every dimensioned value is written as `"<number> <unit>"`; bare numbers
//! are rejected so a missing unit is a config error, not a silent
//! misinterpretation. Dimensionless fractions are plain numbers.

use crate::error::{Error, Result};

fn split(input: &str) -> Result<(f64, &str)> {
    let s = input.trim();
    let idx = s
        .find(|c: char| c.is_ascii_alphabetic() || c == 'Å' || c == 'µ')
        .ok_or_else(|| Error::UnitParse {
            input: input.to_string(),
            reason: "missing unit suffix (bare numbers are rejected)".into(),
        })?;
    let (num, unit) = s.split_at(idx);
    let value: f64 = num.trim().parse().map_err(|_| Error::UnitParse {
        input: input.to_string(),
        reason: format!("bad number {:?}", num.trim()),
    })?;
    Ok((value, unit.trim()))
}

/// Parse a length into meters. Accepted units: m, mm, um/µm, nm, pm, A/Å.
pub fn parse_length(input: &str) -> Result<f64> {
    let (v, unit) = split(input)?;
    let scale = match unit {
        "m" => 1.0,
        "mm" => 1e-3,
        "um" | "µm" => 1e-6,
        "nm" => 1e-9,
        "pm" => 1e-12,
        "A" | "Å" | "angstrom" => 1e-10,
        _ => {
            return Err(Error::UnitParse {
                input: input.to_string(),
                reason: format!("unknown length unit {unit:?}"),
            })
        }
    };
    Ok(v * scale)
}

/// Parse a frequency into Hz. Accepted units: Hz, kHz, MHz, GHz.
pub fn parse_frequency(input: &str) -> Result<f64> {
    let (v, unit) = split(input)?;
    let scale = match unit {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        _ => {
            return Err(Error::UnitParse {
                input: input.to_string(),
                reason: format!("unknown frequency unit {unit:?}"),
            })
        }
    };
    Ok(v * scale)
}

/// Parse an optical power into watts. Accepted units: W, mW, uW/µW, nW.
pub fn parse_power(input: &str) -> Result<f64> {
    let (v, unit) = split(input)?;
    let scale = match unit {
        "W" => 1.0,
        "mW" => 1e-3,
        "uW" | "µW" => 1e-6,
        "nW" => 1e-9,
        _ => {
            return Err(Error::UnitParse {
                input: input.to_string(),
                reason: format!("unknown power unit {unit:?}"),
            })
        }
    };
    Ok(v * scale)
}

/// Parse a signed decibel value, e.g. "-3.1 dB".
pub fn parse_db(input: &str) -> Result<f64> {
    let (v, unit) = split(input)?;
    if unit != "dB" {
        return Err(Error::UnitParse {
            input: input.to_string(),
            reason: format!("expected dB, got {unit:?}"),
        });
    }
    Ok(v)
}

/// Parse a dimensionless fraction in [0, 1] (plain number, no unit).
pub fn parse_fraction(input: &str) -> Result<f64> {
    let s = input.trim();
    let v: f64 = s.parse().map_err(|_| Error::UnitParse {
        input: input.to_string(),
        reason: "expected a bare fraction".into(),
    })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::UnitParse {
            input: input.to_string(),
            reason: "fraction outside [0, 1]".into(),
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lengths() {
        assert_relative_eq!(parse_length("1064 nm").unwrap(), 1064e-9);
        assert_relative_eq!(parse_length("0.5 mm").unwrap(), 0.5e-3);
        assert_relative_eq!(parse_length("25 um").unwrap(), 25e-6);
        assert_relative_eq!(parse_length("2.3 A").unwrap(), 2.3e-10);
    }

    #[test]
    fn frequencies_and_power() {
        assert_relative_eq!(parse_frequency("100 kHz").unwrap(), 1e5);
        assert_relative_eq!(parse_frequency("4.976 MHz").unwrap(), 4.976e6);
        assert_relative_eq!(parse_power("1 mW").unwrap(), 1e-3);
    }

    #[test]
    fn bare_numbers_rejected_for_dimensioned_quantities() {
        assert!(parse_length("150").is_err());
        assert!(parse_frequency("1e5").is_err());
    }

    #[test]
    fn wrong_unit_rejected() {
        assert!(parse_length("5 Hz").is_err());
        assert!(parse_db("3 db").is_err());
        assert!(parse_db("-3.1 dB").unwrap() == -3.1);
    }

    #[test]
    fn fraction_bounds() {
        assert!(parse_fraction("0.95").is_ok());
        assert!(parse_fraction("1.2").is_err());
        assert!(parse_fraction("0.5 m").is_err());
    }
}

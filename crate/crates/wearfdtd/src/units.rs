//! Quantities with explicit unit suffixes, such as `"33 mm"`, `"2.45 GHz"` or `"100 mW"`.
//!
//! Every value is converted to the unit the core expects for that dimension: millimetres
//! for lengths, hertz, watts, ohms, grams, siemens per metre, kilograms per cubic metre and
//! decibels.

use std::fmt;

/// Physical dimension of a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Frequency,
    Power,
    Resistance,
    Mass,
    Conductivity,
    Density,
    Decibel,
    Voltage,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[("um", 1e-3), ("mm", 1.0), ("cm", 10.0), ("m", 1e3)],
            Dimension::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            Dimension::Power => &[("uW", 1e-6), ("mW", 1e-3), ("W", 1.0)],
            Dimension::Resistance => &[("ohm", 1.0), ("kohm", 1e3)],
            Dimension::Mass => &[("mg", 1e-3), ("g", 1.0), ("kg", 1e3)],
            Dimension::Conductivity => &[("S/m", 1.0)],
            Dimension::Density => &[("kg/m3", 1.0), ("g/cm3", 1e3)],
            Dimension::Decibel => &[("dB", 1.0)],
            Dimension::Voltage => &[("mV", 1e-3), ("V", 1.0)],
        }
    }

    /// The unit values are expressed in after parsing.
    pub fn base_unit(self) -> &'static str {
        match self {
            Dimension::Length => "mm",
            Dimension::Frequency => "Hz",
            Dimension::Power => "W",
            Dimension::Resistance => "ohm",
            Dimension::Mass => "g",
            Dimension::Conductivity => "S/m",
            Dimension::Density => "kg/m3",
            Dimension::Decibel => "dB",
            Dimension::Voltage => "V",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Frequency => "frequency",
            Dimension::Power => "power",
            Dimension::Resistance => "resistance",
            Dimension::Mass => "mass",
            Dimension::Conductivity => "conductivity",
            Dimension::Density => "density",
            Dimension::Decibel => "level",
            Dimension::Voltage => "voltage",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnitError {
    #[error("`{0}` has no unit; expected a {1} such as \"{2}\"")]
    MissingUnit(String, Dimension, String),
    #[error("unknown {1} unit `{0}` (accepted: {2})")]
    UnknownUnit(String, Dimension, String),
    #[error("`{0}` is not a number")]
    BadNumber(String),
    #[error("expected {expected} values, found {found}")]
    Arity { expected: usize, found: usize },
}

fn scale(unit: &str, dim: Dimension) -> Result<f64, UnitError> {
    dim.units()
        .iter()
        .find(|(u, _)| *u == unit)
        .map(|(_, s)| *s)
        .ok_or_else(|| {
            let accepted: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
            UnitError::UnknownUnit(unit.to_string(), dim, accepted.join(", "))
        })
}

fn number(s: &str) -> Result<f64, UnitError> {
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| UnitError::BadNumber(s.to_string()))
}

fn split(text: &str, dim: Dimension) -> Result<(Vec<&str>, f64), UnitError> {
    let mut parts: Vec<&str> = text.split_whitespace().collect();
    let unit = match parts.last() {
        Some(u) if u.parse::<f64>().is_err() => *u,
        _ => {
            let example = format!("1 {}", dim.base_unit());
            return Err(UnitError::MissingUnit(text.to_string(), dim, example));
        }
    };
    parts.pop();
    Ok((parts, scale(unit, dim)?))
}

/// Parse `"<number> <unit>"` into the base unit of `dim`.
pub fn parse(text: &str, dim: Dimension) -> Result<f64, UnitError> {
    Ok(parse_list(text, dim, 1)?[0])
}

/// Parse `"<n₁> <n₂> … <unit>"` with exactly `n` numbers sharing one unit.
pub fn parse_list(text: &str, dim: Dimension, n: usize) -> Result<Vec<f64>, UnitError> {
    let (nums, s) = split(text, dim)?;
    if nums.len() != n {
        return Err(UnitError::Arity {
            expected: n,
            found: nums.len(),
        });
    }
    nums.iter().map(|v| Ok(number(v)? * s)).collect()
}

/// Parse `"<n₁> <n₂> <n₃> <unit>"`.
pub fn parse_vec3(text: &str, dim: Dimension) -> Result<[f64; 3], UnitError> {
    let v = parse_list(text, dim, 3)?;
    Ok([v[0], v[1], v[2]])
}

/// Format a value in the base unit of `dim` so that [`parse`] returns it exactly.
pub fn format(value: f64, dim: Dimension) -> String {
    format!("{value:?} {}", dim.base_unit())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales_to_base_units() {
        assert_eq!(parse("33 mm", Dimension::Length).unwrap(), 33.0);
        assert_eq!(parse("3.3 cm", Dimension::Length).unwrap(), 33.0);
        assert_eq!(parse("2.45 GHz", Dimension::Frequency).unwrap(), 2.45e9);
        assert_eq!(parse("100 mW", Dimension::Power).unwrap(), 0.1);
        assert_eq!(parse("-40 dB", Dimension::Decibel).unwrap(), -40.0);
        assert_eq!(parse("10 g", Dimension::Mass).unwrap(), 10.0);
    }

    #[test]
    fn rejects_missing_and_wrong_units() {
        assert!(matches!(parse("33", Dimension::Length), Err(UnitError::MissingUnit(..))));
        assert!(matches!(parse("33 GHz", Dimension::Length), Err(UnitError::UnknownUnit(..))));
        assert!(matches!(parse("x mm", Dimension::Length), Err(UnitError::BadNumber(_))));
        assert!(matches!(parse("1 2 mm", Dimension::Length), Err(UnitError::Arity { .. })));
        assert!(matches!(parse("inf mm", Dimension::Length), Err(UnitError::BadNumber(_))));
    }

    #[test]
    fn vectors_share_one_unit() {
        assert_eq!(parse_vec3("1 2 3 cm", Dimension::Length).unwrap(), [10.0, 20.0, 30.0]);
        assert!(parse_vec3("1 2 cm", Dimension::Length).is_err());
    }

    #[test]
    fn format_round_trips() {
        for v in [0.1, 2.45e9, 1.0 / 3.0, -7.25] {
            assert_eq!(parse(&format(v, Dimension::Frequency), Dimension::Frequency).unwrap(), v);
        }
    }
}

//! Measured resonances: CSV with columns `location, participant, session, f_res_ghz`.

use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct Measurement {
    pub location: String,
    pub participant: String,
    pub session: String,
    pub f_res_ghz: f64,
}

pub fn parse(path: &Path, text: &str) -> Result<Vec<Measurement>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, Some(1), e.to_string()))?
        .clone();
    let expected = ["location", "participant", "session", "f_res_ghz"];
    if headers.iter().ne(expected) {
        return Err(Error::parse(
            path,
            Some(1),
            format!("header must be `{}`", expected.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<Measurement>() {
        let m = row.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize);
            let msg = match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            };
            Error::parse(path, line, msg)
        })?;
        if !(m.f_res_ghz.is_finite() && m.f_res_ghz > 0.0) || m.location.is_empty() {
            let line = out.len() + 2;
            return Err(Error::parse(path, Some(line), "location must be named and f_res_ghz positive"));
        }
        out.push(m);
    }
    Ok(out)
}

pub fn read(path: &Path) -> Result<Vec<Measurement>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(path, &text)
}

/// `(location, f_res GHz)` pairs for the statistics.
pub fn samples(ms: &[Measurement]) -> Vec<(String, f64)> {
    ms.iter().map(|m| (m.location.clone(), m.f_res_ghz)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "location,participant,session,f_res_ghz\n";

    #[test]
    fn parses_rows() {
        let text = format!("{HEAD}wrist, p1, 1, 2.38\nwrist,p2,1,2.39\n");
        let ms = parse(Path::new("m.csv"), &text).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[0].participant, "p1");
        assert_eq!(ms[1].f_res_ghz, 2.39);
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = format!("{HEAD}wrist,p1,1,2.38\nwrist,p2,1,fast\n");
        let Err(Error::Parse { line, .. }) = parse(Path::new("m.csv"), &text) else { panic!() };
        assert_eq!(line, Some(3));
        let text = format!("{HEAD}wrist,p1,1,2.38\nwrist,p2\n");
        let Err(Error::Parse { line, .. }) = parse(Path::new("m.csv"), &text) else { panic!() };
        assert_eq!(line, Some(3));
        let text = format!("{HEAD}wrist,p1,1,-2\n");
        assert!(parse(Path::new("m.csv"), &text).is_err());
    }

    #[test]
    fn header_is_checked() {
        assert!(parse(Path::new("m.csv"), "where,who,when,f\nwrist,p1,1,2.4\n").is_err());
    }
}

//! Named columns over an increasing β grid, with a lossless CSV form.

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const FLAG_COLUMN: &str = "flag";

/// Rows are β values; failed cells hold NaN and the row carries a flag.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    beta: Vec<f64>,
    columns: Vec<(String, Vec<f64>)>,
    flags: Vec<String>,
    metadata: Vec<(String, String)>,
}

impl CurveSeries {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidArgument("beta grid must be finite".into()));
        }
        if beta.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("beta grid must be strictly increasing".into()));
        }
        let n = beta.len();
        Ok(Self {
            beta,
            columns: Vec::new(),
            flags: vec![String::new(); n],
            metadata: Vec::new(),
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn push_column(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        validate_name(name)?;
        if name == "beta" || name == FLAG_COLUMN || self.column(name).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate or reserved column name {name:?}")));
        }
        if values.len() != self.beta.len() {
            return Err(Error::InvalidArgument(format!(
                "column {name:?} has {} values for {} rows",
                values.len(),
                self.beta.len()
            )));
        }
        self.columns.push((name.to_string(), values));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    pub fn columns(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.columns.iter().map(|(n, v)| (n.as_str(), v.as_slice()))
    }

    /// Appends `flag` to row `row`; flags are `;`-joined.
    pub fn flag(&mut self, row: usize, flag: &str) {
        let clean: String = flag
            .chars()
            .map(|c| if matches!(c, ',' | '\n' | '\r' | ';') { ' ' } else { c })
            .collect();
        let slot = &mut self.flags[row];
        if !slot.is_empty() {
            slot.push(';');
        }
        slot.push_str(clean.trim());
    }

    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    pub fn has_gaps(&self) -> bool {
        self.flags.iter().any(|f| !f.is_empty())
    }

    pub fn set_metadata(&mut self, key: &str, value: &str) -> Result<()> {
        if key.is_empty() || key.contains([':', '\n']) || value.contains('\n') {
            return Err(Error::InvalidArgument(format!("bad metadata entry {key:?}")));
        }
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value.to_string(),
            None => self.metadata.push((key.to_string(), value.to_string())),
        }
        Ok(())
    }

    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// `#`-prefixed metadata lines, a header, then one row per β.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str("beta");
        for (name, _) in &self.columns {
            out.push(',');
            out.push_str(name);
        }
        out.push(',');
        out.push_str(FLAG_COLUMN);
        out.push('\n');
        for (i, b) in self.beta.iter().enumerate() {
            out.push_str(&format_float(*b));
            for (_, values) in &self.columns {
                out.push(',');
                out.push_str(&format_float(values[i]));
            }
            out.push(',');
            out.push_str(&self.flags[i]);
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut lines = text.lines();
        let header = loop {
            let line = lines.next().ok_or_else(|| Error::Parse("missing CSV header".into()))?;
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once(": ")
                    .ok_or_else(|| Error::Parse(format!("bad metadata line {line:?}")))?;
                metadata.push((k.to_string(), v.to_string()));
            } else {
                break line;
            }
        };
        let names: Vec<&str> = header.split(',').collect();
        if names.len() < 2 || names[0] != "beta" || names[names.len() - 1] != FLAG_COLUMN {
            return Err(Error::Parse(format!("unexpected header {header:?}")));
        }
        let names = &names[1..names.len() - 1];
        let mut beta = Vec::new();
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
        let mut flags = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != names.len() + 2 {
                return Err(Error::Parse(format!(
                    "row {} has {} cells, expected {}",
                    lineno + 1,
                    cells.len(),
                    names.len() + 2
                )));
            }
            beta.push(parse_float(cells[0])?);
            for (col, cell) in values.iter_mut().zip(&cells[1..cells.len() - 1]) {
                col.push(parse_float(cell)?);
            }
            flags.push(cells[cells.len() - 1].to_string());
        }
        let mut series = Self::new(beta)?;
        for (name, col) in names.iter().zip(values) {
            series.push_column(name, col)?;
        }
        series.flags = flags;
        series.metadata = metadata;
        Ok(series)
    }
}

fn validate_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains([',', '\n', '\r', '#']) {
        return Err(Error::InvalidArgument(format!("bad column name {name:?}")));
    }
    Ok(())
}

/// Seventeen significant digits; round-trips every finite `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut c = CurveSeries::new(vec![0.5, 1.0]).unwrap();
        c.push_column("P", vec![0.25, f64::NAN]).unwrap();
        c.flag(1, "divergence, beta too small");
        c.set_metadata("model", "ho").unwrap();
        let text = c.to_csv();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# model: ho");
        assert_eq!(lines[1], "beta,P,flag");
        assert_eq!(lines[2], "5.0000000000000000e-1,2.5000000000000000e-1,");
        assert_eq!(lines[3], "1.0000000000000000e0,NaN,divergence  beta too small");
        let back = CurveSeries::from_csv(&text).unwrap();
        assert_eq!(back.to_csv(), text);
        assert!(back.has_gaps());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(CurveSeries::new(vec![1.0, 1.0]).is_err());
        let mut c = CurveSeries::new(vec![1.0]).unwrap();
        assert!(c.push_column("a", vec![1.0, 2.0]).is_err());
        assert!(c.push_column("beta", vec![1.0]).is_err());
        assert!(c.push_column("a,b", vec![1.0]).is_err());
        assert!(CurveSeries::from_csv("x,flag\n").is_err());
        assert!(CurveSeries::from_csv("beta,a,flag\n1.0,2.0\n").is_err());
    }
}

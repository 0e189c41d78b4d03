//! Long-format result tables and their CSV encoding.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::simulator::Estimate;

pub const CSV_HEADER: &str = "x,series,mean,ci95";

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub series: String,
    pub mean: f64,
    pub ci95: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    rows: Vec<Row>,
}

impl ResultTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64, series: impl Into<String>, mean: f64, ci95: f64) {
        self.rows.push(Row { x, series: series.into(), mean, ci95 });
    }

    pub fn push_estimate(&mut self, x: f64, series: impl Into<String>, e: Estimate) {
        self.push(x, series, e.mean, e.ci95);
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of one series, in table order.
    pub fn series(&self, name: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.series == name).collect()
    }

    /// The row at (`x`, `series`), if any.
    pub fn get(&self, x: f64, series: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.x == x && r.series == series)
    }

    pub fn estimate(&self, x: f64, series: &str) -> Option<Estimate> {
        self.get(x, series).map(|r| Estimate { mean: r.mean, ci95: r.ci95 })
    }

    pub fn series_names(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.series.clone()).collect::<BTreeSet<_>>().into_iter().collect()
    }

    /// Sorts by x, then by series name.
    pub fn sort(&mut self) {
        self.rows.sort_by(|a, b| a.x.total_cmp(&b.x).then_with(|| a.series.cmp(&b.series)));
    }

    /// Checks that every series has exactly one row at every x present.
    pub fn check_complete(&self) -> Result<()> {
        let names = self.series_names();
        let mut xs: Vec<f64> = self.rows.iter().map(|r| r.x).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        for name in &names {
            for &x in &xs {
                let n = self.rows.iter().filter(|r| r.x == x && &r.series == name).count();
                if n != 1 {
                    return Err(Error::Validation(format!("series `{name}` has {n} rows at x = {x}")));
                }
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{}", format_g9(r.x), r.series, format_g9(r.mean), format_g9(r.ci95));
        }
        out
    }

    /// Parses text produced by [`ResultTable::to_csv`].
    pub fn from_csv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(err(1, format!("expected header `{CSV_HEADER}`"))),
        }
        let mut table = Self::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(err(i + 1, format!("expected 4 fields, got {}", fields.len())));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| err(i + 1, format!("bad number `{s}`")));
            table.push(num(fields[0])?, fields[1].trim(), num(fields[2])?, num(fields[3])?);
        }
        Ok(table)
    }

    /// Writes the CSV through a temporary file in the destination directory,
    /// then renames it into place. Nothing is left behind on failure.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io { path: path.to_path_buf(), source };
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        let name = path.file_name().ok_or_else(|| {
            io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "output path has no file name"))
        })?;
        let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
        let result = (|| {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(self.to_csv().as_bytes())?;
            f.sync_all()?;
            std::fs::rename(&tmp, path)
        })();
        if let Err(e) = result {
            let _ = std::fs::remove_file(&tmp);
            return Err(io(e));
        }
        Ok(())
    }
}

/// Formats like C's `%.9g`.
pub fn format_g9(v: f64) -> String {
    const P: i32 = 9;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // The exponent after rounding to P significant digits decides the style.
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

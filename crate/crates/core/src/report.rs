//! Tabular diagnostic reports.

use std::io::Write;

use crate::error::Result;
use crate::ode::fmt17;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub case: String,
    pub quantity: String,
    pub computed: f64,
    pub expected: Option<f64>,
}

impl ReportRow {
    pub fn new(case: impl Into<String>, quantity: impl Into<String>, computed: f64, expected: Option<f64>) -> Self {
        Self { case: case.into(), quantity: quantity.into(), computed, expected }
    }

    pub fn abs_err(&self) -> Option<f64> {
        self.expected.map(|e| (self.computed - e).abs())
    }
}

/// CSV `case,quantity,computed,expected,abs_err`; missing comparators are empty.
pub fn write_report<W: Write>(rows: &[ReportRow], mut w: W) -> Result<()> {
    writeln!(w, "case,quantity,computed,expected,abs_err")?;
    for r in rows {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", r.case, r.quantity, fmt17(r.computed), opt(r.expected), opt(r.abs_err()))?;
    }
    Ok(())
}

//! Ratio monitors for bounds whose implicit constants are unknown.

use serde::Serialize;

/// Shortest round-trip-safe rendering used in every CSV and JSON artefact:
/// 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct MonitorRecord {
    pub parameter: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Finite-range evidence for an inequality `lhs ≪ rhs`.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MonitorReport {
    pub quantity: String,
    pub grid: Vec<MonitorRecord>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// Set when the applicability window of the bound contains no grid point.
    pub empty_window: bool,
    pub note: String,
}

impl MonitorReport {
    pub fn new(quantity: impl Into<String>) -> Self {
        Self {
            quantity: quantity.into(),
            grid: Vec::new(),
            max_ratio: f64::NAN,
            min_ratio: f64::NAN,
            empty_window: false,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Record one grid point; the ratio is `lhs / rhs` when `rhs > 0`.
    pub fn push(&mut self, parameter: f64, lhs: f64, rhs: f64) {
        let ratio = if rhs > 0.0 { lhs / rhs } else { f64::NAN };
        self.grid.push(MonitorRecord { parameter, lhs, rhs, ratio });
        if ratio.is_finite() {
            if !(self.max_ratio >= ratio) {
                self.max_ratio = ratio;
            }
            if !(self.min_ratio <= ratio) {
                self.min_ratio = ratio;
            }
        }
    }

    pub fn mark_empty(mut self, why: impl Into<String>) -> Self {
        self.empty_window = true;
        self.note = why.into();
        self
    }
}

//! Outcome of a verification suite.

use std::fmt;

/// Items checked and every nonzero residual, rendered as text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub label: String,
    pub checked: usize,
    pub residuals: Vec<String>,
}

impl Report {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            ..Self::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.residuals.is_empty()
    }

    /// Records one comparison; `residual` is `None` when it held.
    pub fn record(&mut self, residual: Option<String>) {
        self.checked += 1;
        if let Some(r) = residual {
            self.residuals.push(r);
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.checked += other.checked;
        self.residuals.extend(other.residuals);
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} ({} checked, {} residuals)",
            self.label,
            if self.passed() { "PASS" } else { "FAIL" },
            self.checked,
            self.residuals.len()
        )
    }
}

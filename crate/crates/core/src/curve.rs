//! Labeled sweep results handed to the CLI for export.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
    /// Standard error; present iff the point is Monte Carlo backed.
    pub stderr: Option<f64>,
}

/// One labeled (x, y) sweep with axis metadata and the hash of the resolved
/// configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub label: String,
    pub x_name: String,
    pub x_unit: String,
    pub y_name: String,
    pub y_unit: String,
    pub points: Vec<CurvePoint>,
    #[serde(default)]
    pub config_hash: String,
}

impl CurveSeries {
    pub fn new(
        label: impl Into<String>,
        x_name: impl Into<String>,
        x_unit: impl Into<String>,
        y_name: impl Into<String>,
        y_unit: impl Into<String>,
    ) -> Self {
        Self {
            label: label.into(),
            x_name: x_name.into(),
            x_unit: x_unit.into(),
            y_name: y_name.into(),
            y_unit: y_unit.into(),
            points: Vec::new(),
            config_hash: String::new(),
        }
    }

    pub fn push(&mut self, x: f64, y: f64, stderr: Option<f64>) {
        self.points.push(CurvePoint { x, y, stderr });
    }

    /// Enforce the strictly-ascending-x contract.
    pub fn validate(&self) -> Result<()> {
        if self.points.windows(2).any(|w| w[1].x <= w[0].x) {
            return Err(Error::InvalidParameter(format!(
                "curve '{}' must have strictly ascending x",
                self.label
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascending_x_contract() {
        let mut c = CurveSeries::new("test", "x", "", "y", "");
        c.push(0.0, 1.0, None);
        c.push(1.0, 2.0, Some(0.1));
        c.validate().unwrap();
        c.push(0.5, 3.0, None);
        assert!(c.validate().is_err());
    }
}

//! Numerical tolerances shared by the simulator and the planners.

use serde::{Deserialize, Serialize};

/// Tolerances, all relative to a characteristic scale.
///
/// * a disk hit is tangent when `|v_n| < tangent * |v|`;
/// * two disk hits are simultaneous when `|t1 - t2| < time * max(1, |t|)`;
/// * a point is at a corner when it lies within `corner * L` of one;
/// * roots closer than `lookback * L / |v|` to the current contact are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub tangent: f64,
    pub time: f64,
    pub corner: f64,
    pub lookback: f64,
    /// Relative energy mismatch accepted per event by trace verification.
    pub energy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tangent: 1e-9,
            time: 1e-12,
            corner: 1e-7,
            lookback: 1e-12,
            energy: 1e-12,
        }
    }
}

impl Tolerances {
    /// Override one tolerance by name.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance {name} must be positive, got {value}"));
        }
        match name {
            "tangent" => self.tangent = value,
            "time" => self.time = value,
            "corner" => self.corner = value,
            "lookback" => self.lookback = value,
            "energy" => self.energy = value,
            _ => return Err(format!("unknown tolerance '{name}'")),
        }
        Ok(())
    }
}

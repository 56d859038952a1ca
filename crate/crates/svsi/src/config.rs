use serde::{Deserialize, Serialize};

use crate::error::{Result, SvsiError};

/// Tunable thresholds for the analysis pipeline.
///
/// Defaults follow the index definitions: recovery threshold 0.8 pu over the
/// 9-10 s post-clear window, steady-state band 0.01 pu, midline cutoff
/// 0.1 Hz. The remaining knobs (extrema prominence, gentle-slope bound,
/// component weights) have no prescribed values and carry engineering
/// defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Recovered/unrecovered decision threshold, pu (strict `>`).
    pub threshold: f64,
    /// Diagnostic window offsets after t_clear, seconds.
    pub window_offsets: (f64, f64),
    /// Steady-state fluctuation band V_wTh, pu.
    pub v_wth: f64,
    /// Midline low-pass cutoff, Hz.
    pub cutoff: f64,
    /// Extrema prominence, pu.
    pub prominence: f64,
    /// Tail-slope magnitude below which the signal counts as settled, pu/s.
    pub gentle_slope: f64,
    /// Composite weights (w_r, w_o, w_s).
    pub weights: [f64; 3],
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold: 0.8,
            window_offsets: (9.0, 10.0),
            v_wth: 0.01,
            cutoff: 0.1,
            prominence: 0.005,
            gentle_slope: 0.01,
            weights: [1.0, 1.0, 1.0],
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("threshold", self.threshold),
            ("v_wth", self.v_wth),
            ("cutoff", self.cutoff),
            ("gentle_slope", self.gentle_slope),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SvsiError::Config(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if !(self.prominence >= 0.0) || !self.prominence.is_finite() {
            return Err(SvsiError::Config(format!(
                "prominence must be non-negative, got {}",
                self.prominence
            )));
        }
        let (a, b) = self.window_offsets;
        if !(a > 0.0 && b > a) || !a.is_finite() || !b.is_finite() {
            return Err(SvsiError::Config(format!(
                "window_offsets must satisfy 0 < first < second, got ({a}, {b})"
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SvsiError::Config(format!(
                "weights must be finite and non-negative, got {:?}",
                self.weights
            )));
        }
        Ok(())
    }
}

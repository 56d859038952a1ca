//! Recovered/unrecovered decision from the post-clear diagnostic window.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvsiError};
use crate::trace::{integrate, VoltageTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Recovered,
    Unrecovered,
}

/// Transient-voltage-restoration verdict with the diagnostic window mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioClass {
    pub verdict: Verdict,
    /// Trapezoidal mean of v over the diagnostic window, pu.
    pub window_mean: f64,
    /// Diagnostic window, seconds.
    pub window: (f64, f64),
}

/// Classify a normalized trace: recovered iff the mean of v over
/// [t_clear + offsets.0, t_clear + offsets.1] strictly exceeds `threshold`.
pub fn classify_scenario(
    trace: &VoltageTrace,
    threshold: f64,
    window_offsets: (f64, f64),
) -> Result<ScenarioClass> {
    let tl = trace.timeline();
    let window = (tl.t_clear + window_offsets.0, tl.t_clear + window_offsets.1);
    if tl.t_end < window.1 - 1e-9 * trace.dt() {
        return Err(SvsiError::InsufficientHorizon {
            t_end: tl.t_end,
            required: window.1,
        });
    }
    let window = (window.0, window.1.min(trace.times()[trace.len() - 1]));
    let window_mean = integrate(trace, window)? / (window.1 - window.0);
    // Strict decision with a one-part-in-1e12 guard so that a plateau lying
    // exactly at the threshold classifies Unrecovered despite quadrature
    // round-off.
    let verdict = if window_mean > threshold * (1.0 + 1e-12) {
        Verdict::Recovered
    } else {
        Verdict::Unrecovered
    };
    Ok(ScenarioClass {
        verdict,
        window_mean,
        window,
    })
}

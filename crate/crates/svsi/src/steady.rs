//! Post-contingency steady-state voltage V_S and settling time T_Stable.

use serde::{Deserialize, Serialize};

use crate::classify::Verdict;
use crate::error::Result;
use crate::trace::{extrema_in, tail_slope, ExtremumKind, VoltageTrace};

/// How V_S was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VsMethod {
    /// Mean of the last peak and last valley (recognizable oscillation), or
    /// of the final monotone segment's endpoints when the tail is steep.
    LastPeakValleyMean,
    /// v(t_end) when the tail slope is gentle.
    EndValue,
    /// Midline value at t_end (unrecovered scenario).
    MidlineEnd,
}

/// How T_Stable was determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StableKind {
    /// The fluctuation band condition starts holding at an interior sample.
    Converged,
    /// Growing oscillation or band never entered: forced to t_end.
    ForcedEnd,
    /// Voltage within the band from t_clear onward.
    ImmediateClear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateEstimate {
    /// Estimated steady-state voltage, pu.
    pub v_s: f64,
    pub method: VsMethod,
    /// Settling time, seconds.
    pub t_stable: f64,
    pub t_stable_kind: StableKind,
}

/// Estimate V_S for a recovered trace from extrema on (t_clear, t_end].
///
/// With both a last peak and last valley present, V_S is their mean. With no
/// recognizable oscillation, a gentle tail slope selects v(t_end); a steep
/// tail falls back to the mean of the final monotone segment's endpoints.
/// The slope is fitted from the last extremum when one exists, otherwise
/// over the final quarter of the post-clear window.
pub fn estimate_vs_recovered(
    trace: &VoltageTrace,
    prominence: f64,
    gentle_slope: f64,
) -> Result<(f64, VsMethod)> {
    let tl = trace.timeline();
    let n = trace.len();
    let ci = trace.index_after(tl.t_clear);
    let last = trace.index_at_or_before(tl.t_end);
    let v = trace.values();
    let t = trace.times();

    let ext = extrema_in(trace, ci, last, prominence);
    let last_peak = ext.iter().rev().find(|e| e.kind == ExtremumKind::Peak);
    let last_valley = ext.iter().rev().find(|e| e.kind == ExtremumKind::Valley);
    if let (Some(p), Some(w)) = (last_peak, last_valley) {
        return Ok(((p.value + w.value) / 2.0, VsMethod::LastPeakValleyMean));
    }

    let from_idx = match ext.last() {
        Some(e) => e.index,
        None => ci + (0.75 * (last - ci) as f64) as usize,
    };
    let slope = tail_slope(trace, t[from_idx.min(n - 2)])?;
    if slope.abs() <= gentle_slope {
        return Ok((v[last], VsMethod::EndValue));
    }

    // Steep tail without a peak/valley pair: final monotone segment.
    let mut j = last;
    while j > ci + 1 {
        let d_prev = v[j - 1] - v[j - 2];
        let d_here = v[j] - v[j - 1];
        if d_prev == 0.0 || d_prev.signum() == d_here.signum() {
            j -= 1;
        } else {
            break;
        }
    }
    Ok(((v[j - 1] + v[last]) / 2.0, VsMethod::LastPeakValleyMean))
}

/// V_S for an unrecovered trace: the midline value at t_end.
pub fn estimate_vs_unrecovered(midline: &VoltageTrace) -> (f64, VsMethod) {
    let i = midline.index_at_or_before(midline.timeline().t_end);
    (midline.values()[i], VsMethod::MidlineEnd)
}

/// Settling time: earliest sample from which |v - v_s| < v_wth holds through
/// t_end. Unrecovered scenarios and growing oscillations force t_end.
pub fn find_t_stable(
    trace: &VoltageTrace,
    v_s: f64,
    v_wth: f64,
    verdict: Verdict,
) -> (f64, StableKind) {
    let tl = trace.timeline();
    if verdict == Verdict::Unrecovered {
        return (tl.t_end, StableKind::ForcedEnd);
    }
    let ci = trace.index_at_or_after(tl.t_clear);
    let last = trace.index_at_or_before(tl.t_end);
    let v = trace.values();

    let last_bad = (ci..=last).rev().find(|&i| (v[i] - v_s).abs() >= v_wth);
    let Some(bad) = last_bad else {
        return (tl.t_clear, StableKind::ImmediateClear);
    };
    if growing_oscillation(trace, ci, last, v_s, v_wth) || bad == last {
        return (tl.t_end, StableKind::ForcedEnd);
    }
    (trace.times()[bad + 1], StableKind::Converged)
}

/// Growing-oscillation test: three or more successive same-kind extrema with
/// strictly increasing deviation from v_s, the last of them outside the band.
fn growing_oscillation(
    trace: &VoltageTrace,
    ci: usize,
    last: usize,
    v_s: f64,
    v_wth: f64,
) -> bool {
    // The fluctuation band itself is the natural prominence scale here:
    // sub-band ripple cannot constitute a growing oscillation.
    let ext = extrema_in(trace, ci, last, v_wth);
    for kind in [ExtremumKind::Peak, ExtremumKind::Valley] {
        let devs: Vec<f64> = ext
            .iter()
            .filter(|e| e.kind == kind)
            .map(|e| (e.value - v_s).abs())
            .collect();
        let m = devs.len();
        if m >= 3
            && devs[m - 3] < devs[m - 2]
            && devs[m - 2] < devs[m - 1]
            && devs[m - 1] >= v_wth
        {
            return true;
        }
    }
    false
}

//! The three SVSI components and the composite score.

use serde::{Deserialize, Serialize};

use crate::classify::{classify_scenario, ScenarioClass, Verdict};
use crate::config::AnalysisConfig;
use crate::error::{Result, SvsiError};
use crate::steady::{
    estimate_vs_recovered, estimate_vs_unrecovered, find_t_stable, StableKind,
    SteadyStateEstimate,
};
use crate::trace::{integrate_abs_dev, Reference, VoltageTrace};

/// Full analysis outcome: components, composite and every intermediate
/// landmark for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvsiResult {
    /// Restoration deficit, pu·s.
    pub svsi_r: f64,
    /// Oscillation content, pu·s.
    pub svsi_o: f64,
    /// Settling deficit, pu·s.
    pub svsi_s: f64,
    /// Weighted sum of the three components, pu·s.
    pub composite: f64,
    pub scenario: ScenarioClass,
    pub estimate: SteadyStateEstimate,
    /// First instant the recovering voltage reaches V_S ramping upward, s.
    pub t_svsir: f64,
    /// Component weights (w_r, w_o, w_s).
    pub weights: [f64; 3],
}

/// First instant in (t_clear, t_end) where v crosses v_s from below while
/// ramping upward, refined by linear interpolation. Returns t_clear when v
/// stays above v_s throughout, t_end for unrecovered scenarios, and the time
/// of the post-clear maximum when no upward crossing qualifies.
pub fn find_t_svsir(trace: &VoltageTrace, v_s: f64, verdict: Verdict) -> f64 {
    let tl = trace.timeline();
    if verdict == Verdict::Unrecovered {
        return tl.t_end;
    }
    let ci = trace.index_after(tl.t_clear);
    let last = trace.index_at_or_before(tl.t_end);
    let v = trace.values();
    let t = trace.times();

    if v[ci..=last].iter().all(|&x| x > v_s) {
        return tl.t_clear;
    }
    for i in (ci + 1)..=last {
        if v[i - 1] < v_s && v_s <= v[i] {
            let frac = (v_s - v[i - 1]) / (v[i] - v[i - 1]);
            return t[i - 1] + frac * (t[i] - t[i - 1]);
        }
    }
    // No qualifying crossing: closest approach is the post-clear maximum.
    let (mut best_i, mut best_v) = (ci, v[ci]);
    for i in ci..=last {
        if v[i] > best_v {
            best_v = v[i];
            best_i = i;
        }
    }
    t[best_i]
}

/// SVSI_r: deviation from V_S integrated over [t_flt, t_svsir] (recovered),
/// or from the pre-fault level 1.0 over [t_flt, t_end] (unrecovered).
pub fn svsi_r(trace: &VoltageTrace, v_s: f64, t_svsir: f64, verdict: Verdict) -> Result<f64> {
    let tl = trace.timeline();
    match verdict {
        Verdict::Recovered => {
            integrate_abs_dev(trace, Reference::Constant(v_s), (tl.t_flt, t_svsir))
        }
        Verdict::Unrecovered => {
            integrate_abs_dev(trace, Reference::Constant(1.0), (tl.t_flt, tl.t_end))
        }
    }
}

/// Zero-phase low-pass midline of v on [t_clear, t_end]: two passes of a
/// centered moving average with mirror-reflected edges, window length
/// min(1/cutoff, (t_end - t_clear)/2). Samples outside the window pass
/// through unchanged.
pub fn extract_midline(trace: &VoltageTrace, cutoff: f64) -> Result<VoltageTrace> {
    if !(cutoff > 0.0) {
        return Err(SvsiError::Config(format!(
            "cutoff must be strictly positive, got {cutoff}"
        )));
    }
    let tl = trace.timeline();
    let ci = trace.index_at_or_after(tl.t_clear);
    let ei = trace.index_at_or_before(tl.t_end);
    if ei < ci + 2 {
        return Err(SvsiError::Window(format!(
            "midline window [{}, {}] has fewer than 3 samples",
            tl.t_clear, tl.t_end
        )));
    }
    let span = tl.t_end - tl.t_clear;
    let len = (1.0 / cutoff).min(span / 2.0);
    let n_win = ei - ci + 1;
    let h = ((len / trace.dt() / 2.0).round() as usize).min(n_win - 1);

    let mut values = trace.values().to_vec();
    let window = &values[ci..=ei];
    let smoothed = moving_average_reflect(&moving_average_reflect(window, h), h);
    values[ci..=ei].copy_from_slice(&smoothed);
    trace.companion(values)
}

/// Centered moving average of half-width h with mirror-reflection padding,
/// O(n) via prefix sums.
fn moving_average_reflect(x: &[f64], h: usize) -> Vec<f64> {
    let n = x.len();
    if h == 0 {
        return x.to_vec();
    }
    debug_assert!(h <= n - 1);
    let mut padded = Vec::with_capacity(n + 2 * h);
    padded.extend(x[1..=h].iter().rev());
    padded.extend_from_slice(x);
    padded.extend(x[n - 1 - h..n - 1].iter().rev());

    let mut prefix = Vec::with_capacity(padded.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &p in &padded {
        acc += p;
        prefix.push(acc);
    }
    let w = (2 * h + 1) as f64;
    (0..n).map(|i| (prefix[i + 2 * h + 1] - prefix[i]) / w).collect()
}

/// SVSI_o: integral of |midline - v| over [t_clear, t_end].
pub fn svsi_o(trace: &VoltageTrace, midline: &VoltageTrace) -> Result<f64> {
    let tl = trace.timeline();
    if midline.len() != trace.len() || midline.dt() != trace.dt() {
        return Err(SvsiError::Grid(
            "midline does not share the trace's sample grid".into(),
        ));
    }
    integrate_abs_dev(
        trace,
        Reference::Series(midline.values()),
        (tl.t_clear, tl.t_end),
    )
}

/// SVSI_s: (1 - V_S) x (t_stable - t_clear), clamped below at 0 for
/// overshooting steady states (V_S > 1).
pub fn svsi_s(trace: &VoltageTrace, estimate: &SteadyStateEstimate) -> f64 {
    let tl = trace.timeline();
    ((1.0 - estimate.v_s) * (estimate.t_stable - tl.t_clear)).max(0.0)
}

/// End-to-end analysis of a raw trace: normalize, classify, extract the
/// midline, estimate V_S and the landmark times, then assemble the three
/// components and the composite.
pub fn analyze(raw: &VoltageTrace, config: &AnalysisConfig) -> Result<SvsiResult> {
    config.validate()?;
    let trace = raw.normalize()?;
    let tl = trace.timeline();
    let scenario = classify_scenario(&trace, config.threshold, config.window_offsets)?;
    let midline = extract_midline(&trace, config.cutoff)?;

    let (v_s, method, t_svsir, t_stable, t_stable_kind) = match scenario.verdict {
        Verdict::Recovered => {
            let (v_s, method) =
                estimate_vs_recovered(&trace, config.prominence, config.gentle_slope)?;
            let t_svsir = find_t_svsir(&trace, v_s, scenario.verdict);
            let (t_stable, kind) = find_t_stable(&trace, v_s, config.v_wth, scenario.verdict);
            (v_s, method, t_svsir, t_stable, kind)
        }
        Verdict::Unrecovered => {
            let (v_s, method) = estimate_vs_unrecovered(&midline);
            (v_s, method, tl.t_end, tl.t_end, StableKind::ForcedEnd)
        }
    };
    let estimate = SteadyStateEstimate {
        v_s,
        method,
        t_stable,
        t_stable_kind,
    };

    let r = svsi_r(&trace, v_s, t_svsir, scenario.verdict)?;
    let o = svsi_o(&trace, &midline)?;
    let s = svsi_s(&trace, &estimate);
    let [w_r, w_o, w_s] = config.weights;
    Ok(SvsiResult {
        svsi_r: r,
        svsi_o: o,
        svsi_s: s,
        composite: w_r * r + w_o * o + w_s * s,
        scenario,
        estimate,
        t_svsir,
        weights: config.weights,
    })
}

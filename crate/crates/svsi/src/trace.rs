//! Trace data model and low-level signal primitives.
//!
//! A [`VoltageTrace`] is a uniformly sampled per-unit voltage series with an
//! event timeline (fault inception, fault clearing, horizon end). Everything
//! downstream (classification, steady-state estimation, the indices) works on
//! these primitives: normalization, extrema detection, tail slopes and
//! trapezoidal integration of absolute deviations.

use std::io::{BufReader, Read};

use crate::error::{Result, SvsiError};

/// Relative tolerance for the uniform-grid check.
const GRID_RTOL: f64 = 1e-9;

/// Fault timeline of a simulated contingency, seconds.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EventTimeline {
    /// Fault inception.
    pub t_flt: f64,
    /// Fault cleared.
    pub t_clear: f64,
    /// End of the analysis horizon.
    pub t_end: f64,
}

impl EventTimeline {
    pub fn new(t_flt: f64, t_clear: f64, t_end: f64) -> Result<Self> {
        if ![t_flt, t_clear, t_end].iter().all(|t| t.is_finite()) {
            return Err(SvsiError::Timeline(format!(
                "timeline values must be finite, got ({t_flt}, {t_clear}, {t_end})"
            )));
        }
        if !(t_flt < t_clear && t_clear < t_end) {
            return Err(SvsiError::Timeline(format!(
                "expected t_flt < t_clear < t_end, got ({t_flt}, {t_clear}, {t_end})"
            )));
        }
        Ok(EventTimeline {
            t_flt,
            t_clear,
            t_end,
        })
    }
}

/// Uniformly sampled per-unit voltage time series.
#[derive(Debug, Clone, PartialEq)]
pub struct VoltageTrace {
    times: Vec<f64>,
    values: Vec<f64>,
    timeline: EventTimeline,
    normalized: bool,
    dt: f64,
}

impl VoltageTrace {
    /// Build a raw (not yet normalized) trace, validating every invariant:
    /// at least two samples, strictly increasing uniform time grid, finite
    /// positive voltages, timeline inside the sampled span.
    pub fn new(times: Vec<f64>, values: Vec<f64>, timeline: EventTimeline) -> Result<Self> {
        Self::build(times, values, timeline, false)
    }

    fn build(
        times: Vec<f64>,
        values: Vec<f64>,
        timeline: EventTimeline,
        normalized: bool,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(SvsiError::Grid(format!(
                "time and value columns differ in length ({} vs {})",
                times.len(),
                values.len()
            )));
        }
        let n = times.len();
        if n < 2 {
            return Err(SvsiError::Grid(format!("need at least 2 samples, got {n}")));
        }
        let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SvsiError::Grid(format!("non-increasing time grid (dt = {dt})")));
        }
        for i in 1..n {
            let step = times[i] - times[i - 1];
            if !(step > 0.0) {
                return Err(SvsiError::Grid(format!(
                    "time grid not strictly increasing at sample {i}"
                )));
            }
            if (step - dt).abs() > GRID_RTOL * dt {
                return Err(SvsiError::Grid(format!(
                    "non-uniform time grid at sample {i}: step {step} vs dt {dt}"
                )));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SvsiError::Samples(format!("non-finite voltage at sample {i}")));
            }
            let ok = if normalized { *v >= 0.0 } else { *v > 0.0 };
            if !ok {
                return Err(SvsiError::Samples(format!(
                    "voltage {v} at sample {i} out of domain"
                )));
            }
        }
        if timeline.t_flt < times[0] || timeline.t_end > times[n - 1] + GRID_RTOL * dt {
            return Err(SvsiError::Timeline(format!(
                "timeline ({}, {}, {}) outside sampled span [{}, {}]",
                timeline.t_flt,
                timeline.t_clear,
                timeline.t_end,
                times[0],
                times[n - 1]
            )));
        }
        Ok(VoltageTrace {
            times,
            values,
            timeline,
            normalized,
            dt,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: >= 2 samples
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn timeline(&self) -> EventTimeline {
        self.timeline
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Last sample index with time <= t (the v_o(0) reference uses t_flt).
    pub fn index_at_or_before(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        }
    }

    /// First sample index with time >= t.
    pub fn index_at_or_after(&self, t: f64) -> usize {
        match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i,
        }
    }

    /// First sample index with time strictly greater than t.
    pub fn index_after(&self, t: f64) -> usize {
        let i = self.index_at_or_after(t);
        if i < self.len() && self.times[i] <= t {
            i + 1
        } else {
            i
        }
    }

    /// Build a companion series on the same grid and timeline (used for the
    /// oscillation midline).
    pub fn companion(&self, values: Vec<f64>) -> Result<VoltageTrace> {
        VoltageTrace::build(self.times.clone(), values, self.timeline, self.normalized)
    }

    /// Divide every sample by the pre-fault reference voltage v_o(0), taken
    /// at the last sample at or before t_flt. The reference sample becomes
    /// exactly 1.0.
    pub fn normalize(&self) -> Result<VoltageTrace> {
        if self.normalized {
            return Err(SvsiError::AlreadyNormalized);
        }
        let r = self.index_at_or_before(self.timeline.t_flt);
        let base = self.values[r];
        if !(base > 0.0) {
            return Err(SvsiError::DegenerateBase(base));
        }
        let values = self.values.iter().map(|v| v / base).collect();
        VoltageTrace::build(self.times.clone(), values, self.timeline, true)
    }
}

/// Read a two-column `time,voltage` CSV (one header row) into a raw trace.
pub fn ingest_csv<R: Read>(source: R, timeline: EventTimeline) -> Result<VoltageTrace> {
    // One read into a single buffer, then zero-copy line splitting: batch
    // analysis is dominated by ingestion, so per-line allocations matter.
    let mut text = String::new();
    BufReader::new(source)
        .read_to_string(&mut text)
        .map_err(SvsiError::Io)?;
    let mut times = Vec::with_capacity(text.len() / 16);
    let mut values = Vec::with_capacity(text.len() / 16);
    let mut lines = text.split('\n');

    let header = lines.next().ok_or_else(|| SvsiError::Parse {
        line: 1,
        reason: "empty input".into(),
    })?;
    if header.trim_end_matches('\r').split(',').count() != 2 {
        return Err(SvsiError::Parse {
            line: 1,
            reason: "expected exactly 2 columns in header".into(),
        });
    }

    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let (t_str, v_str) = line.split_once(',').ok_or_else(|| SvsiError::Parse {
            line: lineno,
            reason: "expected two comma-separated columns".into(),
        })?;
        if v_str.contains(',') {
            return Err(SvsiError::Parse {
                line: lineno,
                reason: "expected exactly 2 columns".into(),
            });
        }
        let t: f64 = t_str.trim().parse().map_err(|_| SvsiError::Parse {
            line: lineno,
            reason: format!("invalid time value {t_str:?}"),
        })?;
        let v: f64 = v_str.trim().parse().map_err(|_| SvsiError::Parse {
            line: lineno,
            reason: format!("invalid voltage value {v_str:?}"),
        })?;
        times.push(t);
        values.push(v);
    }

    VoltageTrace::new(times, values, timeline)
}

/// Write a trace back out in the two-column CSV format. Floats use the
/// shortest representation that round-trips, so ingesting the output
/// reproduces the trace exactly.
pub fn write_csv<W: std::io::Write>(trace: &VoltageTrace, out: &mut W) -> std::io::Result<()> {
    let mut buf = String::with_capacity(trace.len() * 24 + 8);
    buf.push_str("time,v\n");
    for (t, v) in trace.times().iter().zip(trace.values()) {
        buf.push_str(&format!("{t},{v}\n"));
    }
    out.write_all(buf.as_bytes())
}

/// Kind of a detected local extremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Peak,
    Valley,
}

/// A detected local extremum (plateaus report their midpoint sample).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub time: f64,
    pub value: f64,
    pub kind: ExtremumKind,
}

/// Alternating peak/valley detection with a prominence threshold.
///
/// An extremum qualifies only once the signal has moved away from it by at
/// least `prominence`; window-boundary samples are never reported (an
/// extremum must exceed both neighbors). Window bounds are inclusive.
pub fn find_extrema(
    trace: &VoltageTrace,
    window: (f64, f64),
    prominence: f64,
) -> Result<Vec<Extremum>> {
    let (t_a, t_b) = window;
    if !(t_a < t_b) {
        return Err(SvsiError::Window(format!("empty window [{t_a}, {t_b}]")));
    }
    if t_a < trace.times()[0] - GRID_RTOL * trace.dt()
        || t_b > trace.times()[trace.len() - 1] + GRID_RTOL * trace.dt()
    {
        return Err(SvsiError::Window(format!(
            "window [{t_a}, {t_b}] outside sampled span"
        )));
    }
    if prominence < 0.0 {
        return Err(SvsiError::Window(format!(
            "prominence must be non-negative, got {prominence}"
        )));
    }
    let i0 = trace.index_at_or_after(t_a);
    let i1 = trace.index_at_or_before(t_b);
    if i0 >= i1 {
        return Err(SvsiError::Window(format!(
            "window [{t_a}, {t_b}] contains fewer than 2 samples"
        )));
    }
    Ok(extrema_in(trace, i0, i1, prominence))
}

/// Zigzag extrema over the inclusive index range [i0, i1].
pub(crate) fn extrema_in(
    trace: &VoltageTrace,
    i0: usize,
    i1: usize,
    prominence: f64,
) -> Vec<Extremum> {
    let v = trace.values();
    let mut out = Vec::new();

    // Running candidate max/min with plateau first/last indices.
    let (mut cmax, mut cmax_a, mut cmax_b) = (v[i0], i0, i0);
    let (mut cmin, mut cmin_a, mut cmin_b) = (v[i0], i0, i0);
    // 0 = direction unknown, 1 = rising (tracking a max), -1 = falling.
    let mut dir = 0i8;

    let emit = |idx_a: usize, idx_b: usize, value: f64, kind: ExtremumKind,
                    out: &mut Vec<Extremum>| {
        // A run touching the window boundary is not an interior extremum.
        if idx_a == i0 || idx_b == i1 {
            return;
        }
        let index = (idx_a + idx_b) / 2;
        out.push(Extremum {
            index,
            time: trace.times()[index],
            value,
            kind,
        });
    };

    for i in (i0 + 1)..=i1 {
        let x = v[i];
        match dir {
            0 => {
                if x > cmax {
                    cmax = x;
                    cmax_a = i;
                    cmax_b = i;
                } else if x == cmax {
                    cmax_b = i;
                }
                if x < cmin {
                    cmin = x;
                    cmin_a = i;
                    cmin_b = i;
                } else if x == cmin {
                    cmin_b = i;
                }
                if cmax - x >= prominence && prominence > 0.0 || (prominence == 0.0 && x < cmax) {
                    emit(cmax_a, cmax_b, cmax, ExtremumKind::Peak, &mut out);
                    dir = -1;
                    cmin = x;
                    cmin_a = i;
                    cmin_b = i;
                } else if x - cmin >= prominence && prominence > 0.0
                    || (prominence == 0.0 && x > cmin)
                {
                    emit(cmin_a, cmin_b, cmin, ExtremumKind::Valley, &mut out);
                    dir = 1;
                    cmax = x;
                    cmax_a = i;
                    cmax_b = i;
                }
            }
            1 => {
                if x > cmax {
                    cmax = x;
                    cmax_a = i;
                    cmax_b = i;
                } else if x == cmax {
                    cmax_b = i;
                } else if cmax - x >= prominence.max(f64::MIN_POSITIVE) {
                    emit(cmax_a, cmax_b, cmax, ExtremumKind::Peak, &mut out);
                    dir = -1;
                    cmin = x;
                    cmin_a = i;
                    cmin_b = i;
                }
            }
            _ => {
                if x < cmin {
                    cmin = x;
                    cmin_a = i;
                    cmin_b = i;
                } else if x == cmin {
                    cmin_b = i;
                } else if x - cmin >= prominence.max(f64::MIN_POSITIVE) {
                    emit(cmin_a, cmin_b, cmin, ExtremumKind::Valley, &mut out);
                    dir = 1;
                    cmax = x;
                    cmax_a = i;
                    cmax_b = i;
                }
            }
        }
    }
    out
}

/// Least-squares slope of v(t) on [from, t_end], pu/s.
pub fn tail_slope(trace: &VoltageTrace, from: f64) -> Result<f64> {
    let t_end = trace.timeline().t_end;
    if !(from < t_end) {
        return Err(SvsiError::Window(format!(
            "tail window start {from} not before t_end {t_end}"
        )));
    }
    let i0 = trace.index_at_or_after(from);
    let i1 = trace.index_at_or_before(t_end);
    if i1 < i0 + 1 {
        return Err(SvsiError::Window(format!(
            "fewer than 2 samples in tail window [{from}, {t_end}]"
        )));
    }
    let n = (i1 - i0 + 1) as f64;
    let ts = &trace.times()[i0..=i1];
    let vs = &trace.values()[i0..=i1];
    let t_mean = ts.iter().sum::<f64>() / n;
    let v_mean = vs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, v) in ts.iter().zip(vs) {
        num += (t - t_mean) * (v - v_mean);
        den += (t - t_mean) * (t - t_mean);
    }
    Ok(num / den)
}

/// Reference signal for deviation integrals: a constant level or a companion
/// series aligned sample-for-sample with the trace.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    Constant(f64),
    Series(&'a [f64]),
}

impl Reference<'_> {
    fn at(&self, i: usize) -> f64 {
        match self {
            Reference::Constant(c) => *c,
            Reference::Series(s) => s[i],
        }
    }
}

/// Trapezoidal integral of |v(t) - reference(t)| over the window, pu·s.
/// Window endpoints between samples interpolate the integrand linearly.
pub fn integrate_abs_dev(
    trace: &VoltageTrace,
    reference: Reference<'_>,
    window: (f64, f64),
) -> Result<f64> {
    if let Reference::Series(s) = reference {
        if s.len() != trace.len() {
            return Err(SvsiError::Grid(format!(
                "companion series length {} does not match trace length {}",
                s.len(),
                trace.len()
            )));
        }
    }
    trapezoid(trace, window, |i| (trace.values()[i] - reference.at(i)).abs())
}

/// Trapezoidal integral of v(t) over the window, pu·s.
pub fn integrate(trace: &VoltageTrace, window: (f64, f64)) -> Result<f64> {
    trapezoid(trace, window, |i| trace.values()[i])
}

fn trapezoid(
    trace: &VoltageTrace,
    (t_a, t_b): (f64, f64),
    g: impl Fn(usize) -> f64,
) -> Result<f64> {
    let times = trace.times();
    let n = trace.len();
    let eps = GRID_RTOL * trace.dt();
    if !(t_a < t_b) {
        if t_a == t_b {
            return Ok(0.0);
        }
        return Err(SvsiError::Window(format!("empty window [{t_a}, {t_b}]")));
    }
    if t_a < times[0] - eps || t_b > times[n - 1] + eps {
        return Err(SvsiError::Window(format!(
            "window [{t_a}, {t_b}] outside sampled span [{}, {}]",
            times[0],
            times[n - 1]
        )));
    }
    let t_a = t_a.max(times[0]);
    let t_b = t_b.min(times[n - 1]);
    let i0 = trace.index_at_or_after(t_a);
    let i1 = trace.index_at_or_before(t_b);

    let interp = |t: f64, j: usize| {
        // Linear interpolation of the integrand on segment [j, j+1].
        let w = (t - times[j]) / (times[j + 1] - times[j]);
        g(j) * (1.0 - w) + g(j + 1) * w
    };

    if i0 > i1 {
        // Whole window inside one sample interval.
        let j = i1;
        let ga = interp(t_a, j);
        let gb = interp(t_b, j);
        return Ok(0.5 * (ga + gb) * (t_b - t_a));
    }

    let mut total = 0.0;
    for j in i0..i1 {
        total += 0.5 * (g(j) + g(j + 1)) * (times[j + 1] - times[j]);
    }
    if times[i0] > t_a && i0 > 0 {
        let ga = interp(t_a, i0 - 1);
        total += 0.5 * (ga + g(i0)) * (times[i0] - t_a);
    }
    if times[i1] < t_b && i1 + 1 < n {
        let gb = interp(t_b, i1);
        total += 0.5 * (g(i1) + gb) * (t_b - times[i1]);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tl(t_flt: f64, t_clear: f64, t_end: f64) -> EventTimeline {
        EventTimeline::new(t_flt, t_clear, t_end).unwrap()
    }

    fn ramp_csv(n: usize, dt: f64) -> String {
        let mut s = String::from("time,v\n");
        for i in 0..n {
            let t = i as f64 * dt;
            s.push_str(&format!("{},{}\n", t, 1.0 + 0.01 * t));
        }
        s
    }

    #[test]
    fn timeline_ordering_enforced() {
        assert!(EventTimeline::new(0.0, 0.0, 1.0).is_err());
        assert!(EventTimeline::new(0.5, 0.2, 1.0).is_err());
        assert!(EventTimeline::new(0.1, 0.2, 1.0).is_ok());
    }

    #[test]
    fn ingest_rejects_overlapping_timeline() {
        let csv = "time,v\n0.0,1.0\n0.01,1.0";
        let err = EventTimeline::new(0.0, 0.0, 0.01).unwrap_err();
        assert!(matches!(err, SvsiError::Timeline(_)));
        // And a valid ordering that falls outside the span also fails.
        let tl = EventTimeline::new(0.0, 0.005, 0.02).unwrap();
        let err = ingest_csv(csv.as_bytes(), tl).unwrap_err();
        assert!(matches!(err, SvsiError::Timeline(_)));
    }

    #[test]
    fn ingest_ramp_readback() {
        let csv = ramp_csv(1001, 0.01);
        let trace = ingest_csv(csv.as_bytes(), tl(1.0, 2.0, 10.0)).unwrap();
        assert_eq!(trace.len(), 1001);
        assert!((trace.dt() - 0.01).abs() < 1e-12);
        assert!(!trace.is_normalized());
    }

    #[test]
    fn ingest_reports_bad_cell_line() {
        let csv = "time,v\n0.0,1.0\n0.02,abc\n0.04,1.0";
        let err = ingest_csv(csv.as_bytes(), tl(0.0, 0.01, 0.04)).unwrap_err();
        match err {
            SvsiError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_rejects_non_uniform_grid() {
        let csv = "time,v\n0.0,1.0\n0.01,1.0\n0.03,1.0";
        let err = ingest_csv(csv.as_bytes(), tl(0.0, 0.005, 0.03)).unwrap_err();
        assert!(matches!(err, SvsiError::Grid(_)));
    }

    #[test]
    fn normalize_constant_trace() {
        let times: Vec<f64> = (0..1101).map(|i| i as f64 * 0.01).collect();
        let values = vec![0.98; 1101];
        let trace = VoltageTrace::new(times, values, tl(0.5, 0.6, 11.0)).unwrap();
        let norm = trace.normalize().unwrap();
        assert!(norm.is_normalized());
        assert!(norm.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn normalize_elementwise_division() {
        let times = vec![0.0, 0.1, 0.2];
        let values = vec![1.05, 0.42, 0.945];
        let trace = VoltageTrace::new(times, values, tl(0.05, 0.1, 0.2)).unwrap();
        let norm = trace.normalize().unwrap();
        let expect = [1.0, 0.4, 0.9];
        for (v, e) in norm.values().iter().zip(expect) {
            assert!((v - e).abs() < 1e-15, "{v} vs {e}");
        }
        assert_eq!(norm.values()[0], 1.0);
    }

    #[test]
    fn normalize_rejects_degenerate_base() {
        // Values must be > 0 at construction, so a zero base is caught there.
        let times = vec![0.0, 0.1, 0.2];
        let err = VoltageTrace::new(times, vec![0.0, 0.5, 0.5], tl(0.05, 0.1, 0.2)).unwrap_err();
        assert!(matches!(err, SvsiError::Samples(_)));
    }

    #[test]
    fn normalize_twice_rejected() {
        let times = vec![0.0, 0.1, 0.2];
        let trace =
            VoltageTrace::new(times, vec![1.0, 0.5, 0.9], tl(0.05, 0.1, 0.2)).unwrap();
        let norm = trace.normalize().unwrap();
        assert!(matches!(norm.normalize(), Err(SvsiError::AlreadyNormalized)));
    }

    #[test]
    fn extrema_monotone_ramp_empty() {
        let times: Vec<f64> = (0..500).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| 0.2 + 0.2 * t).collect();
        let trace = VoltageTrace::new(times, values, tl(0.1, 0.2, 4.9)).unwrap();
        let ext = find_extrema(&trace, (0.0, 4.9), 0.01).unwrap();
        assert!(ext.is_empty());
    }

    #[test]
    fn extrema_of_cosine() {
        let dt = 1e-3;
        let n = 3001;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 1.0 + 0.1 * (2.0 * std::f64::consts::PI * t).cos())
            .collect();
        let trace = VoltageTrace::new(times, values, tl(0.1, 0.2, 3.0)).unwrap();
        let ext = find_extrema(&trace, (0.0, 3.0), 0.01).unwrap();
        // Interior extrema: valleys at 0.5, 1.5, 2.5 and peaks at 1.0, 2.0.
        let expected = [
            (0.5, 0.9, ExtremumKind::Valley),
            (1.0, 1.1, ExtremumKind::Peak),
            (1.5, 0.9, ExtremumKind::Valley),
            (2.0, 1.1, ExtremumKind::Peak),
            (2.5, 0.9, ExtremumKind::Valley),
        ];
        assert_eq!(ext.len(), expected.len());
        for (e, (t, v, k)) in ext.iter().zip(expected) {
            assert!((e.time - t).abs() <= 2.0 * dt, "time {} vs {}", e.time, t);
            assert!((e.value - v).abs() < 1e-6);
            assert_eq!(e.kind, k);
        }
        // Kinds alternate.
        for pair in ext.windows(2) {
            assert_ne!(pair[0].kind, pair[1].kind);
        }
    }

    #[test]
    fn extrema_prominence_exceeds_swing() {
        let dt = 1e-3;
        let times: Vec<f64> = (0..3001).map(|i| i as f64 * dt).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 1.0 + 0.1 * (2.0 * std::f64::consts::PI * t).cos())
            .collect();
        let trace = VoltageTrace::new(times, values, tl(0.1, 0.2, 3.0)).unwrap();
        let ext = find_extrema(&trace, (0.0, 3.0), 0.5).unwrap();
        assert!(ext.is_empty());
    }

    #[test]
    fn extrema_plateau_midpoint() {
        let times: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let values = vec![1.0, 2.0, 3.0, 3.0, 3.0, 2.0, 1.0, 0.9, 0.8];
        let trace = VoltageTrace::new(times, values, tl(0.5, 1.0, 8.0)).unwrap();
        let ext = find_extrema(&trace, (0.0, 8.0), 0.1).unwrap();
        assert_eq!(ext.len(), 1);
        assert_eq!(ext[0].index, 3);
        assert_eq!(ext[0].kind, ExtremumKind::Peak);
    }

    #[test]
    fn tail_slope_flat_and_linear() {
        let times: Vec<f64> = (0..1001).map(|i| i as f64 * 0.01).collect();
        let flat = VoltageTrace::new(times.clone(), vec![0.95; 1001], tl(0.5, 1.0, 10.0)).unwrap();
        assert!(tail_slope(&flat, 5.0).unwrap().abs() < 1e-14);

        let values: Vec<f64> = times.iter().map(|t| 0.9 + 0.02 * t).collect();
        let lin = VoltageTrace::new(times, values, tl(0.5, 1.0, 10.0)).unwrap();
        assert!((tail_slope(&lin, 5.0).unwrap() - 0.02).abs() < 1e-10);
    }

    #[test]
    fn tail_slope_recovers_noisy_generator_slope() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let slope = 0.015;
        let dt = 1e-3;
        let times: Vec<f64> = (0..10001).map(|i| i as f64 * dt).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 0.9 + slope * t + 1e-3 * (rng.gen::<f64>() * 2.0 - 1.0))
            .collect();
        let trace = VoltageTrace::new(times, values, tl(0.5, 1.0, 10.0)).unwrap();
        let got = tail_slope(&trace, 5.0).unwrap();
        assert!((got - slope).abs() < 1e-3, "slope {got}");
    }

    #[test]
    fn tail_slope_window_errors() {
        let times: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let trace = VoltageTrace::new(times, vec![1.0; 101], tl(0.1, 0.2, 1.0)).unwrap();
        assert!(matches!(
            tail_slope(&trace, 1.0),
            Err(SvsiError::Window(_))
        ));
        assert!(matches!(
            tail_slope(&trace, 0.995),
            Err(SvsiError::Window(_))
        ));
    }

    #[test]
    fn integrate_zero_deviation() {
        let times: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let trace = VoltageTrace::new(times, vec![0.7; 101], tl(0.1, 0.2, 1.0)).unwrap();
        let v = integrate_abs_dev(&trace, Reference::Constant(0.7), (0.0, 1.0)).unwrap();
        assert_eq!(v, 0.0);
        let vals = trace.values().to_vec();
        let v = integrate_abs_dev(&trace, Reference::Series(&vals), (0.0, 1.0)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn integrate_rectangle() {
        let dt = 1e-4;
        let times: Vec<f64> = (0..10001).map(|i| i as f64 * dt).collect();
        let trace = VoltageTrace::new(times, vec![0.2; 10001], tl(0.1, 0.2, 1.0)).unwrap();
        let v = integrate_abs_dev(&trace, Reference::Constant(1.0), (0.45, 0.55)).unwrap();
        assert!((v - 0.08).abs() < 1e-12, "{v}");
    }

    #[test]
    fn integrate_abs_sine_one_period() {
        let dt = 1e-4;
        let n = 20001; // 2 s at 0.1 ms
        let times: Vec<f64> = (0..n).map(|i| i as f64 * dt).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 1.0 + (2.0 * std::f64::consts::PI * t).sin() + 2.0)
            .collect(); // keep values positive
        let trace = VoltageTrace::new(times, values, tl(0.1, 0.2, 2.0)).unwrap();
        let v = integrate_abs_dev(&trace, Reference::Constant(3.0), (0.5, 1.5)).unwrap();
        let expect = 2.0 / std::f64::consts::PI;
        assert!((v - expect).abs() < 1e-6, "{v} vs {expect}");
    }

    #[test]
    fn integrate_mismatched_grid() {
        let times: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let trace = VoltageTrace::new(times, vec![0.9; 101], tl(0.1, 0.2, 1.0)).unwrap();
        let short = vec![0.9; 50];
        assert!(matches!(
            integrate_abs_dev(&trace, Reference::Series(&short), (0.0, 1.0)),
            Err(SvsiError::Grid(_))
        ));
    }

    #[test]
    fn integrate_interpolated_endpoints_additive() {
        let times: Vec<f64> = (0..101).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = times.iter().map(|t| 1.0 + (7.3 * t).sin() * 0.3).collect();
        let trace = VoltageTrace::new(times, values, tl(0.1, 0.2, 1.0)).unwrap();
        let whole = integrate_abs_dev(&trace, Reference::Constant(1.0), (0.123, 0.877)).unwrap();
        let a = integrate_abs_dev(&trace, Reference::Constant(1.0), (0.123, 0.4567)).unwrap();
        let b = integrate_abs_dev(&trace, Reference::Constant(1.0), (0.4567, 0.877)).unwrap();
        assert!((whole - (a + b)).abs() < 1e-12);
    }
}

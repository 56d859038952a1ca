//! Parametric synthetic waveform generator with analytically known
//! landmarks, plus an independent fine-grid oracle for the three indices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvsiError};
use crate::trace::{EventTimeline, VoltageTrace};

/// Default fluctuation band used for the analytic settling-time formulas.
const V_WTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Exponential recovery from a fault-on sag, no oscillation.
    Sag,
    /// Instant recovery overlaid with a damped cosine.
    RingDown,
    /// Post-clear voltage stuck at a low plateau (unrecovered).
    Collapse,
    /// Exponential recovery plus damped cosine.
    Composite,
}

/// Parameters of a synthetic post-contingency waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformSpec {
    pub family: Family,
    /// Fault-on voltage, pu.
    pub v_fault: f64,
    /// True post-contingency steady level (plateau level for Collapse), pu.
    pub v_s_true: f64,
    /// Recovery time constant, s (0 = instant recovery).
    pub tau_recovery: f64,
    /// Oscillation amplitude at t_clear, pu.
    pub osc_amp: f64,
    /// Oscillation damping, 1/s.
    pub osc_damping: f64,
    /// Oscillation frequency, Hz.
    pub osc_freq: f64,
    pub timeline: EventTimeline,
    /// Sample step, s.
    pub dt: f64,
    /// Uniform noise half-amplitude, pu.
    pub noise_amp: f64,
    pub seed: u64,
}

impl WaveformSpec {
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(SvsiError::Spec(msg));
        if !(self.dt > 0.0) {
            return err(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.v_fault > 0.0 && self.v_s_true > 0.0) {
            return err(format!(
                "voltage levels must be positive, got v_fault = {}, v_s_true = {}",
                self.v_fault, self.v_s_true
            ));
        }
        if self.tau_recovery < 0.0 || self.osc_amp < 0.0 || self.noise_amp < 0.0 {
            return err("tau_recovery, osc_amp and noise_amp must be non-negative".into());
        }
        if self.osc_amp > 0.0 && !(self.osc_freq > 0.0) {
            return err(format!(
                "osc_freq must be positive when osc_amp > 0, got {}",
                self.osc_freq
            ));
        }
        if self.osc_damping < 0.0 && self.family != Family::Collapse {
            return err("negative osc_damping (growing oscillation) is Collapse-only".into());
        }
        match self.family {
            Family::Sag => {
                if self.v_fault >= self.v_s_true {
                    return err(format!(
                        "Sag requires v_fault < v_s_true, got {} >= {}",
                        self.v_fault, self.v_s_true
                    ));
                }
                if self.osc_amp != 0.0 {
                    return err("Sag carries no oscillation; use Composite".into());
                }
            }
            Family::RingDown => {
                if self.tau_recovery != 0.0 {
                    return err("RingDown recovers instantly; use Composite".into());
                }
            }
            Family::Collapse | Family::Composite => {}
        }
        EventTimeline::new(self.timeline.t_flt, self.timeline.t_clear, self.timeline.t_end)?;
        if self.timeline.t_flt < 0.0 {
            return err(format!(
                "t_flt must be non-negative (traces start at 0), got {}",
                self.timeline.t_flt
            ));
        }
        Ok(())
    }

    /// Noise-free waveform value at time t.
    fn value_at(&self, t: f64) -> f64 {
        let tl = self.timeline;
        // The sample at t_flt itself is still at the pre-fault level: it is
        // the v_o(0) normalization reference.
        if t <= tl.t_flt {
            return 1.0;
        }
        if t < tl.t_clear {
            return self.v_fault;
        }
        let d = t - tl.t_clear;
        let base = match self.family {
            Family::Collapse => self.v_s_true,
            _ if self.tau_recovery == 0.0 => self.v_s_true,
            _ => {
                self.v_s_true
                    - (self.v_s_true - self.v_fault) * (-d / self.tau_recovery).exp()
            }
        };
        base + self.osc_amp
            * (-self.osc_damping * d).exp()
            * (2.0 * std::f64::consts::PI * self.osc_freq * d).cos()
    }
}

/// Analytic landmarks of a generated waveform, where the family admits
/// closed forms (None otherwise). Settling times use V_wTh = 0.01 pu.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub v_s_true: f64,
    /// Time the noise-free waveform first reaches v_s_true ramping upward.
    pub t_cross: Option<f64>,
    /// Envelope-formula settling time.
    pub t_stable: Option<f64>,
    /// Closed-form (svsi_r, svsi_o, svsi_s) where available.
    pub components: Option<[f64; 3]>,
}

fn ground_truth(spec: &WaveformSpec) -> GroundTruth {
    let tl = spec.timeline;
    let instant = spec.tau_recovery == 0.0 && spec.family != Family::Collapse;
    let t_cross = if instant { Some(tl.t_clear) } else { None };

    let t_stable = if spec.family == Family::Collapse {
        Some(tl.t_end)
    } else if instant && spec.osc_amp > 0.0 && spec.osc_damping > 0.0 {
        // |v - v_s| envelope = A e^{-sigma d} crosses V_wTh.
        Some(if spec.osc_amp <= V_WTH {
            tl.t_clear
        } else {
            tl.t_clear + (spec.osc_amp / V_WTH).ln() / spec.osc_damping
        })
    } else if spec.osc_amp == 0.0 && spec.tau_recovery > 0.0 {
        let gap = spec.v_s_true - spec.v_fault;
        Some(if gap.abs() <= V_WTH {
            tl.t_clear
        } else {
            tl.t_clear + spec.tau_recovery * (gap.abs() / V_WTH).ln()
        })
    } else {
        None
    };

    let components = if instant && spec.osc_amp == 0.0 {
        // Step recovery: fault rectangle only, no oscillation, immediate
        // settling at the steady level.
        Some([
            (spec.v_s_true - spec.v_fault).abs() * (tl.t_clear - tl.t_flt),
            0.0,
            0.0,
        ])
    } else {
        None
    };

    GroundTruth {
        v_s_true: spec.v_s_true,
        t_cross,
        t_stable,
        components,
    }
}

/// Generate the deterministic trace for a spec along with its ground truth.
pub fn generate(spec: &WaveformSpec) -> Result<(VoltageTrace, GroundTruth)> {
    spec.validate()?;
    let tl = spec.timeline;
    let n = (tl.t_end / spec.dt).round() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * spec.dt;
        let mut v = spec.value_at(t);
        if spec.noise_amp > 0.0 {
            v += (rng.gen::<f64>() * 2.0 - 1.0) * spec.noise_amp;
        }
        times.push(t);
        values.push(v);
    }
    let trace = VoltageTrace::new(times, values, tl)?;
    Ok((trace, ground_truth(spec)))
}

/// Reference (svsi_r, svsi_o, svsi_s) computed by brute force on a 10x finer
/// grid, using the true steady-state level and the landmark definitions
/// directly — bypassing all estimation logic in the pipeline.
pub fn oracle_indices(spec: &WaveformSpec) -> Result<(f64, f64, f64)> {
    spec.validate()?;
    if spec.noise_amp != 0.0 {
        return Err(SvsiError::UnsupportedSpec(
            "noisy specs have no analytic landmarks".into(),
        ));
    }
    let tl = spec.timeline;
    if tl.t_end < tl.t_clear + 10.0 {
        return Err(SvsiError::UnsupportedSpec(format!(
            "oracle needs the full classification horizon, t_end = {}",
            tl.t_end
        )));
    }
    let fdt = spec.dt / 10.0;
    let n = (tl.t_end / fdt).round() as usize + 1;
    let t: Vec<f64> = (0..n).map(|i| i as f64 * fdt).collect();
    let v: Vec<f64> = t.iter().map(|&ti| spec.value_at(ti)).collect();
    Ok(oracle::evaluate(&t, &v, fdt, tl, spec.v_s_true))
}

/// Self-contained fine-grid evaluation; deliberately independent of the
/// pipeline's kernels.
mod oracle {
    use super::{EventTimeline, V_WTH};

    const THRESHOLD: f64 = 0.8;
    const CUTOFF: f64 = 0.1;

    fn first_at_or_after(t: &[f64], x: f64) -> usize {
        t.partition_point(|&ti| ti < x)
    }

    fn trapz(y: &[f64], dx: f64) -> f64 {
        if y.len() < 2 {
            return 0.0;
        }
        let interior: f64 = y[1..y.len() - 1].iter().sum();
        (interior + 0.5 * (y[0] + y[y.len() - 1])) * dx
    }

    fn reflect_ma(x: &[f64], h: usize) -> Vec<f64> {
        let n = x.len();
        if h == 0 || n < 2 {
            return x.to_vec();
        }
        let h = h.min(n - 1);
        let mut pad = Vec::with_capacity(n + 2 * h);
        pad.extend(x[1..=h].iter().rev());
        pad.extend_from_slice(x);
        pad.extend(x[n - 1 - h..n - 1].iter().rev());
        let mut prefix = vec![0.0];
        let mut acc = 0.0;
        for &p in &pad {
            acc += p;
            prefix.push(acc);
        }
        let w = (2 * h + 1) as f64;
        (0..n).map(|i| (prefix[i + 2 * h + 1] - prefix[i]) / w).collect()
    }

    pub(super) fn evaluate(
        t: &[f64],
        v: &[f64],
        fdt: f64,
        tl: EventTimeline,
        v_s_true: f64,
    ) -> (f64, f64, f64) {
        let fi = first_at_or_after(t, tl.t_flt);
        let ci = first_at_or_after(t, tl.t_clear);

        // Classification by windowed mean.
        let wi = first_at_or_after(t, tl.t_clear + 9.0);
        let wj = first_at_or_after(t, tl.t_clear + 10.0).min(t.len() - 1);
        let mean = trapz(&v[wi..=wj], fdt) / (t[wj] - t[wi]);
        let recovered = mean > THRESHOLD;

        // Midline on [t_clear, t_end].
        let span = tl.t_end - tl.t_clear;
        let len = (1.0 / CUTOFF).min(span / 2.0);
        let h = (len / fdt / 2.0).round() as usize;
        let ml = reflect_ma(&reflect_ma(&v[ci..], h), h);

        let o = {
            let dev: Vec<f64> = ml.iter().zip(&v[ci..]).map(|(m, x)| (m - x).abs()).collect();
            trapz(&dev, fdt)
        };

        if !recovered {
            let v_s = *ml.last().unwrap();
            let dev: Vec<f64> = v[fi..].iter().map(|x| (x - 1.0).abs()).collect();
            let r = trapz(&dev, fdt);
            let s = (1.0 - v_s).max(0.0) * (tl.t_end - tl.t_clear);
            return (r, o, s);
        }

        let v_s = v_s_true;

        // T_SVSIr: first upward crossing of v_s after t_clear.
        let post_start = first_at_or_after(t, tl.t_clear + fdt / 2.0).max(ci);
        let t_r = if v[post_start..].iter().all(|&x| x > v_s) {
            tl.t_clear
        } else {
            let mut found = None;
            for i in (post_start + 1)..t.len() {
                if v[i - 1] < v_s && v_s <= v[i] {
                    let frac = (v_s - v[i - 1]) / (v[i] - v[i - 1]);
                    found = Some(t[i - 1] + frac * fdt);
                    break;
                }
            }
            found.unwrap_or_else(|| {
                let mut best = post_start;
                for i in post_start..t.len() {
                    if v[i] > v[best] {
                        best = i;
                    }
                }
                t[best]
            })
        };
        let ri = first_at_or_after(t, t_r);
        let dev: Vec<f64> = v[fi..=ri].iter().map(|x| (x - v_s).abs()).collect();
        let r = trapz(&dev, fdt);

        // T_Stable: last exceedance of the band, same discrete rule.
        let last_bad = (ci..t.len()).rev().find(|&i| (v[i] - v_s).abs() >= V_WTH);
        let t_s = match last_bad {
            None => tl.t_clear,
            Some(i) if i == t.len() - 1 => tl.t_end,
            Some(i) => t[i + 1],
        };
        let s = ((1.0 - v_s) * (t_s - tl.t_clear)).max(0.0);
        (r, o, s)
    }
}

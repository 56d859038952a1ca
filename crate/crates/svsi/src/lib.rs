//! Short-term voltage stability indices (SVSI) from post-contingency
//! bus-voltage time series.
//!
//! The library normalizes a recorded voltage trace to its pre-fault level,
//! classifies the scenario as recovered or unrecovered from the 9-10 s
//! post-clear window mean, estimates the post-contingency steady-state
//! voltage and settling time, and computes three integral components:
//!
//! - `svsi_r` — restoration deficit up to the first return to the steady
//!   level,
//! - `svsi_o` — oscillation content around a low-pass midline,
//! - `svsi_s` — settling deficit, steady-state gap times settling duration,
//!
//! plus their weighted composite. A synthetic waveform generator with an
//! independent fine-grid oracle supports testing, and a placement module
//! ranks candidate dynamic-var locations across a contingency study.

pub mod classify;
pub mod config;
pub mod error;
pub mod indices;
pub mod placement;
pub mod steady;
pub mod synth;
pub mod trace;

pub use classify::{classify_scenario, ScenarioClass, Verdict};
pub use config::AnalysisConfig;
pub use error::{Result, SvsiError};
pub use indices::{analyze, extract_midline, SvsiResult};
pub use placement::{evaluate_study, PlacementRanking, PlacementStudy};
pub use steady::{SteadyStateEstimate, StableKind, VsMethod};
pub use synth::{generate, oracle_indices, Family, GroundTruth, WaveformSpec};
pub use trace::{ingest_csv, write_csv, EventTimeline, VoltageTrace};

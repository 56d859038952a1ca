//! Var-placement ranking: evaluate composite SVSI across a
//! (contingency x location x bus) trace matrix and rank locations.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::AnalysisConfig;
use crate::error::{Result, SvsiError};
use crate::indices::{analyze, SvsiResult};
use crate::trace::{ingest_csv, EventTimeline};

/// One cell of the study matrix: a trace file with its timeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub contingency: String,
    pub location: String,
    pub bus: String,
    pub file: PathBuf,
    pub t_flt: f64,
    pub t_clear: f64,
    pub t_end: f64,
}

/// Bus-level reduction used for the per-location aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BusAggregate {
    /// Worst (maximum) composite across monitored buses.
    #[default]
    Max,
    Mean,
    Sum,
}

/// A complete contingency x var-location x monitored-bus study manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementStudy {
    pub contingencies: Vec<String>,
    pub locations: Vec<String>,
    pub buses: Vec<String>,
    pub traces: Vec<TraceEntry>,
    /// Overrides the config weights when present.
    #[serde(default)]
    pub weights: Option<[f64; 3]>,
    #[serde(default)]
    pub aggregate: BusAggregate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    /// Lower composite at every monitored bus.
    Dominates,
    /// Lower at some buses only.
    Partial,
    /// Lower at no bus.
    Dominated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub contingency: String,
    pub location: String,
    pub bus: String,
    pub result: SvsiResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceEntry {
    pub location_a: String,
    pub location_b: String,
    pub contingency: String,
    pub relation: Dominance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRanking {
    /// Per-cell analyses, in manifest order.
    pub per_cell: Vec<CellResult>,
    /// Per-location aggregate: bus reduction per contingency, summed over
    /// contingencies. Lower is better.
    pub per_location_score: BTreeMap<String, f64>,
    /// Pairwise dominance per contingency, ordered pairs a != b.
    pub dominance: Vec<DominanceEntry>,
    /// Locations ordered best (lowest aggregate) first.
    pub ranked: Vec<String>,
}

fn study_err(c: &str, l: &str, b: &str, reason: String) -> SvsiError {
    SvsiError::Study {
        contingency: c.to_string(),
        location: l.to_string(),
        bus: b.to_string(),
        reason,
    }
}

fn validate_study(study: &PlacementStudy) -> Result<()> {
    for (name, labels) in [
        ("contingencies", &study.contingencies),
        ("locations", &study.locations),
        ("buses", &study.buses),
    ] {
        if labels.is_empty() {
            return Err(SvsiError::Config(format!("study has no {name}")));
        }
        let mut seen = HashSet::new();
        for l in labels {
            if !seen.insert(l) {
                return Err(SvsiError::Config(format!("duplicate {name} label {l:?}")));
            }
        }
    }
    let mut cells = HashSet::new();
    for e in &study.traces {
        if !cells.insert((&e.contingency, &e.location, &e.bus)) {
            return Err(study_err(
                &e.contingency,
                &e.location,
                &e.bus,
                "duplicate trace entry".into(),
            ));
        }
    }
    for c in &study.contingencies {
        for l in &study.locations {
            for b in &study.buses {
                if !cells.contains(&(c, l, b)) {
                    return Err(study_err(c, l, b, "missing trace entry".into()));
                }
            }
        }
    }
    Ok(())
}

/// Analyze every cell of the study and rank locations by aggregate composite
/// SVSI (ascending). Ties break by pairwise dominance count, then label.
pub fn evaluate_study(study: &PlacementStudy, config: &AnalysisConfig) -> Result<PlacementRanking> {
    validate_study(study)?;
    let mut cfg = config.clone();
    if let Some(w) = study.weights {
        cfg.weights = w;
    }
    cfg.validate()?;

    let per_cell: Vec<CellResult> = study
        .traces
        .par_iter()
        .map(|e| {
            let cell = |reason: String| study_err(&e.contingency, &e.location, &e.bus, reason);
            let timeline = EventTimeline::new(e.t_flt, e.t_clear, e.t_end)
                .map_err(|err| cell(err.to_string()))?;
            let file = File::open(&e.file)
                .map_err(|err| cell(format!("cannot open {}: {err}", e.file.display())))?;
            let trace = ingest_csv(file, timeline).map_err(|err| cell(err.to_string()))?;
            let result = analyze(&trace, &cfg).map_err(|err| cell(err.to_string()))?;
            Ok(CellResult {
                contingency: e.contingency.clone(),
                location: e.location.clone(),
                bus: e.bus.clone(),
                result,
            })
        })
        .collect::<Result<_>>()?;

    let composite = |c: &str, l: &str, b: &str| -> f64 {
        per_cell
            .iter()
            .find(|x| x.contingency == c && x.location == l && x.bus == b)
            .map(|x| x.result.composite)
            .expect("validated complete matrix")
    };

    let mut per_location_score = BTreeMap::new();
    for l in &study.locations {
        let mut score = 0.0;
        for c in &study.contingencies {
            let composites: Vec<f64> = study.buses.iter().map(|b| composite(c, l, b)).collect();
            score += match study.aggregate {
                BusAggregate::Max => composites.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                BusAggregate::Mean => {
                    composites.iter().sum::<f64>() / composites.len() as f64
                }
                BusAggregate::Sum => composites.iter().sum(),
            };
        }
        per_location_score.insert(l.clone(), score);
    }

    let mut dominance = Vec::new();
    for a in &study.locations {
        for b in &study.locations {
            if a == b {
                continue;
            }
            for c in &study.contingencies {
                let lower = study
                    .buses
                    .iter()
                    .filter(|bus| composite(c, a, bus) < composite(c, b, bus))
                    .count();
                let relation = if lower == study.buses.len() {
                    Dominance::Dominates
                } else if lower > 0 {
                    Dominance::Partial
                } else {
                    Dominance::Dominated
                };
                dominance.push(DominanceEntry {
                    location_a: a.clone(),
                    location_b: b.clone(),
                    contingency: c.clone(),
                    relation,
                });
            }
        }
    }

    // Number of contingencies under which `a` fully dominates `b`.
    let dominates_count = |a: &str, b: &str| -> usize {
        dominance
            .iter()
            .filter(|d| d.location_a == a && d.location_b == b && d.relation == Dominance::Dominates)
            .count()
    };

    let mut ranked = study.locations.clone();
    ranked.sort_by(|a, b| {
        per_location_score[a]
            .partial_cmp(&per_location_score[b])
            .unwrap()
            .then_with(|| dominates_count(b, a).cmp(&dominates_count(a, b)))
            .then_with(|| a.cmp(b))
    });

    Ok(PlacementRanking {
        per_cell,
        per_location_score,
        dominance,
        ranked,
    })
}

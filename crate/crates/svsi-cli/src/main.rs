//! `svsi` — command-line surface for the SVSI analysis library.
//!
//! Subcommands: `analyze` (single trace → JSON/CSV report), `batch`
//! (manifest → CSV table), `rank-var` (placement study → ranking), `synth`
//! (waveform spec → trace CSV + ground-truth sidecar). All outputs are
//! deterministic: stable field order and floats printed at 9 significant
//! digits.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use svsi::classify::Verdict;
use svsi::placement::PlacementStudy;
use svsi::steady::{StableKind, VsMethod};
use svsi::{
    analyze, evaluate_study, generate, ingest_csv, oracle_indices, write_csv, AnalysisConfig,
    EventTimeline, SvsiError, SvsiResult, WaveformSpec,
};

#[derive(Parser)]
#[command(name = "svsi", version, about = "Short-term voltage stability index analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a single two-column trace CSV.
    Analyze {
        /// Trace CSV file (header row, then time,voltage).
        file: PathBuf,
        #[arg(long)]
        t_flt: f64,
        #[arg(long)]
        t_clear: f64,
        #[arg(long)]
        t_end: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Analyze every trace in a JSON manifest; emits one CSV row per trace.
    Batch {
        /// Manifest JSON: {"traces": [{id, file, t_flt, t_clear, t_end}]}.
        manifest: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate a var-placement study and rank candidate locations.
    RankVar {
        /// Study manifest JSON (contingencies, locations, buses, traces).
        manifest: PathBuf,
        /// json = ranking report, csv = per-cell component table.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic trace from a waveform spec JSON.
    Synth {
        /// Waveform spec JSON file.
        spec: PathBuf,
        /// Output CSV path; the ground-truth sidecar lands next to it with
        /// a .json extension.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Recovered/unrecovered threshold, pu.
    #[arg(long)]
    threshold: Option<f64>,
    /// Steady-state fluctuation band, pu.
    #[arg(long)]
    v_wth: Option<f64>,
    /// Midline low-pass cutoff, Hz.
    #[arg(long)]
    cutoff: Option<f64>,
    /// Extrema prominence, pu.
    #[arg(long)]
    prominence: Option<f64>,
    /// Gentle-slope bound, pu/s.
    #[arg(long)]
    gentle_slope: Option<f64>,
    /// Composite weights as w_r,w_o,w_s.
    #[arg(long, value_parser = parse_weights)]
    weights: Option<Weights>,
}

#[derive(Clone, Copy)]
struct Weights([f64; 3]);

fn parse_weights(s: &str) -> Result<Weights, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected w_r,w_o,w_s, got {s:?}"));
    }
    let mut w = [0.0; 3];
    for (slot, p) in w.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|_| format!("invalid weight {p:?}"))?;
    }
    Ok(Weights(w))
}

/// Defaults <- SVSI_CONFIG file <- command-line flags.
fn resolve_config(args: &ConfigArgs) -> Result<AnalysisConfig, SvsiError> {
    let mut cfg = AnalysisConfig::default();
    if let Ok(path) = std::env::var("SVSI_CONFIG") {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| SvsiError::Config(format!("cannot read SVSI_CONFIG {path}: {e}")))?;
        cfg = serde_json::from_str(&text)
            .map_err(|e| SvsiError::Config(format!("invalid SVSI_CONFIG {path}: {e}")))?;
    }
    if let Some(v) = args.threshold {
        cfg.threshold = v;
    }
    if let Some(v) = args.v_wth {
        cfg.v_wth = v;
    }
    if let Some(v) = args.cutoff {
        cfg.cutoff = v;
    }
    if let Some(v) = args.prominence {
        cfg.prominence = v;
    }
    if let Some(v) = args.gentle_slope {
        cfg.gentle_slope = v;
    }
    if let Some(Weights(w)) = args.weights {
        cfg.weights = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Round to 9 significant digits for output; internal math stays f64.
fn sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().unwrap()
}

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Recovered => "recovered",
        Verdict::Unrecovered => "unrecovered",
    }
}

#[derive(Serialize)]
struct AnalyzeReport {
    file: String,
    scenario: &'static str,
    window_mean: f64,
    svsi_r: f64,
    svsi_o: f64,
    svsi_s: f64,
    composite: f64,
    v_s: f64,
    v_s_method: VsMethod,
    t_svsir: f64,
    t_stable: f64,
    t_stable_kind: StableKind,
    weights: [f64; 3],
    config: AnalysisConfig,
}

impl AnalyzeReport {
    fn new(file: String, r: &SvsiResult, cfg: &AnalysisConfig) -> Self {
        AnalyzeReport {
            file,
            scenario: verdict_str(r.scenario.verdict),
            window_mean: sig9(r.scenario.window_mean),
            svsi_r: sig9(r.svsi_r),
            svsi_o: sig9(r.svsi_o),
            svsi_s: sig9(r.svsi_s),
            composite: sig9(r.composite),
            v_s: sig9(r.estimate.v_s),
            v_s_method: r.estimate.method,
            t_svsir: sig9(r.t_svsir),
            t_stable: sig9(r.estimate.t_stable),
            t_stable_kind: r.estimate.t_stable_kind,
            weights: r.weights,
            config: cfg.clone(),
        }
    }
}

const ROW_HEADER: &str = "id,scenario,svsi_r,svsi_o,svsi_s,composite,v_s,t_svsir,t_stable,error";

fn result_row(id: &str, r: &SvsiResult) -> String {
    format!(
        "{id},{},{},{},{},{},{},{},{},",
        verdict_str(r.scenario.verdict),
        sig9(r.svsi_r),
        sig9(r.svsi_o),
        sig9(r.svsi_s),
        sig9(r.composite),
        sig9(r.estimate.v_s),
        sig9(r.t_svsir),
        sig9(r.estimate.t_stable),
    )
}

fn error_row(id: &str, err: &SvsiError) -> String {
    // Keep the table parseable: the error message must not add columns.
    let msg = err.to_string().replace([',', '\n'], ";");
    format!("{id},error,,,,,,,,{msg}")
}

fn cmd_analyze(
    file: &Path,
    t_flt: f64,
    t_clear: f64,
    t_end: f64,
    format: Format,
    cfg: &AnalysisConfig,
) -> Result<(), SvsiError> {
    let timeline = EventTimeline::new(t_flt, t_clear, t_end)?;
    let trace = ingest_csv(File::open(file)?, timeline)?;
    let result = analyze(&trace, cfg)?;
    match format {
        Format::Json => {
            let report = AnalyzeReport::new(file.display().to_string(), &result, cfg);
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Format::Csv => {
            println!("{ROW_HEADER}");
            println!("{}", result_row(&file.display().to_string(), &result));
        }
    }
    Ok(())
}

#[derive(Deserialize)]
struct BatchManifest {
    traces: Vec<BatchEntry>,
}

#[derive(Deserialize)]
struct BatchEntry {
    id: String,
    file: PathBuf,
    t_flt: f64,
    t_clear: f64,
    t_end: f64,
}

/// Paths in manifests resolve relative to the manifest's own directory.
fn resolve_path(manifest: &Path, file: &Path) -> PathBuf {
    if file.is_absolute() {
        file.to_path_buf()
    } else {
        manifest.parent().unwrap_or(Path::new(".")).join(file)
    }
}

fn read_manifest<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SvsiError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| SvsiError::Parse {
        line: e.line(),
        reason: format!("manifest {}: {e}", path.display()),
    })
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
    }
}

fn cmd_batch(
    manifest_path: &Path,
    jobs: Option<usize>,
    cfg: &AnalysisConfig,
) -> Result<(), SvsiError> {
    use rayon::prelude::*;
    let manifest: BatchManifest = read_manifest(manifest_path)?;
    let rows: Vec<(String, bool)> = with_pool(jobs, || {
        manifest
            .traces
            .par_iter()
            .map(|e| {
                let run = || -> Result<SvsiResult, SvsiError> {
                    let timeline = EventTimeline::new(e.t_flt, e.t_clear, e.t_end)?;
                    let path = resolve_path(manifest_path, &e.file);
                    let trace = ingest_csv(File::open(path)?, timeline)?;
                    analyze(&trace, cfg)
                };
                match run() {
                    Ok(r) => (result_row(&e.id, &r), false),
                    Err(err) => (error_row(&e.id, &err), true),
                }
            })
            .collect()
    });
    let mut out = String::with_capacity(rows.len() * 96 + ROW_HEADER.len() + 1);
    out.push_str(ROW_HEADER);
    out.push('\n');
    let mut failures = 0usize;
    for (row, failed) in &rows {
        out.push_str(row);
        out.push('\n');
        failures += usize::from(*failed);
    }
    print!("{out}");
    if failures > 0 {
        eprintln!("warning: {failures} of {} traces failed", rows.len());
    }
    Ok(())
}

#[derive(Serialize)]
struct CellRow {
    contingency: String,
    location: String,
    bus: String,
    scenario: &'static str,
    svsi_r: f64,
    svsi_o: f64,
    svsi_s: f64,
    composite: f64,
    v_s: f64,
    t_svsir: f64,
    t_stable: f64,
}

#[derive(Serialize)]
struct RankReport {
    ranked: Vec<String>,
    per_location_score: BTreeMap<String, f64>,
    dominance: Vec<svsi::placement::DominanceEntry>,
    per_cell: Vec<CellRow>,
}

fn cmd_rank_var(
    manifest_path: &Path,
    format: Format,
    jobs: Option<usize>,
    cfg: &AnalysisConfig,
) -> Result<(), SvsiError> {
    let mut study: PlacementStudy = read_manifest(manifest_path)?;
    for e in &mut study.traces {
        e.file = resolve_path(manifest_path, &e.file);
    }
    let ranking = with_pool(jobs, || evaluate_study(&study, cfg))?;
    let cells: Vec<CellRow> = ranking
        .per_cell
        .iter()
        .map(|c| CellRow {
            contingency: c.contingency.clone(),
            location: c.location.clone(),
            bus: c.bus.clone(),
            scenario: verdict_str(c.result.scenario.verdict),
            svsi_r: sig9(c.result.svsi_r),
            svsi_o: sig9(c.result.svsi_o),
            svsi_s: sig9(c.result.svsi_s),
            composite: sig9(c.result.composite),
            v_s: sig9(c.result.estimate.v_s),
            t_svsir: sig9(c.result.t_svsir),
            t_stable: sig9(c.result.estimate.t_stable),
        })
        .collect();
    match format {
        Format::Json => {
            let report = RankReport {
                ranked: ranking.ranked.clone(),
                per_location_score: ranking
                    .per_location_score
                    .iter()
                    .map(|(k, v)| (k.clone(), sig9(*v)))
                    .collect(),
                dominance: ranking.dominance.clone(),
                per_cell: cells,
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
        }
        Format::Csv => {
            println!(
                "contingency,location,bus,scenario,svsi_r,svsi_o,svsi_s,composite,v_s,t_svsir,t_stable"
            );
            for c in cells {
                println!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    c.contingency,
                    c.location,
                    c.bus,
                    c.scenario,
                    c.svsi_r,
                    c.svsi_o,
                    c.svsi_s,
                    c.composite,
                    c.v_s,
                    c.t_svsir,
                    c.t_stable
                );
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SynthSidecar {
    spec: WaveformSpec,
    ground_truth: svsi::GroundTruth,
    /// Fine-grid oracle components, absent for specs without analytic
    /// landmarks (e.g. noisy ones).
    oracle: Option<OracleTriple>,
}

#[derive(Serialize)]
struct OracleTriple {
    svsi_r: f64,
    svsi_o: f64,
    svsi_s: f64,
}

fn cmd_synth(spec_path: &Path, out: &Path) -> Result<(), SvsiError> {
    let spec: WaveformSpec = read_manifest(spec_path)?;
    let (trace, ground_truth) = generate(&spec)?;
    let mut csv = File::create(out)?;
    write_csv(&trace, &mut csv)?;
    let oracle = match oracle_indices(&spec) {
        Ok((r, o, s)) => Some(OracleTriple {
            svsi_r: sig9(r),
            svsi_o: sig9(o),
            svsi_s: sig9(s),
        }),
        Err(SvsiError::UnsupportedSpec(_)) => None,
        Err(e) => return Err(e),
    };
    let sidecar = SynthSidecar {
        spec,
        ground_truth,
        oracle,
    };
    let sidecar_path = out.with_extension("json");
    std::fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&sidecar).unwrap() + "\n",
    )?;
    eprintln!(
        "wrote {} and {}",
        out.display(),
        sidecar_path.display()
    );
    Ok(())
}

fn exit_code(err: &SvsiError) -> u8 {
    match err {
        SvsiError::Parse { .. }
        | SvsiError::Grid(_)
        | SvsiError::Samples(_)
        | SvsiError::Config(_)
        | SvsiError::Io(_) => 2,
        SvsiError::Timeline(_) | SvsiError::InsufficientHorizon { .. } => 3,
        _ => 4,
    }
}

fn run(cli: Cli) -> Result<(), SvsiError> {
    match cli.command {
        Command::Analyze {
            file,
            t_flt,
            t_clear,
            t_end,
            format,
            config,
        } => {
            let cfg = resolve_config(&config)?;
            cmd_analyze(&file, t_flt, t_clear, t_end, format, &cfg)
        }
        Command::Batch {
            manifest,
            jobs,
            config,
        } => {
            let cfg = resolve_config(&config)?;
            cmd_batch(&manifest, jobs, &cfg)
        }
        Command::RankVar {
            manifest,
            format,
            jobs,
            config,
        } => {
            let cfg = resolve_config(&config)?;
            cmd_rank_var(&manifest, format, jobs, &cfg)
        }
        Command::Synth { spec, out } => cmd_synth(&spec, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

//! End-to-end acceptance checks for the `svsi` binary: batch throughput and
//! output determinism. Each check prints a single `PASS`/`SKIP` line.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Mutex;
use std::time::Instant;

use svsi::{generate, write_csv, EventTimeline, Family, WaveformSpec};

/// Serializes the two checks so the throughput timing is not skewed by a
/// concurrently running test thread.
static SERIAL: Mutex<()> = Mutex::new(());

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_svsi")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env_remove("SVSI_CONFIG")
        .output()
        .expect("binary runs")
}

fn composite_spec(i: u64) -> WaveformSpec {
    WaveformSpec {
        family: Family::Composite,
        v_fault: 0.2 + 0.1 * ((i % 3) as f64),
        v_s_true: 0.9 + 0.02 * ((i % 6) as f64),
        tau_recovery: 0.2 + 0.05 * ((i % 10) as f64),
        osc_amp: 0.01 + 0.002 * ((i % 5) as f64),
        osc_damping: 0.3 + 0.1 * ((i % 4) as f64),
        osc_freq: 1.0 + 0.25 * ((i % 4) as f64),
        timeline: EventTimeline::new(0.1, 0.2, 10.2).unwrap(),
        dt: 1e-3,
        noise_amp: 0.0,
        seed: i,
    }
}

/// Criterion: a 10,000-trace batch (10 s at 1 kHz each) finishes in under
/// 60 s with a single worker, and gains >= 3x at 4 workers when the host
/// has at least 4 CPUs.
#[test]
fn batch_throughput() {
    let _guard = SERIAL.lock().unwrap();
    let dir = tempfile::tempdir().unwrap();
    const N: usize = 10_000;

    let mut entries = String::new();
    for i in 0..N {
        let spec = composite_spec(i as u64);
        let (trace, _) = generate(&spec).unwrap();
        let name = format!("t{i:05}.csv");
        let mut file = fs::File::create(dir.path().join(&name)).unwrap();
        write_csv(&trace, &mut file).unwrap();
        if i > 0 {
            entries.push(',');
        }
        entries.push_str(&format!(
            r#"{{"id":"t{i:05}","file":"{name}","t_flt":0.1,"t_clear":0.2,"t_end":10.2}}"#
        ));
    }
    let manifest = dir.path().join("manifest.json");
    fs::write(&manifest, format!(r#"{{"traces":[{entries}]}}"#)).unwrap();

    let start = Instant::now();
    let out = run_in(dir.path(), &["batch", "manifest.json", "--jobs", "1"]);
    let single = start.elapsed().as_secs_f64();
    assert!(out.status.success(), "batch failed");
    let rows = out.stdout.iter().filter(|&&b| b == b'\n').count() - 1;
    assert_eq!(rows, N, "expected one row per trace");
    assert!(
        !String::from_utf8_lossy(&out.stdout).contains(",error,"),
        "no trace may fail"
    );
    assert!(
        single < 60.0,
        "single-threaded batch of {N} traces took {single:.1} s (limit 60 s)"
    );
    println!(
        "PASS throughput: {N}-trace batch in {single:.1} s single-threaded (< 60 s)"
    );

    let cpus = std::thread::available_parallelism().map_or(1, |n| n.get());
    if cpus < 4 {
        println!(
            "SKIP speedup: host has {cpus} CPU(s); the 4-job >= 3x speedup check needs >= 4"
        );
        return;
    }
    let start = Instant::now();
    let out = run_in(dir.path(), &["batch", "manifest.json", "--jobs", "4"]);
    let quad = start.elapsed().as_secs_f64();
    assert!(out.status.success(), "parallel batch failed");
    let speedup = single / quad;
    assert!(
        speedup >= 3.0,
        "speedup at 4 jobs was {speedup:.2}x (need >= 3x)"
    );
    println!("PASS speedup: {speedup:.2}x at 4 jobs (>= 3x)");
}

/// Criterion: repeated runs of every subcommand on fixed inputs produce
/// byte-identical outputs.
#[test]
fn deterministic_outputs() {
    let _guard = SERIAL.lock().unwrap();
    let dir = tempfile::tempdir().unwrap();

    let spec = composite_spec(7);
    fs::write(
        dir.path().join("spec.json"),
        serde_json::to_string_pretty(&spec).unwrap(),
    )
    .unwrap();

    // `synth`: identical trace and sidecar bytes on repeated runs.
    for name in ["a", "b"] {
        let out = run_in(
            dir.path(),
            &["synth", "spec.json", "--out", &format!("{name}.csv")],
        );
        assert!(out.status.success(), "synth failed");
    }
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap(),
        "synth trace output differs between runs"
    );
    assert_eq!(
        fs::read(dir.path().join("a.json")).unwrap(),
        fs::read(dir.path().join("b.json")).unwrap(),
        "synth sidecar output differs between runs"
    );

    let mut entries = String::new();
    let mut cells = String::new();
    for i in 0..4 {
        let spec = composite_spec(i);
        let (trace, _) = generate(&spec).unwrap();
        let name = format!("d{i}.csv");
        let mut file = fs::File::create(dir.path().join(&name)).unwrap();
        write_csv(&trace, &mut file).unwrap();
        if i > 0 {
            entries.push(',');
            cells.push(',');
        }
        entries.push_str(&format!(
            r#"{{"id":"d{i}","file":"{name}","t_flt":0.1,"t_clear":0.2,"t_end":10.2}}"#
        ));
        let (loc, con) = (["A", "B"][(i % 2) as usize], ["c1", "c2"][(i / 2) as usize]);
        cells.push_str(&format!(
            r#"{{"contingency":"{con}","location":"{loc}","bus":"bus1","file":"{name}","t_flt":0.1,"t_clear":0.2,"t_end":10.2}}"#
        ));
    }
    fs::write(
        dir.path().join("batch.json"),
        format!(r#"{{"traces":[{entries}]}}"#),
    )
    .unwrap();
    fs::write(
        dir.path().join("study.json"),
        format!(
            r#"{{"contingencies":["c1","c2"],"locations":["A","B"],"buses":["bus1"],"traces":[{cells}]}}"#
        ),
    )
    .unwrap();

    let commands: Vec<(&str, Vec<&str>)> = vec![
        (
            "analyze (json)",
            vec![
                "analyze", "d0.csv", "--t-flt", "0.1", "--t-clear", "0.2", "--t-end", "10.2",
            ],
        ),
        (
            "analyze (csv)",
            vec![
                "analyze", "d0.csv", "--t-flt", "0.1", "--t-clear", "0.2", "--t-end", "10.2",
                "--format", "csv",
            ],
        ),
        ("batch", vec!["batch", "batch.json"]),
        ("batch (2 jobs)", vec!["batch", "batch.json", "--jobs", "2"]),
        ("rank-var (json)", vec!["rank-var", "study.json"]),
        (
            "rank-var (csv)",
            vec!["rank-var", "study.json", "--format", "csv"],
        ),
    ];
    for (label, args) in &commands {
        let first = run_in(dir.path(), args);
        let second = run_in(dir.path(), args);
        assert!(first.status.success(), "{label} failed");
        assert_eq!(
            first.stdout, second.stdout,
            "{label} output differs between runs"
        );
        assert!(!first.stdout.is_empty(), "{label} produced no output");
    }
    println!(
        "PASS determinism: repeated runs of synth, analyze, batch, and rank-var are byte-identical"
    );
}

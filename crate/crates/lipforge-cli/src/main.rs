//! Command-line front end: build artifacts from spec files, run the
//! verification suites, and export difference-quotient profiles and
//! witness traces as plot-ready CSV.
//!
//! Exit codes: 0 success, 1 failed checks, 2 spec or artifact parse
//! failure, 3 allocation or construction failure, 4 a point labeled
//! off-target that the scheme says may be a target point.

use clap::{Parser, Subcommand};
use lipforge::analysis::{lip_profile, profiles_csv, traces_csv, witness_radii, QuotientProfile, WitnessTrace};
use lipforge::assembly::{artifact, build_sum, BuildConfig, BuildReport};
use lipforge::rational::Rational;
use lipforge::scheme::SchemeSpec;
use lipforge::verify::{run_suite, Suite};
use lipforge::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "lipforge", version, about = "Exact construction and analysis of monotone functions with prescribed infinite-derivative sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an artifact directory from a scheme spec file.
    Build {
        /// Path to the spec JSON.
        spec: PathBuf,
        /// Truncation depth: number of stages to build.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Ladder resolution; components shorter than 2^(1-resolution)
        /// are merged.
        #[arg(long, default_value_t = 14)]
        resolution: u32,
        /// Determinism seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-run exact verification suites over an artifact directory.
    Verify {
        artifact: PathBuf,
        /// One of: scheme, lemma-h, lemma-g, assembly, analysis, all.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for the randomized corpora.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Export quotient profiles (for in-target points) and witness traces
    /// (for off-target points) from an artifact.
    Profile {
        artifact: PathBuf,
        /// Points file: one `p/q,in_A` or `p/q,off_A` per line.
        #[arg(long)]
        points: PathBuf,
        /// Radius grid, e.g. `2^-1..2^-12`.
        #[arg(long, default_value = "2^-1..2^-12")]
        grid: String,
        /// Output directory; defaults to the artifact directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::AllocationFailure(_) | Error::Construction { .. } => 3,
        Error::SuspectedTargetPoint(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Build { spec, depth, resolution, seed, out } => {
            let spec = SchemeSpec::load(&spec)?;
            let cfg = BuildConfig::new(depth, resolution, seed)?;
            let report = build_sum(&spec, &cfg)?;
            artifact::write(&out, &spec, &report)?;
            let mut built = vec![format!("{} stages", report.stages)];
            if report.ramp.is_some() {
                built.push("ramp part".to_owned());
            }
            println!(
                "built {} -> {} ({}, tail bound {})",
                report.stages,
                out.display(),
                built.join(" + "),
                report.tail_bound
            );
            for c in &report.checks {
                println!("  [{}] {}", if c.pass { "pass" } else { "FAIL" }, c.name);
            }
            if report.checks.iter().all(|c| c.pass) {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Verify { artifact: dir, suite, seed } => {
            let suite: Suite = suite.parse()?;
            let spec = SchemeSpec::load(&dir.join(artifact::SPEC_FILE))?;
            let report = artifact::load(&dir)?;
            let sr = run_suite(&spec, &report, suite, seed);
            for c in &sr.checks {
                let status = if c.pass { "pass" } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("[{}] {}", status, c.name);
                } else {
                    println!("[{}] {} ({})", status, c.name, c.detail);
                }
            }
            println!("{}", sr.summary());
            if sr.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::Profile { artifact: dir, points, grid, out } => {
            let report = artifact::load(&dir)?;
            let grid = parse_grid(&grid)?;
            let labeled = parse_points(&std::fs::read_to_string(points)?)?;
            let out_dir = out.unwrap_or_else(|| dir.clone());
            std::fs::create_dir_all(&out_dir)?;

            let thread_cap = thread_cap();
            let (profiles, traces) = profile_points(&report, &labeled, &grid, thread_cap)?;

            std::fs::write(out_dir.join("profiles.csv"), profiles_csv(&profiles))?;
            std::fs::write(out_dir.join("traces.csv"), traces_csv(&traces))?;
            println!(
                "wrote {} profiles and {} traces to {}",
                profiles.len(),
                traces.len(),
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    InTarget,
    OffTarget,
}

fn parse_points(text: &str) -> Result<Vec<(Rational, Label)>, Error> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (value, label) = line.split_once(',').ok_or_else(|| Error::Parse {
            what: "points file",
            detail: format!("line {} has no label", i + 1),
        })?;
        let x: Rational = value.parse()?;
        let label = match label.trim() {
            "in_A" => Label::InTarget,
            "off_A" => Label::OffTarget,
            other => {
                return Err(Error::Parse {
                    what: "points file",
                    detail: format!("unknown label {other:?} on line {}", i + 1),
                })
            }
        };
        out.push((x, label));
    }
    Ok(out)
}

/// `2^-A..2^-B` with A <= B: the dyadic radii 2^-A, ..., 2^-B.
fn parse_grid(text: &str) -> Result<Vec<Rational>, Error> {
    let bad = || Error::Parse { what: "radius grid", detail: text.to_owned() };
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let exp = |s: &str| -> Result<i64, Error> {
        s.trim()
            .strip_prefix("2^-")
            .and_then(|e| e.parse::<i64>().ok())
            .ok_or_else(bad)
    };
    let a = exp(lo)?;
    let b = exp(hi)?;
    if a > b || a < 1 {
        return Err(bad());
    }
    Ok((a..=b).map(|m| Rational::pow2(-m)).collect())
}

fn thread_cap() -> usize {
    std::env::var("LIPFORGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

type ProfileOutput = (Vec<QuotientProfile>, Vec<WitnessTrace>);

/// Evaluate all points, chunked over a capped number of worker threads;
/// results keep input order.
fn profile_points(
    report: &BuildReport,
    labeled: &[(Rational, Label)],
    grid: &[Rational],
    threads: usize,
) -> Result<ProfileOutput, Error> {
    let n = labeled.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let threads = threads.min(n).max(1);
    let chunk = n.div_ceil(threads);
    let mut slots: Vec<Option<Result<PointResult, Error>>> = Vec::new();
    slots.resize_with(n, || None);
    std::thread::scope(|scope| {
        for (t, slot_chunk) in slots.chunks_mut(chunk).enumerate() {
            let offset = t * chunk;
            scope.spawn(move || {
                for (i, slot) in slot_chunk.iter_mut().enumerate() {
                    let (x, label) = &labeled[offset + i];
                    *slot = Some(evaluate_point(report, x, *label, grid));
                }
            });
        }
    });
    let mut profiles = Vec::new();
    let mut traces = Vec::new();
    for slot in slots {
        match slot.expect("all slots filled") {
            Ok(PointResult::Profile(p)) => profiles.push(p),
            Ok(PointResult::Trace(t)) => traces.push(t),
            Err(e) => return Err(e),
        }
    }
    Ok((profiles, traces))
}

enum PointResult {
    Profile(QuotientProfile),
    Trace(WitnessTrace),
}

fn evaluate_point(
    report: &BuildReport,
    x: &Rational,
    label: Label,
    grid: &[Rational],
) -> Result<PointResult, Error> {
    match label {
        Label::InTarget => Ok(PointResult::Profile(lip_profile(&report.g_sum, x, grid)?)),
        Label::OffTarget => Ok(PointResult::Trace(witness_radii(report, x)?)),
    }
}

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aluthge_lab::diagram::{DiagramJson, WeightDiagram};
use aluthge_lab::experiments::{self, TARGETS};
use aluthge_lab::measures::{
    berger_atomic_verify, gram_diagonal_constant, is_spherically_quasinormal, quasinormal2_measure,
    AtomicMeasure2D, StampfliData,
};
use aluthge_lab::onevar::OneVarWeights;
use aluthge_lab::positivity::{hypo_report, k_hyponormal, min_level, one_var_k_hyponormal};
use aluthge_lab::regions::{self, classify, crossing_q, spherical_threshold, thresholds};
use aluthge_lab::sampling::DEFAULT_SEED;
use aluthge_lab::transforms::{continuity_probe, toral_transform_on, transform, TransformKind};
use aluthge_lab::{Error, ErrorClass};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

const EXIT_IO: u8 = 1;
const EXIT_DOMAIN: u8 = 2;
const EXIT_INTERNAL: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// Aluthge transforms of commuting 2-variable weighted shifts.
///
/// Diagrams are read and written as JSON; region scans are CSV. Randomized
/// experiments use `--seed` (default 6221217) and are byte-reproducible.
/// ALUTHGE_LAB_THREADS caps the worker threads used by scans.
#[derive(Debug, Parser)]
#[command(name = "aluthge-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Toral or spherical transform of a diagram.
    Transform {
        #[arg(long, default_value = "spherical")]
        kind: TransformKind,
        #[command(flatten)]
        io: Io,
        #[arg(short, long, default_value_t = 12, value_parser = clap::value_parser!(u16).range(1..))]
        window: u16,
    },
    /// Six-point joint hyponormality, optionally with k-hyponormality up to `--k`.
    Hypo {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        level: Level,
        /// Alias of `--out`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// k-hyponormality of a diagram, or of a one-variable shift via `--omega`.
    Khypo {
        #[arg(short, long, conflicts_with = "omega")]
        input: Option<PathBuf>,
        /// One-variable weights such as `stampfli:1,2,3` or `table:0.5,0.9,1`.
        #[arg(long)]
        omega: Option<OneVarWeights>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Spherical quasinormality: completions and checks.
    #[command(subcommand)]
    Quasinormal(Quasinormal),
    /// Two-atomic subnormal shift with weights √a, √b, √c.
    Stampfli {
        a: f64,
        b: f64,
        c: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Atomic Berger measures.
    #[command(subcommand)]
    Berger(Berger),
    /// Threshold curves and region classification for the two-parameter family.
    #[command(subcommand)]
    Regions(Regions),
    /// Regularization bounds for A_n = f_n(P) on a truncation.
    ProbeContinuity {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        level: Level,
        /// Regularization index; repeat for several.
        #[arg(short, long = "n", default_values_t = [1u32, 10, 100, 10_000])]
        n: Vec<u32>,
        /// Allowed negative slack.
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
    },
    /// Re-run an acceptance experiment and print its pass/fail table.
    Reproduce {
        /// One of the listed targets, or `all`.
        #[arg(value_parser = target_names())]
        target: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Exit with status 2 when any check fails.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Debug, Subcommand)]
enum Quasinormal {
    /// Completes a row so that α² + β² ≡ C.
    Complete {
        /// Zero-th row, e.g. `stampfli:1,2,3`.
        #[arg(long)]
        row: OneVarWeights,
        #[arg(long)]
        constant: f64,
        /// Feasibility window; also the size of a `--tabulate` rectangle.
        #[arg(short, long, default_value_t = 12, value_parser = clap::value_parser!(u16).range(1..))]
        window: u16,
        /// Write the `[0, window]²` weights instead of the generating
        /// parameters. A flat tail past the window does not commute, so the
        /// result is for inspection only.
        #[arg(long)]
        tabulate: bool,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Constant-sum, fixed-point and Gram-diagonal verdicts.
    Check {
        #[command(flatten)]
        io: Io,
        #[arg(short, long, default_value_t = 12, value_parser = clap::value_parser!(u16).range(1..))]
        window: u16,
    },
}

#[derive(Debug, Subcommand)]
enum Berger {
    /// Relative moment error between a diagram and an atomic measure.
    Verify {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value_t = 10)]
        maxdeg: usize,
        #[arg(long, default_value_t = 1e-10, value_parser = positive)]
        tol: f64,
    },
    /// Two-atomic measure of the completion of stampfli(a, b, c) at C = φ₁.
    Measure {
        a: f64,
        b: f64,
        c: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum Regions {
    /// CSV scan over y ∈ {1/(g+1), …, g/(g+1)} with a probe ladder in x.
    Scan {
        #[arg(long, default_value_t = 9)]
        grid: usize,
        #[command(flatten)]
        level: Level,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Closed-form and numerical verdicts at one point.
    Classify {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
        #[command(flatten)]
        level: Level,
    },
    /// All threshold curves at y.
    Thresholds {
        #[arg(long)]
        y: f64,
    },
    /// Crossing point of the subnormal and toral curves.
    Crossing,
}

#[derive(Debug, Args)]
struct Io {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Level {
    /// Truncation level N.
    #[arg(short = 'N', long, default_value_t = 12, value_parser = clap::value_parser!(u16).range(1..))]
    level: u16,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn target_names() -> clap::builder::PossibleValuesParser {
    let mut names: Vec<&str> = TARGETS.iter().map(|(n, _)| *n).collect();
    names.push("all");
    clap::builder::PossibleValuesParser::new(names)
}

fn read_diagram(path: &Path) -> Result<WeightDiagram, Error> {
    let doc: DiagramJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    WeightDiagram::from_json(&doc)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct BergerVerdict {
    max_relative_error: f64,
    maxdeg: usize,
    tol: f64,
    verified: bool,
}

#[derive(Serialize)]
struct QuasinormalCheck {
    #[serde(flatten)]
    verdict: aluthge_lab::measures::QuasinormalVerdict,
    gram_diagonal_constant: bool,
    gram_diagonal_spread: f64,
}

#[derive(Serialize)]
struct KhypoOutput {
    k: usize,
    level: usize,
    is_psd: bool,
    min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    hankel: Option<aluthge_lab::positivity::HankelVerdict>,
}

#[derive(Serialize)]
struct ThresholdOutput {
    #[serde(flatten)]
    curves: regions::ThresholdCurves,
    spherical_numeric: f64,
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Transform { kind, io, window } => {
            let w = read_diagram(&io.input)?;
            let window = window as usize;
            if kind == TransformKind::Toral {
                let t = toral_transform_on(&w, window)?;
                if !t.commuting {
                    eprintln!(
                        "warning: toral transform does not commute (residual {:e} at {})",
                        t.test.candidate_residual, t.test.worst
                    );
                }
            }
            emit(&transform(&w, kind, window)?.to_json(window), io.out.as_deref())?;
        }
        Command::Hypo { io, k, level, report } => {
            let w = read_diagram(&io.input)?;
            let level = (level.level as usize).max(if k > 1 { min_level(k) } else { 3 });
            let r = hypo_report(&w, k, level)?;
            emit(&r, report.as_deref().or(io.out.as_deref()))?;
        }
        Command::Khypo { input, omega, k, level, out } => {
            if k == 0 {
                return Err(Error::domain("k must be at least 1"));
            }
            let n = (level.level as usize).max(min_level(k));
            let (w, hankel) = match (input, omega) {
                (Some(path), None) => (read_diagram(&path)?, None),
                (None, Some(omega)) => {
                    let h = one_var_k_hyponormal(&omega, k, n - (2 * k + 1))?;
                    (WeightDiagram::theta(omega)?, Some(h))
                }
                _ => return Err(Error::domain("give exactly one of --input and --omega")),
            };
            let v = k_hyponormal(&w, k, n)?;
            emit(
                &KhypoOutput { k, level: n, is_psd: v.is_psd, min_eigenvalue: v.min_eigenvalue, hankel },
                out.as_deref(),
            )?;
        }
        Command::Quasinormal(Quasinormal::Complete { row, constant, window, tabulate, out }) => {
            let w = WeightDiagram::quasinormal_completion(row, constant, window as usize)?;
            let doc = if tabulate { table_of(&w, window as usize) } else { w.to_json(window as usize) };
            emit(&doc, out.as_deref())?;
        }
        Command::Quasinormal(Quasinormal::Check { io, window }) => {
            let w = read_diagram(&io.input)?;
            let window = window as usize;
            let verdict = is_spherically_quasinormal(&w, window)?;
            let (gram, spread) = gram_diagonal_constant(&w, window + 1)?;
            if gram != verdict.quasinormal {
                return Err(Error::internal(format!(
                    "Gram diagonal verdict {gram} disagrees with constant-sum verdict {}",
                    verdict.quasinormal
                )));
            }
            emit(
                &QuasinormalCheck { verdict, gram_diagonal_constant: gram, gram_diagonal_spread: spread },
                io.out.as_deref(),
            )?;
        }
        Command::Stampfli { a, b, c, out } => emit(&StampfliData::new(a, b, c)?, out.as_deref())?,
        Command::Berger(Berger::Verify { io, measure, maxdeg, tol }) => {
            let w = read_diagram(&io.input)?;
            let mu: AtomicMeasure2D = serde_json::from_str(&fs::read_to_string(&measure)?)?;
            let mu = AtomicMeasure2D::new(mu.atoms)?;
            let err = berger_atomic_verify(&w, &mu, maxdeg)?;
            let v = BergerVerdict { max_relative_error: err, maxdeg, tol, verified: err <= tol };
            emit(&v, io.out.as_deref())?;
        }
        Command::Berger(Berger::Measure { a, b, c, out }) => emit(&quasinormal2_measure(a, b, c)?, out.as_deref())?,
        Command::Regions(Regions::Scan { grid, level, out }) => {
            let reports = regions::region_scan_reports(grid, level.level as usize)?;
            match out {
                Some(path) => regions::write_scan_csv(&reports, fs::File::create(path)?)?,
                None => regions::write_scan_csv(&reports, io::stdout().lock())?,
            }
        }
        Command::Regions(Regions::Classify { x, y, level }) => {
            emit(&classify(x, y, level.level as usize)?, None)?;
        }
        Command::Regions(Regions::Thresholds { y }) => {
            emit(&ThresholdOutput { curves: thresholds(y)?, spherical_numeric: spherical_threshold(y)? }, None)?;
        }
        Command::Regions(Regions::Crossing) => println!("q = {:.10}", crossing_q()),
        Command::ProbeContinuity { io, level, n, tol } => {
            let w = read_diagram(&io.input)?;
            let probes = n
                .iter()
                .map(|&n| continuity_probe(&w, level.level as usize, n))
                .collect::<Result<Vec<_>, _>>()?;
            let failed = probes.iter().filter(|p| !p.holds(tol)).count();
            if probes.len() == 1 {
                emit(&probes[0], io.out.as_deref())?;
            } else {
                emit(&probes, io.out.as_deref())?;
            }
            if failed > 0 {
                eprintln!("{failed} probe(s) violate a bound by more than {tol:e}");
                return Ok(EXIT_DOMAIN);
            }
        }
        Command::Reproduce { target, seed, strict } => {
            let ids: Vec<u8> = if target == "all" {
                TARGETS.iter().map(|(_, id)| *id).collect()
            } else {
                vec![experiments::target_id(&target).expect("validated by clap")]
            };
            let mut all_passed = true;
            let mut table = Vec::new();
            for id in ids {
                let o = experiments::run(id, seed)?;
                println!("criterion {} — {}", o.id, o.name);
                for line in &o.lines {
                    println!("  {line}");
                }
                table.push(o.clone());
                all_passed &= o.passed;
            }
            println!();
            println!("{:<4} {:<46} {:>6}", "id", "criterion", "result");
            for o in &table {
                println!("{:<4} {:<46} {:>6}", o.id, o.name, if o.passed { "PASS" } else { "FAIL" });
            }
            if strict && !all_passed {
                return Ok(EXIT_DOMAIN);
            }
        }
    }
    Ok(0)
}

/// Tabulated `[0, window]²` rectangle.
fn table_of(w: &WeightDiagram, window: usize) -> DiagramJson {
    DiagramJson {
        kind: "table".into(),
        params: serde_json::json!({ "tail": "flat", "source": w.kind().as_str(), "window": window }),
        table: Some(w.tabulate(window)),
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("ALUTHGE_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Domain => EXIT_DOMAIN,
                ErrorClass::InternalConsistency => EXIT_INTERNAL,
                ErrorClass::Io => EXIT_IO,
            })
        }
    }
}

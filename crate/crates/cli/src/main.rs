//! `macc`: rate-memory tables, delivery simulations and oracle verification
//! for combinatorial multi-access coded caching.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use macc_core::converse::{count_coefficient, f_ratio, lower_bound_curve, solve_lp};
use macc_core::export::{corner_rows, grid_rows, row_at, write_csv, TradeoffRow};
use macc_core::model::{arbitrary_demands, default_file_bits, InstanceFile};
use macc_core::oracle::{run_verification, EnumerationBudget};
use macc_core::scalar::{fmt_exact, parse_exact};
use macc_core::scheme::{
    achievable_load_at_memory, corner_point_load, simulate, simulate_memory_sharing, MemorySharing,
    MulticastMessage,
};
use macc_core::{worst_case_demands, Library, MaccError, Rational, SystemParams};
use num_traits::ToPrimitive;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "macc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Place, deliver and decode one seeded demand; report the measured load.
    Simulate(SimulateArgs),
    /// Achievable load, lower bound and gap over the memory range.
    Tradeoff(TradeoffArgs),
    /// Lower-bound curve with its counting coefficients and LP optimum.
    Converse(ConverseArgs),
    /// Run the brute-force oracles against the closed forms.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Shape {
    /// Number of caches Λ.
    #[arg(long)]
    caches: Option<usize>,
    /// Caches per user λ.
    #[arg(long)]
    access: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    shape: Shape,
    /// Number of files N (defaults to K).
    #[arg(long)]
    files: Option<usize>,
    /// Corner point t = ΛM/N.
    #[arg(long)]
    t: Option<usize>,
    /// Memory M in files (`p/q` or decimal); memory sharing between corners.
    #[arg(long, conflicts_with = "t")]
    memory: Option<String>,
    /// File size B in bits (default pads to divisibility).
    #[arg(long)]
    bits: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON instance file {lambda_caps, access, files, bits, t, seed}.
    #[arg(long, conflicts_with_all = ["caches", "access", "files", "t", "memory", "bits", "seed"])]
    instance: Option<PathBuf>,
    /// Allow repeated files in the demand vector.
    #[arg(long)]
    any_demand: bool,
    /// Write the delivery transcript (JSON lines) here.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct TradeoffArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long)]
    files: Option<usize>,
    /// Extra rows on an evenly spaced memory grid with this many points.
    #[arg(long)]
    grid: Option<usize>,
    /// Extra row at this memory value.
    #[arg(long)]
    memory: Option<String>,
    /// Append decimal load columns next to the exact ones.
    #[arg(long)]
    float: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct ConverseArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long)]
    files: Option<usize>,
    /// Solve the memory-constrained LP at this memory value.
    #[arg(long)]
    memory: Option<String>,
    #[arg(long)]
    float: bool,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    shape: Shape,
    /// Largest Λ whose Λ! cache orders may be enumerated.
    #[arg(long)]
    budget: Option<usize>,
    /// Largest number of (demand, order) pairs K!·Λ!.
    #[arg(long)]
    max_pairs: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    /// Exit 1: a decode mismatch, load mismatch or oracle disagreement.
    Verification(String),
    /// Exit 2: bad parameters or a refused enumeration.
    Invalid(anyhow::Error),
}

impl From<MaccError> for Failure {
    fn from(e: MaccError) -> Self {
        Failure::Invalid(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Invalid(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Tradeoff(a) => cmd_tradeoff(a),
        Command::Converse(a) => cmd_converse(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn required(value: Option<usize>, flag: &str) -> Result<usize, Failure> {
    value.ok_or_else(|| Failure::Invalid(anyhow::anyhow!("missing --{flag}")))
}

fn shape(s: &Shape) -> Result<(usize, usize), Failure> {
    Ok((required(s.caches, "caches")?, required(s.access, "access")?))
}

fn users(caches: usize, access: usize) -> Result<usize, Failure> {
    macc_core::GroundSet::new(caches)?;
    if access == 0 || access > caches {
        return Err(Failure::Invalid(anyhow::anyhow!(
            "--access must lie in [1, {caches}], got {access}"
        )));
    }
    Ok(macc_core::binomial(caches as i64, access as i64)
        .to_usize()
        .expect("user count fits"))
}

fn files_or_default(files: Option<usize>, caches: usize, access: usize) -> Result<usize, Failure> {
    let k = users(caches, access)?;
    let n = files.unwrap_or(k);
    if n < k {
        return Err(MaccError::TooFewFiles { files: n, users: k }.into());
    }
    Ok(n)
}

fn parse_memory(text: &str) -> Result<Rational, Failure> {
    parse_exact(text)
        .ok_or_else(|| Failure::Invalid(anyhow::anyhow!("cannot parse --memory {text:?}")))
}

fn emit(output: Option<&Path>, body: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => fs::write(path, body).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn transcript(messages: &[&MulticastMessage]) -> anyhow::Result<String> {
    let mut out = String::new();
    for m in messages {
        out.push_str(&serde_json::to_string(&m.transcript_record())?);
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct SimulationSummary {
    caches: usize,
    access: usize,
    files: usize,
    bits: u64,
    memory: String,
    messages: usize,
    load: String,
    expected: String,
    users: usize,
    decoded: usize,
}

fn cmd_simulate(args: SimulateArgs) -> Outcome {
    let (caches, access, files, bits, t, seed) = match &args.instance {
        Some(path) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let inst: InstanceFile = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            let bits = inst.bits;
            (
                inst.lambda_caps,
                inst.access,
                Some(inst.files),
                bits,
                Some(inst.t),
                inst.seed,
            )
        }
        None => {
            let (c, a) = shape(&args.shape)?;
            (c, a, args.files, args.bits, args.t, args.seed)
        }
    };
    let files = files_or_default(files, caches, access)?;

    let (load, expected, memory, decoded, total, msgs, bits) = match (t, &args.memory) {
        (Some(t), _) => {
            let bits = bits.unwrap_or_else(|| default_file_bits(caches, t));
            let params = SystemParams::new(caches, access, files, bits, t)?;
            params.subfile_bits()?;
            let library = Library::random(&params, seed);
            let demand = if args.any_demand {
                arbitrary_demands(&params, seed)
            } else {
                worst_case_demands(&params, seed)?
            };
            let sim = simulate(&library, &params, &demand)?;
            let expected = corner_point_load::<Rational>(caches, access, t)?;
            let decoded = sim.correct_users(&library, &demand);
            (
                sim.report.load.clone(),
                expected,
                params.memory(),
                decoded,
                params.num_users(),
                sim.messages,
                bits,
            )
        }
        (None, Some(text)) => {
            let memory = parse_memory(text)?;
            let plan = MemorySharing::new(caches, files, &memory)?;
            let bits = bits.unwrap_or_else(|| plan.default_file_bits(caches));
            let params = SystemParams::new(caches, access, files, bits, plan.lower)?;
            let library = Library::random(&params, seed);
            let demand = if args.any_demand {
                arbitrary_demands(&params, seed)
            } else {
                worst_case_demands(&params, seed)?
            };
            let run = simulate_memory_sharing(&library, caches, access, &demand, &plan)?;
            let expected = achievable_load_at_memory(caches, access, files, &memory)?;
            let decoded = run
                .decoded
                .iter()
                .enumerate()
                .filter(|(i, b)| *b == library.file(demand.file_of_index(*i)))
                .count();
            let msgs = [run.upper, run.lower]
                .into_iter()
                .flatten()
                .flat_map(|s| s.messages)
                .collect();
            (
                run.load,
                expected,
                memory,
                decoded,
                params.num_users(),
                msgs,
                bits,
            )
        }
        (None, None) => {
            return Err(Failure::Invalid(anyhow::anyhow!(
                "one of --t or --memory is required"
            )))
        }
    };

    if let Some(path) = &args.output {
        let refs: Vec<&MulticastMessage> = msgs.iter().collect();
        emit(Some(path), &transcript(&refs)?)?;
    }
    let summary = SimulationSummary {
        caches,
        access,
        files,
        bits,
        memory: fmt_exact(&memory),
        messages: msgs.len(),
        load: fmt_exact(&load),
        expected: fmt_exact(&expected),
        users: total,
        decoded,
    };
    match args.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string(&summary).map_err(anyhow::Error::from)?
        ),
        Format::Csv => {
            println!("memory {}", summary.memory);
            println!("messages {}", summary.messages);
            println!("load {}", summary.load);
            println!("expected {}", summary.expected);
            println!("decoded {}/{} users", decoded, total);
        }
    }
    if decoded != total {
        return Err(Failure::Verification(format!(
            "{} of {total} users failed to decode",
            total - decoded
        )));
    }
    if load != expected {
        return Err(Failure::Verification(format!(
            "measured load {} differs from {}",
            fmt_exact(&load),
            fmt_exact(&expected)
        )));
    }
    Ok(())
}

fn render_rows(rows: &[TradeoffRow], format: Format, float: bool) -> anyhow::Result<String> {
    Ok(match format {
        Format::Csv => write_csv(rows, float),
        Format::Json => {
            let mut out = String::new();
            for r in rows {
                out.push_str(&serde_json::to_string(r)?);
                out.push('\n');
            }
            out
        }
    })
}

fn cmd_tradeoff(args: TradeoffArgs) -> Outcome {
    let (caches, access) = shape(&args.shape)?;
    let files = files_or_default(args.files, caches, access)?;
    let mut rows = corner_rows(caches, access, files)?;
    if let Some(points) = args.grid {
        rows.extend(grid_rows(caches, access, files, points)?);
    }
    if let Some(text) = &args.memory {
        rows.push(row_at(caches, access, files, parse_memory(text)?)?);
    }
    emit(
        args.output.as_deref(),
        &render_rows(&rows, args.format, args.float)?,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct CoefficientRow {
    t: usize,
    #[serde(rename = "M")]
    memory: String,
    f: String,
    a: String,
    permutation_count: String,
}

#[derive(Serialize)]
struct LpRow {
    #[serde(rename = "M")]
    memory: String,
    value: String,
    weights: Vec<String>,
}

#[derive(Serialize)]
struct ConverseReport {
    caches: usize,
    access: usize,
    files: usize,
    coefficients: Vec<CoefficientRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lp: Option<LpRow>,
}

fn cmd_converse(args: ConverseArgs) -> Outcome {
    let (caches, access) = shape(&args.shape)?;
    let files = files_or_default(args.files, caches, access)?;
    let lp = match &args.memory {
        Some(text) => {
            let m = parse_memory(text)?;
            Some((m.clone(), solve_lp::<Rational>(caches, access, files, &m)?))
        }
        None => None,
    };
    let body = match args.format {
        Format::Csv => {
            let mut rows = corner_rows(caches, access, files)?;
            if let Some((m, _)) = &lp {
                rows.push(row_at(caches, access, files, m.clone())?);
            }
            write_csv(&rows, args.float)
        }
        Format::Json => {
            let curve = lower_bound_curve::<Rational>(caches, access, files)?;
            let coefficients = curve
                .corner_points
                .iter()
                .map(|p| {
                    let c = count_coefficient(caches, access, files, p.t)?;
                    Ok(CoefficientRow {
                        t: p.t,
                        memory: fmt_exact(&p.memory),
                        f: fmt_exact(&f_ratio::<Rational>(caches, access, p.t)?),
                        a: c.total.to_string(),
                        permutation_count: c.permutation_count.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, MaccError>>()?;
            let report = ConverseReport {
                caches,
                access,
                files,
                coefficients,
                lp: lp.map(|(m, sol)| LpRow {
                    memory: fmt_exact(&m),
                    value: fmt_exact(&sol.value),
                    weights: sol.weights.iter().map(fmt_exact).collect(),
                }),
            };
            let mut s = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)?;
            s.push('\n');
            s
        }
    };
    emit(args.output.as_deref(), &body)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let (caches, access) = shape(&args.shape)?;
    let mut budget = EnumerationBudget::default();
    if let Some(b) = args.budget {
        budget.max_caches = b;
    }
    if let Some(p) = args.max_pairs {
        budget.max_pairs = p;
    }
    let reports = run_verification(caches, access, &budget)?;
    let mut body = String::new();
    for r in &reports {
        body.push_str(&serde_json::to_string(r).map_err(anyhow::Error::from)?);
        body.push('\n');
    }
    emit(args.output.as_deref(), &body)?;
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "checks failed: {}",
            failed.join(", ")
        )))
    }
}

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dlnc::experiment::{parse_receivers, run_experiment, AlgoSpec, ExperimentConfig, ExperimentError, OracleSettings};
use dlnc::formats::{format_matrix, read_instance, read_matrix};
use dlnc::replay::{replay, Example};
use dlnc::report;
use dlnc_core::baseline::{run_rlnc, StoppingRule};
use dlnc_core::gf::Field;
use dlnc_core::graphic::{build_graph, build_solution};
use dlnc_core::oracle::{brute_force_uq, UqOutcome, DEFAULT_BUDGET};

type Receivers = Vec<usize>;

/// Deterministic linear network coding for broadcast with feedback.
#[derive(Parser)]
#[command(name = "dlnc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo sweep over receiver counts; writes trials.csv and summary.csv.
    Run(RunArgs),
    /// Check a coding matrix against an SFM.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Reduction polynomial for extension fields, as an integer.
        #[arg(long)]
        modulus: Option<u32>,
    },
    /// Replay a built-in example and check its known answers.
    Replay {
        example: Example,
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
    /// Build a coding matrix for an SFM and print it.
    Solve(SolveArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Number of packets K.
    #[arg(long, default_value_t = 15)]
    k: usize,
    /// Receiver counts: `20`, `5,10,20` or `5..40:5`.
    #[arg(long, default_value = "5..40:5", value_parser = parse_receivers)]
    n: Receivers,
    /// Erasure probability.
    #[arg(long, default_value_t = 0.2)]
    pe: f64,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Algorithm, e.g. `graphic:q=2`, `rlnc:q=8`, `rlnc:q=2:rule=global`, `graphic:q=4:prune`.
    #[arg(long = "algo", required = true)]
    algos: Vec<AlgoSpec>,
    /// Output directory; without it the summary is printed to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Label non-perfect outputs against the brute-force optimum.
    #[arg(long)]
    oracle: bool,
    /// Largest K handed to the oracle.
    #[arg(long, default_value_t = 6)]
    oracle_cutoff: usize,
    /// Oracle search-node budget per instance.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveAlgo {
    Graphic,
    Rlnc,
    Oracle,
}

#[derive(clap::Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 2)]
    q: u32,
    #[arg(long)]
    modulus: Option<u32>,
    #[arg(long, value_enum, default_value = "graphic")]
    algo: SolveAlgo,
    /// Print the graphic construction trace to stderr.
    #[arg(long)]
    trace: bool,
    /// Drop redundant rows from the graphic output.
    #[arg(long)]
    prune: bool,
    #[arg(long, default_value = "decodable")]
    rlnc_rule: StoppingRule,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest row count the oracle tries; defaults to K.
    #[arg(long)]
    u_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

fn run(args: RunArgs) -> Result<ExitCode> {
    let config = ExperimentConfig {
        packets: args.k,
        receivers: args.n,
        pe: args.pe,
        trials: args.trials,
        seed: args.seed,
        algorithms: args.algos,
        oracle: args.oracle.then_some(OracleSettings { cutoff: args.oracle_cutoff, budget: args.budget }),
        out: args.out.clone(),
        threads: args.threads,
    };
    let result = match run_experiment(&config) {
        Ok(r) => r,
        Err(e @ ExperimentError::Soundness { .. }) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };
    if args.out.is_none() {
        report::write_summary(io::stdout().lock(), &result.summary)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(instance: PathBuf, solution: PathBuf, modulus: Option<u32>) -> Result<ExitCode> {
    let wants = read_instance(&instance)?.wants();
    let matrix = read_matrix(&solution, modulus)?;
    let verdict = matrix.verify_solution(&wants).context("solution does not fit the instance")?;
    let mut out = io::stdout().lock();
    writeln!(out, "U={} wmax={} K={} q={}", matrix.rows(), wants.max_wants(), wants.packets(), matrix.field().order())?;
    if verdict.s1_ok() {
        writeln!(out, "S-1 ok")?;
    } else {
        for f in &verdict.s1_failures {
            writeln!(out, "S-1 FAIL receiver {}: rank {} < {}", f.receiver + 1, f.rank, f.required)?;
        }
    }
    if verdict.s2_ok() {
        writeln!(out, "S-2 ok")?;
    } else {
        let rows: Vec<String> = verdict.removable_rows.iter().map(|r| (r + 1).to_string()).collect();
        writeln!(out, "S-2 FAIL removable rows: {}", rows.join(","))?;
    }
    Ok(if verdict.is_solution() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn replay_cmd(example: Example, q: u32) -> Result<ExitCode> {
    let field = Field::new(q)?;
    let r = replay(example, &field);
    let mut out = io::stdout().lock();
    for line in &r.trace {
        writeln!(out, "{line}")?;
    }
    out.write_all(format_matrix(&r.matrix).as_bytes())?;
    for c in &r.checks {
        writeln!(out, "{}: {} [{}]", c.name, c.actual, if c.passed() { "ok" } else { "FAIL" })?;
    }
    if r.passed() {
        writeln!(out, "{example} q={q}: pass")?;
        Ok(ExitCode::SUCCESS)
    } else {
        writeln!(out, "{example} q={q}: FAIL")?;
        eprint!("{}", r.diff());
        Ok(ExitCode::from(1))
    }
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let wants = read_instance(&args.instance)?.wants();
    let field = Field::with_modulus(args.q, args.modulus)?;
    let matrix = match args.algo {
        SolveAlgo::Graphic => {
            if args.trace {
                for line in build_graph(&wants).1 {
                    eprintln!("{line}");
                }
            }
            build_solution(&wants, &field, args.prune)
        }
        SolveAlgo::Rlnc => run_rlnc(&wants, &field, args.rlnc_rule, args.seed).matrix,
        SolveAlgo::Oracle => {
            let u_max = args.u_max.unwrap_or(wants.packets());
            let answer = match brute_force_uq(&wants, &field, u_max, args.budget)? {
                UqOutcome::Optimal(u) => u.to_string(),
                UqOutcome::AboveLimit => "above-limit".into(),
                UqOutcome::Infeasible => "infeasible".into(),
            };
            println!("{answer}");
            return Ok(ExitCode::SUCCESS);
        }
    };
    if !matrix.verify_solution(&wants)?.s1_ok() {
        bail!("internal error: output does not satisfy S-1");
    }
    io::stdout().lock().write_all(format_matrix(&matrix).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

/// Error chain joined by `: `, skipping causes the message already quotes.
fn describe(e: &anyhow::Error) -> String {
    let mut msg = e.to_string();
    for cause in e.chain().skip(1) {
        let text = cause.to_string();
        if !msg.contains(&text) {
            msg = format!("{msg}: {text}");
        }
    }
    msg
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify { instance, solution, modulus } => verify(instance, solution, modulus),
        Command::Replay { example, q } => replay_cmd(example, q),
        Command::Solve(args) => solve(args),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {}", describe(&e));
        ExitCode::from(2)
    })
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coaeps::benchmarks::{list_problems, Variant};
use coaeps::cli::{execute_sweep, CliError, SweepRequest, EXIT_IO, EXIT_USAGE};
use coaeps::coa::CoaConfig;

#[derive(Debug, Parser)]
#[command(name = "coaeps", version, about = "Epsilon-constraint sweeps solved with the cuckoo optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the benchmark problems.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Sweep a benchmark problem and write its front.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Benchmark id (1-9).
    #[arg(short, long)]
    problem: u8,
    #[arg(long, default_value = "canonical")]
    variant: Variant,
    /// Objective that stays the objective; the others become constraints.
    #[arg(long, default_value_t = 0)]
    keep: usize,
    #[arg(long, allow_negative_numbers = true)]
    eps_low: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eps_high: Option<f64>,
    #[arg(long)]
    pace: Option<f64>,
    /// Estimate the epsilon range instead of using the preset.
    #[arg(long)]
    estimate: bool,
    #[arg(long, env = "COAEPS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(short, long, default_value = "coaeps-out")]
    out: PathBuf,
    /// Keep every feasible record instead of the non-dominated subset.
    #[arg(long)]
    no_filter: bool,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Print the manifest to stdout.
    #[arg(long)]
    json: bool,
}

fn sweep(args: SweepArgs) -> Result<i32, CliError> {
    let mut config = CoaConfig::default().with_seed(args.seed);
    if let Some(m) = args.max_iterations {
        config.max_iterations = m;
    }
    let request = SweepRequest {
        problem: args.problem,
        variant: args.variant,
        keep_index: args.keep,
        eps_low: args.eps_low,
        eps_high: args.eps_high,
        pace: args.pace,
        estimate: args.estimate,
        out: args.out,
        filter: !args.no_filter,
        workers: args.workers,
        config,
    };
    let outcome = execute_sweep(&request)?;
    let m = &outcome.manifest;
    if args.json {
        print!("{}", m.to_json()?);
    } else {
        println!(
            "{}: {} sub-problems, {} feasible, {} on the front -> {}",
            m.problem.name,
            m.counts.records,
            m.counts.feasible_records,
            m.counts.front,
            request.out.display()
        );
        if m.grid.count_discrepancy {
            println!(
                "note: grid has {} values, nominal sweep length is {}",
                m.grid.count, m.grid.reported_steps
            );
        }
    }
    if outcome.front_empty {
        eprintln!("error: no feasible point found; front is empty");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::List { json } => {
            let catalog = list_problems();
            if json {
                match serde_json::to_string_pretty(&catalog) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(EXIT_IO as u8);
                    }
                }
            } else {
                println!("{:>2}  {:<16} {:>3} {:>3} {:>3}  {:>9} {:>9} {:>8}  reference", "id", "name", "k", "n", "m", "eps_low", "eps_high", "pace");
                for c in catalog {
                    println!(
                        "{:>2}  {:<16} {:>3} {:>3} {:>3}  {:>9} {:>9} {:>8}  {}",
                        c.id,
                        c.name,
                        c.objectives,
                        c.variables,
                        c.constraints,
                        c.epsilon_low,
                        c.epsilon_high,
                        c.pace,
                        if c.has_reference_front { "analytic" } else { "lattice" }
                    );
                }
            }
            0
        }
        Command::Sweep(args) => match sweep(args) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
    };
    ExitCode::from(code as u8)
}

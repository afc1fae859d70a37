//! `approxlab`: batch front-end over the approxlab library.
//!
//! JSON goes to stdout (CSV for `profile`). Exit codes: 0 success, 1 a
//! conclusion was violated or could not be certified, 2 usage or input
//! error, 3 a solver returned an interval under `--require-exact`.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use approxlab::discretisation::{Budget, DEFAULT_BUDGET};
use approxlab::lie::LieError;
use approxlab::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "approxlab", version, about = "Discretisation numbers and metric approximate subgroups of finite metric groups")]
struct Cli {
    /// Pretty-print JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    /// Worker threads; all cores by default.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Node budget of each exact search.
    #[arg(long, global = true, env = "APPROXLAB_NODE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    node_budget: u64,
    /// Exit with status 3 when a search ends with an interval instead of an exact value.
    #[arg(long, global = true)]
    require_exact: bool,
    #[command(subcommand)]
    command: Command,
}

/// The set `X`: an instance file, or a group file with element indices.
#[derive(Args, Debug)]
struct SetInput {
    /// Instance file holding a group and a set.
    #[arg(long, conflicts_with_all = ["group", "set"], required_unless_present = "group")]
    instance: Option<PathBuf>,
    /// Group file.
    #[arg(long)]
    group: Option<PathBuf>,
    /// Comma-separated element indices, or a JSON file with an index array; the whole group by default.
    #[arg(long, requires = "group")]
    set: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the group and metric axioms of a group file.
    Validate {
        #[arg(long)]
        group: PathBuf,
    },
    /// Packing and covering numbers of X along a ladder of radii, as CSV.
    Profile {
        #[command(flatten)]
        input: SetInput,
        /// Radii such as `1,1/2,1/4`, each at most half the previous one.
        #[arg(long)]
        ladder: String,
        /// Ambient set Y for covering numbers (indices as for --set); the whole group by default.
        #[arg(long)]
        ambient: Option<String>,
    },
    /// Decide whether X is a (k, r)-metric approximate subgroup.
    Detect {
        #[command(flatten)]
        input: SetInput,
        #[arg(long)]
        k: usize,
        /// Thickening radius, e.g. `0` or `1/4`.
        #[arg(long)]
        r: String,
        /// Also search for a subgroup inside X^4 commensurable with X.
        #[arg(long)]
        find_subgroup: bool,
        /// Largest commensurability constant accepted by the subgroup search; k by default.
        #[arg(long, requires = "find_subgroup")]
        c_max: Option<usize>,
    },
    /// Select doubling scales with controlled growth, or test growth on a given ladder.
    Scales {
        #[command(flatten)]
        input: SetInput,
        #[arg(long, required_unless_present = "ladder")]
        m: Option<u32>,
        #[arg(long, required_unless_present = "ladder")]
        n: Option<u32>,
        #[arg(long)]
        k: String,
        /// Packing ratio bound C.
        #[arg(long = "C", alias = "c", required_unless_present = "ladder")]
        c: Option<String>,
        /// Test N_r(X^9) <= k N_9r(X) at these radii instead of selecting scales.
        #[arg(long, conflicts_with_all = ["m", "n", "c"])]
        ladder: Option<String>,
    },
    /// Run seeded lemma suites and aggregate the reports.
    Lemmas {
        /// `all`, a suite number `1.1` to `1.9`, or a suite name.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: u64,
        /// Instances per suite.
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Check the seven properties of a filtration file.
    Filtration {
        #[arg(long)]
        chain_file: PathBuf,
    },
    /// Build the neighbourhood ladder of a matrix Lie algebra chart and sample its properties.
    Lie {
        /// `so3`, `sl2`, `diag<m>`, or a chart JSON file.
        #[arg(long)]
        chart: String,
        #[arg(long, default_value_t = 6)]
        nmax: usize,
        /// Samples per property.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Overrides the chart's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the chart's safety factor.
        #[arg(long)]
        safety: Option<f64>,
    },
    /// Generate instance files from an instance spec.
    Gen {
        /// Instance spec JSON (group spec, set spec).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        /// Output file; a directory when --count exceeds 1.
        #[arg(long)]
        out: PathBuf,
        /// Number of instances, with seeds seed, seed + 1, ...
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Write the group once to this file and reference it by path and hash.
        #[arg(long)]
        group_out: Option<PathBuf>,
    },
}

pub struct Context {
    pub pretty: bool,
    pub budget: Budget,
    pub require_exact: bool,
}

/// Outcome of a command, before it becomes an exit code.
pub enum Outcome {
    Ok,
    Violated,
    Inexact,
}

fn error_code(e: &Error, require_exact: bool) -> u8 {
    match e {
        Error::BudgetExceeded { .. } if require_exact => 3,
        Error::Lie(LieError::Chart(_)) => 2,
        Error::BudgetExceeded { .. } | Error::Internal(_) | Error::Lie(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = Context { pretty: cli.pretty, budget: Budget(cli.node_budget), require_exact: cli.require_exact };
    match commands::run(cli.command, &ctx) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(1),
        Ok(Outcome::Inexact) => ExitCode::from(if ctx.require_exact { 3 } else { 0 }),
        Err(e) => {
            let code = error_code(&e, ctx.require_exact);
            commands::print_error(&ctx, &e);
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}

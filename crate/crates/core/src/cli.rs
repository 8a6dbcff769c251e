//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::coarsening::DEFAULT_CONTRACTION_LIMIT;
use crate::deep::{partition_deep_with_stats, DeepParams, DeepStats};
use crate::eval::{performance_profile, read_records, write_profile_csv};
use crate::generate::{grid, random_geometric, rmat, RmatProbabilities};
use crate::graph::{BlockId, Graph};
use crate::initial::DEFAULT_REPETITIONS;
use crate::io::{read_metis, write_metis, write_metis_file, write_partition_file};
use crate::metrics::{check_balance, edge_cut, imbalance, BalanceMode};
use crate::partition::Partition;

pub const EXIT_FEASIBLE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// Version of the stats JSON layout.
pub const STATS_SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "deeppart",
    version,
    about = "Deep multilevel graph partitioner",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Graph in METIS format.
    #[arg(required = true)]
    graph: Option<PathBuf>,
    /// Number of blocks.
    #[arg(short = 'k', long = "blocks", required = true)]
    k: Option<BlockId>,
    /// Allowed imbalance.
    #[arg(short = 'e', long, default_value_t = 0.03)]
    epsilon: f64,
    /// Worker threads (default: all available).
    #[arg(short = 't', long)]
    threads: Option<usize>,
    #[arg(short = 's', long, default_value_t = 0)]
    seed: u64,
    /// Coarsening stops at about twice this many nodes.
    #[arg(short = 'C', long = "contraction-limit", default_value_t = DEFAULT_CONTRACTION_LIMIT)]
    contraction_limit: usize,
    /// Flat bipartitioning runs per bipartition.
    #[arg(short = 'R', long, default_value_t = DEFAULT_REPETITIONS)]
    repetitions: usize,
    /// Write the partition here, one block id per line.
    #[arg(short = 'o', long)]
    output: Option<PathBuf>,
    /// Write run statistics as a JSON object.
    #[arg(long = "stats-json")]
    stats_json: Option<PathBuf>,
    /// Balance constraint that decides the exit code: Lk or Lmaxk.
    #[arg(long, default_value = "Lmaxk")]
    mode: BalanceMode,
    #[arg(short = 'q', long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic graph in METIS format.
    Generate {
        #[command(subcommand)]
        kind: Generator,
        /// Output file (default: stdout).
        #[arg(short = 'o', long, global = true)]
        output: Option<PathBuf>,
    },
    /// Compute a performance profile from run records (CSV with columns
    /// algorithm,instance,k,seed,cut,time,feasible,imbalance).
    Profile {
        records: PathBuf,
        /// Ratios at which to evaluate the profile.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1.01, 1.02, 1.05, 1.1, 1.2, 1.5, 2.0])]
        tau: Vec<f64>,
        /// Output file (default: stdout).
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum Generator {
    /// Two-dimensional grid.
    Grid {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        height: usize,
    },
    /// Random geometric graph in the unit square.
    Rgg {
        #[arg(long)]
        nodes: usize,
        #[arg(long, default_value_t = 8.0)]
        degree: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// RMAT-like power-law graph with 2^scale nodes.
    Rmat {
        #[arg(long)]
        scale: u32,
        #[arg(long = "edge-factor", default_value_t = 16)]
        edge_factor: usize,
        #[arg(long, default_value_t = 0.57)]
        a: f64,
        #[arg(long, default_value_t = 0.19)]
        b: f64,
        #[arg(long, default_value_t = 0.19)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Flat statistics object written by `--stats-json`. Times are in seconds.
#[derive(Debug, Clone, Serialize)]
pub struct RunStats {
    pub schema: u32,
    pub graph: String,
    pub n: usize,
    pub m: usize,
    pub k: BlockId,
    pub epsilon: f64,
    pub seed: u64,
    pub threads: usize,
    pub contraction_limit: usize,
    pub repetitions: usize,
    pub mode: String,
    pub cut: u64,
    pub imbalance: f64,
    pub max_block_weight: u64,
    pub empty_blocks: usize,
    pub feasible: bool,
    pub feasible_lk: bool,
    pub feasible_lmaxk: bool,
    pub levels: usize,
    pub coarsest_nodes: usize,
    pub time_io: f64,
    pub time_coarsening: f64,
    pub time_initial_partitioning: f64,
    pub time_balancing: f64,
    pub time_refinement: f64,
    pub time_total: f64,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 for a feasible partition, 2 for an infeasible one,
/// 1 for errors.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_FEASIBLE };
        }
    };
    let result = match cli.command {
        Some(Command::Generate { kind, output }) => generate(kind, output.as_deref()).map(|_| EXIT_FEASIBLE),
        Some(Command::Profile { records, tau, output }) => {
            profile(&records, &tau, output.as_deref()).map(|_| EXIT_FEASIBLE)
        }
        None => run(&cli.run),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn run(args: &RunArgs) -> CliResult<i32> {
    let path = args.graph.as_ref().expect("required by the parser");
    let k = args.k.expect("required by the parser");
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));

    let io_timer = Instant::now();
    let graph = read_metis(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut time_io = io_timer.elapsed();

    let mut params = DeepParams::new(k, args.epsilon);
    params.threads = threads;
    params.seed = args.seed;
    params.contraction_limit = args.contraction_limit;
    params.repetitions = args.repetitions;
    let (partition, deep) = partition_deep_with_stats(&graph, &params)?;

    if let Some(output) = &args.output {
        let timer = Instant::now();
        write_partition_file(partition.blocks(), output).map_err(|e| format!("{}: {e}", output.display()))?;
        time_io += timer.elapsed();
    }
    let stats = collect_stats(&graph, &partition, &deep, args, &params, path, time_io.as_secs_f64());
    if let Some(json) = &args.stats_json {
        let file = File::create(json).map_err(|e| format!("{}: {e}", json.display()))?;
        serde_json::to_writer_pretty(file, &stats)?;
    }
    if !args.quiet {
        print_stats(&stats);
    }
    Ok(if stats.feasible { EXIT_FEASIBLE } else { EXIT_INFEASIBLE })
}

fn collect_stats(
    graph: &Graph,
    partition: &Partition,
    deep: &DeepStats,
    args: &RunArgs,
    params: &DeepParams,
    path: &Path,
    time_io: f64,
) -> RunStats {
    let lk = check_balance(graph, partition, params.epsilon, BalanceMode::Lk).feasible;
    let lmaxk = check_balance(graph, partition, params.epsilon, BalanceMode::LmaxK).feasible;
    RunStats {
        schema: STATS_SCHEMA,
        graph: path.display().to_string(),
        n: graph.n(),
        m: graph.m(),
        k: params.k,
        epsilon: params.epsilon,
        seed: params.seed,
        threads: params.threads,
        contraction_limit: params.contraction_limit,
        repetitions: params.repetitions,
        mode: args.mode.to_string(),
        cut: edge_cut(graph, partition),
        imbalance: imbalance(graph, partition),
        max_block_weight: partition.max_block_weight(),
        empty_blocks: partition.empty_blocks(),
        feasible: match args.mode {
            BalanceMode::Lk => lk,
            BalanceMode::LmaxK => lmaxk,
        },
        feasible_lk: lk,
        feasible_lmaxk: lmaxk,
        levels: deep.levels.len(),
        coarsest_nodes: deep.coarsest_nodes,
        time_io,
        time_coarsening: deep.times.coarsening.as_secs_f64(),
        time_initial_partitioning: deep.times.initial_partitioning.as_secs_f64(),
        time_balancing: deep.times.balancing.as_secs_f64(),
        time_refinement: deep.times.refinement.as_secs_f64(),
        time_total: deep.total_time.as_secs_f64(),
    }
}

fn print_stats(s: &RunStats) {
    println!("graph                 {} (n = {}, m = {})", s.graph, s.n, s.m);
    println!("k                     {} (epsilon = {}, seed = {}, threads = {})", s.k, s.epsilon, s.seed, s.threads);
    println!("cut                   {}", s.cut);
    println!("imbalance             {:.4}", s.imbalance);
    println!("feasible (Lk)         {}", s.feasible_lk);
    println!("feasible (Lmaxk)      {}", s.feasible_lmaxk);
    println!("levels                {} (coarsest: {} nodes)", s.levels, s.coarsest_nodes);
    println!("time coarsening       {:.3} s", s.time_coarsening);
    println!("time initial part.    {:.3} s", s.time_initial_partitioning);
    println!("time balancing        {:.3} s", s.time_balancing);
    println!("time refinement       {:.3} s", s.time_refinement);
    println!("time total            {:.3} s", s.time_total);
}

fn generate(kind: Generator, output: Option<&Path>) -> CliResult<()> {
    let graph = match kind {
        Generator::Grid { width, height } => grid(width, height)?,
        Generator::Rgg { nodes, degree, seed } => random_geometric(nodes, degree, seed)?,
        Generator::Rmat {
            scale,
            edge_factor,
            a,
            b,
            c,
            seed,
        } => rmat(scale, edge_factor, RmatProbabilities { a, b, c }, seed)?,
    };
    match output {
        Some(path) => write_metis_file(&graph, path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => write_metis(&graph, std::io::stdout().lock())?,
    }
    Ok(())
}

fn profile(records: &Path, taus: &[f64], output: Option<&Path>) -> CliResult<()> {
    let file = File::open(records).map_err(|e| format!("{}: {e}", records.display()))?;
    let records = read_records(file)?;
    let points = performance_profile(&records, taus)?;
    match output {
        Some(path) => {
            let mut file = File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_profile_csv(&points, &mut file)?;
            file.flush()?;
        }
        None => write_profile_csv(&points, std::io::stdout().lock())?,
    }
    Ok(())
}

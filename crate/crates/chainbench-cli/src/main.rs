//! Command-line front end for the chainbench library: generate problem
//! suites, embed them on Chimera graphs, draw annealed samples, decode
//! broken chains, and run chain-strength sweeps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use chainbench::bench::{run_sweep_checkpointed, SuiteProblem, SweepConfig};
use chainbench::chimera::ChimeraGraph;
use chainbench::decode::{decode_sample_set, ChainLayout, Strategy};
use chainbench::embedding::{clique_embed, embed_model};
use chainbench::io::{self, RunMeta, SuiteEntry};
use chainbench::ising::{brute_force_solve, BRUTE_FORCE_CAP};
use chainbench::portfolio::{generate_suite, SuiteConfig};
use chainbench::sampler::{sample, AnnealSchedule, NoiseConfig};

#[derive(Parser)]
#[command(name = "chainbench", version, about = "Chain-break benchmarking for Ising models embedded on Chimera graphs")]
struct Cli {
    /// Worker threads for sampling (default: one per CPU core). Results do
    /// not depend on this; it only changes wall-clock time.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a suite of portfolio-selection problems with ground truth.
    Generate(GenerateArgs),
    /// Embed a logical problem on a Chimera graph with chain strength k.
    Embed(EmbedArgs),
    /// Draw annealed samples from an embedded model.
    Sample(SampleArgs),
    /// Decode physical samples back to logical states.
    Decode(DecodeArgs),
    /// Benchmark harnesses.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Sweep chain strength over a problem suite and score every decoder.
    Sweep(SweepArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        if let Err(e) = pool {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::Generate(args) => run_generate(args),
        Command::Embed(args) => run_embed(args),
        Command::Sample(args) => run_sample(args),
        Command::Decode(args) => run_decode(args),
        Command::Bench(BenchCommand::Sweep(args)) => run_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

// ---------------------------------------------------------------------------
// generate

#[derive(Args)]
struct GenerateArgs {
    /// Asset counts; each value adds `count` instances of n = m*w spins.
    #[arg(short, long, value_delimiter = ',', default_values_t = vec![2, 3, 4, 5])]
    m: Vec<usize>,
    /// Bits per asset (allocation granularity factor).
    #[arg(short, long, default_value_t = 4)]
    w: usize,
    /// Budget scalar.
    #[arg(short, long, default_value_t = 1.0)]
    b: f64,
    /// Objective weights: return, budget penalty, risk.
    #[arg(long, value_delimiter = ',', default_value = "1,10,1")]
    theta: Vec<f64>,
    /// Price points per asset in the synthetic market series.
    #[arg(long, default_value_t = 20)]
    nf: usize,
    /// Per-step relative price change is uniform on [-volatility, volatility].
    #[arg(long, default_value_t = 0.25)]
    volatility: f64,
    /// Instances per asset count.
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip exact ground-state solving (mandatory for n > 26).
    #[arg(long)]
    no_ground: bool,
    /// Output directory for problem JSONs, manifest.json and j_values.csv.
    #[arg(long)]
    out: PathBuf,
}

/// manifest.json written by `generate`: the library's suite manifest plus
/// the generator settings, so a suite directory is self-describing.
#[derive(Serialize)]
struct GenerateManifest<'a> {
    format_version: u32,
    seed: u64,
    count_per_size: usize,
    assets: &'a [usize],
    bits_per_asset: usize,
    budget: f64,
    price_points: usize,
    theta: [f64; 3],
    volatility: f64,
    problems: &'a [SuiteEntry],
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let theta: [f64; 3] = args
        .theta
        .as_slice()
        .try_into()
        .map_err(|_| anyhow::anyhow!("--theta takes exactly three values, got {}", args.theta.len()))?;
    fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;

    let mut entries = Vec::new();
    let mut problems = Vec::new();
    for &assets in &args.m {
        let cfg = SuiteConfig {
            assets,
            bits_per_asset: args.w,
            budget: args.b,
            price_points: args.nf,
            theta,
            volatility: args.volatility,
            seed: args.seed,
        };
        let n = cfg.spin_count();
        if !args.no_ground && n > BRUTE_FORCE_CAP {
            bail!(
                "n = {n} exceeds the exact-solver cap of {BRUTE_FORCE_CAP} spins; \
                 pass --no-ground to generate without ground truth"
            );
        }
        let models = generate_suite(&cfg, args.count)?;
        for (index, model) in models.into_iter().enumerate() {
            let ground = if args.no_ground {
                None
            } else {
                Some(brute_force_solve(&model)?)
            };
            let file = format!("problem_n{n}_i{index:03}.json");
            io::write_problem(&args.out.join(&file), &model, ground.as_ref())?;
            entries.push(SuiteEntry { file, n, index });
            problems.push(SuiteProblem { index, model, ground });
        }
    }

    let manifest = GenerateManifest {
        format_version: io::FORMAT_VERSION,
        seed: args.seed,
        count_per_size: args.count,
        assets: &args.m,
        bits_per_asset: args.w,
        budget: args.b,
        price_points: args.nf,
        theta,
        volatility: args.volatility,
        problems: &entries,
    };
    fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    io::write_j_values_csv(&args.out.join("j_values.csv"), &problems)?;

    let sizes: Vec<usize> = args.m.iter().map(|&m| m * args.w).collect();
    println!(
        "wrote {} problems (sizes {sizes:?}, {} per size) to {}",
        problems.len(),
        args.count,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// embed

#[derive(Args)]
struct EmbedArgs {
    /// Logical problem JSON.
    #[arg(long)]
    problem: PathBuf,
    /// Chimera grid as MxNxL (rows x cols x shore).
    #[arg(long, value_parser = parse_dims, default_value = "16x16x4", conflicts_with = "embedding")]
    chimera: (usize, usize, usize),
    /// Chain strength applied to every intra-chain coupler.
    #[arg(short, long, allow_hyphen_values = true)]
    k: f64,
    /// Reuse an embedding JSON instead of the built-in clique construction.
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Also write the bare embedding (graph + chains) to this path.
    #[arg(long)]
    layout_out: Option<PathBuf>,
    /// Output embedded-model JSON.
    #[arg(long)]
    out: PathBuf,
}

fn run_embed(args: EmbedArgs) -> Result<()> {
    let (model, _) = io::read_problem(&args.problem)
        .with_context(|| format!("cannot read problem {}", args.problem.display()))?;
    let embedding = match &args.embedding {
        Some(path) => io::read_embedding(path)
            .with_context(|| format!("cannot read embedding {}", path.display()))?,
        None => {
            let (rows, cols, shore) = args.chimera;
            let graph = ChimeraGraph::new(rows, cols, shore)?;
            clique_embed(model.n(), &graph)?
        }
    };
    let embedded = embed_model(&model, &embedding, args.k)?;
    if let Some(path) = &args.layout_out {
        io::write_embedding(path, embedded.embedding())?;
    }
    io::write_embedded(&args.out, &embedded)?;
    println!(
        "embedded n={} as {} chains of length {} ({} qubits, {} intra edges, k={}) -> {}",
        model.n(),
        embedded.embedding().chain_count(),
        embedded.embedding().max_chain_length(),
        embedded.qubit_count(),
        embedded.intra_edge_count(),
        args.k,
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sample

#[derive(Args)]
struct SampleArgs {
    /// Embedded-model JSON.
    #[arg(long)]
    embedded: PathBuf,
    /// Number of samples to draw.
    #[arg(short, long, default_value_t = 1000)]
    n: usize,
    /// Total Metropolis sweeps per anneal (default: 100 per physical qubit).
    #[arg(long)]
    sweeps: Option<usize>,
    /// Geometric inverse-temperature ladder as START:END.
    #[arg(long, value_parser = parse_beta, default_value = "0.1:10")]
    beta: (f64, f64),
    /// Independent restarts per sample; the lowest-energy state wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Per-qubit readout flip probability.
    #[arg(long = "flip-p", default_value_t = 0.0)]
    flip_p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output samples CSV; settings go to a `.meta.json` sidecar.
    #[arg(long)]
    out: PathBuf,
}

fn run_sample(args: SampleArgs) -> Result<()> {
    let model = io::read_embedded(&args.embedded)
        .with_context(|| format!("cannot read embedded model {}", args.embedded.display()))?;
    let sweeps = args.sweeps.unwrap_or(100 * model.qubit_count());
    let schedule = AnnealSchedule::geometric(args.beta.0, args.beta.1, sweeps, args.restarts)?;
    let noise = NoiseConfig { flip_probability: args.flip_p };
    let set = sample(&model, args.n, &schedule, &noise, args.seed)?;

    io::write_samples_csv(&args.out, &set)?;
    let meta = RunMeta {
        seed: args.seed,
        n_samples: args.n,
        beta_start: args.beta.0,
        beta_end: args.beta.1,
        sweeps,
        restarts: args.restarts,
        flip_probability: args.flip_p,
        qubits: set.qubits.clone(),
    };
    io::write_run_meta(&sidecar_path(&args.out), &meta)?;

    let best = set.energies.iter().cloned().fold(f64::INFINITY, f64::min);
    println!(
        "wrote {} samples over {} qubits to {} (best energy {best})",
        set.samples.len(),
        set.qubits.len(),
        args.out.display()
    );
    Ok(())
}

/// samples.csv -> samples.meta.json
fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

// ---------------------------------------------------------------------------
// decode

#[derive(Args)]
struct DecodeArgs {
    /// Physical samples CSV.
    #[arg(long)]
    samples: PathBuf,
    /// Embedding JSON the samples were drawn under.
    #[arg(long)]
    embedding: PathBuf,
    /// discard, majority, or weighted.
    #[arg(long, value_parser = parse_strategy)]
    strategy: Strategy,
    /// Fault-profile CSV; required for weighted, tie-breaker for majority.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Output decoded CSV.
    #[arg(long)]
    out: PathBuf,
}

fn run_decode(args: DecodeArgs) -> Result<()> {
    let set = io::read_samples_csv(&args.samples)
        .with_context(|| format!("cannot read samples {}", args.samples.display()))?;
    let embedding = io::read_embedding(&args.embedding)
        .with_context(|| format!("cannot read embedding {}", args.embedding.display()))?;
    let layout = ChainLayout::new(&embedding)?;
    if layout.qubits() != set.qubits.as_slice() {
        bail!(
            "samples cover {} qubits but the embedding uses {}; \
             the sample file does not belong to this embedding",
            set.qubits.len(),
            layout.qubit_count()
        );
    }
    if args.strategy == Strategy::Weighted && args.profile.is_none() {
        bail!("--strategy weighted needs a fault profile; pass --profile FILE");
    }
    let profile = args
        .profile
        .as_ref()
        .map(|p| io::read_profile_csv(p).with_context(|| format!("cannot read profile {}", p.display())))
        .transpose()?;

    let decoded = decode_sample_set(&set.samples, &layout, args.strategy, profile.as_ref())?;
    io::write_decoded_csv(&args.out, &decoded)?;

    let discarded = decoded.samples.iter().filter(|s| s.logical.is_none()).count();
    let broken = decoded.samples.iter().filter(|s| s.broken_chains > 0).count();
    println!(
        "decoded {} samples ({broken} with broken chains, {discarded} discarded) -> {}",
        decoded.samples.len(),
        args.out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// bench sweep

#[derive(Args)]
struct SweepArgs {
    /// Suite directory (containing manifest.json) or a manifest path.
    #[arg(long)]
    suite: PathBuf,
    /// Chain strengths to sweep.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = vec![0.0, -0.25, -0.5, -1.0, -1.5, -2.0])]
    k: Vec<f64>,
    /// Decoding strategies to score.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy,
          default_values_t = vec![Strategy::Discard, Strategy::Majority, Strategy::Weighted])]
    strategies: Vec<Strategy>,
    /// Use only the first COUNT problems of each size.
    #[arg(long, value_name = "COUNT")]
    problems: Option<usize>,
    /// Samples per problem and chain strength.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chimera grid as MxNxL.
    #[arg(long, value_parser = parse_dims, default_value = "16x16x4")]
    chimera: (usize, usize, usize),
    /// Total Metropolis sweeps per anneal (default: 100 per physical qubit).
    #[arg(long)]
    sweeps: Option<usize>,
    /// Geometric inverse-temperature ladder as START:END.
    #[arg(long, value_parser = parse_beta, default_value = "0.1:10")]
    beta: (f64, f64),
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Per-qubit readout flip probability.
    #[arg(long = "flip-p", default_value_t = 0.0)]
    flip_p: f64,
    /// Reuse finished cells checkpointed in --out by an identical run.
    #[arg(long)]
    resume: bool,
    /// Output directory for sweep.csv, heatmaps, manifest and checkpoints.
    #[arg(long)]
    out: PathBuf,
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let manifest_path = if args.suite.is_dir() {
        args.suite.join("manifest.json")
    } else {
        args.suite.clone()
    };
    let mut problems = io::read_suite(&manifest_path)
        .with_context(|| format!("cannot load suite {}", manifest_path.display()))?;
    if let Some(limit) = args.problems {
        let mut taken: BTreeMap<usize, usize> = BTreeMap::new();
        problems.retain(|p| {
            let seen = taken.entry(p.model.n()).or_insert(0);
            *seen += 1;
            *seen <= limit
        });
    }

    let cfg = SweepConfig {
        k_values: args.k,
        strategies: args.strategies,
        samples_per_problem: args.samples,
        seed: args.seed,
        beta_start: args.beta.0,
        beta_end: args.beta.1,
        sweeps: args.sweeps,
        restarts: args.restarts,
        flip_probability: args.flip_p,
        graph: args.chimera,
    };
    let outcome = run_sweep_checkpointed(&problems, &cfg, &args.out, args.resume)?;

    println!("{:>4} {:>8} {:>9} {:>8} {:>8} {:>8}", "n", "k", "strategy", "p_s", "p_b", "r_b");
    for row in &outcome.rows {
        println!(
            "{:>4} {:>8} {:>9} {:>8.4} {:>8.4} {:>8.4}",
            row.n, row.k, row.strategy, row.p_s, row.p_b, row.r_b
        );
    }
    println!(
        "wrote {} rows and {} heatmaps to {}",
        outcome.rows.len(),
        outcome.profiles.len(),
        args.out.display()
    );

    if !outcome.failures.is_empty() {
        for f in &outcome.failures {
            eprintln!("dropped problem n={} #{}: {}", f.n, f.index, f.message);
        }
        bail!("{} problem(s) could not be scored", outcome.failures.len());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// arg parsers

fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected MxNxL (e.g. 16x16x4), got {s:?}"));
    }
    let dim = |p: &str| {
        p.parse::<usize>()
            .map_err(|_| format!("bad dimension {p:?} in {s:?}"))
    };
    Ok((dim(parts[0])?, dim(parts[1])?, dim(parts[2])?))
}

fn parse_beta(s: &str) -> Result<(f64, f64), String> {
    let (start, end) = s
        .split_once(':')
        .ok_or_else(|| format!("expected START:END (e.g. 0.1:10), got {s:?}"))?;
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|_| format!("bad temperature {p:?} in {s:?}"))
    };
    Ok((num(start)?, num(end)?))
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: chainbench::Error| e.to_string())
}

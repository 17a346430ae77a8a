use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multireg_core::bounds::{sparse_lowrank_kappa, success_prob_upper};
use multireg_core::regularizers::RegularizerSpec;
use multireg_core::solver::SolverOptions;
use multireg_core::Field;
use multireg_experiments::config::{
    GreedyConfig, PhaseGridConfig, RipConfig, SuccessDenominator, SweepConfig, SweepSignal,
};
use multireg_experiments::output::{emit_csv, emit_phase_svg, emit_statdim_svg};
use multireg_experiments::phase::run_phase_transition;
use multireg_experiments::rip::run_rip_sweep;
use multireg_experiments::sweep::run_statdim_sweep;
use multireg_experiments::{ExpError, Result};

#[derive(Parser)]
#[command(name = "multireg", version, about = "Recovery experiments with sums and maxima of norms")]
struct Cli {
    /// Base seed; overrides the seed of a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// JSON config or run manifest; replaces the grid flags of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo statistical dimensions over a range of sizes.
    Statdim(StatdimArgs),
    /// A single recovery bin.
    Recover(RecoverArgs),
    /// Phase-transition grid over (m, s).
    Phase(PhaseArgs),
    /// Lower bounds for sparse low-rank matrices.
    Bounds(BoundsArgs),
    /// Empirical RIP deviations over a range of m.
    Rip(RipArgs),
    /// Phase grid with greedily tuned sum weights.
    Greedy(GreedyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalKind {
    SparseLowRank,
    Tensor,
}

#[derive(Args)]
struct StatdimArgs {
    #[arg(long, value_enum, default_value = "sparse-low-rank")]
    signal: SignalKind,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_values_t = [4, 15])]
    s: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Tensor order.
    #[arg(long, default_value_t = 4)]
    order: usize,
    /// Family names or regularizer specs, `;`-separated.
    #[arg(long, value_delimiter = ';')]
    families: Option<Vec<String>>,
    /// Gaussian samples per configuration.
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

#[derive(Args, Clone)]
struct GridArgs {
    /// n = 30, s = 5..20, 20 trials per bin.
    #[arg(long)]
    paper_scale: bool,
    #[arg(long, value_enum)]
    success_denominator: Option<SuccessDenominator>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    s: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    field: Option<Field>,
}

#[derive(Args)]
struct PhaseArgs {
    #[arg(long, default_value = "max(l1, nuc)")]
    regularizer: RegularizerSpec,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct GreedyArgs {
    #[arg(long, default_value_t = 3)]
    iterations: usize,
    /// Weight each atom by its own dual norm at A*(y) initially.
    #[arg(long)]
    swap_greedy_init: bool,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct RecoverArgs {
    #[arg(long, default_value = "max(l1, nuc)")]
    regularizer: RegularizerSpec,
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    s: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 150)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value = "complex")]
    field: Field,
    #[arg(long, value_enum, default_value = "recon")]
    success_denominator: SuccessDenominator,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 30)]
    n1: usize,
    #[arg(long, default_value_t = 30)]
    n2: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 5)]
    s1: usize,
    #[arg(long, default_value_t = 5)]
    s2: usize,
    /// Measurement count for the success-probability bound.
    #[arg(long)]
    m: Option<f64>,
}

#[derive(Args)]
struct RipArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    r: usize,
    #[arg(long, default_value_t = 4)]
    s: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [40, 80, 160, 320])]
    m: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    maps: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value = "real")]
    field: Field,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| ExpError::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::Statdim(args) => statdim(&cli, args),
        Command::Recover(args) => recover(&cli, args),
        Command::Phase(args) => {
            let cfg = match &cli.config {
                Some(p) => PhaseGridConfig::load(p)?,
                None => grid_config(args.regularizer.clone(), &args.grid),
            };
            phase(&cli, cfg, "phase")
        }
        Command::Greedy(args) => {
            let mut cfg = match &cli.config {
                Some(p) => PhaseGridConfig::load(p)?,
                None => grid_config("sum(l1, nuc)".parse()?, &args.grid),
            };
            if cfg.greedy.is_none() || cli.config.is_none() {
                cfg.greedy = Some(GreedyConfig { iterations: args.iterations, swap_init: args.swap_greedy_init });
            }
            phase(&cli, cfg, "greedy")
        }
        Command::Bounds(args) => bounds(&cli, args),
        Command::Rip(args) => rip(&cli, args),
    }
}

fn grid_config(regularizer: RegularizerSpec, g: &GridArgs) -> PhaseGridConfig {
    let mut cfg = if g.paper_scale {
        PhaseGridConfig::paper_scale(regularizer)
    } else {
        PhaseGridConfig::desk_scale(regularizer)
    };
    if let Some(n) = g.n {
        cfg.model = multireg_experiments::config::ModelFamily::SparseLowRank { n1: n, n2: n, r: 1 };
    }
    if let Some(s) = &g.s {
        cfg.secondary_values = s.clone();
    }
    if let Some(m) = &g.m {
        cfg.m_values = m.clone();
    }
    if let Some(t) = g.trials {
        cfg.trials = t;
    }
    if let Some(f) = g.field {
        cfg.field = f;
    }
    if let Some(d) = g.success_denominator {
        cfg.success_denominator = d;
    }
    cfg
}

fn phase(cli: &Cli, mut cfg: PhaseGridConfig, name: &str) -> Result<()> {
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let run = run_phase_transition(&cfg)?;
    let rows = run.rows();
    emit_csv(&rows, &cli.out.join(format!("{name}.csv")))?;
    emit_phase_svg(&rows, &cli.out.join(format!("{name}.svg")))?;
    run.manifest.write(&cli.out.join(format!("{name}_manifest.json")))?;
    for &p in &cfg.secondary_values {
        if let Some(fit) = run.fit(p) {
            println!("s={p}: m50={:.1} slope={:.4}", fit.m50, fit.slope);
        }
    }
    report_files(&cli.out, name);
    run.check_budget(cfg.max_failure_rate)
}

fn recover(cli: &Cli, args: &RecoverArgs) -> Result<()> {
    let mut cfg = PhaseGridConfig::sparse_lowrank(args.n, args.regularizer.clone(), vec![args.m], vec![args.s], args.trials);
    cfg.model = multireg_experiments::config::ModelFamily::SparseLowRank { n1: args.n, n2: args.n, r: args.r };
    cfg.field = args.field;
    cfg.success_denominator = args.success_denominator;
    if let Some(p) = &cli.config {
        cfg = PhaseGridConfig::load(p)?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let run = run_phase_transition(&cfg)?;
    for b in &run.bins {
        println!(
            "m={} s={}: {}/{} recovered, mean relative error {:.3e}, {:.0} iterations",
            b.m, b.param, b.successes, b.trials, b.mean_rel_err, b.mean_iters
        );
    }
    emit_csv(&run.rows(), &cli.out.join("recover.csv"))?;
    run.manifest.write(&cli.out.join("recover_manifest.json"))?;
    run.check_budget(cfg.max_failure_rate)
}

fn statdim(cli: &Cli, args: &StatdimArgs) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => SweepConfig::load(p)?,
        None => {
            let (signal, n, families) = match args.signal {
                SignalKind::SparseLowRank => (
                    SweepSignal::SparseLowRank { r: args.r, s_values: args.s.clone() },
                    vec![15, 20, 25],
                    vec!["sum", "max"],
                ),
                SignalKind::Tensor => (
                    SweepSignal::RankOneTensor { order: args.order },
                    vec![2, 3, 4, 5],
                    vec!["tt", "hosvd", "b2", "b3", "square-deal"],
                ),
            };
            SweepConfig {
                signal,
                families: args
                    .families
                    .clone()
                    .unwrap_or_else(|| families.into_iter().map(String::from).collect()),
                n_values: args.n.clone().unwrap_or(n),
                samples: args.samples,
                seed: 0,
                solver: SolverOptions::distance(),
            }
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let run = run_statdim_sweep(&cfg)?;
    emit_csv(&run.rows, &cli.out.join("statdim.csv"))?;
    emit_statdim_svg(&run.rows, &cli.out.join("statdim.svg"))?;
    run.manifest.write(&cli.out.join("statdim_manifest.json"))?;
    for row in &run.rows {
        println!("{} n={} s={:?}: {:.2} ± {:.2}", row.family, row.n, row.s, row.mean, row.stderr);
    }
    report_files(&cli.out, "statdim");
    let invalid = run.invalid();
    if invalid > 0 {
        let attempts = run.estimates.iter().map(|e| e.samples).sum();
        return Err(ExpError::FailureBudget {
            failures: run.manifest.solver_failures,
            attempts,
            budget: multireg_core::statdim::MAX_FAILURE_RATE,
        });
    }
    Ok(())
}

fn bounds(cli: &Cli, args: &BoundsArgs) -> Result<()> {
    let kappa = sparse_lowrank_kappa(args.n1, args.n2, args.r, args.s1, args.s2)?;
    let mut report = serde_json::json!({
        "n1": args.n1, "n2": args.n2, "r": args.r, "s1": args.s1, "s2": args.s2, "kappa": kappa,
    });
    println!("kappa = {kappa}");
    if let Some(m) = args.m {
        match success_prob_upper(m, kappa) {
            Ok(p) => {
                println!("P(success) <= {p:.4e} at m = {m}");
                report["success_prob_upper"] = p.into();
                report["m"] = m.into();
            }
            Err(e) => println!("no bound at m = {m}: {e}"),
        }
    }
    std::fs::write(cli.out.join("bounds.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    Ok(())
}

fn rip(cli: &Cli, args: &RipArgs) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RipConfig::load(p)?,
        None => RipConfig {
            n: args.n,
            r: args.r,
            s: args.s,
            m_values: args.m.clone(),
            maps: args.maps,
            samples: args.samples,
            seed: 0,
            field: args.field,
        },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let run = run_rip_sweep(&cfg)?;
    for row in &run.rows {
        println!("m={}: median {:.4}, max {:.4}", row.m, row.median_dev, row.max_dev);
    }
    emit_csv(&run.rows, &cli.out.join("rip.csv"))?;
    run.manifest.write(&cli.out.join("rip_manifest.json"))?;
    report_files(&cli.out, "rip");
    Ok(())
}

fn report_files(dir: &Path, name: &str) {
    eprintln!("wrote {}/{name}.*", dir.display());
}

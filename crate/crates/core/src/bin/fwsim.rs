use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use firewall_percolation::harness::{self, realize, ExperimentConfig, OutputFormats, PolicyEntry};
use firewall_percolation::seed::substream;
use firewall_percolation::{simulate_sir, EpidemicParams, Error, FirewallPolicy, PolicyKind, Result, SpanningRule};

#[derive(Parser)]
#[command(name = "fwsim", version, about = "Spatial firewall percolation and epidemic simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over firewall fractions and policies.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated policy names (random, degree, random-dc, degree-dc).
        #[arg(long, value_delimiter = ',')]
        policies: Option<Vec<PolicyKind>>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        rule: Option<SpanningRule>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
        #[arg(long)]
        no_svg: bool,
    },
    /// One realization; prints the percolation verdict as JSON.
    Single {
        #[command(flatten)]
        realization: RealizationArgs,
        #[arg(long)]
        dump_graph: Option<PathBuf>,
        #[arg(long)]
        dump_layout: Option<PathBuf>,
    },
    /// SIR epidemic on one realization, seeded at a random susceptible device.
    Sir {
        #[command(flatten)]
        realization: RealizationArgs,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        t_max: Option<f64>,
        /// Event log CSV (time,device,transition).
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Renders a results CSV as an SVG chart.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RealizationArgs {
    #[arg(long)]
    fraction: f64,
    #[arg(long)]
    policy: PolicyKind,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    rule: Option<SpanningRule>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn policy_for(config: &ExperimentConfig, kind: PolicyKind) -> Result<FirewallPolicy> {
    let explicit = config.policies.iter().find_map(|e| match *e {
        PolicyEntry::Full { kind: k, min_distance } if k == kind => Some(min_distance),
        _ => None,
    });
    FirewallPolicy::new(kind, explicit.unwrap_or_else(|| config.default_min_distance()))
}

fn realization_setup(args: &RealizationArgs) -> Result<(ExperimentConfig, FirewallPolicy)> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(rule) = args.rule {
        config.spanning_rule = rule;
    }
    config.validate()?;
    let policy = policy_for(&config, args.policy)?;
    Ok((config, policy))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep {
            config,
            policies,
            runs,
            seed,
            rule,
            out,
            workers,
            no_svg,
        } => {
            let mut config = load_config(config.as_deref())?;
            if let Some(list) = policies {
                config.policies = list.into_iter().map(PolicyEntry::from).collect();
            }
            if let Some(n) = runs {
                config.runs_per_point = n;
            }
            if let Some(s) = seed {
                config.master_seed = s;
            }
            if let Some(r) = rule {
                config.spanning_rule = r;
            }
            let result = harness::run_sweep(&config, workers)?;
            let formats = OutputFormats {
                svg: !no_svg,
                ..OutputFormats::default()
            };
            for path in harness::emit_results(&result, &out, formats)? {
                eprintln!("wrote {}", path.display());
            }
            for c in &result.critical {
                let show = |v: Option<f64>| v.map_or("not reached".to_string(), |f| format!("{:.2}%", f * 100.0));
                println!(
                    "{:<10} critical percentage {} (interpolated {}) at threshold {}",
                    c.policy,
                    show(c.fraction),
                    show(c.interpolated),
                    c.threshold
                );
            }
        }
        Command::Single {
            realization,
            dump_graph,
            dump_layout,
        } => {
            let (config, policy) = realization_setup(&realization)?;
            let r = realize(&config.run_params()?, &policy, realization.fraction, realization.seed)?;
            if let Some(path) = dump_graph {
                let file = fs::File::create(&path).map_err(io_err(&path))?;
                r.graph.write_edge_list(BufWriter::new(file)).map_err(io_err(&path))?;
            }
            if let Some(path) = dump_layout {
                let doc = json!({
                    "side_length": config.side_length,
                    "positions": r.graph.positions(),
                    "layout": r.layout,
                });
                fs::write(&path, serde_json::to_string_pretty(&doc)?).map_err(io_err(&path))?;
            }
            let report = &r.outcome.cluster_report;
            let doc = json!({
                "policy": policy.kind,
                "fraction": realization.fraction,
                "seed": realization.seed,
                "spanning_rule": r.outcome.rule,
                "percolates": r.outcome.percolates,
                "wraps_x": r.outcome.wraps_x,
                "wraps_y": r.outcome.wraps_y,
                "num_clusters": report.num_clusters,
                "max_cluster_size": report.max_cluster_size,
                "layout": harness::LayoutSummary::from(&r.layout),
                "edge_count": r.graph.edge_count(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Sir {
            realization,
            beta,
            delta,
            t_max,
            trace,
        } => {
            let (config, policy) = realization_setup(&realization)?;
            let params = EpidemicParams::new(beta, delta, t_max.unwrap_or(f64::INFINITY))?;
            let r = realize(&config.run_params()?, &policy, realization.fraction, realization.seed)?;
            let candidates: Vec<usize> = (0..r.graph.vertex_count())
                .filter(|&v| r.layout.susceptible[v])
                .collect();
            if candidates.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "fraction",
                    reason: "no susceptible device left to seed the epidemic".into(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(substream(realization.seed, 2));
            let seed_device = candidates[rng.random_range(0..candidates.len())];
            let sim = simulate_sir(
                &r.graph,
                &r.layout.susceptible,
                seed_device,
                &params,
                substream(realization.seed, 3),
            )?;
            if let Some(path) = trace {
                let file = fs::File::create(&path).map_err(io_err(&path))?;
                sim.write_csv(BufWriter::new(file))?;
            }
            let doc = json!({
                "summary": sim.summary(),
                "seed_cluster_size": r.outcome.cluster_report.cluster_size_of(seed_device),
                "susceptible_count": candidates.len(),
                "percolates": r.outcome.percolates,
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
        Command::Plot { input, out } => {
            let file = fs::File::open(&input).map_err(io_err(&input))?;
            let rows = harness::read_csv(file)?;
            fs::write(&out, firewall_percolation::plot::render_sweep_svg(&rows)).map_err(io_err(&out))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fwsim: {e}");
            ExitCode::FAILURE
        }
    }
}

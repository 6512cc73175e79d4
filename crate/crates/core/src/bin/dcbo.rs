use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use dcbo::engine::{CostVector, PenaltyPolicy, Policy};
use dcbo::harness::{plot_directory, run_experiment, ExperimentSpec};
use dcbo::problems::{certify_optimum, problem_uncertified, Sense, CERTIFY_RESOLUTION};

#[derive(Parser)]
#[command(name = "dcbo", version, about = "Constrained Bayesian optimisation benchmarks with decoupled evaluations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicated experiments and write CSV results and charts.
    Run(Box<RunArgs>),
    /// Certify the true constrained optimum of a benchmark problem.
    Certify {
        #[arg(long)]
        problem: String,
        #[arg(long, default_value_t = CERTIFY_RESOLUTION)]
        resolution: usize,
    },
    /// Re-aggregate an experiment directory and redraw its charts.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// Policy name, or a comma separated list.
    #[arg(long, value_delimiter = ',')]
    policy: Vec<String>,
    /// Budget in cost units (initial design excluded unless configured).
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma separated task costs, objective first.
    #[arg(long)]
    costs: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_coupled_ckg: bool,
    #[arg(long, value_parser = ["zero", "min-posterior"])]
    penalty: Option<String>,
    /// Search effort preset: desk or reference.
    #[arg(long)]
    preset: Option<String>,
    /// Initial design size.
    #[arg(long)]
    init: Option<usize>,
    #[arg(long, value_parser = ["maximize", "minimize-written"])]
    sense: Option<String>,
}

fn build_spec(a: RunArgs) -> dcbo::Result<ExperimentSpec> {
    let mut spec = match &a.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => {
            let missing = |what: &str| dcbo::Error::InvalidArgument(format!("--{what} is required without --config"));
            let problem = a.problem.clone().ok_or_else(|| missing("problem"))?;
            let budget = a.budget.ok_or_else(|| missing("budget"))?;
            let out = a.out.clone().ok_or_else(|| missing("out"))?;
            if a.policy.is_empty() {
                return Err(missing("policy"));
            }
            ExperimentSpec::new(&problem, Vec::new(), budget, out)
        }
    };
    if let Some(p) = a.problem {
        spec.problem = p;
    }
    if !a.policy.is_empty() {
        spec.policies = a.policy.iter().map(|p| p.parse::<Policy>()).collect::<dcbo::Result<_>>()?;
    }
    if let Some(b) = a.budget {
        spec.budget = b;
    }
    if let Some(r) = a.reps {
        spec.replications = r;
    }
    if let Some(s) = a.seed {
        spec.base_seed = s;
    }
    if let Some(c) = a.costs {
        spec.costs = Some(c.parse::<CostVector>()?);
    }
    if let Some(o) = a.out {
        spec.output = o;
    }
    if a.no_coupled_ckg {
        spec.include_coupled_ckg = false;
    }
    if let Some(p) = a.penalty {
        spec.penalty = p.parse::<PenaltyPolicy>()?;
    }
    if let Some(p) = a.preset {
        spec.preset = p;
        spec.engine = None;
    }
    if let Some(n) = a.init {
        spec.initial_design_size = n;
    }
    if let Some(s) = a.sense {
        spec.sense = Some(if s == "maximize" { Sense::Maximize } else { Sense::MinimizeWritten });
    }
    Ok(spec)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => build_spec(*args).and_then(|spec| {
            let outcome = run_experiment(&spec)?;
            for r in &outcome.results {
                if let Some(c) = &r.curve {
                    println!(
                        "{:<16} runs {:>3}  failed {:>3}  final median OC {:.6}",
                        r.policy.name(),
                        r.runs.len(),
                        r.failures.len(),
                        c.median.last().copied().unwrap_or(f64::NAN)
                    );
                }
            }
            info!("wrote {} files to {}", outcome.files.len(), spec.output.display());
            Ok(())
        }),
        Command::Certify { problem, resolution } => {
            problem_uncertified(&problem).and_then(|p| certify_optimum(&p, resolution).map(|c| (p, c))).map(|(p, c)| {
                let cons = p.constraints(&c.x).unwrap_or_default();
                println!("problem      {}", p.name());
                println!("sense        {:?}", p.sense());
                println!(
                    "grid         {}^{} best {} at {:?}",
                    c.grid_resolution,
                    p.dim(),
                    c.best_grid_value,
                    c.best_grid_point
                );
                println!("refinement   {:?}", c.refinement);
                println!("optimum      {} at {:?}", c.value, c.x);
                println!("constraints  {cons:?}");
            })
        }
        Command::Plot { input } => plot_directory(&input).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ard_core::distortion::{Distortion, Metric};
use ard_core::experiment::{
    format_sig, front_csv, load_object, resume_experiment, run_experiment, AlphabetChoice,
    ExperimentReport, ExperimentSpec, DEFAULT_SIDE_INFO_CAP,
};
use ard_core::image::{load_pgm, naive_denoise, save_pgm};
use ard_core::oracle::{exhaustive_front, OracleLimit};
use ard_core::pareto::Objective;
use ard_core::search::SearchConfig;
use ard_core::spheres::{log_sphere, Exactness};

#[derive(Parser)]
#[command(name = "ard", version, about = "Algorithmic rate-distortion search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for the rate-distortion front of an input.
    Run(RunArgs),
    /// Continue a run from its checkpoint.
    Resume {
        #[arg(long)]
        checkpoint: PathBuf,
        /// New total iteration budget.
        #[arg(long)]
        iterations: Option<u64>,
    },
    /// Exhaustive front over all short strings (small inputs only).
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        metric: Metric,
        #[arg(long, default_value = "bytes")]
        alphabet: AlphabetChoice,
        /// Largest number of candidates to enumerate.
        #[arg(long, default_value_t = OracleLimit::default().0)]
        limit: u128,
    },
    /// Log2 size of a distortion sphere.
    Sphere {
        #[arg(long)]
        metric: Metric,
        #[arg(long)]
        n: u64,
        /// Radius; squared distance for euclidean.
        #[arg(long)]
        a: u64,
        /// Alphabet size; defaults to 2 for hamming and 256 otherwise.
        #[arg(long)]
        sigma_size: Option<u64>,
    },
    /// Majority-vote denoiser for monochrome PGM images.
    DenoiseNaive {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    metric: Metric,
    #[arg(long)]
    side_info: Option<PathBuf>,
    #[arg(long)]
    original: Option<PathBuf>,
    #[arg(long, requires = "height")]
    width: Option<usize>,
    #[arg(long, requires = "width")]
    height: Option<usize>,
    #[arg(long, conflicts_with = "evaluations")]
    iterations: Option<u64>,
    /// Offspring budget, converted to whole iterations.
    #[arg(long)]
    evaluations: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    checkpoint_every: Option<u64>,
    #[arg(long, default_value = "bytes")]
    alphabet: AlphabetChoice,
    #[arg(long, default_value_t = DEFAULT_SIDE_INFO_CAP)]
    side_info_cap: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    offspring: Option<usize>,
    #[arg(long)]
    small_mutation_prob: Option<f64>,
    #[arg(long)]
    geometric_mean: Option<f64>,
    #[arg(long)]
    gaussian_sigma: Option<f64>,
    #[arg(long)]
    crossover_fraction: Option<f64>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

impl RunArgs {
    fn into_spec(self) -> ExperimentSpec {
        let d = SearchConfig::default();
        let mut search = SearchConfig {
            alpha: self.alpha.unwrap_or(d.alpha),
            small_mutation_prob: self.small_mutation_prob.unwrap_or(d.small_mutation_prob),
            geometric_mean: self.geometric_mean.unwrap_or(d.geometric_mean),
            gaussian_sigma: self.gaussian_sigma.unwrap_or(d.gaussian_sigma),
            offspring_per_iteration: self.offspring.unwrap_or(d.offspring_per_iteration),
            crossover_fraction: self.crossover_fraction.unwrap_or(d.crossover_fraction),
            seed: self.seed,
            max_iterations: self.iterations.unwrap_or(d.max_iterations),
            time_budget_secs: self.time_budget,
            checkpoint_every: self.checkpoint_every.unwrap_or(d.checkpoint_every),
        };
        if let Some(e) = self.evaluations {
            search.max_iterations = search.iterations_for(e);
        }
        ExperimentSpec {
            side_info: self.side_info,
            original: self.original,
            width: self.width,
            height: self.height,
            alphabet: self.alphabet,
            side_info_cap: self.side_info_cap,
            search,
            ..ExperimentSpec::new(self.input, self.metric, self.out)
        }
    }
}

fn print_report(r: &ExperimentReport) {
    println!("iterations: {}", r.iterations);
    println!("evaluations: {}", r.evaluations);
    println!("front_points: {}", r.points.len());
    println!("input_codelength_bits: {}", format_sig(r.input_codelength));
    println!(
        "mss: rate_bits={} distortion={} three_part_codelength_bits={}",
        format_sig(r.mss.rate),
        format_sig(r.mss.display_distortion),
        format_sig(r.mss.three_part_codelength)
    );
    if let Some(b) = &r.best {
        println!(
            "best: rate_bits={} distortion_to_original={}",
            format_sig(b.rate),
            format_sig(b.distortion_to_original.unwrap_or(f64::NAN))
        );
    }
    println!("output: {}", r.out_dir.display());
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => {
            let report = run_experiment(&args.into_spec())?;
            print_report(&report);
        }
        Command::Resume { checkpoint, iterations } => {
            let report = resume_experiment(&checkpoint, iterations)
                .with_context(|| format!("resuming from {}", checkpoint.display()))?;
            print_report(&report);
        }
        Command::Oracle {
            input,
            metric,
            alphabet,
            limit,
        } => {
            let x = load_object(&input, None, None)?.bytes;
            if x.is_empty() {
                bail!("{} is empty", input.display());
            }
            let alphabet = alphabet.resolve(&x)?;
            let objective = Objective::new(x, metric, Vec::new(), alphabet.size() as u64);
            let front = exhaustive_front(&objective, alphabet, OracleLimit(limit))?;
            print!("{}", front_csv(metric, &front));
        }
        Command::Sphere {
            metric,
            n,
            a,
            sigma_size,
        } => {
            let sigma = sigma_size.unwrap_or(match metric {
                Metric::Hamming => 2,
                _ => 256,
            });
            let s = log_sphere(Distortion::new(metric, a), n, sigma)?;
            let kind = match s.exactness {
                Exactness::Exact => "exact",
                Exactness::UpperBound => "upper_bound",
            };
            println!("{} {kind}", format_sig(s.log2_size));
        }
        Command::DenoiseNaive { input, out } => {
            let grid = load_pgm(&input)?;
            save_pgm(&naive_denoise(&grid)?, &out)?;
        }
    }
    Ok(())
}

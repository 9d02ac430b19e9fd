use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use oscillab::config::read_config_file;
use oscillab::{replay, reproduces, run, Experiment, ExperimentConfig, OutputFormat, ResultRecord};

#[derive(Parser)]
#[command(name = "oscillab", version, about = "Harmonic-oscillator spectral multiplier experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantized Peetre symbol against f(L) on the Hermite window.
    VerifyPeetre(RunArgs),
    /// Laguerre series, Fourier pair, twisted heat semigroup, Gaussian bound.
    VerifyHeat(RunArgs),
    /// Ladder algebra, translations, generators and Weyl relations on the Fock space.
    VerifyFock(RunArgs),
    /// Randomized dyadic square function of normalized heat differences.
    SquareFunctionCheck(RunArgs),
    /// A^{p,q} lower bounds against Hormander norms across a multiplier family.
    MihlinSweep(RunArgs),
    /// Maximal function over a geometric t-grid against the dyadic Hormander sum.
    MaximalSweep(RunArgs),
    /// Fock and twisted-Laplacian norms of the same multiplier.
    TransferenceCheck(RunArgs),
    /// Re-runs a saved record from its embedded configuration and compares the metrics.
    Replay {
        record: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Every flag is also a config-file key; flags override the file.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    fock_dim: Option<String>,
    #[arg(long)]
    grid_extent: Option<String>,
    #[arg(long)]
    grid_step: Option<String>,
    #[arg(long)]
    phase_extent: Option<String>,
    #[arg(long)]
    phase_step: Option<String>,
    #[arg(long)]
    peetre_terms: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    twisted_extent: Option<String>,
    #[arg(long)]
    twisted_step: Option<String>,
    /// Multiplier spec such as `heat:t=0.5`; repeat for a list.
    #[arg(long)]
    mult: Vec<String>,
    /// Exponent p; pairs with the q at the same position.
    #[arg(long)]
    p: Vec<String>,
    #[arg(long)]
    q: Vec<String>,
    #[arg(long)]
    s: Option<String>,
    /// Geometric grid `lo:hi:ratio`.
    #[arg(long)]
    t_grid: Option<String>,
    /// Square-function scale; repeat for a list.
    #[arg(long)]
    scale: Vec<String>,
    /// Number of dyadic terms; repeat for a list.
    #[arg(long)]
    terms: Vec<String>,
    #[arg(long)]
    draws: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    #[arg(long)]
    quad_extent: Option<String>,
    #[arg(long)]
    quad_step: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// json or csv.
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut pairs = Vec::new();
        let singles = [
            ("d", &self.d),
            ("fock-dim", &self.fock_dim),
            ("grid-extent", &self.grid_extent),
            ("grid-step", &self.grid_step),
            ("phase-extent", &self.phase_extent),
            ("phase-step", &self.phase_step),
            ("peetre-terms", &self.peetre_terms),
            ("window", &self.window),
            ("twisted-extent", &self.twisted_extent),
            ("twisted-step", &self.twisted_step),
            ("s", &self.s),
            ("t-grid", &self.t_grid),
            ("draws", &self.draws),
            ("samples", &self.samples),
            ("trials", &self.trials),
            ("max-iter", &self.max_iter),
            ("quad-extent", &self.quad_extent),
            ("quad-step", &self.quad_step),
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
        ];
        for (key, value) in singles {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        let lists = [("mult", &self.mult), ("p", &self.p), ("q", &self.q), ("scale", &self.scale), ("terms", &self.terms)];
        for (key, values) in lists {
            pairs.extend(values.iter().map(|v| (key.to_string(), v.clone())));
        }
        pairs
    }

    fn resolve(&self, experiment: Experiment) -> oscillab::Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::defaults(experiment);
        if let Some(path) = &self.config {
            cfg.apply_pairs(&read_config_file(path)?)?;
        }
        cfg.apply_pairs(&self.pairs())?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit(record: &ResultRecord, out: Option<&Path>, format: OutputFormat) -> oscillab::Result<()> {
    match out {
        Some(path) => {
            record.save(path)?;
            if format == OutputFormat::Csv {
                for file in record.save_tables(path)? {
                    eprintln!("wrote {}", file.display());
                }
            }
        }
        None => {
            println!("{}", record.to_json()?);
            if format == OutputFormat::Csv {
                for (name, table) in record.tables() {
                    println!("# {name}");
                    table.write_csv(std::io::stdout())?;
                }
            }
        }
    }
    Ok(())
}

fn summarize(record: &ResultRecord) {
    let total = record.assertions.len();
    let failed: Vec<_> = record.failures().collect();
    eprintln!(
        "{}: {}/{} assertions pass in {:.2} s",
        record.experiment,
        total - failed.len(),
        total,
        record.runtime_seconds
    );
    for a in failed {
        eprintln!("  FAIL {} (observed {:e}, tolerance {:e})", a.name, a.observed, a.tolerance);
    }
}

fn execute(cli: Cli) -> oscillab::Result<bool> {
    let (experiment, args) = match cli.command {
        Command::Replay { record, out } => {
            let saved = ResultRecord::load(&record)?;
            let fresh = replay(&saved)?;
            let same = reproduces(&saved, &fresh)?;
            eprintln!("replay of {}: metrics {}", saved.experiment, if same { "reproduced bit for bit" } else { "DIFFER" });
            summarize(&fresh);
            emit(&fresh, out.as_deref(), OutputFormat::Json)?;
            return Ok(same && fresh.passed());
        }
        Command::VerifyPeetre(a) => (Experiment::VerifyPeetre, a),
        Command::VerifyHeat(a) => (Experiment::VerifyHeat, a),
        Command::VerifyFock(a) => (Experiment::VerifyFock, a),
        Command::SquareFunctionCheck(a) => (Experiment::SquareFunctionCheck, a),
        Command::MihlinSweep(a) => (Experiment::MihlinSweep, a),
        Command::MaximalSweep(a) => (Experiment::MaximalSweep, a),
        Command::TransferenceCheck(a) => (Experiment::TransferenceCheck, a),
    };
    let cfg = args.resolve(experiment)?;
    let record = run(&cfg)?;
    summarize(&record);
    emit(&record, cfg.out.as_deref().map(Path::new), cfg.format)?;
    Ok(record.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eigenprep::harness::{self, ExperimentConfig, FineGrid, RunReport};
use eigenprep::phase_estimation::write_counts_csv;
use eigenprep::{Error, PotentialSpec, Result};

#[derive(Parser)]
#[command(name = "eigenprep", version, about = "Coarse-to-fine eigenvector preparation and phase-estimation statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline once per coarse size and report overlaps and outcome statistics.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Write the outcome distribution (j,p_j) of the first coarse size here.
        #[arg(long)]
        distribution: Option<PathBuf>,
        /// Write the spectral instance of the first coarse size here as JSON.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Sweep coarse sizes and fit the failure decay.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Sample measurement outcomes and compare the hit rate with its floor.
    Sample {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every invariant suite.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags given explicitly override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// zero, quad:c, or file:path.
    #[arg(long)]
    potential: Option<PotentialSpec>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated coarse sizes.
    #[arg(long, value_delimiter = ',')]
    n0: Option<Vec<usize>>,
    /// Doublings from coarse to fine grid.
    #[arg(long, conflicts_with = "fine_n")]
    s: Option<u32>,
    /// Fixed fine-grid size for every coarse size.
    #[arg(long)]
    fine_n: Option<usize>,
    /// Target accuracy in bits.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Explicit register size.
    #[arg(long)]
    b: Option<u32>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let fine = match (self.s, self.fine_n) {
            (Some(s), _) => Some(FineGrid::Doublings(s)),
            (_, Some(n)) => Some(FineGrid::FixedN(n)),
            _ => None,
        };
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_json_path(path)?,
            None => ExperimentConfig::new(
                self.potential.clone().unwrap_or(PotentialSpec::Zero),
                0,
                self.n0
                    .clone()
                    .ok_or_else(|| invalid("--n0 is required without --config"))?,
                fine.ok_or_else(|| invalid("one of --s or --fine-n is required without --config"))?,
            ),
        };
        if let Some(p) = &self.potential {
            config.potential = p.clone();
        }
        if let Some(n0) = &self.n0 {
            config.n0_list = n0.clone();
        }
        if let Some(fine) = fine {
            config.fine = fine;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(bits) = self.bits {
            config.qpe.bits = bits;
        }
        if let Some(eps) = self.epsilon {
            config.qpe.epsilon = eps;
        }
        if self.b.is_some() {
            config.qpe.b = self.b;
        }
        if let Some(shots) = self.shots {
            config.shots = shots;
        }
        if let Some(seed) = self.seed {
            config.rng_seed = seed;
        }
        config.validate()?;
        Ok(config)
    }
}

fn invalid(msg: &str) -> Error {
    Error::InvalidArgument(msg.to_string())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::from(e).context(format!("creating {}", p.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::from(e).context(format!("creating {}", path.display())))
}

fn write_report(report: &RunReport, output: &OutputArgs) -> Result<()> {
    let mut out = open_output(output.out.as_deref())?;
    match output.format {
        Format::Csv => report.write_csv(&mut out)?,
        Format::Json => {
            report.write_json(&mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn solve(run: &RunArgs, distribution: Option<&Path>, instance: Option<&Path>) -> Result<()> {
    let config = run.config()?;
    let report = harness::run_pipeline(&config)?;
    for r in &report.records {
        eprintln!(
            "N0 = {}, N = {}: success {:.6}, failure {:.3e}, b = {}, eigenvalue {:.6} (error {:.3e})",
            r.overlap.n0,
            r.overlap.n,
            r.overlap.success_probability,
            r.overlap.failure,
            r.b,
            r.eigenvalue_estimate,
            r.eigenvalue_error
        );
    }
    write_report(&report, &run.output)?;
    if let Some(path) = distribution {
        let dist = report.records[0].distribution.as_ref().expect("distribution kept");
        let mut w = create(path)?;
        dist.write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(path) = instance {
        let (inst, _) = harness::point_instance(&config, report.records[0].overlap.n0)?;
        let mut w = create(path)?;
        inst.to_json_writer(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn sweep(run: &RunArgs) -> Result<()> {
    let result = harness::sweep_and_fit(&run.config()?)?;
    eprintln!(
        "slope {:.4} over {} points, threshold N0 = {}",
        result.fit.slope,
        result.fit.points_used,
        result
            .threshold_n0
            .map_or_else(|| "none".to_string(), |n| n.to_string())
    );
    let mut out = open_output(run.output.out.as_deref())?;
    match run.output.format {
        Format::Csv => result.write_csv(&mut out)?,
        Format::Json => {
            result.write_json(&mut out)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn sample(run: &RunArgs) -> Result<()> {
    let mut config = run.config()?;
    if config.shots == 0 {
        config.shots = 1000;
    }
    if run.output.format == Format::Csv && config.n0_list.len() != 1 {
        return Err(invalid("counts CSV output takes exactly one coarse size"));
    }
    let report = harness::run_pipeline(&config)?;
    let mut out = open_output(run.output.out.as_deref())?;
    match run.output.format {
        Format::Csv => {
            let stats = report.records[0].shots.as_ref().expect("shots requested");
            write_counts_csv(&stats.counts, &mut out)?;
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = report
                .records
                .iter()
                .map(|r| {
                    let stats = r.shots.as_ref().expect("shots requested");
                    let mut value = serde_json::to_value(stats).expect("plain data");
                    value["N0"] = r.overlap.n0.into();
                    value["N"] = r.overlap.n.into();
                    value["b"] = r.b.into();
                    value["counts"] = stats.counts.clone().into();
                    value
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &rows)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    for r in &report.records {
        let stats = r.shots.as_ref().expect("shots requested");
        eprintln!(
            "N0 = {}: rate {:.4}, floor {:.4}, sigma {:.2e}",
            r.overlap.n0, stats.success_rate, stats.predicted_floor, stats.sigma
        );
        if !stats.within_margin {
            return Err(Error::InvariantViolation {
                name: "end-to-end success rate".into(),
                detail: format!(
                    "N0 = {}: rate {} below floor {} - 3 sigma ({})",
                    r.overlap.n0, stats.success_rate, stats.predicted_floor, stats.sigma
                ),
            });
        }
    }
    Ok(())
}

fn check(seed: u64, output: &OutputArgs) -> Result<()> {
    let outcomes = harness::checks::run_all(seed);
    let mut out = open_output(output.out.as_deref())?;
    match output.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["suite", "passed", "detail"])?;
            for o in &outcomes {
                w.write_record([o.name, if o.passed { "true" } else { "false" }, &o.detail])?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &outcomes)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    for o in &outcomes {
        eprintln!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    match outcomes.iter().find(|o| !o.passed) {
        Some(o) => Err(Error::InvariantViolation {
            name: o.name.into(),
            detail: o.detail.clone(),
        }),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve {
            run,
            distribution,
            instance,
        } => solve(run, distribution.as_deref(), instance.as_deref()),
        Command::Sweep { run } => sweep(run),
        Command::Sample { run } => sample(run),
        Command::Check { seed, output } => check(*seed, output),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mmv_cli::output::{write_obj, write_report};
use mmv_cli::{
    run_comparison, run_convergence, run_resolution_sweep, run_single, Condition, DataSource, ExperimentConfig,
    NumericalFailure, Report,
};
use mmv_core::data::Illuminant;
use mmv_core::mmv::MmvMethod;

#[derive(Parser)]
#[command(name = "mmv", version, about = "Metamer mismatch volume experiments")]
struct Cli {
    /// Worker threads (default: all cores; 1 disables parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LP volumes across wavelength resolutions.
    ResolutionSweep(Common),
    /// Volumes against the number of sampled directions.
    Convergence(Common),
    /// Baseline vs LP vs half-space volumes with containment checks.
    Compare(Common),
    /// Writes one hull as an OBJ mesh.
    ExportMesh(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Illuminant of the first system; all ordered pairs when neither is given.
    #[arg(long)]
    phi_illuminant: Option<Illuminant>,
    #[arg(long)]
    psi_illuminant: Option<Illuminant>,
    /// Flat grey reflectance levels.
    #[arg(long, value_delimiter = ',')]
    grey: Option<Vec<f64>>,
    /// Wavelength steps in nm.
    #[arg(long = "step-nm", value_delimiter = ',')]
    step_nm: Option<Vec<f64>>,
    /// Direction counts (LP) or seed counts (baseline).
    #[arg(long, value_delimiter = ',')]
    samples: Option<Vec<usize>>,
    /// Direction counts for the half-space methods.
    #[arg(long, value_delimiter = ',')]
    halfspace_samples: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<MmvMethod>>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory (a file path for `export-mesh`).
    #[arg(long)]
    out: PathBuf,
    /// Also write per-run wall times to `timings.csv`.
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn pairs(&self) -> Vec<(Illuminant, Illuminant)> {
        match (self.phi_illuminant, self.psi_illuminant) {
            (Some(a), Some(b)) => vec![(a, b)],
            (Some(a), None) => Illuminant::ALL.into_iter().filter(|&b| b != a).map(|b| (a, b)).collect(),
            (None, Some(b)) => Illuminant::ALL.into_iter().filter(|&a| a != b).map(|a| (a, b)).collect(),
            (None, None) => ExperimentConfig::all_pairs(),
        }
    }

    fn config(&self, steps: &[f64], samples: &[usize], halfspace: &[usize], methods: &[MmvMethod]) -> ExperimentConfig {
        ExperimentConfig {
            pairs: self.pairs(),
            greys: self.grey.clone().unwrap_or_else(|| vec![0.5, 0.7, 0.9]),
            steps_nm: self.step_nm.clone().unwrap_or_else(|| steps.to_vec()),
            methods: self.method.clone().unwrap_or_else(|| methods.to_vec()),
            samples: self.samples.clone().unwrap_or_else(|| samples.to_vec()),
            halfspace_samples: self.halfspace_samples.clone().unwrap_or_else(|| halfspace.to_vec()),
            seed: self.seed,
            data: DataSource::from_env(),
        }
    }
}

fn write_timings(report: &Report, dir: &Path) -> Result<()> {
    let mut f = fs::File::create(dir.join("timings.csv"))?;
    writeln!(f, "experiment,phi,psi,grey,step_nm,method,samples,seconds")?;
    for r in &report.records {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{}",
            r.experiment,
            r.condition.phi,
            r.condition.psi,
            r.condition.grey,
            r.condition.step_nm,
            r.method,
            r.samples,
            r.elapsed.as_secs_f64()
        )?;
    }
    Ok(())
}

fn finish(report: Report, args: &Common) -> Result<()> {
    write_report(&report, &args.out)?;
    if args.timings {
        write_timings(&report, &args.out)?;
    }
    for r in &report.records {
        eprintln!(
            "{} {}->{} grey {} step {} nm {} n={}: volume {:.6e} ({:.2} s)",
            r.experiment,
            r.condition.phi,
            r.condition.psi,
            r.condition.grey,
            r.condition.step_nm,
            r.method,
            r.samples,
            r.volume,
            r.elapsed.as_secs_f64()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    use MmvMethod::*;
    match cli.command {
        Command::ResolutionSweep(args) => {
            let cfg = args.config(&[0.5, 1.0, 2.0, 5.0, 10.0], &[100, 1000, 10_000], &[], &[LpOrthonormal]);
            finish(run_resolution_sweep(&cfg)?, &args)
        }
        Command::Convergence(args) => {
            let cfg = args.config(
                &[1.0],
                &[10, 100, 1000, 10_000],
                &[10_000, 100_000, 1_000_000],
                &[LpOriginal, LpOrthonormal, HalfspaceOriginal, HalfspaceOrthonormal],
            );
            finish(run_convergence(&cfg)?, &args)
        }
        Command::Compare(args) => {
            let cfg = args.config(&[1.0], &[10_000], &[1_000_000], &[]);
            finish(run_comparison(&cfg)?, &args)
        }
        Command::ExportMesh(args) => {
            let cond = Condition {
                phi: args.phi_illuminant.unwrap_or(Illuminant::D65),
                psi: args.psi_illuminant.unwrap_or(Illuminant::A),
                grey: args.grey.as_ref().and_then(|g| g.first().copied()).unwrap_or(0.5),
                step_nm: args.step_nm.as_ref().and_then(|s| s.first().copied()).unwrap_or(1.0),
            };
            let method = args.method.as_ref().and_then(|m| m.first().copied()).unwrap_or(LpOrthonormal);
            let samples = args.samples.as_ref().and_then(|s| s.first().copied()).unwrap_or(1000);
            let record = run_single(cond, method, samples, args.seed, &DataSource::from_env())?;
            let result = record.result.as_ref().expect("fresh run keeps its result");
            if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            write_obj(&result.hull, &args.out)?;
            eprintln!("volume {:.6e}, {} vertices", record.volume, record.hull_vertices);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<NumericalFailure>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use igrlab::cli_io::{self, Config};
use igrlab::dg1d::Mesh1D;
use igrlab::linwave::{PhaseSpeedSetup, measure_phase_speed};
use igrlab::models::{Model, ModelKind, ModelParams};
use igrlab::opcheck::{SuiteSizes, run_suite};
use igrlab::{Error, Result};

#[derive(Parser)]
#[command(name = "igrlab", version, about = "1D DG solver for regularized compressible Euler models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more configs, writing snapshots and diagnostics.
    Run {
        /// Config files; an empty set runs the defaults.
        configs: Vec<PathBuf>,
        /// Output directory (one subdirectory per config when several are given).
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        /// `key=value` overrides applied to every config.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Print the resolved config and exit.
        #[arg(long)]
        echo: bool,
    },
    /// Measure the phase speed of a small acoustic mode.
    Dispersion {
        #[arg(long, default_value = "IGR")]
        model: ModelKind,
        #[arg(long, default_value_t = 256)]
        n_cells: usize,
        #[arg(long, default_value_t = 1)]
        k_mode: i32,
        /// Absolute regularization strength.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
    },
    /// Randomized checks of the continuous elliptic operators.
    Opcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run a tenth of the default instance counts.
        #[arg(long)]
        quick: bool,
    },
    /// Column-wise L1/L2/Linf differences between two snapshot CSVs.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail (exit 1) when any Linf difference exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
}

enum Failure {
    Validation(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn load(path: Option<&PathBuf>, overrides: &[String]) -> Result<Config> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => String::new(),
    };
    Config::parse_with_overrides(&text, overrides)
}

fn run_one(config: &Config, out: &PathBuf) -> Result<()> {
    let summary = cli_io::run_to_dir(config, out)?;
    let last = summary.outcome.diagnostics.last();
    println!(
        "{} n={} steps={} t={:.6} snapshots={} mass={:.16e} energy={:.16e} -> {}",
        config.model,
        config.n_cells,
        summary.outcome.steps,
        summary.outcome.state.time,
        summary.snapshots.len(),
        last.map_or(f64::NAN, |r| r.total_mass),
        last.map_or(f64::NAN, |r| r.total_energy),
        out.display()
    );
    Ok(())
}

fn execute(cli: Cli) -> std::result::Result<(), Failure> {
    match cli.command {
        Command::Run {
            configs,
            out,
            overrides,
            echo,
        } => {
            let loaded: Vec<(Config, PathBuf)> = if configs.is_empty() {
                vec![(load(None, &overrides)?, out.clone())]
            } else {
                let many = configs.len() > 1;
                configs
                    .iter()
                    .map(|p| {
                        let dir = if many {
                            out.join(p.file_stem().unwrap_or_default())
                        } else {
                            out.clone()
                        };
                        load(Some(p), &overrides).map(|c| (c, dir))
                    })
                    .collect::<Result<_>>()?
            };
            if echo {
                for (c, _) in &loaded {
                    print!("{}", c.echo());
                }
                return Ok(());
            }
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = cli_io::threads_from_env()? {
                pool = pool.num_threads(n);
            }
            let pool = pool
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            let results: Vec<Result<()>> =
                pool.install(|| loaded.par_iter().map(|(c, dir)| run_one(c, dir)).collect());
            // Report the first numerical failure ahead of input errors.
            let mut errors: Vec<Error> = results.into_iter().filter_map(|r| r.err()).collect();
            errors.sort_by_key(|e| !e.is_numerical());
            match errors.into_iter().next() {
                Some(e) => Err(e.into()),
                None => Ok(()),
            }
        }
        Command::Dispersion {
            model,
            n_cells,
            k_mode,
            alpha,
            gamma,
        } => {
            let mesh = Mesh1D::unit(n_cells)?;
            let m = Model::new(ModelParams::new(model, alpha, gamma)?, &mesh)?;
            let setup = PhaseSpeedSetup {
                k_mode,
                ..PhaseSpeedSetup::default()
            };
            let r = measure_phase_speed(&m, &setup)?;
            println!("model,n_cells,k_mode,alpha,measured,analytic,rel_err");
            println!(
                "{model},{n_cells},{k_mode},{alpha:e},{:.12e},{:.12e},{:.3e}",
                r.speed,
                r.analytic_speed,
                r.rel_err()
            );
            Ok(())
        }
        Command::Opcheck { seed, quick } => {
            let mut sizes = SuiteSizes::default();
            if quick {
                sizes = SuiteSizes {
                    max_principle: sizes.max_principle / 10,
                    commutation: sizes.commutation / 10,
                    strain: sizes.strain / 10,
                    matrix_reduce: sizes.matrix_reduce / 10,
                };
            }
            let reports = run_suite(seed, sizes)?;
            let mut all = true;
            for r in &reports {
                all &= r.passed();
                println!(
                    "{} {:<14} instances={:<6} worst={:.3e} tol={:.0e} seed={} {:.2}s",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.instances,
                    r.worst,
                    r.tolerance,
                    r.seed,
                    r.seconds
                );
            }
            if all {
                Ok(())
            } else {
                Err(Failure::Validation("operator checks failed".into()))
            }
        }
        Command::Compare { a, b, tol } => {
            let norms = cli_io::compare_csv(&a, &b)?;
            print!("{}", cli_io::compare_report(&norms));
            match tol {
                Some(t) if norms.iter().any(|n| !(n.linf <= t)) => {
                    Err(Failure::Validation(format!("Linf difference exceeds {t}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

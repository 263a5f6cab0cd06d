use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use v2rdm::records::{gnuplot_script, Condition, CsvSink, RunRecord};
use v2rdm::sweep::{self, parse_grid, PMode, SolverConfig};
use v2rdm_core::{RingParams, SolverSettings};

/// Variational lower bounds on ground-state energies from (2,p)-positivity.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the ring model over kappa/tau.
    Ring {
        #[command(flatten)]
        ring: RingArgs,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Bound the Hamiltonian stored in an FCIDUMP file.
    Fcidump {
        path: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Exact diagonalization only, for the ring sweep or an FCIDUMP file.
    Fci {
        #[command(flatten)]
        ring: RingArgs,
        /// Diagonalize this FCIDUMP instead of the ring.
        #[arg(long)]
        fcidump: Option<PathBuf>,
        /// Restrict to this particle-number sector.
        #[arg(long = "number-constraint", value_name = "N0")]
        number_constraint: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct RingArgs {
    /// Number of sites.
    #[arg(long, default_value_t = 6)]
    r: usize,
    #[arg(long, default_value_t = -0.2, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    delta: f64,
    /// kappa/tau values as start:stop:step, both ends inclusive.
    #[arg(long = "kappa-grid", default_value = "0:2:0.25", allow_hyphen_values = true)]
    kappa_grid: String,
}

impl RingArgs {
    fn params(&self) -> RingParams {
        RingParams {
            sites: self.r,
            mu: self.mu,
            tau: self.tau,
            delta: self.delta,
            kappa: 0.0,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Repeatable: 2_2, 2_3_partial, 2_3_full, fci.
    #[arg(long = "condition", value_name = "NAME")]
    conditions: Vec<Condition>,
    /// Gram basis degrees: all up to p, or exactly p.
    #[arg(long = "p-mode", default_value = "up-to")]
    p_mode: PMode,
    /// Select the N0 sector through a variance penalty.
    #[arg(long = "number-constraint", value_name = "N0")]
    number_constraint: Option<f64>,
    /// Relative residual and gap tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 200_000)]
    max_iter: usize,
    /// Seed for the weak-duality spot check.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[command(flatten)]
    output: OutputArgs,
}

impl SolveArgs {
    fn conditions(&self) -> Vec<Condition> {
        if self.conditions.is_empty() {
            vec![Condition::Fci, Condition::TwoTwo, Condition::TwoThreeFull]
        } else {
            self.conditions.clone()
        }
    }

    fn config(&self) -> anyhow::Result<SolverConfig> {
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        Ok(SolverConfig {
            settings: SolverSettings::default()
                .with_tolerance(self.tol)
                .with_max_iter(self.max_iter),
            p_mode: self.p_mode,
            seed: self.seed,
            threads: self.threads.max(1),
        })
    }
}

#[derive(Args)]
struct OutputArgs {
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (`<out>.gp`).
    #[arg(long, requires = "out")]
    plot: bool,
}

impl OutputArgs {
    fn sink(&self) -> anyhow::Result<CsvSink<Box<dyn Write>>> {
        let writer: Box<dyn Write> = match &self.out {
            Some(path) => Box::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            ),
            None => Box::new(io::stdout().lock()),
        };
        Ok(CsvSink::new(writer)?)
    }

    fn finish(&self, sink: CsvSink<Box<dyn Write>>, conditions: &[Condition]) -> anyhow::Result<()> {
        sink.into_inner()?.flush()?;
        if let (true, Some(csv)) = (self.plot, &self.out) {
            let script = plot_path(csv);
            std::fs::write(&script, gnuplot_script(csv, conditions))
                .with_context(|| format!("writing {}", script.display()))?;
        }
        Ok(())
    }
}

fn plot_path(csv: &Path) -> PathBuf {
    let mut name = csv.as_os_str().to_owned();
    name.push(".gp");
    PathBuf::from(name)
}

fn stream<'a, W: Write>(
    sink: &'a mut CsvSink<W>,
) -> impl FnMut(&RunRecord) -> sweep::Result<()> + 'a {
    move |r| Ok(sink.write(r)?)
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Ring { ring, solve } => {
            let grid = parse_grid(&ring.kappa_grid)?;
            let conditions = solve.conditions();
            let cfg = solve.config()?;
            let mut sink = solve.output.sink()?;
            sweep::run_ring_sweep(
                &ring.params(),
                &grid,
                &conditions,
                solve.number_constraint,
                &cfg,
                &mut stream(&mut sink),
            )?;
            solve.output.finish(sink, &conditions)
        }
        Command::Fcidump { path, solve } => {
            let conditions = solve.conditions();
            let cfg = solve.config()?;
            let mut sink = solve.output.sink()?;
            sweep::run_fcidump_jobs(
                &path,
                &conditions,
                solve.number_constraint,
                &cfg,
                &mut stream(&mut sink),
            )?;
            solve.output.finish(sink, &conditions)
        }
        Command::Fci {
            ring,
            fcidump,
            number_constraint,
            output,
        } => {
            let conditions = [Condition::Fci];
            let cfg = SolverConfig::default();
            let mut sink = output.sink()?;
            match fcidump {
                Some(path) => {
                    sweep::run_fcidump_jobs(
                        &path,
                        &conditions,
                        number_constraint,
                        &cfg,
                        &mut stream(&mut sink),
                    )?;
                }
                None => {
                    let grid = parse_grid(&ring.kappa_grid)?;
                    sweep::run_ring_sweep(
                        &ring.params(),
                        &grid,
                        &conditions,
                        number_constraint,
                        &cfg,
                        &mut stream(&mut sink),
                    )?;
                }
            }
            output.finish(sink, &conditions)
        }
    }
}

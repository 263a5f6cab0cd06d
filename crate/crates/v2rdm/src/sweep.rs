//! Parameter sweeps and single-file jobs.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use log::{info, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2rdm_core::constraints::variance_operator;
use v2rdm_core::fock::DEFAULT_MODE_CAP;
use v2rdm_core::{
    build_map, fci_ground, fci_ground_sector, gram_basis, molecular_hamiltonian, operator_matrix,
    ring_hamiltonian, solve_dual, BasisMode, Complex, ConstraintSystem, DualProblem, FciResult,
    GramBasis, OperatorPoly, RingParams, SolverSettings, VarianceMode,
};

use crate::fcidump::{read_fcidump, FcidumpError};
use crate::records::{format_coordinate, Condition, RunRecord};

/// Random Fock states drawn per converged bound by the weak-duality spot check.
pub const SPOT_CHECK_SAMPLES: usize = 100;

const HERMITICITY_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] v2rdm_core::Error),
    #[error(transparent)]
    Fcidump(#[from] FcidumpError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which monomials enter the Gram basis of the (2,2) and full (2,3) conditions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PMode {
    /// All degrees up to `p`.
    #[default]
    UpTo,
    /// Degree exactly `p`.
    Exact,
}

impl FromStr for PMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "up-to" => Ok(PMode::UpTo),
            "exact" => Ok(PMode::Exact),
            _ => Err(Error::InvalidInput(format!(
                "unknown p-mode '{s}' (expected up-to or exact)"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub settings: SolverSettings,
    pub p_mode: PMode,
    /// Seeds the weak-duality spot check.
    pub seed: u64,
    /// Worker threads for sweeps; `1` runs everything on the calling thread.
    pub threads: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            settings: SolverSettings::default(),
            p_mode: PMode::UpTo,
            seed: 0,
            threads: 1,
        }
    }
}

/// Gram basis for a positivity condition; `None` for [`Condition::Fci`].
pub fn condition_basis(
    condition: Condition,
    modes: usize,
    p_mode: PMode,
) -> Result<Option<GramBasis>> {
    let mode = match p_mode {
        PMode::UpTo => BasisMode::UpTo,
        PMode::Exact => BasisMode::Exact,
    };
    Ok(match condition {
        Condition::TwoTwo => Some(gram_basis(modes, 2, mode)?),
        Condition::TwoThreePartial => Some(gram_basis(modes, 3, BasisMode::Partial23)?),
        Condition::TwoThreeFull => Some(gram_basis(modes, 3, mode)?),
        Condition::Fci => None,
    })
}

/// Parses `start:stop:step` into an inclusive, evenly spaced grid.
///
/// `stop < start` gives an empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidInput(format!("grid '{text}' is not start:stop:step"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidInput(format!(
            "grid '{text}' needs finite bounds and a positive step"
        )));
    }
    if stop < start {
        return Ok(Vec::new());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}

/// Smallest of `<psi| H + lambda (N - N0)^2 |psi> - energy` over random states.
///
/// A negative value means the bound is violated by an explicit state.
pub fn weak_duality_margin(
    h: &OperatorPoly,
    energy: f64,
    lambda: f64,
    variance: VarianceMode,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let shifted = match variance {
        VarianceMode::Variable { n0 } if lambda != 0.0 => {
            h.add(&variance_operator(h.modes(), n0)?.scale(Complex::new(lambda, 0.0)))?
        }
        _ => h.clone(),
    };
    let m = operator_matrix(&shifted)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margin = f64::INFINITY;
    for _ in 0..samples {
        let mut psi: Vec<Complex> = (0..m.dim())
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        psi.iter_mut().for_each(|z| *z /= norm);
        margin = margin.min(m.expectation(&psi)?.re - energy);
    }
    Ok(margin)
}

/// Exact reference for `h`: the `n0` sector when `n0` is an integer and `h`
/// conserves particle number, the whole Fock space otherwise. `None` above the
/// dense-matrix mode cap.
pub fn reference_fci(h: &OperatorPoly, n0: Option<f64>) -> Result<Option<FciResult>> {
    if h.modes() > DEFAULT_MODE_CAP {
        warn!(
            "{} orbitals exceed the exact-diagonalization cap of {DEFAULT_MODE_CAP}; skipping FCI",
            h.modes()
        );
        return Ok(None);
    }
    if let Some(n) = n0 {
        if n.fract() == 0.0 && n >= 0.0 && (n as usize) <= h.modes() {
            match fci_ground_sector(h, n as usize, HERMITICITY_TOL) {
                Ok(r) => return Ok(Some(r)),
                Err(v2rdm_core::Error::InvalidParameter(msg)) => {
                    warn!("fixed-N reference unavailable ({msg}); using the whole Fock space")
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            warn!("N0 = {n} is not a valid electron count; using the whole Fock space");
        }
    }
    Ok(Some(fci_ground(h, HERMITICITY_TOL)?))
}

struct Job<'a> {
    system: &'a str,
    coordinate: String,
    hamiltonian: OperatorPoly,
    seed: u64,
}

/// Prepared constraint systems, shared by every grid point.
struct Plan {
    conditions: Vec<(Condition, Option<ConstraintSystem>)>,
    variance: VarianceMode,
    /// `(N - N0)^2`, whose multiplier expectation is the reported variance in
    /// fixed-N runs.
    penalty: Option<OperatorPoly>,
    n0: Option<f64>,
}

impl Plan {
    fn new(conditions: &[Condition], modes: usize, n0: Option<f64>, cfg: &SolverConfig) -> Result<Self> {
        let conditions = conditions
            .iter()
            .map(|&c| Ok((c, condition_basis(c, modes, cfg.p_mode)?.map(|b| build_map(&b)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Plan {
            conditions,
            variance: match n0 {
                Some(n0) => VarianceMode::Variable { n0 },
                None => VarianceMode::Off,
            },
            penalty: n0.map(|n0| variance_operator(modes, n0)).transpose()?,
            n0,
        })
    }

    fn needs_reference(&self) -> bool {
        !self.conditions.is_empty()
    }

    fn run(&self, job: &Job<'_>, cfg: &SolverConfig) -> Result<Vec<RunRecord>> {
        let start = Instant::now();
        let reference = if self.needs_reference() {
            reference_fci(&job.hamiltonian, self.n0)?
        } else {
            None
        };
        let fci_wall = start.elapsed().as_secs_f64();
        let fci_energy = reference.as_ref().map(|r| r.energy);

        let mut out = Vec::with_capacity(self.conditions.len());
        for (k, (condition, system)) in self.conditions.iter().enumerate() {
            let Some(sys) = system else {
                if let Some(r) = &reference {
                    out.push(RunRecord {
                        system: job.system.to_string(),
                        condition: *condition,
                        coordinate: job.coordinate.clone(),
                        energy: r.energy,
                        fci_energy: Some(r.energy),
                        error: Some(0.0),
                        log10_abs_error: None,
                        n_variance: Some(r.n_variance),
                        lambda: None,
                        iterations: None,
                        gap: None,
                        primal_residual: None,
                        dual_residual: None,
                        wall_s: fci_wall,
                        converged: true,
                    });
                }
                continue;
            };
            let prob = DualProblem::new(sys, &job.hamiltonian)?
                .with_variance(self.variance)
                .with_settings(cfg.settings.clone());
            let sol = solve_dual(&prob)?;
            if !sol.converged {
                warn!(
                    "{} {} at {}: not converged after {} iterations",
                    job.system, condition, job.coordinate, sol.iterations
                );
            }
            if sol.converged && reference.is_some() {
                let margin = weak_duality_margin(
                    &job.hamiltonian,
                    sol.energy,
                    sol.lambda,
                    self.variance,
                    SPOT_CHECK_SAMPLES,
                    job.seed.wrapping_add(k as u64),
                )?;
                if margin < 0.0 {
                    warn!(
                        "{} {} at {}: a random state lies {:.3e} below the bound",
                        job.system, condition, job.coordinate, -margin
                    );
                }
            }
            info!(
                "{} {} at {}: E = {:.10} ({} iterations, {:.2} s)",
                job.system, condition, job.coordinate, sol.energy, sol.iterations, sol.wall_s
            );
            out.push(
                RunRecord {
                    system: job.system.to_string(),
                    condition: *condition,
                    coordinate: job.coordinate.clone(),
                    energy: sol.energy,
                    fci_energy,
                    error: None,
                    log10_abs_error: None,
                    n_variance: Some(match &self.penalty {
                        Some(v) => sol.expectation(sys, v).re,
                        None => sol.number_variance(sys),
                    }),
                    lambda: Some(sol.lambda),
                    iterations: Some(sol.iterations),
                    gap: Some(sol.gap),
                    primal_residual: Some(sol.primal_residual),
                    dual_residual: Some(sol.dual_residual),
                    wall_s: sol.wall_s,
                    converged: sol.converged,
                }
                .with_error_fields(),
            );
        }
        Ok(out)
    }
}

/// Runs `job(i)` for `i in 0..n` on `threads` workers and hands results to
/// `emit` in index order as soon as each prefix is complete.
fn run_ordered<T, J, E>(n: usize, threads: usize, job: J, mut emit: E) -> Result<()>
where
    T: Send,
    J: Fn(usize) -> Result<T> + Sync,
    E: FnMut(T) -> Result<()>,
{
    if threads <= 1 || n <= 1 {
        for i in 0..n {
            emit(job(i)?)?;
        }
        return Ok(());
    }
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<(usize, Result<T>)>();
        for _ in 0..threads.min(n) {
            let tx = tx.clone();
            let (next, job) = (&next, &job);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n || tx.send((i, job(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        let mut pending = BTreeMap::new();
        let mut due = 0;
        for (i, result) in rx {
            pending.insert(i, result);
            while let Some(result) = pending.remove(&due) {
                emit(result?)?;
                due += 1;
            }
        }
        Ok(())
    })
}

/// Ring sweep over `kappa/tau`; `params.kappa` is ignored.
///
/// Records are produced per grid point in `conditions` order and passed to
/// `sink` in grid order as they complete.
pub fn run_ring_sweep(
    params: &RingParams,
    grid: &[f64],
    conditions: &[Condition],
    n0: Option<f64>,
    cfg: &SolverConfig,
    sink: &mut dyn FnMut(&RunRecord) -> Result<()>,
) -> Result<Vec<RunRecord>> {
    if !grid.is_empty() && params.tau == 0.0 {
        return Err(Error::InvalidInput("kappa/tau sweep needs tau != 0".into()));
    }
    let plan = Plan::new(conditions, params.sites, n0, cfg)?;
    let mut all = Vec::new();
    run_ordered(
        grid.len(),
        cfg.threads,
        |i| {
            let ratio = grid[i];
            let p = RingParams {
                kappa: ratio * params.tau,
                ..*params
            };
            let job = Job {
                system: "ring",
                coordinate: format_coordinate(ratio),
                hamiltonian: ring_hamiltonian(&p)?,
                seed: cfg.seed.wrapping_add((i as u64) << 32),
            };
            plan.run(&job, cfg)
        },
        |records| {
            for r in &records {
                sink(r)?;
            }
            all.extend(records);
            Ok(())
        },
    )?;
    Ok(all)
}

/// Solves every condition for one FCIDUMP file, sharing a single reference.
///
/// The file stem labels the row coordinate.
pub fn run_fcidump_jobs(
    path: &Path,
    conditions: &[Condition],
    n0: Option<f64>,
    cfg: &SolverConfig,
    sink: &mut dyn FnMut(&RunRecord) -> Result<()>,
) -> Result<Vec<RunRecord>> {
    let sys = read_fcidump(path)?;
    let h = molecular_hamiltonian(&sys)?;
    let plan = Plan::new(conditions, h.modes(), n0, cfg)?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    let job = Job {
        system: "fcidump",
        coordinate: label,
        hamiltonian: h,
        seed: cfg.seed,
    };
    let records = plan.run(&job, cfg)?;
    for r in &records {
        sink(r)?;
    }
    Ok(records)
}

pub fn run_fcidump_job(
    path: &Path,
    condition: Condition,
    n0: Option<f64>,
    cfg: &SolverConfig,
) -> Result<RunRecord> {
    let mut records = run_fcidump_jobs(path, &[condition], n0, cfg, &mut |_| Ok(()))?;
    records
        .pop()
        .ok_or_else(|| Error::InvalidInput("no exact reference available for an fci row".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g = parse_grid("0:2:0.25").unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[8], 2.0);
        assert_eq!(g[3], 0.75);
        assert!(parse_grid("1:0:0.5").unwrap().is_empty());
        assert_eq!(parse_grid("0.5:0.5:1").unwrap(), vec![0.5]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:1:0.1").is_err());
    }

    #[test]
    fn empty_grid_gives_no_records() {
        let params = RingParams::benchmark(0.0);
        let mut seen = 0;
        let out = run_ring_sweep(
            &params,
            &[],
            &[Condition::TwoTwo],
            None,
            &SolverConfig::default(),
            &mut |_| {
                seen += 1;
                Ok(())
            },
        )
        .unwrap();
        assert!(out.is_empty());
        assert_eq!(seen, 0);
    }

    #[test]
    fn ordered_pool_preserves_order() {
        let mut got = Vec::new();
        run_ordered(
            20,
            4,
            |i| {
                std::thread::sleep(std::time::Duration::from_millis(((20 - i) % 5) as u64));
                Ok(i)
            },
            |i| {
                got.push(i);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(got, (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn p_mode_names() {
        assert_eq!("up-to".parse::<PMode>().unwrap(), PMode::UpTo);
        assert_eq!("exact".parse::<PMode>().unwrap(), PMode::Exact);
        assert!("all".parse::<PMode>().is_err());
    }
}

//! The energy-maximizing dual program over a [`ConstraintSystem`].
//!
//! ```text
//! max E  over  E, lambda >= 0, X >= 0
//! s.t.  H + lambda (N - N0)^2 - E I = B(X)   (two-body rows)
//!       B(X) has no component of degree > 4  (forbidden rows)
//! ```
//!
//! `B(X)` is the operator a Gram matrix represents (see
//! [`ConstraintSystem::gram_operator`]). The multipliers of the equality rows
//! are the expectation values `<m>` of a normalized reduced density operator,
//! so the solution doubles as a 2-RDO in the monomial basis.
//!
//! The penalty enters with a plus sign: a positive `lambda` raises the energy
//! of every state away from `N0`, and at the optimum the multiplier side
//! satisfies `<(N - N0)^2> = 0`.

mod bpm;
mod psd;

use alloc::vec;
use alloc::vec::Vec;

use faer::Mat;
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;

use crate::constraints::ConstraintSystem;
use crate::majorana::{from_fermion_string, FermionString, OperatorPoly};
use crate::{Complex, Error, Result};

use bpm::{RealBlock, RealSdp, ScalarColumn, SymEntry};

pub use psd::{min_eigenvalue, psd_project};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VarianceMode {
    /// `lambda = 0`: no particle-number selection.
    Off,
    /// `lambda >= 0` optimized against `(N - n0)^2`.
    Variable { n0: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub tol_primal: f64,
    pub tol_dual: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Initial penalty parameter.
    pub sigma: f64,
    /// Residual ratio that triggers a penalty update.
    pub balance_ratio: f64,
    /// Multiplicative penalty update.
    pub balance_factor: f64,
    /// Minimum number of iterations between penalty updates.
    pub balance_interval: usize,
    /// Multipliers beyond this magnitude are taken as a sign of infeasibility.
    pub divergence_limit: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_primal: 1e-7,
            tol_dual: 1e-7,
            tol_gap: 1e-7,
            max_iter: 200_000,
            sigma: 1.0,
            balance_ratio: 10.0,
            balance_factor: 2.0,
            balance_interval: 20,
            divergence_limit: 1e12,
        }
    }
}

impl SolverSettings {
    /// Sets all three stopping tolerances.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol_primal = tol;
        self.tol_dual = tol;
        self.tol_gap = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

#[derive(Clone, Debug)]
pub struct DualProblem<'a> {
    pub system: &'a ConstraintSystem,
    /// Hamiltonian coefficients over `system.rows`.
    pub target: Vec<Complex>,
    pub variance: VarianceMode,
    pub settings: SolverSettings,
}

impl<'a> DualProblem<'a> {
    pub fn new(system: &'a ConstraintSystem, hamiltonian: &OperatorPoly) -> Result<Self> {
        Ok(DualProblem {
            system,
            target: system.target_coefficients(hamiltonian)?,
            variance: VarianceMode::Off,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_variance(mut self, mode: VarianceMode) -> Self {
        self.variance = mode;
        self
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    /// Certified lower bound on the ground-state energy: `objective` minus
    /// `certificate_residual`.
    ///
    /// Two certificates are tried and the better one kept: the BPM iterate
    /// with its mismatch bounded row by row, and the iterate with the mismatch
    /// folded into the Gram blocks and PSD restored by an identity shift.
    pub energy: f64,
    /// Objective value `E` of the returned Gram iterate.
    pub objective: f64,
    /// Energy evaluated on the multiplier side, `sum_m h_m <m>`.
    pub dual_energy: f64,
    /// `objective - energy`.
    ///
    /// For the returned `gram`, `H + lambda (N - N0)^2 - energy` equals the
    /// positive semidefinite `B(gram)` plus `r + |r|_1 I`, where `r` is the
    /// non-identity mismatch. Every monomial is unitary, so the extra term is
    /// itself positive semidefinite.
    pub certificate_residual: f64,
    pub lambda: f64,
    /// Hermitian positive semidefinite Gram matrix per basis block, taken from
    /// the certificate that produced `energy`.
    pub gram: Vec<Mat<Complex>>,
    /// `<m>` for every row of the constraint system; the identity entry is 1.
    pub multipliers: Vec<Complex>,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Wall-clock seconds (zero without the `std` feature).
    pub wall_s: f64,
    /// Whether the iteration ran on the doubled real embedding of complex Gram matrices.
    pub complex_embedding: bool,
}

impl DualSolution {
    /// `sum_m c_m <m>` over the rows of `system`; terms outside the rows count as zero.
    pub fn expectation(&self, system: &ConstraintSystem, a: &OperatorPoly) -> Complex {
        a.terms()
            .filter_map(|(m, c)| system.row_of(m).map(|r| c * self.multipliers[r]))
            .sum()
    }

    /// `<N^2> - <N>^2` of the multiplier state.
    pub fn number_variance(&self, system: &ConstraintSystem) -> f64 {
        let n = crate::hamiltonians::number_operator(system.modes());
        let n2 = n.mul(&n).expect("same rank");
        let mean = self.expectation(system, &n).re;
        self.expectation(system, &n2).re - mean * mean
    }
}

/// Which real equation a system row contributes.
#[derive(Clone, Copy, Debug, PartialEq)]
enum RowPart {
    Real,
    Imag,
}

struct Assembled {
    sdp: RealSdp,
    /// System row and part for every internal row.
    origin: Vec<(usize, RowPart)>,
    scale: Vec<f64>,
    complex: bool,
    h0: f64,
}

fn assemble(prob: &DualProblem<'_>) -> Result<Assembled> {
    let sys = prob.system;
    let nrows_sys = sys.rows.len();
    if prob.target.len() != nrows_sys {
        return Err(Error::DimensionMismatch {
            expected: nrows_sys,
            found: prob.target.len(),
        });
    }
    let variance = match prob.variance {
        VarianceMode::Off => None,
        VarianceMode::Variable { n0 } => Some(sys.variance_coefficients(n0)?),
    };
    let hermitian = |r: usize| sys.rows[r].is_hermitian();
    let complex = (0..nrows_sys).any(|r| !hermitian(r) && prob.target[r].im != 0.0);

    let mut internal = vec![usize::MAX; nrows_sys];
    let mut origin = Vec::new();
    for r in 0..nrows_sys {
        if r == sys.identity_row {
            continue;
        }
        let part = if hermitian(r) {
            RowPart::Real
        } else {
            RowPart::Imag
        };
        if part == RowPart::Imag && !complex {
            continue;
        }
        internal[r] = origin.len();
        origin.push((r, part));
    }
    let nrows = origin.len();

    let mut blocks = Vec::with_capacity(sys.pairs.len());
    for (bi, entries) in sys.pairs.iter().enumerate() {
        let n = sys.basis.blocks[bi].monomials.len();
        let mut block = RealBlock {
            dim: if complex { 2 * n } else { n },
            entries: Vec::new(),
            cost: Vec::new(),
        };
        for e in entries {
            let (a, b, row) = (e.a, e.b, e.row as usize);
            let nn = n as u32;
            if row == sys.identity_row {
                if complex {
                    block.cost.push((a, b, 0.5 * e.phase));
                    block.cost.push((a + nn, b + nn, 0.5 * e.phase));
                } else {
                    block.cost.push((a, b, e.phase));
                }
                continue;
            }
            let ir = internal[row];
            if ir == usize::MAX {
                continue;
            }
            let ir = ir as u32;
            match (complex, origin[ir as usize].1) {
                (false, _) => block.entries.push(SymEntry {
                    k: a,
                    l: b,
                    row: ir,
                    coef: e.phase,
                }),
                (true, RowPart::Real) => {
                    block.entries.push(SymEntry {
                        k: a,
                        l: b,
                        row: ir,
                        coef: 0.5 * e.phase,
                    });
                    block.entries.push(SymEntry {
                        k: a + nn,
                        l: b + nn,
                        row: ir,
                        coef: 0.5 * e.phase,
                    });
                }
                (true, RowPart::Imag) => {
                    // K_ab = (Y[n+a][b] - Y[a][n+b]) / 2 with a < b
                    block.entries.push(SymEntry {
                        k: b,
                        l: a + nn,
                        row: ir,
                        coef: 0.5 * e.phase,
                    });
                    block.entries.push(SymEntry {
                        k: a,
                        l: b + nn,
                        row: ir,
                        coef: -0.5 * e.phase,
                    });
                }
            }
        }
        blocks.push(block);
    }

    let part_of = |c: Complex, part: RowPart| match part {
        RowPart::Real => c.re,
        RowPart::Imag => c.im,
    };
    let mut b: Vec<f64> = origin
        .iter()
        .map(|&(r, p)| part_of(prob.target[r], p))
        .collect();
    let mut scalar = variance.as_ref().map(|v| ScalarColumn {
        column: origin.iter().map(|&(r, p)| -part_of(v[r], p)).collect(),
        cost: -v[sys.identity_row].re,
    });

    // unit-norm rows
    let mut sq = vec![0.0; nrows];
    for blk in &blocks {
        for e in &blk.entries {
            let w = if e.k == e.l { 1.0 } else { 2.0 };
            sq[e.row as usize] += w * e.coef * e.coef;
        }
    }
    if let Some(s) = &scalar {
        for (q, u) in sq.iter_mut().zip(&s.column) {
            *q += u * u;
        }
    }
    let scale: Vec<f64> = sq.iter().map(|q| q.sqrt()).collect();
    if let Some(r) = scale.iter().position(|&s| !(s > 0.0)) {
        // a reachable row always carries at least one Gram entry
        let (sys_row, _) = origin[r];
        return Err(Error::Unrepresentable {
            mask: sys.rows[sys_row].mask(),
        });
    }
    for blk in &mut blocks {
        for e in &mut blk.entries {
            e.coef /= scale[e.row as usize];
        }
    }
    for (bi, s) in b.iter_mut().zip(&scale) {
        *bi /= s;
    }
    if let Some(s) = &mut scalar {
        for (u, sc) in s.column.iter_mut().zip(&scale) {
            *u /= sc;
        }
    }

    Ok(Assembled {
        sdp: RealSdp {
            blocks,
            nrows,
            b,
            scalar,
        },
        origin,
        scale,
        complex,
        h0: prob.target[sys.identity_row].re,
    })
}

/// Solves the dual program with the boundary-point method.
///
/// Hitting the iteration cap is not an error: the best iterate is returned
/// with `converged == false`.
pub fn solve_dual(prob: &DualProblem<'_>) -> Result<DualSolution> {
    #[cfg(feature = "std")]
    let start = std::time::Instant::now();

    let asm = assemble(prob)?;
    let out = bpm::solve(&asm.sdp, &prob.settings)?;
    let sys = prob.system;

    let mut multipliers = vec![Complex::zero(); sys.rows.len()];
    multipliers[sys.identity_row] = Complex::new(1.0, 0.0);
    for (i, &(r, part)) in asm.origin.iter().enumerate() {
        let w = -out.best.y[i] / asm.scale[i];
        multipliers[r] = match part {
            RowPart::Real => Complex::new(w, 0.0),
            RowPart::Imag => Complex::new(0.0, -w),
        };
    }

    let gram: Vec<Mat<Complex>> = out
        .best
        .x
        .iter()
        .zip(&sys.basis.blocks)
        .map(|(y, blk)| {
            let n = blk.monomials.len();
            if asm.complex {
                Mat::<Complex>::from_fn(n, n, |a, b| {
                    let s = 0.5 * (y[(a, b)] + y[(n + a, n + b)]);
                    let k = 0.5 * (y[(n + a, b)] - y[(a, n + b)]);
                    Complex::new(s, k)
                })
            } else {
                Mat::<Complex>::from_fn(n, n, |a, b| Complex::new(y[(a, b)], 0.0))
            }
        })
        .collect();

    let lambda = out.best.x_scalar;
    let variance = match prob.variance {
        VarianceMode::Off => None,
        VarianceMode::Variable { n0 } => Some(sys.variance_coefficients(n0)?),
    };
    let target: Vec<Complex> = (0..sys.rows.len())
        .map(|r| match &variance {
            Some(v) => prob.target[r] + v[r] * lambda,
            None => prob.target[r],
        })
        .collect();

    let raw = certify(sys, &target, gram)?;
    let objective = raw.objective;
    let best = refine_certificate(sys, &target, raw)?;

    #[cfg(feature = "std")]
    let wall_s = start.elapsed().as_secs_f64();
    #[cfg(not(feature = "std"))]
    let wall_s = 0.0;

    Ok(DualSolution {
        energy: best.energy(),
        objective,
        dual_energy: asm.h0 - out.dual_objective,
        certificate_residual: objective - best.energy(),
        lambda,
        gram: best.gram,
        multipliers,
        primal_residual: out.primal_residual,
        dual_residual: out.dual_residual,
        gap: out.gap,
        iterations: out.iterations,
        converged: out.converged,
        wall_s,
        complex_embedding: asm.complex,
    })
}

struct Certificate {
    gram: Vec<Mat<Complex>>,
    /// Identity coefficient of `target - B(gram)`.
    objective: f64,
    /// `sum |target_m - B(gram)_m|` over non-identity rows.
    residual: f64,
    /// `target - B(gram)`.
    mismatch: Vec<Complex>,
}

impl Certificate {
    fn energy(&self) -> f64 {
        self.objective - self.residual
    }
}

fn certify(
    sys: &ConstraintSystem,
    target: &[Complex],
    gram: Vec<Mat<Complex>>,
) -> Result<Certificate> {
    let coefs = sys.gram_coefficients(&gram)?;
    let mismatch: Vec<Complex> = target.iter().zip(&coefs).map(|(t, c)| t - c).collect();
    let residual = mismatch
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != sys.identity_row)
        .map(|(_, d)| d.norm())
        .sum();
    Ok(Certificate {
        objective: mismatch[sys.identity_row].re,
        residual,
        mismatch,
        gram,
    })
}

/// Correction rounds in [`refine_certificate`].
const REFINE_ROUNDS: usize = 8;

/// Improves a certificate by alternating two steps: move the mismatch into the
/// Gram blocks with the smallest-norm correction, then restore PSD either by
/// projection (keeps iterating) or by an identity shift (final candidate).
/// Returns the best certificate seen.
fn refine_certificate(
    sys: &ConstraintSystem,
    target: &[Complex],
    start: Certificate,
) -> Result<Certificate> {
    let mut current = start;
    let mut best: Option<Certificate> = None;
    for _ in 0..REFINE_ROUNDS {
        let delta = sys.gram_correction(&current.mismatch)?;
        let corrected: Vec<Mat<Complex>> =
            current.gram.iter().zip(&delta).map(|(x, d)| x + d).collect();
        let shifted = certify(
            sys,
            target,
            corrected.iter().map(shift_to_psd).collect::<Result<_>>()?,
        )?;
        let projected = certify(
            sys,
            target,
            corrected.iter().map(|y| psd_project(y.as_ref())).collect::<Result<_>>()?,
        )?;
        let candidate = core::mem::replace(&mut current, projected);
        for c in [candidate, shifted] {
            if best.as_ref().is_none_or(|b| c.energy() > b.energy()) {
                best = Some(c);
            }
        }
    }
    if best.as_ref().is_none_or(|b| current.energy() > b.energy()) {
        best = Some(current);
    }
    Ok(best.expect("at least one round"))
}

fn shift_to_psd(y: &Mat<Complex>) -> Result<Mat<Complex>> {
    let n = y.nrows();
    let scale = (0..n)
        .flat_map(|j| (0..n).map(move |i| (i, j)))
        .map(|(i, j)| y[(i, j)].norm())
        .fold(0.0, f64::max);
    // covers the rounding error of the eigenvalue itself
    let guard = 8.0 * f64::EPSILON * scale * n as f64;
    let shift = (guard - min_eigenvalue(y.as_ref())?).max(0.0);
    let mut out = y.clone();
    for i in 0..n {
        out[(i, i)] += shift;
    }
    Ok(out)
}

/// The 2-RDO carried by a converged solution: coefficient `<m>` on every
/// two-body row, identity coefficient 1.
pub fn extract_rdo(sol: &DualSolution, system: &ConstraintSystem) -> Result<OperatorPoly> {
    if !sol.converged {
        return Err(Error::NotConverged);
    }
    OperatorPoly::from_terms(
        system.modes(),
        system
            .kept
            .iter()
            .map(|&r| (system.rows[r], sol.multipliers[r])),
    )
}

/// `Tr(Gamma D)` for a ladder string `Gamma`, e.g. `a_i^† a_j^† a_l a_k` for `D^{ij}_{kl}`.
pub fn rdm_element(rdo: &OperatorPoly, gamma: &FermionString) -> Result<Complex> {
    let op = from_fermion_string(gamma, rdo.modes())?;
    let degree = op.max_degree();
    if degree > crate::constraints::TWO_BODY_DEGREE {
        return Err(Error::NotTwoBody { degree });
    }
    Ok(op.terms().map(|(m, c)| c * rdo.coefficient(m)).sum())
}

//! Dense Fock-space representation and exact diagonalization.
//!
//! Basis states are occupation-number vectors encoded as integers: bit `i`
//! of the index is the occupation of orbital `i`. Ladder operators follow the
//! Jordan-Wigner convention `a_i |n> = (-1)^{n_0 + ... + n_{i-1}} n_i |n - e_i>`.

use alloc::vec::Vec;

use faer::{Mat, Side};
#[cfg(not(feature = "std"))]
use num_traits::Float;
use num_traits::Zero;

use crate::majorana::{Monomial, OperatorPoly};
use crate::{Complex, Error, Result};

/// Default cap on the number of orbitals for dense matrices.
pub const DEFAULT_MODE_CAP: usize = 14;

/// Eigenvalues within this distance of the lowest count towards its multiplicity.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Action of a monomial on the basis state `state`: returns `(sign, image)`.
///
/// Every monomial maps occupation states to signed occupation states; the
/// generators are applied right to left.
pub fn apply_monomial(m: Monomial, state: u64) -> (i8, u64) {
    let mut sign = 1i8;
    let mut s = state;
    let mut rest = m.mask();
    while rest != 0 {
        let slot = 63 - rest.leading_zeros() as usize;
        rest &= !(1u64 << slot);
        let orbital = slot / 2;
        let bit = 1u64 << orbital;
        if (s & (bit - 1)).count_ones() % 2 == 1 {
            sign = -sign;
        }
        // m_i = a_i - a_i^†: the creation branch carries a minus sign
        if slot % 2 == 1 && s & bit == 0 {
            sign = -sign;
        }
        s ^= bit;
    }
    (sign, s)
}

/// Dense matrix of an operator on the `2^modes`-dimensional Fock space.
#[derive(Clone, Debug)]
pub struct FockMatrix {
    modes: usize,
    mat: Mat<Complex>,
}

impl FockMatrix {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn as_mat(&self) -> &Mat<Complex> {
        &self.mat
    }

    pub fn into_mat(self) -> Mat<Complex> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.mat[(row, col)]
    }

    /// Largest entry of `|M - M^†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.mat[(i, j)] - self.mat[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `<v| M |v>`.
    pub fn expectation(&self, v: &[Complex]) -> Result<Complex> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        let mut acc = Complex::zero();
        for j in 0..n {
            if v[j] == Complex::zero() {
                continue;
            }
            let mut col = Complex::zero();
            for i in 0..n {
                col += v[i].conj() * self.mat[(i, j)];
            }
            acc += col * v[j];
        }
        Ok(acc)
    }

    /// Ascending eigenvalues of a Hermitian matrix.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let vals = self
            .mat
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::Eigendecomposition)?;
        Ok(vals)
    }
}

pub fn operator_matrix(a: &OperatorPoly) -> Result<FockMatrix> {
    operator_matrix_capped(a, DEFAULT_MODE_CAP)
}

pub fn operator_matrix_capped(a: &OperatorPoly, cap: usize) -> Result<FockMatrix> {
    let modes = a.modes();
    if modes > cap {
        return Err(Error::ResourceLimit {
            what: "Fock space (orbitals)",
            size: modes,
            cap,
        });
    }
    let dim = 1usize << modes;
    let mut mat = Mat::<Complex>::zeros(dim, dim);
    for (m, c) in a.terms() {
        for state in 0..dim as u64 {
            let (sign, image) = apply_monomial(m, state);
            mat[(image as usize, state as usize)] += c * f64::from(sign);
        }
    }
    Ok(FockMatrix { modes, mat })
}

/// Number-operator moments and parity of a state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateMoments {
    /// `<N>`.
    pub mean: f64,
    /// `<(N - N0)^2>` for the reference `N0` the moments were taken about.
    pub spread: f64,
    /// `<(-1)^N>`.
    pub parity: f64,
}

pub fn state_moments(state: &[Complex], n0: f64) -> Result<StateMoments> {
    check_state(state)?;
    let mut mean = 0.0;
    let mut spread = 0.0;
    let mut parity = 0.0;
    for (idx, amp) in state.iter().enumerate() {
        let w = amp.norm_sqr();
        let n = f64::from((idx as u64).count_ones());
        mean += w * n;
        spread += w * (n - n0) * (n - n0);
        parity += if idx.count_ones() % 2 == 0 { w } else { -w };
    }
    Ok(StateMoments {
        mean,
        spread,
        parity,
    })
}

fn check_state(state: &[Complex]) -> Result<usize> {
    let dim = state.len();
    if !dim.is_power_of_two() {
        return Err(Error::InvalidParameter(
            "state length is not a power of two",
        ));
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized { norm });
    }
    Ok(dim)
}

/// `<psi| m |psi>` for each basis monomial of degree at most four.
pub fn rdm_expectations(state: &[Complex], basis: &[Monomial]) -> Result<Vec<Complex>> {
    let dim = check_state(state)?;
    let modes = dim.trailing_zeros() as usize;
    basis
        .iter()
        .map(|&m| {
            if m.degree() > 4 {
                return Err(Error::NotTwoBody { degree: m.degree() });
            }
            if m.min_modes() > modes {
                return Err(Error::OrbitalOutOfRange {
                    index: m.min_modes() - 1,
                    modes,
                });
            }
            Ok(monomial_expectation(state, m))
        })
        .collect()
}

fn monomial_expectation(state: &[Complex], m: Monomial) -> Complex {
    let mut acc = Complex::zero();
    for (idx, amp) in state.iter().enumerate() {
        if *amp == Complex::zero() {
            continue;
        }
        let (sign, image) = apply_monomial(m, idx as u64);
        acc += state[image as usize].conj() * *amp * f64::from(sign);
    }
    acc
}

/// `<psi| A |psi>` evaluated term by term without forming a matrix.
pub fn poly_expectation(state: &[Complex], a: &OperatorPoly) -> Result<Complex> {
    let dim = check_state(state)?;
    if dim != 1usize << a.modes() {
        return Err(Error::DimensionMismatch {
            expected: 1usize << a.modes(),
            found: dim,
        });
    }
    Ok(a.terms()
        .map(|(m, c)| c * monomial_expectation(state, m))
        .sum())
}

/// Lowest eigenpair of a Hermitian operator on Fock space.
#[derive(Clone, Debug)]
pub struct FciResult {
    pub energy: f64,
    pub state: Vec<Complex>,
    /// `<N>` of the reported ground vector.
    pub n_mean: f64,
    /// `<N^2> - <N>^2`.
    pub n_variance: f64,
    /// `<(-1)^N>`; `+1` even, `-1` odd.
    pub parity: f64,
    /// Number of eigenvalues within [`DEGENERACY_TOL`] of the lowest.
    pub degeneracy: usize,
    /// Ascending spectrum of the diagonalized space.
    pub spectrum: Vec<f64>,
}

pub fn fci_ground(a: &OperatorPoly, hermiticity_tol: f64) -> Result<FciResult> {
    let h = operator_matrix(a)?;
    fci_ground_matrix(&h, hermiticity_tol)
}

pub fn fci_ground_matrix(h: &FockMatrix, hermiticity_tol: f64) -> Result<FciResult> {
    let defect = h.hermiticity_defect();
    if defect > hermiticity_tol {
        return Err(Error::NotHermitian { defect });
    }
    let all: Vec<usize> = (0..h.dim()).collect();
    ground_on(h, &all)
}

/// Ground state within the sector of exactly `particles` electrons.
///
/// The operator must not couple that sector to the rest of Fock space.
pub fn fci_ground_sector(a: &OperatorPoly, particles: usize, hermiticity_tol: f64) -> Result<FciResult> {
    if particles > a.modes() {
        return Err(Error::InvalidParameter("particle number exceeds orbital count"));
    }
    let h = operator_matrix(a)?;
    let defect = h.hermiticity_defect();
    if defect > hermiticity_tol {
        return Err(Error::NotHermitian { defect });
    }
    let inside = |i: usize| i.count_ones() as usize == particles;
    let sector: Vec<usize> = (0..h.dim()).filter(|&i| inside(i)).collect();
    for &j in &sector {
        for i in (0..h.dim()).filter(|&i| !inside(i)) {
            if h.mat[(i, j)].norm() > hermiticity_tol {
                return Err(Error::InvalidParameter("operator couples particle-number sectors"));
            }
        }
    }
    ground_on(&h, &sector)
}

/// Lowest eigenpair of `h` restricted to the basis states `keep`.
fn ground_on(h: &FockMatrix, keep: &[usize]) -> Result<FciResult> {
    let n = keep.len();
    let sub = Mat::<Complex>::from_fn(n, n, |i, j| h.mat[(keep[i], keep[j])]);
    let evd = sub
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Eigendecomposition)?;
    let spectrum: Vec<f64> = (0..n).map(|k| evd.S()[k].re).collect();
    let energy = spectrum[0];
    let degeneracy = spectrum
        .iter()
        .take_while(|&&e| e - energy <= DEGENERACY_TOL)
        .count();
    let u = evd.U();
    let mut state = alloc::vec![Complex::zero(); h.dim()];
    for (k, &i) in keep.iter().enumerate() {
        state[i] = u[(k, 0)];
    }
    let norm = state.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut state {
        *z /= norm;
    }
    let moments = state_moments(&state, 0.0)?;
    Ok(FciResult {
        energy,
        n_mean: moments.mean,
        n_variance: moments.spread - moments.mean * moments.mean,
        parity: moments.parity,
        degeneracy,
        state,
        spectrum,
    })
}

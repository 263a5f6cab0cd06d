//! Variational lower bounds for fermionic ground-state energies from
//! two-body representability conditions that do not assume particle-number
//! conservation.
//!
//! The crate is organised bottom-up:
//!
//! - [`majorana`]: exact arithmetic over Majorana-like generators.
//! - [`fock`]: dense Fock-space matrices and exact diagonalization, used as
//!   the reference for everything else.
//! - [`constraints`]: Gram bases and the linear map from Hermitian squares to
//!   operator coefficients, split into two-body rows and rows that must cancel.
//! - [`sdp`]: boundary-point solver for the energy-maximizing dual program and
//!   the reduced density operator carried by its multipliers.
//! - [`hamiltonians`]: the pairing ring model, the number operator and
//!   molecular Hamiltonians built from integrals.
//!
//! The crate is `no_std` with `alloc` when built without the default `std`
//! feature; `std` only adds wall-clock timing of solves.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod constraints;
pub mod fock;
pub mod hamiltonians;
pub mod majorana;
pub mod sdp;

mod error;

pub use error::{Error, Result};

/// Complex scalar used for all operator coefficients.
pub type Complex = num_complex::Complex64;

pub use constraints::{build_map, gram_basis, BasisMode, ConstraintSystem, GramBasis};
pub use fock::{fci_ground, fci_ground_sector, operator_matrix, FciResult, FockMatrix};
pub use hamiltonians::{molecular_hamiltonian, number_operator, ring_hamiltonian, RingParams};
pub use majorana::{FermionString, Ladder, Monomial, OperatorPoly};
pub use sdp::{solve_dual, DualProblem, DualSolution, SolverSettings, VarianceMode};

//! Gram bases over Majorana monomials and the linear map they induce.
//!
//! A Hermitian Gram matrix `X` over a basis `{m_a}` represents the operator
//! `B = sum_ab X_ab m_a m_b^†`, which is positive semidefinite on Fock space
//! whenever `X` is. Each product `m_a m_b^†` is a single signed monomial, so
//! the map from Gram entries to operator coefficients is a sparse table with
//! one target per entry. Rows of degree at most four span the two-body space;
//! rows of higher degree must cancel for `B` to be a two-body operator.

use alloc::vec::Vec;

use faer::Mat;
use num_traits::Zero;

use crate::hamiltonians::number_operator;
use crate::majorana::{Monomial, OperatorPoly, MAX_MODES};
use crate::{Complex, Error, Result};

/// Default cap on the total number of basis monomials.
pub const DEFAULT_BASIS_CAP: usize = 4096;

/// Largest monomial degree kept in the two-body space.
pub const TWO_BODY_DEGREE: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisMode {
    /// All monomials of degree `0..=p`.
    UpTo,
    /// Monomials of degree exactly `p`.
    Exact,
    /// Degree `<= 2` squares plus anticommutator squares `O O^† + O^† O` over
    /// degree-3 monomials.
    Partial23,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Entries map through `m_a m_b^†`.
    Square,
    /// Entries map through `m_a m_b^† + m_b^† m_a`.
    Anticommutator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisBlock {
    pub kind: BlockKind,
    pub monomials: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GramBasis {
    pub modes: usize,
    pub level: usize,
    pub mode: BasisMode,
    /// Drop Gram entries between even- and odd-degree monomials.
    pub parity_blocking: bool,
    pub blocks: Vec<BasisBlock>,
}

impl GramBasis {
    pub fn with_parity_blocking(mut self, on: bool) -> Self {
        self.parity_blocking = on;
        self
    }

    /// Total number of basis monomials over all blocks.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.monomials.len()).sum()
    }
}

pub fn gram_basis(modes: usize, level: usize, mode: BasisMode) -> Result<GramBasis> {
    gram_basis_capped(modes, level, mode, DEFAULT_BASIS_CAP)
}

pub fn gram_basis_capped(
    modes: usize,
    level: usize,
    mode: BasisMode,
    cap: usize,
) -> Result<GramBasis> {
    if modes == 0 || modes > MAX_MODES {
        return Err(Error::InvalidParameter(
            "number of orbitals must be in 1..=32",
        ));
    }
    if level == 0 {
        return Err(Error::InvalidParameter(
            "positivity level must be at least 1",
        ));
    }
    if mode == BasisMode::Partial23 && level != 3 {
        return Err(Error::InvalidParameter(
            "partial (2,3) basis requires level 3",
        ));
    }
    let count = |degrees: core::ops::RangeInclusive<usize>| -> usize {
        degrees.map(|d| binomial(2 * modes, d)).sum()
    };
    let size = match mode {
        BasisMode::UpTo => count(0..=level),
        BasisMode::Exact => count(level..=level),
        BasisMode::Partial23 => count(0..=3),
    };
    if size > cap {
        return Err(Error::ResourceLimit {
            what: "Gram basis",
            size,
            cap,
        });
    }
    let collect = |degrees: core::ops::RangeInclusive<usize>| -> Vec<Monomial> {
        let mut out: Vec<Monomial> = degrees
            .flat_map(|d| Monomial::all_of_degree(modes, d))
            .collect();
        out.sort_unstable();
        out
    };
    let blocks = match mode {
        BasisMode::UpTo => alloc::vec![BasisBlock {
            kind: BlockKind::Square,
            monomials: collect(0..=level),
        }],
        BasisMode::Exact => alloc::vec![BasisBlock {
            kind: BlockKind::Square,
            monomials: collect(level..=level),
        }],
        BasisMode::Partial23 => alloc::vec![
            BasisBlock {
                kind: BlockKind::Square,
                monomials: collect(0..=2),
            },
            BasisBlock {
                kind: BlockKind::Anticommutator,
                monomials: collect(3..=3),
            },
        ],
    };
    Ok(GramBasis {
        modes,
        level,
        mode,
        parity_blocking: false,
        blocks,
    })
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// One Gram entry `(a, b)` with `a <= b` and its image `phase * rows[row]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairEntry {
    pub a: u32,
    pub b: u32,
    pub row: u32,
    pub phase: f64,
}

/// Sparse map from Gram entries to monomial coefficients.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub basis: GramBasis,
    /// Every monomial reachable from the basis, ascending by mask.
    pub rows: Vec<Monomial>,
    /// Indices into `rows` of degree at most four.
    pub kept: Vec<usize>,
    /// Indices into `rows` of degree above four.
    pub forbidden: Vec<usize>,
    pub identity_row: usize,
    /// Upper-triangle entries per basis block.
    pub pairs: Vec<Vec<PairEntry>>,
}

/// Phase of `m_a m_b^†` (and of the anticommutator partner when requested).
fn pair_phase(kind: BlockKind, ma: Monomial, mb: Monomial) -> (f64, Monomial) {
    let sb = f64::from(mb.adjoint_sign());
    let (s_ab, out) = ma.mul(mb);
    match kind {
        BlockKind::Square => (f64::from(s_ab) * sb, out),
        BlockKind::Anticommutator => {
            let (s_ba, _) = mb.mul(ma);
            (sb * (f64::from(s_ab) + f64::from(s_ba)), out)
        }
    }
}

pub fn build_map(basis: &GramBasis) -> ConstraintSystem {
    let mut pairs = Vec::with_capacity(basis.blocks.len());
    let mut images: Vec<Vec<(u32, u32, u64, f64)>> = Vec::new();
    let mut masks: Vec<u64> = Vec::new();
    for block in &basis.blocks {
        let mons = &block.monomials;
        let mut raw = Vec::new();
        for (a, &ma) in mons.iter().enumerate() {
            for (b, &mb) in mons.iter().enumerate().skip(a) {
                if basis.parity_blocking && (ma.degree() + mb.degree()) % 2 == 1 {
                    continue;
                }
                let (phase, out) = pair_phase(block.kind, ma, mb);
                if phase == 0.0 {
                    continue;
                }
                masks.push(out.mask());
                raw.push((a as u32, b as u32, out.mask(), phase));
            }
        }
        images.push(raw);
    }
    masks.sort_unstable();
    masks.dedup();
    let rows: Vec<Monomial> = masks.iter().map(|&m| Monomial::from_mask(m)).collect();
    for raw in images {
        pairs.push(
            raw.into_iter()
                .map(|(a, b, mask, phase)| PairEntry {
                    a,
                    b,
                    row: masks.binary_search(&mask).expect("row collected above") as u32,
                    phase,
                })
                .collect::<Vec<_>>(),
        );
    }
    let (kept, forbidden): (Vec<usize>, Vec<usize>) =
        (0..rows.len()).partition(|&i| rows[i].degree() <= TWO_BODY_DEGREE);
    let identity_row = masks
        .binary_search(&0)
        .expect("diagonal Gram entries always reach the identity");
    ConstraintSystem {
        basis: basis.clone(),
        rows,
        kept,
        forbidden,
        identity_row,
        pairs,
    }
}

impl ConstraintSystem {
    pub fn modes(&self) -> usize {
        self.basis.modes
    }

    pub fn row_of(&self, m: Monomial) -> Option<usize> {
        self.rows.binary_search(&m).ok()
    }

    pub fn is_kept(&self, row: usize) -> bool {
        self.rows[row].degree() <= TWO_BODY_DEGREE
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.basis
            .blocks
            .iter()
            .map(|b| b.monomials.len())
            .collect()
    }

    /// Image `(row, phase)` of the ordered Gram entry `(a, b)` of `block`.
    ///
    /// Derived from the stored upper-triangle entry: the image of `(b, a)` is
    /// the adjoint of the image of `(a, b)`.
    pub fn pair_image(&self, block: usize, a: usize, b: usize) -> Option<(usize, f64)> {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let kind = self.basis.blocks[block].kind;
        let mons = &self.basis.blocks[block].monomials;
        let (phase, out) = pair_phase(kind, mons[lo], mons[hi]);
        if phase == 0.0
            || (self.basis.parity_blocking && (mons[lo].degree() + mons[hi].degree()) % 2 == 1)
        {
            return None;
        }
        let row = self.row_of(out)?;
        if a <= b {
            Some((row, phase))
        } else {
            Some((row, phase * f64::from(out.adjoint_sign())))
        }
    }

    /// Operator `sum_blocks sum_ab X_ab (image of (a, b))` for Hermitian Gram blocks.
    pub fn gram_operator(&self, gram: &[Mat<Complex>]) -> Result<OperatorPoly> {
        let coefs = self.gram_coefficients(gram)?;
        OperatorPoly::from_terms(self.modes(), self.rows.iter().copied().zip(coefs))
    }

    /// Coefficients of [`Self::gram_operator`] over `rows`.
    pub fn gram_coefficients(&self, gram: &[Mat<Complex>]) -> Result<Vec<Complex>> {
        if gram.len() != self.pairs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.pairs.len(),
                found: gram.len(),
            });
        }
        let mut coefs = alloc::vec![Complex::zero(); self.rows.len()];
        for (entries, x) in self.pairs.iter().zip(gram) {
            for e in entries {
                let (a, b) = (e.a as usize, e.b as usize);
                let row = e.row as usize;
                if a == b {
                    coefs[row] += x[(a, a)] * e.phase;
                } else {
                    let s = f64::from(self.rows[row].adjoint_sign());
                    coefs[row] += (x[(a, b)] + x[(b, a)] * s) * e.phase;
                }
            }
        }
        Ok(coefs)
    }

    /// Smallest-norm Hermitian Gram blocks whose image matches `residual` on
    /// every non-identity row. Diagonal entries (which all land on the
    /// identity) are left at zero.
    ///
    /// On Hermitian monomials only the real part of `residual` is reachable,
    /// on anti-Hermitian ones only the imaginary part.
    pub fn gram_correction(&self, residual: &[Complex]) -> Result<Vec<Mat<Complex>>> {
        if residual.len() != self.rows.len() {
            return Err(Error::DimensionMismatch {
                expected: self.rows.len(),
                found: residual.len(),
            });
        }
        // image of the off-diagonal pair (a, b) is 2 phase Re(x_ab) on
        // Hermitian rows and 2i phase Im(x_ab) on anti-Hermitian rows
        let mut weight = alloc::vec![0.0f64; self.rows.len()];
        for e in self.pairs.iter().flatten().filter(|e| e.a != e.b) {
            weight[e.row as usize] += 4.0 * e.phase * e.phase;
        }
        let mut out = Vec::with_capacity(self.pairs.len());
        for (entries, block) in self.pairs.iter().zip(&self.basis.blocks) {
            let n = block.monomials.len();
            let mut x = Mat::<Complex>::zeros(n, n);
            for e in entries.iter().filter(|e| e.a != e.b) {
                let row = e.row as usize;
                if row == self.identity_row || weight[row] == 0.0 {
                    continue;
                }
                let t = 2.0 * e.phase / weight[row];
                let v = if self.rows[row].adjoint_sign() > 0 {
                    Complex::new(t * residual[row].re, 0.0)
                } else {
                    Complex::new(0.0, t * residual[row].im)
                };
                let (a, b) = (e.a as usize, e.b as usize);
                x[(a, b)] += v;
                x[(b, a)] += v.conj();
            }
            out.push(x);
        }
        Ok(out)
    }

    /// Coefficients of a Hermitian two-body operator over all rows (zero on
    /// forbidden rows).
    pub fn target_coefficients(&self, h: &OperatorPoly) -> Result<Vec<Complex>> {
        if h.modes() != self.modes() {
            return Err(Error::RankMismatch {
                left: h.rank(),
                right: 2 * self.modes(),
            });
        }
        let defect = h.hermiticity_defect();
        if defect > 1e-10 * (1.0 + h.max_abs()) {
            return Err(Error::NotHermitian { defect });
        }
        let mut out = alloc::vec![Complex::zero(); self.rows.len()];
        for (m, c) in h.terms() {
            if m.degree() > TWO_BODY_DEGREE {
                return Err(Error::NotTwoBody { degree: m.degree() });
            }
            let row = self
                .row_of(m)
                .ok_or(Error::Unrepresentable { mask: m.mask() })?;
            out[row] = c;
        }
        Ok(out)
    }

    /// Coefficients of `(N - n0)^2` over all rows.
    pub fn variance_coefficients(&self, n0: f64) -> Result<Vec<Complex>> {
        self.target_coefficients(&variance_operator(self.modes(), n0)?)
    }
}

/// `(N - n0 I)^2`.
pub fn variance_operator(modes: usize, n0: f64) -> Result<OperatorPoly> {
    if !(n0 >= 0.0) || !n0.is_finite() {
        return Err(Error::InvalidParameter(
            "target particle number must be finite and >= 0",
        ));
    }
    let mut shifted = number_operator(modes);
    shifted.add_term(Monomial::IDENTITY, Complex::new(-n0, 0.0));
    shifted.mul(&shifted)
}

//! Clifford algebra of the Majorana-like generators `p_i = a_i + a_i^†` and
//! `m_i = a_i - a_i^†`.
//!
//! Orbitals are indexed from zero. Generator slot `2i` holds `p_i` and slot
//! `2i + 1` holds `m_i`; a [`Monomial`] is the ordered product of the
//! generators whose slots are set in its mask, in ascending slot order.
//! `p_i^2 = +I`, `m_i^2 = -I`, and distinct generators anticommute.

use alloc::collections::btree_map::{BTreeMap, Entry};
use alloc::vec::Vec;
use core::fmt;

use num_traits::Zero;

use crate::{Complex, Error, Result};

/// Coefficients with modulus at or below this value are dropped.
pub const DEFAULT_DROP_TOL: f64 = 1e-14;

/// Largest number of orbitals a 64-bit monomial mask can address.
pub const MAX_MODES: usize = 32;

const M_SLOTS: u64 = 0xAAAA_AAAA_AAAA_AAAA;

/// Product of distinct Majorana generators in canonical slot order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(u64);

impl Monomial {
    pub const IDENTITY: Monomial = Monomial(0);

    pub const fn from_mask(mask: u64) -> Self {
        Monomial(mask)
    }

    pub const fn mask(self) -> u64 {
        self.0
    }

    /// The Hermitian generator `p_i`.
    pub fn p(orbital: usize) -> Self {
        assert!(orbital < MAX_MODES, "orbital {orbital} out of range");
        Monomial(1 << (2 * orbital))
    }

    /// The anti-Hermitian generator `m_i`.
    pub fn m(orbital: usize) -> Self {
        assert!(orbital < MAX_MODES, "orbital {orbital} out of range");
        Monomial(1 << (2 * orbital + 1))
    }

    /// Generator by raw slot index (`2i` is `p_i`, `2i + 1` is `m_i`).
    pub fn generator(slot: usize) -> Self {
        assert!(slot < 2 * MAX_MODES, "slot {slot} out of range");
        Monomial(1 << slot)
    }

    /// Multiplies out an arbitrary word of generator slots, left to right.
    pub fn from_slots(slots: &[usize]) -> (i8, Monomial) {
        slots
            .iter()
            .fold((1, Monomial::IDENTITY), |(sign, acc), &s| {
                let (t, out) = acc.mul(Monomial::generator(s));
                (sign * t, out)
            })
    }

    pub const fn degree(self) -> u32 {
        self.0.count_ones()
    }

    /// Number of anti-Hermitian (`m`) generators.
    pub const fn m_count(self) -> u32 {
        (self.0 & M_SLOTS).count_ones()
    }

    /// Body order `ceil(degree / 2)`.
    pub const fn body_order(self) -> u32 {
        self.degree().div_ceil(2)
    }

    pub const fn is_identity(self) -> bool {
        self.0 == 0
    }

    pub const fn is_even(self) -> bool {
        self.degree() % 2 == 0
    }

    /// Number of orbitals needed to host this monomial.
    pub const fn min_modes(self) -> usize {
        (64 - self.0.leading_zeros() as usize).div_ceil(2)
    }

    /// `s` such that `self^† = s * self`.
    pub const fn adjoint_sign(self) -> i8 {
        let d = self.degree();
        let flips = d * d.saturating_sub(1) / 2 + self.m_count();
        if flips % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub const fn is_hermitian(self) -> bool {
        self.adjoint_sign() == 1
    }

    /// Clifford product `self * rhs = sign * out`.
    pub fn mul(self, rhs: Monomial) -> (i8, Monomial) {
        let a = self.0;
        let mut swaps = 0u32;
        let mut rest = rhs.0;
        while rest != 0 {
            let j = rest.trailing_zeros();
            swaps += a.checked_shr(j + 1).unwrap_or(0).count_ones();
            rest &= rest - 1;
        }
        swaps += (a & rhs.0 & M_SLOTS).count_ones();
        let sign = if swaps % 2 == 0 { 1 } else { -1 };
        (sign, Monomial(a ^ rhs.0))
    }

    /// Slots of the generators, ascending.
    pub fn slots(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        core::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let s = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(s)
            }
        })
    }

    /// All monomials of the given degree over `2 * modes` slots, ascending by mask.
    pub fn all_of_degree(modes: usize, degree: usize) -> Vec<Monomial> {
        let slots = 2 * modes;
        let mut out = Vec::new();
        if degree > slots {
            return out;
        }
        let mut idx: Vec<usize> = (0..degree).collect();
        loop {
            out.push(Monomial(idx.iter().fold(0u64, |m, &s| m | (1 << s))));
            let mut k = degree;
            loop {
                if k == 0 {
                    out.sort_unstable();
                    return out;
                }
                k -= 1;
                if idx[k] < slots - degree + k {
                    break;
                }
            }
            idx[k] += 1;
            for t in k + 1..degree {
                idx[t] = idx[t - 1] + 1;
            }
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return f.write_str("I");
        }
        for (n, s) in self.slots().enumerate() {
            if n > 0 {
                f.write_str(" ")?;
            }
            let kind = if s % 2 == 0 { 'p' } else { 'm' };
            write!(f, "{kind}{}", s / 2)?;
        }
        Ok(())
    }
}

/// Finite complex linear combination of monomials on `modes` orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorPoly {
    modes: usize,
    terms: BTreeMap<Monomial, Complex>,
    drop_tol: f64,
}

impl OperatorPoly {
    pub fn zero(modes: usize) -> Self {
        assert!(
            modes <= MAX_MODES,
            "at most {MAX_MODES} orbitals are supported"
        );
        OperatorPoly {
            modes,
            terms: BTreeMap::new(),
            drop_tol: DEFAULT_DROP_TOL,
        }
    }

    pub fn identity(modes: usize) -> Self {
        Self::scalar(modes, Complex::new(1.0, 0.0))
    }

    pub fn scalar(modes: usize, c: Complex) -> Self {
        Self::monomial(modes, Monomial::IDENTITY, c)
    }

    /// `c * m`. Panics if `m` does not fit in `modes` orbitals.
    pub fn monomial(modes: usize, m: Monomial, c: Complex) -> Self {
        let mut out = Self::zero(modes);
        out.add_term(m, c);
        out
    }

    pub fn from_terms<I>(modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Complex)>,
    {
        let mut out = Self::zero(modes);
        for (m, c) in terms {
            if m.min_modes() > modes {
                return Err(Error::OrbitalOutOfRange {
                    index: m.min_modes() - 1,
                    modes,
                });
            }
            out.add_term(m, c);
        }
        Ok(out)
    }

    /// Replaces the pruning threshold and re-prunes.
    pub fn with_drop_tol(mut self, tol: f64) -> Self {
        self.drop_tol = tol;
        self.prune();
        self
    }

    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Number of generators, `2 * modes`.
    pub fn rank(&self) -> usize {
        2 * self.modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, *c))
    }

    pub fn coefficient(&self, m: Monomial) -> Complex {
        self.terms.get(&m).copied().unwrap_or_else(Complex::zero)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Adds `c * m` in place, merging with an existing term.
    pub fn add_term(&mut self, m: Monomial, c: Complex) {
        assert!(
            m.min_modes() <= self.modes,
            "monomial {m} does not fit in {} orbitals",
            self.modes
        );
        let tol = self.drop_tol;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v.norm() <= tol {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                if c.norm() > tol {
                    e.insert(c);
                }
            }
        }
    }

    fn prune(&mut self) {
        let tol = self.drop_tol;
        self.terms.retain(|_, c| c.norm() > tol);
    }

    fn check_modes(&self, other: &OperatorPoly) -> Result<()> {
        if self.modes == other.modes {
            Ok(())
        } else {
            Err(Error::RankMismatch {
                left: self.rank(),
                right: other.rank(),
            })
        }
    }

    pub fn scale(&self, c: Complex) -> OperatorPoly {
        let mut out = OperatorPoly::zero(self.modes).with_drop_tol(self.drop_tol);
        for (m, v) in self.terms() {
            out.add_term(m, v * c);
        }
        out
    }

    pub fn add(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        linear_combine(&[
            (Complex::new(1.0, 0.0), self),
            (Complex::new(1.0, 0.0), other),
        ])
    }

    pub fn sub(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        linear_combine(&[
            (Complex::new(1.0, 0.0), self),
            (Complex::new(-1.0, 0.0), other),
        ])
    }

    pub fn mul(&self, other: &OperatorPoly) -> Result<OperatorPoly> {
        op_product(self, other)
    }

    pub fn adjoint(&self) -> OperatorPoly {
        adjoint(self)
    }

    /// Largest `|c_m s_m - conj(c_m)|`; zero exactly when the operator is Hermitian.
    pub fn hermiticity_defect(&self) -> f64 {
        self.terms()
            .map(|(m, c)| (c * f64::from(m.adjoint_sign()) - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &OperatorPoly) -> Result<f64> {
        self.check_modes(other)?;
        let mut worst: f64 = 0.0;
        for (m, c) in self.terms() {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (m, c) in other.terms() {
            if !self.terms.contains_key(&m) {
                worst = worst.max(c.norm());
            }
        }
        Ok(worst)
    }

    /// True if every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im == 0.0)
    }
}

/// Product of two monomials with its sign.
pub fn monomial_product(a: Monomial, b: Monomial) -> (i8, Monomial) {
    a.mul(b)
}

pub fn adjoint(a: &OperatorPoly) -> OperatorPoly {
    let mut out = OperatorPoly::zero(a.modes).with_drop_tol(a.drop_tol);
    for (m, c) in a.terms() {
        out.add_term(m, c.conj() * f64::from(m.adjoint_sign()));
    }
    out
}

pub fn op_product(a: &OperatorPoly, b: &OperatorPoly) -> Result<OperatorPoly> {
    a.check_modes(b)?;
    let mut acc: BTreeMap<Monomial, Complex> = BTreeMap::new();
    for (ma, ca) in a.terms() {
        for (mb, cb) in b.terms() {
            let (sign, m) = ma.mul(mb);
            *acc.entry(m).or_insert_with(Complex::zero) += ca * cb * f64::from(sign);
        }
    }
    let mut out = OperatorPoly::zero(a.modes).with_drop_tol(a.drop_tol);
    out.terms = acc;
    out.prune();
    Ok(out)
}

/// `sum_k c_k A_k`; all operands must share one rank. An empty list is an error.
pub fn linear_combine(pairs: &[(Complex, &OperatorPoly)]) -> Result<OperatorPoly> {
    let (_, first) = pairs.first().ok_or(Error::EmptyCombination)?;
    let mut acc: BTreeMap<Monomial, Complex> = BTreeMap::new();
    for (c, op) in pairs {
        first.check_modes(op)?;
        for (m, v) in op.terms() {
            *acc.entry(m).or_insert_with(Complex::zero) += *c * v;
        }
    }
    let mut out = OperatorPoly::zero(first.modes).with_drop_tol(first.drop_tol);
    out.terms = acc;
    out.prune();
    Ok(out)
}

/// Restriction to monomials of body order `p`, i.e. degrees `2p - 1` and `2p`.
pub fn body_component(a: &OperatorPoly, p: u32) -> OperatorPoly {
    let mut out = OperatorPoly::zero(a.modes).with_drop_tol(a.drop_tol);
    out.terms = a
        .terms
        .iter()
        .filter(|(m, _)| m.body_order() == p)
        .map(|(m, c)| (*m, *c))
        .collect();
    out
}

/// A single fermionic ladder operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ladder {
    pub orbital: usize,
    pub creation: bool,
}

impl Ladder {
    pub fn create(orbital: usize) -> Self {
        Ladder {
            orbital,
            creation: true,
        }
    }

    pub fn annihilate(orbital: usize) -> Self {
        Ladder {
            orbital,
            creation: false,
        }
    }
}

/// `prefactor * l_1 l_2 ... l_k` for ladder operators `l_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct FermionString {
    pub ops: Vec<Ladder>,
    pub prefactor: Complex,
}

impl FermionString {
    pub fn new(ops: Vec<Ladder>) -> Self {
        FermionString {
            ops,
            prefactor: Complex::new(1.0, 0.0),
        }
    }

    pub fn identity() -> Self {
        Self::new(Vec::new())
    }

    pub fn scaled(mut self, c: Complex) -> Self {
        self.prefactor *= c;
        self
    }

    /// `a_i^† a_j^† a_l a_k`, the pair operator indexing the 2-RDM element `D^{ij}_{kl}`.
    pub fn pair_transition(i: usize, j: usize, k: usize, l: usize) -> Self {
        Self::new(alloc::vec![
            Ladder::create(i),
            Ladder::create(j),
            Ladder::annihilate(l),
            Ladder::annihilate(k),
        ])
    }

    pub fn to_operator(&self, modes: usize) -> Result<OperatorPoly> {
        from_fermion_string(self, modes)
    }
}

/// Expands a ladder-operator string through `a = (p + m)/2`, `a^† = (p - m)/2`.
pub fn from_fermion_string(s: &FermionString, modes: usize) -> Result<OperatorPoly> {
    let mut acc = OperatorPoly::scalar(modes, s.prefactor);
    let half = Complex::new(0.5, 0.0);
    for op in &s.ops {
        if op.orbital >= modes {
            return Err(Error::OrbitalOutOfRange {
                index: op.orbital,
                modes,
            });
        }
        let m_coef = if op.creation { -half } else { half };
        let factor = OperatorPoly::from_terms(
            modes,
            [
                (Monomial::p(op.orbital), half),
                (Monomial::m(op.orbital), m_coef),
            ],
        )?;
        acc = op_product(&acc, &factor)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    #[test]
    fn generator_squares() {
        assert_eq!(Monomial::p(0).mul(Monomial::p(0)), (1, Monomial::IDENTITY));
        assert_eq!(Monomial::m(0).mul(Monomial::m(0)), (-1, Monomial::IDENTITY));
    }

    #[test]
    fn adjacent_elimination_and_swap() {
        let (_, p1p2) = Monomial::p(0).mul(Monomial::p(1));
        let (_, p2m3) = Monomial::p(1).mul(Monomial::m(2));
        let (_, p1m3) = Monomial::p(0).mul(Monomial::m(2));
        assert_eq!(p1p2.mul(p2m3), (1, p1m3));
        assert_eq!(Monomial::p(1).mul(Monomial::p(0)), (-1, p1p2));
    }

    #[test]
    fn adjoint_signs() {
        let (_, pm) = Monomial::p(0).mul(Monomial::m(1));
        let (_, pp) = Monomial::p(0).mul(Monomial::p(1));
        assert_eq!(pm.adjoint_sign(), 1);
        assert_eq!(pp.adjoint_sign(), -1);
        let a = OperatorPoly::scalar(2, Complex::new(1.0, 2.0));
        assert_eq!(
            adjoint(&a).coefficient(Monomial::IDENTITY),
            Complex::new(1.0, -2.0)
        );
    }

    #[test]
    fn identity_and_square_elimination() {
        let a = OperatorPoly::from_terms(2, [(Monomial::p(0), c(2.0)), (Monomial::m(1), c(-1.0))])
            .unwrap();
        assert_eq!(op_product(&OperatorPoly::identity(2), &a).unwrap(), a);
        let (_, pm) = Monomial::p(0).mul(Monomial::m(0));
        let lhs = OperatorPoly::monomial(1, Monomial::p(0), c(1.0));
        let rhs = OperatorPoly::monomial(1, pm, c(1.0));
        assert_eq!(
            op_product(&lhs, &rhs).unwrap(),
            OperatorPoly::monomial(1, Monomial::m(0), c(1.0))
        );
    }

    #[test]
    fn rank_mismatch_is_an_error() {
        let a = OperatorPoly::identity(2);
        let b = OperatorPoly::identity(3);
        assert!(matches!(
            op_product(&a, &b),
            Err(Error::RankMismatch { left: 4, right: 6 })
        ));
        assert!(linear_combine(&[(c(1.0), &a), (c(1.0), &b)]).is_err());
        assert!(linear_combine(&[]).is_err());
    }

    #[test]
    fn linear_combinations_cancel() {
        let a = OperatorPoly::from_terms(2, [(Monomial::p(1), c(0.3))]).unwrap();
        assert!(linear_combine(&[(c(1.0), &a), (c(-1.0), &a)])
            .unwrap()
            .is_zero());
        let i = OperatorPoly::identity(2);
        assert_eq!(linear_combine(&[(c(0.5), &i), (c(0.5), &i)]).unwrap(), i);
    }

    #[test]
    fn number_term_identity() {
        // (mu/2)(r I + sum p_i m_i) - mu sum (I + p_i m_i)/2 == 0
        let r = 4;
        let mu = -0.2;
        let mut lhs = OperatorPoly::scalar(r, c(mu * r as f64 / 2.0));
        let mut rhs = OperatorPoly::zero(r);
        for i in 0..r {
            let (_, pm) = Monomial::p(i).mul(Monomial::m(i));
            lhs.add_term(pm, c(mu / 2.0));
            rhs.add_term(Monomial::IDENTITY, c(mu / 2.0));
            rhs.add_term(pm, c(mu / 2.0));
        }
        assert!(lhs.sub(&rhs).unwrap().is_zero());
    }

    #[test]
    fn ladder_expansions() {
        let n = FermionString::new(alloc::vec![Ladder::create(0), Ladder::annihilate(0)]);
        let (_, pm) = Monomial::p(0).mul(Monomial::m(0));
        let expected =
            OperatorPoly::from_terms(1, [(Monomial::IDENTITY, c(0.5)), (pm, c(0.5))]).unwrap();
        assert_eq!(n.to_operator(1).unwrap(), expected);

        let a = FermionString::new(alloc::vec![Ladder::annihilate(0)]);
        let expected =
            OperatorPoly::from_terms(1, [(Monomial::p(0), c(0.5)), (Monomial::m(0), c(0.5))])
                .unwrap();
        assert_eq!(a.to_operator(1).unwrap(), expected);

        let bad = FermionString::new(alloc::vec![Ladder::create(3)]);
        assert!(matches!(
            bad.to_operator(2),
            Err(Error::OrbitalOutOfRange { index: 3, modes: 2 })
        ));
    }

    #[test]
    fn body_components() {
        let i = OperatorPoly::identity(3);
        assert_eq!(body_component(&i, 0), i);
        let (_, pp) = Monomial::p(0).mul(Monomial::p(1));
        let (_, ppp) = pp.mul(Monomial::m(2));
        let a = OperatorPoly::from_terms(
            3,
            [
                (Monomial::IDENTITY, c(1.0)),
                (Monomial::m(1), c(2.0)),
                (pp, c(3.0)),
                (ppp, c(4.0)),
            ],
        )
        .unwrap();
        assert_eq!(body_component(&a, 1).len(), 2);
        assert_eq!(body_component(&a, 2).len(), 1);
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(Monomial::all_of_degree(6, 2).len(), 66);
        assert_eq!(Monomial::all_of_degree(6, 3).len(), 220);
        assert_eq!(
            Monomial::all_of_degree(2, 0),
            alloc::vec![Monomial::IDENTITY]
        );
        assert!(Monomial::all_of_degree(1, 3).is_empty());
        let d3 = Monomial::all_of_degree(4, 3);
        assert!(d3.windows(2).all(|w| w[0] < w[1]));
        assert!(d3.iter().all(|m| m.degree() == 3 && m.min_modes() <= 4));
    }

    #[test]
    fn from_slots_handles_repeats() {
        // m0 p0 m0 = -p0 m0 m0 = p0
        assert_eq!(Monomial::from_slots(&[1, 0, 1]), (1, Monomial::p(0)));
    }

    #[test]
    fn display() {
        let (_, pm) = Monomial::p(0).mul(Monomial::m(2));
        assert_eq!(alloc::format!("{pm}"), "p0 m2");
        assert_eq!(alloc::format!("{}", Monomial::IDENTITY), "I");
    }
}

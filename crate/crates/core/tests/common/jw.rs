//! Explicit Jordan-Wigner matrices built from ladder operators. Never touches
//! the crate's own Fock-space code, so it serves as an independent oracle.
#![allow(dead_code)]

use faer::Mat;
use rand::Rng;
use v2rdm_core::majorana::{adjoint, monomial_product};
use v2rdm_core::{operator_matrix, Complex, Monomial, OperatorPoly};

pub fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Annihilator of `orbital` on `modes` orbitals: bit `i` of a basis index is
/// the occupation of orbital `i`, and the sign counts occupied lower orbitals.
pub fn annihilator(modes: usize, orbital: usize) -> Mat<Complex> {
    let dim = 1usize << modes;
    let mut out = Mat::<Complex>::zeros(dim, dim);
    for n in 0..dim {
        if n >> orbital & 1 == 1 {
            let below = (n & ((1 << orbital) - 1)).count_ones();
            let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
            out[(n ^ (1 << orbital), n)] = c(sign);
        }
    }
    out
}

pub fn dagger(a: &Mat<Complex>) -> Mat<Complex> {
    Mat::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)].conj())
}

/// Slot `2i` is `a_i + a_i^†`, slot `2i + 1` is `a_i - a_i^†`.
pub fn generator_matrix(modes: usize, slot: usize) -> Mat<Complex> {
    let a = annihilator(modes, slot / 2);
    let ad = dagger(&a);
    if slot % 2 == 0 {
        &a + &ad
    } else {
        &a - &ad
    }
}

pub fn identity(dim: usize) -> Mat<Complex> {
    Mat::from_fn(dim, dim, |i, j| if i == j { c(1.0) } else { c(0.0) })
}

pub fn monomial_matrix(modes: usize, m: Monomial) -> Mat<Complex> {
    let mut out = identity(1 << modes);
    for slot in m.slots() {
        out = &out * generator_matrix(modes, slot);
    }
    out
}

pub fn poly_matrix(a: &OperatorPoly) -> Mat<Complex> {
    let dim = 1usize << a.modes();
    let mut out = Mat::<Complex>::zeros(dim, dim);
    for (m, coef) in a.terms() {
        let mm = monomial_matrix(a.modes(), m);
        out = out + Mat::from_fn(dim, dim, |i, j| mm[(i, j)] * coef);
    }
    out
}

pub fn max_diff(a: &Mat<Complex>, b: &Mat<Complex>) -> f64 {
    let mut d: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            d = d.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    d
}

pub fn random_monomial(rng: &mut impl Rng, modes: usize) -> Monomial {
    Monomial::from_mask(rng.random_range(0..1u64 << (2 * modes)))
}

pub fn random_poly(rng: &mut impl Rng, modes: usize) -> OperatorPoly {
    let terms = rng.random_range(1..6);
    OperatorPoly::from_terms(
        modes,
        (0..terms).map(|_| {
            (
                random_monomial(rng, modes),
                Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            )
        }),
    )
    .unwrap()
}

/// Largest deviation over `count` random monomial pairs on up to four orbitals
/// of the product sign and the adjoint sign from the matrix products.
pub fn monomial_pair_defect(rng: &mut impl Rng, count: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let modes = rng.random_range(1..=4);
        let a = random_monomial(rng, modes);
        let b = random_monomial(rng, modes);
        let (sign, ab) = monomial_product(a, b);
        let lhs = {
            let m = monomial_matrix(modes, ab);
            Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * f64::from(sign))
        };
        let rhs = &monomial_matrix(modes, a) * &monomial_matrix(modes, b);
        worst = worst.max(max_diff(&lhs, &rhs));

        let ma = monomial_matrix(modes, a);
        let s = f64::from(a.adjoint_sign());
        let adj_sym = Mat::from_fn(ma.nrows(), ma.ncols(), |i, j| ma[(i, j)] * s);
        worst = worst.max(max_diff(&adj_sym, &dagger(&ma)));
    }
    worst
}

/// Same for random polynomials: products, adjoints and sums.
pub fn operator_pair_defect(rng: &mut impl Rng, count: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let modes = rng.random_range(1..=4);
        let a = random_poly(rng, modes);
        let b = random_poly(rng, modes);
        let (pa, pb) = (poly_matrix(&a), poly_matrix(&b));

        let prod = operator_matrix(&a.mul(&b).unwrap()).unwrap();
        worst = worst.max(max_diff(prod.as_mat(), &(&pa * &pb)));
        let adj = operator_matrix(&adjoint(&a)).unwrap();
        worst = worst.max(max_diff(adj.as_mat(), &dagger(&pa)));
        let sum = operator_matrix(&a.add(&b).unwrap()).unwrap();
        worst = worst.max(max_diff(sum.as_mat(), &(&pa + &pb)));
    }
    worst
}

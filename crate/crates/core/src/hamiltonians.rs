//! Benchmark Hamiltonians.

use alloc::vec;
use alloc::vec::Vec;

use crate::majorana::{from_fermion_string, FermionString, Ladder, Monomial, OperatorPoly};
use crate::{Complex, Error, Result};

/// Couplings of the periodic pairing ring.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RingParams {
    pub sites: usize,
    pub mu: f64,
    pub tau: f64,
    pub delta: f64,
    pub kappa: f64,
}

impl RingParams {
    /// Six sites with `mu = -0.2`, `tau = delta = 0.5` and the given `kappa / tau`.
    pub fn benchmark(kappa_over_tau: f64) -> Self {
        RingParams {
            sites: 6,
            mu: -0.2,
            tau: 0.5,
            delta: 0.5,
            kappa: kappa_over_tau * 0.5,
        }
    }
}

fn p_slot(site: usize) -> usize {
    2 * site
}

fn m_slot(site: usize) -> usize {
    2 * site + 1
}

/// Pairing ring Hamiltonian
///
/// ```text
/// H = mu/2 (r I + sum_i p_i m_i)
///   + sum_i [ (tau + delta)/2 p_i m_{i+1} + (tau - delta)/2 p_{i+1} m_i ]
///   + kappa sum_i [ p_i p_{i+1} m_{i+2} m_{i+3} + p_i m_{i+1} p_{i+2} m_{i+3} ]
/// ```
///
/// with site indices taken modulo `r`.
pub fn ring_hamiltonian(params: &RingParams) -> Result<OperatorPoly> {
    let r = params.sites;
    if r < 2 {
        return Err(Error::InvalidParameter("ring needs at least two sites"));
    }
    if r > crate::majorana::MAX_MODES {
        return Err(Error::ResourceLimit {
            what: "ring sites",
            size: r,
            cap: crate::majorana::MAX_MODES,
        });
    }
    let mut h = OperatorPoly::scalar(r, re(params.mu * r as f64 / 2.0));
    let mut add_word = |slots: &[usize], coef: f64| {
        let (sign, m) = Monomial::from_slots(slots);
        h.add_term(m, re(coef * f64::from(sign)));
    };
    for i in 0..r {
        let (j, k, l) = ((i + 1) % r, (i + 2) % r, (i + 3) % r);
        add_word(&[p_slot(i), m_slot(i)], params.mu / 2.0);
        add_word(&[p_slot(i), m_slot(j)], (params.tau + params.delta) / 2.0);
        add_word(&[p_slot(j), m_slot(i)], (params.tau - params.delta) / 2.0);
        add_word(&[p_slot(i), p_slot(j), m_slot(k), m_slot(l)], params.kappa);
        add_word(&[p_slot(i), m_slot(j), p_slot(k), m_slot(l)], params.kappa);
    }
    Ok(h)
}

/// `N = sum_i a_i^† a_i = sum_i (I + p_i m_i) / 2`.
pub fn number_operator(modes: usize) -> OperatorPoly {
    let mut n = OperatorPoly::zero(modes);
    for i in 0..modes {
        let (sign, pm) = Monomial::p(i).mul(Monomial::m(i));
        n.add_term(Monomial::IDENTITY, re(0.5));
        n.add_term(pm, re(0.5 * f64::from(sign)));
    }
    n
}

fn re(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// Real molecular integrals over `n_orbitals` spatial orbitals.
///
/// Two-electron integrals are in chemists' notation `(pq|rs)` and stored
/// densely; the setters fill all eight symmetry-equivalent positions.
#[derive(Clone, Debug, PartialEq)]
pub struct MolecularSystem {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub core_energy: f64,
    one_body: Vec<f64>,
    two_body: Vec<f64>,
}

impl MolecularSystem {
    pub fn new(n_orbitals: usize, n_electrons: usize) -> Self {
        let k = n_orbitals;
        MolecularSystem {
            n_orbitals,
            n_electrons,
            core_energy: 0.0,
            one_body: vec![0.0; k * k],
            two_body: vec![0.0; k * k * k * k],
        }
    }

    pub fn spin_orbitals(&self) -> usize {
        2 * self.n_orbitals
    }

    fn idx2(&self, p: usize, q: usize) -> usize {
        p * self.n_orbitals + q
    }

    fn idx4(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let k = self.n_orbitals;
        ((p * k + q) * k + r) * k + s
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.n_orbitals) {
            Some(&index) => Err(Error::OrbitalOutOfRange {
                index,
                modes: self.n_orbitals,
            }),
            None => Ok(()),
        }
    }

    pub fn one_body(&self, p: usize, q: usize) -> f64 {
        self.one_body[self.idx2(p, q)]
    }

    pub fn two_body(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.two_body[self.idx4(p, q, r, s)]
    }

    /// Sets `h_pq = h_qp = value`.
    pub fn set_one_body(&mut self, p: usize, q: usize, value: f64) -> Result<()> {
        self.check_index(&[p, q])?;
        let (a, b) = (self.idx2(p, q), self.idx2(q, p));
        self.one_body[a] = value;
        self.one_body[b] = value;
        Ok(())
    }

    /// Sets `(pq|rs)` and its seven symmetry images.
    pub fn set_two_body(
        &mut self,
        p: usize,
        q: usize,
        r: usize,
        s: usize,
        value: f64,
    ) -> Result<()> {
        self.check_index(&[p, q, r, s])?;
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.idx4(a, b, c, d);
            self.two_body[i] = value;
        }
        Ok(())
    }

    /// Largest violation of `h_pq = h_qp` and the eightfold `(pq|rs)` symmetry.
    pub fn symmetry_defect(&self) -> f64 {
        let k = self.n_orbitals;
        let mut worst: f64 = 0.0;
        for p in 0..k {
            for q in 0..k {
                worst = worst.max((self.one_body(p, q) - self.one_body(q, p)).abs());
                for r in 0..k {
                    for s in 0..k {
                        let v = self.two_body(p, q, r, s);
                        for w in [
                            self.two_body(q, p, r, s),
                            self.two_body(p, q, s, r),
                            self.two_body(r, s, p, q),
                        ] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }
}

/// Second-quantized molecular Hamiltonian on `2 * n_orbitals` spin orbitals
///
/// ```text
/// H = E_core + sum_{pq,s} h_pq a†_{ps} a_{qs}
///   + 1/2 sum_{pqrs,s,t} (pq|rs) a†_{ps} a†_{rt} a_{st} a_{qs}
/// ```
///
/// Spin orbitals are interleaved: spatial orbital `k` maps to `2k` (alpha)
/// and `2k + 1` (beta).
pub fn molecular_hamiltonian(sys: &MolecularSystem) -> Result<OperatorPoly> {
    let defect = sys.symmetry_defect();
    if defect > 1e-10 {
        return Err(Error::InvalidParameter(
            "integrals violate permutational symmetry",
        ));
    }
    let k = sys.n_orbitals;
    let modes = sys.spin_orbitals();
    let mut h = OperatorPoly::scalar(modes, re(sys.core_energy));
    let so = |orb: usize, spin: usize| 2 * orb + spin;
    let mut accumulate = |s: FermionString| -> Result<()> {
        for (m, c) in from_fermion_string(&s, modes)?.terms() {
            h.add_term(m, c);
        }
        Ok(())
    };
    for p in 0..k {
        for q in 0..k {
            let v = sys.one_body(p, q);
            if v == 0.0 {
                continue;
            }
            for spin in 0..2 {
                accumulate(
                    FermionString::new(vec![
                        Ladder::create(so(p, spin)),
                        Ladder::annihilate(so(q, spin)),
                    ])
                    .scaled(re(v)),
                )?;
            }
        }
    }
    for p in 0..k {
        for q in 0..k {
            for r in 0..k {
                for s in 0..k {
                    let v = sys.two_body(p, q, r, s);
                    if v == 0.0 {
                        continue;
                    }
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            if so(p, s1) == so(r, s2) || so(q, s1) == so(s, s2) {
                                continue;
                            }
                            accumulate(
                                FermionString::new(vec![
                                    Ladder::create(so(p, s1)),
                                    Ladder::create(so(r, s2)),
                                    Ladder::annihilate(so(s, s2)),
                                    Ladder::annihilate(so(q, s1)),
                                ])
                                .scaled(re(0.5 * v)),
                            )?;
                        }
                    }
                }
            }
        }
    }
    let degree = h.max_degree();
    if degree > 4 {
        return Err(Error::NotTwoBody { degree });
    }
    Ok(h)
}

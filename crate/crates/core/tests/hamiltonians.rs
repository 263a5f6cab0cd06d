use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2rdm_core::fock::rdm_expectations;
use v2rdm_core::hamiltonians::MolecularSystem;
use v2rdm_core::sdp::rdm_element;
use v2rdm_core::{
    build_map, fci_ground, gram_basis, molecular_hamiltonian, number_operator, operator_matrix,
    ring_hamiltonian, BasisMode, Complex, FermionString, Ladder, Monomial, OperatorPoly,
    RingParams,
};

fn random_molecule(rng: &mut impl Rng, orbitals: usize, electrons: usize) -> MolecularSystem {
    let mut m = MolecularSystem::new(orbitals, electrons);
    m.core_energy = rng.random_range(0.0..1.0);
    for p in 0..orbitals {
        for q in 0..=p {
            m.set_one_body(p, q, rng.random_range(-1.0..1.0)).unwrap();
        }
    }
    for p in 0..orbitals {
        for q in 0..orbitals {
            for r in 0..orbitals {
                for s in 0..orbitals {
                    if m.two_body(p, q, r, s) == 0.0 {
                        let v = if p == q && r == s {
                            rng.random_range(0.3..0.8)
                        } else {
                            rng.random_range(-0.1..0.1)
                        };
                        m.set_two_body(p, q, r, s, v).unwrap();
                    }
                }
            }
        }
    }
    m
}

/// Site relabeling `i -> i + 1 (mod r)` applied to every monomial.
fn rotate_sites(h: &OperatorPoly, sites: usize) -> OperatorPoly {
    let mut out = OperatorPoly::zero(sites);
    for (m, c) in h.terms() {
        let slots: Vec<usize> = m
            .slots()
            .map(|s| 2 * ((s / 2 + 1) % sites) + s % 2)
            .collect();
        let (sign, rotated) = Monomial::from_slots(&slots);
        out.add_term(rotated, c * f64::from(sign));
    }
    out
}

#[test]
fn ring_spectrum_is_invariant_under_cyclic_relabeling() {
    let params = RingParams {
        sites: 4,
        ..RingParams::benchmark(1.25)
    };
    let h = ring_hamiltonian(&params).unwrap();
    let rotated = rotate_sites(&h, 4);
    assert!(rotated.max_abs_diff(&h).unwrap() < 1e-15);
    let a = operator_matrix(&h).unwrap().eigenvalues().unwrap();
    let b = operator_matrix(&rotated).unwrap().eigenvalues().unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn mu_terms_sum_to_number_operator() {
    let params = RingParams {
        sites: 5,
        mu: -0.7,
        tau: 0.0,
        delta: 0.0,
        kappa: 0.0,
    };
    let h = ring_hamiltonian(&params).unwrap();
    let expected = number_operator(5).scale(Complex::new(-0.7, 0.0));
    assert!(h.max_abs_diff(&expected).unwrap() < 1e-15);
}

#[test]
fn one_electron_system_fills_negative_orbitals() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut m = MolecularSystem::new(3, 2);
    for p in 0..3 {
        for q in 0..=p {
            m.set_one_body(p, q, rng.random_range(-1.0..1.0)).unwrap();
        }
    }
    let h = Mat::<f64>::from_fn(3, 3, |p, q| m.one_body(p, q));
    let eps = h.self_adjoint_eigenvalues(Side::Lower).unwrap();
    let oracle: f64 = eps.iter().map(|e| 2.0 * e.min(0.0)).sum();
    let fci = fci_ground(&molecular_hamiltonian(&m).unwrap(), 1e-10).unwrap();
    assert!((fci.energy - oracle).abs() < 1e-12);
}

#[test]
fn single_site_hubbard() {
    for (eps, u) in [(-1.0, 0.5), (-1.0, 3.0), (0.4, 1.0), (-0.3, -0.2)] {
        let mut m = MolecularSystem::new(1, 2);
        m.set_one_body(0, 0, eps).unwrap();
        m.set_two_body(0, 0, 0, 0, u).unwrap();
        let fci = fci_ground(&molecular_hamiltonian(&m).unwrap(), 1e-10).unwrap();
        let oracle = 0.0f64.min(eps).min(2.0 * eps + u);
        assert!((fci.energy - oracle).abs() < 1e-12, "eps={eps} U={u}");
    }
}

#[test]
fn molecular_hamiltonian_conserves_particle_number() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let m = random_molecule(&mut rng, 3, 2);
    let h = molecular_hamiltonian(&m).unwrap();
    let n = number_operator(6);
    let comm = h.mul(&n).unwrap().sub(&n.mul(&h).unwrap()).unwrap();
    let mat = operator_matrix(&comm).unwrap();
    for i in 0..mat.dim() {
        for j in 0..mat.dim() {
            assert!(mat.get(i, j).norm() < 1e-10);
        }
    }
    assert!(h.is_hermitian(1e-12));
    assert!(h.max_degree() <= 4);
    let sys = build_map(&gram_basis(6, 2, BasisMode::UpTo).unwrap());
    assert!(sys.target_coefficients(&h).is_ok());
}

#[test]
fn energy_is_the_trace_against_the_two_body_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let m = random_molecule(&mut rng, 2, 2);
    let h = molecular_hamiltonian(&m).unwrap();
    let fci = fci_ground(&h, 1e-10).unwrap();

    let modes = 4;
    let two_body: Vec<Monomial> = (0..=4)
        .flat_map(|d| Monomial::all_of_degree(modes, d))
        .collect();
    let values = rdm_expectations(&fci.state, &two_body).unwrap();
    let rdo = OperatorPoly::from_terms(modes, two_body.into_iter().zip(values)).unwrap();

    let spin = |k: usize, s: usize| 2 * k + s;
    let mut energy = Complex::new(m.core_energy, 0.0);
    for p in 0..2 {
        for q in 0..2 {
            for s in 0..2 {
                let gamma = FermionString::new(vec![
                    Ladder::create(spin(p, s)),
                    Ladder::annihilate(spin(q, s)),
                ]);
                energy += rdm_element(&rdo, &gamma).unwrap() * m.one_body(p, q);
            }
        }
    }
    for p in 0..2 {
        for q in 0..2 {
            for r in 0..2 {
                for t in 0..2 {
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            let gamma = FermionString::new(vec![
                                Ladder::create(spin(p, s1)),
                                Ladder::create(spin(r, s2)),
                                Ladder::annihilate(spin(t, s2)),
                                Ladder::annihilate(spin(q, s1)),
                            ]);
                            energy += rdm_element(&rdo, &gamma).unwrap()
                                * (0.5 * m.two_body(p, q, r, t));
                        }
                    }
                }
            }
        }
    }
    assert!((energy.re - fci.energy).abs() < 1e-10, "{energy} vs {}", fci.energy);
    assert!(energy.im.abs() < 1e-12);
}

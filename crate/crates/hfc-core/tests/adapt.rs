mod common;

use common::*;
use hfc_core::adapt::*;
use hfc_core::error::HfcError;
use hfc_core::layout::{Spin, SpinLayout};
use hfc_core::pauli::{PauliString, PauliSum};
use hfc_core::rng::stream;
use hfc_core::statevector::StateVector;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

fn spectrum(h: &PauliSum) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(dense_matrix(h).unwrap())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn pool_edge_cases() {
    assert!(build_pool(&SpinLayout::new(1).unwrap()).unwrap().is_empty());
    let pool = build_pool(&SpinLayout::new(3).unwrap()).unwrap();
    for s in ["Y0 X2", "X0 Y2"] {
        assert!(pool.contains(&PauliString::parse(6, s).unwrap()));
    }
    for e in pool.entries() {
        let anticommutes = (0..6).any(|q| !e.string.commutes(&PauliString::parse(6, &format!("Z{q}")).unwrap()));
        assert!(anticommutes, "{}", e.string);
    }
}

#[test]
fn commuting_generator_has_zero_gradient() {
    let h = PauliSum::parse(3, "1.0 Z0 Z1\n0.5 X2").unwrap();
    let s = random_state(3, 4);
    let g = pool_gradient(&s, &h, &PauliString::parse(3, "Z0").unwrap()).unwrap();
    assert!(g.abs() < 1e-14);
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = stream(9, 0);
    for case in 0..100u64 {
        let h = random_two_local(4, case, false);
        let s = random_state(4, 1000 + case);
        let p = random_string(4, &mut rng);
        let e = |t: f64| {
            let mut x = s.clone();
            x.apply_rotation(&p, t).unwrap();
            x.expectation(&h).unwrap().re
        };
        let fd = (e(1e-5) - e(-1e-5)) / 2e-5;
        let g = pool_gradient(&s, &h, &p).unwrap();
        assert!((g - fd).abs() < 1e-6, "case {case}: {g} vs {fd}");
        // <[H, P]> is purely imaginary for Hermitian H and P
        let comm = h.commutator(&PauliSum::from_string(p, Complex64::new(1.0, 0.0))).unwrap();
        assert!(s.expectation(&comm).unwrap().re.abs() < 1e-12);
    }
}

#[test]
fn diagonal_hamiltonian_stops_immediately() {
    let h = PauliSum::parse(3, "1.0 Z0\n-0.5 Z1\n0.3 Z0 Z2\n0.7 Z2").unwrap();
    let energies: Vec<f64> = (0..8u64)
        .map(|b| StateVector::basis_state(3, b).unwrap().expectation(&h).unwrap().re)
        .collect();
    let ground = (0..8).min_by(|&a, &b| energies[a].total_cmp(&energies[b])).unwrap();
    let reference = StateVector::basis_state(3, ground as u64).unwrap();
    let pool = OperatorPool::real_qubit_pool(3, 2).unwrap();
    let st = run_adapt(&h, &reference, &pool, &AdaptOptions::default()).unwrap();
    assert!(st.converged);
    assert!(st.strings.is_empty());
    assert_eq!(st.energy, energies[ground]);
}

#[test]
fn random_two_local_reaches_ground_energy() {
    let pool = OperatorPool::real_qubit_pool(4, 2).unwrap();
    let reference = StateVector::zero_state(4).unwrap();
    for seed in 0..20u64 {
        let h = random_two_local(4, seed, true);
        let exact = ground_energy(&h).unwrap();
        let st = run_adapt(&h, &reference, &pool, &AdaptOptions::default()).unwrap();
        assert!(st.converged, "seed {seed}");
        assert!(st.energy >= exact - 1e-9, "seed {seed}: variational bound");
        assert!((st.energy - exact).abs() < 1e-6, "seed {seed}: {} vs {exact}", st.energy);
        for w in st.history.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12, "seed {seed}: energy went up");
        }
        assert!(st.energy <= st.reference_energy);
        let prepared = st.prepare(&reference).unwrap().expectation(&h).unwrap().re;
        assert!((prepared - st.energy).abs() < 1e-10);
    }
}

#[test]
fn fermionic_hamiltonian_restores_particle_number() {
    let layout = SpinLayout::new(2).unwrap();
    let pool = build_pool(&layout).unwrap();
    let (na, nb) = (1u32, 1u32);
    // HF: lowest orbital of each spin occupied
    let hf = (1u64 << layout.qubit(Spin::Alpha, 0)) | (1u64 << layout.qubit(Spin::Beta, 0));
    let reference = StateVector::basis_state(4, hf).unwrap();
    let id = PauliSum::from_string(PauliString::identity(4), Complex64::new(1.0, 0.0));
    for seed in 0..10u64 {
        let (h1, g) = random_integrals(2, seed);
        let t = IntegralTensors::from_spatial(&h1, &g, &layout).unwrap();
        let mut h = t.hamiltonian(0.0).unwrap();
        for (spin, n) in [(Spin::Alpha, na), (Spin::Beta, nb)] {
            let d = number_operator(&layout, spin).unwrap().add(&id.scale((-(n as f64)).into())).unwrap();
            h = h.add(&d.mul(&d).unwrap().scale(10.0.into())).unwrap();
        }
        let opts = AdaptOptions {
            grad_tol: 1e-8,
            ..AdaptOptions::default()
        };
        let st = run_adapt(&h, &reference, &pool, &opts).unwrap();
        let probs = st.prepare(&reference).unwrap().probabilities();
        let retained: f64 = (0..16u64)
            .filter(|&b| layout.conserves(b, na, nb))
            .map(|b| probs[b as usize])
            .sum();
        assert!(retained > 1.0 - 1e-6, "seed {seed}: retained {retained}");
        assert!((st.energy - ground_energy(&h).unwrap()).abs() < 1e-6, "seed {seed}");
    }
}

#[test]
fn zero_rotation_is_identity() {
    let layout = SpinLayout::new(2).unwrap();
    let (h1, g) = random_integrals(2, 1);
    let t = IntegralTensors::from_spatial(&h1, &g, &layout).unwrap();
    let r = rotate_integrals(&t, &DMatrix::zeros(4, 4)).unwrap();
    assert!(r.max_difference(&t) < 1e-12);
}

#[test]
fn inverse_rotation_round_trip() {
    let layout = SpinLayout::new(3).unwrap();
    for seed in 0..5u64 {
        let (h1, g) = random_integrals(3, seed);
        let t = IntegralTensors::from_spatial(&h1, &g, &layout).unwrap();
        let k = random_antisymmetric(6, seed, 0.5);
        let r = rotate_integrals(&rotate_integrals(&t, &k).unwrap(), &(-&k)).unwrap();
        assert!(r.max_difference(&t) < 1e-9, "seed {seed}");
    }
}

#[test]
fn rotation_preserves_invariants_and_symmetry() {
    let layout = SpinLayout::new(3).unwrap();
    let (h1, g) = random_integrals(3, 8);
    let t = IntegralTensors::from_spatial(&h1, &g, &layout).unwrap();
    let r = rotate_integrals(&t, &random_antisymmetric(6, 8, 0.7)).unwrap();
    let n = 6;
    let contraction = |x: &IntegralTensors| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += x.g(p, q, q, p);
            }
        }
        s
    };
    assert!((t.h_matrix().trace() - r.h_matrix().trace()).abs() < 1e-9);
    assert!((contraction(&t) - contraction(&r)).abs() < 1e-9);
    for p in 0..n {
        for q in 0..n {
            for a in 0..n {
                for b in 0..n {
                    let v = r.g(p, q, a, b);
                    for w in [r.g(q, p, a, b), r.g(p, q, b, a), r.g(a, b, p, q), r.g(b, a, q, p)] {
                        assert!((v - w).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn rotated_hamiltonian_keeps_its_spectrum() {
    let layout = SpinLayout::new(2).unwrap();
    let (h1, g) = random_integrals(2, 3);
    let t = IntegralTensors::from_spatial(&h1, &g, &layout).unwrap();
    let k = random_antisymmetric(4, 3, 0.6);
    let a = spectrum(&t.hamiltonian(0.25).unwrap());
    let b = spectrum(&rotate_integrals(&t, &k).unwrap().hamiltonian(0.25).unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn spin_adapted_generator() {
    let layout = SpinLayout::new(3).unwrap();
    let k = spin_adapted_kappa(&layout, &[(2, 0, 0.3)], &[(1, 0, 0.2)]).unwrap();
    assert!((&k + k.transpose()).abs().max() < 1e-15);
    let (a, b) = (layout.qubit(Spin::Alpha, 2), layout.qubit(Spin::Alpha, 0));
    assert!((k[(a, b)] - 0.3).abs() < 1e-15);
    let r = std::f64::consts::FRAC_1_SQRT_2 * 0.2;
    assert!((k[(layout.qubit(Spin::Alpha, 1), layout.qubit(Spin::Alpha, 0))] - r).abs() < 1e-15);
    assert!((k[(layout.qubit(Spin::Beta, 1), layout.qubit(Spin::Beta, 0))] + r).abs() < 1e-15);
    // no alpha-beta mixing
    for v in 0..3 {
        for w in 0..3 {
            assert_eq!(k[(layout.qubit(Spin::Alpha, v), layout.qubit(Spin::Beta, w))], 0.0);
        }
    }
    assert!(matches!(
        spin_adapted_kappa(&layout, &[(0, 1, 0.1)], &[]),
        Err(HfcError::IndexOrder(_))
    ));
}

#[test]
fn non_antisymmetric_kappa_is_rejected() {
    let mut k = DMatrix::zeros(4, 4);
    k[(0, 1)] = 0.1;
    let layout = SpinLayout::new(2).unwrap();
    let (h1, g) = random_integrals(2, 0);
    let t = IntegralTensors::from_spatial(&h1, &g, &layout).unwrap();
    assert!(matches!(
        rotate_integrals(&t, &k),
        Err(HfcError::NotAntisymmetric { .. })
    ));
}

use hfc_core::layout::{Spin, SpinLayout};
use hfc_core::mitigation::*;
use hfc_core::noise::{noisy_execute, NoiseModel};
use hfc_core::rdm::{sorted_eigenvalues, SpinRdm};
use hfc_core::statevector::{parse_bitstring, Circuit, CircuitSpec, CountsHistogram};
use hfc_core::workbench::MoleculeDataset;
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn meta() -> CalibrationMeta {
    CalibrationMeta {
        spec_hash: String::new(),
        noise_hash: String::new(),
        shots: None,
        seed: 0,
        twirled: false,
    }
}

fn one_qubit_spec() -> CircuitSpec {
    serde_json::from_str(r#"{"n_qubits": 1, "hf_occupied": [], "rotations": [], "params": []}"#).unwrap()
}

#[test]
fn noiseless_calibration_is_identity() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let m = build_confusion_matrix(&ds.circuit, &NoiseModel::ideal(), CalibrationShots::Exact, 1).unwrap();
    assert_eq!(m.matrix().nrows(), 64);
    assert!((m.matrix() - DMatrix::identity(64, 64)).abs().max() < 1e-12);
    let sampled = build_confusion_matrix(&ds.circuit, &NoiseModel::ideal(), CalibrationShots::Shots(500), 1).unwrap();
    assert_eq!(sampled.matrix(), &DMatrix::identity(64, 64));
    assert_eq!(sampled.meta().shots, Some(500));
}

#[test]
fn single_qubit_readout_closed_form() {
    let (p01, p10) = (0.03, 0.07);
    let m = build_confusion_matrix(&one_qubit_spec(), &NoiseModel::readout_only(p01, p10), CalibrationShots::Exact, 0).unwrap();
    let expected = DMatrix::from_row_slice(2, 2, &[1.0 - p01, p10, p01, 1.0 - p10]);
    assert!((m.matrix() - expected).abs().max() < 1e-12);
}

#[test]
fn gate_noise_shows_up_off_the_diagonal() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let nm = NoiseModel {
        p_dep2: 0.02,
        ..NoiseModel::ideal()
    };
    let m = build_confusion_matrix(&ds.circuit, &nm, CalibrationShots::Shots(4000), 5).unwrap();
    let hf = ds.circuit.hf_index() as usize;
    assert!(m.matrix()[(hf, hf)] < 1.0);
    for b in 0..64 {
        assert!((m.matrix().column(b).sum() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn single_qubit_mitigation_recovers_the_prepared_state() {
    let (p01, p10) = (0.05, 0.08);
    let nm = NoiseModel::readout_only(p01, p10);
    let shots = 20_000u64;
    let m = build_confusion_matrix(&one_qubit_spec(), &nm, CalibrationShots::Shots(shots), 21).unwrap();
    let mut c = Circuit::new(1);
    c.push_x(0).unwrap();
    let raw = noisy_execute(&c, &[], &nm, shots, 99).unwrap().probabilities();
    let q = mitigate(&m, &raw).unwrap();
    let sd = (2.0 * p10 * (1.0 - p10) / shots as f64).sqrt() / (1.0 - p01 - p10);
    assert!(q.as_slice()[0].abs() < 3.0 * sd, "{:?}", q);
    assert!((q.as_slice()[1] - 1.0).abs() < 3.0 * sd);
}

#[test]
fn ill_conditioned_calibration_is_refused() {
    let m = ConfusionMatrix::from_matrix(1, DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]), meta()).unwrap();
    assert!(matches!(mitigate(&m, &[0.5, 0.5]), Err(hfc_core::error::HfcError::IllConditioned { .. })));
    let ls = mitigate_least_squares(&m, &[0.5, 0.5]).unwrap();
    assert!((ls.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn confusion_matrix_json_keeps_metadata() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let m = build_confusion_matrix(&ds.circuit, &NoiseModel::torino_like(), CalibrationShots::Shots(200), 3).unwrap();
    let back: ConfusionMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.meta().seed, 3);
    assert!(!back.meta().spec_hash.is_empty() && !back.meta().noise_hash.is_empty());
}

#[test]
fn post_selection_keeps_number_conserving_strings() {
    let layout = SpinLayout::new(3).unwrap();
    let mut h = CountsHistogram::empty(6);
    h.add(parse_bitstring("110100").unwrap(), 10);
    h.add(parse_bitstring("110110").unwrap(), 4);
    let kept = post_select(&h, 2, 1, &layout).unwrap();
    assert_eq!(kept.total_shots(), 10);
    assert_eq!(post_select(&kept, 2, 1, &layout).unwrap(), kept);
    assert!(post_select(&h, 0, 0, &layout).is_err());
}

#[test]
fn no_radical_loses_only_the_triple_excitation() {
    let ds = MoleculeDataset::load("no").unwrap();
    let layout = ds.layout();
    let probs = ds.state().unwrap().probabilities();
    let dropped: Vec<(usize, f64)> = probs
        .iter()
        .enumerate()
        .filter(|(b, _)| !layout.conserves(*b as u64, ds.n_alpha, ds.n_beta))
        .map(|(b, p)| (b, *p))
        .collect();
    let total: f64 = dropped.iter().map(|x| x.1).sum();
    let (largest, p_largest) = dropped.iter().cloned().fold((0, 0.0), |a, x| if x.1 > a.1 { x } else { a });
    assert_eq!(largest as u64, parse_bitstring("101111").unwrap());
    // 3.24225e-5 squared; the remaining non-conserving amplitudes are below 2e-6
    assert!((p_largest - 1.0512e-9).abs() < 0.001e-9, "{p_largest}");
    assert!((total - p_largest) / total < 0.01, "{total}");
    let q = post_select_quasi(&QuasiProbability::new(probs.clone()).unwrap(), ds.n_alpha, ds.n_beta, &layout).unwrap();
    let scale = 1.0 / (1.0 - total);
    for (b, p) in probs.iter().enumerate() {
        if dropped.iter().any(|x| x.0 == b) {
            assert_eq!(q.as_slice()[b], 0.0);
        } else {
            assert!((q.as_slice()[b] - p * scale).abs() < 1e-15);
        }
    }
}

#[test]
fn purification_examples() {
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.9, 0.9, 0.0]));
    let (p, c) = purify_block(&d, 2.0).unwrap();
    assert!((c - 2.0 / 1.8).abs() < 1e-15);
    assert!((&p - DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0]))).abs().max() < 1e-12);
    let (same, c1) = purify_block(&p, 2.0).unwrap();
    assert!((same - &p).abs().max() < 1e-12);
    assert!((c1 - 1.0).abs() < 1e-12);
    assert!(matches!(
        purify_block(&DMatrix::zeros(2, 2), 1.0),
        Err(hfc_core::error::HfcError::DegenerateTrace { .. })
    ));
}

#[test]
fn paper_outliers_are_classified() {
    for bad in [-0.05119, -0.05471, 1.059] {
        assert!(!filter_occupations(&[bad, 0.5, 0.2], &[0.5, 0.1, 0.0], 0.05).is_accepted(), "{bad}");
    }
    assert!(filter_occupations(&[1.049, 0.5, 0.2], &[0.5, 0.1, 0.0], 0.05).is_accepted());
    match filter_occupations(&[0.99, 0.5], &[1.059, -0.05119], 0.05) {
        Verdict::Rejected { violations } => {
            assert_eq!(violations.len(), 2);
            assert_eq!(violations[0].spin, Spin::Beta);
            assert_eq!(violations[0].bound, Bound::Upper);
            assert_eq!(violations[1].bound, Bound::Lower);
        }
        Verdict::Accepted => panic!("expected rejection"),
    }
}

fn stochastic(dim: usize) -> impl Strategy<Value = DMatrix<f64>> {
    // diagonally dominant columns keep the matrix comfortably invertible
    prop::collection::vec(0.0f64..1.0, dim * dim).prop_map(move |v| {
        let mut m = DMatrix::from_vec(dim, dim, v);
        for j in 0..dim {
            m[(j, j)] += dim as f64;
            let s = m.column(j).sum();
            for i in 0..dim {
                m[(i, j)] /= s;
            }
        }
        m
    })
}

fn distribution(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, dim).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let a = DMatrix::from_vec(n, n, v);
        (&a + a.transpose()) * 0.5 + DMatrix::identity(n, n) * 2.0
    })
}

fn orthogonal(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let a = DMatrix::from_vec(n, n, v);
        ((&a - a.transpose()) * 0.8).exp()
    })
}

proptest! {
    #[test]
    fn mitigation_inverts_the_confusion_matrix((m, p) in (stochastic(8), distribution(8))) {
        let cm = ConfusionMatrix::from_matrix(3, m, meta()).unwrap();
        let raw = cm.apply(&p).unwrap();
        let q = mitigate(&cm, &raw).unwrap();
        for (a, b) in q.as_slice().iter().zip(&p) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!((q.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn purification_is_idempotent_and_keeps_eigenvectors(d in symmetric(4), n in 1u32..4) {
        let (p, _) = purify_block(&d, n as f64).unwrap();
        prop_assert!((p.trace() - n as f64).abs() < 1e-9);
        let (pp, c) = purify_block(&p, n as f64).unwrap();
        prop_assert!((&pp - &p).abs().max() < 1e-9);
        prop_assert!((c - 1.0).abs() < 1e-9);
        // every eigenvector of d is an eigenvector of the purified block
        let eig = SymmetricEigen::new(d.clone());
        for k in 0..4 {
            let v = eig.eigenvectors.column(k);
            let pv = &p * v;
            let lambda = v.dot(&pv);
            prop_assert!((pv - v * lambda).norm() < 1e-9);
        }
    }

    #[test]
    fn purification_commutes_with_rotation(d in symmetric(3), q in orthogonal(3)) {
        let (a, _) = purify_block(&(q.transpose() * &d * &q), 2.0).unwrap();
        let (b, _) = purify_block(&d, 2.0).unwrap();
        prop_assert!((a - q.transpose() * b * &q).abs().max() < 1e-9);
    }

    #[test]
    fn filter_acceptance_grows_with_epsilon(
        alpha in prop::collection::vec(-0.3f64..1.3, 3),
        beta in prop::collection::vec(-0.3f64..1.3, 3),
        e1 in 0.0f64..0.3,
        e2 in 0.0f64..0.3,
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        if filter_occupations(&alpha, &beta, lo).is_accepted() {
            prop_assert!(filter_occupations(&alpha, &beta, hi).is_accepted());
        }
    }

    #[test]
    fn purified_rdm_matches_counts((d, n) in (symmetric(3), 1u32..3)) {
        let rdm = SpinRdm::new(d.clone(), d.clone() * 0.5).unwrap();
        let p = purify_rdm(&rdm, n, 1).unwrap();
        prop_assert!((p.rdm.trace(Spin::Alpha) - n as f64).abs() < 1e-9);
        prop_assert!((p.rdm.trace(Spin::Beta) - 1.0).abs() < 1e-9);
        let before = sorted_eigenvalues(rdm.alpha());
        let after = sorted_eigenvalues(p.rdm.alpha());
        for (x, y) in before.iter().zip(&after) {
            prop_assert!((x * p.scale_alpha - y).abs() < 1e-9);
        }
    }
}

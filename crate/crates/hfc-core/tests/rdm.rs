use hfc_core::layout::Spin;
use hfc_core::rdm::*;
use hfc_core::rng::{derive_seed, stream, SAMPLING};
use hfc_core::statevector::sample_distribution;
use hfc_core::workbench::{MoleculeDataset, MOLECULES};
use hfc_core::HfcError;

const RAW: EstimateConfig<'static> = EstimateConfig {
    pipeline: Pipeline::RAW,
    confusion: None,
    n_alpha: 0,
    n_beta: 0,
};

fn config(ds: &MoleculeDataset, pipeline: Pipeline) -> EstimateConfig<'static> {
    EstimateConfig {
        pipeline,
        confusion: None,
        n_alpha: ds.n_alpha,
        n_beta: ds.n_beta,
    }
}

fn sampled(exact: &[Vec<f64>], shots: u64, seed: u64) -> Vec<Vec<f64>> {
    exact
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = stream(derive_seed(seed, i as u64), SAMPLING);
            sample_distribution(p, shots, &mut rng)
                .iter()
                .map(|&c| c as f64 / shots as f64)
                .collect()
        })
        .collect()
}

/// Single-shot standard deviation of the estimator for element (v, w).
/// For a real state both halves of an off-diagonal pair read `2 D_vw`.
fn element_sigma(d: f64, diagonal: bool) -> f64 {
    if diagonal {
        (d * (1.0 - d)).max(0.0).sqrt()
    } else {
        ((1.0 - 4.0 * d * d) / 8.0).max(0.0).sqrt()
    }
}

#[test]
fn plan_sizes_and_budget() {
    for (n_act, settings) in [(1, 1), (2, 5), (3, 13), (4, 25)] {
        let plan = plan_measurements(n_act, 100).unwrap();
        assert_eq!(plan.entries.len(), settings, "n_act = {n_act}");
        let mut labels: Vec<String> = plan.entries.iter().map(|e| e.label.to_string()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), settings);
    }
    for name in MOLECULES {
        let ds = MoleculeDataset::load(name).unwrap();
        let plan = plan_measurements(ds.n_act, ds.shots_per_string).unwrap();
        let calibration = (1u64 << ds.layout().n_qubits()) * ds.shots_per_string;
        assert!(
            plan.total_shots() + calibration <= ds.shot_budget,
            "{name}: {} + {calibration} > {}",
            plan.total_shots(),
            ds.shot_budget
        );
    }
}

#[test]
fn off_diagonal_strings_carry_z_chains() {
    let plan = plan_measurements(4, 1).unwrap();
    let e = plan
        .entries
        .iter()
        .find(|e| {
            e.label
                == SettingLabel::OffDiagonal {
                    spin: Spin::Beta,
                    v: 0,
                    w: 3,
                    half: Half::Y,
                }
        })
        .unwrap();
    assert_eq!(e.basis.to_string(), "Y4 Z5 Z6 Y7");
}

#[test]
fn exact_outcomes_reproduce_the_exact_rdm() {
    for name in MOLECULES {
        let ds = MoleculeDataset::load(name).unwrap();
        let plan = plan_measurements(ds.n_act, 1).unwrap();
        let outcomes = exact_outcomes(&plan, &ds.circuit, &ds.circuit.params).unwrap();
        let d = estimate_rdm(&plan, &outcomes, &RAW).unwrap();
        let diff = d.difference(&ds.exact_rdm().unwrap()).unwrap().max_abs();
        assert!(diff < 1e-9, "{name}: {diff:.3e}");
    }
}

#[test]
fn reference_determinant_has_integer_occupations() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let plan = plan_measurements(ds.n_act, 1).unwrap();
    let zero = vec![0.0; ds.circuit.n_params()];
    let outcomes = exact_outcomes(&plan, &ds.circuit, &zero).unwrap();
    let d = estimate_rdm(&plan, &outcomes, &RAW).unwrap();
    let occ = occupation_numbers(&d);
    for (got, want) in occ.alpha.iter().zip([1.0, 1.0, 0.0]) {
        assert!((got - want).abs() < 1e-12);
    }
    for (got, want) in occ.beta.iter().zip([1.0, 0.0, 0.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn exact_occupations_are_physical() {
    for name in MOLECULES {
        let ds = MoleculeDataset::load(name).unwrap();
        let d = ds.exact_rdm().unwrap();
        let occ = occupation_numbers(&d);
        for (spin, n) in [(Spin::Alpha, ds.n_alpha), (Spin::Beta, ds.n_beta)] {
            let xs = occ.block(spin);
            assert!(xs.windows(2).all(|w| w[0] >= w[1]));
            assert!(xs.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)), "{name} {spin}: {xs:?}");
            assert!((xs.iter().sum::<f64>() - n as f64).abs() < 1e-6);
            assert!((d.trace(spin) - n as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn one_sampled_run_lies_within_four_standard_errors() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let shots = ds.shots_per_string;
    let plan = plan_measurements(ds.n_act, shots).unwrap();
    let exact = exact_outcomes(&plan, &ds.circuit, &ds.circuit.params).unwrap();
    let reference = ds.exact_rdm().unwrap();
    let d = estimate_rdm(&plan, &sampled(&exact, shots, 11), &RAW).unwrap();
    for spin in Spin::BOTH {
        for v in 0..ds.n_act {
            for w in v..ds.n_act {
                let want = reference.block(spin)[(v, w)];
                let se = element_sigma(want, v == w) / (shots as f64).sqrt();
                let got = d.block(spin)[(v, w)];
                assert!((got - want).abs() <= 4.0 * se.max(1e-9), "{spin} ({v},{w}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn sampled_estimator_is_unbiased() {
    let ds = MoleculeDataset::load("no").unwrap();
    let (shots, reps) = (2000, 200);
    let plan = plan_measurements(ds.n_act, shots).unwrap();
    let exact = exact_outcomes(&plan, &ds.circuit, &ds.circuit.params).unwrap();
    let reference = ds.exact_rdm().unwrap();
    let runs: Vec<SpinRdm> = (0..reps)
        .map(|r| estimate_rdm(&plan, &sampled(&exact, shots, derive_seed(99, r)), &RAW).unwrap())
        .collect();
    for spin in Spin::BOTH {
        for v in 0..ds.n_act {
            for w in v..ds.n_act {
                let xs: Vec<f64> = runs.iter().map(|d| d.block(spin)[(v, w)]).collect();
                let mean = xs.iter().sum::<f64>() / reps as f64;
                let want = reference.block(spin)[(v, w)];
                let se = element_sigma(want, v == w) / ((shots * reps) as f64).sqrt();
                assert!((mean - want).abs() <= 4.0 * se.max(1e-9), "{spin} ({v},{w}): {mean} vs {want}");
            }
        }
    }
}

#[test]
fn post_selected_diagonals_stay_in_the_unit_interval() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let plan = plan_measurements(ds.n_act, 200).unwrap();
    let exact = exact_outcomes(&plan, &ds.circuit, &ds.circuit.params).unwrap();
    // scramble the diagonal setting so that post-selection has work to do
    let mut outcomes = sampled(&exact, 200, 3);
    let n = outcomes[0].len();
    outcomes[0] = (0..n).map(|_| 1.0 / n as f64).collect();
    let d = estimate_rdm(&plan, &outcomes, &config(&ds, "ps".parse().unwrap())).unwrap();
    for spin in Spin::BOTH {
        for v in 0..ds.n_act {
            let x = d.block(spin)[(v, v)];
            assert!((0.0..=1.0).contains(&x));
        }
    }
    assert!((d.trace(Spin::Alpha) - ds.n_alpha as f64).abs() < 1e-12);
    assert!((d.trace(Spin::Beta) - ds.n_beta as f64).abs() < 1e-12);
}

#[test]
fn estimator_input_errors() {
    let ds = MoleculeDataset::load("oh").unwrap();
    let plan = plan_measurements(ds.n_act, 1).unwrap();
    let outcomes = exact_outcomes(&plan, &ds.circuit, &ds.circuit.params).unwrap();
    match estimate_rdm(&plan, &outcomes[..5], &RAW) {
        Err(HfcError::MissingMeasurement(label)) => assert_eq!(label, plan.entries[5].label.to_string()),
        other => panic!("{other:?}"),
    }
    let mut short = outcomes.clone();
    short[2].pop();
    assert!(matches!(estimate_rdm(&plan, &short, &RAW), Err(HfcError::Dimension(_))));
    let em = config(&ds, "em".parse().unwrap());
    assert!(matches!(estimate_rdm(&plan, &outcomes, &em), Err(HfcError::InvalidArgument(_))));
}

#[test]
fn pipeline_text_round_trip() {
    for s in ["raw", "em", "ps", "em+ps", "em+ps+puri", "es", "em+ps+es"] {
        let p: Pipeline = s.parse().unwrap();
        assert_eq!(p.to_string(), s);
    }
    let p: Pipeline = "PS+EM".parse().unwrap();
    assert_eq!(p.to_string(), "em+ps");
    assert!(matches!("em+zne".parse::<Pipeline>(), Err(HfcError::Parse(_))));
    let json = serde_json::to_string(&"em+ps+es".parse::<Pipeline>().unwrap()).unwrap();
    assert_eq!(json, "\"em+ps+es\"");
}

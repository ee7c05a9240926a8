use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::MoleculeDataset;
use crate::error::{HfcError, Result};
use crate::hyperfine::{total_hfc, HfcResult};
use crate::layout::Spin;
use crate::mitigation::{
    build_confusion_matrix_with, filter_rdm, purify_rdm, CalibrationMeta, CalibrationShots,
    Verdict, Violation, DEFAULT_EPSILON,
};
use crate::noise::{NoiseModel, TwirlConfig};
use crate::rdm::{
    estimate_rdm, execute_plan, histogram_outcomes, occupation_numbers, plan_measurements,
    EstimateConfig, Occupations, Pipeline, SpinRdm,
};
use crate::rng::{self, derive_seed};
use crate::statevector::sample_distribution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub pipeline: Pipeline,
    pub n_runs: usize,
    pub noise: NoiseModel,
    pub seed: u64,
    /// Defaults to the dataset's shots per string.
    #[serde(default)]
    pub shots_per_string: Option<u64>,
    /// Defaults to sampled calibration with the same shots per string.
    #[serde(default)]
    pub calibration: Option<CalibrationShots>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_instances")]
    pub twirl_instances: usize,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_instances() -> usize {
    TwirlConfig::disabled().instances
}

impl ExperimentConfig {
    pub fn new(pipeline: Pipeline, n_runs: usize, noise: NoiseModel, seed: u64) -> Self {
        ExperimentConfig {
            pipeline,
            n_runs,
            noise,
            seed,
            shots_per_string: None,
            calibration: None,
            epsilon: DEFAULT_EPSILON,
            twirl_instances: default_instances(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Purification {
    pub scale_alpha: f64,
    pub scale_beta: f64,
}

/// Outcome of one end-to-end emulated run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub run: usize,
    pub seed: u64,
    pub pipeline: Pipeline,
    /// Digest of each measured histogram, in plan order.
    pub counts_digests: Vec<String>,
    pub calibration: Option<CalibrationMeta>,
    pub rdm: SpinRdm,
    pub occupations: Occupations,
    pub purification: Option<Purification>,
    pub verdict: Verdict,
    pub hfc: Vec<HfcResult>,
    /// Mean |D_vv - D_vv(exact)| over both spin diagonals.
    pub diagonal_bias: f64,
    /// Max |occupation - exact occupation|.
    pub occupation_error: f64,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NucleusSummary {
    pub nucleus: String,
    pub exact_total: f64,
    pub reference_total: f64,
    pub mean: f64,
    pub std: f64,
    pub accepted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub run: usize,
    pub violations: Vec<Violation>,
}

/// Aggregates over accepted runs only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub molecule: String,
    pub pipeline: Pipeline,
    pub n_runs: usize,
    pub accepted: usize,
    pub rejections: Vec<Rejection>,
    pub nuclei: Vec<NucleusSummary>,
    pub exact_occupations: Occupations,
    pub mean_occupations: Occupations,
    pub mean_diagonal_bias: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub molecule: String,
    pub config: ExperimentConfig,
    pub records: Vec<ExperimentRecord>,
    /// Absent when every run was rejected.
    pub summary: Option<ExperimentSummary>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

struct Reference {
    rdm: SpinRdm,
    occupations: Occupations,
}

fn reference(ds: &MoleculeDataset) -> Result<Reference> {
    let rdm = ds.exact_rdm()?;
    let occupations = occupation_numbers(&rdm);
    Ok(Reference { rdm, occupations })
}

fn diagonal_bias(d: &SpinRdm, exact: &SpinRdm) -> f64 {
    let n = d.n_act();
    let mut acc = 0.0;
    for spin in Spin::BOTH {
        for v in 0..n {
            acc += (d.block(spin)[(v, v)] - exact.block(spin)[(v, v)]).abs();
        }
    }
    acc / (2 * n) as f64
}

fn occupation_error(o: &Occupations, exact: &Occupations) -> f64 {
    Spin::BOTH
        .iter()
        .flat_map(|&s| o.block(s).iter().zip(exact.block(s)).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn hfc_results(ds: &MoleculeDataset, d: &SpinRdm) -> Result<Vec<HfcResult>> {
    ds.nuclei
        .iter()
        .map(|n| Ok(total_hfc(&n.label, ds.active_hfc(n, d)?, n.inactive_offset)))
        .collect()
}

fn run_once(
    ds: &MoleculeDataset,
    cfg: &ExperimentConfig,
    reference: &Reference,
    run: usize,
) -> Result<ExperimentRecord> {
    let start = Instant::now();
    let seed = derive_seed(cfg.seed, run as u64);
    let shots = cfg.shots_per_string.unwrap_or(ds.shots_per_string);
    let plan = plan_measurements(ds.n_act, shots)?;
    let twirl = TwirlConfig {
        enabled: cfg.pipeline.es,
        seed: derive_seed(seed, 2),
        instances: cfg.twirl_instances,
    };
    let counts = execute_plan(&plan, &ds.circuit, &ds.circuit.params, &cfg.noise, derive_seed(seed, 0), &twirl)?;
    let confusion = if cfg.pipeline.em {
        let cal = cfg.calibration.unwrap_or(CalibrationShots::Shots(shots));
        let cal_twirl = TwirlConfig {
            seed: derive_seed(seed, 3),
            ..twirl
        };
        Some(build_confusion_matrix_with(&ds.circuit, &cfg.noise, cal, derive_seed(seed, 1), &cal_twirl)?)
    } else {
        None
    };
    let est = EstimateConfig {
        pipeline: cfg.pipeline,
        confusion: confusion.as_ref(),
        n_alpha: ds.n_alpha,
        n_beta: ds.n_beta,
    };
    let mut rdm = estimate_rdm(&plan, &histogram_outcomes(&counts), &est)?;
    let mut purification = None;
    if cfg.pipeline.puri {
        let p = purify_rdm(&rdm, ds.n_alpha, ds.n_beta)?;
        purification = Some(Purification {
            scale_alpha: p.scale_alpha,
            scale_beta: p.scale_beta,
        });
        rdm = p.rdm;
    }
    let verdict = filter_rdm(&rdm, cfg.epsilon);
    let occupations = occupation_numbers(&rdm);
    Ok(ExperimentRecord {
        run,
        seed,
        pipeline: cfg.pipeline,
        counts_digests: counts.iter().map(|c| c.digest()).collect(),
        calibration: confusion.map(|m| m.meta().clone()),
        hfc: hfc_results(ds, &rdm)?,
        diagonal_bias: diagonal_bias(&rdm, &reference.rdm),
        occupation_error: occupation_error(&occupations, &reference.occupations),
        rdm,
        occupations,
        purification,
        verdict,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Executes `cfg.n_runs` independent runs; run `i` uses seed `derive_seed(cfg.seed, i)`.
pub fn run_records(ds: &MoleculeDataset, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    if cfg.n_runs == 0 {
        return Err(HfcError::InvalidArgument("at least one run is required".into()));
    }
    cfg.noise.validate()?;
    let r = reference(ds)?;
    (0..cfg.n_runs).into_par_iter().map(|i| run_once(ds, cfg, &r, i)).collect()
}

/// Aggregates accepted runs. Errors when none were accepted.
pub fn summarize(ds: &MoleculeDataset, records: &[ExperimentRecord]) -> Result<ExperimentSummary> {
    let accepted: Vec<&ExperimentRecord> = records.iter().filter(|r| r.verdict.is_accepted()).collect();
    if accepted.is_empty() {
        return Err(HfcError::AllRunsRejected { runs: records.len() });
    }
    let r = reference(ds)?;
    let exact = hfc_results(ds, &r.rdm)?;
    let rejections = records
        .iter()
        .filter_map(|rec| match &rec.verdict {
            Verdict::Rejected { violations } => Some(Rejection {
                run: rec.run,
                violations: violations.clone(),
            }),
            Verdict::Accepted => None,
        })
        .collect();
    let nuclei = ds
        .nuclei
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let totals: Vec<f64> = accepted.iter().map(|rec| rec.hfc[k].total).collect();
            NucleusSummary {
                nucleus: n.label.clone(),
                exact_total: exact[k].total,
                reference_total: n.reference_total,
                mean: mean(&totals),
                std: sample_std(&totals),
                accepted: totals.len(),
            }
        })
        .collect();
    let avg = |spin: Spin| -> Vec<f64> {
        (0..ds.n_act)
            .map(|i| mean(&accepted.iter().map(|rec| rec.occupations.block(spin)[i]).collect::<Vec<_>>()))
            .collect()
    };
    Ok(ExperimentSummary {
        molecule: ds.name.clone(),
        pipeline: accepted[0].pipeline,
        n_runs: records.len(),
        accepted: accepted.len(),
        rejections,
        nuclei,
        mean_occupations: Occupations {
            alpha: avg(Spin::Alpha),
            beta: avg(Spin::Beta),
        },
        exact_occupations: r.occupations,
        mean_diagonal_bias: mean(&accepted.iter().map(|rec| rec.diagonal_bias).collect::<Vec<_>>()),
    })
}

/// Runs and summarizes; fails with [`HfcError::AllRunsRejected`] when the filter rejects every run.
pub fn run_experiment(ds: &MoleculeDataset, cfg: &ExperimentConfig) -> Result<Experiment> {
    let records = run_records(ds, cfg)?;
    let summary = summarize(ds, &records)?;
    Ok(Experiment {
        molecule: ds.name.clone(),
        config: cfg.clone(),
        records,
        summary: Some(summary),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotNoiseRow {
    pub nucleus: String,
    pub exact_total: f64,
    pub reference_std: f64,
    pub mean: f64,
    pub std: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotNoiseStudy {
    pub molecule: String,
    pub n_reps: usize,
    pub seed: u64,
    pub shots_per_string: u64,
    pub rows: Vec<ShotNoiseRow>,
    /// Per repetition, per nucleus total HFC.
    pub samples: Vec<Vec<f64>>,
}

/// Noiseless sampling with the dataset's shots per string and no mitigation.
///
/// Repetition `r` draws setting `i` from `stream(derive_seed(derive_seed(seed, r), i), SAMPLING)`,
/// the same bits [`crate::statevector::sample`] would give for that seed.
pub fn shot_noise_study(ds: &MoleculeDataset, n_reps: usize, seed: u64) -> Result<ShotNoiseStudy> {
    if n_reps == 0 {
        return Err(HfcError::InvalidArgument("at least one repetition is required".into()));
    }
    let shots = ds.shots_per_string;
    let plan = plan_measurements(ds.n_act, shots)?;
    let exact = crate::rdm::exact_outcomes(&plan, &ds.circuit, &ds.circuit.params)?;
    let est = EstimateConfig {
        pipeline: Pipeline::RAW,
        confusion: None,
        n_alpha: ds.n_alpha,
        n_beta: ds.n_beta,
    };
    let samples: Vec<Vec<f64>> = (0..n_reps)
        .into_par_iter()
        .map(|rep| {
            let rs = derive_seed(seed, rep as u64);
            let outcomes: Vec<Vec<f64>> = exact
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut rng = rng::stream(derive_seed(rs, i as u64), rng::SAMPLING);
                    let counts = sample_distribution(p, shots, &mut rng);
                    counts.iter().map(|&c| c as f64 / shots as f64).collect()
                })
                .collect();
            let d = estimate_rdm(&plan, &outcomes, &est)?;
            Ok(hfc_results(ds, &d)?.into_iter().map(|h| h.total).collect())
        })
        .collect::<Result<_>>()?;
    let exact_hfc = hfc_results(ds, &ds.exact_rdm()?)?;
    let rows = ds
        .nuclei
        .iter()
        .enumerate()
        .map(|(k, n)| {
            let xs: Vec<f64> = samples.iter().map(|s| s[k]).collect();
            let std = sample_std(&xs);
            ShotNoiseRow {
                nucleus: n.label.clone(),
                exact_total: exact_hfc[k].total,
                reference_std: n.shot_noise_std,
                mean: mean(&xs),
                std,
                std_error: std / (n_reps as f64).sqrt(),
            }
        })
        .collect();
    Ok(ShotNoiseStudy {
        molecule: ds.name.clone(),
        n_reps,
        seed,
        shots_per_string: shots,
        rows,
        samples,
    })
}

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spin_rdm::SpinRdm;
use crate::error::{HfcError, Result};
use crate::layout::{Spin, SpinLayout};
use crate::mitigation::{mitigate, post_select_quasi, ConfusionMatrix, QuasiProbability};
use crate::noise::{execute_with_twirl, NoiseModel, TwirlConfig};
use crate::pauli::{Pauli, PauliString};
use crate::rng::derive_seed;
use crate::statevector::{parity_expectation, Circuit, CircuitSpec, CountsHistogram, Op};

/// Which of the two Jordan-Wigner strings of `a†_v a_w + h.c.` an entry reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Half {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SettingLabel {
    /// Z-basis readout shared by all number operators.
    Diagonal,
    OffDiagonal { spin: Spin, v: usize, w: usize, half: Half },
}

impl fmt::Display for SettingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettingLabel::Diagonal => f.write_str("diagonal"),
            SettingLabel::OffDiagonal { spin, v, w, half } => {
                write!(f, "{v}{s}{w}{s}-{half:?}", s = spin.symbol())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub label: SettingLabel,
    /// String whose eigenbasis is measured; all-Z for the diagonal setting.
    pub basis: PauliString,
    pub shots: u64,
}

impl PlanEntry {
    /// Ansatz followed by the basis change for this setting.
    pub fn circuit(&self, spec: &CircuitSpec) -> Result<Circuit> {
        let mut c = spec.circuit()?;
        if let SettingLabel::OffDiagonal { .. } = self.label {
            c.push(Op::BasisChange(self.basis))?;
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub n_act: usize,
    pub entries: Vec<PlanEntry>,
}

impl MeasurementPlan {
    pub fn layout(&self) -> SpinLayout {
        SpinLayout::new(self.n_act).expect("plan built from a valid layout")
    }

    pub fn total_shots(&self) -> u64 {
        self.entries.iter().map(|e| e.shots).sum()
    }
}

/// `X_v Z..Z X_w` or `Y_v Z..Z Y_w` on qubits `qv < qw`.
fn off_diagonal_string(n_qubits: usize, qv: usize, qw: usize, half: Half) -> Result<PauliString> {
    let end = match half {
        Half::X => Pauli::X,
        Half::Y => Pauli::Y,
    };
    let mut p = PauliString::identity(n_qubits).with_factor(qv, end)?;
    for q in qv + 1..qw {
        p = p.with_factor(q, Pauli::Z)?;
    }
    p.with_factor(qw, end)
}

/// One Z-basis setting plus, for each spin and `v < w`, the X and Y halves of
/// the hopping operator. Every setting receives `shots_per_string` shots.
pub fn plan_measurements(n_act: usize, shots_per_string: u64) -> Result<MeasurementPlan> {
    let layout = SpinLayout::new(n_act)?;
    let n = layout.n_qubits();
    let mut all_z = PauliString::identity(n);
    for q in 0..n {
        all_z = all_z.with_factor(q, Pauli::Z)?;
    }
    let mut entries = vec![PlanEntry {
        label: SettingLabel::Diagonal,
        basis: all_z,
        shots: shots_per_string,
    }];
    for spin in Spin::BOTH {
        for v in 0..n_act {
            for w in v + 1..n_act {
                for half in [Half::X, Half::Y] {
                    let basis =
                        off_diagonal_string(n, layout.qubit(spin, v), layout.qubit(spin, w), half)?;
                    entries.push(PlanEntry {
                        label: SettingLabel::OffDiagonal { spin, v, w, half },
                        basis,
                        shots: shots_per_string,
                    });
                }
            }
        }
    }
    Ok(MeasurementPlan { n_act, entries })
}

/// Error-management steps applied to a run.
///
/// `em` inverts the ansatz confusion matrix, `ps` post-selects the diagonal
/// setting on the electron counts, `puri` rescales RDM traces and `es`
/// enables Pauli twirling during execution.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Pipeline {
    pub em: bool,
    pub ps: bool,
    pub puri: bool,
    pub es: bool,
}

impl Pipeline {
    pub const RAW: Pipeline = Pipeline {
        em: false,
        ps: false,
        puri: false,
        es: false,
    };
}

impl FromStr for Pipeline {
    type Err = HfcError;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Pipeline::RAW;
        let s = s.trim().to_ascii_lowercase();
        if s == "raw" || s == "none" {
            return Ok(p);
        }
        for part in s.split('+') {
            let flag = match part.trim() {
                "em" => &mut p.em,
                "ps" => &mut p.ps,
                "puri" => &mut p.puri,
                "es" => &mut p.es,
                other => {
                    return Err(HfcError::Parse(format!(
                        "unknown pipeline step '{other}' (use em, ps, puri, es)"
                    )))
                }
            };
            *flag = true;
        }
        Ok(p)
    }
}

impl From<Pipeline> for String {
    fn from(p: Pipeline) -> String {
        p.to_string()
    }
}

impl TryFrom<String> for Pipeline {
    type Error = HfcError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [
            (self.em, "em"),
            (self.ps, "ps"),
            (self.puri, "puri"),
            (self.es, "es"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if parts.is_empty() {
            f.write_str("raw")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

/// Executes every plan entry under `nm`. Entry `i` uses seed `derive_seed(seed, i)`.
pub fn execute_plan(
    plan: &MeasurementPlan,
    spec: &CircuitSpec,
    theta: &[f64],
    nm: &NoiseModel,
    seed: u64,
    twirl: &TwirlConfig,
) -> Result<Vec<CountsHistogram>> {
    plan.entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let c = e.circuit(spec)?;
            let job = derive_seed(seed, i as u64);
            let t = TwirlConfig {
                seed: derive_seed(twirl.seed, i as u64),
                ..*twirl
            };
            execute_with_twirl(&c, theta, nm, e.shots, job, &t)
        })
        .collect()
}

/// Noiseless infinite-shot outcome distributions for every entry.
pub fn exact_outcomes(plan: &MeasurementPlan, spec: &CircuitSpec, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    plan.entries
        .iter()
        .map(|e| Ok(e.circuit(spec)?.run(theta)?.probabilities()))
        .collect()
}

/// Inputs to [`estimate_rdm`] beyond the measured distributions.
#[derive(Clone, Copy, Debug)]
pub struct EstimateConfig<'a> {
    pub pipeline: Pipeline,
    /// Required when `pipeline.em` is set.
    pub confusion: Option<&'a ConfusionMatrix>,
    pub n_alpha: u32,
    pub n_beta: u32,
}

fn prepare(
    p: &[f64],
    label: SettingLabel,
    layout: &SpinLayout,
    cfg: &EstimateConfig,
) -> Result<Vec<f64>> {
    let expected = 1usize << layout.n_qubits();
    if p.len() != expected {
        return Err(HfcError::Dimension(format!(
            "setting '{label}' has {} outcomes, expected {expected}",
            p.len()
        )));
    }
    let mut q = if cfg.pipeline.em {
        let m = cfg.confusion.ok_or_else(|| {
            HfcError::InvalidArgument("em pipeline requires a confusion matrix".into())
        })?;
        mitigate(m, p)?
    } else {
        QuasiProbability::new(p.to_vec())?
    };
    // number conservation only constrains the computational-basis readout
    if cfg.pipeline.ps && label == SettingLabel::Diagonal {
        q = post_select_quasi(&q, cfg.n_alpha, cfg.n_beta, layout)?;
    }
    Ok(q.into_vec())
}

/// Assembles the spin RDM from per-setting outcome distributions (aligned with
/// `plan.entries`). Mitigation runs first, then post-selection.
///
/// `D_vv = sum_b p(b) b_q`, and `D_vw = (<X Z..Z X> + <Y Z..Z Y>) / 4`, the real
/// part of `<a†_v a_w>`.
pub fn estimate_rdm(
    plan: &MeasurementPlan,
    outcomes: &[Vec<f64>],
    cfg: &EstimateConfig,
) -> Result<SpinRdm> {
    if outcomes.len() < plan.entries.len() {
        let missing = plan.entries[outcomes.len()].label;
        return Err(HfcError::MissingMeasurement(missing.to_string()));
    }
    if outcomes.len() > plan.entries.len() {
        return Err(HfcError::Dimension(format!(
            "{} outcome sets for {} plan entries",
            outcomes.len(),
            plan.entries.len()
        )));
    }
    let layout = plan.layout();
    let n = plan.n_act;
    let mut blocks = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    let mut seen_diagonal = false;
    for (entry, p) in plan.entries.iter().zip(outcomes) {
        let q = prepare(p, entry.label, &layout, cfg)?;
        match entry.label {
            SettingLabel::Diagonal => {
                seen_diagonal = true;
                for (k, spin) in Spin::BOTH.into_iter().enumerate() {
                    for v in 0..n {
                        let qubit = layout.qubit(spin, v);
                        blocks[k][(v, v)] = (1.0 - parity_expectation(&q, 1 << qubit)) / 2.0;
                    }
                }
            }
            SettingLabel::OffDiagonal { spin, v, w, .. } => {
                let k = spin as usize;
                let e = parity_expectation(&q, entry.basis.support()) / 4.0;
                blocks[k][(v, w)] += e;
                blocks[k][(w, v)] += e;
            }
        }
    }
    if !seen_diagonal {
        return Err(HfcError::MissingMeasurement(SettingLabel::Diagonal.to_string()));
    }
    let [alpha, beta] = blocks;
    SpinRdm::new(alpha, beta)
}

/// Converts sampled histograms to outcome distributions.
pub fn histogram_outcomes(counts: &[CountsHistogram]) -> Vec<Vec<f64>> {
    counts.iter().map(|c| c.probabilities()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_sizes() {
        let p = plan_measurements(3, 56_000).unwrap();
        assert_eq!(p.entries.len(), 13);
        assert!(p.total_shots() <= 4_984_000);
        assert_eq!(plan_measurements(1, 10).unwrap().entries.len(), 1);
        let p4 = plan_measurements(4, 16_300).unwrap();
        assert_eq!(p4.entries.len(), 25);
        assert!(p4.total_shots() + 256 * 16_300 <= 4_971_500);
    }

    #[test]
    fn off_diagonal_strings_keep_z_chain() {
        let p = plan_measurements(3, 1).unwrap();
        let texts: Vec<String> = p.entries.iter().map(|e| e.basis.to_string()).collect();
        assert!(texts.contains(&"X0 Z1 X2".to_string()));
        assert!(texts.contains(&"Y3 Y4".to_string()));
        for e in &p.entries[1..] {
            assert!(e.basis.weight() >= 2);
        }
    }

    #[test]
    fn pipeline_labels() {
        let p: Pipeline = "em+ps+es".parse().unwrap();
        assert!(p.em && p.ps && p.es && !p.puri);
        assert_eq!(p.to_string(), "em+ps+es");
        assert_eq!("puri+es".parse::<Pipeline>().unwrap().to_string(), "puri+es");
        assert_eq!("ES".parse::<Pipeline>().unwrap().to_string(), "es");
        assert_eq!("raw".parse::<Pipeline>().unwrap(), Pipeline::RAW);
        assert!("em+zz".parse::<Pipeline>().is_err());
    }
}

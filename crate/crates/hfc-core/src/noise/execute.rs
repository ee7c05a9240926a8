use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample as sample_indices;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};

use super::model::{NoiseModel, TwirlConfig};
use super::twirl::pauli_twirl;
use crate::error::{HfcError, Result};
use crate::pauli::PauliString;
use crate::rng::{self, derive_seed, Rng};
use crate::statevector::{apply_op, sample_distribution, Circuit, CountsHistogram, Op, StateVector};

/// A place where a depolarizing error may strike: after op `op`, on `support`.
#[derive(Clone, Copy, Debug)]
struct ErrorSite {
    op: usize,
    support: u64,
    p: f64,
}

fn error_sites(c: &Circuit, nm: &NoiseModel) -> Vec<ErrorSite> {
    let mut sites = Vec::new();
    for (i, op) in c.ops().iter().enumerate() {
        match op {
            Op::X(q) => sites.push(ErrorSite {
                op: i,
                support: 1 << q,
                p: nm.p_dep1,
            }),
            Op::Rotation { pauli, .. } => sites.push(ErrorSite {
                op: i,
                support: pauli.support(),
                p: if pauli.weight() >= 2 { nm.p_dep2 } else { nm.p_dep1 },
            }),
            Op::BasisChange(p) => {
                for q in p.support_qubits() {
                    if p.factor(q) != crate::pauli::Pauli::Z {
                        sites.push(ErrorSite {
                            op: i,
                            support: 1 << q,
                            p: nm.p_dep1,
                        });
                    }
                }
            }
            Op::Frame(_) => {}
        }
    }
    sites.retain(|s| s.p > 0.0);
    sites
}

/// Spreads the low bits of `r` over the set bits of `support`, two bits per
/// qubit, to give a Pauli string on that support.
fn pauli_on_support(n_qubits: usize, support: u64, r: u64) -> PauliString {
    let (mut x, mut z) = (0u64, 0u64);
    let mut k = 0;
    for q in 0..n_qubits {
        if support >> q & 1 == 1 {
            let two = r >> (2 * k) & 3;
            if two & 1 == 1 {
                x |= 1 << q;
            }
            if two & 2 == 2 {
                z |= 1 << q;
            }
            k += 1;
        }
    }
    PauliString::new(n_qubits, x, z).expect("support lies inside the register")
}

/// Uniformly random non-identity Pauli on `support`.
pub(crate) fn random_nonidentity(n_qubits: usize, support: u64, rng: &mut Rng) -> PauliString {
    let k = support.count_ones();
    let r = rng.random_range(1..(1u64 << (2 * k)));
    pauli_on_support(n_qubits, support, r)
}

/// Uniformly random Pauli (identity included) on `support`.
pub(crate) fn random_pauli(n_qubits: usize, support: u64, rng: &mut Rng) -> PauliString {
    let k = support.count_ones();
    let r = rng.random_range(0..(1u64 << (2 * k)));
    pauli_on_support(n_qubits, support, r)
}

pub(crate) fn check_inputs(c: &Circuit, theta: &[f64], nm: &NoiseModel) -> Result<()> {
    nm.validate()?;
    c.check_params(theta)
}

fn apply_noisy_op(state: &mut StateVector, op: &Op, theta: &[f64], over_rot: f64) -> Result<()> {
    match op {
        Op::Rotation {
            pauli,
            param,
            scale,
        } if over_rot != 0.0 => state.apply_rotation(pauli, scale * theta[*param] + over_rot),
        _ => apply_op(state, op, theta),
    }
}

/// Runs the circuit with the given error insertions (sorted by site index).
fn run_with_errors(
    c: &Circuit,
    theta: &[f64],
    over_rot: f64,
    sites: &[ErrorSite],
    errors: &[(u32, PauliString)],
) -> Result<StateVector> {
    let mut state = StateVector::zero_state(c.n_qubits())?;
    let mut next = 0;
    for (i, op) in c.ops().iter().enumerate() {
        apply_noisy_op(&mut state, op, theta, over_rot)?;
        while next < errors.len() && sites[errors[next].0 as usize].op == i {
            state.apply_pauli(&errors[next].1)?;
            next += 1;
        }
    }
    Ok(state)
}

/// Flips each measured bit independently: 0 to 1 with `p_read_01`, 1 to 0 with `p_read_10`.
pub fn apply_readout(counts: &CountsHistogram, nm: &NoiseModel, seed: u64) -> Result<CountsHistogram> {
    nm.validate()?;
    if !nm.has_readout() {
        return Ok(counts.clone());
    }
    let n = counts.n_qubits();
    let mut rng = rng::stream(seed, rng::READOUT);
    let mut dense = vec![0u64; 1 << n];
    for (b, c) in counts.iter() {
        for _ in 0..c {
            let mut out = b;
            for q in 0..n {
                let p = if b >> q & 1 == 1 { nm.p_read_10 } else { nm.p_read_01 };
                if p > 0.0 && rng.random::<f64>() < p {
                    out ^= 1 << q;
                }
            }
            dense[out as usize] += 1;
        }
    }
    Ok(CountsHistogram::from_dense(n, &dense))
}

/// Shot-based emulation of `c` on `|0...0>` under `nm`.
///
/// Error patterns are drawn per shot; shots with identical patterns share one
/// trajectory simulation. Bitstrings, gate errors and readout flips use
/// separate streams of `seed`, so with zero noise the histogram equals
/// [`crate::statevector::sample`] on the ideal state.
pub fn noisy_execute(
    c: &Circuit,
    theta: &[f64],
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<CountsHistogram> {
    check_inputs(c, theta, nm)?;
    if shots == 0 {
        return Err(HfcError::InvalidArgument("shots must be positive".into()));
    }
    let n = c.n_qubits();
    let sites = error_sites(c, nm);

    let mut err_rng = rng::stream(seed, rng::GATE_ERRORS);
    let mut per_shot: HashMap<u64, Vec<(u32, PauliString)>> = HashMap::new();
    for (s, site) in sites.iter().enumerate() {
        let hits = Binomial::new(shots, site.p)
            .expect("validated probability")
            .sample(&mut err_rng);
        if hits == 0 {
            continue;
        }
        let chosen = sample_indices(&mut err_rng, shots as usize, hits as usize);
        for shot in chosen.iter() {
            let e = random_nonidentity(n, site.support, &mut err_rng);
            per_shot.entry(shot as u64).or_default().push((s as u32, e));
        }
    }
    let mut groups: BTreeMap<Vec<(u32, PauliString)>, u64> = BTreeMap::new();
    groups.insert(Vec::new(), shots - per_shot.len() as u64);
    for (_, pattern) in per_shot {
        *groups.entry(pattern).or_default() += 1;
    }

    let mut sample_rng = rng::stream(seed, rng::SAMPLING);
    let mut dense = vec![0u64; 1 << n];
    for (pattern, count) in &groups {
        if *count == 0 {
            continue;
        }
        let state = run_with_errors(c, theta, nm.over_rot, &sites, pattern)?;
        let drawn = sample_distribution(&state.probabilities(), *count, &mut sample_rng);
        for (d, k) in dense.iter_mut().zip(drawn) {
            *d += k;
        }
    }
    let raw = CountsHistogram::from_dense(n, &dense);
    apply_readout(&raw, nm, seed)
}

/// Runs `shots` under twirling (split across randomized instances) or plainly.
pub fn execute_with_twirl(
    c: &Circuit,
    theta: &[f64],
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
    twirl: &TwirlConfig,
) -> Result<CountsHistogram> {
    if !twirl.enabled || c.rotation_count() == 0 {
        return noisy_execute(c, theta, nm, shots, seed);
    }
    let k = twirl.instances.max(1) as u64;
    let mut total = CountsHistogram::empty(c.n_qubits());
    for i in 0..k {
        let part = shots / k + u64::from(i < shots % k);
        if part == 0 {
            continue;
        }
        let job = derive_seed(seed, i);
        let tc = pauli_twirl(c, derive_seed(twirl.seed, job))?;
        total.merge(&noisy_execute(&tc, theta, nm, part, job)?);
    }
    Ok(total)
}

/// Noisy output distribution without sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    pub probabilities: Vec<f64>,
    /// Probability mass of error branches dropped below the pruning threshold.
    pub pruned_mass: f64,
}

/// Applies independent readout flips to a distribution.
pub fn readout_channel(probs: &[f64], n_qubits: usize, nm: &NoiseModel) -> Vec<f64> {
    let mut p = probs.to_vec();
    if !nm.has_readout() {
        return p;
    }
    for q in 0..n_qubits {
        let bit = 1usize << q;
        for b in 0..p.len() {
            if b & bit == 0 {
                let (p0, p1) = (p[b], p[b | bit]);
                p[b] = p0 * (1.0 - nm.p_read_01) + p1 * nm.p_read_10;
                p[b | bit] = p0 * nm.p_read_01 + p1 * (1.0 - nm.p_read_10);
            }
        }
    }
    p
}

/// Exact expected output distribution under `nm`, found by enumerating error
/// branches whose probability stays above `prune`; the kept mass is renormalized.
pub fn noisy_distribution(
    c: &Circuit,
    theta: &[f64],
    nm: &NoiseModel,
    prune: f64,
) -> Result<ExactDistribution> {
    check_inputs(c, theta, nm)?;
    let n = c.n_qubits();
    let sites = error_sites(c, nm);
    let mut acc = vec![0.0; 1 << n];
    let mut kept = 0.0;

    struct Ctx<'a> {
        c: &'a Circuit,
        theta: &'a [f64],
        nm: &'a NoiseModel,
        sites: &'a [ErrorSite],
        prune: f64,
    }

    // Ops before `op` are applied and sites before `site` are resolved.
    #[allow(clippy::too_many_arguments)]
    fn walk(
        ctx: &Ctx,
        mut state: StateVector,
        mut op: usize,
        mut site: usize,
        mut weight: f64,
        acc: &mut [f64],
        kept: &mut f64,
    ) -> Result<()> {
        loop {
            if site < ctx.sites.len() && ctx.sites[site].op < op {
                let s = ctx.sites[site];
                let n_err = (1u64 << (2 * s.support.count_ones())) - 1;
                let w_err = weight * s.p / n_err as f64;
                if w_err > ctx.prune {
                    for r in 1..=n_err {
                        let mut branch = state.clone();
                        branch.apply_pauli(&pauli_on_support(state.n_qubits(), s.support, r))?;
                        walk(ctx, branch, op, site + 1, w_err, acc, kept)?;
                    }
                }
                weight *= 1.0 - s.p;
                site += 1;
            } else if op < ctx.c.ops().len() {
                apply_noisy_op(&mut state, &ctx.c.ops()[op], ctx.theta, ctx.nm.over_rot)?;
                op += 1;
            } else {
                for (a, p) in acc.iter_mut().zip(state.probabilities()) {
                    *a += weight * p;
                }
                *kept += weight;
                return Ok(());
            }
        }
    }

    let ctx = Ctx {
        c,
        theta,
        nm,
        sites: &sites,
        prune,
    };
    walk(&ctx, StateVector::zero_state(n)?, 0, 0, 1.0, &mut acc, &mut kept)?;
    for a in &mut acc {
        *a /= kept;
    }
    Ok(ExactDistribution {
        probabilities: readout_channel(&acc, n, nm),
        pruned_mass: (1.0 - kept).max(0.0),
    })
}

use std::collections::BTreeMap;

use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use super::state::{bitstring, parse_bitstring, StateVector};
use crate::error::{HfcError, Result};
use crate::pauli::PauliString;
use crate::rng::{self, Rng};

/// Measured bitstring counts keyed by basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountsHistogram {
    n_qubits: usize,
    counts: BTreeMap<u64, u64>,
    total: u64,
}

impl CountsHistogram {
    pub fn empty(n_qubits: usize) -> Self {
        CountsHistogram {
            n_qubits,
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn from_dense(n_qubits: usize, dense: &[u64]) -> Self {
        let counts: BTreeMap<u64, u64> = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(b, &c)| (b as u64, c))
            .collect();
        let total = counts.values().sum();
        CountsHistogram {
            n_qubits,
            counts,
            total,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn total_shots(&self) -> u64 {
        self.total
    }

    pub fn get(&self, index: u64) -> u64 {
        self.counts.get(&index).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.counts.iter().map(|(&b, &c)| (b, c))
    }

    pub fn add(&mut self, index: u64, count: u64) {
        if count > 0 {
            *self.counts.entry(index).or_default() += count;
            self.total += count;
        }
    }

    pub fn merge(&mut self, other: &CountsHistogram) {
        for (b, c) in other.iter() {
            self.add(b, c);
        }
    }

    pub fn retain<F: FnMut(u64) -> bool>(&self, mut keep: F) -> CountsHistogram {
        let mut out = CountsHistogram::empty(self.n_qubits);
        for (b, c) in self.iter() {
            if keep(b) {
                out.add(b, c);
            }
        }
        out
    }

    /// Empirical distribution over all `2^n` basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        let mut p = vec![0.0; 1 << self.n_qubits];
        if self.total == 0 {
            return p;
        }
        for (b, c) in self.iter() {
            p[b as usize] = c as f64 / self.total as f64;
        }
        p
    }

    /// First 16 hex digits of SHA-256 over the sorted `bitstring:count` list.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for (b, c) in self.iter() {
            h.update(format!("{}:{};", bitstring(b, self.n_qubits), c));
        }
        hex::encode(&h.finalize()[..8])
    }
}

impl Serialize for CountsHistogram {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, u64> = self
            .iter()
            .map(|(b, c)| (bitstring(b, self.n_qubits), c))
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CountsHistogram {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, u64>::deserialize(d)?;
        let n = map.keys().next().map(|k| k.len()).unwrap_or(0);
        let mut out = CountsHistogram::empty(n);
        for (k, c) in map {
            if k.len() != n {
                return Err(serde::de::Error::custom("inconsistent bitstring widths"));
            }
            let b = parse_bitstring(&k).map_err(serde::de::Error::custom)?;
            out.add(b, c);
        }
        Ok(out)
    }
}

/// Draws `shots` outcomes from `probs` (need not be normalized) into dense counts.
///
/// Above `probs.len()` shots the counts come from a chain of conditional
/// binomials, which is an exact multinomial draw; below it each shot is a
/// binary search in the cumulative distribution.
pub fn sample_distribution(probs: &[f64], shots: u64, rng: &mut Rng) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    if shots == 0 || total <= 0.0 {
        return counts;
    }
    if shots as usize > probs.len() {
        let mut remaining = shots;
        let mut mass = total;
        for (i, &p) in probs.iter().enumerate() {
            if remaining == 0 {
                break;
            }
            let p = p.max(0.0);
            if p == 0.0 {
                continue;
            }
            let frac = (p / mass).clamp(0.0, 1.0);
            let k = if frac >= 1.0 {
                remaining
            } else {
                Binomial::new(remaining, frac)
                    .expect("binomial parameters are valid")
                    .sample(rng)
            };
            counts[i] = k;
            remaining -= k;
            mass -= p;
            if mass <= 0.0 {
                break;
            }
        }
        if remaining > 0 {
            // rounding left mass on the table; give it to the last populated state
            if let Some(i) = probs.iter().rposition(|&p| p > 0.0) {
                counts[i] += remaining;
            }
        }
    } else {
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in probs {
            acc += p.max(0.0);
            cdf.push(acc);
        }
        let last = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for _ in 0..shots {
            let u = rng.random::<f64>() * acc;
            let i = cdf.partition_point(|&c| c <= u).min(last);
            counts[i] += 1;
        }
    }
    counts
}

/// Samples the state in the computational basis.
pub fn sample(s: &StateVector, shots: u64, seed: u64) -> Result<CountsHistogram> {
    if shots == 0 {
        return Err(HfcError::InvalidArgument("shots must be positive".into()));
    }
    let mut r = rng::stream(seed, rng::SAMPLING);
    let dense = sample_distribution(&s.probabilities(), shots, &mut r);
    Ok(CountsHistogram::from_dense(s.n_qubits(), &dense))
}

/// `sum_b p(b) (-1)^{popcount(b & mask)}`.
pub fn parity_expectation(probs: &[f64], mask: u64) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(b, p)| {
            if (b as u64 & mask).count_ones() % 2 == 0 {
                *p
            } else {
                -*p
            }
        })
        .sum()
}

/// Rotates into the eigenbasis of `p`, samples, and returns the sample mean of P.
pub fn measure_pauli(
    s: &StateVector,
    p: &PauliString,
    shots: u64,
    seed: u64,
) -> Result<(f64, CountsHistogram)> {
    if p.is_identity() {
        return Err(HfcError::InvalidArgument(
            "cannot measure the identity string".into(),
        ));
    }
    let mut rotated = s.clone();
    rotated.apply_basis_change(p)?;
    let counts = sample(&rotated, shots, seed)?;
    let estimate = parity_expectation(&counts.probabilities(), p.support());
    Ok((estimate, counts))
}

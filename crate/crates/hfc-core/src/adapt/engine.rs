use std::cell::RefCell;
use std::fmt;

use argmin::core::{CostFunction, Executor, Gradient, State, TerminationReason, TerminationStatus};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pool::OperatorPool;
use crate::error::{HfcError, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::statevector::StateVector;

/// Default stopping threshold on the largest pool gradient.
pub const DEFAULT_GRAD_TOL: f64 = 1e-6;
/// Gradient-norm tolerance of the inner angle optimization.
pub const OPTIMIZER_GRAD_TOL: f64 = 1e-8;

/// `dE/dtheta` at `theta = 0` for appending `exp(-i theta/2 P)` to `s`,
/// equal to `Im <H s | P s>`.
pub fn pool_gradient(s: &StateVector, h: &PauliSum, p: &PauliString) -> Result<f64> {
    let hs = s.apply_sum(h)?;
    gradient_with(&hs, s, p)
}

fn gradient_with(hs: &StateVector, s: &StateVector, p: &PauliString) -> Result<f64> {
    let mut ps = s.clone();
    ps.apply_pauli(p)?;
    Ok(hs.inner(&ps)?.im)
}

/// Ground-state energy by dense diagonalization.
pub fn ground_energy(h: &PauliSum) -> Result<f64> {
    let m = dense_matrix(h)?;
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Dense matrix of a Pauli sum in the computational basis.
pub fn dense_matrix(h: &PauliSum) -> Result<DMatrix<Complex64>> {
    let n = h.n_qubits();
    if n > 14 {
        return Err(HfcError::TooManyQubits(n));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for (p, c) in h.iter() {
        for b in 0..dim as u64 {
            let (phase, out) = p.act_on_basis(b);
            m[(out as usize, b as usize)] += c * phase;
        }
    }
    Ok(m)
}

/// One outer ADAPT iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptStep {
    pub selected: usize,
    pub string: PauliString,
    pub max_gradient: f64,
    /// Energy after re-optimizing all angles.
    pub energy: f64,
    pub optimizer_iterations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptState {
    /// Pool indices in application order.
    pub selected: Vec<usize>,
    pub strings: Vec<PauliString>,
    pub angles: Vec<f64>,
    pub energy: f64,
    pub reference_energy: f64,
    pub history: Vec<AdaptStep>,
    /// Largest pool gradient at the final state.
    pub final_gradient: f64,
    pub converged: bool,
}

impl AdaptState {
    /// `prod_k exp(-i angles[k]/2 strings[k])` applied to `reference`, first string first.
    pub fn prepare(&self, reference: &StateVector) -> Result<StateVector> {
        prepare(reference, &self.strings, &self.angles)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptOptions {
    pub grad_tol: f64,
    pub max_ops: usize,
    /// Iteration cap of each inner optimization.
    pub max_optimizer_iters: u64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        AdaptOptions {
            grad_tol: DEFAULT_GRAD_TOL,
            max_ops: 100,
            max_optimizer_iters: 2000,
        }
    }
}

/// ADAPT failure carrying the state reached before it.
#[derive(Debug)]
pub struct AdaptFailure {
    pub partial: Box<AdaptState>,
    pub error: HfcError,
}

impl fmt::Display for AdaptFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} operators)", self.error, self.partial.strings.len())
    }
}

impl std::error::Error for AdaptFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<AdaptFailure> for HfcError {
    fn from(f: AdaptFailure) -> Self {
        f.error
    }
}

fn prepare(reference: &StateVector, strings: &[PauliString], angles: &[f64]) -> Result<StateVector> {
    let mut s = reference.clone();
    for (p, &t) in strings.iter().zip(angles) {
        s.apply_rotation(p, t)?;
    }
    Ok(s)
}

struct Objective<'a> {
    h: &'a PauliSum,
    reference: &'a StateVector,
    strings: &'a [PauliString],
    /// Lowest energy evaluated so far, kept across optimizer restarts.
    best: RefCell<(f64, Vec<f64>)>,
}

impl<'a> Objective<'a> {
    fn new(h: &'a PauliSum, reference: &'a StateVector, strings: &'a [PauliString]) -> Self {
        Objective {
            h,
            reference,
            strings,
            best: RefCell::new((f64::INFINITY, Vec::new())),
        }
    }

    fn energy(&self, angles: &[f64]) -> Result<f64> {
        // a degenerate BFGS update shows up as non-finite trial angles
        if angles.iter().any(|t| !t.is_finite()) {
            return Err(HfcError::Optimizer {
                iterations: 0,
                reason: "non-finite trial angles".into(),
            });
        }
        let e = prepare(self.reference, self.strings, angles)?.expectation(self.h)?.re;
        let mut best = self.best.borrow_mut();
        if e < best.0 {
            *best = (e, angles.to_vec());
        }
        Ok(e)
    }

    /// Adjoint-mode gradient: sweep backwards, un-applying each rotation.
    fn gradient(&self, angles: &[f64]) -> Result<Vec<f64>> {
        if angles.iter().any(|t| !t.is_finite()) {
            return Err(HfcError::Optimizer {
                iterations: 0,
                reason: "non-finite trial angles".into(),
            });
        }
        let mut phi = prepare(self.reference, self.strings, angles)?;
        let mut lambda = phi.apply_sum(self.h)?;
        let mut g = vec![0.0; angles.len()];
        for k in (0..angles.len()).rev() {
            let p = &self.strings[k];
            g[k] = gradient_with(&lambda, &phi, p)?;
            phi.apply_rotation(p, -angles[k])?;
            lambda.apply_rotation(p, -angles[k])?;
        }
        Ok(g)
    }
}

impl CostFunction for &Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.energy(p)?)
    }
}

impl Gradient for &Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;

    fn gradient(&self, p: &Vec<f64>) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(Objective::gradient(self, p)?)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const MAX_RESTARTS: usize = 20;
const MAX_STEP: f64 = 10.0;
/// Gradient norm accepted when BFGS can no longer lower the energy in
/// floating point; the energy is then within about its square of a minimum.
const STALL_GRAD_TOL: f64 = 1e-5;

/// BFGS over all angles. Returns the best angles, their energy and the
/// iteration count. When the line search gives up (curvature lost far from a
/// minimum), BFGS restarts from the best point seen with a fresh Hessian.
fn optimize(obj: &Objective, start: Vec<f64>, max_iters: u64) -> Result<(Vec<f64>, f64, u64)> {
    let start_energy = obj.energy(&start)?;
    let n = start.len();
    let eye: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut x0 = start.clone();
    let mut total = 0u64;
    for _ in 0..MAX_RESTARTS {
        if norm(&obj.gradient(&x0)?) < OPTIMIZER_GRAD_TOL {
            break;
        }
        let budget = max_iters.saturating_sub(total);
        if budget == 0 {
            return Err(HfcError::Optimizer {
                iterations: total as usize,
                reason: "iteration limit reached before the gradient tolerance".into(),
            });
        }
        // a finite step cap keeps the search bracketed; energies are periodic in the angles
        let solver = MoreThuenteLineSearch::new()
            .with_bounds(f64::EPSILON.sqrt(), MAX_STEP)
            .map(BFGS::new)
            .and_then(|s| s.with_tolerance_grad(OPTIMIZER_GRAD_TOL))
            .and_then(|s| s.with_tolerance_cost(0.0))
            .map_err(|e| HfcError::Optimizer {
                iterations: total as usize,
                reason: e.to_string(),
            })?;
        let before = obj.best.borrow().0;
        let last_reason = match Executor::new(obj, solver)
            .configure(|s| s.param(x0.clone()).inv_hessian(eye.clone()).max_iters(budget))
            .run()
        {
            Ok(res) => {
                let state = res.state();
                total += state.get_iter();
                let converged = matches!(
                    state.get_termination_status(),
                    TerminationStatus::Terminated(TerminationReason::SolverConverged)
                );
                x0 = obj.best.borrow().1.clone();
                if converged && norm(&obj.gradient(&x0)?) < OPTIMIZER_GRAD_TOL {
                    break;
                }
                format!("{:?}", state.get_termination_status())
            }
            Err(e) => {
                x0 = obj.best.borrow().1.clone();
                total += 1;
                e.to_string()
            }
        };
        if obj.best.borrow().0 >= before {
            // stalled: accept a round-off floor, otherwise report
            if norm(&obj.gradient(&x0)?) <= STALL_GRAD_TOL {
                break;
            }
            return Err(HfcError::Optimizer {
                iterations: total as usize,
                reason: last_reason,
            });
        }
    }
    let (best_energy, best) = obj.best.borrow().clone();
    if best_energy > start_energy {
        return Ok((start, start_energy, total));
    }
    Ok((best, best_energy, total))
}

/// Screens the pool at `s`. Returns `(index, |gradient|)` of the largest
/// magnitude, lowest index on ties.
fn screen(s: &StateVector, h: &PauliSum, pool: &OperatorPool) -> Result<(usize, f64)> {
    let hs = s.apply_sum(h)?;
    let grads: Vec<f64> = (0..pool.len())
        .into_par_iter()
        .map(|k| gradient_with(&hs, s, &pool.string(k)).map(f64::abs))
        .collect::<Result<_>>()?;
    let mut best = (0, grads[0]);
    for (k, &g) in grads.iter().enumerate().skip(1) {
        if g > best.1 {
            best = (k, g);
        }
    }
    Ok(best)
}

/// Qubit-ADAPT: repeatedly appends the pool string with the largest energy
/// gradient and re-optimizes every angle, starting the new one at zero.
pub fn run_adapt(
    h: &PauliSum,
    reference: &StateVector,
    pool: &OperatorPool,
    opts: &AdaptOptions,
) -> std::result::Result<AdaptState, AdaptFailure> {
    let reference_energy = reference.expectation(h).map(|e| e.re);
    let mut state = AdaptState {
        selected: Vec::new(),
        strings: Vec::new(),
        angles: Vec::new(),
        energy: *reference_energy.as_ref().unwrap_or(&f64::NAN),
        reference_energy: *reference_energy.as_ref().unwrap_or(&f64::NAN),
        history: Vec::new(),
        final_gradient: f64::NAN,
        converged: false,
    };
    macro_rules! fail_on {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(error) => {
                    return Err(AdaptFailure {
                        partial: Box::new(state),
                        error,
                    })
                }
            }
        };
    }
    fail_on!(reference_energy);
    if h.n_qubits() != reference.n_qubits() || pool.n_qubits() != reference.n_qubits() {
        fail_on!(Err(HfcError::QubitMismatch {
            expected: reference.n_qubits(),
            found: if h.n_qubits() != reference.n_qubits() { h.n_qubits() } else { pool.n_qubits() },
        }));
    }
    if pool.is_empty() {
        fail_on!(Err(HfcError::InvalidArgument("operator pool is empty".into())));
    }
    if !(opts.grad_tol > 0.0) {
        fail_on!(Err(HfcError::InvalidArgument("grad_tol must be positive".into())));
    }
    let mut current = reference.clone();
    loop {
        let (k, g) = fail_on!(screen(&current, h, pool));
        state.final_gradient = g;
        if g < opts.grad_tol {
            state.converged = true;
            return Ok(state);
        }
        if state.strings.len() >= opts.max_ops {
            return Ok(state);
        }
        let mut strings = state.strings.clone();
        strings.push(pool.string(k));
        let mut start = state.angles.clone();
        start.push(0.0);
        let obj = Objective::new(h, reference, &strings);
        let (angles, energy, iters) = fail_on!(optimize(&obj, start, opts.max_optimizer_iters));
        current = fail_on!(prepare(reference, &strings, &angles));
        state.selected.push(k);
        state.strings = strings;
        state.angles = angles;
        state.energy = energy;
        state.history.push(AdaptStep {
            selected: k,
            string: pool.string(k),
            max_gradient: g,
            energy,
            optimizer_iterations: iters,
        });
    }
}

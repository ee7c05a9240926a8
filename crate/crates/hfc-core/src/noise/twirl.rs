use super::execute::random_pauli;
use crate::error::Result;
use crate::rng;
use crate::statevector::{Circuit, Op};

/// Conjugates every multi-qubit rotation by a random Pauli `Q` on its support.
///
/// `Q exp(-i a/2 P) Q = exp(-i a/2 QPQ)`, and `QPQ = -P` when they anticommute,
/// so the rotation's scale is negated in that case and the ideal action is
/// unchanged. A coherent angle bias then enters with a random sign.
pub fn pauli_twirl(c: &Circuit, seed: u64) -> Result<Circuit> {
    let mut rng = rng::stream(seed, rng::TWIRL);
    let n = c.n_qubits();
    let mut ops = Vec::with_capacity(c.ops().len());
    for op in c.ops() {
        match op {
            Op::Rotation {
                pauli,
                param,
                scale,
            } if pauli.weight() >= 2 => {
                let q = random_pauli(n, pauli.support(), &mut rng);
                if q.is_identity() {
                    ops.push(op.clone());
                    continue;
                }
                let s = if q.commutes(pauli) { *scale } else { -*scale };
                ops.push(Op::Frame(q));
                ops.push(Op::Rotation {
                    pauli: *pauli,
                    param: *param,
                    scale: s,
                });
                ops.push(Op::Frame(q));
            }
            other => ops.push(other.clone()),
        }
    }
    Ok(Circuit::from_parts(n, c.n_params(), ops))
}

//! Statevector equivalence of routed output against the source circuit.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::statevector::StateVector;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::optimizer::Plan;

pub const ORACLE_MAX_QUBITS: usize = 14;
pub const ORACLE_MAX_NODES: usize = 22;
const TOLERANCE: f64 = 1e-9;
const RANDOM_INPUTS: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("circuit has {0} qubits; the oracle handles at most {ORACLE_MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("routed output touches {0} nodes; the oracle handles at most {ORACLE_MAX_NODES}")]
    TooManyNodes(usize),
    #[error("plan covers {plan} qubits, circuit has {circuit}")]
    SizeMismatch { plan: usize, circuit: usize },
}

/// Whether the plan's routed output, read through its final layout, acts
/// like `original` (up to global phase) on `|0...0>` and on random product
/// inputs.
pub fn equivalence_oracle(original: &Circuit, plan: &Plan) -> Result<bool, OracleError> {
    let n = original.n_qubits();
    if n > ORACLE_MAX_QUBITS {
        return Err(OracleError::TooManyQubits(n));
    }
    let r = &plan.routing;
    if r.initial_layout.n_logical() != n {
        return Err(OracleError::SizeMismatch {
            plan: r.initial_layout.n_logical(),
            circuit: n,
        });
    }
    let mut compact: BTreeMap<usize, usize> = BTreeMap::new();
    let nodes = r
        .initial_layout
        .as_slice()
        .iter()
        .chain(r.final_layout.as_slice())
        .chain(r.routed.iter().flat_map(|g| &g.gate.qubits));
    for &p in nodes {
        let next = compact.len();
        compact.entry(p).or_insert(next);
    }
    let m = compact.len();
    if m > ORACLE_MAX_NODES {
        return Err(OracleError::TooManyNodes(m));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for input in 0..=RANDOM_INPUTS {
        let prep: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                if input == 0 {
                    (0.0, 0.0)
                } else {
                    (
                        rng.random_range(0.0..core::f64::consts::PI),
                        rng.random_range(0.0..core::f64::consts::TAU),
                    )
                }
            })
            .collect();
        let prepare = |s: &mut StateVector, at: &dyn Fn(usize) -> usize| {
            for (q, &(theta, phi)) in prep.iter().enumerate() {
                s.apply(&Gate::rotation(GateKind::Ry, theta, at(q)));
                s.apply(&Gate::rotation(GateKind::Rz, phi, at(q)));
            }
        };

        let mut reference = StateVector::zero(n);
        prepare(&mut reference, &|q| q);
        for g in original.gates() {
            reference.apply(g);
        }

        let mut physical = StateVector::zero(m);
        prepare(&mut physical, &|q| compact[&r.initial_layout.phys(q)]);
        for g in &r.routed {
            let qubits = g.gate.qubits.iter().map(|p| compact[p]).collect();
            physical.apply(&Gate {
                kind: g.gate.kind,
                qubits,
                params: g.gate.params.clone(),
            });
        }

        // Overlap of the reference, embedded through the final layout with
        // idle nodes in |0>, against the routed state.
        let slot: Vec<usize> = (0..n).map(|q| compact[&r.final_layout.phys(q)]).collect();
        let amps = physical.amplitudes();
        let mut overlap = num_complex::Complex64::new(0.0, 0.0);
        for (x, a) in reference.amplitudes().iter().enumerate() {
            let mut idx = 0usize;
            for (q, &s) in slot.iter().enumerate() {
                idx |= ((x >> q) & 1) << s;
            }
            overlap += a.conj() * amps[idx];
        }
        if overlap.norm() < 1.0 - TOLERANCE {
            return Ok(false);
        }
    }
    Ok(true)
}

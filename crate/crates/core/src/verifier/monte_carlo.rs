//! Monte Carlo error injection on routed output.
//!
//! Every failure event of the analytic estimator fails independently; a
//! failed gate or EPR use applies a uniformly random non-identity Pauli to
//! its operands, a failed readout flips the measured qubit. Each shot is
//! scored by the overlap of its final state with the noiseless one.
//! SWAPs only relabel qubits, so simulation runs over the logical register.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::statevector::StateVector;
use super::{noise_events, EventClass, FidelityError, NoiseEvent};
use crate::circuit::Gate;
use crate::hardware::SystemConfig;
use crate::optimizer::Plan;

pub const MC_MAX_QUBITS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub shots: u64,
    /// Mean of `|<ideal|noisy>|^2` over shots.
    pub fidelity: f64,
    pub fidelity_std_error: f64,
    /// Fraction of shots without any failure event.
    pub no_failure: f64,
    pub no_failure_std_error: f64,
    /// `prod(1 - p)` over all events.
    pub analytic_no_failure: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MonteCarloError {
    #[error("circuit has {0} qubits; Monte Carlo handles at most {MC_MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("shots must be positive")]
    ZeroShots,
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
}

struct LogicalEvent {
    routed_index: usize,
    p_fail: f64,
    targets: [Option<usize>; 2],
    arity: usize,
    readout: bool,
}

pub fn monte_carlo_fidelity(
    plan: &Plan,
    config: &SystemConfig,
    shots: u64,
    seed: u64,
) -> Result<MonteCarloEstimate, MonteCarloError> {
    let n = plan.circuit.n_qubits();
    if n > MC_MAX_QUBITS {
        return Err(MonteCarloError::TooManyQubits(n));
    }
    if shots == 0 {
        return Err(MonteCarloError::ZeroShots);
    }
    let routing = &plan.routing;
    let raw: Vec<NoiseEvent> = noise_events(routing, &plan.vst, config)?;

    // Logical operations and occupant snapshots per routed index.
    let mut layout = routing.initial_layout.clone();
    let mut ops: Vec<Option<Gate>> = Vec::with_capacity(routing.routed.len());
    let mut occupants: Vec<[Option<usize>; 2]> = Vec::with_capacity(routing.routed.len());
    for g in &routing.routed {
        let q = &g.gate.qubits;
        if g.inserted_swap {
            layout.swap_nodes(q[0], q[1]);
            ops.push(None);
        } else {
            let qubits = q
                .iter()
                .map(|&p| layout.logical(p).expect("gate on an occupied node"))
                .collect();
            ops.push(Some(Gate {
                kind: g.gate.kind,
                qubits,
                params: g.gate.params.clone(),
            }));
        }
        let second = q.get(1).copied().unwrap_or(q[0]);
        occupants.push([layout.logical(q[0]), layout.logical(second)]);
    }
    let events: Vec<LogicalEvent> = raw
        .iter()
        .map(|e| {
            let occ = occupants[e.routed_index];
            LogicalEvent {
                routed_index: e.routed_index,
                p_fail: e.p_fail,
                targets: if e.arity == 1 { [occ[0], None] } else { occ },
                arity: e.arity,
                readout: e.class == EventClass::Readout,
            }
        })
        .collect();
    let analytic_no_failure: f64 = events.iter().map(|e| 1.0 - e.p_fail).product();

    let mut ideal: Vec<StateVector> = Vec::with_capacity(ops.len());
    let mut s = StateVector::zero(n);
    for op in &ops {
        if let Some(g) = op {
            s.apply(g);
        }
        ideal.push(s.clone());
    }

    let mut cache: BTreeMap<Vec<(u32, u8)>, f64> = BTreeMap::new();
    let (mut sum, mut sum_sq, mut clean) = (0.0f64, 0.0f64, 0u64);
    let mut failures: Vec<(u32, u8)> = Vec::new();
    for shot in 0..shots {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(shot);
        failures.clear();
        for (i, e) in events.iter().enumerate() {
            if e.p_fail > 0.0 && rng.random::<f64>() < e.p_fail {
                let code = if e.readout {
                    1
                } else if e.arity == 1 {
                    rng.random_range(1..4u8)
                } else {
                    rng.random_range(1..16u8)
                };
                failures.push((i as u32, code));
            }
        }
        let f = if failures.is_empty() {
            clean += 1;
            1.0
        } else if let Some(&f) = cache.get(&failures) {
            f
        } else {
            let f = trajectory_fidelity(&failures, &events, &ops, &ideal);
            cache.insert(failures.clone(), f);
            f
        };
        sum += f;
        sum_sq += f * f;
    }
    let k = shots as f64;
    let mean = sum / k;
    let var = (sum_sq / k - mean * mean).max(0.0);
    let p = clean as f64 / k;
    Ok(MonteCarloEstimate {
        shots,
        fidelity: mean,
        fidelity_std_error: libm::sqrt(var / k),
        no_failure: p,
        no_failure_std_error: libm::sqrt(p * (1.0 - p) / k),
        analytic_no_failure,
    })
}

/// Overlap with the ideal final state: start from the ideal state at the
/// first failure, inject every failure in order, and compare against the
/// ideal state at the last one (later gates cancel).
fn trajectory_fidelity(
    failures: &[(u32, u8)],
    events: &[LogicalEvent],
    ops: &[Option<Gate>],
    ideal: &[StateVector],
) -> f64 {
    let first = events[failures[0].0 as usize].routed_index;
    let mut state = ideal[first].clone();
    let mut at = first;
    for &(i, code) in failures {
        let e = &events[i as usize];
        while at < e.routed_index {
            at += 1;
            if let Some(g) = &ops[at] {
                state.apply(g);
            }
        }
        let codes = if e.arity == 1 {
            [code, 0]
        } else {
            [code >> 2, code & 3]
        };
        for (t, c) in e.targets.iter().zip(codes) {
            if let Some(q) = t {
                state.apply_pauli(c, *q);
            }
        }
    }
    ideal[at].inner(&state).norm_sqr()
}

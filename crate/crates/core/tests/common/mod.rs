#![allow(dead_code)]

use dismap_core::circuit::{Circuit, Gate, GateKind};
use dismap_core::hardware::{SystemConfig, WorkerSpec};
use proptest::prelude::*;

pub fn line_edges(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|i| (i - 1, i)).collect()
}

pub fn line_worker(id: usize, n: usize, e1: f64, e2: f64, ero: f64) -> WorkerSpec {
    WorkerSpec::uniform(id, n, &line_edges(n), e1, e2, ero)
}

/// Two noisy line workers of `n` qubits each.
pub fn two_lines(n: usize, sr: f64) -> SystemConfig {
    SystemConfig::new(
        vec![
            line_worker(0, n, 1e-3, 1e-2, 2e-2),
            line_worker(1, n, 2e-3, 1.5e-2, 3e-2),
        ],
        sr,
    )
}

/// Worker whose per-qubit errors vary with `salt`, so link endpoints and
/// layouts are not all ties.
pub fn graded_line(id: usize, n: usize, salt: u64) -> WorkerSpec {
    let mut w = line_worker(id, n, 0.0, 0.0, 0.0);
    let f = |i: usize, k: u64| ((i as u64 * 7 + k * 13 + salt * 31) % 11) as f64;
    for q in 0..n {
        w.err_1q[q] = 1e-4 * (1.0 + f(q, 1));
        w.err_readout[q] = 5e-3 * (1.0 + f(q, 2));
    }
    for (i, &(a, b)) in line_edges(n).iter().enumerate() {
        w.err_2q.insert((a, b), 2e-3 * (1.0 + f(i, 3)));
    }
    w
}

const ONE_Q: [GateKind; 8] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
];
const ROT: [GateKind; 3] = [GateKind::Rx, GateKind::Ry, GateKind::Rz];

fn gate_from(n: usize, pick: u8, qs: [usize; 3], theta: f64) -> Option<Gate> {
    let (a, b, c) = (qs[0] % n, qs[1] % n, qs[2] % n);
    Some(match pick % 10 {
        0..=2 => Gate::single(ONE_Q[(pick as usize / 10) % ONE_Q.len()], a),
        3 | 4 => Gate::rotation(ROT[(pick as usize / 10) % ROT.len()], theta, a),
        5 | 6 if a != b => Gate::cx(a, b),
        7 if a != b => Gate::cz(a, b),
        8 if a != b => Gate::rzz(theta, a, b),
        9 if a != b && b != c && a != c => {
            if pick % 20 < 10 {
                Gate::ccx(a, b, c)
            } else {
                Gate::swap(a, b)
            }
        }
        _ => return None,
    })
}

/// Random circuit over `qubits` with up to `max_gates` gates and no
/// measurements.
pub fn arb_unitary_circuit(
    qubits: core::ops::RangeInclusive<usize>,
    max_gates: usize,
) -> impl Strategy<Value = Circuit> {
    qubits.prop_flat_map(move |n| {
        prop::collection::vec(
            (any::<u8>(), any::<[usize; 3]>(), -3.2f64..3.2),
            1..=max_gates,
        )
        .prop_map(move |raw| {
            let gates = raw
                .into_iter()
                .filter_map(|(p, q, t)| gate_from(n, p, q, t));
            Circuit::from_gates("fuzz", n, gates).expect("generated gates are valid")
        })
    })
}

/// As [`arb_unitary_circuit`] with a terminal measurement on a random subset.
pub fn arb_circuit(
    qubits: core::ops::RangeInclusive<usize>,
    max_gates: usize,
) -> impl Strategy<Value = Circuit> {
    (arb_unitary_circuit(qubits, max_gates), any::<u32>()).prop_map(|(mut c, mask)| {
        for q in 0..c.n_qubits() {
            if mask >> (q % 32) & 1 == 1 {
                c.push(Gate::measure(q)).unwrap();
            }
        }
        c
    })
}

/// Random product state preparation on every qubit.
pub fn product_prefix(n: usize, angles: &[(f64, f64)]) -> Vec<Gate> {
    (0..n)
        .flat_map(|q| {
            let (a, b) = angles[q % angles.len()];
            [
                Gate::rotation(GateKind::Ry, a, q),
                Gate::rotation(GateKind::Rz, b, q),
            ]
        })
        .collect()
}

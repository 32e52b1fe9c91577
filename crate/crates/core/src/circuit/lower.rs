use alloc::vec::Vec;

use super::{Circuit, Gate, GateKind};

/// True when the circuit holds only single-qubit kinds, CX, MEASURE and BARRIER.
pub fn is_lowered(circuit: &Circuit) -> bool {
    circuit.gates().iter().all(gate_is_lowered)
}

pub(crate) fn gate_is_lowered(g: &Gate) -> bool {
    !matches!(
        g.kind,
        GateKind::Cz | GateKind::Swap | GateKind::Ccx | GateKind::Rzz
    )
}

/// Rewrite CZ, SWAP, RZZ and CCX into single-qubit gates plus CX.
/// Untouched gates keep their relative order.
pub fn lower(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.name(), circuit.n_qubits());
    for g in circuit.gates() {
        for lg in lower_gate(g) {
            // Decompositions only reuse operands of an already valid gate.
            out.push(lg).expect("lowering preserves gate validity");
        }
    }
    out
}

fn lower_gate(g: &Gate) -> Vec<Gate> {
    use GateKind::*;
    let q = &g.qubits;
    match g.kind {
        Cz => alloc::vec![
            Gate::single(H, q[1]),
            Gate::cx(q[0], q[1]),
            Gate::single(H, q[1]),
        ],
        Swap => alloc::vec![
            Gate::cx(q[0], q[1]),
            Gate::cx(q[1], q[0]),
            Gate::cx(q[0], q[1])
        ],
        Rzz => alloc::vec![
            Gate::cx(q[0], q[1]),
            Gate::rotation(Rz, g.params[0], q[1]),
            Gate::cx(q[0], q[1]),
        ],
        Ccx => toffoli(q[0], q[1], q[2]),
        _ => alloc::vec![g.clone()],
    }
}

/// Six-CX Toffoli with T/T† phases and H on the target.
fn toffoli(a: usize, b: usize, c: usize) -> Vec<Gate> {
    use GateKind::*;
    alloc::vec![
        Gate::single(H, c),
        Gate::cx(b, c),
        Gate::single(Tdg, c),
        Gate::cx(a, c),
        Gate::single(T, c),
        Gate::cx(b, c),
        Gate::single(Tdg, c),
        Gate::cx(a, c),
        Gate::single(T, b),
        Gate::single(T, c),
        Gate::single(H, c),
        Gate::cx(a, b),
        Gate::single(T, a),
        Gate::single(Tdg, b),
        Gate::cx(a, b),
    ]
}

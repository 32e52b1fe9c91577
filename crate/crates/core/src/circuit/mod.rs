//! Gate-list intermediate representation.
//!
//! A [`Circuit`] is an ordered list of [`Gate`]s over a single register of
//! logical qubits. Everything downstream (cutting, routing, verification)
//! consumes this form, usually after [`lower`] has reduced it to single-qubit
//! gates plus CX.

mod bench;
mod interaction;
mod lower;
pub mod qasm;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use bench::{bernstein_vazirani, generate_benchmark, random_regular_graph, BenchmarkKind};
pub use interaction::{interaction_graph, InteractionGraph};
pub use lower::{is_lowered, lower};
pub use qasm::{emit_qasm, parse_qasm, QasmError};

/// Gate kinds understood by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx,
    Ry,
    Rz,
    Cx,
    Cz,
    Swap,
    Ccx,
    Rzz,
    Measure,
    Barrier,
}

impl GateKind {
    pub const ALL: [GateKind; 18] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Swap,
        GateKind::Ccx,
        GateKind::Rzz,
        GateKind::Measure,
        GateKind::Barrier,
    ];

    /// Number of qubit operands, `None` for the variadic barrier.
    pub fn arity(self) -> Option<usize> {
        use GateKind::*;
        match self {
            H | X | Y | Z | S | Sdg | T | Tdg | Rx | Ry | Rz | Measure => Some(1),
            Cx | Cz | Swap | Rzz => Some(2),
            Ccx => Some(3),
            Barrier => None,
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::Rzz => 1,
            _ => 0,
        }
    }

    /// Unitary single-qubit gate (excludes measure and barrier).
    pub fn is_single_qubit_unitary(self) -> bool {
        self.arity() == Some(1) && self != GateKind::Measure
    }

    /// OpenQASM 2.0 name (qelib1 spelling).
    pub fn qasm_name(self) -> &'static str {
        use GateKind::*;
        match self {
            H => "h",
            X => "x",
            Y => "y",
            Z => "z",
            S => "s",
            Sdg => "sdg",
            T => "t",
            Tdg => "tdg",
            Rx => "rx",
            Ry => "ry",
            Rz => "rz",
            Cx => "cx",
            Cz => "cz",
            Swap => "swap",
            Ccx => "ccx",
            Rzz => "rzz",
            Measure => "measure",
            Barrier => "barrier",
        }
    }

    pub fn from_qasm_name(name: &str) -> Option<GateKind> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.qasm_name() == name)
            .or(match name {
                "CX" => Some(GateKind::Cx),
                _ => None,
            })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.qasm_name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], params: &[f64]) -> Self {
        Gate {
            kind,
            qubits: qubits.to_vec(),
            params: params.to_vec(),
        }
    }

    pub fn single(kind: GateKind, q: usize) -> Self {
        Self::new(kind, &[q], &[])
    }

    pub fn rotation(kind: GateKind, theta: f64, q: usize) -> Self {
        Self::new(kind, &[q], &[theta])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::new(GateKind::Cx, &[control, target], &[])
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::new(GateKind::Cz, &[a, b], &[])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, &[a, b], &[])
    }

    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Self::new(GateKind::Ccx, &[c0, c1, target], &[])
    }

    pub fn rzz(theta: f64, a: usize, b: usize) -> Self {
        Self::new(GateKind::Rzz, &[a, b], &[theta])
    }

    pub fn measure(q: usize) -> Self {
        Self::single(GateKind::Measure, q)
    }

    pub fn barrier(qubits: &[usize]) -> Self {
        Self::new(GateKind::Barrier, qubits, &[])
    }

    pub fn is_two_qubit(&self) -> bool {
        self.kind.arity() == Some(2)
    }

    /// Check the gate against a register of `n_qubits`.
    pub fn validate(&self, n_qubits: usize) -> Result<(), CircuitError> {
        match self.kind.arity() {
            Some(a) if a != self.qubits.len() => {
                return Err(CircuitError::Arity {
                    kind: self.kind,
                    expected: a,
                    got: self.qubits.len(),
                })
            }
            None if self.qubits.is_empty() => {
                return Err(CircuitError::Arity {
                    kind: self.kind,
                    expected: 1,
                    got: 0,
                })
            }
            _ => {}
        }
        if self.params.len() != self.kind.param_count() {
            return Err(CircuitError::ParamCount {
                kind: self.kind,
                expected: self.kind.param_count(),
                got: self.params.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= n_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits });
            }
            if self.qubits[..i].contains(&q) {
                return Err(CircuitError::RepeatedQubit {
                    kind: self.kind,
                    qubit: q,
                });
            }
        }
        if self.params.iter().any(|p| !p.is_finite()) {
            return Err(CircuitError::NonFiniteParam { kind: self.kind });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("{kind} takes {expected} qubit(s), got {got}")]
    Arity {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind} takes {expected} parameter(s), got {got}")]
    ParamCount {
        kind: GateKind,
        expected: usize,
        got: usize,
    },
    #[error("qubit index {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("{kind} uses qubit {qubit} more than once")]
    RepeatedQubit { kind: GateKind, qubit: usize },
    #[error("{kind} has a non-finite angle")]
    NonFiniteParam { kind: GateKind },
    #[error("qubit {qubit} is used by {kind} after being measured")]
    MidCircuitMeasurement { kind: GateKind, qubit: usize },
    #[error("circuit is not lowered: gate {index} is {kind}")]
    NotLowered { index: usize, kind: GateKind },
}

/// Ordered gate list over `n_qubits` logical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    name: String,
    n_qubits: usize,
    gates: Vec<Gate>,
    measured: Vec<bool>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n_qubits: usize) -> Self {
        Circuit {
            name: name.into(),
            n_qubits,
            gates: Vec::new(),
            measured: alloc::vec![false; n_qubits],
        }
    }

    /// Build a circuit from a gate list, validating every gate.
    pub fn from_gates(
        name: impl Into<String>,
        n_qubits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(name, n_qubits);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    /// Append a gate. Unitary gates on an already-measured qubit are rejected.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.validate(self.n_qubits)?;
        match gate.kind {
            GateKind::Measure => self.measured[gate.qubits[0]] = true,
            GateKind::Barrier => {}
            kind => {
                if let Some(&q) = gate.qubits.iter().find(|&&q| self.measured[q]) {
                    return Err(CircuitError::MidCircuitMeasurement { kind, qubit: q });
                }
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Qubits with at least one measurement.
    pub fn measured_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.measured
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(q, _)| q)
    }
}

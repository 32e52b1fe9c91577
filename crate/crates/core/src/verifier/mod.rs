//! Plan scoring and checking: analytic fidelity estimate, structural
//! constraint checks, statevector equivalence and Monte Carlo error
//! injection.

mod monte_carlo;
mod oracle;
pub mod statevector;

use alloc::vec::Vec;
use core::fmt;

use crate::circuit::GateKind;
use crate::hardware::{EdgeKind, SystemConfig, VirtualSystemTopology};
use crate::optimizer::Plan;
use crate::router::{swap_overhead, RoutingResult};

pub use monte_carlo::{monte_carlo_fidelity, MonteCarloError, MonteCarloEstimate};
pub use oracle::{equivalence_oracle, OracleError, ORACLE_MAX_NODES, ORACLE_MAX_QUBITS};

/// Estimated success probability and its per-category factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub f: f64,
    pub single_qubit: f64,
    pub two_qubit: f64,
    pub readout: f64,
    pub epr: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FidelityError {
    #[error("worker {worker} has no two-qubit calibration for edge {a}-{b}")]
    MissingCalibration { worker: usize, a: usize, b: usize },
    #[error("routed gate {index} acts on nodes {a} and {b}, which share no edge")]
    NonAdjacent { index: usize, a: usize, b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum EventClass {
    SingleQubit,
    TwoQubit,
    Readout,
    Epr,
}

/// One independent failure opportunity in routed output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NoiseEvent {
    pub routed_index: usize,
    pub class: EventClass,
    pub p_fail: f64,
    pub nodes: [usize; 2],
    pub arity: usize,
}

/// Failure events of routed output in execution order. A SWAP contributes
/// three events of its edge.
pub(crate) fn noise_events(
    routing: &RoutingResult,
    vst: &VirtualSystemTopology,
    config: &SystemConfig,
) -> Result<Vec<NoiseEvent>, FidelityError> {
    let mut out = Vec::new();
    for (index, g) in routing.routed.iter().enumerate() {
        let q = &g.gate.qubits;
        let one = |class, p_fail| NoiseEvent {
            routed_index: index,
            class,
            p_fail,
            nodes: [q[0], q[0]],
            arity: 1,
        };
        match g.gate.kind {
            GateKind::Barrier => {}
            GateKind::Measure => out.push(one(EventClass::Readout, vst.err_readout(q[0]))),
            k if k.is_single_qubit_unitary() => {
                out.push(one(EventClass::SingleQubit, vst.err_1q(q[0])))
            }
            _ => {
                let (a, b) = (q[0], q[1]);
                let edge = vst
                    .edge(a, b)
                    .ok_or(FidelityError::NonAdjacent { index, a, b })?;
                let (class, p_fail) = match edge.kind {
                    EdgeKind::Epr { sr } => (EventClass::Epr, 1.0 - sr),
                    EdgeKind::Intra { worker, .. } => {
                        let (la, lb) = (vst.phys(a).qubit, vst.phys(b).qubit);
                        let err = config
                            .workers
                            .get(worker)
                            .and_then(|w| w.err_2q(la, lb))
                            .ok_or(FidelityError::MissingCalibration {
                                worker,
                                a: la,
                                b: lb,
                            })?;
                        (EventClass::TwoQubit, err)
                    }
                };
                let reps = if g.gate.kind == GateKind::Swap { 3 } else { 1 };
                for _ in 0..reps {
                    out.push(NoiseEvent {
                        routed_index: index,
                        class,
                        p_fail,
                        nodes: [a, b],
                        arity: 2,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Product of per-event survival probabilities of routed output.
pub fn estimate_routing_fidelity(
    routing: &RoutingResult,
    vst: &VirtualSystemTopology,
    config: &SystemConfig,
) -> Result<FidelityEstimate, FidelityError> {
    let mut est = FidelityEstimate {
        f: 1.0,
        single_qubit: 1.0,
        two_qubit: 1.0,
        readout: 1.0,
        epr: 1.0,
    };
    for e in noise_events(routing, vst, config)? {
        let factor = match e.class {
            EventClass::SingleQubit => &mut est.single_qubit,
            EventClass::TwoQubit => &mut est.two_qubit,
            EventClass::Readout => &mut est.readout,
            EventClass::Epr => &mut est.epr,
        };
        *factor *= 1.0 - e.p_fail;
    }
    est.f = est.single_qubit * est.two_qubit * est.readout * est.epr;
    Ok(est)
}

/// Fidelity estimate of a plan against the calibration in `config`.
pub fn estimate_fidelity(
    plan: &Plan,
    config: &SystemConfig,
) -> Result<FidelityEstimate, FidelityError> {
    estimate_routing_fidelity(&plan.routing, &plan.vst, config)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two-qubit routed gate `index` on nodes without a VST edge.
    NonAdjacentGate {
        index: usize,
        a: usize,
        b: usize,
    },
    UnknownNode {
        index: usize,
        node: usize,
    },
    OverCapacity {
        worker: usize,
        used: usize,
        capacity: usize,
    },
    /// Initial placement of `logical` outside its assigned worker.
    LayoutOutsideWorker {
        logical: usize,
        node: usize,
        worker: usize,
    },
    FinalLayoutMismatch {
        logical: usize,
        reported: usize,
        replayed: usize,
    },
    /// Plan SWAP overhead differs from the SWAP-tag recount.
    OverheadMismatch {
        reported: usize,
        recounted: usize,
    },
    SwapTableMismatch {
        worker: usize,
        reported: usize,
        recounted: usize,
    },
    EprUsesMismatch {
        reported: usize,
        recounted: usize,
    },
    /// Source gate `source` routed `count` times instead of once.
    GateCoverage {
        source: usize,
        count: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonAdjacentGate { index, a, b } => {
                write!(f, "routed gate {index} acts on non-adjacent nodes {a},{b}")
            }
            Violation::UnknownNode { index, node } => {
                write!(f, "routed gate {index} uses unknown node {node}")
            }
            Violation::OverCapacity {
                worker,
                used,
                capacity,
            } => {
                write!(
                    f,
                    "worker {worker} holds {used} qubits, capacity {capacity}"
                )
            }
            Violation::LayoutOutsideWorker {
                logical,
                node,
                worker,
            } => {
                write!(
                    f,
                    "logical {logical} starts on node {node}, outside worker {worker}"
                )
            }
            Violation::FinalLayoutMismatch {
                logical,
                reported,
                replayed,
            } => {
                write!(
                    f,
                    "logical {logical} reported at node {reported}, replay gives {replayed}"
                )
            }
            Violation::OverheadMismatch {
                reported,
                recounted,
            } => {
                write!(f, "SWAP overhead {reported} but {recounted} SWAP tags")
            }
            Violation::SwapTableMismatch {
                worker,
                reported,
                recounted,
            } => {
                write!(
                    f,
                    "worker {worker} SWAP count {reported} but {recounted} tags"
                )
            }
            Violation::EprUsesMismatch {
                reported,
                recounted,
            } => {
                write!(f, "EPR uses {reported} but recount gives {recounted}")
            }
            Violation::GateCoverage { source, count } => {
                write!(f, "source gate {source} routed {count} times")
            }
        }
    }
}

/// Structural checks of a plan. Empty iff the plan is legal and its
/// bookkeeping is consistent.
pub fn check_constraints(plan: &Plan) -> Vec<Violation> {
    let vst = &plan.vst;
    let r = &plan.routing;
    let mut out = Vec::new();
    let nodes = vst.node_count();

    let mut layout: Vec<usize> = r.initial_layout.as_slice().to_vec();
    let mut coverage = alloc::vec![0usize; plan.circuit.len()];
    let mut epr_uses = 0;
    for (index, g) in r.routed.iter().enumerate() {
        if let Some(&node) = g.gate.qubits.iter().find(|&&p| p >= nodes) {
            out.push(Violation::UnknownNode { index, node });
            continue;
        }
        if g.is_two_qubit() {
            let (a, b) = (g.gate.qubits[0], g.gate.qubits[1]);
            match vst.edge(a, b) {
                None => out.push(Violation::NonAdjacentGate { index, a, b }),
                Some(e) if e.is_epr() => epr_uses += if g.inserted_swap { 3 } else { 1 },
                Some(_) => {}
            }
            if g.inserted_swap {
                for p in layout.iter_mut() {
                    if *p == a {
                        *p = b;
                    } else if *p == b {
                        *p = a;
                    }
                }
            }
        }
        if let Some(s) = g.source {
            if let Some(c) = coverage.get_mut(s) {
                *c += 1;
            }
        }
    }
    for (source, &count) in coverage.iter().enumerate() {
        if count != 1 {
            out.push(Violation::GateCoverage { source, count });
        }
    }
    for (logical, &replayed) in layout.iter().enumerate() {
        if logical < r.final_layout.n_logical() && r.final_layout.phys(logical) != replayed {
            out.push(Violation::FinalLayoutMismatch {
                logical,
                reported: r.final_layout.phys(logical),
                replayed,
            });
        }
    }
    for (worker, &used) in plan.partition.budget_used().iter().enumerate() {
        if worker < vst.worker_count() && used > vst.capacity(worker) {
            out.push(Violation::OverCapacity {
                worker,
                used,
                capacity: vst.capacity(worker),
            });
        }
    }
    for logical in 0..r.initial_layout.n_logical() {
        let node = r.initial_layout.phys(logical);
        let worker = plan.partition.worker_of(logical);
        if node >= nodes || vst.worker_of(node) != worker {
            out.push(Violation::LayoutOutsideWorker {
                logical,
                node,
                worker,
            });
        }
    }
    let recounted = swap_overhead(r);
    if plan.so != recounted || r.total_so != recounted {
        out.push(Violation::OverheadMismatch {
            reported: plan.so,
            recounted,
        });
    }
    for m in &r.mapped {
        let tags = m.gates.iter().filter(|g| g.inserted_swap).count();
        let reported = r.swap_table.get(m.worker).copied().unwrap_or(usize::MAX);
        if reported != tags || m.swap_count != tags {
            out.push(Violation::SwapTableMismatch {
                worker: m.worker,
                reported,
                recounted: tags,
            });
        }
    }
    if r.epr_uses != epr_uses {
        out.push(Violation::EprUsesMismatch {
            reported: r.epr_uses,
            recounted: epr_uses,
        });
    }
    out
}

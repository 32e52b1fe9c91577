//! Initial placement and SWAP routing of a partitioned circuit over the
//! virtual system topology.

mod layout;
mod sabre;

use alloc::vec::Vec;

use crate::circuit::{Gate, GateKind};
use crate::hardware::VirtualSystemTopology;

pub use layout::{anchor_endpoints, baseline_layout, initial_layout, LayoutError};
pub(crate) use sabre::swap_count_with_distances;
pub use sabre::{
    distance_matrix, route, route_with, route_with_distances, Distances, RouteError, RouterOptions,
};

/// Logical-to-physical map into VST node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    l2p: Vec<usize>,
    p2l: Vec<Option<usize>>,
}

impl Layout {
    /// `l2p[q]` is the node of logical qubit `q`. Fails unless the map is
    /// injective into `0..node_count`.
    pub fn new(l2p: Vec<usize>, node_count: usize) -> Result<Self, LayoutError> {
        let mut p2l = alloc::vec![None; node_count];
        for (l, &p) in l2p.iter().enumerate() {
            match p2l.get_mut(p) {
                None => {
                    return Err(LayoutError::NodeOutOfRange {
                        logical: l,
                        node: p,
                    })
                }
                Some(Some(_)) => return Err(LayoutError::NodeReused { node: p }),
                Some(slot) => *slot = Some(l),
            }
        }
        Ok(Layout { l2p, p2l })
    }

    pub fn phys(&self, logical: usize) -> usize {
        self.l2p[logical]
    }

    pub fn logical(&self, node: usize) -> Option<usize> {
        self.p2l[node]
    }

    pub fn n_logical(&self) -> usize {
        self.l2p.len()
    }

    pub fn node_count(&self) -> usize {
        self.p2l.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.l2p
    }

    /// Exchange the contents of two nodes.
    pub fn swap_nodes(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l[a] = lb;
        self.p2l[b] = la;
        if let Some(l) = la {
            self.l2p[l] = b;
        }
        if let Some(l) = lb {
            self.l2p[l] = a;
        }
    }
}

/// One gate of routed output, acting on VST nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedGate {
    pub gate: Gate,
    /// Set on SWAPs inserted by the router.
    pub inserted_swap: bool,
    /// Index of the originating gate in the input circuit.
    pub source: Option<usize>,
}

impl RoutedGate {
    pub fn is_two_qubit(&self) -> bool {
        self.gate.is_two_qubit()
    }
}

/// The part of the routed output attributed to one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedSubcircuit {
    pub worker: usize,
    pub gates: Vec<RoutedGate>,
    /// `(logical, node)` pairs for logical qubits that end on this worker.
    pub final_layout: Vec<(usize, usize)>,
    pub swap_count: usize,
    pub epr_uses: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingResult {
    /// Global routed gate list in execution order.
    pub routed: Vec<RoutedGate>,
    pub initial_layout: Layout,
    pub final_layout: Layout,
    /// One entry per worker id, including idle workers.
    pub mapped: Vec<MappedSubcircuit>,
    /// Inserted SWAPs per worker id.
    pub swap_table: Vec<usize>,
    pub total_so: usize,
    pub epr_uses: usize,
}

impl RoutingResult {
    /// Split a global routed list into per-worker subcircuits. Single-qubit
    /// gates and intra-worker gates go to the owning worker, gates on an EPR
    /// edge to the lower-indexed worker, and barriers to every touched worker
    /// restricted to its own nodes.
    pub fn assemble(
        routed: Vec<RoutedGate>,
        initial_layout: Layout,
        final_layout: Layout,
        vst: &VirtualSystemTopology,
    ) -> Self {
        let nw = vst.worker_count();
        let mut mapped: Vec<MappedSubcircuit> = (0..nw)
            .map(|worker| MappedSubcircuit {
                worker,
                gates: Vec::new(),
                final_layout: Vec::new(),
                swap_count: 0,
                epr_uses: 0,
            })
            .collect();
        for g in &routed {
            if g.gate.kind == GateKind::Barrier {
                for m in mapped.iter_mut() {
                    let own: Vec<usize> = g
                        .gate
                        .qubits
                        .iter()
                        .copied()
                        .filter(|&p| vst.worker_of(p) == m.worker)
                        .collect();
                    if !own.is_empty() {
                        m.gates.push(RoutedGate {
                            gate: Gate::barrier(&own),
                            ..g.clone()
                        });
                    }
                }
                continue;
            }
            let owner = g
                .gate
                .qubits
                .iter()
                .map(|&p| vst.worker_of(p))
                .min()
                .unwrap();
            let m = &mut mapped[owner];
            if g.is_two_qubit() {
                let (a, b) = (g.gate.qubits[0], g.gate.qubits[1]);
                if vst.edge(a, b).is_some_and(|e| e.is_epr()) {
                    m.epr_uses += if g.inserted_swap { 3 } else { 1 };
                }
            }
            if g.inserted_swap {
                m.swap_count += 1;
            }
            m.gates.push(g.clone());
        }
        for l in 0..final_layout.n_logical() {
            let p = final_layout.phys(l);
            mapped[vst.worker_of(p)].final_layout.push((l, p));
        }
        let swap_table: Vec<usize> = mapped.iter().map(|m| m.swap_count).collect();
        let total_so = swap_table.iter().sum();
        let epr_uses = mapped.iter().map(|m| m.epr_uses).sum();
        RoutingResult {
            routed,
            initial_layout,
            final_layout,
            mapped,
            swap_table,
            total_so,
            epr_uses,
        }
    }
}

/// Total inserted SWAPs, recounted from the SWAP tags of every subcircuit.
pub fn swap_overhead(result: &RoutingResult) -> usize {
    result
        .mapped
        .iter()
        .flat_map(|m| &m.gates)
        .filter(|g| g.inserted_swap)
        .count()
}

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{lower::gate_is_lowered, Circuit, CircuitError};

/// Weighted graph over logical qubits; the weight of `{a, b}` counts the CX
/// gates acting on that pair in either orientation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InteractionGraph {
    n_qubits: usize,
    edge_weights: BTreeMap<(usize, usize), u32>,
}

impl InteractionGraph {
    pub fn new(n_qubits: usize) -> Self {
        InteractionGraph {
            n_qubits,
            edge_weights: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, a: usize, b: usize, w: u32) {
        debug_assert!(a != b && a < self.n_qubits && b < self.n_qubits);
        *self.edge_weights.entry(key(a, b)).or_insert(0) += w;
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn weight(&self, a: usize, b: usize) -> u32 {
        self.edge_weights.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Edges as `((a, b), weight)` with `a < b`, in ascending key order.
    pub fn edges(&self) -> impl Iterator<Item = ((usize, usize), u32)> + '_ {
        self.edge_weights.iter().map(|(&k, &w)| (k, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edge_weights.len()
    }

    pub fn total_weight(&self) -> u64 {
        self.edge_weights.values().map(|&w| w as u64).sum()
    }

    /// Weighted degree of every vertex.
    pub fn degrees(&self) -> Vec<u64> {
        let mut d = alloc::vec![0u64; self.n_qubits];
        for (&(a, b), &w) in &self.edge_weights {
            d[a] += w as u64;
            d[b] += w as u64;
        }
        d
    }

    /// Adjacency lists `(neighbour, weight)` sorted by neighbour.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = alloc::vec![Vec::new(); self.n_qubits];
        for (&(a, b), &w) in &self.edge_weights {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Build the interaction graph of a lowered circuit.
pub fn interaction_graph(circuit: &Circuit) -> Result<InteractionGraph, CircuitError> {
    let mut ig = InteractionGraph::new(circuit.n_qubits());
    for (index, g) in circuit.gates().iter().enumerate() {
        if !gate_is_lowered(g) {
            return Err(CircuitError::NotLowered {
                index,
                kind: g.kind,
            });
        }
        if g.is_two_qubit() {
            ig.add(g.qubits[0], g.qubits[1], 1);
        }
    }
    Ok(ig)
}

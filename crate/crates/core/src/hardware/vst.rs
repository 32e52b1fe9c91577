use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use super::{qubit_quality, EprCandidate, EprLink, PhysQubit, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeKind {
    /// Native coupling inside `worker` with its calibrated two-qubit error.
    Intra { worker: usize, err: f64 },
    /// EPR link; its effective error is `1 - sr`.
    Epr { sr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VstEdge {
    pub a: usize,
    pub b: usize,
    pub kind: EdgeKind,
}

impl VstEdge {
    pub fn is_epr(&self) -> bool {
        matches!(self.kind, EdgeKind::Epr { .. })
    }

    pub fn error(&self) -> f64 {
        match self.kind {
            EdgeKind::Intra { err, .. } => err,
            EdgeKind::Epr { sr } => 1.0 - sr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VstError {
    #[error("link endpoint {0} does not exist")]
    EndpointOutOfRange(PhysQubit),
    #[error("link {0}-{1} joins a worker to itself")]
    SameWorker(PhysQubit, PhysQubit),
    #[error("qubit {0} is used by more than one link")]
    ReusedEndpoint(PhysQubit),
}

/// Union of every worker's coupling graph plus one virtual edge per EPR link.
///
/// Nodes are numbered globally: worker `w`'s local qubit `q` is node
/// `offset(w) + q`, with offsets assigned in worker-id order.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualSystemTopology {
    offsets: Vec<usize>,
    node_worker: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<VstEdge>,
    edge_index: BTreeMap<(usize, usize), usize>,
    scores: Vec<f64>,
    err_1q: Vec<f64>,
    err_readout: Vec<f64>,
    links: Vec<EprLink>,
}

/// Build the virtual system topology for one link candidate.
pub fn con_vst(
    config: &SystemConfig,
    candidate: &EprCandidate,
) -> Result<VirtualSystemTopology, VstError> {
    let mut offsets = Vec::with_capacity(config.workers.len() + 1);
    let mut total = 0;
    for w in &config.workers {
        offsets.push(total);
        total += w.n_qubits;
    }
    offsets.push(total);

    let mut node_worker = Vec::with_capacity(total);
    let mut scores = Vec::with_capacity(total);
    let mut err_1q = Vec::with_capacity(total);
    let mut err_readout = Vec::with_capacity(total);
    let mut edges = Vec::new();
    for (wi, w) in config.workers.iter().enumerate() {
        for q in 0..w.n_qubits {
            node_worker.push(wi);
            scores.push(qubit_quality(w, q));
            err_1q.push(w.err_1q[q]);
            err_readout.push(w.err_readout[q]);
        }
        for &(a, b) in &w.edges {
            edges.push(VstEdge {
                a: offsets[wi] + a,
                b: offsets[wi] + b,
                kind: EdgeKind::Intra {
                    worker: wi,
                    err: w.err_2q(a, b).unwrap_or(0.0),
                },
            });
        }
    }

    let node_of = |p: PhysQubit| -> Result<usize, VstError> {
        match config.workers.get(p.worker) {
            Some(w) if p.qubit < w.n_qubits => Ok(offsets[p.worker] + p.qubit),
            _ => Err(VstError::EndpointOutOfRange(p)),
        }
    };
    let mut used = Vec::new();
    for l in &candidate.links {
        if l.a.worker == l.b.worker {
            return Err(VstError::SameWorker(l.a, l.b));
        }
        let (a, b) = (node_of(l.a)?, node_of(l.b)?);
        for (p, n) in [(l.a, a), (l.b, b)] {
            if used.contains(&n) {
                return Err(VstError::ReusedEndpoint(p));
            }
            used.push(n);
        }
        edges.push(VstEdge {
            a: a.min(b),
            b: a.max(b),
            kind: EdgeKind::Epr { sr: l.sr },
        });
    }

    let mut adjacency = alloc::vec![Vec::new(); total];
    let mut edge_index = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.a].push(e.b);
        adjacency[e.b].push(e.a);
        edge_index.insert((e.a, e.b), i);
    }
    for l in &mut adjacency {
        l.sort_unstable();
    }
    Ok(VirtualSystemTopology {
        offsets,
        node_worker,
        adjacency,
        edges,
        edge_index,
        scores,
        err_1q,
        err_readout,
        links: candidate.links.clone(),
    })
}

impl VirtualSystemTopology {
    pub fn node_count(&self) -> usize {
        self.node_worker.len()
    }

    pub fn worker_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn capacity(&self, worker: usize) -> usize {
        self.offsets[worker + 1] - self.offsets[worker]
    }

    pub fn worker_nodes(&self, worker: usize) -> Range<usize> {
        self.offsets[worker]..self.offsets[worker + 1]
    }

    pub fn node(&self, p: PhysQubit) -> usize {
        self.offsets[p.worker] + p.qubit
    }

    pub fn phys(&self, node: usize) -> PhysQubit {
        let w = self.node_worker[node];
        PhysQubit::new(w, node - self.offsets[w])
    }

    pub fn worker_of(&self, node: usize) -> usize {
        self.node_worker[node]
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edges(&self) -> &[VstEdge] {
        &self.edges
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&VstEdge> {
        self.edge_index
            .get(&(a.min(b), a.max(b)))
            .map(|&i| &self.edges[i])
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.edge_index.contains_key(&(a.min(b), a.max(b)))
    }

    /// Quality score of a node (lower is better).
    pub fn score(&self, node: usize) -> f64 {
        self.scores[node]
    }

    pub fn err_1q(&self, node: usize) -> f64 {
        self.err_1q[node]
    }

    pub fn err_readout(&self, node: usize) -> f64 {
        self.err_readout[node]
    }

    pub fn links(&self) -> &[EprLink] {
        &self.links
    }

    /// Worker-level connected components under the EPR links.
    pub fn worker_components(&self) -> Vec<Vec<usize>> {
        EprCandidate::new(self.links.clone(), 0).worker_components(self.worker_count())
    }

    /// Unweighted hop distances between nodes of one worker, using only
    /// that worker's own couplings. Indexed by local qubit.
    pub fn intra_distances(&self, worker: usize) -> Vec<Vec<usize>> {
        let r = self.worker_nodes(worker);
        let n = r.len();
        let mut d = alloc::vec![alloc::vec![usize::MAX; n]; n];
        for (s, row) in d.iter_mut().enumerate() {
            let mut queue = alloc::collections::VecDeque::new();
            row[s] = 0;
            queue.push_back(s);
            while let Some(v) = queue.pop_front() {
                for &u in &self.adjacency[r.start + v] {
                    if !r.contains(&u) {
                        continue;
                    }
                    let u = u - r.start;
                    if row[u] == usize::MAX {
                        row[u] = row[v] + 1;
                        queue.push_back(u);
                    }
                }
            }
        }
        d
    }
}

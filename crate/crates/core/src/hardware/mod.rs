//! Worker models, calibration-based qubit ranking, EPR link candidates and
//! the virtual system topology that stitches workers together.

mod epr;
mod vst;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

pub use epr::{enumerate_epr_candidates, top_qubits, EprCandidate, EprLink};
pub use vst::{con_vst, EdgeKind, VirtualSystemTopology, VstEdge, VstError};

/// A physical qubit identified by worker and worker-local index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhysQubit {
    pub worker: usize,
    pub qubit: usize,
}

impl PhysQubit {
    pub fn new(worker: usize, qubit: usize) -> Self {
        PhysQubit { worker, qubit }
    }
}

impl fmt::Display for PhysQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}:q{}", self.worker, self.qubit)
    }
}

/// One quantum processor: topology, capacity and calibration data.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkerSpec {
    pub id: usize,
    pub n_qubits: usize,
    /// Coupling edges, stored as `(a, b)` with `a < b`.
    pub edges: Vec<(usize, usize)>,
    pub err_1q: Vec<f64>,
    pub err_2q: BTreeMap<(usize, usize), f64>,
    pub err_readout: Vec<f64>,
}

impl WorkerSpec {
    /// Worker with the given coupling edges and all error rates zero.
    pub fn noiseless(id: usize, n_qubits: usize, edges: &[(usize, usize)]) -> Self {
        let edges: Vec<(usize, usize)> = normalize_edges(edges);
        WorkerSpec {
            id,
            n_qubits,
            err_2q: edges.iter().map(|&e| (e, 0.0)).collect(),
            edges,
            err_1q: alloc::vec![0.0; n_qubits],
            err_readout: alloc::vec![0.0; n_qubits],
        }
    }

    /// Same topology with uniform error rates.
    pub fn uniform(
        id: usize,
        n_qubits: usize,
        edges: &[(usize, usize)],
        e1: f64,
        e2: f64,
        ero: f64,
    ) -> Self {
        let mut w = Self::noiseless(id, n_qubits, edges);
        w.err_1q.iter_mut().for_each(|e| *e = e1);
        w.err_readout.iter_mut().for_each(|e| *e = ero);
        w.err_2q.values_mut().for_each(|e| *e = e2);
        w
    }

    pub fn err_2q(&self, a: usize, b: usize) -> Option<f64> {
        self.err_2q.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = alloc::vec![Vec::new(); self.n_qubits];
        for &(a, b) in &self.edges {
            if a < self.n_qubits && b < self.n_qubits {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for l in &mut adj {
            l.sort_unstable();
            l.dedup();
        }
        adj
    }

    pub fn is_connected(&self) -> bool {
        if self.n_qubits == 0 {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = alloc::vec![false; self.n_qubits];
        let mut stack = alloc::vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.n_qubits
    }

    /// Every invariant this worker violates.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let id = self.id;
        let mut v = Vec::new();
        if self.n_qubits == 0 {
            v.push(ConfigViolation::EmptyWorker { worker: id });
            return v;
        }
        for &(a, b) in &self.edges {
            if a >= self.n_qubits || b >= self.n_qubits {
                v.push(ConfigViolation::EdgeOutOfRange {
                    worker: id,
                    edge: (a, b),
                });
            } else if a == b {
                v.push(ConfigViolation::SelfLoop {
                    worker: id,
                    qubit: a,
                });
            } else if self.err_2q(a, b).is_none() {
                v.push(ConfigViolation::MissingEdgeError {
                    worker: id,
                    edge: (a, b),
                });
            }
        }
        if self
            .edges
            .iter()
            .all(|&(a, b)| a < self.n_qubits && b < self.n_qubits)
            && !self.is_connected()
        {
            v.push(ConfigViolation::Disconnected { worker: id });
        }
        for &(a, b) in self.err_2q.keys() {
            if !self.edges.contains(&(a, b)) {
                v.push(ConfigViolation::ErrorOnMissingEdge {
                    worker: id,
                    edge: (a, b),
                });
            }
        }
        if self.err_1q.len() != self.n_qubits {
            v.push(ConfigViolation::LengthMismatch {
                worker: id,
                field: "err_1q",
                expected: self.n_qubits,
                got: self.err_1q.len(),
            });
        }
        if self.err_readout.len() != self.n_qubits {
            v.push(ConfigViolation::LengthMismatch {
                worker: id,
                field: "err_readout",
                expected: self.n_qubits,
                got: self.err_readout.len(),
            });
        }
        let mut range = |field: &'static str, location: Location, value: f64| {
            if !(0.0..1.0).contains(&value) {
                v.push(ConfigViolation::RateOutOfRange {
                    worker: id,
                    field,
                    location,
                    value,
                });
            }
        };
        for (q, &e) in self.err_1q.iter().enumerate() {
            range("err_1q", Location::Qubit(q), e);
        }
        for (q, &e) in self.err_readout.iter().enumerate() {
            range("err_readout", Location::Qubit(q), e);
        }
        for (&(a, b), &e) in &self.err_2q {
            range("err_2q", Location::Edge(a, b), e);
        }
        v
    }
}

pub(crate) fn normalize_edges(edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut e: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    e.sort_unstable();
    e.dedup();
    e
}

/// Quality score of a physical qubit: mean two-qubit error over incident
/// couplings plus readout and single-qubit error. Lower is better.
pub fn qubit_quality(worker: &WorkerSpec, qubit: usize) -> f64 {
    let (sum, n) = worker
        .edges
        .iter()
        .filter(|&&(a, b)| a == qubit || b == qubit)
        .filter_map(|&(a, b)| worker.err_2q(a, b))
        .fold((0.0, 0usize), |(s, n), e| (s + e, n + 1));
    let mean = if n == 0 { 0.0 } else { sum / n as f64 };
    mean + worker.err_readout[qubit] + worker.err_1q[qubit]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Location {
    Qubit(usize),
    Edge(usize, usize),
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Qubit(q) => write!(f, "qubit {q}"),
            Location::Edge(a, b) => write!(f, "edge {a}-{b}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigViolation {
    #[error("worker {worker}: no qubits")]
    EmptyWorker { worker: usize },
    #[error("worker {worker}: edge {edge:?} references a qubit out of range")]
    EdgeOutOfRange { worker: usize, edge: (usize, usize) },
    #[error("worker {worker}: self-loop on qubit {qubit}")]
    SelfLoop { worker: usize, qubit: usize },
    #[error("worker {worker}: coupling graph is not connected")]
    Disconnected { worker: usize },
    #[error("worker {worker}: edge {edge:?} has no err_2q entry")]
    MissingEdgeError { worker: usize, edge: (usize, usize) },
    #[error("worker {worker}: err_2q given for {edge:?}, which is not a coupling edge")]
    ErrorOnMissingEdge { worker: usize, edge: (usize, usize) },
    #[error("worker {worker}: {field} has {got} entries, expected {expected}")]
    LengthMismatch {
        worker: usize,
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("worker {worker}: {field} at {location} is {value}, outside [0, 1)")]
    RateOutOfRange {
        worker: usize,
        field: &'static str,
        location: Location,
        value: f64,
    },
    #[error("worker ids must be 0..{count} in order, found {found} at position {position}")]
    WorkerIdOrder {
        count: usize,
        position: usize,
        found: usize,
    },
    #[error("default_sr {0} outside (0, 1]")]
    SuccessRateOutOfRange(f64),
    #[error("link success rate {sr} for {a}-{b} outside (0, 1]")]
    LinkSuccessRateOutOfRange { a: PhysQubit, b: PhysQubit, sr: f64 },
    #[error("link override {a}-{b} must join qubits of two different existing workers")]
    BadLinkOverride { a: PhysQubit, b: PhysQubit },
    #[error("max_links must be at least 1")]
    MaxLinksZero,
    #[error("candidates_per_worker must be at least 1")]
    CandidatesZero,
    #[error("no workers configured")]
    NoWorkers,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid system configuration ({} problem(s))", violations.len())]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

/// The distributed system: workers plus EPR link policy.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub workers: Vec<WorkerSpec>,
    pub default_sr: f64,
    pub max_links: usize,
    pub candidates_per_worker: usize,
    /// Per-link success-rate overrides keyed by `(lower endpoint, higher endpoint)`.
    pub link_sr: BTreeMap<(PhysQubit, PhysQubit), f64>,
}

impl SystemConfig {
    pub fn new(workers: Vec<WorkerSpec>, default_sr: f64) -> Self {
        SystemConfig {
            workers,
            default_sr,
            max_links: 2,
            candidates_per_worker: 3,
            link_sr: BTreeMap::new(),
        }
    }

    pub fn with_max_links(mut self, max_links: usize) -> Self {
        self.max_links = max_links;
        self
    }

    pub fn with_candidates_per_worker(mut self, k: usize) -> Self {
        self.candidates_per_worker = k;
        self
    }

    /// Replace the default success rate and drop per-link overrides.
    pub fn with_sr(mut self, sr: f64) -> Self {
        self.default_sr = sr;
        self.link_sr.clear();
        self
    }

    /// Every violated invariant, in a stable order.
    pub fn violations(&self) -> Vec<ConfigViolation> {
        let mut v = Vec::new();
        if self.workers.is_empty() {
            v.push(ConfigViolation::NoWorkers);
        }
        for (position, w) in self.workers.iter().enumerate() {
            if w.id != position {
                v.push(ConfigViolation::WorkerIdOrder {
                    count: self.workers.len(),
                    position,
                    found: w.id,
                });
            }
        }
        for w in &self.workers {
            v.extend(w.violations());
        }
        if !(self.default_sr > 0.0 && self.default_sr <= 1.0) {
            v.push(ConfigViolation::SuccessRateOutOfRange(self.default_sr));
        }
        if self.max_links == 0 {
            v.push(ConfigViolation::MaxLinksZero);
        }
        if self.candidates_per_worker == 0 {
            v.push(ConfigViolation::CandidatesZero);
        }
        for (&(a, b), &sr) in &self.link_sr {
            let exists = |p: PhysQubit| {
                self.workers
                    .get(p.worker)
                    .is_some_and(|w| p.qubit < w.n_qubits)
            };
            if a.worker == b.worker || !exists(a) || !exists(b) {
                v.push(ConfigViolation::BadLinkOverride { a, b });
            }
            if !(sr > 0.0 && sr <= 1.0) {
                v.push(ConfigViolation::LinkSuccessRateOutOfRange { a, b, sr });
            }
        }
        v
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let violations = self.violations();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { violations })
        }
    }

    pub fn total_capacity(&self) -> usize {
        self.workers.iter().map(|w| w.n_qubits).sum()
    }

    /// Success rate of a link between two physical qubits.
    pub fn link_sr(&self, a: PhysQubit, b: PhysQubit) -> f64 {
        self.link_sr
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(self.default_sr)
    }
}

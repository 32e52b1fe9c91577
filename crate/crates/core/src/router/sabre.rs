//! Lookahead SWAP insertion over the whole circuit DAG.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Layout, RoutedGate, RoutingResult};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::cutter::Partition;
use crate::hardware::VirtualSystemTopology;

const TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouterOptions {
    /// Distance weight of an EPR edge; also the heuristic surcharge of a
    /// SWAP across one.
    pub w_epr: f64,
    pub extended_size: usize,
    pub extended_weight: f64,
    pub decay: f64,
    /// Decay values reset after this many consecutive SWAPs.
    pub decay_reset: usize,
}

impl Default for RouterOptions {
    fn default() -> Self {
        RouterOptions {
            w_epr: 3.0,
            extended_size: 20,
            extended_weight: 0.5,
            decay: 0.001,
            decay_reset: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("gate {index} ({kind}) must be lowered before routing")]
    NotLowered { index: usize, kind: GateKind },
    #[error("gate {index} is unroutable: nodes {a} and {b} are not connected")]
    Unroutable { index: usize, a: usize, b: usize },
    #[error("layout covers {layout} qubits, circuit has {circuit}")]
    LayoutSize { layout: usize, circuit: usize },
    #[error(
        "logical qubit {logical} starts on worker {placed} but is assigned to worker {assigned}"
    )]
    LayoutMismatch {
        logical: usize,
        placed: usize,
        assigned: usize,
    },
}

/// All-pairs weighted distances (intra edges 1, EPR edges `w_epr`) with
/// next-hop table for path recovery.
#[derive(Debug, Clone)]
pub struct Distances {
    n: usize,
    dist: Vec<f64>,
    next: Vec<usize>,
}

impl Distances {
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.dist[a * self.n + b]
    }

    /// Node sequence of a shortest path from `a` to `b`, both included.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        if !self.get(a, b).is_finite() {
            return None;
        }
        let mut p = alloc::vec![a];
        let mut cur = a;
        while cur != b {
            cur = self.next[cur * self.n + b];
            p.push(cur);
        }
        Some(p)
    }
}

pub fn distance_matrix(vst: &VirtualSystemTopology, w_epr: f64) -> Distances {
    let n = vst.node_count();
    let mut dist = alloc::vec![f64::INFINITY; n * n];
    let mut next = alloc::vec![usize::MAX; n * n];
    for v in 0..n {
        dist[v * n + v] = 0.0;
        next[v * n + v] = v;
    }
    for e in vst.edges() {
        let w = if e.is_epr() { w_epr } else { 1.0 };
        for (a, b) in [(e.a, e.b), (e.b, e.a)] {
            if w < dist[a * n + b] {
                dist[a * n + b] = w;
                next[a * n + b] = b;
            }
        }
    }
    for k in 0..n {
        let row_k: Vec<f64> = dist[k * n..(k + 1) * n].to_vec();
        for i in 0..n {
            let dik = dist[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            let hop = next[i * n + k];
            let row_i = &mut dist[i * n..(i + 1) * n];
            let next_i = &mut next[i * n..(i + 1) * n];
            for (j, &dkj) in row_k.iter().enumerate() {
                let cand = dik + dkj;
                if cand < row_i[j] {
                    row_i[j] = cand;
                    next_i[j] = hop;
                }
            }
        }
    }
    Distances { n, dist, next }
}

/// Route with default options.
pub fn route(
    circuit: &Circuit,
    partition: &Partition,
    layout: &Layout,
    vst: &VirtualSystemTopology,
    seed: u64,
) -> Result<RoutingResult, RouteError> {
    route_with(
        circuit,
        partition,
        layout,
        vst,
        seed,
        &RouterOptions::default(),
    )
}

pub fn route_with(
    circuit: &Circuit,
    partition: &Partition,
    layout: &Layout,
    vst: &VirtualSystemTopology,
    seed: u64,
    opts: &RouterOptions,
) -> Result<RoutingResult, RouteError> {
    let dist = distance_matrix(vst, opts.w_epr);
    route_with_distances(circuit, partition, layout, vst, seed, opts, &dist)
}

/// [`route_with`] reusing a precomputed [`distance_matrix`] of `vst` at
/// `opts.w_epr`.
pub fn route_with_distances(
    circuit: &Circuit,
    partition: &Partition,
    layout: &Layout,
    vst: &VirtualSystemTopology,
    seed: u64,
    opts: &RouterOptions,
    dist: &Distances,
) -> Result<RoutingResult, RouteError> {
    let sabre = run_sabre(circuit, partition, layout, vst, seed, opts, dist)?;
    Ok(RoutingResult::assemble(
        sabre.routed,
        layout.clone(),
        sabre.layout,
        vst,
    ))
}

/// Number of SWAPs [`route_with_distances`] would insert.
pub(crate) fn swap_count_with_distances(
    circuit: &Circuit,
    partition: &Partition,
    layout: &Layout,
    vst: &VirtualSystemTopology,
    seed: u64,
    opts: &RouterOptions,
    dist: &Distances,
) -> Result<usize, RouteError> {
    let sabre = run_sabre(circuit, partition, layout, vst, seed, opts, dist)?;
    Ok(sabre.routed.iter().filter(|g| g.inserted_swap).count())
}

fn run_sabre<'a>(
    circuit: &'a Circuit,
    partition: &Partition,
    layout: &Layout,
    vst: &'a VirtualSystemTopology,
    seed: u64,
    opts: &'a RouterOptions,
    dist: &'a Distances,
) -> Result<Sabre<'a>, RouteError> {
    if layout.n_logical() != circuit.n_qubits() {
        return Err(RouteError::LayoutSize {
            layout: layout.n_logical(),
            circuit: circuit.n_qubits(),
        });
    }
    for l in 0..circuit.n_qubits() {
        let (placed, assigned) = (vst.worker_of(layout.phys(l)), partition.worker_of(l));
        if placed != assigned {
            return Err(RouteError::LayoutMismatch {
                logical: l,
                placed,
                assigned,
            });
        }
    }
    if let Some((index, g)) = circuit.gates().iter().enumerate().find(|(_, g)| {
        matches!(
            g.kind,
            GateKind::Cz | GateKind::Swap | GateKind::Ccx | GateKind::Rzz
        )
    }) {
        return Err(RouteError::NotLowered {
            index,
            kind: g.kind,
        });
    }
    let mut sabre = Sabre::new(circuit, vst, dist, layout.clone(), seed, opts);
    sabre.run()?;
    Ok(sabre)
}

struct Sabre<'a> {
    circuit: &'a Circuit,
    vst: &'a VirtualSystemTopology,
    dist: &'a Distances,
    opts: &'a RouterOptions,
    layout: Layout,
    rng: ChaCha8Rng,
    succ: Vec<Vec<usize>>,
    pending: Vec<usize>,
    front: Vec<usize>,
    decay: Vec<f64>,
    routed: Vec<RoutedGate>,
    /// Visit stamps for the extended-set search.
    seen: Vec<u32>,
    stamp: u32,
    scratch: Scratch,
    /// Measurements, emitted at the final layout once everything else ran.
    deferred: Vec<usize>,
}

/// Buffers reused across routing steps.
#[derive(Default)]
struct Scratch {
    ready: Vec<usize>,
    ext: Vec<usize>,
    queue: alloc::collections::VecDeque<usize>,
    candidates: Vec<(usize, usize)>,
    scores: Vec<f64>,
    front_pairs: Vec<(usize, usize)>,
    ext_pairs: Vec<(usize, usize)>,
}

impl<'a> Sabre<'a> {
    fn new(
        circuit: &'a Circuit,
        vst: &'a VirtualSystemTopology,
        dist: &'a Distances,
        layout: Layout,
        seed: u64,
        opts: &'a RouterOptions,
    ) -> Self {
        let n = circuit.len();
        let mut succ: Vec<Vec<usize>> = alloc::vec![Vec::new(); n];
        let mut pending = alloc::vec![0usize; n];
        let mut last: Vec<Option<usize>> = alloc::vec![None; circuit.n_qubits()];
        for (i, g) in circuit.gates().iter().enumerate() {
            for &q in &g.qubits {
                if let Some(p) = last[q] {
                    if !succ[p].contains(&i) {
                        succ[p].push(i);
                        pending[i] += 1;
                    }
                }
                last[q] = Some(i);
            }
        }
        let front = (0..n).filter(|&i| pending[i] == 0).collect();
        Sabre {
            circuit,
            vst,
            dist,
            opts,
            layout,
            rng: ChaCha8Rng::seed_from_u64(seed),
            succ,
            pending,
            front,
            decay: alloc::vec![1.0; vst.node_count()],
            routed: Vec::with_capacity(2 * n),
            seen: alloc::vec![0; n],
            stamp: 0,
            scratch: Scratch::default(),
            deferred: Vec::new(),
        }
    }

    fn gate(&self, i: usize) -> &'a Gate {
        &self.circuit.gates()[i]
    }

    fn executable(&self, i: usize) -> bool {
        let g = self.gate(i);
        !g.is_two_qubit()
            || self
                .vst
                .is_adjacent(self.layout.phys(g.qubits[0]), self.layout.phys(g.qubits[1]))
    }

    /// Emit every executable front gate until none is left. Returns whether
    /// anything ran.
    fn drain(&mut self) -> bool {
        let mut any = false;
        let mut ready = core::mem::take(&mut self.scratch.ready);
        loop {
            ready.clear();
            let mut front = core::mem::take(&mut self.front);
            front.retain(|&i| {
                let run = self.executable(i);
                if run {
                    ready.push(i);
                }
                !run
            });
            self.front = front;
            if ready.is_empty() {
                self.scratch.ready = ready;
                return any;
            }
            any = true;
            for &i in &ready {
                let g = self.gate(i);
                if g.kind == GateKind::Measure {
                    self.deferred.push(i);
                } else {
                    self.emit(i);
                }
                for k in 0..self.succ[i].len() {
                    let s = self.succ[i][k];
                    self.pending[s] -= 1;
                    if self.pending[s] == 0 {
                        self.front.push(s);
                    }
                }
            }
            self.front.sort_unstable();
        }
    }

    fn emit(&mut self, i: usize) {
        let g = self.gate(i);
        let qubits: Vec<usize> = g.qubits.iter().map(|&q| self.layout.phys(q)).collect();
        self.routed.push(RoutedGate {
            gate: Gate {
                kind: g.kind,
                qubits,
                params: g.params.clone(),
            },
            inserted_swap: false,
            source: Some(i),
        });
    }

    /// Up to `extended_size` two-qubit gates following the front layer.
    /// Fills `scratch.ext`.
    fn extended_set(&mut self) {
        self.stamp += 1;
        let stamp = self.stamp;
        let Scratch { ext, queue, .. } = &mut self.scratch;
        ext.clear();
        queue.clear();
        for &i in &self.front {
            self.seen[i] = stamp;
            queue.push_back(i);
        }
        while let Some(i) = queue.pop_front() {
            for &s in &self.succ[i] {
                if self.seen[s] == stamp {
                    continue;
                }
                self.seen[s] = stamp;
                if self.circuit.gates()[s].is_two_qubit() {
                    ext.push(s);
                    if ext.len() >= self.opts.extended_size {
                        return;
                    }
                }
                queue.push_back(s);
            }
        }
    }

    fn gate_distance(&self, i: usize) -> f64 {
        let g = self.gate(i);
        self.dist
            .get(self.layout.phys(g.qubits[0]), self.layout.phys(g.qubits[1]))
    }

    fn operands(&self, i: usize) -> (usize, usize) {
        let g = self.gate(i);
        (self.layout.phys(g.qubits[0]), self.layout.phys(g.qubits[1]))
    }

    /// `decay * (mean front distance + extended_weight * mean extended
    /// distance)` after `swap`, plus `w_epr` when `swap` crosses a link.
    fn heuristic(&self, front: &GateSet, ext: &GateSet, swap: (usize, usize)) -> f64 {
        let f = front.mean_after(self.dist, swap);
        let e = ext.mean_after(self.dist, swap);
        let penalty = if self.vst.edge(swap.0, swap.1).is_some_and(|e| e.is_epr()) {
            self.opts.w_epr
        } else {
            0.0
        };
        self.decay[swap.0].max(self.decay[swap.1]) * (f + self.opts.extended_weight * e) + penalty
    }

    fn emit_swap(&mut self, a: usize, b: usize) {
        self.routed.push(RoutedGate {
            gate: Gate::swap(a, b),
            inserted_swap: true,
            source: None,
        });
        self.layout.swap_nodes(a, b);
    }

    fn run(&mut self) -> Result<(), RouteError> {
        let stall_limit = self.vst.node_count().max(20);
        let mut since_reset = 0;
        let mut stall = 0;
        loop {
            if self.drain() {
                self.decay.iter_mut().for_each(|d| *d = 1.0);
                since_reset = 0;
                stall = 0;
            }
            if self.front.is_empty() {
                let mut deferred = core::mem::take(&mut self.deferred);
                deferred.sort_unstable();
                for i in deferred {
                    self.emit(i);
                }
                return Ok(());
            }
            for &i in &self.front {
                let (a, b) = self.operands(i);
                if !self.dist.get(a, b).is_finite() {
                    return Err(RouteError::Unroutable { index: i, a, b });
                }
            }
            if stall >= stall_limit {
                let blocked = self.front.clone();
                self.force_route(&blocked);
                stall = 0;
                continue;
            }

            let mut candidates = core::mem::take(&mut self.scratch.candidates);
            candidates.clear();
            for &i in &self.front {
                for &q in &self.gate(i).qubits {
                    let p = self.layout.phys(q);
                    for &nb in self.vst.neighbors(p) {
                        candidates.push((p.min(nb), p.max(nb)));
                    }
                }
            }
            candidates.sort_unstable();
            candidates.dedup();
            self.extended_set();
            let mut front_pairs = core::mem::take(&mut self.scratch.front_pairs);
            let mut ext_pairs = core::mem::take(&mut self.scratch.ext_pairs);
            front_pairs.clear();
            front_pairs.extend(self.front.iter().map(|&i| self.operands(i)));
            ext_pairs.clear();
            ext_pairs.extend(self.scratch.ext.iter().map(|&i| self.operands(i)));
            let front_set = GateSet::new(&front_pairs, self.dist);
            let ext_set = GateSet::new(&ext_pairs, self.dist);
            let mut scores = core::mem::take(&mut self.scratch.scores);
            scores.clear();
            scores.extend(
                candidates
                    .iter()
                    .map(|&s| self.heuristic(&front_set, &ext_set, s)),
            );
            let best = scores.iter().copied().fold(f64::INFINITY, f64::min);
            let is_tie = |x: &f64| *x <= best + TIE_EPS;
            let pick = self
                .rng
                .random_range(0..scores.iter().filter(|x| is_tie(x)).count());
            let chosen = scores
                .iter()
                .enumerate()
                .filter(|(_, x)| is_tie(x))
                .nth(pick)
                .unwrap()
                .0;
            let (a, b) = candidates[chosen];
            self.scratch.candidates = candidates;
            self.scratch.scores = scores;
            self.scratch.front_pairs = front_pairs;
            self.scratch.ext_pairs = ext_pairs;
            self.emit_swap(a, b);
            self.decay[a] += self.opts.decay;
            self.decay[b] += self.opts.decay;
            since_reset += 1;
            stall += 1;
            if since_reset >= self.opts.decay_reset {
                self.decay.iter_mut().for_each(|d| *d = 1.0);
                since_reset = 0;
            }
        }
    }

    /// Walk the closest blocked gate's first operand along a shortest path
    /// until both operands are adjacent.
    fn force_route(&mut self, blocked: &[usize]) {
        let &i = blocked
            .iter()
            .min_by(|&&x, &&y| {
                self.gate_distance(x)
                    .total_cmp(&self.gate_distance(y))
                    .then(x.cmp(&y))
            })
            .unwrap();
        let g = self.gate(i);
        let (a, b) = (self.layout.phys(g.qubits[0]), self.layout.phys(g.qubits[1]));
        let path = self.dist.path(a, b).expect("connectivity checked");
        for w in path.windows(2).take(path.len().saturating_sub(2)) {
            self.emit_swap(w[0], w[1]);
        }
    }
}

/// Operand node pairs of a gate set with their distance sum, so a SWAP
/// is scored from the gates it touches.
struct GateSet<'p> {
    pairs: &'p [(usize, usize)],
    sum: f64,
}

impl<'p> GateSet<'p> {
    fn new(pairs: &'p [(usize, usize)], dist: &Distances) -> Self {
        let sum = pairs.iter().map(|&(a, b)| dist.get(a, b)).sum();
        GateSet { pairs, sum }
    }

    fn mean_after(&self, dist: &Distances, (x, y): (usize, usize)) -> f64 {
        if self.pairs.is_empty() {
            return 0.0;
        }
        let moved = |p: usize| {
            if p == x {
                y
            } else if p == y {
                x
            } else {
                p
            }
        };
        let mut sum = self.sum;
        for &(a, b) in self.pairs {
            if a == x || a == y || b == x || b == y {
                sum += dist.get(moved(a), moved(b)) - dist.get(a, b);
            }
        }
        sum / self.pairs.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::{con_vst, EprCandidate, SystemConfig, WorkerSpec};
    use crate::router::swap_overhead;

    fn line(n: usize) -> VirtualSystemTopology {
        let e: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        let cfg = SystemConfig::new(alloc::vec![WorkerSpec::noiseless(0, n, &e)], 1.0);
        con_vst(&cfg, &EprCandidate::new(Vec::new(), 0)).unwrap()
    }

    fn run(c: &Circuit, vst: &VirtualSystemTopology, l2p: Vec<usize>) -> RoutingResult {
        let p = Partition::from_assignment(c, alloc::vec![0; c.n_qubits()], 1);
        let layout = Layout::new(l2p, vst.node_count()).unwrap();
        route(c, &p, &layout, vst, 7).unwrap()
    }

    #[test]
    fn adjacent_needs_no_swap() {
        let vst = line(3);
        let c = Circuit::from_gates("t", 2, [Gate::cx(0, 1)]).unwrap();
        let r = run(&c, &vst, alloc::vec![0, 1]);
        assert_eq!(r.total_so, 0);
        assert_eq!(r.routed.len(), 1);
    }

    #[test]
    fn ends_of_three_line_need_one_swap() {
        let vst = line(3);
        let c = Circuit::from_gates("t", 2, [Gate::cx(0, 1)]).unwrap();
        let r = run(&c, &vst, alloc::vec![0, 2]);
        assert_eq!(r.total_so, 1);
        assert_eq!(swap_overhead(&r), 1);
        assert_eq!(r.swap_table, [1]);
        assert_eq!(r.epr_uses, 0);
    }

    #[test]
    fn legal_on_longer_circuit() {
        let vst = line(6);
        let c = Circuit::from_gates(
            "t",
            6,
            [
                Gate::cx(0, 5),
                Gate::cx(2, 4),
                Gate::cx(5, 1),
                Gate::cx(3, 0),
            ],
        )
        .unwrap();
        let r = run(&c, &vst, (0..6).collect());
        for g in &r.routed {
            if g.is_two_qubit() {
                assert!(vst.is_adjacent(g.gate.qubits[0], g.gate.qubits[1]));
            }
        }
        assert_eq!(r.routed.iter().filter(|g| !g.inserted_swap).count(), 4);
        assert!(r.total_so > 0);
    }

    #[test]
    fn rejects_unlowered() {
        let vst = line(3);
        let c = Circuit::from_gates("t", 2, [Gate::cz(0, 1)]).unwrap();
        let p = Partition::from_assignment(&c, alloc::vec![0, 0], 1);
        let layout = Layout::new(alloc::vec![0, 1], 3).unwrap();
        assert!(matches!(
            route(&c, &p, &layout, &vst, 1),
            Err(RouteError::NotLowered { index: 0, .. })
        ));
    }

    #[test]
    fn shortest_path_recovery() {
        let vst = line(4);
        let d = distance_matrix(&vst, 3.0);
        assert_eq!(d.get(0, 3), 3.0);
        assert_eq!(d.path(0, 3).unwrap(), [0, 1, 2, 3]);
    }
}

//! Capacity-constrained partitioning of logical qubits across workers.
//!
//! For every qubit budget `sq` between the circuit width and the capacity of
//! a connected group of workers, each worker is capped proportionally and a
//! greedy graph-growing partition (highest-degree seeds on the quietest
//! workers) is refined with Kernighan-Lin passes over every worker pair.
//! The objective is [`cut_cost`]: weighted inter-worker interaction plus the
//! mean quality score of the qubits each worker would have to use.

use alloc::vec::Vec;

use crate::circuit::{interaction_graph, Circuit, CircuitError, GateKind, InteractionGraph};
use crate::hardware::VirtualSystemTopology;

const EPS: f64 = 1e-12;
const MAX_STARTS: usize = 8;
const STALL_LIMIT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutOptions {
    /// Weight of inter-worker interaction.
    pub alpha: f64,
    /// Weight of the per-worker noise term.
    pub beta: f64,
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions {
            alpha: 1.0,
            beta: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CutError {
    #[error("insufficient qubits: circuit needs {needed}, largest connected worker group offers {available} (deficit {deficit})")]
    InsufficientQubits {
        needed: usize,
        available: usize,
        deficit: usize,
    },
    #[error("circuit has no qubits")]
    EmptyCircuit,
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// Qubits and gates handled by one worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcircuit {
    pub worker: usize,
    /// Owned logical qubits, ascending.
    pub qubits: Vec<usize>,
    /// Indices into the parent circuit of gates local to this worker.
    pub gates: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    subcircuits: Vec<Subcircuit>,
    cross_gates: Vec<usize>,
    budget_used: Vec<usize>,
}

impl Partition {
    /// Build the partition induced by `assignment[q] = worker`.
    pub fn from_assignment(circuit: &Circuit, assignment: Vec<usize>, n_workers: usize) -> Self {
        assert_eq!(assignment.len(), circuit.n_qubits());
        let mut budget_used = alloc::vec![0; n_workers];
        for &w in &assignment {
            budget_used[w] += 1;
        }
        let mut slot = alloc::vec![usize::MAX; n_workers];
        let mut subcircuits = Vec::new();
        for (w, &n) in budget_used.iter().enumerate() {
            if n > 0 {
                slot[w] = subcircuits.len();
                subcircuits.push(Subcircuit {
                    worker: w,
                    qubits: (0..assignment.len())
                        .filter(|&q| assignment[q] == w)
                        .collect(),
                    gates: Vec::new(),
                });
            }
        }
        let mut cross_gates = Vec::new();
        for (i, g) in circuit.gates().iter().enumerate() {
            let first = assignment[g.qubits[0]];
            let spans = g.qubits.iter().any(|&q| assignment[q] != first);
            if g.kind == GateKind::Barrier {
                let mut touched: Vec<usize> = g.qubits.iter().map(|&q| assignment[q]).collect();
                touched.sort_unstable();
                touched.dedup();
                for w in touched {
                    subcircuits[slot[w]].gates.push(i);
                }
            } else if spans {
                cross_gates.push(i);
            } else {
                subcircuits[slot[first]].gates.push(i);
            }
        }
        Partition {
            assignment,
            subcircuits,
            cross_gates,
            budget_used,
        }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn worker_of(&self, qubit: usize) -> usize {
        self.assignment[qubit]
    }

    pub fn subcircuits(&self) -> &[Subcircuit] {
        &self.subcircuits
    }

    pub fn cross_gates(&self) -> &[usize] {
        &self.cross_gates
    }

    /// Logical qubits per worker, indexed by worker id.
    pub fn budget_used(&self) -> &[usize] {
        &self.budget_used
    }

    pub fn used_workers(&self) -> impl Iterator<Item = usize> + '_ {
        self.subcircuits.iter().map(|s| s.worker)
    }

    /// Total interaction weight between qubits on different workers.
    pub fn cross_weight(&self, ig: &InteractionGraph) -> u64 {
        ig.edges()
            .filter(|&((a, b), _)| self.assignment[a] != self.assignment[b])
            .map(|(_, w)| w as u64)
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub cross_weight: u64,
    /// Sum over used workers of the mean score of their best `|owned|` qubits.
    pub noise: f64,
    pub total: f64,
}

/// Mean of the best `c` quality scores of each worker, for every `c`.
struct NoiseProfile {
    prefix_mean: Vec<Vec<f64>>,
}

impl NoiseProfile {
    fn new(vst: &VirtualSystemTopology) -> Self {
        let prefix_mean = (0..vst.worker_count())
            .map(|w| {
                let mut s: Vec<f64> = vst.worker_nodes(w).map(|n| vst.score(n)).collect();
                s.sort_by(f64::total_cmp);
                let mut out = alloc::vec![0.0; s.len() + 1];
                let mut acc = 0.0;
                for (i, x) in s.iter().enumerate() {
                    acc += x;
                    out[i + 1] = acc / (i + 1) as f64;
                }
                out
            })
            .collect();
        NoiseProfile { prefix_mean }
    }

    fn mean(&self, worker: usize, count: usize) -> f64 {
        self.prefix_mean[worker][count]
    }
}

pub fn cut_cost_breakdown(
    partition: &Partition,
    ig: &InteractionGraph,
    vst: &VirtualSystemTopology,
    opts: &CutOptions,
) -> CostBreakdown {
    let profile = NoiseProfile::new(vst);
    breakdown_with(
        partition.assignment(),
        partition.budget_used(),
        ig,
        &profile,
        opts,
    )
}

fn breakdown_with(
    assignment: &[usize],
    counts: &[usize],
    ig: &InteractionGraph,
    profile: &NoiseProfile,
    opts: &CutOptions,
) -> CostBreakdown {
    let cross_weight: u64 = ig
        .edges()
        .filter(|&((a, b), _)| assignment[a] != assignment[b])
        .map(|(_, w)| w as u64)
        .sum();
    let noise: f64 = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| profile.mean(w, c))
        .sum();
    CostBreakdown {
        cross_weight,
        noise,
        total: opts.alpha * cross_weight as f64 + opts.beta * noise,
    }
}

/// `alpha * cross-worker weight + beta * sum of per-worker noise`.
pub fn cut_cost(
    partition: &Partition,
    ig: &InteractionGraph,
    vst: &VirtualSystemTopology,
    opts: &CutOptions,
) -> f64 {
    cut_cost_breakdown(partition, ig, vst, opts).total
}

/// Best partition found at one qubit budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub sq: usize,
    pub component: Vec<usize>,
    pub partition: Partition,
    pub cost: CostBreakdown,
}

/// Per-worker caps for budget `sq` over `component`:
/// `min(Q_j, ceil(sq * Q_j / sum Q))`.
pub fn budget_caps(
    sq: usize,
    component: &[usize],
    vst: &VirtualSystemTopology,
) -> Vec<(usize, usize)> {
    let total: usize = component.iter().map(|&w| vst.capacity(w)).sum();
    component
        .iter()
        .map(|&w| {
            let q = vst.capacity(w);
            (w, q.min((sq * q).div_ceil(total)))
        })
        .collect()
}

/// Connected worker groups able to host `n_qubits`, or the deficit error.
pub fn feasible_components(
    vst: &VirtualSystemTopology,
    n_qubits: usize,
) -> Result<Vec<Vec<usize>>, CutError> {
    let comps = vst.worker_components();
    let cap = |c: &Vec<usize>| c.iter().map(|&w| vst.capacity(w)).sum::<usize>();
    let available = comps.iter().map(cap).max().unwrap_or(0);
    let ok: Vec<Vec<usize>> = comps.into_iter().filter(|c| cap(c) >= n_qubits).collect();
    if ok.is_empty() {
        return Err(CutError::InsufficientQubits {
            needed: n_qubits,
            available,
            deficit: n_qubits - available,
        });
    }
    Ok(ok)
}

/// Sweep one connected worker group. Returns one point per distinct
/// partition, ordered by ascending budget.
pub fn sweep_component(
    circuit: &Circuit,
    ig: &InteractionGraph,
    vst: &VirtualSystemTopology,
    component: &[usize],
    opts: &CutOptions,
) -> Vec<SweepPoint> {
    let n = circuit.n_qubits();
    let profile = NoiseProfile::new(vst);
    let total: usize = component.iter().map(|&w| vst.capacity(w)).sum();
    let graph = DenseGraph::new(ig);
    let mut out: Vec<SweepPoint> = Vec::new();
    let push = |sq: usize, assignment: Vec<usize>, out: &mut Vec<SweepPoint>| {
        if out
            .iter()
            .any(|p| p.partition.assignment() == assignment.as_slice())
        {
            return;
        }
        let partition = Partition::from_assignment(circuit, assignment, vst.worker_count());
        let cost = breakdown_with(
            partition.assignment(),
            partition.budget_used(),
            ig,
            &profile,
            opts,
        );
        out.push(SweepPoint {
            sq,
            component: component.to_vec(),
            partition,
            cost,
        });
    };
    for sq in n..=total {
        let caps = budget_caps(sq, component, vst);
        if caps.iter().map(|c| c.1).sum::<usize>() < n {
            continue;
        }
        let assignment = partition_with_caps(&graph, &caps, &profile, vst.worker_count(), opts);
        push(sq, assignment, &mut out);
    }
    for &w in component {
        if vst.capacity(w) >= n {
            push(total, alloc::vec![w; n], &mut out);
        }
    }
    out
}

/// Every distinct sweep partition over all feasible worker groups, ordered
/// by ascending cost (ties: group order, then budget).
pub fn sweep(
    circuit: &Circuit,
    vst: &VirtualSystemTopology,
    opts: &CutOptions,
) -> Result<Vec<SweepPoint>, CutError> {
    if circuit.n_qubits() == 0 {
        return Err(CutError::EmptyCircuit);
    }
    let ig = interaction_graph(circuit)?;
    let mut all = Vec::new();
    for comp in feasible_components(vst, circuit.n_qubits())? {
        all.extend(sweep_component(circuit, &ig, vst, &comp, opts));
    }
    Ok(merge_sweeps(all))
}

/// Stable sort by cost and drop repeated assignments.
pub fn merge_sweeps(points: Vec<SweepPoint>) -> Vec<SweepPoint> {
    let mut indexed: Vec<(usize, SweepPoint)> = points.into_iter().enumerate().collect();
    indexed.sort_by(|a, b| {
        a.1.cost
            .total
            .total_cmp(&b.1.cost.total)
            .then(a.0.cmp(&b.0))
    });
    let mut out: Vec<SweepPoint> = Vec::new();
    for (_, p) in indexed {
        if !out.iter().any(|q| q.partition == p.partition) {
            out.push(p);
        }
    }
    out
}

/// The minimum-cost partition over the budget sweep.
pub fn topo_cutter(
    circuit: &Circuit,
    vst: &VirtualSystemTopology,
    opts: &CutOptions,
) -> Result<Partition, CutError> {
    Ok(sweep(circuit, vst, opts)?.swap_remove(0).partition)
}

struct DenseGraph {
    n: usize,
    w: Vec<u32>,
    adj: Vec<Vec<(usize, u32)>>,
    degree: Vec<u64>,
}

impl DenseGraph {
    fn new(ig: &InteractionGraph) -> Self {
        let n = ig.n_qubits();
        let mut w = alloc::vec![0u32; n * n];
        for ((a, b), x) in ig.edges() {
            w[a * n + b] = x;
            w[b * n + a] = x;
        }
        DenseGraph {
            n,
            w,
            adj: ig.adjacency(),
            degree: ig.degrees(),
        }
    }

    fn weight(&self, a: usize, b: usize) -> u32 {
        self.w[a * self.n + b]
    }

    /// Vertices by descending weighted degree, ties by index.
    fn by_degree(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.n).collect();
        v.sort_by(|&a, &b| self.degree[b].cmp(&self.degree[a]).then(a.cmp(&b)));
        v
    }
}

fn partition_with_caps(
    g: &DenseGraph,
    caps: &[(usize, usize)],
    profile: &NoiseProfile,
    n_workers: usize,
    opts: &CutOptions,
) -> Vec<usize> {
    let mut order: Vec<(usize, usize)> = caps.iter().copied().filter(|c| c.1 > 0).collect();
    order.sort_by(|a, b| {
        profile
            .mean(a.0, a.1)
            .total_cmp(&profile.mean(b.0, b.1))
            .then(a.0.cmp(&b.0))
    });
    let mut cap_of = alloc::vec![0usize; n_workers];
    for &(w, c) in caps {
        cap_of[w] = c;
    }
    let workers: Vec<usize> = caps.iter().map(|c| c.0).collect();
    let seeds = g.by_degree();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for &seed in seeds.iter().take(MAX_STARTS) {
        let assignment = greedy_grow(g, &order, seed);
        let mut state = KlState::new(g, assignment, &cap_of, profile, opts, n_workers);
        state.refine(&workers);
        let cost = state.cost();
        if best.as_ref().is_none_or(|(c, _)| cost < *c - EPS) {
            best = Some((cost, state.assignment));
        }
    }
    best.expect("at least one start").1
}

/// Fill workers in `order` one at a time, growing each region by the
/// unassigned vertex with the strongest connection to it.
fn greedy_grow(g: &DenseGraph, order: &[(usize, usize)], first_seed: usize) -> Vec<usize> {
    let n = g.n;
    let mut assignment = alloc::vec![usize::MAX; n];
    let mut remaining = n;
    let by_degree = g.by_degree();
    for (slot, &(w, cap)) in order.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let mut conn = alloc::vec![0u64; n];
        let seed = if slot == 0 {
            first_seed
        } else {
            *by_degree
                .iter()
                .find(|&&v| assignment[v] == usize::MAX)
                .unwrap()
        };
        let place = |v: usize, assignment: &mut Vec<usize>, conn: &mut Vec<u64>| {
            assignment[v] = w;
            for &(u, x) in &g.adj[v] {
                conn[u] += x as u64;
            }
        };
        place(seed, &mut assignment, &mut conn);
        remaining -= 1;
        let mut count = 1;
        while count < cap && remaining > 0 {
            let v = (0..n)
                .filter(|&v| assignment[v] == usize::MAX)
                .max_by(|&a, &b| {
                    conn[a]
                        .cmp(&conn[b])
                        .then(g.degree[a].cmp(&g.degree[b]))
                        .then(b.cmp(&a))
                })
                .unwrap();
            place(v, &mut assignment, &mut conn);
            remaining -= 1;
            count += 1;
        }
    }
    debug_assert_eq!(remaining, 0, "caps must cover the circuit");
    assignment
}

#[derive(Clone, Copy)]
enum Move {
    Shift {
        v: usize,
        from: usize,
        to: usize,
    },
    Swap {
        u: usize,
        v: usize,
        a: usize,
        b: usize,
    },
}

struct KlState<'a> {
    g: &'a DenseGraph,
    assignment: Vec<usize>,
    counts: Vec<usize>,
    caps: &'a [usize],
    /// `conn[v * n_workers + w]`: weight from `v` to qubits on worker `w`.
    conn: Vec<u64>,
    n_workers: usize,
    profile: &'a NoiseProfile,
    opts: &'a CutOptions,
}

impl<'a> KlState<'a> {
    fn new(
        g: &'a DenseGraph,
        assignment: Vec<usize>,
        caps: &'a [usize],
        profile: &'a NoiseProfile,
        opts: &'a CutOptions,
        n_workers: usize,
    ) -> Self {
        let mut counts = alloc::vec![0; n_workers];
        let mut conn = alloc::vec![0u64; g.n * n_workers];
        for v in 0..g.n {
            counts[assignment[v]] += 1;
            for &(u, x) in &g.adj[v] {
                conn[v * n_workers + assignment[u]] += x as u64;
            }
        }
        KlState {
            g,
            assignment,
            counts,
            caps,
            conn,
            n_workers,
            profile,
            opts,
        }
    }

    fn cost(&self) -> f64 {
        let mut cross = 0u64;
        for v in 0..self.g.n {
            for &(u, x) in &self.g.adj[v] {
                if u > v && self.assignment[u] != self.assignment[v] {
                    cross += x as u64;
                }
            }
        }
        let noise: f64 = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(w, &c)| self.profile.mean(w, c))
            .sum();
        self.opts.alpha * cross as f64 + self.opts.beta * noise
    }

    fn c(&self, v: usize, w: usize) -> f64 {
        self.conn[v * self.n_workers + w] as f64
    }

    fn noise(&self, w: usize, count: usize) -> f64 {
        if count == 0 {
            0.0
        } else {
            self.profile.mean(w, count)
        }
    }

    fn shift_gain(&self, v: usize, from: usize, to: usize) -> f64 {
        let cut = self.opts.alpha * (self.c(v, to) - self.c(v, from));
        let (cf, ct) = (self.counts[from], self.counts[to]);
        let before = self.noise(from, cf) + self.noise(to, ct);
        let after = self.noise(from, cf - 1) + self.noise(to, ct + 1);
        cut - self.opts.beta * (after - before)
    }

    fn swap_gain(&self, u: usize, v: usize, a: usize, b: usize) -> f64 {
        let w = self.g.weight(u, v) as f64;
        self.opts.alpha * (self.c(u, b) - self.c(u, a) + self.c(v, a) - self.c(v, b) - 2.0 * w)
    }

    fn shift(&mut self, v: usize, from: usize, to: usize) {
        self.assignment[v] = to;
        self.counts[from] -= 1;
        self.counts[to] += 1;
        for &(u, x) in &self.g.adj[v] {
            self.conn[u * self.n_workers + from] -= x as u64;
            self.conn[u * self.n_workers + to] += x as u64;
        }
    }

    fn apply(&mut self, m: Move) {
        match m {
            Move::Shift { v, from, to } => self.shift(v, from, to),
            Move::Swap { u, v, a, b } => {
                self.shift(u, a, b);
                self.shift(v, b, a);
            }
        }
    }

    fn undo(&mut self, m: Move) {
        match m {
            Move::Shift { v, from, to } => self.shift(v, to, from),
            Move::Swap { u, v, a, b } => {
                self.shift(v, a, b);
                self.shift(u, b, a);
            }
        }
    }

    /// One KL pass between workers `a` and `b`: tentatively apply the best
    /// move among unlocked vertices until none remain, then keep the best
    /// prefix. Returns whether the cost strictly decreased.
    fn pass(&mut self, a: usize, b: usize) -> bool {
        let n = self.g.n;
        let mut locked = alloc::vec![false; n];
        let mut history: Vec<Move> = Vec::new();
        let (mut cum, mut best, mut best_len) = (0.0f64, 0.0f64, 0usize);
        loop {
            let side_a: Vec<usize> = (0..n)
                .filter(|&v| !locked[v] && self.assignment[v] == a)
                .collect();
            let side_b: Vec<usize> = (0..n)
                .filter(|&v| !locked[v] && self.assignment[v] == b)
                .collect();
            let mut pick: Option<(f64, Move)> = None;
            let consider = |gain: f64, m: Move, pick: &mut Option<(f64, Move)>| {
                if pick.as_ref().is_none_or(|(g, _)| gain > *g + EPS) {
                    *pick = Some((gain, m));
                }
            };
            if self.counts[b] < self.caps[b] {
                for &v in &side_a {
                    consider(
                        self.shift_gain(v, a, b),
                        Move::Shift { v, from: a, to: b },
                        &mut pick,
                    );
                }
            }
            if self.counts[a] < self.caps[a] {
                for &v in &side_b {
                    consider(
                        self.shift_gain(v, b, a),
                        Move::Shift { v, from: b, to: a },
                        &mut pick,
                    );
                }
            }
            for &u in &side_a {
                for &v in &side_b {
                    consider(
                        self.swap_gain(u, v, a, b),
                        Move::Swap { u, v, a, b },
                        &mut pick,
                    );
                }
            }
            let Some((gain, m)) = pick else { break };
            self.apply(m);
            match m {
                Move::Shift { v, .. } => locked[v] = true,
                Move::Swap { u, v, .. } => {
                    locked[u] = true;
                    locked[v] = true;
                }
            }
            history.push(m);
            cum += gain;
            if cum > best + EPS {
                best = cum;
                best_len = history.len();
            } else if history.len() - best_len > STALL_LIMIT {
                break;
            }
        }
        while history.len() > best_len {
            let m = history.pop().unwrap();
            self.undo(m);
        }
        best > EPS
    }

    fn refine(&mut self, workers: &[usize]) {
        loop {
            let mut improved = false;
            for (i, &a) in workers.iter().enumerate() {
                for &b in &workers[i + 1..] {
                    improved |= self.pass(a, b);
                }
            }
            if !improved {
                break;
            }
        }
    }
}

//! Noise-aware initial placement of each worker's logical qubits.
//!
//! Per worker, an exact embedding of the local interaction graph into the
//! coupling graph is searched first (bounded backtracking, with the heaviest
//! cross-worker qubit pinned on each EPR endpoint). Without one, the
//! qubits go to a region grown from the endpoints (or from the seed with the
//! best mean quality) by repeatedly absorbing the quietest frontier node:
//! cross-worker qubits nearest their endpoint, the rest greedily next to
//! their already placed partners.

use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

use super::Layout;
use crate::circuit::{interaction_graph, Circuit, CircuitError, InteractionGraph};
use crate::cutter::Partition;
use crate::hardware::VirtualSystemTopology;

const EMBED_BUDGET: usize = 20_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LayoutError {
    #[error("logical qubit {logical} mapped to missing node {node}")]
    NodeOutOfRange { logical: usize, node: usize },
    #[error("node {node} holds more than one logical qubit")]
    NodeReused { node: usize },
    #[error("worker {worker} owns {needed} qubits but has capacity {capacity}")]
    OverCapacity {
        worker: usize,
        needed: usize,
        capacity: usize,
    },
    #[error("partition covers {partition} qubits, circuit has {circuit}")]
    SizeMismatch { partition: usize, circuit: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
}

/// For each (worker, partner) pair joined through the link graph, the node on
/// `worker` of the first link on a shortest worker-level path to `partner`
/// (lowest link index among equals).
pub fn anchor_endpoints(
    vst: &VirtualSystemTopology,
    worker: usize,
    partner: usize,
) -> Option<usize> {
    let nw = vst.worker_count();
    let mut dist = alloc::vec![usize::MAX; nw];
    dist[partner] = 0;
    let mut queue = VecDeque::from([partner]);
    while let Some(w) = queue.pop_front() {
        for l in vst.links() {
            for (x, y) in [(l.a.worker, l.b.worker), (l.b.worker, l.a.worker)] {
                if x == w && dist[y] == usize::MAX {
                    dist[y] = dist[w] + 1;
                    queue.push_back(y);
                }
            }
        }
    }
    if dist[worker] == usize::MAX || worker == partner {
        return None;
    }
    vst.links().iter().find_map(|l| {
        if l.a.worker == worker && dist[l.b.worker] + 1 == dist[worker] {
            Some(vst.node(l.a))
        } else if l.b.worker == worker && dist[l.a.worker] + 1 == dist[worker] {
            Some(vst.node(l.b))
        } else {
            None
        }
    })
}

/// Per-worker placement as described in the module docs.
pub fn initial_layout(
    circuit: &Circuit,
    partition: &Partition,
    vst: &VirtualSystemTopology,
) -> Result<Layout, LayoutError> {
    let n = circuit.n_qubits();
    if partition.assignment().len() != n {
        return Err(LayoutError::SizeMismatch {
            partition: partition.assignment().len(),
            circuit: n,
        });
    }
    let ig = interaction_graph(circuit)?;
    let mut l2p = alloc::vec![usize::MAX; n];
    for sub in partition.subcircuits() {
        let w = sub.worker;
        if sub.qubits.len() > vst.capacity(w) {
            return Err(LayoutError::OverCapacity {
                worker: w,
                needed: sub.qubits.len(),
                capacity: vst.capacity(w),
            });
        }
        let placer = WorkerPlacer::new(vst, w, &sub.qubits, &ig, partition);
        for (l, local) in placer.place() {
            l2p[l] = vst.worker_nodes(w).start + local;
        }
    }
    Layout::new(l2p, vst.node_count())
}

/// The k-th owned logical qubit of each worker on its k-th node.
pub fn baseline_layout(
    partition: &Partition,
    vst: &VirtualSystemTopology,
) -> Result<Layout, LayoutError> {
    let mut l2p = alloc::vec![usize::MAX; partition.assignment().len()];
    for sub in partition.subcircuits() {
        if sub.qubits.len() > vst.capacity(sub.worker) {
            return Err(LayoutError::OverCapacity {
                worker: sub.worker,
                needed: sub.qubits.len(),
                capacity: vst.capacity(sub.worker),
            });
        }
        for (k, &l) in sub.qubits.iter().enumerate() {
            l2p[l] = vst.worker_nodes(sub.worker).start + k;
        }
    }
    Layout::new(l2p, vst.node_count())
}

/// A logical qubit with cross-worker gates, its endpoint (local index) and
/// the cross weight routed through it.
#[derive(Debug, Clone, Copy)]
struct Anchor {
    logical: usize,
    endpoint: usize,
    weight: u64,
}

struct WorkerPlacer<'a> {
    owned: &'a [usize],
    /// Local interaction edges among owned qubits.
    local_adj: BTreeMap<usize, Vec<(usize, u32)>>,
    /// Primary anchor per cross qubit, heaviest first.
    anchors: Vec<Anchor>,
    dist: Vec<Vec<usize>>,
    node_adj: Vec<Vec<usize>>,
    score: Vec<f64>,
}

impl<'a> WorkerPlacer<'a> {
    fn new(
        vst: &'a VirtualSystemTopology,
        worker: usize,
        owned: &'a [usize],
        ig: &InteractionGraph,
        partition: &Partition,
    ) -> Self {
        let nodes = vst.worker_nodes(worker);
        let offset = nodes.start;
        let node_adj: Vec<Vec<usize>> = nodes
            .clone()
            .map(|p| {
                vst.neighbors(p)
                    .iter()
                    .filter(|&&x| vst.worker_of(x) == worker)
                    .map(|&x| x - offset)
                    .collect()
            })
            .collect();
        let score: Vec<f64> = nodes.clone().map(|p| vst.score(p)).collect();

        let mut local_adj: BTreeMap<usize, Vec<(usize, u32)>> =
            owned.iter().map(|&l| (l, Vec::new())).collect();
        let mut cross: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for ((a, b), w) in ig.edges() {
            let (wa, wb) = (partition.worker_of(a), partition.worker_of(b));
            if wa == worker && wb == worker {
                local_adj.get_mut(&a).unwrap().push((b, w));
                local_adj.get_mut(&b).unwrap().push((a, w));
            } else {
                for (me, other) in [(a, b), (b, a)] {
                    if partition.worker_of(me) == worker {
                        if let Some(e) = anchor_endpoints(vst, worker, partition.worker_of(other)) {
                            *cross.entry((me, e - offset)).or_default() += w as u64;
                        }
                    }
                }
            }
        }
        let mut primary: BTreeMap<usize, Anchor> = BTreeMap::new();
        for (&(logical, endpoint), &weight) in &cross {
            let a = Anchor {
                logical,
                endpoint,
                weight,
            };
            primary
                .entry(logical)
                .and_modify(|cur| {
                    if weight > cur.weight {
                        *cur = a;
                    }
                })
                .or_insert(a);
        }
        let mut anchors: Vec<Anchor> = primary.into_values().collect();
        anchors.sort_by(|x, y| y.weight.cmp(&x.weight).then(x.logical.cmp(&y.logical)));

        WorkerPlacer {
            owned,
            local_adj,
            anchors,
            dist: vst.intra_distances(worker),
            node_adj,
            score,
        }
    }

    fn capacity(&self) -> usize {
        self.score.len()
    }

    fn endpoints(&self) -> Vec<usize> {
        let mut e: Vec<usize> = Vec::new();
        for a in &self.anchors {
            if !e.contains(&a.endpoint) {
                e.push(a.endpoint);
            }
        }
        e
    }

    /// Nodes in the order a region grown from `seeds` absorbs them: always
    /// the lowest-score frontier node, ties by discovery order.
    fn grow(&self, seeds: &[usize], size: usize) -> Vec<usize> {
        let cap = self.capacity();
        let mut in_region = alloc::vec![false; cap];
        let mut discovered = alloc::vec![usize::MAX; cap];
        let mut order = Vec::with_capacity(size);
        let mut frontier: Vec<usize> = Vec::new();
        let mut clock = 0;
        let mut discover = |v: usize, discovered: &mut Vec<usize>, frontier: &mut Vec<usize>| {
            if discovered[v] == usize::MAX {
                discovered[v] = clock;
                clock += 1;
                frontier.push(v);
            }
        };
        for &s in seeds {
            discover(s, &mut discovered, &mut frontier);
        }
        while order.len() < size {
            let pick = frontier
                .iter()
                .enumerate()
                .filter(|(_, &v)| !in_region[v])
                .min_by(|(_, &a), (_, &b)| {
                    self.score[a]
                        .total_cmp(&self.score[b])
                        .then(discovered[a].cmp(&discovered[b]))
                })
                .map(|(i, _)| i);
            let v = match pick {
                Some(i) => frontier.swap_remove(i),
                // Unreachable remainder: continue from the best unused node.
                None => match (0..cap)
                    .filter(|&v| !in_region[v])
                    .min_by(|&a, &b| self.score[a].total_cmp(&self.score[b]).then(a.cmp(&b)))
                {
                    Some(v) => {
                        discover(v, &mut discovered, &mut frontier);
                        frontier.pop();
                        v
                    }
                    None => break,
                },
            };
            in_region[v] = true;
            order.push(v);
            for &u in &self.node_adj[v] {
                discover(u, &mut discovered, &mut frontier);
            }
        }
        order
    }

    /// Region order for the whole worker.
    fn growth_order(&self) -> Vec<usize> {
        let endpoints = self.endpoints();
        if !endpoints.is_empty() {
            return self.grow(&endpoints, self.capacity());
        }
        let k = self.owned.len();
        let mut best: Option<(f64, usize)> = None;
        for s in 0..self.capacity() {
            let region = self.grow(&[s], k);
            let mean = region.iter().map(|&v| self.score[v]).sum::<f64>() / k.max(1) as f64;
            if best.is_none_or(|(m, _)| mean < m - 1e-15) {
                best = Some((mean, s));
            }
        }
        self.grow(&[best.map_or(0, |b| b.1)], self.capacity())
    }

    fn place(&self) -> Vec<(usize, usize)> {
        let order = self.growth_order();
        let mut rank = alloc::vec![usize::MAX; self.capacity()];
        for (i, &v) in order.iter().enumerate() {
            rank[v] = i;
        }
        if let Some(p) = self.embed(&rank) {
            if self.anchors_respected(&p) {
                return p;
            }
        }
        self.place_in_region(&order[..self.owned.len()], &rank)
    }

    fn is_cross(&self, l: usize) -> bool {
        self.anchors.iter().any(|a| a.logical == l)
    }

    /// Every cross qubit is at least as close to its endpoint as any owned
    /// qubit without cross gates.
    fn anchors_respected(&self, placement: &[(usize, usize)]) -> bool {
        let at: BTreeMap<usize, usize> = placement.iter().copied().collect();
        self.anchors.iter().all(|a| {
            let d = self.dist[a.endpoint][at[&a.logical]];
            self.owned
                .iter()
                .filter(|&&l| !self.is_cross(l))
                .all(|l| self.dist[a.endpoint][at[l]] >= d)
        })
    }

    fn by_quality(&self, rank: &[usize], a: usize, b: usize) -> core::cmp::Ordering {
        self.score[a]
            .total_cmp(&self.score[b])
            .then(rank[a].cmp(&rank[b]))
    }

    /// Bounded search for a placement where every local interaction lands on
    /// a coupling edge and each endpoint holds its heaviest cross qubit.
    fn embed(&self, rank: &[usize]) -> Option<Vec<(usize, usize)>> {
        let mut pinned: BTreeMap<usize, usize> = BTreeMap::new();
        for e in self.endpoints() {
            if let Some(a) = self
                .anchors
                .iter()
                .filter(|a| a.endpoint == e && !pinned.contains_key(&a.logical))
                .max_by(|x, y| x.weight.cmp(&y.weight).then(y.logical.cmp(&x.logical)))
            {
                pinned.insert(a.logical, e);
            }
        }
        let structural: Vec<usize> = self
            .owned
            .iter()
            .copied()
            .filter(|l| pinned.contains_key(l) || !self.local_adj[l].is_empty())
            .collect();

        // Visit pinned qubits first, then grow along interaction edges.
        let mut order: Vec<usize> = pinned.keys().copied().collect();
        let mut placed_set: BTreeMap<usize, ()> = order.iter().map(|&l| (l, ())).collect();
        while order.len() < structural.len() {
            let next = structural
                .iter()
                .copied()
                .filter(|l| !placed_set.contains_key(l))
                .max_by(|&a, &b| {
                    let conn = |l: usize| {
                        self.local_adj[&l]
                            .iter()
                            .filter(|(u, _)| placed_set.contains_key(u))
                            .count()
                    };
                    conn(a)
                        .cmp(&conn(b))
                        .then(self.local_adj[&a].len().cmp(&self.local_adj[&b].len()))
                        .then(b.cmp(&a))
                })
                .unwrap();
            placed_set.insert(next, ());
            order.push(next);
        }

        let mut search = Embedding {
            placer: self,
            order: &order,
            pinned: &pinned,
            rank,
            map: BTreeMap::new(),
            used: alloc::vec![false; self.capacity()],
            steps: 0,
        };
        if !search.extend(0) {
            return None;
        }
        let mut used = search.used;
        let mut out: Vec<(usize, usize)> = search.map.into_iter().collect();

        // Qubits without local interactions: cross ones by their endpoint,
        // the rest by region order.
        let loose: Vec<usize> = self
            .owned
            .iter()
            .copied()
            .filter(|l| !placed_set.contains_key(l))
            .collect();
        for a in &self.anchors {
            if loose.contains(&a.logical) {
                let v = (0..self.capacity())
                    .filter(|&v| !used[v])
                    .min_by(|&x, &y| {
                        self.dist[a.endpoint][x]
                            .cmp(&self.dist[a.endpoint][y])
                            .then(self.by_quality(rank, x, y))
                    })?;
                used[v] = true;
                out.push((a.logical, v));
            }
        }
        let mut free: Vec<usize> = (0..self.capacity()).filter(|&v| !used[v]).collect();
        free.sort_by_key(|&v| rank[v]);
        let mut free = free.into_iter();
        for l in loose {
            if !self.is_cross(l) {
                out.push((l, free.next()?));
            }
        }
        Some(out)
    }

    fn place_in_region(&self, region: &[usize], rank: &[usize]) -> Vec<(usize, usize)> {
        let mut free: Vec<usize> = region.to_vec();
        let mut at: BTreeMap<usize, usize> = BTreeMap::new();
        for a in &self.anchors {
            let (i, _) = free
                .iter()
                .enumerate()
                .min_by(|(_, &x), (_, &y)| {
                    self.dist[a.endpoint][x]
                        .cmp(&self.dist[a.endpoint][y])
                        .then(self.by_quality(rank, x, y))
                })
                .expect("region holds every owned qubit");
            at.insert(a.logical, free.swap_remove(i));
        }
        let mut rest: Vec<usize> = self
            .owned
            .iter()
            .copied()
            .filter(|l| !at.contains_key(l))
            .collect();
        while !rest.is_empty() {
            let conn = |l: usize| -> u64 {
                self.local_adj[&l]
                    .iter()
                    .filter(|(u, _)| at.contains_key(u))
                    .map(|&(_, w)| w as u64)
                    .sum()
            };
            let degree =
                |l: usize| -> u64 { self.local_adj[&l].iter().map(|&(_, w)| w as u64).sum() };
            let (i, &l) = rest
                .iter()
                .enumerate()
                .max_by(|(_, &a), (_, &b)| {
                    conn(a)
                        .cmp(&conn(b))
                        .then(degree(a).cmp(&degree(b)))
                        .then(b.cmp(&a))
                })
                .unwrap();
            rest.swap_remove(i);
            let cost = |v: usize| -> u64 {
                self.local_adj[&l]
                    .iter()
                    .filter_map(|&(u, w)| {
                        at.get(&u)
                            .map(|&p| w as u64 * self.dist[v][p].min(1 << 20) as u64)
                    })
                    .sum()
            };
            let (j, &v) = free
                .iter()
                .enumerate()
                .min_by(|(_, &x), (_, &y)| cost(x).cmp(&cost(y)).then(self.by_quality(rank, x, y)))
                .unwrap();
            free.swap_remove(j);
            at.insert(l, v);
        }
        at.into_iter().collect()
    }
}

struct Embedding<'p, 'a> {
    placer: &'p WorkerPlacer<'a>,
    order: &'p [usize],
    pinned: &'p BTreeMap<usize, usize>,
    rank: &'p [usize],
    map: BTreeMap<usize, usize>,
    used: Vec<bool>,
    steps: usize,
}

impl Embedding<'_, '_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let p = self.placer;
        let l = self.order[depth];
        let mapped_nbrs: Vec<usize> = p.local_adj[&l]
            .iter()
            .filter_map(|(u, _)| self.map.get(u).copied())
            .collect();
        let mut domain: Vec<usize> = if let Some(&e) = self.pinned.get(&l) {
            alloc::vec![e]
        } else if let Some(&first) = mapped_nbrs.first() {
            p.node_adj[first].clone()
        } else {
            (0..p.capacity()).collect()
        };
        domain
            .retain(|&v| !self.used[v] && mapped_nbrs.iter().all(|&m| p.node_adj[v].contains(&m)));
        domain.sort_by(|&a, &b| p.by_quality(self.rank, a, b));
        for v in domain {
            self.steps += 1;
            if self.steps > EMBED_BUDGET {
                return false;
            }
            self.used[v] = true;
            self.map.insert(l, v);
            if self.extend(depth + 1) {
                return true;
            }
            self.map.remove(&l);
            self.used[v] = false;
        }
        false
    }
}

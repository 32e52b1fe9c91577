use alloc::vec::Vec;

use super::{qubit_quality, PhysQubit, SystemConfig, WorkerSpec};

/// One inter-worker EPR link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprLink {
    pub a: PhysQubit,
    pub b: PhysQubit,
    pub sr: f64,
}

/// A set of links evaluated together.
#[derive(Debug, Clone, PartialEq)]
pub struct EprCandidate {
    pub links: Vec<EprLink>,
    /// Position in the enumeration order.
    pub index: usize,
    /// Sum of endpoint quality scores (the ordering key).
    pub score: f64,
}

impl EprCandidate {
    pub fn new(links: Vec<EprLink>, index: usize) -> Self {
        EprCandidate {
            links,
            index,
            score: f64::NAN,
        }
    }

    /// Worker-level connected components under this candidate's links,
    /// each sorted, ordered by smallest worker id.
    pub fn worker_components(&self, n_workers: usize) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..n_workers).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut x = x;
            while p[x] != r {
                let nx = p[x];
                p[x] = r;
                x = nx;
            }
            r
        }
        for l in &self.links {
            let (ra, rb) = (find(&mut parent, l.a.worker), find(&mut parent, l.b.worker));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut root_slot = alloc::vec![usize::MAX; n_workers];
        for w in 0..n_workers {
            let r = find(&mut parent, w);
            if root_slot[r] == usize::MAX {
                root_slot[r] = comps.len();
                comps.push(Vec::new());
            }
            comps[root_slot[r]].push(w);
        }
        comps
    }
}

/// The `k` best-quality qubits of a worker, ties broken by lower index.
pub fn top_qubits(worker: &WorkerSpec, k: usize) -> Vec<usize> {
    let mut q: Vec<(f64, usize)> = (0..worker.n_qubits)
        .map(|i| (qubit_quality(worker, i), i))
        .collect();
    q.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    q.into_iter().take(k).map(|(_, i)| i).collect()
}

/// All link sets of size `1..=max_links` over cross-worker pairs of the
/// top-k qubits, no qubit used twice, ordered by ascending endpoint score
/// sum and then by raw enumeration order. Returns `None` for fewer than two
/// workers.
pub fn enumerate_epr_candidates(config: &SystemConfig) -> Option<Vec<EprCandidate>> {
    let nw = config.workers.len();
    if nw < 2 {
        return None;
    }
    let tops: Vec<Vec<usize>> = config
        .workers
        .iter()
        .map(|w| top_qubits(w, config.candidates_per_worker))
        .collect();
    let mut pairs: Vec<(EprLink, f64)> = Vec::new();
    for wi in 0..nw {
        for wj in wi + 1..nw {
            for &qa in &tops[wi] {
                for &qb in &tops[wj] {
                    let a = PhysQubit::new(wi, qa);
                    let b = PhysQubit::new(wj, qb);
                    let score = qubit_quality(&config.workers[wi], qa)
                        + qubit_quality(&config.workers[wj], qb);
                    pairs.push((
                        EprLink {
                            a,
                            b,
                            sr: config.link_sr(a, b),
                        },
                        score,
                    ));
                }
            }
        }
    }

    let mut raw: Vec<(Vec<usize>, f64)> = Vec::new();
    let mut chosen: Vec<usize> = Vec::new();
    for size in 1..=config.max_links.min(pairs.len()) {
        combinations(&pairs, size, 0, &mut chosen, &mut raw);
    }
    let mut indexed: Vec<(usize, Vec<usize>, f64)> = raw
        .into_iter()
        .enumerate()
        .map(|(i, (c, s))| (i, c, s))
        .collect();
    indexed.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)));
    Some(
        indexed
            .into_iter()
            .enumerate()
            .map(|(index, (_, combo, score))| EprCandidate {
                links: combo.iter().map(|&i| pairs[i].0).collect(),
                index,
                score,
            })
            .collect(),
    )
}

fn combinations(
    pairs: &[(EprLink, f64)],
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
) {
    if chosen.len() == size {
        let score = chosen.iter().map(|&i| pairs[i].1).sum();
        out.push((chosen.clone(), score));
        return;
    }
    for i in start..pairs.len() {
        let l = &pairs[i].0;
        let clash = chosen.iter().any(|&j| {
            let m = &pairs[j].0;
            m.a == l.a || m.a == l.b || m.b == l.a || m.b == l.b
        });
        if clash {
            continue;
        }
        chosen.push(i);
        combinations(pairs, size, i + 1, chosen, out);
        chosen.pop();
    }
}

//! Outer search: evaluate every EPR link candidate and keep the plan with
//! the smallest SWAP overhead.
//!
//! Per candidate, every distinct partition of the budget sweep is placed
//! and routed; the candidate scores as its best routing. Candidates are
//! compared with strict improvement in enumeration order, so the first
//! achiever of the minimum wins. [`Optimizer::evaluate`] is pure, which lets
//! callers evaluate candidates in any order or in parallel and reduce with
//! [`Optimizer::finish`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::circuit::{interaction_graph, is_lowered, lower, Circuit, CircuitError};
use crate::cutter::{
    feasible_components, merge_sweeps, sweep_component, CutError, CutOptions, Partition, SweepPoint,
};
use crate::hardware::{
    con_vst, enumerate_epr_candidates, ConfigError, EprCandidate, SystemConfig,
    VirtualSystemTopology, VstError,
};
use crate::router::{
    baseline_layout, distance_matrix, initial_layout, route_with, route_with_distances,
    swap_count_with_distances, Distances, LayoutError, RouteError, RouterOptions, RoutingResult,
};
use crate::verifier::{estimate_routing_fidelity, FidelityError, FidelityEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Selection {
    /// Fewest SWAPs.
    #[default]
    Swaps,
    /// Highest estimated fidelity.
    Fidelity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerOptions {
    pub seed: u64,
    pub cut: CutOptions,
    pub router: RouterOptions,
    pub selection: Selection,
    /// Routing seeds tried per partition (`seed`, `seed + 1`, ...).
    pub restarts: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            seed: 1,
            cut: CutOptions::default(),
            router: RouterOptions::default(),
            selection: Selection::Swaps,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OptimizeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("circuit has no qubits")]
    EmptyCircuit,
    #[error("no feasible link candidate: circuit needs {needed} qubits, best connected worker group offers {available}")]
    Infeasible { needed: usize, available: usize },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Vst(#[from] VstError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Fidelity(#[from] FidelityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanKind {
    Optimized,
    Baseline,
}

/// Outcome of one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub candidate: usize,
    /// `None` when no worker group of this candidate can host the circuit.
    pub so: Option<usize>,
    pub fidelity: Option<f64>,
    /// Position of the winning partition in the candidate's sweep.
    pub point: Option<usize>,
    pub sq: Option<usize>,
    pub cut_cost: Option<f64>,
}

impl Evaluation {
    fn infeasible(candidate: usize) -> Self {
        Evaluation {
            candidate,
            so: None,
            fidelity: None,
            point: None,
            sq: None,
            cut_cost: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub kind: PlanKind,
    /// The lowered circuit that was routed.
    pub circuit: Circuit,
    pub candidate: EprCandidate,
    pub vst: VirtualSystemTopology,
    pub partition: Partition,
    /// Qubit budget of the chosen sweep point.
    pub sq: usize,
    pub routing: RoutingResult,
    pub so: usize,
    pub fidelity: FidelityEstimate,
    pub evaluations: Vec<Evaluation>,
}

fn prepare(
    circuit: &Circuit,
    config: &SystemConfig,
) -> Result<(Circuit, Vec<EprCandidate>), OptimizeError> {
    config.validate()?;
    if circuit.n_qubits() == 0 {
        return Err(OptimizeError::EmptyCircuit);
    }
    let circuit = if is_lowered(circuit) {
        circuit.clone()
    } else {
        lower(circuit)
    };
    let candidates = enumerate_epr_candidates(config)
        .unwrap_or_else(|| alloc::vec![EprCandidate::new(Vec::new(), 0)]);
    Ok((circuit, candidates))
}

/// Candidate evaluation state shared by sequential and parallel drivers.
pub struct Optimizer<'a> {
    circuit: Circuit,
    config: &'a SystemConfig,
    opts: OptimizerOptions,
    candidates: Vec<EprCandidate>,
    sweeps: BTreeMap<Vec<usize>, Vec<SweepPoint>>,
    available: usize,
}

struct Routed {
    point: usize,
    routing: RoutingResult,
    fidelity: FidelityEstimate,
}

impl<'a> Optimizer<'a> {
    /// Validate inputs, enumerate candidates and sweep every worker group
    /// that some candidate connects.
    pub fn new(
        circuit: &Circuit,
        config: &'a SystemConfig,
        opts: OptimizerOptions,
    ) -> Result<Self, OptimizeError> {
        let (circuit, candidates) = prepare(circuit, config)?;
        let ig = interaction_graph(&circuit)?;
        let mut sweeps = BTreeMap::new();
        let mut available = 0;
        for c in &candidates {
            let vst = con_vst(config, c)?;
            match feasible_components(&vst, circuit.n_qubits()) {
                Ok(comps) => {
                    available = available.max(circuit.n_qubits());
                    for comp in comps {
                        if let alloc::collections::btree_map::Entry::Vacant(slot) =
                            sweeps.entry(comp)
                        {
                            let points =
                                sweep_component(&circuit, &ig, &vst, slot.key(), &opts.cut);
                            slot.insert(points);
                        }
                    }
                }
                Err(CutError::InsufficientQubits { available: a, .. }) => {
                    available = available.max(a)
                }
                Err(e) => unreachable!("component search only reports capacity: {e}"),
            }
        }
        Ok(Optimizer {
            circuit,
            config,
            opts,
            candidates,
            sweeps,
            available,
        })
    }

    pub fn candidates(&self) -> &[EprCandidate] {
        &self.candidates
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn points(&self, vst: &VirtualSystemTopology) -> Vec<SweepPoint> {
        match feasible_components(vst, self.circuit.n_qubits()) {
            Ok(comps) => merge_sweeps(
                comps
                    .iter()
                    .flat_map(|c| self.sweeps[c].iter().cloned())
                    .collect(),
            ),
            Err(_) => Vec::new(),
        }
    }

    fn better(&self, a: &Routed, b: &Routed) -> bool {
        match self.opts.selection {
            Selection::Swaps => a.routing.total_so < b.routing.total_so,
            Selection::Fidelity => a.fidelity.f > b.fidelity.f,
        }
    }

    fn route_point(
        &self,
        point: &SweepPoint,
        vst: &VirtualSystemTopology,
        dist: &Distances,
    ) -> Result<(RoutingResult, FidelityEstimate), OptimizeError> {
        let layout = initial_layout(&self.circuit, &point.partition, vst)?;
        let mut best: Option<(RoutingResult, FidelityEstimate)> = None;
        for r in 0..self.opts.restarts.max(1) {
            let seed = self.opts.seed.wrapping_add(r as u64);
            let routing = route_with_distances(
                &self.circuit,
                &point.partition,
                &layout,
                vst,
                seed,
                &self.opts.router,
                dist,
            )?;
            let fidelity = estimate_routing_fidelity(&routing, vst, self.config)?;
            let improves = match &best {
                None => true,
                Some((b, bf)) => match self.opts.selection {
                    Selection::Swaps => routing.total_so < b.total_so,
                    Selection::Fidelity => fidelity.f > bf.f,
                },
            };
            if improves {
                best = Some((routing, fidelity));
            }
        }
        Ok(best.expect("at least one restart"))
    }

    /// Fewest SWAPs over the restarts, without building the routed output.
    fn point_swaps(
        &self,
        point: &SweepPoint,
        vst: &VirtualSystemTopology,
        dist: &Distances,
    ) -> Result<usize, OptimizeError> {
        let layout = initial_layout(&self.circuit, &point.partition, vst)?;
        let mut best = usize::MAX;
        for r in 0..self.opts.restarts.max(1) {
            let seed = self.opts.seed.wrapping_add(r as u64);
            best = best.min(swap_count_with_distances(
                &self.circuit,
                &point.partition,
                &layout,
                vst,
                seed,
                &self.opts.router,
                dist,
            )?);
        }
        Ok(best)
    }

    fn best_routing(
        &self,
        vst: &VirtualSystemTopology,
        points: &[SweepPoint],
    ) -> Result<Option<Routed>, OptimizeError> {
        let mut best: Option<Routed> = None;
        if points.is_empty() {
            return Ok(None);
        }
        let dist = distance_matrix(vst, self.opts.router.w_epr);
        if self.opts.selection == Selection::Swaps {
            let mut best: Option<(usize, usize)> = None;
            for (point, p) in points.iter().enumerate() {
                let so = self.point_swaps(p, vst, &dist)?;
                if best.is_none_or(|(b, _)| so < b) {
                    best = Some((so, point));
                }
                if so == 0 {
                    break;
                }
            }
            let point = best.expect("points is non-empty").1;
            let (routing, fidelity) = self.route_point(&points[point], vst, &dist)?;
            return Ok(Some(Routed {
                point,
                routing,
                fidelity,
            }));
        }
        for (point, p) in points.iter().enumerate() {
            let (routing, fidelity) = self.route_point(p, vst, &dist)?;
            let cur = Routed {
                point,
                routing,
                fidelity,
            };
            if best.as_ref().is_none_or(|b| self.better(&cur, b)) {
                best = Some(cur);
            }
            if self.opts.selection == Selection::Swaps
                && best.as_ref().is_some_and(|b| b.routing.total_so == 0)
            {
                break;
            }
        }
        Ok(best)
    }

    /// Score candidate `idx` (a position in [`Self::candidates`]).
    pub fn evaluate(&self, idx: usize) -> Result<Evaluation, OptimizeError> {
        let vst = con_vst(self.config, &self.candidates[idx])?;
        let points = self.points(&vst);
        Ok(match self.best_routing(&vst, &points)? {
            None => Evaluation::infeasible(idx),
            Some(b) => Evaluation {
                candidate: idx,
                so: Some(b.routing.total_so),
                fidelity: Some(b.fidelity.f),
                point: Some(b.point),
                sq: Some(points[b.point].sq),
                cut_cost: Some(points[b.point].cost.total),
            },
        })
    }

    /// Reduce evaluations (in candidate order) to the winning plan.
    pub fn finish(&self, mut evaluations: Vec<Evaluation>) -> Result<Plan, OptimizeError> {
        evaluations.sort_by_key(|e| e.candidate);
        let mut winner: Option<&Evaluation> = None;
        for e in &evaluations {
            let (Some(so), Some(f)) = (e.so, e.fidelity) else {
                continue;
            };
            let improves = match winner {
                None => true,
                Some(w) => match self.opts.selection {
                    Selection::Swaps => so < w.so.unwrap(),
                    Selection::Fidelity => f > w.fidelity.unwrap(),
                },
            };
            if improves {
                winner = Some(e);
            }
        }
        let Some(w) = winner else {
            return Err(OptimizeError::Infeasible {
                needed: self.circuit.n_qubits(),
                available: self.available,
            });
        };
        let candidate = self.candidates[w.candidate].clone();
        let vst = con_vst(self.config, &candidate)?;
        let point = self.points(&vst).swap_remove(w.point.unwrap());
        let dist = distance_matrix(&vst, self.opts.router.w_epr);
        let (routing, fidelity) = self.route_point(&point, &vst, &dist)?;
        Ok(Plan {
            kind: PlanKind::Optimized,
            circuit: self.circuit.clone(),
            candidate,
            vst,
            partition: point.partition,
            sq: point.sq,
            so: routing.total_so,
            routing,
            fidelity,
            evaluations,
        })
    }
}

/// Evaluate every candidate in order and return the best plan.
pub fn optimize(
    circuit: &Circuit,
    config: &SystemConfig,
    opts: &OptimizerOptions,
) -> Result<Plan, OptimizeError> {
    let opt = Optimizer::new(circuit, config, *opts)?;
    let evals = (0..opt.candidates().len())
        .map(|i| opt.evaluate(i))
        .collect::<Result<Vec<_>, _>>()?;
    opt.finish(evals)
}

/// Reference pipeline without noise awareness: the first candidate with a
/// worker group large enough, qubits assigned to that group's workers
/// first-fit in index order, identity placement, same router.
pub fn baseline(
    circuit: &Circuit,
    config: &SystemConfig,
    opts: &OptimizerOptions,
) -> Result<Plan, OptimizeError> {
    let (circuit, candidates) = prepare(circuit, config)?;
    let n = circuit.n_qubits();
    let mut available = 0;
    for (idx, candidate) in candidates.into_iter().enumerate() {
        let vst = con_vst(config, &candidate)?;
        let comp = match feasible_components(&vst, n) {
            Ok(c) => c.into_iter().next().unwrap(),
            Err(CutError::InsufficientQubits { available: a, .. }) => {
                available = available.max(a);
                continue;
            }
            Err(e) => unreachable!("component search only reports capacity: {e}"),
        };
        let mut assignment = Vec::with_capacity(n);
        for &w in &comp {
            let take = vst.capacity(w).min(n - assignment.len());
            assignment.extend(core::iter::repeat_n(w, take));
        }
        let partition = Partition::from_assignment(&circuit, assignment, vst.worker_count());
        let layout = baseline_layout(&partition, &vst)?;
        let routing = route_with(&circuit, &partition, &layout, &vst, opts.seed, &opts.router)?;
        let fidelity = estimate_routing_fidelity(&routing, &vst, config)?;
        let so = routing.total_so;
        return Ok(Plan {
            kind: PlanKind::Baseline,
            circuit,
            candidate,
            sq: n,
            partition,
            so,
            evaluations: alloc::vec![Evaluation {
                candidate: idx,
                so: Some(so),
                fidelity: Some(fidelity.f),
                point: None,
                sq: Some(n),
                cut_cost: None,
            }],
            vst,
            routing,
            fidelity,
        });
    }
    Err(OptimizeError::Infeasible {
        needed: n,
        available,
    })
}

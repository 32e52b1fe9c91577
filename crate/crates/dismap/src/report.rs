//! Machine-readable (JSON) and human-readable run reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use dismap_core::circuit::Circuit;
use dismap_core::hardware::SystemConfig;
use dismap_core::optimizer::{Plan, PlanKind};
use dismap_core::verifier::Violation;
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Report {
    pub schema: u32,
    pub label: String,
    pub seed: u64,
    pub input: InputSummary,
    pub links: Vec<LinkReport>,
    pub budget: usize,
    pub workers: Vec<WorkerReport>,
    pub totals: Totals,
    pub evaluations: Vec<EvaluationReport>,
    pub violations: Vec<String>,
    /// Result of the statevector oracle when it ran.
    pub equivalent: Option<bool>,
    /// Wall-clock seconds per stage; excluded from reproducibility checks.
    pub timing: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct InputSummary {
    pub circuit: String,
    pub qubits: usize,
    pub gates: usize,
    pub two_qubit_gates: usize,
    /// Gate counts of the routed (lowered) circuit by kind.
    pub gate_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct LinkReport {
    pub a: String,
    pub b: String,
    pub sr: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct WorkerReport {
    pub id: usize,
    pub capacity: usize,
    pub logical_qubits: Vec<usize>,
    pub swaps: usize,
    pub epr_uses: usize,
    pub routed_gates: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Totals {
    pub so: usize,
    pub epr_uses: usize,
    pub cross_gates: usize,
    pub fidelity: f64,
    pub fidelity_factors: FidelityFactors,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct FidelityFactors {
    pub single_qubit: f64,
    pub two_qubit: f64,
    pub readout: f64,
    pub epr: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvaluationReport {
    pub candidate: usize,
    pub so: Option<usize>,
    pub fidelity: Option<f64>,
    pub budget: Option<usize>,
}

impl Report {
    pub fn new(plan: &Plan, original: &Circuit, seed: u64, violations: &[Violation]) -> Self {
        let mut gate_counts = BTreeMap::new();
        for g in plan.circuit.gates() {
            *gate_counts
                .entry(g.kind.qasm_name().to_string())
                .or_insert(0) += 1;
        }
        let r = &plan.routing;
        let workers = r
            .mapped
            .iter()
            .map(|m| WorkerReport {
                id: m.worker,
                capacity: plan.vst.capacity(m.worker),
                logical_qubits: plan
                    .partition
                    .subcircuits()
                    .iter()
                    .find(|s| s.worker == m.worker)
                    .map(|s| s.qubits.clone())
                    .unwrap_or_default(),
                swaps: m.swap_count,
                epr_uses: m.epr_uses,
                routed_gates: m.gates.len(),
            })
            .collect();
        let f = &plan.fidelity;
        Report {
            schema: SCHEMA_VERSION,
            label: match plan.kind {
                PlanKind::Optimized => "dismap",
                PlanKind::Baseline => "baseline",
            }
            .to_string(),
            seed,
            input: InputSummary {
                circuit: original.name().to_string(),
                qubits: original.n_qubits(),
                gates: original.len(),
                two_qubit_gates: original.two_qubit_count(),
                gate_counts,
            },
            links: plan
                .candidate
                .links
                .iter()
                .map(|l| LinkReport {
                    a: l.a.to_string(),
                    b: l.b.to_string(),
                    sr: l.sr,
                })
                .collect(),
            budget: plan.sq,
            workers,
            totals: Totals {
                so: plan.so,
                epr_uses: r.epr_uses,
                cross_gates: plan.partition.cross_gates().len(),
                fidelity: f.f,
                fidelity_factors: FidelityFactors {
                    single_qubit: f.single_qubit,
                    two_qubit: f.two_qubit,
                    readout: f.readout,
                    epr: f.epr,
                },
            },
            evaluations: plan
                .evaluations
                .iter()
                .map(|e| EvaluationReport {
                    candidate: e.candidate,
                    so: e.so,
                    fidelity: e.fidelity,
                    budget: e.sq,
                })
                .collect(),
            violations: violations.iter().map(|v| v.to_string()).collect(),
            equivalent: None,
            timing: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the timing section removed.
    pub fn to_json_without_timing(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(o) = v.as_object_mut() {
            o.remove("timing");
        }
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn to_text(&self, config: &SystemConfig) -> String {
        let mut s = String::new();
        let i = &self.input;
        let _ = writeln!(
            s,
            "[{}] {} ({} qubits, {} gates, {} two-qubit)",
            self.label, i.circuit, i.qubits, i.gates, i.two_qubit_gates
        );
        let caps: Vec<String> = config
            .workers
            .iter()
            .map(|w| w.n_qubits.to_string())
            .collect();
        let _ = writeln!(
            s,
            "workers: {} (capacities {})",
            config.workers.len(),
            caps.join("/")
        );
        if self.links.is_empty() {
            let _ = writeln!(s, "links: none");
        }
        for l in &self.links {
            let _ = writeln!(s, "link: {} <-> {} (sr {})", l.a, l.b, l.sr);
        }
        let _ = writeln!(s, "qubit budget: {}", self.budget);
        let _ = writeln!(
            s,
            "{:>6} {:>8} {:>8} {:>6} {:>9}  logical qubits",
            "worker", "capacity", "gates", "swaps", "epr_uses"
        );
        for w in &self.workers {
            let _ = writeln!(
                s,
                "{:>6} {:>8} {:>8} {:>6} {:>9}  {:?}",
                w.id, w.capacity, w.routed_gates, w.swaps, w.epr_uses, w.logical_qubits
            );
        }
        let t = &self.totals;
        let _ = writeln!(s, "SWAP overhead: {}", t.so);
        let _ = writeln!(
            s,
            "cross-worker gates: {}, EPR uses: {}",
            t.cross_gates, t.epr_uses
        );
        let ff = &t.fidelity_factors;
        let _ = writeln!(
            s,
            "estimated fidelity: {:.4} (1q {:.4}, 2q {:.4}, readout {:.4}, epr {:.4})",
            t.fidelity, ff.single_qubit, ff.two_qubit, ff.readout, ff.epr
        );
        let evaluated = self.evaluations.iter().filter(|e| e.so.is_some()).count();
        let _ = writeln!(
            s,
            "candidates evaluated: {evaluated} of {}",
            self.evaluations.len()
        );
        if let Some(eq) = self.equivalent {
            let _ = writeln!(
                s,
                "equivalence oracle: {}",
                if eq { "pass" } else { "FAIL" }
            );
        }
        if self.violations.is_empty() {
            let _ = writeln!(s, "violations: none");
        } else {
            for v in &self.violations {
                let _ = writeln!(s, "violation: {v}");
            }
        }
        for (stage, secs) in &self.timing {
            let _ = writeln!(s, "time {stage}: {secs:.3}s");
        }
        s
    }
}

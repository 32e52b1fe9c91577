mod common;

use common::{arb_circuit, graded_line, two_lines};
use dismap_core::circuit::{lower, Circuit, Gate, GateKind};
use dismap_core::hardware::{con_vst, EprCandidate, SystemConfig};
use dismap_core::optimizer::{optimize, OptimizerOptions};
use dismap_core::router::{initial_layout, route, swap_overhead};
use dismap_core::verifier::{check_constraints, equivalence_oracle};
use proptest::prelude::*;

fn graded_pair(n: usize, salt: u64) -> SystemConfig {
    SystemConfig::new(
        vec![graded_line(0, n, salt), graded_line(1, n, salt + 1)],
        0.9,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn routed_plans_are_legal_and_equivalent(c in arb_circuit(2..=10, 45), salt in 0u64..5, seed in 0u64..1000) {
        let config = graded_pair(6, salt);
        let opts = OptimizerOptions { seed, ..OptimizerOptions::default() };
        let plan = optimize(&c, &config, &opts).unwrap();
        prop_assert_eq!(check_constraints(&plan), vec![]);
        prop_assert!(equivalence_oracle(&c, &plan).unwrap());

        let r = &plan.routing;
        prop_assert_eq!(swap_overhead(r), r.total_so);
        prop_assert_eq!(r.swap_table.iter().sum::<usize>(), r.total_so);
        prop_assert_eq!(r.mapped.iter().map(|m| m.swap_count).sum::<usize>(), r.total_so);
        prop_assert_eq!(r.mapped.iter().map(|m| m.epr_uses).sum::<usize>(), r.epr_uses);
        for m in &r.mapped {
            for g in m.gates.iter().filter(|g| g.is_two_qubit()) {
                prop_assert!(plan.vst.is_adjacent(g.gate.qubits[0], g.gate.qubits[1]));
            }
        }
        let epr_swaps = r.routed.iter().filter(|g| {
            g.inserted_swap && plan.vst.edge(g.gate.qubits[0], g.gate.qubits[1]).is_some_and(|e| e.is_epr())
        }).count();
        if plan.partition.cross_gates().is_empty() && epr_swaps == 0 {
            prop_assert_eq!(r.epr_uses, 0);
        }
    }

    #[test]
    fn routing_is_deterministic_per_seed(c in arb_circuit(2..=10, 45), s1 in any::<u64>(), s2 in any::<u64>()) {
        let config = two_lines(6, 0.95);
        let plan = optimize(&c, &config, &OptimizerOptions::default()).unwrap();
        let low = lower(&c);
        let layout = initial_layout(&low, &plan.partition, &plan.vst).unwrap();
        let a = route(&low, &plan.partition, &layout, &plan.vst, s1).unwrap();
        prop_assert_eq!(&a, &route(&low, &plan.partition, &layout, &plan.vst, s1).unwrap());
        for seed in [s1, s2] {
            let mut p = plan.clone();
            p.routing = route(&low, &plan.partition, &layout, &plan.vst, seed).unwrap();
            p.so = p.routing.total_so;
            prop_assert_eq!(check_constraints(&p), vec![]);
            prop_assert!(equivalence_oracle(&c, &p).unwrap());
        }
    }

    #[test]
    fn nothing_follows_a_measurement(c in arb_circuit(2..=10, 45), salt in 0u64..5, seed in 0u64..1000) {
        let plan = optimize(&c, &graded_pair(6, salt), &OptimizerOptions { seed, ..OptimizerOptions::default() }).unwrap();
        let mut measured = vec![false; plan.vst.node_count()];
        for g in &plan.routing.routed {
            for &n in &g.gate.qubits {
                prop_assert!(!measured[n], "node {} used after measurement", n);
            }
            if g.gate.kind == GateKind::Measure {
                measured[g.gate.qubits[0]] = true;
            }
        }
    }

    #[test]
    fn initial_layout_keeps_logicals_on_their_worker(c in arb_circuit(2..=12, 45), salt in 0u64..5) {
        let config = graded_pair(7, salt);
        let plan = optimize(&c, &config, &OptimizerOptions::default()).unwrap();
        let l = &plan.routing.initial_layout;
        for q in 0..c.n_qubits() {
            prop_assert_eq!(plan.vst.worker_of(l.phys(q)), plan.partition.worker_of(q));
        }
    }
}

#[test]
fn ghz_over_linked_lines() {
    let config = two_lines(2, 0.95).with_max_links(1);
    let mut c = Circuit::new("ghz4", 4);
    c.push(Gate::single(GateKind::H, 0)).unwrap();
    for q in 1..4 {
        c.push(Gate::cx(q - 1, q)).unwrap();
    }
    let plan = optimize(&c, &config, &OptimizerOptions::default()).unwrap();
    assert!(check_constraints(&plan).is_empty());
    assert!(equivalence_oracle(&c, &plan).unwrap());
    assert_eq!(plan.partition.cross_gates().len(), 1);
    assert_eq!(plan.routing.epr_uses, 1);
}

#[test]
fn no_links_means_no_epr_edges() {
    let config = two_lines(5, 0.9);
    let vst = con_vst(&config, &EprCandidate::new(Vec::new(), 0)).unwrap();
    assert!(vst.edges().iter().all(|e| !e.is_epr()));
    assert_eq!(vst.node_count(), 10);
}

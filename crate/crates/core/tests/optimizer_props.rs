mod common;

use common::{arb_circuit, graded_line};
use dismap_core::circuit::{lower, Circuit};
use dismap_core::cutter::{sweep, CutError};
use dismap_core::hardware::{con_vst, enumerate_epr_candidates, SystemConfig};
use dismap_core::optimizer::{optimize, OptimizeError, Optimizer, OptimizerOptions, Selection};
use dismap_core::router::{initial_layout, route};
use dismap_core::verifier::check_constraints;
use proptest::prelude::*;

/// SO of one candidate recomputed from the public cutter and router.
fn reevaluate(
    c: &Circuit,
    config: &SystemConfig,
    idx: usize,
    opts: &OptimizerOptions,
) -> Option<usize> {
    let low = lower(c);
    let cand = &enumerate_epr_candidates(config).unwrap()[idx];
    let vst = con_vst(config, cand).unwrap();
    let points = match sweep(&low, &vst, &opts.cut) {
        Ok(p) => p,
        Err(CutError::InsufficientQubits { .. }) => return None,
        Err(e) => panic!("{e}"),
    };
    points
        .iter()
        .map(|p| {
            let layout = initial_layout(&low, &p.partition, &vst).unwrap();
            route(&low, &p.partition, &layout, &vst, opts.seed)
                .unwrap()
                .total_so
        })
        .min()
}

fn k3_pair(salt: u64) -> SystemConfig {
    SystemConfig::new(
        vec![graded_line(0, 5, salt), graded_line(1, 5, salt + 3)],
        0.95,
    )
    .with_max_links(1)
    .with_candidates_per_worker(3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plan_is_exhaustive_minimum(c in arb_circuit(2..=10, 40), salt in 0u64..6, seed in 0u64..100) {
        let config = k3_pair(salt);
        prop_assert_eq!(enumerate_epr_candidates(&config).unwrap().len(), 9);
        let opts = OptimizerOptions { seed, ..OptimizerOptions::default() };
        let plan = optimize(&c, &config, &opts).unwrap();
        let truth: Vec<Option<usize>> = (0..9).map(|i| reevaluate(&c, &config, i, &opts)).collect();
        let logged: Vec<Option<usize>> = plan.evaluations.iter().map(|e| e.so).collect();
        prop_assert_eq!(&logged, &truth);
        prop_assert_eq!(Some(plan.so), truth.iter().flatten().copied().min());

        let mut best = usize::MAX;
        let mut running = Vec::new();
        for so in logged.iter().flatten() {
            best = best.min(*so);
            running.push(best);
        }
        prop_assert!(running.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(running.last().copied(), Some(plan.so));
        let first_best = plan.evaluations.iter().find(|e| e.so == Some(plan.so)).unwrap();
        prop_assert_eq!(first_best.candidate, plan.candidate.index);
    }

    #[test]
    fn larger_candidate_sets_never_hurt(c in arb_circuit(2..=10, 40), salt in 0u64..6) {
        let small = k3_pair(salt).with_candidates_per_worker(2);
        let opts = OptimizerOptions::default();
        let base = optimize(&c, &small, &opts).unwrap().so;
        for bigger in [small.clone().with_candidates_per_worker(3), small.clone().with_max_links(2)] {
            prop_assert!(optimize(&c, &bigger, &opts).unwrap().so <= base);
        }
    }

    #[test]
    fn evaluation_order_does_not_matter(c in arb_circuit(2..=10, 40), salt in 0u64..6) {
        let config = k3_pair(salt).with_max_links(2);
        let opts = OptimizerOptions::default();
        let opt = Optimizer::new(&c, &config, opts).unwrap();
        let mut evals: Vec<_> = (0..opt.candidates().len()).rev().map(|i| opt.evaluate(i).unwrap()).collect();
        let third = evals.len() / 3;
        evals.rotate_left(third);
        prop_assert_eq!(opt.finish(evals).unwrap(), optimize(&c, &config, &opts).unwrap());
    }

    #[test]
    fn fidelity_selection_is_legal_and_not_worse_in_f(c in arb_circuit(2..=8, 30), salt in 0u64..6) {
        let config = k3_pair(salt);
        let by_f = optimize(&c, &config, &OptimizerOptions { selection: Selection::Fidelity, ..Default::default() }).unwrap();
        let by_so = optimize(&c, &config, &OptimizerOptions::default()).unwrap();
        prop_assert!(check_constraints(&by_f).is_empty());
        prop_assert!(by_f.fidelity.f >= by_so.fidelity.f - 1e-15);
    }
}

#[test]
fn over_capacity_is_infeasible() {
    let config = k3_pair(0);
    let c = Circuit::new("wide", 11);
    assert_eq!(
        optimize(&c, &config, &OptimizerOptions::default()).unwrap_err(),
        OptimizeError::Infeasible {
            needed: 11,
            available: 10
        }
    );
}

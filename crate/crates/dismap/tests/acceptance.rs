//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use dismap::cli;
use dismap::config::load_config;
use dismap::optimize_parallel;
use dismap_core::circuit::{
    generate_benchmark, interaction_graph, lower, BenchmarkKind, Circuit, Gate, GateKind,
};
use dismap_core::cutter::{sweep, topo_cutter, CutError, CutOptions};
use dismap_core::hardware::{con_vst, enumerate_epr_candidates, SystemConfig, WorkerSpec};
use dismap_core::optimizer::{baseline, OptimizerOptions, Plan};
use dismap_core::router::{initial_layout, route, RoutedGate, RoutingResult};
use dismap_core::verifier::{
    check_constraints, equivalence_oracle, estimate_fidelity, estimate_routing_fidelity,
    monte_carlo_fidelity,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> SystemConfig {
    load_config(&configs().join(name)).expect("bundled config loads")
}

fn bench(kind: BenchmarkKind, n: usize) -> Circuit {
    generate_benchmark(kind, n, 1).expect("benchmark size is valid")
}

fn run(c: &Circuit, config: &SystemConfig) -> Plan {
    optimize_parallel(c, config, &OptimizerOptions::default(), None).expect("pipeline succeeds")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_circuit(rng: &mut ChaCha8Rng, max_qubits: usize, max_gates: usize) -> Circuit {
    const ONE_Q: [GateKind; 8] = [
        GateKind::H,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
    ];
    const ROT: [GateKind; 3] = [GateKind::Rx, GateKind::Ry, GateKind::Rz];
    let n = rng.random_range(2..=max_qubits);
    let mut c = Circuit::new("fuzz", n);
    let gates = rng.random_range(1..=max_gates);
    let mut measured = 0;
    if rng.random_bool(0.5) {
        measured = rng.random_range(1..=n);
    }
    let body = gates.saturating_sub(measured).max(1);
    for _ in 0..body {
        let q: Vec<usize> = rand::seq::index::sample(rng, n, n.min(3)).into_vec();
        let theta = rng.random_range(-3.2..3.2);
        let g = match rng.random_range(0..10) {
            0..=2 => Gate::single(ONE_Q[rng.random_range(0..ONE_Q.len())], q[0]),
            3 | 4 => Gate::rotation(ROT[rng.random_range(0..ROT.len())], theta, q[0]),
            5 | 6 => Gate::cx(q[0], q[1]),
            7 => Gate::cz(q[0], q[1]),
            8 => Gate::rzz(theta, q[0], q[1]),
            _ if n >= 3 && rng.random_bool(0.5) => Gate::ccx(q[0], q[1], q[2]),
            _ => Gate::swap(q[0], q[1]),
        };
        c.push(g).unwrap();
    }
    for q in 0..measured {
        c.push(Gate::measure(q)).unwrap();
    }
    c
}

fn legality() -> Outcome {
    let start = Instant::now();
    let base = load("3workers.json");
    let mut runs = 0;
    for sr in [0.90, 0.95] {
        let config = base.clone().with_sr(sr);
        for kind in [
            BenchmarkKind::Bv,
            BenchmarkKind::Hwea,
            BenchmarkKind::Qaoa,
            BenchmarkKind::Adder,
        ] {
            for n in [18, 24, 30, 34] {
                let plan = run(&bench(kind, n), &config);
                let v = check_constraints(&plan);
                ensure(v.is_empty(), || {
                    format!("{} n={n} sr={sr}: {:?}", kind.name(), v)
                })?;
                runs += 1;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(120), || format!("took {t:.1?}"))?;
    Ok(format!("{runs} plans, 0 violations, {t:.1?}"))
}

fn equivalence() -> Outcome {
    let start = Instant::now();
    let config = load("2x7.json");
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
    for i in 0..200 {
        let c = random_circuit(&mut rng, 12, 60);
        let opts = OptimizerOptions {
            seed: i,
            ..OptimizerOptions::default()
        };
        let plan =
            optimize_parallel(&c, &config, &opts, None).map_err(|e| format!("case {i}: {e}"))?;
        let eq = equivalence_oracle(&c, &plan).map_err(|e| format!("case {i}: {e}"))?;
        ensure(eq, || {
            format!(
                "case {i} ({} qubits, {} gates) not equivalent",
                c.n_qubits(),
                c.len()
            )
        })?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {t:.1?}"))?;
    Ok(format!("200 circuits equivalent, {t:.1?}"))
}

fn so_pair(kind: BenchmarkKind, n: usize, config: &SystemConfig) -> (usize, usize) {
    let c = bench(kind, n);
    let ours = run(&c, config).so;
    let base = baseline(&c, config, &OptimizerOptions::default())
        .expect("baseline succeeds")
        .so;
    (ours, base)
}

fn hwea_zero_swap() -> Outcome {
    let config = load("3workers.json");
    let mut worst_base = usize::MAX;
    for n in 18..=34 {
        let (ours, base) = so_pair(BenchmarkKind::Hwea, n, &config);
        ensure(ours == 0, || format!("HWEA-{n}: SO {ours}"))?;
        if n >= 24 {
            ensure(base > 0, || format!("HWEA-{n}: baseline SO 0"))?;
            worst_base = worst_base.min(base);
        }
    }
    Ok(format!(
        "SO 0 on 18..=34, baseline SO >= {worst_base} on 24..=34"
    ))
}

fn bv_reduction() -> Outcome {
    let config = load("3workers.json");
    let mut reductions = Vec::new();
    for n in 18..=34 {
        let (ours, base) = so_pair(BenchmarkKind::Bv, n, &config);
        ensure(ours <= base, || format!("BV-{n}: {ours} > baseline {base}"))?;
        reductions.push(if base == 0 {
            0.0
        } else {
            1.0 - ours as f64 / base as f64
        });
    }
    let mean = reductions.iter().sum::<f64>() / reductions.len() as f64;
    ensure(mean >= 0.30, || {
        format!("mean reduction {:.1}%", 100.0 * mean)
    })?;
    Ok(format!(
        "mean reduction {:.1}% over BV 18..=34",
        100.0 * mean
    ))
}

fn scalability() -> Outcome {
    let config = load("4x20.json");
    let mut notes = Vec::new();
    for (kind, n) in [(BenchmarkKind::Adder, 60), (BenchmarkKind::Qaoa, 60)] {
        let start = Instant::now();
        let plan = run(&bench(kind, n), &config);
        let t = start.elapsed();
        ensure(t < Duration::from_secs(60), || {
            format!("{}-{n} took {t:.1?}", kind.name())
        })?;
        ensure(check_constraints(&plan).is_empty(), || {
            format!("{}-{n} has violations", kind.name())
        })?;
        notes.push(format!("{}-{n} SO {} in {t:.1?}", kind.name(), plan.so));
    }
    let mut series = Vec::new();
    for n in [30, 36, 40, 46, 50, 56, 60] {
        series.push(run(&bench(BenchmarkKind::Qaoa, n), &config).so);
    }
    ensure(series.windows(2).all(|w| w[0] < w[1]), || {
        format!("QAOA SO series {series:?} not increasing")
    })?;
    notes.push(format!("QAOA SO {series:?}"));
    Ok(notes.join("; "))
}

fn reevaluate(
    c: &Circuit,
    config: &SystemConfig,
    idx: usize,
    opts: &OptimizerOptions,
) -> Option<usize> {
    let low = lower(c);
    let vst = con_vst(config, &enumerate_epr_candidates(config).unwrap()[idx]).unwrap();
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

fn optimizer_exhaustive() -> Outcome {
    let config = load("2x7.json")
        .with_max_links(1)
        .with_candidates_per_worker(3);
    let n_cand = enumerate_epr_candidates(&config).unwrap().len();
    ensure(n_cand == 9, || format!("{n_cand} candidates"))?;
    let opts = OptimizerOptions::default();
    let mut circuits = vec![
        bench(BenchmarkKind::Qaoa, 12),
        bench(BenchmarkKind::Bv, 12),
        bench(BenchmarkKind::Adder, 10),
        bench(BenchmarkKind::Hwea, 14),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    circuits.extend((0..6).map(|_| random_circuit(&mut rng, 14, 60)));
    for c in &circuits {
        let plan = optimize_parallel(c, &config, &opts, None).map_err(|e| e.to_string())?;
        let truth: Vec<Option<usize>> = (0..9).map(|i| reevaluate(c, &config, i, &opts)).collect();
        let min = truth.iter().flatten().min().copied();
        ensure(Some(plan.so) == min, || {
            format!("{}: SO {} vs exhaustive {min:?}", c.name(), plan.so)
        })?;
        let logged: Vec<Option<usize>> = plan.evaluations.iter().map(|e| e.so).collect();
        ensure(logged == truth, || {
            format!("{}: log {logged:?} vs {truth:?}", c.name())
        })?;
        let mut best = usize::MAX;
        for so in logged.iter().flatten() {
            ensure(*so >= plan.so, || {
                format!("{}: logged {so} below plan {}", c.name(), plan.so)
            })?;
            best = best.min(*so);
        }
        ensure(best == plan.so, || {
            format!("{}: best-so-far ends at {best}", c.name())
        })?;
    }
    Ok(format!(
        "{} instances match exhaustive minimum over 9 candidates",
        circuits.len()
    ))
}

fn brute_force_cross(c: &Circuit) -> u64 {
    let ig = interaction_graph(c).unwrap();
    let n = c.n_qubits();
    (0u32..1 << n)
        .filter(|m| (m.count_ones() as usize) <= 4 && n - m.count_ones() as usize <= 4)
        .map(|m| {
            ig.edges()
                .filter(|&((a, b), _)| (m >> a & 1) != (m >> b & 1))
                .map(|(_, w)| w as u64)
                .sum()
        })
        .min()
        .unwrap()
}

fn partitioner_optimality() -> Outcome {
    let edges: Vec<(usize, usize)> = (1..4).map(|i| (i - 1, i)).collect();
    let config = SystemConfig::new(
        vec![
            WorkerSpec::uniform(0, 4, &edges, 1e-3, 1e-2, 2e-2),
            WorkerSpec::uniform(1, 4, &edges, 1e-3, 1e-2, 2e-2),
        ],
        0.95,
    )
    .with_max_links(1);
    let vst = con_vst(&config, &enumerate_epr_candidates(&config).unwrap()[0]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..50 {
        let c = lower(&random_circuit(&mut rng, 8, 30));
        let ig = interaction_graph(&c).unwrap();
        let got = topo_cutter(&c, &vst, &CutOptions::default())
            .unwrap()
            .cross_weight(&ig);
        let want = brute_force_cross(&c);
        ensure(got == want, || {
            format!("case {i}: cut {got}, optimum {want}")
        })?;
    }
    Ok("50/50 cuts optimal".into())
}

fn with_extra(plan: &Plan, g: Gate) -> RoutingResult {
    let r = &plan.routing;
    let mut routed = r.routed.clone();
    routed.push(RoutedGate {
        gate: g,
        inserted_swap: false,
        source: None,
    });
    RoutingResult::assemble(
        routed,
        r.initial_layout.clone(),
        r.final_layout.clone(),
        &plan.vst,
    )
}

fn estimator_consistency() -> Outcome {
    let base = load("2x7.json");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..1000 {
        let c = random_circuit(&mut rng, 8, 25);
        let sr = rng.random_range(0.5..1.0);
        let config = base.clone().with_sr(sr);
        let plan = run(&c, &config);
        let f = estimate_fidelity(&plan, &config).unwrap().f;
        ensure(f > 0.0 && f <= 1.0, || format!("case {i}: F {f}"))?;
        let node = plan
            .routing
            .final_layout
            .phys(rng.random_range(0..c.n_qubits()));
        let one = estimate_routing_fidelity(
            &with_extra(&plan, Gate::single(GateKind::X, node)),
            &plan.vst,
            &config,
        )
        .unwrap();
        ensure(one.f < f, || format!("case {i}: 1q gate did not lower F"))?;
        let e = &plan.vst.edges()[rng.random_range(0..plan.vst.edges().len())];
        let two =
            estimate_routing_fidelity(&with_extra(&plan, Gate::cx(e.a, e.b)), &plan.vst, &config)
                .unwrap();
        ensure(two.f < f, || format!("case {i}: 2q gate did not lower F"))?;
        let hi_sr = sr + (1.0 - sr) * rng.random::<f64>();
        let hi = config.clone().with_sr(hi_sr);
        let mut cand = plan.candidate.clone();
        cand.links.iter_mut().for_each(|l| l.sr = hi_sr);
        let raised =
            estimate_routing_fidelity(&plan.routing, &con_vst(&hi, &cand).unwrap(), &hi).unwrap();
        ensure(raised.f >= f, || format!("case {i}: raising SR lowered F"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_sigma = 0.0f64;
    for i in 0..3 {
        let c = random_circuit(&mut rng, 6, 25);
        let plan = run(&c, &base);
        let mc = monte_carlo_fidelity(&plan, &base, 100_000, i).unwrap();
        let sigma = (mc.no_failure - mc.analytic_no_failure).abs() / mc.no_failure_std_error;
        ensure(sigma <= 4.0, || {
            format!("MC case {i}: {sigma:.2} sigma off")
        })?;
        worst_sigma = worst_sigma.max(sigma);
    }

    let ladder = Circuit::from_gates(
        "ladder",
        8,
        [Gate::single(GateKind::H, 0)]
            .into_iter()
            .chain((0..7).map(|q| Gate::cx(q, q + 1)))
            .chain((0..8).map(Gate::measure)),
    )
    .unwrap();
    let quiet = base.clone().with_sr(0.99);
    let mut loud = base.clone().with_sr(0.8);
    for w in &mut loud.workers {
        w.err_2q.values_mut().for_each(|e| *e *= 3.0);
    }
    let (a, b) = (run(&ladder, &quiet), run(&ladder, &loud));
    ensure(a.fidelity.f > b.fidelity.f + 0.05, || {
        format!("plans too close: {} vs {}", a.fidelity.f, b.fidelity.f)
    })?;
    let ma = monte_carlo_fidelity(&a, &quiet, 100_000, 1).unwrap();
    let mb = monte_carlo_fidelity(&b, &loud, 100_000, 1).unwrap();
    ensure(ma.fidelity > mb.fidelity, || {
        format!("ranking flipped: MC {} vs {}", ma.fidelity, mb.fidelity)
    })?;
    Ok(format!(
        "1000 monotonicity cases; MC within {worst_sigma:.2} sigma; ranking F {:.3}>{:.3} matches MC {:.3}>{:.3}",
        a.fidelity.f, b.fidelity.f, ma.fidelity, mb.fidelity
    ))
}

fn report_json(args: &[&str], threads: usize) -> Result<String, String> {
    let cfg = configs().join("3workers.json");
    let mut argv: Vec<String> = vec![
        "dismap".into(),
        "--config".into(),
        cfg.display().to_string(),
    ];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.extend(["--threads".into(), threads.to_string()]);
    let parsed = cli::Args::try_parse_from(&argv).map_err(|e| e.to_string())?;
    let out = cli::execute(&parsed)
        .map_err(|(f, _)| format!("{argv:?}: exit {} {}", f.code, f.message))?;
    Ok(out.report.to_json_without_timing())
}

fn determinism() -> Outcome {
    let cases: [&[&str]; 3] = [
        &["--bench", "bv", "--qubits", "18", "--seed", "4"],
        &[
            "--bench", "qaoa", "--qubits", "24", "--seed", "9", "--sr", "0.9",
        ],
        &["--bench", "adder", "--qubits", "20", "--baseline"],
    ];
    for args in cases {
        let mut reports = Vec::new();
        for threads in [1, 1, 8, 8] {
            reports.push(report_json(args, threads)?);
        }
        ensure(reports.windows(2).all(|w| w[0] == w[1]), || {
            format!("{args:?}: reports differ")
        })?;
    }
    Ok("byte-identical reports at --threads 1 and 8".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("legality", legality),
        ("semantic equivalence", equivalence),
        ("HWEA zero SWAP", hwea_zero_swap),
        ("BV SWAP reduction", bv_reduction),
        ("scalability", scalability),
        ("optimizer exhaustive", optimizer_exhaustive),
        ("partitioner optimality", partitioner_optimality),
        ("estimator consistency", estimator_consistency),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS [{t:.1?}] {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL [{t:.1?}] {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion check(s) failed");
        ExitCode::FAILURE
    }
}

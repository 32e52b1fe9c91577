use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dismap_core::circuit::parse_qasm;
use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn dismap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dismap"))
        .args(args)
        .env_remove("DISMAP_SEED")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn missing_config_exits_1() {
    let o = dismap(&[
        "--config",
        "/nonexistent/system.json",
        "--bench",
        "bv",
        "--qubits",
        "4",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cannot read config"), "{}", stderr(&o));
}

#[test]
fn invalid_config_lists_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(
        &p,
        r#"{"default_sr": 1.5, "workers": [{"id": 0, "qubits": 2, "edges": [[0, 3]],
            "err_1q": [0.1, 0.1], "err_2q": {"0-3": 0.1}, "err_readout": [0.1]}]}"#,
    )
    .unwrap();
    let o = dismap(&[
        "--config",
        p.to_str().unwrap(),
        "--bench",
        "bv",
        "--qubits",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("1.5"), "{err}");
    assert!(err.contains("err_readout"), "{err}");
    assert!(err.matches("\n  - ").count() >= 2, "{err}");
}

#[test]
fn unparsable_circuit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.qasm");
    std::fs::write(&p, "OPENQASM 2.0;\nqreg q[2];\ncx q[0],q[5];\n").unwrap();
    let o = dismap(&[
        "--config",
        config("2x7.json").to_str().unwrap(),
        "--circuit",
        p.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("c.qasm"), "{}", stderr(&o));
}

#[test]
fn bad_flags_exit_2() {
    let o = dismap(&[
        "--config",
        config("2x7.json").to_str().unwrap(),
        "--bench",
        "bv",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = dismap(&[
        "--config",
        config("2x7.json").to_str().unwrap(),
        "--bench",
        "bv",
        "--qubits",
        "4",
        "--max-links",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oversized_circuit_exits_3() {
    let o = dismap(&[
        "--config",
        config("2x7.json").to_str().unwrap(),
        "--bench",
        "bv",
        "--qubits",
        "15",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("15"), "{}", stderr(&o));
}

#[test]
fn full_run_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let partition = dir.path().join("partition.json");
    let out = dir.path().join("out");
    let o = dismap(&[
        "--config",
        config("2x7.json").to_str().unwrap(),
        "--bench",
        "qaoa",
        "--qubits",
        "10",
        "--verify",
        "--report",
        report.to_str().unwrap(),
        "--emit-partition",
        partition.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("equivalence oracle: pass"), "{text}");
    assert!(text.contains("violations: none"), "{text}");

    let r = read_json(&report);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["label"], "dismap");
    assert_eq!(r["equivalent"], true);
    assert!(r["violations"].as_array().unwrap().is_empty());
    let workers = r["workers"].as_array().unwrap();
    let sum = |k: &str| workers.iter().map(|w| w[k].as_u64().unwrap()).sum::<u64>();
    assert_eq!(r["totals"]["so"].as_u64().unwrap(), sum("swaps"));
    assert_eq!(r["totals"]["epr_uses"].as_u64().unwrap(), sum("epr_uses"));
    let ff = &r["totals"]["fidelity_factors"];
    let product: f64 = ["single_qubit", "two_qubit", "readout", "epr"]
        .iter()
        .map(|k| ff[k].as_f64().unwrap())
        .product();
    assert!((product - r["totals"]["fidelity"].as_f64().unwrap()).abs() < 1e-12);
    let qubits: usize = workers
        .iter()
        .map(|w| w["logical_qubits"].as_array().unwrap().len())
        .sum();
    assert_eq!(qubits, 10);
    for stage in ["load", "circuit", "optimize", "verify"] {
        assert!(r["timing"][stage].is_number(), "missing timing {stage}");
    }

    let p = read_json(&partition);
    assert_eq!(p["assignment"].as_array().unwrap().len(), 10);

    let manifest = read_json(&out.join("manifest.json"));
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 2);
    let mut swaps = 0;
    for f in files {
        let text = std::fs::read_to_string(out.join(f.as_str().unwrap())).unwrap();
        swaps += text.matches("// inserted").count();
        parse_qasm(&text).expect("worker file is valid QASM");
    }
    assert_eq!(swaps as u64, r["totals"]["so"].as_u64().unwrap());
    assert_eq!(manifest["swap_tags"].as_array().unwrap().len(), swaps);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let cfg = config("3workers.json");
    let base = [
        "--config",
        cfg.to_str().unwrap(),
        "--bench",
        "qaoa",
        "--qubits",
        "12",
    ];
    let o = Command::new(env!("CARGO_BIN_EXE_dismap"))
        .args(base)
        .args(["--report", a.to_str().unwrap()])
        .env("DISMAP_SEED", "77")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let o = dismap(
        &[
            &base[..],
            &["--seed", "77", "--report", b.to_str().unwrap()],
        ]
        .concat(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let (ra, rb) = (read_json(&a), read_json(&b));
    assert_eq!(ra["seed"], 77);
    assert_eq!(without_timing(ra), without_timing(rb));
}

#[test]
fn reports_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("3workers.json");
    let mut reports = Vec::new();
    for (i, threads) in ["1", "8", "1", "3"].iter().enumerate() {
        let p = dir.path().join(format!("r{i}.json"));
        let o = dismap(&[
            "--config",
            cfg.to_str().unwrap(),
            "--bench",
            "bv",
            "--qubits",
            "20",
            "--seed",
            "3",
            "--threads",
            threads,
            "--report",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        reports.push(serde_json::to_string(&without_timing(read_json(&p))).unwrap());
    }
    assert!(reports.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn baseline_matches_on_a_single_uniform_worker() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.json");
    std::fs::write(
        &cfg,
        r#"{"default_sr": 0.95, "workers": [{"id": 0, "qubits": 4, "edges": [[0, 1], [1, 2], [2, 3]],
            "err_1q": [0.001, 0.001, 0.001, 0.001], "err_2q": {"0-1": 0.01, "1-2": 0.01, "2-3": 0.01},
            "err_readout": [0.02, 0.02, 0.02, 0.02]}]}"#,
    )
    .unwrap();
    let qasm = dir.path().join("toy.qasm");
    std::fs::write(
        &qasm,
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\ncreg c[4];\nh q[0];\ncx q[0],q[1];\ncx q[1],q[2];\ncx q[2],q[3];\ncx q[0],q[3];\nmeasure q -> c;\n",
    )
    .unwrap();
    let mut so = Vec::new();
    for extra in [&[][..], &["--baseline"][..]] {
        let report = dir.path().join(format!("r{}.json", extra.len()));
        let args = [
            &[
                "--config",
                cfg.to_str().unwrap(),
                "--circuit",
                qasm.to_str().unwrap(),
                "--report",
                report.to_str().unwrap(),
            ][..],
            extra,
        ]
        .concat();
        let o = dismap(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        let r = read_json(&report);
        assert_eq!(
            r["label"],
            if extra.is_empty() {
                "dismap"
            } else {
                "baseline"
            }
        );
        so.push(r["totals"]["so"].as_u64().unwrap());
    }
    assert_eq!(so[0], so[1]);
}

#[test]
fn fidelity_selection_runs() {
    let o = dismap(&[
        "--config",
        config("2x7.json").to_str().unwrap(),
        "--bench",
        "hwea",
        "--qubits",
        "9",
        "--select",
        "fidelity",
        "--restarts",
        "2",
        "--sr",
        "0.9",
        "--k",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("sr 0.9"), "{text}");
}

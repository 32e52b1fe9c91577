//! Per-worker OpenQASM output and its JSON manifest.
//!
//! Each worker file declares the worker's full register. Gates on an EPR
//! edge cannot be expressed on one device and appear as `// remote` comments
//! in the file of the worker they are attributed to; inserted SWAPs carry a
//! trailing `// inserted` tag.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use dismap_core::circuit::{Gate, GateKind};
use dismap_core::hardware::VirtualSystemTopology;
use dismap_core::optimizer::Plan;
use dismap_core::router::MappedSubcircuit;
use serde::Serialize;

#[derive(Debug, Serialize)]
struct Manifest {
    schema: u32,
    circuit: String,
    files: Vec<String>,
    initial_layout: Vec<String>,
    final_layout: Vec<String>,
    /// Positions of inserted SWAPs in the global routed list.
    swap_tags: Vec<usize>,
    swap_table: Vec<usize>,
    epr_uses: Vec<usize>,
    links: Vec<[String; 2]>,
}

#[derive(Debug, Serialize)]
struct PartitionFile {
    circuit: String,
    budget: usize,
    assignment: Vec<usize>,
    subcircuits: Vec<SubcircuitFile>,
    cross_gates: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct SubcircuitFile {
    worker: usize,
    qubits: Vec<usize>,
    gates: Vec<usize>,
}

fn write_local(s: &mut String, g: &Gate, local: &[usize]) {
    if g.kind == GateKind::Measure {
        let _ = writeln!(s, "measure q[{0}] -> c[{0}];", local[0]);
        return;
    }
    s.push_str(g.kind.qasm_name());
    if !g.params.is_empty() {
        let p: Vec<String> = g.params.iter().map(|x| format!("{x:?}")).collect();
        let _ = write!(s, "({})", p.join(","));
    }
    let q: Vec<String> = local.iter().map(|i| format!("q[{i}]")).collect();
    let _ = write!(s, " {};", q.join(","));
}

/// OpenQASM text for one worker's share of the routed output.
pub fn worker_qasm(m: &MappedSubcircuit, vst: &VirtualSystemTopology) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let cap = vst.capacity(m.worker);
    let _ = writeln!(s, "qreg q[{cap}];");
    if m.gates.iter().any(|g| g.gate.kind == GateKind::Measure) {
        let _ = writeln!(s, "creg c[{cap}];");
    }
    for g in &m.gates {
        let remote = g.gate.qubits.iter().any(|&p| vst.worker_of(p) != m.worker);
        if remote {
            let names: Vec<String> = g
                .gate
                .qubits
                .iter()
                .map(|&p| vst.phys(p).to_string())
                .collect();
            let tag = if g.inserted_swap { " inserted" } else { "" };
            let _ = writeln!(
                s,
                "// remote {} {} over EPR link{tag}",
                g.gate.kind,
                names.join(",")
            );
            continue;
        }
        let local: Vec<usize> = g.gate.qubits.iter().map(|&p| vst.phys(p).qubit).collect();
        write_local(&mut s, &g.gate, &local);
        s.push_str(if g.inserted_swap {
            " // inserted\n"
        } else {
            "\n"
        });
    }
    s
}

/// Write `worker<i>.qasm` for every worker and `manifest.json` into `dir`.
/// Returns the written paths.
pub fn write_artifacts(plan: &Plan, dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let r = &plan.routing;
    let mut written = Vec::new();
    let mut files = Vec::new();
    for m in &r.mapped {
        let name = format!("worker{}.qasm", m.worker);
        let path = dir.join(&name);
        std::fs::write(&path, worker_qasm(m, &plan.vst))?;
        files.push(name);
        written.push(path);
    }
    let show =
        |l: &[usize]| -> Vec<String> { l.iter().map(|&p| plan.vst.phys(p).to_string()).collect() };
    let manifest = Manifest {
        schema: crate::report::SCHEMA_VERSION,
        circuit: plan.circuit.name().to_string(),
        files,
        initial_layout: show(r.initial_layout.as_slice()),
        final_layout: show(r.final_layout.as_slice()),
        swap_tags: r
            .routed
            .iter()
            .enumerate()
            .filter(|(_, g)| g.inserted_swap)
            .map(|(i, _)| i)
            .collect(),
        swap_table: r.swap_table.clone(),
        epr_uses: r.mapped.iter().map(|m| m.epr_uses).collect(),
        links: plan
            .candidate
            .links
            .iter()
            .map(|l| [l.a.to_string(), l.b.to_string()])
            .collect(),
    };
    let path = dir.join("manifest.json");
    std::fs::write(
        &path,
        serde_json::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;
    written.push(path);
    Ok(written)
}

/// JSON description of the chosen partition.
pub fn partition_json(plan: &Plan) -> String {
    let p = &plan.partition;
    let file = PartitionFile {
        circuit: plan.circuit.name().to_string(),
        budget: plan.sq,
        assignment: p.assignment().to_vec(),
        subcircuits: p
            .subcircuits()
            .iter()
            .map(|s| SubcircuitFile {
                worker: s.worker,
                qubits: s.qubits.clone(),
                gates: s.gates.clone(),
            })
            .collect(),
        cross_gates: p.cross_gates().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("partition serializes")
}

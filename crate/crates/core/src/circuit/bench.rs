//! Benchmark circuit families: Bernstein-Vazirani, hardware-efficient ansatz,
//! depth-1 QAOA MaxCut on a random 3-regular graph, and a Cuccaro
//! ripple-carry adder. All generators are deterministic in `(n_qubits, seed)`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Circuit, Gate, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    Bv,
    Hwea,
    Qaoa,
    Adder,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::Bv => "bv",
            BenchmarkKind::Hwea => "hwea",
            BenchmarkKind::Qaoa => "qaoa",
            BenchmarkKind::Adder => "adder",
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bv" => Ok(BenchmarkKind::Bv),
            "hwea" => Ok(BenchmarkKind::Hwea),
            "qaoa" => Ok(BenchmarkKind::Qaoa),
            "adder" => Ok(BenchmarkKind::Adder),
            _ => Err(BenchmarkError::UnknownKind),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchmarkError {
    #[error("unknown benchmark family (expected bv, hwea, qaoa or adder)")]
    UnknownKind,
    #[error("{kind} needs at least {min} qubits, got {got}")]
    TooFewQubits {
        kind: BenchmarkKind,
        min: usize,
        got: usize,
    },
    #[error("{kind} needs an even qubit count, got {got}")]
    OddQubitCount { kind: BenchmarkKind, got: usize },
}

/// Generate one member of a benchmark family.
pub fn generate_benchmark(
    kind: BenchmarkKind,
    n_qubits: usize,
    seed: u64,
) -> Result<Circuit, BenchmarkError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min = match kind {
        BenchmarkKind::Bv | BenchmarkKind::Hwea => 2,
        BenchmarkKind::Qaoa | BenchmarkKind::Adder => 4,
    };
    if n_qubits < min {
        return Err(BenchmarkError::TooFewQubits {
            kind,
            min,
            got: n_qubits,
        });
    }
    if matches!(kind, BenchmarkKind::Qaoa | BenchmarkKind::Adder) && n_qubits % 2 == 1 {
        return Err(BenchmarkError::OddQubitCount {
            kind,
            got: n_qubits,
        });
    }
    let mut c = match kind {
        BenchmarkKind::Bv => {
            let secret: Vec<bool> = (0..n_qubits - 1).map(|_| rng.random_bool(0.5)).collect();
            bernstein_vazirani(&secret)
        }
        BenchmarkKind::Hwea => hwea(n_qubits, 1, &mut rng),
        BenchmarkKind::Qaoa => {
            let edges = random_regular_graph(n_qubits, 3, &mut rng);
            let gamma = rng.random::<f64>() * PI;
            let beta = rng.random::<f64>() * PI / 2.0;
            qaoa(n_qubits, &edges, gamma, beta)
        }
        BenchmarkKind::Adder => cuccaro_adder((n_qubits - 2) / 2, &mut rng),
    };
    c.set_name(format!("{}_{}", kind.name(), n_qubits));
    Ok(c)
}

fn push(c: &mut Circuit, g: Gate) {
    c.push(g).expect("generator emits valid gates");
}

/// BV over `secret.len()` data qubits plus one ancilla (the last qubit).
pub fn bernstein_vazirani(secret: &[bool]) -> Circuit {
    let n = secret.len() + 1;
    let anc = n - 1;
    let mut c = Circuit::new("bv", n);
    for q in 0..anc {
        push(&mut c, Gate::single(GateKind::H, q));
    }
    push(&mut c, Gate::single(GateKind::X, anc));
    push(&mut c, Gate::single(GateKind::H, anc));
    for (q, _) in secret.iter().enumerate().filter(|(_, &b)| b) {
        push(&mut c, Gate::cx(q, anc));
    }
    for q in 0..anc {
        push(&mut c, Gate::single(GateKind::H, q));
    }
    for q in 0..anc {
        push(&mut c, Gate::measure(q));
    }
    c
}

fn hwea(n: usize, layers: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let mut c = Circuit::new("hwea", n);
    for _ in 0..layers {
        for q in 0..n {
            push(
                &mut c,
                Gate::rotation(GateKind::Ry, rng.random::<f64>() * 2.0 * PI, q),
            );
        }
        for q in 0..n {
            push(
                &mut c,
                Gate::rotation(GateKind::Rz, rng.random::<f64>() * 2.0 * PI, q),
            );
        }
        for q in 0..n - 1 {
            push(&mut c, Gate::cx(q, q + 1));
        }
    }
    c
}

fn qaoa(n: usize, edges: &[(usize, usize)], gamma: f64, beta: f64) -> Circuit {
    let mut c = Circuit::new("qaoa", n);
    for q in 0..n {
        push(&mut c, Gate::single(GateKind::H, q));
    }
    for &(a, b) in edges {
        push(&mut c, Gate::rzz(2.0 * gamma, a, b));
    }
    for q in 0..n {
        push(&mut c, Gate::rotation(GateKind::Rx, 2.0 * beta, q));
    }
    for q in 0..n {
        push(&mut c, Gate::measure(q));
    }
    c
}

/// Uniform-ish random `degree`-regular simple graph via the pairing model
/// with rejection. Edges are returned as sorted `(a, b)` pairs, `a < b`.
pub fn random_regular_graph<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Vec<(usize, usize)> {
    assert!(
        degree < n && (n * degree).is_multiple_of(2),
        "no {degree}-regular graph on {n} vertices"
    );
    let mut stubs: Vec<usize> = (0..n)
        .flat_map(|v| core::iter::repeat_n(v, degree))
        .collect();
    loop {
        stubs.shuffle(rng);
        let mut edges: Vec<(usize, usize)> = stubs
            .chunks_exact(2)
            .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
            .collect();
        if edges.iter().any(|&(a, b)| a == b) {
            continue;
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        return edges;
    }
}

/// Cuccaro ripple-carry adder on `bits`-bit operands with interleaved
/// layout `c0, b0, a0, b1, a1, ..., z`; operand values are drawn from `rng`.
fn cuccaro_adder(bits: usize, rng: &mut ChaCha8Rng) -> Circuit {
    let n = 2 * bits + 2;
    let b = |i: usize| 1 + 2 * i;
    let a = |i: usize| 2 + 2 * i;
    let z = n - 1;
    let mut c = Circuit::new("adder", n);
    for i in 0..bits {
        if rng.random_bool(0.5) {
            push(&mut c, Gate::single(GateKind::X, a(i)));
        }
        if rng.random_bool(0.5) {
            push(&mut c, Gate::single(GateKind::X, b(i)));
        }
    }
    let maj = |c: &mut Circuit, x: usize, y: usize, w: usize| {
        push(c, Gate::cx(w, y));
        push(c, Gate::cx(w, x));
        push(c, Gate::ccx(x, y, w));
    };
    let uma = |c: &mut Circuit, x: usize, y: usize, w: usize| {
        push(c, Gate::ccx(x, y, w));
        push(c, Gate::cx(w, x));
        push(c, Gate::cx(x, y));
    };
    let carry_in = |i: usize| if i == 0 { 0 } else { a(i - 1) };
    for i in 0..bits {
        maj(&mut c, carry_in(i), b(i), a(i));
    }
    push(&mut c, Gate::cx(a(bits - 1), z));
    for i in (0..bits).rev() {
        uma(&mut c, carry_in(i), b(i), a(i));
    }
    for i in 0..bits {
        push(&mut c, Gate::measure(b(i)));
    }
    push(&mut c, Gate::measure(z));
    c
}

//! Dense statevector simulation for desk-scale checks.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

type Mat2 = [[Complex64; 2]; 2];

const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// State of `n` qubits; qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> Self {
        assert!(
            n <= MAX_QUBITS,
            "register of {n} qubits exceeds the simulator limit"
        );
        let mut amps = alloc::vec![c(0.0, 0.0); 1 << n];
        amps[0] = c(1.0, 0.0);
        StateVector { n, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn apply_1q(&mut self, m: &Mat2, q: usize) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn apply_cx(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    fn apply_swap(&mut self, a: usize, b: usize) {
        let (ab, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amps.swap(i, (i & !ab) | bb);
            }
        }
    }

    fn apply_diag(&mut self, f: impl Fn(usize) -> Option<Complex64>) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if let Some(p) = f(i) {
                *a *= p;
            }
        }
    }

    /// Apply a gate; measurement and barrier act as identity.
    pub fn apply(&mut self, g: &Gate) {
        let q = &g.qubits;
        match g.kind {
            GateKind::Measure | GateKind::Barrier => {}
            GateKind::Cx => self.apply_cx(q[0], q[1]),
            GateKind::Swap => self.apply_swap(q[0], q[1]),
            GateKind::Cz => {
                let m = (1usize << q[0]) | (1usize << q[1]);
                self.apply_diag(|i| (i & m == m).then_some(c(-1.0, 0.0)));
            }
            GateKind::Ccx => {
                let m = (1usize << q[0]) | (1usize << q[1]);
                let tb = 1usize << q[2];
                for i in 0..self.amps.len() {
                    if i & m == m && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            GateKind::Rzz => {
                let half = g.params[0] / 2.0;
                let (same, diff) = (
                    Complex64::from_polar(1.0, -half),
                    Complex64::from_polar(1.0, half),
                );
                let (a, b) = (q[0], q[1]);
                self.apply_diag(|i| {
                    Some(if ((i >> a) ^ (i >> b)) & 1 == 0 {
                        same
                    } else {
                        diff
                    })
                });
            }
            kind => self.apply_1q(&matrix_1q(kind, g.params.first().copied()), q[0]),
        }
    }

    /// Apply Pauli `code` (0 = I, 1 = X, 2 = Y, 3 = Z) to qubit `q`.
    pub fn apply_pauli(&mut self, code: u8, q: usize) {
        let kind = match code {
            0 => return,
            1 => GateKind::X,
            2 => GateKind::Y,
            _ => GateKind::Z,
        };
        self.apply_1q(&matrix_1q(kind, None), q);
    }
}

fn matrix_1q(kind: GateKind, theta: Option<f64>) -> Mat2 {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let h = c(FRAC_1_SQRT_2, 0.0);
    let t = theta.unwrap_or(0.0);
    let (cos, sin) = (libm::cos(t / 2.0), libm::sin(t / 2.0));
    match kind {
        GateKind::H => [[h, h], [h, -h]],
        GateKind::X => [[z, one], [one, z]],
        GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
        GateKind::Z => [[one, z], [z, -one]],
        GateKind::S => [[one, z], [z, c(0.0, 1.0)]],
        GateKind::Sdg => [[one, z], [z, c(0.0, -1.0)]],
        GateKind::T => [[one, z], [z, c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)]],
        GateKind::Tdg => [[one, z], [z, c(FRAC_1_SQRT_2, -FRAC_1_SQRT_2)]],
        GateKind::Rx => [[c(cos, 0.0), c(0.0, -sin)], [c(0.0, -sin), c(cos, 0.0)]],
        GateKind::Ry => [[c(cos, 0.0), c(-sin, 0.0)], [c(sin, 0.0), c(cos, 0.0)]],
        GateKind::Rz => [
            [Complex64::from_polar(1.0, -t / 2.0), z],
            [z, Complex64::from_polar(1.0, t / 2.0)],
        ],
        other => unreachable!("{other} is not a single-qubit unitary"),
    }
}

/// Phase-insensitive closeness: `|<a|b>| >= 1 - tol` for normalized states.
pub fn equal_up_to_phase(a: &StateVector, b: &StateVector, tol: f64) -> bool {
    a.inner(b).norm() >= 1.0 - tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_state() {
        let mut s = StateVector::zero(2);
        s.apply(&Gate::single(GateKind::H, 0));
        s.apply(&Gate::cx(0, 1));
        let a = s.amplitudes();
        assert!((a[0].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((a[3].re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }

    #[test]
    fn swap_moves_excitation() {
        let mut s = StateVector::zero(3);
        s.apply(&Gate::single(GateKind::X, 0));
        s.apply(&Gate::swap(0, 2));
        assert!((s.amplitudes()[4].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ccx_flips_only_on_both_controls() {
        let mut s = StateVector::zero(3);
        s.apply(&Gate::single(GateKind::X, 0));
        s.apply(&Gate::ccx(0, 1, 2));
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-12);
        s.apply(&Gate::single(GateKind::X, 1));
        s.apply(&Gate::ccx(0, 1, 2));
        assert!((s.amplitudes()[7].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn global_phase_ignored() {
        let mut a = StateVector::zero(1);
        a.apply(&Gate::single(GateKind::X, 0));
        let mut b = StateVector::zero(1);
        b.apply(&Gate::single(GateKind::Y, 0));
        assert!(equal_up_to_phase(&a, &b, 1e-12));
        assert!(!equal_up_to_phase(&a, &StateVector::zero(1), 1e-12));
    }
}

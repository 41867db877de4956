use num_complex::Complex64 as C64;

use super::gates::{single_qubit_matrix, two_qubit_matrix, Mat2, Mat4};
use super::SimError;
use crate::circuit::Gate;

/// Dense pure state. Bit `k` of a basis index is the value of qubit `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<C64>,
}

/// Inserts a zero bit at position `pos` of `k`.
#[inline]
fn insert_zero(k: usize, pos: usize) -> usize {
    let low = k & ((1 << pos) - 1);
    ((k >> pos) << (pos + 1)) | low
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> StateVector {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[0] = C64::new(1.0, 0.0);
        StateVector { num_qubits, amps }
    }

    /// Wraps raw amplitudes; the vector must have length `2^n` and unit norm.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<StateVector, SimError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(SimError::BadAmplitudes(format!("length {len} is not a power of two")));
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(SimError::BadAmplitudes(format!("norm² {norm} differs from 1")));
        }
        Ok(StateVector {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Returns the state after `gate`, leaving `self` untouched.
    pub fn apply_gate(&self, gate: &Gate) -> Result<StateVector, SimError> {
        let mut next = self.clone();
        next.apply_gate_mut(gate)?;
        Ok(next)
    }

    /// Applies a unitary gate in place. Barriers are no-ops.
    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<(), SimError> {
        if gate.is_barrier() {
            return Ok(());
        }
        if !gate.kind.is_unitary() {
            return Err(SimError::NonUnitary(gate.kind));
        }
        for &q in &gate.qubits {
            if q >= self.num_qubits {
                return Err(SimError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Some(m) = single_qubit_matrix(gate.kind, &gate.params) {
            self.apply_single(gate.qubits[0], &m);
        } else if let Some(m) = two_qubit_matrix(gate.kind, &gate.params) {
            self.apply_two(gate.qubits[0], gate.qubits[1], &m);
        }
        Ok(())
    }

    pub fn apply_single(&mut self, qubit: usize, m: &Mat2) {
        let bit = 1 << qubit;
        for k in 0..self.amps.len() / 2 {
            let i0 = insert_zero(k, qubit);
            let i1 = i0 | bit;
            let (a0, a1) = (self.amps[i0], self.amps[i1]);
            self.amps[i0] = m[0][0] * a0 + m[0][1] * a1;
            self.amps[i1] = m[1][0] * a0 + m[1][1] * a1;
        }
    }

    /// Applies `m` in the `|a b⟩` basis, `a` being the more significant local bit.
    pub fn apply_two(&mut self, a: usize, b: usize, m: &Mat4) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (ba, bb) = (1 << a, 1 << b);
        for k in 0..self.amps.len() / 4 {
            let base = insert_zero(insert_zero(k, lo), hi);
            let idx = [base, base | bb, base | ba, base | ba | bb];
            let v = idx.map(|i| self.amps[i]);
            for (row, &i) in idx.iter().enumerate() {
                self.amps[i] = m[row][0] * v[0] + m[row][1] * v[1] + m[row][2] * v[2] + m[row][3] * v[3];
            }
        }
    }

    /// Probability of reading 1 on `qubit`.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let bit = 1 << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `qubit` onto `outcome` and renormalizes. Returns the
    /// probability of that outcome; a zero-probability projection leaves the
    /// state unnormalized (all zero on the kept half).
    pub fn project(&mut self, qubit: usize, outcome: bool) -> f64 {
        let bit = 1 << qubit;
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                p += a.norm_sqr();
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        if p > 0.0 {
            let scale = 1.0 / p.sqrt();
            for a in &mut self.amps {
                *a *= scale;
            }
        }
        p
    }

    /// Flips `qubit` (Pauli X).
    pub fn flip(&mut self, qubit: usize) {
        let bit = 1 << qubit;
        for k in 0..self.amps.len() / 2 {
            let i0 = insert_zero(k, qubit);
            self.amps.swap(i0, i0 | bit);
        }
    }

    /// Appends a fresh `|0⟩` qubit as the most significant bit.
    pub fn push_qubit(&mut self) {
        self.amps.resize(self.amps.len() * 2, C64::new(0.0, 0.0));
        self.num_qubits += 1;
    }

    /// Removes `qubit`, which must already be projected onto `outcome`.
    /// Higher qubits shift down by one.
    pub fn remove_qubit(&mut self, qubit: usize, outcome: bool) {
        let bit = if outcome { 1 << qubit } else { 0 };
        let half = self.amps.len() / 2;
        let amps: Vec<C64> = (0..half).map(|k| self.amps[insert_zero(k, qubit) | bit]).collect();
        self.amps = amps;
        self.num_qubits -= 1;
    }

    /// Largest amplitude deviation after aligning global phase; `None` when the
    /// states have different widths.
    pub fn distance_up_to_phase(&self, other: &StateVector) -> Option<f64> {
        if self.num_qubits != other.num_qubits {
            return None;
        }
        let (pivot, _) = self
            .amps
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr()))?;
        let (a, b) = (self.amps[pivot], other.amps[pivot]);
        if b.norm() == 0.0 {
            return Some(a.norm());
        }
        let rot = (a / b) / (a / b).norm();
        Some(
            self.amps
                .iter()
                .zip(&other.amps)
                .map(|(x, y)| (x - y * rot).norm())
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn g(kind: GateKind, qubits: &[usize]) -> Gate {
        Gate::unitary(kind, vec![], qubits.to_vec()).unwrap()
    }

    fn close(state: &StateVector, expected: &[(f64, f64)]) -> bool {
        state
            .amplitudes()
            .iter()
            .zip(expected)
            .all(|(a, &(re, im))| (a - C64::new(re, im)).norm() < 1e-12)
    }

    #[test]
    fn hadamard_on_zero() {
        let s = StateVector::zero(1).apply_gate(&g(GateKind::H, &[0])).unwrap();
        assert!(close(&s, &[(FRAC_1_SQRT_2, 0.0), (FRAC_1_SQRT_2, 0.0)]));
    }

    #[test]
    fn cnot_makes_bell_state() {
        let s = StateVector::zero(2)
            .apply_gate(&g(GateKind::H, &[0]))
            .unwrap()
            .apply_gate(&g(GateKind::Cx, &[0, 1]))
            .unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(close(&s, &[(r, 0.0), (0.0, 0.0), (0.0, 0.0), (r, 0.0)]));
    }

    #[test]
    fn swap_moves_excitation() {
        // |01⟩ in |q1 q0⟩ notation: qubit 0 set.
        let s = StateVector::zero(2).apply_gate(&g(GateKind::X, &[0])).unwrap();
        let s = s.apply_gate(&g(GateKind::Swap, &[0, 1])).unwrap();
        assert!(close(&s, &[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]));
    }

    #[test]
    fn controlled_gate_direction() {
        // control on qubit 1, target qubit 0
        let mut s = StateVector::zero(2);
        s.apply_gate_mut(&g(GateKind::X, &[1])).unwrap();
        s.apply_gate_mut(&g(GateKind::Cx, &[1, 0])).unwrap();
        assert!((s.amplitude(3).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_unitary_kinds_are_rejected() {
        let s = StateVector::zero(1);
        assert!(matches!(s.apply_gate(&Gate::reset(0)), Err(SimError::NonUnitary(GateKind::Reset))));
        assert!(s.apply_gate(&Gate::barrier(vec![0])).is_ok());
    }

    #[test]
    fn project_and_remove() {
        let mut s = StateVector::zero(3);
        s.apply_gate_mut(&g(GateKind::H, &[1])).unwrap();
        s.apply_gate_mut(&g(GateKind::X, &[2])).unwrap();
        let p = s.project(1, true);
        assert!((p - 0.5).abs() < 1e-12);
        s.remove_qubit(1, true);
        assert_eq!(s.num_qubits(), 2);
        assert!((s.amplitude(0b10).re - 1.0).abs() < 1e-12);
        s.push_qubit();
        assert_eq!(s.num_qubits(), 3);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_insensitive_distance() {
        let a = StateVector::zero(1).apply_gate(&g(GateKind::H, &[0])).unwrap();
        let mut b = a.clone();
        b.apply_gate_mut(&Gate::unitary(GateKind::Rz, vec![0.0], vec![0]).unwrap()).unwrap();
        b.apply_gate_mut(&g(GateKind::X, &[0])).unwrap();
        b.apply_gate_mut(&g(GateKind::Z, &[0])).unwrap();
        b.apply_gate_mut(&g(GateKind::X, &[0])).unwrap();
        b.apply_gate_mut(&g(GateKind::Z, &[0])).unwrap();
        assert!(a.distance_up_to_phase(&b).unwrap() < 1e-12);
        let c = StateVector::zero(1);
        assert!(a.distance_up_to_phase(&c).unwrap() > 0.1);
    }
}

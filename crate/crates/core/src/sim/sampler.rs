//! Trajectory execution with mid-circuit measurement and reset.
//!
//! Shots that have seen the same measurement history up to global phase share
//! one statevector, so the engine evolves a small set of branches instead of
//! one state per shot. A qubit enters the state at its first operation and
//! leaves it after its last: a measured or reset qubit is removed in its
//! collapsed basis state, and any other dead qubit is measured out, which does
//! not change the statistics of the remaining register. The number of live
//! qubits, not the register width, is what the qubit limit bounds.
//!
//! Randomness is per shot: shot `i` draws from a ChaCha stream keyed by
//! `(seed, i)`, one draw per measurement-like event, so results do not depend
//! on how shots are grouped.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SimError, StateVector, DEFAULT_QUBIT_LIMIT};
use crate::circuit::{Circuit, GateKind};
use crate::dist::Distribution;

/// Histogram of sampled classical bitstrings (classical bit 0 first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub counts: BTreeMap<String, u64>,
    pub shots: u64,
    pub seed: u64,
}

impl ShotCounts {
    /// Counts over the first `num_bits` classical bits only.
    pub fn restricted(&self, num_bits: usize) -> ShotCounts {
        let mut counts = BTreeMap::new();
        for (k, &n) in &self.counts {
            let prefix: String = k.chars().take(num_bits).collect();
            *counts.entry(prefix).or_insert(0) += n;
        }
        ShotCounts {
            counts,
            shots: self.shots,
            seed: self.seed,
        }
    }

    /// Fraction of shots reading 0 on `clbit`; `None` if the bit is absent.
    pub fn zero_frequency(&self, clbit: usize) -> Option<f64> {
        if self.shots == 0 {
            return None;
        }
        let mut zeros = 0;
        for (k, &n) in &self.counts {
            match k.as_bytes().get(clbit) {
                Some(b'0') => zeros += n,
                Some(_) => {}
                None => return None,
            }
        }
        Some(zeros as f64 / self.shots as f64)
    }

    pub fn distribution(&self) -> Distribution {
        Distribution::from_counts(&self.counts)
    }
}

/// Trajectory sampler configuration.
#[derive(Clone, Copy, Debug)]
pub struct Sampler {
    pub qubit_limit: usize,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            qubit_limit: DEFAULT_QUBIT_LIMIT,
        }
    }
}

pub fn sample_shots(circuit: &Circuit, shots: u64, seed: u64) -> Result<ShotCounts, SimError> {
    Sampler::default().sample(circuit, shots, seed)
}

/// Exact `P(0)` of each `(gate position, qubit)` probe, averaged over every
/// measurement branch, evaluated right after the gate at that position.
pub fn branch_averaged_p0(circuit: &Circuit, probes: &[(usize, usize)]) -> Result<Vec<f64>, SimError> {
    Sampler::default().branch_averaged_p0(circuit, probes)
}

impl Sampler {
    pub fn sample(&self, circuit: &Circuit, shots: u64, seed: u64) -> Result<ShotCounts, SimError> {
        let n = shots as usize;
        let rngs = (0..shots)
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                rng
            })
            .collect();
        let mut driver = ShotDriver {
            rngs,
            draws: vec![0.0; n],
            bits: vec![false; n * circuit.num_clbits()],
            width: circuit.num_clbits(),
        };
        if n > 0 {
            evolve(circuit, self.qubit_limit, &mut driver, (0..shots as u32).collect())?;
        }
        let mut counts = BTreeMap::new();
        for shot in 0..n {
            let key: String = driver.bits[shot * driver.width..(shot + 1) * driver.width]
                .iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect();
            *counts.entry(key).or_insert(0) += 1;
        }
        Ok(ShotCounts { counts, shots, seed })
    }

    pub fn branch_averaged_p0(&self, circuit: &Circuit, probes: &[(usize, usize)]) -> Result<Vec<f64>, SimError> {
        let mut driver = ExactDriver {
            probes: probes.to_vec(),
            results: vec![None; probes.len()],
        };
        evolve(circuit, self.qubit_limit, &mut driver, 1.0)?;
        Ok(driver.results.into_iter().map(|r| r.unwrap_or(1.0)).collect())
    }
}

struct Branch<P> {
    state: StateVector,
    payload: P,
}

/// Maps circuit qubits to positions in the live state.
struct Layout {
    slot_of: Vec<Option<usize>>,
    qubit_at: Vec<usize>,
}

impl Layout {
    fn allocate(&mut self, qubit: usize) {
        self.slot_of[qubit] = Some(self.qubit_at.len());
        self.qubit_at.push(qubit);
    }

    fn release(&mut self, qubit: usize) {
        let slot = self.slot_of[qubit].take().expect("released qubit is live");
        self.qubit_at.remove(slot);
        for &q in &self.qubit_at[slot..] {
            *self.slot_of[q].as_mut().expect("live") -= 1;
        }
    }
}

trait Driver {
    type Payload;
    /// Advances every shot's randomness by one draw.
    fn draw(&mut self);
    fn split(&self, payload: Self::Payload, p1: f64) -> [Option<Self::Payload>; 2];
    fn merge(&self, into: &mut Self::Payload, from: Self::Payload);
    fn record(&mut self, payload: &Self::Payload, clbit: usize, outcome: bool);
    fn probe(&mut self, _pos: usize, _branches: &[Branch<Self::Payload>], _layout: &Layout) {}
}

struct ShotDriver {
    rngs: Vec<ChaCha8Rng>,
    draws: Vec<f64>,
    bits: Vec<bool>,
    width: usize,
}

impl Driver for ShotDriver {
    type Payload = Vec<u32>;

    fn draw(&mut self) {
        for (d, rng) in self.draws.iter_mut().zip(&mut self.rngs) {
            *d = rng.gen::<f64>();
        }
    }

    fn split(&self, shots: Vec<u32>, p1: f64) -> [Option<Vec<u32>>; 2] {
        let (ones, zeros): (Vec<u32>, Vec<u32>) = shots.into_iter().partition(|&s| self.draws[s as usize] < p1);
        [(!zeros.is_empty()).then_some(zeros), (!ones.is_empty()).then_some(ones)]
    }

    fn merge(&self, into: &mut Vec<u32>, from: Vec<u32>) {
        into.extend(from);
    }

    fn record(&mut self, shots: &Vec<u32>, clbit: usize, outcome: bool) {
        for &s in shots {
            self.bits[s as usize * self.width + clbit] = outcome;
        }
    }
}

/// Branch probabilities below this are dropped in exact mode.
const NEGLIGIBLE: f64 = 1e-13;

struct ExactDriver {
    probes: Vec<(usize, usize)>,
    results: Vec<Option<f64>>,
}

impl Driver for ExactDriver {
    type Payload = f64;

    fn draw(&mut self) {}

    fn split(&self, weight: f64, p1: f64) -> [Option<f64>; 2] {
        let p1 = p1.clamp(0.0, 1.0);
        [
            (1.0 - p1 > NEGLIGIBLE).then_some(weight * (1.0 - p1)),
            (p1 > NEGLIGIBLE).then_some(weight * p1),
        ]
    }

    fn merge(&self, into: &mut f64, from: f64) {
        *into += from;
    }

    fn record(&mut self, _: &f64, _: usize, _: bool) {}

    fn probe(&mut self, pos: usize, branches: &[Branch<f64>], layout: &Layout) {
        for (i, &(p, qubit)) in self.probes.iter().enumerate() {
            if p != pos {
                continue;
            }
            let Some(slot) = layout.slot_of.get(qubit).copied().flatten() else {
                self.results[i] = Some(1.0);
                continue;
            };
            let total: f64 = branches.iter().map(|b| b.payload).sum();
            let p0: f64 = branches
                .iter()
                .map(|b| b.payload * (1.0 - b.state.prob_one(slot)))
                .sum();
            self.results[i] = Some(p0 / total);
        }
    }
}

/// Positions of each qubit's first and last operation, barriers excluded.
fn usage(circuit: &Circuit) -> Vec<Option<(usize, usize)>> {
    let mut span: Vec<Option<(usize, usize)>> = vec![None; circuit.num_qubits()];
    for (pos, gate) in circuit.gates().iter().enumerate() {
        if gate.is_barrier() {
            continue;
        }
        for &q in &gate.qubits {
            span[q] = Some(match span[q] {
                None => (pos, pos),
                Some((first, _)) => (first, pos),
            });
        }
    }
    span
}

fn evolve<D: Driver>(circuit: &Circuit, limit: usize, driver: &mut D, init: D::Payload) -> Result<(), SimError> {
    let span = usage(circuit);
    let mut layout = Layout {
        slot_of: vec![None; circuit.num_qubits()],
        qubit_at: Vec::new(),
    };
    let mut branches = vec![Branch {
        state: StateVector::zero(0),
        payload: init,
    }];
    for (pos, gate) in circuit.gates().iter().enumerate() {
        if gate.is_barrier() {
            continue;
        }
        for &q in &gate.qubits {
            if layout.slot_of[q].is_none() {
                if layout.qubit_at.len() + 1 > limit {
                    return Err(SimError::QubitLimit {
                        needed: layout.qubit_at.len() + 1,
                        limit,
                    });
                }
                layout.allocate(q);
                for b in &mut branches {
                    b.state.push_qubit();
                }
            }
        }
        match gate.kind {
            GateKind::Measure | GateKind::Reset => {
                let slot = layout.slot_of[gate.qubits[0]].expect("allocated above");
                let clbit = match gate.kind {
                    GateKind::Measure => Some(gate.clbit.ok_or(SimError::MissingClbit { index: pos })?),
                    _ => None,
                };
                driver.draw();
                branches = collapse(branches, slot, driver, clbit, gate.kind == GateKind::Reset);
            }
            _ => {
                let local = gate.remapped(|q| layout.slot_of[q].expect("allocated above"));
                for b in &mut branches {
                    b.state.apply_gate_mut(&local)?;
                }
            }
        }
        driver.probe(pos, &branches, &layout);
        for &q in &gate.qubits {
            if span[q].map(|(_, last)| last) == Some(pos) {
                branches = retire(branches, &mut layout, q, driver);
            }
        }
        branches = merge(branches, driver);
    }
    Ok(())
}

fn collapse<D: Driver>(
    branches: Vec<Branch<D::Payload>>,
    slot: usize,
    driver: &mut D,
    clbit: Option<usize>,
    reset: bool,
) -> Vec<Branch<D::Payload>> {
    let mut out = Vec::with_capacity(branches.len() * 2);
    for b in branches {
        let p1 = b.state.prob_one(slot);
        let children = driver.split(b.payload, p1);
        for (outcome, child) in [false, true].into_iter().zip(children) {
            let Some(payload) = child else { continue };
            let mut state = b.state.clone();
            state.project(slot, outcome);
            if reset && outcome {
                state.flip(slot);
            }
            if let Some(c) = clbit {
                driver.record(&payload, c, outcome);
            }
            out.push(Branch { state, payload });
        }
    }
    out
}

fn single_qubit_purity(state: &StateVector, slot: usize) -> f64 {
    let bit = 1 << slot;
    let (mut p0, mut p1) = (0.0, 0.0);
    let mut coh = num_complex::Complex64::new(0.0, 0.0);
    let amps = state.amplitudes();
    for (i, a) in amps.iter().enumerate() {
        if i & bit == 0 {
            p0 += a.norm_sqr();
            coh += a * amps[i | bit].conj();
        } else {
            p1 += a.norm_sqr();
        }
    }
    p0 * p0 + p1 * p1 + 2.0 * coh.norm_sqr()
}

/// Removes a qubit that has no further operations.
fn retire<D: Driver>(
    branches: Vec<Branch<D::Payload>>,
    layout: &mut Layout,
    qubit: usize,
    driver: &mut D,
) -> Vec<Branch<D::Payload>> {
    let slot = layout.slot_of[qubit].expect("retired qubit is live");
    // Product (or already collapsed) qubits factor out deterministically;
    // entangled ones are measured out. The draw is taken either way so that
    // circuits with the same gate layout consume the same random stream.
    let entangled: Vec<bool> = branches
        .iter()
        .map(|b| 1.0 - single_qubit_purity(&b.state, slot) > 1e-12)
        .collect();
    driver.draw();
    let mut out = Vec::with_capacity(branches.len());
    for (b, entangled) in branches.into_iter().zip(entangled) {
        let p1 = b.state.prob_one(slot);
        if entangled {
            let children = driver.split(b.payload, p1);
            for (outcome, child) in [false, true].into_iter().zip(children) {
                let Some(payload) = child else { continue };
                let mut state = b.state.clone();
                state.project(slot, outcome);
                state.remove_qubit(slot, outcome);
                out.push(Branch { state, payload });
            }
        } else {
            let outcome = p1 > 0.5;
            let mut state = b.state;
            state.project(slot, outcome);
            state.remove_qubit(slot, outcome);
            out.push(Branch {
                state,
                payload: b.payload,
            });
        }
    }
    layout.release(qubit);
    out
}

fn fingerprint(state: &StateVector) -> (i64, i64) {
    let mut weighted = 0.0;
    let mut linear = 0.0;
    for (k, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        let w = ((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
        weighted += p * w;
        linear += p * k as f64;
    }
    ((weighted * 1e7).round() as i64, (linear * 1e7).round() as i64)
}

/// Branches whose states agree to 1e-10 up to global phase.
const MERGE_TOL: f64 = 1e-10;

fn merge<D: Driver>(branches: Vec<Branch<D::Payload>>, driver: &D) -> Vec<Branch<D::Payload>> {
    if branches.len() < 2 {
        return branches;
    }
    let mut out: Vec<Branch<D::Payload>> = Vec::with_capacity(branches.len());
    let mut index: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for b in branches {
        let key = fingerprint(&b.state);
        let bucket = index.entry(key).or_default();
        let hit = bucket.iter().copied().find(|&j| {
            out[j]
                .state
                .distance_up_to_phase(&b.state)
                .is_some_and(|d| d < MERGE_TOL)
        });
        match hit {
            Some(j) => driver.merge(&mut out[j].payload, b.payload),
            None => {
                bucket.push(out.len());
                out.push(b);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_qasm;

    #[test]
    fn plus_state_is_balanced_and_reproducible() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[1]; creg c[1]; h q[0]; measure q[0] -> c[0];").unwrap();
        let a = sample_shots(&c, 8192, 2025).unwrap();
        let b = sample_shots(&c, 8192, 2025).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 8192);
        let zeros = a.counts["0"] as f64;
        assert!((zeros - 4096.0).abs() < 4.0 * (8192.0f64 * 0.25).sqrt());
        assert_ne!(a, sample_shots(&c, 8192, 7).unwrap());
    }

    #[test]
    fn deterministic_outcome() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[1]; creg c[1]; x q[0]; measure q[0] -> c[0];").unwrap();
        let s = sample_shots(&c, 100, 1).unwrap();
        assert_eq!(s.counts, BTreeMap::from([("1".to_string(), 100)]));
    }

    #[test]
    fn bell_outcomes_are_correlated() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q -> c;").unwrap();
        let s = sample_shots(&c, 2000, 3).unwrap();
        assert!(s.counts.keys().all(|k| k == "00" || k == "11"));
        assert_eq!(s.counts.len(), 2);
    }

    #[test]
    fn reset_returns_to_zero() {
        let c = parse_qasm(
            "OPENQASM 2.0; qreg q[1]; creg c[2]; h q[0]; measure q[0] -> c[0]; reset q[0]; measure q[0] -> c[1];",
        )
        .unwrap();
        let s = sample_shots(&c, 500, 9).unwrap();
        assert!(s.counts.keys().all(|k| k.ends_with('0')));
        assert_eq!(s.zero_frequency(1), Some(1.0));
    }

    #[test]
    fn zero_shots() {
        let c = parse_qasm("OPENQASM 2.0; qreg q[1]; creg c[1]; measure q[0] -> c[0];").unwrap();
        let s = sample_shots(&c, 0, 1).unwrap();
        assert!(s.counts.is_empty());
    }

    #[test]
    fn live_width_is_bounded_not_register_width() {
        // 30 qubits, but each one lives for a single gate pair.
        let mut c = Circuit::new(30, 30);
        for q in 0..30 {
            c.apply(GateKind::X, &[], &[q]).unwrap();
            c.measure(q, q).unwrap();
        }
        let s = sample_shots(&c, 10, 1).unwrap();
        assert_eq!(s.counts.keys().next().unwrap(), &"1".repeat(30));
        let limited = Sampler { qubit_limit: 2 };
        let mut wide = Circuit::new(3, 0);
        wide.apply(GateKind::H, &[], &[0]).unwrap();
        wide.apply(GateKind::H, &[], &[1]).unwrap();
        wide.apply(GateKind::Cx, &[], &[0, 2]).unwrap();
        wide.apply(GateKind::Cx, &[], &[1, 0]).unwrap();
        assert!(matches!(limited.sample(&wide, 1, 1), Err(SimError::QubitLimit { .. })));
    }

    #[test]
    fn exact_probe_averages_branches() {
        // After measuring |+⟩ and not resetting, P(0) averaged over branches is 1/2.
        let c = parse_qasm(
            "OPENQASM 2.0; qreg q[2]; creg c[1]; h q[0]; measure q[0] -> c[0]; x q[1]; cx q[0],q[1];",
        )
        .unwrap();
        let p = branch_averaged_p0(&c, &[(1, 0), (2, 1), (3, 1)]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12);
        assert!(p[1].abs() < 1e-12);
        assert!((p[2] - 0.5).abs() < 1e-12);
    }
}

//! Circuit data model shared by every pass.
//!
//! A [`Circuit`] is an ordered gate list over `num_qubits` qubits and
//! `num_clbits` classical bits. A gate's position in [`Circuit::gates`] is its
//! index in execution order; there is no separate index field to keep in sync.
//! Only one- and two-qubit unitaries are representable, plus the `measure`,
//! `reset` and `barrier` pseudo-operations.

mod layers;
pub mod qasm;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use layers::{asap_layers, Layering};
pub use qasm::{emit_qasm, parse_qasm, QasmError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("classical bit {clbit} out of range for {num_clbits} classical bits")]
    ClbitOutOfRange { clbit: usize, num_clbits: usize },

    #[error("gate `{kind}` acts on qubit {qubit} more than once")]
    DuplicateQubit { kind: GateKind, qubit: usize },

    #[error("gate `{kind}` takes {expected} qubit(s), got {found}")]
    Arity {
        kind: GateKind,
        expected: usize,
        found: usize,
    },

    #[error("gate `{kind}` takes {expected} parameter(s), got {found}")]
    ParamCount {
        kind: GateKind,
        expected: usize,
        found: usize,
    },

    #[error("measure on qubit {qubit} has no classical bit target")]
    MissingClbit { qubit: usize },

    #[error("only measure may carry a classical bit target")]
    UnexpectedClbit,
}

/// The closed gate vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    Id,
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Sx,
    Rx,
    Ry,
    Rz,
    P,
    U,
    Cx,
    Cz,
    Cp,
    Crz,
    Rzz,
    Swap,
    Measure,
    Reset,
    Barrier,
}

impl GateKind {
    pub const SINGLE_QUBIT: [GateKind; 15] = [
        GateKind::Id,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Sx,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::P,
        GateKind::U,
    ];

    pub const TWO_QUBIT: [GateKind; 6] = [
        GateKind::Cx,
        GateKind::Cz,
        GateKind::Cp,
        GateKind::Crz,
        GateKind::Rzz,
        GateKind::Swap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Id => "id",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Sx => "sx",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::P => "p",
            GateKind::U => "u",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Cp => "cp",
            GateKind::Crz => "crz",
            GateKind::Rzz => "rzz",
            GateKind::Swap => "swap",
            GateKind::Measure => "measure",
            GateKind::Reset => "reset",
            GateKind::Barrier => "barrier",
        }
    }

    /// Looks up a gate by its QASM name, accepting the common `qelib1.inc`
    /// aliases (`u3`, `u1`, `cu1`, `CX`, ...).
    pub fn from_name(name: &str) -> Option<GateKind> {
        let kind = match name {
            "id" | "i" => GateKind::Id,
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "sx" => GateKind::Sx,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "p" | "u1" | "phase" => GateKind::P,
            "u" | "u3" | "U" => GateKind::U,
            "cx" | "CX" | "cnot" => GateKind::Cx,
            "cz" => GateKind::Cz,
            "cp" | "cu1" | "cphase" => GateKind::Cp,
            "crz" => GateKind::Crz,
            "rzz" => GateKind::Rzz,
            "swap" => GateKind::Swap,
            "measure" => GateKind::Measure,
            "reset" => GateKind::Reset,
            "barrier" => GateKind::Barrier,
            _ => return None,
        };
        Some(kind)
    }

    /// Number of qubits the kind acts on; `None` for barriers, which span any
    /// number of qubits.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::Barrier => None,
            k if k.is_two_qubit() => Some(2),
            _ => Some(1),
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            GateKind::Rx
            | GateKind::Ry
            | GateKind::Rz
            | GateKind::P
            | GateKind::Cp
            | GateKind::Crz
            | GateKind::Rzz => 1,
            GateKind::U => 3,
            _ => 0,
        }
    }

    pub fn is_two_qubit(self) -> bool {
        Self::TWO_QUBIT.contains(&self)
    }

    pub fn is_single_qubit(self) -> bool {
        Self::SINGLE_QUBIT.contains(&self)
    }

    /// True for every kind with a unitary matrix.
    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::Measure | GateKind::Reset | GateKind::Barrier)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One operation of a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub params: Vec<f64>,
    pub qubits: Vec<usize>,
    pub clbit: Option<usize>,
}

impl Gate {
    /// Builds a unitary gate, checking arity, parameter count and operand
    /// distinctness. Qubit ranges are checked when the gate joins a circuit.
    pub fn unitary(kind: GateKind, params: Vec<f64>, qubits: Vec<usize>) -> Result<Gate, CircuitError> {
        let gate = Gate {
            kind,
            params,
            qubits,
            clbit: None,
        };
        gate.check_shape()?;
        Ok(gate)
    }

    pub fn measure(qubit: usize, clbit: usize) -> Gate {
        Gate {
            kind: GateKind::Measure,
            params: Vec::new(),
            qubits: vec![qubit],
            clbit: Some(clbit),
        }
    }

    pub fn reset(qubit: usize) -> Gate {
        Gate {
            kind: GateKind::Reset,
            params: Vec::new(),
            qubits: vec![qubit],
            clbit: None,
        }
    }

    pub fn barrier(qubits: Vec<usize>) -> Gate {
        Gate {
            kind: GateKind::Barrier,
            params: Vec::new(),
            qubits,
            clbit: None,
        }
    }

    pub fn acts_on(&self, qubit: usize) -> bool {
        self.qubits.contains(&qubit)
    }

    pub fn is_barrier(&self) -> bool {
        self.kind == GateKind::Barrier
    }

    pub fn is_measure(&self) -> bool {
        self.kind == GateKind::Measure
    }

    /// Copy of the gate with every operand passed through `map`.
    pub fn remapped(&self, mut map: impl FnMut(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            params: self.params.clone(),
            qubits: self.qubits.iter().map(|&q| map(q)).collect(),
            clbit: self.clbit,
        }
    }

    fn check_shape(&self) -> Result<(), CircuitError> {
        if let Some(expected) = self.kind.arity() {
            if self.qubits.len() != expected {
                return Err(CircuitError::Arity {
                    kind: self.kind,
                    expected,
                    found: self.qubits.len(),
                });
            }
        }
        if self.params.len() != self.kind.num_params() {
            return Err(CircuitError::ParamCount {
                kind: self.kind,
                expected: self.kind.num_params(),
                found: self.params.len(),
            });
        }
        for (i, q) in self.qubits.iter().enumerate() {
            if self.qubits[..i].contains(q) {
                return Err(CircuitError::DuplicateQubit {
                    kind: self.kind,
                    qubit: *q,
                });
            }
        }
        match (self.kind, self.clbit) {
            (GateKind::Measure, None) => Err(CircuitError::MissingClbit { qubit: self.qubits[0] }),
            (GateKind::Measure, Some(_)) => Ok(()),
            (_, Some(_)) => Err(CircuitError::UnexpectedClbit),
            (_, None) => Ok(()),
        }
    }

    /// Parameter-wise comparison with an absolute angle tolerance.
    pub fn approx_eq(&self, other: &Gate, tol: f64) -> bool {
        self.kind == other.kind
            && self.qubits == other.qubits
            && self.clbit == other.clbit
            && self.params.len() == other.params.len()
            && self
                .params
                .iter()
                .zip(&other.params)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        if !self.params.is_empty() {
            let params: Vec<String> = self.params.iter().map(|p| format!("{p:.6}")).collect();
            write!(f, "({})", params.join(","))?;
        }
        let qubits: Vec<String> = self.qubits.iter().map(|q| format!("q{q}")).collect();
        write!(f, " {}", qubits.join(","))?;
        if let Some(c) = self.clbit {
            write!(f, " -> c{c}")?;
        }
        Ok(())
    }
}

/// Ordered gate list over a fixed qubit and classical-bit register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Circuit {
        Circuit {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, index: usize) -> Option<&Gate> {
        self.gates.get(index)
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Appends a gate after validating it against the registers.
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        gate.check_shape()?;
        for &q in &gate.qubits {
            if q >= self.num_qubits {
                return Err(CircuitError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
        }
        if let Some(c) = gate.clbit {
            if c >= self.num_clbits {
                return Err(CircuitError::ClbitOutOfRange {
                    clbit: c,
                    num_clbits: self.num_clbits,
                });
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Shorthand for pushing a unitary.
    pub fn apply(&mut self, kind: GateKind, params: &[f64], qubits: &[usize]) -> Result<&mut Self, CircuitError> {
        self.push(Gate::unitary(kind, params.to_vec(), qubits.to_vec())?)?;
        Ok(self)
    }

    pub fn measure(&mut self, qubit: usize, clbit: usize) -> Result<&mut Self, CircuitError> {
        self.push(Gate::measure(qubit, clbit))?;
        Ok(self)
    }

    /// Measures qubit `k` into classical bit `k` for every qubit.
    pub fn measure_all(&mut self) -> Result<&mut Self, CircuitError> {
        for q in 0..self.num_qubits {
            self.push(Gate::measure(q, q))?;
        }
        Ok(self)
    }

    /// Grows the registers; existing gates are unaffected.
    pub fn widen(&mut self, num_qubits: usize, num_clbits: usize) {
        self.num_qubits = self.num_qubits.max(num_qubits);
        self.num_clbits = self.num_clbits.max(num_clbits);
    }

    /// Replaces the gate at `index`. The replacement is validated like `push`.
    pub fn replace(&mut self, index: usize, gate: Gate) -> Result<Gate, CircuitError> {
        let mut probe = Circuit::new(self.num_qubits, self.num_clbits);
        probe.push(gate.clone())?;
        Ok(std::mem::replace(&mut self.gates[index], gate))
    }

    /// Index of the next operation after `index` touching `qubit`, barriers
    /// excluded.
    pub fn next_op_on(&self, qubit: usize, index: usize) -> Option<usize> {
        (index + 1..self.gates.len()).find(|&j| !self.gates[j].is_barrier() && self.gates[j].acts_on(qubit))
    }

    /// A measurement is final when nothing but barriers touches its qubit
    /// afterwards.
    pub fn is_final_measure(&self, index: usize) -> bool {
        let gate = &self.gates[index];
        gate.is_measure() && self.next_op_on(gate.qubits[0], index).is_none()
    }

    /// Per-gate mask of final measurements.
    pub fn final_measure_mask(&self) -> Vec<bool> {
        let mut seen_later = vec![false; self.num_qubits];
        let mut mask = vec![false; self.gates.len()];
        for (i, gate) in self.gates.iter().enumerate().rev() {
            if gate.is_barrier() {
                continue;
            }
            if gate.is_measure() && !seen_later[gate.qubits[0]] {
                mask[i] = true;
            }
            for &q in &gate.qubits {
                seen_later[q] = true;
            }
        }
        mask
    }

    /// Index of the first reset or non-final measurement, if any.
    pub fn first_mid_circuit_op(&self) -> Option<usize> {
        let mask = self.final_measure_mask();
        self.gates.iter().enumerate().position(|(i, g)| {
            g.kind == GateKind::Reset || (g.is_measure() && !mask[i])
        })
    }

    /// For each qubit, the unitary gate that immediately precedes its final
    /// measurement (if the qubit has one).
    pub fn gates_before_final_measure(&self) -> Vec<Option<usize>> {
        let mask = self.final_measure_mask();
        let mut out = vec![None; self.num_qubits];
        for (i, gate) in self.gates.iter().enumerate() {
            if !mask[i] {
                continue;
            }
            let q = gate.qubits[0];
            out[q] = (0..i)
                .rev()
                .find(|&j| !self.gates[j].is_barrier() && self.gates[j].acts_on(q))
                .filter(|&j| self.gates[j].kind.is_unitary());
        }
        out
    }

    /// The circuit without measurements and barriers.
    pub fn unitary_part(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            num_clbits: self.num_clbits,
            gates: self
                .gates
                .iter()
                .filter(|g| g.kind.is_unitary())
                .cloned()
                .collect(),
        }
    }

    /// Structural equality with angles compared to `tol`.
    pub fn approx_eq(&self, other: &Circuit, tol: f64) -> bool {
        self.num_qubits == other.num_qubits
            && self.num_clbits == other.num_clbits
            && self.gates.len() == other.gates.len()
            && self.gates.iter().zip(&other.gates).all(|(a, b)| a.approx_eq(b, tol))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_shape_is_checked() {
        assert!(matches!(
            Gate::unitary(GateKind::Cx, vec![], vec![0]),
            Err(CircuitError::Arity { .. })
        ));
        assert!(matches!(
            Gate::unitary(GateKind::Rx, vec![], vec![0]),
            Err(CircuitError::ParamCount { .. })
        ));
        assert!(matches!(
            Gate::unitary(GateKind::Swap, vec![], vec![1, 1]),
            Err(CircuitError::DuplicateQubit { .. })
        ));
        assert_eq!(GateKind::U.num_params(), 3);
        assert_eq!(GateKind::Crz.arity(), Some(2));
    }

    #[test]
    fn push_rejects_out_of_range_operands() {
        let mut c = Circuit::new(2, 1);
        assert!(c.apply(GateKind::H, &[], &[2]).is_err());
        assert!(c.measure(0, 1).is_err());
        assert!(c.apply(GateKind::Cx, &[], &[0, 1]).is_ok());
    }

    #[test]
    fn final_measurements_and_preceding_gates() {
        let mut c = Circuit::new(2, 2);
        c.apply(GateKind::H, &[], &[0]).unwrap();
        c.measure(0, 0).unwrap();
        c.apply(GateKind::X, &[], &[0]).unwrap();
        c.apply(GateKind::Cx, &[], &[0, 1]).unwrap();
        c.push(Gate::barrier(vec![0, 1])).unwrap();
        c.measure(0, 0).unwrap();
        c.measure(1, 1).unwrap();
        assert_eq!(c.final_measure_mask(), vec![false, false, false, false, false, true, true]);
        assert_eq!(c.first_mid_circuit_op(), Some(1));
        assert_eq!(c.gates_before_final_measure(), vec![Some(3), Some(3)]);
    }
}

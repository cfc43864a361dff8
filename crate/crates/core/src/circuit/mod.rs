//! Reversible-circuit IR over X, CNOT, CCNOT and terminal measurement.

mod qasm;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use qasm::{export_qasm, import_qasm, QasmError};

/// Largest width [`Circuit::as_permutation`] will enumerate.
pub const PERMUTATION_MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("{kind} index {index} out of range for width {width}")]
    OutOfRange { kind: &'static str, index: usize, width: usize },
    #[error("gate {0} uses the same qubit more than once")]
    RepeatedQubit(Gate),
    #[error("gate {0} acts on a qubit that was already measured")]
    WriteAfterMeasure(Gate),
    #[error("classical bit c[{0}] is written by more than one measurement")]
    ClbitReused(usize),
    #[error("permutation oracle is limited to {max} qubits, circuit has {width}")]
    TooWide { width: usize, max: usize },
    #[error("circuit contains measurements and has no inverse")]
    NotUnitary,
    #[error("expected {expected} qubit values, got {got}")]
    StateWidth { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClbitId(pub usize);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl fmt::Display for ClbitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    X { target: QubitId },
    Cnot { control: QubitId, target: QubitId },
    Ccnot { controls: [QubitId; 2], target: QubitId },
    Measure { qubit: QubitId, clbit: ClbitId },
}

impl Gate {
    pub fn x(target: usize) -> Self {
        Gate::X { target: QubitId(target) }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control: QubitId(control), target: QubitId(target) }
    }

    pub fn ccnot(c1: usize, c2: usize, target: usize) -> Self {
        Gate::Ccnot { controls: [QubitId(c1), QubitId(c2)], target: QubitId(target) }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Gate::Measure { qubit: QubitId(qubit), clbit: ClbitId(clbit) }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Gate::Measure { .. })
    }

    /// Every qubit the gate touches, controls first.
    pub fn qubits(&self) -> Vec<QubitId> {
        match *self {
            Gate::X { target } => vec![target],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Ccnot { controls: [a, b], target } => vec![a, b, target],
            Gate::Measure { qubit, .. } => vec![qubit],
        }
    }

    /// Flips the target of a unitary gate on a classical bit vector.
    /// Measurements leave `bits` unchanged.
    pub fn apply_classical(&self, bits: &mut [bool]) {
        match *self {
            Gate::X { target } => bits[target.0] ^= true,
            Gate::Cnot { control, target } => bits[target.0] ^= bits[control.0],
            Gate::Ccnot { controls: [a, b], target } => bits[target.0] ^= bits[a.0] & bits[b.0],
            Gate::Measure { .. } => {}
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::X { target } => write!(f, "X({target})"),
            Gate::Cnot { control, target } => write!(f, "CNOT({control}, {target})"),
            Gate::Ccnot { controls: [a, b], target } => write!(f, "CCNOT({a}, {b}, {target})"),
            Gate::Measure { qubit, clbit } => write!(f, "Measure({qubit} -> {clbit})"),
        }
    }
}

/// Ordered gate list over fixed quantum and classical widths.
///
/// Construction goes through [`Circuit::append`], so a `Circuit` always
/// satisfies: indices in range, distinct operands per gate, no gate on a
/// measured qubit, each classical bit written at most once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    num_qubits: usize,
    num_clbits: usize,
    gates: Vec<Gate>,
    qubit_labels: Vec<Option<String>>,
    clbit_labels: Vec<Option<String>>,
    measured: Vec<bool>,
    written: Vec<bool>,
}

impl Circuit {
    pub fn new(num_qubits: usize, num_clbits: usize) -> Self {
        Circuit {
            num_qubits,
            num_clbits,
            gates: Vec::new(),
            qubit_labels: vec![None; num_qubits],
            clbit_labels: vec![None; num_clbits],
            measured: vec![false; num_qubits],
            written: vec![false; num_clbits],
        }
    }

    /// Builds a circuit from a gate list, validating every gate in order.
    pub fn from_gates(
        num_qubits: usize,
        num_clbits: usize,
        gates: impl IntoIterator<Item = Gate>,
    ) -> Result<Self, CircuitError> {
        let mut c = Circuit::new(num_qubits, num_clbits);
        for g in gates {
            c.append(g)?;
        }
        Ok(c)
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

    pub fn append(&mut self, gate: Gate) -> Result<&mut Self, CircuitError> {
        let qubits = gate.qubits();
        for q in &qubits {
            if q.0 >= self.num_qubits {
                return Err(CircuitError::OutOfRange { kind: "qubit", index: q.0, width: self.num_qubits });
            }
        }
        for (i, q) in qubits.iter().enumerate() {
            if qubits[..i].contains(q) {
                return Err(CircuitError::RepeatedQubit(gate));
            }
        }
        if gate.is_unitary() && qubits.iter().any(|q| self.measured[q.0]) {
            return Err(CircuitError::WriteAfterMeasure(gate));
        }
        if let Gate::Measure { qubit, clbit } = gate {
            if clbit.0 >= self.num_clbits {
                return Err(CircuitError::OutOfRange { kind: "classical bit", index: clbit.0, width: self.num_clbits });
            }
            if self.written[clbit.0] {
                return Err(CircuitError::ClbitReused(clbit.0));
            }
            self.written[clbit.0] = true;
            self.measured[qubit.0] = true;
        }
        self.gates.push(gate);
        Ok(self)
    }

    pub fn set_qubit_label(&mut self, qubit: QubitId, label: impl Into<String>) -> Result<(), CircuitError> {
        let slot = self.qubit_labels.get_mut(qubit.0).ok_or(CircuitError::OutOfRange {
            kind: "qubit",
            index: qubit.0,
            width: self.num_qubits,
        })?;
        *slot = Some(label.into());
        Ok(())
    }

    pub fn set_clbit_label(&mut self, clbit: ClbitId, label: impl Into<String>) -> Result<(), CircuitError> {
        let width = self.num_clbits;
        let slot = self.clbit_labels.get_mut(clbit.0).ok_or(CircuitError::OutOfRange {
            kind: "classical bit",
            index: clbit.0,
            width,
        })?;
        *slot = Some(label.into());
        Ok(())
    }

    pub fn qubit_label(&self, qubit: QubitId) -> Option<&str> {
        self.qubit_labels.get(qubit.0)?.as_deref()
    }

    pub fn clbit_label(&self, clbit: ClbitId) -> Option<&str> {
        self.clbit_labels.get(clbit.0)?.as_deref()
    }

    /// Same widths and labels, gate list replaced.
    pub fn with_gates(&self, gates: impl IntoIterator<Item = Gate>) -> Result<Self, CircuitError> {
        let mut c = Circuit::from_gates(self.num_qubits, self.num_clbits, gates)?;
        c.qubit_labels = self.qubit_labels.clone();
        c.clbit_labels = self.clbit_labels.clone();
        Ok(c)
    }

    /// Reversed gate list. Every gate in the set is its own inverse.
    pub fn inverse(&self) -> Result<Self, CircuitError> {
        if self.gates.iter().any(|g| !g.is_unitary()) {
            return Err(CircuitError::NotUnitary);
        }
        self.with_gates(self.gates.iter().rev().copied())
    }

    /// Runs the circuit on a classical assignment of qubit values.
    ///
    /// Returns final qubit values and the classical register, where
    /// unwritten classical bits read 0.
    pub fn evaluate_classical(&self, qubits: &[bool]) -> Result<(Vec<bool>, Vec<bool>), CircuitError> {
        if qubits.len() != self.num_qubits {
            return Err(CircuitError::StateWidth { expected: self.num_qubits, got: qubits.len() });
        }
        let mut state = qubits.to_vec();
        let mut clbits = vec![false; self.num_clbits];
        for gate in &self.gates {
            match *gate {
                Gate::Measure { qubit, clbit } => clbits[clbit.0] = state[qubit.0],
                g => g.apply_classical(&mut state),
            }
        }
        Ok((state, clbits))
    }

    /// The basis-state permutation the unitary gates implement, with qubit k
    /// as bit k of the index. Measurements are ignored.
    pub fn as_permutation(&self) -> Result<Vec<usize>, CircuitError> {
        if self.num_qubits > PERMUTATION_MAX_QUBITS {
            return Err(CircuitError::TooWide { width: self.num_qubits, max: PERMUTATION_MAX_QUBITS });
        }
        let n = self.num_qubits;
        let perm = (0..1usize << n)
            .map(|index| {
                let bits: Vec<bool> = (0..n).map(|k| index >> k & 1 == 1).collect();
                let (out, _) = self.evaluate_classical(&bits).expect("width checked above");
                out.iter().enumerate().fold(0usize, |acc, (k, &b)| acc | (usize::from(b) << k))
            })
            .collect();
        Ok(perm)
    }

    pub fn gate_counts(&self) -> GateCounts {
        gate_counts(self)
    }
}

/// Gate tallies plus the circuit's widths.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub x: usize,
    pub cnot: usize,
    pub ccnot: usize,
    pub measure: usize,
    pub total: usize,
    pub num_qubits: usize,
    pub num_clbits: usize,
}

pub fn gate_counts(circuit: &Circuit) -> GateCounts {
    let mut counts =
        GateCounts { num_qubits: circuit.num_qubits, num_clbits: circuit.num_clbits, ..Default::default() };
    for gate in &circuit.gates {
        match gate {
            Gate::X { .. } => counts.x += 1,
            Gate::Cnot { .. } => counts.cnot += 1,
            Gate::Ccnot { .. } => counts.ccnot += 1,
            Gate::Measure { .. } => counts.measure += 1,
        }
        counts.total += 1;
    }
    counts
}

/// Self-describing summary written next to exported circuits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetadata {
    pub num_qubits: usize,
    pub num_clbits: usize,
    pub qubit_labels: Vec<Option<String>>,
    pub clbit_labels: Vec<Option<String>>,
    pub gate_counts: GateCounts,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ancilla_count: Option<usize>,
}

impl CircuitMetadata {
    pub fn of(circuit: &Circuit) -> Self {
        CircuitMetadata {
            num_qubits: circuit.num_qubits,
            num_clbits: circuit.num_clbits,
            qubit_labels: circuit.qubit_labels.clone(),
            clbit_labels: circuit.clbit_labels.clone(),
            gate_counts: circuit.gate_counts(),
            ancilla_count: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// OR block: q2 = q0 | q1.
    fn or_block() -> Circuit {
        Circuit::from_gates(3, 0, [Gate::cnot(0, 2), Gate::cnot(1, 2), Gate::ccnot(0, 1, 2)]).unwrap()
    }

    #[test]
    fn append_examples() {
        let mut c = Circuit::new(3, 0);
        c.append(Gate::ccnot(0, 1, 2)).unwrap();
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.append(Gate::cnot(2, 2)).unwrap_err(), CircuitError::RepeatedQubit(Gate::cnot(2, 2)));
        assert!(matches!(c.append(Gate::x(5)), Err(CircuitError::OutOfRange { index: 5, width: 3, .. })));
        assert_eq!(c.gates().len(), 1);
    }

    #[test]
    fn measurement_rules() {
        let mut c = Circuit::new(2, 2);
        c.append(Gate::measure(0, 0)).unwrap();
        assert!(matches!(c.append(Gate::x(0)), Err(CircuitError::WriteAfterMeasure(_))));
        assert!(matches!(c.append(Gate::cnot(0, 1)), Err(CircuitError::WriteAfterMeasure(_))));
        assert_eq!(c.append(Gate::measure(1, 0)).unwrap_err(), CircuitError::ClbitReused(0));
        assert!(matches!(c.append(Gate::measure(1, 2)), Err(CircuitError::OutOfRange { .. })));
        // A measured qubit may be measured again into a fresh bit.
        c.append(Gate::measure(0, 1)).unwrap();
    }

    #[test]
    fn toffoli_on_110() {
        let c = Circuit::from_gates(3, 0, [Gate::ccnot(0, 1, 2)]).unwrap();
        let perm = c.as_permutation().unwrap();
        assert_eq!(perm[0b011], 0b111);
        assert_eq!(perm[0b111], 0b011);
        assert_eq!(perm[0b001], 0b001);
    }

    #[test]
    fn empty_is_identity() {
        let perm = Circuit::new(4, 0).as_permutation().unwrap();
        assert!(perm.iter().enumerate().all(|(i, &p)| i == p));
    }

    #[test]
    fn or_block_truth_table() {
        let perm = or_block().as_permutation().unwrap();
        for a in 0..2usize {
            for b in 0..2usize {
                let out = perm[a | b << 1];
                assert_eq!(out >> 2 & 1, a | b, "a={a} b={b}");
                assert_eq!(out & 0b11, a | b << 1);
            }
        }
    }

    #[test]
    fn or_block_counts() {
        let counts = or_block().gate_counts();
        assert_eq!((counts.x, counts.cnot, counts.ccnot, counts.measure, counts.total), (0, 2, 1, 0, 3));
        assert_eq!(gate_counts(&Circuit::new(0, 0)), GateCounts::default());
    }

    #[test]
    fn permutation_cap() {
        assert_eq!(Circuit::new(17, 0).as_permutation(), Err(CircuitError::TooWide { width: 17, max: 16 }));
    }

    #[test]
    fn inverse_requires_unitary() {
        let mut c = or_block();
        assert_eq!(c.inverse().unwrap().gates()[0], Gate::ccnot(0, 1, 2));
        let mut m = Circuit::new(3, 1);
        m.append(Gate::measure(2, 0)).unwrap();
        assert_eq!(m.inverse(), Err(CircuitError::NotUnitary));
        c.set_qubit_label(QubitId(2), "X").unwrap();
        assert_eq!(c.inverse().unwrap().qubit_label(QubitId(2)), Some("X"));
    }
}

//! Shared fixtures for the criterion benchmarks under `benches/`.

use qrbs_core::circuit::Circuit;
use qrbs_core::idc::{build_idc_circuit, NUM_INPUT_QUBITS};
use qrbs_core::{CompileOptions, Gate};

/// The IDC circuit with input qubit `q` flipped on first, ready to run
/// from the all-zero state.
pub fn activated_idc_circuit(options: CompileOptions, q: usize) -> Circuit {
    assert!(q < NUM_INPUT_QUBITS, "input qubit {q} out of range");
    let compiled = build_idc_circuit(options).expect("bundled IDC rules compile");
    let gates = std::iter::once(Gate::x(q)).chain(compiled.circuit.gates().iter().copied());
    compiled.circuit.with_gates(gates).expect("activation keeps the circuit valid")
}

/// A chain of `n` inputs joined alternately by `&` and `|`, for compiler
/// scaling runs.
pub fn chain_rules(n: usize) -> String {
    let mut expr = String::from("I0");
    for i in 1..n {
        expr = format!("({expr}) {} I{i}", if i % 2 == 0 { '&' } else { '|' });
    }
    format!("rule: {expr} -> OUT\n")
}

#![allow(dead_code)]

use qrbs_core::circuit::{Circuit, Gate};
use qrbs_core::rules::{BoolExpr, FactId, Rule, RuleNetwork};
use rand::seq::SliceRandom;
use rand::Rng;

fn fact(name: String) -> FactId {
    FactId::new(name).unwrap()
}

fn random_expr<R: Rng>(rng: &mut R, available: &[FactId], depth: u32) -> BoolExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        return BoolExpr::Atom(available.choose(rng).unwrap().clone());
    }
    match rng.gen_range(0..5) {
        0 => BoolExpr::not(random_expr(rng, available, depth - 1)),
        1 | 2 => BoolExpr::and(random_expr(rng, available, depth - 1), random_expr(rng, available, depth - 1)),
        _ => BoolExpr::or(random_expr(rng, available, depth - 1), random_expr(rng, available, depth - 1)),
    }
}

/// Acyclic network with 1..=max_inputs inputs and 1..=max_rules rules. Each
/// rule may use any input or earlier consequent.
pub fn random_network<R: Rng>(rng: &mut R, max_inputs: usize, max_rules: usize) -> RuleNetwork {
    let k = rng.gen_range(1..=max_inputs);
    let r = rng.gen_range(1..=max_rules);
    let inputs: Vec<FactId> = (0..k).map(|i| fact(format!("I{i}"))).collect();
    let mut available = inputs.clone();
    let mut rules = Vec::new();
    for j in 0..r {
        let antecedent = random_expr(rng, &available, 3);
        let consequent = fact(format!("F{j}"));
        available.push(consequent.clone());
        rules.push(Rule::new(antecedent, consequent));
    }
    // Shuffle declaration order; the network sorts dependencies itself.
    rules.shuffle(rng);
    let outputs = if rng.gen_bool(0.5) {
        None
    } else {
        let count = rng.gen_range(1..=available.len());
        Some(available.choose_multiple(rng, count).cloned().collect())
    };
    RuleNetwork::new(inputs, rules, outputs).unwrap()
}

pub fn random_unitary_gate<R: Rng>(rng: &mut R, n: usize) -> Gate {
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    let arity = rng.gen_range(1..=n.min(3));
    match arity {
        1 => Gate::x(qubits[0]),
        2 => Gate::cnot(qubits[0], qubits[1]),
        _ => Gate::ccnot(qubits[0], qubits[1], qubits[2]),
    }
}

/// Random permutation circuit on 1..=max_qubits qubits with up to max_gates
/// unitary gates; when `measure` is set every qubit is measured at the end.
pub fn random_circuit<R: Rng>(rng: &mut R, max_qubits: usize, max_gates: usize, measure: bool) -> Circuit {
    let n = rng.gen_range(1..=max_qubits);
    let g = rng.gen_range(0..=max_gates);
    let mut gates: Vec<Gate> = (0..g).map(|_| random_unitary_gate(rng, n)).collect();
    let mut clbits = 0;
    if measure {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for (c, q) in order.into_iter().enumerate() {
            gates.push(Gate::measure(q, c));
        }
        clbits = n;
    }
    Circuit::from_gates(n, clbits, gates).unwrap()
}

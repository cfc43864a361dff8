//! Lowering of rule networks onto reversible circuits.
//!
//! Every connective writes into a fresh ancilla initialized to |0>:
//!
//! * `a & b`: `CCNOT(a, b, t)`
//! * `a | b`: `CNOT(a, t)`, `CNOT(b, t)`, `CCNOT(a, b, t)`
//! * `!a`: `CNOT(a, t)`, `X(t)`
//!
//! n-ary chains are flattened and folded left pairwise. Ancillae are never
//! uncomputed.

use std::collections::HashMap;

use indexmap::IndexMap;
use rayon::prelude::*;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, ClbitId, Gate, QubitId};
use crate::rules::{BoolExpr, FactId, RuleError, RuleNetwork};

/// Largest input count [`verify_compilation`] will enumerate.
pub const VERIFY_MAX_INPUTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("ancilla budget of {budget} exceeded")]
    BudgetExceeded { budget: usize },
    #[error("fact `{0}` is not bound to a qubit")]
    Unbound(FactId),
    #[error("exhaustive verification is limited to {max} inputs, network has {inputs}")]
    TooManyInputs { inputs: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Reuse one result qubit for structurally identical subexpressions,
    /// including shared prefixes of flattened chains.
    pub share_subexpressions: bool,
    /// Measure an output that aliases an input qubit from that qubit
    /// instead of copying it onto an ancilla first.
    pub measure_inputs_directly: bool,
    pub ancilla_budget: Option<usize>,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions { share_subexpressions: true, measure_inputs_directly: true, ancilla_budget: None }
    }
}

// Flattened expression with atoms resolved to qubits; doubles as the
// structural key for sharing.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Node {
    Qubit(QubitId),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

// x & x = x and x | x = x; keeps first occurrences in order.
fn dedup(items: Vec<Node>) -> Vec<Node> {
    let mut out: Vec<Node> = Vec::with_capacity(items.len());
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// Incremental lowering state: fact bindings, allocated ancillae and the
/// gates emitted so far.
#[derive(Debug)]
pub struct ExprCompiler {
    bindings: HashMap<FactId, QubitId>,
    fixed: usize,
    next: usize,
    gates: Vec<Gate>,
    cache: HashMap<Node, QubitId>,
    options: CompileOptions,
}

impl ExprCompiler {
    /// `fixed_qubits` are reserved for inputs; ancillae are numbered after them.
    pub fn new(fixed_qubits: usize, options: CompileOptions) -> Self {
        ExprCompiler {
            bindings: HashMap::new(),
            fixed: fixed_qubits,
            next: fixed_qubits,
            gates: Vec::new(),
            cache: HashMap::new(),
            options,
        }
    }

    pub fn bind(&mut self, fact: FactId, qubit: QubitId) {
        self.bindings.insert(fact, qubit);
    }

    pub fn qubit_of(&self, fact: &FactId) -> Option<QubitId> {
        self.bindings.get(fact).copied()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn ancilla_count(&self) -> usize {
        self.next - self.fixed
    }

    pub fn num_qubits(&self) -> usize {
        self.next
    }

    pub fn is_fixed(&self, qubit: QubitId) -> bool {
        qubit.0 < self.fixed
    }

    /// Lowers `expr`, returning the qubit that holds its value.
    pub fn compile_expr(&mut self, expr: &BoolExpr) -> Result<QubitId, CompileError> {
        let node = self.flatten(expr)?;
        self.lower(&node)
    }

    /// Allocates a fresh |0> ancilla.
    pub fn allocate(&mut self) -> Result<QubitId, CompileError> {
        if let Some(budget) = self.options.ancilla_budget {
            if self.ancilla_count() >= budget {
                return Err(CompileError::BudgetExceeded { budget });
            }
        }
        let q = QubitId(self.next);
        self.next += 1;
        Ok(q)
    }

    pub fn emit(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    fn flatten(&self, expr: &BoolExpr) -> Result<Node, CompileError> {
        Ok(match expr {
            BoolExpr::Atom(f) => Node::Qubit(self.qubit_of(f).ok_or_else(|| CompileError::Unbound(f.clone()))?),
            BoolExpr::Not(e) => Node::Not(Box::new(self.flatten(e)?)),
            BoolExpr::And(a, b) => {
                let mut items = Vec::new();
                for side in [a, b] {
                    match self.flatten(side)? {
                        Node::And(inner) => items.extend(inner),
                        n => items.push(n),
                    }
                }
                Node::And(dedup(items))
            }
            BoolExpr::Or(a, b) => {
                let mut items = Vec::new();
                for side in [a, b] {
                    match self.flatten(side)? {
                        Node::Or(inner) => items.extend(inner),
                        n => items.push(n),
                    }
                }
                Node::Or(dedup(items))
            }
            BoolExpr::Implies(p, q) => {
                let mut items = vec![Node::Not(Box::new(self.flatten(p)?))];
                match self.flatten(q)? {
                    Node::Or(inner) => items.extend(inner),
                    n => items.push(n),
                }
                Node::Or(dedup(items))
            }
        })
    }

    fn cached(&self, key: &Node) -> Option<QubitId> {
        if self.options.share_subexpressions {
            self.cache.get(key).copied()
        } else {
            None
        }
    }

    fn remember(&mut self, key: Node, qubit: QubitId) {
        if self.options.share_subexpressions {
            self.cache.insert(key, qubit);
        }
    }

    fn lower(&mut self, node: &Node) -> Result<QubitId, CompileError> {
        match node {
            Node::Qubit(q) => Ok(*q),
            Node::Not(inner) => {
                if let Some(q) = self.cached(node) {
                    return Ok(q);
                }
                let src = self.lower(inner)?;
                let t = self.allocate()?;
                self.emit(Gate::Cnot { control: src, target: t });
                self.emit(Gate::X { target: t });
                self.remember(node.clone(), t);
                Ok(t)
            }
            Node::And(items) | Node::Or(items) => {
                let conjunction = matches!(node, Node::And(_));
                let rebuild = |prefix: &[Node]| {
                    if conjunction {
                        Node::And(prefix.to_vec())
                    } else {
                        Node::Or(prefix.to_vec())
                    }
                };
                let mut acc = self.lower(&items[0])?;
                for j in 1..items.len() {
                    let key = rebuild(&items[..=j]);
                    if let Some(q) = self.cached(&key) {
                        acc = q;
                        continue;
                    }
                    let rhs = self.lower(&items[j])?;
                    // Distinct subexpressions can still land on one qubit
                    // through aliased consequents.
                    if rhs != acc {
                        let t = self.allocate()?;
                        if conjunction {
                            self.emit(Gate::Ccnot { controls: [acc, rhs], target: t });
                        } else {
                            self.emit(Gate::Cnot { control: acc, target: t });
                            self.emit(Gate::Cnot { control: rhs, target: t });
                            self.emit(Gate::Ccnot { controls: [acc, rhs], target: t });
                        }
                        acc = t;
                    }
                    self.remember(key, acc);
                }
                Ok(acc)
            }
        }
    }
}

/// A lowered network together with its fact/qubit maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledCircuit {
    pub circuit: Circuit,
    pub input_map: IndexMap<FactId, QubitId>,
    pub output_map: IndexMap<FactId, (QubitId, ClbitId)>,
    pub ancilla_count: usize,
}

impl CompiledCircuit {
    pub fn metadata(&self) -> crate::circuit::CircuitMetadata {
        let mut meta = crate::circuit::CircuitMetadata::of(&self.circuit);
        meta.ancilla_count = Some(self.ancilla_count);
        meta
    }
}

/// Compiles `network`: inputs on q0..q(k-1) in declaration order, rules in
/// topological order, outputs measured into c0.. in output order.
pub fn compile_network(network: &RuleNetwork, options: CompileOptions) -> Result<CompiledCircuit, CompileError> {
    let inputs = network.inputs();
    let mut lowering = ExprCompiler::new(inputs.len(), options);
    let mut input_map = IndexMap::new();
    for (i, fact) in inputs.iter().enumerate() {
        lowering.bind(fact.clone(), QubitId(i));
        input_map.insert(fact.clone(), QubitId(i));
    }
    let mut labels: Vec<(QubitId, &FactId)> = Vec::new();
    for rule in network.rules_in_order() {
        let q = lowering.compile_expr(&rule.antecedent)?;
        lowering.bind(rule.consequent.clone(), q);
        labels.push((q, &rule.consequent));
    }
    let mut measurements = Vec::new();
    let mut output_map = IndexMap::new();
    for (c, fact) in network.outputs().iter().enumerate() {
        let mut q = lowering.qubit_of(fact).ok_or_else(|| CompileError::Unbound(fact.clone()))?;
        if lowering.is_fixed(q) && !options.measure_inputs_directly {
            let copy = lowering.allocate()?;
            lowering.emit(Gate::Cnot { control: q, target: copy });
            labels.push((copy, fact));
            q = copy;
        }
        measurements.push(Gate::Measure { qubit: q, clbit: ClbitId(c) });
        output_map.insert(fact.clone(), (q, ClbitId(c)));
    }
    let mut circuit = Circuit::new(lowering.num_qubits(), network.outputs().len());
    for gate in lowering.gates().iter().chain(&measurements) {
        circuit.append(*gate)?;
    }
    for (fact, q) in &input_map {
        circuit.set_qubit_label(*q, fact.as_str())?;
    }
    for (q, fact) in labels {
        if !lowering.is_fixed(q) && circuit.qubit_label(q).is_none() {
            circuit.set_qubit_label(q, fact.as_str())?;
        }
    }
    for (fact, (_, c)) in &output_map {
        circuit.set_clbit_label(*c, fact.as_str())?;
    }
    Ok(CompiledCircuit { circuit, input_map, output_map, ancilla_count: lowering.ancilla_count() })
}

/// One input assignment on which circuit and network disagree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub inputs: Vec<bool>,
    pub expected: Vec<bool>,
    pub measured: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub assignments_checked: usize,
    pub mismatches: Vec<Mismatch>,
}

impl VerificationReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Measured output bits of `compiled` for one input assignment, ancillae at 0.
pub fn measured_outputs(compiled: &CompiledCircuit, inputs: &[bool]) -> Result<Vec<bool>, CompileError> {
    if inputs.len() != compiled.input_map.len() {
        return Err(RuleError::InputArity { expected: compiled.input_map.len(), got: inputs.len() }.into());
    }
    let mut qubits = vec![false; compiled.circuit.num_qubits()];
    for (q, bit) in compiled.input_map.values().zip(inputs) {
        qubits[q.0] = *bit;
    }
    let (_, clbits) = compiled.circuit.evaluate_classical(&qubits)?;
    Ok(compiled.output_map.values().map(|(_, c)| clbits[c.0]).collect())
}

/// Checks the circuit against classical forward evaluation on every
/// assignment of the network's inputs.
pub fn verify_compilation(
    network: &RuleNetwork,
    compiled: &CompiledCircuit,
) -> Result<VerificationReport, CompileError> {
    let k = network.inputs().len();
    if k > VERIFY_MAX_INPUTS {
        return Err(CompileError::TooManyInputs { inputs: k, max: VERIFY_MAX_INPUTS });
    }
    let results: Vec<Option<Mismatch>> = (0..1usize << k)
        .into_par_iter()
        .map(|bits| {
            let inputs: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
            let expected = network.evaluate_outputs(&inputs)?;
            let measured = measured_outputs(compiled, &inputs)?;
            Ok((expected != measured).then_some(Mismatch { inputs, expected, measured }))
        })
        .collect::<Result<_, CompileError>>()?;
    Ok(VerificationReport { assignments_checked: 1 << k, mismatches: results.into_iter().flatten().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::parse_rules;

    fn lower(text: &str) -> (Vec<Gate>, usize) {
        let mut c = ExprCompiler::new(3, CompileOptions::default());
        for (i, name) in ["A", "B", "C"].iter().enumerate() {
            c.bind(FactId::new(*name).unwrap(), QubitId(i));
        }
        let net = parse_rules(&format!("inputs: A, B, C\nrule: {text} -> Z")).unwrap();
        c.compile_expr(&net.rules()[0].antecedent).unwrap();
        (c.gates().to_vec(), c.ancilla_count())
    }

    #[test]
    fn and_block() {
        assert_eq!(lower("A & B"), (vec![Gate::ccnot(0, 1, 3)], 1));
    }

    #[test]
    fn or_block() {
        assert_eq!(lower("A | B"), (vec![Gate::cnot(0, 3), Gate::cnot(1, 3), Gate::ccnot(0, 1, 3)], 1));
    }

    #[test]
    fn or_chain_folds_left() {
        let (gates, ancillae) = lower("(A | B) | C");
        assert_eq!(ancillae, 2);
        assert_eq!(gates.len(), 6);
        assert_eq!(gates[3..], [Gate::cnot(3, 4), Gate::cnot(2, 4), Gate::ccnot(3, 2, 4)]);
        let circuit = Circuit::from_gates(5, 0, gates).unwrap();
        let perm = circuit.as_permutation().unwrap();
        for (x, out) in perm.iter().take(8).enumerate() {
            assert_eq!(out >> 4 & 1, usize::from(x != 0), "input {x:03b}");
        }
    }

    #[test]
    fn not_copies_then_flips() {
        assert_eq!(lower("!A"), (vec![Gate::cnot(0, 3), Gate::x(3)], 1));
    }

    #[test]
    fn idempotent_operands() {
        assert_eq!(lower("A | A"), (vec![], 0));
        assert_eq!(lower("A & B & A & B").1, 1);
        assert_eq!(lower("(A | B) & (A | B)").1, 1);
    }

    #[test]
    fn shared_prefix_reused() {
        let net = parse_rules("rule: A | B -> X\nrule: A | B | C -> Y\noutputs: X, Y").unwrap();
        let shared = compile_network(&net, CompileOptions::default()).unwrap();
        assert_eq!(shared.ancilla_count, 2);
        let unshared =
            compile_network(&net, CompileOptions { share_subexpressions: false, ..Default::default() }).unwrap();
        assert_eq!(unshared.ancilla_count, 3);
        assert!(verify_compilation(&net, &shared).unwrap().is_ok());
        assert!(verify_compilation(&net, &unshared).unwrap().is_ok());
    }

    #[test]
    fn identity_consequent_measured_directly() {
        let net = parse_rules("rule: A -> X\noutputs: X").unwrap();
        let c = compile_network(&net, CompileOptions::default()).unwrap();
        assert_eq!(c.ancilla_count, 0);
        assert_eq!(c.circuit.gates(), &[Gate::measure(0, 0)]);
        let copied =
            compile_network(&net, CompileOptions { measure_inputs_directly: false, ..Default::default() }).unwrap();
        assert_eq!(copied.ancilla_count, 1);
        assert_eq!(copied.circuit.gates(), &[Gate::cnot(0, 1), Gate::measure(1, 0)]);
        assert!(verify_compilation(&net, &copied).unwrap().is_ok());
    }

    #[test]
    fn worked_network_all_32_assignments() {
        let net = parse_rules("rule R1: A & B -> X\nrule R2: X | C -> Y\nrule R3: Y & (D | E) -> R\n").unwrap();
        let c = compile_network(&net, CompileOptions::default()).unwrap();
        let report = verify_compilation(&net, &c).unwrap();
        assert_eq!(report.assignments_checked, 32);
        assert!(report.is_ok(), "{:?}", report.mismatches);
        assert_eq!(c.circuit.qubit_label(c.output_map["R"].0), Some("R"));
    }

    #[test]
    fn dropped_gate_is_detected() {
        let net = parse_rules("rule R1: A & B -> X\nrule R2: X | C -> Y\nrule R3: Y & (D | E) -> R\n").unwrap();
        let mut c = compile_network(&net, CompileOptions::default()).unwrap();
        let mut gates = c.circuit.gates().to_vec();
        gates.remove(1);
        c.circuit = c.circuit.with_gates(gates).unwrap();
        assert!(!verify_compilation(&net, &c).unwrap().mismatches.is_empty());
    }

    #[test]
    fn inputs_only_network_verifies() {
        let net = parse_rules("inputs: A, B\noutputs: A, B").unwrap();
        let c = compile_network(&net, CompileOptions::default()).unwrap();
        assert_eq!(c.ancilla_count, 0);
        assert!(verify_compilation(&net, &c).unwrap().is_ok());
    }

    #[test]
    fn budget_enforced() {
        let net = parse_rules("rule: A | B | C -> X").unwrap();
        let opts = CompileOptions { ancilla_budget: Some(1), ..Default::default() };
        assert_eq!(compile_network(&net, opts), Err(CompileError::BudgetExceeded { budget: 1 }));
        let opts = CompileOptions { ancilla_budget: Some(2), ..Default::default() };
        assert_eq!(compile_network(&net, opts).unwrap().ancilla_count, 2);
    }

    #[test]
    fn implication_lowers_through_or_not() {
        let mut c = ExprCompiler::new(2, CompileOptions::default());
        c.bind(FactId::new("p").unwrap(), QubitId(0));
        c.bind(FactId::new("q").unwrap(), QubitId(1));
        let e = BoolExpr::implies(BoolExpr::atom("p").unwrap(), BoolExpr::atom("q").unwrap());
        let t = c.compile_expr(&e).unwrap();
        let circuit = Circuit::from_gates(c.num_qubits(), 0, c.gates().to_vec()).unwrap();
        let perm = circuit.as_permutation().unwrap();
        for (x, out) in perm.iter().take(4).enumerate() {
            let (p, q) = (x & 1 == 1, x >> 1 & 1 == 1);
            assert_eq!(out >> t.0 & 1 == 1, !p | q);
        }
    }
}

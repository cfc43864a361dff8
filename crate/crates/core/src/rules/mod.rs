//! Propositional facts, boolean expressions, rules and rule networks.
//!
//! A [`RuleNetwork`] is a DAG of facts: input facts are set from outside,
//! every other fact is the consequent of exactly one [`Rule`]. The classical
//! forward evaluator here is the reference semantics the circuit compiler is
//! checked against.

mod parser;

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

pub use parser::{
    parse_constraints, parse_rules, ConstraintBody, ConstraintFile, NamedConstraint, ParseError,
    ANY_SYMPTOM_IMPLIES_DIAGNOSIS,
};

/// Errors raised while building or evaluating rule networks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid fact name `{0}`")]
    InvalidFactName(String),
    #[error("empty network: no rules and no inputs")]
    EmptyNetwork,
    #[error("unknown atom `{0}`")]
    UnknownAtom(FactId),
    #[error("fact `{0}` is concluded by more than one rule")]
    DuplicateConsequent(FactId),
    #[error("fact `{0}` is declared as an input but concluded by a rule")]
    InputConcluded(FactId),
    #[error("fact `{0}` declared more than once")]
    DuplicateFact(FactId),
    #[error("cycle detected: {}", display_cycle(.0))]
    Cycle(Vec<FactId>),
    #[error("atom `{0}` has no assigned value")]
    Unassigned(FactId),
    #[error("expected {expected} input bits, got {got}")]
    InputArity { expected: usize, got: usize },
}

fn display_cycle(facts: &[FactId]) -> String {
    let mut names: Vec<&str> = facts.iter().map(FactId::as_str).collect();
    if let Some(first) = facts.first() {
        names.push(first.as_str());
    }
    names.join(" -> ")
}

/// Name of a propositional statement.
///
/// Letters, digits, underscore and hyphen; case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FactId(String);

impl FactId {
    pub fn new(name: impl Into<String>) -> Result<Self, RuleError> {
        let name = name.into();
        if is_valid_fact_name(&name) {
            Ok(FactId(name))
        } else {
            Err(RuleError::InvalidFactName(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_fact_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn is_valid_fact_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(is_fact_char) && !name.contains("->") && !name.starts_with('-')
}

impl fmt::Display for FactId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for FactId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl std::str::FromStr for FactId {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FactId::new(s)
    }
}

/// Boolean expression over facts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Atom(FactId),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    /// Material implication; only produced by constraint files.
    Implies(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn atom(name: &str) -> Result<Self, RuleError> {
        Ok(BoolExpr::Atom(FactId::new(name)?))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Implies(Box::new(a), Box::new(b))
    }

    /// Left-folded disjunction of `items`; `None` when empty.
    pub fn any(items: impl IntoIterator<Item = BoolExpr>) -> Option<Self> {
        items.into_iter().reduce(BoolExpr::or)
    }

    /// Left-folded conjunction of `items`; `None` when empty.
    pub fn all(items: impl IntoIterator<Item = BoolExpr>) -> Option<Self> {
        items.into_iter().reduce(BoolExpr::and)
    }

    /// Atoms in first-mention (left-to-right) order, without duplicates.
    pub fn atoms(&self) -> Vec<&FactId> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a FactId>) {
        match self {
            BoolExpr::Atom(f) => {
                if !out.contains(&f) {
                    out.push(f);
                }
            }
            BoolExpr::Not(e) => e.collect_atoms(out),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    pub fn mentions(&self, fact: &FactId) -> bool {
        match self {
            BoolExpr::Atom(f) => f == fact,
            BoolExpr::Not(e) => e.mentions(fact),
            BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) => a.mentions(fact) || b.mentions(fact),
        }
    }

    /// Evaluates the expression, looking atoms up through `lookup`.
    ///
    /// `Implies(p, q)` is `!p | q`.
    pub fn evaluate<F>(&self, lookup: &F) -> Result<bool, RuleError>
    where
        F: Fn(&FactId) -> Option<bool>,
    {
        Ok(match self {
            BoolExpr::Atom(f) => lookup(f).ok_or_else(|| RuleError::Unassigned(f.clone()))?,
            BoolExpr::Not(e) => !e.evaluate(lookup)?,
            BoolExpr::And(a, b) => a.evaluate(lookup)? & b.evaluate(lookup)?,
            BoolExpr::Or(a, b) => a.evaluate(lookup)? | b.evaluate(lookup)?,
            BoolExpr::Implies(a, b) => !a.evaluate(lookup)? | b.evaluate(lookup)?,
        })
    }
}

/// Evaluates `expr` under a map from facts to bits.
pub fn evaluate_expr<S>(expr: &BoolExpr, assignment: &HashMap<FactId, bool, S>) -> Result<bool, RuleError>
where
    S: std::hash::BuildHasher,
{
    expr.evaluate(&|f: &FactId| assignment.get(f).copied())
}

/// `IF antecedent THEN consequent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: Option<String>,
    pub antecedent: BoolExpr,
    pub consequent: FactId,
}

impl Rule {
    pub fn new(antecedent: BoolExpr, consequent: FactId) -> Self {
        Rule { name: None, antecedent, consequent }
    }

    pub fn named(name: impl Into<String>, antecedent: BoolExpr, consequent: FactId) -> Self {
        Rule { name: Some(name.into()), antecedent, consequent }
    }
}

/// A validated, acyclic network of rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleNetwork {
    inputs: Vec<FactId>,
    rules: Vec<Rule>,
    outputs: Vec<FactId>,
    order: Vec<FactId>,
}

impl RuleNetwork {
    /// Builds a network, checking every structural invariant.
    ///
    /// `outputs == None` selects every consequent that no antecedent uses.
    pub fn new(inputs: Vec<FactId>, rules: Vec<Rule>, outputs: Option<Vec<FactId>>) -> Result<Self, RuleError> {
        if inputs.is_empty() && rules.is_empty() {
            return Err(RuleError::EmptyNetwork);
        }
        let mut seen = HashSet::new();
        for f in &inputs {
            if !seen.insert(f) {
                return Err(RuleError::DuplicateFact(f.clone()));
            }
        }
        let mut concluded = HashSet::new();
        for rule in &rules {
            if seen.contains(&rule.consequent) {
                return Err(RuleError::InputConcluded(rule.consequent.clone()));
            }
            if !concluded.insert(&rule.consequent) {
                return Err(RuleError::DuplicateConsequent(rule.consequent.clone()));
            }
        }
        for rule in &rules {
            for atom in rule.antecedent.atoms() {
                if !seen.contains(atom) && !concluded.contains(atom) {
                    return Err(RuleError::UnknownAtom(atom.clone()));
                }
            }
        }
        let outputs = match outputs {
            Some(outs) => {
                for (i, f) in outs.iter().enumerate() {
                    if !seen.contains(f) && !concluded.contains(f) {
                        return Err(RuleError::UnknownAtom(f.clone()));
                    }
                    if outs[..i].contains(f) {
                        return Err(RuleError::DuplicateFact(f.clone()));
                    }
                }
                outs
            }
            None => rules
                .iter()
                .map(|r| &r.consequent)
                .filter(|c| !rules.iter().any(|r| r.antecedent.mentions(c)))
                .cloned()
                .collect(),
        };
        let order = topological_order(&inputs, &rules)?;
        Ok(RuleNetwork { inputs, rules, outputs, order })
    }

    pub fn inputs(&self) -> &[FactId] {
        &self.inputs
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn outputs(&self) -> &[FactId] {
        &self.outputs
    }

    /// Inputs in declaration order, then consequents so that every rule's
    /// antecedent atoms precede its consequent.
    pub fn topological_order(&self) -> &[FactId] {
        &self.order
    }

    /// Rules in the order their consequents appear in [`Self::topological_order`].
    pub fn rules_in_order(&self) -> impl Iterator<Item = &Rule> {
        let by_consequent: HashMap<&FactId, &Rule> = self.rules.iter().map(|r| (&r.consequent, r)).collect();
        self.order[self.inputs.len()..].iter().map(move |f| by_consequent[f])
    }

    pub fn rule_for(&self, fact: &FactId) -> Option<&Rule> {
        self.rules.iter().find(|r| &r.consequent == fact)
    }

    /// Forward-chains the network from one bit per input fact.
    pub fn evaluate(&self, inputs: &[bool]) -> Result<IndexMap<FactId, bool>, RuleError> {
        if inputs.len() != self.inputs.len() {
            return Err(RuleError::InputArity { expected: self.inputs.len(), got: inputs.len() });
        }
        let mut values: IndexMap<FactId, bool> = self.inputs.iter().cloned().zip(inputs.iter().copied()).collect();
        for rule in self.rules_in_order() {
            let v = rule.antecedent.evaluate(&|f: &FactId| values.get(f).copied())?;
            values.insert(rule.consequent.clone(), v);
        }
        Ok(values)
    }

    /// Output bits in `outputs()` order.
    pub fn evaluate_outputs(&self, inputs: &[bool]) -> Result<Vec<bool>, RuleError> {
        let values = self.evaluate(inputs)?;
        Ok(self.outputs.iter().map(|f| values[f]).collect())
    }
}

/// Classical forward evaluation; returns every fact's value in topological order.
pub fn evaluate_network(network: &RuleNetwork, inputs: &[bool]) -> Result<IndexMap<FactId, bool>, RuleError> {
    network.evaluate(inputs)
}

/// Orders facts: `inputs` first, then consequents, each after all of its
/// antecedent atoms. Among ready rules the earliest declared goes first.
pub fn topological_order(inputs: &[FactId], rules: &[Rule]) -> Result<Vec<FactId>, RuleError> {
    for rule in rules {
        for atom in rule.antecedent.atoms() {
            if !inputs.contains(atom) && !rules.iter().any(|r| &r.consequent == atom) {
                return Err(RuleError::UnknownAtom(atom.clone()));
            }
        }
    }
    let mut order: Vec<FactId> = inputs.to_vec();
    let mut resolved: HashSet<&FactId> = inputs.iter().collect();
    let mut pending: Vec<&Rule> = rules.iter().collect();
    while !pending.is_empty() {
        let ready = pending.iter().position(|r| r.antecedent.atoms().into_iter().all(|a| resolved.contains(a)));
        match ready {
            Some(i) => {
                let rule = pending.remove(i);
                resolved.insert(&rule.consequent);
                order.push(rule.consequent.clone());
            }
            None => return Err(RuleError::Cycle(find_cycle(&pending, &resolved))),
        }
    }
    Ok(order)
}

// Walks unresolved dependencies until a fact repeats. Every pending rule has
// an unresolved atom that is itself a pending consequent.
fn find_cycle(pending: &[&Rule], resolved: &HashSet<&FactId>) -> Vec<FactId> {
    let by_consequent: HashMap<&FactId, &Rule> = pending.iter().map(|r| (&r.consequent, *r)).collect();
    let mut path: Vec<&FactId> = Vec::new();
    let mut current = &pending[0].consequent;
    loop {
        if let Some(pos) = path.iter().position(|f| *f == current) {
            return path[pos..].iter().map(|f| (*f).clone()).collect();
        }
        path.push(current);
        let rule = match by_consequent.get(current) {
            Some(r) => r,
            None => return path.into_iter().cloned().collect(),
        };
        match rule.antecedent.atoms().into_iter().find(|a| !resolved.contains(a) && by_consequent.contains_key(a)) {
            Some(next) => current = next,
            None => return path.into_iter().cloned().collect(),
        }
    }
}

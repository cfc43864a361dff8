//! Quantum rule-based systems.
//!
//! Propositional rule networks are lowered onto reversible circuits built
//! from X, CNOT and CCNOT gates and executed on either a dense statevector
//! or a single-basis-state engine. The crate also carries categorical
//! (Ledley-Lusted) logic-base reduction and a breast IDC staging system
//! built on top of the compiler.

pub mod categorical;
pub mod circuit;
pub mod compiler;
pub mod idc;
pub mod rules;
pub mod sim;

pub use categorical::{build_elb, diagnose, reduce_to_rlb, Complex, Diagnosis, DiseaseStatus, LogicBase, Verdict};
pub use circuit::{Circuit, ClbitId, Gate, GateCounts, QubitId};
pub use compiler::{compile_network, verify_compilation, CompileOptions, CompiledCircuit};
pub use idc::{IdcStager, Stage, StageSet, TnmClass};
pub use rules::{evaluate_network, parse_rules, BoolExpr, FactId, Rule, RuleNetwork};
pub use sim::{run, BasisIndex, Engine, RunResult, StateVector};

//! Breast invasive ductal carcinoma (IDC) staging on the rule compiler.
//!
//! A TNM complex activates one of fifteen input qubits; the compiled stage
//! rules write one classical bit per stage, c0 = I-A up to c7 = IV.

mod tnm;

use std::fmt;

use thiserror::Error;

pub use tnm::{
    classify_tnm, input_complexes, tnm_to_input_qubit, ClinicalFindings, MCategory, NCategory, TCategory, TnmClass,
    INPUT_COMPLEXES,
};

use crate::circuit::{Gate, QubitId};
use crate::compiler::{compile_network, CompileError, CompileOptions, CompiledCircuit};
use crate::rules::{parse_rules, RuleNetwork};
use crate::sim::{run, BasisIndex, ClassicalBits, Engine, RunResult, SimConfig, SimError};

/// Stage rules in the rule DSL; inputs in qubit order, outputs in bit order.
pub const IDC_RULES: &str = include_str!("../../data/idc_stages.rules");

pub const NUM_INPUT_QUBITS: usize = 15;
pub const NUM_STAGES: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StagingError {
    #[error("invalid TNM classification `{0}`")]
    InvalidTnm(String),
    #[error("invalid findings: {0}")]
    InvalidFindings(String),
    #[error("no relevant complex for {0}")]
    NoRelevantComplex(TnmClass),
    #[error("one-hot violation: one and only one input qubit must be 1, got {active} active")]
    OneHotViolation { active: usize },
    #[error("expected {expected} input bits, got {got}")]
    ActivationWidth { expected: usize, got: usize },
    #[error("expected {expected} output bits, got {got}")]
    OutputWidth { expected: usize, got: usize },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    IA,
    IB,
    IIA,
    IIB,
    IIIA,
    IIIB,
    IIIC,
    IV,
}

impl Stage {
    /// Bit order: `ALL[k]` is classical bit k.
    pub const ALL: [Stage; NUM_STAGES] =
        [Stage::IA, Stage::IB, Stage::IIA, Stage::IIB, Stage::IIIA, Stage::IIIB, Stage::IIIC, Stage::IV];

    pub fn bit(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::IA => "I-A",
            Stage::IB => "I-B",
            Stage::IIA => "II-A",
            Stage::IIB => "II-B",
            Stage::IIIA => "III-A",
            Stage::IIIB => "III-B",
            Stage::IIIC => "III-C",
            Stage::IV => "IV",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Stage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| format!("unknown stage `{s}`"))
    }
}

/// Set of stages as an 8-bit mask, bit k = `Stage::ALL[k]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StageSet(pub u8);

impl StageSet {
    pub fn contains(self, stage: Stage) -> bool {
        self.0 >> stage.bit() & 1 == 1
    }

    pub fn insert(&mut self, stage: Stage) {
        self.0 |= 1 << stage.bit();
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn stages(self) -> impl Iterator<Item = Stage> {
        Stage::ALL.into_iter().filter(move |s| self.contains(*s))
    }

    /// c7..c0, as the circuit's classical register prints.
    pub fn bit_string(self) -> String {
        format!("{:08b}", self.0)
    }
}

impl FromIterator<Stage> for StageSet {
    fn from_iter<I: IntoIterator<Item = Stage>>(iter: I) -> Self {
        let mut set = StageSet::default();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

/// Stage names joined by ` or `, lowest stage first; `-` when empty.
impl fmt::Display for StageSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("-");
        }
        let names: Vec<&str> = self.stages().map(Stage::name).collect();
        f.write_str(&names.join(" or "))
    }
}

/// Reads the stage set off the eight measured bits.
pub fn decode_stages(bits: &ClassicalBits) -> Result<StageSet, StagingError> {
    if bits.len() != NUM_STAGES {
        return Err(StagingError::OutputWidth { expected: NUM_STAGES, got: bits.len() });
    }
    Ok(StageSet(bits.0.iter().enumerate().fold(0u8, |m, (k, &b)| m | u8::from(b) << k)))
}

/// The stage rule network.
pub fn build_idc_network() -> RuleNetwork {
    parse_rules(IDC_RULES).expect("bundled IDC rules are valid")
}

pub fn build_idc_circuit(options: CompileOptions) -> Result<CompiledCircuit, CompileError> {
    compile_network(&build_idc_network(), options)
}

/// Stages compatible with each TNM complex, as tabulated clinically
/// (independent of the rule file).
pub fn reference_stages(tnm: TnmClass) -> StageSet {
    use MCategory::*;
    use NCategory::*;
    use TCategory::*;
    type Row = (TCategory, NCategory, MCategory);
    let table: [(Stage, &[Row]); NUM_STAGES] = [
        (Stage::IA, &[(T1, N0, M0)]),
        (Stage::IB, &[(T0, N1, M0), (T1, N1, M0)]),
        (Stage::IIA, &[(T0, N1, M0), (T1, N1, M0), (T2, N0, M0)]),
        (Stage::IIB, &[(T2, N1, M0), (T3, N0, M0)]),
        (Stage::IIIA, &[(T0, N2, M0), (T1, N2, M0), (T2, N0, M0), (T3, N2, M0), (T3, N1, M0)]),
        (Stage::IIIB, &[(T4, N0, M0), (T4, N1, M0), (T4, N2, M0)]),
        (Stage::IIIC, &[(TX, N3, M0)]),
        (Stage::IV, &[(TX, NY, M1)]),
    ];
    let c = tnm.collapsed();
    table.iter().filter(|(_, rows)| rows.contains(&(c.t(), c.n(), c.m()))).map(|(s, _)| *s).collect()
}

/// Outcome of one staging run.
#[derive(Debug, Clone, PartialEq)]
pub struct Staging {
    pub activated: QubitId,
    pub stages: StageSet,
    pub run: RunResult,
}

/// Compiled staging circuit plus simulator settings.
#[derive(Debug, Clone)]
pub struct IdcStager {
    network: RuleNetwork,
    compiled: CompiledCircuit,
    config: SimConfig,
}

impl IdcStager {
    pub fn new(options: CompileOptions, config: SimConfig) -> Result<Self, StagingError> {
        let network = build_idc_network();
        let compiled = compile_network(&network, options)?;
        Ok(IdcStager { network, compiled, config })
    }

    pub fn network(&self) -> &RuleNetwork {
        &self.network
    }

    pub fn compiled(&self) -> &CompiledCircuit {
        &self.compiled
    }

    /// Stages one TNM complex.
    pub fn stage(&self, tnm: TnmClass, engine: Engine) -> Result<Staging, StagingError> {
        self.activate(tnm_to_input_qubit(tnm)?, engine)
    }

    /// Stages a raw activation vector (`bits[k]` = qubit k), which must be
    /// one-hot. Rejected before any simulation otherwise.
    pub fn stage_activation(&self, bits: &[bool], engine: Engine) -> Result<Staging, StagingError> {
        if bits.len() != NUM_INPUT_QUBITS {
            return Err(StagingError::ActivationWidth { expected: NUM_INPUT_QUBITS, got: bits.len() });
        }
        let active: Vec<usize> = bits.iter().enumerate().filter(|(_, &b)| b).map(|(k, _)| k).collect();
        match active.as_slice() {
            [q] => self.activate(QubitId(*q), engine),
            _ => Err(StagingError::OneHotViolation { active: active.len() }),
        }
    }

    fn activate(&self, qubit: QubitId, engine: Engine) -> Result<Staging, StagingError> {
        let circuit = &self.compiled.circuit;
        let gates = std::iter::once(Gate::X { target: qubit }).chain(circuit.gates().iter().copied());
        let activated = circuit.with_gates(gates).map_err(CompileError::from)?;
        let run = run(&activated, BasisIndex(0), engine, &self.config)?;
        let stages = decode_stages(&run.clbits)?;
        Ok(Staging { activated: qubit, stages, run })
    }
}

/// Reference staging results: (TNM, activated qubit, measured bits c7..c0).
pub const REFERENCE_RESULTS: [(&str, usize, &str); NUM_INPUT_QUBITS] = [
    ("T0 N1 M0", 0, "00000110"),
    ("T0 N2 M0", 1, "00010000"),
    ("T1 N0 M0", 2, "00000001"),
    ("T1 N1 M0", 3, "00000110"),
    ("T1 N2 M0", 4, "00010000"),
    ("T2 N0 M0", 5, "00010100"),
    ("T2 N1 M0", 6, "00001000"),
    ("T3 N0 M0", 7, "00001000"),
    ("T3 N1 M0", 8, "00010000"),
    ("T3 N2 M0", 9, "00010000"),
    ("T4 N0 M0", 10, "00100000"),
    ("T4 N1 M0", 11, "00100000"),
    ("T4 N2 M0", 12, "00100000"),
    ("TX N3 M0", 13, "01000000"),
    ("TX NY M1", 14, "10000000"),
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::verify_compilation;

    fn stager() -> IdcStager {
        IdcStager::new(CompileOptions::default(), SimConfig::default()).unwrap()
    }

    fn tnm(s: &str) -> TnmClass {
        s.parse().unwrap()
    }

    #[test]
    fn network_shape() {
        let net = build_idc_network();
        assert_eq!(net.inputs().len(), NUM_INPUT_QUBITS);
        let outs: Vec<&str> = net.outputs().iter().map(|f| f.as_str()).collect();
        let names: Vec<&str> = Stage::ALL.iter().map(|s| s.name()).collect();
        assert_eq!(outs, names);
        for (i, c) in input_complexes().iter().enumerate() {
            assert_eq!(net.inputs()[i].as_str(), c.compact());
        }
    }

    #[test]
    fn circuit_budget() {
        let c = build_idc_circuit(CompileOptions::default()).unwrap();
        assert!(c.ancilla_count <= 10, "{}", c.ancilla_count);
        assert!(c.circuit.num_qubits() <= 25);
        assert_eq!(c.circuit.num_clbits(), 8);
        for (k, stage) in Stage::ALL.iter().enumerate() {
            assert_eq!(c.output_map[stage.name()].1 .0, k);
        }
    }

    #[test]
    fn circuit_verifies_exhaustively() {
        let net = build_idc_network();
        let c = build_idc_circuit(CompileOptions::default()).unwrap();
        let report = verify_compilation(&net, &c).unwrap();
        assert_eq!(report.assignments_checked, 1 << 15);
        assert!(report.is_ok());
    }

    #[test]
    fn stage_examples() {
        let s = stager();
        let r = s.stage(tnm("T0 N1 M0"), Engine::Fast).unwrap();
        assert_eq!(r.run.clbits.to_string(), "00000110");
        assert_eq!(r.stages, [Stage::IB, Stage::IIA].into_iter().collect());
        let r = s.stage(tnm("T2 N0 M0"), Engine::Fast).unwrap();
        assert_eq!(r.run.clbits.to_string(), "00010100");
        assert_eq!(r.stages, [Stage::IIIA, Stage::IIA].into_iter().collect());
        let r = s.stage(tnm("T4 N2 M0"), Engine::Fast).unwrap();
        assert_eq!(r.run.clbits.to_string(), "00100000");
        assert_eq!(r.stages.to_string(), "III-B");
    }

    #[test]
    fn decode_examples() {
        let d = |s: &str| decode_stages(&s.parse().unwrap());
        assert_eq!(d("00000001").unwrap().to_string(), "I-A");
        assert_eq!(d("00000000").unwrap(), StageSet::default());
        assert_eq!(d("10000000").unwrap().to_string(), "IV");
        assert_eq!(d("0001"), Err(StagingError::OutputWidth { expected: 8, got: 4 }));
    }

    #[test]
    fn one_hot_guard() {
        let s = stager();
        let mut bits = [false; NUM_INPUT_QUBITS];
        assert_eq!(s.stage_activation(&bits, Engine::Fast), Err(StagingError::OneHotViolation { active: 0 }));
        bits[3] = true;
        bits[9] = true;
        assert_eq!(s.stage_activation(&bits, Engine::Fast), Err(StagingError::OneHotViolation { active: 2 }));
        bits[9] = false;
        assert_eq!(s.stage_activation(&bits, Engine::Fast).unwrap().stages.to_string(), "I-B or II-A");
        assert!(matches!(s.stage_activation(&bits[..4], Engine::Fast), Err(StagingError::ActivationWidth { .. })));
    }

    #[test]
    fn rules_agree_with_reference_table() {
        let s = stager();
        for c in input_complexes() {
            let staged = s.stage(c, Engine::Fast).unwrap().stages;
            assert_eq!(staged, reference_stages(c), "{c}");
            assert!(!staged.is_empty());
        }
    }

    #[test]
    fn out_of_vocabulary() {
        assert!(matches!(stager().stage(tnm("T0 N0 M0"), Engine::Fast), Err(StagingError::NoRelevantComplex(_))));
    }
}

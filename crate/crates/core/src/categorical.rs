//! Categorical diagnosis over binary symptom and diagnosis complexes.
//!
//! A complex is a full truth assignment over the symptoms (or the
//! diagnoses), numbered by reading the bits as a binary number with the
//! first attribute most significant. The expanded logic base (ELB) pairs
//! every symptom complex with every diagnosis complex; constraint rules cut
//! it down to the reduced logic base (RLB), which is then used as a lookup
//! table for differential diagnosis.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::rules::{BoolExpr, ConstraintBody, ConstraintFile, FactId, RuleError};

/// Default cap on `n_symptoms + n_diagnoses` for ELB enumeration.
pub const DEFAULT_MAX_ATTRIBUTES: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoricalError {
    #[error("index {index} out of range for a complex of {bits} bits")]
    IndexOutOfRange { index: usize, bits: usize },
    #[error("logic base needs at least one symptom and one diagnosis")]
    EmptyDimension,
    #[error("{attributes} attributes exceed the enumeration cap of {max}")]
    CapExceeded { attributes: usize, max: usize },
    #[error("unknown atom `{0}` in constraint")]
    UnknownAtom(FactId),
    #[error("attribute `{0}` declared twice")]
    DuplicateAttribute(FactId),
    #[error("symptom complex has {got} bits, logic base expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{what}: file declares {declared}, command line asks for {requested}")]
    DeclarationMismatch { what: &'static str, declared: usize, requested: usize },
    #[error("number of {0} is neither declared nor given")]
    MissingDimension(&'static str),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// Ordered bit vector; position 0 is the most significant bit of the index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Complex {
    bits: Vec<bool>,
}

pub fn complex_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | usize::from(b))
}

pub fn index_to_complex(index: usize, n: usize) -> Result<Complex, CategoricalError> {
    if n >= usize::BITS as usize || index >> n != 0 {
        return Err(CategoricalError::IndexOutOfRange { index, bits: n });
    }
    Ok(Complex { bits: (0..n).map(|i| index >> (n - 1 - i) & 1 == 1).collect() })
}

impl Complex {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Complex { bits }
    }

    pub fn from_index(index: usize, n: usize) -> Result<Self, CategoricalError> {
        index_to_complex(index, n)
    }

    pub fn index(&self) -> usize {
        complex_index(&self.bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Parses `"10"` as s1 = 1, s2 = 0.
impl std::str::FromStr for Complex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(format!("invalid complex `{s}`: expected a string of 0/1"));
        }
        Ok(Complex { bits: s.chars().map(|c| c == '1').collect() })
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Symptom and diagnosis names, in bit order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    symptoms: Vec<FactId>,
    diagnoses: Vec<FactId>,
}

impl Vocabulary {
    pub fn new(symptoms: Vec<FactId>, diagnoses: Vec<FactId>) -> Result<Self, CategoricalError> {
        if symptoms.is_empty() || diagnoses.is_empty() {
            return Err(CategoricalError::EmptyDimension);
        }
        let all: Vec<&FactId> = symptoms.iter().chain(&diagnoses).collect();
        for (i, f) in all.iter().enumerate() {
            if all[..i].contains(f) {
                return Err(CategoricalError::DuplicateAttribute((*f).clone()));
            }
        }
        Ok(Vocabulary { symptoms, diagnoses })
    }

    /// `s1..sN` and `d1..dM`.
    pub fn numbered(n_symptoms: usize, n_diagnoses: usize) -> Result<Self, CategoricalError> {
        let names = |prefix: char, n: usize| -> Vec<FactId> {
            (1..=n).map(|i| FactId::new(format!("{prefix}{i}")).expect("generated names are valid")).collect()
        };
        Vocabulary::new(names('s', n_symptoms), names('d', n_diagnoses))
    }

    /// Vocabulary from a constraint file's declarations, checked against
    /// (or filled in from) requested dimensions.
    pub fn for_file(
        file: &ConstraintFile,
        n_symptoms: Option<usize>,
        n_diagnoses: Option<usize>,
    ) -> Result<Self, CategoricalError> {
        fn pick(
            what: &'static str,
            prefix: char,
            declared: &Option<Vec<FactId>>,
            requested: Option<usize>,
        ) -> Result<Vec<FactId>, CategoricalError> {
            match (declared, requested) {
                (Some(names), Some(n)) if names.len() != n => {
                    Err(CategoricalError::DeclarationMismatch { what, declared: names.len(), requested: n })
                }
                (Some(names), _) => Ok(names.clone()),
                (None, Some(n)) => Ok((1..=n).map(|i| FactId::new(format!("{prefix}{i}")).expect("valid")).collect()),
                (None, None) => Err(CategoricalError::MissingDimension(what)),
            }
        }
        Vocabulary::new(
            pick("symptoms", 's', &file.symptoms, n_symptoms)?,
            pick("diagnoses", 'd', &file.diagnoses, n_diagnoses)?,
        )
    }

    pub fn symptoms(&self) -> &[FactId] {
        &self.symptoms
    }

    pub fn diagnoses(&self) -> &[FactId] {
        &self.diagnoses
    }
}

/// One (symptom complex, diagnosis complex) pair, by complex index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Association {
    pub symptoms: usize,
    pub diagnoses: usize,
}

impl fmt::Display for Association {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}D{}", self.symptoms, self.diagnoses)
    }
}

/// A set of associations over a fixed vocabulary, ordered by
/// (diagnosis index, symptom index).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicBase {
    vocabulary: Vocabulary,
    associations: Vec<Association>,
}

impl LogicBase {
    /// The full cartesian product of symptom and diagnosis complexes.
    pub fn expanded(vocabulary: Vocabulary, max_attributes: usize) -> Result<Self, CategoricalError> {
        let (ns, nd) = (vocabulary.symptoms.len(), vocabulary.diagnoses.len());
        if ns + nd > max_attributes {
            return Err(CategoricalError::CapExceeded { attributes: ns + nd, max: max_attributes });
        }
        let associations = (0..1usize << nd)
            .flat_map(|d| (0..1usize << ns).map(move |s| Association { symptoms: s, diagnoses: d }))
            .collect();
        Ok(LogicBase { vocabulary, associations })
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn n_symptoms(&self) -> usize {
        self.vocabulary.symptoms.len()
    }

    pub fn n_diagnoses(&self) -> usize {
        self.vocabulary.diagnoses.len()
    }

    pub fn associations(&self) -> &[Association] {
        &self.associations
    }

    pub fn len(&self) -> usize {
        self.associations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.associations.is_empty()
    }

    pub fn contains(&self, association: Association) -> bool {
        self.associations
            .binary_search_by_key(&(association.diagnoses, association.symptoms), |a| (a.diagnoses, a.symptoms))
            .is_ok()
    }

    /// `S{i}D{j}` labels in base order.
    pub fn labels(&self) -> Vec<String> {
        self.associations.iter().map(ToString::to_string).collect()
    }

    /// Truth value of attribute `fact` in `association`, if it is one of ours.
    fn attribute(&self, association: Association, fact: &FactId) -> Option<bool> {
        let (ns, nd) = (self.n_symptoms(), self.n_diagnoses());
        if let Some(i) = self.vocabulary.symptoms.iter().position(|f| f == fact) {
            return Some(association.symptoms >> (ns - 1 - i) & 1 == 1);
        }
        let i = self.vocabulary.diagnoses.iter().position(|f| f == fact)?;
        Some(association.diagnoses >> (nd - 1 - i) & 1 == 1)
    }
}

/// ELB over `s1..sN`, `d1..dM` with the default attribute cap.
pub fn build_elb(n_symptoms: usize, n_diagnoses: usize) -> Result<LogicBase, CategoricalError> {
    LogicBase::expanded(Vocabulary::numbered(n_symptoms, n_diagnoses)?, DEFAULT_MAX_ATTRIBUTES)
}

/// A formula every surviving association must satisfy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRule {
    pub name: Option<String>,
    pub expr: BoolExpr,
}

impl ConstraintRule {
    pub fn new(expr: BoolExpr) -> Self {
        ConstraintRule { name: None, expr }
    }

    /// `(s1 | ... | sn) => (d1 | ... | dm)`: symptoms require some diagnosis.
    pub fn any_symptom_implies_diagnosis(vocabulary: &Vocabulary) -> Self {
        let any =
            |facts: &[FactId]| BoolExpr::any(facts.iter().cloned().map(BoolExpr::Atom)).expect("non-empty vocabulary");
        ConstraintRule::new(BoolExpr::implies(any(&vocabulary.symptoms), any(&vocabulary.diagnoses)))
    }

    /// Resolves a parsed constraint file against `vocabulary`.
    pub fn from_file(file: &ConstraintFile, vocabulary: &Vocabulary) -> Vec<ConstraintRule> {
        file.constraints
            .iter()
            .map(|c| {
                let mut rule = match &c.body {
                    ConstraintBody::Formula(e) => ConstraintRule::new(e.clone()),
                    ConstraintBody::AnySymptomImpliesDiagnosis => {
                        ConstraintRule::any_symptom_implies_diagnosis(vocabulary)
                    }
                };
                rule.name = c.name.clone();
                rule
            })
            .collect()
    }
}

/// Keeps the associations whose joint assignment satisfies every constraint.
pub fn reduce_to_rlb(elb: &LogicBase, constraints: &[ConstraintRule]) -> Result<LogicBase, CategoricalError> {
    let known: Vec<&FactId> = elb.vocabulary.symptoms.iter().chain(&elb.vocabulary.diagnoses).collect();
    for c in constraints {
        if let Some(atom) = c.expr.atoms().into_iter().find(|a| !known.contains(a)) {
            return Err(CategoricalError::UnknownAtom(atom.clone()));
        }
    }
    let associations = elb
        .associations
        .par_iter()
        .filter(|&&assoc| {
            let lookup = |f: &FactId| elb.attribute(assoc, f);
            constraints.iter().all(|c| c.expr.evaluate(&lookup).expect("atoms checked above"))
        })
        .copied()
        .collect();
    Ok(LogicBase { vocabulary: elb.vocabulary.clone(), associations })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiseaseStatus {
    Present,
    Absent,
    Uncertain,
}

impl fmt::Display for DiseaseStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiseaseStatus::Present => "present",
            DiseaseStatus::Absent => "absent",
            DiseaseStatus::Uncertain => "uncertain",
        })
    }
}

/// Per-disease verdict over the compatible diagnosis complexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub statuses: Vec<(FactId, DiseaseStatus)>,
    /// Compatible diagnosis complexes, ascending by index; never empty.
    pub compatible: Vec<Complex>,
}

impl Verdict {
    pub fn status(&self, disease: &str) -> Option<DiseaseStatus> {
        self.statuses.iter().find(|(f, _)| f.as_str() == disease).map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnosis {
    Verdict(Verdict),
    /// The symptom complex appears in no association of the logic base.
    Inconsistent,
}

/// Differential diagnosis of a symptom complex against a logic base.
pub fn diagnose(symptoms: &Complex, base: &LogicBase) -> Result<Diagnosis, CategoricalError> {
    if symptoms.len() != base.n_symptoms() {
        return Err(CategoricalError::DimensionMismatch { expected: base.n_symptoms(), got: symptoms.len() });
    }
    let s = symptoms.index();
    let nd = base.n_diagnoses();
    let mut indices: Vec<usize> = base.associations.iter().filter(|a| a.symptoms == s).map(|a| a.diagnoses).collect();
    if indices.is_empty() {
        return Ok(Diagnosis::Inconsistent);
    }
    indices.sort_unstable();
    indices.dedup();
    let compatible: Vec<Complex> =
        indices.iter().map(|&d| index_to_complex(d, nd).expect("indices come from the base")).collect();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for c in &compatible {
        for (i, _) in c.bits().iter().enumerate().filter(|(_, &b)| b) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let statuses = base
        .vocabulary
        .diagnoses
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let present = counts.get(&i).copied().unwrap_or(0);
            let status = if present == compatible.len() {
                DiseaseStatus::Present
            } else if present == 0 {
                DiseaseStatus::Absent
            } else {
                DiseaseStatus::Uncertain
            };
            (name.clone(), status)
        })
        .collect();
    Ok(Diagnosis::Verdict(Verdict { statuses, compatible }))
}

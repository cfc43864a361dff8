//! TNM classification and the map from TNM complexes to input qubits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StagingError;
use crate::circuit::QubitId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TCategory {
    T0,
    T1,
    T2,
    T3,
    T4,
    /// Any tumour; used when nodes or metastasis decide the complex alone.
    TX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NCategory {
    N0,
    N1,
    N2,
    N3,
    /// Any nodal status; only with distant metastasis.
    NY,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MCategory {
    M0,
    M1,
}

/// A (T, N, M) triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TnmClass {
    t: TCategory,
    n: NCategory,
    m: MCategory,
}

impl TnmClass {
    /// `TX` is only valid with `N3 M0` or with `M1`; `NY` only with `M1`.
    pub fn new(t: TCategory, n: NCategory, m: MCategory) -> Result<Self, StagingError> {
        let metastatic = m == MCategory::M1;
        let tx_ok = t != TCategory::TX || metastatic || n == NCategory::N3;
        let ny_ok = n != NCategory::NY || metastatic;
        if tx_ok && ny_ok {
            Ok(TnmClass { t, n, m })
        } else {
            Err(StagingError::InvalidTnm(format!("{t:?} {n:?} {m:?}")))
        }
    }

    pub fn t(&self) -> TCategory {
        self.t
    }

    pub fn n(&self) -> NCategory {
        self.n
    }

    pub fn m(&self) -> MCategory {
        self.m
    }

    /// Folds onto the staging vocabulary: every `M1` case is `TX NY M1`,
    /// every `N3 M0` case is `TX N3 M0`.
    pub fn collapsed(self) -> Self {
        match (self.n, self.m) {
            (_, MCategory::M1) => TnmClass { t: TCategory::TX, n: NCategory::NY, m: MCategory::M1 },
            (NCategory::N3, MCategory::M0) => TnmClass { t: TCategory::TX, n: NCategory::N3, m: MCategory::M0 },
            _ => self,
        }
    }

    /// Compact form used as a fact name, e.g. `T2N1M0`.
    pub fn compact(&self) -> String {
        format!("{:?}{:?}{:?}", self.t, self.n, self.m)
    }
}

impl fmt::Display for TnmClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?} {:?}", self.t, self.n, self.m)
    }
}

fn parse_t(s: &str) -> Option<TCategory> {
    Some(match s {
        "T0" => TCategory::T0,
        "T1" => TCategory::T1,
        "T2" => TCategory::T2,
        "T3" => TCategory::T3,
        "T4" => TCategory::T4,
        "TX" => TCategory::TX,
        _ => return None,
    })
}

fn parse_n(s: &str) -> Option<NCategory> {
    Some(match s {
        "N0" => NCategory::N0,
        "N1" => NCategory::N1,
        "N2" => NCategory::N2,
        "N3" => NCategory::N3,
        "NY" => NCategory::NY,
        _ => return None,
    })
}

fn parse_m(s: &str) -> Option<MCategory> {
    Some(match s {
        "M0" => MCategory::M0,
        "M1" => MCategory::M1,
        _ => return None,
    })
}

/// Accepts `T2,N1,M0`, `T2 N1 M0` and `T2N1M0` (case-insensitive).
impl FromStr for TnmClass {
    type Err = StagingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let mut parts: Vec<&str> =
            upper.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        if parts.len() == 1 && parts[0].len() == 6 {
            let p = parts[0];
            parts = vec![&p[0..2], &p[2..4], &p[4..6]];
        }
        let bad = || StagingError::InvalidTnm(s.trim().to_string());
        match parts.as_slice() {
            [t, n, m] => {
                TnmClass::new(parse_t(t).ok_or_else(bad)?, parse_n(n).ok_or_else(bad)?, parse_m(m).ok_or_else(bad)?)
            }
            _ => Err(bad()),
        }
    }
}

/// The fifteen complexes that activate the staging circuit, in qubit order.
pub const INPUT_COMPLEXES: [(TCategory, NCategory, MCategory); 15] = {
    use MCategory::*;
    use NCategory::*;
    use TCategory::*;
    [
        (T0, N1, M0),
        (T0, N2, M0),
        (T1, N0, M0),
        (T1, N1, M0),
        (T1, N2, M0),
        (T2, N0, M0),
        (T2, N1, M0),
        (T3, N0, M0),
        (T3, N1, M0),
        (T3, N2, M0),
        (T4, N0, M0),
        (T4, N1, M0),
        (T4, N2, M0),
        (TX, N3, M0),
        (TX, NY, M1),
    ]
};

/// All fifteen input complexes as [`TnmClass`] values, in qubit order.
pub fn input_complexes() -> Vec<TnmClass> {
    INPUT_COMPLEXES.iter().map(|&(t, n, m)| TnmClass { t, n, m }).collect()
}

/// Input qubit activated by `tnm`, after collapsing onto the staging
/// vocabulary.
pub fn tnm_to_input_qubit(tnm: TnmClass) -> Result<QubitId, StagingError> {
    let c = tnm.collapsed();
    INPUT_COMPLEXES
        .iter()
        .position(|&(t, n, m)| (t, n, m) == (c.t, c.n, c.m))
        .map(QubitId)
        .ok_or(StagingError::NoRelevantComplex(tnm))
}

/// Examination findings feeding the TNM classifier. Field names are the
/// JSON keys accepted by the CLI.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClinicalFindings {
    #[serde(default)]
    pub tumour_size_mm: Option<f64>,
    #[serde(default)]
    pub chest_wall_or_skin_spread: bool,
    #[serde(default)]
    pub axillary_nodes_involved: u32,
    #[serde(default)]
    pub node_cluster_mm: Option<f64>,
    #[serde(default)]
    pub supra_or_infraclavicular_nodes: bool,
    #[serde(default)]
    pub internal_mammary_nodes: bool,
    #[serde(default)]
    pub distant_metastasis: bool,
}

impl ClinicalFindings {
    pub fn has_nodal_finding(&self) -> bool {
        self.axillary_nodes_involved > 0 || self.supra_or_infraclavicular_nodes || self.internal_mammary_nodes
    }

    pub fn validate(&self) -> Result<(), StagingError> {
        let bad = |msg: &str| Err(StagingError::InvalidFindings(msg.to_string()));
        for (name, v) in [("tumour_size_mm", self.tumour_size_mm), ("node_cluster_mm", self.node_cluster_mm)] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(StagingError::InvalidFindings(format!("{name} must be a non-negative length")));
                }
            }
        }
        if self.node_cluster_mm.is_some() && !self.has_nodal_finding() {
            return bad("node_cluster_mm given without any nodal finding");
        }
        Ok(())
    }
}

/// T/N/M from findings.
///
/// Size intervals are closed on the right: exactly 20 mm is T1 and exactly
/// 50 mm is T2. Chest-wall or skin spread is T4 at any size.
pub fn classify_tnm(findings: &ClinicalFindings) -> TnmClass {
    let t = if findings.chest_wall_or_skin_spread {
        TCategory::T4
    } else {
        match findings.tumour_size_mm {
            None => TCategory::T0,
            Some(mm) if mm <= 0.0 => TCategory::T0,
            Some(mm) if mm <= 20.0 => TCategory::T1,
            Some(mm) if mm <= 50.0 => TCategory::T2,
            Some(_) => TCategory::T3,
        }
    };
    let axillary = findings.axillary_nodes_involved;
    let n = if axillary >= 10 || findings.supra_or_infraclavicular_nodes {
        NCategory::N3
    } else if axillary >= 4 {
        NCategory::N2
    } else if axillary >= 1 || findings.internal_mammary_nodes {
        NCategory::N1
    } else {
        NCategory::N0
    };
    let m = if findings.distant_metastasis { MCategory::M1 } else { MCategory::M0 };
    TnmClass { t, n, m }.collapsed()
}

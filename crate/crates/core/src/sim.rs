//! Circuit execution: a dense statevector engine and a single-basis-state
//! fast path.
//!
//! Qubit k is bit k of a basis index (q0 least significant). X, CNOT and
//! CCNOT permute basis states, so starting from a basis state the fast path
//! only ever tracks one index; the dense engine stores all 2^n amplitudes
//! and is the cross-check.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::circuit::{Circuit, Gate};

/// Default dense-engine width cap: 2^26 amplitudes, 1 GiB.
pub const DEFAULT_MAX_QUBITS: usize = 26;
/// The fast path stores the basis index in a `u64`.
pub const FAST_MAX_QUBITS: usize = 64;
/// Environment variable overriding [`DEFAULT_MAX_QUBITS`].
pub const MAX_QUBITS_ENV: &str = "QRBS_MAX_QUBITS";

const MEASURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("{engine} engine is limited to {max} qubits, circuit has {width}")]
    TooWide { engine: Engine, width: usize, max: usize },
    #[error("basis index {index} does not fit in {num_qubits} qubits")]
    BasisOutOfRange { index: u64, num_qubits: usize },
    #[error("gate {0} is not unitary")]
    NotUnitary(Gate),
    #[error("gate {gate} out of range for {num_qubits} qubits")]
    GateOutOfRange { gate: Gate, num_qubits: usize },
    #[error("qubit q{qubit} out of range for {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("measuring q{qubit} of a superposed state (P(1) = {probability})")]
    SuperposedMeasurement { qubit: usize, probability: f64 },
    #[error("invalid bit string `{0}`")]
    BadBitString(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    #[default]
    Fast,
    StateVector,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Fast => "fast",
            Engine::StateVector => "statevector",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fast" => Ok(Engine::Fast),
            "statevector" => Ok(Engine::StateVector),
            other => Err(format!("unknown engine `{other}` (expected `fast` or `statevector`)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    /// Dense-engine width cap.
    pub max_qubits: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { max_qubits: DEFAULT_MAX_QUBITS }
    }
}

impl SimConfig {
    /// Default config, with the cap taken from `QRBS_MAX_QUBITS` when set
    /// to a valid integer.
    pub fn from_env() -> Self {
        let max_qubits =
            std::env::var(MAX_QUBITS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_MAX_QUBITS);
        SimConfig { max_qubits }
    }
}

/// A computational basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct BasisIndex(pub u64);

impl BasisIndex {
    /// `bits[k]` is qubit k.
    pub fn from_bits(bits: &[bool]) -> Self {
        BasisIndex(bits.iter().enumerate().fold(0, |acc, (k, &b)| acc | (u64::from(b) << k)))
    }

    /// Parses a string written most-significant (highest qubit) first.
    pub fn parse_msb_first(text: &str) -> Result<(Self, usize), SimError> {
        let text = text.trim();
        if text.is_empty() || text.len() > FAST_MAX_QUBITS || !text.chars().all(|c| c == '0' || c == '1') {
            return Err(SimError::BadBitString(text.to_string()));
        }
        let index = text.chars().fold(0u64, |acc, c| acc << 1 | u64::from(c == '1'));
        Ok((BasisIndex(index), text.len()))
    }

    pub fn bit(self, qubit: usize) -> bool {
        self.0 >> qubit & 1 == 1
    }

    pub fn with_bit(self, qubit: usize) -> Self {
        BasisIndex(self.0 | 1 << qubit)
    }

    pub fn count_ones(self) -> u32 {
        self.0.count_ones()
    }
}

/// Classical register contents, `bits[k]` = c_k.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ClassicalBits(pub Vec<bool>);

impl ClassicalBits {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, k: usize) -> Option<bool> {
        self.0.get(k).copied()
    }
}

/// Highest classical bit first, so `c0` is the last character.
impl fmt::Display for ClassicalBits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in self.0.iter().rev() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ClassicalBits {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if !s.chars().all(|c| c == '0' || c == '1') {
            return Err(SimError::BadBitString(s.to_string()));
        }
        Ok(ClassicalBits(s.chars().rev().map(|c| c == '1').collect()))
    }
}

/// Dense state over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// |basis> on `num_qubits` qubits, refusing widths above `max_qubits`.
pub fn init_state(num_qubits: usize, basis: BasisIndex, max_qubits: usize) -> Result<StateVector, SimError> {
    if num_qubits > max_qubits {
        return Err(SimError::TooWide { engine: Engine::StateVector, width: num_qubits, max: max_qubits });
    }
    if num_qubits < 64 && basis.0 >> num_qubits != 0 {
        return Err(SimError::BasisOutOfRange { index: basis.0, num_qubits });
    }
    let mut amplitudes = zeroed_amplitudes(1usize << num_qubits);
    amplitudes[basis.0 as usize] = Complex64::new(1.0, 0.0);
    Ok(StateVector { num_qubits, amplitudes })
}

// Zero-filled allocation straight from the allocator, so pages that are
// never written stay unmapped.
fn zeroed_amplitudes(len: usize) -> Vec<Complex64> {
    let layout = std::alloc::Layout::array::<Complex64>(len).expect("amplitude count overflows");
    // SAFETY: Complex64 is #[repr(C)] over two f64 and all-zero bits are
    // 0.0 + 0.0i; the buffer is allocated with the layout Vec expects for
    // `len` elements of capacity `len`.
    unsafe {
        let ptr = std::alloc::alloc_zeroed(layout) as *mut Complex64;
        if ptr.is_null() {
            std::alloc::handle_alloc_error(layout);
        }
        Vec::from_raw_parts(ptr, len, len)
    }
}

// Spreads the bits of `k` over the positions not listed in `fixed`
// (ascending), leaving zeros at the listed positions.
#[inline(always)]
fn deposit<const N: usize>(mut k: usize, fixed: &[usize; N]) -> usize {
    for &p in fixed {
        let low = k & ((1 << p) - 1);
        k = (k >> p) << (p + 1) | low;
    }
    k
}

fn sorted<const N: usize>(mut qubits: [usize; N]) -> [usize; N] {
    qubits.sort_unstable();
    qubits
}

#[inline(always)]
fn is_zero(a: &Complex64) -> bool {
    a.re.to_bits() | a.im.to_bits() == 0
}

// Swaps every pair (i, i | flip) where i has the control bits set and the
// target bit clear. Runs below the lowest fixed qubit are contiguous, so the
// inner loop walks them linearly. Pairs that are both zero are left
// unwritten, which keeps pages the state never reaches unallocated.
fn swap_pairs<const N: usize>(amps: &mut [Complex64], fixed: [usize; N], control_mask: usize, target: usize) {
    let n = amps.len().trailing_zeros() as usize;
    let run = 1usize << fixed[0];
    let flip = 1usize << target;
    for outer in 0..1usize << (n - N - fixed[0]) {
        let base = deposit(outer << fixed[0], &fixed) | control_mask;
        let (lo, hi) = amps.split_at_mut(base + flip);
        let (lo, hi) = (&mut lo[base..base + run], &mut hi[..run]);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            if !(is_zero(a) && is_zero(b)) {
                std::mem::swap(a, b);
            }
        }
    }
}

impl StateVector {
    /// Builds a state from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Option<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return None;
        }
        Some(StateVector { num_qubits: len.trailing_zeros() as usize, amplitudes })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Probability that measuring `qubit` yields 1.
    pub fn probability_one(&self, qubit: usize) -> f64 {
        let stride = 1usize << qubit;
        self.amplitudes.chunks_exact(2 * stride).flat_map(|block| &block[stride..]).map(Complex64::norm_sqr).sum()
    }

    /// The basis state holding all the weight, if there is exactly one
    /// nonzero amplitude.
    pub fn single_support(&self) -> Option<(BasisIndex, Complex64)> {
        let mut found = None;
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() != 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some((BasisIndex(i as u64), *a));
            }
        }
        found
    }

    /// Applies a unitary gate by swapping amplitude pairs that differ in the
    /// target bit and have every control bit set.
    pub fn apply(&mut self, gate: &Gate) -> Result<(), SimError> {
        let n = self.num_qubits;
        if gate.qubits().iter().any(|q| q.0 >= n) {
            if let Gate::Measure { .. } = gate {
                return Err(SimError::NotUnitary(*gate));
            }
            return Err(SimError::GateOutOfRange { gate: *gate, num_qubits: n });
        }
        let amps = &mut self.amplitudes;
        match *gate {
            Gate::X { target } => swap_pairs(amps, [target.0], 0, target.0),
            Gate::Cnot { control, target } => swap_pairs(amps, sorted([control.0, target.0]), 1 << control.0, target.0),
            Gate::Ccnot { controls: [a, b], target } => {
                swap_pairs(amps, sorted([a.0, b.0, target.0]), 1 << a.0 | 1 << b.0, target.0)
            }
            Gate::Measure { .. } => return Err(SimError::NotUnitary(*gate)),
        }
        Ok(())
    }

    /// Deterministic measurement of `qubit`; fails unless the outcome has
    /// probability 0 or 1.
    pub fn measure(&self, qubit: usize) -> Result<bool, SimError> {
        if qubit >= self.num_qubits {
            return Err(SimError::QubitOutOfRange { qubit, num_qubits: self.num_qubits });
        }
        let p = self.probability_one(qubit);
        if p >= 1.0 - MEASURE_TOLERANCE {
            Ok(true)
        } else if p <= MEASURE_TOLERANCE {
            Ok(false)
        } else {
            Err(SimError::SuperposedMeasurement { qubit, probability: p })
        }
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &StateVector) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Applies a unitary gate to an owned state.
pub fn apply_gate(mut state: StateVector, gate: &Gate) -> Result<StateVector, SimError> {
    state.apply(gate)?;
    Ok(state)
}

/// Lists nonzero amplitudes as `|q_{n-1}..q0>: re+imi` lines.
impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() != 0.0 {
                writeln!(f, "|{:0width$b}>: {:+.6}{:+.6}i", i, a.re, a.im, width = self.num_qubits.max(1))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FinalState {
    Basis(BasisIndex),
    Dense(StateVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub clbits: ClassicalBits,
    pub final_state: FinalState,
}

fn check_initial(circuit: &Circuit, initial: BasisIndex) -> Result<(), SimError> {
    let n = circuit.num_qubits();
    if n < 64 && initial.0 >> n != 0 {
        return Err(SimError::BasisOutOfRange { index: initial.0, num_qubits: n });
    }
    Ok(())
}

/// Tracks a single basis index through the circuit in O(#gates).
pub fn run_fast(circuit: &Circuit, initial: BasisIndex) -> Result<RunResult, SimError> {
    let n = circuit.num_qubits();
    if n > FAST_MAX_QUBITS {
        return Err(SimError::TooWide { engine: Engine::Fast, width: n, max: FAST_MAX_QUBITS });
    }
    check_initial(circuit, initial)?;
    let mut index = initial.0;
    let mut clbits = vec![false; circuit.num_clbits()];
    for gate in circuit.gates() {
        match *gate {
            Gate::X { target } => index ^= 1 << target.0,
            Gate::Cnot { control, target } => index ^= (index >> control.0 & 1) << target.0,
            Gate::Ccnot { controls: [a, b], target } => index ^= (index >> a.0 & index >> b.0 & 1) << target.0,
            Gate::Measure { qubit, clbit } => clbits[clbit.0] = index >> qubit.0 & 1 == 1,
        }
    }
    Ok(RunResult { clbits: ClassicalBits(clbits), final_state: FinalState::Basis(BasisIndex(index)) })
}

/// Runs the circuit on the dense engine.
pub fn run_statevector(circuit: &Circuit, initial: BasisIndex, config: &SimConfig) -> Result<RunResult, SimError> {
    check_initial(circuit, initial)?;
    let mut state = init_state(circuit.num_qubits(), initial, config.max_qubits)?;
    let mut clbits = vec![false; circuit.num_clbits()];
    for gate in circuit.gates() {
        match *gate {
            Gate::Measure { qubit, clbit } => clbits[clbit.0] = state.measure(qubit.0)?,
            ref g => state.apply(g)?,
        }
    }
    Ok(RunResult { clbits: ClassicalBits(clbits), final_state: FinalState::Dense(state) })
}

pub fn run(circuit: &Circuit, initial: BasisIndex, engine: Engine, config: &SimConfig) -> Result<RunResult, SimError> {
    match engine {
        Engine::Fast => run_fast(circuit, initial),
        Engine::StateVector => run_statevector(circuit, initial, config),
    }
}

/// True iff both runs measured the same bits and the dense state is the
/// fast path's basis state up to 1e-12 in modulus.
pub fn results_agree(dense: &RunResult, fast: &RunResult) -> bool {
    if dense.clbits != fast.clbits {
        return false;
    }
    match (&dense.final_state, &fast.final_state) {
        (FinalState::Dense(state), FinalState::Basis(index)) => match state.single_support() {
            Some((at, amp)) => at == *index && (amp.norm() - 1.0).abs() <= 1e-12,
            None => false,
        },
        _ => false,
    }
}

/// Runs both engines from `initial` and compares them.
pub fn engines_agree(circuit: &Circuit, initial: BasisIndex, config: &SimConfig) -> Result<bool, SimError> {
    let dense = run_statevector(circuit, initial, config)?;
    let fast = run_fast(circuit, initial)?;
    Ok(results_agree(&dense, &fast))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn init_examples() {
        assert_eq!(init_state(3, BasisIndex(0), 26).unwrap().amplitudes()[0], c(1.0));
        assert_eq!(init_state(3, BasisIndex(0b101), 26).unwrap().amplitudes()[5], c(1.0));
        let s = init_state(25, BasisIndex(0).with_bit(5), 26).unwrap();
        assert_eq!(s.amplitudes()[32], c(1.0));
        assert_eq!(s.single_support(), Some((BasisIndex(32), c(1.0))));
        assert!(matches!(init_state(27, BasisIndex(0), 26), Err(SimError::TooWide { .. })));
        assert!(matches!(init_state(2, BasisIndex(4), 26), Err(SimError::BasisOutOfRange { .. })));
    }

    #[test]
    fn x_flips() {
        let s = apply_gate(init_state(1, BasisIndex(0), 26).unwrap(), &Gate::x(0)).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0), c(1.0)]);
    }

    #[test]
    fn cnot_on_superposition() {
        // (|00> + |10>)/sqrt2 with kets written q0 q1: indices 0 and 1.
        let h = c(FRAC_1_SQRT_2);
        let s = StateVector::from_amplitudes(vec![h, h, c(0.0), c(0.0)]).unwrap();
        let s = apply_gate(s, &Gate::cnot(0, 1)).unwrap();
        assert_eq!(s.amplitudes(), &[h, c(0.0), c(0.0), h]);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(matches!(s.measure(1), Err(SimError::SuperposedMeasurement { qubit: 1, .. })));
    }

    #[test]
    fn toffoli_on_011() {
        let s = apply_gate(init_state(3, BasisIndex(0b011), 26).unwrap(), &Gate::ccnot(0, 1, 2)).unwrap();
        assert_eq!(s.single_support(), Some((BasisIndex(0b111), c(1.0))));
    }

    #[test]
    fn measure_is_not_applied_as_gate() {
        let mut s = init_state(1, BasisIndex(0), 26).unwrap();
        assert!(matches!(s.apply(&Gate::measure(0, 0)), Err(SimError::NotUnitary(_))));
    }

    #[test]
    fn empty_circuit_run() {
        let circuit = Circuit::new(3, 0);
        let fast = run_fast(&circuit, BasisIndex(6)).unwrap();
        assert!(fast.clbits.is_empty());
        assert_eq!(fast.clbits.to_string(), "");
        assert_eq!(fast.final_state, FinalState::Basis(BasisIndex(6)));
        assert!(engines_agree(&circuit, BasisIndex(6), &SimConfig::default()).unwrap());
    }

    #[test]
    fn bits_print_high_first() {
        let bits = ClassicalBits(vec![false, false, true, false, true, false, false, false]);
        assert_eq!(bits.to_string(), "00010100");
        assert_eq!("00010100".parse::<ClassicalBits>().unwrap(), bits);
        assert_eq!(BasisIndex::parse_msb_first("100").unwrap(), (BasisIndex(4), 3));
        assert!(BasisIndex::parse_msb_first("10a").is_err());
    }

    #[test]
    fn mutant_disagrees() {
        let circuit = Circuit::from_gates(3, 1, [Gate::x(0), Gate::cnot(0, 2), Gate::measure(2, 0)]).unwrap();
        let mutant = circuit.with_gates([Gate::x(0), Gate::measure(2, 0)]).unwrap();
        let dense = run_statevector(&circuit, BasisIndex(0), &SimConfig::default()).unwrap();
        let fast = run_fast(&mutant, BasisIndex(0)).unwrap();
        assert!(!results_agree(&dense, &fast));
        assert!(results_agree(&dense, &run_fast(&circuit, BasisIndex(0)).unwrap()));
    }

    #[test]
    fn deposit_skips_positions() {
        assert_eq!(deposit(0b11, &[0]), 0b110);
        assert_eq!(deposit(0b111, &[1, 3]), 0b10101);
    }
}

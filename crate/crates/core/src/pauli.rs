//! Signed Pauli strings on up to [`MAX_QUBITS`] qubits in symplectic (x, z) bit form.
//!
//! Qubits are labelled 1..=n in the public interface. Internally qubit `q` owns bit
//! `n - q` of both masks, which is also its bit in a computational-basis index, so the
//! basis label `|q1 q2 ... qn>` reads as a binary number with qubit 1 most significant.
//!
//! A string is stored as `i^e * P1 ⊗ ... ⊗ Pn` with Hermitian letters, where a qubit
//! carries `Y` exactly when both of its bits are set.

use std::fmt;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::state::StateVector;

pub const MAX_QUBITS: usize = 12;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const NON_IDENTITY: [Letter; 3] = [Letter::X, Letter::Y, Letter::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// Global phase of a Pauli string, one of `{+1, +i, -1, -i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    /// Phase `i^k`.
    pub fn from_exponent(k: u32) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u32 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        i_pow(self.exponent())
    }

    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }
}

pub(crate) fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// A signed tensor product of single-qubit Paulis.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u8,
    x: u16,
    z: u16,
    phase: Phase,
}

impl PauliString {
    pub fn identity(n: usize) -> Result<Self> {
        check_qubit_count(n)?;
        Ok(Self { n: n as u8, x: 0, z: 0, phase: Phase::PlusOne })
    }

    /// Tensor product with phase +1 from `(qubit, letter)` pairs, qubits 1-based.
    pub fn from_spec(spec: &[(usize, Letter)], n: usize) -> Result<Self> {
        let mut p = Self::identity(n)?;
        let mut seen = 0u16;
        for &(q, letter) in spec {
            if q == 0 || q > n {
                return Err(Error::InvalidInput(format!("qubit index {q} outside 1..={n}")));
            }
            let bit = 1u16 << (n - q);
            if seen & bit != 0 {
                return Err(Error::InvalidInput(format!("qubit {q} appears twice")));
            }
            seen |= bit;
            let (x, z) = letter.bits();
            if x {
                p.x |= bit;
            }
            if z {
                p.z |= bit;
            }
        }
        Ok(p)
    }

    /// Same letter on every listed qubit, e.g. `uniform(Letter::Z, &[1, 4, 7], 9)`.
    pub fn uniform(letter: Letter, qubits: &[usize], n: usize) -> Result<Self> {
        let spec: Vec<_> = qubits.iter().map(|&q| (q, letter)).collect();
        Self::from_spec(&spec, n)
    }

    pub fn single(q: usize, letter: Letter, n: usize) -> Result<Self> {
        Self::from_spec(&[(q, letter)], n)
    }

    /// Builds a string directly from masks in basis-index bit order.
    pub fn from_masks(n: usize, x_bits: u16, z_bits: u16, phase: Phase) -> Result<Self> {
        check_qubit_count(n)?;
        let full = full_mask(n);
        if (x_bits | z_bits) & !full != 0 {
            return Err(Error::InvalidInput(format!("mask has bits beyond {n} qubits")));
        }
        Ok(Self { n: n as u8, x: x_bits, z: z_bits, phase })
    }

    pub fn num_qubits(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u16 {
        self.x
    }

    pub fn z_bits(&self) -> u16 {
        self.z
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn with_phase(mut self, phase: Phase) -> Self {
        self.phase = phase;
        self
    }

    pub fn letter(&self, q: usize) -> Letter {
        assert!(q >= 1 && q <= self.num_qubits(), "qubit {q} out of range");
        let bit = 1u16 << (self.num_qubits() - q);
        Letter::from_bits(self.x & bit != 0, self.z & bit != 0)
    }

    /// Number of qubits acted on non-trivially.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// No X or Y component: the operator is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.x == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_real()
    }

    /// Hermitian conjugate (letters are Hermitian, so only the phase is conjugated).
    pub fn adjoint(&self) -> Self {
        let e = self.phase.exponent();
        Self { phase: Phase::from_exponent((4 - e) % 4), ..*self }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        check_dim(self.num_qubits(), other.num_qubits())?;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^x Z^z, with Y = i X Z per qubit.
        let e = self.phase.exponent()
            + other.phase.exponent()
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones();
        let e = (e + 4 * 16 - (x & z).count_ones()) % 4;
        Ok(Self { n: self.n, x, z, phase: Phase::from_exponent(e) })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        check_dim(self.num_qubits(), other.num_qubits())?;
        let overlap = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        Ok(overlap % 2 == 0)
    }

    /// Coefficient `c` with `P|b> = c |b xor x>`.
    #[inline]
    pub fn basis_coefficient(&self, b: usize) -> Complex64 {
        let e = self.phase.exponent() + (self.x & self.z).count_ones() + 2 * ((self.z as usize) & b).count_ones();
        i_pow(e)
    }

    /// Index of `P|b>` up to the coefficient.
    #[inline]
    pub fn basis_image(&self, b: usize) -> usize {
        b ^ self.x as usize
    }

    pub fn apply_to_state(&self, psi: &StateVector) -> Result<StateVector> {
        check_dim(self.num_qubits(), psi.num_qubits())?;
        let amps = psi.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (b, &a) in amps.iter().enumerate() {
            out[self.basis_image(b)] = self.basis_coefficient(b) * a;
        }
        Ok(StateVector::from_raw(psi.num_qubits(), out))
    }

    /// Dense matrix in the computational basis. Intended for tests and small n.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for b in 0..dim {
            m[self.basis_image(b)][b] = self.basis_coefficient(b);
        }
        m
    }

    /// Parses the textual notation, e.g. `"Z1 Z4 Z7"`, `"-i Y3"`, `"I"`.
    ///
    /// An optional leading phase token is one of `+`, `-`, `+i`, `i`, `-i`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut tokens = text.split_whitespace().peekable();
        let phase = match tokens.peek().copied() {
            Some("+") | Some("+1") => Some(Phase::PlusOne),
            Some("-") | Some("-1") => Some(Phase::MinusOne),
            Some("i") | Some("+i") => Some(Phase::PlusI),
            Some("-i") => Some(Phase::MinusI),
            _ => None,
        };
        if phase.is_some() {
            tokens.next();
        }
        let mut spec = Vec::new();
        for tok in tokens {
            if tok == "I" {
                continue;
            }
            let mut chars = tok.chars();
            let letter = chars
                .next()
                .and_then(Letter::from_symbol)
                .ok_or_else(|| Error::InvalidInput(format!("bad Pauli token {tok:?}")))?;
            let q: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad qubit index in {tok:?}")))?;
            spec.push((q, letter));
        }
        Ok(Self::from_spec(&spec, n)?.with_phase(phase.unwrap_or(Phase::PlusOne)))
    }

    /// Non-identity factors as `(qubit, letter)`, in increasing qubit order.
    pub fn factors(&self) -> Vec<(usize, Letter)> {
        (1..=self.num_qubits())
            .map(|q| (q, self.letter(q)))
            .filter(|&(_, l)| l != Letter::I)
            .collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.phase {
            Phase::PlusOne => {}
            Phase::MinusOne => parts.push("-".into()),
            Phase::PlusI => parts.push("+i".into()),
            Phase::MinusI => parts.push("-i".into()),
        }
        let factors = self.factors();
        if factors.is_empty() {
            parts.push("I".into());
        }
        parts.extend(factors.iter().map(|(q, l)| format!("{}{}", l.symbol(), q)));
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidInput(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

fn full_mask(n: usize) -> u16 {
    ((1u32 << n) - 1) as u16
}

/// All Pauli strings (phase +1) of exactly `weight` non-identity factors on `n` qubits.
pub fn paulis_of_weight(n: usize, weight: usize) -> Vec<PauliString> {
    let mut out = Vec::new();
    let mut support = Vec::with_capacity(weight);
    collect_supports(n, weight, 1, &mut support, &mut |qs| {
        let combos = 3usize.pow(qs.len() as u32);
        for c in 0..combos {
            let mut rem = c;
            let spec: Vec<_> = qs
                .iter()
                .map(|&q| {
                    let l = Letter::NON_IDENTITY[rem % 3];
                    rem /= 3;
                    (q, l)
                })
                .collect();
            out.push(PauliString::from_spec(&spec, n).expect("valid support"));
        }
    });
    out
}

fn collect_supports(
    n: usize,
    k: usize,
    start: usize,
    current: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if current.len() == k {
        visit(current);
        return;
    }
    for q in start..=n {
        current.push(q);
        collect_supports(n, k, q + 1, current, visit);
        current.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> PauliString {
        PauliString::parse(text, 9).unwrap()
    }

    #[test]
    fn spec_builds_logical_x() {
        let xl = PauliString::from_spec(&[(1, Letter::Z), (4, Letter::Z), (7, Letter::Z)], 9).unwrap();
        assert_eq!(xl.to_string(), "Z1 Z4 Z7");
        assert_eq!(xl.weight(), 3);
        assert!(xl.is_diagonal());
    }

    #[test]
    fn empty_spec_is_identity() {
        let id = PauliString::from_spec(&[], 9).unwrap();
        assert_eq!(id.weight(), 0);
        assert_eq!(id.to_string(), "I");
    }

    #[test]
    fn duplicate_or_out_of_range_index_is_rejected() {
        assert!(PauliString::from_spec(&[(2, Letter::X), (2, Letter::Z)], 9).is_err());
        assert!(PauliString::from_spec(&[(10, Letter::X)], 9).is_err());
        assert!(PauliString::from_spec(&[(0, Letter::X)], 9).is_err());
        assert!(PauliString::identity(13).is_err());
    }

    #[test]
    fn stabilizer_pair_product_is_identity() {
        let prod = p("Z1 Z4").multiply(&p("Z4 Z7")).unwrap().multiply(&p("Z7 Z1")).unwrap();
        assert!(prod.is_identity_up_to_phase());
        assert_eq!(prod.phase(), Phase::PlusOne);
    }

    #[test]
    fn x_times_z_is_minus_i_y() {
        let prod = p("X1").multiply(&p("Z1")).unwrap();
        assert_eq!(prod, p("-i Y1"));
        assert_eq!(p("Z1").multiply(&p("X1")).unwrap(), p("+i Y1"));
    }

    #[test]
    fn mismatched_sizes_are_rejected() {
        let a = PauliString::single(1, Letter::X, 3).unwrap();
        let b = PauliString::single(1, Letter::X, 4).unwrap();
        assert!(a.multiply(&b).is_err());
        assert!(a.commutes(&b).is_err());
    }

    #[test]
    fn commutation_examples() {
        assert!(p("Z1").commutes(&p("Z1 Z4 Z7")).unwrap());
        assert!(!p("X1").commutes(&p("Z1")).unwrap());
        let id = PauliString::identity(9).unwrap();
        for q in paulis_of_weight(9, 1) {
            assert!(q.commutes(&id).unwrap());
        }
    }

    #[test]
    fn weight_counts() {
        assert_eq!(paulis_of_weight(9, 1).len(), 27);
        assert_eq!(paulis_of_weight(9, 2).len(), 324);
        assert_eq!(p("X1 Y2 Z9").weight(), 3);
    }

    #[test]
    fn parse_display_round_trip() {
        for text in ["Z1 Z4 Z7", "-i Y3", "+i X1 Z2", "- X9", "I", "-i I"] {
            let s = p(text);
            assert_eq!(PauliString::parse(&s.to_string(), 9).unwrap(), s);
        }
        assert!(PauliString::parse("Q1", 9).is_err());
        assert!(PauliString::parse("Zx", 9).is_err());
    }
}

//! Syndrome measurement and recovery for the Shor code, as branch lists and as the
//! branch-averaged channels.
//!
//! Bit syndromes are the six `Z Z` parities, so a projection just keeps density-matrix
//! entries whose row and column share a syndrome. Phase syndromes are the two X-sextets;
//! their projectors average over the four elements of the group they generate.

use std::fmt;

use num_complex::Complex64;

use crate::error::{check_dim, Result};
use crate::shor_code::{shor_code, CodeSpace, NUM_QUBITS};
use crate::state::DensityMatrix;

/// Which syndromes a QEC step measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QecKind {
    Bit,
    Phase,
    Both,
}

/// Decoded outcome of a syndrome measurement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BranchLabel {
    None,
    /// Single bit flip on the given qubit.
    BitFlip(usize),
    /// Bit flips detected in more than one block; each block is corrected independently
    /// but the branch counts as a multi-error event.
    MultiBitFlip(Vec<usize>),
    /// Phase flip in block 1, 2 or 3.
    PhaseFlip(usize),
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchLabel::None => write!(f, "none"),
            BranchLabel::BitFlip(q) => write!(f, "bit-flip qubit {q}"),
            BranchLabel::MultiBitFlip(qs) => {
                let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
                write!(f, "bit-flip qubits {}", list.join("+"))
            }
            BranchLabel::PhaseFlip(b) => write!(f, "phase block {b}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyndromeBranch {
    pub label: BranchLabel,
    pub probability: f64,
    /// Normalized post-measurement state (before recovery).
    pub post_state: DensityMatrix,
    /// Basis-index mask of the X recovery (bit branches).
    x_mask: usize,
    /// Qubit of the Z recovery (phase branches).
    z_qubit: Option<usize>,
}

/// Branches below this probability are dropped from branch lists.
const MIN_BRANCH_PROBABILITY: f64 = 1e-300;

#[inline]
fn bit(b: usize, q: usize) -> usize {
    b >> (NUM_QUBITS - q) & 1
}

/// Six-bit bit-flip syndrome of a basis index (two parities per block).
#[inline]
fn bit_syndrome(b: usize) -> usize {
    let mut s = 0;
    for block in 0..3 {
        let q = 3 * block + 1;
        s = s << 2 | (bit(b, q) ^ bit(b, q + 1)) << 1 | (bit(b, q + 1) ^ bit(b, q + 2));
    }
    s
}

/// Decodes a bit syndrome to the flipped qubits (at most one per block).
fn decode_bit(s: usize) -> Vec<usize> {
    let mut flips = Vec::new();
    for block in 0..3 {
        let pair = s >> (2 * (2 - block)) & 0b11;
        let offset = match pair {
            0b10 => Some(0),
            0b11 => Some(1),
            0b01 => Some(2),
            _ => None,
        };
        if let Some(o) = offset {
            flips.push(3 * block + 1 + o);
        }
    }
    flips
}

fn bit_label(flips: &[usize]) -> BranchLabel {
    match flips {
        [] => BranchLabel::None,
        [q] => BranchLabel::BitFlip(*q),
        qs => BranchLabel::MultiBitFlip(qs.to_vec()),
    }
}

fn mask_of(qubits: &[usize]) -> usize {
    qubits.iter().map(|&q| 1usize << (NUM_QUBITS - q)).fold(0, |a, b| a | b)
}

/// Precomputed syndrome and recovery per basis index.
struct BitTables {
    syndrome: Vec<usize>,
    correction: [usize; 64],
    multi: [bool; 64],
}

fn bit_tables() -> &'static BitTables {
    static TABLES: std::sync::OnceLock<BitTables> = std::sync::OnceLock::new();
    TABLES.get_or_init(|| {
        let syndrome = (0..1usize << NUM_QUBITS).map(bit_syndrome).collect();
        let mut correction = [0usize; 64];
        let mut multi = [false; 64];
        for s in 0..64 {
            let flips = decode_bit(s);
            correction[s] = mask_of(&flips);
            multi[s] = flips.len() > 1;
        }
        BitTables { syndrome, correction, multi }
    })
}

pub fn measure_bit_syndrome(rho: &DensityMatrix) -> Result<Vec<SyndromeBranch>> {
    check_dim(NUM_QUBITS, rho.num_qubits())?;
    let t = bit_tables();
    let dim = rho.dim();
    let mut weight = [0.0f64; 64];
    for r in 0..dim {
        weight[t.syndrome[r]] += rho.get(r, r).re;
    }
    let mut out = Vec::new();
    for s in 0..64 {
        if weight[s] <= MIN_BRANCH_PROBABILITY {
            continue;
        }
        let mut post = DensityMatrix::zeros(NUM_QUBITS);
        let data = post.data_mut();
        for r in (0..dim).filter(|&r| t.syndrome[r] == s) {
            for c in (0..dim).filter(|&c| t.syndrome[c] == s) {
                data[r * dim + c] = rho.get(r, c) / weight[s];
            }
        }
        let flips = decode_bit(s);
        out.push(SyndromeBranch {
            label: bit_label(&flips),
            probability: weight[s],
            post_state: post,
            x_mask: mask_of(&flips),
            z_qubit: None,
        });
    }
    Ok(out)
}

/// Phase syndromes `(M1, M2)` as signs, in branch order, with their recovery qubit.
const PHASE_OUTCOMES: [((i8, i8), Option<usize>); 4] = [((1, 1), None), ((-1, 1), Some(1)), ((-1, -1), Some(2)), ((1, -1), Some(3))];

fn phase_masks(code: &CodeSpace) -> (usize, usize) {
    let [m1, m2] = code.phase_stabilizers();
    (m1.x_bits() as usize, m2.x_bits() as usize)
}

/// `P_s rho P_s` for the phase syndrome `s`.
fn phase_projection(rho: &DensityMatrix, signs: (i8, i8)) -> DensityMatrix {
    let (m1, m2) = phase_masks(shor_code());
    let group = [(0usize, 1.0), (m1, signs.0 as f64), (m2, signs.1 as f64), (m1 ^ m2, (signs.0 * signs.1) as f64)];
    let dim = rho.dim();
    let mut out = DensityMatrix::zeros(NUM_QUBITS);
    let data = out.data_mut();
    for r in 0..dim {
        for c in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(g, sg) in &group {
                for &(h, sh) in &group {
                    acc += rho.get(r ^ g, c ^ h) * (sg * sh);
                }
            }
            data[r * dim + c] = acc / 16.0;
        }
    }
    out
}

pub fn measure_phase_syndrome(rho: &DensityMatrix) -> Result<Vec<SyndromeBranch>> {
    check_dim(NUM_QUBITS, rho.num_qubits())?;
    let mut out = Vec::new();
    for (signs, block) in PHASE_OUTCOMES {
        let mut post = phase_projection(rho, signs);
        let p = post.trace().re;
        if p <= MIN_BRANCH_PROBABILITY {
            continue;
        }
        post.scale(1.0 / p);
        out.push(SyndromeBranch {
            label: block.map_or(BranchLabel::None, BranchLabel::PhaseFlip),
            probability: p,
            post_state: post,
            x_mask: 0,
            z_qubit: block.map(CodeSpace::phase_representative),
        });
    }
    Ok(out)
}

/// Applies the recovery Pauli indicated by the branch.
pub fn recover(branch: &SyndromeBranch) -> DensityMatrix {
    let rho = &branch.post_state;
    if let Some(q) = branch.z_qubit {
        return z_conjugate(rho, q);
    }
    if branch.x_mask == 0 {
        return rho.clone();
    }
    x_conjugate(rho, branch.x_mask)
}

fn x_conjugate(rho: &DensityMatrix, mask: usize) -> DensityMatrix {
    let dim = rho.dim();
    let mut out = DensityMatrix::zeros(rho.num_qubits());
    let data = out.data_mut();
    for r in 0..dim {
        for c in 0..dim {
            data[(r ^ mask) * dim + (c ^ mask)] = rho.get(r, c);
        }
    }
    out
}

fn z_conjugate(rho: &DensityMatrix, q: usize) -> DensityMatrix {
    let dim = rho.dim();
    let mut out = rho.clone();
    let data = out.data_mut();
    for r in 0..dim {
        for c in 0..dim {
            if bit(r, q) != bit(c, q) {
                data[r * dim + c] = -data[r * dim + c];
            }
        }
    }
    out
}

/// Output of a branch-averaged QEC step.
#[derive(Clone, Debug)]
pub struct QecOutcome {
    pub state: DensityMatrix,
    /// Total probability of bit branches with flips in more than one block.
    pub multi_bit_weight: f64,
}

fn bit_channel(rho: &DensityMatrix) -> QecOutcome {
    let t = bit_tables();
    let dim = rho.dim();
    let mut out = DensityMatrix::zeros(NUM_QUBITS);
    let mut multi = 0.0;
    let data = out.data_mut();
    for r in 0..dim {
        let s = t.syndrome[r];
        let x = t.correction[s];
        if t.multi[s] {
            multi += rho.get(r, r).re;
        }
        let dst = (r ^ x) * dim;
        for c in (0..dim).filter(|&c| t.syndrome[c] == s) {
            data[dst + (c ^ x)] += rho.get(r, c);
        }
    }
    QecOutcome { state: out, multi_bit_weight: multi }
}

fn phase_channel(rho: &DensityMatrix) -> DensityMatrix {
    let mut out = DensityMatrix::zeros(NUM_QUBITS);
    for (signs, block) in PHASE_OUTCOMES {
        let projected = phase_projection(rho, signs);
        let corrected = match block {
            Some(b) => z_conjugate(&projected, CodeSpace::phase_representative(b)),
            None => projected,
        };
        out.add_assign_scaled(1.0, &corrected);
    }
    out
}

/// The branch-averaged channel `sum_b p_b R_b rho_b R_b^†`; bit correction precedes phase.
pub fn qec_channel_with_stats(rho: &DensityMatrix, kind: QecKind) -> Result<QecOutcome> {
    check_dim(NUM_QUBITS, rho.num_qubits())?;
    Ok(match kind {
        QecKind::Bit => bit_channel(rho),
        QecKind::Phase => QecOutcome { state: phase_channel(rho), multi_bit_weight: 0.0 },
        QecKind::Both => {
            let bit = bit_channel(rho);
            QecOutcome { state: phase_channel(&bit.state), multi_bit_weight: bit.multi_bit_weight }
        }
    })
}

pub fn qec_channel(rho: &DensityMatrix, kind: QecKind) -> Result<DensityMatrix> {
    Ok(qec_channel_with_stats(rho, kind)?.state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{Letter, PauliString};

    fn code_rho() -> DensityMatrix {
        let code = shor_code();
        let psi = code.logical_state(Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6)).unwrap();
        DensityMatrix::from_pure(&psi).unwrap()
    }

    #[test]
    fn decoding_table() {
        assert_eq!(decode_bit(0), Vec::<usize>::new());
        for q in 1..=9 {
            let b = 1usize << (9 - q);
            assert_eq!(decode_bit(bit_syndrome(b)), vec![q]);
        }
        assert_eq!(decode_bit(bit_syndrome(0b100_010_000)), vec![1, 5]);
    }

    #[test]
    fn code_states_pass_unchanged() {
        let rho = code_rho();
        for kind in [QecKind::Bit, QecKind::Phase, QecKind::Both] {
            let d = qec_channel(&rho, kind).unwrap().max_abs_diff(&rho).unwrap();
            assert!(d < 1e-15, "{kind:?} {d}");
        }
        let branches = measure_phase_syndrome(&rho).unwrap();
        assert_eq!(branches.len(), 1);
        assert_eq!(branches[0].label, BranchLabel::None);
    }

    #[test]
    fn single_errors_are_undone() {
        let rho = code_rho();
        for q in 1..=9 {
            for l in Letter::NON_IDENTITY {
                let e = PauliString::single(q, l, 9).unwrap();
                let noisy = rho.conjugated_by(&e).unwrap();
                let fixed = qec_channel(&noisy, QecKind::Both).unwrap();
                assert!(fixed.max_abs_diff(&rho).unwrap() < 1e-14, "{e}");
            }
        }
    }

    #[test]
    fn labelled_branches() {
        let rho = DensityMatrix::from_pure(shor_code().logical_zero()).unwrap();
        let x2 = PauliString::single(2, Letter::X, 9).unwrap();
        let b = measure_bit_syndrome(&rho.conjugated_by(&x2).unwrap()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].label, BranchLabel::BitFlip(2));
        assert!((b[0].probability - 1.0).abs() < 1e-14);
        assert!(recover(&b[0]).max_abs_diff(&rho).unwrap() < 1e-15);

        let z1 = PauliString::single(1, Letter::Z, 9).unwrap();
        let b = measure_phase_syndrome(&rho.conjugated_by(&z1).unwrap()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].label, BranchLabel::PhaseFlip(1));
        assert_eq!(b[0].label.to_string(), "phase block 1");
    }

    #[test]
    fn two_blocks_with_flips_count_as_multi_error() {
        let rho = code_rho();
        let e = PauliString::uniform(Letter::X, &[1, 5], 9).unwrap();
        let out = qec_channel_with_stats(&rho.conjugated_by(&e).unwrap(), QecKind::Bit).unwrap();
        assert!((out.multi_bit_weight - 1.0).abs() < 1e-14);
        assert!(out.state.max_abs_diff(&rho).unwrap() < 1e-15);
    }

    #[test]
    fn branch_probabilities_sum_to_one() {
        let rho = crate::noise::depolarize_step(&code_rho(), 0.05).unwrap();
        for branches in [measure_bit_syndrome(&rho).unwrap(), measure_phase_syndrome(&rho).unwrap()] {
            let total: f64 = branches.iter().map(|b| b.probability).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}

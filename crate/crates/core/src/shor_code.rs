//! The nine-qubit Shor code: logical basis, stabilizer generators, logical operators,
//! the Knill-Laflamme condition and an exhaustive search for low-weight logical flips.
//!
//! Conventions: `X_L = Z1 Z4 Z7` maps `|0_L> <-> |1_L>`, and `Z_L = X1 X2 X3` is the
//! logical operator diagonal in that basis (`Z_L |1_L> = -|1_L>`). `Y_L = i X_L Z_L`.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::pauli::{paulis_of_weight, Letter, PauliString};
use crate::state::{DensityMatrix, Operator, StateVector};

pub const NUM_QUBITS: usize = 9;

/// Tolerance for treating a compressed operator as proportional to `P_c`.
pub const KL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct CodeSpace {
    logical_zero: StateVector,
    logical_one: StateVector,
    support: Vec<usize>,
    bit_stabilizers: [PauliString; 6],
    phase_stabilizers: [PauliString; 2],
    logical_x: PauliString,
    logical_z: PauliString,
}

/// Builds the code. The result is immutable; [`shor_code`] returns a shared instance.
pub fn build_shor_code() -> CodeSpace {
    let n = NUM_QUBITS;
    let amp = 2f64.powf(-1.5);
    let mut zero = vec![ZERO; 1 << n];
    let mut one = vec![ZERO; 1 << n];
    let mut support = Vec::with_capacity(8);
    // Each block is |000> or |111>; choose per block and multiply block signs for |1_L>.
    for choice in 0..8usize {
        let mut index = 0usize;
        let mut sign = 1.0;
        for block in 0..3 {
            if choice >> (2 - block) & 1 == 1 {
                index |= 0b111 << (3 * (2 - block));
                sign = -sign;
            }
        }
        zero[index] = Complex64::new(amp, 0.0);
        one[index] = Complex64::new(sign * amp, 0.0);
        support.push(index);
    }
    support.sort_unstable();
    let z = |a, b| PauliString::uniform(Letter::Z, &[a, b], n).expect("valid stabilizer");
    let x6 = |qs: &[usize]| PauliString::uniform(Letter::X, qs, n).expect("valid stabilizer");
    CodeSpace {
        logical_zero: StateVector::from_raw(n, zero),
        logical_one: StateVector::from_raw(n, one),
        support,
        bit_stabilizers: [z(1, 2), z(2, 3), z(4, 5), z(5, 6), z(7, 8), z(8, 9)],
        phase_stabilizers: [x6(&[1, 2, 3, 4, 5, 6]), x6(&[4, 5, 6, 7, 8, 9])],
        logical_x: PauliString::uniform(Letter::Z, &[1, 4, 7], n).expect("valid logical X"),
        logical_z: PauliString::uniform(Letter::X, &[1, 2, 3], n).expect("valid logical Z"),
    }
}

/// Shared instance of the code.
pub fn shor_code() -> &'static CodeSpace {
    static CODE: OnceLock<CodeSpace> = OnceLock::new();
    CODE.get_or_init(build_shor_code)
}

impl CodeSpace {
    pub fn num_qubits(&self) -> usize {
        NUM_QUBITS
    }

    pub fn logical_zero(&self) -> &StateVector {
        &self.logical_zero
    }

    pub fn logical_one(&self) -> &StateVector {
        &self.logical_one
    }

    pub fn logical_basis(&self) -> [&StateVector; 2] {
        [&self.logical_zero, &self.logical_one]
    }

    /// The eight basis indices carrying amplitude in either logical state.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn bit_stabilizers(&self) -> &[PauliString; 6] {
        &self.bit_stabilizers
    }

    pub fn phase_stabilizers(&self) -> &[PauliString; 2] {
        &self.phase_stabilizers
    }

    pub fn generators(&self) -> impl Iterator<Item = &PauliString> {
        self.bit_stabilizers.iter().chain(&self.phase_stabilizers)
    }

    pub fn logical_x(&self) -> &PauliString {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &PauliString {
        &self.logical_z
    }

    /// `Y_L = i X_L Z_L`.
    pub fn logical_y(&self) -> PauliString {
        let xz = self.logical_x.multiply(&self.logical_z).expect("same size");
        let i = PauliString::identity(NUM_QUBITS).expect("valid").with_phase(crate::pauli::Phase::PlusI);
        i.multiply(&xz).expect("same size")
    }

    /// `alpha |0_L> + beta |1_L>`, normalized.
    pub fn logical_state(&self, alpha: Complex64, beta: Complex64) -> Result<StateVector> {
        StateVector::combine(&[(alpha, &self.logical_zero), (beta, &self.logical_one)])
    }

    /// `(<0_L|psi>, <1_L|psi>)`.
    pub fn logical_amplitudes(&self, psi: &StateVector) -> Result<[Complex64; 2]> {
        check_dim(NUM_QUBITS, psi.num_qubits())?;
        let a = psi.amplitudes();
        let mut out = [ZERO; 2];
        for &s in &self.support {
            out[0] += self.logical_zero.amplitudes()[s].conj() * a[s];
            out[1] += self.logical_one.amplitudes()[s].conj() * a[s];
        }
        Ok(out)
    }

    /// `|| P_c psi ||^2`.
    pub fn state_code_weight(&self, psi: &StateVector) -> Result<f64> {
        let [a, b] = self.logical_amplitudes(psi)?;
        Ok(a.norm_sqr() + b.norm_sqr())
    }

    /// Errors unless `psi` lies in the code space within `tol`.
    pub fn require_code_state(&self, psi: &StateVector, tol: f64) -> Result<()> {
        let weight = self.state_code_weight(psi)?;
        if (1.0 - weight).abs() > tol {
            return Err(Error::OutsideCodeSpace { weight });
        }
        Ok(())
    }

    /// Logical 2x2 block `m_ij = <i_L| rho |j_L>`.
    pub fn logical_block(&self, rho: &DensityMatrix) -> Result<[[Complex64; 2]; 2]> {
        check_dim(NUM_QUBITS, rho.num_qubits())?;
        let basis = [self.logical_zero.amplitudes(), self.logical_one.amplitudes()];
        let mut m = [[ZERO; 2]; 2];
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                for &r in &self.support {
                    for &c in &self.support {
                        m[i][j] += bi[r].conj() * rho.get(r, c) * bj[c];
                    }
                }
            }
        }
        Ok(m)
    }

    /// `tr(P_c rho)`.
    pub fn code_weight(&self, rho: &DensityMatrix) -> Result<f64> {
        let m = self.logical_block(rho)?;
        Ok(m[0][0].re + m[1][1].re)
    }

    /// Probability of `|0_L>`.
    pub fn p0l(&self, rho: &DensityMatrix) -> Result<f64> {
        rho.overlap(&self.logical_zero)
    }

    /// Logical Bloch components `(<X_L>, <Y_L>, <Z_L>)` of `P_c rho P_c`.
    pub fn bloch_vector(&self, rho: &DensityMatrix) -> Result<[f64; 3]> {
        let m = self.logical_block(rho)?;
        Ok([2.0 * m[0][1].re, -2.0 * m[0][1].im, m[0][0].re - m[1][1].re])
    }

    /// Length of the Bloch vector's projection onto the logical y-z plane.
    pub fn l_yz(&self, rho: &DensityMatrix) -> Result<f64> {
        let [_, y, z] = self.bloch_vector(rho)?;
        Ok(y.hypot(z))
    }

    /// Dense projector `P_c`.
    pub fn projector(&self) -> Operator {
        let dim = 1 << NUM_QUBITS;
        let mut p = Operator::zeros(dim, dim);
        for v in self.logical_basis() {
            let a = v.amplitudes();
            for &r in &self.support {
                for &c in &self.support {
                    p[(r, c)] += a[r] * a[c].conj();
                }
            }
        }
        p
    }

    /// Compression `m_ij = <i_L| P |j_L>` of a Pauli string onto the code space.
    pub fn compress(&self, p: &PauliString) -> Result<[[Complex64; 2]; 2]> {
        check_dim(NUM_QUBITS, p.num_qubits())?;
        let basis = [self.logical_zero.amplitudes(), self.logical_one.amplitudes()];
        let mut m = [[ZERO; 2]; 2];
        for (j, bj) in basis.iter().enumerate() {
            for &c in &self.support {
                let image = p.basis_image(c);
                let v = p.basis_coefficient(c) * bj[c];
                for (i, bi) in basis.iter().enumerate() {
                    m[i][j] += bi[image].conj() * v;
                }
            }
        }
        Ok(m)
    }

    /// True when `P|0_L> ∝ |1_L>` and `P|1_L> ∝ |0_L>`.
    pub fn acts_as_logical_x(&self, p: &PauliString) -> Result<bool> {
        let m = self.compress(p)?;
        Ok((m[1][0].norm() - 1.0).abs() < KL_TOL && (m[0][1].norm() - 1.0).abs() < KL_TOL)
    }

    /// Representative phase-flip qubit of a block (1, 4 or 7); any `Z` in the block is equivalent.
    pub fn phase_representative(block: usize) -> usize {
        assert!((1..=3).contains(&block), "block {block} out of range");
        3 * block - 2
    }
}

/// Result of the Knill-Laflamme check over an error set.
#[derive(Clone, Debug)]
pub struct KlReport {
    pub errors: Vec<PauliString>,
    /// `chi[a][b]` for `P_c E_a^† E_b P_c = chi P_c`; zero where the pair is a violation.
    pub chi: Vec<Vec<Complex64>>,
    /// Index pairs `(a, b)` whose compression is not proportional to `P_c`.
    pub violations: Vec<(usize, usize)>,
}

impl KlReport {
    /// Largest `|chi_ab - conj(chi_ba)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, row) in self.chi.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                worst = worst.max((v - self.chi[b][a].conj()).norm());
            }
        }
        worst
    }
}

pub fn kl_check(code: &CodeSpace, errors: &[PauliString]) -> Result<KlReport> {
    let len = errors.len();
    let mut chi = vec![vec![ZERO; len]; len];
    let mut violations = Vec::new();
    for (a, e) in errors.iter().enumerate() {
        let ed = e.adjoint();
        for (b, f) in errors.iter().enumerate() {
            let m = code.compress(&ed.multiply(f)?)?;
            let proportional = m[0][1].norm() <= KL_TOL && m[1][0].norm() <= KL_TOL && (m[0][0] - m[1][1]).norm() <= KL_TOL;
            if proportional {
                chi[a][b] = m[0][0];
            } else {
                violations.push((a, b));
            }
        }
    }
    Ok(KlReport { errors: errors.to_vec(), chi, violations })
}

/// Identity plus every weight-one Pauli on the nine qubits (28 operators).
pub fn single_qubit_error_set() -> Vec<PauliString> {
    let mut out = vec![PauliString::identity(NUM_QUBITS).expect("valid")];
    out.extend(paulis_of_weight(NUM_QUBITS, 1));
    out
}

/// Outcome of an exhaustive search for a Pauli acting as `X_L`.
#[derive(Clone, Debug)]
pub struct LogicalSearch {
    pub found: Option<PauliString>,
    pub candidates_checked: usize,
}

/// Scans Paulis of weight 1..=`max_weight` in increasing weight for one acting as `X_L`.
pub fn search_logical_x(code: &CodeSpace, max_weight: usize) -> Result<LogicalSearch> {
    if max_weight > 4 {
        return Err(Error::InvalidInput(format!("max_weight {max_weight} exceeds the exhaustive limit 4")));
    }
    let mut checked = 0;
    for w in 1..=max_weight {
        for p in paulis_of_weight(NUM_QUBITS, w) {
            checked += 1;
            if code.acts_as_logical_x(&p)? {
                return Ok(LogicalSearch { found: Some(p), candidates_checked: checked });
            }
        }
    }
    Ok(LogicalSearch { found: None, candidates_checked: checked })
}

pub fn min_weight_logical_x(code: &CodeSpace, max_weight: usize) -> Result<Option<PauliString>> {
    Ok(search_logical_x(code, max_weight)?.found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logical_amplitudes_match_the_expanded_product() {
        let code = build_shor_code();
        let a = 2f64.powf(-1.5);
        assert!((code.logical_zero().amplitudes()[0].re - a).abs() < 1e-15);
        assert!((code.logical_one().amplitudes()[0b111_000_000].re + a).abs() < 1e-15);
        assert_eq!(code.logical_zero().amplitudes().iter().filter(|x| x.norm() > 0.0).count(), 8);
        assert!(code.logical_zero().inner(code.logical_one()).unwrap().norm() < 1e-15);
    }

    #[test]
    fn generators_fix_the_logical_states() {
        let code = build_shor_code();
        for g in code.generators() {
            for v in code.logical_basis() {
                assert!(g.apply_to_state(v).unwrap().max_abs_diff(v).unwrap() < 1e-15, "{g}");
            }
            assert!(g.commutes(code.logical_x()).unwrap());
            assert!(g.commutes(code.logical_z()).unwrap());
            for h in code.generators() {
                assert!(g.commutes(h).unwrap());
            }
        }
        assert!(!code.logical_x().commutes(code.logical_z()).unwrap());
    }

    #[test]
    fn logical_operators_act_as_expected() {
        let code = build_shor_code();
        let x0 = code.logical_x().apply_to_state(code.logical_zero()).unwrap();
        assert!(x0.max_abs_diff(code.logical_one()).unwrap() < 1e-15);
        let z1 = code.logical_z().apply_to_state(code.logical_one()).unwrap();
        assert!(z1.max_abs_diff(&code.logical_one().scaled(Complex64::new(-1.0, 0.0))).unwrap() < 1e-15);
        let y0 = code.logical_y().apply_to_state(code.logical_zero()).unwrap();
        assert!(y0.max_abs_diff(&code.logical_one().scaled(Complex64::new(0.0, 1.0))).unwrap() < 1e-15);
    }

    #[test]
    fn projector_is_idempotent() {
        let p = build_shor_code().projector();
        let max_abs = |m: faer::Mat<Complex64>| m.col_iter().flat_map(|c| c.iter().map(|x| x.norm()).collect::<Vec<_>>()).fold(0.0, f64::max);
        assert!(max_abs(&p * &p - &p) < 1e-12);
        assert!(max_abs(p.adjoint().to_owned() - &p) < 1e-12);
        let trace: f64 = (0..512).map(|i| p[(i, i)].re).sum();
        assert!((trace - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kl_entries_for_simple_pairs() {
        let code = build_shor_code();
        let id = PauliString::identity(9).unwrap();
        let z1z2 = PauliString::uniform(Letter::Z, &[1, 2], 9).unwrap();
        let x1 = PauliString::single(1, Letter::X, 9).unwrap();
        let report = kl_check(&code, &[id, z1z2, x1]).unwrap();
        assert!(report.violations.is_empty());
        assert!((report.chi[0][1] - 1.0).norm() < 1e-12);
        assert!(report.chi[0][2].norm() < 1e-12);
    }

    #[test]
    fn logical_x_is_a_violation_pair() {
        let code = build_shor_code();
        let id = PauliString::identity(9).unwrap();
        let report = kl_check(&code, &[id, *code.logical_x()]).unwrap();
        assert_eq!(report.violations, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn weight_one_compressions_are_multiples_of_the_projector() {
        let code = build_shor_code();
        for p in paulis_of_weight(9, 1) {
            let m = code.compress(&p).unwrap();
            assert!(m[0][1].norm() < 1e-12 && m[1][0].norm() < 1e-12);
            let d = m[0][0];
            assert!((m[1][1] - d).norm() < 1e-12);
            assert!(d.norm() < 1e-12 || (d.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alternative_logical_x_representatives() {
        let code = build_shor_code();
        let z369 = PauliString::uniform(Letter::Z, &[3, 6, 9], 9).unwrap();
        assert!(code.acts_as_logical_x(&z369).unwrap());
        let all_z = PauliString::uniform(Letter::Z, &[1, 2, 3, 4, 5, 6, 7, 8, 9], 9).unwrap();
        assert!(code.acts_as_logical_x(&all_z).unwrap());
        assert!(search_logical_x(&code, 5).is_err());
    }

    #[test]
    fn bloch_vector_of_basis_states() {
        let code = build_shor_code();
        let rho = DensityMatrix::from_pure(code.logical_zero()).unwrap();
        let b = code.bloch_vector(&rho).unwrap();
        assert!(b[0].abs() < 1e-12 && b[1].abs() < 1e-12 && (b[2] - 1.0).abs() < 1e-12);
        let s = 0.5f64.sqrt();
        let plus_i = code.logical_state(Complex64::new(s, 0.0), Complex64::new(0.0, s)).unwrap();
        let rho = DensityMatrix::from_pure(&plus_i).unwrap();
        let b = code.bloch_vector(&rho).unwrap();
        assert!((b[1] - 1.0).abs() < 1e-12);
        assert!((rho.expectation(&code.logical_y()).unwrap() - 1.0).abs() < 1e-12);
    }
}

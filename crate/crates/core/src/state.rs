//! Dense state vectors and density matrices over `2^n` amplitudes.
//!
//! Density matrices are stored row-major. At nine qubits a full matrix is 512x512
//! complex entries (4 MiB), small enough that every channel in this crate is applied
//! exactly rather than through sparse or low-rank approximations.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::pauli::PauliString;

/// General dense operator in the computational basis.
pub type Operator = faer::Mat<Complex64>;

const NORM_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_dim(1 << n, amps.len())?;
        let norm = l2_norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn normalized(n: usize, mut amps: Vec<Complex64>) -> Result<Self> {
        check_dim(1 << n, amps.len())?;
        let norm = l2_norm(&amps);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero or non-finite vector".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { n, amps })
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self { n, amps }
    }

    /// Normalized combination `sum_k c_k |psi_k>`.
    pub fn combine(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        let n = first.1.n;
        let mut amps = vec![ZERO; 1 << n];
        for (c, psi) in terms {
            check_dim(n, psi.n)?;
            for (a, b) in amps.iter_mut().zip(&psi.amps) {
                *a += c * b;
            }
        }
        Self::normalized(n, amps)
    }

    pub(crate) fn from_raw(n: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << n);
        Self { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|`, insensitive to a global phase on either argument.
    pub fn fidelity_up_to_phase(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm().min(1.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { n: self.n, amps: self.amps.iter().map(|a| a * c).collect() }
    }

    /// Writes one `index real imag` line per amplitude after a `# qubits n` header.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# qubits {}", self.n)?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(w, "{} {} {}", i, a.re, a.im)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let (n, rows) = read_rows(r, 3)?;
        let mut amps = vec![ZERO; 1 << n];
        for row in rows {
            let i = row[0] as usize;
            *amps.get_mut(i).ok_or_else(|| Error::InvalidInput(format!("index {i} out of range")))? =
                Complex64::new(row[1], row[2]);
        }
        Self::from_amplitudes(n, amps)
    }
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn read_rows<R: BufRead>(r: R, width: usize) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut n = None;
    let mut rows = Vec::new();
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut it = rest.split_whitespace();
            if it.next() == Some("qubits") {
                let v = it.next().and_then(|s| s.parse().ok());
                n = Some(v.ok_or_else(|| Error::InvalidInput("bad qubits header".into()))?);
            }
            continue;
        }
        let fields: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Error::InvalidInput(format!("bad number in {line:?}: {e}")))?;
        if fields.len() != width {
            return Err(Error::InvalidInput(format!("expected {width} fields in {line:?}")));
        }
        rows.push(fields);
    }
    let n = n.ok_or_else(|| Error::InvalidInput("missing '# qubits n' header".into()))?;
    if n == 0 || n > crate::pauli::MAX_QUBITS {
        return Err(Error::InvalidInput(format!("unsupported qubit count {n}")));
    }
    Ok((n, rows))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Result<Self> {
        let norm = psi.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        let dim = psi.dim();
        let mut data = vec![ZERO; dim * dim];
        let a = psi.amplitudes();
        for (r, &ar) in a.iter().enumerate() {
            if ar == ZERO {
                continue;
            }
            let row = &mut data[r * dim..(r + 1) * dim];
            for (c, &ac) in a.iter().enumerate() {
                row[c] = ar * ac.conj();
            }
        }
        Ok(Self { n: psi.num_qubits(), dim, data })
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1 << n;
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { n, dim, data }
    }

    /// Weighted mixture `sum_k w_k |psi_k><psi_k|`; weights are used as given.
    pub fn from_ensemble(n: usize, members: &[(f64, &StateVector)]) -> Result<Self> {
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for (w, psi) in members {
            check_dim(dim, psi.dim())?;
            let a = psi.amplitudes();
            for (r, &ar) in a.iter().enumerate() {
                if ar == ZERO {
                    continue;
                }
                let wr = ar * *w;
                let row = &mut data[r * dim..(r + 1) * dim];
                for (x, &ac) in row.iter_mut().zip(a) {
                    *x += wr * ac.conj();
                }
            }
        }
        Ok(Self { n, dim, data })
    }

    #[cfg(test)]
    pub(crate) fn from_raw(n: usize, data: Vec<Complex64>) -> Self {
        let dim = 1 << n;
        debug_assert_eq!(data.len(), dim * dim);
        Self { n, dim, data }
    }

    /// Builds a density matrix from an arbitrary operator after checking the invariants.
    pub fn from_operator(n: usize, op: &Operator) -> Result<Self> {
        let dim = 1 << n;
        check_dim(dim, op.nrows())?;
        check_dim(dim, op.ncols())?;
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = op[(r, c)];
            }
        }
        let rho = Self { n, dim, data };
        rho.validate(1e-10)?;
        Ok(rho)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Checks Hermiticity, unit trace (both within `tol`) and a nonnegative spectrum.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > tol {
            return Err(Error::Invariant(format!("density matrix not Hermitian (defect {h:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::Invariant(format!("density matrix trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::Invariant(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// `<psi|rho|psi>`.
    pub fn overlap(&self, psi: &StateVector) -> Result<f64> {
        check_dim(self.dim, psi.dim())?;
        let a = psi.amplitudes();
        let support: Vec<usize> = (0..self.dim).filter(|&i| a[i] != ZERO).collect();
        let mut acc = ZERO;
        for &r in &support {
            for &c in &support {
                acc += a[r].conj() * self.get(r, c) * a[c];
            }
        }
        Ok(acc.re)
    }

    /// `tr(P rho)` for a Pauli string.
    pub fn trace_with_pauli(&self, p: &PauliString) -> Result<Complex64> {
        check_dim(self.n, p.num_qubits())?;
        // tr(P rho) = sum_c <c xor x| P |c> rho[c, c xor x]
        Ok((0..self.dim).map(|c| p.basis_coefficient(c) * self.get(c, p.basis_image(c))).sum())
    }

    /// Real expectation value `tr(P rho)`; exact for Hermitian `P`.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        Ok(self.trace_with_pauli(p)?.re)
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_fn(self.dim, self.dim, |r, c| self.get(r, c))
    }

    /// Eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.to_operator())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// `1/2 tr|rho - sigma|` from the spectrum of the Hermitian difference.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let diff = Operator::from_fn(self.dim, self.dim, |r, c| self.get(r, c) - other.get(r, c));
        let sum: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum();
        Ok((0.5 * sum).clamp(0.0, 1.0))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    /// `U rho U^dagger` for diagonal `U = diag(phases)`.
    pub fn conjugate_diagonal(&mut self, phases: &[Complex64]) {
        assert_eq!(phases.len(), self.dim);
        let dim = self.dim;
        let conj: Vec<Complex64> = phases.iter().map(|u| u.conj()).collect();
        for (r, row) in self.data.chunks_exact_mut(dim).enumerate() {
            let ur = phases[r];
            for (x, uc) in row.iter_mut().zip(&conj) {
                *x *= ur * uc;
            }
        }
    }

    /// `P rho P^dagger`.
    pub fn conjugated_by(&self, p: &PauliString) -> Result<Self> {
        check_dim(self.n, p.num_qubits())?;
        let dim = self.dim;
        let coef: Vec<Complex64> = (0..dim).map(|b| p.basis_coefficient(b)).collect();
        let mut out = vec![ZERO; dim * dim];
        for r in 0..dim {
            let rr = p.basis_image(r);
            let cr = coef[r];
            for c in 0..dim {
                out[rr * dim + p.basis_image(c)] = cr * self.data[r * dim + c] * coef[c].conj();
            }
        }
        Ok(Self { n: self.n, dim, data: out })
    }

    /// `sum_k w_k rho_k` over matrices of equal size.
    pub fn linear_combination(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        let mut out = Self { n: first.1.n, dim: first.1.dim, data: vec![ZERO; first.1.data.len()] };
        for (w, rho) in terms {
            check_dim(out.dim, rho.dim)?;
            for (x, y) in out.data.iter_mut().zip(&rho.data) {
                *x += y * *w;
            }
        }
        Ok(out)
    }

    pub(crate) fn add_assign_scaled(&mut self, w: f64, other: &Self) {
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * w;
        }
    }

    pub(crate) fn scale(&mut self, w: f64) {
        self.data.iter_mut().for_each(|x| *x *= w);
    }

    pub(crate) fn zeros(n: usize) -> Self {
        let dim = 1 << n;
        Self { n, dim, data: vec![ZERO; dim * dim] }
    }

    /// Writes `row col real imag` lines for every nonzero entry after a `# qubits n` header.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# qubits {}", self.n)?;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let x = self.get(r, c);
                if x != ZERO {
                    writeln!(w, "{} {} {} {}", r, c, x.re, x.im)?;
                }
            }
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let (n, rows) = read_rows(r, 4)?;
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for row in rows {
            let (i, j) = (row[0] as usize, row[1] as usize);
            if i >= dim || j >= dim {
                return Err(Error::InvalidInput(format!("entry ({i}, {j}) out of range")));
            }
            data[i * dim + j] = Complex64::new(row[2], row[3]);
        }
        Ok(Self { n, dim, data })
    }
}

/// Eigenvalues of a Hermitian operator, ascending.
///
/// Only the lower triangle is read. Panics if the eigensolver fails to converge.
pub fn hermitian_eigenvalues(op: &Operator) -> Vec<f64> {
    let mut ev: Vec<f64> = op.self_adjoint_eigenvalues(faer::Side::Lower).expect("Hermitian eigensolver converges");
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Letter;
    use crate::shor_code::build_shor_code;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pure_logical_zero_has_unit_purity() {
        let code = build_shor_code();
        let rho = DensityMatrix::from_pure(code.logical_zero()).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn plus_logical_has_unit_logical_x() {
        let code = build_shor_code();
        let plus = StateVector::combine(&[(c(1.0, 0.0), code.logical_zero()), (c(1.0, 0.0), code.logical_one())]).unwrap();
        let rho = DensityMatrix::from_pure(&plus).unwrap();
        assert!((rho.expectation(code.logical_x()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_normalized_input_rejected() {
        let v = StateVector::from_raw(1, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        assert!(DensityMatrix::from_pure(&v).is_err());
        assert!(StateVector::from_amplitudes(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::from_amplitudes(2, vec![c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let code = build_shor_code();
        let zero = DensityMatrix::from_pure(code.logical_zero()).unwrap();
        assert!(zero.trace_distance(&zero).unwrap() < 1e-12);
        let flipped = zero.conjugated_by(code.logical_x()).unwrap();
        assert!((zero.trace_distance(&flipped).unwrap() - 1.0).abs() < 1e-10);
        let one = DensityMatrix::from_pure(code.logical_one()).unwrap();
        assert!(flipped.max_abs_diff(&one).unwrap() < 1e-14);
        let small = DensityMatrix::maximally_mixed(2);
        assert!(zero.trace_distance(&small).is_err());
    }

    #[test]
    fn stabilizer_and_logical_expectations() {
        let code = build_shor_code();
        let rho = DensityMatrix::from_pure(code.logical_zero()).unwrap();
        let z1z2 = PauliString::uniform(Letter::Z, &[1, 2], 9).unwrap();
        assert!((rho.expectation(&z1z2).unwrap() - 1.0).abs() < 1e-12);
        assert!(rho.expectation(code.logical_x()).unwrap().abs() < 1e-12);
        assert!(rho.expectation(&PauliString::identity(3).unwrap()).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let code = build_shor_code();
        let z = code.logical_zero();
        let rotated = z.scaled(Complex64::from_polar(1.0, 0.7));
        assert!((z.fidelity_up_to_phase(&rotated).unwrap() - 1.0).abs() < 1e-12);
        assert!(z.fidelity_up_to_phase(code.logical_one()).unwrap() < 1e-12);
        assert!(z.fidelity_up_to_phase(&StateVector::basis(2, 0)).is_err());
    }

    #[test]
    fn conjugate_diagonal_matches_dense_product() {
        let psi = StateVector::normalized(2, vec![c(0.3, 0.1), c(-0.2, 0.4), c(0.5, 0.0), c(0.1, -0.6)]).unwrap();
        let mut rho = DensityMatrix::from_pure(&psi).unwrap();
        let phases: Vec<_> = [0.1, 0.7, -1.2, 2.0].iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        rho.conjugate_diagonal(&phases);
        let moved = StateVector::from_raw(2, psi.amplitudes().iter().zip(&phases).map(|(a, u)| a * u).collect());
        assert!(rho.max_abs_diff(&DensityMatrix::from_pure(&moved).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        let code = build_shor_code();
        let mut buf = Vec::new();
        code.logical_one().write_text(&mut buf).unwrap();
        let back = StateVector::read_text(&buf[..]).unwrap();
        assert_eq!(&back, code.logical_one());

        let rho = DensityMatrix::from_pure(code.logical_one()).unwrap();
        let mut buf = Vec::new();
        rho.write_text(&mut buf).unwrap();
        assert_eq!(DensityMatrix::read_text(&buf[..]).unwrap(), rho);
        assert!(StateVector::read_text("0 1 0\n".as_bytes()).is_err());
    }
}

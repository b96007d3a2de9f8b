//! The always-on system Hamiltonian, its exact (diagonal) evolution, the closed forms
//! for code-space evolution and for evolution after a single bit flip, and the
//! rotating-frame transform that removes single-qubit splittings.
//!
//! ```text
//! H_+ = -1/2 sum_i zeta_i Z_i - omega Z1Z4Z7 - J (k1 Z1Z4 + k4 Z4Z7 + k7 Z7Z1)
//!       + sum_s g_s Z_{s-1} Z_s          s in {2, 3, 5, 6, 8, 9}
//! ```

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::pauli::{Letter, PauliString};
use crate::shor_code::{shor_code, NUM_QUBITS};
use crate::state::{DensityMatrix, StateVector};

/// Qubits carrying the two-body couplings, in the order of `k`.
pub const CENTRAL: [usize; 3] = [1, 4, 7];

/// Outer qubits; `g[i]` multiplies `Z_{s-1} Z_s` with `s = OUTER[i]`.
pub const OUTER: [usize; 6] = [2, 3, 5, 6, 8, 9];

/// Qubit pairs of the `k` couplings: `(1,4)`, `(4,7)`, `(7,1)`.
pub const PAIRS: [(usize, usize); 3] = [(1, 4), (4, 7), (7, 1)];

#[derive(Clone, Debug, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub j: f64,
    /// `(k1, k4, k7)`.
    pub k: [f64; 3],
    /// `(g2, g3, g5, g6, g8, g9)`.
    pub g: [f64; 6],
    /// `zeta_1 .. zeta_9`.
    pub zeta: [f64; 9],
}

impl SystemParams {
    /// `k = (1, 1, 1)`, no stabilizer or single-qubit terms.
    pub fn new(omega: f64, j: f64) -> Result<Self> {
        let p = Self { omega, j, k: [1.0; 3], g: [0.0; 6], zeta: [0.0; 9] };
        p.validate()?;
        Ok(p)
    }

    pub fn with_k(mut self, k: [f64; 3]) -> Self {
        self.k = k;
        self
    }

    pub fn with_g(mut self, g: [f64; 6]) -> Self {
        self.g = g;
        self
    }

    pub fn with_zeta(mut self, zeta: [f64; 9]) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidInput(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::InvalidInput(format!("J must be positive, got {}", self.j)));
        }
        let all = self.k.iter().chain(&self.g).chain(&self.zeta);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite coupling".into()));
        }
        if self.omega >= self.j {
            warn!("omega = {} is not small compared to J = {}", self.omega, self.j);
        }
        Ok(())
    }

    /// Full-QEC period `tau = pi / 2J`.
    pub fn tau(&self) -> f64 {
        PI / (2.0 * self.j)
    }

    /// `t_m = m tau`.
    pub fn t_m(&self, m: u32) -> f64 {
        m as f64 * self.tau()
    }

    pub fn g_sum(&self) -> f64 {
        self.g.iter().sum()
    }

    fn unit_k_and_no_zeta(&self) -> Result<()> {
        if self.k != [1.0; 3] {
            return Err(Error::InvalidInput(format!("closed form needs k = (1, 1, 1), got {:?}", self.k)));
        }
        if self.zeta.iter().any(|&z| z != 0.0) {
            return Err(Error::InvalidInput("closed form needs zeta = 0".into()));
        }
        Ok(())
    }
}

/// `+1` or `-1`: eigenvalue of `Z_q` on basis state `b`.
#[inline]
pub(crate) fn z_sign(b: usize, q: usize, n: usize) -> f64 {
    if b >> (n - q) & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A Hamiltonian diagonal in the computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    n: usize,
    energies: Vec<f64>,
}

pub fn build_hamiltonian(p: &SystemParams) -> DiagonalHamiltonian {
    let n = NUM_QUBITS;
    let energies = (0..1usize << n)
        .map(|b| {
            let z = |q| z_sign(b, q, n);
            let mut e = -p.omega * z(1) * z(4) * z(7);
            for (kr, &(a, c)) in p.k.iter().zip(&PAIRS) {
                e -= p.j * kr * z(a) * z(c);
            }
            for (gs, &s) in p.g.iter().zip(&OUTER) {
                e += gs * z(s - 1) * z(s);
            }
            for (i, zeta) in p.zeta.iter().enumerate() {
                e -= 0.5 * zeta * z(i + 1);
            }
            e
        })
        .collect();
    DiagonalHamiltonian { n, energies }
}

impl DiagonalHamiltonian {
    pub fn from_energies(n: usize, energies: Vec<f64>) -> Result<Self> {
        check_dim(1 << n, energies.len())?;
        Ok(Self { n, energies })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Diagonal of `e^{-iHt}`.
    pub fn propagator(&self, t: f64) -> Vec<Complex64> {
        self.energies.iter().map(|&e| Complex64::from_polar(1.0, -e * t)).collect()
    }

    /// `e^{-iHt} psi`.
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        check_dim(self.energies.len(), psi.dim())?;
        let mut out = psi.clone();
        for (a, &e) in out.amplitudes_mut().iter_mut().zip(&self.energies) {
            *a *= Complex64::from_polar(1.0, -e * t);
        }
        Ok(out)
    }

    /// `e^{-iHt} rho e^{iHt}`.
    pub fn evolve_density(&self, rho: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        check_dim(self.energies.len(), rho.dim())?;
        let mut out = rho.clone();
        out.conjugate_diagonal(&self.propagator(t));
        Ok(out)
    }
}

/// `e^{i angle X_L} psi = cos(angle) psi + i sin(angle) X_L psi`.
pub fn logical_rotation(psi: &StateVector, angle: f64) -> Result<StateVector> {
    let xl = shor_code().logical_x().apply_to_state(psi)?;
    let (s, c) = angle.sin_cos();
    let amps = psi.amplitudes().iter().zip(xl.amplitudes()).map(|(a, b)| a * c + Complex64::new(0.0, s) * b).collect();
    Ok(StateVector::from_raw(psi.num_qubits(), amps))
}

/// The closed-form state for `k = (1, 1, 1)`:
///
/// ```text
/// e^{-i G t} [ (cos^3 Jt - i sin^3 Jt) phi + (i/2) e^{iJt} sin 2Jt sum_r Z_r X_L phi ],
/// phi = e^{i omega t X_L} psi0,  G = sum_s g_s
/// ```
pub fn closed_form_state(p: &SystemParams, psi0: &StateVector, t: f64) -> Result<StateVector> {
    p.unit_k_and_no_zeta()?;
    let code = shor_code();
    code.require_code_state(psi0, 1e-10)?;
    let phi = logical_rotation(psi0, p.omega * t)?;
    let xl_phi = code.logical_x().apply_to_state(&phi)?;
    let (s, c) = (p.j * t).sin_cos();
    let first = Complex64::new(c.powi(3), -s.powi(3));
    let second = Complex64::new(0.0, 0.5) * Complex64::from_polar(1.0, p.j * t) * (2.0 * p.j * t).sin();
    let global = Complex64::from_polar(1.0, -p.g_sum() * t);
    let n = NUM_QUBITS;
    let amps = (0..phi.dim())
        .map(|b| {
            // sum_r Z_r acting on a basis state is a signed count
            let zsum: f64 = CENTRAL.iter().map(|&r| z_sign(b, r, n)).sum();
            global * (first * phi.amplitudes()[b] + second * zsum * xl_phi.amplitudes()[b])
        })
        .collect();
    Ok(StateVector::from_raw(n, amps))
}

/// `P(|0_L>)` at time `t` for `k = (1, 1, 1)` starting from `|0_L>`.
pub fn closed_form_p0l(p: &SystemParams, t: f64) -> f64 {
    let (s, c) = (p.j * t).sin_cos();
    (c.powi(6) + s.powi(6)) * (p.omega * t).cos().powi(2)
}

/// The closed form for a bit flip `X_r` at `t'` followed by evolution to `t_m = m tau`,
/// for `k = (1, 1, 1)` and `r` in `{1, 4, 7}`:
///
/// ```text
/// e^{-i [g_f (2t' - t_m) + sum_{s != f} g_s t_m]} X_r e^{iJ(2t' - t_m)(sum of pairs containing r)}
///     (i Z Z)^m e^{i omega (2t' - t_m) X_L} psi0
/// ```
///
/// where `g_f` is the stabilizer term on `(r, r+1)` and `Z Z` is the pair without `r`.
pub fn post_bitflip_state(p: &SystemParams, psi0: &StateVector, r: usize, t_prime: f64, m: u32) -> Result<StateVector> {
    p.unit_k_and_no_zeta()?;
    let slot = CENTRAL
        .iter()
        .position(|&c| c == r)
        .ok_or_else(|| Error::InvalidInput(format!("flipped qubit {r} is not one of 1, 4, 7")))?;
    let t_m = p.t_m(m);
    if !(t_prime > 0.0 && t_prime < t_m) {
        return Err(Error::InvalidInput(format!("need 0 < t' < t_m, got t' = {t_prime}, t_m = {t_m}")));
    }
    shor_code().require_code_state(psi0, 1e-10)?;
    let n = NUM_QUBITS;
    let d = 2.0 * t_prime - t_m;
    let phi = logical_rotation(psi0, p.omega * d)?;
    let pair_ops: Vec<(usize, usize)> = PAIRS.iter().copied().filter(|&(a, b)| a == r || b == r).collect();
    let (oa, ob) = PAIRS[(slot + 1) % 3];
    let i_m = crate::pauli::i_pow(m % 4);
    let amps: Vec<Complex64> = (0..phi.dim())
        .map(|b| {
            let z = |q| z_sign(b, q, n);
            let containing: f64 = pair_ops.iter().map(|&(a, c)| z(a) * z(c)).sum();
            let other = z(oa) * z(ob);
            let other_m = if m % 2 == 1 { other } else { 1.0 };
            phi.amplitudes()[b] * Complex64::from_polar(1.0, p.j * d * containing) * i_m * other_m
        })
        .collect();
    let xr = PauliString::single(r, Letter::X, n)?;
    let flipped = xr.apply_to_state(&StateVector::from_raw(n, amps))?;
    let flipped_g = slot * 2; // g on (r, r+1): g2, g5, g8
    let phase_arg = p.g[flipped_g] * d + (p.g_sum() - p.g[flipped_g]) * t_m;
    Ok(flipped.scaled(Complex64::from_polar(1.0, -phase_arg)))
}

/// Diagonal of `U_0^† = exp(-i/2 sum_i zeta_i Z_i t)`.
fn frame_phases(zeta: &[f64; 9], t: f64) -> Vec<Complex64> {
    let n = NUM_QUBITS;
    (0..1usize << n)
        .map(|b| {
            let arg: f64 = zeta.iter().enumerate().map(|(i, z)| z * z_sign(b, i + 1, n)).sum();
            Complex64::from_polar(1.0, -0.5 * arg * t)
        })
        .collect()
}

/// `U_0^† psi` with `U_0 = exp(i/2 sum_i zeta_i Z_i t)`.
pub fn rotating_frame_state(psi: &StateVector, zeta: &[f64; 9], t: f64) -> Result<StateVector> {
    check_dim(NUM_QUBITS, psi.num_qubits())?;
    let amps = psi.amplitudes().iter().zip(frame_phases(zeta, t)).map(|(a, u)| a * u).collect();
    Ok(StateVector::from_raw(NUM_QUBITS, amps))
}

/// `U_0^† rho U_0`.
pub fn rotating_frame_density(rho: &DensityMatrix, zeta: &[f64; 9], t: f64) -> Result<DensityMatrix> {
    check_dim(NUM_QUBITS, rho.num_qubits())?;
    let mut out = rho.clone();
    out.conjugate_diagonal(&frame_phases(zeta, t));
    Ok(out)
}

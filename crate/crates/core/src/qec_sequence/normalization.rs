//! Reducing arbitrary coupling ratios `k` to integers, and finding the Pauli that brings
//! the odd-`m` states back into the code space when some `k_r` are even.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{z_sign, PAIRS};
use crate::pauli::{Letter, PauliString};
use crate::shor_code::{shor_code, NUM_QUBITS};
use crate::state::StateVector;

/// Largest denominator considered when recognising a rational `k_r`.
pub const MAX_DENOMINATOR: i64 = 10_000;

/// `J'` is expected to dominate `omega` by at least this factor.
pub const SEPARATION_WARNING: f64 = 10.0;

/// A continued-fraction convergent `p/q` of some `k_r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Approximant {
    pub p: i64,
    pub q: i64,
    /// `|k_r - p/q|`.
    pub error: f64,
    /// Time over which the approximation holds, `1 / (J |k_r - p/q|)`.
    pub t_max: f64,
}

impl Approximant {
    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Normalization {
    /// `J (k . ZZ) = J' (k' . ZZ)` with integer, coprime `k'` and `J' = J / kappa`.
    Rational {
        j_prime: f64,
        k_prime: [i64; 3],
        kappa: f64,
        /// `J'` is not well above `omega`.
        weak_separation: bool,
    },
    /// At least one `k_r` has no rational form within tolerance. Each entry lists the
    /// convergents of that component (a single exact entry for rational components).
    Approximate { approximants: [Vec<Approximant>; 3] },
}

/// Convergents of `x` with denominators up to [`MAX_DENOMINATOR`], stopping once one lies within `tol`.
pub fn convergents(x: f64, tol: f64, j: f64) -> Vec<Approximant> {
    let mut out = Vec::new();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (p, q) = (a * p1 + p0, a * q1 + q0);
        if q > MAX_DENOMINATOR {
            break;
        }
        let error = (x - p as f64 / q as f64).abs();
        out.push(Approximant { p, q, error, t_max: if error > 0.0 { 1.0 / (j * error) } else { f64::INFINITY } });
        if error <= tol {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p, q);
        let frac = rest - a as f64;
        if frac == 0.0 {
            break;
        }
        rest = 1.0 / frac;
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

pub fn normalize_couplings(k: [f64; 3], j: f64, omega: f64, tol: f64) -> Result<Normalization> {
    if k.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(format!("k must be positive, got {k:?}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let approximants = k.map(|v| convergents(v, tol, j));
    let exact: Vec<Option<(i64, i64)>> =
        approximants.iter().map(|a| a.last().filter(|last| last.error <= tol).map(|last| (last.p, last.q))).collect();
    if exact.iter().any(Option::is_none) {
        return Ok(Normalization::Approximate { approximants });
    }
    let fracs: Vec<(i64, i64)> = exact.into_iter().flatten().collect();
    let l = fracs.iter().fold(1, |acc, &(_, q)| lcm(acc, q));
    let scaled: Vec<i64> = fracs.iter().map(|&(p, q)| p * (l / q)).collect();
    let common = scaled.iter().fold(0, |acc, &v| gcd(acc, v));
    let k_prime = [scaled[0] / common, scaled[1] / common, scaled[2] / common];
    let kappa = l as f64 / common as f64;
    let j_prime = j / kappa;
    let weak_separation = j_prime < SEPARATION_WARNING * omega;
    if weak_separation {
        warn!("J' = {j_prime} is not well above omega = {omega}");
    }
    Ok(Normalization::Rational { j_prime, k_prime, kappa, weak_separation })
}

/// The `Z_r Z_r'` pair that maps `e^{-i H_D t_m}|psi>` back to `e^{i omega t_m X_L}|psi>` at
/// odd `m`, or `None` when no correction is needed.
///
/// Found by evolving a generic code state under the two-body terms for one period and
/// testing which of the candidates restores it, rather than from a parity rule.
pub fn parity_precorrection_for(k: [i64; 3]) -> Result<Option<PauliString>> {
    let code = shor_code();
    let psi = code.logical_state(Complex64::new(0.6, 0.0), Complex64::new(0.48, 0.64))?;
    // exp(+i (pi/2) sum_r k_r Z Z) is the two-body part of exp(-i H_D tau) with J tau = pi/2
    let amps: Vec<Complex64> = psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(b, a)| {
            let arg: f64 = k.iter().zip(&PAIRS).map(|(&kr, &(p, q))| kr as f64 * z_sign(b, p, NUM_QUBITS) * z_sign(b, q, NUM_QUBITS)).sum();
            a * Complex64::from_polar(1.0, PI / 2.0 * arg)
        })
        .collect();
    let evolved = StateVector::normalized(NUM_QUBITS, amps)?;
    let mut candidates = vec![None];
    candidates.extend(PAIRS.iter().map(|&(p, q)| Some(PauliString::uniform(Letter::Z, &[p, q], NUM_QUBITS).expect("valid pair"))));
    for candidate in candidates {
        let fixed = match &candidate {
            Some(pz) => pz.apply_to_state(&evolved)?,
            None => evolved.clone(),
        };
        if fixed.fidelity_up_to_phase(&psi)? > 1.0 - 1e-10 {
            return Ok(candidate);
        }
    }
    Err(Error::Invariant(format!("no Z Z pair restores the code state for k = {k:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_examples() {
        let n = normalize_couplings([1.0, 1.5, 5.0 / 3.0], 60.0, 1.0, 1e-9).unwrap();
        assert_eq!(n, Normalization::Rational { j_prime: 10.0, k_prime: [6, 9, 10], kappa: 6.0, weak_separation: false });
        let n = normalize_couplings([2.0, 4.0, 6.0], 5.0, 1.0, 1e-9).unwrap();
        assert_eq!(n, Normalization::Rational { j_prime: 10.0, k_prime: [1, 2, 3], kappa: 0.5, weak_separation: false });
    }

    #[test]
    fn weak_separation_is_flagged() {
        let n = normalize_couplings([1.0, 1.5, 5.0 / 3.0], 6.0, 1.0, 1e-9).unwrap();
        assert!(matches!(n, Normalization::Rational { weak_separation: true, .. }));
    }

    #[test]
    fn pi_convergents() {
        let c = convergents(PI, 1e-12, 1.0);
        let pq: Vec<(i64, i64)> = c.iter().map(|a| (a.p, a.q)).collect();
        assert_eq!(pq, vec![(3, 1), (22, 7), (333, 106), (355, 113)]);
        assert!(c.windows(2).all(|w| w[1].error < w[0].error));
        let n = normalize_couplings([PI, 1.0, 1.0], 1.0, 0.01, 1e-12).unwrap();
        assert!(matches!(n, Normalization::Approximate { .. }));
    }

    #[test]
    fn invalid_k_rejected() {
        assert!(normalize_couplings([0.0, 1.0, 1.0], 1.0, 0.1, 1e-9).is_err());
    }

    #[test]
    fn precorrection_choices() {
        assert_eq!(parity_precorrection_for([1, 1, 1]).unwrap(), None);
        assert_eq!(parity_precorrection_for([3, 5, 7]).unwrap(), None);
        let z = |p, q| Some(PauliString::uniform(Letter::Z, &[p, q], 9).unwrap());
        // the even coupling's own pair is the one to undo when exactly one k_r is even
        assert_eq!(parity_precorrection_for([1, 2, 1]).unwrap(), z(4, 7));
        assert_eq!(parity_precorrection_for([2, 1, 1]).unwrap(), z(1, 4));
        assert_eq!(parity_precorrection_for([2, 2, 1]).unwrap(), z(7, 1));
    }
}

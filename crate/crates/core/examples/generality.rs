//! Unequal couplings: odd `k_r` keep the discrete oscillation; an even `k_r` needs a
//! pre-correction at odd `m`, found numerically.

use num_complex::Complex64;
use shor_rabi::hamiltonian::{build_hamiltonian, SystemParams};
use shor_rabi::qec_sequence::{convergents, normalize_couplings, parity_precorrection_for};
use shor_rabi::shor_code::shor_code;

fn main() -> shor_rabi::Result<()> {
    let code = shor_code();
    let psi0 = code.logical_state(Complex64::new(0.8, 0.0), Complex64::new(0.0, 0.6))?;
    for k in [[1, 3, 5], [1, 2, 1]] {
        let p = SystemParams::new(0.1, 1.0)?.with_k(k.map(|v| v as f64));
        let h = build_hamiltonian(&p);
        let fix = parity_precorrection_for(k)?;
        let psi = h.evolve(&psi0, p.t_m(1))?;
        let after = match &fix {
            Some(z) => code.state_code_weight(&z.apply_to_state(&psi)?)?,
            None => code.state_code_weight(&psi)?,
        };
        let label = fix.map(|z| z.to_string()).unwrap_or_else(|| "none".into());
        println!("k = {k:?}: weight at t_1 {:.6}, pre-correction {label}, weight after {after:.6}", code.state_code_weight(&psi)?);
    }
    println!("{:?}", normalize_couplings([1.0, 1.5, 5.0 / 3.0], 1.0, 0.01, 1e-9)?);
    for a in convergents(std::f64::consts::PI, 1e-7, 1.0) {
        println!("pi ~ {}/{}  error {:.2e}  t_max {:.2e}", a.p, a.q, a.error, a.t_max);
    }
    Ok(())
}

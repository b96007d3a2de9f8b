//! Size of the deviation caused by off-diagonal terms, for a random few-body perturbation
//! scaled to decreasing strengths.

use shor_rabi::effective_couplings::{off_diagonal_diagnostics, random_few_body_perturbation, scale_to_xi_bar, single_qubit_hamiltonian};
use shor_rabi::hamiltonian::{build_hamiltonian, SystemParams};

fn main() -> shor_rabi::Result<()> {
    let p = SystemParams::new(0.1, 1.0)?;
    let zeta: Vec<f64> = (1..=9).map(|i| 20.0 * i as f64).collect();
    let h0 = single_qubit_hamiltonian(&zeta)?;
    let h = build_hamiltonian(&p);
    let h_prime = random_few_body_perturbation(9, 2, 1)?;
    println!("{:>8} {:>8} {:>12}", "xi_bar", "J t", "|Q|");
    for xi in [1e-2, 5e-3, 2.5e-3] {
        let scaled = scale_to_xi_bar(&h0, &h_prime, xi)?;
        for jt in [1.0, 10.0, 100.0] {
            let d = off_diagonal_diagnostics(&h0, &h, &scaled, jt / p.j)?;
            println!("{xi:8.1e} {jt:8} {:12.4e}", d.q_norm);
        }
    }
    Ok(())
}

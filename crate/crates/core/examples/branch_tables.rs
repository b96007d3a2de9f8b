//! First-order branch tables for one period, checked against a direct quadrature of the
//! propagated bit-flip error and a numerical phase-syndrome measurement.

use shor_rabi::analysis::{first_order_report, fit_a_coefficients, phase_branch_oracle, sinc_coefficients};
use shor_rabi::hamiltonian::{build_hamiltonian, SystemParams};
use shor_rabi::shor_code::shor_code;
use shor_rabi::state::DensityMatrix;

fn main() -> shor_rabi::Result<()> {
    let p = SystemParams::new(1e-6, 1.0)?;
    let rho0 = DensityMatrix::from_pure(shor_code().logical_zero())?;
    let rho_h = build_hamiltonian(&p).evolve_density(&rho0, p.tau())?;

    let report = first_order_report(&rho_h, 1e-3, 8)?;
    println!("bit-flip classes (eps tau = 1e-3):");
    for row in &report.bit_table {
        println!("  {:<5} {:.6}  {:?}", row.error, row.probability, row.corrected);
    }
    println!("predicted distance at n = 8: {:.3e}", report.distance_predicted.unwrap_or(f64::NAN));

    for n in [4, 6, 8, 12] {
        let (a_plus, a_minus) = sinc_coefficients(n)?;
        println!("n = {n}: a+ = {a_plus:.10}, a- = {a_minus:.10}");
        for b in phase_branch_oracle(&p, &rho0, 4, n, 100_000)? {
            let (fp, fm) = fit_a_coefficients(&b.corrected, a_plus + a_minus, &rho_h)?;
            println!("  {:<14} p = {:.10}  fitted ({fp:.10}, {fm:.10})", b.label.to_string(), b.probability);
        }
    }
    Ok(())
}

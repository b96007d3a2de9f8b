//! Knill-Laflamme conditions for all single-qubit errors and the lightest logical X.

use shor_rabi::shor_code::{kl_check, search_logical_x, shor_code, single_qubit_error_set};

fn main() -> shor_rabi::Result<()> {
    let code = shor_code();
    let errors = single_qubit_error_set();
    let report = kl_check(code, &errors)?;
    println!("{} errors, {} violations, chi hermiticity defect {:.1e}", errors.len(), report.violations.len(), report.hermiticity_defect());
    let nonzero = report.chi.iter().flatten().filter(|c| c.norm() > 1e-12).count();
    println!("nonzero chi entries: {nonzero} of {}", errors.len() * errors.len());

    for w in 1..=3 {
        let s = search_logical_x(code, w)?;
        match s.found {
            Some(op) => println!("weight <= {w}: {op} after {} candidates", s.candidates_checked),
            None => println!("weight <= {w}: none in {} candidates", s.candidates_checked),
        }
    }
    Ok(())
}

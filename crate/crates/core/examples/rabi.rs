//! Discrete logical Rabi oscillation: at every `t_m = m tau` the state is back in the code
//! space and `P(|0_L>)` sits on `cos^2(omega t_m)`; in between it follows the closed form.

use shor_rabi::hamiltonian::{build_hamiltonian, closed_form_p0l, SystemParams};
use shor_rabi::shor_code::shor_code;

fn main() -> shor_rabi::Result<()> {
    let p = SystemParams::new(0.1, 1.0)?;
    let h = build_hamiltonian(&p);
    let code = shor_code();
    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "t/tau", "omega t", "P0L", "closed form", "code weight");
    for i in 0..=32 {
        let t = i as f64 * p.tau() / 4.0;
        let psi = h.evolve(code.logical_zero(), t)?;
        let p0l = code.logical_zero().inner(&psi)?.norm_sqr();
        println!("{:8.2} {:10.4} {:12.8} {:12.8} {:12.8}", t / p.tau(), p.omega * t, p0l, closed_form_p0l(&p, t), code.state_code_weight(&psi)?);
    }
    Ok(())
}

//! Depolarizing noise two ways: the density-matrix integrator and an ensemble of
//! quantum trajectories with the same per-step probabilities.

use shor_rabi::hamiltonian::{build_hamiltonian, SystemParams};
use shor_rabi::noise::{evolve_noisy, run_ensemble, NoiseParams};
use shor_rabi::shor_code::shor_code;
use shor_rabi::state::DensityMatrix;

fn main() -> shor_rabi::Result<()> {
    let p = SystemParams::new(0.1, 1.0)?;
    let h = build_hamiltonian(&p);
    let code = shor_code();
    let psi = code.logical_zero();
    let rho0 = DensityMatrix::from_pure(psi)?;
    let t = p.tau();
    let np = NoiseParams::new(0.05, 128);

    let rho = evolve_noisy(&rho0, t, &h, &np)?;
    let clean = h.evolve_density(&rho0, t)?;
    println!("integrator: P0L {:.6}, purity {:.6}, distance to noiseless {:.6}", code.p0l(&rho)?, rho.purity(), rho.trace_distance(&clean)?);

    for count in [1_000u64, 10_000] {
        let ens = run_ensemble(psi, t, &h, &np, 7, count)?;
        println!(
            "{count:>6} trajectories: mean events {:.3}, distance to integrator {:.5}",
            ens.mean_event_count(),
            ens.density.trace_distance(&rho)?
        );
    }
    Ok(())
}

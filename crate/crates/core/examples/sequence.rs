//! The error-correction sequence against uncorrected noisy evolution over a few periods.

use shor_rabi::hamiltonian::{build_hamiltonian, SystemParams};
use shor_rabi::noise::NoisePlacement;
use shor_rabi::qec_sequence::{run_sequence, Protocol, SequenceSchedule, Stage};
use shor_rabi::shor_code::shor_code;
use shor_rabi::state::DensityMatrix;

fn main() -> shor_rabi::Result<()> {
    let p = SystemParams::new(0.1, 1.0)?;
    let code = shor_code();
    let rho0 = DensityMatrix::from_pure(code.logical_zero())?;
    let epsilon = 0.02;
    let mut sched = SequenceSchedule::new(p.tau(), 6, 4);
    sched.steps_per_interval = 16;
    sched.placement = NoisePlacement::Midpoint;
    sched.trace_distance = true;

    let corrected = run_sequence(&rho0, &p, epsilon, &sched)?;
    sched.protocol = Protocol::NoCorrection;
    let noisy = run_sequence(&rho0, &p, epsilon, &sched)?;

    let h = build_hamiltonian(&p);
    println!("{:>3} {:>10} {:>10} {:>10} {:>12}", "m", "noiseless", "noisy", "corrected", "multi-error");
    for m in 1..=4 {
        let t = p.t_m(m);
        let pick = |rows: &[shor_rabi::qec_sequence::SequenceRow], stage| {
            rows.iter().find(|r| (r.t - t).abs() < 1e-9 && r.stage == stage).cloned().expect("row at t_m")
        };
        let c = pick(&corrected.rows, Stage::PostQec);
        let n = pick(&noisy.rows, Stage::Evolved);
        let ideal = code.p0l(&h.evolve_density(&rho0, t)?)?;
        println!("{m:>3} {ideal:10.6} {:10.6} {:10.6} {:12.2e}", n.p0l, c.p0l, c.multi_error_weight);
    }
    Ok(())
}

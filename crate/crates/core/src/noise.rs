//! Independent single-qubit depolarizing noise, applied either to a density matrix
//! (deterministic) or sampled as Pauli events along state-vector trajectories.
//!
//! One step of the channel on qubit `i` is
//! `rho -> (1 - p) rho + (p/3) (X_i rho X_i + Y_i rho Y_i + Z_i rho Z_i)`, `p = eps dt`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::DiagonalHamiltonian;
use crate::pauli::{Letter, PauliString};
use crate::state::{DensityMatrix, StateVector};

/// Largest `eps * dt` accepted for a single step.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;

/// Where the noise acts inside each subinterval.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoisePlacement {
    /// After the full unitary substep; first-order accurate in `1/N`.
    #[default]
    End,
    /// Between two half substeps; second-order accurate in `1/N`.
    Midpoint,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    pub epsilon: f64,
    /// Number of subintervals for the evolution interval.
    pub steps: usize,
    pub placement: NoisePlacement,
}

impl NoiseParams {
    pub fn new(epsilon: f64, steps: usize) -> Self {
        Self { epsilon, steps, placement: NoisePlacement::End }
    }

    pub fn with_placement(mut self, placement: NoisePlacement) -> Self {
        self.placement = placement;
        self
    }

    pub fn noiseless() -> Self {
        Self::new(0.0, 1)
    }

    /// Checks the rate and that `eps * t / steps` stays below [`MAX_STEP_PROBABILITY`].
    pub fn validate(&self, t: f64) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidInput(format!("epsilon must be nonnegative, got {}", self.epsilon)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidInput("number of subintervals must be at least 1".into()));
        }
        let p = self.epsilon * t / self.steps as f64;
        if p >= MAX_STEP_PROBABILITY {
            return Err(Error::InvalidInput(format!("eps dt = {p} is not below {MAX_STEP_PROBABILITY}")));
        }
        Ok(())
    }
}

/// Applies the nine-qubit (in general n-qubit) depolarizing step in place.
pub fn depolarize_in_place(rho: &mut DensityMatrix, p: f64) -> Result<()> {
    if !(0.0..=MAX_STEP_PROBABILITY).contains(&p) {
        return Err(Error::InvalidInput(format!("eps dt = {p} outside [0, {MAX_STEP_PROBABILITY}]")));
    }
    if p == 0.0 {
        return Ok(());
    }
    let keep = 1.0 - 2.0 * p / 3.0;
    let swap = 2.0 * p / 3.0;
    let coherence = 1.0 - 4.0 * p / 3.0;
    let dim = rho.dim();
    let n = rho.num_qubits();
    let data = rho.data_mut();
    for q in 0..n {
        let m = 1usize << q;
        for r in (0..dim).filter(|r| r & m == 0) {
            let (r0, r1) = (r * dim, (r | m) * dim);
            for c in (0..dim).filter(|c| c & m == 0) {
                let (a, d) = (data[r0 + c], data[r1 + (c | m)]);
                data[r0 + c] = keep * a + swap * d;
                data[r1 + (c | m)] = keep * d + swap * a;
                data[r0 + (c | m)] *= coherence;
                data[r1 + c] *= coherence;
            }
        }
    }
    Ok(())
}

pub fn depolarize_step(rho: &DensityMatrix, p: f64) -> Result<DensityMatrix> {
    let mut out = rho.clone();
    depolarize_in_place(&mut out, p)?;
    Ok(out)
}

/// Evolves `rho0` for time `t` under `h`, interleaving `np.steps` depolarizing steps.
pub fn evolve_noisy(rho0: &DensityMatrix, t: f64, h: &DiagonalHamiltonian, np: &NoiseParams) -> Result<DensityMatrix> {
    check_dim(h.energies().len(), rho0.dim())?;
    np.validate(t)?;
    let mut rho = rho0.clone();
    evolve_noisy_in_place(&mut rho, t, h, np)?;
    Ok(rho)
}

pub(crate) fn evolve_noisy_in_place(rho: &mut DensityMatrix, t: f64, h: &DiagonalHamiltonian, np: &NoiseParams) -> Result<()> {
    let dt = t / np.steps as f64;
    let p = np.epsilon * dt;
    if p == 0.0 {
        rho.conjugate_diagonal(&h.propagator(t));
        return Ok(());
    }
    match np.placement {
        NoisePlacement::End => {
            let u = h.propagator(dt);
            for _ in 0..np.steps {
                rho.conjugate_diagonal(&u);
                depolarize_in_place(rho, p)?;
            }
        }
        NoisePlacement::Midpoint => {
            let half = h.propagator(dt / 2.0);
            let full = h.propagator(dt);
            rho.conjugate_diagonal(&half);
            for k in 0..np.steps {
                depolarize_in_place(rho, p)?;
                rho.conjugate_diagonal(if k + 1 == np.steps { &half } else { &full });
            }
        }
    }
    Ok(())
}

/// `int_0^t e^{-i w s} ds`.
fn phase_integral(w: f64, t: f64) -> Complex64 {
    let x = w * t;
    if x.abs() < 1e-6 {
        Complex64::new(t, 0.0) * Complex64::new(1.0 - x * x / 6.0, -x / 2.0)
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -x)) / Complex64::new(0.0, w)
    }
}

/// The first-order noisy state
///
/// ```text
/// (1 - 9 eps t) rho_H(t) + (eps/3) int_0^t dt' sum_i sum_a U(t - t') s_a^i rho_H(t') s_a^i U(t - t')^†
/// ```
///
/// with the time integral done exactly, which is possible because `H` is diagonal.
pub fn first_order_noisy(rho0: &DensityMatrix, t: f64, h: &DiagonalHamiltonian, epsilon: f64) -> Result<DensityMatrix> {
    check_dim(h.energies().len(), rho0.dim())?;
    let n = rho0.num_qubits();
    let dim = rho0.dim();
    let e = h.energies();
    let rho_h = h.evolve_density(rho0, t)?;
    let mut out = rho_h.clone();
    out.scale(1.0 - n as f64 * epsilon * t);
    let data = out.data_mut();
    for q in 0..n {
        let m = 1usize << q;
        for r in 0..dim {
            for c in 0..dim {
                let same = (r ^ c) & m == 0;
                // X, Y, Z conjugations: the unshifted entry enters with sign +1 (Z) when the
                // qubit is diagonal and -1 otherwise; the shifted entry enters twice (X and Y)
                // on the diagonal and cancels off it.
                let mut acc = rho_h.get(r, c) * (if same { t } else { -t });
                if same {
                    let (rs, cs) = (r ^ m, c ^ m);
                    let src = rho0.get(rs, cs);
                    if src != Complex64::new(0.0, 0.0) {
                        let w = (e[rs] - e[cs]) - (e[r] - e[c]);
                        acc += 2.0 * src * Complex64::from_polar(1.0, -(e[r] - e[c]) * t) * phase_integral(w, t);
                    }
                }
                data[r * dim + c] += acc * (epsilon / 3.0);
            }
        }
    }
    Ok(out)
}

/// A single noise event on one trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NoiseEvent {
    /// Subinterval index, starting at 0.
    pub step: usize,
    pub qubit: usize,
    pub letter: Letter,
}

#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub index: u64,
    /// `(time, event)`, nondecreasing in time.
    pub events: Vec<(f64, NoiseEvent)>,
    pub final_state: StateVector,
}

/// Time at which subinterval `step` applies its noise.
fn event_time(step: usize, dt: f64, placement: NoisePlacement) -> f64 {
    match placement {
        NoisePlacement::End => (step + 1) as f64 * dt,
        NoisePlacement::Midpoint => (step as f64 + 0.5) * dt,
    }
}

/// Draws the noise events for trajectory `index`.
///
/// Every (subinterval, qubit) slot fails independently with probability `p = eps dt`, so
/// the gaps between failing slots are geometric and can be drawn directly. Each trajectory
/// uses its own ChaCha stream, so results do not depend on how the ensemble is scheduled.
pub fn sample_events(n: usize, np: &NoiseParams, t: f64, seed: u64, index: u64) -> Vec<(f64, NoiseEvent)> {
    let dt = t / np.steps as f64;
    let p = np.epsilon * dt;
    let mut events = Vec::new();
    if p <= 0.0 {
        return events;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let slots = np.steps * n;
    let log_q = (-p).ln_1p();
    let mut slot = 0usize;
    loop {
        let u: f64 = 1.0 - rng.gen::<f64>();
        let gap = (u.ln() / log_q).floor();
        if !gap.is_finite() || gap >= (slots - slot) as f64 {
            break;
        }
        slot += gap as usize;
        let letter = Letter::NON_IDENTITY[rng.gen_range(0..3)];
        let step = slot / n;
        let event = NoiseEvent { step, qubit: slot % n + 1, letter };
        events.push((event_time(step, dt, np.placement), event));
        slot += 1;
        if slot >= slots {
            break;
        }
    }
    events
}

/// Evolves `psi0` exactly between the given events and applies each event's Pauli.
pub fn evolve_with_events(psi0: &StateVector, t: f64, h: &DiagonalHamiltonian, events: &[(f64, NoiseEvent)]) -> Result<StateVector> {
    let n = psi0.num_qubits();
    let mut psi = psi0.clone();
    let mut now = 0.0;
    for (time, ev) in events {
        if *time > now {
            psi = h.evolve(&psi, time - now)?;
            now = *time;
        }
        psi = PauliString::single(ev.qubit, ev.letter, n)?.apply_to_state(&psi)?;
    }
    h.evolve(&psi, t - now)
}

pub fn sample_trajectory(psi0: &StateVector, t: f64, h: &DiagonalHamiltonian, np: &NoiseParams, seed: u64, index: u64) -> Result<TrajectoryRecord> {
    np.validate(t)?;
    let events = sample_events(psi0.num_qubits(), np, t, seed, index);
    let final_state = evolve_with_events(psi0, t, h, &events)?;
    Ok(TrajectoryRecord { seed, index, events, final_state })
}

/// Event-count and fidelity summary of one trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectorySummary {
    pub index: u64,
    pub event_count: usize,
    /// `|<psi_noiseless(t)|psi(t)>|`.
    pub fidelity: f64,
}

/// Result of an ensemble run.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub seed: u64,
    pub summaries: Vec<TrajectorySummary>,
    /// Average of `|psi><psi|` over all trajectories.
    pub density: DensityMatrix,
}

impl Ensemble {
    pub fn mean_event_count(&self) -> f64 {
        self.summaries.iter().map(|s| s.event_count as f64).sum::<f64>() / self.summaries.len() as f64
    }

    /// Writes `seed,trajectory,event_count,fidelity` rows.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["seed", "trajectory", "event_count", "fidelity"])?;
        for s in &self.summaries {
            out.write_record([self.seed.to_string(), s.index.to_string(), s.event_count.to_string(), s.fidelity.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Runs `count` trajectories and accumulates their density matrix.
///
/// Trajectories with identical event lists share one propagation, so the cost is driven by
/// the number of distinct event lists rather than by `count`.
pub fn run_ensemble(psi0: &StateVector, t: f64, h: &DiagonalHamiltonian, np: &NoiseParams, seed: u64, count: u64) -> Result<Ensemble> {
    np.validate(t)?;
    if count == 0 {
        return Err(Error::InvalidInput("ensemble needs at least one trajectory".into()));
    }
    let n = psi0.num_qubits();
    let lists: Vec<Vec<(f64, NoiseEvent)>> = (0..count).into_par_iter().map(|i| sample_events(n, np, t, seed, i)).collect();
    let mut groups: BTreeMap<Vec<NoiseEvent>, (Vec<(f64, NoiseEvent)>, u64)> = BTreeMap::new();
    for list in &lists {
        let key: Vec<NoiseEvent> = list.iter().map(|(_, e)| *e).collect();
        groups.entry(key).or_insert_with(|| (list.clone(), 0)).1 += 1;
    }
    let noiseless = h.evolve(psi0, t)?;
    let finals: Vec<(Vec<NoiseEvent>, u64, StateVector)> = groups
        .into_par_iter()
        .map(|(key, (list, k))| evolve_with_events(psi0, t, h, &list).map(|psi| (key, k, psi)))
        .collect::<Result<_>>()?;
    let members: Vec<(f64, &StateVector)> = finals.iter().map(|(_, k, psi)| (*k as f64 / count as f64, psi)).collect();
    let density = DensityMatrix::from_ensemble(n, &members)?;
    let fidelity: BTreeMap<&Vec<NoiseEvent>, f64> =
        finals.iter().map(|(key, _, psi)| Ok((key, noiseless.fidelity_up_to_phase(psi)?))).collect::<Result<_>>()?;
    let summaries = lists
        .iter()
        .enumerate()
        .map(|(i, list)| {
            let key: Vec<NoiseEvent> = list.iter().map(|(_, e)| *e).collect();
            TrajectorySummary { index: i as u64, event_count: list.len(), fidelity: fidelity[&key] }
        })
        .collect();
    Ok(Ensemble { seed, summaries, density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_hamiltonian, SystemParams};
    use crate::shor_code::shor_code;

    fn one_qubit(rho: [[f64; 2]; 2]) -> DensityMatrix {
        let data = rho.iter().flatten().map(|&x| Complex64::new(x, 0.0)).collect();
        DensityMatrix::from_raw(1, data)
    }

    #[test]
    fn single_qubit_populations_relax() {
        let p = 0.03;
        let out = depolarize_step(&one_qubit([[1.0, 0.0], [0.0, 0.0]]), p).unwrap();
        assert!((out.get(0, 0).re - (1.0 - 2.0 * p / 3.0)).abs() < 1e-15);
        assert!((out.get(1, 1).re - 2.0 * p / 3.0).abs() < 1e-15);
    }

    #[test]
    fn coherences_shrink_by_one_minus_four_thirds_p() {
        let p = 0.06;
        let out = depolarize_step(&one_qubit([[0.5, 0.5], [0.5, 0.5]]), p).unwrap();
        assert!((out.get(0, 1).re - 0.5 * (1.0 - 4.0 * p / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let rho = DensityMatrix::maximally_mixed(9);
        assert!(depolarize_step(&rho, 0.05).unwrap().max_abs_diff(&rho).unwrap() < 1e-16);
    }

    #[test]
    fn matches_explicit_pauli_sum() {
        let code = shor_code();
        let psi = code.logical_state(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let h = build_hamiltonian(&SystemParams::new(0.1, 1.0).unwrap());
        let rho = h.evolve_density(&DensityMatrix::from_pure(&psi).unwrap(), 0.37).unwrap();
        let p = 0.02;
        let mut expected = rho.clone();
        for q in 1..=9 {
            let mut terms = vec![(1.0 - p, expected.clone())];
            for l in Letter::NON_IDENTITY {
                terms.push((p / 3.0, expected.conjugated_by(&PauliString::single(q, l, 9).unwrap()).unwrap()));
            }
            let refs: Vec<_> = terms.iter().map(|(w, r)| (*w, r)).collect();
            expected = DensityMatrix::linear_combination(&refs).unwrap();
        }
        assert!(depolarize_step(&rho, p).unwrap().max_abs_diff(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn out_of_range_probability_rejected() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(depolarize_step(&rho, 0.2).is_err());
        assert!(depolarize_step(&rho, -0.01).is_err());
        assert!(NoiseParams::new(1.0, 10).validate(1.0).is_err());
    }

    #[test]
    fn noiseless_evolution_matches_unitary() {
        let p = SystemParams::new(0.1, 1.0).unwrap();
        let h = build_hamiltonian(&p);
        let rho0 = DensityMatrix::from_pure(shor_code().logical_zero()).unwrap();
        for steps in [1, 7] {
            let a = evolve_noisy(&rho0, 1.3, &h, &NoiseParams::new(0.0, steps)).unwrap();
            assert!(a.max_abs_diff(&h.evolve_density(&rho0, 1.3).unwrap()).unwrap() < 1e-14);
        }
    }

    #[test]
    fn phase_integral_limits() {
        assert!((phase_integral(0.0, 2.0) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let w = 0.3;
        let exact = (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * 2.0)) / Complex64::new(0.0, w);
        assert!((phase_integral(w, 2.0) - exact).norm() < 1e-15);
        assert!((phase_integral(1e-8, 2.0) - Complex64::new(2.0, -2e-8)).norm() < 1e-14);
    }

    #[test]
    fn first_order_state_has_unit_trace() {
        let p = SystemParams::new(0.1, 1.0).unwrap();
        let h = build_hamiltonian(&p);
        let rho0 = DensityMatrix::from_pure(shor_code().logical_zero()).unwrap();
        let rho = first_order_noisy(&rho0, p.tau(), &h, 0.01).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-13, "{}", rho.trace());
        assert!(rho.hermiticity_defect() < 1e-15, "{}", rho.hermiticity_defect());
    }

    #[test]
    fn trajectories_are_reproducible() {
        let np = NoiseParams::new(0.05, 64);
        let a = sample_events(9, &np, 1.0, 7, 3);
        let b = sample_events(9, &np, 1.0, 7, 3);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0].0 <= w[1].0));
        assert!(sample_events(9, &NoiseParams::new(0.0, 64), 1.0, 7, 3).is_empty());
    }
}

//! The error-correction sequence: bit-flip QEC every `nu = tau / n`, and an optional
//! pre-correction followed by full QEC at every `t_m = m tau`, with noisy evolution in
//! between. Also the two comparison protocols (no correction, and phase QEC at a fixed
//! interval `mu`) and the coupling normalization used when the `k_r` are not all odd.

mod channels;
mod normalization;

pub use channels::{
    measure_bit_syndrome, measure_phase_syndrome, qec_channel, qec_channel_with_stats, recover, BranchLabel, QecKind,
    QecOutcome, SyndromeBranch,
};
pub use normalization::{
    convergents, normalize_couplings, parity_precorrection_for, Approximant, Normalization, MAX_DENOMINATOR,
    SEPARATION_WARNING,
};

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::{build_hamiltonian, SystemParams};
use crate::noise::{evolve_noisy_in_place, NoiseParams, NoisePlacement};
use crate::pauli::PauliString;
use crate::shor_code::{shor_code, NUM_QUBITS};
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Protocol {
    /// Bit QEC every `nu`, pre-correction and full QEC at every `t_m`.
    ErrorCorrectionSequence,
    /// Noisy evolution only; rows are still emitted at every `nu` boundary.
    NoCorrection,
    /// Phase QEC every `mu`, regardless of `t_m`.
    NaivePhase { mu: f64 },
}

/// Relative order of the noise step and QEC when they fall on the same instant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coincidence {
    #[default]
    NoiseFirst,
    QecFirst,
}

#[derive(Clone, Debug)]
pub struct SequenceSchedule {
    pub tau: f64,
    /// Bit-flip QEC rounds per period.
    pub n: usize,
    pub periods: u32,
    pub protocol: Protocol,
    /// Applied before QEC at odd `m`.
    pub precorrection: Option<PauliString>,
    /// Irregular bit-QEC instants as fractions of `tau` in `(0, 1)`; replaces the regular grid.
    pub boundaries: Option<Vec<f64>>,
    /// Noise subintervals per QEC interval.
    pub steps_per_interval: usize,
    pub placement: NoisePlacement,
    pub coincidence: Coincidence,
    /// Extra `Evolved` rows every this many noise steps inside an interval (0 disables).
    pub sample_every: usize,
    /// Compute the trace distance to the noiseless state on every row (one eigensolve per row).
    pub trace_distance: bool,
}

impl SequenceSchedule {
    pub fn new(tau: f64, n: usize, periods: u32) -> Self {
        Self {
            tau,
            n,
            periods,
            protocol: Protocol::ErrorCorrectionSequence,
            precorrection: None,
            boundaries: None,
            steps_per_interval: 256,
            placement: NoisePlacement::End,
            coincidence: Coincidence::NoiseFirst,
            sample_every: 0,
            trace_distance: false,
        }
    }

    pub fn nu(&self) -> f64 {
        self.tau / self.n as f64
    }

    pub fn total_time(&self) -> f64 {
        self.periods as f64 * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidInput(format!("tau must be positive, got {}", self.tau)));
        }
        if self.n == 0 || self.steps_per_interval == 0 {
            return Err(Error::InvalidInput("n and steps per interval must be at least 1".into()));
        }
        if let Protocol::NaivePhase { mu } = self.protocol {
            if !(mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidInput(format!("mu must be positive, got {mu}")));
            }
        }
        if let Some(b) = &self.boundaries {
            let ok = b.iter().all(|&f| f > 0.0 && f < 1.0) && b.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(Error::InvalidInput("irregular boundaries must increase strictly inside (0, 1)".into()));
            }
        }
        Ok(())
    }

    /// Instants in `(0, total]` at which something happens, with the action taken there.
    fn timeline(&self) -> Vec<(f64, Action)> {
        let total = self.total_time();
        match self.protocol {
            Protocol::NaivePhase { mu } => {
                let count = (total / mu + 1e-9).floor() as usize;
                let mut out: Vec<(f64, Action)> = (1..=count).map(|k| (k as f64 * mu, Action::Phase)).collect();
                if out.last().map_or(true, |&(t, _)| (total - t).abs() > 1e-12 * total) {
                    out.push((total, Action::Sample));
                }
                out
            }
            Protocol::ErrorCorrectionSequence | Protocol::NoCorrection => {
                let fractions: Vec<f64> = match &self.boundaries {
                    Some(b) => b.clone(),
                    None => (1..self.n).map(|j| j as f64 / self.n as f64).collect(),
                };
                let correct = self.protocol == Protocol::ErrorCorrectionSequence;
                let mut out = Vec::new();
                for m in 0..self.periods {
                    for &f in &fractions {
                        out.push(((m as f64 + f) * self.tau, if correct { Action::Bit } else { Action::Sample }));
                    }
                    let action = if correct { Action::Full { period: m + 1 } } else { Action::Sample };
                    out.push(((m + 1) as f64 * self.tau, action));
                }
                out
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Action {
    Sample,
    Bit,
    Phase,
    Full { period: u32 },
}

/// When a row was taken relative to the QEC at its instant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Inside an interval, or at an instant without QEC.
    Evolved,
    PreQec,
    PostQec,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Evolved => "evolved",
            Stage::PreQec => "pre_qec",
            Stage::PostQec => "post_qec",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRow {
    pub t: f64,
    pub stage: Stage,
    /// `<0_L| rho |0_L>`.
    pub p0l: f64,
    /// `tr(P_c rho)`.
    pub code_weight: f64,
    /// Trace distance to the noiseless, uncorrected `rho_H(t)` when requested.
    pub trace_distance: Option<f64>,
    /// Cumulative probability assigned to multi-block bit-flip branches so far.
    pub multi_error_weight: f64,
}

#[derive(Clone, Debug)]
pub struct SequenceOutput {
    pub rows: Vec<SequenceRow>,
    pub final_state: DensityMatrix,
}

/// Runs the protocol and returns a row per sample point plus the final state.
pub fn run_sequence(rho0: &DensityMatrix, params: &SystemParams, epsilon: f64, sched: &SequenceSchedule) -> Result<SequenceOutput> {
    run_sequence_observed(rho0, params, epsilon, sched, |_, _| {})
}

/// Like [`run_sequence`], calling `observer` with every row and the state it describes.
pub fn run_sequence_observed<F>(
    rho0: &DensityMatrix,
    params: &SystemParams,
    epsilon: f64,
    sched: &SequenceSchedule,
    mut observer: F,
) -> Result<SequenceOutput>
where
    F: FnMut(&SequenceRow, &DensityMatrix),
{
    check_dim(NUM_QUBITS, rho0.num_qubits())?;
    params.validate()?;
    sched.validate()?;
    let code = shor_code();
    let weight = code.code_weight(rho0)?;
    if (weight - 1.0).abs() > 1e-10 {
        return Err(Error::OutsideCodeSpace { weight });
    }
    let h = build_hamiltonian(params);
    let mut rho = rho0.clone();
    let mut now = 0.0;
    let mut multi = 0.0;
    let mut rows = Vec::new();

    let mut emit = |rho: &DensityMatrix, t: f64, stage: Stage, multi: f64| -> Result<()> {
        let trace_distance = if sched.trace_distance {
            let reference = h.evolve_density(rho0, t)?;
            Some(rho.trace_distance(&reference)?)
        } else {
            None
        };
        let row = SequenceRow { t, stage, p0l: code.p0l(rho)?, code_weight: code.code_weight(rho)?, trace_distance, multi_error_weight: multi };
        observer(&row, rho);
        rows.push(row);
        Ok(())
    };
    emit(&rho, 0.0, Stage::PostQec, 0.0)?;

    let apply = |rho: &mut DensityMatrix, action: Action, multi: &mut f64| -> Result<()> {
        match action {
            Action::Sample => {}
            Action::Bit => {
                let out = qec_channel_with_stats(rho, QecKind::Bit)?;
                *multi += out.multi_bit_weight;
                *rho = out.state;
            }
            Action::Phase => *rho = qec_channel(rho, QecKind::Phase)?,
            Action::Full { period } => {
                if period % 2 == 1 {
                    if let Some(p) = &sched.precorrection {
                        *rho = rho.conjugated_by(p)?;
                    }
                }
                let out = qec_channel_with_stats(rho, QecKind::Both)?;
                *multi += out.multi_bit_weight;
                *rho = out.state;
            }
        }
        Ok(())
    };

    for (t, action) in sched.timeline() {
        let span = t - now;
        let steps = sched.steps_per_interval;
        let np = NoiseParams { epsilon, steps, placement: sched.placement };
        np.validate(span)?;
        let dt = span / steps as f64;
        // With QEC first, the last noise step is held back until after the correction.
        let qec_first = sched.coincidence == Coincidence::QecFirst
            && sched.placement == NoisePlacement::End
            && action != Action::Sample
            && epsilon > 0.0;
        let mut done = 0;
        let chunk = if sched.sample_every > 0 { sched.sample_every } else { steps };
        while done < steps {
            let k = chunk.min(steps - done);
            let piece = NoiseParams { epsilon, steps: k, placement: sched.placement };
            let last = done + k == steps;
            if last && qec_first {
                if k > 1 {
                    evolve_noisy_in_place(&mut rho, dt * (k - 1) as f64, &h, &NoiseParams { steps: k - 1, ..piece })?;
                }
                rho.conjugate_diagonal(&h.propagator(dt));
            } else {
                evolve_noisy_in_place(&mut rho, dt * k as f64, &h, &piece)?;
            }
            done += k;
            if !last {
                emit(&rho, now + dt * done as f64, Stage::Evolved, multi)?;
            }
        }
        now = t;
        if action == Action::Sample {
            emit(&rho, t, Stage::Evolved, multi)?;
            continue;
        }
        emit(&rho, t, Stage::PreQec, multi)?;
        apply(&mut rho, action, &mut multi)?;
        if qec_first {
            crate::noise::depolarize_in_place(&mut rho, epsilon * dt)?;
        }
        emit(&rho, t, Stage::PostQec, multi)?;
    }
    Ok(SequenceOutput { rows, final_state: rho })
}

/// Convenience: the state right after the last row at time `t` (last post-QEC row if any).
pub fn row_at(rows: &[SequenceRow], t: f64, stage: Stage) -> Option<&SequenceRow> {
    rows.iter().rev().find(|r| r.stage == stage && (r.t - t).abs() <= 1e-9 * t.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::logical_rotation;
    use num_complex::Complex64;

    #[test]
    fn noiseless_sequence_follows_the_discrete_rabi_oscillation() {
        let p = SystemParams::new(0.1, 1.0).unwrap().with_g([0.2, 0.4, 0.1, 0.3, 0.5, 0.7]);
        let code = shor_code();
        let psi0 = code.logical_state(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let rho0 = DensityMatrix::from_pure(&psi0).unwrap();
        let mut sched = SequenceSchedule::new(p.tau(), 4, 6);
        sched.steps_per_interval = 1;
        let mut checked = 0;
        run_sequence_observed(&rho0, &p, 0.0, &sched, |row, rho| {
            if row.stage == Stage::PostQec {
                let m = (row.t / p.tau()).round();
                if (row.t - m * p.tau()).abs() < 1e-12 {
                    let ideal = logical_rotation(&psi0, p.omega * row.t).unwrap();
                    assert!((rho.overlap(&ideal).unwrap() - 1.0).abs() < 1e-10);
                    checked += 1;
                }
            }
        })
        .unwrap();
        assert_eq!(checked, 7);
    }

    #[test]
    fn timeline_shapes() {
        let s = SequenceSchedule::new(1.0, 3, 2);
        let t: Vec<f64> = s.timeline().iter().map(|x| x.0).collect();
        assert_eq!(t.len(), 6);
        assert!((t[2] - 1.0).abs() < 1e-15 && (t[5] - 2.0).abs() < 1e-15);
        let mut naive = SequenceSchedule::new(1.0, 3, 2);
        naive.protocol = Protocol::NaivePhase { mu: 0.3 };
        let tl = naive.timeline();
        assert_eq!(tl.len(), 7);
        assert_eq!(tl.last().unwrap().1, Action::Sample);
    }

    #[test]
    fn rejects_bad_schedules() {
        let mut s = SequenceSchedule::new(1.0, 3, 2);
        s.boundaries = Some(vec![0.5, 0.2]);
        assert!(s.validate().is_err());
        let rho = DensityMatrix::from_pure(&crate::state::StateVector::basis(9, 1)).unwrap();
        let p = SystemParams::new(0.1, 1.0).unwrap();
        assert!(matches!(run_sequence(&rho, &p, 0.0, &SequenceSchedule::new(p.tau(), 2, 1)), Err(Error::OutsideCodeSpace { .. })));
    }
}

//! First-order predictions for one error-correction period, the quadrature oracle they
//! are checked against, and the data series behind the three figures.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{check_dim, Error, Result};
use crate::hamiltonian::{build_hamiltonian, closed_form_p0l, z_sign, SystemParams, CENTRAL};
use crate::noise::NoisePlacement;
use crate::pauli::{Letter, PauliString};
use crate::qec_sequence::{measure_phase_syndrome, recover, run_sequence, BranchLabel, Protocol, SequenceRow, SequenceSchedule, Stage};
use crate::shor_code::{shor_code, NUM_QUBITS};
use crate::state::DensityMatrix;
use crate::table::{cell, Table};

/// `sin(x)/x`, with a Taylor branch near zero.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 * (1.0 - x2 / 20.0)
    } else {
        x.sin() / x
    }
}

/// `(a_n^+, a_n^-)` with `a_n^± = 3/16 + sinc(4 pi/n)/16 ± sinc(2 pi/n)/4`.
pub fn sinc_coefficients(n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let base = 3.0 / 16.0 + sinc(4.0 * PI / n as f64) / 16.0;
    let odd = sinc(2.0 * PI / n as f64) / 4.0;
    Ok((base + odd, base - odd))
}

/// What a branch of the table leaves behind after recovery.
#[derive(Clone, Debug, PartialEq)]
pub enum CorrectedState {
    /// `(1 - 3 eps tau) rho_H + (eps tau / 3) sum_i Z_i rho_H Z_i`.
    NoErrorMixture,
    /// `(rho_H + Z_s rho_H Z_s) / 2`.
    HalfDephased { qubit: usize },
    /// `(rho_e + Z_r rho_e Z_r) / 2`, to be resolved by the phase syndrome.
    Propagated { qubit: usize },
    /// `(a+ rho_H + a- X_L rho_H X_L) / (a+ + a-)`.
    Weighted { a_plus: f64, a_minus: f64 },
    /// `(rho_H + X_L rho_H X_L) / 2`.
    LogicalMixture,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub error: String,
    pub probability: f64,
    pub corrected: CorrectedState,
}

/// Probabilities and corrected states of the bit-flip classes over one period, to first order in `eps tau`.
pub fn bit_branch_table(eps_tau: f64) -> Vec<TableRow> {
    let mut rows = vec![TableRow { error: "none".into(), probability: 1.0 - 6.0 * eps_tau, corrected: CorrectedState::NoErrorMixture }];
    for q in 1..=NUM_QUBITS {
        let corrected = if CENTRAL.contains(&q) { CorrectedState::Propagated { qubit: q } } else { CorrectedState::HalfDephased { qubit: q } };
        rows.push(TableRow { error: format!("X{q}"), probability: 2.0 * eps_tau / 3.0, corrected });
    }
    rows
}

/// Phase-syndrome outcomes for the state left by an `X_r` error, one row per outcome.
///
/// No error and `Z_r` each occur with probability `3/8 + sinc(4 pi/n)/8`; each of the two
/// other blocks with `1/8 - sinc(4 pi/n)/8`.
pub fn phase_branch_table(n: usize, r: usize) -> Result<Vec<TableRow>> {
    if !CENTRAL.contains(&r) {
        return Err(Error::InvalidInput(format!("r must be 1, 4 or 7, got {r}")));
    }
    let (a_plus, a_minus) = sinc_coefficients(n)?;
    let s4 = sinc(4.0 * PI / n as f64);
    let mut rows = vec![
        TableRow { error: "none".into(), probability: 3.0 / 8.0 + s4 / 8.0, corrected: CorrectedState::Weighted { a_plus, a_minus } },
        TableRow { error: format!("Z{r}"), probability: 3.0 / 8.0 + s4 / 8.0, corrected: CorrectedState::Weighted { a_plus, a_minus } },
    ];
    for other in CENTRAL.into_iter().filter(|&q| q != r) {
        rows.push(TableRow { error: format!("Z{other}"), probability: 1.0 / 8.0 - s4 / 8.0, corrected: CorrectedState::LogicalMixture });
    }
    Ok(rows)
}

/// `(1 - 3 eps tau) rho_H + (eps tau / 3) sum_i Z_i rho_H Z_i`.
pub fn no_error_corrected_state(rho_h: &DensityMatrix, eps_tau: f64) -> Result<DensityMatrix> {
    check_dim(NUM_QUBITS, rho_h.num_qubits())?;
    let mut out = rho_h.clone();
    out.scale(1.0 - 3.0 * eps_tau);
    for q in 1..=NUM_QUBITS {
        let z = PauliString::single(q, Letter::Z, NUM_QUBITS)?;
        out.add_assign_scaled(eps_tau / 3.0, &rho_h.conjugated_by(&z)?);
    }
    Ok(out)
}

/// `rho_H - eps tau [1 - sinc(2 pi/n)] (rho_H - X_L rho_H X_L)`.
pub fn predicted_rho_c(rho_h_tau: &DensityMatrix, eps_tau: f64, n: usize) -> Result<DensityMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let c = eps_tau * (1.0 - sinc(2.0 * PI / n as f64));
    let flipped = rho_h_tau.conjugated_by(shor_code().logical_x())?;
    DensityMatrix::linear_combination(&[(1.0 - c, rho_h_tau), (c, &flipped)])
}

/// `2 pi^2 eps tau L_yz / (3 n^2)`; valid for `n >= 8`.
pub fn predicted_distance(eps_tau: f64, n: usize, l_yz: f64) -> Result<f64> {
    if n < 8 {
        return Err(Error::InvalidInput(format!("the distance estimate needs n >= 8, got {n}")));
    }
    Ok(2.0 * PI * PI * eps_tau * l_yz / (3.0 * (n * n) as f64))
}

/// `(1 / sqrt(eps tau)) min(1, eps / omega)`.
pub fn required_n(epsilon: f64, omega: f64, tau: f64) -> Result<f64> {
    if !(epsilon > 0.0 && omega > 0.0 && tau > 0.0) {
        return Err(Error::InvalidInput("epsilon, omega and tau must be positive".into()));
    }
    Ok((epsilon / omega).min(1.0) / (epsilon * tau).sqrt())
}

/// All first-order quantities for one period, given the noiseless `rho_H(tau)`.
#[derive(Clone, Debug)]
pub struct FirstOrderReport {
    pub n: usize,
    pub eps_tau: f64,
    pub bit_table: Vec<TableRow>,
    pub phase_tables: Vec<(usize, Vec<TableRow>)>,
    pub a_plus: f64,
    pub a_minus: f64,
    pub l_yz: f64,
    pub rho_c_predicted: DensityMatrix,
    /// `None` when `n < 8`.
    pub distance_predicted: Option<f64>,
}

pub fn first_order_report(rho_h_tau: &DensityMatrix, eps_tau: f64, n: usize) -> Result<FirstOrderReport> {
    let (a_plus, a_minus) = sinc_coefficients(n)?;
    let l_yz = shor_code().l_yz(rho_h_tau)?;
    let phase_tables = CENTRAL.iter().map(|&r| Ok((r, phase_branch_table(n, r)?))).collect::<Result<_>>()?;
    Ok(FirstOrderReport {
        n,
        eps_tau,
        bit_table: bit_branch_table(eps_tau),
        phase_tables,
        a_plus,
        a_minus,
        l_yz,
        rho_c_predicted: predicted_rho_c(rho_h_tau, eps_tau, n)?,
        distance_predicted: if n >= 8 { Some(predicted_distance(eps_tau, n, l_yz)?) } else { None },
    })
}

/// Midpoint-rule evaluation of
/// `rho_e = (1/nu) int_0^nu e^{2iJ Z_r X_L t'} rho_H(tau - 2t') e^{-2iJ Z_r X_L t'} dt'`
/// with `nu = tau / n` and `rho_H(s) = e^{-iHs} rho0 e^{iHs}`.
///
/// Every operator involved is diagonal, so only the nonzero entries of `rho0` are integrated.
pub fn brute_force_rho_e(params: &SystemParams, rho0: &DensityMatrix, r: usize, n: usize, quadrature_points: usize) -> Result<DensityMatrix> {
    check_dim(NUM_QUBITS, rho0.num_qubits())?;
    if !CENTRAL.contains(&r) {
        return Err(Error::InvalidInput(format!("r must be 1, 4 or 7, got {r}")));
    }
    if quadrature_points < 1000 || n == 0 {
        return Err(Error::InvalidInput("need n >= 1 and at least 1000 quadrature points".into()));
    }
    let h = build_hamiltonian(params);
    let (tau, j) = (params.tau(), params.j);
    let nu = tau / n as f64;
    let dim = rho0.dim();
    let entries: Vec<(usize, usize)> =
        (0..dim).flat_map(|a| (0..dim).map(move |b| (a, b))).filter(|&(a, b)| rho0.get(a, b).norm() > 0.0).collect();
    let mut used: Vec<usize> = entries.iter().flat_map(|&(a, b)| [a, b]).collect();
    used.sort_unstable();
    used.dedup();
    let slot = |x: usize| used.binary_search(&x).expect("index collected above");
    // Z_r X_L = product of Z over the other two central qubits
    let sign: Vec<f64> = used.iter().map(|&b| CENTRAL.iter().filter(|&&q| q != r).map(|&q| z_sign(b, q, NUM_QUBITS)).product()).collect();
    let energy: Vec<f64> = used.iter().map(|&b| h.energies()[b]).collect();
    let mut sums = vec![Complex64::new(0.0, 0.0); entries.len()];
    let mut phases = vec![Complex64::new(0.0, 0.0); used.len()];
    let pairs: Vec<(usize, usize)> = entries.iter().map(|&(a, b)| (slot(a), slot(b))).collect();
    let dt = nu / quadrature_points as f64;
    for k in 0..quadrature_points {
        let t = (k as f64 + 0.5) * dt;
        for (i, ph) in phases.iter_mut().enumerate() {
            *ph = Complex64::from_polar(1.0, 2.0 * j * sign[i] * t - energy[i] * (tau - 2.0 * t));
        }
        for (s, &(a, b)) in sums.iter_mut().zip(&pairs) {
            *s += phases[a] * phases[b].conj();
        }
    }
    let mut out = DensityMatrix::zeros(NUM_QUBITS);
    let data = out.data_mut();
    for (&(a, b), s) in entries.iter().zip(&sums) {
        data[a * dim + b] = rho0.get(a, b) * s / quadrature_points as f64;
    }
    Ok(out)
}

/// A phase-syndrome outcome of `(rho_e + Z_r rho_e Z_r)/2`, found numerically.
#[derive(Clone, Debug)]
pub struct OracleBranch {
    pub label: BranchLabel,
    pub probability: f64,
    pub corrected: DensityMatrix,
}

/// Measures the phase syndrome of `(rho_e + Z_r rho_e Z_r)/2` and recovers every branch.
pub fn phase_branch_oracle(params: &SystemParams, rho0: &DensityMatrix, r: usize, n: usize, quadrature_points: usize) -> Result<Vec<OracleBranch>> {
    let rho_e = brute_force_rho_e(params, rho0, r, n, quadrature_points)?;
    let z = PauliString::single(r, Letter::Z, NUM_QUBITS)?;
    let mixed = DensityMatrix::linear_combination(&[(0.5, &rho_e), (0.5, &rho_e.conjugated_by(&z)?)])?;
    measure_phase_syndrome(&mixed)?
        .iter()
        .map(|b| Ok(OracleBranch { label: b.label.clone(), probability: b.probability, corrected: recover(b) }))
        .collect()
}

/// Least-squares `(a+, a-)` with `weight * corrected ~ a+ rho_H + a- X_L rho_H X_L` in the Frobenius norm.
pub fn fit_a_coefficients(corrected: &DensityMatrix, weight: f64, rho_h: &DensityMatrix) -> Result<(f64, f64)> {
    let flipped = rho_h.conjugated_by(shor_code().logical_x())?;
    let dot = |x: &DensityMatrix, y: &DensityMatrix| -> f64 { x.data().iter().zip(y.data()).map(|(a, b)| (a.conj() * b).re).sum() };
    let (g11, g12, g22) = (dot(rho_h, rho_h), dot(rho_h, &flipped), dot(&flipped, &flipped));
    let (b1, b2) = (weight * dot(rho_h, corrected), weight * dot(&flipped, corrected));
    let det = g11 * g22 - g12 * g12;
    if det.abs() < 1e-14 {
        return Err(Error::InvalidInput("rho_H and X_L rho_H X_L are linearly dependent".into()));
    }
    Ok(((g22 * b1 - g12 * b2) / det, (g11 * b2 - g12 * b1) / det))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    /// Naive phase QEC every `mu`.
    Fig2,
    /// Noiseless evolution and the discrete logical Rabi oscillation.
    Fig3,
    /// Noisy evolution with and without the error-correction sequence.
    Fig4,
}

impl std::str::FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(Error::InvalidInput(format!("unknown figure {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub epsilon: f64,
    /// Bit QEC rounds per period.
    pub n: usize,
    /// Naive phase-QEC interval; defaults to `tau / 2`.
    pub mu: Option<f64>,
    /// Length of the series; defaults to one logical period `2 pi / omega`.
    pub duration: Option<f64>,
    /// Samples per `tau` for noiseless curves.
    pub samples_per_tau: usize,
    pub steps_per_interval: usize,
    /// Rows every this many noise steps inside an interval.
    pub sample_every: usize,
    pub placement: NoisePlacement,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { epsilon: 0.0, n: 6, mu: None, duration: None, samples_per_tau: 24, steps_per_interval: 32, sample_every: 4, placement: NoisePlacement::End }
    }
}

const TIME_COLUMNS: [&str; 3] = ["t", "t_over_tau", "omega_t"];

fn time_cells(p: &SystemParams, t: f64) -> Vec<String> {
    vec![t.to_string(), (t / p.tau()).to_string(), (p.omega * t).to_string()]
}

fn echo(table: &mut Table, p: &SystemParams, opts: &FigureOptions) {
    table.param("omega", p.omega).param("j", p.j);
    for (i, q) in [1, 4, 7].iter().enumerate() {
        table.param(&format!("k{q}"), p.k[i]);
    }
    table.param("epsilon", opts.epsilon).param("n", opts.n).param("steps", opts.steps_per_interval);
}

fn is_period_boundary(p: &SystemParams, t: f64) -> bool {
    let m = (t / p.tau()).round();
    (t - m * p.tau()).abs() <= 1e-9 * p.tau()
}

/// Noiseless `P(|0_L>)` at `t` from `|0_L>`.
fn hamiltonian_p0l(h: &crate::hamiltonian::DiagonalHamiltonian, t: f64) -> Result<f64> {
    let code = shor_code();
    let psi = h.evolve(code.logical_zero(), t)?;
    Ok(code.logical_zero().inner(&psi)?.norm_sqr())
}

fn duration(p: &SystemParams, opts: &FigureOptions) -> f64 {
    opts.duration.unwrap_or(2.0 * PI / p.omega)
}

fn periods(p: &SystemParams, opts: &FigureOptions) -> u32 {
    ((duration(p, opts) / p.tau()) - 1e-9).ceil().max(1.0) as u32
}

pub fn figure_series(which: Figure, params: &SystemParams, opts: &FigureOptions) -> Result<Table> {
    params.validate()?;
    match which {
        Figure::Fig2 => fig2(params, opts),
        Figure::Fig3 => fig3(params, opts),
        Figure::Fig4 => fig4(params, opts),
    }
}

fn fig3(p: &SystemParams, opts: &FigureOptions) -> Result<Table> {
    if opts.samples_per_tau == 0 {
        return Err(Error::InvalidInput("samples per tau must be at least 1".into()));
    }
    let h = build_hamiltonian(p);
    let mut header = TIME_COLUMNS.to_vec();
    header.extend(["rabi", "hamiltonian", "closed_form", "dot"]);
    let mut table = Table::new("shor-rabi/fig3/v1", &header);
    echo(&mut table, p, opts);
    let closed = p.k == [1.0; 3] && p.zeta.iter().all(|&z| z == 0.0);
    let total = duration(p, opts);
    let step = p.tau() / opts.samples_per_tau as f64;
    let count = (total / step + 1e-9).floor() as usize;
    for i in 0..=count {
        let t = if i % opts.samples_per_tau == 0 { (i / opts.samples_per_tau) as f64 * p.tau() } else { i as f64 * step };
        let ham = hamiltonian_p0l(&h, t)?;
        let mut row = time_cells(p, t);
        row.push((p.omega * t).cos().powi(2).to_string());
        row.push(ham.to_string());
        row.push(cell(closed.then(|| closed_form_p0l(p, t))));
        row.push(cell((i % opts.samples_per_tau == 0).then_some(ham)));
        table.push(row)?;
    }
    Ok(table)
}

fn sequence_rows(p: &SystemParams, opts: &FigureOptions, protocol: Protocol) -> Result<Vec<SequenceRow>> {
    let mut sched = SequenceSchedule::new(p.tau(), opts.n, periods(p, opts));
    sched.protocol = protocol;
    sched.steps_per_interval = opts.steps_per_interval;
    sched.sample_every = opts.sample_every;
    sched.placement = opts.placement;
    let rho0 = DensityMatrix::from_pure(shor_code().logical_zero())?;
    let total = duration(p, opts);
    let rows = run_sequence(&rho0, p, opts.epsilon, &sched)?.rows;
    Ok(rows.into_iter().filter(|r| r.t <= total * (1.0 + 1e-12)).collect())
}

fn fig2(p: &SystemParams, opts: &FigureOptions) -> Result<Table> {
    let mu = opts.mu.unwrap_or(p.tau() / 2.0);
    let h = build_hamiltonian(p);
    let mut header = TIME_COLUMNS.to_vec();
    header.extend(["stage", "rabi", "hamiltonian", "naive_qec"]);
    let mut table = Table::new("shor-rabi/fig2/v1", &header);
    echo(&mut table, p, opts);
    table.param("mu", mu);
    let no_noise = FigureOptions { epsilon: 0.0, ..opts.clone() };
    for row in sequence_rows(p, &no_noise, Protocol::NaivePhase { mu })? {
        let mut cells = time_cells(p, row.t);
        cells.push(row.stage.as_str().to_string());
        cells.push((p.omega * row.t).cos().powi(2).to_string());
        cells.push(hamiltonian_p0l(&h, row.t)?.to_string());
        cells.push(row.p0l.to_string());
        table.push(cells)?;
    }
    Ok(table)
}

fn fig4(p: &SystemParams, opts: &FigureOptions) -> Result<Table> {
    let h = build_hamiltonian(p);
    let mut header = TIME_COLUMNS.to_vec();
    header.extend(["stage", "rabi", "hamiltonian", "noisy", "corrected", "dot"]);
    let mut table = Table::new("shor-rabi/fig4/v1", &header);
    echo(&mut table, p, opts);
    let corrected = sequence_rows(p, opts, Protocol::ErrorCorrectionSequence)?;
    let noisy = sequence_rows(p, opts, Protocol::NoCorrection)?;
    let mut it = noisy.iter().peekable();
    let mut current = it.next().ok_or_else(|| Error::Invariant("empty noisy run".into()))?;
    for row in &corrected {
        while (current.t - row.t).abs() > 1e-9 * p.tau() {
            current = it.next().ok_or_else(|| Error::Invariant(format!("noisy run has no row at t = {}", row.t)))?;
        }
        let mut cells = time_cells(p, row.t);
        cells.push(row.stage.as_str().to_string());
        cells.push((p.omega * row.t).cos().powi(2).to_string());
        cells.push(hamiltonian_p0l(&h, row.t)?.to_string());
        cells.push(current.p0l.to_string());
        cells.push(row.p0l.to_string());
        cells.push(cell((row.stage == Stage::PostQec && is_period_boundary(p, row.t)).then_some(row.p0l)));
        table.push(cells)?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_branches_agree() {
        assert_eq!(sinc(0.0), 1.0);
        for &x in &[1e-5f64, 9.9e-5, 1e-4, 2e-4] {
            let exact = x.sin() / x;
            assert!(((sinc(x) - exact) / exact).abs() < 1e-14);
        }
        assert!(sinc(PI).abs() < 1e-15);
    }

    #[test]
    fn coefficients_at_n4_and_large_n() {
        let (p, m) = sinc_coefficients(4).unwrap();
        assert!((p - (3.0 / 16.0 + 0.5 / PI)).abs() < 1e-15);
        assert!((m - (3.0 / 16.0 - 0.5 / PI)).abs() < 1e-15);
        let (p, m) = sinc_coefficients(1_000_000).unwrap();
        assert!((p - 0.5).abs() < 1e-10 && m.abs() < 1e-10);
        assert!(sinc_coefficients(0).is_err());
        for n in 1..50 {
            let (p, m) = sinc_coefficients(n).unwrap();
            assert!((p + m - 3.0 / 8.0 - sinc(4.0 * PI / n as f64) / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tables_are_normalized() {
        let eps_tau = 1e-3;
        let total: f64 = bit_branch_table(eps_tau).iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-15);
        for n in [4, 6, 8, 12] {
            let total: f64 = phase_branch_table(n, 4).unwrap().iter().map(|r| r.probability).sum();
            assert!((total - 1.0).abs() < 1e-15);
        }
        assert!(phase_branch_table(6, 2).is_err());
    }

    #[test]
    fn no_error_state_keeps_unit_trace() {
        let code = shor_code();
        let rho = DensityMatrix::from_pure(code.logical_zero()).unwrap();
        let out = no_error_corrected_state(&rho, 0.01).unwrap();
        assert!((out.trace().re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn no_error_row_matches_first_order_evolution() {
        // the bit-syndrome "none" branch of the exact first-order noisy state
        let p = SystemParams::new(1e-3, 1.0).unwrap();
        let h = build_hamiltonian(&p);
        let rho0 = DensityMatrix::from_pure(shor_code().logical_zero()).unwrap();
        let tau = p.tau();
        let rho_h = h.evolve_density(&rho0, tau).unwrap();
        let gap = |eps_tau: f64| {
            let noisy = crate::noise::first_order_noisy(&rho0, tau, &h, eps_tau / tau).unwrap();
            let none = crate::qec_sequence::measure_bit_syndrome(&noisy).unwrap().into_iter().find(|b| b.label == BranchLabel::None).unwrap();
            assert!((none.probability - (1.0 - 6.0 * eps_tau)).abs() < 1e-12);
            none.post_state.max_abs_diff(&no_error_corrected_state(&rho_h, eps_tau).unwrap()).unwrap()
        };
        let (coarse, fine) = (gap(1e-3), gap(1e-4));
        assert!(coarse < 10.0 * 1e-6);
        assert!((coarse / fine - 100.0).abs() < 5.0, "{coarse:e} {fine:e}");
    }

    #[test]
    fn rho_c_limits() {
        let code = shor_code();
        let psi = code.logical_state(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!(predicted_rho_c(&rho, 0.0, 8).unwrap().max_abs_diff(&rho).unwrap() < 1e-15);
        assert!(predicted_rho_c(&rho, 0.01, 10_000_000).unwrap().max_abs_diff(&rho).unwrap() < 1e-14);
    }

    #[test]
    fn distance_and_required_n() {
        assert!(predicted_distance(1e-3, 4, 1.0).is_err());
        assert_eq!(predicted_distance(1e-3, 8, 0.0).unwrap(), 0.0);
        let d = predicted_distance(1e-3, 8, 1.0).unwrap();
        assert!((d - 2.0 * PI * PI * 1e-3 / 192.0).abs() < 1e-18);
        let n = required_n(1e-4, 1e-4, 1.0).unwrap();
        assert!((n - 100.0).abs() < 1e-9);
        assert!((required_n(1.0, 1e-3, 1e-2).unwrap() - 10.0).abs() < 1e-12);
        assert!((required_n(1e-3, 1.0, 1.0).unwrap() - 1e-3 / 1e-3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rho_e_tends_to_rho_h_for_large_n() {
        let p = SystemParams::new(0.05, 1.0).unwrap();
        let code = shor_code();
        let rho0 = DensityMatrix::from_pure(code.logical_zero()).unwrap();
        let rho_h = build_hamiltonian(&p).evolve_density(&rho0, p.tau()).unwrap();
        let rho_e = brute_force_rho_e(&p, &rho0, 1, 100_000, 1000).unwrap();
        assert!(rho_e.max_abs_diff(&rho_h).unwrap() < 1e-4);
    }

    #[test]
    fn fig3_series_matches_formulas() {
        let p = SystemParams::new(0.1, 1.0).unwrap();
        let opts = FigureOptions { duration: Some(4.0 * p.tau()), samples_per_tau: 8, ..Default::default() };
        let t = figure_series(Figure::Fig3, &p, &opts).unwrap();
        assert_eq!(t.rows.len(), 33);
        let ham = t.floats("hamiltonian").unwrap();
        let closed = t.floats("closed_form").unwrap();
        let dots = t.floats("dot").unwrap();
        let times = t.floats("t").unwrap();
        for i in 0..t.rows.len() {
            assert!((ham[i].unwrap() - closed[i].unwrap()).abs() < 1e-12);
            if let Some(d) = dots[i] {
                assert!((d - (p.omega * times[i].unwrap()).cos().powi(2)).abs() < 1e-12);
            }
        }
        assert_eq!(dots.iter().filter(|d| d.is_some()).count(), 5);
    }
}

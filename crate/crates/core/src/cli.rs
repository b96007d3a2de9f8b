//! The `shor-rabi` experiment runner: one subcommand per experiment, each reading an INI
//! config and writing versioned CSV files into the output directory.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use crate::analysis::{figure_series, fit_a_coefficients, phase_branch_oracle, phase_branch_table, predicted_distance, Figure, FigureOptions};
use crate::config::ExperimentConfig;
use crate::effective_couplings::{
    couplings_from_tables, off_diagonal_diagnostics, random_few_body_perturbation, read_tables_csv, scale_to_xi_bar, single_qubit_hamiltonian,
};
use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::noise::{evolve_noisy_in_place, run_ensemble, NoiseParams};
use crate::qec_sequence::{normalize_couplings, BranchLabel, run_sequence, Normalization, Protocol, SequenceSchedule};
use crate::shor_code::{kl_check, search_logical_x, shor_code, single_qubit_error_set, NUM_QUBITS};
use crate::state::DensityMatrix;
use crate::table::{cell, Table};

#[derive(Debug, Parser)]
#[command(name = "shor-rabi", version, about = "Logical Rabi oscillation of a nine-qubit Shor code under an always-on Hamiltonian")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (INI).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[experiment] output`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// RNG seed; overrides `[experiment] seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of noise trajectories (`evolve` only).
    #[arg(long, global = true)]
    pub trajectories: Option<u64>,
    /// Midpoint points for the one-period quadrature oracle (`sweep` only).
    #[arg(long, global = true)]
    pub quadrature_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Noisy evolution without correction, sampled in time.
    Evolve,
    /// The error-correction sequence (or naive phase QEC when `mu` is set).
    Sequence,
    /// Naive phase QEC against the logical Rabi oscillation.
    Fig2,
    /// Hamiltonian evolution and the discrete logical Rabi oscillation.
    Fig3,
    /// Noisy evolution with and without the error-correction sequence.
    Fig4,
    /// Knill-Laflamme conditions and the minimum-weight logical X.
    KlCheck,
    /// Coupling normalization and effective couplings from interaction tables.
    Couplings,
    /// Size of the dropped off-diagonal terms.
    Diagnostics,
    /// One-period distance to the noiseless state against n.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Sequence => "sequence",
            Command::Fig2 => "fig2",
            Command::Fig3 => "fig3",
            Command::Fig4 => "fig4",
            Command::KlCheck => "kl-check",
            Command::Couplings => "couplings",
            Command::Diagnostics => "diagnostics",
            Command::Sweep => "sweep",
        }
    }
}

/// Parses arguments, runs the subcommand, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one subcommand and returns the files it wrote.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let path = cli.config.as_deref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = ExperimentConfig::from_path(path)?;
    if let Some(out) = &cli.out {
        config.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(k) = cli.trajectories {
        config.settings.trajectories = k;
    }
    if let Some(m) = cli.quadrature_points {
        config.settings.quadrature_points = m;
    }
    std::fs::create_dir_all(&config.output)?;
    info!("running {} for {}", cli.command.name(), config.name);
    let tables = match cli.command {
        Command::Evolve => evolve(&config)?,
        Command::Sequence => vec![("sequence", sequence(&config)?)],
        Command::Fig2 => vec![("fig2", figure(&config, Figure::Fig2)?)],
        Command::Fig3 => vec![("fig3", figure(&config, Figure::Fig3)?)],
        Command::Fig4 => vec![("fig4", figure(&config, Figure::Fig4)?)],
        Command::KlCheck => kl(&config)?,
        Command::Couplings => vec![("couplings", couplings(&config)?)],
        Command::Diagnostics => vec![("diagnostics", diagnostics(&config)?)],
        Command::Sweep => vec![("sweep", sweep(&config)?), ("branches", branches(&config)?)],
    };
    let mut written = Vec::new();
    for (stem, table) in &tables {
        written.push(write_table(&config.output, stem, table)?);
    }
    if cli.command == Command::KlCheck {
        let (_, chi) = &tables[0];
        print!("{}", chi.to_csv_string());
        let violations = chi.rows.iter().filter(|r| r[4] == "false").count();
        if violations > 0 {
            return Err(Error::Invariant(format!("{violations} Knill-Laflamme violations")));
        }
    }
    Ok(written)
}

fn echo(table: &mut Table, c: &ExperimentConfig) {
    let p = &c.params;
    table.param("name", &c.name).param("seed", c.seed).param("omega", p.omega).param("j", p.j);
    for (i, q) in [1, 4, 7].iter().enumerate() {
        table.param(&format!("k{q}"), p.k[i]);
    }
    table.param("epsilon", c.noise.epsilon).param("n", c.schedule.n).param("steps", c.noise.steps);
}

fn time_cells(c: &ExperimentConfig, t: f64) -> Vec<String> {
    vec![t.to_string(), (t / c.params.tau()).to_string(), (c.params.omega * t).to_string()]
}

fn evolve(c: &ExperimentConfig) -> Result<Vec<(&'static str, Table)>> {
    let p = &c.params;
    let h = build_hamiltonian(p);
    let code = shor_code();
    let psi0 = c.settings.initial.state()?;
    let rho0 = DensityMatrix::from_pure(&psi0)?;
    let t_end = c.settings.t.unwrap_or(p.tau());
    if !(t_end > 0.0) {
        return Err(Error::Config("[experiment] t must be positive".into()));
    }
    let nu = c.schedule.nu();
    let dt = p.tau() / c.settings.samples_per_tau as f64;
    let mut times: Vec<f64> = (0..).map(|i| i as f64 * dt).take_while(|&t| t < t_end * (1.0 - 1e-12)).collect();
    times.push(t_end);

    let mut table = Table::new("shor-rabi/evolve/v1", &["t", "t_over_tau", "omega_t", "p0l", "code_space_weight", "trace_distance_to_noiseless", "purity"]);
    echo(&mut table, c);
    let mut rho = rho0.clone();
    let mut now = 0.0;
    let mut total_steps = 0;
    for &t in &times {
        if t > now {
            let steps = ((c.noise.steps as f64 * (t - now) / nu).round() as usize).max(1);
            let np = NoiseParams { steps, ..c.noise };
            np.validate(t - now)?;
            evolve_noisy_in_place(&mut rho, t - now, &h, &np)?;
            total_steps += steps;
            now = t;
        }
        let reference = h.evolve_density(&rho0, t)?;
        let mut row = time_cells(c, t);
        row.extend([code.p0l(&rho)?, code.code_weight(&rho)?, rho.trace_distance(&reference)?, rho.purity()].map(|v| v.to_string()));
        table.push(row)?;
    }
    let mut out = vec![("evolve", table)];
    if c.settings.trajectories > 0 {
        let np = NoiseParams { steps: total_steps, ..c.noise };
        let ens = run_ensemble(&psi0, t_end, &h, &np, c.seed, c.settings.trajectories)?;
        let mut traj = Table::new("shor-rabi/trajectories/v1", &["seed", "trajectory", "event_count", "fidelity"]);
        echo(&mut traj, c);
        traj.param("t", t_end).param("trajectories", c.settings.trajectories);
        traj.param("ensemble_trace_distance_to_density", ens.density.trace_distance(&rho)?);
        for s in &ens.summaries {
            traj.push(vec![c.seed.to_string(), s.index.to_string(), s.event_count.to_string(), s.fidelity.to_string()])?;
        }
        out.push(("trajectories", traj));
    }
    Ok(out)
}

fn sequence(c: &ExperimentConfig) -> Result<Table> {
    let rho0 = DensityMatrix::from_pure(&c.settings.initial.state()?)?;
    let out = run_sequence(&rho0, &c.params, c.noise.epsilon, &c.schedule)?;
    let mut table = Table::new(
        "shor-rabi/sequence/v1",
        &["t", "t_over_tau", "omega_t", "stage", "p0l", "trace_distance_to_noiseless", "code_space_weight", "multi_error_weight"],
    );
    echo(&mut table, c);
    table.param("periods", c.schedule.periods);
    if let Protocol::NaivePhase { mu } = c.schedule.protocol {
        table.param("mu", mu);
    }
    if let Some(pc) = &c.schedule.precorrection {
        table.param("precorrection", pc.to_string().replace(' ', ""));
    }
    for row in &out.rows {
        let mut cells = time_cells(c, row.t);
        cells.push(row.stage.as_str().to_string());
        cells.push(row.p0l.to_string());
        cells.push(cell(row.trace_distance));
        cells.push(row.code_weight.to_string());
        cells.push(row.multi_error_weight.to_string());
        table.push(cells)?;
    }
    Ok(table)
}

fn figure(c: &ExperimentConfig, which: Figure) -> Result<Table> {
    let steps = c.noise.steps;
    let opts = FigureOptions {
        epsilon: c.noise.epsilon,
        n: c.schedule.n,
        mu: match c.schedule.protocol {
            Protocol::NaivePhase { mu } => Some(mu),
            _ => None,
        },
        duration: c.settings.duration,
        samples_per_tau: c.settings.samples_per_tau,
        steps_per_interval: steps,
        sample_every: if c.schedule.sample_every > 0 { c.schedule.sample_every } else { (steps / 4).max(1) },
        placement: c.noise.placement,
    };
    let mut table = figure_series(which, &c.params, &opts)?;
    table.param("name", &c.name);
    Ok(table)
}

fn kl(_c: &ExperimentConfig) -> Result<Vec<(&'static str, Table)>> {
    let code = shor_code();
    let errors = single_qubit_error_set();
    let report = kl_check(code, &errors)?;
    let mut table = Table::new("shor-rabi/kl-check/v1", &["error_a", "error_b", "chi_re", "chi_im", "proportional"]);
    table.param("errors", errors.len()).param("violations", report.violations.len()).param("chi_hermiticity_defect", report.hermiticity_defect());
    for (a, ea) in errors.iter().enumerate() {
        for (b, eb) in errors.iter().enumerate() {
            let ok = !report.violations.contains(&(a, b));
            let chi = report.chi[a][b];
            table.push(vec![ea.to_string(), eb.to_string(), chi.re.to_string(), chi.im.to_string(), ok.to_string()])?;
        }
    }
    let mut logical = Table::new("shor-rabi/logical-x/v1", &["max_weight", "candidates_checked", "found"]);
    for w in 1..=3 {
        let s = search_logical_x(code, w)?;
        logical.push(vec![w.to_string(), s.candidates_checked.to_string(), s.found.map(|p| p.to_string()).unwrap_or_default()])?;
    }
    Ok(vec![("kl_check", table), ("logical_x", logical)])
}

fn couplings(c: &ExperimentConfig) -> Result<Table> {
    let p = &c.params;
    let mut table = Table::new("shor-rabi/couplings/v1", &["quantity", "value"]);
    echo(&mut table, c);
    let mut put = |q: &str, v: String| table.push(vec![q.to_string(), v]);
    match normalize_couplings(p.k, p.j, p.omega, 1e-9)? {
        Normalization::Rational { j_prime, k_prime, kappa, weak_separation } => {
            put("J_prime", j_prime.to_string())?;
            for (q, v) in [1, 4, 7].iter().zip(k_prime) {
                put(&format!("k_prime{q}"), v.to_string())?;
            }
            put("kappa", kappa.to_string())?;
            put("weak_separation", weak_separation.to_string())?;
        }
        Normalization::Approximate { approximants } => {
            for (q, list) in [1, 4, 7].iter().zip(&approximants) {
                for a in list {
                    put(&format!("approximant{q}"), format!("{}/{} error={} t_max={}", a.p, a.q, a.error, a.t_max))?;
                }
            }
        }
    }
    if let Some(path) = &c.settings.tables {
        let file = std::fs::File::open(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let eff = couplings_from_tables(&read_tables_csv(file)?)?;
        for (q, z) in [1, 4, 7].iter().zip(eff.zeta) {
            put(&format!("zeta{q}"), z.to_string())?;
        }
        for (name, j) in ["J14", "J47", "J71"].iter().zip(eff.j_pairs) {
            put(name, j.to_string())?;
        }
        put("omega_eff", eff.omega.to_string())?;
    }
    Ok(table)
}

/// Default splittings for the diagnostics scan: well separated so that no few-body flip is resonant.
fn diagnostic_zeta(c: &ExperimentConfig) -> Vec<f64> {
    if c.params.zeta.iter().any(|&z| z != 0.0) {
        c.params.zeta.to_vec()
    } else {
        (1..=NUM_QUBITS).map(|i| 20.0 * i as f64 * c.params.j).collect()
    }
}

fn diagnostics(c: &ExperimentConfig) -> Result<Table> {
    let h0 = single_qubit_hamiltonian(&diagnostic_zeta(c))?;
    let mut bare = c.params.clone();
    bare.zeta = [0.0; NUM_QUBITS];
    let h = build_hamiltonian(&bare);
    let h_prime = random_few_body_perturbation(NUM_QUBITS, 2, c.seed)?;
    let mut table = Table::new("shor-rabi/diagnostics/v1", &["t", "t_times_J", "xi_bar", "q_norm"]);
    echo(&mut table, c);
    for &xi in &c.settings.xi_bar {
        let scaled = scale_to_xi_bar(&h0, &h_prime, xi)?;
        for &tj in &c.settings.times {
            let t = tj / c.params.j;
            let d = off_diagonal_diagnostics(&h0, &h, &scaled, t)?;
            table.push(vec![t.to_string(), tj.to_string(), d.xi_bar.to_string(), d.q_norm.to_string()])?;
        }
    }
    Ok(table)
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn sweep(c: &ExperimentConfig) -> Result<Table> {
    let p = &c.params;
    let code = shor_code();
    let rho0 = DensityMatrix::from_pure(&c.settings.initial.state()?)?;
    let rho_h = build_hamiltonian(p).evolve_density(&rho0, p.tau())?;
    let l_yz = code.l_yz(&rho_h)?;
    let eps_tau = c.noise.epsilon * p.tau();
    let bound = eps_tau.max(p.omega * p.tau()).powi(2);
    let rows = c
        .settings
        .sweep_n
        .par_iter()
        .map(|&n| {
            let mut sched = SequenceSchedule::new(p.tau(), n, 1);
            sched.steps_per_interval = c.noise.steps;
            sched.placement = c.noise.placement;
            sched.precorrection = c.schedule.precorrection.clone();
            let out = run_sequence(&rho0, p, c.noise.epsilon, &sched)?;
            let distance = out.final_state.trace_distance(&rho_h)?;
            let predicted = if n >= 8 { Some(predicted_distance(eps_tau, n, l_yz)?) } else { None };
            Ok((n, distance, predicted))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit: Vec<(f64, f64)> = rows.iter().filter(|r| r.0 >= 8).map(|r| (1.0 / (r.0 * r.0) as f64, r.1)).collect();
    let mut table = Table::new("shor-rabi/sweep/v1", &["n", "inv_n2", "distance", "predicted", "residual", "second_order_bound"]);
    echo(&mut table, c);
    table.param("eps_tau", eps_tau).param("l_yz", l_yz).param("predicted_slope", 2.0 * PI * PI * eps_tau * l_yz / 3.0);
    if fit.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        let (slope, intercept) = linear_fit(&x, &y);
        table.param("fitted_slope", slope).param("fitted_intercept", intercept);
    }
    for (n, d, pred) in rows {
        let residual = pred.map(|v| d - v);
        table.push(vec![n.to_string(), (1.0 / (n * n) as f64).to_string(), d.to_string(), cell(pred), cell(residual), bound.to_string()])?;
    }
    Ok(table)
}

/// Phase-syndrome branch tables for every swept `n` next to the quadrature oracle.
fn branches(c: &ExperimentConfig) -> Result<Table> {
    let p = &c.params;
    let rho0 = DensityMatrix::from_pure(&c.settings.initial.state()?)?;
    let rho_h = build_hamiltonian(p).evolve_density(&rho0, p.tau())?;
    let mut table = Table::new(
        "shor-rabi/branches/v1",
        &["n", "r", "outcome", "probability", "oracle_probability", "a_plus", "a_minus", "oracle_a_plus", "oracle_a_minus"],
    );
    echo(&mut table, c);
    table.param("quadrature_points", c.settings.quadrature_points);
    let jobs: Vec<(usize, usize)> = c.settings.sweep_n.iter().flat_map(|&n| [1, 4, 7].map(|r| (n, r))).collect();
    let results = jobs
        .par_iter()
        .map(|&(n, r)| Ok((n, r, phase_branch_table(n, r)?, phase_branch_oracle(p, &rho0, r, n, c.settings.quadrature_points)?)))
        .collect::<Result<Vec<_>>>()?;
    for (n, r, rows, oracle) in results {
        for row in rows {
            let label = match row.error.as_str() {
                "none" => BranchLabel::None,
                z => BranchLabel::PhaseFlip((z[1..].parse::<usize>().map_err(|_| Error::Invariant(format!("bad row {z}")))? - 1) / 3 + 1),
            };
            let branch = oracle.iter().find(|b| b.label == label).ok_or_else(|| Error::Invariant(format!("no oracle branch {label}")))?;
            let (ap, am) = match row.corrected {
                crate::analysis::CorrectedState::Weighted { a_plus, a_minus } => (a_plus, a_minus),
                _ => (0.5, 0.5),
            };
            let (fp, fm) = fit_a_coefficients(&branch.corrected, ap + am, &rho_h)?;
            table.push(
                [n.to_string(), r.to_string(), row.error.clone()]
                    .into_iter()
                    .chain([row.probability, branch.probability, ap, am, fp, fm].map(|v| v.to_string()))
                    .collect(),
            )?;
        }
    }
    Ok(table)
}

/// Writes `table` to `<dir>/<stem>.csv`.
pub fn write_table(dir: &Path, stem: &str, table: &Table) -> Result<PathBuf> {
    let file = dir.join(format!("{stem}.csv"));
    table.write_file(&file)?;
    Ok(file)
}

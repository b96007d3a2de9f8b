use num_complex::Complex64;
use proptest::prelude::*;

use shor_rabi::analysis::{bit_branch_table, phase_branch_table, sinc_coefficients};
use shor_rabi::config::ExperimentConfig;
use shor_rabi::effective_couplings::{couplings_from_tables, CouplingTables};
use shor_rabi::hamiltonian::{build_hamiltonian, SystemParams};
use shor_rabi::noise::depolarize_step;
use shor_rabi::pauli::{Letter, PauliString, Phase};
use shor_rabi::qec_sequence::{normalize_couplings, qec_channel, Normalization, QecKind};
use shor_rabi::shor_code::{shor_code, NUM_QUBITS};
use shor_rabi::state::{DensityMatrix, StateVector};
use shor_rabi::table::Table;

fn pauli(n: usize) -> impl Strategy<Value = PauliString> {
    let mask = (1u16 << n) - 1;
    (any::<u16>(), any::<u16>(), 0u32..4).prop_map(move |(x, z, k)| PauliString::from_masks(n, x & mask, z & mask, Phase::from_exponent(k)).unwrap())
}

fn matmul(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

fn close(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-12)
}

fn code_state() -> impl Strategy<Value = StateVector> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(a, b, c, d)| {
            let norm = (a * a + b * b + c * c + d * d).sqrt();
            shor_code().logical_state(Complex64::new(a, b) / norm, Complex64::new(c, d) / norm).unwrap()
        })
}

fn single_error() -> impl Strategy<Value = PauliString> {
    (1..=NUM_QUBITS, 0..4usize).prop_map(|(q, l)| {
        let letter = [Letter::I, Letter::X, Letter::Y, Letter::Z][l];
        PauliString::single(q, letter, NUM_QUBITS).unwrap()
    })
}

proptest! {
    #[test]
    fn pauli_product_matches_dense(a in pauli(3), b in pauli(3)) {
        let ab = a.multiply(&b).unwrap();
        prop_assert!(close(&ab.to_dense(), &matmul(&a.to_dense(), &b.to_dense())));
    }

    #[test]
    fn pauli_commutation_matches_dense(a in pauli(3), b in pauli(3)) {
        let (da, db) = (a.to_dense(), b.to_dense());
        let commute = close(&matmul(&da, &db), &matmul(&db, &da));
        prop_assert_eq!(a.commutes(&b).unwrap(), commute);
    }

    #[test]
    fn pauli_product_is_associative(a in pauli(9), b in pauli(9), c in pauli(9)) {
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn pauli_text_round_trips(a in pauli(9)) {
        let a = a.with_phase(Phase::from_exponent(0));
        prop_assert_eq!(PauliString::parse(&a.to_string(), 9).unwrap(), a);
    }

    #[test]
    fn sinc_coefficients_split_unit_weight(n in 1usize..200) {
        let (plus, minus) = sinc_coefficients(n).unwrap();
        for r in [1, 4, 7] {
            let total: f64 = phase_branch_table(n, r).unwrap().iter().map(|row| row.probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
        prop_assert!(plus >= minus);
    }

    #[test]
    fn bit_table_sums_to_one(eps_tau in 0.0..0.1f64) {
        let total: f64 = bit_branch_table(eps_tau).iter().map(|r| r.probability).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_energies_match_tables_up_to_constant(values in prop::collection::vec(-2.0..2.0f64, 23)) {
        let mut it = values.into_iter();
        let mut next = || it.next().unwrap();
        let mut ct = CouplingTables { zeta0: [next(), next(), next()], ..Default::default() };
        for a in 0..2 {
            for b in 0..2 {
                ct.v_ab_dot[a][b] = next();
                ct.v_a_dot_b[a][b] = next();
                ct.v_dot_ab[a][b] = next();
                for c in 0..2 {
                    ct.w[a][b][c] = next();
                }
            }
        }
        let eff = couplings_from_tables(&ct).unwrap();
        let offset = ct.diagonal_energy(0, 0, 0) - eff.energy(0, 0, 0);
        for l in 0..8 {
            let (a, b, c) = (l >> 2, (l >> 1) & 1, l & 1);
            prop_assert!((ct.diagonal_energy(a, b, c) - eff.energy(a, b, c) - offset).abs() < 1e-12);
        }
    }

    #[test]
    fn normalization_recovers_integer_ratios(k in prop::array::uniform3(1i64..30), scale in 1i64..12) {
        let g = k.iter().fold(0, |acc, &v| gcd(acc, v));
        let real = k.map(|v| v as f64 / scale as f64);
        match normalize_couplings(real, 1.0, 1e-3, 1e-9).unwrap() {
            Normalization::Rational { j_prime, k_prime, .. } => {
                prop_assert_eq!(k_prime, k.map(|v| v / g));
                for i in 0..3 {
                    prop_assert!((j_prime * k_prime[i] as f64 - real[i]).abs() < 1e-9);
                }
            }
            other => prop_assert!(false, "expected a rational normalization, got {:?}", other),
        }
    }

    #[test]
    fn table_csv_round_trips(rows in prop::collection::vec((any::<f64>(), "[a-z_]{0,6}"), 0..20)) {
        let mut t = Table::new("test/v1", &["x", "label"]);
        for (x, s) in &rows {
            t.push(vec![x.to_string(), s.clone()]).unwrap();
        }
        let text = t.to_csv_string();
        prop_assert!(!text.contains('\r'));
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let back: Vec<Vec<String>> = reader.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect();
        prop_assert_eq!(back, t.rows);
    }

    #[test]
    fn config_round_trips(omega in 1e-4..1.0f64, j in 0.1..10.0f64, eps in 0.0..0.05f64, steps in 1usize..1000, n in 1usize..64, seed in any::<u64>()) {
        let text = format!(
            "[hamiltonian]\nomega = {omega}\nj = {j}\n[noise]\nepsilon = {eps}\nsteps = {steps}\n[schedule]\nn = {n}\n[experiment]\nseed = {seed}\n"
        );
        let c = ExperimentConfig::parse(&text).unwrap();
        prop_assert_eq!((c.params.omega, c.params.j), (omega, j));
        prop_assert_eq!((c.noise.epsilon, c.noise.steps), (eps, steps));
        prop_assert_eq!((c.schedule.n, c.seed), (n, seed));
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn depolarizing_preserves_density_matrix(psi in code_state(), p in 0.0..0.1f64) {
        let rho = depolarize_step(&DensityMatrix::from_pure(&psi).unwrap(), p).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.trace().im.abs() < 1e-12);
        prop_assert!(rho.hermiticity_defect() < 1e-12);
        prop_assert!(rho.min_eigenvalue() > -1e-12);
        prop_assert!(rho.purity() <= 1.0 + 1e-12);
    }

    #[test]
    fn full_qec_undoes_single_errors(psi in code_state(), e in single_error()) {
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let corrupted = rho.conjugated_by(&e).unwrap();
        let fixed = qec_channel(&corrupted, QecKind::Both).unwrap();
        prop_assert!(fixed.max_abs_diff(&rho).unwrap() < 1e-12);
    }

    #[test]
    fn qec_is_trace_preserving_and_idempotent(psi in code_state(), a in single_error(), b in single_error(), w in 0.0..1.0f64) {
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let (ra, rb) = (rho.conjugated_by(&a).unwrap(), rho.conjugated_by(&b).unwrap());
        let mixed = DensityMatrix::linear_combination(&[(w, &ra), (1.0 - w, &rb)]).unwrap();
        for kind in [QecKind::Bit, QecKind::Phase, QecKind::Both] {
            let once = qec_channel(&mixed, kind).unwrap();
            prop_assert!((once.trace().re - 1.0).abs() < 1e-12);
            prop_assert!(once.hermiticity_defect() < 1e-12);
            let twice = qec_channel(&once, kind).unwrap();
            prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-12);
        }
    }

    #[test]
    fn evolution_composes(psi in code_state(), t1 in 0.0..20.0f64, t2 in 0.0..20.0f64, k in prop::array::uniform3(0.2..3.0f64)) {
        let p = SystemParams::new(0.1, 1.0).unwrap().with_k(k);
        let h = build_hamiltonian(&p);
        let stepped = h.evolve(&h.evolve(&psi, t1).unwrap(), t2).unwrap();
        let direct = h.evolve(&psi, t1 + t2).unwrap();
        prop_assert!(stepped.max_abs_diff(&direct).unwrap() < 1e-12);
        prop_assert!((direct.norm() - 1.0).abs() < 1e-12);
    }
}

//! Effective couplings of the central three dots from two- and three-body interaction
//! matrix elements, and diagnostics for dropping the off-diagonal part of a Hamiltonian.

use std::io::{Read, Write};

use faer::Side;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hamiltonian::{DiagonalHamiltonian, SystemParams};
use crate::pauli::{paulis_of_weight, PauliString};
use crate::state::Operator;

/// Matrix elements of the interactions between the central dots 1, 4 and 7.
///
/// `v_ab_dot[a][b]` couples dot 1 in level `a` with dot 4 in level `b`,
/// `v_a_dot_b[a][c]` dot 1 with dot 7, `v_dot_ab[b][c]` dot 4 with dot 7, and
/// `w[a][b][c]` all three.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CouplingTables {
    /// Bare level splittings of dots 1, 4, 7.
    pub zeta0: [f64; 3],
    pub v_ab_dot: [[f64; 2]; 2],
    pub v_a_dot_b: [[f64; 2]; 2],
    pub v_dot_ab: [[f64; 2]; 2],
    pub w: [[[f64; 2]; 2]; 2],
}

/// Couplings of `-1/2 sum zeta_r Z_r - sum J_rr' Z_r Z_r' - omega Z_1 Z_4 Z_7`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveCouplings {
    /// `zeta_1, zeta_4, zeta_7`.
    pub zeta: [f64; 3],
    /// `J_14, J_47, J_71`.
    pub j_pairs: [f64; 3],
    pub omega: f64,
}

fn sign(bits: usize) -> f64 {
    if bits % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl CouplingTables {
    pub fn validate(&self) -> Result<()> {
        let values = self
            .zeta0
            .iter()
            .chain(self.v_ab_dot.iter().flatten())
            .chain(self.v_a_dot_b.iter().flatten())
            .chain(self.v_dot_ab.iter().flatten())
            .chain(self.w.iter().flatten().flatten());
        for v in values {
            if !v.is_finite() {
                return Err(Error::InvalidInput("coupling tables must be finite".into()));
            }
        }
        Ok(())
    }

    /// Diagonal energy of the product state with levels `(a, b, c)` on dots 1, 4, 7,
    /// up to a constant shared by all eight states.
    pub fn diagonal_energy(&self, a: usize, b: usize, c: usize) -> f64 {
        let single = [a, b, c].iter().zip(&self.zeta0).map(|(&l, z)| l as f64 * z).sum::<f64>();
        single + self.v_ab_dot[a][b] + self.v_a_dot_b[a][c] + self.v_dot_ab[b][c] + self.w[a][b][c]
    }
}

pub fn couplings_from_tables(ct: &CouplingTables) -> Result<EffectiveCouplings> {
    ct.validate()?;
    let mut zeta = ct.zeta0;
    let mut j_pairs = [0.0; 3];
    let mut omega = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            zeta[0] -= 0.5 * sign(a) * (ct.v_a_dot_b[a][b] + ct.v_ab_dot[a][b]);
            zeta[1] -= 0.5 * (sign(b) * ct.v_ab_dot[a][b] + sign(a) * ct.v_dot_ab[a][b]);
            zeta[2] -= 0.5 * sign(b) * (ct.v_a_dot_b[a][b] + ct.v_dot_ab[a][b]);
            j_pairs[0] -= 0.25 * sign(a + b) * ct.v_ab_dot[a][b];
            j_pairs[1] -= 0.25 * sign(a + b) * ct.v_dot_ab[a][b];
            j_pairs[2] -= 0.25 * sign(a + b) * ct.v_a_dot_b[a][b];
            for c in 0..2 {
                let w = ct.w[a][b][c];
                zeta[0] -= 0.25 * sign(a) * w;
                zeta[1] -= 0.25 * sign(b) * w;
                zeta[2] -= 0.25 * sign(c) * w;
                j_pairs[0] -= 0.125 * sign(a + b) * w;
                j_pairs[1] -= 0.125 * sign(b + c) * w;
                j_pairs[2] -= 0.125 * sign(c + a) * w;
                omega -= 0.125 * sign(a + b + c) * w;
            }
        }
    }
    Ok(EffectiveCouplings { zeta, j_pairs, omega })
}

impl EffectiveCouplings {
    /// Energy of the three-dot effective Hamiltonian on levels `(a, b, c)`.
    pub fn energy(&self, a: usize, b: usize, c: usize) -> f64 {
        let z = [sign(a), sign(b), sign(c)];
        -0.5 * self.zeta.iter().zip(&z).map(|(zeta, s)| zeta * s).sum::<f64>()
            - self.j_pairs[0] * z[0] * z[1]
            - self.j_pairs[1] * z[1] * z[2]
            - self.j_pairs[2] * z[2] * z[0]
            - self.omega * z[0] * z[1] * z[2]
    }

    /// System parameters with `J_rr' = k_r J`, keeping the other dots' terms at zero.
    pub fn to_params(&self, j: f64) -> Result<SystemParams> {
        let k = self.j_pairs.map(|v| v / j);
        let mut zeta = [0.0; 9];
        for (i, &q) in [1usize, 4, 7].iter().enumerate() {
            zeta[q - 1] = self.zeta[i];
        }
        let p = SystemParams::new(self.omega, j)?.with_k(k).with_zeta(zeta);
        p.validate()?;
        Ok(p)
    }
}

/// A uniform 1D or 2D sampling grid; sample `i` sits at `origin + i * spacing`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub origin: [f64; 2],
    pub spacing: f64,
    /// `[nx, ny]`; a 1D grid has `ny = 1`.
    pub shape: [usize; 2],
}

impl Grid {
    pub fn line(x0: f64, spacing: f64, count: usize) -> Self {
        Self { origin: [x0, 0.0], spacing, shape: [count, 1] }
    }

    pub fn is_1d(&self) -> bool {
        self.shape[1] == 1
    }

    pub fn len(&self) -> usize {
        self.shape[0] * self.shape[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        if self.is_1d() {
            self.spacing
        } else {
            self.spacing * self.spacing
        }
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        let (ix, iy) = (i % self.shape[0], i / self.shape[0]);
        [self.origin[0] + ix as f64 * self.spacing, self.origin[1] + iy as f64 * self.spacing]
    }
}

/// Probability densities `|psi_r^a|^2` of dots 1, 4, 7 in levels 0 and 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledWavefunctions {
    pub grids: [Grid; 3],
    /// `densities[dot][level]`, one value per grid point.
    pub densities: [[Vec<f64>; 2]; 3],
}

/// Allowed deviation of each density's integral from 1.
pub const NORMALIZATION_TOL: f64 = 1e-6;

impl SampledWavefunctions {
    pub fn validate(&self) -> Result<()> {
        for (dot, (grid, levels)) in self.grids.iter().zip(&self.densities).enumerate() {
            if !(grid.spacing > 0.0) || grid.is_empty() {
                return Err(Error::InvalidInput(format!("grid of dot {dot} is empty")));
            }
            if grid.is_1d() != self.grids[0].is_1d() {
                return Err(Error::InvalidInput("all grids must have the same dimension".into()));
            }
            for (level, d) in levels.iter().enumerate() {
                if d.len() != grid.len() {
                    return Err(Error::DimensionMismatch { expected: grid.len(), found: d.len() });
                }
                if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::InvalidInput(format!("density of dot {dot} level {level} must be finite and nonnegative")));
                }
                let total: f64 = d.iter().sum::<f64>() * grid.cell_volume();
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidInput(format!("density of dot {dot} level {level} integrates to {total}")));
                }
            }
        }
        Ok(())
    }
}

/// Midpoint-rule interaction tables for the given densities and kernels; `zeta0` is passed through.
pub fn tables_from_wavefunctions<V, W>(wf: &SampledWavefunctions, zeta0: [f64; 3], v: V, w: W) -> Result<CouplingTables>
where
    V: Fn([f64; 2], [f64; 2]) -> f64 + Sync,
    W: Fn([f64; 2], [f64; 2], [f64; 2]) -> f64 + Sync,
{
    wf.validate()?;
    let pair = |d1: usize, d2: usize| -> [[f64; 2]; 2] {
        let (g1, g2) = (&wf.grids[d1], &wf.grids[d2]);
        let partial: Vec<[[f64; 2]; 2]> = (0..g1.len())
            .into_par_iter()
            .map(|i| {
                let x = g1.point(i);
                let mut acc = [[0.0; 2]; 2];
                for k in 0..g2.len() {
                    let kernel = v(x, g2.point(k));
                    for (a, row) in acc.iter_mut().enumerate() {
                        for (b, slot) in row.iter_mut().enumerate() {
                            *slot += wf.densities[d1][a][i] * kernel * wf.densities[d2][b][k];
                        }
                    }
                }
                acc
            })
            .collect();
        let scale = g1.cell_volume() * g2.cell_volume();
        let mut out = [[0.0; 2]; 2];
        for p in partial {
            for a in 0..2 {
                for b in 0..2 {
                    out[a][b] += p[a][b] * scale;
                }
            }
        }
        out
    };
    let (g1, g4, g7) = (&wf.grids[0], &wf.grids[1], &wf.grids[2]);
    let partial: Vec<[[[f64; 2]; 2]; 2]> = (0..g1.len())
        .into_par_iter()
        .map(|i| {
            let x = g1.point(i);
            let mut acc = [[[0.0; 2]; 2]; 2];
            for j in 0..g4.len() {
                let y = g4.point(j);
                for k in 0..g7.len() {
                    let kernel = w(x, y, g7.point(k));
                    for a in 0..2 {
                        for b in 0..2 {
                            let ab = wf.densities[0][a][i] * wf.densities[1][b][j] * kernel;
                            for c in 0..2 {
                                acc[a][b][c] += ab * wf.densities[2][c][k];
                            }
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let scale = g1.cell_volume() * g4.cell_volume() * g7.cell_volume();
    let mut w_table = [[[0.0; 2]; 2]; 2];
    for p in partial {
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    w_table[a][b][c] += p[a][b][c] * scale;
                }
            }
        }
    }
    Ok(CouplingTables { zeta0, v_ab_dot: pair(0, 1), v_a_dot_b: pair(0, 2), v_dot_ab: pair(1, 2), w: w_table })
}

const TABLE_HEADER: [&str; 5] = ["table", "a", "b", "c", "value"];

/// Writes the tables as `table,a,b,c,value` rows; `zeta0` rows use `a` for the dot number.
pub fn write_tables_csv<Wr: Write>(ct: &CouplingTables, w: Wr) -> Result<()> {
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    out.write_record(TABLE_HEADER)?;
    for (i, q) in [1, 4, 7].iter().enumerate() {
        out.write_record(["zeta0", &q.to_string(), "", "", &ct.zeta0[i].to_string()])?;
    }
    for (name, t) in [("V_ab_dot", &ct.v_ab_dot), ("V_a_dot_b", &ct.v_a_dot_b), ("V_dot_ab", &ct.v_dot_ab)] {
        for a in 0..2 {
            for b in 0..2 {
                out.write_record([name, &a.to_string(), &b.to_string(), "", &t[a][b].to_string()])?;
            }
        }
    }
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                out.write_record(["W", &a.to_string(), &b.to_string(), &c.to_string(), &ct.w[a][b][c].to_string()])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_tables_csv<R: Read>(r: R) -> Result<CouplingTables> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let mut ct = CouplingTables::default();
    let mut seen = [false; 3 + 12 + 8];
    let bad = |msg: String| Error::InvalidInput(msg);
    for record in reader.records() {
        let rec = record?;
        if rec.len() != 5 {
            return Err(bad(format!("expected 5 fields, got {}", rec.len())));
        }
        let index = |k: usize| -> Result<usize> {
            match &rec[k] {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(bad(format!("level must be 0 or 1, got {other:?}"))),
            }
        };
        let value: f64 = rec[4].parse().map_err(|_| bad(format!("bad value {:?}", &rec[4])))?;
        let slot = match &rec[0] {
            "zeta0" => {
                let i = match &rec[1] {
                    "1" => 0,
                    "4" => 1,
                    "7" => 2,
                    other => return Err(bad(format!("zeta0 dot must be 1, 4 or 7, got {other:?}"))),
                };
                ct.zeta0[i] = value;
                i
            }
            name @ ("V_ab_dot" | "V_a_dot_b" | "V_dot_ab") => {
                let (a, b) = (index(1)?, index(2)?);
                let (t, base) = match name {
                    "V_ab_dot" => (&mut ct.v_ab_dot, 3),
                    "V_a_dot_b" => (&mut ct.v_a_dot_b, 7),
                    _ => (&mut ct.v_dot_ab, 11),
                };
                t[a][b] = value;
                base + 2 * a + b
            }
            "W" => {
                let (a, b, c) = (index(1)?, index(2)?, index(3)?);
                ct.w[a][b][c] = value;
                15 + 4 * a + 2 * b + c
            }
            other => return Err(bad(format!("unknown table {other:?}"))),
        };
        if std::mem::replace(&mut seen[slot], true) {
            return Err(bad(format!("duplicate entry in row {:?}", rec)));
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(bad("coupling table is incomplete".into()));
    }
    ct.validate()?;
    Ok(ct)
}

/// Reads a density sampled on a uniform grid: `x,density` or `x,y,density` rows.
pub fn read_density_csv<R: Read>(r: R) -> Result<(Grid, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let mut points = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let rec = record?;
        let nums: Vec<f64> = rec.iter().map(|s| s.parse().map_err(|_| Error::InvalidInput(format!("bad number {s:?}")))).collect::<Result<_>>()?;
        if !(nums.len() == 2 || nums.len() == 3) || width.is_some_and(|w| w != nums.len()) {
            return Err(Error::InvalidInput("density rows must be x,density or x,y,density".into()));
        }
        width = Some(nums.len());
        let (xy, d) = nums.split_at(nums.len() - 1);
        points.push([xy[0], xy.get(1).copied().unwrap_or(0.0)]);
        values.push(d[0]);
    }
    if points.len() < 2 {
        return Err(Error::InvalidInput("density needs at least two samples".into()));
    }
    let min = |k: usize| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
    let origin = [min(0), min(1)];
    let mut xs: Vec<f64> = points.iter().map(|p| p[0]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let spacing = xs[1] - xs[0];
    let nx = xs.len();
    let ny = points.len() / nx;
    let grid = Grid { origin, spacing, shape: [nx, ny] };
    if nx * ny != points.len() {
        return Err(Error::InvalidInput("samples do not form a full uniform grid".into()));
    }
    let mut ordered = vec![f64::NAN; points.len()];
    for (p, v) in points.iter().zip(values) {
        let ix = ((p[0] - origin[0]) / spacing).round();
        let iy = ((p[1] - origin[1]) / spacing).round();
        let on_grid = (p[0] - origin[0] - ix * spacing).abs() < 1e-9 * spacing && (p[1] - origin[1] - iy * spacing).abs() < 1e-9 * spacing;
        if !on_grid || ix as usize >= nx || iy as usize >= ny {
            return Err(Error::InvalidInput(format!("sample at {p:?} is off the uniform grid")));
        }
        ordered[iy as usize * nx + ix as usize] = v;
    }
    if ordered.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidInput("samples do not form a full uniform grid".into()));
    }
    Ok((grid, ordered))
}

#[derive(Clone, Debug)]
pub struct OffDiagonalDiagnostics {
    /// `xi_nm = <n|H'|m> / (E0_n - E0_m)`, zero where `<n|H'|m> = 0`.
    pub xi_matrix: Operator,
    /// `sqrt(sum |xi_nm|^2)`.
    pub xi_bar: f64,
    /// Spectral norm of `Q(t)`, `e^{-iQ} = U^† U_eff` on the principal branch.
    pub q_norm: f64,
}

/// Dense `sum_k c_k P_k`; Hermitian when every `P_k` is.
pub fn pauli_sum(n: usize, terms: &[(f64, PauliString)]) -> Result<Operator> {
    let dim = 1usize << n;
    let mut out = Operator::zeros(dim, dim);
    for (c, p) in terms {
        if p.num_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.num_qubits() });
        }
        for b in 0..dim {
            out[(p.basis_image(b), b)] += p.basis_coefficient(b) * c;
        }
    }
    Ok(out)
}

/// Random off-diagonal `H'`: every Pauli string of weight `1..=max_weight` that contains
/// an `X` or `Y`, with a coefficient uniform in `[-1, 1)`.
pub fn random_few_body_perturbation(n: usize, max_weight: usize, seed: u64) -> Result<Operator> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::new();
    for w in 1..=max_weight.min(n) {
        for p in paulis_of_weight(n, w) {
            if !p.is_diagonal() {
                terms.push((rng.gen_range(-1.0..1.0), p));
            }
        }
    }
    pauli_sum(n, &terms)
}

/// `H0 = -1/2 sum_i zeta_i Z_i`.
pub fn single_qubit_hamiltonian(zeta: &[f64]) -> Result<DiagonalHamiltonian> {
    let n = zeta.len();
    let energies = (0..1usize << n)
        .map(|b| -0.5 * zeta.iter().enumerate().map(|(i, z)| if b >> (n - 1 - i) & 1 == 1 { -z } else { *z }).sum::<f64>())
        .collect();
    DiagonalHamiltonian::from_energies(n, energies)
}

/// Copy of `h_prime` scaled so that its `xi_bar` against `h0` equals `target`.
pub fn scale_to_xi_bar(h0: &DiagonalHamiltonian, h_prime: &Operator, target: f64) -> Result<Operator> {
    let (_, current) = xi_matrix(h0, h_prime)?;
    if current == 0.0 {
        return Err(Error::InvalidInput("H' is zero".into()));
    }
    let s = target / current;
    Ok(Operator::from_fn(h_prime.nrows(), h_prime.ncols(), |r, c| h_prime[(r, c)] * s))
}

/// Gaps of `H0` at or below this count as degenerate.
const RESONANCE_TOL: f64 = 1e-12;

/// Off-diagonal matrix elements below this are treated as zero.
const ZERO_ELEMENT: f64 = 1e-15;

fn hermitian_exp(h: &Operator, t: f64) -> Result<Operator> {
    let eig = h.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Invariant(format!("eigensolver failed: {e:?}")))?;
    let u = eig.U();
    let s = eig.S().column_vector();
    let dim = h.nrows();
    let scaled = Operator::from_fn(dim, dim, |r, c| u[(r, c)] * Complex64::from_polar(1.0, -s[c].re * t));
    Ok(&scaled * u.adjoint())
}

/// `xi_nm` for every pair and `xi_bar`; checks that `H'` is Hermitian with zero diagonal
/// and has no element across a zero gap of `H0`.
pub fn xi_matrix(h0: &DiagonalHamiltonian, h_prime: &Operator) -> Result<(Operator, f64)> {
    let dim = h0.energies().len();
    if h_prime.nrows() != dim || h_prime.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h_prime.nrows() });
    }
    let scale = h_prime.col_iter().flat_map(|c| c.iter().map(|z| z.norm()).collect::<Vec<_>>()).fold(0.0, f64::max);
    let mut xi = Operator::zeros(dim, dim);
    let mut hermitian = 0.0f64;
    for n in 0..dim {
        if h_prime[(n, n)].norm() > ZERO_ELEMENT.max(1e-12 * scale) {
            return Err(Error::InvalidInput(format!("H' must have zero diagonal, entry {n} is {}", h_prime[(n, n)])));
        }
        for m in 0..dim {
            hermitian = hermitian.max((h_prime[(n, m)] - h_prime[(m, n)].conj()).norm());
            let element = h_prime[(n, m)];
            if n == m || element.norm() <= ZERO_ELEMENT {
                continue;
            }
            let de = h0.energies()[n] - h0.energies()[m];
            if de.abs() <= RESONANCE_TOL {
                return Err(Error::Resonance { row: n, col: m });
            }
            xi[(n, m)] = element / de;
        }
    }
    if hermitian > 1e-12 * scale.max(1.0) {
        return Err(Error::InvalidInput("H' must be Hermitian".into()));
    }
    let xi_bar = xi.norm_l2();
    Ok((xi, xi_bar))
}

/// `xi`, `xi_bar` and `||Q(t)||` for `H_eff = H0 + H + H'`, with `H0` and `H` diagonal.
pub fn off_diagonal_diagnostics(h0: &DiagonalHamiltonian, h: &DiagonalHamiltonian, h_prime: &Operator, t: f64) -> Result<OffDiagonalDiagnostics> {
    let dim = h0.energies().len();
    if h.energies().len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: h.energies().len() });
    }
    let (xi, xi_bar) = xi_matrix(h0, h_prime)?;
    if xi_bar == 0.0 {
        return Ok(OffDiagonalDiagnostics { xi_matrix: xi, xi_bar, q_norm: 0.0 });
    }
    let total = Operator::from_fn(dim, dim, |r, c| {
        let diag = if r == c { h0.energies()[r] + h.energies()[r] } else { 0.0 };
        h_prime[(r, c)] + diag
    });
    let u_eff = hermitian_exp(&total, t)?;
    // U^† U_eff: U is diagonal, so scale the rows
    let w = Operator::from_fn(dim, dim, |r, c| Complex64::from_polar(1.0, (h0.energies()[r] + h.energies()[r]) * t) * u_eff[(r, c)]);
    let eigenvalues = w.eigenvalues().map_err(|e| Error::Invariant(format!("eigensolver failed: {e:?}")))?;
    let q_norm = eigenvalues.iter().map(|l| Complex64::new(l.re, l.im).arg().abs()).fold(0.0, f64::max);
    Ok(OffDiagonalDiagnostics { xi_matrix: xi, xi_bar, q_norm })
}

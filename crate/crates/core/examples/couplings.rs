//! Effective couplings of three dots from sampled level densities and a Coulomb-like
//! kernel, then the integer normalization of the resulting pair couplings.

use shor_rabi::effective_couplings::{couplings_from_tables, tables_from_wavefunctions, write_tables_csv, Grid, SampledWavefunctions};
use shor_rabi::qec_sequence::{normalize_couplings, Normalization};

/// Normalized 1D harmonic-oscillator densities of levels 0 and 1 centred on `x0`.
fn levels(grid: &Grid, x0: f64, width: f64) -> [Vec<f64>; 2] {
    let raw: [Vec<f64>; 2] = std::array::from_fn(|n| {
        (0..grid.len())
            .map(|i| {
                let u = (grid.point(i)[0] - x0) / width;
                let g = (-u * u).exp();
                if n == 0 { g } else { u * u * g }
            })
            .collect()
    });
    raw.map(|d| {
        let total: f64 = d.iter().sum::<f64>() * grid.cell_volume();
        d.into_iter().map(|v| v / total).collect()
    })
}

fn main() -> shor_rabi::Result<()> {
    let centres = [-3.0, 0.0, 3.0];
    let grids = centres.map(|c| Grid::line(c - 4.0, 0.02, 400));
    let densities = std::array::from_fn(|d| levels(&grids[d], centres[d], 0.8));
    let wf = SampledWavefunctions { grids, densities };

    let soft = |r: f64| 1.0 / (r * r + 0.25).sqrt();
    let v = |x: [f64; 2], y: [f64; 2]| soft(x[0] - y[0]);
    let w = |x: [f64; 2], y: [f64; 2], z: [f64; 2]| 0.05 * soft(x[0] - y[0]) * soft(y[0] - z[0]) * soft(z[0] - x[0]);
    let tables = tables_from_wavefunctions(&wf, [10.0, 10.5, 11.0], v, w)?;
    write_tables_csv(&tables, std::io::stdout().lock())?;

    let eff = couplings_from_tables(&tables)?;
    println!("zeta {:?}\nJ14 J47 J71 {:?}\nomega {:.3e}", eff.zeta, eff.j_pairs, eff.omega);

    let j = eff.j_pairs[0];
    let k = eff.j_pairs.map(|x| x / j);
    match normalize_couplings(k, j, eff.omega.abs(), 1e-3)? {
        Normalization::Rational { j_prime, k_prime, .. } => println!("J' = {j_prime:.4e}, k' = {k_prime:?}"),
        Normalization::Approximate { approximants } => {
            for (r, list) in [1, 4, 7].iter().zip(&approximants) {
                let best = list.last().expect("at least one convergent");
                println!("k{r} ~ {}/{} (valid for t < {:.2e})", best.p, best.q, best.t_max);
            }
        }
    }
    Ok(())
}

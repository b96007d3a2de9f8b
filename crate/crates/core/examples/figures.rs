//! Writes the three figure series as CSV.
//!
//! ```text
//! cargo run --release --example figures -- out/ [fig2|fig3|fig4 ...]
//! ```

use std::f64::consts::PI;
use std::path::PathBuf;

use shor_rabi::analysis::{figure_series, Figure, FigureOptions};
use shor_rabi::hamiltonian::SystemParams;
use shor_rabi::noise::NoisePlacement;

fn main() -> shor_rabi::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "figures".into()));
    let mut which: Vec<Figure> = args.map(|a| a.parse()).collect::<shor_rabi::Result<_>>()?;
    if which.is_empty() {
        which = vec![Figure::Fig2, Figure::Fig3, Figure::Fig4];
    }
    std::fs::create_dir_all(&dir)?;
    let p = SystemParams::new(0.1, 1.0)?;
    for fig in which {
        let opts = match fig {
            Figure::Fig4 => FigureOptions {
                epsilon: PI / 100.0 / p.tau(),
                steps_per_interval: 16,
                placement: NoisePlacement::Midpoint,
                ..Default::default()
            },
            _ => FigureOptions::default(),
        };
        let table = figure_series(fig, &p, &opts)?;
        let path = dir.join(format!("{}.csv", table.schema.split('/').nth(1).unwrap_or("figure")));
        table.write_file(&path)?;
        println!("{} rows -> {}", table.rows.len(), path.display());
    }
    Ok(())
}

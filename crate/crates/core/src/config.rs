//! INI experiment configuration.
//!
//! ```ini
//! [hamiltonian]
//! omega = 0.1
//! j = 1
//! k1 = 1
//! k4 = 1
//! k7 = 1
//!
//! [noise]
//! epsilon = 0.02
//! steps = 32
//! placement = end
//!
//! [schedule]
//! n = 6
//! periods = 40
//!
//! [experiment]
//! name = fig4
//! seed = 7
//! ```
//!
//! Unknown sections and keys are rejected. See the README for every key and its default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::{SystemParams, OUTER};
use crate::noise::{NoiseParams, NoisePlacement};
use crate::pauli::PauliString;
use crate::qec_sequence::{parity_precorrection_for, Coincidence, Protocol, SequenceSchedule};
use crate::shor_code::{shor_code, NUM_QUBITS};
use crate::state::StateVector;

/// Initial logical state of an experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl InitialState {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "0" => InitialState::Zero,
            "1" => InitialState::One,
            "+" => InitialState::Plus,
            "-" => InitialState::Minus,
            "+i" => InitialState::PlusI,
            "-i" => InitialState::MinusI,
            other => return Err(Error::Config(format!("initial must be one of 0, 1, +, -, +i, -i; got {other:?}"))),
        })
    }

    /// The state in the logical basis of the Shor code.
    pub fn state(self) -> Result<StateVector> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            InitialState::Zero => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            InitialState::One => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            InitialState::Plus => (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
            InitialState::Minus => (Complex64::new(h, 0.0), Complex64::new(-h, 0.0)),
            InitialState::PlusI => (Complex64::new(h, 0.0), Complex64::new(0.0, h)),
            InitialState::MinusI => (Complex64::new(h, 0.0), Complex64::new(0.0, -h)),
        };
        shor_code().logical_state(a, b)
    }
}

/// Settings that only some subcommands read.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSettings {
    /// Evolution time for `evolve`; defaults to `tau`.
    pub t: Option<f64>,
    pub initial: InitialState,
    /// Samples per `tau` for time series.
    pub samples_per_tau: usize,
    /// Length of figure series; defaults to `2 pi / omega`.
    pub duration: Option<f64>,
    pub trajectories: u64,
    pub quadrature_points: usize,
    /// `n` values of the distance sweep.
    pub sweep_n: Vec<usize>,
    /// Target `xi_bar` values of the diagnostics scan.
    pub xi_bar: Vec<f64>,
    /// Diagnostic times in units of `1/J`.
    pub times: Vec<f64>,
    /// Coupling-table CSV for `couplings`, relative to the config file.
    pub tables: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub output: PathBuf,
    pub seed: u64,
    pub params: SystemParams,
    pub noise: NoiseParams,
    pub schedule: SequenceSchedule,
    pub settings: ExperimentSettings,
}

const HAMILTONIAN_KEYS: &[&str] = &[
    "omega", "j", "k1", "k4", "k7", "g2", "g3", "g5", "g6", "g8", "g9", "zeta1", "zeta2", "zeta3", "zeta4", "zeta5", "zeta6", "zeta7", "zeta8", "zeta9",
];
const NOISE_KEYS: &[&str] = &["epsilon", "steps", "placement"];
const SCHEDULE_KEYS: &[&str] = &["n", "periods", "mu", "precorrection", "coincidence", "sample_every", "boundaries", "trace_distance"];
const EXPERIMENT_KEYS: &[&str] = &[
    "name", "output", "seed", "t", "initial", "samples_per_tau", "duration", "trajectories", "quadrature_points", "sweep_n", "xi_bar", "times", "tables",
];

type Section = BTreeMap<String, String>;

fn sections(ini: &Ini) -> Result<BTreeMap<String, Section>> {
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if props.iter().next().is_some() {
                return Err(Error::Config("keys must appear inside a section".into()));
            }
            continue;
        };
        let allowed = match name {
            "hamiltonian" => HAMILTONIAN_KEYS,
            "noise" => NOISE_KEYS,
            "schedule" => SCHEDULE_KEYS,
            "experiment" => EXPERIMENT_KEYS,
            other => return Err(Error::Config(format!("unknown section [{other}]"))),
        };
        let section = out.entry(name.to_string()).or_default();
        for (k, v) in props.iter() {
            if !allowed.contains(&k) {
                return Err(Error::Config(format!("unknown key {k:?} in [{name}]")));
            }
            if section.insert(k.to_string(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key {k:?} in [{name}]")));
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    name: &'a str,
    section: Option<&'a Section>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.section.and_then(|s| s.get(key)).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| Error::Config(format!("[{}] {key} = {v:?} is not valid", self.name))),
        }
    }

    fn float(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.parse::<f64>(key)?.unwrap_or(default);
        if !v.is_finite() {
            return Err(Error::Config(format!("[{}] {key} must be finite", self.name)));
        }
        Ok(v)
    }

    fn required(&self, key: &str) -> Result<f64> {
        self.parse::<f64>(key)?.ok_or_else(|| Error::Config(format!("[{}] {key} is required", self.name)))
    }

    fn list<T: std::str::FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("[{}] {key} has a bad entry {s:?}", self.name))))
                .collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        if let (Some(dir), Some(t)) = (path.parent(), config.settings.tables.as_mut()) {
            if t.is_relative() {
                *t = dir.join(&*t);
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let all = sections(&ini)?;
        let get = |name: &'static str| Reader { name, section: all.get(name) };
        let (ham, noise, sched, exp) = (get("hamiltonian"), get("noise"), get("schedule"), get("experiment"));

        let k = [ham.float("k1", 1.0)?, ham.float("k4", 1.0)?, ham.float("k7", 1.0)?];
        let mut g = [0.0; 6];
        for (slot, s) in g.iter_mut().zip(OUTER) {
            *slot = ham.float(&format!("g{s}"), 0.0)?;
        }
        let mut zeta = [0.0; NUM_QUBITS];
        for (i, slot) in zeta.iter_mut().enumerate() {
            *slot = ham.float(&format!("zeta{}", i + 1), 0.0)?;
        }
        let params = SystemParams::new(ham.required("omega")?, ham.required("j")?)
            .map_err(|e| Error::Config(e.to_string()))?
            .with_k(k)
            .with_g(g)
            .with_zeta(zeta);
        params.validate().map_err(|e| Error::Config(e.to_string()))?;

        let placement = match noise.raw("placement").unwrap_or("end") {
            "end" => NoisePlacement::End,
            "midpoint" => NoisePlacement::Midpoint,
            other => return Err(Error::Config(format!("[noise] placement must be end or midpoint, got {other:?}"))),
        };
        let epsilon = noise.float("epsilon", 0.0)?;
        if epsilon < 0.0 {
            return Err(Error::Config("[noise] epsilon must be nonnegative".into()));
        }
        let steps = noise.parse::<usize>("steps")?.unwrap_or(256);
        let noise_params = NoiseParams::new(epsilon, steps).with_placement(placement);

        let n = sched.parse::<usize>("n")?.unwrap_or(6);
        let periods = sched.parse::<u32>("periods")?.unwrap_or(1);
        let mut schedule = SequenceSchedule::new(params.tau(), n, periods);
        schedule.steps_per_interval = steps;
        schedule.placement = placement;
        if let Some(mu) = sched.parse::<f64>("mu")? {
            schedule.protocol = Protocol::NaivePhase { mu };
        }
        schedule.precorrection = match sched.raw("precorrection") {
            None | Some("none") => None,
            Some("auto") => {
                let ints = k.map(|v| v.round() as i64);
                if k.iter().zip(&ints).any(|(v, i)| (v - *i as f64).abs() > 1e-12) {
                    return Err(Error::Config("precorrection = auto needs integer k".into()));
                }
                parity_precorrection_for(ints)?
            }
            Some(text) => Some(PauliString::parse(text, NUM_QUBITS).map_err(|e| Error::Config(format!("[schedule] precorrection: {e}")))?),
        };
        schedule.coincidence = match sched.raw("coincidence").unwrap_or("noise-first") {
            "noise-first" => Coincidence::NoiseFirst,
            "qec-first" => Coincidence::QecFirst,
            other => return Err(Error::Config(format!("[schedule] coincidence must be noise-first or qec-first, got {other:?}"))),
        };
        schedule.sample_every = sched.parse::<usize>("sample_every")?.unwrap_or(0);
        if sched.raw("boundaries").is_some() {
            schedule.boundaries = Some(sched.list::<f64>("boundaries", Vec::new())?);
        }
        schedule.trace_distance = sched.parse::<bool>("trace_distance")?.unwrap_or(true);
        schedule.validate().map_err(|e| Error::Config(e.to_string()))?;

        let settings = ExperimentSettings {
            t: exp.parse("t")?,
            initial: InitialState::parse(exp.raw("initial").unwrap_or("0"))?,
            samples_per_tau: exp.parse("samples_per_tau")?.unwrap_or(24),
            duration: exp.parse("duration")?,
            trajectories: exp.parse("trajectories")?.unwrap_or(0),
            quadrature_points: exp.parse("quadrature_points")?.unwrap_or(100_000),
            sweep_n: exp.list("sweep_n", vec![8, 16, 32, 64])?,
            xi_bar: exp.list("xi_bar", vec![1e-2, 5e-3, 2.5e-3])?,
            times: exp.list("times", vec![1.0, 10.0, 100.0])?,
            tables: exp.raw("tables").map(PathBuf::from),
        };
        if settings.samples_per_tau == 0 {
            return Err(Error::Config("[experiment] samples_per_tau must be at least 1".into()));
        }
        Ok(Self {
            name: exp.raw("name").unwrap_or("experiment").to_string(),
            output: PathBuf::from(exp.raw("output").unwrap_or(".")),
            seed: exp.parse("seed")?.unwrap_or(0),
            params,
            noise: noise_params,
            schedule,
            settings,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ExperimentConfig::parse("[hamiltonian]\nomega = 0.1\nj = 1\n").unwrap();
        assert_eq!(c.params.k, [1.0; 3]);
        assert_eq!(c.noise.steps, 256);
        assert_eq!(c.schedule.n, 6);
        assert_eq!(c.settings.initial, InitialState::Zero);
        assert_eq!(c.settings.sweep_n, vec![8, 16, 32, 64]);
    }

    #[test]
    fn full_config() {
        let text = "[hamiltonian]\nomega = 0.05\nj = 2\nk4 = 2\ng5 = 0.3\nzeta9 = 0.1\n\
                    [noise]\nepsilon = 0.01\nsteps = 16\nplacement = midpoint\n\
                    [schedule]\nn = 8\nperiods = 3\nprecorrection = auto\ncoincidence = qec-first\n\
                    [experiment]\nname = demo\nseed = 9\ninitial = +i\nsweep_n = 8, 16\n";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!(c.params.k, [1.0, 2.0, 1.0]);
        assert_eq!(c.params.g[2], 0.3);
        assert_eq!(c.params.zeta[8], 0.1);
        assert_eq!(c.noise.placement, NoisePlacement::Midpoint);
        assert_eq!(c.schedule.precorrection.as_ref().map(|p| p.to_string()), Some("Z4 Z7".to_string()));
        assert_eq!(c.schedule.coincidence, Coincidence::QecFirst);
        assert_eq!((c.name.as_str(), c.seed), ("demo", 9));
        assert_eq!(c.settings.sweep_n, vec![8, 16]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        for text in [
            "[hamiltonian]\nomega = 0.1\nj = 1\nJ = 1\n",
            "[hamiltonian]\nomega = 0.1\nj = 1\nj = 2\n",
            "[hamiltonian]\nomega = 0.1\nj = 1\n[extra]\na = 1\n",
            "[hamiltonian]\nomega = 0.1\n",
            "[hamiltonian]\nomega = abc\nj = 1\n",
            "[hamiltonian]\nomega = 0.1\nj = 1\n[noise]\nplacement = start\n",
            "[hamiltonian]\nomega = 0.1\nj = 1\n[schedule]\nn = 0\n",
            "omega = 0.1\n",
        ] {
            let err = ExperimentConfig::parse(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text:?} gave {err}");
        }
    }
}

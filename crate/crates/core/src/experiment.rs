//! Parameter sweeps over time: configuration, presets and CSV/JSON output.
//!
//! Rates are given in units of a reference rate, so the `t` column is the dimensionless
//! `Γt`. Every channel is applied to the measured qubits only; correlation measures are
//! taken on that same decohered resource.

use std::f64::consts::FRAC_PI_4;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseChannel;
use crate::correlations::{self, Side};
use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, PureState, C64};
use crate::oracle::decohere;
use crate::protocols::{self, ancilla_step, dj, DjFunction, DjProtocol, Protocol};

/// Rates of one channel, evaluated at each sweep time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rates {
    General {
        label: String,
        #[serde(rename = "B")]
        b: f64,
        #[serde(rename = "C")]
        c: f64,
        #[serde(rename = "S")]
        s: f64,
    },
    Pf {
        label: String,
        gamma: f64,
    },
    White {
        label: String,
        gamma: f64,
    },
}

impl Rates {
    pub fn label(&self) -> &str {
        match self {
            Rates::General { label, .. } | Rates::Pf { label, .. } | Rates::White { label, .. } => label,
        }
    }

    pub fn at(&self, t: f64) -> Result<NoiseChannel> {
        match *self {
            Rates::General { b, c, s, .. } => NoiseChannel::new(b, c, s, t),
            Rates::Pf { gamma, .. } => NoiseChannel::phase_flip(gamma, t),
            Rates::White { gamma, .. } => NoiseChannel::white(gamma, t),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub t_min: f64,
    pub t_max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let span = self.t_max - self.t_min;
        (0..self.steps).map(|j| self.t_min + span * j as f64 / (self.steps - 1) as f64).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Fidelity,
    Concurrence,
    Negativity,
    Discord,
    Mep,
    Bound,
    /// Probability that a Deutsch-Jozsa run classifies `f` correctly.
    Success,
}

impl Measure {
    fn prefix(self) -> &'static str {
        match self {
            Measure::Fidelity => "F",
            Measure::Concurrence => "C",
            Measure::Negativity => "N",
            Measure::Discord => "D",
            Measure::Mep => "MEP",
            Measure::Bound => "B",
            Measure::Success => "P",
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Measure::Fidelity => "average computation fidelity",
            Measure::Concurrence => "concurrence of the decohered resource",
            Measure::Negativity => "negativity of the outputs against the rest of the decohered resource",
            Measure::Discord => "quantum discord of the decohered resource, measuring the first qubit",
            Measure::Mep => "minimum entanglement potential of the decohered resource",
            Measure::Bound => "upper bound 1 - p S_L on the ancilla-driven fidelity",
            Measure::Success => "probability of a correct constant/balanced verdict",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputSpec {
    /// `|0…0⟩`.
    #[default]
    Zero,
    /// Random pure state drawn from the seed.
    Random,
}

fn default_register() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `rsp`, `rotation`, `cnot15`, `dj` or `ancilla`.
    pub protocol: String,
    /// Protocol angles: `[φ]` for `rsp` and `ancilla`, `[φ1, φ2, φ3]` for `rotation`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    /// Input bits for `dj`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<usize>,
    /// `balanced`, `const0` or `const1` for `dj`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(default)]
    pub input: InputSpec,
    /// Register size for `ancilla`.
    #[serde(default = "default_register")]
    pub register_qubits: usize,
    pub channels: Vec<Rates>,
    pub sweep: Sweep,
    pub measures: Vec<Measure>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

pub const PROTOCOLS: [&str; 5] = ["rsp", "rotation", "cnot15", "dj", "ancilla"];
/// Largest resource on which dense correlation measures are taken.
pub const MAX_DENSE: usize = 8;

fn config_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

impl ExperimentConfig {
    /// Parses and validates; syntax errors carry line and column.
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !PROTOCOLS.contains(&self.protocol.as_str()) {
            return Err(config_err("protocol", format!("unknown protocol '{}'", self.protocol)));
        }
        let s = &self.sweep;
        if s.steps < 2 {
            return Err(config_err("sweep.steps", "must be at least 2"));
        }
        if !s.t_min.is_finite() || s.t_min < 0.0 {
            return Err(config_err("sweep.t_min", "must be finite and non-negative"));
        }
        if !s.t_max.is_finite() || s.t_max < s.t_min {
            return Err(config_err("sweep.t_max", "must be finite and at least t_min"));
        }
        if self.channels.is_empty() {
            return Err(config_err("channels", "at least one channel is required"));
        }
        if self.measures.is_empty() {
            return Err(config_err("measures", "at least one measure is required"));
        }
        for (j, ch) in self.channels.iter().enumerate() {
            if ch.label().is_empty() || ch.label().contains([',', '"', '\n']) {
                return Err(config_err(&format!("channels[{j}].label"), "must be non-empty without ',', '\"' or newlines"));
            }
            if self.channels[..j].iter().any(|c| c.label() == ch.label()) {
                return Err(config_err(&format!("channels[{j}].label"), "duplicate label"));
            }
            ch.at(0.0).map_err(|e| config_err(&format!("channels[{j}]"), e))?;
        }
        for (j, m) in self.measures.iter().enumerate() {
            if self.measures[..j].contains(m) {
                return Err(config_err(&format!("measures[{j}]"), "duplicate measure"));
            }
            let ok = match m {
                Measure::Fidelity => true,
                Measure::Concurrence | Measure::Discord | Measure::Mep => self.protocol == "rsp",
                Measure::Negativity => matches!(self.protocol.as_str(), "rsp" | "rotation" | "dj"),
                Measure::Bound => self.protocol == "ancilla",
                Measure::Success => self.protocol == "dj",
            };
            if !ok {
                return Err(config_err(
                    &format!("measures[{j}]"),
                    format!("{m:?} is not available for protocol '{}'", self.protocol),
                ));
            }
        }
        let want = match self.protocol.as_str() {
            "rsp" | "ancilla" => Some(1),
            "rotation" => Some(3),
            _ => None,
        };
        if let (Some(a), Some(n)) = (&self.angles, want) {
            if a.len() != n {
                return Err(config_err("angles", format!("expected {n} values, got {}", a.len())));
            }
        }
        if self.protocol == "ancilla" && !(1..=3).contains(&self.register_qubits) {
            return Err(config_err("register_qubits", "must be between 1 and 3"));
        }
        Ok(())
    }

    /// Column names: `t`, then one per (measure, channel) in that nesting order.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        for m in &self.measures {
            for ch in &self.channels {
                cols.push(format!("{}_{}", m.prefix(), ch.label()));
            }
        }
        cols
    }

    fn column_schema(&self) -> Vec<serde_json::Value> {
        let mut out = vec![serde_json::json!({ "name": "t", "description": "dimensionless time (reference rate x t)" })];
        for m in &self.measures {
            for ch in &self.channels {
                out.push(serde_json::json!({
                    "name": format!("{}_{}", m.prefix(), ch.label()),
                    "measure": m,
                    "channel": ch.label(),
                    "description": m.describe(),
                }));
            }
        }
        out
    }
}

/// Built-in configurations.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let pf = |gamma| Rates::Pf { label: "pf".into(), gamma };
    let white = |gamma| Rates::White { label: "w".into(), gamma };
    let sweep = Sweep { t_min: 0.0, t_max: 3.0, steps: 61 };
    let base = |protocol: &str, channels, measures| ExperimentConfig {
        name: Some(name.to_string()),
        protocol: protocol.into(),
        angles: None,
        bits: None,
        function: None,
        input: InputSpec::Zero,
        register_qubits: 2,
        channels,
        sweep,
        measures,
        seed: 0,
        output: None,
    };
    use Measure::*;
    Ok(match name {
        "fig1" => base("rsp", vec![pf(1.0), white(0.375)], vec![Fidelity, Concurrence]),
        "fig2" => base("rsp", vec![pf(1.0), white(0.57)], vec![Fidelity, Discord]),
        "fig4" => ExperimentConfig {
            angles: Some(vec![FRAC_PI_4; 3]),
            ..base("rotation", vec![pf(1.0), white(0.5)], vec![Fidelity, Negativity])
        },
        "dj" => ExperimentConfig {
            bits: Some(3),
            function: Some("balanced".into()),
            ..base("dj", vec![pf(1.0), white(0.5)], vec![Fidelity, Success])
        },
        "ancilla" => ExperimentConfig {
            angles: Some(vec![FRAC_PI_4]),
            ..base("ancilla", vec![pf(1.0), white(0.5)], vec![Fidelity, Bound])
        },
        other => return Err(Error::Config(format!("unknown preset '{other}'"))),
    })
}

pub const PRESETS: [&str; 5] = ["fig1", "fig2", "fig4", "dj", "ancilla"];

/// Random pure state with Gaussian amplitudes.
pub fn random_state(rng: &mut impl Rng, n: usize) -> PureState {
    let mut gauss = || {
        // Box-Muller
        let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
        let v: f64 = rng.random();
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    };
    let amps = (0..1usize << n).map(|_| C64::new(gauss(), gauss())).collect();
    PureState::normalized(amps).expect("nonzero Gaussian vector")
}

enum Subject {
    Gate { protocol: Protocol, input: Option<PureState> },
    Dj(DjProtocol),
    Ancilla { register: PureState, phi: f64 },
}

fn dj_function(s: Option<&str>) -> Result<DjFunction> {
    match s.unwrap_or("balanced") {
        "balanced" => Ok(DjFunction::Balanced),
        "const0" => Ok(DjFunction::Constant(0)),
        "const1" => Ok(DjFunction::Constant(1)),
        other => Err(config_err("function", format!("unknown function '{other}'"))),
    }
}

fn build_subject(cfg: &ExperimentConfig) -> Result<Subject> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let angle = |j: usize| cfg.angles.as_ref().map_or(FRAC_PI_4, |a| a[j]);
    let mut input = |n: usize| match (n, cfg.input) {
        (0, _) => None,
        (n, InputSpec::Zero) => Some(PureState::basis(n, 0)),
        (n, InputSpec::Random) => Some(random_state(&mut rng, n)),
    };
    Ok(match cfg.protocol.as_str() {
        "rsp" => Subject::Gate { protocol: protocols::rsp(angle(0)), input: None },
        "rotation" => Subject::Gate { protocol: protocols::rotation(angle(0), angle(1), angle(2)), input: input(1) },
        "cnot15" => Subject::Gate { protocol: protocols::cnot15(), input: input(2) },
        "dj" => Subject::Dj(dj(cfg.bits.unwrap_or(3), dj_function(cfg.function.as_deref())?)?),
        "ancilla" => Subject::Ancilla { register: random_state(&mut rng, cfg.register_qubits), phi: angle(0) },
        other => return Err(config_err("protocol", format!("unknown protocol '{other}'"))),
    })
}

fn decohered(protocol: &Protocol, input: Option<&PureState>, ch: NoiseChannel) -> Result<DensityMatrix> {
    let n = protocol.qubits();
    if n > MAX_DENSE {
        return Err(Error::TooLarge { what: "dense resource qubits", got: n, max: MAX_DENSE });
    }
    let res = protocol.resource(input)?;
    let channels = protocol.vertex_channels(&vec![ch; protocol.pattern.len()], &[]);
    decohere(&res.to_density(), &channels)
}

fn evaluate(subject: &Subject, measure: Measure, ch: NoiseChannel) -> Result<f64> {
    match subject {
        Subject::Gate { protocol, input } => {
            let input = input.as_ref();
            match measure {
                Measure::Fidelity => Ok(protocol.fidelity_uniform(input, ch)?.average),
                Measure::Negativity => {
                    correlations::negativity(&decohered(protocol, input, ch)?, protocol.pattern.outputs())
                }
                Measure::Concurrence => correlations::concurrence(&decohered(protocol, input, ch)?),
                Measure::Discord => correlations::discord(&decohered(protocol, input, ch)?, Side::A),
                Measure::Mep => Ok(correlations::mep(&decohered(protocol, input, ch)?)?.value),
                Measure::Bound | Measure::Success => unavailable(measure),
            }
        }
        Subject::Dj(d) => match measure {
            Measure::Fidelity => Ok(d.protocol.fidelity_uniform(None, ch)?.average),
            Measure::Negativity => correlations::negativity(&decohered(&d.protocol, None, ch)?, d.protocol.pattern.outputs()),
            Measure::Success => {
                let report = d.protocol.fidelity_uniform(None, ch)?;
                let probs: Vec<f64> = report.outcomes.iter().map(|o| o.probability).collect();
                let p0 = d.prob_all_zero(&probs);
                Ok(if d.function == DjFunction::Balanced { 1.0 - p0 } else { p0 })
            }
            _ => unavailable(measure),
        },
        Subject::Ancilla { register, phi } => {
            let i = register.qubits() - 1;
            let r = ancilla_step(register, i, *phi, &ch)?;
            match measure {
                Measure::Fidelity => Ok(r.mean_fidelity),
                Measure::Bound => Ok(r.bound),
                _ => unavailable(measure),
            }
        }
    }
}

fn unavailable(m: Measure) -> Result<f64> {
    Err(Error::Config(format!("measure {m:?} is not available for this protocol")))
}

/// Sweep output, rows in sweep order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Header plus one line per row, `\n` terminated.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
    }
}

/// Evaluates every sweep point in parallel.
pub fn sweep(cfg: &ExperimentConfig) -> Result<Table> {
    cfg.validate()?;
    let subject = build_subject(cfg)?;
    let rows = cfg
        .sweep
        .points()
        .into_par_iter()
        .map(|t| {
            let mut row = vec![t];
            for &m in &cfg.measures {
                for rates in &cfg.channels {
                    row.push(evaluate(&subject, m, rates.at(t)?)?);
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table { columns: cfg.columns(), rows })
}

/// Sidecar path for a CSV: `fig1.csv` → `fig1.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Runs the sweep and writes the CSV and its JSON sidecar.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<Table> {
    let start = Instant::now();
    let table = sweep(cfg)?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    table.write_csv(std::fs::File::create(out)?)?;
    let sidecar = serde_json::json!({
        "config": cfg,
        "versions": {
            "oneway-noise": env!("CARGO_PKG_VERSION"),
        },
        "wall_time_s": wall,
        "rows": table.rows.len(),
        "columns": cfg.column_schema(),
        "csv": out.file_name().map(|f| f.to_string_lossy().into_owned()),
    });
    std::fs::write(sidecar_path(out), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mut cfg: ExperimentConfig) -> ExperimentConfig {
        cfg.sweep.steps = 5;
        cfg
    }

    #[test]
    fn presets_validate_and_roundtrip() {
        for name in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg);
        }
        assert!(preset("fig3").is_err());
    }

    #[test]
    fn fig1_columns() {
        let t = sweep(&small(preset("fig1").unwrap())).unwrap();
        assert_eq!(t.columns, ["t", "F_pf", "F_w", "C_pf", "C_w"]);
        assert_eq!(t.rows.len(), 5);
        let f = t.column("F_pf").unwrap();
        for (row, f) in t.rows.iter().zip(f) {
            assert!((f - (1.0 + (-2.0 * row[0]).exp()) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn every_preset_runs() {
        for name in PRESETS {
            let t = sweep(&small(preset(name).unwrap())).unwrap();
            assert!(t.rows.iter().flatten().all(|v| v.is_finite()), "{name}");
        }
    }

    #[test]
    fn validation_names_the_field() {
        let mut cfg = preset("fig1").unwrap();
        cfg.sweep.steps = 1;
        assert!(cfg.validate().unwrap_err().to_string().contains("sweep.steps"));
        let mut cfg = preset("fig1").unwrap();
        cfg.measures.push(Measure::Bound);
        assert!(cfg.validate().unwrap_err().to_string().contains("measures[2]"));
        let bad = r#"{"protocol": "rsp", "channels": [], "sweep": {"t_min": 0, "t_max": 1, "steps": 3},
            "measures": ["fidelity"], "colour": 1}"#;
        let err = ExperimentConfig::from_json(bad).unwrap_err().to_string();
        assert!(err.contains("colour") && err.contains("line"), "{err}");
        let mut cfg = preset("fig1").unwrap();
        cfg.protocol = "simon".into();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn output_is_deterministic() {
        let mut cfg = small(preset("ancilla").unwrap());
        cfg.seed = 7;
        let a = sweep(&cfg).unwrap().to_csv_string().unwrap();
        let b = sweep(&cfg).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
        cfg.seed = 8;
        assert_ne!(a, sweep(&cfg).unwrap().to_csv_string().unwrap());
    }

    #[test]
    fn run_writes_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("nested/fig4.csv");
        let cfg = small(preset("fig4").unwrap());
        run(&cfg, &out).unwrap();
        let csv = std::fs::read_to_string(&out).unwrap();
        assert!(csv.starts_with("t,F_pf,F_w,N_pf,N_w\n") && !csv.contains('\r'));
        let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(sidecar_path(&out)).unwrap()).unwrap();
        let names: Vec<&str> = side["columns"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
        for col in csv.lines().next().unwrap().split(',') {
            assert!(names.contains(&col));
        }
        assert!(side["wall_time_s"].is_number());
    }
}

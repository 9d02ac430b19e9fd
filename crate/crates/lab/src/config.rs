//! Experiment configuration: per-experiment defaults, flat `key = value` files,
//! command-line overrides, validation.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use oscillab_core::fock::DEFAULT_TRUNCATION;
use oscillab_core::multiplier::{GeometricGrid, Multiplier};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyPeetre,
    VerifyHeat,
    VerifyFock,
    SquareFunctionCheck,
    MihlinSweep,
    MaximalSweep,
    TransferenceCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::VerifyPeetre,
        Experiment::VerifyHeat,
        Experiment::VerifyFock,
        Experiment::SquareFunctionCheck,
        Experiment::MihlinSweep,
        Experiment::MaximalSweep,
        Experiment::TransferenceCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyPeetre => "verify-peetre",
            Experiment::VerifyHeat => "verify-heat",
            Experiment::VerifyFock => "verify-fock",
            Experiment::SquareFunctionCheck => "square-function-check",
            Experiment::MihlinSweep => "mihlin-sweep",
            Experiment::MaximalSweep => "maximal-sweep",
            Experiment::TransferenceCheck => "transference-check",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| LabError::config("experiment", format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(LabError::config("format", format!("expected json or csv, got `{s}`"))),
        }
    }
}

/// Geometric t-grid written `lo:hi:ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TGrid {
    pub lo: f64,
    pub hi: f64,
    pub ratio: f64,
}

impl TGrid {
    pub fn geometric(&self) -> Result<GeometricGrid> {
        Ok(GeometricGrid::new(self.lo, self.hi, self.ratio)?)
    }
}

impl Default for TGrid {
    fn default() -> Self {
        let g = GeometricGrid::standard();
        TGrid { lo: g.lo, hi: g.hi, ratio: g.ratio }
    }
}

impl FromStr for TGrid {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(LabError::config("t-grid", format!("expected lo:hi:ratio, got `{s}`")));
        }
        let num = |v: &str| parse_num::<f64>("t-grid", v);
        Ok(TGrid { lo: num(parts[0])?, hi: num(parts[1])?, ratio: num(parts[2])? })
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| LabError::config(key, format!("cannot parse `{v}`")))
}

/// Fully resolved parameters of one run. Embedded verbatim in the result record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub d: usize,
    pub fock_dim: usize,
    /// Half-width and step of the 1-d Schrodinger grid.
    pub grid_extent: f64,
    pub grid_step: f64,
    pub phase_extent: f64,
    pub phase_step: f64,
    pub peetre_terms: usize,
    /// Highest Hermite / Fock degree in test windows and witnesses.
    pub window: usize,
    /// Box half-width and step of the twisted grid on `R^2`.
    pub twisted_extent: f64,
    pub twisted_step: f64,
    pub mult: Vec<String>,
    pub pq: Vec<(f64, f64)>,
    /// Sobolev order of the Hormander norms.
    pub s: f64,
    pub t_grid: TGrid,
    /// Scales `s` of the square function.
    pub scale: Vec<f64>,
    /// Numbers of dyadic terms of the square function.
    pub terms: Vec<usize>,
    pub draws: usize,
    /// Random input vectors per configuration.
    pub samples: usize,
    pub trials: usize,
    pub max_iter: usize,
    pub quad_extent: f64,
    pub quad_step: f64,
    pub seed: u64,
    pub out: Option<String>,
    pub format: OutputFormat,
}

const LIST_KEYS: [&str; 5] = ["mult", "p", "q", "scale", "terms"];

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = ExperimentConfig {
            experiment,
            d: 1,
            fock_dim: DEFAULT_TRUNCATION,
            grid_extent: 12.0,
            grid_step: 0.01,
            phase_extent: 12.0,
            phase_step: 0.05,
            peetre_terms: 96,
            window: 8,
            twisted_extent: 10.0,
            twisted_step: 0.125,
            mult: vec![],
            pq: vec![(2.0, 2.0)],
            s: 2.0,
            t_grid: TGrid::default(),
            scale: vec![1.0, 1.5, 2.0],
            terms: vec![8, 12],
            draws: 512,
            samples: 8,
            trials: 32,
            max_iter: 200,
            quad_extent: 8.0,
            quad_step: 0.02,
            seed: 42,
            out: None,
            format: OutputFormat::Json,
        };
        let four_thirds = 4.0 / 3.0;
        match experiment {
            Experiment::VerifyPeetre => {
                cfg.mult = vec!["heat:t=0.5".into(), "gauss:center=3,width=1".into(), "const:c=0".into()];
            }
            Experiment::VerifyHeat => cfg.mult = vec!["heat:t=0.5".into()],
            Experiment::VerifyFock => {
                cfg.pq = vec![(2.0, 2.0), (4.0, 4.0), (four_thirds, 4.0), (4.0, four_thirds)];
                cfg.mult = vec!["gauss:center=3,width=1".into()];
                cfg.samples = 20;
            }
            Experiment::SquareFunctionCheck => {}
            Experiment::MihlinSweep => {
                cfg.mult = (1..=8).map(|a| format!("power:alpha={a}")).collect();
                cfg.pq = vec![
                    (four_thirds, four_thirds),
                    (2.0, 2.0),
                    (4.0, 4.0),
                    (four_thirds, 4.0),
                    (4.0, four_thirds),
                ];
                cfg.window = 6;
                cfg.trials = 4;
                cfg.max_iter = 8;
                cfg.quad_step = 0.05;
            }
            Experiment::MaximalSweep => {
                cfg.mult = vec!["gauss:center=1.5,width=0.25".into()];
                cfg.pq = vec![(2.0, 2.0), (4.0, 4.0), (four_thirds, 4.0)];
                cfg.samples = 4;
                cfg.quad_step = 0.05;
            }
            Experiment::TransferenceCheck => {
                cfg.mult = vec![
                    "const:c=1".into(),
                    "heat:t=0.25".into(),
                    "heat:t=0.5".into(),
                    "heat:t=1".into(),
                    "heat:t=2".into(),
                ];
                cfg.pq = vec![(2.0, 2.0), (4.0, 4.0), (four_thirds, four_thirds)];
                cfg.window = 6;
                cfg.trials = 4;
                cfg.max_iter = 8;
                cfg.quad_step = 0.05;
                // power iterates settle on the bottom eigenspace, which only decays like e^{-r^2/4}
                cfg.twisted_extent = 12.0;
            }
        }
        cfg
    }

    /// Applies one source of `key = value` pairs. A list key given in the source replaces
    /// the current list with every occurrence in that source; `p` and `q` pair up in order.
    pub fn apply_pairs(&mut self, pairs: &[(String, String)]) -> Result<()> {
        let list = |key: &str| -> Vec<&str> { pairs.iter().filter(|(k, _)| k == key).map(|(_, v)| v.as_str()).collect() };
        for (key, value) in pairs {
            if !LIST_KEYS.contains(&key.as_str()) {
                self.set(key, value)?;
            }
        }
        let mult = list("mult");
        if !mult.is_empty() {
            self.mult = mult.iter().map(|s| s.to_string()).collect();
        }
        let (ps, qs) = (list("p"), list("q"));
        if !ps.is_empty() || !qs.is_empty() {
            if ps.len() != qs.len() {
                return Err(LabError::config("p/q", format!("{} values of p but {} of q", ps.len(), qs.len())));
            }
            self.pq = ps
                .iter()
                .zip(&qs)
                .map(|(p, q)| Ok((parse_exponent("p", p)?, parse_exponent("q", q)?)))
                .collect::<Result<_>>()?;
        }
        let scale = list("scale");
        if !scale.is_empty() {
            self.scale = scale.iter().map(|v| parse_num("scale", v)).collect::<Result<_>>()?;
        }
        let terms = list("terms");
        if !terms.is_empty() {
            self.terms = terms.iter().map(|v| parse_num("terms", v)).collect::<Result<_>>()?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => {
                let e: Experiment = v.trim().parse()?;
                if e != self.experiment {
                    return Err(LabError::config("experiment", format!("file names `{e}` but `{}` was requested", self.experiment)));
                }
            }
            "d" => self.d = parse_num(key, v)?,
            "fock-dim" => self.fock_dim = parse_num(key, v)?,
            "grid-extent" => self.grid_extent = parse_num(key, v)?,
            "grid-step" => self.grid_step = parse_num(key, v)?,
            "phase-extent" => self.phase_extent = parse_num(key, v)?,
            "phase-step" => self.phase_step = parse_num(key, v)?,
            "peetre-terms" => self.peetre_terms = parse_num(key, v)?,
            "window" => self.window = parse_num(key, v)?,
            "twisted-extent" => self.twisted_extent = parse_num(key, v)?,
            "twisted-step" => self.twisted_step = parse_num(key, v)?,
            "s" => self.s = parse_num(key, v)?,
            "t-grid" => self.t_grid = v.trim().parse()?,
            "draws" => self.draws = parse_num(key, v)?,
            "samples" => self.samples = parse_num(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "max-iter" => self.max_iter = parse_num(key, v)?,
            "quad-extent" => self.quad_extent = parse_num(key, v)?,
            "quad-step" => self.quad_step = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "out" => self.out = Some(v.trim().to_string()),
            "format" => self.format = v.trim().parse()?,
            _ => return Err(LabError::config(key, "unknown key")),
        }
        Ok(())
    }

    pub fn multipliers(&self) -> Result<Vec<Multiplier>> {
        self.mult.iter().map(|m| Ok(m.parse::<Multiplier>()?)).collect()
    }

    /// Checks every field against the preconditions of the routines it feeds.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LabError::config(key, format!("must be positive and finite, got {v}")))
            }
        };
        if self.d != 1 {
            return Err(LabError::config("d", format!("experiments run at d = 1; got {}", self.d)));
        }
        if self.fock_dim < 2 {
            return Err(LabError::config("fock-dim", "need N >= 2"));
        }
        for (key, v) in [
            ("grid-extent", self.grid_extent),
            ("grid-step", self.grid_step),
            ("phase-extent", self.phase_extent),
            ("phase-step", self.phase_step),
            ("twisted-extent", self.twisted_extent),
            ("twisted-step", self.twisted_step),
            ("quad-extent", self.quad_extent),
            ("quad-step", self.quad_step),
        ] {
            positive(key, v)?;
        }
        if self.s < 0.0 || !self.s.is_finite() {
            return Err(LabError::config("s", format!("smoothness must be >= 0, got {}", self.s)));
        }
        if self.window > self.fock_dim {
            return Err(LabError::config("window", format!("window {} exceeds fock-dim {}", self.window, self.fock_dim)));
        }
        if self.peetre_terms == 0 {
            return Err(LabError::config("peetre-terms", "need at least one term"));
        }
        for (p, q) in &self.pq {
            check_exponent("p", *p)?;
            check_exponent("q", *q)?;
        }
        self.t_grid.geometric()?;
        for s in &self.scale {
            positive("scale", *s)?;
        }
        if let Some(&n) = self.terms.iter().find(|&&n| n == 0 || n > 12) {
            return Err(LabError::config("terms", format!("need 1 <= N_terms <= 12, got {n}")));
        }
        for (key, v) in [("draws", self.draws), ("samples", self.samples), ("trials", self.trials), ("max-iter", self.max_iter)] {
            if v == 0 {
                return Err(LabError::config(key, "must be at least 1"));
            }
        }
        self.multipliers()?;
        Ok(())
    }
}

fn check_exponent(key: &str, p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(LabError::config(key, format!("exponent must lie in (1, inf), got {p}")))
    }
}

/// Exponents may be written as fractions, e.g. `4/3`.
fn parse_exponent(key: &str, v: &str) -> Result<f64> {
    match v.split_once('/') {
        Some((a, b)) => Ok(parse_num::<f64>(key, a)? / parse_num::<f64>(key, b)?),
        None => parse_num(key, v),
    }
}

/// Flat `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| LabError::config(format!("line {}", lineno + 1), format!("expected key = value, got `{line}`")))?;
        pairs.push((k.trim().trim_start_matches("--").to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    parse_config_text(&std::fs::read_to_string(path)?)
}

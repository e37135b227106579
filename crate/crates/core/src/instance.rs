//! Instance text format, result records, and run configuration.
//!
//! An instance file starts with a header line `d n`, followed by `n` lines of
//! `d + 1` integers `a_1 … a_d c` describing the hyperplane `a·x = c`. Blank
//! lines and lines starting with `#` are ignored.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{tour_feasible, FeasibilityReport, Hyperplane, Point, Tour, TAU};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("dimension {0} is outside the supported range {MIN_DIM}..={MAX_DIM}")]
    DimensionOutOfRange(usize),
    #[error("line {line}: hyperplane has an all-zero normal")]
    ZeroNormal { line: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    dim: usize,
    /// Each row is `a_1 … a_d c`.
    rows: Vec<Vec<i64>>,
}

impl Instance {
    pub fn new(dim: usize, rows: Vec<Vec<i64>>) -> Result<Self, InstanceError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(InstanceError::DimensionOutOfRange(dim));
        }
        if rows.is_empty() {
            return Err(InstanceError::Parse {
                line: 1,
                message: "instance has no hyperplanes".into(),
            });
        }
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim + 1 {
                return Err(InstanceError::Parse {
                    line: i + 2,
                    message: format!("expected {} integers, found {}", dim + 1, r.len()),
                });
            }
            if r[..dim].iter().all(|&a| a == 0) {
                return Err(InstanceError::ZeroNormal { line: i + 2 });
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn hyperplanes(&self) -> Vec<Hyperplane> {
        self.rows
            .iter()
            .map(|r| {
                let a: Vec<f64> = r[..self.dim].iter().map(|&x| x as f64).collect();
                Hyperplane::from_coeffs(&a, r[self.dim] as f64).expect("validated nonzero normal")
            })
            .collect()
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.dim, self.rows.len())?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(i64::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

/// Random instance with integer normals in `[-coeff, coeff]^d` (never zero)
/// and offsets in `[-offset, offset]`.
pub fn random_instance<R: rand::Rng>(rng: &mut R, dim: usize, n: usize, coeff: i64, offset: i64) -> Instance {
    let rows = (0..n)
        .map(|_| {
            let mut r: Vec<i64> = (0..dim).map(|_| rng.gen_range(-coeff..=coeff)).collect();
            if r.iter().all(|&a| a == 0) {
                r[rng.gen_range(0..dim)] = 1;
            }
            r.push(rng.gen_range(-offset..=offset));
            r
        })
        .collect();
    Instance::new(dim, rows).expect("generated rows are well formed")
}

pub fn parse_instance(text: &str) -> Result<Instance, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let parse_ints = |line: usize, l: &str| -> Result<Vec<i64>, InstanceError> {
        l.split_whitespace()
            .map(|tok| {
                tok.parse::<i64>().map_err(|_| InstanceError::Parse {
                    line,
                    message: format!("`{tok}` is not an integer"),
                })
            })
            .collect()
    };
    let (hline, header) = lines.next().ok_or(InstanceError::Parse {
        line: 1,
        message: "missing `d n` header".into(),
    })?;
    let header = parse_ints(hline, header)?;
    let [d, n] = header[..] else {
        return Err(InstanceError::Parse {
            line: hline,
            message: "header must be `d n`".into(),
        });
    };
    if d < 0 || n < 1 {
        return Err(InstanceError::Parse {
            line: hline,
            message: "header needs d ≥ 0 and n ≥ 1".into(),
        });
    }
    let (d, n) = (d as usize, n as usize);
    if !(MIN_DIM..=MAX_DIM).contains(&d) {
        return Err(InstanceError::DimensionOutOfRange(d));
    }
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let (line, l) = lines.next().ok_or(InstanceError::Parse {
            line: hline + rows.len() + 1,
            message: format!("expected {n} hyperplanes, found {}", rows.len()),
        })?;
        let r = parse_ints(line, l)?;
        if r.len() != d + 1 {
            return Err(InstanceError::Parse {
                line,
                message: format!("expected {} integers, found {}", d + 1, r.len()),
            });
        }
        if r[..d].iter().all(|&a| a == 0) {
            return Err(InstanceError::ZeroNormal { line });
        }
        rows.push(r);
    }
    if let Some((line, _)) = lines.next() {
        return Err(InstanceError::Parse {
            line,
            message: "trailing content after the last hyperplane".into(),
        });
    }
    Instance::new(d, rows)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Warning {
    /// Hyperplanes `first` and `second` (0-based) describe the same set.
    Duplicate { first: usize, second: usize },
    /// Every hyperplane has the same normal direction.
    AllParallel,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::Duplicate { first, second } => write!(f, "hyperplanes {first} and {second} coincide"),
            Warning::AllParallel => write!(f, "all hyperplanes are parallel; the optimum is a back-and-forth segment"),
        }
    }
}

pub fn validate_instance(inst: &Instance) -> Vec<Warning> {
    let hs = inst.hyperplanes();
    let mut out = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            if hs[i].approx_eq(&hs[j], TAU) {
                out.push(Warning::Duplicate { first: i, second: j });
            }
        }
    }
    if hs.len() > 1 && hs.iter().all(|h| (h.normal() - hs[0].normal()).amax() <= TAU) {
        out.push(Warning::AllParallel);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaseSetMode {
    Full,
    Axis,
    /// Normals read from a file, one per line.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub epsilon: f64,
    pub base_set_mode: BaseSetMode,
    /// Visit orders tried per configuration.
    pub order_cap: usize,
    /// Configurations tried; also bounds the full base-set tuple count.
    pub config_cap: usize,
    /// Direction-guess sequences enumerated exhaustively when the total count is at most this.
    pub guess_cap: usize,
    pub path_mode: bool,
    pub seed: u64,
    /// Random polytopes sampled for realizable configurations.
    pub samples: usize,
    /// Configurations with more elements are skipped.
    pub max_elements: usize,
    /// Restarts for the local-search reference tour.
    pub restarts: usize,
    /// Hill-climbing rounds over direction guesses when exhaustive enumeration is over `guess_cap`.
    pub refine_rounds: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            base_set_mode: BaseSetMode::Axis,
            order_cap: 24,
            config_cap: 24,
            guess_cap: 4096,
            path_mode: false,
            seed: 0,
            samples: 16,
            max_elements: 12,
            restarts: 8,
            refine_rounds: 2,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("epsilon must lie in (0, 2], got {0}")]
    Epsilon(f64),
    #[error("{0} must be at least 1")]
    Cap(&'static str),
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.epsilon > 0.0 && self.epsilon <= 2.0) {
            return Err(ConfigError::Epsilon(self.epsilon));
        }
        for (name, v) in [
            ("order_cap", self.order_cap),
            ("config_cap", self.config_cap),
            ("guess_cap", self.guess_cap),
            ("max_elements", self.max_elements),
        ] {
            if v < 1 {
                return Err(ConfigError::Cap(name));
            }
        }
        Ok(())
    }
}

/// Search statistics; the `*_truncated` flags record where a cap cut the search short.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub configurations: u64,
    pub orders: u64,
    pub guesses: u64,
    pub lps_solved: u64,
    pub lps_optimal: u64,
    pub lps_infeasible: u64,
    pub lps_failed: u64,
    pub degenerate_skipped: u64,
    /// LP tours re-checked for feasibility against the instance.
    pub candidates_checked: u64,
    pub configs_truncated: bool,
    pub orders_truncated: bool,
    pub guesses_truncated: bool,
}

impl Counters {
    pub fn merge(&mut self, o: &Counters) {
        self.configurations += o.configurations;
        self.orders += o.orders;
        self.guesses += o.guesses;
        self.lps_solved += o.lps_solved;
        self.lps_optimal += o.lps_optimal;
        self.lps_infeasible += o.lps_infeasible;
        self.lps_failed += o.lps_failed;
        self.degenerate_skipped += o.degenerate_skipped;
        self.candidates_checked += o.candidates_checked;
        self.configs_truncated |= o.configs_truncated;
        self.orders_truncated |= o.orders_truncated;
        self.guesses_truncated |= o.guesses_truncated;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub algorithm: String,
    pub length: f64,
    pub feasible: bool,
    pub unvisited: Vec<usize>,
    pub closed: bool,
    pub waypoints: Vec<Vec<f64>>,
    pub witnesses: Vec<Option<Vec<f64>>>,
    pub counters: Counters,
    pub wall_ms: f64,
}

impl ResultRecord {
    pub fn from_tour(algorithm: &str, tour: &Tour, inst: &[Hyperplane], counters: Counters, wall_ms: f64) -> Self {
        let report = tour_feasible(tour, inst);
        Self::from_report(algorithm, tour, &report, counters, wall_ms)
    }

    pub fn from_report(
        algorithm: &str,
        tour: &Tour,
        report: &FeasibilityReport,
        counters: Counters,
        wall_ms: f64,
    ) -> Self {
        let to_vec = |p: &Point| p.iter().copied().collect::<Vec<f64>>();
        Self {
            algorithm: algorithm.to_string(),
            length: tour.length(),
            feasible: report.is_feasible(),
            unvisited: report.unvisited(),
            closed: tour.closed,
            waypoints: tour.waypoints.iter().map(to_vec).collect(),
            witnesses: report.witnesses.iter().map(|w| w.as_ref().map(to_vec)).collect(),
            counters,
            wall_ms,
        }
    }

    pub fn tour(&self) -> Tour {
        Tour {
            waypoints: self.waypoints.iter().map(|w| Point::from_column_slice(w)).collect(),
            closed: self.closed,
        }
    }
}

pub fn write_result(r: &ResultRecord) -> String {
    serde_json::to_string_pretty(r).expect("result records always serialize")
}

pub fn parse_result(text: &str) -> Result<ResultRecord, serde_json::Error> {
    serde_json::from_str(text)
}

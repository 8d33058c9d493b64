//! Experiment configuration.
//!
//! Configuration files are flat `key = value` text; blank lines and lines
//! starting with `#` are ignored. The same keys are accepted as CLI flags
//! (`--key value`), applied after the file.

use std::fmt::Write as _;

use rcds_core::codec::{CutoffFormula, Fallback, LeftDegree, SystemParams};
use rcds_core::network::default_radius;
use rcds_core::protocol::{Algorithm, DiscardCheck, ProtocolOptions};
use rcds_core::query::{query_size, DEFAULT_SAMPLE_CAP};
use rcds_core::walkers::{EstimatorConfig, InterPacketEstimator};

use crate::error::{SimError, SimResult};

/// Every recognised key, in echo order.
pub const KEYS: &[&str] = &[
    "seed",
    "algorithm",
    "n",
    "k",
    "epsilon",
    "side",
    "radius",
    "c1",
    "c2",
    "payload_len",
    "left_degree",
    "d_formula",
    "n_divisor",
    "inter_packet",
    "discard_check",
    "origin_accepts",
    "source_self_init",
    "fallback",
    "trials",
    "eta_grid",
    "m_cap",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub algorithm: Algorithm,
    pub n: usize,
    pub k: usize,
    pub epsilon: f64,
    /// Side `L` of the deployment square.
    pub side: f64,
    /// `None` derives the radius from `n` and `side`.
    pub radius: Option<f64>,
    pub c1: f64,
    pub c2: u32,
    pub payload_len: usize,
    pub left_degree: LeftDegree,
    pub d_formula: CutoffFormula,
    pub n_divisor: f64,
    pub inter_packet: InterPacketEstimator,
    pub discard_check: DiscardCheck,
    pub origin_accepts: bool,
    pub source_self_init: bool,
    pub fallback: Fallback,
    pub trials: usize,
    pub eta_grid: Vec<f64>,
    pub m_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opts = ProtocolOptions::default();
        ExperimentConfig {
            seed: 1,
            algorithm: Algorithm::Rcds1,
            n: 200,
            k: 20,
            epsilon: 0.5,
            side: 5.0,
            radius: None,
            c1: SystemParams::DEFAULT_C1,
            c2: SystemParams::DEFAULT_C2,
            payload_len: SystemParams::DEFAULT_PAYLOAD_LEN,
            left_degree: LeftDegree::default(),
            d_formula: CutoffFormula::Standard,
            n_divisor: opts.estimator.n_divisor,
            inter_packet: opts.estimator.inter_packet,
            discard_check: opts.discard_check,
            origin_accepts: opts.origin_accepts,
            source_self_init: opts.source_self_init,
            fallback: Fallback::default(),
            trials: 30,
            eta_grid: vec![1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5],
            m_cap: DEFAULT_SAMPLE_CAP,
        }
    }
}

fn bad(key: &str, value: &str) -> SimError {
    SimError::config(format!("invalid value {value:?} for key {key}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> SimResult<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn boolean(key: &str, value: &str) -> SimResult<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

pub fn format_left_degree(left: &LeftDegree) -> String {
    match *left {
        LeftDegree::Constant(b) => format!("constant:{b}"),
        LeftDegree::TruncatedPoisson { lambda, max } => format!("poisson:{lambda}:{max}"),
    }
}

/// `constant:B` or `poisson:LAMBDA:MAX`.
pub fn parse_left_degree(value: &str) -> Option<LeftDegree> {
    let mut parts = value.split(':');
    let left = match parts.next()? {
        "constant" => LeftDegree::Constant(parts.next()?.parse().ok()?),
        "poisson" => LeftDegree::TruncatedPoisson {
            lambda: parts.next()?.parse().ok()?,
            max: parts.next()?.parse().ok()?,
        },
        _ => return None,
    };
    parts.next().is_none().then_some(left)
}

fn cutoff_name(f: CutoffFormula) -> &'static str {
    match f {
        CutoffFormula::Standard => "standard",
        CutoffFormula::Literal => "literal",
    }
}

fn inter_packet_name(e: InterPacketEstimator) -> &'static str {
    match e {
        InterPacketEstimator::ConsecutiveGaps => "gaps",
        InterPacketEstimator::PairedOffsets => "pairs",
    }
}

fn discard_name(d: DiscardCheck) -> &'static str {
    match d {
        DiscardCheck::BeforeIncrement => "before",
        DiscardCheck::AfterIncrement => "after",
    }
}

pub fn parse_list(key: &str, value: &str) -> SimResult<Vec<f64>> {
    value
        .split(',')
        .map(|v| num::<f64>(key, v.trim()))
        .collect()
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> SimResult<()> {
        let value = value.trim();
        match key {
            "seed" => self.seed = num(key, value)?,
            "algorithm" => self.algorithm = Algorithm::parse(value).ok_or_else(|| bad(key, value))?,
            "n" => self.n = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "side" => self.side = num(key, value)?,
            "radius" => {
                self.radius = if value == "auto" {
                    None
                } else {
                    Some(num(key, value)?)
                }
            }
            "c1" => self.c1 = num(key, value)?,
            "c2" => self.c2 = num(key, value)?,
            "payload_len" => self.payload_len = num(key, value)?,
            "left_degree" => self.left_degree = parse_left_degree(value).ok_or_else(|| bad(key, value))?,
            "d_formula" => {
                self.d_formula = match value {
                    "standard" => CutoffFormula::Standard,
                    "literal" => CutoffFormula::Literal,
                    _ => return Err(bad(key, value)),
                }
            }
            "n_divisor" => self.n_divisor = num(key, value)?,
            "inter_packet" => {
                self.inter_packet = match value {
                    "gaps" => InterPacketEstimator::ConsecutiveGaps,
                    "pairs" => InterPacketEstimator::PairedOffsets,
                    _ => return Err(bad(key, value)),
                }
            }
            "discard_check" => {
                self.discard_check = match value {
                    "before" => DiscardCheck::BeforeIncrement,
                    "after" => DiscardCheck::AfterIncrement,
                    _ => return Err(bad(key, value)),
                }
            }
            "origin_accepts" => self.origin_accepts = boolean(key, value)?,
            "source_self_init" => self.source_self_init = boolean(key, value)?,
            "fallback" => self.fallback = Fallback::parse(value).ok_or_else(|| bad(key, value))?,
            "trials" => self.trials = num(key, value)?,
            "eta_grid" => self.eta_grid = parse_list(key, value)?,
            "m_cap" => self.m_cap = num(key, value)?,
            _ => return Err(SimError::config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "seed" => self.seed.to_string(),
            "algorithm" => self.algorithm.as_str().to_string(),
            "n" => self.n.to_string(),
            "k" => self.k.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "side" => self.side.to_string(),
            "radius" => self.radius.map_or_else(|| "auto".to_string(), |r| r.to_string()),
            "c1" => self.c1.to_string(),
            "c2" => self.c2.to_string(),
            "payload_len" => self.payload_len.to_string(),
            "left_degree" => format_left_degree(&self.left_degree),
            "d_formula" => cutoff_name(self.d_formula).to_string(),
            "n_divisor" => self.n_divisor.to_string(),
            "inter_packet" => inter_packet_name(self.inter_packet).to_string(),
            "discard_check" => discard_name(self.discard_check).to_string(),
            "origin_accepts" => self.origin_accepts.to_string(),
            "source_self_init" => self.source_self_init.to_string(),
            "fallback" => self.fallback.as_str().to_string(),
            "trials" => self.trials.to_string(),
            "eta_grid" => self
                .eta_grid
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(","),
            "m_cap" => self.m_cap.to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines on top of the defaults.
    pub fn parse(text: &str) -> SimResult<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> SimResult<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| SimError::parse(i + 1, "expected key = value"))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Every key as `(key, value)`, in [`KEYS`] order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k).unwrap())).collect()
    }

    /// Config file text that parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            writeln!(out, "{k} = {v}").unwrap();
        }
        out
    }

    pub fn radius(&self) -> f64 {
        self.radius.unwrap_or_else(|| default_radius(self.n, self.side))
    }

    pub fn params(&self) -> SimResult<SystemParams> {
        Ok(SystemParams::new(self.n, self.k, self.epsilon)?
            .with_c1(self.c1)?
            .with_c2(self.c2)?
            .with_payload_len(self.payload_len)?
            .with_left_degree(self.left_degree)?
            .with_cutoff_formula(self.d_formula)?)
    }

    pub fn protocol_options(&self) -> ProtocolOptions {
        ProtocolOptions {
            estimator: EstimatorConfig {
                n_divisor: self.n_divisor,
                inter_packet: self.inter_packet,
            },
            discard_check: self.discard_check,
            origin_accepts: self.origin_accepts,
            source_self_init: self.source_self_init,
            inference_rounds: None,
        }
    }

    /// Rejects unreachable configurations before any simulation runs.
    pub fn validate(&self) -> SimResult<SystemParams> {
        let params = self.params()?;
        if self.trials == 0 {
            return Err(SimError::config("trials must be at least 1"));
        }
        if self.m_cap == 0 {
            return Err(SimError::config("m_cap must be at least 1"));
        }
        if !(self.side > 0.0) || !self.side.is_finite() {
            return Err(SimError::config("side must be positive"));
        }
        if !self.radius().is_finite() || self.radius() <= 0.0 {
            return Err(SimError::config("radius must be positive"));
        }
        if !(self.n_divisor > 0.0) || !self.n_divisor.is_finite() {
            return Err(SimError::config("n_divisor must be positive"));
        }
        if self.eta_grid.is_empty() {
            return Err(SimError::config("eta_grid is empty"));
        }
        for &eta in &self.eta_grid {
            query_size(eta, self.k, self.n)?;
        }
        Ok(params)
    }
}

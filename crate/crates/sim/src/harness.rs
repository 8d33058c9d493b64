//! Seeded multi-trial experiments and one-parameter sweeps.
//!
//! Trial `t` of an experiment with master seed `S` draws everything from
//! `trial_seed(S, t)`: the graph from the `Graph` stream (attempt `a` of the
//! resample-until-connected loop uses index `a`), sources and payloads from
//! their own streams, the protocol from `Protocol` index 0, and the query
//! sets for the `i`-th grid value from `Query` index `i`. Trials run in
//! parallel and are reduced in trial order.

use rayon::prelude::*;

use rcds_core::codec::SystemParams;
use rcds_core::network::{generate_rgg, is_connected, GraphTopology};
use rcds_core::protocol::{run_algorithm, Deployment, StorageOutcome};
use rcds_core::query::{estimate_ps, wilson_interval, QueryResult};
use rcds_core::seed::{stream_rng, trial_seed, Stream};

use crate::config::{parse_list, ExperimentConfig};
use crate::error::{SimError, SimResult};
use crate::table::{Row, Table};

/// Graph draws tried before a configuration is declared disconnected.
pub const MAX_GRAPH_ATTEMPTS: u64 = 1000;

/// Connected random geometric graph for the trial with seed `seed`.
pub fn trial_graph(cfg: &ExperimentConfig, seed: u64) -> SimResult<GraphTopology> {
    let radius = cfg.radius();
    for attempt in 0..MAX_GRAPH_ATTEMPTS {
        let mut rng = stream_rng(seed, Stream::Graph, attempt);
        let g = generate_rgg(cfg.n, cfg.side, radius, &mut rng)?;
        if is_connected(&g) {
            return Ok(g);
        }
    }
    Err(SimError::config(format!(
        "no connected graph in {MAX_GRAPH_ATTEMPTS} draws at radius {radius}"
    )))
}

/// Storage state of trial `t`.
pub fn trial_storage(cfg: &ExperimentConfig, params: &SystemParams, t: u64) -> SimResult<StorageOutcome> {
    let seed = trial_seed(cfg.seed, t);
    let g = trial_graph(cfg, seed)?;
    let dep = Deployment::generate(&g, params, seed)?;
    let mut rng = stream_rng(seed, Stream::Protocol, 0);
    Ok(run_algorithm(
        cfg.algorithm,
        &g,
        &dep,
        params,
        cfg.protocol_options(),
        &mut rng,
    )?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub trial: u64,
    /// One estimate per `eta_grid` entry.
    pub queries: Vec<QueryResult>,
    pub transmissions: u64,
    pub precoded: usize,
}

pub fn run_trial(cfg: &ExperimentConfig, params: &SystemParams, t: u64) -> SimResult<TrialResult> {
    let outcome = trial_storage(cfg, params, t)?;
    let seed = trial_seed(cfg.seed, t);
    let queries = cfg
        .eta_grid
        .iter()
        .enumerate()
        .map(|(i, &eta)| {
            let mut rng = stream_rng(seed, Stream::Query, i as u64);
            estimate_ps(&outcome, eta, cfg.m_cap, cfg.fallback, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrialResult {
        trial: t,
        queries,
        transmissions: outcome.total_transmissions(),
        precoded: outcome.precoded.len(),
    })
}

/// Every trial of `cfg`, in trial order.
pub fn run_trials(cfg: &ExperimentConfig) -> SimResult<Vec<TrialResult>> {
    let params = cfg.validate()?;
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(cfg, &params, t))
        .collect()
}

/// Pools per-trial estimates into one row per grid value.
pub fn aggregate(cfg: &ExperimentConfig, trials: &[TrialResult]) -> Vec<Row> {
    cfg.eta_grid
        .iter()
        .enumerate()
        .map(|(i, &eta)| {
            let mut pooled = QueryResult::empty(eta, trials[0].queries[i].h);
            let mut ps_sum = 0.0;
            for t in trials {
                pooled.merge(&t.queries[i]);
                ps_sum += t.queries[i].ps();
            }
            let (ps_lo, ps_hi) = wilson_interval(pooled.successes, pooled.samples);
            Row {
                algo: cfg.algorithm.as_str().to_string(),
                n: cfg.n,
                k: cfg.k,
                eps: cfg.epsilon,
                c1: cfg.c1,
                c2: cfg.c2,
                eta,
                h: pooled.h,
                samples: pooled.samples,
                successes: pooled.successes,
                ps: ps_sum / trials.len() as f64,
                ps_lo,
                ps_hi,
                mean_peel_recovered: pooled.mean_peel_recovered(),
            }
        })
        .collect()
}

fn echo(cfg: &ExperimentConfig) -> Vec<(String, String)> {
    cfg.entries()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> SimResult<Table> {
    let trials = run_trials(cfg)?;
    Ok(Table {
        config: echo(cfg),
        rows: aggregate(cfg, &trials),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    C1,
    C2,
    N,
    K,
    Epsilon,
    Eta,
}

impl SweepParam {
    pub fn parse(s: &str) -> SimResult<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "c1" => SweepParam::C1,
            "c2" => SweepParam::C2,
            "n" => SweepParam::N,
            "k" => SweepParam::K,
            "epsilon" | "eps" => SweepParam::Epsilon,
            "eta" => SweepParam::Eta,
            _ => return Err(SimError::config(format!("cannot sweep {s:?}"))),
        })
    }

    /// Config key set by this parameter.
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::C1 => "c1",
            SweepParam::C2 => "c2",
            SweepParam::N => "n",
            SweepParam::K => "k",
            SweepParam::Epsilon => "epsilon",
            SweepParam::Eta => "eta_grid",
        }
    }

    /// CSV column holding this parameter.
    pub fn column(self) -> &'static str {
        match self {
            SweepParam::C1 => "C1",
            SweepParam::C2 => "C2",
            SweepParam::N => "n",
            SweepParam::K => "k",
            SweepParam::Epsilon => "eps",
            SweepParam::Eta => "eta",
        }
    }
}

/// Runs `cfg` once per value of `param` with the same master seed; one row
/// per `(value, eta)`. Every configuration is validated before the first
/// simulation starts.
pub fn sweep(cfg: &ExperimentConfig, param: SweepParam, values: &[f64]) -> SimResult<Table> {
    if values.is_empty() {
        return Err(SimError::config("sweep needs at least one value"));
    }
    let configs: Vec<ExperimentConfig> = if param == SweepParam::Eta {
        let mut c = cfg.clone();
        c.eta_grid = values.to_vec();
        vec![c]
    } else {
        values
            .iter()
            .map(|v| {
                let mut c = cfg.clone();
                c.set(param.key(), &v.to_string())?;
                Ok(c)
            })
            .collect::<SimResult<_>>()?
    };
    for c in &configs {
        c.validate()?;
    }
    let mut config = echo(cfg);
    config.push(("sweep".into(), param.key().into()));
    config.push((
        "values".into(),
        values.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
    ));
    let mut rows = Vec::new();
    for c in &configs {
        rows.extend(aggregate(c, &run_trials(c)?));
    }
    Ok(Table { config, rows })
}

/// Parses a comma-separated sweep value list.
pub fn parse_values(text: &str) -> SimResult<Vec<f64>> {
    parse_list("values", text)
}

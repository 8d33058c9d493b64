use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches, Command};

use rcds_core::protocol::{rcds1_run_traced, rcds2_run_traced, Algorithm, Deployment};
use rcds_core::seed::{stream_rng, trial_seed, Stream};
use rcds_core::walkers::cover_threshold;

use rcds_sim::chart::{render_chart, ChartSpec};
use rcds_sim::config::{ExperimentConfig, KEYS};
use rcds_sim::formats::storage::write_storage;
use rcds_sim::formats::topology::{read_topology, write_topology};
use rcds_sim::formats::trace::{parse_trace, replay, TraceWriter};
use rcds_sim::harness::{parse_values, run_experiment, sweep, trial_graph, trial_storage, SweepParam};
use rcds_sim::{SimError, SimResult, Table};

fn config_args(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key = value configuration file"),
    );
    KEYS.iter().fold(cmd, |cmd, &key| {
        cmd.arg(Arg::new(key).long(key).value_name("VALUE"))
    })
}

fn path_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("FILE").help(help)
}

fn trial_arg() -> Arg {
    Arg::new("trial")
        .long("trial")
        .value_name("T")
        .value_parser(clap::value_parser!(u64))
        .default_value("0")
}

fn cli() -> Command {
    Command::new("rcds")
        .about("Distributed Raptor-coded storage simulator")
        .subcommand_required(true)
        .subcommand(config_args(
            Command::new("run")
                .about("Run an experiment and print its CSV table")
                .arg(path_arg("csv", "write the CSV here instead of stdout"))
                .arg(path_arg("svg", "also render a chart")),
        ))
        .subcommand(config_args(
            Command::new("sweep")
                .about("Repeat an experiment over values of one parameter")
                .arg(Arg::new("param").long("param").required(true).help("c1, c2, n, k, epsilon or eta"))
                .arg(Arg::new("values").long("values").required(true).help("comma-separated values"))
                .arg(path_arg("csv", "write the CSV here instead of stdout"))
                .arg(path_arg("svg", "also render a chart")),
        ))
        .subcommand(
            Command::new("chart")
                .about("Render a CSV table as SVG")
                .arg(path_arg("input", "CSV table").required(true))
                .arg(path_arg("output", "SVG file").required(true))
                .arg(Arg::new("x").long("x").default_value("eta").help("x-axis column")),
        )
        .subcommand(
            Command::new("topology")
                .about("Dump or load a network topology")
                .subcommand_required(true)
                .subcommand(config_args(
                    Command::new("dump")
                        .arg(trial_arg())
                        .arg(path_arg("output", "topology file").required(true)),
                ))
                .subcommand(Command::new("load").arg(path_arg("input", "topology file").required(true))),
        )
        .subcommand(
            Command::new("trace")
                .about("Record or replay a per-round event trace")
                .subcommand_required(true)
                .subcommand(config_args(
                    Command::new("record")
                        .arg(trial_arg())
                        .arg(path_arg("output", "trace file").required(true)),
                ))
                .subcommand(
                    Command::new("replay")
                        .arg(path_arg("input", "trace file").required(true))
                        .arg(
                            Arg::new("threshold")
                                .long("threshold")
                                .value_parser(clap::value_parser!(u64))
                                .help("minimum absorption counter to check"),
                        ),
                ),
        )
        .subcommand(config_args(
            Command::new("storage")
                .about("Write one trial's storage outcome as text")
                .arg(trial_arg())
                .arg(path_arg("output", "storage file").required(true)),
        ))
        .arg(Arg::new("quiet").long("quiet").short('q').action(ArgAction::SetTrue).global(true))
}

fn load_config(m: &ArgMatches) -> SimResult<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = m.get_one::<String>("config") {
        cfg.apply_text(&fs::read_to_string(path)?)?;
    }
    for &key in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    Ok(cfg)
}

fn path(m: &ArgMatches, name: &str) -> Option<PathBuf> {
    m.get_one::<String>(name).map(PathBuf::from)
}

fn emit_table(m: &ArgMatches, table: &Table, x: &str) -> SimResult<()> {
    let csv = table.to_csv()?;
    match path(m, "csv") {
        Some(p) => fs::write(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = path(m, "svg") {
        let spec = ChartSpec {
            x: x.to_string(),
            ..ChartSpec::default()
        };
        fs::write(p, render_chart(table, &spec)?)?;
    }
    Ok(())
}

fn record_trace(cfg: &ExperimentConfig, t: u64, out: PathBuf) -> SimResult<u64> {
    let params = cfg.validate()?;
    let seed = trial_seed(cfg.seed, t);
    let g = trial_graph(cfg, seed)?;
    let dep = Deployment::generate(&g, &params, seed)?;
    let mut rng = stream_rng(seed, Stream::Protocol, 0);
    let mut sink = TraceWriter::new(BufWriter::new(fs::File::create(out)?));
    let opts = cfg.protocol_options();
    match cfg.algorithm {
        Algorithm::Rcds1 => rcds1_run_traced(&g, &dep, &params, opts, &mut rng, &mut sink)?,
        Algorithm::Rcds2 => rcds2_run_traced(&g, &dep, &params, opts, &mut rng, &mut sink)?,
        Algorithm::Centralized => {
            return Err(SimError::config("the centralized reference moves no packets"));
        }
    };
    let written = sink.written;
    sink.finish()?;
    Ok(written)
}

fn run(m: &ArgMatches) -> SimResult<()> {
    let quiet = m.get_flag("quiet");
    match m.subcommand() {
        Some(("run", m)) => {
            let cfg = load_config(m)?;
            emit_table(m, &run_experiment(&cfg)?, "eta")
        }
        Some(("sweep", m)) => {
            let cfg = load_config(m)?;
            let param = SweepParam::parse(m.get_one::<String>("param").unwrap())?;
            let values = parse_values(m.get_one::<String>("values").unwrap())?;
            let table = sweep(&cfg, param, &values)?;
            emit_table(m, &table, param.column())
        }
        Some(("chart", m)) => {
            let table = Table::from_csv(&fs::read_to_string(path(m, "input").unwrap())?)?;
            let spec = ChartSpec {
                x: m.get_one::<String>("x").unwrap().clone(),
                ..ChartSpec::default()
            };
            fs::write(path(m, "output").unwrap(), render_chart(&table, &spec)?)?;
            Ok(())
        }
        Some(("topology", m)) => match m.subcommand() {
            Some(("dump", m)) => {
                let cfg = load_config(m)?;
                cfg.validate()?;
                let t = *m.get_one::<u64>("trial").unwrap();
                let g = trial_graph(&cfg, trial_seed(cfg.seed, t))?;
                fs::write(path(m, "output").unwrap(), write_topology(&g))?;
                Ok(())
            }
            Some(("load", m)) => {
                let g = read_topology(&fs::read_to_string(path(m, "input").unwrap())?)?;
                println!(
                    "n={} edges={} mean_degree={:.4} connected={}",
                    g.n(),
                    g.edge_count(),
                    g.mean_degree(),
                    rcds_core::network::is_connected(&g)
                );
                Ok(())
            }
            _ => unreachable!("subcommand required"),
        },
        Some(("trace", m)) => match m.subcommand() {
            Some(("record", m)) => {
                let cfg = load_config(m)?;
                let t = *m.get_one::<u64>("trial").unwrap();
                let written = record_trace(&cfg, t, path(m, "output").unwrap())?;
                if !quiet {
                    eprintln!("{written} events");
                }
                Ok(())
            }
            Some(("replay", m)) => {
                let events = parse_trace(&fs::read_to_string(path(m, "input").unwrap())?)?;
                let s = replay(&events, m.get_one::<u64>("threshold").copied());
                println!(
                    "events={} enqueue={} absorb={} accept={} discard={} packets={} last_round={} violations={}",
                    s.events, s.enqueues, s.absorbs, s.accepts, s.discards, s.packets, s.last_round,
                    s.violations.len()
                );
                for v in &s.violations {
                    println!("{v}");
                }
                if s.violations.is_empty() {
                    Ok(())
                } else {
                    Err(SimError::config("trace violates the protocol rules"))
                }
            }
            _ => unreachable!("subcommand required"),
        },
        Some(("storage", m)) => {
            let cfg = load_config(m)?;
            let params = cfg.validate()?;
            let t = *m.get_one::<u64>("trial").unwrap();
            let outcome = trial_storage(&cfg, &params, t)?;
            fs::write(path(m, "output").unwrap(), write_storage(&outcome))?;
            if !quiet {
                eprintln!(
                    "cover threshold {} ; {} pre-coded packets",
                    cover_threshold(params.n as f64, params.c1)?,
                    outcome.precoded.len()
                );
            }
            Ok(())
        }
        _ => unreachable!("subcommand required"),
    }
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match run(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rcds: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

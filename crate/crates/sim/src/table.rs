//! Result tables as CSV with a `# key=value` configuration header.

use std::fmt::Write as _;

use crate::error::{SimError, SimResult};

pub const COLUMNS: [&str; 14] = [
    "algo",
    "n",
    "k",
    "eps",
    "C1",
    "C2",
    "eta",
    "h",
    "M",
    "Ms",
    "ps",
    "ps_lo",
    "ps_hi",
    "mean_peel_recovered",
];

/// One `(configuration, eta)` data point, pooled over trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub algo: String,
    pub n: usize,
    pub k: usize,
    pub eps: f64,
    pub c1: f64,
    pub c2: u32,
    pub eta: f64,
    pub h: usize,
    /// Query sets sampled across all trials.
    pub samples: usize,
    /// Successful query sets across all trials.
    pub successes: usize,
    /// Mean over trials of the per-trial `Ps`.
    pub ps: f64,
    pub ps_lo: f64,
    pub ps_hi: f64,
    pub mean_peel_recovered: f64,
}

impl Row {
    /// Numeric value of a column, for charting.
    pub fn value(&self, column: &str) -> Option<f64> {
        Some(match column {
            "n" => self.n as f64,
            "k" => self.k as f64,
            "eps" | "epsilon" => self.eps,
            "C1" | "c1" => self.c1,
            "C2" | "c2" => self.c2 as f64,
            "eta" => self.eta,
            "h" => self.h as f64,
            "M" => self.samples as f64,
            "Ms" => self.successes as f64,
            "ps" => self.ps,
            "ps_lo" => self.ps_lo,
            "ps_hi" => self.ps_hi,
            "mean_peel_recovered" => self.mean_peel_recovered,
            _ => return None,
        })
    }

    fn fields(&self) -> [String; 14] {
        [
            self.algo.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.eps.to_string(),
            self.c1.to_string(),
            self.c2.to_string(),
            self.eta.to_string(),
            self.h.to_string(),
            self.samples.to_string(),
            self.successes.to_string(),
            format!("{:.6}", self.ps),
            format!("{:.6}", self.ps_lo),
            format!("{:.6}", self.ps_hi),
            format!("{:.6}", self.mean_peel_recovered),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    /// Resolved configuration echoed as `# key=value` lines.
    pub config: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn to_csv(&self) -> SimResult<String> {
        let mut out = String::new();
        for (k, v) in &self.config {
            writeln!(out, "# {k}={v}").unwrap();
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.fields())?;
        }
        let body = w.into_inner().map_err(|e| SimError::Io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("CSV output is UTF-8"));
        Ok(out)
    }

    pub fn from_csv(text: &str) -> SimResult<Self> {
        let config = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .filter_map(|l| l.trim().split_once('='))
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = reader.headers()?.clone();
        if header.iter().ne(COLUMNS) {
            return Err(SimError::parse(1, "unexpected CSV header"));
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let f = |c: usize| -> SimResult<f64> {
                record[c]
                    .parse()
                    .map_err(|_| SimError::parse(line, format!("bad {} value", COLUMNS[c])))
            };
            let u = |c: usize| -> SimResult<usize> {
                record[c]
                    .parse()
                    .map_err(|_| SimError::parse(line, format!("bad {} value", COLUMNS[c])))
            };
            rows.push(Row {
                algo: record[0].to_string(),
                n: u(1)?,
                k: u(2)?,
                eps: f(3)?,
                c1: f(4)?,
                c2: u(5)? as u32,
                eta: f(6)?,
                h: u(7)?,
                samples: u(8)?,
                successes: u(9)?,
                ps: f(10)?,
                ps_lo: f(11)?,
                ps_hi: f(12)?,
                mean_peel_recovered: f(13)?,
            });
        }
        Ok(Table { config, rows })
    }

    pub fn config_value(&self, key: &str) -> Option<&str> {
        self.config.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

//! Plain-text file formats.

pub mod storage;
pub mod system;
pub mod topology;
pub mod trace;

use crate::error::{SimError, SimResult};

/// Non-blank lines with their 1-based line numbers.
pub(crate) fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub(crate) fn field<T: std::str::FromStr>(line: usize, token: Option<&str>, what: &str) -> SimResult<T> {
    token
        .ok_or_else(|| SimError::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| SimError::parse(line, format!("bad {what}")))
}

pub(crate) fn hex_block(line: usize, token: Option<&str>) -> SimResult<rcds_core::Block> {
    let token = token.ok_or_else(|| SimError::parse(line, "missing payload"))?;
    hex::decode(token)
        .map(rcds_core::Block::from_bytes)
        .map_err(|_| SimError::parse(line, "bad hex payload"))
}

/// `|a,b,c|` with `||` for the empty list.
pub(crate) fn id_list(ids: &[usize]) -> String {
    let inner: Vec<String> = ids.iter().map(usize::to_string).collect();
    format!("|{}|", inner.join(","))
}

pub(crate) fn parse_id_list(line: usize, token: Option<&str>) -> SimResult<Vec<usize>> {
    let inner = token
        .and_then(|t| t.strip_prefix('|'))
        .and_then(|t| t.strip_suffix('|'))
        .ok_or_else(|| SimError::parse(line, "expected |id,...| list"))?;
    if inner.is_empty() {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|s| s.parse().map_err(|_| SimError::parse(line, "bad ID in list")))
        .collect()
}

pub(crate) fn expect_end<'a>(line: usize, mut tokens: impl Iterator<Item = &'a str>) -> SimResult<()> {
    match tokens.next() {
        None => Ok(()),
        Some(t) => Err(SimError::parse(line, format!("unexpected token {t:?}"))),
    }
}

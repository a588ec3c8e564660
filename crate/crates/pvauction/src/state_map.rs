//! Postal-prefix to state fallback for unit rows without a state.

use std::path::Path;

use pvauction_core::registers::{GermanState, PostalCode};
use serde::Deserialize;

use crate::csv_io::{read_rows, LoadError};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StateMap {
    /// (prefix, state), longest prefixes first.
    entries: Vec<(String, GermanState)>,
}

#[derive(Deserialize)]
struct Row {
    prefix: String,
    state: GermanState,
}

impl StateMap {
    pub fn new(entries: impl IntoIterator<Item = (String, GermanState)>) -> Self {
        let mut entries: Vec<_> = entries.into_iter().collect();
        entries.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        StateMap { entries }
    }

    /// Loads a `prefix,state` CSV. Prefixes are 1 to 5 digits.
    pub fn load(path: &Path) -> Result<Self, LoadError> {
        let rows = read_rows(path, &["prefix", "state"], |r: Row, _| {
            if r.prefix.is_empty() || r.prefix.len() > 5 || !r.prefix.bytes().all(|b| b.is_ascii_digit()) {
                return Err(("prefix".into(), "expected 1 to 5 digits".into()));
            }
            Ok((r.prefix, r.state))
        })?
        .into_result()?;
        Ok(StateMap::new(rows))
    }

    pub fn lookup(&self, postal: &PostalCode) -> Option<GermanState> {
        self.entries.iter().find(|(p, _)| postal.as_str().starts_with(p.as_str())).map(|(_, s)| *s)
    }
}

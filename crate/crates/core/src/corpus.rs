//! Bundled example automata and their manifest.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::io::{parse_document, Document};
use crate::model::{DyckAutomaton, DyckGraph};

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".json")))),*]
    };
}

const FILES: &[(&str, &str)] = bundled![
    "fd1",
    "dyck2",
    "nested",
    "dead-end",
    "swap",
    "counter",
    "cycle3",
    "partial",
    "two-loops",
    "split-example",
    "merge-example",
    "trim-base",
    "trim-base-unmatched",
    "trim-merged",
];

pub const MANIFEST: &str = include_str!("../corpus/manifest.json");

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub description: String,
    #[serde(default)]
    pub notes: Option<String>,
    /// Whether the trimmed automaton passes `is_normalized_bounded(_, 4, 4)`.
    pub trim_normalized_l4_m4: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
struct Manifest {
    entries: Vec<ManifestEntry>,
}

pub fn manifest() -> Vec<ManifestEntry> {
    serde_json::from_str::<Manifest>(MANIFEST)
        .expect("bundled manifest parses")
        .entries
}

pub fn names() -> Vec<&'static str> {
    FILES.iter().map(|(n, _)| *n).collect()
}

pub fn text(name: &str) -> Result<&'static str> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Parse(format!("no corpus entry `{name}`")))
}

pub fn document(name: &str) -> Result<Document> {
    parse_document(text(name)?)
}

/// The entry as an automaton; edge graphs come back labelled by kind.
pub fn automaton(name: &str) -> Result<DyckAutomaton> {
    let doc = document(name)?;
    if doc.is_edge_graph() {
        Ok(doc.to_graph()?.kind_automaton())
    } else {
        doc.to_automaton()
    }
}

pub fn graph(name: &str) -> Result<DyckGraph> {
    document(name)?.to_graph()
}

/// Every entry as an automaton, in manifest order.
pub fn all() -> Vec<(&'static str, DyckAutomaton)> {
    names()
        .into_iter()
        .map(|n| (n, automaton(n).expect("bundled corpus entries are valid")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{serialize_automaton, serialize_graph};

    #[test]
    fn manifest_lists_every_file() {
        let listed: Vec<String> = manifest().into_iter().map(|e| e.name).collect();
        assert_eq!(listed, names());
        for e in manifest() {
            assert_eq!(e.file, format!("{}.json", e.name));
        }
    }

    #[test]
    fn entries_round_trip() {
        for name in names() {
            let doc = document(name).unwrap();
            let again = if doc.is_edge_graph() {
                serialize_graph(&doc.to_graph().unwrap())
            } else {
                serialize_automaton(&doc.to_automaton().unwrap())
            };
            assert_eq!(again, text(name).unwrap(), "{name}");
        }
    }

    #[test]
    fn nine_state_graph() {
        let g = graph("trim-base").unwrap();
        assert_eq!(g.num_states(), 9);
        assert_eq!(g.num_edges(), 15);
        assert_eq!(g.automaton().matched.len(), 2);
    }

    #[test]
    fn manifest_records_bounded_normalization_of_trims() {
        let mut wrong = Vec::new();
        for e in manifest() {
            let trimmed = crate::surgery::trim(&automaton(&e.name).unwrap());
            let got = crate::locality::is_normalized_bounded(&trimmed, 4, 4);
            if e.trim_normalized_l4_m4 != Some(got) {
                wrong.push(format!("{}={got}", e.name));
            }
        }
        assert!(wrong.is_empty(), "{}", wrong.join(" "));
    }
}

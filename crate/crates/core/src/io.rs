//! JSON documents for automata, edge graphs and block maps, and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BlockMapSpec, DyckAutomaton, DyckGraph, Kind, Symbol, TriAlphabet, Word};

pub const KIND_AUTOMATON: &str = "automaton";
pub const KIND_EDGE_GRAPH: &str = "edge-graph";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Symbol>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub kind: Option<Kind>,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockMapDoc {
    pub m: usize,
    pub a: usize,
    #[serde(default = "yes")]
    pub proper: bool,
    pub target: TriAlphabet,
    pub table: Vec<(Word, Symbol)>,
}

fn yes() -> bool {
    true
}

/// The on-disk document. Every section is optional so that automata, edge
/// graphs and stand-alone block maps share one format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<TriAlphabet>,
    #[serde(default)]
    pub states: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub matched: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blockmap: Option<BlockMapDoc>,
}

pub fn parse_document(text: &str) -> Result<Document> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))
}

impl Document {
    pub fn is_edge_graph(&self) -> bool {
        self.kind.as_deref() == Some(KIND_EDGE_GRAPH)
    }

    /// The automaton described by the document. Edge-graph documents may give
    /// edge types instead of labels; edges are then labelled by their index.
    pub fn to_automaton(&self) -> Result<DyckAutomaton> {
        if let Some(kind) = &self.kind {
            if kind != KIND_AUTOMATON && kind != KIND_EDGE_GRAPH {
                return Err(Error::Parse(format!("unknown document kind `{kind}`")));
            }
        }
        let derived = self.alphabet.is_none() && self.is_edge_graph();
        let mut alphabet = match &self.alphabet {
            Some(a) => a.clone(),
            None if derived => TriAlphabet::default(),
            None => return Err(Error::Parse("missing `alphabet`".into())),
        };
        let mut aut = DyckAutomaton::new(TriAlphabet::default());
        for s in &self.states {
            aut.add_state(s.clone());
        }
        for (i, e) in self.edges.iter().enumerate() {
            let source = aut.state(&e.from)?;
            let target = aut.state(&e.to)?;
            let label = match (&e.label, derived) {
                (Some(l), _) => l.clone(),
                (None, true) => i.to_string(),
                (None, false) => return Err(Error::Parse(format!("edge {i} has no label"))),
            };
            if derived {
                let kind = e
                    .kind
                    .ok_or_else(|| Error::Parse(format!("edge {i} needs a `type` or the document an `alphabet`")))?;
                alphabet.part_mut(kind).push(label.clone());
            } else if let Some(kind) = e.kind {
                if alphabet.kind_of(&label) != Some(kind) {
                    return Err(Error::Parse(format!("edge {i}: `{label}` is not a {kind} symbol")));
                }
            }
            aut.add_edge(source, label, target);
        }
        aut.alphabet = alphabet;
        aut.matched = self.matched.iter().copied().collect();
        let violations = aut.validate();
        if !violations.is_empty() {
            let text: Vec<String> = violations.iter().map(ToString::to_string).collect();
            return Err(Error::Invalid(text.join("; ")));
        }
        Ok(aut)
    }

    pub fn to_graph(&self) -> Result<DyckGraph> {
        let aut = self.to_automaton()?;
        if self.is_edge_graph() {
            DyckGraph::try_from_automaton(aut)
        } else {
            Ok(DyckGraph::from_automaton(&aut))
        }
    }

    pub fn to_block_map(&self) -> Result<BlockMapSpec> {
        let doc = self
            .blockmap
            .as_ref()
            .ok_or_else(|| Error::Parse("missing `blockmap` section".into()))?;
        let mut map = BlockMapSpec::new(doc.m, doc.a, doc.target.clone());
        map.proper = doc.proper;
        for (w, s) in &doc.table {
            if map.table.insert(w.clone(), s.clone()).is_some() {
                return Err(Error::BlockMap(format!("window {w:?} listed twice")));
            }
        }
        Ok(map)
    }

    pub fn from_automaton(aut: &DyckAutomaton) -> Self {
        Document {
            kind: None,
            alphabet: Some(aut.alphabet.clone()),
            states: aut.states.clone(),
            edges: aut
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    from: aut.states[e.source].clone(),
                    label: Some(e.label.clone()),
                    kind: None,
                    to: aut.states[e.target].clone(),
                })
                .collect(),
            matched: aut.matched.iter().copied().collect(),
            blockmap: None,
        }
    }

    pub fn from_graph(g: &DyckGraph) -> Self {
        let aut = g.automaton();
        let kinds = aut.kinds();
        Document {
            kind: Some(KIND_EDGE_GRAPH.into()),
            alphabet: None,
            states: aut.states.clone(),
            edges: aut
                .edges
                .iter()
                .zip(kinds)
                .map(|(e, k)| EdgeDoc {
                    from: aut.states[e.source].clone(),
                    label: None,
                    kind: Some(k),
                    to: aut.states[e.target].clone(),
                })
                .collect(),
            matched: aut.matched.iter().copied().collect(),
            blockmap: None,
        }
    }

    pub fn from_block_map(map: &BlockMapSpec) -> Self {
        Document {
            blockmap: Some(BlockMapDoc {
                m: map.memory,
                a: map.anticipation,
                proper: map.proper,
                target: map.target.clone(),
                table: map.table.iter().map(|(w, s)| (w.clone(), s.clone())).collect(),
            }),
            ..Document::default()
        }
    }

    pub fn to_text(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents always serialize");
        text.push('\n');
        text
    }
}

pub fn parse_automaton(text: &str) -> Result<DyckAutomaton> {
    parse_document(text)?.to_automaton()
}

pub fn parse_graph(text: &str) -> Result<DyckGraph> {
    parse_document(text)?.to_graph()
}

pub fn parse_block_map(text: &str) -> Result<BlockMapSpec> {
    parse_document(text)?.to_block_map()
}

pub fn serialize_automaton(aut: &DyckAutomaton) -> String {
    Document::from_automaton(aut).to_text()
}

pub fn serialize_graph(g: &DyckGraph) -> String {
    Document::from_graph(g).to_text()
}

pub fn serialize_block_map(map: &BlockMapSpec) -> String {
    Document::from_block_map(map).to_text()
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT rendering: calls blue, returns red and dashed, internal edges black.
/// Matched pairs are listed in a comment block.
pub fn export_dot(aut: &DyckAutomaton) -> String {
    let mut out = String::from("digraph dyck {\n");
    let edge_kinds = aut.edge_kinds();
    if !aut.matched.is_empty() {
        out.push_str("  // matched pairs (call edge, return edge)\n");
        for &(c, r) in &aut.matched {
            let _ = writeln!(out, "  //   e{c} with e{r}");
        }
    }
    for s in &aut.states {
        let _ = writeln!(out, "  {};", dot_id(s));
    }
    for (i, e) in aut.edges.iter().enumerate() {
        let style = match edge_kinds[i] {
            Some(Kind::Call) => "color=blue",
            Some(Kind::Return) => "color=red, style=dashed",
            Some(Kind::Internal) | None => "color=black",
        };
        let _ = writeln!(
            out,
            "  {} -> {} [label={}, {style}, id=\"e{i}\"];",
            dot_id(&aut.states[e.source]),
            dot_id(&aut.states[e.target]),
            dot_id(&e.label)
        );
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const FD1: &str = r#"{
  "alphabet": {
    "call": [
      "a"
    ],
    "return": [
      "c"
    ],
    "internal": [
      "i"
    ]
  },
  "states": [
    "p"
  ],
  "edges": [
    {
      "from": "p",
      "label": "a",
      "to": "p"
    },
    {
      "from": "p",
      "label": "c",
      "to": "p"
    },
    {
      "from": "p",
      "label": "i",
      "to": "p"
    }
  ],
  "matched": [
    [
      0,
      1
    ]
  ]
}
"#;

    #[test]
    fn round_trip_is_byte_identical() {
        let aut = parse_automaton(FD1).unwrap();
        assert_eq!(aut, DyckAutomaton::full_dyck(TriAlphabet::new(["a"], ["c"], ["i"])));
        assert_eq!(serialize_automaton(&aut), FD1);
    }

    #[test]
    fn matched_internal_edge_is_rejected() {
        let bad = FD1.replace("[\n      0,\n      1\n    ]", "[\n      2,\n      1\n    ]");
        assert!(matches!(parse_automaton(&bad), Err(Error::Invalid(_))));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_automaton("{\n  \"states\": [1,\n") {
            Err(Error::Parse(msg)) => assert!(msg.starts_with("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn graph_documents_use_edge_types() {
        let text = r#"{"kind": "edge-graph", "states": ["p", "q"],
            "edges": [{"from": "p", "type": "call", "to": "q"}, {"from": "q", "type": "return", "to": "p"}],
            "matched": [[0, 1]]}"#;
        let g = parse_graph(text).unwrap();
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.kinds(), vec![Kind::Call, Kind::Return]);
        let again = parse_graph(&serialize_graph(&g)).unwrap();
        assert_eq!(again, g);
    }

    #[test]
    fn block_map_round_trip() {
        let mut map = BlockMapSpec::new(1, 0, TriAlphabet::new(["x"], ["y"], Vec::<&str>::new()));
        map.table.insert(vec!["a".into(), "c".into()], "y".into());
        let back = parse_block_map(&serialize_block_map(&map)).unwrap();
        assert_eq!(back, map);
    }

    #[test]
    fn dot_output() {
        let dot = export_dot(&parse_automaton(FD1).unwrap());
        assert_eq!(dot.matches(" -> ").count(), 3);
        assert!(dot.contains("color=blue") && dot.contains("style=dashed"));
        let empty = export_dot(&DyckAutomaton::new(TriAlphabet::default()));
        assert_eq!(empty, "digraph dyck {\n}\n");
    }
}

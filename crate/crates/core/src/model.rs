//! Typed alphabets, Dyck automata, Dyck graphs, block-map tables and
//! partitions.
//!
//! States and edges are addressed by dense indices. States carry printable
//! names so that constructed automata stay diffable; matched pairs are stored
//! as `(call edge, return edge)` index pairs, which keeps them unambiguous in
//! the presence of parallel edges.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = String;
pub type Word = Vec<Symbol>;

/// The type of a symbol (and of an edge carrying it).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Call,
    Return,
    Internal,
}

impl Kind {
    pub const ALL: [Kind; 3] = [Kind::Call, Kind::Return, Kind::Internal];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Call => "call",
            Kind::Return => "return",
            Kind::Internal => "internal",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An alphabet split into call, return and internal symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriAlphabet {
    pub call: Vec<Symbol>,
    #[serde(rename = "return")]
    pub ret: Vec<Symbol>,
    pub internal: Vec<Symbol>,
}

impl TriAlphabet {
    pub fn new<S: Into<Symbol>>(
        call: impl IntoIterator<Item = S>,
        ret: impl IntoIterator<Item = S>,
        internal: impl IntoIterator<Item = S>,
    ) -> Self {
        TriAlphabet {
            call: call.into_iter().map(Into::into).collect(),
            ret: ret.into_iter().map(Into::into).collect(),
            internal: internal.into_iter().map(Into::into).collect(),
        }
    }

    pub fn part(&self, kind: Kind) -> &[Symbol] {
        match kind {
            Kind::Call => &self.call,
            Kind::Return => &self.ret,
            Kind::Internal => &self.internal,
        }
    }

    pub fn part_mut(&mut self, kind: Kind) -> &mut Vec<Symbol> {
        match kind {
            Kind::Call => &mut self.call,
            Kind::Return => &mut self.ret,
            Kind::Internal => &mut self.internal,
        }
    }

    pub fn kind_of(&self, symbol: &str) -> Option<Kind> {
        Kind::ALL
            .into_iter()
            .find(|&k| self.part(k).iter().any(|s| s == symbol))
    }

    /// All symbols: calls, then returns, then internals.
    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.call.iter().chain(&self.ret).chain(&self.internal)
    }

    pub fn len(&self) -> usize {
        self.call.len() + self.ret.len() + self.internal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Symbol-to-kind lookup table.
    pub fn kind_table(&self) -> HashMap<&str, Kind> {
        let mut table = HashMap::new();
        for kind in Kind::ALL {
            for s in self.part(kind) {
                table.insert(s.as_str(), kind);
            }
        }
        table
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut seen: HashMap<&str, Kind> = HashMap::new();
        for kind in Kind::ALL {
            for s in self.part(kind) {
                if let Some(prev) = seen.insert(s, kind) {
                    out.push(Violation::SymbolNotDisjoint {
                        symbol: s.clone(),
                        first: prev,
                        second: kind,
                    });
                }
            }
        }
        if self.is_empty() {
            out.push(Violation::EmptyAlphabet);
        }
        out
    }

    /// All words of length `n` over the alphabet, in lexicographic order of
    /// symbol positions.
    pub fn words(&self, n: usize) -> Vec<Word> {
        let symbols: Vec<&Symbol> = self.symbols().collect();
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::with_capacity(out.len() * symbols.len());
            for w in &out {
                for s in &symbols {
                    let mut w2: Word = w.clone();
                    w2.push((*s).clone());
                    next.push(w2);
                }
            }
            out = next;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub source: usize,
    pub label: Symbol,
    pub target: usize,
}

/// A structural problem found by [`DyckAutomaton::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EmptyAlphabet,
    SymbolNotDisjoint { symbol: Symbol, first: Kind, second: Kind },
    DuplicateState(String),
    DanglingSource { edge: usize, state: usize },
    DanglingTarget { edge: usize, state: usize },
    UnknownLabel { edge: usize, label: Symbol },
    MatchedEdgeOutOfRange { pair: (usize, usize) },
    MatchedNotCallReturn { pair: (usize, usize) },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAlphabet => write!(f, "alphabet has no symbols"),
            Violation::SymbolNotDisjoint { symbol, first, second } => {
                write!(f, "symbol `{symbol}` is both {first} and {second}")
            }
            Violation::DuplicateState(s) => write!(f, "duplicate state `{s}`"),
            Violation::DanglingSource { edge, state } => {
                write!(f, "edge {edge}: unknown source state {state}")
            }
            Violation::DanglingTarget { edge, state } => {
                write!(f, "edge {edge}: unknown target state {state}")
            }
            Violation::UnknownLabel { edge, label } => {
                write!(f, "edge {edge}: label `{label}` not in alphabet")
            }
            Violation::MatchedEdgeOutOfRange { pair } => {
                write!(f, "matched pair {pair:?} references a missing edge")
            }
            Violation::MatchedNotCallReturn { pair } => {
                write!(f, "matched pair {pair:?} must join call to return")
            }
        }
    }
}

/// A labelled graph over a [`TriAlphabet`] together with its matched pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DyckAutomaton {
    pub alphabet: TriAlphabet,
    pub states: Vec<String>,
    pub edges: Vec<Edge>,
    pub matched: BTreeSet<(usize, usize)>,
}

impl DyckAutomaton {
    pub fn new(alphabet: TriAlphabet) -> Self {
        DyckAutomaton {
            alphabet,
            ..Default::default()
        }
    }

    /// The one-state automaton with a loop per symbol and every call loop
    /// matched with every return loop.
    pub fn full_dyck(alphabet: TriAlphabet) -> Self {
        let mut aut = DyckAutomaton::new(alphabet.clone());
        let p = aut.add_state("p");
        for s in alphabet.symbols() {
            aut.add_edge(p, s.clone(), p);
        }
        aut.match_all_calls_with_returns();
        aut
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> usize {
        self.states.push(name.into());
        self.states.len() - 1
    }

    pub fn add_edge(&mut self, source: usize, label: impl Into<Symbol>, target: usize) -> usize {
        self.edges.push(Edge {
            source,
            label: label.into(),
            target,
        });
        self.edges.len() - 1
    }

    pub fn add_matched(&mut self, call: usize, ret: usize) {
        self.matched.insert((call, ret));
    }

    pub fn match_all_calls_with_returns(&mut self) {
        let kinds = self.edge_kinds();
        for c in 0..self.edges.len() {
            for r in 0..self.edges.len() {
                if kinds[c] == Some(Kind::Call) && kinds[r] == Some(Kind::Return) {
                    self.matched.insert((c, r));
                }
            }
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub fn state(&self, name: &str) -> Result<usize> {
        self.state_index(name)
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn edge_kinds(&self) -> Vec<Option<Kind>> {
        let table = self.alphabet.kind_table();
        self.edges
            .iter()
            .map(|e| table.get(e.label.as_str()).copied())
            .collect()
    }

    /// Edge kinds, assuming the automaton is valid.
    pub fn kinds(&self) -> Vec<Kind> {
        self.edge_kinds()
            .into_iter()
            .map(|k| k.unwrap_or(Kind::Internal))
            .collect()
    }

    pub fn kind(&self, edge: usize) -> Option<Kind> {
        self.alphabet.kind_of(&self.edges[edge].label)
    }

    pub fn is_matched(&self, call: usize, ret: usize) -> bool {
        self.matched.contains(&(call, ret))
    }

    pub fn out_edges(&self, p: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].source == p).collect()
    }

    pub fn in_edges(&self, p: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].target == p).collect()
    }

    pub fn adjacency(&self) -> Adjacency {
        let mut out = vec![Vec::new(); self.states.len()];
        let mut inn = vec![Vec::new(); self.states.len()];
        for (i, e) in self.edges.iter().enumerate() {
            if e.source < out.len() {
                out[e.source].push(i);
            }
            if e.target < inn.len() {
                inn[e.target].push(i);
            }
        }
        Adjacency { out, inn }
    }

    pub fn labels(&self, path: &[usize]) -> Word {
        path.iter().map(|&e| self.edges[e].label.clone()).collect()
    }

    pub fn is_connected_path(&self, path: &[usize]) -> bool {
        path.windows(2)
            .all(|w| self.edges[w[0]].target == self.edges[w[1]].source)
    }

    pub fn check_path(&self, path: &[usize]) -> Result<()> {
        match path.iter().find(|&&e| e >= self.edges.len()) {
            Some(&e) => Err(Error::InvalidEdge(e)),
            None => Ok(()),
        }
    }

    pub fn check_word(&self, word: &[Symbol]) -> Result<()> {
        let table = self.alphabet.kind_table();
        match word.iter().find(|s| !table.contains_key(s.as_str())) {
            Some(s) => Err(Error::UnknownSymbol(s.clone())),
            None => Ok(()),
        }
    }

    /// Structural violations; empty iff the automaton is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.alphabet.violations();
        let mut names = BTreeSet::new();
        for s in &self.states {
            if !names.insert(s) {
                out.push(Violation::DuplicateState(s.clone()));
            }
        }
        let table = self.alphabet.kind_table();
        let n = self.states.len();
        for (i, e) in self.edges.iter().enumerate() {
            if e.source >= n {
                out.push(Violation::DanglingSource {
                    edge: i,
                    state: e.source,
                });
            }
            if e.target >= n {
                out.push(Violation::DanglingTarget {
                    edge: i,
                    state: e.target,
                });
            }
            if !table.contains_key(e.label.as_str()) {
                out.push(Violation::UnknownLabel {
                    edge: i,
                    label: e.label.clone(),
                });
            }
        }
        let kinds = self.edge_kinds();
        for &(c, r) in &self.matched {
            if c >= self.edges.len() || r >= self.edges.len() {
                out.push(Violation::MatchedEdgeOutOfRange { pair: (c, r) });
            } else if kinds[c] != Some(Kind::Call) || kinds[r] != Some(Kind::Return) {
                out.push(Violation::MatchedNotCallReturn { pair: (c, r) });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(
                v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
            ))
        }
    }

    /// True when there is at most one edge between any ordered pair of states.
    pub fn has_unique_edges(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges.iter().all(|e| seen.insert((e.source, e.target)))
    }

    /// Rebuilds the automaton so that each ordered pair of states carries at
    /// most one edge. States become `(p,e)` for `e` an edge entering `p`;
    /// states without incoming edges keep a start copy `(p,-)` so that every
    /// finite path still has an image.
    pub fn edge_uniquify(&self) -> DyckAutomaton {
        if self.has_unique_edges() {
            return self.clone();
        }
        let adj = self.adjacency();
        let mut out = DyckAutomaton::new(self.alphabet.clone());
        // copies[p] = (incoming edge or None, new state)
        let mut copies: Vec<Vec<(Option<usize>, usize)>> = vec![Vec::new(); self.states.len()];
        for (p, name) in self.states.iter().enumerate() {
            if adj.inn[p].is_empty() {
                let s = out.add_state(format!("({name},-)"));
                copies[p].push((None, s));
            }
            for &e in &adj.inn[p] {
                let s = out.add_state(format!("({name},{e})"));
                copies[p].push((Some(e), s));
            }
        }
        let mut origin = Vec::new();
        for (f, edge) in self.edges.iter().enumerate() {
            let target = copies[edge.target]
                .iter()
                .find(|(e, _)| *e == Some(f))
                .map(|&(_, s)| s)
                .expect("every edge has a target copy");
            for &(_, source) in &copies[edge.source] {
                out.add_edge(source, edge.label.clone(), target);
                origin.push(f);
            }
        }
        for (i, &fi) in origin.iter().enumerate() {
            for (j, &fj) in origin.iter().enumerate() {
                if self.is_matched(fi, fj) {
                    out.matched.insert((i, j));
                }
            }
        }
        out
    }

    /// A copy with the given subset of edges and matched pairs, dropping states
    /// that no longer touch any edge. Returns the automaton with maps
    /// new-state -> old-state and new-edge -> old-edge.
    pub fn restrict(
        &self,
        keep_edge: impl Fn(usize) -> bool,
        keep_pair: impl Fn(usize, usize) -> bool,
        drop_isolated: bool,
    ) -> (DyckAutomaton, Vec<usize>, Vec<usize>) {
        let kept: Vec<usize> = (0..self.edges.len()).filter(|&e| keep_edge(e)).collect();
        let mut used = vec![!drop_isolated; self.states.len()];
        for &e in &kept {
            used[self.edges[e].source] = true;
            used[self.edges[e].target] = true;
        }
        let mut out = DyckAutomaton::new(self.alphabet.clone());
        let mut state_map = Vec::new();
        let mut new_index = vec![usize::MAX; self.states.len()];
        for (p, name) in self.states.iter().enumerate() {
            if used[p] {
                new_index[p] = out.add_state(name.clone());
                state_map.push(p);
            }
        }
        let mut edge_index = vec![usize::MAX; self.edges.len()];
        for &e in &kept {
            let edge = &self.edges[e];
            edge_index[e] = out.add_edge(new_index[edge.source], edge.label.clone(), new_index[edge.target]);
        }
        for &(c, r) in &self.matched {
            if edge_index[c] != usize::MAX && edge_index[r] != usize::MAX && keep_pair(c, r) {
                out.matched.insert((edge_index[c], edge_index[r]));
            }
        }
        (out, state_map, kept)
    }

    /// Order-independent description: edges as `(source name, label, target
    /// name)` with multiplicity and matched pairs as pairs of such triples.
    pub fn canonical(&self) -> CanonicalForm {
        let triple = |e: usize| {
            let edge = &self.edges[e];
            (
                self.states[edge.source].clone(),
                edge.label.clone(),
                self.states[edge.target].clone(),
            )
        };
        let mut edges: BTreeMap<(String, Symbol, String), usize> = BTreeMap::new();
        for e in 0..self.edges.len() {
            *edges.entry(triple(e)).or_default() += 1;
        }
        let mut matched: BTreeMap<_, usize> = BTreeMap::new();
        for &(c, r) in &self.matched {
            *matched.entry((triple(c), triple(r))).or_default() += 1;
        }
        CanonicalForm {
            states: self.states.iter().cloned().collect(),
            edges,
            matched,
        }
    }
}

type Triple = (String, Symbol, String);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub states: BTreeSet<String>,
    pub edges: BTreeMap<Triple, usize>,
    pub matched: BTreeMap<(Triple, Triple), usize>,
}

#[derive(Clone, Debug)]
pub struct Adjacency {
    pub out: Vec<Vec<usize>>,
    pub inn: Vec<Vec<usize>>,
}

/// A Dyck automaton whose edges are labelled by themselves.
///
/// Edge `i` carries the label `"i"`; the alphabet lists the call, return and
/// internal edge labels. Paths of the graph are the words of its edge-Dyck
/// shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyckGraph {
    aut: DyckAutomaton,
}

impl DyckGraph {
    pub fn new(
        states: Vec<String>,
        edges: &[(usize, Kind, usize)],
        matched: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut aut = DyckAutomaton::new(TriAlphabet::default());
        aut.states = states;
        for (i, &(s, k, t)) in edges.iter().enumerate() {
            aut.alphabet.part_mut(k).push(i.to_string());
            aut.add_edge(s, i.to_string(), t);
        }
        aut.matched = matched.into_iter().collect();
        DyckGraph { aut }
    }

    /// Relabels every edge of `aut` by its own index, keeping edge kinds.
    pub fn from_automaton(aut: &DyckAutomaton) -> Self {
        let kinds = aut.kinds();
        let edges: Vec<(usize, Kind, usize)> = aut
            .edges
            .iter()
            .zip(&kinds)
            .map(|(e, &k)| (e.source, k, e.target))
            .collect();
        DyckGraph::new(aut.states.clone(), &edges, aut.matched.iter().copied())
    }

    /// Checks that `aut` already has the self-labelled shape.
    pub fn try_from_automaton(aut: DyckAutomaton) -> Result<Self> {
        aut.ensure_valid()?;
        for (i, e) in aut.edges.iter().enumerate() {
            if e.label != i.to_string() {
                return Err(Error::Invalid(format!(
                    "edge {i} is labelled `{}` instead of `{i}`",
                    e.label
                )));
            }
        }
        if aut.alphabet.len() != aut.edges.len() {
            return Err(Error::Invalid(
                "edge-graph alphabet must list exactly the edge labels".into(),
            ));
        }
        Ok(DyckGraph { aut })
    }

    pub fn automaton(&self) -> &DyckAutomaton {
        &self.aut
    }

    pub fn into_automaton(self) -> DyckAutomaton {
        self.aut
    }

    /// The same graph with edges labelled by their kind (`c`, `r`, `i`).
    /// Surgery compares edges by kind and endpoints, which this view exposes.
    pub fn kind_automaton(&self) -> DyckAutomaton {
        let kinds = self.aut.kinds();
        let mut out = DyckAutomaton::new(kind_alphabet());
        out.states = self.aut.states.clone();
        for (e, k) in self.aut.edges.iter().zip(kinds) {
            out.add_edge(e.source, kind_symbol(k), e.target);
        }
        out.matched = self.aut.matched.clone();
        out
    }

    pub fn num_states(&self) -> usize {
        self.aut.num_states()
    }

    pub fn num_edges(&self) -> usize {
        self.aut.num_edges()
    }

    pub fn kinds(&self) -> Vec<Kind> {
        self.aut.kinds()
    }

    pub fn source(&self, e: usize) -> usize {
        self.aut.edges[e].source
    }

    pub fn target(&self, e: usize) -> usize {
        self.aut.edges[e].target
    }
}

pub fn kind_alphabet() -> TriAlphabet {
    TriAlphabet::new(["c"], ["r"], ["i"])
}

pub fn kind_symbol(kind: Kind) -> &'static str {
    match kind {
        Kind::Call => "c",
        Kind::Return => "r",
        Kind::Internal => "i",
    }
}

/// A sliding-window map: output symbol for every source word of length
/// `memory + anticipation + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockMapSpec {
    pub memory: usize,
    pub anticipation: usize,
    pub table: BTreeMap<Word, Symbol>,
    pub target: TriAlphabet,
    pub proper: bool,
}

impl BlockMapSpec {
    pub fn new(memory: usize, anticipation: usize, target: TriAlphabet) -> Self {
        BlockMapSpec {
            memory,
            anticipation,
            table: BTreeMap::new(),
            target,
            proper: true,
        }
    }

    pub fn window(&self) -> usize {
        self.memory + self.anticipation + 1
    }

    pub fn get(&self, window: &[Symbol]) -> Option<&Symbol> {
        self.table.get(window)
    }

    /// Image of a finite word: one output symbol per full window.
    pub fn apply(&self, word: &[Symbol]) -> Result<Word> {
        let k = self.window();
        if word.len() < k {
            return Err(Error::WordTooShort {
                len: word.len(),
                window: k,
            });
        }
        word.windows(k)
            .map(|w| {
                self.table
                    .get(w)
                    .cloned()
                    .ok_or_else(|| Error::BlockMap(format!("no entry for window {w:?}")))
            })
            .collect()
    }

    /// Entries that break the window length or, for proper maps, the
    /// type of the centre symbol.
    pub fn violations(&self, source: &TriAlphabet) -> Vec<String> {
        let mut out = Vec::new();
        let src = source.kind_table();
        let tgt = self.target.kind_table();
        for (w, out_sym) in &self.table {
            if w.len() != self.window() {
                out.push(format!(
                    "window {w:?} has length {} (expected {})",
                    w.len(),
                    self.window()
                ));
                continue;
            }
            let Some(&ok) = tgt.get(out_sym.as_str()) else {
                out.push(format!("output `{out_sym}` not in target alphabet"));
                continue;
            };
            match src.get(w[self.memory].as_str()) {
                None => out.push(format!("window {w:?} uses a symbol outside the source alphabet")),
                Some(&ik) if self.proper && ik != ok => {
                    out.push(format!("window {w:?}: centre is {ik} but output `{out_sym}` is {ok}"))
                }
                _ => {}
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    In,
    Out,
}

/// A partition of the incoming (or outgoing) edges of one state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub state: usize,
    pub classes: Vec<Vec<usize>>,
    pub side: Side,
}

impl Partition {
    pub fn new(state: usize, classes: Vec<Vec<usize>>, side: Side) -> Self {
        Partition { state, classes, side }
    }

    /// Each edge in its own class.
    pub fn complete(aut: &DyckAutomaton, state: usize, side: Side) -> Self {
        let edges = match side {
            Side::In => aut.in_edges(state),
            Side::Out => aut.out_edges(state),
        };
        Partition::new(state, edges.into_iter().map(|e| vec![e]).collect(), side)
    }

    pub fn check(&self, aut: &DyckAutomaton) -> Result<()> {
        if self.state >= aut.num_states() {
            return Err(Error::InvalidState(self.state));
        }
        let expected: BTreeSet<usize> = match self.side {
            Side::In => aut.in_edges(self.state),
            Side::Out => aut.out_edges(self.state),
        }
        .into_iter()
        .collect();
        let mut seen = BTreeSet::new();
        for class in &self.classes {
            if class.is_empty() {
                return Err(Error::InvalidPartition("empty class".into()));
            }
            for &e in class {
                if !expected.contains(&e) {
                    return Err(Error::InvalidPartition(format!(
                        "edge {e} is not an {} edge of state `{}`",
                        if self.side == Side::In { "incoming" } else { "outgoing" },
                        aut.states[self.state]
                    )));
                }
                if !seen.insert(e) {
                    return Err(Error::InvalidPartition(format!("edge {e} appears twice")));
                }
            }
        }
        if seen != expected {
            let missing: Vec<_> = expected.difference(&seen).collect();
            return Err(Error::InvalidPartition(format!("edges {missing:?} are not covered")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn fd1() -> DyckAutomaton {
        DyckAutomaton::full_dyck(TriAlphabet::new(["a"], ["c"], ["i"]))
    }

    #[test]
    fn fd1_is_valid() {
        let a = fd1();
        assert!(a.validate().is_empty());
        assert_eq!(a.matched.len(), 1);
        assert!(a.is_matched(0, 1));
    }

    #[test]
    fn matched_pair_must_join_call_to_return() {
        let mut a = fd1();
        a.matched = [(2, 1)].into_iter().collect();
        let v = a.validate();
        assert_eq!(v, vec![Violation::MatchedNotCallReturn { pair: (2, 1) }]);
        assert!(v[0].to_string().contains("must join call to return"));
    }

    #[test]
    fn dangling_target_is_reported() {
        let mut a = fd1();
        a.add_edge(0, "i", 7);
        assert_eq!(a.validate(), vec![Violation::DanglingTarget { edge: 3, state: 7 }]);
    }

    #[test]
    fn overlapping_alphabet_parts() {
        let alpha = TriAlphabet::new(["a"], ["a"], Vec::<&str>::new());
        assert_eq!(alpha.violations().len(), 1);
    }

    #[test]
    fn uniquify_leaves_simple_graphs_alone() {
        let mut a = DyckAutomaton::new(TriAlphabet::new(["a"], ["c"], ["i"]));
        let p = a.add_state("p");
        let q = a.add_state("q");
        a.add_edge(p, "a", q);
        a.add_edge(q, "c", p);
        assert_eq!(a.edge_uniquify(), a);
    }

    #[test]
    fn uniquify_fd1_has_three_states() {
        let u = fd1().edge_uniquify();
        assert_eq!(u.num_states(), 3);
        assert!(u.has_unique_edges());
        assert!(u.validate().is_empty());
    }

    #[test]
    fn partition_checks() {
        let a = fd1();
        assert!(Partition::complete(&a, 0, Side::In).check(&a).is_ok());
        assert!(Partition::new(0, vec![vec![0, 1]], Side::In).check(&a).is_err());
        assert!(Partition::new(0, vec![vec![0, 1], vec![1, 2]], Side::In)
            .check(&a)
            .is_err());
        assert!(Partition::new(0, vec![vec![0, 1], vec![]], Side::In).check(&a).is_err());
    }

    #[test]
    fn graph_labels_are_indices() {
        let g = DyckGraph::from_automaton(&fd1());
        assert_eq!(g.automaton().alphabet.call, vec!["0".to_string()]);
        assert_eq!(g.automaton().edges[2].label, "2");
        assert!(DyckGraph::try_from_automaton(g.automaton().clone()).is_ok());
        assert!(DyckGraph::try_from_automaton(fd1()).is_err());
    }

    #[test]
    fn block_map_properness() {
        let src = TriAlphabet::new(["a"], ["c"], ["i"]);
        let mut f = BlockMapSpec::new(0, 0, src.clone());
        f.table.insert(vec!["a".into()], "a".into());
        f.table.insert(vec!["c".into()], "i".into());
        assert_eq!(f.violations(&src).len(), 1);
        f.proper = false;
        assert!(f.violations(&src).is_empty());
        assert_eq!(f.apply(&["a".to_string(), "c".to_string()]).unwrap(), vec!["a", "i"]);
    }
}

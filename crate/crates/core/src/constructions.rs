//! Automaton constructions: products, De Bruijn automata, edge and
//! higher-block presentations, images under proper block maps, and the edge
//! Dyck graph of a local automaton.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::language::admissible_words;
use crate::locality::{forced_states, is_local, is_weak_local};
use crate::model::{BlockMapSpec, DyckAutomaton, DyckGraph, Kind, Symbol, TriAlphabet, Word};
use crate::path::admissible_paths;

/// Joins symbols into one name: concatenated when every symbol is a single
/// character, dot separated otherwise.
pub fn join_symbols(symbols: &[Symbol]) -> String {
    if symbols.iter().all(|s| s.chars().count() == 1) {
        symbols.concat()
    } else {
        symbols.join(".")
    }
}

pub fn pair_symbol(x: &str, y: &str) -> Symbol {
    format!("({x},{y})")
}

/// Product automaton over the alphabet of same-type symbol pairs.
pub fn product(a1: &DyckAutomaton, a2: &DyckAutomaton) -> DyckAutomaton {
    let mut alphabet = TriAlphabet::default();
    for kind in Kind::ALL {
        for x in a1.alphabet.part(kind) {
            for y in a2.alphabet.part(kind) {
                alphabet.part_mut(kind).push(pair_symbol(x, y));
            }
        }
    }
    let mut out = DyckAutomaton::new(alphabet);
    let n2 = a2.num_states();
    for p in &a1.states {
        for q in &a2.states {
            out.add_state(format!("({p},{q})"));
        }
    }
    let k1 = a1.edge_kinds();
    let k2 = a2.edge_kinds();
    let mut pairs = Vec::new();
    for (i, e) in a1.edges.iter().enumerate() {
        for (j, f) in a2.edges.iter().enumerate() {
            if k1[i].is_some() && k1[i] == k2[j] {
                out.add_edge(
                    e.source * n2 + f.source,
                    pair_symbol(&e.label, &f.label),
                    e.target * n2 + f.target,
                );
                pairs.push((i, j));
            }
        }
    }
    for (x, &(c1, c2)) in pairs.iter().enumerate() {
        for (y, &(r1, r2)) in pairs.iter().enumerate() {
            if a1.is_matched(c1, r1) && a2.is_matched(c2, r2) {
                out.matched.insert((x, y));
            }
        }
    }
    out
}

/// Product restricted to equal labels, relabelled by the shared symbol. Its
/// admissible words are the common admissible words of both automata.
pub fn diagonal_product(a1: &DyckAutomaton, a2: &DyckAutomaton) -> Result<DyckAutomaton> {
    if a1.alphabet != a2.alphabet {
        return Err(Error::Precondition("diagonal product needs a shared alphabet".into()));
    }
    let full = product(a1, a2);
    let (mut out, _, _) = full.restrict(
        |e| {
            let label = &full.edges[e].label;
            let inner = &label[1..label.len() - 1];
            a1.alphabet.symbols().any(|s| inner == format!("{s},{s}"))
        },
        |_, _| true,
        false,
    );
    let back: HashMap<Symbol, Symbol> = a1.alphabet.symbols().map(|s| (pair_symbol(s, s), s.clone())).collect();
    for e in &mut out.edges {
        e.label = back[&e.label].clone();
    }
    out.alphabet = a1.alphabet.clone();
    Ok(out)
}

/// The `(m,a)` De Bruijn automaton together with the window of each edge: the
/// `m` letters before it, its own label and the `a` letters after it.
pub fn de_bruijn_windows(alphabet: &TriAlphabet, m: usize, a: usize) -> (DyckAutomaton, Vec<Word>) {
    let mut out = DyckAutomaton::new(alphabet.clone());
    let pasts = alphabet.words(m);
    let nexts = alphabet.words(a);
    let mut index: HashMap<(Word, Word), usize> = HashMap::new();
    for p in &pasts {
        for n in &nexts {
            let s = out.add_state(format!("{}|{}", join_symbols(p), join_symbols(n)));
            index.insert((p.clone(), n.clone()), s);
        }
    }
    let mut windows = Vec::new();
    for p in &pasts {
        for n in &nexts {
            let source = index[&(p.clone(), n.clone())];
            // with a > 0 the label is already fixed by `n` and `c` is the new
            // lookahead letter; with a = 0 `c` is the label itself
            for c in alphabet.symbols() {
                let window: Word = p.iter().chain(n).chain([c]).cloned().collect();
                let label = &window[m];
                let past: Word = window[1..=m].to_vec();
                let next: Word = window[m + 1..].to_vec();
                let target = index[&(past, next)];
                out.add_edge(source, label.clone(), target);
                windows.push(window);
            }
        }
    }
    out.match_all_calls_with_returns();
    (out, windows)
}

pub fn de_bruijn(alphabet: &TriAlphabet, m: usize, a: usize) -> DyckAutomaton {
    de_bruijn_windows(alphabet, m, a).0
}

/// Symbols naming the edges of `aut`: `(p,a,q)`, with a `#k` suffix on
/// repeated triples.
pub fn edge_symbols(aut: &DyckAutomaton) -> Vec<Symbol> {
    let mut seen: HashMap<String, usize> = HashMap::new();
    aut.edges
        .iter()
        .map(|e| {
            let base = format!("({},{},{})", aut.states[e.source], e.label, aut.states[e.target]);
            let count = seen.entry(base.clone()).or_default();
            *count += 1;
            if *count == 1 {
                base
            } else {
                format!("{base}#{count}")
            }
        })
        .collect()
}

/// The same graph with every edge labelled by its own symbol, and the
/// `(0,0)` projection back to the original labels.
pub fn edge_presentation(aut: &DyckAutomaton) -> (DyckAutomaton, BlockMapSpec) {
    let names = edge_symbols(aut);
    let kinds = aut.kinds();
    let mut alphabet = TriAlphabet::default();
    for (name, &k) in names.iter().zip(&kinds) {
        alphabet.part_mut(k).push(name.clone());
    }
    let mut out = DyckAutomaton::new(alphabet);
    out.states = aut.states.clone();
    let mut proj = BlockMapSpec::new(0, 0, aut.alphabet.clone());
    for (e, name) in aut.edges.iter().zip(&names) {
        out.add_edge(e.source, name.clone(), e.target);
        proj.table.insert(vec![name.clone()], e.label.clone());
    }
    out.matched = aut.matched.clone();
    (out, proj)
}

fn path_name(path: &[usize]) -> String {
    let labels: Vec<String> = path.iter().map(|e| e.to_string()).collect();
    format!("[{}]", labels.join(","))
}

/// States are the admissible paths of length `len` (the states themselves when
/// `len = 0`); edges are the admissible paths of length `len + 1`, joining
/// their prefix to their suffix. `centre` picks the position whose edge
/// supplies the label kind and the matching.
fn path_automaton(
    aut: &DyckAutomaton,
    len: usize,
    label: impl Fn(&[usize]) -> Symbol,
    centre: usize,
    alphabet: TriAlphabet,
) -> (DyckAutomaton, Vec<usize>) {
    let mut out = DyckAutomaton::new(alphabet);
    let mut state_of: HashMap<Vec<usize>, usize> = HashMap::new();
    if len == 0 {
        for (p, name) in aut.states.iter().enumerate() {
            out.add_state(name.clone());
            state_of.insert(vec![p], p);
        }
    } else {
        for path in admissible_paths(aut, len) {
            let s = out.add_state(path_name(&path));
            state_of.insert(path, s);
        }
    }
    let key = |path: &[usize], last: bool| -> Vec<usize> {
        if len == 0 {
            let e = &aut.edges[path[0]];
            vec![if last { e.target } else { e.source }]
        } else if last {
            path[1..].to_vec()
        } else {
            path[..len].to_vec()
        }
    };
    let mut centres = Vec::new();
    for path in admissible_paths(aut, len + 1) {
        let (Some(&s), Some(&t)) = (state_of.get(&key(&path, false)), state_of.get(&key(&path, true))) else {
            continue;
        };
        out.add_edge(s, label(&path), t);
        centres.push(path[centre]);
    }
    for (i, &c) in centres.iter().enumerate() {
        for (j, &r) in centres.iter().enumerate() {
            if aut.is_matched(c, r) {
                out.matched.insert((i, j));
            }
        }
    }
    (out, centres)
}

/// Local presentation of a weak-local automaton: states are admissible paths
/// of length `m+a`, and each admissible path of length `m+a+1` becomes an edge
/// carrying the label and matching of its edge at offset `m`.
pub fn weak_local_to_local(aut: &DyckAutomaton, m: usize, a: usize) -> Result<DyckAutomaton> {
    if !is_weak_local(aut, m, a) {
        return Err(Error::Precondition(format!("automaton is not ({m},{a})-weak-local")));
    }
    let (out, _) = path_automaton(aut, m + a, |p| aut.edges[p[m]].label.clone(), m, aut.alphabet.clone());
    Ok(out)
}

/// Presentation of the order-`n` higher-block shift. An `n`-block symbol has
/// the type of its first letter; matching is read on first edges.
pub fn higher_block_automaton(aut: &DyckAutomaton, n: usize) -> Result<DyckAutomaton> {
    if n == 0 {
        return Err(Error::Precondition("block length must be at least 1".into()));
    }
    let mut alphabet = TriAlphabet::default();
    for (len, words) in admissible_words(aut, n) {
        if len != n {
            continue;
        }
        for w in words {
            let kind = aut.alphabet.kind_of(&w[0]).expect("admissible words are typed");
            alphabet.part_mut(kind).push(join_symbols(&w));
        }
    }
    let (out, _) = path_automaton(aut, n - 1, |p| join_symbols(&aut.labels(p)), 0, alphabet);
    Ok(out)
}

/// Presentation of the image of the shift of `aut` under a proper block map.
///
/// The transducer has one state per `(p, past letters, next letters)` seen on
/// an admissible window and one edge per admissible path of length `m+a+1`,
/// labelled by the image of its label; its matching is that of the centre
/// edges. Dropping the input component leaves the returned automaton.
pub fn image_automaton(aut: &DyckAutomaton, f: &BlockMapSpec) -> Result<DyckAutomaton> {
    if !f.proper {
        return Err(Error::Precondition("block map is not proper".into()));
    }
    if let Some(v) = f.violations(&aut.alphabet).into_iter().next() {
        return Err(Error::BlockMap(v));
    }
    let (m, a) = (f.memory, f.anticipation);
    if !is_weak_local(aut, m, a) {
        return Err(Error::NotLocal { m, a });
    }
    let mut out = DyckAutomaton::new(f.target.clone());
    let mut state_of: BTreeMap<(usize, Word, Word), usize> = BTreeMap::new();
    let mut state = |out: &mut DyckAutomaton, p: usize, past: Word, next: Word| -> usize {
        *state_of.entry((p, past.clone(), next.clone())).or_insert_with(|| {
            out.add_state(format!(
                "({},{},{})",
                aut.states[p],
                join_symbols(&past),
                join_symbols(&next)
            ))
        })
    };
    let mut centres = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for path in admissible_paths(aut, m + a + 1) {
        let window = aut.labels(&path);
        let Some(symbol) = f.get(&window) else {
            continue;
        };
        let e = path[m];
        if !seen.insert((e, window.clone())) {
            continue;
        }
        let edge = &aut.edges[e];
        let s = state(&mut out, edge.source, window[..m].to_vec(), window[m..m + a].to_vec());
        let t = state(&mut out, edge.target, window[1..=m].to_vec(), window[m + 1..].to_vec());
        out.add_edge(s, symbol.clone(), t);
        centres.push(e);
    }
    for (i, &c) in centres.iter().enumerate() {
        for (j, &r) in centres.iter().enumerate() {
            if aut.is_matched(c, r) {
                out.matched.insert((i, j));
            }
        }
    }
    Ok(out)
}

/// The edge Dyck graph of an `(m,a)`-local automaton with the `(0,0)` map
/// from edges to labels and its inverse. Parallel edges are first separated;
/// the inverse then needs one more letter of memory.
pub fn edge_dyck_of_local(aut: &DyckAutomaton, m: usize, a: usize) -> Result<(DyckGraph, BlockMapSpec, BlockMapSpec)> {
    if !is_local(aut, m, a) {
        return Err(Error::NotLocal { m, a });
    }
    let (unique, m) = if aut.has_unique_edges() {
        (aut.clone(), m)
    } else {
        let mut triples = std::collections::HashSet::new();
        if !aut
            .edges
            .iter()
            .all(|e| triples.insert((e.source, e.label.clone(), e.target)))
        {
            return Err(Error::Precondition(
                "parallel edges with equal labels cannot be told apart".into(),
            ));
        }
        (aut.edge_uniquify(), m + 1)
    };
    let graph = DyckGraph::from_automaton(&unique);
    let mut forward = BlockMapSpec::new(0, 0, aut.alphabet.clone());
    for (i, e) in unique.edges.iter().enumerate() {
        forward.table.insert(vec![i.to_string()], e.label.clone());
    }
    let mut inverse = BlockMapSpec::new(m, a, graph.automaton().alphabet.clone());
    let k = m + a + 1;
    for w in admissible_words(&unique, k).remove(&k).unwrap_or_default() {
        let sources = forced_states(&unique, &w, m);
        let targets = forced_states(&unique, &w, m + 1);
        let edges: Vec<usize> = (0..unique.num_edges())
            .filter(|&e| {
                let edge = &unique.edges[e];
                edge.label == w[m] && sources.contains(&edge.source) && targets.contains(&edge.target)
            })
            .collect();
        match edges.as_slice() {
            [e] => {
                inverse.table.insert(w, e.to_string());
            }
            [] => {}
            _ => {
                return Err(Error::NotLocal { m, a });
            }
        }
    }
    Ok((graph, forward, inverse))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::admissible_words;

    fn alpha() -> TriAlphabet {
        TriAlphabet::new(["a"], ["c"], ["i"])
    }

    fn fd1() -> DyckAutomaton {
        DyckAutomaton::full_dyck(alpha())
    }

    #[test]
    fn de_bruijn_sizes() {
        for ((m, a), (states, edges)) in [((0, 0), (1, 3)), ((1, 0), (3, 9)), ((0, 1), (3, 9)), ((1, 1), (9, 27))] {
            let db = de_bruijn(&alpha(), m, a);
            assert_eq!((db.num_states(), db.num_edges()), (states, edges), "({m},{a})");
            assert!(db.validate().is_empty());
        }
    }

    #[test]
    fn de_bruijn_windows_are_consistent() {
        let (db, windows) = de_bruijn_windows(&alpha(), 1, 1);
        for (e, w) in db.edges.iter().zip(&windows) {
            assert_eq!(w.len(), 3);
            assert_eq!(e.label, w[1]);
            let source = &db.states[e.source];
            assert_eq!(source, &format!("{}|{}", w[0], w[1]));
            assert_eq!(&db.states[e.target], &format!("{}|{}", w[1], w[2]));
        }
    }

    #[test]
    fn product_of_full_dyck() {
        let p = product(&fd1(), &fd1());
        assert_eq!(p.num_states(), 1);
        assert_eq!(p.num_edges(), 3);
        assert_eq!(p.matched.len(), 1);
        let empty = DyckAutomaton::new(alpha());
        assert_eq!(product(&fd1(), &empty).num_edges(), 0);
        assert_eq!(
            admissible_words(&diagonal_product(&fd1(), &fd1()).unwrap(), 4),
            admissible_words(&fd1(), 4)
        );
    }

    #[test]
    fn edge_presentation_of_full_dyck() {
        let (ep, proj) = edge_presentation(&fd1());
        assert_eq!(ep.num_states(), 1);
        assert_eq!(ep.alphabet.len(), 3);
        for w in &admissible_words(&ep, 3)[&3] {
            assert_eq!(proj.apply(w).unwrap().len(), 3);
        }
    }

    #[test]
    fn higher_blocks_of_full_dyck() {
        let h = higher_block_automaton(&fd1(), 2).unwrap();
        assert_eq!(h.alphabet.len(), 9);
        assert_eq!(h.num_states(), 3);
        assert_eq!(h.alphabet.kind_of("ac"), Some(Kind::Call));
        let h1 = higher_block_automaton(&fd1(), 1).unwrap();
        assert_eq!(h1.canonical(), fd1().canonical());
    }

    #[test]
    fn identity_image() {
        let mut id = BlockMapSpec::new(0, 0, alpha());
        for s in alpha().symbols() {
            id.table.insert(vec![s.clone()], s.clone());
        }
        let img = image_automaton(&fd1(), &id).unwrap();
        assert_eq!(admissible_words(&img, 4), admissible_words(&fd1(), 4));
        let mut improper = id.clone();
        improper.proper = false;
        assert!(image_automaton(&fd1(), &improper).is_err());
    }

    #[test]
    fn edge_graph_of_full_dyck() {
        assert!(matches!(edge_dyck_of_local(&fd1(), 0, 0), Ok((g, _, inv)) if g.num_states() == 3 && inv.memory == 1));
    }
}

//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dyckshift::path::NormalForm;
use dyckshift::{DyckAutomaton, Kind, TriAlphabet, Word};
use rand::seq::SliceRandom;
use rand::Rng;

/// A generator of the graph semigroup, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tok {
    Zero,
    X(usize, usize),
    E(usize),
}

/// Rewrites a product with the defining relations until none applies.
pub struct Rewriter<'a> {
    aut: &'a DyckAutomaton,
    kinds: Vec<Kind>,
}

impl<'a> Rewriter<'a> {
    pub fn new(aut: &'a DyckAutomaton) -> Self {
        Rewriter {
            aut,
            kinds: aut.kinds(),
        }
    }

    fn src(&self, e: usize) -> usize {
        self.aut.edges[e].source
    }

    fn tgt(&self, e: usize) -> usize {
        self.aut.edges[e].target
    }

    fn step(&self, w: &[Tok]) -> Option<Vec<Tok>> {
        use Tok::*;
        if w.len() > 1 && w.contains(&Zero) {
            return Some(vec![Zero]);
        }
        for (i, t) in w.iter().enumerate() {
            if let E(e) = *t {
                if self.kinds[e] == Kind::Internal {
                    let mut v = w.to_vec();
                    v[i] = X(self.src(e), self.tgt(e));
                    return Some(v);
                }
            }
        }
        let splice = |i: usize, len: usize, by: Tok| {
            let mut v = w[..i].to_vec();
            v.push(by);
            v.extend_from_slice(&w[i + len..]);
            v
        };
        for i in 0..w.len().saturating_sub(1) {
            let (l, r) = (w[i], w[i + 1]);
            let out = match (l, r) {
                (X(p, q), X(s, t)) => Some(if q == s { X(p, t) } else { Zero }),
                (X(_, q), E(e)) if q != self.src(e) => Some(Zero),
                (X(p, q), E(e)) if p == q => Some(E(e)),
                (E(e), X(p, _)) if p != self.tgt(e) => Some(Zero),
                (E(e), X(p, q)) if p == q => Some(E(e)),
                (E(e), E(f)) if self.tgt(e) != self.src(f) => Some(Zero),
                _ => None,
            };
            if let Some(t) = out {
                return Some(splice(i, 2, t));
            }
            // c r = c x_qq r
            if let (E(c), E(r)) = (l, r) {
                if self.kinds[c] == Kind::Call && self.kinds[r] == Kind::Return {
                    return Some(splice(i, 2, self.close(c, r)));
                }
            }
        }
        for i in 0..w.len().saturating_sub(2) {
            if let (E(c), X(_, _), E(r)) = (w[i], w[i + 1], w[i + 2]) {
                if self.kinds[c] == Kind::Call && self.kinds[r] == Kind::Return {
                    return Some(splice(i, 3, self.close(c, r)));
                }
            }
        }
        None
    }

    fn close(&self, c: usize, r: usize) -> Tok {
        if self.aut.matched.contains(&(c, r)) {
            Tok::X(self.src(c), self.tgt(r))
        } else {
            Tok::Zero
        }
    }

    pub fn normalize(&self, mut w: Vec<Tok>) -> Vec<Tok> {
        while let Some(next) = self.step(&w) {
            w = next;
        }
        w
    }

    pub fn image(&self, path: &[usize]) -> Vec<Tok> {
        self.normalize(path.iter().map(|&e| Tok::E(e)).collect())
    }

    /// The irreducible product in the shape used by the stack reducer.
    pub fn normal_form(&self, path: &[usize]) -> NormalForm {
        self.to_normal_form(&self.image(path))
    }

    pub fn to_normal_form(&self, w: &[Tok]) -> NormalForm {
        if w.contains(&Tok::Zero) {
            return NormalForm::Zero;
        }
        let end = |t: Tok, first: bool| match t {
            Tok::X(p, q) => {
                if first {
                    p
                } else {
                    q
                }
            }
            Tok::E(e) => {
                if first {
                    self.src(e)
                } else {
                    self.tgt(e)
                }
            }
            Tok::Zero => unreachable!(),
        };
        let edges: Vec<usize> = w
            .iter()
            .filter_map(|t| if let Tok::E(e) = t { Some(*e) } else { None })
            .collect();
        let split = edges
            .iter()
            .position(|&e| self.kinds[e] == Kind::Call)
            .unwrap_or(edges.len());
        NormalForm::Reduced {
            source: end(w[0], true),
            target: end(w[w.len() - 1], false),
            pending_returns: edges[..split].to_vec(),
            pending_calls: edges[split..].to_vec(),
        }
    }

    pub fn admissible(&self, path: &[usize]) -> bool {
        !self.image(path).contains(&Tok::Zero)
    }
}

/// Every connected path with `len` edges.
pub fn all_paths(aut: &DyckAutomaton, len: usize) -> Vec<Vec<usize>> {
    let mut paths: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::new();
        for p in &paths {
            for (e, edge) in aut.edges.iter().enumerate() {
                if p.last().is_none_or(|&l| aut.edges[l].target == edge.source) {
                    let mut q = p.clone();
                    q.push(e);
                    next.push(q);
                }
            }
        }
        paths = next;
    }
    paths
}

/// Admissible words of length exactly `len`, by filtering every path.
pub fn brute_words(aut: &DyckAutomaton, len: usize) -> BTreeSet<Word> {
    let rw = Rewriter::new(aut);
    all_paths(aut, len)
        .into_iter()
        .filter(|p| rw.admissible(p))
        .map(|p| aut.labels(&p))
        .collect()
}

/// For each edge, the largest `k ≤ max_k` such that the edge is the middle of
/// an admissible path with `k` edges on either side. Paths are grouped by
/// their image, which decides every extension.
pub fn window_depths(aut: &DyckAutomaton, max_k: usize) -> Vec<usize> {
    let rw = Rewriter::new(aut);
    (0..aut.num_edges())
        .map(|e| {
            let mut forms: BTreeSet<Vec<Tok>> = BTreeSet::new();
            if rw.admissible(&[e]) {
                forms.insert(rw.image(&[e]));
            }
            let mut depth = 0;
            while depth < max_k && !forms.is_empty() {
                let mut next = BTreeSet::new();
                for w in &forms {
                    for l in 0..aut.num_edges() {
                        for r in 0..aut.num_edges() {
                            let mut v = vec![Tok::E(l)];
                            v.extend_from_slice(w);
                            v.push(Tok::E(r));
                            let v = rw.normalize(v);
                            if !v.contains(&Tok::Zero) {
                                next.insert(v);
                            }
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                forms = next;
                depth += 1;
            }
            depth
        })
        .collect()
}

/// Whether the edge is admissible on its own.
pub fn lone_edge_admissible(aut: &DyckAutomaton, e: usize) -> bool {
    Rewriter::new(aut).admissible(&[e])
}

pub fn small_alphabet() -> TriAlphabet {
    TriAlphabet::new(["a", "b"], ["c", "d"], ["i"])
}

/// A random automaton with at most `max_states` states and `max_edges`
/// edges, each call matched with each return at probability one half.
pub fn random_automaton(rng: &mut impl Rng, max_states: usize, max_edges: usize) -> DyckAutomaton {
    let alphabet = small_alphabet();
    let symbols: Vec<String> = alphabet.symbols().cloned().collect();
    let mut aut = DyckAutomaton::new(alphabet);
    let n = rng.gen_range(1..=max_states);
    for p in 0..n {
        aut.add_state(format!("q{p}"));
    }
    for _ in 0..rng.gen_range(1..=max_edges) {
        let label = symbols.choose(rng).unwrap().clone();
        aut.add_edge(rng.gen_range(0..n), label, rng.gen_range(0..n));
    }
    let kinds = aut.kinds();
    for c in 0..aut.num_edges() {
        for r in 0..aut.num_edges() {
            if kinds[c] == Kind::Call && kinds[r] == Kind::Return && rng.gen_bool(0.5) {
                aut.add_matched(c, r);
            }
        }
    }
    aut
}

/// A random partition of `items` into non-empty classes.
pub fn random_classes(rng: &mut impl Rng, items: &[usize]) -> Vec<Vec<usize>> {
    let k = rng.gen_range(1..=items.len().max(1));
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &e) in items.iter().enumerate() {
        let slot = if i < k { i } else { rng.gen_range(0..k) };
        classes.entry(slot).or_default().push(e);
    }
    classes.into_values().collect()
}

use dyckshift::decomposition::{compose_maps, ProperConjugacy};
use dyckshift::surgery::{split_graph, trim};
use dyckshift::{corpus, DyckGraph, Partition, Side};

pub fn corpus_graph(name: &str) -> DyckGraph {
    DyckGraph::from_automaton(&trim(&corpus::automaton(name).unwrap()))
}

/// The split of `g` at `state` as a conjugacy from `g` to the split graph.
pub fn split_conjugacy(g: &DyckGraph, state: usize, side: Side, classes: Option<Vec<Vec<usize>>>) -> ProperConjugacy {
    let part = match classes {
        Some(c) => Partition::new(state, c, side),
        None => Partition::complete(g.automaton(), state, side),
    };
    let (big, record) = split_graph(g, &part, false).unwrap();
    ProperConjugacy::from_split(g, &big, &record)
}

/// `c1` followed by `c2`.
pub fn then(c1: &ProperConjugacy, c2: &ProperConjugacy) -> ProperConjugacy {
    ProperConjugacy::new(
        c1.source.clone(),
        c2.target.clone(),
        compose_maps(&c1.source, &c1.forward, &c2.forward),
        compose_maps(&c2.target, &c2.inverse, &c1.inverse),
    )
}

/// Ten conjugacies built from splits and amalgamations, each with memory
/// plus anticipation at most 3 in both directions.
pub fn constructed_conjugacies() -> Vec<(&'static str, ProperConjugacy)> {
    let fd1 = corpus_graph("fd1");
    let in1 = split_conjugacy(&fd1, 0, Side::In, None);
    let out1 = split_conjugacy(&fd1, 0, Side::Out, None);
    let coarse = split_conjugacy(&fd1, 0, Side::In, Some(vec![vec![0], vec![1, 2]]));
    let big = coarse.target.automaton().state("p|2").unwrap();
    let ins = coarse.target.automaton().in_edges(big);
    let twice = then(
        &coarse,
        &split_conjugacy(
            &coarse.target,
            big,
            Side::In,
            Some(vec![vec![ins[0]], ins[1..].to_vec()]),
        ),
    );
    let small = coarse.target.automaton().state("p|1").unwrap();
    let both = then(
        &coarse,
        &split_conjugacy(
            &coarse.target,
            small,
            Side::Out,
            Some(
                vec![vec![0], vec![1, 2]]
                    .into_iter()
                    .map(|c| {
                        c.into_iter()
                            .map(|i| coarse.target.automaton().out_edges(small)[i])
                            .collect()
                    })
                    .collect(),
            ),
        ),
    );
    let nested = corpus_graph("nested");
    let q = nested.automaton().state("q").unwrap();
    let across = then(
        &split_conjugacy(&nested, q, Side::In, None).inverted(),
        &split_conjugacy(&nested, 0, Side::Out, None),
    );
    let example = corpus_graph("split-example");
    let p1 = example.automaton().state("1").unwrap();
    let ins = example.automaton().in_edges(p1);
    let ex = split_conjugacy(&example, p1, Side::In, Some(ins.into_iter().map(|e| vec![e]).collect()));
    let cycle3 = corpus_graph("cycle3");
    let counter = corpus_graph("counter");
    vec![
        ("fd1 in-split", in1.clone()),
        ("fd1 out-split", out1),
        ("fd1 in-amalgamation", in1.inverted()),
        ("fd1 two in-splits", twice),
        ("fd1 in-split then out-split", both),
        ("nested in-amalgamation then out-split", across),
        ("split-example in-split", ex),
        ("nested out-split", split_conjugacy(&nested, 0, Side::Out, None)),
        ("cycle3 in-split", split_conjugacy(&cycle3, 0, Side::In, None)),
        ("counter in-split", split_conjugacy(&counter, 1, Side::In, None)),
    ]
}

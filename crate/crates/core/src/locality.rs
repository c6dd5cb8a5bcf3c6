//! Determinism, locality and weak locality, essentiality and a bounded
//! normalization check.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::language::{admissible_words, centered_blocks};
use crate::model::{DyckAutomaton, Symbol, Word};
use crate::path::for_each_admissible_path;
use crate::surgery::essential_parts;

pub fn is_deterministic(aut: &DyckAutomaton) -> bool {
    let mut seen = BTreeSet::new();
    aut.edges.iter().all(|e| seen.insert((e.source, e.label.as_str())))
}

/// States occupied at position `offset` by the paths labelled `word`.
pub fn forced_states(aut: &DyckAutomaton, word: &[Symbol], offset: usize) -> BTreeSet<usize> {
    let all: BTreeSet<usize> = (0..aut.num_states()).collect();
    let mut forward = all.clone();
    for s in &word[..offset] {
        forward = aut
            .edges
            .iter()
            .filter(|e| &e.label == s && forward.contains(&e.source))
            .map(|e| e.target)
            .collect();
    }
    let mut backward = all;
    for s in word[offset..].iter().rev() {
        backward = aut
            .edges
            .iter()
            .filter(|e| &e.label == s && backward.contains(&e.target))
            .map(|e| e.source)
            .collect();
    }
    forward.intersection(&backward).copied().collect()
}

/// Pairs of states joined by two equally labelled edges.
fn label_pairs(aut: &DyckAutomaton) -> Vec<((usize, usize), (usize, usize))> {
    let mut by_label: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, e) in aut.edges.iter().enumerate() {
        by_label.entry(e.label.as_str()).or_default().push(i);
    }
    let mut out = Vec::new();
    for edges in by_label.values() {
        for &i in edges {
            for &j in edges {
                let (e, f) = (&aut.edges[i], &aut.edges[j]);
                out.push(((e.source, f.source), (e.target, f.target)));
            }
        }
    }
    out
}

/// Any two paths of length `m+a` with the same label pass through the same
/// state at position `m`. With `m+a = 0` this holds exactly when there is at
/// most one state.
pub fn is_local(aut: &DyckAutomaton, m: usize, a: usize) -> bool {
    let n = aut.num_states();
    let steps = label_pairs(aut);
    let all: BTreeSet<(usize, usize)> = (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).collect();
    // pairs ending synchronized runs of length m
    let mut ends = all.clone();
    for _ in 0..m {
        ends = steps
            .iter()
            .filter(|(s, _)| ends.contains(s))
            .map(|&(_, t)| t)
            .collect();
    }
    // pairs starting synchronized runs of length a
    let mut starts = all;
    for _ in 0..a {
        starts = steps
            .iter()
            .filter(|(_, t)| starts.contains(t))
            .map(|&(s, _)| s)
            .collect();
    }
    !ends.iter().any(|&(p, q)| p != q && starts.contains(&(p, q)))
}

/// Locality restricted to admissible paths.
pub fn is_weak_local(aut: &DyckAutomaton, m: usize, a: usize) -> bool {
    let len = m + a;
    if len == 0 {
        return aut.num_states() <= 1;
    }
    let mut seen: HashMap<Word, usize> = HashMap::new();
    let mut ok = true;
    for_each_admissible_path(aut, len, |path| {
        if !ok {
            return;
        }
        let state = if m == len {
            aut.edges[path[len - 1]].target
        } else {
            aut.edges[path[m]].source
        };
        let label = aut.labels(path);
        if *seen.entry(label).or_insert(state) != state {
            ok = false;
        }
    });
    ok
}

/// The locality `(m,a)` within bounds with the least `m+a`, then least `m`.
pub fn minimal_locality(aut: &DyckAutomaton, max_m: usize, max_a: usize) -> Option<(usize, usize)> {
    (0..=max_m + max_a).find_map(|total| {
        (0..=total.min(max_m))
            .map(|m| (m, total - m))
            .filter(|&(_, a)| a <= max_a)
            .find(|&(m, a)| is_local(aut, m, a))
    })
}

pub fn is_essential_automaton(aut: &DyckAutomaton) -> bool {
    let parts = essential_parts(aut);
    parts.edges.len() == aut.num_edges() && parts.matched.len() == aut.matched.len()
}

/// Every admissible word of length at most `max_len` occurs at offset
/// `margin` of a longer admissible word. A bounded check only.
pub fn is_normalized_bounded(aut: &DyckAutomaton, max_len: usize, margin: usize) -> bool {
    let words: BTreeMap<usize, BTreeSet<Word>> = admissible_words(aut, max_len);
    words
        .iter()
        .all(|(&n, ws)| ws.is_subset(&centered_blocks(aut, n, margin)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TriAlphabet;

    fn fd1() -> DyckAutomaton {
        DyckAutomaton::full_dyck(TriAlphabet::new(["a"], ["c"], ["i"]))
    }

    /// Two states swapped by every letter: no context pins the state.
    fn twins() -> DyckAutomaton {
        let mut a = DyckAutomaton::new(TriAlphabet::new(["a"], ["c"], ["i"]));
        a.add_state("p");
        a.add_state("q");
        for s in ["a", "c", "i"] {
            a.add_edge(0, s, 1);
            a.add_edge(1, s, 0);
        }
        a.match_all_calls_with_returns();
        a
    }

    #[test]
    fn determinism() {
        assert!(is_deterministic(&fd1()));
        let mut a = fd1();
        a.add_edge(0, "a", 0);
        assert!(!is_deterministic(&a));
    }

    #[test]
    fn single_state_is_local_everywhere() {
        for m in 0..3 {
            for a in 0..3 {
                assert!(is_local(&fd1(), m, a));
                assert!(is_weak_local(&fd1(), m, a));
            }
        }
        assert_eq!(minimal_locality(&fd1(), 2, 2), Some((0, 0)));
    }

    #[test]
    fn twins_are_never_local() {
        assert_eq!(minimal_locality(&twins(), 3, 3), None);
        assert!(!is_weak_local(&twins(), 2, 1));
    }

    #[test]
    fn forced_states_on_a_chain() {
        let mut a = DyckAutomaton::new(TriAlphabet::new(["a"], ["c"], ["i"]));
        let p = a.add_state("p");
        let q = a.add_state("q");
        a.add_edge(p, "a", q);
        a.add_edge(q, "i", q);
        let w: Word = vec!["a".into(), "i".into()];
        assert_eq!(forced_states(&a, &w, 0), [p].into_iter().collect());
        assert_eq!(forced_states(&a, &w, 2), [q].into_iter().collect());
        assert!(is_local(&a, 1, 0));
        assert!(is_local(&a, 0, 1));
    }

    #[test]
    fn normalization_bounds() {
        assert!(is_normalized_bounded(&fd1(), 3, 3));
        let mut dead = DyckAutomaton::new(TriAlphabet::new(["a"], ["c"], ["i"]));
        let p = dead.add_state("p");
        let q = dead.add_state("q");
        dead.add_edge(p, "a", q);
        assert!(!is_normalized_bounded(&dead, 1, 1));
    }
}

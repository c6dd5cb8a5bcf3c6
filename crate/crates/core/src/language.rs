//! Words: admissibility, finite block approximations and the strictly locally
//! Dyck testable semigroups `S(F,G)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::constructions::de_bruijn_windows;
use crate::error::{Error, Result};
use crate::locality::{forced_states, is_local};
use crate::model::{DyckAutomaton, Kind, Symbol, TriAlphabet, Word};

/// A position of the word simulation: current state and the stack of pending
/// calls. Pending returns never cause a failure, so they are not kept. Calls
/// matched with the same returns are interchangeable and share a stack symbol.
type Config = (usize, Vec<usize>);

/// Label-indexed transitions with edge kinds, shared by the word simulations.
pub struct WordRunner<'a> {
    aut: &'a DyckAutomaton,
    kinds: Vec<Kind>,
    by_label: Vec<HashMap<&'a str, Vec<usize>>>,
    out: Vec<Vec<usize>>,
    /// Stack symbol of each call edge.
    call_class: Vec<usize>,
    /// Returns matched by each stack symbol.
    class_returns: Vec<BTreeSet<usize>>,
}

impl<'a> WordRunner<'a> {
    pub fn new(aut: &'a DyckAutomaton) -> Self {
        let mut by_label: Vec<HashMap<&str, Vec<usize>>> = vec![HashMap::new(); aut.num_states()];
        for (i, e) in aut.edges.iter().enumerate() {
            by_label[e.source].entry(e.label.as_str()).or_default().push(i);
        }
        let mut partners: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); aut.num_edges()];
        for &(c, r) in &aut.matched {
            partners[c].insert(r);
        }
        let mut classes: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let call_class = partners
            .iter()
            .map(|set| {
                let next = classes.len();
                *classes.entry(set.clone()).or_insert(next)
            })
            .collect();
        let mut class_returns = vec![BTreeSet::new(); classes.len()];
        for (set, i) in classes {
            class_returns[i] = set;
        }
        WordRunner {
            aut,
            kinds: aut.kinds(),
            by_label,
            out: aut.adjacency().out,
            call_class,
            class_returns,
        }
    }

    fn apply(&self, (_, stack): &Config, e: usize, cap: usize) -> Option<Config> {
        let mut stack = stack.clone();
        match self.kinds[e] {
            Kind::Internal => {}
            Kind::Call => {
                stack.push(self.call_class[e]);
                if stack.len() > cap {
                    stack.remove(0);
                }
            }
            Kind::Return => {
                if let Some(c) = stack.pop() {
                    if !self.class_returns[c].contains(&e) {
                        return None;
                    }
                }
            }
        }
        Some((self.aut.edges[e].target, stack))
    }

    /// Configurations reached by reading one more symbol. Stacks keep at most
    /// `cap` entries; deeper calls can no longer be popped.
    fn step(&self, configs: &BTreeSet<Config>, symbol: &str, cap: usize) -> BTreeSet<Config> {
        let mut next = BTreeSet::new();
        for config in configs {
            if let Some(edges) = self.by_label[config.0].get(symbol) {
                for &e in edges {
                    next.extend(self.apply(config, e, cap));
                }
            }
        }
        next
    }

    fn start(&self) -> BTreeSet<Config> {
        (0..self.aut.num_states()).map(|p| (p, Vec::new())).collect()
    }

    /// Configurations after exactly `len` arbitrary admissible steps.
    fn after_any(&self, len: usize, cap: usize) -> BTreeSet<Config> {
        let mut configs = self.start();
        for _ in 0..len {
            let mut next = BTreeSet::new();
            for config in &configs {
                for &e in &self.out[config.0] {
                    next.extend(self.apply(config, e, cap));
                }
            }
            configs = next;
        }
        configs
    }

    /// Whether the non-empty `word` labels an admissible path. Unknown symbols
    /// are rejected.
    pub fn accepts(&self, word: &[Symbol]) -> bool {
        if word.is_empty() {
            return false;
        }
        let mut configs = self.start();
        for symbol in word {
            configs = self.step(&configs, symbol, word.len());
            if configs.is_empty() {
                return false;
            }
        }
        true
    }

    /// Whether some admissible continuation of `len` edges exists.
    fn extends(&self, config: &Config, len: usize, memo: &mut HashMap<(Config, usize), bool>) -> bool {
        if len == 0 {
            return true;
        }
        let mut key = config.clone();
        if key.1.len() > len {
            key.1.drain(..key.1.len() - len);
        }
        if let Some(&v) = memo.get(&(key.clone(), len)) {
            return v;
        }
        let result = self.out[key.0]
            .iter()
            .filter_map(|&e| self.apply(&key, e, len))
            .any(|next| self.extends(&next, len - 1, memo));
        memo.insert((key, len), result);
        result
    }
}

pub fn is_admissible_word(aut: &DyckAutomaton, word: &[Symbol]) -> Result<bool> {
    aut.check_word(word)?;
    Ok(WordRunner::new(aut).accepts(word))
}

/// Admissible words of each length `1..=n`.
pub fn admissible_words(aut: &DyckAutomaton, n: usize) -> BTreeMap<usize, BTreeSet<Word>> {
    let runner = WordRunner::new(aut);
    let symbols: Vec<&Symbol> = aut.alphabet.symbols().collect();
    let mut out: BTreeMap<usize, BTreeSet<Word>> = (1..=n).map(|k| (k, BTreeSet::new())).collect();
    let mut word = Vec::new();
    grow(&runner, &symbols, runner.start(), n, n, &mut word, &mut |w, _| {
        out.get_mut(&w.len()).unwrap().insert(w.to_vec());
    });
    out
}

/// Depth-first extension of `word` by one symbol at a time while some
/// configuration survives; `visit` sees every non-empty surviving prefix.
fn grow(
    runner: &WordRunner,
    symbols: &[&Symbol],
    configs: BTreeSet<Config>,
    n: usize,
    cap: usize,
    word: &mut Word,
    visit: &mut impl FnMut(&[Symbol], &BTreeSet<Config>),
) {
    if word.len() == n {
        return;
    }
    for s in symbols {
        let next = runner.step(&configs, s, cap);
        if next.is_empty() {
            continue;
        }
        word.push((*s).clone());
        visit(word, &next);
        grow(runner, symbols, next, n, cap, word, visit);
        word.pop();
    }
}

/// Words of length `n` occurring at offset `margin` of some admissible word of
/// length `n + 2·margin`.
pub fn centered_blocks(aut: &DyckAutomaton, n: usize, margin: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for_each_centered_block(aut, n, margin, |w| {
        if w.len() == n {
            out.insert(w.to_vec());
        }
    });
    out
}

/// Visits the centered blocks of every length `1..=max_len` with the given
/// margin, shorter words before their extensions.
pub fn for_each_centered_block(aut: &DyckAutomaton, max_len: usize, margin: usize, mut visit: impl FnMut(&[Symbol])) {
    let runner = WordRunner::new(aut);
    let symbols: Vec<&Symbol> = aut.alphabet.symbols().collect();
    let cap = max_len + margin;
    let left = runner.after_any(margin, cap);
    if max_len == 0 || left.is_empty() {
        return;
    }
    let mut memo = HashMap::new();
    let mut word = Vec::new();
    grow(&runner, &symbols, left, max_len, cap, &mut word, &mut |w, configs| {
        if configs.iter().any(|c| runner.extends(c, margin, &mut memo)) {
            visit(w);
        }
    });
}

/// Default margin for block approximations.
pub fn default_margin(aut: &DyckAutomaton) -> usize {
    2 * (aut.num_states() * aut.num_states() + 1)
}

/// Reads a word: whitespace or comma separated symbols, or a run of
/// one-character symbols.
pub fn parse_word(alphabet: &TriAlphabet, text: &str) -> Result<Word> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let table = alphabet.kind_table();
    let word: Word = if text.contains(|c: char| c.is_whitespace() || c == ',') {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect()
    } else if table.contains_key(text) {
        vec![text.to_string()]
    } else {
        text.chars().map(|c| c.to_string()).collect()
    };
    match word.iter().find(|s| !table.contains_key(s.as_str())) {
        Some(s) => Err(Error::UnknownSymbol(s.clone())),
        None => Ok(word),
    }
}

pub fn format_word(word: &[Symbol]) -> String {
    if word.iter().all(|s| s.chars().count() == 1) {
        word.concat()
    } else {
        word.join(" ")
    }
}

/// The sets `F` (forbidden windows) and `G` (window pairs that may not be
/// matched) defining `S(F,G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SldsSpec {
    pub alphabet: TriAlphabet,
    pub m: usize,
    pub a: usize,
    pub forbidden: BTreeSet<Word>,
    pub unmatched: BTreeSet<(Word, Word)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SldsValue {
    Zero,
    NonZero,
}

impl SldsSpec {
    pub fn new(alphabet: TriAlphabet, m: usize, a: usize) -> Self {
        SldsSpec {
            alphabet,
            m,
            a,
            forbidden: BTreeSet::new(),
            unmatched: BTreeSet::new(),
        }
    }

    pub fn window(&self) -> usize {
        self.m + self.a + 1
    }

    fn center_kind(&self, w: &[Symbol]) -> Option<Kind> {
        self.alphabet.kind_of(&w[self.m])
    }

    pub fn violations(&self) -> Vec<String> {
        let k = self.window();
        let mut out = Vec::new();
        for w in &self.forbidden {
            if w.len() != k {
                out.push(format!("forbidden word {w:?} does not have length {k}"));
            }
        }
        for (u, v) in &self.unmatched {
            if u.len() != k || v.len() != k {
                out.push(format!("pair ({u:?},{v:?}) does not have length {k}"));
            } else if self.center_kind(u) != Some(Kind::Call) || self.center_kind(v) != Some(Kind::Return) {
                out.push(format!(
                    "pair ({u:?},{v:?}) must have a call centre then a return centre"
                ));
            }
        }
        out
    }
}

/// Product of the overlapping windows of `word` in `S(F,G)`.
pub fn slds_reduce(spec: &SldsSpec, word: &[Symbol]) -> Result<SldsValue> {
    let k = spec.window();
    if word.len() < k {
        return Err(Error::WordTooShort {
            len: word.len(),
            window: k,
        });
    }
    let table = spec.alphabet.kind_table();
    if let Some(s) = word.iter().find(|s| !table.contains_key(s.as_str())) {
        return Err(Error::UnknownSymbol(s.clone()));
    }
    let mut stack: Vec<&[Symbol]> = Vec::new();
    for w in word.windows(k) {
        if spec.forbidden.contains(w) {
            return Ok(SldsValue::Zero);
        }
        match table[w[spec.m].as_str()] {
            Kind::Internal => {}
            Kind::Call => stack.push(w),
            Kind::Return => {
                if let Some(u) = stack.pop() {
                    if spec.unmatched.contains(&(u.to_vec(), w.to_vec())) {
                        return Ok(SldsValue::Zero);
                    }
                }
            }
        }
    }
    Ok(SldsValue::NonZero)
}

/// Word membership in the shift defined by `spec`: some padding by `m`
/// letters on the left and `a` on the right has a non-zero product. This is
/// exactly admissibility in [`slds_automaton`].
pub fn slds_accepts(spec: &SldsSpec, word: &[Symbol]) -> Result<bool> {
    if word.is_empty() {
        return Ok(false);
    }
    for left in spec.alphabet.words(spec.m) {
        for right in spec.alphabet.words(spec.a) {
            let padded: Word = left.iter().chain(word).chain(&right).cloned().collect();
            if slds_reduce(spec, &padded)? == SldsValue::NonZero {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The De Bruijn automaton without `F`-windows, with matchings restricted to
/// window pairs outside `G`.
pub fn slds_automaton(spec: &SldsSpec) -> DyckAutomaton {
    let (db, windows) = de_bruijn_windows(&spec.alphabet, spec.m, spec.a);
    let (aut, _, _) = db.restrict(
        |e| !spec.forbidden.contains(&windows[e]),
        |c, r| !spec.unmatched.contains(&(windows[c].clone(), windows[r].clone())),
        false,
    );
    aut
}

/// Reads `F` and `G` off an `(m,a)`-local automaton. Blocks are approximated
/// with margin `m+a+1`.
pub fn slds_sets_from_local(aut: &DyckAutomaton, m: usize, a: usize) -> Result<SldsSpec> {
    if !is_local(aut, m, a) {
        return Err(Error::NotLocal { m, a });
    }
    let k = m + a + 1;
    let blocks = centered_blocks(aut, k, k);
    let mut spec = SldsSpec::new(aut.alphabet.clone(), m, a);
    let kinds = aut.alphabet.kind_table();
    for w in aut.alphabet.words(k) {
        if !blocks.contains(&w) {
            spec.forbidden.insert(w);
        }
    }
    let centre_edges = |w: &Word| -> Vec<usize> {
        let sources = forced_states(aut, w, m);
        let targets = forced_states(aut, w, m + 1);
        (0..aut.num_edges())
            .filter(|&e| {
                let edge = &aut.edges[e];
                edge.label == w[m] && sources.contains(&edge.source) && targets.contains(&edge.target)
            })
            .collect()
    };
    let calls: Vec<(&Word, Vec<usize>)> = blocks
        .iter()
        .filter(|w| kinds[w[m].as_str()] == Kind::Call)
        .map(|w| (w, centre_edges(w)))
        .collect();
    let returns: Vec<(&Word, Vec<usize>)> = blocks
        .iter()
        .filter(|w| kinds[w[m].as_str()] == Kind::Return)
        .map(|w| (w, centre_edges(w)))
        .collect();
    for (u, cs) in &calls {
        for (v, rs) in &returns {
            let matched = cs.iter().any(|&c| rs.iter().any(|&r| aut.is_matched(c, r)));
            if !matched {
                spec.unmatched.insert(((*u).clone(), (*v).clone()));
            }
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        s.chars().map(|c| c.to_string()).collect()
    }

    fn fd1() -> DyckAutomaton {
        DyckAutomaton::full_dyck(TriAlphabet::new(["a"], ["c"], ["i"]))
    }

    fn fd1_unmatched() -> DyckAutomaton {
        let mut a = fd1();
        a.matched.clear();
        a
    }

    #[test]
    fn word_membership() {
        assert!(is_admissible_word(&fd1(), &w("acai")).unwrap());
        assert!(!is_admissible_word(&fd1_unmatched(), &w("ac")).unwrap());
        assert!(is_admissible_word(&fd1_unmatched(), &w("ca")).unwrap());
        assert!(is_admissible_word(&fd1_unmatched(), &w("aic")).is_ok_and(|b| !b));
        assert_eq!(
            is_admissible_word(&fd1(), &w("x")),
            Err(Error::UnknownSymbol("x".into()))
        );
    }

    #[test]
    fn word_sets() {
        let words = admissible_words(&fd1(), 2);
        assert_eq!(words[&1].len(), 3);
        assert_eq!(words[&2].len(), 9);
        let words = admissible_words(&fd1_unmatched(), 2);
        assert_eq!(words[&2].len(), 8);
        assert!(!words[&2].contains(&w("ac")));
        let empty = DyckAutomaton::new(TriAlphabet::new(["a"], ["c"], ["i"]));
        assert!(admissible_words(&empty, 3).values().all(BTreeSet::is_empty));
    }

    fn dead_end() -> DyckAutomaton {
        let mut a = DyckAutomaton::new(TriAlphabet::new(["a"], ["c"], ["i"]));
        let p = a.add_state("p");
        let q = a.add_state("q");
        a.add_edge(p, "a", q);
        a
    }

    #[test]
    fn blocks_with_margin() {
        assert_eq!(centered_blocks(&fd1(), 2, 3).len(), 9);
        assert_eq!(
            centered_blocks(&fd1_unmatched(), 2, 0),
            admissible_words(&fd1_unmatched(), 2)[&2]
        );
        assert_eq!(centered_blocks(&dead_end(), 1, 0), [w("a")].into_iter().collect());
        assert!(centered_blocks(&dead_end(), 1, 1).is_empty());
    }

    #[test]
    fn word_parsing() {
        let alpha = TriAlphabet::new(["a"], ["c"], ["i"]);
        assert_eq!(parse_word(&alpha, "aci").unwrap(), w("aci"));
        assert_eq!(parse_word(&alpha, "a c, i").unwrap(), w("aci"));
        assert!(parse_word(&alpha, "ax").is_err());
        let long = TriAlphabet::new(["call"], ["ret"], Vec::<&str>::new());
        assert_eq!(parse_word(&long, "call").unwrap(), vec!["call".to_string()]);
        assert_eq!(format_word(&["call".into(), "ret".into()]), "call ret");
        assert_eq!(format_word(&w("ac")), "ac");
    }

    fn alpha() -> TriAlphabet {
        TriAlphabet::new(["a"], ["c"], ["i"])
    }

    #[test]
    fn slds_examples() {
        let spec = SldsSpec::new(alpha(), 0, 0);
        assert_eq!(slds_reduce(&spec, &w("acica")).unwrap(), SldsValue::NonZero);
        let mut f = spec.clone();
        f.forbidden.insert(w("a"));
        assert_eq!(slds_reduce(&f, &w("ia")).unwrap(), SldsValue::Zero);
        let mut g = spec.clone();
        g.unmatched.insert((w("a"), w("c")));
        assert_eq!(slds_reduce(&g, &w("ac")).unwrap(), SldsValue::Zero);
        assert_eq!(slds_reduce(&g, &w("aiac")).unwrap(), SldsValue::Zero);
        assert_eq!(slds_reduce(&g, &w("ca")).unwrap(), SldsValue::NonZero);
        let short = SldsSpec::new(alpha(), 1, 1);
        assert_eq!(
            slds_reduce(&short, &w("ac")),
            Err(Error::WordTooShort { len: 2, window: 3 })
        );
    }

    #[test]
    fn slds_automaton_shapes() {
        let spec = SldsSpec::new(alpha(), 1, 0);
        let aut = slds_automaton(&spec);
        assert_eq!(aut.num_states(), 3);
        assert_eq!(admissible_words(&aut, 3)[&3].len(), 27);
        let mut all = SldsSpec::new(alpha(), 1, 0);
        all.forbidden = alpha().words(2).into_iter().collect();
        assert_eq!(slds_automaton(&all).num_edges(), 0);
    }

    #[test]
    fn sets_from_single_state() {
        let spec = slds_sets_from_local(&fd1(), 0, 0).unwrap();
        assert!(spec.forbidden.is_empty() && spec.unmatched.is_empty());
        let spec = slds_sets_from_local(&fd1_unmatched(), 0, 0).unwrap();
        assert!(spec.forbidden.is_empty());
        assert_eq!(spec.unmatched, [(w("a"), w("c"))].into_iter().collect());
    }
}

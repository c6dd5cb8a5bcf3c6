//! Paths in the graph semigroup of a Dyck automaton.
//!
//! A path reduces left to right with a stack of pending calls. Internal edges
//! and matched call/return factors collapse to the idempotents `x_pq`; a
//! return meeting an unmatched call on top of the stack sends the product to
//! zero; a return with an empty stack stays pending. The reduced form is
//! therefore a run of pending returns followed by a run of pending calls.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{DyckAutomaton, Kind};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NormalForm {
    Zero,
    Reduced {
        source: usize,
        target: usize,
        pending_returns: Vec<usize>,
        pending_calls: Vec<usize>,
    },
}

impl NormalForm {
    pub fn is_zero(&self) -> bool {
        matches!(self, NormalForm::Zero)
    }

    /// `x_pq`: a reduced form without pending edges.
    pub fn is_idempotent(&self) -> bool {
        matches!(
            self,
            NormalForm::Reduced { pending_returns, pending_calls, .. }
                if pending_returns.is_empty() && pending_calls.is_empty()
        )
    }
}

/// Incremental left-to-right reduction, used wherever paths are enumerated.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Run {
    pub source: Option<usize>,
    pub target: Option<usize>,
    pub pending_returns: Vec<usize>,
    pub stack: Vec<usize>,
}

impl Run {
    pub fn new() -> Self {
        Run::default()
    }

    /// Appends an edge; returns false when the product becomes zero (the run
    /// is then left in an unspecified state).
    pub fn push(&mut self, aut: &DyckAutomaton, kinds: &[Kind], e: usize) -> bool {
        let edge = &aut.edges[e];
        match self.target {
            Some(t) if t != edge.source => return false,
            None => self.source = Some(edge.source),
            _ => {}
        }
        self.target = Some(edge.target);
        match kinds[e] {
            Kind::Internal => true,
            Kind::Call => {
                self.stack.push(e);
                true
            }
            Kind::Return => match self.stack.pop() {
                Some(c) => aut.is_matched(c, e),
                None => {
                    self.pending_returns.push(e);
                    true
                }
            },
        }
    }

    pub fn normal_form(&self) -> NormalForm {
        match (self.source, self.target) {
            (Some(source), Some(target)) => NormalForm::Reduced {
                source,
                target,
                pending_returns: self.pending_returns.clone(),
                pending_calls: self.stack.clone(),
            },
            _ => NormalForm::Zero,
        }
    }
}

pub fn reduce_path(aut: &DyckAutomaton, path: &[usize]) -> Result<NormalForm> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    aut.check_path(path)?;
    let kinds = aut.kinds();
    let mut run = Run::new();
    for &e in path {
        if !run.push(aut, &kinds, e) {
            return Ok(NormalForm::Zero);
        }
    }
    Ok(run.normal_form())
}

/// Product of two normal forms in the graph semigroup.
pub fn compose(aut: &DyckAutomaton, left: &NormalForm, right: &NormalForm) -> NormalForm {
    let (
        NormalForm::Reduced {
            source,
            target: mid_l,
            pending_returns: r1,
            pending_calls: c1,
        },
        NormalForm::Reduced {
            source: mid_r,
            target,
            pending_returns: r2,
            pending_calls: c2,
        },
    ) = (left, right)
    else {
        return NormalForm::Zero;
    };
    if mid_l != mid_r {
        return NormalForm::Zero;
    }
    let mut calls = c1.clone();
    let mut returns = r2.iter();
    let mut leftover = Vec::new();
    for &r in returns.by_ref() {
        match calls.pop() {
            Some(c) if aut.is_matched(c, r) => {}
            Some(_) => return NormalForm::Zero,
            None => {
                leftover.push(r);
                break;
            }
        }
    }
    leftover.extend(returns);
    let mut pending_returns = r1.clone();
    pending_returns.extend(leftover);
    calls.extend(c2.iter().copied());
    NormalForm::Reduced {
        source: *source,
        target: *target,
        pending_returns,
        pending_calls: calls,
    }
}

pub fn is_admissible_path(aut: &DyckAutomaton, path: &[usize]) -> Result<bool> {
    Ok(!reduce_path(aut, path)?.is_zero())
}

pub fn is_dyck_path(aut: &DyckAutomaton, path: &[usize]) -> Result<bool> {
    Ok(reduce_path(aut, path)?.is_idempotent())
}

/// A Dyck path none of whose strict non-empty prefixes is a Dyck path.
pub fn is_prime_dyck_path(aut: &DyckAutomaton, path: &[usize]) -> Result<bool> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    aut.check_path(path)?;
    let kinds = aut.kinds();
    let mut run = Run::new();
    for (i, &e) in path.iter().enumerate() {
        if !run.push(aut, &kinds, e) {
            return Ok(false);
        }
        let dyck = run.pending_returns.is_empty() && run.stack.is_empty();
        if dyck {
            return Ok(i + 1 == path.len());
        }
    }
    Ok(false)
}

/// Calls `visit` on every admissible path of exactly `len` edges, in
/// lexicographic order of edge indices.
pub fn for_each_admissible_path(aut: &DyckAutomaton, len: usize, mut visit: impl FnMut(&[usize])) {
    if len == 0 {
        return;
    }
    let kinds = aut.kinds();
    let adj = aut.adjacency();
    let mut path = Vec::with_capacity(len);
    for e in 0..aut.num_edges() {
        let mut run = Run::new();
        if run.push(aut, &kinds, e) {
            path.push(e);
            extend(aut, &kinds, &adj.out, len, &mut path, run, &mut visit);
            path.pop();
        }
    }
}

fn extend(
    aut: &DyckAutomaton,
    kinds: &[Kind],
    out: &[Vec<usize>],
    len: usize,
    path: &mut Vec<usize>,
    run: Run,
    visit: &mut impl FnMut(&[usize]),
) {
    if path.len() == len {
        visit(path);
        return;
    }
    let last = aut.edges[*path.last().unwrap()].target;
    for &e in &out[last] {
        let mut next = run.clone();
        if next.push(aut, kinds, e) {
            path.push(e);
            extend(aut, kinds, out, len, path, next, visit);
            path.pop();
        }
    }
}

pub fn admissible_paths(aut: &DyckAutomaton, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_admissible_path(aut, len, |p| out.push(p.to_vec()));
    out
}

/// How a non-empty Dyck path between two states was first derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivation {
    /// A single item.
    Item(Item),
    /// A shorter non-empty Dyck path to `mid` followed by one item from `mid`.
    Append { mid: usize, item: Item },
}

/// A top-level factor of a Dyck path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Item {
    Internal(usize),
    /// `call · (Dyck path or empty) · return` with the pair matched.
    Matched {
        call: usize,
        ret: usize,
    },
}

/// Least fixpoint of Dyck reachability: `(p,q)` is present when some Dyck path
/// (possibly empty) leads from `p` to `q`.
#[derive(Clone, Debug)]
pub struct DyckReachability {
    n: usize,
    ends: Vec<(usize, usize)>,
    derivations: BTreeMap<(usize, usize), Derivation>,
}

pub fn dyck_reachability(aut: &DyckAutomaton) -> DyckReachability {
    let kinds = aut.kinds();
    let mut reach = DyckReachability {
        n: aut.num_states(),
        ends: aut.edges.iter().map(|e| (e.source, e.target)).collect(),
        derivations: BTreeMap::new(),
    };
    let internals: Vec<usize> = (0..aut.num_edges()).filter(|&e| kinds[e] == Kind::Internal).collect();
    // items starting at each state, refreshed as the relation grows
    loop {
        let mut items: Vec<Vec<(Item, usize)>> = vec![Vec::new(); reach.n];
        for &e in &internals {
            items[aut.edges[e].source].push((Item::Internal(e), aut.edges[e].target));
        }
        for &(c, r) in &aut.matched {
            let (y, w) = (aut.edges[c].target, aut.edges[r].source);
            if reach.contains(y, w) {
                items[aut.edges[c].source].push((Item::Matched { call: c, ret: r }, aut.edges[r].target));
            }
        }
        let mut added = Vec::new();
        for (p, list) in items.iter().enumerate() {
            for &(item, q) in list {
                if !reach.derivations.contains_key(&(p, q)) {
                    added.push(((p, q), Derivation::Item(item)));
                }
            }
        }
        for &(p, mid) in reach.derivations.keys() {
            for &(item, q) in &items[mid] {
                if !reach.derivations.contains_key(&(p, q)) {
                    added.push(((p, q), Derivation::Append { mid, item }));
                }
            }
        }
        let mut changed = false;
        for (key, d) in added {
            if let std::collections::btree_map::Entry::Vacant(v) = reach.derivations.entry(key) {
                v.insert(d);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    reach
}

impl DyckReachability {
    pub fn num_states(&self) -> usize {
        self.n
    }

    pub fn contains(&self, p: usize, q: usize) -> bool {
        p == q || self.derivations.contains_key(&(p, q))
    }

    /// Pairs joined by a non-empty Dyck path.
    pub fn nonempty(&self, p: usize, q: usize) -> bool {
        self.derivations.contains_key(&(p, q))
    }

    pub fn pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut out: BTreeSet<_> = (0..self.n).map(|p| (p, p)).collect();
        out.extend(self.derivations.keys().copied());
        out
    }

    pub fn derivation(&self, p: usize, q: usize) -> Option<Derivation> {
        self.derivations.get(&(p, q)).copied()
    }

    /// A Dyck path from `p` to `q`: a non-empty one when available, the empty
    /// path for a bare reflexive pair, `None` when unreachable.
    pub fn witness(&self, p: usize, q: usize) -> Option<Vec<usize>> {
        if self.derivations.contains_key(&(p, q)) {
            let mut out = Vec::new();
            self.materialize(p, q, &mut out);
            Some(out)
        } else if p == q {
            Some(Vec::new())
        } else {
            None
        }
    }

    fn materialize(&self, p: usize, q: usize, out: &mut Vec<usize>) {
        match self.derivations[&(p, q)] {
            Derivation::Item(item) => self.materialize_item(item, out),
            Derivation::Append { mid, item } => {
                self.materialize(p, mid, out);
                self.materialize_item(item, out);
            }
        }
    }

    fn materialize_item(&self, item: Item, out: &mut Vec<usize>) {
        match item {
            Item::Internal(e) => out.push(e),
            Item::Matched { call, ret } => {
                out.push(call);
                let (y, w) = (self.ends[call].1, self.ends[ret].0);
                if y != w {
                    self.materialize(y, w, out);
                }
                out.push(ret);
            }
        }
    }
}

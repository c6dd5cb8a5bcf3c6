//! Essential parts and trimming, Dyck in/out-splits (plain and trim),
//! amalgamations and the common amalgamation of two in-amalgamations.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::model::{BlockMapSpec, DyckAutomaton, DyckGraph, Kind, Partition, Side, TriAlphabet};
use crate::path::{dyck_reachability, DyckReachability};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EssentialParts {
    pub edges: BTreeSet<usize>,
    pub matched: BTreeSet<(usize, usize)>,
}

/// Greatest set of states such that each has a neighbour (through `steps`,
/// read as `from -> to`) inside the set: the states with an infinite walk.
fn infinite_walk_states(n: usize, steps: &[(usize, usize)], forward: bool) -> Vec<bool> {
    let mut live = vec![true; n];
    loop {
        let mut support = vec![false; n];
        for &(x, z) in steps {
            let (here, there) = if forward { (x, z) } else { (z, x) };
            if live[there] {
                support[here] = true;
            }
        }
        let next: Vec<bool> = (0..n).map(|p| live[p] && support[p]).collect();
        if next == live {
            return live;
        }
        live = next;
    }
}

/// States reachable from `seeds` through `steps` (reversed when `forward` is
/// false), seeds included.
fn closure(n: usize, steps: &[(usize, usize)], seeds: &[bool], forward: bool) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(x, z) in steps {
        if forward {
            adj[x].push(z);
        } else {
            adj[z].push(x);
        }
    }
    let mut seen = seeds.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&p| seeds[p]).collect();
    while let Some(p) = queue.pop_front() {
        for &q in &adj[p] {
            if !seen[q] {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    seen
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Meta {
    Internal(usize),
    Call(usize),
    Return(usize),
    Matched(usize, usize),
}

/// Relation on states stored as bit rows.
#[derive(Clone, PartialEq, Eq)]
struct Relation(Vec<FixedBitSet>);

impl Relation {
    fn empty(n: usize) -> Self {
        Relation(vec![FixedBitSet::with_capacity(n); n])
    }

    fn has(&self, p: usize, q: usize) -> bool {
        self.0[p].contains(q)
    }

    /// Adds the rectangle `rows x cols`.
    fn add_product(&mut self, rows: &FixedBitSet, cols: &FixedBitSet) {
        for p in rows.ones() {
            self.0[p].union_with(cols);
        }
    }

    fn intersect(&mut self, other: &Relation) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.intersect_with(b);
        }
    }
}

/// Dyck reachability (empty paths included) as successor and predecessor rows.
struct Reach {
    succ: Relation,
    pred: Relation,
}

impl Reach {
    fn new(n: usize, d: &DyckReachability) -> Self {
        let mut succ = Relation::empty(n);
        let mut pred = Relation::empty(n);
        for p in 0..n {
            for q in 0..n {
                if d.contains(p, q) {
                    succ.0[p].insert(q);
                    pred.0[q].insert(p);
                }
            }
        }
        Reach { succ, pred }
    }
}

struct Marker<'a> {
    aut: &'a DyckAutomaton,
    reach: &'a Reach,
    comps: &'a [(usize, usize)],
    internal: Vec<bool>,
    parts: EssentialParts,
    sub: BTreeSet<(usize, usize)>,
    /// Pairs `(s,t)` with a Dyck path `u..s` and `t..v` for some open segment `(u,v)`.
    inside: Relation,
}

impl Marker<'_> {
    fn mark_pair(&mut self, c: usize, r: usize) {
        self.parts.edges.insert(c);
        self.parts.edges.insert(r);
        self.parts.matched.insert((c, r));
        let inner = (self.aut.edges[c].target, self.aut.edges[r].source);
        self.segment(inner.0, inner.1);
    }

    /// Every Dyck path from `u` to `v` may replace the one in use.
    fn segment(&mut self, u: usize, v: usize) {
        if self.sub.insert((u, v)) {
            self.inside.add_product(&self.reach.succ.0[u], &self.reach.pred.0[v]);
        }
    }

    fn saturate(&mut self) {
        loop {
            let before = self.sub.len();
            for &(c, r) in self.comps {
                let (x, z) = (self.aut.edges[c].source, self.aut.edges[r].target);
                if self.inside.has(x, z) && !self.parts.matched.contains(&(c, r)) {
                    self.mark_pair(c, r);
                }
            }
            if self.sub.len() == before {
                break;
            }
        }
        for (e, edge) in self.aut.edges.iter().enumerate() {
            if self.internal[e] && self.inside.has(edge.source, edge.target) {
                self.parts.edges.insert(e);
            }
        }
    }
}

/// Edges and matched pairs lying on some bi-infinite admissible path.
///
/// Such a path either nests infinitely deep around some position, or splits
/// into top-level factors (internal edges, matched blocks, unmatched returns,
/// unmatched calls) with every unmatched return before every unmatched call.
/// Both shapes are searched on the Dyck reachability relation; Dyck segments
/// that occur are then opened up to mark the edges and pairs inside them.
pub fn essential_parts(aut: &DyckAutomaton) -> EssentialParts {
    let n = aut.num_states();
    let d = dyck_reachability(aut);
    let reach = Reach::new(n, &d);
    let kinds = aut.kinds();
    let comps: Vec<(usize, usize)> = aut
        .matched
        .iter()
        .copied()
        .filter(|&(c, r)| d.contains(aut.edges[c].target, aut.edges[r].source))
        .collect();
    let mut metas = Vec::new();
    for (e, edge) in aut.edges.iter().enumerate() {
        let meta = match kinds[e] {
            Kind::Internal => Meta::Internal(e),
            Kind::Call => Meta::Call(e),
            Kind::Return => Meta::Return(e),
        };
        metas.push((edge.source, edge.target, meta));
    }
    for &(c, r) in &comps {
        metas.push((aut.edges[c].source, aut.edges[r].target, Meta::Matched(c, r)));
    }
    let left: Vec<(usize, usize)> = metas
        .iter()
        .filter(|(_, _, m)| !matches!(m, Meta::Call(_)))
        .map(|&(x, z, _)| (x, z))
        .collect();
    let right: Vec<(usize, usize)> = metas
        .iter()
        .filter(|(_, _, m)| !matches!(m, Meta::Return(_)))
        .map(|&(x, z, _)| (x, z))
        .collect();
    let left_inf = infinite_walk_states(n, &left, false);
    let right_inf = infinite_walk_states(n, &right, true);
    let to_right = closure(n, &left, &right_inf, false);
    let from_left = closure(n, &right, &left_inf, true);

    let mut marker = Marker {
        aut,
        reach: &reach,
        comps: &comps,
        internal: kinds.iter().map(|&k| k == Kind::Internal).collect(),
        parts: EssentialParts::default(),
        sub: BTreeSet::new(),
        inside: Relation::empty(n),
    };

    for &(x, z, meta) in &metas {
        let as_left = !matches!(meta, Meta::Call(_)) && left_inf[x] && to_right[z];
        let as_right = !matches!(meta, Meta::Return(_)) && from_left[x] && right_inf[z];
        if !(as_left || as_right) {
            continue;
        }
        match meta {
            Meta::Internal(e) | Meta::Call(e) | Meta::Return(e) => {
                marker.parts.edges.insert(e);
            }
            Meta::Matched(c, r) => marker.mark_pair(c, r),
        }
    }

    // infinitely nested paths: a Dyck segment (u,v) steps outwards to (x,z)
    // through a matched pair c: x -> y, r: w -> z with Dyck segments y..u and
    // v..w; segments with an infinite outward walk are nested
    let mut live = reach.succ.clone();
    loop {
        let mut support = Relation::empty(n);
        let mut inner = BTreeSet::new();
        for &(c, r) in &comps {
            let (x, z) = (aut.edges[c].source, aut.edges[r].target);
            let (y, w) = (aut.edges[c].target, aut.edges[r].source);
            if live.has(x, z) && inner.insert((y, w)) {
                support.add_product(&reach.succ.0[y], &reach.pred.0[w]);
            }
        }
        let mut next = live.clone();
        next.intersect(&support);
        if next == live {
            break;
        }
        live = next;
    }
    for &(c, r) in &comps {
        if live.has(aut.edges[c].source, aut.edges[r].target) {
            marker.mark_pair(c, r);
        }
    }
    marker.saturate();
    marker.parts
}

/// Keeps the essential edges and matched pairs and drops isolated states.
pub fn trim(aut: &DyckAutomaton) -> DyckAutomaton {
    trim_with_maps(aut).0
}

/// `trim` with the maps new state -> old state and new edge -> old edge.
pub fn trim_with_maps(aut: &DyckAutomaton) -> (DyckAutomaton, Vec<usize>, Vec<usize>) {
    let parts = essential_parts(aut);
    aut.restrict(
        |e| parts.edges.contains(&e),
        |c, r| parts.matched.contains(&(c, r)),
        true,
    )
}

/// Alphabet of edge-index symbols, typed like the edges.
pub fn edge_alphabet(aut: &DyckAutomaton) -> TriAlphabet {
    let mut alphabet = TriAlphabet::default();
    for (e, k) in aut.kinds().into_iter().enumerate() {
        alphabet.part_mut(k).push(e.to_string());
    }
    alphabet
}

/// What a split did: the partition, the collapse of new states onto old ones
/// and the induced conjugacy of edge shifts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitRecord {
    pub side: Side,
    pub trim: bool,
    pub partition: Partition,
    /// New state -> old state.
    pub state_map: Vec<usize>,
    /// New edge -> old edge.
    pub edge_map: Vec<usize>,
    /// Old edge shift -> new edge shift: `(1,0)` for in-splits, `(0,1)` for
    /// out-splits, over edge-index symbols.
    pub split_map: BlockMapSpec,
    /// New edge shift -> old edge shift, `(0,0)`.
    pub amalgamation_map: BlockMapSpec,
}

pub fn split_state_names(aut: &DyckAutomaton, state: usize, k: usize) -> Vec<String> {
    let name = &aut.states[state];
    if k == 1 {
        vec![name.clone()]
    } else {
        (1..=k).map(|i| format!("{name}|{i}")).collect()
    }
}

/// Dyck in-split (out-split) of `part.state` along `part`, with default names
/// `p|1..p|k` for the new states.
pub fn split(aut: &DyckAutomaton, part: &Partition, trim: bool) -> Result<(DyckAutomaton, SplitRecord)> {
    let names = split_state_names(aut, part.state, part.classes.len());
    split_named(aut, part, trim, &names)
}

pub fn in_split(aut: &DyckAutomaton, part: &Partition) -> Result<(DyckAutomaton, SplitRecord)> {
    split(
        aut,
        &Partition {
            side: Side::In,
            ..part.clone()
        },
        false,
    )
}

pub fn out_split(aut: &DyckAutomaton, part: &Partition) -> Result<(DyckAutomaton, SplitRecord)> {
    split(
        aut,
        &Partition {
            side: Side::Out,
            ..part.clone()
        },
        false,
    )
}

pub fn trim_in_split(aut: &DyckAutomaton, part: &Partition) -> Result<(DyckAutomaton, SplitRecord)> {
    split(
        aut,
        &Partition {
            side: Side::In,
            ..part.clone()
        },
        true,
    )
}

pub fn trim_out_split(aut: &DyckAutomaton, part: &Partition) -> Result<(DyckAutomaton, SplitRecord)> {
    split(
        aut,
        &Partition {
            side: Side::Out,
            ..part.clone()
        },
        true,
    )
}

/// The split graph with its state and edge collapses and, for each pair of
/// consecutive old edges, the new edge it becomes.
pub(crate) struct SplitCore {
    pub(crate) graph: DyckAutomaton,
    pub(crate) state_map: Vec<usize>,
    pub(crate) edge_map: Vec<usize>,
    table: Vec<(usize, usize, usize)>,
}

pub(crate) fn split_core(aut: &DyckAutomaton, part: &Partition, trim: bool, names: &[String]) -> Result<SplitCore> {
    part.check(aut)?;
    let p = part.state;
    let k = part.classes.len();
    if names.len() != k {
        return Err(Error::InvalidPartition(format!(
            "{} names for {k} classes",
            names.len()
        )));
    }
    for name in names {
        if aut.states.iter().enumerate().any(|(q, s)| q != p && s == name) {
            return Err(Error::InvalidPartition(format!("state name `{name}` already in use")));
        }
    }
    let mut class_of = HashMap::new();
    for (i, class) in part.classes.iter().enumerate() {
        for &e in class {
            class_of.insert(e, i);
        }
    }
    let mut out = DyckAutomaton::new(aut.alphabet.clone());
    let mut copies: Vec<Vec<usize>> = Vec::with_capacity(aut.num_states());
    let mut state_map = Vec::new();
    for (q, name) in aut.states.iter().enumerate() {
        if q == p {
            copies.push(names.iter().map(|s| out.add_state(s.clone())).collect());
            state_map.extend(std::iter::repeat_n(p, k));
        } else {
            copies.push(vec![out.add_state(name.clone())]);
            state_map.push(q);
        }
    }
    let new_states: BTreeSet<usize> = copies[p].iter().copied().collect();
    // the copy of an old edge is keyed by the endpoint that varies
    let mut copy_of: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edge_map = Vec::new();
    let mut copies_of_edge: Vec<Vec<usize>> = vec![Vec::new(); aut.num_edges()];
    for (e, edge) in aut.edges.iter().enumerate() {
        let (sources, targets) = match part.side {
            Side::In => {
                let t = if edge.target == p {
                    copies[p][class_of[&e]]
                } else {
                    copies[edge.target][0]
                };
                (copies[edge.source].clone(), vec![t])
            }
            Side::Out => {
                let s = if edge.source == p {
                    copies[p][class_of[&e]]
                } else {
                    copies[edge.source][0]
                };
                (vec![s], copies[edge.target].clone())
            }
        };
        for &s in &sources {
            for &t in &targets {
                let ne = out.add_edge(s, edge.label.clone(), t);
                edge_map.push(e);
                copies_of_edge[e].push(ne);
                copy_of.insert((e, if part.side == Side::In { s } else { t }), ne);
            }
        }
    }
    for &(c, r) in &aut.matched {
        for &c2 in &copies_of_edge[c] {
            for &r2 in &copies_of_edge[r] {
                out.matched.insert((c2, r2));
            }
        }
    }
    // split map over edge symbols
    let mut table: Vec<(usize, usize, usize)> = Vec::new();
    let adj = aut.adjacency();
    for (e, edge) in aut.edges.iter().enumerate() {
        match part.side {
            Side::In => {
                for &f in &adj.inn[edge.source] {
                    let s = if edge.source == p {
                        copies[p][class_of[&f]]
                    } else {
                        copies[edge.source][0]
                    };
                    table.push((f, e, copy_of[&(e, s)]));
                }
            }
            Side::Out => {
                for &g in &adj.out[edge.target] {
                    let t = if edge.target == p {
                        copies[p][class_of[&g]]
                    } else {
                        copies[edge.target][0]
                    };
                    table.push((e, g, copy_of[&(e, t)]));
                }
            }
        }
    }

    let (out, edge_map, table) = if trim {
        let parts = essential_parts(&out);
        let touches = |e: usize| {
            let edge = &out.edges[e];
            match part.side {
                Side::In => new_states.contains(&edge.source),
                Side::Out => new_states.contains(&edge.target),
            }
        };
        let (trimmed, _, kept) = out.restrict(
            |e| !touches(e) || parts.edges.contains(&e),
            |c, r| !(touches(c) || touches(r)) || parts.matched.contains(&(c, r)),
            false,
        );
        let mut renumber = vec![usize::MAX; out.num_edges()];
        for (i, &e) in kept.iter().enumerate() {
            renumber[e] = i;
        }
        let edge_map: Vec<usize> = kept.iter().map(|&e| edge_map[e]).collect();
        let table = table
            .into_iter()
            .filter(|&(_, _, ne)| renumber[ne] != usize::MAX)
            .map(|(x, y, ne)| (x, y, renumber[ne]))
            .collect();
        (trimmed, edge_map, table)
    } else {
        (out, edge_map, table)
    };

    Ok(SplitCore {
        graph: out,
        state_map,
        edge_map,
        table,
    })
}

pub fn split_named(
    aut: &DyckAutomaton,
    part: &Partition,
    trim: bool,
    names: &[String],
) -> Result<(DyckAutomaton, SplitRecord)> {
    let SplitCore {
        graph: out,
        state_map,
        edge_map,
        table,
    } = split_core(aut, part, trim, names)?;
    let source_alphabet = edge_alphabet(aut);
    let target_alphabet = edge_alphabet(&out);
    let (m, a) = match part.side {
        Side::In => (1, 0),
        Side::Out => (0, 1),
    };
    let mut split_map = BlockMapSpec::new(m, a, target_alphabet.clone());
    for (x, y, ne) in table {
        split_map
            .table
            .insert(vec![x.to_string(), y.to_string()], ne.to_string());
    }
    let mut amalgamation_map = BlockMapSpec::new(0, 0, source_alphabet);
    for (ne, &e) in edge_map.iter().enumerate() {
        amalgamation_map.table.insert(vec![ne.to_string()], e.to_string());
    }
    let record = SplitRecord {
        side: part.side,
        trim,
        partition: part.clone(),
        state_map,
        edge_map,
        split_map,
        amalgamation_map,
    };
    Ok((out, record))
}

/// Splits a Dyck graph; the result is relabelled so that edges are their own
/// labels again.
pub fn split_graph(g: &DyckGraph, part: &Partition, trim: bool) -> Result<(DyckGraph, SplitRecord)> {
    let (out, record) = split(&g.kind_automaton(), part, trim)?;
    Ok((DyckGraph::from_automaton(&out), record))
}

/// Name of a merged state: the common base of `base|i` names, otherwise the
/// names joined by `+`.
pub fn merged_name(names: &[&str]) -> String {
    let bases: Vec<Option<&str>> = names
        .iter()
        .map(|n| match n.rsplit_once('|') {
            Some((base, idx)) if !idx.is_empty() && idx.chars().all(|c| c.is_ascii_digit()) => Some(base),
            _ => None,
        })
        .collect();
    match bases.first() {
        Some(Some(base)) if bases.iter().all(|b| b == &Some(*base)) => base.to_string(),
        _ => names.join("+"),
    }
}

/// Result of amalgamating one or more classes of states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Amalgamation {
    pub automaton: DyckAutomaton,
    /// Old state -> new state.
    pub state_map: Vec<usize>,
    /// Old edge -> new edge.
    pub edge_map: Vec<usize>,
}

impl Amalgamation {
    /// The `(0,0)` map from old edges to new edges.
    pub fn block_map(&self, source: &DyckAutomaton) -> BlockMapSpec {
        let mut map = BlockMapSpec::new(0, 0, edge_alphabet(&self.automaton));
        for e in 0..source.num_edges() {
            map.table.insert(vec![e.to_string()], self.edge_map[e].to_string());
        }
        map
    }
}

/// Merges one class. The shared side (out-edges for an in-amalgamation,
/// in-edges for an out-amalgamation) is identified across members by
/// `(label, other endpoint, occurrence)`.
fn merge_class(
    aut: &DyckAutomaton,
    members: &[usize],
    side: Side,
    trim: bool,
    name: &str,
) -> Result<(DyckAutomaton, Vec<usize>, Vec<usize>)> {
    let mut members = members.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.is_empty() {
        return Err(Error::IllegalAmalgamation("empty class".into()));
    }
    if let Some(&q) = members.iter().find(|&&q| q >= aut.num_states()) {
        return Err(Error::InvalidState(q));
    }
    let is_member = |q: usize| members.binary_search(&q).is_ok();
    let shared = |e: usize| {
        let edge = &aut.edges[e];
        match side {
            Side::In => is_member(edge.source),
            Side::Out => is_member(edge.target),
        }
    };
    let member_of = |e: usize| {
        let edge = &aut.edges[e];
        if side == Side::In {
            edge.source
        } else {
            edge.target
        }
    };
    let other_end = |e: usize| {
        let edge = &aut.edges[e];
        if side == Side::In {
            edge.target
        } else {
            edge.source
        }
    };

    let rep = members[0];
    let mut out = DyckAutomaton::new(aut.alphabet.clone());
    let mut state_map = vec![usize::MAX; aut.num_states()];
    for (q, s) in aut.states.iter().enumerate() {
        if q == rep {
            state_map[q] = out.add_state(name.to_string());
        } else if !is_member(q) {
            state_map[q] = out.add_state(s.clone());
        }
    }
    for &q in &members {
        state_map[q] = state_map[rep];
    }

    // shared edges per member, keyed by (label, other endpoint)
    type Key = (String, usize);
    let mut per_member: BTreeMap<usize, BTreeMap<Key, Vec<usize>>> = BTreeMap::new();
    for &q in &members {
        per_member.insert(q, BTreeMap::new());
    }
    for e in (0..aut.num_edges()).filter(|&e| shared(e)) {
        per_member
            .get_mut(&member_of(e))
            .unwrap()
            .entry((aut.edges[e].label.clone(), other_end(e)))
            .or_default()
            .push(e);
    }
    if !trim {
        let first = &per_member[&rep];
        for &q in &members[1..] {
            let here = &per_member[&q];
            let count = |m: &BTreeMap<Key, Vec<usize>>, k: &Key| m.get(k).map_or(0, Vec::len);
            for key in first.keys().chain(here.keys()) {
                if count(first, key) != count(here, key) {
                    let dir = if side == Side::In { "out" } else { "in" };
                    return Err(Error::IllegalAmalgamation(format!(
                        "states `{}` and `{}` differ on {dir}-edges labelled `{}` at `{}`",
                        aut.states[rep], aut.states[q], key.0, aut.states[key.1]
                    )));
                }
            }
        }
    }

    let mut edge_map = vec![usize::MAX; aut.num_edges()];
    let mut merged: HashMap<(Key, usize), usize> = HashMap::new();
    let mut occurrence: HashMap<usize, usize> = HashMap::new();
    for list in per_member.values().flat_map(BTreeMap::values) {
        for (i, &e) in list.iter().enumerate() {
            occurrence.insert(e, i);
        }
    }
    for (e, edge) in aut.edges.iter().enumerate() {
        let s = state_map[edge.source];
        let t = state_map[edge.target];
        if shared(e) {
            let key = ((edge.label.clone(), other_end(e)), occurrence[&e]);
            let ne = *merged
                .entry(key)
                .or_insert_with(|| out.add_edge(s, edge.label.clone(), t));
            edge_map[e] = ne;
        } else {
            edge_map[e] = out.add_edge(s, edge.label.clone(), t);
        }
    }
    // a trim split only ever restores essential structure at the members
    let parts = if trim {
        essential_parts(aut)
    } else {
        EssentialParts::default()
    };
    let keep_edge = |e: usize| !trim || !shared(e) || parts.edges.contains(&e);
    let keep_pair = |c: usize, r: usize| !trim || !(shared(c) || shared(r)) || parts.matched.contains(&(c, r));
    let reference = aut.restrict(keep_edge, keep_pair, false).0;
    for &(c, r) in aut.matched.iter().filter(|&&(c, r)| keep_pair(c, r)) {
        out.matched.insert((edge_map[c], edge_map[r]));
    }
    if !trim {
        let mut fibre = vec![0usize; out.num_edges()];
        for &ne in &edge_map {
            fibre[ne] += 1;
        }
        let mut hits: HashMap<(usize, usize), usize> = HashMap::new();
        for &(c, r) in &aut.matched {
            *hits.entry((edge_map[c], edge_map[r])).or_default() += 1;
        }
        for (&(c, r), &count) in &hits {
            if count != fibre[c] * fibre[r] {
                let e = &out.edges[c];
                let f = &out.edges[r];
                return Err(Error::IllegalAmalgamation(format!(
                    "matching is not uniform on the copies of ({},{},{}) and ({},{},{})",
                    out.states[e.source],
                    e.label,
                    out.states[e.target],
                    out.states[f.source],
                    f.label,
                    out.states[f.target]
                )));
            }
        }
    }

    // the merge is legal exactly when splitting back reproduces the input
    let merged_state = state_map[rep];
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    let varying: Vec<usize> = match side {
        Side::In => out.in_edges(merged_state),
        Side::Out => out.out_edges(merged_state),
    };
    let preimage_member = |ne: usize| -> Option<usize> {
        (0..aut.num_edges()).find(|&e| edge_map[e] == ne).map(|e| {
            if side == Side::In {
                aut.edges[e].target
            } else {
                aut.edges[e].source
            }
        })
    };
    for ne in varying {
        let q = preimage_member(ne).expect("every quotient edge has a preimage");
        let i = members.iter().position(|&m| m == q).expect("edge ends at a member");
        classes[i].push(ne);
    }
    if classes.iter().any(Vec::is_empty) {
        return Err(Error::IllegalAmalgamation(format!(
            "a member of {{{}}} has no {} edges",
            members
                .iter()
                .map(|&q| aut.states[q].as_str())
                .collect::<Vec<_>>()
                .join(","),
            if side == Side::In { "incoming" } else { "outgoing" }
        )));
    }
    let names: Vec<String> = members.iter().map(|&q| aut.states[q].clone()).collect();
    let part = Partition::new(merged_state, classes, side);
    let (back, _) = split_named(&out, &part, trim, &names)?;
    if back.canonical() != reference.canonical() {
        return Err(Error::IllegalAmalgamation(format!(
            "splitting `{name}` back does not give the input automaton"
        )));
    }
    Ok((out, state_map, edge_map))
}

/// Amalgamates the given classes of states, one class at a time, with the
/// merged states named by [`merged_name`].
pub fn amalgamate(aut: &DyckAutomaton, classes: &[Vec<usize>], side: Side, trim: bool) -> Result<Amalgamation> {
    let named: Vec<(Vec<usize>, String)> = classes
        .iter()
        .map(|c| {
            let names: Vec<&str> = c
                .iter()
                .filter_map(|&q| aut.states.get(q).map(String::as_str))
                .collect();
            (c.clone(), merged_name(&names))
        })
        .collect();
    amalgamate_named(aut, &named, side, trim)
}

pub fn amalgamate_named(
    aut: &DyckAutomaton,
    classes: &[(Vec<usize>, String)],
    side: Side,
    trim: bool,
) -> Result<Amalgamation> {
    let mut seen = BTreeSet::new();
    for (class, _) in classes {
        for &q in class {
            if q >= aut.num_states() {
                return Err(Error::InvalidState(q));
            }
            if !seen.insert(q) {
                return Err(Error::IllegalAmalgamation(format!(
                    "state `{}` appears in two classes",
                    aut.states[q]
                )));
            }
        }
    }
    let mut current = aut.clone();
    let mut state_map: Vec<usize> = (0..aut.num_states()).collect();
    let mut edge_map: Vec<usize> = (0..aut.num_edges()).collect();
    for (class, name) in classes {
        let members: Vec<usize> = class.iter().map(|&q| state_map[q]).collect();
        let (next, smap, emap) = merge_class(&current, &members, side, trim, name)?;
        for s in state_map.iter_mut() {
            *s = smap[*s];
        }
        for e in edge_map.iter_mut() {
            *e = emap[*e];
        }
        current = next;
    }
    Ok(Amalgamation {
        automaton: current,
        state_map,
        edge_map,
    })
}

pub fn in_amalgamate(aut: &DyckAutomaton, classes: &[Vec<usize>]) -> Result<DyckAutomaton> {
    Ok(amalgamate(aut, classes, Side::In, false)?.automaton)
}

pub fn out_amalgamate(aut: &DyckAutomaton, classes: &[Vec<usize>]) -> Result<DyckAutomaton> {
    Ok(amalgamate(aut, classes, Side::Out, false)?.automaton)
}

pub fn trim_in_amalgamate(aut: &DyckAutomaton, classes: &[Vec<usize>]) -> Result<DyckAutomaton> {
    Ok(amalgamate(aut, classes, Side::In, true)?.automaton)
}

pub fn amalgamate_graph(
    g: &DyckGraph,
    classes: &[Vec<usize>],
    side: Side,
    trim: bool,
) -> Result<(DyckGraph, Amalgamation)> {
    let am = amalgamate(&g.kind_automaton(), classes, side, trim)?;
    Ok((DyckGraph::from_automaton(&am.automaton), am))
}

/// Two in-amalgamations of `g1` completed to a common one: `g4` with
/// amalgamation maps `omega: g2 -> g4` and `theta: g3 -> g4` such that
/// `phi` then `omega` equals `psi` then `theta` on edges.
#[derive(Clone, Debug)]
pub struct CommonAmalgamation {
    pub g2: DyckGraph,
    pub g3: DyckGraph,
    pub g4: DyckGraph,
    /// Edge maps g1 -> g2, g1 -> g3, g2 -> g4, g3 -> g4.
    pub phi: Vec<usize>,
    pub psi: Vec<usize>,
    pub omega: Vec<usize>,
    pub theta: Vec<usize>,
}

pub fn common_amalgamation(g1: &DyckGraph, phi_class: &[usize], psi_class: &[usize]) -> Result<CommonAmalgamation> {
    let base = g1.kind_automaton();
    let name_of = |class: &[usize]| {
        let mut sorted = class.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let names: Vec<&str> = sorted.iter().map(|&q| base.states[q].as_str()).collect();
        merged_name(&names)
    };
    let phi = amalgamate_named(&base, &[(phi_class.to_vec(), name_of(phi_class))], Side::In, false)?;
    let psi = amalgamate_named(&base, &[(psi_class.to_vec(), name_of(psi_class))], Side::In, false)?;

    let disjoint = phi_class.iter().all(|q| !psi_class.contains(q));
    let classes4: Vec<Vec<usize>> = if disjoint {
        vec![phi_class.to_vec(), psi_class.to_vec()]
    } else {
        let mut union: Vec<usize> = phi_class.iter().chain(psi_class).copied().collect();
        union.sort_unstable();
        union.dedup();
        vec![union]
    };
    let named4: Vec<(Vec<usize>, String)> = classes4.iter().map(|c| (c.clone(), name_of(c))).collect();
    let direct = amalgamate_named(&base, &named4, Side::In, false)?;

    // the remaining merge seen from g2 (resp. g3)
    let follow = |first: &Amalgamation| -> Result<Amalgamation> {
        let classes: Vec<(Vec<usize>, String)> = named4
            .iter()
            .map(|(c, name)| {
                let mut image: Vec<usize> = c.iter().map(|&q| first.state_map[q]).collect();
                image.sort_unstable();
                image.dedup();
                (image, name.clone())
            })
            .filter(|(image, _)| image.len() > 1)
            .collect();
        amalgamate_named(&first.automaton, &classes, Side::In, false)
    };
    let omega = follow(&phi)?;
    let theta = follow(&psi)?;

    let target = direct.automaton.canonical();
    for (label, am) in [("omega", &omega), ("theta", &theta)] {
        if am.automaton.canonical() != target {
            return Err(Error::IllegalAmalgamation(format!(
                "{label} does not reach the common amalgamation"
            )));
        }
    }
    // identify both composites with the direct quotient through the edges of g1
    let align = |first: &Amalgamation, second: &Amalgamation, label: &str| -> Result<Vec<usize>> {
        let mut to_direct = vec![usize::MAX; second.automaton.num_edges()];
        for e in 0..base.num_edges() {
            let x = second.edge_map[first.edge_map[e]];
            let y = direct.edge_map[e];
            if to_direct[x] == usize::MAX {
                to_direct[x] = y;
            } else if to_direct[x] != y {
                return Err(Error::IllegalAmalgamation(format!(
                    "{label}: composite differs from the direct quotient"
                )));
            }
        }
        Ok(second.edge_map.iter().map(|&x| to_direct[x]).collect())
    };
    let omega_map = align(&phi, &omega, "omega")?;
    let theta_map = align(&psi, &theta, "theta")?;
    Ok(CommonAmalgamation {
        g2: DyckGraph::from_automaton(&phi.automaton),
        g3: DyckGraph::from_automaton(&psi.automaton),
        g4: DyckGraph::from_automaton(&direct.automaton),
        phi: phi.edge_map,
        psi: psi.edge_map,
        omega: omega_map,
        theta: theta_map,
    })
}

//! Proper block conjugacies between edge-Dyck shifts: bounded verification,
//! the memory and anticipation reduction steps, the final pair-graph step and
//! certificates that replay a whole decomposition into in-splits.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::language::{for_each_centered_block, format_word, WordRunner};
use crate::model::{BlockMapSpec, DyckGraph, Partition, Side, Symbol, Word};
use crate::path::for_each_admissible_path;
use crate::surgery::{edge_alphabet, split_core, split_named, trim_with_maps, SplitRecord};

/// A proper block map between two edge-Dyck shifts together with its inverse.
/// Both tables are over edge-index symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProperConjugacy {
    pub source: DyckGraph,
    pub target: DyckGraph,
    pub forward: BlockMapSpec,
    pub inverse: BlockMapSpec,
    /// Longest words used by the bounded checks.
    pub bound: usize,
}

impl ProperConjugacy {
    pub fn new(source: DyckGraph, target: DyckGraph, forward: BlockMapSpec, inverse: BlockMapSpec) -> Self {
        let bound = default_bound(&forward, &inverse);
        ProperConjugacy {
            source,
            target,
            forward,
            inverse,
            bound,
        }
    }

    pub fn identity(g: &DyckGraph) -> Self {
        let id = identity_map(g);
        ProperConjugacy::new(g.clone(), g.clone(), id.clone(), id)
    }

    /// The conjugacy `g -> g'` of a split, with the amalgamation as inverse.
    pub fn from_split(g: &DyckGraph, split: &DyckGraph, record: &SplitRecord) -> Self {
        ProperConjugacy::new(
            g.clone(),
            split.clone(),
            record.split_map.clone(),
            record.amalgamation_map.clone(),
        )
    }

    pub fn inverted(&self) -> Self {
        ProperConjugacy {
            source: self.target.clone(),
            target: self.source.clone(),
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            bound: self.bound,
        }
    }

    /// `(m, a, m', a')`: memory and anticipation of both directions.
    pub fn orders(&self) -> (usize, usize, usize, usize) {
        (
            self.forward.memory,
            self.forward.anticipation,
            self.inverse.memory,
            self.inverse.anticipation,
        )
    }
}

pub fn default_bound(forward: &BlockMapSpec, inverse: &BlockMapSpec) -> usize {
    forward.memory + forward.anticipation + inverse.memory + inverse.anticipation + 4
}

fn sym(e: usize) -> Symbol {
    e.to_string()
}

fn edge_of(s: &Symbol) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::BlockMap(format!("`{s}` is not an edge index")))
}

fn edges_of(w: &[Symbol]) -> Result<Vec<usize>> {
    w.iter().map(edge_of).collect()
}

pub fn identity_map(g: &DyckGraph) -> BlockMapSpec {
    let mut map = BlockMapSpec::new(0, 0, edge_alphabet(g.automaton()));
    for e in 0..g.num_edges() {
        map.table.insert(vec![sym(e)], sym(e));
    }
    map
}

/// `g ∘ f` on the admissible windows of `source` where both are defined.
pub fn compose_maps(source: &DyckGraph, f: &BlockMapSpec, g: &BlockMapSpec) -> BlockMapSpec {
    let mut out = BlockMapSpec::new(f.memory + g.memory, f.anticipation + g.anticipation, g.target.clone());
    out.proper = f.proper && g.proper;
    let aut = source.automaton();
    for_each_admissible_path(aut, out.window(), |path| {
        let w = aut.labels(path);
        if let Some(v) = f.apply(&w).ok().and_then(|u| g.apply(&u).ok()) {
            out.table.insert(w, v[0].clone());
        }
    });
    out
}

/// Outcome of a bounded check; failures are explained in the transcript.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    pub transcript: Vec<String>,
}

impl Verification {
    fn new() -> Self {
        Verification {
            ok: true,
            transcript: Vec::new(),
        }
    }

    fn fail(&mut self, line: String) {
        self.ok = false;
        self.transcript.push(line);
    }

    fn absorb(&mut self, other: Verification) {
        self.ok &= other.ok;
        self.transcript.extend(other.transcript);
    }
}

/// Bounded check of the conjugacy hypotheses: both tables proper, images of
/// centered blocks admissible, and each map undoing the other on the
/// positions where both windows fit. Words up to `c.bound`, margin `c.bound`.
pub fn verify_block_conjugacy(c: &ProperConjugacy) -> Verification {
    let mut v = Verification::new();
    for (name, map, from, to) in [
        ("forward", &c.forward, &c.source, &c.target),
        ("inverse", &c.inverse, &c.target, &c.source),
    ] {
        if !map.proper {
            v.fail(format!("{name}: map is not proper"));
        }
        if map.target != to.automaton().alphabet {
            v.fail(format!(
                "{name}: target alphabet differs from the edges of the target graph"
            ));
        }
        for line in map.violations(&from.automaton().alphabet) {
            v.fail(format!("{name}: {line}"));
        }
    }
    if !v.ok {
        return v;
    }
    check_direction(&mut v, "forward", c, false);
    check_direction(&mut v, "inverse", c, true);
    if v.ok {
        v.transcript.push(format!(
            "conjugacy verified on centered blocks up to length {}",
            c.bound
        ));
    }
    v
}

fn check_direction(v: &mut Verification, name: &str, c: &ProperConjugacy, backwards: bool) {
    let (src, f, tgt, g) = if backwards {
        (&c.target, &c.inverse, &c.source, &c.forward)
    } else {
        (&c.source, &c.forward, &c.target, &c.inverse)
    };
    let runner = WordRunner::new(tgt.automaton());
    let mut checked = 0usize;
    let mut failure = None;
    for_each_centered_block(src.automaton(), c.bound, c.bound, |w| {
        if failure.is_some() || w.len() < f.window() {
            return;
        }
        checked += 1;
        failure = check_word(name, w, f, &runner, g);
    });
    if let Some(line) = failure {
        return v.fail(line);
    }
    v.transcript.push(format!("{name}: {checked} centered blocks checked"));
}

fn check_word(name: &str, w: &[Symbol], f: &BlockMapSpec, tgt: &WordRunner, g: &BlockMapSpec) -> Option<String> {
    let u = match f.apply(w) {
        Ok(u) => u,
        Err(e) => return Some(format!("{name}: {e} in [{}]", format_word(w))),
    };
    if !tgt.accepts(&u) {
        return Some(format!(
            "{name}: image [{}] of [{}] is not admissible",
            format_word(&u),
            format_word(w)
        ));
    }
    if u.len() < g.window() {
        return None;
    }
    let back = match g.apply(&u) {
        Ok(b) => b,
        Err(e) => return Some(format!("{name}: {e} in [{}]", format_word(&u))),
    };
    let off = f.memory + g.memory;
    if back[..] != w[off..off + back.len()] {
        return Some(format!(
            "{name}: [{}] comes back as [{}]",
            format_word(&w[off..off + back.len()]),
            format_word(&back)
        ));
    }
    None
}

/// A replayable graph operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Operation {
    Split {
        side: Side,
        trim: bool,
        state: String,
        classes: Vec<Vec<usize>>,
        names: Vec<String>,
    },
    Trim,
}

pub fn apply_operation(g: &DyckGraph, op: &Operation) -> Result<DyckGraph> {
    let aut = g.kind_automaton();
    let out = match op {
        Operation::Trim => trim_with_maps(&aut).0,
        Operation::Split {
            side,
            trim,
            state,
            classes,
            names,
        } => {
            let part = Partition::new(aut.state(state)?, classes.clone(), *side);
            split_named(&aut, &part, *trim, names)?.0
        }
    };
    Ok(DyckGraph::from_automaton(&out))
}

pub fn apply_operations(g: &DyckGraph, ops: &[Operation]) -> Result<DyckGraph> {
    ops.iter().try_fold(g.clone(), |g, op| apply_operation(&g, op))
}

/// Every state split at once, realized as one single-state split per
/// original state. The edges on the split side are grouped by `key` of the
/// original edge.
struct FullSplit {
    graph: DyckGraph,
    ops: Vec<Operation>,
    /// New edge -> old edge.
    origin: Vec<usize>,
    /// New state -> old state.
    state_origin: Vec<usize>,
    /// New state -> key of its class.
    tag: Vec<usize>,
    /// In-splits: `(key of the edge entering the source, old edge)`;
    /// out-splits: `(old edge, key of the edge leaving the target)`.
    pairs: HashMap<(usize, usize), usize>,
}

fn full_split(g: &DyckGraph, side: Side, trim: bool, key: impl Fn(usize) -> usize) -> Result<FullSplit> {
    let mut current = g.kind_automaton();
    let mut origin: Vec<usize> = (0..current.num_edges()).collect();
    let mut state_origin: Vec<usize> = (0..current.num_states()).collect();
    let mut tag = vec![usize::MAX; current.num_states()];
    let mut ops = Vec::new();
    for name in &g.automaton().states {
        let p = current.state(name)?;
        let edges = match side {
            Side::In => current.in_edges(p),
            Side::Out => current.out_edges(p),
        };
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for e in edges {
            classes.entry(key(origin[e])).or_default().push(e);
        }
        if classes.is_empty() {
            return Err(Error::Precondition(format!(
                "state `{name}` has no {} edges; trim first",
                if side == Side::In { "incoming" } else { "outgoing" }
            )));
        }
        let keys: Vec<usize> = classes.keys().copied().collect();
        let names: Vec<String> = keys.iter().map(|k| format!("{name}|{k}")).collect();
        let part = Partition::new(p, classes.into_values().collect(), side);
        let record = split_core(&current, &part, trim, &names)?;
        ops.push(Operation::Split {
            side,
            trim,
            state: name.clone(),
            classes: part.classes,
            names,
        });
        origin = record.edge_map.iter().map(|&e| origin[e]).collect();
        let mut copies = keys.iter();
        tag = record
            .state_map
            .iter()
            .map(|&q| if q == p { *copies.next().unwrap() } else { tag[q] })
            .collect();
        state_origin = record.state_map.iter().map(|&q| state_origin[q]).collect();
        current = record.graph;
    }
    let mut pairs = HashMap::new();
    for (e, edge) in current.edges.iter().enumerate() {
        let k = match side {
            Side::In => (tag[edge.source], origin[e]),
            Side::Out => (origin[e], tag[edge.target]),
        };
        pairs.insert(k, e);
    }
    Ok(FullSplit {
        graph: DyckGraph::from_automaton(&current),
        ops,
        origin,
        state_origin,
        tag,
        pairs,
    })
}

impl FullSplit {
    fn pair(&self, x: usize, y: usize) -> Option<usize> {
        self.pairs.get(&(x, y)).copied()
    }

    fn pair_word(&self, w: &[usize]) -> Option<Word> {
        w.windows(2).map(|xy| self.pair(xy[0], xy[1]).map(sym)).collect()
    }

    /// The `(1,0)` (in) or `(0,1)` (out) splitting map of old edges, with the
    /// key applied to the edge on the split side.
    fn splitting_map(&self, old: &DyckGraph, side: Side, key: impl Fn(usize) -> usize) -> BlockMapSpec {
        let (m, a) = if side == Side::In { (1, 0) } else { (0, 1) };
        let mut map = BlockMapSpec::new(m, a, edge_alphabet(self.graph.automaton()));
        let adj = old.automaton().adjacency();
        for x in 0..old.num_edges() {
            for &y in &adj.out[old.target(x)] {
                let k = if side == Side::In { (key(x), y) } else { (x, key(y)) };
                if let Some(e) = self.pair(k.0, k.1) {
                    map.table.insert(vec![sym(x), sym(y)], sym(e));
                }
            }
        }
        map
    }
}

/// One application of a reduction lemma.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub conjugacy: ProperConjugacy,
    pub source_ops: Vec<Operation>,
    pub target_ops: Vec<Operation>,
    /// Old source edges -> new source edges.
    pub source_split: BlockMapSpec,
    /// Old target edges -> new target edges, when the target is split too.
    pub target_split: Option<BlockMapSpec>,
    /// Factorization identity and the bounded check of the new conjugacy.
    pub verification: Verification,
}

pub fn reduce_memory_step(c: &ProperConjugacy) -> Result<Reduction> {
    forward_step(c, Side::In)
}

pub fn reduce_anticipation_step(c: &ProperConjugacy) -> Result<Reduction> {
    forward_step(c, Side::Out)
}

pub fn reduce_inverse_memory_step(c: &ProperConjugacy) -> Result<Reduction> {
    inverse_step(c, Side::In)
}

pub fn reduce_inverse_anticipation_step(c: &ProperConjugacy) -> Result<Reduction> {
    inverse_step(c, Side::Out)
}

/// Complete in-split (out-split) of the source; the forward map loses one
/// step of memory (anticipation) and the inverse gains one.
fn forward_step(c: &ProperConjugacy, side: Side) -> Result<Reduction> {
    let (m, a, mi, ai) = c.orders();
    if (side == Side::In && m == 0) || (side == Side::Out && a == 0) {
        return Err(Error::Precondition(format!(
            "forward {} is already 0",
            if side == Side::In { "memory" } else { "anticipation" }
        )));
    }
    let split = full_split(&c.source, side, false, |e| e)?;
    let (nm, na, nmi, nai) = match side {
        Side::In => (m - 1, a, mi + 1, ai),
        Side::Out => (m, a - 1, mi, ai + 1),
    };
    let mut forward = BlockMapSpec::new(nm, na, c.forward.target.clone());
    for (w, out) in &c.forward.table {
        if let Some(w2) = split.pair_word(&edges_of(w)?) {
            forward.table.insert(w2, out.clone());
        }
    }
    let mut inverse = BlockMapSpec::new(nmi, nai, edge_alphabet(split.graph.automaton()));
    let k = c.inverse.window();
    let target = c.target.automaton();
    let mut failure = None;
    for_each_admissible_path(target, k + 1, |path| {
        let u = target.labels(path);
        let (Some(x), Some(y)) = (c.inverse.get(&u[..k]), c.inverse.get(&u[1..])) else {
            return;
        };
        match (edge_of(x), edge_of(y)) {
            (Ok(x), Ok(y)) => {
                if let Some(e) = split.pair(x, y) {
                    inverse.table.insert(u, sym(e));
                }
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let source_split = split.splitting_map(&c.source, side, |e| e);
    let next = ProperConjugacy {
        source: split.graph.clone(),
        target: c.target.clone(),
        forward,
        inverse,
        bound: c.bound,
    };
    let verification = check_factorization(c, &next, &source_split, None);
    Ok(Reduction {
        conjugacy: next,
        source_ops: split.ops,
        target_ops: Vec::new(),
        source_split,
        target_split: None,
        verification,
    })
}

/// The forward map on single edges; requires `(0,0)`. Edges off every
/// admissible window have no image.
fn edge_map_of(map: &BlockMapSpec, edges: usize) -> Result<Vec<Option<usize>>> {
    (0..edges)
        .map(|e| map.get(&[sym(e)]).map(edge_of).transpose())
        .collect()
}

fn image_of(map: &[Option<usize>], e: usize) -> Result<usize> {
    map[e].ok_or_else(|| Error::BlockMap(format!("no image for edge {e}")))
}

/// Forward `(0,0)`: in-split (out-split) the source by fibres of the forward
/// map and the target completely; the inverse loses one step of memory
/// (anticipation).
fn inverse_step(c: &ProperConjugacy, side: Side) -> Result<Reduction> {
    let (m, a, mi, ai) = c.orders();
    if (m, a) != (0, 0) {
        return Err(Error::Precondition(format!("forward map is ({m},{a}), not (0,0)")));
    }
    if (side == Side::In && mi == 0) || (side == Side::Out && ai == 0) {
        return Err(Error::Precondition(format!(
            "inverse {} is already 0",
            if side == Side::In { "memory" } else { "anticipation" }
        )));
    }
    let phi = edge_map_of(&c.forward, c.source.num_edges())?;
    // edges without image are inessential and get classes of their own
    let spare = c.target.num_edges();
    let key = |e: usize| phi[e].unwrap_or(spare + e);
    let gs = full_split(&c.source, side, false, key)?;
    let hs = full_split(&c.target, side, false, |e| e)?;

    let mut forward = BlockMapSpec::new(0, 0, edge_alphabet(hs.graph.automaton()));
    for (e, edge) in gs.graph.automaton().edges.iter().enumerate() {
        let Some(x) = phi[gs.origin[e]] else { continue };
        let image = match side {
            Side::In => hs.pair(gs.tag[edge.source], x),
            Side::Out => hs.pair(x, gs.tag[edge.target]),
        };
        if let Some(f) = image {
            forward.table.insert(vec![sym(e)], sym(f));
        }
    }
    let (nmi, nai) = if side == Side::In { (mi - 1, ai) } else { (mi, ai - 1) };
    let mut inverse = BlockMapSpec::new(nmi, nai, edge_alphabet(gs.graph.automaton()));
    for (w, out) in &c.inverse.table {
        let u = edges_of(w)?;
        let x = edge_of(out)?;
        let image = match side {
            Side::In => gs.pair(u[mi - 1], x),
            Side::Out => gs.pair(x, u[mi + 1]),
        };
        if let (Some(w2), Some(e)) = (hs.pair_word(&u), image) {
            inverse.table.insert(w2, sym(e));
        }
    }
    let source_split = gs.splitting_map(&c.source, side, key);
    let target_split = hs.splitting_map(&c.target, side, |e| e);
    let next = ProperConjugacy {
        source: gs.graph.clone(),
        target: hs.graph.clone(),
        forward,
        inverse,
        bound: c.bound,
    };
    let verification = check_factorization(c, &next, &source_split, Some(&target_split));
    Ok(Reduction {
        conjugacy: next,
        source_ops: gs.ops,
        target_ops: hs.ops,
        source_split,
        target_split: Some(target_split),
        verification,
    })
}

/// `Ψ2 ∘ Φ = Φ̃ ∘ Ψ1` on centered blocks of the old source (without `Ψ2` when
/// the target is unchanged), then the bounded check of `Φ̃`.
fn check_factorization(
    old: &ProperConjugacy,
    new: &ProperConjugacy,
    source_split: &BlockMapSpec,
    target_split: Option<&BlockMapSpec>,
) -> Verification {
    let mut v = Verification::new();
    let extra = target_split.map_or(0, |t| t.window() - 1);
    let first = old.forward.window() + extra;
    let mut checked = 0usize;
    let mut failure = None;
    for_each_centered_block(old.source.automaton(), old.bound, old.bound, |w| {
        if failure.is_some() || w.len() < first {
            return;
        }
        checked += 1;
        let lhs = old.forward.apply(w).and_then(|u| match target_split {
            Some(t) => t.apply(&u),
            None => Ok(u),
        });
        let rhs = source_split.apply(w).and_then(|u| new.forward.apply(&u));
        failure = match (lhs, rhs) {
            (Ok(l), Ok(r)) if l == r => None,
            (Ok(l), Ok(r)) => Some(format!(
                "factorization differs on [{}]: [{}] against [{}]",
                format_word(w),
                format_word(&l),
                format_word(&r)
            )),
            (Err(e), _) | (_, Err(e)) => Some(format!("factorization undefined on [{}]: {e}", format_word(w))),
        };
    });
    if let Some(line) = failure {
        v.fail(line);
    }
    if v.ok {
        v.transcript
            .push(format!("factorization checked on {checked} centered blocks"));
    }
    v.absorb(verify_block_conjugacy(new));
    v
}

/// Both sides split into their pair graphs, states `(e,f)` for paths `ef`,
/// together with the renaming `(e,f) -> (δ(e),δ(f))`.
#[derive(Clone, Debug)]
pub struct PairSplit {
    pub source: DyckGraph,
    pub target: DyckGraph,
    pub source_ops: Vec<Operation>,
    pub target_ops: Vec<Operation>,
    /// Source state name -> target state name.
    pub renaming: Vec<(String, String)>,
}

type PairGraph = (DyckGraph, Vec<Operation>, Vec<(usize, usize)>);

/// Pair graph: every state in-split then out-split completely, with each
/// state's `(entering edge, leaving edge)` in the original graph. With `trim`
/// every split is a trim split; otherwise one trim at the end, which leaves
/// the same graph at a fraction of the cost.
fn pair_graph(g: &DyckGraph, trim: bool) -> Result<PairGraph> {
    let ins = full_split(g, Side::In, trim, |e| e)?;
    let outs = full_split(&ins.graph, Side::Out, trim, |e| ins.origin[e])?;
    let (trimmed, states, _) = trim_with_maps(&outs.graph.kind_automaton());
    let tags = states
        .iter()
        .map(|&s| (ins.tag[outs.state_origin[s]], outs.tag[s]))
        .collect();
    let mut ops = ins.ops;
    ops.extend(outs.ops);
    ops.push(Operation::Trim);
    Ok((DyckGraph::from_automaton(&trimmed), ops, tags))
}

/// Requires both maps `(0,0)`. Fails with a counterexample when the renaming
/// is not an isomorphism carrying the matched pairs onto each other.
pub fn final_pair_split(c: &ProperConjugacy) -> Result<PairSplit> {
    let (m, a, mi, ai) = c.orders();
    if (m, a, mi, ai) != (0, 0, 0, 0) {
        return Err(Error::Precondition(format!(
            "final step needs (0,0) maps both ways, got ({m},{a}) and ({mi},{ai})"
        )));
    }
    let delta = edge_map_of(&c.forward, c.source.num_edges())?;
    let (gp, source_ops, gtags) = pair_graph(&c.source, false)?;
    let (hp, target_ops, htags) = pair_graph(&c.target, false)?;
    let (ga, ha) = (gp.automaton(), hp.automaton());

    let by_tag: HashMap<(usize, usize), usize> = htags.iter().enumerate().map(|(s, &t)| (t, s)).collect();
    let mut rho = Vec::with_capacity(gp.num_states());
    for (s, &(e, f)) in gtags.iter().enumerate() {
        let image = (image_of(&delta, e)?, image_of(&delta, f)?);
        match by_tag.get(&image) {
            Some(&t) => rho.push(t),
            None => {
                return Err(Error::NotIsomorphic(format!(
                    "state `{}` = ({e},{f}) has no image ({},{})",
                    ga.states[s], image.0, image.1
                )))
            }
        }
    }
    let mut hit = vec![false; hp.num_states()];
    for &t in &rho {
        if std::mem::replace(&mut hit[t], true) {
            return Err(Error::NotIsomorphic(format!("state `{}` is hit twice", ha.states[t])));
        }
    }
    if let Some(t) = hit.iter().position(|&h| !h) {
        return Err(Error::NotIsomorphic(format!(
            "state `{}` has no preimage",
            ha.states[t]
        )));
    }

    let mut h_edge: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, edge) in ha.edges.iter().enumerate() {
        h_edge.insert((edge.source, edge.target), e);
    }
    let (gk, hk) = (gp.kinds(), hp.kinds());
    let mut edge_image = Vec::with_capacity(gp.num_edges());
    for (e, edge) in ga.edges.iter().enumerate() {
        let describe = || format!("`{}` -> `{}`", ga.states[edge.source], ga.states[edge.target]);
        match h_edge.get(&(rho[edge.source], rho[edge.target])) {
            Some(&f) if hk[f] == gk[e] => edge_image.push(f),
            Some(&f) => {
                return Err(Error::NotIsomorphic(format!(
                    "edge {} is {} but its image is {}",
                    describe(),
                    gk[e],
                    hk[f]
                )))
            }
            None => return Err(Error::NotIsomorphic(format!("edge {} has no image", describe()))),
        }
    }
    if gp.num_edges() != hp.num_edges() {
        return Err(Error::NotIsomorphic(format!(
            "{} edges against {}",
            gp.num_edges(),
            hp.num_edges()
        )));
    }
    let pair_name = |aut: &crate::model::DyckAutomaton, (c, r): (usize, usize)| {
        let (x, y) = (&aut.edges[c], &aut.edges[r]);
        format!(
            "(`{}`->`{}`, `{}`->`{}`)",
            aut.states[x.source], aut.states[x.target], aut.states[y.source], aut.states[y.target]
        )
    };
    for &(cg, rg) in &ga.matched {
        if !ha.is_matched(edge_image[cg], edge_image[rg]) {
            return Err(Error::NotIsomorphic(format!(
                "matched pair {} has an unmatched image",
                pair_name(ga, (cg, rg))
            )));
        }
    }
    if ga.matched.len() != ha.matched.len() {
        let images: std::collections::BTreeSet<(usize, usize)> = ga
            .matched
            .iter()
            .map(|&(x, y)| (edge_image[x], edge_image[y]))
            .collect();
        let extra = ha.matched.iter().find(|p| !images.contains(p)).copied();
        return Err(Error::NotIsomorphic(match extra {
            Some(p) => format!("matched pair {} has no preimage", pair_name(ha, p)),
            None => "matched sets differ in size".into(),
        }));
    }
    let renaming = rho
        .iter()
        .enumerate()
        .map(|(s, &t)| (ga.states[s].clone(), ha.states[t].clone()))
        .collect();
    Ok(PairSplit {
        source: gp,
        target: hp,
        source_ops,
        target_ops,
        renaming,
    })
}

pub const KIND_CERTIFICATE: &str = "certificate";

/// Splits taking both graphs to one pair graph, up to `renaming`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionCertificate {
    pub kind: String,
    pub source_operations: Vec<Operation>,
    pub target_operations: Vec<Operation>,
    pub renaming: Vec<(String, String)>,
    #[serde(default)]
    pub transcript: Vec<String>,
}

impl DecompositionCertificate {
    pub fn to_text(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("certificates always serialize");
        text.push('\n');
        text
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let cert: Self = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
        if cert.kind != KIND_CERTIFICATE {
            return Err(Error::Parse(format!(
                "expected kind `{KIND_CERTIFICATE}`, found `{}`",
                cert.kind
            )));
        }
        Ok(cert)
    }
}

/// Restriction of both graphs to their essential parts; the shifts and the
/// conjugacy are unchanged.
fn trim_conjugacy(c: &ProperConjugacy) -> Result<ProperConjugacy> {
    let (gs, _, gkept) = trim_with_maps(&c.source.kind_automaton());
    let (hs, _, hkept) = trim_with_maps(&c.target.kind_automaton());
    let renumber = |kept: &[usize], total: usize| {
        let mut map = vec![None; total];
        for (new, &old) in kept.iter().enumerate() {
            map[old] = Some(new);
        }
        map
    };
    let gmap = renumber(&gkept, c.source.num_edges());
    let hmap = renumber(&hkept, c.target.num_edges());
    let (g2, h2) = (DyckGraph::from_automaton(&gs), DyckGraph::from_automaton(&hs));
    let transport = |map: &BlockMapSpec, from: &[Option<usize>], to: &[Option<usize>], target: &DyckGraph| {
        let mut out = BlockMapSpec::new(map.memory, map.anticipation, edge_alphabet(target.automaton()));
        out.proper = map.proper;
        for (w, s) in &map.table {
            let w2: Option<Word> = w
                .iter()
                .map(|x| edge_of(x).ok().and_then(|e| from.get(e).copied().flatten()).map(sym))
                .collect();
            let s2 = edge_of(s).ok().and_then(|e| to.get(e).copied().flatten());
            if let (Some(w2), Some(s2)) = (w2, s2) {
                out.table.insert(w2, sym(s2));
            }
        }
        out
    };
    Ok(ProperConjugacy {
        forward: transport(&c.forward, &gmap, &hmap, &h2),
        inverse: transport(&c.inverse, &hmap, &gmap, &g2),
        source: g2,
        target: h2,
        bound: c.bound,
    })
}

/// Trims both sides, removes forward memory and anticipation, then inverse
/// memory and anticipation, and finishes with the pair-graph step.
pub fn decompose(c: &ProperConjugacy) -> Result<DecompositionCertificate> {
    let v = verify_block_conjugacy(c);
    if !v.ok {
        return Err(Error::Step {
            step: 0,
            source: Box::new(Error::BlockMap(v.transcript.join("; "))),
        });
    }
    let mut transcript = v.transcript;
    let mut source_ops = vec![Operation::Trim];
    let mut target_ops = vec![Operation::Trim];
    let mut current = trim_conjugacy(c)?;
    let mut step = 0;
    type StepFn = fn(&ProperConjugacy) -> Result<Reduction>;
    type Order = fn(&ProperConjugacy) -> usize;
    let plan: [(&str, StepFn, Order); 4] = [
        ("forward memory", reduce_memory_step, |c| c.forward.memory),
        ("forward anticipation", reduce_anticipation_step, |c| {
            c.forward.anticipation
        }),
        ("inverse memory", reduce_inverse_memory_step, |c| c.inverse.memory),
        ("inverse anticipation", reduce_inverse_anticipation_step, |c| {
            c.inverse.anticipation
        }),
    ];
    for (label, run, order) in plan {
        while order(&current) > 0 {
            step += 1;
            let wrap = |e: Error| Error::Step {
                step,
                source: Box::new(e),
            };
            let r = run(&current).map_err(wrap)?;
            if !r.verification.ok {
                return Err(wrap(Error::BlockMap(r.verification.transcript.join("; "))));
            }
            let (m, a, mi, ai) = r.conjugacy.orders();
            transcript.push(format!(
                "step {step}: {label} reduced, now ({m},{a}) with inverse ({mi},{ai})"
            ));
            source_ops.extend(r.source_ops);
            target_ops.extend(r.target_ops);
            current = r.conjugacy;
        }
    }
    step += 1;
    let fin = final_pair_split(&current).map_err(|e| Error::Step {
        step,
        source: Box::new(e),
    })?;
    transcript.push(format!(
        "step {step}: pair graphs with {} states and {} edges identified",
        fin.source.num_states(),
        fin.source.num_edges()
    ));
    source_ops.extend(fin.source_ops);
    target_ops.extend(fin.target_ops);
    Ok(DecompositionCertificate {
        kind: KIND_CERTIFICATE.into(),
        source_operations: source_ops,
        target_operations: target_ops,
        renaming: fin.renaming,
        transcript,
    })
}

/// Replays both operation lists and compares the results under the renaming,
/// matched pairs included. The error names the first difference.
pub fn replay_certificate(cert: &DecompositionCertificate, g: &DyckGraph, h: &DyckGraph) -> Result<()> {
    let gp = apply_operations(g, &cert.source_operations)?.kind_automaton();
    let hp = apply_operations(h, &cert.target_operations)?.kind_automaton();
    let rho: HashMap<&str, &str> = cert.renaming.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    if rho.len() != cert.renaming.len() {
        return Err(Error::NotIsomorphic("renaming lists a state twice".into()));
    }
    let mut renamed = gp.clone();
    for s in renamed.states.iter_mut() {
        match rho.get(s.as_str()) {
            Some(t) => *s = t.to_string(),
            None => return Err(Error::NotIsomorphic(format!("state `{s}` is not renamed"))),
        }
    }
    let (x, y) = (renamed.canonical(), hp.canonical());
    if x.states != y.states {
        let d = x
            .states
            .symmetric_difference(&y.states)
            .next()
            .cloned()
            .unwrap_or_default();
        return Err(Error::NotIsomorphic(format!("state `{d}` occurs on one side only")));
    }
    if x.edges != y.edges {
        let d = first_difference(&x.edges, &y.edges);
        return Err(Error::NotIsomorphic(format!("edge {d:?} differs")));
    }
    if x.matched != y.matched {
        let d = first_difference(&x.matched, &y.matched);
        return Err(Error::NotIsomorphic(format!("matched pair {d:?} differs")));
    }
    Ok(())
}

fn first_difference<K: Ord + Clone, V: PartialEq>(a: &BTreeMap<K, V>, b: &BTreeMap<K, V>) -> Option<K> {
    a.iter()
        .find(|(k, v)| b.get(k) != Some(v))
        .or_else(|| b.iter().find(|(k, v)| a.get(k) != Some(v)))
        .map(|(k, _)| k.clone())
}

pub fn replays(cert: &DecompositionCertificate, g: &DyckGraph, h: &DyckGraph) -> bool {
    replay_certificate(cert, g, h).is_ok()
}

//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use common::*;
use dyckshift::constructions::{de_bruijn, diagonal_product, edge_presentation, weak_local_to_local};
use dyckshift::decomposition::{
    decompose, final_pair_split, reduce_anticipation_step, reduce_inverse_anticipation_step,
    reduce_inverse_memory_step, reduce_memory_step, replays, verify_block_conjugacy, ProperConjugacy,
};
use dyckshift::language::{admissible_words, centered_blocks};
use dyckshift::locality::{is_local, is_weak_local, minimal_locality};
use dyckshift::path::reduce_path;
use dyckshift::surgery::{amalgamate, amalgamate_graph, common_amalgamation, essential_parts, split, split_graph};
use dyckshift::{corpus, DyckAutomaton, DyckGraph, Error, Kind, Partition, Side, TriAlphabet, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn words_up_to(aut: &DyckAutomaton, n: usize) -> BTreeSet<Word> {
    admissible_words(aut, n).into_values().flatten().collect()
}

fn semigroup_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for round in 0..50 {
        let aut = random_automaton(&mut rng, 4, 8);
        let rw = Rewriter::new(&aut);
        for len in 1..=6 {
            for path in all_paths(&aut, len) {
                let ours = reduce_path(&aut, &path).map_err(|e| e.to_string())?;
                let theirs = rw.normal_form(&path);
                if ours != theirs {
                    return Err(format!("automaton {round}, path {path:?}: {ours:?} vs {theirs:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} paths over 50 automata, no mismatch"))
}

fn full_dyck_acceptance() -> Outcome {
    let alphabet = TriAlphabet::new(["a"], ["c"], ["i"]);
    for (m, a) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let aut = de_bruijn(&alphabet, m, a);
        let words = admissible_words(&aut, 4);
        for n in 1..=4 {
            let all: BTreeSet<Word> = alphabet.words(n).into_iter().collect();
            if words.get(&n) != Some(&all) {
                return Err(format!("({m},{a}) at length {n}"));
            }
        }
    }
    Ok("4 De Bruijn automata accept every word of length 1..4".into())
}

fn product_intersection() -> Outcome {
    let shared: Vec<(&str, DyckAutomaton)> = corpus::all()
        .into_iter()
        .filter(|(_, a)| a.alphabet == TriAlphabet::new(["a"], ["c"], ["i"]))
        .collect();
    let mut pairs: Vec<(usize, usize)> = (0..shared.len())
        .flat_map(|i| (0..shared.len()).map(move |j| (i, j)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    pairs.shuffle(&mut rng);
    pairs.truncate(20);
    if pairs.len() < 20 {
        return Err(format!("only {} pairs available", pairs.len()));
    }
    for &(i, j) in &pairs {
        let (n1, a1) = &shared[i];
        let (n2, a2) = &shared[j];
        let prod = diagonal_product(a1, a2).map_err(|e| e.to_string())?;
        let words = admissible_words(&prod, 5);
        for n in 1..=5 {
            let expect: BTreeSet<Word> = brute_words(a1, n).intersection(&brute_words(a2, n)).cloned().collect();
            if words.get(&n).cloned().unwrap_or_default() != expect {
                return Err(format!("{n1} x {n2} at length {n}"));
            }
        }
    }
    Ok("20 diagonal products match word intersections up to length 5".into())
}

fn locality_theorems() -> Outcome {
    let mut counts = [0; 3];
    for (name, aut) in corpus::all() {
        let (edges, _) = edge_presentation(&aut);
        if !is_local(&edges, 1, 0) {
            return Err(format!("edge presentation of {name} is not (1,0)-local"));
        }
        counts[0] += 1;
        for (m, a) in [(1, 0), (1, 1)] {
            if is_weak_local(&aut, m, a) {
                let local = weak_local_to_local(&aut, m, a).map_err(|e| e.to_string())?;
                if !is_local(&local, 2 * m, 2 * a) {
                    return Err(format!("{name}: local presentation not ({},{})-local", 2 * m, 2 * a));
                }
                counts[1] += 1;
            }
        }
        if let Some((m, a)) = minimal_locality(&aut, 2, 2) {
            for p in 0..aut.num_states() {
                if aut.in_edges(p).is_empty() {
                    continue;
                }
                let (big, _) =
                    split(&aut, &Partition::complete(&aut, p, Side::In), false).map_err(|e| e.to_string())?;
                if !is_local(&big, m + 1, a) {
                    return Err(format!("{name}: in-split at {p} not ({},{a})-local", m + 1));
                }
                counts[2] += 1;
            }
        }
    }
    if counts[1] == 0 {
        return Err("no weak-local corpus automaton".into());
    }
    Ok(format!(
        "{} edge presentations, {} local presentations, {} in-splits",
        counts[0], counts[1], counts[2]
    ))
}

fn random_partition(rng: &mut ChaCha8Rng, aut: &DyckAutomaton) -> Option<Partition> {
    let side = if rng.gen_bool(0.5) { Side::In } else { Side::Out };
    let p = rng.gen_range(0..aut.num_states());
    let edges = match side {
        Side::In => aut.in_edges(p),
        Side::Out => aut.out_edges(p),
    };
    if edges.is_empty() {
        return None;
    }
    Some(Partition::new(p, random_classes(rng, &edges), side))
}

fn split_round_trip() -> Outcome {
    let auts: Vec<(&str, DyckAutomaton)> = corpus::all().into_iter().filter(|(_, a)| a.num_edges() > 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut plain, mut trimmed) = (0, 0);
    while plain < 100 {
        let (name, aut) = auts.choose(&mut rng).unwrap();
        let Some(part) = random_partition(&mut rng, aut) else {
            continue;
        };
        let (big, record) = split(aut, &part, false).map_err(|e| format!("{name}: {e}"))?;
        let class: Vec<usize> = (0..big.num_states())
            .filter(|&s| record.state_map[s] == part.state)
            .collect();
        let back = amalgamate(&big, &[class], part.side, false).map_err(|e| format!("{name}: {e}"))?;
        if back.automaton.canonical() != aut.canonical() {
            return Err(format!("{name}: amalgamation does not undo {part:?}"));
        }
        if words_up_to(&big, 5) != words_up_to(aut, 5) {
            return Err(format!("{name}: words change under {part:?}"));
        }
        plain += 1;
    }
    while trimmed < 50 {
        let (name, aut) = auts.choose(&mut rng).unwrap();
        let Some(part) = random_partition(&mut rng, aut) else {
            continue;
        };
        let (big, _) = split(aut, &part, true).map_err(|e| format!("{name}: {e}"))?;
        if centered_blocks(&big, 3, 3) != centered_blocks(aut, 3, 3) {
            return Err(format!("{name}: blocks change under trim split {part:?}"));
        }
        trimmed += 1;
    }
    Ok("100 plain splits invert and keep words; 50 trim splits keep blocks".into())
}

/// An edge map applied to every path of length at most 4.
fn same_on_paths(g1: &DyckGraph, f: impl Fn(usize) -> usize, h: impl Fn(usize) -> usize) -> bool {
    (1..=4).all(|n| {
        all_paths(g1.automaton(), n)
            .iter()
            .all(|p| p.iter().all(|&e| f(e) == h(e)))
    })
}

fn amalgamation_commutation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let bases = [
        "fd1",
        "dyck2",
        "nested",
        "cycle3",
        "counter",
        "two-loops",
        "split-example",
    ];
    let mut done = 0;
    let mut tries = 0;
    while done < 20 {
        tries += 1;
        if tries > 2000 {
            return Err(format!("only {done} legal triples found"));
        }
        let g = corpus_graph(bases.choose(&mut rng).unwrap());
        let aut = g.automaton();
        let p = rng.gen_range(0..g.num_states());
        let ins = aut.in_edges(p);
        if ins.len() < 2 {
            continue;
        }
        let (g_half, r1) =
            split_graph(&g, &Partition::new(p, random_classes(&mut rng, &ins), Side::In), false).unwrap();
        let q = rng.gen_range(0..g_half.num_states());
        let ins = g_half.automaton().in_edges(q);
        if ins.len() < 2 {
            continue;
        }
        let (g1, r2) = split_graph(
            &g_half,
            &Partition::new(q, random_classes(&mut rng, &ins), Side::In),
            false,
        )
        .unwrap();
        let phi_class: Vec<usize> = (0..g1.num_states())
            .filter(|&s| r1.state_map[r2.state_map[s]] == p)
            .collect();
        let psi_class: Vec<usize> = (0..g1.num_states()).filter(|&s| r2.state_map[s] == q).collect();
        if phi_class.len() < 2 || psi_class.len() < 2 || phi_class == psi_class {
            continue;
        }
        let legal = |c: &Vec<usize>| amalgamate_graph(&g1, std::slice::from_ref(c), Side::In, false).is_ok();
        if !legal(&phi_class) || !legal(&psi_class) {
            continue;
        }
        let ca = common_amalgamation(&g1, &phi_class, &psi_class).map_err(|e| e.to_string())?;
        if !same_on_paths(&g1, |e| ca.omega[ca.phi[e]], |e| ca.theta[ca.psi[e]]) {
            return Err(format!("maps differ on g1 with classes {phi_class:?} {psi_class:?}"));
        }
        done += 1;
    }
    Ok(format!("20 triples commute ({tries} candidates)"))
}

fn trim_witness() -> Outcome {
    let g = corpus::graph("trim-base").map_err(|e| e.to_string())?;
    let base = g.kind_automaton();
    let (one, two) = (base.state("1").unwrap(), base.state("2").unwrap());
    let g1 = amalgamate(&base, &[vec![one, two]], Side::In, true)
        .map_err(|e| e.to_string())?
        .automaton;
    let g3 = corpus::graph("trim-merged")
        .map_err(|e| e.to_string())?
        .kind_automaton();
    let names = ["9", "9", "4", "5", "1+2+3", "7", "8"];
    let path: Vec<usize> = names
        .windows(2)
        .map(|w| {
            let (s, t) = (g3.state(w[0]).unwrap(), g3.state(w[1]).unwrap());
            g3.edges.iter().position(|e| e.source == s && e.target == t).unwrap()
        })
        .collect();
    let admissible = reduce_path(&g3, &path).map(|f| !f.is_zero()).unwrap_or(false);
    if !admissible || !Rewriter::new(&g3).admissible(&path) {
        return Err(format!("path {path:?} is not admissible in the merged graph"));
    }
    // (0,0) map from G1: state 1+2 goes to 1+2+3, edges follow their endpoints and type
    let image_state = |s: usize| {
        let name = &g1.states[s];
        g3.state(if name == "1+2" || name == "3" { "1+2+3" } else { name })
            .unwrap()
    };
    let kinds1 = g1.kinds();
    let kinds3 = g3.kinds();
    let covers = |e: usize, f: usize| {
        kinds1[e] == kinds3[f]
            && image_state(g1.edges[e].source) == g3.edges[f].source
            && image_state(g1.edges[e].target) == g3.edges[f].target
    };
    let preimages: Vec<Vec<usize>> = all_paths(&g1, path.len())
        .into_iter()
        .filter(|p| p.iter().zip(&path).all(|(&e, &f)| covers(e, f)))
        .collect();
    let rw = Rewriter::new(&g1);
    if let Some(p) = preimages.iter().find(|p| rw.admissible(p)) {
        return Err(format!("admissible preimage {p:?}"));
    }
    let n = preimages.len();
    let plural = if n == 1 { "" } else { "s" };
    Ok(format!("path admissible, {n} preimage path{plural}, none admissible"))
}

fn lemma_replays() -> Outcome {
    let mut steps = 0;
    for (name, c) in constructed_conjugacies() {
        let mut c = c;
        loop {
            let (m, a, mi, ai) = c.orders();
            let r = if m > 0 {
                reduce_memory_step(&c)
            } else if a > 0 {
                reduce_anticipation_step(&c)
            } else if mi > 0 {
                reduce_inverse_memory_step(&c)
            } else if ai > 0 {
                reduce_inverse_anticipation_step(&c)
            } else {
                break;
            };
            let r = r.map_err(|e| format!("{name}: {e}"))?;
            if !r.verification.ok {
                return Err(format!("{name}: {}", r.verification.transcript.join("; ")));
            }
            steps += 1;
            c = r.conjugacy;
        }
    }
    Ok(format!("{steps} reduction steps verified on 10 conjugacies"))
}

fn decomposition_theorem() -> Outcome {
    let mut ok = 0;
    for (name, c) in constructed_conjugacies() {
        let cert = decompose(&c).map_err(|e| format!("{name}: {e}"))?;
        if !replays(&cert, &c.source, &c.target) {
            return Err(format!("{name}: certificate does not replay"));
        }
        ok += 1;
    }
    let g = DyckGraph::new(vec!["p".into()], &[(0, Kind::Call, 0), (0, Kind::Return, 0)], [(0, 1)]);
    let h = DyckGraph::new(vec!["p".into()], &[(0, Kind::Call, 0), (0, Kind::Return, 0)], []);
    let mut bad = ProperConjugacy::identity(&g);
    bad.target = h;
    if verify_block_conjugacy(&bad).ok {
        return Err("non-conjugacy verifies".into());
    }
    match final_pair_split(&bad) {
        Err(Error::NotIsomorphic(msg)) => Ok(format!("{ok}/10 certificates replay; non-conjugacy rejected: {msg}")),
        other => Err(format!("non-conjugacy not rejected at the pair step: {other:?}")),
    }
}

fn essentiality_guard() -> Outcome {
    let mut disagreements = Vec::new();
    let (mut edges, mut inessential) = (0, 0);
    for (name, aut) in corpus::all() {
        let parts = essential_parts(&aut);
        let depths = window_depths(&aut, 6);
        for (e, &d) in depths.iter().enumerate() {
            if parts.edges.contains(&e) != (d == 6) {
                disagreements.push(format!("{name} edge {e} (depth {d})"));
            }
            edges += 1;
            inessential += usize::from(d < 6);
        }
    }
    if disagreements.is_empty() {
        Ok(format!(
            "{edges} corpus edges ({inessential} inessential) agree with the window oracle"
        ))
    } else {
        Err(disagreements.join(", "))
    }
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("semigroup oracle equivalence", semigroup_oracle),
        ("full-Dyck acceptance", full_dyck_acceptance),
        ("product is intersection", product_intersection),
        ("locality theorems", locality_theorems),
        ("split/amalgamation round trip", split_round_trip),
        ("amalgamation commutation", amalgamation_commutation),
        ("trim non-commutation witness", trim_witness),
        ("lemma replays", lemma_replays),
        ("decomposition end to end", decomposition_theorem),
        ("essentiality guard", essentiality_guard),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut results = BTreeMap::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.1}s): {detail}", i + 1)
            }
        }
        results.insert(i + 1, outcome.is_ok());
    }
    println!(
        "{} of {} criteria passed",
        results.values().filter(|&&ok| ok).count(),
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

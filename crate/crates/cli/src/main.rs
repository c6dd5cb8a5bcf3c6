use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use dyckshift::constructions::{de_bruijn, diagonal_product, image_automaton, product};
use dyckshift::decomposition::{decompose, replay_certificate, DecompositionCertificate, ProperConjugacy};
use dyckshift::io::{
    export_dot, parse_block_map, parse_document, serialize_automaton, serialize_block_map, serialize_graph,
};
use dyckshift::language::{default_margin, for_each_centered_block, format_word, is_admissible_word, parse_word};
use dyckshift::locality::{is_local, minimal_locality};
use dyckshift::path::{reduce_path, NormalForm};
use dyckshift::surgery::{amalgamate, essential_parts, split, trim};
use dyckshift::{corpus, BlockMapSpec, DyckAutomaton, DyckGraph, Error, Partition, Side, TriAlphabet, Word};
use serde_json::json;

/// Dyck automata, their shifts and conjugacies.
///
/// Inputs are JSON documents; `corpus:NAME` reads a built-in example and `-`
/// reads standard input. Exit status is 0 for success or true, 1 for false
/// and 2 for errors.
#[derive(Parser)]
#[command(name = "dyckshift", version)]
struct Cli {
    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    In,
    Out,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::In => Side::In,
            SideArg::Out => Side::Out,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check the document and report structural problems.
    Validate { input: String },
    /// Centered blocks of every length up to --max-len.
    Blocks {
        input: String,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        /// Defaults to 2(|Q|²+1).
        #[arg(long)]
        margin: Option<usize>,
    },
    /// Is the word admissible?
    Admissible {
        input: String,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
    },
    /// Normal form of a path given as edge indices.
    Reduce {
        input: String,
        #[arg(long)]
        path: String,
    },
    /// Is the automaton (m,a)-local?
    Local {
        input: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        a: usize,
    },
    /// Smallest (m,a) for which the automaton is local.
    MinimalLocal {
        input: String,
        #[arg(long, default_value_t = 4)]
        max_m: usize,
        #[arg(long, default_value_t = 4)]
        max_a: usize,
    },
    /// Product of two automata; --diagonal synchronizes a shared alphabet.
    Product {
        left: String,
        right: String,
        #[arg(long)]
        diagonal: bool,
    },
    /// The (m,a) De Bruijn automaton of the full Dyck shift.
    Debruijn {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        a: usize,
        /// Call symbols, comma separated.
        #[arg(long, default_value = "")]
        call: String,
        /// Return symbols, comma separated.
        #[arg(long = "return", default_value = "")]
        ret: String,
        /// Internal symbols, comma separated.
        #[arg(long, default_value = "")]
        internal: String,
    },
    /// Split a state. Classes of edge indices are separated by `;`.
    Split {
        input: String,
        #[arg(long)]
        state: String,
        #[arg(long)]
        partition: String,
        #[arg(long, value_enum, default_value = "in")]
        kind: SideArg,
        #[arg(long)]
        trim: bool,
        /// Write the split map of edge shifts here.
        #[arg(long)]
        forward_out: Option<PathBuf>,
        /// Write the amalgamation map of edge shifts here.
        #[arg(long)]
        inverse_out: Option<PathBuf>,
    },
    /// Merge classes of states, given by name and separated by `;`.
    Amalgamate {
        input: String,
        #[arg(long)]
        classes: String,
        #[arg(long, value_enum, default_value = "in")]
        kind: SideArg,
        #[arg(long)]
        trim: bool,
    },
    /// Restrict to the essential part.
    Trim { input: String },
    /// Essential edges and matched pairs.
    Essential { input: String },
    /// The edge graph, every edge labelled by its index; --map-out writes the
    /// projection back to the original labels.
    EdgeGraph {
        input: String,
        #[arg(long)]
        map_out: Option<PathBuf>,
    },
    /// Image of a local automaton under a block map.
    Image {
        input: String,
        #[arg(long)]
        map: String,
    },
    /// Decompose a conjugacy of edge graphs into splits and amalgamations.
    Decompose {
        source: String,
        target: String,
        #[arg(long)]
        forward: String,
        #[arg(long)]
        inverse: String,
        /// Longest words checked; defaults to m+a+m'+a'+4.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Replay a certificate on two edge graphs.
    Replay {
        source: String,
        target: String,
        #[arg(long)]
        cert: String,
    },
    /// Graphviz rendering.
    ExportDot { input: String },
}

/// What a command produced: text for the output, and whether the answer was
/// positive.
struct Outcome {
    text: String,
    ok: bool,
}

impl Outcome {
    fn yes(text: String) -> Self {
        Outcome { text, ok: true }
    }

    fn answer(ok: bool) -> Self {
        Outcome {
            text: format!("{ok}\n"),
            ok,
        }
    }
}

fn read_text(input: &str) -> anyhow::Result<String> {
    if let Some(name) = input.strip_prefix("corpus:") {
        return Ok(corpus::text(name)?.to_string());
    }
    if input == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    fs::read_to_string(input).with_context(|| format!("cannot read `{input}`"))
}

fn read_automaton(input: &str) -> anyhow::Result<DyckAutomaton> {
    let text = read_text(input)?;
    parse_document(&text)?
        .to_automaton()
        .with_context(|| format!("in `{input}`"))
}

/// Surgery view: edge graphs come back labelled by kind, with a flag to write
/// the result as an edge graph again.
fn read_for_surgery(input: &str) -> anyhow::Result<(DyckAutomaton, bool)> {
    let doc = parse_document(&read_text(input)?)?;
    let context = || format!("in `{input}`");
    if doc.is_edge_graph() {
        Ok((doc.to_graph().with_context(context)?.kind_automaton(), true))
    } else {
        Ok((doc.to_automaton().with_context(context)?, false))
    }
}

fn emit(aut: &DyckAutomaton, graph: bool) -> String {
    if graph {
        serialize_graph(&DyckGraph::from_automaton(aut))
    } else {
        serialize_automaton(aut)
    }
}

fn read_graph(input: &str) -> anyhow::Result<DyckGraph> {
    let text = read_text(input)?;
    parse_document(&text)?
        .to_graph()
        .with_context(|| format!("in `{input}`"))
}

fn symbols(text: &str) -> Vec<String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

fn classes(text: &str) -> Vec<Vec<String>> {
    text.split(';').map(symbols).collect()
}

fn indices(text: &str) -> anyhow::Result<Vec<usize>> {
    symbols(text)
        .iter()
        .map(|s| s.parse().map_err(|_| anyhow!("`{s}` is not an index")))
        .collect()
}

fn write_file(path: &PathBuf, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
}

fn normal_form_json(aut: &DyckAutomaton, nf: &NormalForm) -> serde_json::Value {
    match nf {
        NormalForm::Zero => json!({ "zero": true }),
        NormalForm::Reduced {
            source,
            target,
            pending_returns,
            pending_calls,
        } => json!({
            "zero": false,
            "source": aut.states[*source],
            "target": aut.states[*target],
            "pending_returns": pending_returns,
            "pending_calls": pending_calls,
        }),
    }
}

fn json_text(value: serde_json::Value) -> String {
    let mut text = serde_json::to_string(&value).expect("json values serialize");
    text.push('\n');
    text
}

/// Rejections of a claimed conjugacy are answers, not failures.
fn is_rejection(e: &Error) -> bool {
    match e {
        Error::NotIsomorphic(_) | Error::BlockMap(_) => true,
        Error::Step { source, .. } => is_rejection(source),
        _ => false,
    }
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    Ok(match command {
        Command::Validate { input } => {
            let doc = parse_document(&read_text(&input)?)?;
            match doc.to_automaton() {
                Ok(aut) => Outcome::yes(format!(
                    "valid: {} states, {} edges, {} matched pairs\n",
                    aut.num_states(),
                    aut.num_edges(),
                    aut.matched.len()
                )),
                Err(Error::Invalid(text)) => Outcome {
                    text: text.split("; ").map(|v| format!("{v}\n")).collect(),
                    ok: false,
                },
                Err(e @ (Error::UnknownState(_) | Error::Parse(_))) => Outcome {
                    text: format!("{e}\n"),
                    ok: false,
                },
                Err(e) => return Err(e.into()),
            }
        }
        Command::Blocks { input, max_len, margin } => {
            let aut = read_automaton(&input)?;
            let margin = margin.unwrap_or_else(|| default_margin(&aut));
            let mut by_len: BTreeMap<usize, Vec<Word>> = BTreeMap::new();
            for_each_centered_block(&aut, max_len, margin, |w| {
                by_len.entry(w.len()).or_default().push(w.to_vec())
            });
            let mut text = String::new();
            for words in by_len.values_mut() {
                words.sort();
                words.dedup();
                for w in words.iter() {
                    text.push_str(&format_word(w));
                    text.push('\n');
                }
            }
            Outcome::yes(text)
        }
        Command::Admissible { input, word } => {
            let aut = read_automaton(&input)?;
            let word = parse_word(&aut.alphabet, &word)?;
            Outcome::answer(is_admissible_word(&aut, &word)?)
        }
        Command::Reduce { input, path } => {
            let aut = read_automaton(&input)?;
            let nf = reduce_path(&aut, &indices(&path)?)?;
            Outcome {
                ok: !nf.is_zero(),
                text: json_text(normal_form_json(&aut, &nf)),
            }
        }
        Command::Local { input, m, a } => Outcome::answer(is_local(&read_automaton(&input)?, m, a)),
        Command::MinimalLocal { input, max_m, max_a } => match minimal_locality(&read_automaton(&input)?, max_m, max_a)
        {
            Some((m, a)) => Outcome::yes(json_text(json!({ "m": m, "a": a }))),
            None => Outcome {
                text: "null\n".into(),
                ok: false,
            },
        },
        Command::Product { left, right, diagonal } => {
            let (x, y) = (read_automaton(&left)?, read_automaton(&right)?);
            let out = if diagonal {
                diagonal_product(&x, &y)?
            } else {
                product(&x, &y)
            };
            Outcome::yes(serialize_automaton(&out))
        }
        Command::Debruijn {
            m,
            a,
            call,
            ret,
            internal,
        } => {
            let alphabet = TriAlphabet::new(symbols(&call), symbols(&ret), symbols(&internal));
            if alphabet.is_empty() {
                bail!("give at least one of --call, --return, --internal");
            }
            if let Some(v) = alphabet.violations().first() {
                bail!("{v}");
            }
            Outcome::yes(serialize_automaton(&de_bruijn(&alphabet, m, a)))
        }
        Command::Split {
            input,
            state,
            partition,
            kind,
            trim,
            forward_out,
            inverse_out,
        } => {
            let (aut, graph) = read_for_surgery(&input)?;
            let classes = classes(&partition)
                .iter()
                .map(|c| indices(&c.join(",")))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let part = Partition::new(aut.state(&state)?, classes, kind.into());
            let (big, record) = split(&aut, &part, trim)?;
            if let Some(path) = forward_out {
                write_file(&path, &serialize_block_map(&record.split_map))?;
            }
            if let Some(path) = inverse_out {
                write_file(&path, &serialize_block_map(&record.amalgamation_map))?;
            }
            Outcome::yes(emit(&big, graph))
        }
        Command::Amalgamate {
            input,
            classes: text,
            kind,
            trim,
        } => {
            let (aut, graph) = read_for_surgery(&input)?;
            let classes = classes(&text)
                .iter()
                .map(|c| c.iter().map(|s| aut.state(s)).collect::<dyckshift::Result<Vec<_>>>())
                .collect::<dyckshift::Result<Vec<_>>>()?;
            Outcome::yes(emit(&amalgamate(&aut, &classes, kind.into(), trim)?.automaton, graph))
        }
        Command::Trim { input } => {
            let (aut, graph) = read_for_surgery(&input)?;
            Outcome::yes(emit(&trim(&aut), graph))
        }
        Command::Essential { input } => {
            let parts = essential_parts(&read_automaton(&input)?);
            Outcome::yes(json_text(json!({ "edges": parts.edges, "matched": parts.matched })))
        }
        Command::EdgeGraph { input, map_out } => {
            let aut = read_automaton(&input)?;
            if let Some(path) = map_out {
                let mut map = BlockMapSpec::new(0, 0, aut.alphabet.clone());
                for (e, edge) in aut.edges.iter().enumerate() {
                    map.table.insert(vec![e.to_string()], edge.label.clone());
                }
                write_file(&path, &serialize_block_map(&map))?;
            }
            Outcome::yes(serialize_graph(&DyckGraph::from_automaton(&aut)))
        }
        Command::Image { input, map } => {
            let aut = read_automaton(&input)?;
            let f = parse_block_map(&read_text(&map)?)?;
            Outcome::yes(serialize_automaton(&image_automaton(&aut, &f)?))
        }
        Command::Decompose {
            source,
            target,
            forward,
            inverse,
            bound,
        } => {
            let (g, h) = (read_graph(&source)?, read_graph(&target)?);
            let f = parse_block_map(&read_text(&forward)?)?;
            let fi = parse_block_map(&read_text(&inverse)?)?;
            let mut c = ProperConjugacy::new(g, h, f, fi);
            if let Some(bound) = bound {
                c.bound = bound;
            }
            match decompose(&c) {
                Ok(cert) => Outcome::yes(cert.to_text()),
                Err(e) if is_rejection(&e) => Outcome {
                    text: format!("rejected: {e}\n"),
                    ok: false,
                },
                Err(e) => return Err(e.into()),
            }
        }
        Command::Replay { source, target, cert } => {
            let (g, h) = (read_graph(&source)?, read_graph(&target)?);
            let cert = DecompositionCertificate::from_text(&read_text(&cert)?)?;
            match replay_certificate(&cert, &g, &h) {
                Ok(()) => Outcome::answer(true),
                Err(e) => Outcome {
                    text: format!("false: {e}\n"),
                    ok: false,
                },
            }
        }
        Command::ExportDot { input } => Outcome::yes(export_dot(&read_for_surgery(&input)?.0)),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|out| {
        match &cli.output {
            Some(path) => write_file(path, &out.text)?,
            None => io::stdout().write_all(out.text.as_bytes())?,
        }
        Ok(out.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

//! Browser bindings: draw an automaton, test words, split states.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use dyckshift::io::{parse_automaton, serialize_automaton};
use dyckshift::language::{is_admissible_word, parse_word};
use dyckshift::surgery::split;
use dyckshift::{corpus, DyckAutomaton, Kind, Partition, Side};
use wasm_bindgen::prelude::*;

fn colour(kind: Option<Kind>) -> &'static str {
    match kind {
        Some(Kind::Call) => "#1f5fbf",
        Some(Kind::Return) => "#c0392b",
        _ => "#333333",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// States on a circle, edges as arcs (self-loops pointing outwards), calls
/// blue, returns red and dashed.
pub fn svg(aut: &DyckAutomaton) -> String {
    let n = aut.num_states();
    let radius = if n <= 1 { 0.0 } else { (40.0 * n as f64).max(90.0) };
    let size = 2.0 * radius + 200.0;
    let c = size / 2.0;
    let pos: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n.max(1) as f64 - PI / 2.0;
            (c + radius * t.cos(), c + radius * t.sin())
        })
        .collect();
    let partner: HashMap<usize, usize> = aut.matched.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect();
    let kinds = aut.edge_kinds();
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.0} {size:.0}" font-family="sans-serif" font-size="13">"#
    );
    out.push_str("<defs>\n");
    for kind in [Some(Kind::Call), Some(Kind::Return), None] {
        let col = colour(kind);
        let _ = writeln!(
            out,
            r#"<marker id="arrow{}" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="7" markerHeight="7" orient="auto"><path d="M0,0 L10,5 L0,10 z" fill="{col}"/></marker>"#,
            &col[1..]
        );
    }
    out.push_str("</defs>\n");
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, edge) in aut.edges.iter().enumerate() {
        let (s, t) = (edge.source, edge.target);
        let key = (s.min(t), s.max(t));
        let k = *seen.entry(key).and_modify(|k| *k += 1).or_insert(0) as f64;
        let (x1, y1) = pos[s];
        let (x2, y2) = pos[t];
        let (d, lx, ly) = if s == t {
            let (mut ux, mut uy) = (x1 - c, y1 - c);
            let len = (ux * ux + uy * uy).sqrt();
            if len < 1e-9 {
                (ux, uy) = (0.0, -1.0);
            } else {
                (ux, uy) = (ux / len, uy / len);
            }
            let reach = 65.0 + 35.0 * k;
            let spread = 0.45;
            let rot = |a: f64| (ux * a.cos() - uy * a.sin(), ux * a.sin() + uy * a.cos());
            let (ax, ay) = rot(-spread);
            let (bx, by) = rot(spread);
            let start = (x1 + 18.0 * ax, y1 + 18.0 * ay);
            let end = (x1 + 18.0 * bx, y1 + 18.0 * by);
            let open = 0.8 + 0.2 * k;
            let c1 = (x1 + reach * rot(-open).0, y1 + reach * rot(-open).1);
            let c2 = (x1 + reach * rot(open).0, y1 + reach * rot(open).1);
            let path = format!(
                "M{:.1},{:.1} C{:.1},{:.1} {:.1},{:.1} {:.1},{:.1}",
                start.0, start.1, c1.0, c1.1, c2.0, c2.1, end.0, end.1
            );
            (path, x1 + 0.8 * reach * ux, y1 + 0.8 * reach * uy)
        } else {
            let (dx, dy) = (x2 - x1, y2 - y1);
            let len = (dx * dx + dy * dy).sqrt();
            let (ux, uy) = (dx / len, dy / len);
            let (nx, ny) = if s < t { (-uy, ux) } else { (uy, -ux) };
            let side = if k as usize % 2 == 1 { 1.0 } else { -1.0 };
            let bend = side * 30.0 * ((k + 1.0) / 2.0).floor();
            let (mx, my) = ((x1 + x2) / 2.0 + nx * bend, (y1 + y2) / 2.0 + ny * bend);
            let start = (x1 + 18.0 * ux, y1 + 18.0 * uy);
            let end = (x2 - 18.0 * ux, y2 - 18.0 * uy);
            let path = format!(
                "M{:.1},{:.1} Q{:.1},{:.1} {:.1},{:.1}",
                start.0, start.1, mx, my, end.0, end.1
            );
            let (lx, ly) = ((x1 + x2) / 4.0 + mx / 2.0, (y1 + y2) / 4.0 + my / 2.0);
            (path, lx, ly)
        };
        let col = colour(kinds[e]);
        let dash = if kinds[e] == Some(Kind::Return) {
            r#" stroke-dasharray="5,3""#
        } else {
            ""
        };
        let title = match partner.get(&e) {
            Some(p) => format!("e{e}: {} (matched with e{p})", edge.label),
            None => format!("e{e}: {}", edge.label),
        };
        let _ = writeln!(
            out,
            r#"<g class="edge"><title>{}</title><path d="{d}" fill="none" stroke="{col}" stroke-width="1.6"{dash} marker-end="url(#arrow{})"/><text x="{lx:.1}" y="{ly:.1}" fill="{col}" text-anchor="middle" dominant-baseline="middle">{}</text></g>"#,
            escape(&title),
            &col[1..],
            escape(&edge.label)
        );
    }
    for (i, name) in aut.states.iter().enumerate() {
        let (x, y) = pos[i];
        let _ = writeln!(
            out,
            r##"<g class="state"><circle cx="{x:.1}" cy="{y:.1}" r="18" fill="#fdfdf6" stroke="#222"/><text x="{x:.1}" y="{y:.1}" text-anchor="middle" dominant-baseline="middle">{}</text></g>"##,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn render(doc: &str) -> Result<String, String> {
    Ok(svg(&parse_automaton(doc).map_err(|e| e.to_string())?))
}

pub fn admissible(doc: &str, word: &str) -> Result<bool, String> {
    let aut = parse_automaton(doc).map_err(|e| e.to_string())?;
    let word = parse_word(&aut.alphabet, word).map_err(|e| e.to_string())?;
    is_admissible_word(&aut, &word).map_err(|e| e.to_string())
}

/// `partition` lists classes of edge indices, separated by `;`.
pub fn split_document(doc: &str, state: &str, partition: &str, side: &str, trim: bool) -> Result<String, String> {
    let aut = parse_automaton(doc).map_err(|e| e.to_string())?;
    let side = match side {
        "in" => Side::In,
        "out" => Side::Out,
        other => return Err(format!("side must be `in` or `out`, not `{other}`")),
    };
    let classes = partition
        .split(';')
        .map(|class| {
            class
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>().map_err(|_| format!("`{s}` is not an edge index")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let state = aut.state(state).map_err(|e| e.to_string())?;
    let (big, _) = split(&aut, &Partition::new(state, classes, side), trim).map_err(|e| e.to_string())?;
    Ok(serialize_automaton(&big))
}

#[wasm_bindgen(js_name = renderSvg)]
pub fn render_svg(doc: &str) -> Result<String, JsError> {
    render(doc).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = isAdmissible)]
pub fn is_admissible(doc: &str, word: &str) -> Result<bool, JsError> {
    admissible(doc, word).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = splitState)]
pub fn split_state(doc: &str, state: &str, partition: &str, side: &str, trim: bool) -> Result<String, JsError> {
    split_document(doc, state, partition, side, trim).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = corpusNames)]
pub fn corpus_names() -> Vec<String> {
    corpus::names().into_iter().map(str::to_string).collect()
}

#[wasm_bindgen(js_name = corpusDocument)]
pub fn corpus_document(name: &str) -> Result<String, JsError> {
    corpus::text(name)
        .map(str::to_string)
        .map_err(|e| JsError::new(&e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd1() -> &'static str {
        corpus::text("fd1").unwrap()
    }

    #[test]
    fn renders_one_path_per_edge() {
        let svg = render(fd1()).unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches(r#"<g class="edge">"#).count(), 3);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("matched with e1"));
    }

    #[test]
    fn renders_every_corpus_entry() {
        for name in corpus::names() {
            let aut = corpus::automaton(name).unwrap();
            let svg = render(corpus::text(name).unwrap()).unwrap();
            assert_eq!(svg.matches("<circle").count(), aut.num_states(), "{name}");
            assert!(!svg.contains("NaN"), "{name}");
        }
    }

    #[test]
    fn escapes_names() {
        let mut aut = corpus::automaton("fd1").unwrap();
        aut.states[0] = "<q&r>".into();
        let svg = svg(&aut);
        assert!(svg.contains("&lt;q&amp;r&gt;"));
        assert!(!svg.contains("<q&r>"));
    }

    #[test]
    fn admissibility() {
        assert_eq!(admissible(fd1(), "aaic"), Ok(true));
        assert!(admissible(fd1(), "ab").is_err());
        assert!(admissible("{", "a").is_err());
    }

    #[test]
    fn splits() {
        let big = split_document(fd1(), "p", "0; 1,2", "in", false).unwrap();
        let aut = parse_automaton(&big).unwrap();
        assert_eq!(aut.num_states(), 2);
        assert_eq!(aut.num_edges(), 6);
        assert_eq!(admissible(&big, "acia"), Ok(true));
        assert!(split_document(fd1(), "p", "0;1", "in", false).is_err());
        assert!(split_document(fd1(), "p", "0;1,2", "sideways", false).is_err());
        assert!(split_document(fd1(), "zz", "0;1,2", "in", false).is_err());
    }
}

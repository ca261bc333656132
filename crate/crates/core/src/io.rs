//! Text formats: edge lists, a DOT subset, schedules, and JSON views.
//!
//! Edge list: one `src dst` pair per line; `#` starts a comment; a line with
//! a single name declares a vertex without edges. Vertex ids follow order of
//! first appearance.

use std::collections::HashMap;
use std::io::{self, Write};
use std::ops::ControlFlow;

use serde_json::{json, Value};
use thiserror::Error;

use crate::decomposition::BudgetDecomposition;
use crate::graph::{Dag, GraphError, VertexId};
use crate::schedule::{Move, MoveStream, PebbleMetrics, Schedule};

/// A DAG with external vertex names.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedDag {
    pub dag: Dag,
    names: Vec<String>,
    index: HashMap<String, VertexId>,
}

impl NamedDag {
    pub fn new(dag: Dag, names: Vec<String>) -> NamedDag {
        assert_eq!(dag.vertex_count(), names.len());
        let index = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        NamedDag { dag, names, index }
    }

    /// Names vertices by their decimal ids.
    pub fn with_ids(dag: Dag) -> NamedDag {
        let names = (0..dag.vertex_count()).map(|v| v.to_string()).collect();
        NamedDag::new(dag, names)
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<VertexId> {
        self.index.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IngestError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("graph has a cycle: {}", .cycle.join(" -> "))]
    Cycle { cycle: Vec<String> },
    #[error("graph has no vertices")]
    Empty,
}

fn parse_error(line: usize, reason: impl Into<String>) -> IngestError {
    IngestError::Parse { line, reason: reason.into() }
}

struct Builder {
    names: Vec<String>,
    index: HashMap<String, VertexId>,
    edges: Vec<(VertexId, VertexId)>,
    edge_lines: HashMap<(VertexId, VertexId), usize>,
}

impl Builder {
    fn new() -> Builder {
        Builder { names: Vec::new(), index: HashMap::new(), edges: Vec::new(), edge_lines: HashMap::new() }
    }

    fn vertex(&mut self, name: &str) -> VertexId {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        let v = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    fn edge(&mut self, line: usize, a: &str, b: &str) -> Result<(), IngestError> {
        if a == b {
            return Err(parse_error(line, format!("self-loop on `{a}`")));
        }
        let (u, v) = (self.vertex(a), self.vertex(b));
        if let Some(first) = self.edge_lines.insert((u, v), line) {
            return Err(parse_error(line, format!("duplicate edge `{a} -> {b}` (first on line {first})")));
        }
        self.edges.push((u, v));
        Ok(())
    }

    fn finish(self) -> Result<NamedDag, IngestError> {
        if self.names.is_empty() {
            return Err(IngestError::Empty);
        }
        match Dag::new(self.names.len(), self.edges) {
            Ok(dag) => Ok(NamedDag::new(dag, self.names)),
            Err(GraphError::Cycle { cycle }) => {
                Err(IngestError::Cycle { cycle: cycle.iter().map(|&v| self.names[v].clone()).collect() })
            }
            Err(e) => Err(parse_error(0, e.to_string())),
        }
    }
}

/// Parses an edge list, or the DOT subset when the input starts with
/// `digraph` (optionally `strict digraph`).
pub fn parse_dag(text: &str) -> Result<NamedDag, IngestError> {
    let first = text.lines().map(|l| l.trim()).find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"));
    match first {
        Some(l) if l.starts_with("digraph") || l.starts_with("strict") => parse_dot(text),
        _ => parse_edge_list(text),
    }
}

pub fn parse_edge_list(text: &str) -> Result<NamedDag, IngestError> {
    let mut b = Builder::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            [v] => {
                b.vertex(v);
            }
            [a, c] => b.edge(line, a, c)?,
            _ => return Err(parse_error(line, format!("expected `src dst`, found {} tokens", tokens.len()))),
        }
    }
    b.finish()
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Id(String),
    Arrow,
    Open,
    Close,
    Semi,
    Comma,
    Eq,
    Attrs,
}

fn dot_tokens(text: &str) -> Result<Vec<(usize, Tok)>, IngestError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            c if c.is_whitespace() => {}
            '#' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'/') => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '/' if chars.peek() == Some(&'*') => {
                chars.next();
                let start = line;
                let mut prev = ' ';
                loop {
                    match chars.next() {
                        None => return Err(parse_error(start, "unterminated comment")),
                        Some('/') if prev == '*' => break,
                        Some(c) => {
                            if c == '\n' {
                                line += 1;
                            }
                            prev = c;
                        }
                    }
                }
            }
            '{' => out.push((line, Tok::Open)),
            '}' => out.push((line, Tok::Close)),
            ';' => out.push((line, Tok::Semi)),
            ',' => out.push((line, Tok::Comma)),
            '=' => out.push((line, Tok::Eq)),
            '[' => {
                let start = line;
                let mut depth = 1;
                let mut quoted = false;
                for c in chars.by_ref() {
                    match c {
                        '\n' => line += 1,
                        '"' => quoted = !quoted,
                        '[' if !quoted => depth += 1,
                        ']' if !quoted => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        _ => {}
                    }
                }
                if depth != 0 {
                    return Err(parse_error(start, "unterminated attribute list"));
                }
                out.push((start, Tok::Attrs));
            }
            '-' if chars.peek() == Some(&'>') => {
                chars.next();
                out.push((line, Tok::Arrow));
            }
            '-' if chars.peek() == Some(&'-') => {
                return Err(parse_error(line, "undirected edge `--` in a digraph"));
            }
            '"' => {
                let mut s = String::new();
                let mut closed = false;
                while let Some(c) = chars.next() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => {
                            if let Some(n) = chars.next() {
                                s.push(n);
                            }
                        }
                        '\n' => {
                            line += 1;
                            s.push('\n');
                        }
                        c => s.push(c),
                    }
                }
                if !closed {
                    return Err(parse_error(line, "unterminated string"));
                }
                out.push((line, Tok::Id(s)));
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_alphanumeric() || n == '_' || n == '.' {
                        s.push(n);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push((line, Tok::Id(s)));
            }
            other => return Err(parse_error(line, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

/// Parses `digraph [name] { a -> b -> c; d; ... }`. Attribute lists and
/// `key = value` statements are ignored.
pub fn parse_dot(text: &str) -> Result<NamedDag, IngestError> {
    let toks = dot_tokens(text)?;
    let mut i = 0;
    let line_at = |i: usize| toks.get(i).or(toks.last()).map(|t| t.0).unwrap_or(1);
    if let Some((_, Tok::Id(s))) = toks.get(i) {
        if s == "strict" {
            i += 1;
        }
    }
    match toks.get(i) {
        Some((_, Tok::Id(s))) if s == "digraph" => i += 1,
        _ => return Err(parse_error(line_at(i), "expected `digraph`")),
    }
    if let Some((_, Tok::Id(_))) = toks.get(i) {
        i += 1;
    }
    match toks.get(i) {
        Some((_, Tok::Open)) => i += 1,
        _ => return Err(parse_error(line_at(i), "expected `{`")),
    }
    let mut b = Builder::new();
    loop {
        match toks.get(i) {
            None => return Err(parse_error(line_at(i), "missing closing `}`")),
            Some((_, Tok::Close)) => {
                i += 1;
                break;
            }
            Some((_, Tok::Semi)) | Some((_, Tok::Comma)) => i += 1,
            Some((line, Tok::Id(first))) => {
                let line = *line;
                i += 1;
                if matches!(first.as_str(), "graph" | "node" | "edge") && matches!(toks.get(i), Some((_, Tok::Attrs))) {
                    i += 1;
                    continue;
                }
                if let Some((_, Tok::Eq)) = toks.get(i) {
                    // Graph-level `key = value`.
                    i += 1;
                    match toks.get(i) {
                        Some((_, Tok::Id(_))) => i += 1,
                        _ => return Err(parse_error(line, "expected a value after `=`")),
                    }
                    continue;
                }
                let mut prev = first.clone();
                b.vertex(&prev);
                while let Some((_, Tok::Arrow)) = toks.get(i) {
                    i += 1;
                    match toks.get(i) {
                        Some((l, Tok::Id(next))) => {
                            b.edge(*l, &prev, next)?;
                            prev = next.clone();
                            i += 1;
                        }
                        Some((_, Tok::Open)) => return Err(parse_error(line, "subgraphs are not supported")),
                        _ => return Err(parse_error(line, "expected a vertex after `->`")),
                    }
                }
                if let Some((_, Tok::Attrs)) = toks.get(i) {
                    i += 1;
                }
            }
            Some((line, t)) => return Err(parse_error(*line, format!("unexpected {t:?}"))),
        }
    }
    if let Some((line, _)) = toks.get(i) {
        return Err(parse_error(*line, "text after the closing `}`"));
    }
    b.finish()
}

/// Edge list that parses back to the same graph with the same ids: every
/// vertex is declared first, then edges in source-major order.
pub fn write_edge_list(g: &NamedDag) -> String {
    let mut s = String::new();
    for v in 0..g.dag.vertex_count() {
        s.push_str(g.name(v));
        s.push('\n');
    }
    for (u, v) in g.dag.edges() {
        s.push_str(g.name(u));
        s.push(' ');
        s.push_str(g.name(v));
        s.push('\n');
    }
    s
}

fn dot_id(name: &str) -> String {
    if !name.is_empty() && name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        name.to_string()
    } else {
        format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
    }
}

pub fn write_dot(g: &NamedDag) -> String {
    let mut s = String::from("digraph {\n");
    for v in 0..g.dag.vertex_count() {
        s.push_str(&format!("  {};\n", dot_id(g.name(v))));
    }
    for (u, v) in g.dag.edges() {
        s.push_str(&format!("  {} -> {};\n", dot_id(g.name(u)), dot_id(g.name(v))));
    }
    s.push_str("}\n");
    s
}

/// Reads `P v`, `S u v`, `R v` lines (names), ignoring blanks and `#` comments.
pub fn parse_schedule(text: &str, g: &NamedDag) -> Result<Schedule, IngestError> {
    let mut moves = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let id = |name: &str| g.lookup(name).ok_or_else(|| parse_error(line, format!("unknown vertex `{name}`")));
        let m = match tokens.as_slice() {
            [] => continue,
            ["P", v] => Move::Place(id(v)?),
            ["S", u, v] => Move::Slide(id(u)?, id(v)?),
            ["R", v] => Move::Remove(id(v)?),
            _ => {
                return Err(parse_error(line, format!("expected `P v`, `S u v` or `R v`, found `{}`", content.trim())))
            }
        };
        moves.push(m);
    }
    Ok(Schedule::new(moves))
}

pub fn write_move(w: &mut dyn Write, m: Move, g: &NamedDag) -> io::Result<()> {
    match m {
        Move::Place(v) => writeln!(w, "P {}", g.name(v)),
        Move::Slide(u, v) => writeln!(w, "S {} {}", g.name(u), g.name(v)),
        Move::Remove(v) => writeln!(w, "R {}", g.name(v)),
    }
}

/// Streams the schedule to `w` in the text format.
pub fn write_schedule(w: &mut dyn Write, schedule: &dyn MoveStream, g: &NamedDag) -> io::Result<()> {
    let mut err = None;
    let _ = schedule.stream(&mut |m| match write_move(w, m, g) {
        Ok(()) => ControlFlow::Continue(()),
        Err(e) => {
            err = Some(e);
            ControlFlow::Break(())
        }
    });
    err.map_or(Ok(()), Err)
}

pub fn metrics_json(metrics: &PebbleMetrics, g: &NamedDag) -> Value {
    let names = |vs: &[VertexId]| vs.iter().map(|&v| g.name(v).to_string()).collect::<Vec<_>>();
    json!({
        "peak": metrics.peak,
        "moves": metrics.moves,
        "covered": names(&metrics.covered),
        "final": names(&metrics.final_config),
    })
}

pub fn decomposition_json(decomp: &BudgetDecomposition, g: &NamedDag) -> Value {
    json!({
        "budget": decomp.budget.to_string(),
        "part_count": decomp.part_count(),
        "boundary_sum": decomp.boundary_sum(),
        "levels": decomp.levels,
        "parts": decomp.parts.iter().map(|p| json!({
            "vertices": p.vertices.iter().map(|&v| g.name(v)).collect::<Vec<_>>(),
            "boundary": p.boundary,
        })).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_examples() {
        let g = parse_dag("a b\nb c\n").unwrap();
        assert_eq!(g.dag, Dag::new(3, [(0, 1), (1, 2)]).unwrap());
        assert_eq!(g.name(2), "c");

        assert_eq!(parse_dag("a a\n"), Err(IngestError::Parse { line: 1, reason: "self-loop on `a`".into() }));
        match parse_dag("a b\nb a\n") {
            Err(IngestError::Cycle { cycle }) => {
                assert_eq!(cycle.len(), 2);
                assert!(cycle.contains(&"a".to_string()));
            }
            other => panic!("{other:?}"),
        }
        match parse_dag("# header\na b\n\na b # again\n") {
            Err(IngestError::Parse { line: 4, reason }) => assert!(reason.contains("duplicate")),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse_dag("a b c\n"),
            Err(IngestError::Parse { line: 1, reason: "expected `src dst`, found 3 tokens".into() })
        );
        assert_eq!(parse_dag("# nothing\n"), Err(IngestError::Empty));
        let iso = parse_dag("x\ny\n").unwrap();
        assert_eq!((iso.dag.vertex_count(), iso.dag.edge_count()), (2, 0));
    }

    #[test]
    fn dot_examples() {
        let g = parse_dag(
            "digraph G {\n  rankdir=LR;\n  node [shape=box];\n  a -> b [label=\"x\"];\n  b -> c -> d;\n  e;\n}\n",
        )
        .unwrap();
        assert_eq!(g.dag.vertex_count(), 5);
        assert_eq!(g.dag.edge_count(), 3);
        assert_eq!(g.lookup("d"), Some(3));

        let q = parse_dot("digraph { \"x y\" -> z; // comment\n }").unwrap();
        assert_eq!(q.name(0), "x y");
        match parse_dot("digraph {\n a -> b;\n b -> a;\n}") {
            Err(IngestError::Cycle { .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_dot("digraph {\n a -> a;\n}") {
            Err(IngestError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_dot("digraph { a -> b ").is_err());
        assert!(parse_dot("graph { a -- b }").is_err());
    }

    #[test]
    fn writers_round_trip() {
        let g = NamedDag::new(
            Dag::new(4, [(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap(),
            vec!["s".into(), "left".into(), "right node".into(), "t".into()],
        );
        assert_eq!(parse_dot(&write_dot(&g)).unwrap(), g);
        let ids = NamedDag::with_ids(Dag::new(3, [(2, 0)]).unwrap());
        assert_eq!(parse_dag(&write_edge_list(&ids)).unwrap(), ids);
    }

    #[test]
    fn schedule_text() {
        let g = parse_dag("a b\n").unwrap();
        let s = parse_schedule("P a\nS a b\n# done\nR b\n", &g).unwrap();
        assert_eq!(s.moves(), &[Move::Place(0), Move::Slide(0, 1), Move::Remove(1)]);
        let mut out = Vec::new();
        write_schedule(&mut out, &s, &g).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "P a\nS a b\nR b\n");
        assert!(parse_schedule("P z\n", &g).is_err());
        assert!(parse_schedule("X a\n", &g).is_err());
        let m = crate::schedule::simulate(&g.dag, &s).unwrap();
        assert_eq!(metrics_json(&m, &g), json!({"peak": 1, "moves": 3, "covered": ["a", "b"], "final": []}));
    }
}

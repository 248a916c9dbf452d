use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::quartet::{TernaryTree, TraceRow};

fn check_labels(tree: &TernaryTree, labels: &[String]) -> Result<()> {
    if labels.len() != tree.leaf_count() {
        return Err(Error::Argument(format!(
            "{} labels for a tree with {} leaves",
            labels.len(),
            tree.leaf_count()
        )));
    }
    crate::matrix::check_unique_labels(labels)
}

fn quote(label: &str) -> String {
    let plain = !label.is_empty()
        && !label
            .chars()
            .any(|c| c.is_whitespace() || "()[]':;,_".contains(c));
    if plain {
        label.to_string()
    } else {
        format!("'{}'", label.replace('\'', "''"))
    }
}

/// Smallest leaf index in the subtree entered from `parent` at `node`.
fn min_leaf(tree: &TernaryTree, parent: usize, node: usize) -> usize {
    let side = tree.side(parent, node);
    (0..tree.leaf_count()).find(|&l| side[l]).expect("every subtree has a leaf")
}

fn subtree(tree: &TernaryTree, labels: &[String], parent: usize, node: usize, out: &mut String) {
    if tree.is_leaf(node) {
        out.push_str(&quote(&labels[node]));
        return;
    }
    let mut kids: Vec<usize> = tree.neighbors(node).iter().copied().filter(|&v| v != parent).collect();
    kids.sort_by_key(|&k| min_leaf(tree, node, k));
    out.push('(');
    for (i, &k) in kids.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        subtree(tree, labels, node, k, out);
    }
    out.push(')');
}

/// One-line Newick without branch lengths. For display the tree is rooted on
/// an edge next to leaf 0's neighbor, chosen and ordered by smallest leaf
/// index, so equal topologies give equal text. With `s_t`
/// a second line `[S(T)=x.xxx]` follows.
pub fn write_newick(tree: &TernaryTree, labels: &[String], s_t: Option<f64>) -> Result<String> {
    check_labels(tree, labels)?;
    let hub = tree.neighbors(0)[0];
    let other = tree
        .neighbors(hub)
        .iter()
        .copied()
        .filter(|&v| !tree.is_leaf(v))
        .min_by_key(|&v| min_leaf(tree, hub, v));
    let mut out = String::new();
    match other {
        Some(o) => {
            let mut parts = [(hub, o), (o, hub)];
            parts.sort_by_key(|&(node, parent)| min_leaf(tree, parent, node));
            out.push('(');
            subtree(tree, labels, parts[0].1, parts[0].0, &mut out);
            out.push(',');
            subtree(tree, labels, parts[1].1, parts[1].0, &mut out);
            out.push(')');
        }
        None => subtree(tree, labels, usize::MAX, hub, &mut out),
    }
    out.push_str(";\n");
    if let Some(s) = s_t {
        writeln!(out, "[S(T)={s:.3}]").expect("string write");
    }
    Ok(out)
}

/// A tree read from Newick text.
#[derive(Clone, Debug)]
pub struct ParsedNewick {
    pub tree: TernaryTree,
    /// Leaf `i` of `tree` carries `labels[i]`.
    pub labels: Vec<String>,
    pub s_t: Option<f64>,
}

#[derive(Debug)]
enum Node {
    Leaf(String),
    Inner(Vec<Node>),
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    source: &'a str,
    comments: Vec<String>,
}

impl<'a> Parser<'a> {
    fn err(&self, m: impl Into<String>) -> Error {
        Error::parse(self.source, 1, m)
    }

    fn skip(&mut self) -> Result<()> {
        while let Some(&(_, c)) = self.chars.peek() {
            if c.is_whitespace() {
                self.chars.next();
            } else if c == '[' {
                self.chars.next();
                let mut text = String::new();
                loop {
                    match self.chars.next() {
                        Some((_, ']')) => break,
                        Some((_, c)) => text.push(c),
                        None => return Err(self.err("unterminated comment")),
                    }
                }
                self.comments.push(text);
            } else {
                break;
            }
        }
        Ok(())
    }

    fn peek(&mut self) -> Result<Option<char>> {
        self.skip()?;
        Ok(self.chars.peek().map(|&(_, c)| c))
    }

    fn label(&mut self) -> Result<String> {
        let mut s = String::new();
        if self.peek()? == Some('\'') {
            self.chars.next();
            loop {
                match self.chars.next() {
                    Some((_, '\'')) => {
                        if self.chars.peek().map(|&(_, c)| c) == Some('\'') {
                            self.chars.next();
                            s.push('\'');
                        } else {
                            break;
                        }
                    }
                    Some((_, c)) => s.push(c),
                    None => return Err(self.err("unterminated quoted label")),
                }
            }
        } else {
            while let Some(&(_, c)) = self.chars.peek() {
                if c.is_whitespace() || "()[]':;,".contains(c) {
                    break;
                }
                s.push(if c == '_' { ' ' } else { c });
                self.chars.next();
            }
        }
        Ok(s)
    }

    fn branch_length(&mut self) -> Result<()> {
        if self.peek()? == Some(':') {
            self.chars.next();
            self.skip()?;
            while let Some(&(_, c)) = self.chars.peek() {
                if c.is_ascii_digit() || "+-.eE".contains(c) {
                    self.chars.next();
                } else {
                    break;
                }
            }
        }
        Ok(())
    }

    fn node(&mut self) -> Result<Node> {
        let node = if self.peek()? == Some('(') {
            self.chars.next();
            let mut kids = vec![self.node()?];
            loop {
                match self.peek()? {
                    Some(',') => {
                        self.chars.next();
                        kids.push(self.node()?);
                    }
                    Some(')') => {
                        self.chars.next();
                        break;
                    }
                    other => return Err(self.err(format!("expected ',' or ')', got {other:?}"))),
                }
            }
            // internal node names are ignored
            self.label()?;
            Node::Inner(kids)
        } else {
            let l = self.label()?;
            if l.is_empty() {
                return Err(self.err("empty leaf label"));
            }
            Node::Leaf(l)
        };
        self.branch_length()?;
        Ok(node)
    }
}

fn collect_leaves(node: &Node, out: &mut Vec<String>) {
    match node {
        Node::Leaf(l) => out.push(l.clone()),
        Node::Inner(kids) => kids.iter().for_each(|k| collect_leaves(k, out)),
    }
}

/// Builds edges below `node`; returns the node id of `node`.
fn build(node: &Node, index: &dyn Fn(&str) -> usize, next: &mut usize, edges: &mut Vec<(usize, usize)>, source: &str) -> Result<usize> {
    match node {
        Node::Leaf(l) => Ok(index(l)),
        Node::Inner(kids) => {
            if kids.len() != 2 {
                return Err(Error::parse(source, 1, format!("internal node with {} children is not ternary", kids.len())));
            }
            let id = *next;
            *next += 1;
            for k in kids {
                let c = build(k, index, next, edges, source)?;
                edges.push((id, c));
            }
            Ok(id)
        }
    }
}

/// Reads one Newick tree. Leaves are numbered by their position in `labels`
/// when given, otherwise in order of appearance. A bifurcating root is
/// suppressed so the result is unrooted.
pub fn parse_newick(text: &str, labels: Option<&[String]>, source: &str) -> Result<ParsedNewick> {
    let mut p = Parser { chars: text.char_indices().peekable(), source, comments: Vec::new() };
    let root = p.node()?;
    if p.peek()? != Some(';') {
        return Err(p.err("expected ';' after the tree"));
    }
    p.chars.next();
    if let Some(c) = p.peek()? {
        return Err(p.err(format!("unexpected '{c}' after ';'")));
    }
    let s_t = p
        .comments
        .iter()
        .find_map(|c| c.trim().strip_prefix("S(T)=").map(str::trim).map(str::to_string))
        .map(|v| v.parse::<f64>().map_err(|_| p.err(format!("bad S(T) value '{v}'"))))
        .transpose()?;

    let mut found = Vec::new();
    collect_leaves(&root, &mut found);
    crate::matrix::check_unique_labels(&found).map_err(|e| p.err(e.to_string()))?;
    let labels: Vec<String> = match labels {
        Some(given) => {
            let mut a: Vec<&String> = found.iter().collect();
            let mut b: Vec<&String> = given.iter().collect();
            a.sort();
            b.sort();
            if a != b {
                return Err(p.err("tree leaves do not match the expected labels"));
            }
            given.to_vec()
        }
        None => found,
    };
    let n = labels.len();
    if n < 3 {
        return Err(p.err(format!("a ternary tree needs at least 3 leaves, got {n}")));
    }
    let index = |l: &str| labels.iter().position(|x| x == l).expect("label checked");
    let mut edges = Vec::new();
    let mut next = n;
    let Node::Inner(kids) = &root else {
        return Err(p.err("tree has a single leaf"));
    };
    match kids.len() {
        2 => {
            let a = build(&kids[0], &index, &mut next, &mut edges, source)?;
            let b = build(&kids[1], &index, &mut next, &mut edges, source)?;
            edges.push((a, b));
        }
        3 => {
            let id = next;
            next += 1;
            for k in kids {
                let c = build(k, &index, &mut next, &mut edges, source)?;
                edges.push((id, c));
            }
        }
        k => return Err(p.err(format!("root with {k} children is not ternary"))),
    }
    let tree = TernaryTree::from_edges(n, &edges).map_err(|e| p.err(e.to_string()))?;
    Ok(ParsedNewick { tree, labels, s_t })
}

/// Graphviz rendering: leaves as labeled boxes, internal nodes as points.
pub fn write_dot(tree: &TernaryTree, labels: &[String], s_t: Option<f64>) -> Result<String> {
    check_labels(tree, labels)?;
    let mut out = String::from("graph tree {\n");
    if let Some(s) = s_t {
        writeln!(out, "  label=\"S(T)={s:.3}\";").expect("string write");
    }
    out.push_str("  node [shape=point];\n");
    for (i, l) in labels.iter().enumerate() {
        let esc = l.replace('\\', "\\\\").replace('"', "\\\"");
        writeln!(out, "  n{i} [shape=box, label=\"{esc}\"];").expect("string write");
    }
    for (u, v) in tree.edges() {
        writeln!(out, "  n{u} -- n{v};").expect("string write");
    }
    out.push_str("}\n");
    Ok(out)
}

/// `step<TAB>cost<TAB>S(T)` with a header line; reals in shortest round-trip form.
pub fn write_trace(rows: &[TraceRow]) -> String {
    let mut out = String::from("step\tcost\tS(T)\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.step, r.cost, r.s_t).expect("string write");
    }
    out
}

pub fn parse_trace(text: &str, source: &str) -> Result<Vec<TraceRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, "step\tcost\tS(T)")) => {}
        _ => return Err(Error::parse(source, 1, "expected header 'step<TAB>cost<TAB>S(T)'")),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let bad = || Error::parse(source, i + 1, format!("bad trace row '{l}'"));
            let c: Vec<&str> = l.split('\t').collect();
            let [step, cost, s] = c[..] else { return Err(bad()) };
            Ok(TraceRow {
                step: step.parse().map_err(|_| bad())?,
                cost: cost.parse().map_err(|_| bad())?,
                s_t: s.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::rng;
    use proptest::prelude::*;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("o{i}")).collect()
    }

    #[test]
    fn quad() {
        let t = TernaryTree::from_edges(4, &[(0, 4), (1, 4), (4, 5), (2, 5), (3, 5)]).unwrap();
        let labels: Vec<String> = ["u", "v", "w", "x"].map(String::from).to_vec();
        let text = write_newick(&t, &labels, Some(1.0)).unwrap();
        assert_eq!(text, "((u,v),(w,x));\n[S(T)=1.000]\n");
        let back = parse_newick(&text, Some(&labels), "t").unwrap();
        assert!(back.tree.same_topology(&t));
        assert_eq!(back.s_t, Some(1.0));
    }

    #[test]
    fn caterpillar_splits_survive() {
        let t = TernaryTree::from_edges(5, &[(0, 5), (1, 5), (5, 6), (2, 6), (6, 7), (3, 7), (4, 7)]).unwrap();
        let text = write_newick(&t, &names(5), None).unwrap();
        let back = parse_newick(&text, Some(&names(5)), "t").unwrap();
        assert_eq!(back.tree.splits().len(), 2);
        assert_eq!(back.tree.splits(), t.splits());
    }

    #[test]
    fn quoting_and_foreign_input() {
        let labels: Vec<String> = ["it's", "a b", "c", "d:e"].map(String::from).to_vec();
        let t = TernaryTree::random(4, &mut rng(1)).unwrap();
        let text = write_newick(&t, &labels, Some(0.5)).unwrap();
        let back = parse_newick(&text, Some(&labels), "t").unwrap();
        assert!(back.tree.same_topology(&t));

        let p = parse_newick("(a:0.1,b:0.2,(c,d)x:1e-3);", None, "t").unwrap();
        assert_eq!(p.labels, ["a", "b", "c", "d"]);
        assert_eq!(p.s_t, None);
        for bad in ["(a,b,c,d);", "((a,b),c", "((a,b),(c,a));", "(a,(b),c);", "((a,b),(c,d)); x"] {
            assert!(parse_newick(bad, None, "t").is_err(), "{bad}");
        }
    }

    #[test]
    fn dot_shapes() {
        let t = TernaryTree::random(5, &mut rng(2)).unwrap();
        let dot = write_dot(&t, &names(5), Some(0.9)).unwrap();
        assert!(dot.contains("node [shape=point]"));
        assert_eq!(dot.matches("shape=box").count(), 5);
        assert_eq!(dot.matches(" -- ").count(), 7);
        assert!(dot.contains("S(T)=0.900"));
    }

    #[test]
    fn trace_round_trip() {
        let rows = vec![
            TraceRow { step: 0, cost: 12.25, s_t: 0.1 },
            TraceRow { step: 17, cost: 10.0 / 3.0, s_t: 0.987654321 },
        ];
        let text = write_trace(&rows);
        assert_eq!(parse_trace(&text, "t").unwrap(), rows);
        assert!(parse_trace("x\n", "t").is_err());
    }

    proptest! {
        #[test]
        fn newick_round_trip(n in 3usize..20, seed in any::<u64>()) {
            let t = TernaryTree::random(n, &mut rng(seed)).unwrap();
            let text = write_newick(&t, &names(n), Some(0.25)).unwrap();
            let back = parse_newick(&text, Some(&names(n)), "t").unwrap();
            prop_assert!(back.tree.same_topology(&t));
            prop_assert_eq!(back.labels, names(n));
            let again = write_newick(&back.tree, &names(n), Some(0.25)).unwrap();
            prop_assert_eq!(again, text);
        }
    }
}

//! Plain-text instance and layout documents.
//!
//! The instance format is line oriented and versioned; `#` starts a comment.
//! Layers come first, then edges, then optional records:
//!
//! ```text
//! layered-graph 1
//! layer a b
//! layer c d
//! edge a c
//! edge b d
//! chain a d1 d2 z         # dummy chain of the original edge (a, z)
//! width-cap 3
//! min-dist 0 0 2          # layer gap distance
//! max-dist 0 0 4
//! vertical a c
//! normalize off
//! ```
//!
//! Labels are whitespace-free tokens. Layer and gap indices are zero-based;
//! gap `g` separates the nodes at positions `g` and `g+1`. Parsing yields a
//! graph that passes validation, or a line/column-positioned error.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;

use crate::coords::Layout;
use crate::graph::{Edge, LayeredGraph, NodeId};
use crate::network::{LayoutOptions, Value};

pub const GRAPH_HEADER: &str = "layered-graph 1";
pub const LAYOUT_HEADER: &str = "layered-layout 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    Semantic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    /// 1-based line of the offending token.
    pub line: usize,
    /// 1-based column of the offending token.
    pub col: usize,
    pub kind: ParseErrorKind,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

struct Tok<'a> {
    text: &'a str,
    line: usize,
    col: usize,
}

fn tokenize(line_no: usize, line: &str) -> Vec<Tok<'_>> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut toks = Vec::new();
    let mut col = 0;
    for part in body.split_inclusive(char::is_whitespace) {
        let trimmed = part.trim_end_matches(char::is_whitespace);
        if !trimmed.is_empty() {
            toks.push(Tok { text: trimmed, line: line_no, col: col + 1 });
        }
        col += part.chars().count();
    }
    toks
}

fn syntax(tok: &Tok<'_>, message: impl Into<String>) -> ParseError {
    ParseError { line: tok.line, col: tok.col, kind: ParseErrorKind::Syntax, message: message.into() }
}

fn semantic(tok: &Tok<'_>, message: impl Into<String>) -> ParseError {
    ParseError { line: tok.line, col: tok.col, kind: ParseErrorKind::Semantic, message: message.into() }
}

fn parse_int(tok: &Tok<'_>) -> Result<Value, ParseError> {
    tok.text
        .parse::<Value>()
        .map_err(|_| syntax(tok, format!("expected an integer, got `{}`", tok.text)))
}

fn parse_index(tok: &Tok<'_>) -> Result<usize, ParseError> {
    tok.text
        .parse::<usize>()
        .map_err(|_| syntax(tok, format!("expected a non-negative index, got `{}`", tok.text)))
}

/// Parses an instance document into a validated graph and its options.
pub fn parse_graph(text: &str) -> Result<(LayeredGraph, LayoutOptions), ParseError> {
    let mut layers: Vec<Vec<NodeId>> = Vec::new();
    let mut declared: HashMap<NodeId, (usize, usize)> = HashMap::new();
    let mut node_layer: HashMap<NodeId, usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut edge_set: HashSet<Edge> = HashSet::new();
    let mut chains: Vec<(Edge, Vec<NodeId>, usize, usize)> = Vec::new();
    let mut options = LayoutOptions::default();
    let mut header_seen = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize(line_no, raw);
        if toks.is_empty() {
            continue;
        }
        if !header_seen {
            let head: Vec<&str> = toks.iter().map(|t| t.text).collect();
            if head != ["layered-graph", "1"] {
                return Err(syntax(&toks[0], format!("expected `{GRAPH_HEADER}` header")));
            }
            header_seen = true;
            continue;
        }
        let directive = &toks[0];
        let args = &toks[1..];
        match directive.text {
            "layer" => {
                let layer_index = layers.len();
                let mut layer = Vec::with_capacity(args.len());
                for tok in args {
                    let node = NodeId::new(tok.text);
                    if declared.contains_key(&node) {
                        return Err(semantic(tok, format!("duplicate node label `{node}`")));
                    }
                    declared.insert(node.clone(), (tok.line, tok.col));
                    node_layer.insert(node.clone(), layer_index);
                    layer.push(node);
                }
                layers.push(layer);
            }
            "edge" => {
                let [u, v] = args else {
                    return Err(syntax(directive, "edge needs exactly two labels"));
                };
                let (src, dst) = (NodeId::new(u.text), NodeId::new(v.text));
                for (tok, node) in [(u, &src), (v, &dst)] {
                    if !declared.contains_key(node) {
                        return Err(semantic(tok, format!("unknown node `{node}`")));
                    }
                }
                if src == dst {
                    return Err(semantic(v, "self-loops are not allowed"));
                }
                let (lu, lv) = (node_layer[&src], node_layer[&dst]);
                if lv != lu + 1 {
                    return Err(semantic(
                        u,
                        format!("edge must connect consecutive layers, got {lu} -> {lv}"),
                    ));
                }
                let edge = (src, dst);
                if !edge_set.insert(edge.clone()) {
                    return Err(semantic(u, "duplicate edge"));
                }
                edges.push(edge);
            }
            "chain" => {
                if args.len() < 3 {
                    return Err(syntax(directive, "chain needs a source, dummies and a target"));
                }
                for tok in args {
                    if !declared.contains_key(&NodeId::new(tok.text)) {
                        return Err(semantic(tok, format!("unknown node `{}`", tok.text)));
                    }
                }
                let nodes: Vec<NodeId> = args.iter().map(|t| NodeId::new(t.text)).collect();
                let key = (nodes[0].clone(), nodes[nodes.len() - 1].clone());
                let dummies = nodes[1..nodes.len() - 1].to_vec();
                chains.push((key, dummies, directive.line, directive.col));
            }
            "width-cap" => {
                let [w] = args else {
                    return Err(syntax(directive, "width-cap needs one value"));
                };
                let value = parse_int(w)?;
                if value < 0 {
                    return Err(semantic(w, "width-cap must be non-negative"));
                }
                options.width_cap = Some(value);
            }
            "min-dist" | "max-dist" => {
                let [layer, gap, value] = args else {
                    return Err(syntax(directive, format!("{} needs layer, gap and value", directive.text)));
                };
                let li = parse_index(layer)?;
                let gi = parse_index(gap)?;
                let v = parse_int(value)?;
                if li >= layers.len() || gi + 1 >= layers[li].len() {
                    return Err(semantic(layer, format!("layer {li} has no gap {gi}")));
                }
                if directive.text == "min-dist" {
                    if v < 1 {
                        return Err(semantic(value, "min-dist must be at least 1"));
                    }
                    options.min_dist.insert((li, gi), v);
                } else {
                    if v < 1 {
                        return Err(semantic(value, "max-dist must be at least 1"));
                    }
                    options.max_dist.insert((li, gi), v);
                }
            }
            "vertical" => {
                let [u, v] = args else {
                    return Err(syntax(directive, "vertical needs exactly two labels"));
                };
                let edge = (NodeId::new(u.text), NodeId::new(v.text));
                if !edge_set.contains(&edge) {
                    return Err(semantic(u, format!("vertical references missing edge ({}, {})", u.text, v.text)));
                }
                options.vertical_edges.insert(edge);
            }
            "normalize" => {
                let [mode] = args else {
                    return Err(syntax(directive, "normalize needs `on` or `off`"));
                };
                options.normalize = match mode.text {
                    "on" => true,
                    "off" => false,
                    other => return Err(syntax(mode, format!("expected `on` or `off`, got `{other}`"))),
                };
            }
            other => {
                return Err(syntax(directive, format!("unknown directive `{other}`")));
            }
        }
    }

    if !header_seen {
        return Err(ParseError {
            line: 1,
            col: 1,
            kind: ParseErrorKind::Syntax,
            message: format!("empty document; expected `{GRAPH_HEADER}` header"),
        });
    }

    // Chains are resolved after all edges are known.
    let mut dummy_map = BTreeMap::new();
    for (key, dummies, line, col) in chains {
        let at = Tok { text: "chain", line, col };
        let span = node_layer[&key.1] as i64 - node_layer[&key.0] as i64;
        if span != dummies.len() as i64 + 1 {
            return Err(semantic(&at, "chain length does not match the layer span"));
        }
        let mut prev = key.0.clone();
        for next in dummies.iter().chain(std::iter::once(&key.1)) {
            if !edge_set.contains(&(prev.clone(), next.clone())) {
                return Err(semantic(&at, format!("chain segment ({prev}, {next}) is not an edge")));
            }
            prev = next.clone();
        }
        if dummy_map.insert(key.clone(), dummies).is_some() {
            return Err(semantic(&at, "duplicate chain"));
        }
    }

    let graph = LayeredGraph::with_dummy_map(layers, edges, dummy_map);
    debug_assert!(graph.validate().ok());
    Ok((graph, options))
}

/// Canonical text for a graph and its options; the inverse of
/// [`parse_graph`] on its own output.
pub fn emit_graph(graph: &LayeredGraph, options: &LayoutOptions) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{GRAPH_HEADER}");
    for layer in graph.layers() {
        let labels: Vec<&str> = layer.iter().map(NodeId::as_str).collect();
        let _ = writeln!(out, "layer {}", labels.join(" "));
    }
    for (u, v) in graph.edges() {
        let _ = writeln!(out, "edge {u} {v}");
    }
    for ((u, v), dummies) in graph.dummy_map() {
        let inner: Vec<&str> = dummies.iter().map(NodeId::as_str).collect();
        let _ = writeln!(out, "chain {u} {} {v}", inner.join(" "));
    }
    if let Some(w) = options.width_cap {
        let _ = writeln!(out, "width-cap {w}");
    }
    for (&(layer, gap), value) in &options.min_dist {
        let _ = writeln!(out, "min-dist {layer} {gap} {value}");
    }
    for (&(layer, gap), value) in &options.max_dist {
        let _ = writeln!(out, "max-dist {layer} {gap} {value}");
    }
    for (u, v) in &options.vertical_edges {
        let _ = writeln!(out, "vertical {u} {v}");
    }
    if !options.normalize {
        let _ = writeln!(out, "normalize off");
    }
    out
}

/// Machine-readable layout document: one node record per line in layer
/// order, then the metrics and solver status.
pub fn emit_layout(layout: &Layout, graph: &LayeredGraph, status: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{LAYOUT_HEADER}");
    let _ = writeln!(out, "status {status}");
    for layer in graph.layers() {
        for node in layer {
            let _ = writeln!(out, "node {node} {} {}", layout.x[node], layout.y[node]);
        }
    }
    let _ = writeln!(out, "total-length {}", layout.total_length);
    let _ = writeln!(out, "width {}", layout.width);
    out
}

//! Properly layered, ordered DAGs: the problem instances for coordinate
//! assignment.
//!
//! A [`LayeredGraph`] stores layers top to bottom, each layer an ordered
//! list of nodes (left to right), plus directed edges. A graph is *proper*
//! when every edge connects consecutive layers; [`LayeredGraph::properize`]
//! subdivides long edges with dummy nodes to reach that state.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Opaque node label, unique within a graph.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Self {
        NodeId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// A directed graph edge as a (source, target) label pair.
pub type Edge = (NodeId, NodeId);

/// Per long edge: the insertion index of its dummy node in each intermediate
/// layer, top to bottom. Indices address the layer contents at the moment of
/// insertion (edges are processed in their stored order).
pub type DummyPlacement = BTreeMap<Edge, Vec<usize>>;

/// A layered graph with a fixed left-to-right ordering per layer.
///
/// Construction never fails; [`LayeredGraph::validate`] reports structural
/// violations as data so that parsers and tests can inspect them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredGraph {
    layers: Vec<Vec<NodeId>>,
    edges: Vec<Edge>,
    dummy_map: BTreeMap<Edge, Vec<NodeId>>,
    /// node -> (layer, position); first occurrence wins for invalid input.
    position: HashMap<NodeId, (usize, usize)>,
}

impl LayeredGraph {
    pub fn new(layers: Vec<Vec<NodeId>>, edges: Vec<Edge>) -> Self {
        Self::with_dummy_map(layers, edges, BTreeMap::new())
    }

    pub fn with_dummy_map(
        layers: Vec<Vec<NodeId>>,
        edges: Vec<Edge>,
        dummy_map: BTreeMap<Edge, Vec<NodeId>>,
    ) -> Self {
        let mut position = HashMap::new();
        for (i, layer) in layers.iter().enumerate() {
            for (j, node) in layer.iter().enumerate() {
                position.entry(node.clone()).or_insert((i, j));
            }
        }
        LayeredGraph {
            layers,
            edges,
            dummy_map,
            position,
        }
    }

    pub fn layers(&self) -> &[Vec<NodeId>] {
        &self.layers
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Original long edge -> chain of dummy nodes created for it.
    pub fn dummy_map(&self) -> &BTreeMap<Edge, Vec<NodeId>> {
        &self.dummy_map
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layer_len(&self, layer: usize) -> usize {
        self.layers[layer].len()
    }

    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_at(&self, layer: usize, pos: usize) -> &NodeId {
        &self.layers[layer][pos]
    }

    /// (layer, position) of a node, if present.
    pub fn position(&self, node: &NodeId) -> Option<(usize, usize)> {
        self.position.get(node).copied()
    }

    pub fn contains(&self, node: &NodeId) -> bool {
        self.position.contains_key(node)
    }

    /// Edges between layer `i` and `i+1` as (source position, target position)
    /// pairs. Requires a validated graph.
    pub fn positional_edges(&self, layer: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, v) in &self.edges {
            let (lu, pu) = self.position[u];
            let (_, pv) = self.position[v];
            if lu == layer {
                out.push((pu, pv));
            }
        }
        out
    }

    /// Checks every structural invariant and lists all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        let mut seen_nodes = HashSet::new();
        for layer in &self.layers {
            for node in layer {
                if !seen_nodes.insert(node.clone()) {
                    violations.push(Violation::DuplicateNode(node.clone()));
                }
            }
        }

        let mut seen_edges = HashSet::new();
        for edge in &self.edges {
            let (u, v) = edge;
            let mut known = true;
            for end in [u, v] {
                if !self.position.contains_key(end) {
                    violations.push(Violation::UnknownEndpoint {
                        edge: edge.clone(),
                        node: end.clone(),
                    });
                    known = false;
                }
            }
            if !known {
                continue;
            }
            if u == v {
                violations.push(Violation::SelfLoop(u.clone()));
                continue;
            }
            let (lu, _) = self.position[u];
            let (lv, _) = self.position[v];
            if lv < lu {
                violations.push(Violation::WrongDirection(edge.clone()));
            } else if lv == lu {
                violations.push(Violation::SameLayerEdge(edge.clone()));
            } else if lv > lu + 1 {
                violations.push(Violation::NotProper(edge.clone()));
            }
            if !seen_edges.insert(edge.clone()) {
                violations.push(Violation::DuplicateEdge(edge.clone()));
            }
        }

        ValidationReport { violations }
    }

    /// Subdivides every long edge into a chain through fresh dummy nodes, one
    /// per intermediate layer, inserted at the caller-supplied positions.
    ///
    /// Already-proper graphs are returned unchanged, which makes the
    /// operation idempotent. The input must at least satisfy layering
    /// legality (every edge points strictly downward).
    pub fn properize(&self, placement: &DummyPlacement) -> Result<LayeredGraph, ProperizeError> {
        for edge in &self.edges {
            let (u, v) = edge;
            let (Some((lu, _)), Some((lv, _))) = (self.position(u), self.position(v)) else {
                return Err(ProperizeError::UnknownEndpoint(edge.clone()));
            };
            if lv <= lu {
                return Err(ProperizeError::NotDownward(edge.clone()));
            }
        }
        if self
            .edges
            .iter()
            .all(|(u, v)| self.position[v].0 == self.position[u].0 + 1)
        {
            return Ok(self.clone());
        }

        let mut layers = self.layers.clone();
        let mut dummy_map = self.dummy_map.clone();
        let mut taken: HashSet<NodeId> = self.position.keys().cloned().collect();
        let mut next_dummy = 0usize;
        let mut fresh = |taken: &mut HashSet<NodeId>| -> NodeId {
            loop {
                let candidate = NodeId::new(format!("_d{next_dummy}"));
                next_dummy += 1;
                if taken.insert(candidate.clone()) {
                    return candidate;
                }
            }
        };

        let mut edges = Vec::with_capacity(self.edges.len());
        for edge in &self.edges {
            let (u, v) = edge;
            let (lu, _) = self.position[u];
            let (lv, _) = self.position[v];
            let span = lv - lu;
            if span == 1 {
                edges.push(edge.clone());
                continue;
            }
            let positions = placement
                .get(edge)
                .ok_or_else(|| ProperizeError::MissingPlacement {
                    edge: edge.clone(),
                    layer: lu + 1,
                })?;
            if positions.len() != span - 1 {
                return Err(ProperizeError::MissingPlacement {
                    edge: edge.clone(),
                    layer: lu + 1 + positions.len().min(span - 1),
                });
            }
            let mut chain = Vec::with_capacity(span - 1);
            for (t, &pos) in positions.iter().enumerate() {
                let layer = lu + 1 + t;
                if pos > layers[layer].len() {
                    return Err(ProperizeError::PositionOutOfRange {
                        edge: edge.clone(),
                        layer,
                        position: pos,
                        layer_len: layers[layer].len(),
                    });
                }
                let dummy = fresh(&mut taken);
                layers[layer].insert(pos, dummy.clone());
                chain.push(dummy);
            }
            let mut prev = u.clone();
            for dummy in &chain {
                edges.push((prev.clone(), dummy.clone()));
                prev = dummy.clone();
            }
            edges.push((prev, v.clone()));
            dummy_map.insert(edge.clone(), chain);
        }

        Ok(LayeredGraph::with_dummy_map(layers, edges, dummy_map))
    }

    /// Dummy-to-dummy segments of every recorded chain (the segments that
    /// a "straight inner segments" policy pins vertical).
    pub fn inner_segments(&self) -> Vec<Edge> {
        let mut out = Vec::new();
        for chain in self.dummy_map.values() {
            for pair in chain.windows(2) {
                out.push((pair[0].clone(), pair[1].clone()));
            }
        }
        out
    }
}

/// Outcome of [`LayeredGraph::validate`]: empty violations means valid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Node listed more than once across all layer positions.
    DuplicateNode(NodeId),
    /// Edge endpoint not present in any layer.
    UnknownEndpoint { edge: Edge, node: NodeId },
    SelfLoop(NodeId),
    /// Edge within a single layer.
    SameLayerEdge(Edge),
    /// Edge pointing upward.
    WrongDirection(Edge),
    /// Edge spanning more than one layer gap.
    NotProper(Edge),
    DuplicateEdge(Edge),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode(n) => write!(f, "duplicate node {n}"),
            Violation::UnknownEndpoint { edge, node } => {
                write!(f, "edge ({}, {}) references unknown node {node}", edge.0, edge.1)
            }
            Violation::SelfLoop(n) => write!(f, "self-loop at {n}"),
            Violation::SameLayerEdge(e) => write!(f, "edge ({}, {}) stays in its layer", e.0, e.1),
            Violation::WrongDirection(e) => write!(f, "edge ({}, {}) points upward", e.0, e.1),
            Violation::NotProper(e) => write!(f, "edge ({}, {}) skips layers", e.0, e.1),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge ({}, {})", e.0, e.1),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProperizeError {
    #[error("edge ({}, {}) references an unknown node", .0.0, .0.1)]
    UnknownEndpoint(Edge),
    #[error("edge ({}, {}) does not point strictly downward", .0.0, .0.1)]
    NotDownward(Edge),
    #[error("no dummy position for edge ({}, {}) in layer {layer}", edge.0, edge.1)]
    MissingPlacement { edge: Edge, layer: usize },
    #[error(
        "dummy position {position} out of range for layer {layer} (len {layer_len}) while subdividing ({}, {})",
        edge.0, edge.1
    )]
    PositionOutOfRange {
        edge: Edge,
        layer: usize,
        position: usize,
        layer_len: usize,
    },
}

/// The k-layer two-column fixture: a single chain that can be drawn either
/// as a narrow two-column zigzag or as a wide staircase with no horizontal
/// edge length.
///
/// Layers: `{a}`, then `{l_i, r_i}` for the k-2 middle layers, then `{h}`.
/// Edges: `a -> l_2`, `r_i -> l_{i+1}` for the middle layers, `r_{k-1} -> h`.
pub fn zigzag_family(k: usize) -> Result<LayeredGraph, FixtureError> {
    if k < 4 {
        return Err(FixtureError::TooFewLayers { k, minimum: 4 });
    }
    let mut layers = Vec::with_capacity(k);
    layers.push(vec![NodeId::new("a")]);
    for i in 2..k {
        layers.push(vec![NodeId::new(format!("l{i}")), NodeId::new(format!("r{i}"))]);
    }
    layers.push(vec![NodeId::new("h")]);

    let mut edges = Vec::with_capacity(k - 1);
    edges.push((NodeId::new("a"), NodeId::new("l2")));
    for i in 2..k - 1 {
        edges.push((NodeId::new(format!("r{i}")), NodeId::new(format!("l{}", i + 1))));
    }
    edges.push((NodeId::new(format!("r{}", k - 1)), NodeId::new("h")));

    Ok(LayeredGraph::new(layers, edges))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FixtureError {
    #[error("fixture needs at least {minimum} layers, got {k}")]
    TooFewLayers { k: usize, minimum: usize },
}

/// Seeded random proper layered graph.
///
/// Layer sizes are drawn uniformly from `size_range`, every pair of nodes in
/// consecutive layers becomes an edge with probability `edge_density`, and
/// when both layers are non-empty and the density is positive at least one
/// edge per gap is guaranteed. Deterministic for a fixed seed.
pub fn generate_random(
    layer_count: usize,
    size_range: std::ops::RangeInclusive<usize>,
    edge_density: f64,
    seed: u64,
) -> LayeredGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lo = *size_range.start().max(&1);
    let hi = (*size_range.end()).max(lo);

    let mut layers = Vec::with_capacity(layer_count);
    for i in 0..layer_count {
        let size = rng.gen_range(lo..=hi);
        let layer: Vec<NodeId> = (0..size)
            .map(|j| NodeId::new(format!("n{i}_{j}")))
            .collect();
        layers.push(layer);
    }

    let mut edges = Vec::new();
    for i in 0..layer_count.saturating_sub(1) {
        let (above, below) = (layers[i].clone(), layers[i + 1].clone());
        let mut any = false;
        for u in &above {
            for v in &below {
                if rng.gen_bool(edge_density.clamp(0.0, 1.0)) {
                    edges.push((u.clone(), v.clone()));
                    any = true;
                }
            }
        }
        if !any && edge_density > 0.0 && !above.is_empty() && !below.is_empty() {
            let u = above[rng.gen_range(0..above.len())].clone();
            let v = below[rng.gen_range(0..below.len())].clone();
            edges.push((u, v));
        }
    }

    LayeredGraph::new(layers, edges)
}

//! Construction of the auxiliary minimum-cost-flow network whose integral
//! flows encode coordinate assignments.
//!
//! For every layer the network carries a rail of `W` nodes above and `Z`
//! nodes below, one slot per gap (including the two margins). Flow on the
//! gap edge `W(i,j) -> Z(i,j)` is the horizontal distance at that slot.
//! Rail edges shift flow sideways within a layer and cost one unit per graph
//! edge they cross over; cross edges connect consecutive layers at the two
//! boundaries and wherever a *hug* licenses a shortcut. A width cap is a
//! gate node in front of the source whose inbound capacity limits the total
//! flow and thereby the drawing width.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::graph::{Edge, LayeredGraph, ValidationReport};

/// Flow, bound and cost values. All quantities in the network are integral.
pub type Value = i64;

/// Identifier of a network node.
///
/// `W`/`Z` slots are indexed by (layer, slot) with `slot` in `0..=layer_len`;
/// slot `j` sits between the nodes at positions `j-1` and `j`, so slots `0`
/// and `layer_len` are the margins.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NetNodeId {
    Source,
    Sink,
    /// Gate in front of the source whose inbound upper bound caps the width.
    WidthGate,
    W { layer: usize, slot: usize },
    Z { layer: usize, slot: usize },
}

impl fmt::Display for NetNodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetNodeId::Source => f.write_str("s"),
            NetNodeId::Sink => f.write_str("t"),
            NetNodeId::WidthGate => f.write_str("s'"),
            NetNodeId::W { layer, slot } => write!(f, "w[{layer},{slot}]"),
            NetNodeId::Z { layer, slot } => write!(f, "z[{layer},{slot}]"),
        }
    }
}

/// Upper capacity of a network edge.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Bound {
    Finite(Value),
    Unbounded,
}

impl Bound {
    /// The finite stand-in used when solving.
    pub fn or_big(self, big_upper: Value) -> Value {
        match self {
            Bound::Finite(v) => v,
            Bound::Unbounded => big_upper,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dir {
    Right,
    Left,
}

/// Role of a network edge.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    /// `W(layer,slot) -> Z(layer,slot)`; its flow is the horizontal gap at
    /// that slot.
    Gap { layer: usize, slot: usize },
    /// Shift along the upper rail over the node at position `gap`.
    WRail { layer: usize, gap: usize, dir: Dir },
    /// Shift along the lower rail over the node at position `gap`.
    ZRail { layer: usize, gap: usize, dir: Dir },
    /// `Z(layer,from_slot) -> W(layer+1,to_slot)` between consecutive layers.
    Cross { layer: usize, from_slot: usize, to_slot: usize },
    SourceArc { slot: usize },
    SinkArc { slot: usize },
    GateArc,
}

#[derive(Clone, Debug)]
pub struct NetEdge {
    pub id: usize,
    pub from: NetNodeId,
    pub to: NetNodeId,
    pub lower: Value,
    pub upper: Bound,
    pub cost: Value,
    pub kind: EdgeKind,
}

/// Layout constraints applied while building the network.
#[derive(Clone, Debug, PartialEq)]
pub struct LayoutOptions {
    /// Maximum drawing width, or None for unconstrained.
    pub width_cap: Option<Value>,
    /// (layer, gap) -> minimum distance between the nodes at positions
    /// `gap` and `gap+1` of that layer. Default 1.
    pub min_dist: BTreeMap<(usize, usize), Value>,
    /// (layer, gap) -> maximum distance. Default unbounded.
    pub max_dist: BTreeMap<(usize, usize), Value>,
    /// Graph edges forced to zero horizontal length.
    pub vertical_edges: BTreeSet<Edge>,
    /// Shift coordinates so the smallest x is zero.
    pub normalize: bool,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions {
            width_cap: None,
            min_dist: BTreeMap::new(),
            max_dist: BTreeMap::new(),
            vertical_edges: BTreeSet::new(),
            normalize: true,
        }
    }
}

impl LayoutOptions {
    pub fn min_dist_at(&self, layer: usize, gap: usize) -> Value {
        self.min_dist.get(&(layer, gap)).copied().unwrap_or(1)
    }

    pub fn max_dist_at(&self, layer: usize, gap: usize) -> Bound {
        self.max_dist
            .get(&(layer, gap))
            .copied()
            .map_or(Bound::Unbounded, Bound::Finite)
    }
}

/// The auxiliary minimum-cost-flow network built from a layered graph.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    nodes: Vec<NetNodeId>,
    node_index: HashMap<NetNodeId, usize>,
    edges: Vec<NetEdge>,
    layer_sizes: Vec<usize>,
    /// Finite stand-in for unbounded capacities when solving.
    pub big_upper: Value,
    gate: bool,
    gap_edge_ids: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn nodes(&self) -> &[NetNodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_index(&self, node: NetNodeId) -> Option<usize> {
        self.node_index.get(&node).copied()
    }

    pub fn edges(&self) -> &[NetEdge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &NetEdge {
        &self.edges[id]
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn has_gate(&self) -> bool {
        self.gate
    }

    /// Id of the gap edge at (layer, slot).
    pub fn gap_edge_id(&self, layer: usize, slot: usize) -> usize {
        self.gap_edge_ids[layer][slot]
    }

    pub fn effective_upper(&self, edge: &NetEdge) -> Value {
        edge.upper.or_big(self.big_upper)
    }

    /// Replaces the finite stand-in for unbounded capacities.
    pub fn with_big_upper(mut self, big_upper: Value) -> Self {
        self.big_upper = big_upper;
        self
    }

    /// Total flow leaving the source under the given per-edge values.
    pub fn source_outflow(&self, values: &[Value]) -> Value {
        self.edges
            .iter()
            .filter(|e| e.from == NetNodeId::Source)
            .map(|e| values[e.id])
            .sum()
    }

    /// Direct constructor for tests that need hand-assembled networks.
    pub(crate) fn assemble(
        nodes: Vec<NetNodeId>,
        edges: Vec<NetEdge>,
        layer_sizes: Vec<usize>,
        big_upper: Value,
        gate: bool,
    ) -> Self {
        Self::from_edges(nodes, edges, layer_sizes, big_upper, gate)
    }

    fn from_edges(
        nodes: Vec<NetNodeId>,
        edges: Vec<NetEdge>,
        layer_sizes: Vec<usize>,
        big_upper: Value,
        gate: bool,
    ) -> Self {
        let node_index = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
        let mut gap_edge_ids: Vec<Vec<usize>> = layer_sizes
            .iter()
            .map(|&n| vec![usize::MAX; n + 1])
            .collect();
        let mut edges = edges;
        for (id, e) in edges.iter_mut().enumerate() {
            e.id = id;
            if let EdgeKind::Gap { layer, slot } = e.kind {
                gap_edge_ids[layer][slot] = id;
            }
        }
        FlowNetwork {
            nodes,
            node_index,
            edges,
            layer_sizes,
            big_upper,
            gate,
            gap_edge_ids,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum BuildError {
    #[error("graph fails validation: {0}")]
    InvalidGraph(ValidationReport),
    #[error("width cap must be non-negative, got {0}")]
    NegativeWidthCap(Value),
    #[error("layer {layer} has no gap {gap}")]
    BadDistanceKey { layer: usize, gap: usize },
    #[error("minimum distance at layer {layer} gap {gap} must be at least 1, got {value}")]
    BadMinDist { layer: usize, gap: usize, value: Value },
    #[error("distance bounds conflict at layer {layer} gap {gap}: min {min} > max {max}")]
    DistanceBoundsConflict { layer: usize, gap: usize, min: Value, max: Value },
    #[error("vertical edge ({}, {}) is not a graph edge", .0.0, .0.1)]
    UnknownVerticalEdge(Edge),
}

/// Builds the network for a validated graph, applying all options.
pub fn build_network(graph: &LayeredGraph, options: &LayoutOptions) -> Result<FlowNetwork, BuildError> {
    let report = graph.validate();
    if !report.ok() {
        return Err(BuildError::InvalidGraph(report));
    }
    check_options(graph, options)?;

    let layer_count = graph.layer_count();
    let sizes: Vec<usize> = (0..layer_count).map(|i| graph.layer_len(i)).collect();
    let node_total: usize = sizes.iter().sum();

    let big_upper = match options.width_cap {
        Some(w) => w + 2,
        None => {
            let min_sum: Value = (0..layer_count)
                .map(|i| {
                    (0..sizes[i].saturating_sub(1))
                        .map(|g| options.min_dist_at(i, g))
                        .sum::<Value>()
                })
                .sum();
            2 + node_total as Value + min_sum
        }
    };

    let mut nodes = vec![NetNodeId::Source, NetNodeId::Sink];
    if options.width_cap.is_some() {
        nodes.push(NetNodeId::WidthGate);
    }
    for (i, &n) in sizes.iter().enumerate() {
        for j in 0..=n {
            nodes.push(NetNodeId::W { layer: i, slot: j });
            nodes.push(NetNodeId::Z { layer: i, slot: j });
        }
    }

    let (in_deg, out_deg) = degrees(graph);
    let mut edges: Vec<NetEdge> = Vec::new();
    let mut push = |from, to, lower, upper, cost, kind| {
        edges.push(NetEdge { id: 0, from, to, lower, upper, cost, kind });
    };

    // Gap edges: margins keep [1, inf); interior slots carry the distance
    // bounds of the gap to their left.
    for (i, &n) in sizes.iter().enumerate() {
        for j in 0..=n {
            let (lower, upper) = if j == 0 || j == n {
                (1, Bound::Unbounded)
            } else {
                (options.min_dist_at(i, j - 1), options.max_dist_at(i, j - 1))
            };
            push(
                NetNodeId::W { layer: i, slot: j },
                NetNodeId::Z { layer: i, slot: j },
                lower,
                upper,
                0,
                EdgeKind::Gap { layer: i, slot: j },
            );
        }
    }

    // Rail edges: cost is the degree of the node they cross over, incoming
    // edges above the layer, outgoing below.
    for (i, &n) in sizes.iter().enumerate() {
        for g in 0..n {
            let w_a = NetNodeId::W { layer: i, slot: g };
            let w_b = NetNodeId::W { layer: i, slot: g + 1 };
            let z_a = NetNodeId::Z { layer: i, slot: g };
            let z_b = NetNodeId::Z { layer: i, slot: g + 1 };
            let cin = in_deg[i][g] as Value;
            let cout = out_deg[i][g] as Value;
            push(w_a, w_b, 0, Bound::Unbounded, cin, EdgeKind::WRail { layer: i, gap: g, dir: Dir::Right });
            push(w_b, w_a, 0, Bound::Unbounded, cin, EdgeKind::WRail { layer: i, gap: g, dir: Dir::Left });
            push(z_a, z_b, 0, Bound::Unbounded, cout, EdgeKind::ZRail { layer: i, gap: g, dir: Dir::Right });
            push(z_b, z_a, 0, Bound::Unbounded, cout, EdgeKind::ZRail { layer: i, gap: g, dir: Dir::Left });
        }
    }

    // Cross edges: the two boundary slots always, interior slots at hugs.
    for i in 0..layer_count.saturating_sub(1) {
        let mut slots: BTreeSet<(usize, usize)> = BTreeSet::new();
        slots.insert((0, 0));
        slots.insert((sizes[i], sizes[i + 1]));
        slots.extend(detect_hugs(graph, i));
        for (j, k) in slots {
            let cost = compute_c_cost(graph, i, j, k);
            push(
                NetNodeId::Z { layer: i, slot: j },
                NetNodeId::W { layer: i + 1, slot: k },
                0,
                Bound::Unbounded,
                cost,
                EdgeKind::Cross { layer: i, from_slot: j, to_slot: k },
            );
        }
    }

    let root = if let Some(w) = options.width_cap {
        push(
            NetNodeId::Source,
            NetNodeId::WidthGate,
            0,
            Bound::Finite(w + 2),
            0,
            EdgeKind::GateArc,
        );
        NetNodeId::WidthGate
    } else {
        NetNodeId::Source
    };

    if layer_count > 0 {
        // Source feeds the slots right of each first-layer node; an empty
        // first layer degenerates to the single margin slot so the margin's
        // lower bound stays satisfiable. Sink side mirrors this.
        let first = 0;
        let slots: Vec<usize> = if sizes[first] == 0 { vec![0] } else { (1..=sizes[first]).collect() };
        for j in slots {
            push(root, NetNodeId::W { layer: first, slot: j }, 0, Bound::Unbounded, 0, EdgeKind::SourceArc { slot: j });
        }
        let last = layer_count - 1;
        let slots: Vec<usize> = if sizes[last] == 0 { vec![0] } else { (1..=sizes[last]).collect() };
        for k in slots {
            push(NetNodeId::Z { layer: last, slot: k }, NetNodeId::Sink, 0, Bound::Unbounded, 0, EdgeKind::SinkArc { slot: k });
        }
    }

    let mut network = FlowNetwork::from_edges(nodes, edges, sizes, big_upper, options.width_cap.is_some());
    for edge in &options.vertical_edges {
        network = enforce_vertical(&network, graph, edge);
    }
    Ok(network)
}

fn check_options(graph: &LayeredGraph, options: &LayoutOptions) -> Result<(), BuildError> {
    if let Some(w) = options.width_cap {
        if w < 0 {
            return Err(BuildError::NegativeWidthCap(w));
        }
    }
    let gap_exists = |&(layer, gap): &(usize, usize)| {
        layer < graph.layer_count() && gap + 1 < graph.layer_len(layer)
    };
    for (key, &value) in &options.min_dist {
        if !gap_exists(key) {
            return Err(BuildError::BadDistanceKey { layer: key.0, gap: key.1 });
        }
        if value < 1 {
            return Err(BuildError::BadMinDist { layer: key.0, gap: key.1, value });
        }
    }
    for (key, &max) in &options.max_dist {
        if !gap_exists(key) {
            return Err(BuildError::BadDistanceKey { layer: key.0, gap: key.1 });
        }
        let min = options.min_dist.get(key).copied().unwrap_or(1);
        if max < min {
            return Err(BuildError::DistanceBoundsConflict { layer: key.0, gap: key.1, min, max });
        }
    }
    let edge_set: HashSet<&Edge> = graph.edges().iter().collect();
    for e in &options.vertical_edges {
        if !edge_set.contains(e) {
            return Err(BuildError::UnknownVerticalEdge(e.clone()));
        }
    }
    Ok(())
}

fn degrees(graph: &LayeredGraph) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut in_deg: Vec<Vec<usize>> = (0..graph.layer_count())
        .map(|i| vec![0; graph.layer_len(i)])
        .collect();
    let mut out_deg = in_deg.clone();
    for (u, v) in graph.edges() {
        let (lu, pu) = graph.position(u).expect("validated graph");
        let (lv, pv) = graph.position(v).expect("validated graph");
        out_deg[lu][pu] += 1;
        in_deg[lv][pv] += 1;
    }
    (in_deg, out_deg)
}

/// Interior slot pairs (j, k) between layers `i` and `i+1` where a hug
/// licenses a cross edge `Z(i,j) -> W(i+1,k)`.
///
/// Slot `j` is the slot immediately right of the hug's upper node, `k` the
/// slot right of its lower node. The boundary pairs are not reported here;
/// [`build_network`] adds them unconditionally.
pub fn detect_hugs(graph: &LayeredGraph, i: usize) -> BTreeSet<(usize, usize)> {
    let mut hugs = BTreeSet::new();
    let above = graph.layer_len(i);
    let below = graph.layer_len(i + 1);

    // min/max neighbor position per node, on the relevant side.
    let mut min_target = vec![usize::MAX; above];
    let mut max_target = vec![0usize; above];
    let mut has_out = vec![false; above];
    let mut min_start = vec![usize::MAX; below];
    let mut max_start = vec![0usize; below];
    let mut has_in = vec![false; below];
    for (p, q) in graph.positional_edges(i) {
        has_out[p] = true;
        min_target[p] = min_target[p].min(q);
        max_target[p] = max_target[p].max(q);
        has_in[q] = true;
        min_start[q] = min_start[q].min(p);
        max_start[q] = max_start[q].max(p);
    }

    let next_with = |flags: &[bool], p: usize| flags.iter().skip(p + 1).position(|&b| b).map(|d| p + 1 + d);

    for pu in 0..above {
        if !has_out[pu] {
            continue;
        }
        let Some(pu2) = next_with(&has_out, pu) else { continue };
        for pv in 0..below {
            if !has_in[pv] {
                continue;
            }
            let Some(pv2) = next_with(&has_in, pv) else { continue };
            let e1 = min_target[pu] <= pv;
            let e2 = max_target[pu2] >= pv2;
            let e3 = min_start[pv] <= pu;
            let e4 = max_start[pv2] >= pu2;
            if e1 && e2 && e3 && e4 {
                hugs.insert((pu + 1, pv + 1));
            }
        }
    }
    hugs
}

/// Cost of the cross edge `Z(i,j) -> W(i+1,k)`: the number of graph edges
/// between layers `i` and `i+1` it crosses over. Boundary slots cost zero.
pub fn compute_c_cost(graph: &LayeredGraph, i: usize, j: usize, k: usize) -> Value {
    let above = graph.layer_len(i);
    let below = graph.layer_len(i + 1);
    if j == 0 || k == 0 || j == above || k == below {
        return 0;
    }

    // 1-based positions: the hug nodes sit at j and k; j'/k' are the next
    // positions to the right with an outgoing/incoming edge.
    let edges = graph.positional_edges(i);
    let mut has_out = vec![false; above];
    let mut has_in = vec![false; below];
    for &(p, q) in &edges {
        has_out[p] = true;
        has_in[q] = true;
    }
    let j2 = has_out
        .iter()
        .skip(j)
        .position(|&b| b)
        .map(|d| j + d + 1);
    let k2 = has_in.iter().skip(k).position(|&b| b).map(|d| k + d + 1);

    edges
        .iter()
        .filter(|&&(p, q)| {
            let p1 = p + 1;
            let q1 = q + 1;
            let right = k2.is_some_and(|k2| p1 <= j && q1 >= k2);
            let left = j2.is_some_and(|j2| p1 >= j2 && q1 <= k);
            right || left
        })
        .count() as Value
}

/// The network edges crossing over graph edge `e`, split by direction:
/// left-to-right first, right-to-left second. Ids are ascending.
pub fn crossing_sets(graph: &LayeredGraph, network: &FlowNetwork, e: &Edge) -> (Vec<usize>, Vec<usize>) {
    let (lu, pu) = graph.position(&e.0).expect("edge source in graph");
    let (lv, pv) = graph.position(&e.1).expect("edge target in graph");
    debug_assert_eq!(lv, lu + 1, "crossing sets need a proper edge");

    let mut right = Vec::new();
    let mut left = Vec::new();
    for edge in network.edges() {
        match edge.kind {
            EdgeKind::WRail { layer, gap, dir } if layer == lv && gap == pv => match dir {
                Dir::Right => right.push(edge.id),
                Dir::Left => left.push(edge.id),
            },
            EdgeKind::ZRail { layer, gap, dir } if layer == lu && gap == pu => match dir {
                Dir::Right => right.push(edge.id),
                Dir::Left => left.push(edge.id),
            },
            EdgeKind::Cross { layer, from_slot, to_slot } if layer == lu => {
                if from_slot <= pu && to_slot > pv {
                    right.push(edge.id);
                } else if from_slot > pu && to_slot <= pv {
                    left.push(edge.id);
                }
            }
            _ => {}
        }
    }
    (right, left)
}

/// Removes every network edge crossing over `e`, forcing `e` vertical in any
/// feasible flow. Applications for different edges commute.
pub fn enforce_vertical(network: &FlowNetwork, graph: &LayeredGraph, e: &Edge) -> FlowNetwork {
    let (right, left) = crossing_sets(graph, network, e);
    let dead: HashSet<usize> = right.into_iter().chain(left).collect();
    let edges: Vec<NetEdge> = network
        .edges
        .iter()
        .filter(|edge| !dead.contains(&edge.id))
        .cloned()
        .collect();
    FlowNetwork::from_edges(
        network.nodes.clone(),
        edges,
        network.layer_sizes.clone(),
        network.big_upper,
        network.gate,
    )
}

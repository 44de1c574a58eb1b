//! From flows to drawings: coordinate extraction, layout metrics and the
//! structural identities every feasible flow must satisfy.
//!
//! The x-coordinate of the j-th node in a layer is the prefix sum of the
//! gap-edge flows to its left; y is the layer index. At optimality the total
//! flow cost equals the total horizontal edge length of the induced drawing,
//! which is the headline identity checked by [`verify_properties`].

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::graph::{LayeredGraph, NodeId};
use crate::network::{crossing_sets, EdgeKind, FlowNetwork, Value};
use crate::solver::{check_feasibility, Flow};

/// Integer coordinates for every node plus the derived metrics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub x: BTreeMap<NodeId, Value>,
    /// Layer index per node.
    pub y: BTreeMap<NodeId, usize>,
    pub total_length: Value,
    pub width: Value,
}

impl Layout {
    /// Builds a layout from explicit coordinates, computing the metrics.
    pub fn from_coords(
        x: BTreeMap<NodeId, Value>,
        y: BTreeMap<NodeId, usize>,
        graph: &LayeredGraph,
    ) -> Layout {
        let mut layout = Layout { x, y, total_length: 0, width: 0 };
        let (total_length, width) = layout_metrics(&layout, graph);
        layout.total_length = total_length;
        layout.width = width;
        layout
    }

    pub fn x_of(&self, node: &NodeId) -> Value {
        self.x[node]
    }

    /// Shifts all coordinates so the smallest x becomes zero.
    pub fn normalized(mut self, graph: &LayeredGraph) -> Layout {
        let min = self.x.values().min().copied().unwrap_or(0);
        if min != 0 {
            for v in self.x.values_mut() {
                *v -= min;
            }
        }
        let (total_length, width) = layout_metrics(&self, graph);
        self.total_length = total_length;
        self.width = width;
        self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoordError {
    #[error("flow is not feasible for this network")]
    InfeasibleFlow,
}

/// Reads node coordinates off the gap-edge flows.
pub fn extract_coordinates(
    graph: &LayeredGraph,
    network: &FlowNetwork,
    flow: &Flow,
    normalize: bool,
) -> Result<Layout, CoordError> {
    if !check_feasibility(network, flow) {
        return Err(CoordError::InfeasibleFlow);
    }
    let mut x = BTreeMap::new();
    let mut y = BTreeMap::new();
    for (i, layer) in graph.layers().iter().enumerate() {
        let mut prefix = 0;
        for (p, node) in layer.iter().enumerate() {
            prefix += flow.value(network.gap_edge_id(i, p));
            x.insert(node.clone(), prefix);
            y.insert(node.clone(), i);
        }
    }
    debug_assert!(graph.layers().iter().all(|layer| layer
        .windows(2)
        .all(|w| x[&w[0]] < x[&w[1]])));
    let layout = Layout::from_coords(x, y, graph);
    Ok(if normalize { layout.normalized(graph) } else { layout })
}

/// Exact (total horizontal edge length, width) of a layout.
pub fn layout_metrics(layout: &Layout, graph: &LayeredGraph) -> (Value, Value) {
    let total_length = graph
        .edges()
        .iter()
        .map(|(u, v)| (layout.x[v] - layout.x[u]).abs())
        .sum();
    let width = match (layout.x.values().max(), layout.x.values().min()) {
        (Some(max), Some(min)) => max - min,
        _ => 0,
    };
    (total_length, width)
}

/// A single property check with an optional violation witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub passed: bool,
    pub witness: Option<String>,
}

impl Check {
    fn pass() -> Check {
        Check { passed: true, witness: None }
    }

    fn fail(witness: String) -> Check {
        Check { passed: false, witness: Some(witness) }
    }
}

/// Structural identities of a feasible flow and its induced drawing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyReport {
    /// Every rail/cross edge costs exactly as many units as there are graph
    /// edges whose crossing sets contain it.
    pub crossing_cost_identity: Check,
    /// Each layer passes the full source outflow.
    pub layer_throughput: Check,
    /// The widest interior flow never exceeds the source outflow.
    pub width_bound: Check,
    /// Per graph edge: target prefix = source prefix + leftward crossing
    /// flow - rightward crossing flow.
    pub edge_balance: Check,
    /// Flow cost dominates the induced total edge length.
    pub cost_dominates_length: Check,
    /// At optimality the flow cost equals the induced total edge length.
    /// Only asserted when the caller claims optimality.
    pub optimal_cost_equals_length: Option<Check>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks().iter().all(|(_, c)| c.passed)
    }

    pub fn checks(&self) -> Vec<(&'static str, &Check)> {
        let mut out = vec![
            ("crossing-cost-identity", &self.crossing_cost_identity),
            ("layer-throughput", &self.layer_throughput),
            ("width-bound", &self.width_bound),
            ("edge-balance", &self.edge_balance),
            ("cost-dominates-length", &self.cost_dominates_length),
        ];
        if let Some(check) = &self.optimal_cost_equals_length {
            out.push(("optimal-cost-equals-length", check));
        }
        out
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, check) in self.checks() {
            if check.passed {
                writeln!(f, "{name}: pass")?;
            } else {
                writeln!(
                    f,
                    "{name}: FAIL ({})",
                    check.witness.as_deref().unwrap_or("no witness")
                )?;
            }
        }
        Ok(())
    }
}

/// Verifies the flow identities against a feasible flow.
///
/// `is_optimal` additionally asserts the cost/length equality; pass `false`
/// for perturbed or hand-built flows.
pub fn verify_properties(
    graph: &LayeredGraph,
    network: &FlowNetwork,
    flow: &Flow,
    is_optimal: bool,
) -> PropertyReport {
    if !check_feasibility(network, flow) {
        let fail = || Check::fail("flow is not feasible".to_owned());
        return PropertyReport {
            crossing_cost_identity: fail(),
            layer_throughput: fail(),
            width_bound: fail(),
            edge_balance: fail(),
            cost_dominates_length: fail(),
            optimal_cost_equals_length: is_optimal.then(fail),
        };
    }

    let fs = network.source_outflow(&flow.values);

    // Crossing-cost identity over all rail and cross edges.
    let crossing_cost_identity = {
        let mut counts = vec![0; network.edges().len()];
        let mut rights: Vec<Vec<usize>> = Vec::with_capacity(graph.edge_count());
        let mut lefts: Vec<Vec<usize>> = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            let (right, left) = crossing_sets(graph, network, e);
            for &id in right.iter().chain(&left) {
                counts[id] += 1;
            }
            rights.push(right);
            lefts.push(left);
        }
        let mut check = Check::pass();
        for e in network.edges() {
            if matches!(e.kind, EdgeKind::WRail { .. } | EdgeKind::ZRail { .. } | EdgeKind::Cross { .. })
                && e.cost != counts[e.id]
            {
                check = Check::fail(format!(
                    "network edge {:?} costs {} but is crossed {} times",
                    e.kind, e.cost, counts[e.id]
                ));
                break;
            }
        }
        (check, rights, lefts)
    };
    let (crossing_cost_identity, rights, lefts) = crossing_cost_identity;

    // Per-layer throughput equals the source outflow.
    let mut layer_throughput = Check::pass();
    for (i, &n) in network.layer_sizes().iter().enumerate() {
        let through: Value = (0..=n).map(|j| flow.value(network.gap_edge_id(i, j))).sum();
        if through != fs {
            layer_throughput = Check::fail(format!(
                "layer {i} passes {through} units, source sends {fs}"
            ));
            break;
        }
    }

    // Interior flow bounds the width from above.
    let interior_max: Value = network
        .layer_sizes()
        .iter()
        .enumerate()
        .map(|(i, &n)| (1..n).map(|j| flow.value(network.gap_edge_id(i, j))).sum())
        .max()
        .unwrap_or(0);
    let width_bound = if interior_max <= fs {
        Check::pass()
    } else {
        Check::fail(format!("interior flow {interior_max} exceeds source outflow {fs}"))
    };

    // Prefix balance per graph edge.
    let prefix = |layer: usize, pos: usize| -> Value {
        (0..=pos).map(|j| flow.value(network.gap_edge_id(layer, j))).sum()
    };
    let mut edge_balance = Check::pass();
    for (idx, e) in graph.edges().iter().enumerate() {
        let (lu, pu) = graph.position(&e.0).expect("edge source present");
        let (lv, pv) = graph.position(&e.1).expect("edge target present");
        let over_right: Value = rights[idx].iter().map(|&id| flow.value(id)).sum();
        let over_left: Value = lefts[idx].iter().map(|&id| flow.value(id)).sum();
        if prefix(lv, pv) != prefix(lu, pu) + over_left - over_right {
            edge_balance = Check::fail(format!(
                "edge ({}, {}) violates the prefix balance",
                e.0, e.1
            ));
            break;
        }
    }

    // Cost versus induced length.
    let recomputed_cost: Value = flow
        .values
        .iter()
        .zip(network.edges())
        .map(|(v, e)| v * e.cost)
        .sum();
    let layout = extract_coordinates(graph, network, flow, false).expect("feasible flow");
    let cost_dominates_length = if recomputed_cost >= layout.total_length {
        Check::pass()
    } else {
        Check::fail(format!(
            "cost {recomputed_cost} is below induced length {}",
            layout.total_length
        ))
    };
    let optimal_cost_equals_length = is_optimal.then(|| {
        if recomputed_cost == layout.total_length {
            Check::pass()
        } else {
            Check::fail(format!(
                "optimal cost {recomputed_cost} differs from induced length {}",
                layout.total_length
            ))
        }
    });

    PropertyReport {
        crossing_cost_identity,
        layer_throughput,
        width_bound,
        edge_balance,
        cost_dominates_length,
        optimal_cost_equals_length,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{zigzag_family, generate_random};
    use crate::network::{build_network, LayoutOptions};
    use crate::solver::solve_min_cost_flow;

    fn n(s: &str) -> NodeId {
        NodeId::new(s)
    }

    #[test]
    fn unit_flows_place_nodes_at_consecutive_columns() {
        // Equal-sized edgeless layers force every gap edge to exactly one
        // unit, so normalized coordinates are 0, 1, 2 in each layer.
        let g = crate::graph::LayeredGraph::new(
            vec![
                vec![n("a0"), n("a1"), n("a2")],
                vec![n("b0"), n("b1"), n("b2")],
            ],
            vec![],
        );
        let net = build_network(&g, &LayoutOptions::default()).unwrap();
        let flow = solve_min_cost_flow(&net);
        for (i, layer) in g.layers().iter().enumerate() {
            for j in 0..=layer.len() {
                assert_eq!(flow.value(net.gap_edge_id(i, j)), 1);
            }
        }
        let layout = extract_coordinates(&g, &net, &flow, true).unwrap();
        for layer in g.layers() {
            for (p, node) in layer.iter().enumerate() {
                assert_eq!(layout.x_of(node), p as Value);
            }
        }
    }

    #[test]
    fn capped_fixture_shares_two_columns() {
        let g = zigzag_family(4).unwrap();
        let options = LayoutOptions { width_cap: Some(1), ..Default::default() };
        let net = build_network(&g, &options).unwrap();
        let flow = solve_min_cost_flow(&net);
        let layout = extract_coordinates(&g, &net, &flow, true).unwrap();
        assert_eq!(layout.width, 1);
        for i in [2, 3] {
            assert_eq!(layout.x_of(&n(&format!("l{i}"))), 0);
            assert_eq!(layout.x_of(&n(&format!("r{i}"))), 1);
        }
    }

    #[test]
    fn metrics_of_hand_layouts_match_definitions() {
        let g = zigzag_family(6).unwrap();
        // Two-column drawing: left column 0, right column 1.
        let mut x = BTreeMap::new();
        let mut y = BTreeMap::new();
        x.insert(n("a"), 0);
        y.insert(n("a"), 0);
        for i in 2..6 {
            x.insert(n(&format!("l{i}")), 0);
            x.insert(n(&format!("r{i}")), 1);
            y.insert(n(&format!("l{i}")), i - 1);
            y.insert(n(&format!("r{i}")), i - 1);
        }
        x.insert(n("h"), 1);
        y.insert(n("h"), 5);
        let two_column = Layout::from_coords(x, y, &g);
        assert_eq!((two_column.total_length, two_column.width), (3, 1));

        // Staircase drawing: every chain step moves one column right.
        let mut x = BTreeMap::new();
        let mut y = BTreeMap::new();
        x.insert(n("a"), 0);
        y.insert(n("a"), 0);
        for i in 2..6 {
            x.insert(n(&format!("l{i}")), (i - 2) as Value);
            x.insert(n(&format!("r{i}")), (i - 1) as Value);
            y.insert(n(&format!("l{i}")), i - 1);
            y.insert(n(&format!("r{i}")), i - 1);
        }
        x.insert(n("h"), 4);
        y.insert(n("h"), 5);
        let staircase = Layout::from_coords(x, y, &g);
        assert_eq!((staircase.total_length, staircase.width), (0, 4));
    }

    #[test]
    fn single_edge_zero_layout_has_zero_metrics() {
        let g = crate::graph::LayeredGraph::new(
            vec![vec![n("u")], vec![n("v")]],
            vec![(n("u"), n("v"))],
        );
        let mut x = BTreeMap::new();
        let mut y = BTreeMap::new();
        x.insert(n("u"), 0);
        x.insert(n("v"), 0);
        y.insert(n("u"), 0);
        y.insert(n("v"), 1);
        let layout = Layout::from_coords(x, y, &g);
        assert_eq!((layout.total_length, layout.width), (0, 0));
    }

    #[test]
    fn normalization_preserves_metrics() {
        for seed in 0..10 {
            let g = generate_random(3, 1..=4, 0.5, seed);
            let net = build_network(&g, &LayoutOptions::default()).unwrap();
            let flow = solve_min_cost_flow(&net);
            let raw = extract_coordinates(&g, &net, &flow, false).unwrap();
            let normal = extract_coordinates(&g, &net, &flow, true).unwrap();
            assert_eq!(raw.total_length, normal.total_length);
            assert_eq!(raw.width, normal.width);
            if g.node_count() > 0 {
                assert_eq!(normal.x.values().min(), Some(&0));
            }
        }
    }

    #[test]
    fn gap_flow_equals_coordinate_difference() {
        for seed in 0..10 {
            let g = generate_random(4, 1..=4, 0.5, seed);
            let net = build_network(&g, &LayoutOptions::default()).unwrap();
            let flow = solve_min_cost_flow(&net);
            let layout = extract_coordinates(&g, &net, &flow, false).unwrap();
            for (i, layer) in g.layers().iter().enumerate() {
                for w in layer.windows(2) {
                    let gap = layout.x_of(&w[1]) - layout.x_of(&w[0]);
                    let slot = g.position(&w[1]).unwrap().1;
                    assert_eq!(gap, flow.value(net.gap_edge_id(i, slot)));
                }
            }
        }
    }

    #[test]
    fn properties_hold_for_solver_output() {
        let g = zigzag_family(4).unwrap();
        let options = LayoutOptions { width_cap: Some(1), ..Default::default() };
        let net = build_network(&g, &options).unwrap();
        let flow = solve_min_cost_flow(&net);
        assert_eq!(flow.total_cost, 1);
        let report = verify_properties(&g, &net, &flow, true);
        assert!(report.all_passed(), "{report:?}");
    }

    #[test]
    fn rejects_infeasible_flow() {
        let g = zigzag_family(4).unwrap();
        let net = build_network(&g, &LayoutOptions::default()).unwrap();
        let zero = Flow::with_values(&net, vec![0; net.edges().len()]);
        assert_eq!(
            extract_coordinates(&g, &net, &zero, true),
            Err(CoordError::InfeasibleFlow)
        );
    }
}

//! Independent ground truth for small instances.
//!
//! [`brute_force_optimal`] enumerates every per-layer strictly increasing
//! column assignment within a finite width cap, applies distance and
//! vertical-edge constraints, and returns the minimum total horizontal edge
//! length together with the lexicographically smallest witness. It shares no
//! code with the flow path.
//!
//! [`flow_from_layout`] goes the other way: it pins the gap-edge flows to
//! the drawing's gaps (margins get one extra unit each) and routes the rest
//! at minimum cost, yielding a feasible flow whose cost equals the drawing's
//! total edge length.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::coords::Layout;
use crate::graph::LayeredGraph;
use crate::network::{Bound, EdgeKind, FlowNetwork, LayoutOptions, NetEdge, Value};
use crate::solver::{solve_min_cost_flow, Flow, SolveStatus};

/// Result of an exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub optimal_length: Value,
    /// Lexicographically smallest optimal drawing (by layer, position, x).
    pub witness: Layout,
    /// Complete assignments evaluated; pruned branches are not counted.
    pub explored: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("the oracle needs a finite width cap")]
    MissingWidthCap,
    #[error("estimated {estimate} assignments exceed the budget of {budget}")]
    BudgetExceeded { estimate: u128, budget: u64 },
    #[error("no assignment satisfies the constraints at this width")]
    Infeasible,
}

/// Exhaustively computes the minimum total horizontal edge length over all
/// drawings of width at most `options.width_cap`.
pub fn brute_force_optimal(
    graph: &LayeredGraph,
    options: &LayoutOptions,
    budget: u64,
) -> Result<OracleResult, OracleError> {
    let width = options.width_cap.ok_or(OracleError::MissingWidthCap)?;
    if width < 0 {
        return Err(OracleError::Infeasible);
    }

    let estimate: u128 = (0..graph.layer_count())
        .map(|i| binomial(width as u128 + 1, graph.layer_len(i) as u128))
        .product();
    if estimate > budget as u128 {
        return Err(OracleError::BudgetExceeded { estimate, budget });
    }

    let candidates: Vec<Vec<Vec<Value>>> = (0..graph.layer_count())
        .map(|i| layer_assignments(graph.layer_len(i), width, i, options))
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return Err(OracleError::Infeasible);
    }

    // Edges and vertical constraints grouped by upper layer, as position
    // pairs.
    let pair_edges: Vec<Vec<(usize, usize)>> = (0..graph.layer_count().saturating_sub(1))
        .map(|i| graph.positional_edges(i))
        .collect();
    let verticals: Vec<Vec<(usize, usize)>> = {
        let mut v: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph.layer_count().saturating_sub(1)];
        for e in &options.vertical_edges {
            let (lu, pu) = graph.position(&e.0).expect("vertical edge source present");
            let (_, pv) = graph.position(&e.1).expect("vertical edge target present");
            v[lu].push((pu, pv));
        }
        v
    };

    struct Search<'a> {
        candidates: &'a [Vec<Vec<Value>>],
        pair_edges: &'a [Vec<(usize, usize)>],
        verticals: &'a [Vec<(usize, usize)>],
        chosen: Vec<usize>,
        best: Option<(Value, Vec<usize>)>,
        explored: u64,
    }

    impl Search<'_> {
        fn run(&mut self, layer: usize, cost_so_far: Value) {
            if let Some((best, _)) = &self.best {
                // Later-in-lex ties can never replace the incumbent.
                if cost_so_far >= *best {
                    return;
                }
            }
            if layer == self.candidates.len() {
                self.explored += 1;
                self.best = Some((cost_so_far, self.chosen.clone()));
                return;
            }
            for (idx, xs) in self.candidates[layer].iter().enumerate() {
                let mut cost = cost_so_far;
                if layer > 0 {
                    let above = &self.candidates[layer - 1][self.chosen[layer - 1]];
                    if self.verticals[layer - 1]
                        .iter()
                        .any(|&(pu, pv)| above[pu] != xs[pv])
                    {
                        continue;
                    }
                    cost += self.pair_edges[layer - 1]
                        .iter()
                        .map(|&(pu, pv)| (xs[pv] - above[pu]).abs())
                        .sum::<Value>();
                }
                self.chosen.push(idx);
                self.run(layer + 1, cost);
                self.chosen.pop();
            }
        }
    }

    let mut search = Search {
        candidates: &candidates,
        pair_edges: &pair_edges,
        verticals: &verticals,
        chosen: Vec::with_capacity(graph.layer_count()),
        best: None,
        explored: 0,
    };
    search.run(0, 0);

    let (optimal_length, chosen) = search.best.ok_or(OracleError::Infeasible)?;
    let mut x = BTreeMap::new();
    let mut y = BTreeMap::new();
    for (i, layer) in graph.layers().iter().enumerate() {
        let xs = &candidates[i][chosen[i]];
        for (p, node) in layer.iter().enumerate() {
            x.insert(node.clone(), xs[p]);
            y.insert(node.clone(), i);
        }
    }
    Ok(OracleResult {
        optimal_length,
        witness: Layout::from_coords(x, y, graph),
        explored: search.explored,
    })
}

/// Strictly increasing assignments of `count` nodes to columns `0..=width`
/// honoring the layer's per-gap distance bounds, in lexicographic order.
fn layer_assignments(count: usize, width: Value, layer: usize, options: &LayoutOptions) -> Vec<Vec<Value>> {
    let mut out = Vec::new();
    let mut current: Vec<Value> = Vec::with_capacity(count);
    // Columns still needed to place the remaining nodes at minimum gaps.
    let min_tail: Vec<Value> = (0..count)
        .map(|p| (p..count.saturating_sub(1)).map(|g| options.min_dist_at(layer, g)).sum())
        .collect();

    fn rec(
        out: &mut Vec<Vec<Value>>,
        current: &mut Vec<Value>,
        count: usize,
        width: Value,
        layer: usize,
        options: &LayoutOptions,
        min_tail: &[Value],
    ) {
        if current.len() == count {
            out.push(current.clone());
            return;
        }
        let p = current.len();
        let (lo, hi) = if p == 0 {
            (0, width - min_tail[0])
        } else {
            let prev = current[p - 1];
            let gap_min = options.min_dist_at(layer, p - 1);
            let gap_max = match options.max_dist_at(layer, p - 1) {
                Bound::Finite(v) => v,
                Bound::Unbounded => width,
            };
            ((prev + gap_min), (prev + gap_max).min(width - min_tail[p]))
        };
        let mut xcol = lo;
        while xcol <= hi {
            current.push(xcol);
            rec(out, current, count, width, layer, options, min_tail);
            current.pop();
            xcol += 1;
        }
    }

    if count == 0 {
        return vec![Vec::new()];
    }
    rec(&mut out, &mut current, count, width, layer, options, &min_tail);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul(n - i) / (i + 1);
    }
    result
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutFlowError {
    #[error("layout does not cover node {0}")]
    MissingNode(String),
    #[error("layout is not strictly increasing within layer {0}")]
    NotIncreasing(usize),
    #[error("gap at layer {layer} slot {slot} needs flow {value}, outside the edge bounds")]
    GapOutOfBounds { layer: usize, slot: usize, value: Value },
    #[error("routing between layers failed; the network cannot carry this drawing")]
    RoutingInfeasible,
}

/// Builds a feasible flow that induces the given drawing, with cost equal to
/// the drawing's total edge length.
///
/// The network must not have had crossing edges removed; constraints beyond
/// the drawing's own geometry surface as [`LayoutFlowError::RoutingInfeasible`].
pub fn flow_from_layout(
    graph: &LayeredGraph,
    network: &FlowNetwork,
    layout: &Layout,
) -> Result<Flow, LayoutFlowError> {
    for layer in graph.layers() {
        for node in layer {
            if !layout.x.contains_key(node) {
                return Err(LayoutFlowError::MissingNode(node.to_string()));
            }
        }
        if layer.windows(2).any(|w| layout.x[&w[0]] >= layout.x[&w[1]]) {
            let i = graph.position(&layer[0]).map(|(i, _)| i).unwrap_or(0);
            return Err(LayoutFlowError::NotIncreasing(i));
        }
    }

    let all_x = || graph.layers().iter().flatten().map(|node| layout.x[node]);
    let min_x = all_x().min().unwrap_or(0);
    let max_x = all_x().max().unwrap_or(0);
    let span = max_x - min_x;

    let mut pinned: Vec<NetEdge> = network.edges().to_vec();
    for e in &mut pinned {
        let EdgeKind::Gap { layer, slot } = e.kind else { continue };
        let n = graph.layer_len(layer);
        let value = if n == 0 {
            span + 2
        } else if slot == 0 {
            layout.x[graph.node_at(layer, 0)] - min_x + 1
        } else if slot == n {
            max_x - layout.x[graph.node_at(layer, n - 1)] + 1
        } else {
            layout.x[graph.node_at(layer, slot)] - layout.x[graph.node_at(layer, slot - 1)]
        };
        let upper_ok = match e.upper {
            Bound::Finite(u) => value <= u,
            Bound::Unbounded => true,
        };
        if value < e.lower || !upper_ok {
            return Err(LayoutFlowError::GapOutOfBounds { layer, slot, value });
        }
        e.lower = value;
        e.upper = Bound::Finite(value);
    }

    let pinned_net = FlowNetwork::assemble(
        network.nodes().to_vec(),
        pinned,
        network.layer_sizes().to_vec(),
        network.big_upper.max(span + 2),
        network.has_gate(),
    );
    let solved = solve_min_cost_flow(&pinned_net);
    match solved.status {
        SolveStatus::Infeasible { .. } => Err(LayoutFlowError::RoutingInfeasible),
        SolveStatus::Optimal => Ok(Flow::with_values(network, solved.values)),
    }
}

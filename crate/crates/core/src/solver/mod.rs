//! Integral minimum-cost flow with edge lower bounds and free flow value.
//!
//! The network is closed into a circulation by an internal zero-lower-bound
//! return arc from sink to source, lower bounds are eliminated into node
//! supplies, and the resulting problem is solved by successive shortest
//! paths with node potentials. A network-simplex backend ([`simplex`])
//! solves the identical problem; the two must agree on cost.
//!
//! Costs are scaled internally so that the solver minimizes total edge cost
//! first and total source outflow second. The secondary term makes the
//! result canonical: among all minimum-cost flows it returns one with the
//! least flow value, which keeps the induced drawing as narrow as the
//! optimum allows.

mod simplex;

pub use simplex::solve_with_network_simplex;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::network::{FlowNetwork, NetNodeId, Value};

/// Outcome of a solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// No feasible flow; lists the nodes whose committed supply could not be
    /// shipped after the lower-bound transform.
    Infeasible { unsatisfied: Vec<NetNodeId> },
}

/// An integral per-edge flow assignment on a [`FlowNetwork`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flow {
    /// Flow per network edge, indexed by edge id. Meaningless when
    /// infeasible.
    pub values: Vec<Value>,
    pub status: SolveStatus,
    /// Sum of flow times cost over all edges.
    pub total_cost: Value,
}

impl Flow {
    pub fn is_optimal(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal)
    }

    pub fn value(&self, edge_id: usize) -> Value {
        self.values[edge_id]
    }

    /// Wraps an explicit assignment, recomputing its total cost.
    pub fn with_values(network: &FlowNetwork, values: Vec<Value>) -> Flow {
        let total_cost = values
            .iter()
            .zip(network.edges())
            .map(|(v, e)| v * e.cost)
            .sum();
        Flow {
            values,
            status: SolveStatus::Optimal,
            total_cost,
        }
    }
}

pub(crate) struct WorkArc {
    pub from: usize,
    pub to: usize,
    /// Residual capacity after committing the lower bound.
    pub cap: Value,
    /// Scaled cost: primary objective times `scale`, plus 1 on the return
    /// arc for the secondary objective.
    pub cost: Value,
}

pub(crate) struct Working {
    pub node_count: usize,
    /// Network edges in id order, then the sink-to-source return arc.
    pub arcs: Vec<WorkArc>,
    /// Committed-inflow minus committed-outflow per node; positive means the
    /// node must ship surplus in the transformed problem.
    pub supplies: Vec<Value>,
}

/// Lower-bound elimination shared by both backends.
pub(crate) fn prepare(net: &FlowNetwork) -> Result<Working, Vec<NetNodeId>> {
    let n = net.node_count();
    let scale = net.big_upper + 1;
    let mut arcs = Vec::with_capacity(net.edges().len() + 1);
    let mut supplies = vec![0; n];
    let mut contradictory = Vec::new();
    for e in net.edges() {
        let upper = net.effective_upper(e);
        if e.lower > upper {
            contradictory.push(e.to);
        }
        let from = net.node_index(e.from).expect("edge endpoint registered");
        let to = net.node_index(e.to).expect("edge endpoint registered");
        arcs.push(WorkArc {
            from,
            to,
            cap: (upper - e.lower).max(0),
            cost: e.cost * scale,
        });
        supplies[to] += e.lower;
        supplies[from] -= e.lower;
    }
    if !contradictory.is_empty() {
        return Err(contradictory);
    }
    arcs.push(WorkArc {
        from: net.node_index(NetNodeId::Sink).expect("sink registered"),
        to: net.node_index(NetNodeId::Source).expect("source registered"),
        cap: net.big_upper,
        cost: 1,
    });
    Ok(Working {
        node_count: n,
        arcs,
        supplies,
    })
}

pub(crate) fn infeasible(net: &FlowNetwork, unsatisfied: Vec<NetNodeId>) -> Flow {
    Flow {
        values: vec![0; net.edges().len()],
        status: SolveStatus::Infeasible { unsatisfied },
        total_cost: 0,
    }
}

pub(crate) fn flow_from_residual_shipments(net: &FlowNetwork, shipped: &[Value]) -> Flow {
    let values: Vec<Value> = net
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| e.lower + shipped[i])
        .collect();
    Flow::with_values(net, values)
}

const INF: Value = Value::MAX / 4;

/// Minimum-cost integral flow by successive shortest paths. Deterministic
/// for a fixed network.
pub fn solve_min_cost_flow(net: &FlowNetwork) -> Flow {
    let work = match prepare(net) {
        Ok(w) => w,
        Err(unsatisfied) => return infeasible(net, unsatisfied),
    };

    let n = work.node_count;
    let ss = n;
    let tt = n + 1;
    let total = n + 2;

    // Paired residual arcs: even forward, odd backward.
    struct Residual {
        head: Vec<usize>,
        cap: Vec<Value>,
        cost: Vec<Value>,
        adj: Vec<Vec<usize>>,
    }
    impl Residual {
        fn add(&mut self, u: usize, v: usize, c: Value, w: Value) -> usize {
            let id = self.head.len();
            self.adj[u].push(id);
            self.head.push(v);
            self.cap.push(c);
            self.cost.push(w);
            self.adj[v].push(id + 1);
            self.head.push(u);
            self.cap.push(0);
            self.cost.push(-w);
            id
        }
    }
    let mut res = Residual {
        head: Vec::new(),
        cap: Vec::new(),
        cost: Vec::new(),
        adj: vec![Vec::new(); total],
    };

    for arc in &work.arcs {
        res.add(arc.from, arc.to, arc.cap, arc.cost);
    }
    let mut supply_arc = vec![usize::MAX; n];
    let mut total_supply = 0;
    for (v, &b) in work.supplies.iter().enumerate() {
        if b > 0 {
            supply_arc[v] = res.add(ss, v, b, 0);
            total_supply += b;
        } else if b < 0 {
            res.add(v, tt, -b, 0);
        }
    }
    let Residual { head, mut cap, cost, adj } = res;

    let mut pi = vec![0; total];
    let mut dist = vec![INF; total];
    let mut parent = vec![usize::MAX; total];
    let mut pushed = 0;

    loop {
        dist.fill(INF);
        parent.fill(usize::MAX);
        dist[ss] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0, ss)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &a in &adj[u] {
                if cap[a] <= 0 {
                    continue;
                }
                let v = head[a];
                let nd = d + cost[a] + pi[u] - pi[v];
                debug_assert!(cost[a] + pi[u] - pi[v] >= 0, "reduced cost must stay non-negative");
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = a;
                    heap.push(Reverse((nd, v)));
                }
            }
        }
        if dist[tt] >= INF {
            break;
        }
        let d_tt = dist[tt];
        for v in 0..total {
            pi[v] += dist[v].min(d_tt);
        }

        let mut delta = INF;
        let mut v = tt;
        while v != ss {
            let a = parent[v];
            delta = delta.min(cap[a]);
            v = head[a ^ 1];
        }
        let mut v = tt;
        while v != ss {
            let a = parent[v];
            cap[a] -= delta;
            cap[a ^ 1] += delta;
            v = head[a ^ 1];
        }
        pushed += delta;
    }

    if pushed < total_supply {
        let unsatisfied = (0..n)
            .filter(|&v| supply_arc[v] != usize::MAX && cap[supply_arc[v]] > 0)
            .map(|v| net.nodes()[v])
            .collect();
        return infeasible(net, unsatisfied);
    }

    let shipped: Vec<Value> = (0..net.edges().len()).map(|i| cap[2 * i + 1]).collect();
    flow_from_residual_shipments(net, &shipped)
}

/// True iff the assignment respects every bound and conserves flow at every
/// node other than source and sink.
pub fn check_feasibility(net: &FlowNetwork, flow: &Flow) -> bool {
    if flow.values.len() != net.edges().len() {
        return false;
    }
    let mut balance = vec![0; net.node_count()];
    for e in net.edges() {
        let v = flow.values[e.id];
        if v < e.lower || v > net.effective_upper(e) {
            return false;
        }
        balance[net.node_index(e.from).expect("endpoint registered")] -= v;
        balance[net.node_index(e.to).expect("endpoint registered")] += v;
    }
    net.nodes()
        .iter()
        .enumerate()
        .all(|(i, id)| matches!(id, NetNodeId::Source | NetNodeId::Sink) || balance[i] == 0)
}

/// True iff the residual network, including the internal return arc, has no
/// negative-cost directed cycle. Requires a feasible flow.
pub fn check_optimality(net: &FlowNetwork, flow: &Flow) -> bool {
    let n = net.node_count();
    let mut arcs: Vec<(usize, usize, Value)> = Vec::new();
    for e in net.edges() {
        let f = flow.values[e.id];
        let u = net.node_index(e.from).expect("endpoint registered");
        let v = net.node_index(e.to).expect("endpoint registered");
        if f < net.effective_upper(e) {
            arcs.push((u, v, e.cost));
        }
        if f > e.lower {
            arcs.push((v, u, -e.cost));
        }
    }
    let s = net.node_index(NetNodeId::Source).expect("source registered");
    let t = net.node_index(NetNodeId::Sink).expect("sink registered");
    let fs = net.source_outflow(&flow.values);
    if fs < net.big_upper {
        arcs.push((t, s, 0));
    }
    if fs > 0 {
        arcs.push((s, t, 0));
    }

    let mut dist = vec![0; n];
    let sweep = |dist: &mut Vec<Value>| {
        let mut improved = false;
        for &(u, v, c) in &arcs {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                improved = true;
            }
        }
        improved
    };
    for _ in 0..n {
        if !sweep(&mut dist) {
            return true;
        }
    }
    !sweep(&mut dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{zigzag_family, generate_random, LayeredGraph, NodeId};
    use crate::network::{build_network, Bound, EdgeKind, LayoutOptions, NetEdge};

    fn n(s: &str) -> NodeId {
        NodeId::new(s)
    }

    fn graph(layers: &[&[&str]], edges: &[(&str, &str)]) -> LayeredGraph {
        LayeredGraph::new(
            layers
                .iter()
                .map(|l| l.iter().map(|s| n(s)).collect())
                .collect(),
            edges.iter().map(|(u, v)| (n(u), n(v))).collect(),
        )
    }

    /// Hand-assembled network over source, sink and `mids` intermediate
    /// nodes; arcs given as (from, to, lower, upper, cost) with node 0 =
    /// source, node n+1 = sink, 1..=n the intermediates.
    fn synthetic(mids: usize, arcs: &[(usize, usize, Value, Value, Value)], big_upper: Value) -> FlowNetwork {
        let mut nodes = vec![NetNodeId::Source, NetNodeId::Sink];
        for i in 0..mids {
            nodes.push(NetNodeId::W { layer: 0, slot: i });
        }
        let id_of = |i: usize| -> NetNodeId {
            if i == 0 {
                NetNodeId::Source
            } else if i == mids + 1 {
                NetNodeId::Sink
            } else {
                NetNodeId::W { layer: 0, slot: i - 1 }
            }
        };
        let edges = arcs
            .iter()
            .map(|&(u, v, lower, upper, cost)| NetEdge {
                id: 0,
                from: id_of(u),
                to: id_of(v),
                lower,
                upper: Bound::Finite(upper),
                cost,
                kind: EdgeKind::SourceArc { slot: 0 },
            })
            .collect();
        FlowNetwork::assemble(nodes, edges, vec![], big_upper, false)
    }

    /// Exhaustive minimum over all integral assignments within bounds that
    /// conserve flow everywhere except source and sink. The flow value is
    /// subject to the same return-arc capacity the solver uses.
    fn enumerate_min_cost(net: &FlowNetwork) -> Option<Value> {
        let m = net.edges().len();
        let mut values = vec![0; m];
        let mut best: Option<Value> = None;
        fn rec(net: &FlowNetwork, i: usize, values: &mut Vec<Value>, best: &mut Option<Value>) {
            if i == net.edges().len() {
                let flow = Flow::with_values(net, values.clone());
                let fs = net.source_outflow(&flow.values);
                if check_feasibility(net, &flow) && (0..=net.big_upper).contains(&fs) {
                    let cost = flow.total_cost;
                    if best.map_or(true, |b| cost < b) {
                        *best = Some(cost);
                    }
                }
                return;
            }
            let e = &net.edges()[i];
            for v in e.lower..=net.effective_upper(e) {
                values[i] = v;
                rec(net, i + 1, values, best);
            }
        }
        rec(net, 0, &mut values, &mut best);
        best
    }

    #[test]
    fn single_node_network_forces_unit_gaps() {
        let g = graph(&[&["v"]], &[]);
        let net = build_network(&g, &LayoutOptions::default()).unwrap();
        let flow = solve_min_cost_flow(&net);
        assert!(flow.is_optimal());
        assert_eq!(flow.total_cost, 0);
        assert_eq!(flow.value(net.gap_edge_id(0, 0)), 1);
        assert_eq!(flow.value(net.gap_edge_id(0, 1)), 1);
        assert_eq!(net.source_outflow(&flow.values), 2);
        assert!(check_feasibility(&net, &flow));
        assert!(check_optimality(&net, &flow));
    }

    #[test]
    fn capped_fixture_costs_k_minus_three() {
        let g = zigzag_family(4).unwrap();
        let options = LayoutOptions { width_cap: Some(1), ..Default::default() };
        let net = build_network(&g, &options).unwrap();
        let flow = solve_min_cost_flow(&net);
        assert!(flow.is_optimal());
        assert_eq!(flow.total_cost, 1);
    }

    #[test]
    fn matches_exhaustive_enumeration_on_small_networks() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut feasible_seen = 0;
        let mut infeasible_seen = 0;
        for _ in 0..120 {
            let mids = rng.gen_range(1..=3);
            let sink = mids + 1;
            let mut arcs = Vec::new();
            let arc_count = rng.gen_range(3..=7);
            for _ in 0..arc_count {
                let u = rng.gen_range(0..=mids);
                let mut v = rng.gen_range(1..=sink);
                if v == u {
                    v = sink;
                }
                let lower = rng.gen_range(0..=1);
                let upper = rng.gen_range(lower..=2);
                let cost = rng.gen_range(0..=3);
                arcs.push((u, v, lower, upper, cost));
            }
            let net = synthetic(mids, &arcs, 3);
            let flow = solve_min_cost_flow(&net);
            let simplex = solve_with_network_simplex(&net);
            match enumerate_min_cost(&net) {
                Some(best) => {
                    feasible_seen += 1;
                    assert!(flow.is_optimal(), "solver infeasible on {arcs:?}");
                    assert_eq!(flow.total_cost, best, "arcs {arcs:?}");
                    assert!(check_feasibility(&net, &flow));
                    assert!(check_optimality(&net, &flow));
                    assert!(simplex.is_optimal(), "simplex infeasible on {arcs:?}");
                    assert_eq!(simplex.total_cost, best, "simplex on {arcs:?}");
                    assert!(check_feasibility(&net, &simplex));
                    assert!(check_optimality(&net, &simplex));
                }
                None => {
                    infeasible_seen += 1;
                    assert!(!flow.is_optimal(), "solver found a flow on {arcs:?}");
                    assert!(!simplex.is_optimal(), "simplex found a flow on {arcs:?}");
                }
            }
        }
        assert!(feasible_seen > 20 && infeasible_seen > 5);
    }

    #[test]
    fn zero_flow_violates_gap_lower_bounds() {
        let g = graph(&[&["u"], &["v"]], &[("u", "v")]);
        let net = build_network(&g, &LayoutOptions::default()).unwrap();
        let zero = Flow::with_values(&net, vec![0; net.edges().len()]);
        assert!(!check_feasibility(&net, &zero));
    }

    #[test]
    fn unit_perturbation_breaks_conservation() {
        let g = graph(&[&["u"], &["v"]], &[("u", "v")]);
        let net = build_network(&g, &LayoutOptions::default()).unwrap();
        let solved = solve_min_cost_flow(&net);
        let gap = net.gap_edge_id(0, 0);
        let mut values = solved.values.clone();
        values[gap] += 1;
        let perturbed = Flow::with_values(&net, values);
        assert!(!check_feasibility(&net, &perturbed));
    }

    #[test]
    fn zero_cost_cycle_keeps_optimality() {
        // Two parallel zero-cost routes; shifting a unit between them is an
        // alternative optimum.
        let net = synthetic(2, &[(0, 1, 0, 2, 0), (0, 2, 0, 2, 0), (1, 3, 0, 2, 0), (2, 3, 0, 2, 0)], 4);
        let flow = solve_min_cost_flow(&net);
        assert!(flow.is_optimal());
        let mut values = flow.values.clone();
        // Push one unit source->1->sink and pull it back sink<-2<-source.
        values[0] += 1;
        values[2] += 1;
        let shifted = Flow::with_values(&net, values);
        assert!(check_feasibility(&net, &shifted));
        assert!(check_optimality(&net, &shifted));
    }

    #[test]
    fn costly_route_fails_the_optimality_certificate() {
        // Routes of cost 0 and 1 with a forced unit of throughput.
        let net = synthetic(
            2,
            &[(0, 1, 0, 1, 0), (0, 2, 0, 1, 1), (1, 3, 0, 1, 0), (2, 3, 0, 1, 1)],
            2,
        );
        let expensive = Flow::with_values(&net, vec![0, 1, 0, 1]);
        assert!(check_feasibility(&net, &expensive));
        assert!(!check_optimality(&net, &expensive));
        let best = solve_min_cost_flow(&net);
        assert_eq!(best.total_cost, 0);
    }

    #[test]
    fn solve_is_deterministic() {
        let g = generate_random(4, 1..=4, 0.5, 5);
        let net = build_network(&g, &LayoutOptions::default()).unwrap();
        let a = solve_min_cost_flow(&net);
        let b = solve_min_cost_flow(&net);
        assert_eq!(a, b);
    }

    #[test]
    fn width_cap_below_minimum_is_infeasible_with_diagnosis() {
        let g = graph(&[&["u1", "u2", "u3"], &["v"]], &[("u1", "v")]);
        let options = LayoutOptions { width_cap: Some(1), ..Default::default() };
        let net = build_network(&g, &options).unwrap();
        let flow = solve_min_cost_flow(&net);
        match &flow.status {
            SolveStatus::Infeasible { unsatisfied } => assert!(!unsatisfied.is_empty()),
            SolveStatus::Optimal => panic!("three unit gaps cannot fit in width 1"),
        }
    }

    #[test]
    fn backends_agree_on_cost_and_flow_value() {
        for seed in 0..30 {
            let g = generate_random(3, 1..=4, 0.5, seed);
            for cap in [None, Some(3), Some(6)] {
                let options = LayoutOptions { width_cap: cap, ..Default::default() };
                let net = build_network(&g, &options).unwrap();
                let ssp = solve_min_cost_flow(&net);
                let ns = solve_with_network_simplex(&net);
                assert_eq!(ssp.is_optimal(), ns.is_optimal(), "seed {seed} cap {cap:?}");
                if ssp.is_optimal() {
                    assert_eq!(ssp.total_cost, ns.total_cost, "seed {seed} cap {cap:?}");
                    assert_eq!(
                        net.source_outflow(&ssp.values),
                        net.source_outflow(&ns.values),
                        "seed {seed} cap {cap:?}"
                    );
                    assert!(check_feasibility(&net, &ns));
                    assert!(check_optimality(&net, &ns));
                }
            }
        }
    }

    #[test]
    fn relaxing_bounds_never_raises_the_optimum() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..60 {
            let mids = rng.gen_range(1..=3);
            let sink = mids + 1;
            let mut arcs = Vec::new();
            for _ in 0..rng.gen_range(3..=6) {
                let u = rng.gen_range(0..=mids);
                let mut v = rng.gen_range(1..=sink);
                if v == u {
                    v = sink;
                }
                let lower = rng.gen_range(0..=1);
                let upper = rng.gen_range(lower..=2);
                arcs.push((u, v, lower, upper, rng.gen_range(0..=3)));
            }
            let base = solve_min_cost_flow(&synthetic(mids, &arcs, 3));
            if !base.is_optimal() {
                continue;
            }
            let mut relaxed = arcs.clone();
            let pick = rng.gen_range(0..relaxed.len());
            if rng.gen_bool(0.5) {
                relaxed[pick].3 += 1;
            } else if relaxed[pick].2 > 0 {
                relaxed[pick].2 -= 1;
            }
            let better = solve_min_cost_flow(&synthetic(mids, &relaxed, 3));
            assert!(better.is_optimal());
            assert!(better.total_cost <= base.total_cost);
        }
    }
}

//! Property tests over randomized instances.

use proptest::prelude::*;
use rand::{Rng as _, SeedableRng as _};
use rand_chacha::ChaCha8Rng;

use layerflow::{
    build_network, emit_graph, extract_coordinates, generate_random, parse_graph,
    verify_properties, DummyPlacement, Flow, LayeredGraph, LayoutOptions, NodeId, Value,
};

/// Layer sizes plus long edges given as (layer, pos, span, target pos seed).
fn sparse_long_edge_graph(
    sizes: &[usize],
    raw_edges: &[(usize, usize, usize, usize)],
) -> (LayeredGraph, DummyPlacement) {
    let layers: Vec<Vec<NodeId>> = sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| (0..n).map(|j| NodeId::new(format!("n{i}_{j}"))).collect())
        .collect();
    let mut edges = Vec::new();
    let mut placement = DummyPlacement::new();
    for &(layer, pos, span, tseed) in raw_edges {
        let layer = layer % sizes.len();
        let span = 1 + span % 3;
        if layer + span >= sizes.len() {
            continue;
        }
        let u = layers[layer][pos % sizes[layer]].clone();
        let v = layers[layer + span][tseed % sizes[layer + span]].clone();
        let edge = (u, v);
        if edges.contains(&edge) {
            continue;
        }
        if span > 1 {
            placement.insert(edge.clone(), vec![0; span - 1]);
        }
        edges.push(edge);
    }
    (LayeredGraph::new(layers, edges), placement)
}

proptest! {
    /// Subdividing long edges yields a proper graph, conserves the edge
    /// count identity and is idempotent.
    #[test]
    fn properize_is_sound(
        sizes in prop::collection::vec(1..4usize, 2..6),
        raw_edges in prop::collection::vec((0..6usize, 0..4usize, 0..3usize, 0..4usize), 0..10),
    ) {
        let (graph, placement) = sparse_long_edge_graph(&sizes, &raw_edges);
        let long_extra: usize = graph
            .edges()
            .iter()
            .map(|(u, v)| {
                let (lu, _) = graph.position(u).unwrap();
                let (lv, _) = graph.position(v).unwrap();
                lv - lu - 1
            })
            .sum();
        let proper = graph.properize(&placement).unwrap();
        prop_assert!(proper.validate().ok());
        prop_assert_eq!(proper.edge_count(), graph.edge_count() + long_extra);
        let again = proper.properize(&placement).unwrap();
        prop_assert_eq!(&again, &proper);
    }

    /// Emit then parse is the identity on canonical documents.
    #[test]
    fn document_round_trip(seed in any::<u64>(), layer_count in 1..5usize, cap in prop::option::of(0..6i64)) {
        let graph = generate_random(layer_count, 1..=4, 0.5, seed);
        let mut options = LayoutOptions::default();
        options.width_cap = cap;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, layer) in graph.layers().iter().enumerate() {
            for g in 0..layer.len().saturating_sub(1) {
                if rng.gen_bool(0.3) {
                    let min = rng.gen_range(1..=3);
                    options.min_dist.insert((i, g), min);
                    if rng.gen_bool(0.5) {
                        options.max_dist.insert((i, g), min + rng.gen_range(0..=2));
                    }
                }
            }
        }
        if let Some(edge) = graph.edges().first() {
            options.vertical_edges.insert(edge.clone());
        }
        options.normalize = rng.gen_bool(0.5);

        let doc = emit_graph(&graph, &options);
        let (parsed_graph, parsed_options) = parse_graph(&doc).unwrap();
        prop_assert_eq!(&parsed_graph, &graph);
        prop_assert_eq!(&parsed_options, &options);
        prop_assert_eq!(emit_graph(&parsed_graph, &parsed_options), doc);
    }

    /// Coordinates stay strictly increasing per layer for feasible flows
    /// that are not optimal: the solver output plus one unit along a random
    /// residual source-to-sink path.
    #[test]
    fn feasible_flows_induce_valid_coordinates(seed in any::<u64>()) {
        let graph = generate_random(3, 1..=4, 0.5, seed);
        let options = LayoutOptions::default();
        let network = build_network(&graph, &options).unwrap();
        let solved = layerflow::solve_layout(&graph, &options).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);

        if let Some(values) = push_random_residual_path(&network, &solved.flow, &mut rng) {
            let perturbed = Flow::with_values(&network, values);
            prop_assert!(layerflow::check_feasibility(&network, &perturbed));
            let layout = extract_coordinates(&graph, &network, &perturbed, true).unwrap();
            for layer in graph.layers() {
                for pair in layer.windows(2) {
                    prop_assert!(layout.x_of(&pair[0]) < layout.x_of(&pair[1]));
                }
            }
            let report = verify_properties(&graph, &network, &perturbed, false);
            prop_assert!(report.all_passed(), "{}", report);
        }
    }
}

/// One extra unit along a randomly chosen residual path from source to sink;
/// backward residual arcs cancel existing flow. Returns None when the walk
/// dead-ends.
fn push_random_residual_path(
    network: &layerflow::FlowNetwork,
    flow: &Flow,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Value>> {
    use layerflow::NetNodeId;
    let index = |id: NetNodeId| network.node_index(id).unwrap();
    let source = index(NetNodeId::Source);
    let sink = index(NetNodeId::Sink);

    // (from, to, edge id, forward?) residual moves.
    let mut moves: Vec<Vec<(usize, usize, bool)>> = vec![Vec::new(); network.node_count()];
    for e in network.edges() {
        let u = index(e.from);
        let v = index(e.to);
        if flow.value(e.id) < network.effective_upper(e) {
            moves[u].push((v, e.id, true));
        }
        if flow.value(e.id) > e.lower {
            moves[v].push((u, e.id, false));
        }
    }

    for _ in 0..40 {
        let mut values = flow.values.clone();
        let mut seen = vec![false; network.node_count()];
        let mut at = source;
        seen[at] = true;
        let mut ok = false;
        for _ in 0..network.node_count() {
            if at == sink {
                ok = true;
                break;
            }
            let open: Vec<&(usize, usize, bool)> =
                moves[at].iter().filter(|(to, _, _)| !seen[*to]).collect();
            if open.is_empty() {
                break;
            }
            let &&(to, id, forward) = open.get(rng.gen_range(0..open.len())).unwrap();
            if forward {
                values[id] += 1;
            } else {
                values[id] -= 1;
            }
            seen[to] = true;
            at = to;
        }
        if ok && at == sink {
            return Some(values);
        }
    }
    None
}

//! Horizontal coordinate assignment for layered graph drawings.
//!
//! Given a properly layered DAG with a fixed left-to-right ordering per
//! layer, this crate computes integer x-coordinates that minimize the total
//! horizontal edge length, optionally subject to a prescribed maximum
//! drawing width, per-gap minimum/maximum distances, and edges forced to be
//! vertical. The problem is reduced to an integral minimum-cost flow on an
//! auxiliary network; flow on a gap edge is the distance between two
//! neighboring nodes, and the flow value caps the drawing width.
//!
//! Typical use:
//!
//! ```
//! use layerflow::{zigzag_family, layout_prescribed_width, LayoutOptions};
//!
//! let graph = zigzag_family(6).unwrap();
//! let solved = layout_prescribed_width(&graph, 1, &LayoutOptions::default()).unwrap();
//! assert_eq!(solved.layout.width, 1);
//! assert_eq!(solved.layout.total_length, 3);
//! ```

pub mod coords;
pub mod format;
pub mod graph;
pub mod network;
pub mod oracle;
pub mod pipeline;
pub mod solver;
pub mod svg;

pub use coords::{extract_coordinates, layout_metrics, verify_properties, Check, CoordError, Layout, PropertyReport};
pub use format::{emit_graph, emit_layout, parse_graph, ParseError, ParseErrorKind};
pub use graph::{
    zigzag_family, generate_random, DummyPlacement, Edge, FixtureError, LayeredGraph, NodeId,
    ProperizeError, ValidationReport, Violation,
};
pub use network::{
    build_network, compute_c_cost, crossing_sets, detect_hugs, enforce_vertical, Bound, BuildError,
    Dir, EdgeKind, FlowNetwork, LayoutOptions, NetEdge, NetNodeId, Value,
};
pub use oracle::{brute_force_optimal, flow_from_layout, LayoutFlowError, OracleError, OracleResult};
pub use pipeline::{
    bench_compare, layout_min_length, layout_minimum_width, layout_prescribed_width,
    minimum_feasible_width, solve_layout, BenchFailure, BenchRecord, BenchReport, BenchSummary,
    CorpusSpec, ExcessStats, PipelineError, RatioStats, Solved,
};
pub use solver::{
    check_feasibility, check_optimality, solve_min_cost_flow, solve_with_network_simplex, Flow,
    SolveStatus,
};
pub use svg::{render_svg, SvgStyle};

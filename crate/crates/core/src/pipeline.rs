//! End-to-end layout entry points and the benchmark harness.
//!
//! [`layout_min_length`] minimizes total horizontal edge length with no
//! width restriction; [`layout_prescribed_width`] does the same under a
//! width cap. [`bench_compare`] runs both over a seeded corpus and reports
//! how much length the minimum-width restriction costs and how much width
//! the unconstrained optimum wastes.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::coords::{extract_coordinates, Layout};
use crate::graph::{generate_random, LayeredGraph};
use crate::network::{build_network, BuildError, FlowNetwork, LayoutOptions, NetNodeId, Value};
use crate::solver::{solve_min_cost_flow, Flow, SolveStatus};

/// A solved instance: the network, the optimal flow and the induced layout.
#[derive(Clone, Debug)]
pub struct Solved {
    pub network: FlowNetwork,
    pub flow: Flow,
    pub layout: Layout,
}

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("no feasible drawing (minimum feasible width is {minimum_feasible_width})")]
    Infeasible {
        minimum_feasible_width: Value,
        unsatisfied: Vec<NetNodeId>,
    },
}

/// Builds, solves and extracts coordinates honoring every option, including
/// `options.width_cap`.
pub fn solve_layout(graph: &LayeredGraph, options: &LayoutOptions) -> Result<Solved, PipelineError> {
    let network = build_network(graph, options)?;
    let flow = solve_min_cost_flow(&network);
    match &flow.status {
        SolveStatus::Infeasible { unsatisfied } => Err(PipelineError::Infeasible {
            minimum_feasible_width: minimum_feasible_width(graph, options),
            unsatisfied: unsatisfied.clone(),
        }),
        SolveStatus::Optimal => {
            let layout = extract_coordinates(graph, &network, &flow, options.normalize)
                .expect("solver output is feasible");
            Ok(Solved { network, flow, layout })
        }
    }
}

/// Minimum total edge length with no width restriction.
pub fn layout_min_length(graph: &LayeredGraph, options: &LayoutOptions) -> Result<Solved, PipelineError> {
    let options = LayoutOptions { width_cap: None, ..options.clone() };
    solve_layout(graph, &options)
}

/// Minimum total edge length among drawings of width at most `width`.
pub fn layout_prescribed_width(
    graph: &LayeredGraph,
    width: Value,
    options: &LayoutOptions,
) -> Result<Solved, PipelineError> {
    let minimum = minimum_feasible_width(graph, options);
    if width < minimum {
        return Err(PipelineError::Infeasible {
            minimum_feasible_width: minimum,
            unsatisfied: Vec::new(),
        });
    }
    let options = LayoutOptions { width_cap: Some(width), ..options.clone() };
    solve_layout(graph, &options)
}

/// Width forced by the per-layer minimum distances: the widest layer's sum
/// of minimum gaps. Vertical-edge constraints may push the true minimum
/// higher; [`layout_minimum_width`] handles that with a retry search.
pub fn minimum_feasible_width(graph: &LayeredGraph, options: &LayoutOptions) -> Value {
    (0..graph.layer_count())
        .map(|i| {
            (0..graph.layer_len(i).saturating_sub(1))
                .map(|g| options.min_dist_at(i, g))
                .sum()
        })
        .max()
        .unwrap_or(0)
}

/// Narrowest feasible layout: starts at the distance-bound minimum and, when
/// vertical edges raise the floor, doubles the cap until feasible and then
/// binary-searches back down to the true minimum.
pub fn layout_minimum_width(
    graph: &LayeredGraph,
    options: &LayoutOptions,
) -> Result<(Solved, Value), PipelineError> {
    let floor = minimum_feasible_width(graph, options);
    let attempt = |w: Value| layout_prescribed_width(graph, w, options);

    match attempt(floor) {
        Ok(solved) => return Ok((solved, floor)),
        Err(PipelineError::Build(e)) => return Err(PipelineError::Build(e)),
        Err(PipelineError::Infeasible { .. }) => {}
    }

    // The uncapped problem bounds any useful width.
    let no_cap = LayoutOptions { width_cap: None, ..options.clone() };
    let ceiling = {
        let network = build_network(graph, &no_cap)?;
        network.big_upper - 2
    };
    let mut lo = floor;
    let mut hi = floor.max(1);
    let (mut solved, mut width) = loop {
        hi *= 2;
        if hi >= ceiling {
            hi = ceiling;
        }
        match attempt(hi) {
            Ok(solved) => break (solved, hi),
            Err(e @ PipelineError::Build(_)) => return Err(e),
            Err(e @ PipelineError::Infeasible { .. }) => {
                if hi >= ceiling {
                    return Err(e);
                }
                lo = hi;
            }
        }
    };
    while lo + 1 < width {
        let mid = lo + (width - lo) / 2;
        match attempt(mid) {
            Ok(s) => {
                solved = s;
                width = mid;
            }
            Err(PipelineError::Build(e)) => return Err(PipelineError::Build(e)),
            Err(PipelineError::Infeasible { .. }) => lo = mid,
        }
    }
    Ok((solved, width))
}

/// Corpus description for [`bench_compare`]. Deterministic per seed.
#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub instances: usize,
    pub layer_count: (usize, usize),
    pub layer_size: (usize, usize),
    pub edge_density: f64,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            instances: 100,
            layer_count: (2, 6),
            layer_size: (1, 5),
            edge_density: 0.4,
            seed: 2024,
        }
    }
}

/// Per-instance benchmark outcome.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub id: String,
    pub nodes: usize,
    pub edges: usize,
    pub layers: usize,
    pub min_width: Value,
    pub unconstrained_length: Value,
    pub unconstrained_width: Value,
    pub unconstrained_micros: u128,
    pub constrained_length: Value,
    pub constrained_width: Value,
    pub constrained_micros: u128,
}

#[derive(Clone, Debug)]
pub struct BenchFailure {
    pub id: String,
    pub error: String,
}

/// Mean/p95 statistics over ratios at least 1.
#[derive(Clone, Debug, Default)]
pub struct RatioStats {
    pub count: usize,
    pub mean: f64,
    pub p95: f64,
    pub max: f64,
}

/// Statistics over absolute excess values, used when the baseline is zero
/// and a ratio would be undefined.
#[derive(Clone, Debug, Default)]
pub struct ExcessStats {
    pub count: usize,
    pub mean: f64,
    pub max: Value,
}

#[derive(Clone, Debug)]
pub struct BenchSummary {
    pub instances: usize,
    pub failures: usize,
    /// Constrained length over unconstrained length, where the baseline is
    /// positive.
    pub length_ratio: Option<RatioStats>,
    /// Absolute extra length where the unconstrained optimum is 0.
    pub length_excess: Option<ExcessStats>,
    /// Unconstrained width over minimum width, where the minimum is
    /// positive.
    pub width_ratio: Option<RatioStats>,
    /// Absolute extra width where the minimum width is 0.
    pub width_excess: Option<ExcessStats>,
    /// True when there are no records to summarize.
    pub vacuous: bool,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<BenchFailure>,
    pub summary: BenchSummary,
}

/// Runs the unconstrained and minimum-width layouts over a seeded corpus.
/// Per-instance failures are recorded and the run continues.
pub fn bench_compare(spec: &CorpusSpec) -> BenchReport {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let options = LayoutOptions::default();

    for idx in 0..spec.instances {
        let (lc_lo, lc_hi) = spec.layer_count;
        let layer_count = rng.gen_range(lc_lo.max(1)..=lc_hi.max(lc_lo.max(1)));
        let instance_seed: u64 = rng.gen();
        let graph = generate_random(
            layer_count,
            spec.layer_size.0..=spec.layer_size.1,
            spec.edge_density,
            instance_seed,
        );
        let id = format!("rnd-{idx:03}-s{instance_seed:016x}");

        let unconstrained_start = Instant::now();
        let unconstrained = match layout_min_length(&graph, &options) {
            Ok(s) => s,
            Err(e) => {
                failures.push(BenchFailure { id, error: e.to_string() });
                continue;
            }
        };
        let unconstrained_micros = unconstrained_start.elapsed().as_micros();

        let constrained_start = Instant::now();
        let (constrained, min_width) = match layout_minimum_width(&graph, &options) {
            Ok(s) => s,
            Err(e) => {
                failures.push(BenchFailure { id, error: e.to_string() });
                continue;
            }
        };
        let constrained_micros = constrained_start.elapsed().as_micros();

        records.push(BenchRecord {
            id,
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            layers: graph.layer_count(),
            min_width,
            unconstrained_length: unconstrained.layout.total_length,
            unconstrained_width: unconstrained.layout.width,
            unconstrained_micros,
            constrained_length: constrained.layout.total_length,
            constrained_width: constrained.layout.width,
            constrained_micros,
        });
    }

    let summary = summarize(&records, failures.len());
    BenchReport { records, failures, summary }
}

fn ratio_stats(mut ratios: Vec<f64>) -> Option<RatioStats> {
    if ratios.is_empty() {
        return None;
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let count = ratios.len();
    let mean = ratios.iter().sum::<f64>() / count as f64;
    let p95 = ratios[((count as f64 * 0.95).ceil() as usize).clamp(1, count) - 1];
    let max = *ratios.last().expect("non-empty");
    Some(RatioStats { count, mean, p95, max })
}

fn excess_stats(excesses: Vec<Value>) -> Option<ExcessStats> {
    if excesses.is_empty() {
        return None;
    }
    let count = excesses.len();
    let mean = excesses.iter().sum::<Value>() as f64 / count as f64;
    let max = excesses.iter().copied().max().expect("non-empty");
    Some(ExcessStats { count, mean, max })
}

fn summarize(records: &[BenchRecord], failures: usize) -> BenchSummary {
    let mut length_ratios = Vec::new();
    let mut length_excess = Vec::new();
    let mut width_ratios = Vec::new();
    let mut width_excess = Vec::new();
    for r in records {
        if r.unconstrained_length > 0 {
            length_ratios.push(r.constrained_length as f64 / r.unconstrained_length as f64);
        } else {
            length_excess.push(r.constrained_length);
        }
        if r.min_width > 0 {
            width_ratios.push(r.unconstrained_width as f64 / r.min_width as f64);
        } else {
            width_excess.push(r.unconstrained_width);
        }
    }
    BenchSummary {
        instances: records.len(),
        failures,
        length_ratio: ratio_stats(length_ratios),
        length_excess: excess_stats(length_excess),
        width_ratio: ratio_stats(width_ratios),
        width_excess: excess_stats(width_excess),
        vacuous: records.is_empty(),
    }
}

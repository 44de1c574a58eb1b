//! Command-line front end: layout, oracle, bench and verify.
//!
//! Exit codes: 0 success, 1 infeasible (or failed verification), 2 input
//! error.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use layerflow::{
    bench_compare, brute_force_optimal, emit_layout, parse_graph, render_svg, solve_layout,
    verify_properties, BenchReport, CorpusSpec, LayeredGraph, LayoutOptions, NodeId, OracleError,
    PipelineError, SvgStyle, Value,
};

const ORACLE_BUDGET_ENV: &str = "LAYERFLOW_ORACLE_BUDGET";
const DEFAULT_ORACLE_BUDGET: u64 = 20_000_000;

#[derive(Parser)]
#[command(
    name = "layerflow",
    about = "Integer x-coordinates for layered graph drawings, by minimum-cost flow",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConstraintFlags {
    /// Maximum drawing width.
    #[arg(long, value_name = "W")]
    max_width: Option<Value>,
    /// Minimum distance for one gap, as LAYER:GAP:DIST (zero-based indices).
    #[arg(long, value_name = "L:G:D")]
    min_dist: Vec<String>,
    /// Maximum distance for one gap, as LAYER:GAP:DIST.
    #[arg(long, value_name = "L:G:D")]
    max_dist: Vec<String>,
    /// Force one edge vertical, as SRC:DST. Repeatable.
    #[arg(long, value_name = "SRC:DST")]
    vertical: Vec<String>,
    /// Force every dummy-to-dummy chain segment vertical.
    #[arg(long)]
    straight_inner_segments: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a layout for an instance file (`-` reads stdin).
    Layout {
        input: PathBuf,
        #[command(flatten)]
        constraints: ConstraintFlags,
        /// Also write an SVG rendering to this path.
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        /// Write the layout document here instead of stdout.
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Exhaustive minimum length for a width-capped instance.
    Oracle {
        input: PathBuf,
        /// Width cap for the search; falls back to the document's width-cap.
        #[arg(long, value_name = "W")]
        max_width: Option<Value>,
        /// Enumeration budget; also settable via LAYERFLOW_ORACLE_BUDGET.
        #[arg(long, value_name = "N")]
        budget: Option<u64>,
    },
    /// Compare unconstrained and minimum-width layouts over a random corpus.
    Bench {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Layer count range, as MIN:MAX.
        #[arg(long, default_value = "2:6", value_name = "MIN:MAX")]
        layers: String,
        /// Layer size range, as MIN:MAX.
        #[arg(long, default_value = "1:5", value_name = "MIN:MAX")]
        layer_size: String,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
    },
    /// Solve an instance and check the flow identities.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        constraints: ConstraintFlags,
    },
}

enum CliError {
    /// Bad input: parse errors, malformed flags, IO problems.
    Input(String),
    /// The constraint set admits no drawing.
    Infeasible(String),
    /// Verification found a violated identity.
    Verification,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Verification) => ExitCode::from(1),
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Layout { input, constraints, svg, output } => {
            let (graph, options) = load(&input, &constraints)?;
            let solved = solve(&graph, &options)?;
            let doc = emit_layout(&solved.layout, &graph, "optimal");
            match output {
                Some(path) => fs::write(&path, doc)
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?,
                None => print!("{doc}"),
            }
            if let Some(path) = svg {
                let rendered = render_svg(&solved.layout, &graph, &SvgStyle::default());
                fs::write(&path, rendered)
                    .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Oracle { input, max_width, budget } => {
            let (graph, mut options) = load(&input, &ConstraintFlags::empty())?;
            if let Some(w) = max_width {
                options.width_cap = Some(w);
            }
            if options.width_cap.is_none() {
                return Err(CliError::Input(
                    "the oracle needs --max-width or a width-cap in the document".into(),
                ));
            }
            let budget = budget
                .or_else(|| std::env::var(ORACLE_BUDGET_ENV).ok().and_then(|v| v.parse().ok()))
                .unwrap_or(DEFAULT_ORACLE_BUDGET);
            match brute_force_optimal(&graph, &options, budget) {
                Ok(result) => {
                    print!("{}", emit_layout(&result.witness, &graph, "oracle"));
                    println!("explored {}", result.explored);
                    Ok(())
                }
                Err(e @ OracleError::Infeasible) => Err(CliError::Infeasible(e.to_string())),
                Err(e) => Err(CliError::Input(e.to_string())),
            }
        }
        Command::Bench { instances, seed, layers, layer_size, density } => {
            let spec = CorpusSpec {
                instances,
                layer_count: parse_range(&layers)?,
                layer_size: parse_range(&layer_size)?,
                edge_density: density,
                seed,
            };
            print_bench(&bench_compare(&spec));
            Ok(())
        }
        Command::Verify { input, constraints } => {
            let (graph, options) = load(&input, &constraints)?;
            let solved = solve(&graph, &options)?;
            let report = verify_properties(&graph, &solved.network, &solved.flow, true);
            print!("{report}");
            if report.all_passed() {
                Ok(())
            } else {
                Err(CliError::Verification)
            }
        }
    }
}

impl ConstraintFlags {
    fn empty() -> ConstraintFlags {
        ConstraintFlags {
            max_width: None,
            min_dist: Vec::new(),
            max_dist: Vec::new(),
            vertical: Vec::new(),
            straight_inner_segments: false,
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Input(format!("cannot read stdin: {e}")))?;
        Ok(text)
    } else {
        fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
    }
}

/// Parses the instance and folds the CLI flags into its options.
fn load(path: &PathBuf, flags: &ConstraintFlags) -> Result<(LayeredGraph, LayoutOptions), CliError> {
    let text = read_input(path)?;
    let (graph, mut options) = parse_graph(&text).map_err(|e| CliError::Input(e.to_string()))?;
    if let Some(w) = flags.max_width {
        options.width_cap = Some(w);
    }
    for spec in &flags.min_dist {
        let (layer, gap, value) = parse_triple(spec)?;
        options.min_dist.insert((layer, gap), value);
    }
    for spec in &flags.max_dist {
        let (layer, gap, value) = parse_triple(spec)?;
        options.max_dist.insert((layer, gap), value);
    }
    for spec in &flags.vertical {
        let (src, dst) = spec
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("--vertical expects SRC:DST, got `{spec}`")))?;
        options
            .vertical_edges
            .insert((NodeId::new(src), NodeId::new(dst)));
    }
    if flags.straight_inner_segments {
        options.vertical_edges.extend(graph.inner_segments());
    }
    Ok((graph, options))
}

fn solve(graph: &LayeredGraph, options: &LayoutOptions) -> Result<layerflow::Solved, CliError> {
    solve_layout(graph, options).map_err(|e| match e {
        PipelineError::Infeasible { .. } => CliError::Infeasible(e.to_string()),
        PipelineError::Build(b) => CliError::Input(b.to_string()),
    })
}

fn parse_triple(spec: &str) -> Result<(usize, usize, Value), CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [layer, gap, value] = parts.as_slice() else {
        return Err(CliError::Input(format!("expected LAYER:GAP:DIST, got `{spec}`")));
    };
    let bad = |what: &str| CliError::Input(format!("bad {what} in `{spec}`"));
    Ok((
        layer.parse().map_err(|_| bad("layer"))?,
        gap.parse().map_err(|_| bad("gap"))?,
        value.parse().map_err(|_| bad("distance"))?,
    ))
}

fn parse_range(spec: &str) -> Result<(usize, usize), CliError> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("expected MIN:MAX, got `{spec}`")))?;
    let lo = lo.parse().map_err(|_| CliError::Input(format!("bad minimum in `{spec}`")))?;
    let hi = hi.parse().map_err(|_| CliError::Input(format!("bad maximum in `{spec}`")))?;
    if lo > hi {
        return Err(CliError::Input(format!("empty range `{spec}`")));
    }
    Ok((lo, hi))
}

fn print_bench(report: &BenchReport) {
    println!("instance nodes edges layers min-width uncon-len uncon-width uncon-us con-len con-width con-us");
    for r in &report.records {
        println!(
            "{} {} {} {} {} {} {} {} {} {} {}",
            r.id,
            r.nodes,
            r.edges,
            r.layers,
            r.min_width,
            r.unconstrained_length,
            r.unconstrained_width,
            r.unconstrained_micros,
            r.constrained_length,
            r.constrained_width,
            r.constrained_micros
        );
    }
    for f in &report.failures {
        println!("{} FAILED {}", f.id, f.error);
    }
    let s = &report.summary;
    println!("-- summary --");
    println!("instances {}  failures {}", s.instances, s.failures);
    if s.vacuous {
        println!("vacuous: no records");
        return;
    }
    if let Some(r) = &s.length_ratio {
        println!(
            "length overhead (min-width vs unconstrained, {} instances): mean {:.4}  p95 {:.4}  max {:.4}",
            r.count, r.mean, r.p95, r.max
        );
    }
    if let Some(e) = &s.length_excess {
        println!(
            "length excess where the unconstrained minimum is 0 ({} instances): mean {:.4}  max {}",
            e.count, e.mean, e.max
        );
    }
    if let Some(r) = &s.width_ratio {
        println!(
            "width overhead (unconstrained vs minimum, {} instances): mean {:.4}  p95 {:.4}  max {:.4}",
            r.count, r.mean, r.p95, r.max
        );
    }
    if let Some(e) = &s.width_excess {
        println!(
            "width excess where the minimum width is 0 ({} instances): mean {:.4}  max {}",
            e.count, e.mean, e.max
        );
    }
}

//! SVG rendering of a layout.
//!
//! Nodes become circles at `(x * unit, y * unit)` inside a fixed margin,
//! edges straight segments, and recorded dummy chains a single polyline
//! through the dummy coordinates. Output is deterministic for fixed inputs.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::coords::Layout;
use crate::graph::{Edge, LayeredGraph, NodeId};
use crate::network::Value;

/// Cosmetic parameters; the defaults are fine for small graphs.
#[derive(Clone, Copy, Debug)]
pub struct SvgStyle {
    pub unit: Value,
    pub radius: Value,
    pub margin: Value,
    pub labels: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { unit: 48, radius: 8, margin: 24, labels: true }
    }
}

/// Renders the layout as an SVG 1.1 document.
pub fn render_svg(layout: &Layout, graph: &LayeredGraph, style: &SvgStyle) -> String {
    let min_x = layout.x.values().min().copied().unwrap_or(0);
    let span = layout.width;
    let layer_span = graph.layer_count().saturating_sub(1) as Value;
    let width = 2 * style.margin + span * style.unit;
    let height = 2 * style.margin + layer_span * style.unit;

    let px = |node: &NodeId| style.margin + (layout.x[node] - min_x) * style.unit;
    let py = |node: &NodeId| style.margin + layout.y[node] as Value * style.unit;

    let mut dummies: HashSet<&NodeId> = HashSet::new();
    let mut chain_segments: HashSet<Edge> = HashSet::new();
    for ((u, v), chain) in graph.dummy_map() {
        let mut prev = u;
        for d in chain {
            dummies.insert(d);
            chain_segments.insert((prev.clone(), d.clone()));
            prev = d;
        }
        chain_segments.insert((prev.clone(), v.clone()));
    }

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );

    for edge in graph.edges() {
        if chain_segments.contains(edge) {
            continue;
        }
        let (u, v) = edge;
        let _ = writeln!(
            out,
            r#"  <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"/>"#,
            px(u),
            py(u),
            px(v),
            py(v)
        );
    }

    for ((u, v), chain) in graph.dummy_map() {
        let mut points = vec![format!("{},{}", px(u), py(u))];
        for d in chain {
            points.push(format!("{},{}", px(d), py(d)));
        }
        points.push(format!("{},{}", px(v), py(v)));
        let _ = writeln!(
            out,
            r#"  <polyline points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            points.join(" ")
        );
    }

    for layer in graph.layers() {
        for node in layer {
            if dummies.contains(node) {
                continue;
            }
            let _ = writeln!(
                out,
                r#"  <circle cx="{}" cy="{}" r="{}" fill="white" stroke="black" stroke-width="2"/>"#,
                px(node),
                py(node),
                style.radius
            );
            if style.labels {
                let _ = writeln!(
                    out,
                    r#"  <text x="{}" y="{}" font-size="{}" text-anchor="middle">{}</text>"#,
                    px(node),
                    py(node) - style.radius - 4,
                    style.radius + 4,
                    node
                );
            }
        }
    }

    out.push_str("</svg>\n");
    out
}

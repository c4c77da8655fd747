//! SVG rendering of a compiled layout: home traps, hub stars, CZ edges
//! (solid within the blockade radius, dashed beyond), one representative
//! blockade disk with the minimum-separation circle, and shuttle arrows.

use crate::error::{CompileError, Result};
use crate::pipeline::CompileArtifact;
use crate::transpile::{OpKind, TrapKind};

const CANVAS: f64 = 720.0;
const MARGIN: f64 = 48.0;

fn px(v: f64) -> f64 {
    MARGIN + v * (CANVAS - 2.0 * MARGIN)
}

fn py(v: f64) -> f64 {
    // flip so +y points up
    CANVAS - MARGIN - v * (CANVAS - 2.0 * MARGIN)
}

fn scale_len(v: f64) -> f64 {
    v * (CANVAS - 2.0 * MARGIN)
}

fn star_path(cx: f64, cy: f64, r: f64) -> String {
    let mut d = String::new();
    for k in 0..10 {
        let radius = if k % 2 == 0 { r } else { r * 0.45 };
        let angle = std::f64::consts::TAU * k as f64 / 10.0 - std::f64::consts::FRAC_PI_2;
        let (x, y) = (cx + radius * angle.cos(), cy + radius * angle.sin());
        d.push_str(if k == 0 { "M" } else { "L" });
        d.push_str(&format!("{x:.2},{y:.2} "));
    }
    d.push('Z');
    d
}

/// Render an artifact's layout and routing to an SVG document. Requires a
/// successful compile (the schedule supplies the shuttle arrows).
pub fn render_svg(artifact: &CompileArtifact) -> Result<String> {
    let Some(schedule) = &artifact.schedule else {
        return Err(CompileError::DegenerateInput(
            "artifact has no schedule to render".into(),
        ));
    };
    let layout = &artifact.layout;
    let r_b = layout.r_b;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{c}\" height=\"{c}\" viewBox=\"0 0 {c} {c}\">\n",
        c = CANVAS
    ));
    svg.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" \
         markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">\
         <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#c0392b\"/></marker></defs>\n",
    );
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{c}\" height=\"{c}\" fill=\"#fbfbf8\"/>\n",
        c = CANVAS
    ));
    svg.push_str(&format!(
        "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{w}\" fill=\"none\" stroke=\"#d5d5d0\" stroke-width=\"1\"/>\n",
        m = MARGIN,
        w = CANVAS - 2.0 * MARGIN
    ));

    let home_positions: Vec<[f64; 2]> = layout
        .traps
        .iter()
        .filter(|t| matches!(t.kind, TrapKind::Home { .. }))
        .map(|t| t.position)
        .collect();

    // representative blockade disk and minimum-separation circle on qubit 0
    if let Some(&p) = home_positions.first() {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"#2980b9\" fill-opacity=\"0.08\" stroke=\"#2980b9\" stroke-opacity=\"0.45\" stroke-width=\"1\"/>\n",
            px(p[0]),
            py(p[1]),
            scale_len(r_b)
        ));
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"#7f8c8d\" stroke-width=\"1\" stroke-dasharray=\"2,3\"/>\n",
            px(p[0]),
            py(p[1]),
            scale_len(layout.d_min())
        ));
    }

    // CZ interaction edges between initial home positions
    for &(i, j, w) in &artifact.interaction {
        let (a, b) = (home_positions[i], home_positions[j]);
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let width = 1.0 + (w as f64).ln_1p() * 0.6;
        if d <= r_b {
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#27ae60\" stroke-width=\"{width:.2}\"/>\n",
                px(a[0]), py(a[1]), px(b[0]), py(b[1])
            ));
        } else {
            svg.push_str(&format!(
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#8e44ad\" stroke-width=\"{width:.2}\" stroke-dasharray=\"6,4\"/>\n",
                px(a[0]), py(a[1]), px(b[0]), py(b[1])
            ));
        }
    }

    // shuttle arrows from the schedule
    for layer in &schedule.layers {
        for op in layer {
            if let OpKind::Shuttle { from, to, .. } = op.kind {
                let (a, b) = (layout.traps[from].position, layout.traps[to].position);
                svg.push_str(&format!(
                    "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-width=\"1.6\" marker-end=\"url(#arrow)\"/>\n",
                    px(a[0]), py(a[1]), px(b[0]), py(b[1])
                ));
            }
        }
    }

    // traps on top: home circles with qubit labels, hub stars
    for trap in &layout.traps {
        let p = trap.position;
        match trap.kind {
            TrapKind::Home { owner } => {
                svg.push_str(&format!(
                    "<circle class=\"home\" cx=\"{:.2}\" cy=\"{:.2}\" r=\"7\" fill=\"#2c3e50\"/>\n",
                    px(p[0]),
                    py(p[1])
                ));
                svg.push_str(&format!(
                    "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\" fill=\"#ffffff\" text-anchor=\"middle\" dominant-baseline=\"central\" font-family=\"sans-serif\">{owner}</text>\n",
                    px(p[0]),
                    py(p[1])
                ));
            }
            TrapKind::Hub => {
                svg.push_str(&format!(
                    "<path class=\"hub\" d=\"{}\" fill=\"#f39c12\" stroke=\"#b9770e\" stroke-width=\"1\"/>\n",
                    star_path(px(p[0]), py(p[1]), 9.0)
                ));
            }
        }
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

//! Deterministic SVG rendering: a coarse gasket wireframe, one filled
//! layer per cluster with vertex markers, and a legend. Output is a pure
//! function of the inputs, so a fixed graph, layers, and style reproduce
//! identical bytes.

use std::fmt::Write as _;

use crate::gasket::GasketLevel;
use crate::limits::vertex_planar;

/// Fill colors cycled across layers; overlaps blend through the fixed
/// fill opacity.
pub const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const FILL_OPACITY: &str = "0.45";
const PAD: f64 = 8.0;

#[derive(Clone, Copy, Debug)]
pub struct RenderStyle {
    /// Cell scale of the background wireframe.
    pub wireframe_scale: i32,
    pub pixels_per_unit: f64,
    /// Marker radius in pixels; 0 disables vertex markers.
    pub marker_radius: f64,
}

impl Default for RenderStyle {
    fn default() -> RenderStyle {
        RenderStyle { wireframe_scale: 0, pixels_per_unit: 128.0, marker_radius: 1.6 }
    }
}

pub struct SvgLayer<'a> {
    pub name: &'a str,
    pub indices: &'a [u32],
}

fn fmt(x: f64) -> String {
    format!("{x:.3}")
}

/// Render the domain of `g` with the given cluster layers. Each layer
/// fills the level-n cells whose three corners all lie in the cluster and
/// marks every cluster vertex, so sparse clusters stay visible.
pub fn render_svg(g: &GasketLevel, layers: &[SvgLayer], style: &RenderStyle) -> String {
    let n = g.n();
    let radius = (2.0f64).powi(g.domain_log2() as i32);
    let ppu = style.pixels_per_unit;
    let height_units = radius * 3.0f64.sqrt() / 2.0;
    let width = 2.0 * radius * ppu + 2.0 * PAD;
    let height = height_units * ppu + 2.0 * PAD;
    let place = |v| {
        let (x, y) = vertex_planar(v, n);
        (fmt((x + radius) * ppu + PAD), fmt((height_units - y) * ppu + PAD))
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\">",
        fmt(width),
        fmt(height)
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>");

    // Wireframe cells, then the heavier domain outline.
    let wire_scale = style.wireframe_scale.max(-(g.domain_log2() as i32));
    for (scale, stroke, width) in [
        (wire_scale, "#bbbbbb", "0.6"),
        (-(g.domain_log2() as i32), "#333333", "1.2"),
    ] {
        let mut d = String::new();
        for cell in g.cells_at_scale(scale) {
            let [p, q, r] = cell.corners_at_level(n).map(place);
            let _ = write!(d, "M{} {}L{} {}L{} {}Z", p.0, p.1, q.0, q.1, r.0, r.1);
        }
        let _ = writeln!(
            out,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>"
        );
    }

    for (k, layer) in layers.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut member = vec![false; g.vertex_count()];
        for &i in layer.indices {
            member[i as usize] = true;
        }
        let mut d = String::new();
        for cell in g.cells_at_scale(n as i32) {
            let corners = cell.corners_at_level(n);
            if corners.iter().all(|&v| g.index_of(v).is_some_and(|i| member[i as usize])) {
                let [p, q, r] = corners.map(place);
                let _ = write!(d, "M{} {}L{} {}L{} {}Z", p.0, p.1, q.0, q.1, r.0, r.1);
            }
        }
        let _ = writeln!(out, "<g fill=\"{color}\" fill-opacity=\"{FILL_OPACITY}\">");
        let _ = writeln!(out, "<path d=\"{d}\"/>");
        if style.marker_radius > 0.0 {
            for &i in layer.indices {
                let (x, y) = place(g.vertex(i));
                let _ = writeln!(
                    out,
                    "<circle cx=\"{x}\" cy=\"{y}\" r=\"{}\" fill-opacity=\"1\"/>",
                    fmt(style.marker_radius)
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }

    // Legend: context line, then one line per layer with its point-cloud
    // measure 3^{-n}·count.
    let text_y = |row: usize| fmt(PAD + 12.0 + 14.0 * row as f64);
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\">level n={n}, domain B(0,2^{})</text>",
        fmt(PAD),
        text_y(0),
        g.domain_log2()
    );
    for (k, layer) in layers.iter().enumerate() {
        let measure = layer.indices.len() as f64 * (3.0f64).powi(-(n as i32));
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"{}\">{}: {} vertices, measure {:.6}</text>",
            fmt(PAD),
            text_y(k + 1),
            PALETTE[k % PALETTE.len()],
            layer.name,
            layer.indices.len(),
            measure
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gasket::Vertex;

    fn small_graph() -> GasketLevel {
        GasketLevel::new(2, 1)
    }

    #[test]
    fn five_vertex_cluster_gets_five_markers_and_an_outline() {
        let g = small_graph();
        let cluster: Vec<u32> = (0..5).collect();
        let svg = render_svg(
            &g,
            &[SvgLayer { name: "cluster", indices: &cluster }],
            &RenderStyle::default(),
        );
        assert!(svg.starts_with("<svg "));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle ").count(), 5);
        assert_eq!(svg.matches("<g ").count(), svg.matches("</g>").count());
        // Wireframe plus domain outline plus one layer fill path.
        assert_eq!(svg.matches("<path ").count(), 3);
        assert!(svg.contains("cluster: 5 vertices"));
    }

    #[test]
    fn output_is_deterministic() {
        let g = small_graph();
        let cluster: Vec<u32> = (0..g.vertex_count() as u32).step_by(2).collect();
        let layers = [SvgLayer { name: "a", indices: &cluster }];
        let style = RenderStyle::default();
        assert_eq!(render_svg(&g, &layers, &style), render_svg(&g, &layers, &style));
    }

    #[test]
    fn empty_layer_renders_wireframe_only() {
        let g = small_graph();
        let svg = render_svg(&g, &[SvgLayer { name: "empty", indices: &[] }], &RenderStyle::default());
        assert_eq!(svg.matches("<circle ").count(), 0);
        assert!(svg.contains("empty: 0 vertices"));
        assert!(svg.contains("stroke=\"#bbbbbb\""));
    }

    #[test]
    fn overlapping_layers_use_distinct_palette_colors() {
        let g = small_graph();
        let a: Vec<u32> = (0..8).collect();
        let b: Vec<u32> = (4..12).collect();
        let svg = render_svg(
            &g,
            &[SvgLayer { name: "a", indices: &a }, SvgLayer { name: "b", indices: &b }],
            &RenderStyle::default(),
        );
        assert!(svg.contains(PALETTE[0]));
        assert!(svg.contains(PALETTE[1]));
        assert!(svg.contains("fill-opacity=\"0.45\""));
    }

    #[test]
    fn full_cluster_fills_every_cell_and_stays_in_the_viewbox() {
        let g = GasketLevel::new(2, 2);
        let all: Vec<u32> = (0..g.vertex_count() as u32).collect();
        let svg = render_svg(
            &g,
            &[SvgLayer { name: "all", indices: &all }],
            &RenderStyle::default(),
        );
        // One Z-closed triangle per level-2 cell in the fill path.
        let cells = g.cells_at_scale(2).len();
        let layer_d = svg
            .lines()
            .skip_while(|l| !l.starts_with("<g "))
            .find(|l| l.starts_with("<path "))
            .unwrap();
        assert_eq!(layer_d.matches('Z').count(), cells);

        // Every emitted coordinate lies inside the viewBox.
        let head = svg.lines().next().unwrap();
        let dims: Vec<f64> = head
            .split("viewBox=\"0 0 ")
            .nth(1)
            .unwrap()
            .trim_end_matches("\">")
            .split(' ')
            .map(|t| t.parse().unwrap())
            .collect();
        let (w, h) = (dims[0], dims[1]);
        for &i in &all {
            let v: Vertex = g.vertex(i);
            let (x, y) = vertex_planar(v, 2);
            let px = (x + 4.0) * 128.0 + PAD;
            let py = (4.0 * 3.0f64.sqrt() / 2.0 - y) * 128.0 + PAD;
            assert!(px >= 0.0 && px <= w && py >= 0.0 && py <= h, "{v:?}");
        }
    }
}

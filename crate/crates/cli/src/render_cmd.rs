//! Render one or more cluster CSVs, sharing a single graph context, as a
//! layered SVG.

use std::path::PathBuf;

use clap::Args;
use gasket_core::gasket::GasketLevel;
use gasket_core::render::{render_svg, RenderStyle, SvgLayer};
use gasket_core::{io, Error, Result};

use crate::write_text;

#[derive(Args)]
pub struct RenderArgs {
    /// Cluster CSV files; each becomes a layer named after its file stem.
    #[arg(required = true)]
    clusters: Vec<PathBuf>,
    #[arg(short, long)]
    out: PathBuf,
    /// Cell scale of the background wireframe.
    #[arg(long, default_value_t = 0)]
    wireframe_scale: i32,
    #[arg(long, default_value_t = 128.0)]
    pixels_per_unit: f64,
    /// Marker radius in pixels; 0 disables vertex markers.
    #[arg(long, default_value_t = 1.6)]
    marker_radius: f64,
}

pub fn run(a: &RenderArgs) -> Result<()> {
    let mut context: Option<(u32, u32)> = None;
    let mut named: Vec<(String, io::ClusterFile)> = Vec::new();
    for path in &a.clusters {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let file = io::cluster_from_csv(&text)?;
        match context {
            None => context = Some((file.n, file.domain_log2)),
            Some((n, l)) if (n, l) != (file.n, file.domain_log2) => {
                return Err(Error::Config(format!(
                    "{} is at level={} domain_L={}, other layers are at level={n} domain_L={l}",
                    path.display(),
                    file.n,
                    file.domain_log2
                )));
            }
            Some(_) => {}
        }
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        named.push((name, file));
    }
    let (n, domain_log2) = context.expect("clap requires at least one cluster");
    let g = GasketLevel::new(n, domain_log2);
    let indices: Vec<Vec<u32>> =
        named.iter().map(|(_, f)| f.indices(&g)).collect::<Result<_>>()?;
    let layers: Vec<SvgLayer> = named
        .iter()
        .zip(&indices)
        .map(|((name, _), idx)| SvgLayer { name, indices: idx })
        .collect();
    let style = RenderStyle {
        wireframe_scale: a.wireframe_scale,
        pixels_per_unit: a.pixels_per_unit,
        marker_radius: a.marker_radius,
    };
    write_text(&a.out, &render_svg(&g, &layers, &style))?;
    println!(
        "render: level {n} domain_L {domain_log2} layers {} out {}",
        layers.len(),
        a.out.display()
    );
    Ok(())
}

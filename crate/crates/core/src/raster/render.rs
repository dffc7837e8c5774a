use super::image::Image;
use crate::error::Result;
use crate::synth::layout::{build_layout, ChartLayout, BACKGROUND};
use crate::synth::{ChartSpec, GroundTruthChart};

/// Paint a laid-out chart over a blank canvas.
pub fn render_layout(spec: &ChartSpec, layout: &ChartLayout) -> Image {
    let mut img = Image::new(spec.image_width, spec.image_height, BACKGROUND);
    for item in &layout.items {
        item.placed.stamp(&mut img, item.value);
    }
    img
}

/// Rasterize a realized chart. The layout is rebuilt from its `ChartSpec`, so the
/// output depends only on that spec.
pub fn render(chart: &GroundTruthChart) -> Result<Image> {
    let layout = build_layout(&chart.spec)?;
    Ok(render_layout(&chart.spec, &layout))
}

//! Pixel layout of a chart: frame, ticks, labels and markers, with the
//! annotations derived from the exact ink masks.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::ticks::{nice_ticks, Tick};
use super::{ChartSpec, DistributionKind};
use crate::error::{Error, Result};
use crate::model::{AxisCalibration, BoundingBox, ChartPoint, Detection, PixelPoint, Scene};
use crate::raster::glyphs::GlyphSet;
use crate::raster::sprite::{label_sprite, marker_sprite, rect_sprite, Placed};
use crate::seed;

pub const INK: u8 = 0;
pub const BACKGROUND: u8 = 255;

#[derive(Debug, Clone, PartialEq)]
pub struct DrawItem {
    pub placed: Placed,
    pub value: u8,
}

/// Plot frame in pixel cells. The interior is `[left, right) x [top, bottom)`;
/// the y axis occupies the `axis_width` columns left of `left`, the x axis the
/// rows starting at `bottom`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Frame {
    pub left: i64,
    pub right: i64,
    pub top: i64,
    pub bottom: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlacedTick {
    pub tick: Tick,
    /// Tick-mark center along its axis (pixel x for the x axis, pixel y for y).
    pub center: f64,
    pub mark: BoundingBox,
    pub label: BoundingBox,
}

#[derive(Debug, Clone)]
pub struct ChartLayout {
    pub frame: Frame,
    pub calibration: AxisCalibration,
    pub x_ticks: Vec<PlacedTick>,
    pub y_ticks: Vec<PlacedTick>,
    pub true_points: Vec<ChartPoint>,
    pub marker_boxes: Vec<BoundingBox>,
    pub annotations: Scene,
    /// Painted in order over a `BACKGROUND` canvas.
    pub items: Vec<DrawItem>,
}

fn rect(x0: i64, y0: i64, x1: i64, y1: i64, value: u8) -> DrawItem {
    DrawItem {
        placed: Placed {
            sprite: rect_sprite((x1 - x0).max(1) as u32, (y1 - y0).max(1) as u32),
            left: x0,
            top: y0,
        },
        value,
    }
}

fn tick_positions(lo: i64, hi: i64, n: usize, pad: i64, width: i64) -> Result<(Vec<i64>, i64)> {
    let span = (hi - lo) - 2 * pad - width;
    let gaps = (n - 1) as i64;
    let s = if span > 0 { span / gaps } else { 0 };
    if s < (width + 4).max(6) {
        return Err(Error::Layout(format!(
            "{n} ticks do not fit in {} pixels",
            hi - lo
        )));
    }
    let offset = (span - s * gaps) / 2;
    Ok((
        (0..n as i64).map(|i| lo + pad + offset + i * s).collect(),
        s,
    ))
}

/// Candidates drawn per requested point; markers that would touch an
/// already placed one are skipped in favor of the next candidate.
const CANDIDATES_PER_POINT: usize = 8;

/// Minimum Chebyshev gap between marker boxes, so no two markers share an
/// 8-connected component.
const MARKER_GAP: f64 = 1.0;

/// Normalized `(t, u)` samples in `[0, 1]^2` for the chosen distribution.
fn sample_unit_points(spec: &ChartSpec, n: usize) -> Vec<(f64, f64)> {
    let mut rng = seed::rng(seed::derive_seed(spec.seed, 0xDA7A));
    let t: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let dist = spec.data_distribution;
    let mut u: Vec<f64> = match dist.kind {
        DistributionKind::Uniform => (0..n).map(|_| rng.random_range(0.0..=1.0)).collect(),
        DistributionKind::Linear => {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            t.iter().map(|&t| sign * t).collect()
        }
        DistributionKind::Quadratic => {
            let c = rng.random_range(0.2..0.8);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            t.iter().map(|&t| sign * (t - c) * (t - c)).collect()
        }
    };
    if dist.kind != DistributionKind::Uniform {
        let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for v in &mut u {
            *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.5 };
        }
        if dist.noise > 0.0 {
            let normal = Normal::new(0.0, dist.noise).expect("noise is finite and >= 0");
            for v in &mut u {
                *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
            }
        }
    }
    t.into_iter().zip(u).collect()
}

pub fn build_layout(spec: &ChartSpec) -> Result<ChartLayout> {
    spec.validate()?;
    let glyphs = GlyphSet::builtin();
    let (w, h) = (spec.image_width as i64, spec.image_height as i64);
    let m = spec.margins;
    let frame = Frame {
        left: m.left as i64,
        right: w - m.right as i64,
        top: m.top as i64,
        bottom: h - m.bottom as i64,
    };
    let aw = spec.axis_width as i64;
    let tl = spec.tick_length as i64;
    let tw = spec.tick_width as i64;
    let pad = spec.axis_pad as i64;
    if frame.left - aw - tl < 1
        || frame.top - aw < 1
        || frame.right + aw >= w
        || frame.bottom + aw + tl >= h
    {
        return Err(Error::Layout("margins too small for axes and ticks".into()));
    }
    if frame.right - frame.left < 4 * pad || frame.bottom - frame.top < 4 * pad {
        return Err(Error::Layout("plot area too small".into()));
    }

    let xt = nice_ticks(spec.x_range.0, spec.x_range.1, spec.n_x_ticks);
    let yt = nice_ticks(spec.y_range.0, spec.y_range.1, spec.n_y_ticks);
    let (xcols, xs) = tick_positions(frame.left, frame.right, xt.len(), pad, tw)?;
    // y ticks are laid out bottom-up: the i-th tick sits `i * s` rows above the lowest
    let (yoffs, ys) = tick_positions(frame.top, frame.bottom, yt.len(), pad, tw)?;
    let yrows: Vec<i64> = yoffs
        .iter()
        .map(|&r| frame.top + frame.bottom - tw - r)
        .collect();

    let half_tw = tw as f64 / 2.0;
    let xcenters: Vec<f64> = xcols.iter().map(|&c| c as f64 + half_tw).collect();
    let ycenters: Vec<f64> = yrows.iter().map(|&r| r as f64 + half_tw).collect();
    let fit = |ticks: &[Tick], centers: &[f64]| -> (f64, f64) {
        let (v0, v1) = (ticks[0].value, ticks[ticks.len() - 1].value);
        let (p0, p1) = (centers[0], centers[centers.len() - 1]);
        let alpha = (v1 - v0) / (p1 - p0);
        (alpha, v0 - alpha * p0)
    };
    let (alpha_x, beta_x) = fit(&xt, &xcenters);
    let (alpha_y, beta_y) = fit(&yt, &ycenters);
    let calibration = AxisCalibration::new(alpha_x, beta_x, alpha_y, beta_y)?;

    let scale = spec.label_font_scale;
    let angle = spec.label_rotation_deg;
    let label_top = frame.bottom + aw + tl + spec.label_pad as i64;
    let label_right = frame.left - aw - tl - spec.label_pad as i64;

    let mut items = vec![rect(
        frame.left,
        frame.top,
        frame.right,
        frame.bottom,
        spec.style.plot_fill,
    )];
    if let Some(g) = spec.style.grid {
        for &c in &xcols {
            items.push(rect(c, frame.top, c + 1, frame.bottom, g));
        }
        for &r in &yrows {
            items.push(rect(frame.left, r, frame.right, r + 1, g));
        }
    }
    // axis lines meet at the lower-left corner
    items.push(rect(
        frame.left - aw,
        frame.top,
        frame.left,
        frame.bottom + aw,
        INK,
    ));
    items.push(rect(
        frame.left - aw,
        frame.bottom,
        frame.right + aw,
        frame.bottom + aw,
        INK,
    ));
    if spec.style.full_frame {
        items.push(rect(
            frame.left - aw,
            frame.top - aw,
            frame.right + aw,
            frame.top,
            INK,
        ));
        items.push(rect(
            frame.right,
            frame.top - aw,
            frame.right + aw,
            frame.bottom + aw,
            INK,
        ));
    }

    let mut annotations = Vec::new();
    let mut label_boxes: Vec<BoundingBox> = Vec::new();
    let mut x_ticks = Vec::new();
    for ((tick, &c), &cx) in xt.iter().zip(&xcols).zip(&xcenters) {
        let mark = BoundingBox::from_pixel_span(
            c,
            frame.bottom + aw,
            c + tw - 1,
            frame.bottom + aw + tl - 1,
        );
        items.push(rect(
            c,
            frame.bottom + aw,
            c + tw,
            frame.bottom + aw + tl,
            INK,
        ));
        let sprite = label_sprite(&glyphs, &tick.label, scale, angle)
            .ok_or_else(|| Error::Layout(format!("label `{}` not renderable", tick.label)))?;
        let left = (cx - sprite.anchor_x).round() as i64;
        let placed = Placed {
            sprite,
            left,
            top: label_top,
        };
        let label = placed.ink_box();
        items.push(DrawItem { placed, value: INK });
        annotations.push(Detection::tick_mark(mark, 1.0));
        annotations.push(Detection::tick_value(label, 1.0, Some(tick.label.clone())));
        label_boxes.push(label);
        x_ticks.push(PlacedTick {
            tick: tick.clone(),
            center: cx,
            mark,
            label,
        });
    }
    let mut y_ticks = Vec::new();
    for ((tick, &r), &cy) in yt.iter().zip(&yrows).zip(&ycenters) {
        let mark =
            BoundingBox::from_pixel_span(frame.left - aw - tl, r, frame.left - aw - 1, r + tw - 1);
        items.push(rect(frame.left - aw - tl, r, frame.left - aw, r + tw, INK));
        let sprite = label_sprite(&glyphs, &tick.label, scale, angle)
            .ok_or_else(|| Error::Layout(format!("label `{}` not renderable", tick.label)))?;
        let left = label_right - sprite.mask.width as i64;
        let top = (cy - sprite.anchor_y).round() as i64;
        let placed = Placed { sprite, left, top };
        let label = placed.ink_box();
        items.push(DrawItem { placed, value: INK });
        annotations.push(Detection::tick_mark(mark, 1.0));
        annotations.push(Detection::tick_value(label, 1.0, Some(tick.label.clone())));
        label_boxes.push(label);
        y_ticks.push(PlacedTick {
            tick: tick.clone(),
            center: cy,
            mark,
            label,
        });
    }

    if spec.style.minor_ticks && tl >= 2 {
        let ml = tl / 2;
        if xs >= 2 * tw + 4 {
            for &c in &xcols[..xcols.len() - 1] {
                let mc = c + xs / 2;
                items.push(rect(
                    mc,
                    frame.bottom + aw,
                    mc + 1,
                    frame.bottom + aw + ml,
                    INK,
                ));
            }
        }
        if ys >= 2 * tw + 4 {
            for &r in &yrows[..yrows.len() - 1] {
                let mr = r - ys / 2;
                items.push(rect(frame.left - aw - ml, mr, frame.left - aw, mr + 1, INK));
            }
        }
    }

    // labels must fit the canvas and stay apart from each other
    let (wf, hf) = (w as f64, h as f64);
    for b in &label_boxes {
        if b.x_min() < 1.0 || b.y_min() < 1.0 || b.x_max() > wf - 1.0 || b.y_max() > hf - 1.0 {
            return Err(Error::Layout("tick label exceeds the margins".into()));
        }
    }
    let min_gap = (4 * scale + 2) as f64;
    for (i, a) in label_boxes.iter().enumerate() {
        for b in &label_boxes[i + 1..] {
            if a.gap(b) < min_gap {
                return Err(Error::Layout("tick labels overlap".into()));
            }
        }
    }

    if let Some(title) = &spec.style.title {
        if let Some(sprite) = label_sprite(&glyphs, title, scale, 0.0) {
            let th = sprite.mask.height as i64;
            let top = 3;
            let left = (w - sprite.mask.width as i64) / 2;
            let placed = Placed { sprite, left, top };
            let tb = placed.ink_box();
            let clear =
                top + th + 3 <= frame.top - aw && label_boxes.iter().all(|b| b.gap(&tb) >= min_gap);
            if clear {
                items.push(DrawItem { placed, value: INK });
            }
        }
    }

    let marker = marker_sprite(spec.marker_style, spec.marker_radius);
    let units = sample_unit_points(spec, spec.n_points * CANDIDATES_PER_POINT);
    let mut true_points = Vec::with_capacity(spec.n_points);
    let mut marker_boxes: Vec<BoundingBox> = Vec::with_capacity(spec.n_points);
    for (t, u) in units {
        if true_points.len() == spec.n_points {
            break;
        }
        let p = ChartPoint::new(
            spec.x_range.0 + t * (spec.x_range.1 - spec.x_range.0),
            spec.y_range.0 + u * (spec.y_range.1 - spec.y_range.0),
        );
        let px: PixelPoint = calibration.to_pixel(p);
        let (ax, ay) = (px.x.floor(), px.y.floor());
        let placed = Placed::at(marker.clone(), ax + 0.5, ay + 0.5);
        let b = placed.ink_box();
        let inside = b.x_min() >= (frame.left + 1) as f64
            && b.x_max() <= (frame.right - 1) as f64
            && b.y_min() >= (frame.top + 1) as f64
            && b.y_max() <= (frame.bottom - 1) as f64;
        if !inside {
            return Err(Error::Layout(format!(
                "marker at ({}, {}) leaves the plot area",
                px.x, px.y
            )));
        }
        if marker_boxes.iter().any(|m| m.gap(&b) < MARKER_GAP) {
            continue;
        }
        items.push(DrawItem { placed, value: INK });
        annotations.push(Detection::point(b, 1.0));
        true_points.push(p);
        marker_boxes.push(b);
    }
    if true_points.len() < spec.n_points {
        return Err(Error::Layout(format!(
            "only {} of {} markers fit apart",
            true_points.len(),
            spec.n_points
        )));
    }

    let annotations = Scene::new(spec.image_width, spec.image_height, annotations)
        .map_err(|e| Error::Layout(format!("annotation outside the canvas: {e}")))?;
    Ok(ChartLayout {
        frame,
        calibration,
        x_ticks,
        y_ticks,
        true_points,
        marker_boxes,
        annotations,
        items,
    })
}

/// Fixed spec shared by tests across modules.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::super::{ChartSpec, DataDistribution, DistributionKind, Margins, Style};
    use crate::raster::sprite::MarkerStyle;

    pub fn plain_spec() -> ChartSpec {
        ChartSpec {
            seed: 11,
            n_points: 12,
            data_distribution: DataDistribution {
                kind: DistributionKind::Uniform,
                noise: 0.0,
            },
            x_magnitude: 1,
            y_magnitude: 3,
            x_range: (0.0, 40.0),
            y_range: (-5000.0, 5000.0),
            n_x_ticks: 5,
            n_y_ticks: 5,
            marker_style: MarkerStyle::Disc,
            marker_radius: 3,
            tick_length: 6,
            tick_width: 1,
            axis_width: 1,
            label_font_scale: 2,
            label_rotation_deg: 0.0,
            label_pad: 3,
            axis_pad: 12,
            margins: Margins {
                left: 100,
                right: 20,
                top: 30,
                bottom: 60,
            },
            image_width: 640,
            image_height: 480,
            style: Style {
                plot_fill: 255,
                grid: None,
                minor_ticks: false,
                title: None,
                full_frame: false,
            },
        }
    }
}

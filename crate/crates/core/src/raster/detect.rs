//! Classical chart element detection: axis lines from long ink runs, tick
//! marks as short strokes against them, points as marker-sized components
//! inside the plot and labels as proximity groups outside it.

use serde::{Deserialize, Serialize};

use super::ccl::{components_in, Component};
use super::deskew::deskew;
use super::glyphs::GlyphSet;
use super::image::{BitMask, Image, INK_THRESHOLD};
use super::ocr::{recognize_value, Recognized};
use super::sprite::{marker_half_extent, shamrock_geometry, MarkerStyle};
use crate::error::{Error, Result};
use crate::model::{BoundingBox, Detection, Scene};
use crate::synth::GenerationProfile;

/// Default minimum confidence for point detections.
pub const DEFAULT_CONF_THRESHOLD: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Accepted marker box side, in pixels, inclusive.
    pub marker_side_min: u32,
    pub marker_side_max: u32,
    pub conf_threshold: f64,
    /// Rotate labels upright before recognition.
    pub deskew: bool,
    /// Shortest axis run, as a fraction of the image extent.
    pub axis_min_fraction: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::from_profile(&GenerationProfile::default())
    }
}

impl DetectorConfig {
    /// Marker band covering every style and radius the profile can draw,
    /// including the separate leaves of composite markers.
    pub fn from_profile(p: &GenerationProfile) -> Self {
        let (rmin, rmax) = (
            p.marker_radius.min.max(1) as u32,
            p.marker_radius.max.max(1) as u32,
        );
        let mut lo = u32::MAX;
        let mut hi = 0;
        for r in rmin..=rmax {
            for style in MarkerStyle::ALL {
                let side = match style {
                    MarkerStyle::Shamrock => 2 * shamrock_geometry(r).0 as u32 + 1,
                    _ => 2 * marker_half_extent(style, r) as u32 + 1,
                };
                lo = lo.min(side);
                hi = hi.max(side);
            }
        }
        Self {
            marker_side_min: lo,
            marker_side_max: hi,
            conf_threshold: DEFAULT_CONF_THRESHOLD,
            deskew: true,
            axis_min_fraction: 0.3,
        }
    }
}

/// Axis lines found in a binarized chart. Ranges are half-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Axes {
    /// Rows of the horizontal axis line.
    pub x_rows: (u32, u32),
    /// Columns spanned by the horizontal axis line.
    pub x_cols: (u32, u32),
    /// Columns of the vertical axis line.
    pub y_cols: (u32, u32),
    /// Rows spanned by the vertical axis line.
    pub y_rows: (u32, u32),
}

fn longest_run(bits: impl Iterator<Item = bool>) -> (u32, u32) {
    let (mut best, mut start, mut i) = ((0, 0), None, 0u32);
    for b in bits.chain(std::iter::once(false)) {
        match (b, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if i - s > best.1 - best.0 {
                    best = (s, i);
                }
                start = None;
            }
            _ => {}
        }
        i += 1;
    }
    best
}

/// The lowest long horizontal run and the leftmost long vertical run.
pub fn find_axes(mask: &BitMask, min_fraction: f64) -> Result<Axes> {
    let (w, h) = (mask.width, mask.height);
    let min_h = ((w as f64 * min_fraction).ceil() as u32).max(2);
    let min_v = ((h as f64 * min_fraction).ceil() as u32).max(2);
    let row_run = |y: u32| longest_run((0..w).map(|x| mask.get(x, y)));
    let col_run = |x: u32| longest_run((0..h).map(|y| mask.get(x, y)));
    let long = |r: (u32, u32), n: u32| r.1 - r.0 >= n;

    let bottom = (0..h)
        .rev()
        .find(|&y| long(row_run(y), min_h))
        .ok_or_else(|| Error::Detection("no horizontal axis line".into()))?;
    let x_cols = row_run(bottom);
    let mut top = bottom;
    while top > 0 && long(row_run(top - 1), min_h) {
        top -= 1;
    }
    let left = (0..w)
        .find(|&x| long(col_run(x), min_v))
        .ok_or_else(|| Error::Detection("no vertical axis line".into()))?;
    let y_rows = col_run(left);
    let mut right = left + 1;
    while right < w && long(col_run(right), min_v) {
        right += 1;
    }
    if right >= x_cols.1 || bottom < y_rows.0 {
        return Err(Error::Detection("axis lines do not form a frame".into()));
    }
    Ok(Axes {
        x_rows: (top, bottom + 1),
        x_cols,
        y_cols: (left, right),
        y_rows,
    })
}

/// A tick stroke candidate with its length away from the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Stroke {
    bbox: BoundingBox,
    length: u32,
}

const MAX_TICK_WIDTH: u32 = 6;

/// Short strokes hanging below the horizontal axis.
fn x_strokes(mask: &BitMask, axes: &Axes) -> Vec<Stroke> {
    let row = axes.x_rows.1;
    if row >= mask.height {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut x = axes.x_cols.0;
    while x < axes.x_cols.1 {
        if !mask.get(x, row) {
            x += 1;
            continue;
        }
        let a = x;
        while x < axes.x_cols.1 && mask.get(x, row) {
            x += 1;
        }
        let b = x;
        if b - a > MAX_TICK_WIDTH {
            continue;
        }
        let mut len = 0;
        while row + len < mask.height && (a..b).any(|c| mask.get(c, row + len)) {
            len += 1;
        }
        out.push(Stroke {
            bbox: BoundingBox::from_pixel_span(
                a as i64,
                row as i64,
                b as i64 - 1,
                (row + len) as i64 - 1,
            ),
            length: len,
        });
    }
    out
}

/// Short strokes sticking out left of the vertical axis.
fn y_strokes(mask: &BitMask, axes: &Axes) -> Vec<Stroke> {
    if axes.y_cols.0 == 0 {
        return Vec::new();
    }
    let col = axes.y_cols.0 - 1;
    let mut out = Vec::new();
    let mut y = axes.y_rows.0;
    while y < axes.y_rows.1 {
        if !mask.get(col, y) {
            y += 1;
            continue;
        }
        let a = y;
        while y < axes.y_rows.1 && mask.get(col, y) {
            y += 1;
        }
        let b = y;
        if b - a > MAX_TICK_WIDTH {
            continue;
        }
        let mut len = 0;
        while len <= col && (a..b).any(|r| mask.get(col - len, r)) {
            len += 1;
        }
        out.push(Stroke {
            bbox: BoundingBox::from_pixel_span(
                (col + 1 - len) as i64,
                a as i64,
                col as i64,
                b as i64 - 1,
            ),
            length: len,
        });
    }
    out
}

/// Major ticks: strokes at least three quarters as long as the longest on
/// their axis, which drops half-length minor ticks.
fn major(strokes: &[Stroke]) -> Vec<Detection> {
    let longest = strokes.iter().map(|s| s.length).max().unwrap_or(0) as f64;
    strokes
        .iter()
        .filter(|s| s.length as f64 >= 0.75 * longest)
        .map(|s| Detection::tick_mark(s.bbox, (s.length as f64 / longest).min(1.0)))
        .collect()
}

/// Everything the detector found before OCR.
#[derive(Debug, Clone)]
pub struct Layout {
    pub axes: Axes,
    pub tick_marks: Vec<Detection>,
    /// Label boxes, x-axis labels first.
    pub label_boxes: Vec<BoundingBox>,
    pub threshold: u8,
}

fn comp_box(c: &Component) -> BoundingBox {
    BoundingBox::from_pixel_span(c.x0 as i64, c.y0 as i64, c.x1 as i64 - 1, c.y1 as i64 - 1)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        0.0
    } else {
        v[v.len() / 2]
    }
}

/// Group components whose boxes lie within `gap` pixels of each other.
pub fn group_boxes(boxes: &[BoundingBox], gap: f64) -> Vec<BoundingBox> {
    let n = boxes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if boxes[i].gap(&boxes[j]) <= gap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Option<BoundingBox>> = vec![None; n];
    for (i, b) in boxes.iter().enumerate() {
        let r = find(&mut parent, i);
        groups[r] = Some(groups[r].map_or(*b, |g| g.union(b)));
    }
    groups.into_iter().flatten().collect()
}

fn find_layout(img: &Image, cfg: &DetectorConfig, threshold: u8) -> Result<Layout> {
    let mask = img.ink_mask(threshold);
    let axes = find_axes(&mask, cfg.axis_min_fraction)?;
    let xs = x_strokes(&mask, &axes);
    let ys = y_strokes(&mask, &axes);
    let mut tick_marks = major(&xs);
    tick_marks.extend(major(&ys));

    // labels: ink outside the frame and away from every tick stroke
    let mut free = mask.clone();
    let clear = |m: &mut BitMask, x0: u32, y0: u32, x1: u32, y1: u32| {
        for y in y0..y1.min(m.height) {
            for x in x0..x1.min(m.width) {
                m.set(x, y, false);
            }
        }
    };
    clear(
        &mut free,
        axes.y_cols.0,
        axes.y_rows.0,
        axes.x_cols.1,
        axes.x_rows.1,
    );
    for s in xs.iter().chain(&ys) {
        let b = s.bbox;
        clear(
            &mut free,
            b.x_min() as u32,
            b.y_min() as u32,
            b.x_max() as u32,
            b.y_max() as u32,
        );
    }
    let comps = components_in(&free, 0, 0, free.width, free.height);
    let boxes: Vec<BoundingBox> = comps.iter().map(comp_box).collect();
    let gap = (0.45 * median(boxes.iter().map(|b| b.height()).collect())).max(2.0);
    let groups = group_boxes(&boxes, gap);
    let (xl, xr) = (axes.x_cols.0 as f64, axes.x_cols.1 as f64);
    let (yt, yb) = (axes.y_rows.0 as f64, axes.y_rows.1 as f64);
    let mut x_labels: Vec<BoundingBox> = groups
        .iter()
        .filter(|g| g.y_min() >= axes.x_rows.1 as f64 && (xl..xr).contains(&g.center().x))
        .copied()
        .collect();
    let mut y_labels: Vec<BoundingBox> = groups
        .iter()
        .filter(|g| g.x_max() <= axes.y_cols.0 as f64 && (yt..yb).contains(&g.center().y))
        .copied()
        .collect();
    x_labels.sort_by(|a, b| a.x_min().total_cmp(&b.x_min()));
    y_labels.sort_by(|a, b| b.y_min().total_cmp(&a.y_min()));
    x_labels.extend(y_labels);
    Ok(Layout {
        axes,
        tick_marks,
        label_boxes: x_labels,
        threshold,
    })
}

/// Locate axes, ticks and label boxes; falls back to an Otsu threshold when
/// the fixed mid-gray threshold finds no axes.
pub fn detect_layout(img: &Image, cfg: &DetectorConfig) -> Result<Layout> {
    match find_layout(img, cfg, INK_THRESHOLD) {
        Ok(l) => Ok(l),
        Err(e) => {
            let t = img.otsu_threshold();
            if t == INK_THRESHOLD {
                return Err(e);
            }
            find_layout(img, cfg, t)
        }
    }
}

/// Tick marks and unrecognized tick-value boxes.
pub fn detect_ticks(img: &Image, cfg: &DetectorConfig) -> Result<(Vec<Detection>, Vec<Detection>)> {
    let l = detect_layout(img, cfg)?;
    let values = l
        .label_boxes
        .iter()
        .map(|b| Detection::tick_value(*b, 1.0, None))
        .collect();
    Ok((l.tick_marks, values))
}

/// Score of a component as a marker, in `[0, 1]`.
///
/// Size term: 1 inside the side band, Gaussian falloff with a quarter-band
/// scale outside. Shape term: squareness of the box times a fill factor
/// that saturates at 30% ink. Confidence is size times the square root of
/// shape.
pub fn marker_confidence(c: &Component, cfg: &DetectorConfig) -> f64 {
    let side = c.width().max(c.height()) as f64;
    let (lo, hi) = (cfg.marker_side_min as f64, cfg.marker_side_max as f64);
    let size = if side < lo {
        (-((lo - side) / (0.25 * lo)).powi(2)).exp()
    } else if side > hi {
        (-((side - hi) / (0.25 * hi)).powi(2)).exp()
    } else {
        1.0
    };
    let aspect = c.width().min(c.height()) as f64 / side;
    let fill = c.area() as f64 / (c.width() * c.height()) as f64;
    let shape = aspect * (fill / 0.3).min(1.0);
    size * shape.sqrt()
}

fn point_detections(mask: &BitMask, axes: &Axes, cfg: &DetectorConfig) -> Vec<Detection> {
    let comps = components_in(
        mask,
        axes.y_cols.1,
        axes.y_rows.0,
        axes.x_cols.1,
        axes.x_rows.0,
    );
    comps
        .iter()
        .filter_map(|c| {
            let conf = marker_confidence(c, cfg);
            (conf >= cfg.conf_threshold).then(|| Detection::point(comp_box(c), conf))
        })
        .collect()
}

/// Marker detections inside the plot area with confidence at least
/// `cfg.conf_threshold`.
pub fn detect_points(img: &Image, cfg: &DetectorConfig) -> Result<Vec<Detection>> {
    let l = detect_layout(img, cfg)?;
    Ok(point_detections(&img.ink_mask(l.threshold), &l.axes, cfg))
}

/// Crop around a label box with a small white margin.
pub fn label_crop(img: &Image, b: &BoundingBox) -> Image {
    let pad = 2;
    let src = img.crop(
        b.x_min() as i64,
        b.y_min() as i64,
        b.x_max().ceil() as i64,
        b.y_max().ceil() as i64,
    );
    let mut out = Image::new(src.width() + 2 * pad, src.height() + 2 * pad, 255);
    for y in 0..src.height() {
        for x in 0..src.width() {
            out.set(x + pad, y + pad, src.get(x, y));
        }
    }
    out
}

/// Below this confidence the alternative orientations are tried as well.
const RETRY_CONFIDENCE: f64 = 0.75;

/// Read one label. With deskew on, the estimated rotation is tried first;
/// a weak read falls back to the other orientations of the same rectangle
/// and to the unrotated crop, keeping the most confident.
pub fn read_label(crop: &Image, glyphs: &GlyphSet, use_deskew: bool) -> Result<Recognized> {
    if !use_deskew {
        return recognize_value(crop, glyphs);
    }
    let d = deskew(crop)?;
    let mut best = recognize_value(&d.image, glyphs).ok();
    let weak = best
        .as_ref()
        .is_none_or(|r| r.confidence < RETRY_CONFIDENCE);
    if d.ambiguous || weak {
        let a = d.angle_deg;
        for alt in [a - 180.0, a + 90.0, a - 90.0, 0.0] {
            if alt == a {
                continue;
            }
            let img = if alt == 0.0 {
                crop.clone()
            } else {
                crop.rotate(-alt)
            };
            if let Ok(r) = recognize_value(&img, glyphs) {
                if best.as_ref().is_none_or(|b| r.confidence > b.confidence) {
                    best = Some(r);
                }
            }
        }
    }
    best.ok_or_else(|| Error::EmptyLabel("no readable orientation".into()))
}

/// Full detection: points, tick marks and tick values with recognized text.
pub fn scene_from_image(img: &Image, cfg: &DetectorConfig) -> Result<Scene> {
    let l = detect_layout(img, cfg)?;
    let mask = img.ink_mask(l.threshold);
    let glyphs = GlyphSet::builtin();
    let mut dets = l.tick_marks.clone();
    for b in &l.label_boxes {
        match read_label(&label_crop(img, b), &glyphs, cfg.deskew) {
            Ok(r) => dets.push(Detection::tick_value(
                *b,
                r.confidence.clamp(0.0, 1.0),
                Some(r.text),
            )),
            Err(e) => {
                log::debug!("label at {:?} unreadable: {e}", <[f64; 4]>::from(*b));
                dets.push(Detection::tick_value(*b, 0.0, None));
            }
        }
    }
    dets.extend(point_detections(&mask, &l.axes, cfg));
    Scene::new(img.width(), img.height(), dets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{iou, ObjectClass};
    use crate::raster::render::render;
    use crate::synth::layout::tests_support::plain_spec;
    use crate::synth::{chart_seed, generate_chart, realize};

    #[test]
    fn band_from_default_profile() {
        let c = DetectorConfig::default();
        assert_eq!((c.marker_side_min, c.marker_side_max), (3, 9));
    }

    #[test]
    fn blank_image_is_detection_error() {
        let img = Image::new(300, 200, 255);
        assert!(matches!(
            scene_from_image(&img, &DetectorConfig::default()),
            Err(Error::Detection(_))
        ));
        assert!(matches!(
            detect_points(&img, &DetectorConfig::default()),
            Err(Error::Detection(_))
        ));
    }

    #[test]
    fn five_x_ticks_found() {
        let chart = realize(&plain_spec()).unwrap();
        let img = render(&chart).unwrap();
        let (marks, values) = detect_ticks(&img, &DetectorConfig::default()).unwrap();
        let truth: Vec<&Detection> = chart
            .annotations()
            .of_class(ObjectClass::TickMark)
            .collect();
        let bottom: Vec<&Detection> = marks
            .iter()
            .filter(|d| d.bbox.height() > d.bbox.width())
            .collect();
        assert_eq!(bottom.len(), 5);
        for d in bottom {
            assert!(truth.iter().any(|t| iou(&t.bbox, &d.bbox) > 0.5));
        }
        // "-5000" is one box, not five
        let minus = chart
            .annotations()
            .of_class(ObjectClass::TickValue)
            .find(|d| d.text() == Some("-5000"))
            .unwrap();
        let hits: Vec<_> = values
            .iter()
            .filter(|d| d.bbox.gap(&minus.bbox) == 0.0)
            .collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].bbox, minus.bbox);
    }

    #[test]
    fn single_disc_round_trip() {
        let mut spec = plain_spec();
        spec.n_points = 1;
        spec.marker_style = MarkerStyle::Disc;
        let chart = realize(&spec).unwrap();
        let pts = detect_points(&render(&chart).unwrap(), &DetectorConfig::default()).unwrap();
        assert_eq!(pts.len(), 1);
        let truth = chart
            .annotations()
            .of_class(ObjectClass::Point)
            .next()
            .unwrap();
        assert!(iou(&pts[0].bbox, &truth.bbox) > 0.5);
    }

    #[test]
    fn fused_markers_give_at_most_one_detection() {
        let mut img = Image::new(400, 300, 255);
        img.fill_rect(50, 250, 380, 252, 0);
        img.fill_rect(50, 20, 52, 252, 0);
        let disc = crate::raster::sprite::marker_sprite(MarkerStyle::Disc, 4);
        for x in [200.5, 205.5] {
            crate::raster::sprite::Placed::at(disc.clone(), x, 120.5).stamp(&mut img, 0);
        }
        let pts = detect_points(&img, &DetectorConfig::default()).unwrap();
        assert!(pts.len() <= 1, "{pts:?}");
    }

    #[test]
    fn detections_respect_bounds_and_threshold() {
        let p = GenerationProfile::default();
        let cfg = DetectorConfig::default();
        for i in 0..20 {
            let chart = generate_chart(chart_seed(9, i), &p).unwrap().chart;
            let img = render(&chart).unwrap();
            let s = scene_from_image(&img, &cfg).unwrap();
            for d in &s.detections {
                assert!(d.bbox.within(img.width() as f64, img.height() as f64));
                if d.class == ObjectClass::Point {
                    assert!(d.confidence() >= cfg.conf_threshold);
                }
            }
        }
    }

    /// Own renders are saturated, so any threshold between the ink and the
    /// lightest fill yields the same counts.
    #[test]
    fn threshold_choice_is_irrelevant_on_own_renders() {
        let p = GenerationProfile::default();
        let cfg = DetectorConfig::default();
        for i in 0..10 {
            let chart = generate_chart(chart_seed(21, i), &p).unwrap().chart;
            let img = render(&chart).unwrap();
            let counts = |t: u8| {
                let l = find_layout(&img, &cfg, t).unwrap();
                let pts = point_detections(&img.ink_mask(t), &l.axes, &cfg).len();
                (l.tick_marks.len(), l.label_boxes.len(), pts)
            };
            assert_eq!(counts(64), counts(128));
            assert_eq!(counts(128), counts(190));
        }
    }
}

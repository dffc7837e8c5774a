//! Rotation fixing for tick-label crops.
//!
//! The minimum-area rectangle around the ink gives the text direction up to
//! a quarter turn. Which side is the baseline depends on how many characters
//! the label holds, judged from the rectangle's aspect ratio: a string of
//! three or more runs along the long side. Shorter labels leave the rectangle
//! underdetermined, so their angle is fitted by rendering their reading.

use super::geometry::{min_area_rect, Pt};
use super::glyphs::GlyphSet;
use super::image::BitMask;
use super::image::{Image, INK_THRESHOLD};
use super::ocr::{recognize_at, recognize_value};
use super::sprite::label_sprite;
use crate::error::{Error, Result};

/// Labels whose estimated angle is this close to a quarter turn cannot be
/// told apart from their upside-down twin.
pub const AMBIGUOUS_BAND_DEG: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Deskewed {
    pub image: Image,
    /// Estimated counter-clockwise rotation of the input text, in
    /// `(-90, 90]`; the output is the input rotated by its negative.
    pub angle_deg: f64,
    /// Set when the estimate sits at a quarter turn and may be off by 180°.
    pub ambiguous: bool,
}

/// Wrap an angle into `(-90, 90]`.
fn half_turn(a: f64) -> f64 {
    let r = a.rem_euclid(180.0);
    if r > 90.0 {
        r - 180.0
    } else {
        r
    }
}

/// Line height used when scoring candidate angles; coarser than the
/// recognition height, which keeps the search cheap.
const SEARCH_HEIGHT: u32 = 42;

/// How well the label reads once rotated back by `angle`; only good enough
/// to shortlist candidate angles.
fn read_score(label: &Image, angle: f64, glyphs: &GlyphSet) -> f64 {
    let img = if angle == 0.0 {
        label.clone()
    } else {
        label.rotate(-angle)
    };
    recognize_at(&img, glyphs, SEARCH_HEIGHT).map_or(0.0, |r| r.confidence)
}

/// Local maxima of the read score on a `step` grid over `(-90, 90]`,
/// strongest first.
fn read_peaks(label: &Image, glyphs: &GlyphSet, step: f64, keep: usize) -> Vec<f64> {
    let n = (180.0 / step).round() as usize;
    let angles: Vec<f64> = (1..=n).map(|k| -90.0 + k as f64 * step).collect();
    let scores: Vec<f64> = angles
        .iter()
        .map(|&a| read_score(label, a, glyphs))
        .collect();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| {
            let (l, r) = (scores[(i + n - 1) % n], scores[(i + 1) % n]);
            scores[i] >= l && scores[i] >= r
        })
        .collect();
    peaks.sort_by(|&i, &j| {
        scores[j]
            .total_cmp(&scores[i])
            .then(angles[i].abs().total_cmp(&angles[j].abs()))
    });
    peaks.truncate(keep);
    peaks.into_iter().map(|i| angles[i]).collect()
}

/// Overlap of `ink` with the rendering of `text` at `angle`, best over
/// one-pixel shifts around the centered alignment.
fn render_iou(ink: &BitMask, glyphs: &GlyphSet, text: &str, scale: u32, angle: f64) -> f64 {
    let Some(sprite) = label_sprite(glyphs, text, scale, angle) else {
        return 0.0;
    };
    let m = &sprite.mask;
    let (dw, dh) = (
        m.width as i64 - ink.width as i64,
        m.height as i64 - ink.height as i64,
    );
    if dw.abs() > 3 || dh.abs() > 3 {
        return 0.0;
    }
    let (ink_n, ren_n) = (ink.count() as f64, m.count() as f64);
    if ink_n == 0.0 || ren_n == 0.0 {
        return 0.0;
    }
    let mut best = 0.0f64;
    for oy in -1..=1 {
        for ox in -1..=1 {
            // sprite pixel (x, y) lands on ink pixel (x - dx, y - dy)
            let (dx, dy) = (dw.div_euclid(2) + ox, dh.div_euclid(2) + oy);
            let mut both = 0.0;
            for y in 0..m.height as i64 {
                for x in 0..m.width as i64 {
                    if m.get(x as u32, y as u32) && ink.get_i(x - dx, y - dy) {
                        both += 1.0;
                    }
                }
            }
            best = best.max(both / (ink_n + ren_n - both));
        }
    }
    best
}

/// Best rendering overlap of `text` over angles in `[lo, hi]`: a one-degree
/// scan, then a tenth-degree pass. Nearest-neighbor rendering maps a small
/// interval of angles onto the same pixels, so the answer is the middle of
/// the run of tied best values.
fn fit_text(ink: &BitMask, glyphs: &GlyphSet, text: &str, lo: f64, hi: f64) -> (f64, f64) {
    let Some(unit) = glyphs.text_mask(text, 1) else {
        return (0.0, 0.0);
    };
    // the rendered size must be near the ink size at some quarter turn
    let long = ink.width.max(ink.height) as f64;
    let base = (long / unit.width.max(unit.height) as f64).round().max(1.0) as u32;
    let scales: Vec<u32> = (base.saturating_sub(1).max(1)..=base + 1).collect();
    let score = |a: f64| {
        scales
            .iter()
            .map(|&s| render_iou(ink, glyphs, text, s, a))
            .fold(0.0, f64::max)
    };
    let coarse: Vec<(f64, f64)> = (0..=(hi - lo).round() as i64)
        .map(|k| lo + k as f64)
        .map(|a| (a, score(a)))
        .collect();
    let &(a0, _) = coarse
        .iter()
        .max_by(|p, q| p.1.total_cmp(&q.1).then(q.0.abs().total_cmp(&p.0.abs())))
        .expect("non-empty scan");
    let fine: Vec<(f64, f64)> = (-12..=12)
        .map(|k| a0 + k as f64 * 0.1)
        .map(|a| (a, score(a)))
        .collect();
    let best = fine.iter().map(|p| p.1).fold(0.0, f64::max);
    let i = fine
        .iter()
        .position(|p| p.1 == best)
        .expect("best is attained");
    let j = i + fine[i..].iter().take_while(|p| p.1 == best).count() - 1;
    ((fine[i].0 + fine[j].0) / 2.0, best)
}

/// Ink of `label` cropped to its bounds.
fn ink_crop(label: &Image) -> Option<BitMask> {
    let mask = label.ink_mask(INK_THRESHOLD);
    let (x0, y0, x1, y1) = mask.bounds()?;
    Some(mask.crop(x0, y0, x1, y1))
}

/// Fit the angle of `label` by rendering its reading at each candidate
/// angle in `starts`, searching `radius` degrees around each. Returns the
/// best fit, or `None` when no overlap reaches `min_iou`.
fn fit_angle(
    label: &Image,
    glyphs: &GlyphSet,
    starts: &[f64],
    radius: f64,
    min_iou: f64,
) -> Option<f64> {
    let ink = ink_crop(label)?;
    let mut tried: Vec<String> = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for &start in starts {
        let upright = if start == 0.0 {
            label.clone()
        } else {
            label.rotate(-start)
        };
        let Ok(read) = recognize_value(&upright, glyphs) else {
            continue;
        };
        if radius < 90.0 {
            let fit = fit_text(&ink, glyphs, &read.text, start - radius, start + radius);
            best = best.filter(|b| b.1 >= fit.1).or(Some(fit));
        } else if !tried.contains(&read.text) {
            let fit = fit_text(&ink, glyphs, &read.text, -89.0, 90.0);
            best = best.filter(|b| b.1 >= fit.1).or(Some(fit));
            tried.push(read.text);
        }
    }
    best.filter(|b| b.1 >= min_iou).map(|b| b.0)
}

/// Long-to-short side ratio above which the rectangle is read as a string
/// of three or more characters.
const MULTI_CHAR_ASPECT: f64 = 1.65;

/// Below this overlap the rendered reading is not trusted over the coarse
/// estimate.
const MIN_FIT_IOU: f64 = 0.5;

/// Overlap needed to accept the long side of the rectangle as the baseline
/// without a full search.
const TRUSTED_FIT_IOU: f64 = 0.8;

/// Estimate the text angle of `label`.
pub fn estimate_angle(label: &Image, glyphs: &GlyphSet) -> Result<(f64, bool)> {
    let mask = label.ink_mask(INK_THRESHOLD);
    let mut corners: Vec<Pt> = Vec::new();
    for y in 0..mask.height {
        for x in 0..mask.width {
            if mask.get(x, y) {
                let (fx, fy) = (x as f64, y as f64);
                corners.extend([
                    (fx, fy),
                    (fx + 1.0, fy),
                    (fx, fy + 1.0),
                    (fx + 1.0, fy + 1.0),
                ]);
            }
        }
    }
    if corners.is_empty() {
        return Err(Error::EmptyLabel("nothing to deskew".into()));
    }
    let rect = min_area_rect(&corners).expect("non-empty point set");
    // image y grows downward, so a baseline at image angle phi was rotated
    // counter-clockwise by -phi as displayed
    let long_dir = if rect.len_along >= rect.len_across {
        rect.angle_deg
    } else {
        rect.angle_deg + 90.0
    };

    // Glyph cells are 5 by 7 with one column of spacing, so three or more
    // characters are at least twice as long as tall (a '.' or '-' makes that
    // 1.7); single glyphs and pairs stay below.
    let (long, short) = (
        rect.len_along.max(rect.len_across),
        rect.len_along.min(rect.len_across),
    );
    let along = (long >= MULTI_CHAR_ASPECT * short)
        .then(|| fit_angle(label, glyphs, &[half_turn(-long_dir)], 3.0, TRUSTED_FIT_IOU))
        .flatten();
    let angle = match along {
        Some(a) => a,
        None => {
            // The hull barely constrains the text frame of one or two glyphs
            // (a lone '4' or '7' is far from rectangular, a '1' is as narrow
            // as a short string), so shortlist angles by how well the label
            // reads and fit its rendering.
            let peaks = read_peaks(label, glyphs, 3.0, 4);
            fit_angle(label, glyphs, &peaks, 90.0, MIN_FIT_IOU).unwrap_or(peaks[0])
        }
    };
    let angle = half_turn(angle);
    let ambiguous = (angle.abs() - 90.0).abs() <= AMBIGUOUS_BAND_DEG;
    Ok((angle, ambiguous))
}

/// Rotate `label` so its text is horizontal.
pub fn deskew(label: &Image) -> Result<Deskewed> {
    deskew_with(label, &GlyphSet::builtin())
}

pub fn deskew_with(label: &Image, glyphs: &GlyphSet) -> Result<Deskewed> {
    let (angle, ambiguous) = estimate_angle(label, glyphs)?;
    let image = if angle == 0.0 {
        label.clone()
    } else {
        label.rotate(-angle)
    };
    Ok(Deskewed {
        image,
        angle_deg: angle,
        ambiguous,
    })
}

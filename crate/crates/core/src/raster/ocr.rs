//! Template OCR for tick labels.
//!
//! A label is cropped to its ink, rescaled to a canonical line height,
//! split into character cells at vertical ink gaps and each cell is scored
//! against every glyph by normalized cross-correlation.

use super::glyphs::{GlyphSet, GLYPH_ROWS};
use super::image::{BitMask, Image, INK_THRESHOLD};
use crate::error::{Error, Result};

/// Line height labels are rescaled to before matching.
pub const CANONICAL_HEIGHT: u32 = 130;

#[derive(Debug, Clone, PartialEq)]
pub struct Recognized {
    pub text: String,
    /// Mean per-character correlation, clamped to `[0, 1]`.
    pub confidence: f64,
}

/// Normalized cross-correlation of two equal-length 0/1 vectors.
fn ncc(a: &[bool], b: &[bool]) -> f64 {
    let n = a.len() as f64;
    let (sa, sb) = (
        a.iter().filter(|&&v| v).count() as f64,
        b.iter().filter(|&&v| v).count() as f64,
    );
    let sab = a.iter().zip(b).filter(|(x, y)| **x && **y).count() as f64;
    let cov = sab - sa * sb / n;
    let va = sa - sa * sa / n;
    let vb = sb - sb * sb / n;
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}

fn column_counts(m: &BitMask) -> Vec<u32> {
    (0..m.width)
        .map(|x| (0..m.height).filter(|&y| m.get(x, y)).count() as u32)
        .collect()
}

/// Split column range `[a, b)` into character cells.
fn segment(counts: &[u32], unit: f64) -> Vec<(usize, usize)> {
    // thin bridges left by resampling do not count as ink
    let floor = (0.3 * unit).ceil() as u32;
    let mut runs = Vec::new();
    let mut start = None;
    for (x, &c) in counts.iter().enumerate() {
        match (c > floor, start) {
            (true, None) => start = Some(x),
            (false, Some(s)) => {
                runs.push((s, x));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, counts.len()));
    }
    let mut out = Vec::new();
    for r in runs {
        split_wide(counts, r, unit, &mut out);
    }
    out
}

fn split_wide(counts: &[u32], (a, b): (usize, usize), unit: f64, out: &mut Vec<(usize, usize)>) {
    let w = (b - a) as f64;
    if w <= 5.6 * unit {
        out.push((a, b));
        return;
    }
    let lo = a + (1.8 * unit) as usize;
    let hi = b.saturating_sub((1.8 * unit) as usize);
    if lo >= hi {
        out.push((a, b));
        return;
    }
    let mid = (a + b) as f64 / 2.0;
    let cut = (lo..hi)
        .min_by(|&x, &y| {
            counts[x]
                .cmp(&counts[y])
                .then((x as f64 - mid).abs().total_cmp(&(y as f64 - mid).abs()))
        })
        .expect("non-empty window");
    split_wide(counts, (a, cut), unit, out);
    split_wide(counts, (cut + 1, b), unit, out);
}

fn cell_bits(m: &BitMask, a: usize, b: usize) -> Vec<bool> {
    let mut v = Vec::with_capacity((b - a) * m.height as usize);
    for y in 0..m.height {
        for x in a..b {
            v.push(m.get(x as u32, y));
        }
    }
    v
}

/// Glyph bitmap resampled (nearest neighbor) to `w x h`.
fn template_bits(g: &BitMask, w: usize, h: usize) -> Vec<bool> {
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        let gy = ((y as f64 + 0.5) * GLYPH_ROWS as f64 / h as f64) as u32;
        for x in 0..w {
            let gx = ((x as f64 + 0.5) * g.width as f64 / w as f64) as u32;
            v.push(g.get(gx.min(g.width - 1), gy.min(GLYPH_ROWS - 1)));
        }
    }
    v
}

/// Recognize the text of a horizontal label image.
pub fn recognize_value(label: &Image, glyphs: &GlyphSet) -> Result<Recognized> {
    recognize_at(label, glyphs, CANONICAL_HEIGHT)
}

/// Recognition with the line rescaled to `height` pixels.
pub fn recognize_at(label: &Image, glyphs: &GlyphSet, height: u32) -> Result<Recognized> {
    let (x0, y0, x1, y1) = label
        .ink_bounds(INK_THRESHOLD)
        .ok_or_else(|| Error::EmptyLabel("label has no ink".into()))?;
    let crop = label.crop(x0 as i64, y0 as i64, x1 as i64, y1 as i64);
    let h = height.max(GLYPH_ROWS);
    let w = ((crop.width() as f64 * h as f64 / crop.height() as f64).round() as u32).max(1);
    let mask = crop.resize(w, h).ink_mask(INK_THRESHOLD);
    let unit = h as f64 / GLYPH_ROWS as f64;
    let cells = segment(&column_counts(&mask), unit);
    if cells.is_empty() {
        return Err(Error::EmptyLabel("no character columns".into()));
    }
    let mut text = String::new();
    let mut total = 0.0;
    for &(a, b) in &cells {
        let cell = cell_bits(&mask, a, b);
        let cw = (b - a) as f64;
        let mut best = ('?', f64::MIN, 0.0);
        for g in glyphs.glyphs() {
            let c = ncc(&cell, &template_bits(&g.bitmap, b - a, h as usize));
            let expected = g.bitmap.width as f64 * unit;
            let fit = cw.min(expected) / cw.max(expected);
            let score = c * fit.sqrt();
            if score > best.1 {
                best = (g.ch, score, c);
            }
        }
        text.push(best.0);
        total += best.2.clamp(0.0, 1.0);
    }
    Ok(Recognized {
        text,
        confidence: total / cells.len() as f64,
    })
}

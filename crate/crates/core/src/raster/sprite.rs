//! Ink masks for every drawable chart object. The generator computes
//! annotation boxes from the same masks the renderer stamps, so boxes are
//! exact ink extents.

use serde::{Deserialize, Serialize};

use super::glyphs::GlyphSet;
use super::image::{BitMask, Image};
use crate::model::BoundingBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarkerStyle {
    Disc,
    Square,
    Triangle,
    Cross,
    /// Three disjoint leaves around the anchor.
    Shamrock,
}

impl MarkerStyle {
    pub const ALL: [MarkerStyle; 5] = [
        MarkerStyle::Disc,
        MarkerStyle::Square,
        MarkerStyle::Triangle,
        MarkerStyle::Cross,
        MarkerStyle::Shamrock,
    ];
}

/// A mask plus the position of its anchor in mask coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Sprite {
    pub mask: BitMask,
    pub anchor_x: f64,
    pub anchor_y: f64,
}

/// Sprite placed on the canvas at an integer offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Placed {
    pub sprite: Sprite,
    pub left: i64,
    pub top: i64,
}

impl Placed {
    /// Place so the anchor lands as close as possible to `(x, y)`.
    pub fn at(sprite: Sprite, x: f64, y: f64) -> Self {
        let left = (x - sprite.anchor_x).round() as i64;
        let top = (y - sprite.anchor_y).round() as i64;
        Self { sprite, left, top }
    }

    /// Tight box of the ink in canvas coordinates.
    pub fn ink_box(&self) -> BoundingBox {
        let (x0, y0, x1, y1) = self.sprite.mask.bounds().expect("sprite has ink");
        BoundingBox::from_pixel_span(
            self.left + x0 as i64,
            self.top + y0 as i64,
            self.left + x1 as i64 - 1,
            self.top + y1 as i64 - 1,
        )
    }

    pub fn stamp(&self, img: &mut Image, value: u8) {
        let m = &self.sprite.mask;
        for y in 0..m.height {
            for x in 0..m.width {
                if m.get(x, y) {
                    img.put(self.left + x as i64, self.top + y as i64, value);
                }
            }
        }
    }
}

fn disc_offsets(r: i64) -> impl Iterator<Item = (i64, i64)> {
    (-r..=r)
        .flat_map(move |dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(move |(dx, dy)| dx * dx + dy * dy <= r * r + r)
}

/// Geometry of the shamrock leaves: (leaf radius, center offset).
pub fn shamrock_geometry(radius: u32) -> (i64, i64) {
    let q = (radius as i64 / 2).max(1);
    (q, q + 2)
}

/// Half extent of a marker's mask around the anchor pixel.
pub fn marker_half_extent(style: MarkerStyle, radius: u32) -> i64 {
    match style {
        MarkerStyle::Shamrock => {
            let (q, d) = shamrock_geometry(radius);
            d + q
        }
        _ => radius as i64,
    }
}

/// Marker mask of odd side `2 * half + 1` whose box is centered on the
/// anchor pixel.
pub fn marker_sprite(style: MarkerStyle, radius: u32) -> Sprite {
    let r = radius.max(1) as i64;
    let half = marker_half_extent(style, radius.max(1));
    let side = (2 * half + 1) as u32;
    let mut m = BitMask::new(side, side);
    let mut set = |dx: i64, dy: i64| {
        let (x, y) = (dx + half, dy + half);
        if (0..side as i64).contains(&x) && (0..side as i64).contains(&y) {
            m.set(x as u32, y as u32, true);
        }
    };
    match style {
        MarkerStyle::Disc => disc_offsets(r).for_each(|(dx, dy)| set(dx, dy)),
        MarkerStyle::Square => {
            for dy in -r..=r {
                for dx in -r..=r {
                    set(dx, dy);
                }
            }
        }
        MarkerStyle::Triangle => {
            for dy in -r..=r {
                let hw = (dy + r + 1) / 2;
                for dx in -hw..=hw {
                    set(dx, dy);
                }
            }
        }
        MarkerStyle::Cross => {
            for dy in -r..=r {
                for dx in -r..=r {
                    if (dx - dy).abs() <= 1 || (dx + dy).abs() <= 1 {
                        set(dx, dy);
                    }
                }
            }
        }
        MarkerStyle::Shamrock => {
            let (q, d) = shamrock_geometry(radius);
            for (cx, cy) in [(0, -d), (-d, d), (d, d)] {
                disc_offsets(q).for_each(|(dx, dy)| set(cx + dx, cy + dy));
            }
        }
    }
    Sprite {
        mask: m,
        anchor_x: half as f64 + 0.5,
        anchor_y: half as f64 + 0.5,
    }
}

/// Text mask rotated counter-clockwise (as displayed) by `angle_deg` about
/// its center, nearest-neighbor sampled, cropped to ink. The anchor is the
/// rotated text center.
pub fn label_sprite(glyphs: &GlyphSet, text: &str, scale: u32, angle_deg: f64) -> Option<Sprite> {
    let src = glyphs.text_mask(text, scale)?;
    Some(rotate_mask(&src, angle_deg))
}

pub fn rotate_mask(src: &BitMask, angle_deg: f64) -> Sprite {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let (w, h) = (src.width as f64, src.height as f64);
    let (cx, cy) = (w / 2.0, h / 2.0);
    // forward: x = u c + v s, y = -u s + v c (u, v relative to source center)
    let corners = [(-cx, -cy), (cx, -cy), (-cx, cy), (cx, cy)];
    let xs = corners.iter().map(|&(u, v)| u * c + v * s);
    let ys = corners.iter().map(|&(u, v)| -u * s + v * c);
    let (xmin, xmax) = xs.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let (ymin, ymax) = ys.fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(v), b.max(v)));
    let ox = xmin.floor() - 1.0;
    let oy = ymin.floor() - 1.0;
    let ow = (xmax.ceil() + 1.0 - ox) as u32;
    let oh = (ymax.ceil() + 1.0 - oy) as u32;
    let mut out = BitMask::new(ow, oh);
    for y in 0..oh {
        for x in 0..ow {
            let dx = ox + x as f64 + 0.5;
            let dy = oy + y as f64 + 0.5;
            let u = dx * c - dy * s + cx;
            let v = dx * s + dy * c + cy;
            if u >= 0.0 && v >= 0.0 && u < w && v < h && src.get(u as u32, v as u32) {
                out.set(x, y, true);
            }
        }
    }
    let (x0, y0, x1, y1) = out.bounds().unwrap_or((0, 0, ow.max(1), oh.max(1)));
    Sprite {
        mask: out.crop(x0, y0, x1, y1),
        anchor_x: -ox - x0 as f64,
        anchor_y: -oy - y0 as f64,
    }
}

/// Solid rectangle sprite anchored at its top-left corner.
pub fn rect_sprite(w: u32, h: u32) -> Sprite {
    let mut m = BitMask::new(w.max(1), h.max(1));
    m.bits.iter_mut().for_each(|b| *b = true);
    Sprite {
        mask: m,
        anchor_x: 0.0,
        anchor_y: 0.0,
    }
}

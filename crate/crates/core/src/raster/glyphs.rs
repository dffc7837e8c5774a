//! Embedded 5x7 bitmap font for tick labels.

use super::image::BitMask;

pub const GLYPH_ROWS: u32 = 7;

const FONT: &[(char, [&str; 7])] = &[
    (
        '0',
        [
            ".###.", "#...#", "#..##", "#.#.#", "##..#", "#...#", ".###.",
        ],
    ),
    (
        '1',
        [
            "..#..", ".##..", "..#..", "..#..", "..#..", "..#..", ".###.",
        ],
    ),
    (
        '2',
        [
            ".###.", "#...#", "....#", "...#.", "..#..", ".#...", "#####",
        ],
    ),
    (
        '3',
        [
            "#####", "...#.", "..#..", "...#.", "....#", "#...#", ".###.",
        ],
    ),
    (
        '4',
        [
            "...#.", "..##.", ".#.#.", "#..#.", "#####", "...#.", "...#.",
        ],
    ),
    (
        '5',
        [
            "#####", "#....", "####.", "....#", "....#", "#...#", ".###.",
        ],
    ),
    (
        '6',
        [
            "..##.", ".#...", "#....", "####.", "#...#", "#...#", ".###.",
        ],
    ),
    (
        '7',
        [
            "#####", "....#", "...#.", "..#..", ".#...", ".#...", ".#...",
        ],
    ),
    (
        '8',
        [
            ".###.", "#...#", "#...#", ".###.", "#...#", "#...#", ".###.",
        ],
    ),
    (
        '9',
        [
            ".###.", "#...#", "#...#", ".####", "....#", "...#.", ".##..",
        ],
    ),
    (
        '-',
        ["....", "....", "....", "####", "....", "....", "...."],
    ),
    ('.', ["..", "..", "..", "..", "..", "##", "##"]),
    (
        'e',
        [
            ".....", ".....", ".###.", "#...#", "#####", "#....", ".###.",
        ],
    ),
    (
        '+',
        [
            ".....", "..#..", "..#..", "#####", "..#..", "..#..", ".....",
        ],
    ),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glyph {
    pub ch: char,
    /// Horizontally ink-tight, `GLYPH_ROWS` tall.
    pub bitmap: BitMask,
}

/// Character templates for `0-9 - . e +` at base resolution.
#[derive(Debug, Clone)]
pub struct GlyphSet {
    glyphs: Vec<Glyph>,
}

impl Default for GlyphSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl GlyphSet {
    pub fn builtin() -> Self {
        let glyphs = FONT
            .iter()
            .map(|(ch, rows)| {
                let w = rows[0].len() as u32;
                let mut m = BitMask::new(w, GLYPH_ROWS);
                for (y, row) in rows.iter().enumerate() {
                    for (x, c) in row.chars().enumerate() {
                        m.set(x as u32, y as u32, c == '#');
                    }
                }
                let (x0, _, x1, _) = m.bounds().expect("glyph has ink");
                Glyph {
                    ch: *ch,
                    bitmap: m.crop(x0, 0, x1, GLYPH_ROWS),
                }
            })
            .collect();
        Self { glyphs }
    }

    pub fn glyphs(&self) -> &[Glyph] {
        &self.glyphs
    }

    pub fn get(&self, ch: char) -> Option<&Glyph> {
        let ch = if ch == '\u{2212}' { '-' } else { ch };
        self.glyphs.iter().find(|g| g.ch == ch)
    }

    pub fn supports(&self, text: &str) -> bool {
        text.chars().all(|c| self.get(c).is_some())
    }

    /// Horizontal text mask at integer `scale`, one scaled column of spacing
    /// between characters.
    pub fn text_mask(&self, text: &str, scale: u32) -> Option<BitMask> {
        let scale = scale.max(1);
        let glyphs: Vec<&Glyph> = text.chars().map(|c| self.get(c)).collect::<Option<_>>()?;
        if glyphs.is_empty() {
            return None;
        }
        let w: u32 = glyphs.iter().map(|g| g.bitmap.width * scale).sum::<u32>()
            + (glyphs.len() as u32 - 1) * scale;
        let h = GLYPH_ROWS * scale;
        let mut m = BitMask::new(w, h);
        let mut x0 = 0;
        for g in glyphs {
            for gy in 0..GLYPH_ROWS {
                for gx in 0..g.bitmap.width {
                    if g.bitmap.get(gx, gy) {
                        for dy in 0..scale {
                            for dx in 0..scale {
                                m.set(x0 + gx * scale + dx, gy * scale + dy, true);
                            }
                        }
                    }
                }
            }
            x0 += (g.bitmap.width + 1) * scale;
        }
        Some(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn glyphs_nonempty_and_distinct() {
        let gs = GlyphSet::builtin();
        assert_eq!(gs.glyphs().len(), 14);
        for (i, a) in gs.glyphs().iter().enumerate() {
            assert!(a.bitmap.count() > 0, "{}", a.ch);
            for b in &gs.glyphs()[i + 1..] {
                assert_ne!(a.bitmap, b.bitmap, "{} vs {}", a.ch, b.ch);
            }
        }
    }

    #[test]
    fn text_mask_dimensions() {
        let gs = GlyphSet::builtin();
        let m = gs.text_mask("-5000", 2).unwrap();
        // '-' is 4 wide, digits 5 wide, one column of spacing each
        assert_eq!(m.width, (4 + 4 * 5 + 4) * 2);
        assert_eq!(m.height, 14);
        assert!(gs.text_mask("1O", 1).is_none());
        assert!(gs.supports("\u{2212}2.5e+3"));
    }
}

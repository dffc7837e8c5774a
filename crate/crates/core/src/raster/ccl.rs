//! 8-connected component labeling of binary masks.

use super::image::BitMask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Ink pixel coordinates, in scan order.
    pub pixels: Vec<(u32, u32)>,
    /// Tight bounds, exclusive ends.
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Component {
    pub fn area(&self) -> usize {
        self.pixels.len()
    }
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }
    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }
}

/// Components of `mask` restricted to the window `[x0, x1) x [y0, y1)`,
/// ordered by their first pixel in row-major scan.
pub fn components_in(mask: &BitMask, x0: u32, y0: u32, x1: u32, y1: u32) -> Vec<Component> {
    let (x1, y1) = (x1.min(mask.width), y1.min(mask.height));
    if x0 >= x1 || y0 >= y1 {
        return Vec::new();
    }
    let (w, h) = ((x1 - x0) as usize, (y1 - y0) as usize);
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    let mut stack = Vec::new();
    for sy in 0..h {
        for sx in 0..w {
            if seen[sy * w + sx] || !mask.get(x0 + sx as u32, y0 + sy as u32) {
                continue;
            }
            seen[sy * w + sx] = true;
            stack.push((sx, sy));
            let mut pixels = Vec::new();
            let (mut bx0, mut by0, mut bx1, mut by1) = (sx, sy, sx, sy);
            while let Some((x, y)) = stack.pop() {
                pixels.push((x0 + x as u32, y0 + y as u32));
                bx0 = bx0.min(x);
                bx1 = bx1.max(x);
                by0 = by0.min(y);
                by1 = by1.max(y);
                for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                        let k = ny * w + nx;
                        if !seen[k] && mask.get(x0 + nx as u32, y0 + ny as u32) {
                            seen[k] = true;
                            stack.push((nx, ny));
                        }
                    }
                }
            }
            pixels.sort_unstable_by_key(|&(x, y)| (y, x));
            out.push(Component {
                pixels,
                x0: x0 + bx0 as u32,
                y0: y0 + by0 as u32,
                x1: x0 + bx1 as u32 + 1,
                y1: y0 + by1 as u32 + 1,
            });
        }
    }
    out
}

pub fn components(mask: &BitMask) -> Vec<Component> {
    components_in(mask, 0, 0, mask.width, mask.height)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(rows: &[&str]) -> BitMask {
        let mut m = BitMask::new(rows[0].len() as u32, rows.len() as u32);
        for (y, r) in rows.iter().enumerate() {
            for (x, c) in r.chars().enumerate() {
                m.set(x as u32, y as u32, c == '#');
            }
        }
        m
    }

    #[test]
    fn diagonal_neighbors_join() {
        let m = mask(&["#...", ".#..", "...#", "...#"]);
        let c = components(&m);
        assert_eq!(c.len(), 2);
        assert_eq!((c[0].x0, c[0].y0, c[0].x1, c[0].y1), (0, 0, 2, 2));
        assert_eq!(c[1].area(), 2);
    }

    #[test]
    fn window_clips_components() {
        let m = mask(&["####", "....", "##.#"]);
        assert_eq!(components_in(&m, 1, 0, 3, 3).len(), 2);
        assert_eq!(components(&m).len(), 3);
        assert!(components_in(&m, 3, 0, 3, 3).is_empty());
    }

    /// Pixel counts across components equal the mask's ink count.
    #[test]
    fn partition_of_ink() {
        let m = mask(&["#.#.#", ".#.#.", "#...#", "..#.."]);
        let c = components(&m);
        assert_eq!(c.iter().map(Component::area).sum::<usize>(), m.count());
        assert_eq!(c.len(), 2);
    }
}

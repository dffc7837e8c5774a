use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma};

use crate::error::{Error, Result};

pub const INK_THRESHOLD: u8 = 128;

/// Row-major 8-bit grayscale raster, dark ink on a light background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32, fill: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![fill; width as usize * height as usize],
        }
    }

    pub fn from_pixels(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != width as usize * height as usize {
            return Err(Error::Config(format!(
                "pixel buffer of {} bytes for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }
    pub fn height(&self) -> u32 {
        self.height
    }
    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = v;
    }

    /// Signed-coordinate write that ignores out-of-bounds pixels.
    #[inline]
    pub fn put(&mut self, x: i64, y: i64, v: u8) {
        if x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height {
            self.set(x as u32, y as u32, v);
        }
    }

    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, v: u8) {
        for y in y0.max(0)..y1.min(self.height as i64) {
            for x in x0.max(0)..x1.min(self.width as i64) {
                self.set(x as u32, y as u32, v);
            }
        }
    }

    /// Copy of the region `[x0, x1) x [y0, y1)`, clamped to the image.
    pub fn crop(&self, x0: i64, y0: i64, x1: i64, y1: i64) -> Image {
        let x0c = x0.clamp(0, self.width as i64);
        let y0c = y0.clamp(0, self.height as i64);
        let x1c = x1.clamp(x0c, self.width as i64);
        let y1c = y1.clamp(y0c, self.height as i64);
        let (w, h) = ((x1c - x0c) as u32, (y1c - y0c) as u32);
        let mut out = Image::new(w, h, 255);
        for y in 0..h {
            let src = (y + y0c as u32) as usize * self.width as usize + x0c as usize;
            let dst = y as usize * w as usize;
            out.pixels[dst..dst + w as usize].copy_from_slice(&self.pixels[src..src + w as usize]);
        }
        out
    }

    pub fn ink_mask(&self, threshold: u8) -> BitMask {
        BitMask {
            width: self.width,
            height: self.height,
            bits: self.pixels.iter().map(|&p| p < threshold).collect(),
        }
    }

    /// Otsu threshold over the gray histogram.
    pub fn otsu_threshold(&self) -> u8 {
        let mut hist = [0u64; 256];
        for &p in &self.pixels {
            hist[p as usize] += 1;
        }
        let total = self.pixels.len() as f64;
        if total == 0.0 {
            return INK_THRESHOLD;
        }
        let sum_all: f64 = hist
            .iter()
            .enumerate()
            .map(|(i, &c)| i as f64 * c as f64)
            .sum();
        let (mut w_b, mut sum_b) = (0.0, 0.0);
        let (mut best, mut best_t) = (-1.0, INK_THRESHOLD);
        for (t, &c) in hist.iter().enumerate() {
            w_b += c as f64;
            if w_b == 0.0 {
                continue;
            }
            let w_f = total - w_b;
            if w_f == 0.0 {
                break;
            }
            sum_b += t as f64 * c as f64;
            let m_b = sum_b / w_b;
            let m_f = (sum_all - sum_b) / w_f;
            let between = w_b * w_f * (m_b - m_f).powi(2);
            if between > best {
                best = between;
                // pixels strictly below the returned value are ink
                best_t = (t + 1).min(255) as u8;
            }
        }
        best_t
    }

    /// Bilinear resize.
    pub fn resize(&self, new_w: u32, new_h: u32) -> Image {
        let mut out = Image::new(new_w.max(1), new_h.max(1), 255);
        if self.width == 0 || self.height == 0 {
            return out;
        }
        let sx = self.width as f64 / out.width as f64;
        let sy = self.height as f64 / out.height as f64;
        for y in 0..out.height {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (self.height - 1) as f64);
            let y0 = fy.floor() as u32;
            let y1 = (y0 + 1).min(self.height - 1);
            let ty = fy - y0 as f64;
            for x in 0..out.width {
                let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (self.width - 1) as f64);
                let x0 = fx.floor() as u32;
                let x1 = (x0 + 1).min(self.width - 1);
                let tx = fx - x0 as f64;
                let top = self.get(x0, y0) as f64 * (1.0 - tx) + self.get(x1, y0) as f64 * tx;
                let bot = self.get(x0, y1) as f64 * (1.0 - tx) + self.get(x1, y1) as f64 * tx;
                out.set(x, y, (top * (1.0 - ty) + bot * ty).round() as u8);
            }
        }
        out
    }

    /// Rotate counter-clockwise (as displayed) by `angle_deg` about the image
    /// center, bilinear sampling, expanding the canvas to hold the result.
    pub fn rotate(&self, angle_deg: f64) -> Image {
        let (s, c) = angle_deg.to_radians().sin_cos();
        let (w, h) = (self.width as f64, self.height as f64);
        let nw = (w * c.abs() + h * s.abs()).ceil().max(1.0) as u32 + 2;
        let nh = (w * s.abs() + h * c.abs()).ceil().max(1.0) as u32 + 2;
        let (cx, cy) = (w / 2.0, h / 2.0);
        let (ncx, ncy) = (nw as f64 / 2.0, nh as f64 / 2.0);
        let mut out = Image::new(nw, nh, 255);
        for y in 0..nh {
            for x in 0..nw {
                let dx = x as f64 + 0.5 - ncx;
                let dy = y as f64 + 0.5 - ncy;
                // inverse of the forward map x' = u c + v s, y' = -u s + v c
                let u = dx * c - dy * s;
                let v = dx * s + dy * c;
                let sxp = u + cx - 0.5;
                let syp = v + cy - 0.5;
                out.set(x, y, self.sample_bilinear(sxp, syp));
            }
        }
        out
    }

    fn sample_bilinear(&self, x: f64, y: f64) -> u8 {
        let get = |xi: i64, yi: i64| -> f64 {
            if xi < 0 || yi < 0 || xi >= self.width as i64 || yi >= self.height as i64 {
                255.0
            } else {
                self.get(xi as u32, yi as u32) as f64
            }
        };
        let (x0, y0) = (x.floor(), y.floor());
        let (tx, ty) = (x - x0, y - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let top = get(x0, y0) * (1.0 - tx) + get(x0 + 1, y0) * tx;
        let bot = get(x0, y0 + 1) * (1.0 - tx) + get(x0 + 1, y0 + 1) * tx;
        (top * (1.0 - ty) + bot * ty).round().clamp(0.0, 255.0) as u8
    }

    /// Tight box `(x0, y0, x1, y1)` (exclusive ends) around pixels darker
    /// than `threshold`.
    pub fn ink_bounds(&self, threshold: u8) -> Option<(u32, u32, u32, u32)> {
        self.ink_mask(threshold).bounds()
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let buf: GrayImage = ImageBuffer::from_raw(self.width, self.height, self.pixels.clone())
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// 24-bit RGB PNG with equal channels.
    pub fn save_png_rgb(&self, path: impl AsRef<Path>) -> Result<()> {
        let rgb: Vec<u8> = self.pixels.iter().flat_map(|&p| [p, p, p]).collect();
        let buf: image::RgbImage = ImageBuffer::from_raw(self.width, self.height, rgb)
            .expect("buffer length matches dimensions");
        buf.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// Reads any PNG; color inputs are mapped through luminance.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Image> {
        let dynimg = image::open(path)?;
        let gray: ImageBuffer<Luma<u8>, Vec<u8>> = dynimg.to_luma8();
        let (w, h) = gray.dimensions();
        Image::from_pixels(w, h, gray.into_raw())
    }
}

/// Binary raster; `true` is ink.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMask {
    pub width: u32,
    pub height: u32,
    pub bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn get_i(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as u32) < self.width
            && (y as u32) < self.height
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, v: bool) {
        let w = self.width as usize;
        self.bits[y as usize * w + x as usize] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
        let mut any = false;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    any = true;
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x + 1);
                    y1 = y1.max(y + 1);
                }
            }
        }
        any.then_some((x0, y0, x1, y1))
    }

    pub fn to_image(&self) -> Image {
        let px = self.bits.iter().map(|&b| if b { 0 } else { 255 }).collect();
        Image::from_pixels(self.width, self.height, px).unwrap()
    }

    /// Sub-mask `[x0, x1) x [y0, y1)`, clamped.
    pub fn crop(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> BitMask {
        let x1 = x1.min(self.width).max(x0);
        let y1 = y1.min(self.height).max(y0);
        let mut out = BitMask::new(x1 - x0, y1 - y0);
        for y in y0..y1 {
            for x in x0..x1 {
                out.set(x - x0, y - y0, self.get(x, y));
            }
        }
        out
    }
}

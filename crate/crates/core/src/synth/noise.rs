//! Detection and OCR noise applied to a scene.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BoundingBox, Detection, ObjectClass, Scene};
use crate::seed;

/// Probabilities of each corruption. Text corruptions apply at most once per
/// label; drops apply per detection (ticks drop mark and value together).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub p_drop_minus: f64,
    pub p_digit_swap: f64,
    pub p_drop_tick: f64,
    pub p_drop_point: f64,
    /// Expected number of spurious point detections per chart.
    pub p_spurious_point: f64,
    pub bbox_jitter_sigma: f64,
}

impl Default for NoiseConfig {
    /// The "default noise profile" used for fit-method comparisons.
    fn default() -> Self {
        Self {
            p_drop_minus: 0.25,
            p_digit_swap: 0.06,
            p_drop_tick: 0.05,
            p_drop_point: 0.02,
            p_spurious_point: 0.3,
            bbox_jitter_sigma: 0.5,
        }
    }
}

impl NoiseConfig {
    pub fn none() -> Self {
        Self {
            p_drop_minus: 0.0,
            p_digit_swap: 0.0,
            p_drop_tick: 0.0,
            p_drop_point: 0.0,
            p_spurious_point: 0.0,
            bbox_jitter_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_drop_minus", self.p_drop_minus),
            ("p_digit_swap", self.p_digit_swap),
            ("p_drop_tick", self.p_drop_tick),
            ("p_drop_point", self.p_drop_point),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("`{name}` = {p} outside [0, 1]")));
            }
        }
        if !(self.p_spurious_point >= 0.0 && self.p_spurious_point.is_finite()) {
            return Err(Error::Config(
                "`p_spurious_point` must be a finite count >= 0".into(),
            ));
        }
        if !(self.bbox_jitter_sigma >= 0.0 && self.bbox_jitter_sigma.is_finite()) {
            return Err(Error::Config("`bbox_jitter_sigma` must be >= 0".into()));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        *self == Self::none()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let n: Self = serde_json::from_str(s)?;
        n.validate()?;
        Ok(n)
    }
}

/// Remove a leading minus sign.
pub fn drop_minus(text: &str) -> Option<String> {
    text.strip_prefix('-')
        .or_else(|| text.strip_prefix('\u{2212}'))
        .map(str::to_string)
}

fn swap_digit<R: Rng>(text: &str, rng: &mut R) -> Option<String> {
    let digits: Vec<usize> = text
        .char_indices()
        .filter(|(_, c)| c.is_ascii_digit())
        .map(|(i, _)| i)
        .collect();
    if digits.is_empty() {
        return None;
    }
    let at = digits[rng.random_range(0..digits.len())];
    let old = text.as_bytes()[at] - b'0';
    let new = (old + rng.random_range(1..10u8)) % 10;
    let mut s = text.to_string();
    s.replace_range(at..at + 1, &new.to_string());
    Some(s)
}

fn jitter_box<R: Rng>(b: &BoundingBox, sigma: f64, w: f64, h: f64, rng: &mut R) -> BoundingBox {
    if sigma == 0.0 {
        return *b;
    }
    let n = Normal::new(0.0, sigma).expect("sigma is finite");
    let mut c = [b.x_min(), b.y_min(), b.x_max(), b.y_max()];
    for v in &mut c {
        *v += n.sample(rng);
    }
    let (x0, x1) = (c[0].min(c[2]), c[0].max(c[2]).max(c[0].min(c[2]) + 0.5));
    let (y0, y1) = (c[1].min(c[3]), c[1].max(c[3]).max(c[1].min(c[3]) + 0.5));
    BoundingBox::new(x0, y0, x1, y1)
        .ok()
        .and_then(|nb| nb.clip(w, h))
        .unwrap_or(*b)
}

/// Apply drops, spurious points, box jitter and text corruption.
/// Deterministic in `seed`; an all-zero config returns the input unchanged.
pub fn corrupt(scene: &Scene, noise: &NoiseConfig, seed: u64) -> Scene {
    if noise.is_noiseless() {
        return scene.clone();
    }
    let mut rng = seed::rng(seed);
    let (w, h) = (scene.image_width as f64, scene.image_height as f64);

    // pair each tick value with its nearest mark so the two drop together
    let marks: Vec<usize> = (0..scene.detections.len())
        .filter(|&i| scene.detections[i].class == ObjectClass::TickMark)
        .collect();
    let mut dropped = vec![false; scene.detections.len()];
    for (i, d) in scene.detections.iter().enumerate() {
        match d.class {
            ObjectClass::TickValue => {
                if rng.random_bool(noise.p_drop_tick) {
                    dropped[i] = true;
                    let c = d.bbox.center();
                    let nearest =
                        marks
                            .iter()
                            .copied()
                            .filter(|&m| !dropped[m])
                            .min_by(|&a, &b| {
                                let da = scene.detections[a].bbox.center().dist(&c);
                                let db = scene.detections[b].bbox.center().dist(&c);
                                da.total_cmp(&db)
                            });
                    if let Some(m) = nearest {
                        dropped[m] = true;
                    }
                }
            }
            ObjectClass::Point => dropped[i] = rng.random_bool(noise.p_drop_point),
            ObjectClass::TickMark => {}
        }
    }

    let mut out = Vec::with_capacity(scene.detections.len());
    for (i, d) in scene.detections.iter().enumerate() {
        if dropped[i] {
            continue;
        }
        let mut d = d.clone();
        d.bbox = jitter_box(&d.bbox, noise.bbox_jitter_sigma, w, h, &mut rng);
        if d.class == ObjectClass::TickValue {
            if let Some(text) = d.text().map(str::to_string) {
                let mut t = text;
                if rng.random_bool(noise.p_drop_minus) {
                    if let Some(s) = drop_minus(&t) {
                        t = s;
                    }
                }
                if rng.random_bool(noise.p_digit_swap) {
                    if let Some(s) = swap_digit(&t, &mut rng) {
                        t = s;
                    }
                }
                d.set_text(Some(t));
            }
        }
        out.push(d);
    }

    if noise.p_spurious_point > 0.0 {
        let count = Poisson::new(noise.p_spurious_point)
            .map(|p| p.sample(&mut rng) as usize)
            .unwrap_or(0);
        let sizes: Vec<f64> = scene
            .of_class(ObjectClass::Point)
            .map(|d| d.bbox.width())
            .collect();
        let side = if sizes.is_empty() {
            5.0
        } else {
            sizes[sizes.len() / 2]
        };
        for _ in 0..count {
            if w <= side || h <= side {
                break;
            }
            let x = rng.random_range(0.0..w - side);
            let y = rng.random_range(0.0..h - side);
            let conf = rng.random_range(0.3..1.0);
            let b = BoundingBox::new(x, y, x + side, y + side).expect("positive side");
            out.push(Detection::point(b, conf));
        }
    }

    Scene::new(scene.image_width, scene.image_height, out).expect("boxes are clipped to the image")
}

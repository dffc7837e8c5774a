use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::sprite::MarkerStyle;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntRange {
    pub min: i64,
    pub max: i64,
}

impl IntRange {
    pub const fn new(min: i64, max: i64) -> Self {
        Self { min, max }
    }
    pub const fn fixed(v: i64) -> Self {
        Self { min: v, max: v }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatRange {
    pub min: f64,
    pub max: f64,
}

impl FloatRange {
    pub const fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionWeights {
    pub uniform: f64,
    pub linear: f64,
    pub quadratic: f64,
}

/// Sampling ranges for every randomized chart factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerationProfile {
    pub n_points: IntRange,
    /// Decimal exponent of the coordinate span.
    pub magnitude: IntRange,
    /// Span is `factor * 10^magnitude`.
    pub span_factor: FloatRange,
    /// Lower data bound is `offset * span`.
    pub offset_factor: FloatRange,
    pub distribution: DistributionWeights,
    /// Standard deviation of the scatter around the trend, as a fraction of
    /// the y span.
    pub noise: FloatRange,
    pub n_ticks: IntRange,
    pub marker_styles: Vec<(MarkerStyle, f64)>,
    pub marker_radius: IntRange,
    pub tick_length: IntRange,
    pub tick_width: IntRange,
    pub axis_width: IntRange,
    pub font_scale: IntRange,
    /// Probability that labels are rotated at all.
    pub p_rotated: f64,
    pub rotation_deg: FloatRange,
    pub label_pad: IntRange,
    /// Extra padding (beyond the marker extent) between frame and outer ticks.
    pub axis_pad: IntRange,
    pub margin_left: IntRange,
    pub margin_right: IntRange,
    pub margin_top: IntRange,
    pub margin_bottom: IntRange,
    pub image_width: IntRange,
    pub image_height: IntRange,
    pub p_grid: f64,
    pub p_minor_ticks: f64,
    pub p_title: f64,
    pub p_full_frame: f64,
    pub plot_fills: Vec<u8>,
}

impl Default for GenerationProfile {
    fn default() -> Self {
        Self {
            n_points: IntRange::new(5, 40),
            magnitude: IntRange::new(-3, 6),
            span_factor: FloatRange::new(1.0, 10.0),
            offset_factor: FloatRange::new(-1.2, 1.2),
            distribution: DistributionWeights {
                uniform: 1.0,
                linear: 1.0,
                quadratic: 1.0,
            },
            noise: FloatRange::new(0.0, 0.12),
            n_ticks: IntRange::new(3, 7),
            marker_styles: vec![
                (MarkerStyle::Disc, 0.35),
                (MarkerStyle::Square, 0.2),
                (MarkerStyle::Triangle, 0.2),
                (MarkerStyle::Cross, 0.23),
                (MarkerStyle::Shamrock, 0.02),
            ],
            marker_radius: IntRange::new(2, 4),
            tick_length: IntRange::new(3, 8),
            tick_width: IntRange::new(1, 2),
            axis_width: IntRange::new(1, 2),
            font_scale: IntRange::new(2, 3),
            p_rotated: 0.15,
            rotation_deg: FloatRange::new(-90.0, 90.0),
            label_pad: IntRange::new(2, 6),
            axis_pad: IntRange::new(3, 20),
            margin_left: IntRange::new(70, 140),
            margin_right: IntRange::new(15, 40),
            margin_top: IntRange::new(30, 60),
            margin_bottom: IntRange::new(50, 110),
            image_width: IntRange::new(560, 800),
            image_height: IntRange::new(440, 620),
            p_grid: 0.3,
            p_minor_ticks: 0.3,
            p_title: 0.3,
            p_full_frame: 0.5,
            plot_fills: vec![255, 255, 245, 235],
        }
    }
}

impl GenerationProfile {
    /// Every chart has rotated labels, angles in `[-45, 45]`.
    pub fn rotated_labels() -> Self {
        Self {
            p_rotated: 1.0,
            rotation_deg: FloatRange::new(-45.0, 45.0),
            ..Self::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ints = [
            ("n_points", self.n_points),
            ("magnitude", self.magnitude),
            ("n_ticks", self.n_ticks),
            ("marker_radius", self.marker_radius),
            ("tick_length", self.tick_length),
            ("tick_width", self.tick_width),
            ("axis_width", self.axis_width),
            ("font_scale", self.font_scale),
            ("label_pad", self.label_pad),
            ("axis_pad", self.axis_pad),
            ("margin_left", self.margin_left),
            ("margin_right", self.margin_right),
            ("margin_top", self.margin_top),
            ("margin_bottom", self.margin_bottom),
            ("image_width", self.image_width),
            ("image_height", self.image_height),
        ];
        for (name, r) in ints {
            if r.min > r.max {
                return Err(Error::Config(format!(
                    "empty profile range `{name}`: {} > {}",
                    r.min, r.max
                )));
            }
        }
        let floats = [
            ("span_factor", self.span_factor),
            ("offset_factor", self.offset_factor),
            ("noise", self.noise),
            ("rotation_deg", self.rotation_deg),
        ];
        for (name, r) in floats {
            if !r.min.is_finite() || !r.max.is_finite() || r.min > r.max {
                return Err(Error::Config(format!(
                    "empty profile range `{name}`: {} > {}",
                    r.min, r.max
                )));
            }
        }
        let positive = [
            ("n_points", self.n_points.min, 2),
            ("n_ticks", self.n_ticks.min, 2),
            ("marker_radius", self.marker_radius.min, 1),
            ("tick_length", self.tick_length.min, 1),
            ("tick_width", self.tick_width.min, 1),
            ("axis_width", self.axis_width.min, 1),
            ("font_scale", self.font_scale.min, 1),
            ("image_width", self.image_width.min, 64),
            ("image_height", self.image_height.min, 64),
        ];
        for (name, v, lo) in positive {
            if v < lo {
                return Err(Error::Config(format!(
                    "profile `{name}` must be >= {lo}, got {v}"
                )));
            }
        }
        if self.span_factor.min <= 0.0 {
            return Err(Error::Config("span_factor must be positive".into()));
        }
        if self.rotation_deg.min < -90.0 || self.rotation_deg.max > 90.0 {
            return Err(Error::Config("rotation_deg must lie in [-90, 90]".into()));
        }
        for (name, p) in [
            ("p_rotated", self.p_rotated),
            ("p_grid", self.p_grid),
            ("p_minor_ticks", self.p_minor_ticks),
            ("p_title", self.p_title),
            ("p_full_frame", self.p_full_frame),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "probability `{name}` = {p} outside [0, 1]"
                )));
            }
        }
        let w = &self.distribution;
        if [w.uniform, w.linear, w.quadratic].iter().any(|v| *v < 0.0)
            || w.uniform + w.linear + w.quadratic <= 0.0
        {
            return Err(Error::Config(
                "distribution weights must be non-negative with a positive sum".into(),
            ));
        }
        if self.marker_styles.is_empty()
            || self.marker_styles.iter().any(|(_, w)| *w < 0.0)
            || self.marker_styles.iter().map(|(_, w)| w).sum::<f64>() <= 0.0
        {
            return Err(Error::Config(
                "marker style weights must be non-negative with a positive sum".into(),
            ));
        }
        if self.plot_fills.is_empty() {
            return Err(Error::Config("empty profile range `plot_fills`".into()));
        }
        if self.plot_fills.iter().any(|&f| f < 200) {
            return Err(Error::Config("plot fills must be light (>= 200)".into()));
        }
        Ok(())
    }
}

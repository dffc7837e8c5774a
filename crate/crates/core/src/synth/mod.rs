//! Procedural scatter-plot generation with exact ground truth, plus a noise
//! channel that imitates detector and OCR mistakes.

pub mod bundle;
pub mod layout;
pub mod noise;
pub mod profile;
pub mod ticks;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AxisCalibration, ChartPoint, Scene};
use crate::raster::sprite::MarkerStyle;
use crate::seed;

pub use layout::{build_layout, ChartLayout, DrawItem};
pub use noise::{corrupt, NoiseConfig};
pub use profile::{FloatRange, GenerationProfile, IntRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Uniform,
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DataDistribution {
    pub kind: DistributionKind,
    /// Scatter standard deviation as a fraction of the y span.
    pub noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Margins {
    pub left: u32,
    pub right: u32,
    pub top: u32,
    pub bottom: u32,
}

/// Rendering choices that carry no annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Style {
    pub plot_fill: u8,
    /// Gray level of grid lines, when drawn.
    pub grid: Option<u8>,
    pub minor_ticks: bool,
    pub title: Option<String>,
    /// Draw top and right spines too.
    pub full_frame: bool,
}

/// Every random factor of one chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub seed: u64,
    pub n_points: usize,
    pub data_distribution: DataDistribution,
    pub x_magnitude: i32,
    pub y_magnitude: i32,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub n_x_ticks: usize,
    pub n_y_ticks: usize,
    pub marker_style: MarkerStyle,
    pub marker_radius: u32,
    pub tick_length: u32,
    pub tick_width: u32,
    pub axis_width: u32,
    pub label_font_scale: u32,
    pub label_rotation_deg: f64,
    pub label_pad: u32,
    pub axis_pad: u32,
    pub margins: Margins,
    pub image_width: u32,
    pub image_height: u32,
    pub style: Style,
}

impl ChartSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 1 {
            return Err(Error::Config("n_points must be >= 1".into()));
        }
        if self.n_x_ticks < 2 || self.n_y_ticks < 2 {
            return Err(Error::Config(
                "at least two ticks per axis are required".into(),
            ));
        }
        let ordered = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
        if !ordered(self.x_range) || !ordered(self.y_range) {
            return Err(Error::Config(
                "coordinate ranges must satisfy min < max".into(),
            ));
        }
        if !(-90.0..=90.0).contains(&self.label_rotation_deg) {
            return Err(Error::Config("label rotation outside [-90, 90]".into()));
        }
        if self.label_font_scale < 1
            || self.marker_radius < 1
            || self.tick_width < 1
            || self.axis_width < 1
        {
            return Err(Error::Config(
                "font scale, marker radius and stroke widths must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.data_distribution.noise) {
            return Err(Error::Config("distribution noise outside [0, 1]".into()));
        }
        Ok(())
    }
}

/// A realized chart: spec, true data, true calibration and exact annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthChart {
    pub spec: ChartSpec,
    pub true_points: Vec<ChartPoint>,
    pub true_calibration: AxisCalibration,
    #[serde(skip)]
    pub annotations: Option<Scene>,
}

impl GroundTruthChart {
    pub fn annotations(&self) -> &Scene {
        self.annotations
            .as_ref()
            .expect("annotations are attached on realize/load")
    }
}

fn pick_int<R: Rng>(rng: &mut R, r: IntRange) -> i64 {
    rng.random_range(r.min..=r.max)
}

fn pick_float<R: Rng>(rng: &mut R, r: FloatRange) -> f64 {
    if r.min == r.max {
        r.min
    } else {
        rng.random_range(r.min..r.max)
    }
}

fn pick_range<R: Rng>(rng: &mut R, profile: &GenerationProfile, magnitude: i32) -> (f64, f64) {
    let span = pick_float(rng, profile.span_factor) * 10f64.powi(magnitude);
    let lo = pick_float(rng, profile.offset_factor) * span;
    (lo, lo + span)
}

/// Draw a spec from `profile`; a pure function of `(seed, profile)`.
pub fn random_spec(seed: u64, profile: &GenerationProfile) -> Result<ChartSpec> {
    profile.validate()?;
    let mut rng = seed::rng(seed);
    let n_points = pick_int(&mut rng, profile.n_points) as usize;
    let w = &profile.distribution;
    let kind = match WeightedIndex::new([w.uniform, w.linear, w.quadratic])
        .map_err(|e| Error::Config(e.to_string()))?
        .sample(&mut rng)
    {
        0 => DistributionKind::Uniform,
        1 => DistributionKind::Linear,
        _ => DistributionKind::Quadratic,
    };
    let noise = pick_float(&mut rng, profile.noise).clamp(0.0, 1.0);
    let x_magnitude = pick_int(&mut rng, profile.magnitude) as i32;
    let y_magnitude = pick_int(&mut rng, profile.magnitude) as i32;
    let x_range = pick_range(&mut rng, profile, x_magnitude);
    let y_range = pick_range(&mut rng, profile, y_magnitude);
    let n_x_ticks = pick_int(&mut rng, profile.n_ticks) as usize;
    let n_y_ticks = pick_int(&mut rng, profile.n_ticks) as usize;
    let styles = WeightedIndex::new(profile.marker_styles.iter().map(|(_, w)| *w))
        .map_err(|e| Error::Config(e.to_string()))?;
    let marker_style = profile.marker_styles[styles.sample(&mut rng)].0;
    let marker_radius = pick_int(&mut rng, profile.marker_radius) as u32;
    let tick_length = pick_int(&mut rng, profile.tick_length) as u32;
    let tick_width = pick_int(&mut rng, profile.tick_width) as u32;
    let axis_width = pick_int(&mut rng, profile.axis_width) as u32;
    let label_font_scale = pick_int(&mut rng, profile.font_scale) as u32;
    let label_rotation_deg = if rng.random_bool(profile.p_rotated) {
        pick_float(&mut rng, profile.rotation_deg)
    } else {
        0.0
    };
    let label_pad = pick_int(&mut rng, profile.label_pad) as u32;
    let half = crate::raster::sprite::marker_half_extent(marker_style, marker_radius) as u32;
    let axis_pad = half + 2 + pick_int(&mut rng, profile.axis_pad).max(0) as u32;
    let margins = Margins {
        left: pick_int(&mut rng, profile.margin_left) as u32,
        right: pick_int(&mut rng, profile.margin_right) as u32,
        top: pick_int(&mut rng, profile.margin_top) as u32,
        bottom: pick_int(&mut rng, profile.margin_bottom) as u32,
    };
    let image_width = pick_int(&mut rng, profile.image_width) as u32;
    let image_height = pick_int(&mut rng, profile.image_height) as u32;
    let plot_fill = profile.plot_fills[rng.random_range(0..profile.plot_fills.len())];
    let grid = rng
        .random_bool(profile.p_grid)
        .then(|| rng.random_range(200..=222u8));
    let minor_ticks = rng.random_bool(profile.p_minor_ticks);
    let title = rng.random_bool(profile.p_title).then(|| {
        let alphabet = ['e', '+', '-', '1', '2', '3', '5', '8', '0'];
        let n = rng.random_range(5..12);
        (0..n)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect()
    });
    let full_frame = rng.random_bool(profile.p_full_frame);
    let spec = ChartSpec {
        seed,
        n_points,
        data_distribution: DataDistribution { kind, noise },
        x_magnitude,
        y_magnitude,
        x_range,
        y_range,
        n_x_ticks,
        n_y_ticks,
        marker_style,
        marker_radius,
        tick_length,
        tick_width,
        axis_width,
        label_font_scale,
        label_rotation_deg,
        label_pad,
        axis_pad,
        margins,
        image_width,
        image_height,
        style: Style {
            plot_fill,
            grid,
            minor_ticks,
            title,
            full_frame,
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Lay out and annotate a chart. Fails with [`Error::Layout`] when labels do
/// not fit or collide; callers resample.
pub fn realize(spec: &ChartSpec) -> Result<GroundTruthChart> {
    let layout = build_layout(spec)?;
    Ok(GroundTruthChart {
        spec: spec.clone(),
        true_points: layout.true_points.clone(),
        true_calibration: layout.calibration,
        annotations: Some(layout.annotations),
    })
}

/// Outcome of [`generate_chart`], including how many layouts were rejected.
#[derive(Debug, Clone)]
pub struct Generated {
    pub chart: GroundTruthChart,
    pub rejected: u32,
}

pub const MAX_LAYOUT_ATTEMPTS: u32 = 200;

/// Sample and realize a chart for `chart_seed`, resampling rejected layouts
/// with derived seeds `derive_seed(chart_seed, attempt)`.
pub fn generate_chart(chart_seed: u64, profile: &GenerationProfile) -> Result<Generated> {
    let mut last = None;
    for attempt in 0..MAX_LAYOUT_ATTEMPTS {
        let s = if attempt == 0 {
            chart_seed
        } else {
            seed::derive_seed(chart_seed, attempt as u64)
        };
        let spec = random_spec(s, profile)?;
        match realize(&spec) {
            Ok(chart) => {
                return Ok(Generated {
                    chart,
                    rejected: attempt,
                })
            }
            Err(e @ Error::Layout(_)) => {
                log::trace!("chart seed {s}: {e}");
                last = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::Layout("no layout attempts".into())))
}

/// Seed of chart `index` in a corpus generated from `corpus_seed`.
pub fn chart_seed(corpus_seed: u64, index: usize) -> u64 {
    seed::derive_seed(corpus_seed, index as u64)
}

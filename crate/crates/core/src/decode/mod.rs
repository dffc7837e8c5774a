//! From a detection scene to a data table: pair tick values with marks,
//! split them by axis, fit each axis and map the point centers.

pub mod fit;
pub mod pairing;
pub mod parse;
pub mod split;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use fit::{fit_axis, AxisFit, FitMethod, RansacConfig};
pub use pairing::{pair_values_to_marks, DroppedTick, TickObservation};
pub use parse::parse_value;
pub use split::{split_axes, AxisAssignment, SplitConfig};

use crate::error::{Error, Result, Stage};
use crate::model::{bbox_center, AxisCalibration, DataTable, ObjectClass, Scene};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeConfig {
    pub method: FitMethod,
    pub ransac: RansacConfig,
    pub split: SplitConfig,
    /// Detections below this confidence are ignored.
    pub conf_threshold: f64,
}

impl Default for DecodeConfig {
    fn default() -> Self {
        DecodeConfig {
            method: FitMethod::Ransac,
            ransac: RansacConfig::default(),
            split: SplitConfig::default(),
            conf_threshold: crate::raster::detect::DEFAULT_CONF_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisDiagnostics {
    pub n_ticks: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inliers: Option<Vec<bool>>,
}

impl AxisDiagnostics {
    fn new(n_ticks: usize, f: &AxisFit) -> Self {
        AxisDiagnostics {
            n_ticks,
            alpha: f.alpha,
            beta: f.beta,
            r_max: f.r_max,
            inliers: f.inliers.clone(),
        }
    }
}

/// What the decoder did with the scene. Deliberately free of timings so
/// that reruns write identical files; see [`StageTimings`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub method: FitMethod,
    pub n_points: usize,
    pub n_tick_marks: usize,
    pub n_tick_values: usize,
    pub n_observations: usize,
    pub dropped_ticks: Vec<DroppedTick>,
    pub x_axis: AxisDiagnostics,
    pub y_axis: AxisDiagnostics,
}

/// Wall time per stage, reported on the side.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StageTimings {
    pub pairing: Duration,
    pub split: Duration,
    pub fit: Duration,
    pub apply: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.pairing + self.split + self.fit + self.apply
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub table: DataTable,
    pub calibration: AxisCalibration,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct DecodedJson<'a> {
    table: Vec<[f64; 2]>,
    calibration: &'a AxisCalibration,
    diagnostics: &'a Diagnostics,
}

impl Decoded {
    /// `{"table": [[x, y], ...], "calibration": {...}, "diagnostics": {...}}`.
    pub fn to_json(&self) -> Result<String> {
        let j = DecodedJson {
            table: self.table.rows.iter().map(|p| [p.x, p.y]).collect(),
            calibration: &self.calibration,
            diagnostics: &self.diagnostics,
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    /// Table and calibration back from [`Decoded::to_json`] output.
    pub fn table_from_json(s: &str) -> Result<(DataTable, AxisCalibration)> {
        #[derive(Deserialize)]
        struct Back {
            table: Vec<[f64; 2]>,
            calibration: AxisCalibration,
        }
        let b: Back = serde_json::from_str(s)?;
        let rows = b
            .table
            .into_iter()
            .map(|[x, y]| crate::model::ChartPoint::new(x, y))
            .collect();
        Ok((DataTable::new(rows)?, b.calibration))
    }
}

fn fit_stage(stage: Stage, e: Error) -> Error {
    match e {
        Error::Decode { .. } | Error::Config(_) => e,
        other => Error::decode(stage, other.to_string()),
    }
}

/// Decode one scene.
pub fn decode_scene(scene: &Scene, cfg: &DecodeConfig) -> Result<Decoded> {
    decode_scene_timed(scene, cfg).map(|(d, _)| d)
}

pub fn decode_scene_timed(scene: &Scene, cfg: &DecodeConfig) -> Result<(Decoded, StageTimings)> {
    let mut timings = StageTimings::default();
    let kept = Scene {
        image_width: scene.image_width,
        image_height: scene.image_height,
        detections: scene
            .detections
            .iter()
            .filter(|d| d.confidence() >= cfg.conf_threshold)
            .cloned()
            .collect(),
    };

    let t = Instant::now();
    let (obs, dropped_ticks) = pair_values_to_marks(&kept)?;
    timings.pairing = t.elapsed();

    let t = Instant::now();
    let axes = split_axes(&obs, (kept.image_width, kept.image_height), &cfg.split)?;
    timings.split = t.elapsed();

    let t = Instant::now();
    let xs: Vec<(f64, f64)> = axes
        .x_axis_ticks
        .iter()
        .map(|o| (o.mark_center.x, o.value))
        .collect();
    let ys: Vec<(f64, f64)> = axes
        .y_axis_ticks
        .iter()
        .map(|o| (o.mark_center.y, o.value))
        .collect();
    let fx = fit_axis(cfg.method, &xs, &cfg.ransac).map_err(|e| fit_stage(Stage::FitX, e))?;
    let fy = fit_axis(cfg.method, &ys, &cfg.ransac).map_err(|e| fit_stage(Stage::FitY, e))?;
    let calibration = AxisCalibration::new(fx.alpha, fx.beta, fy.alpha, fy.beta).map_err(|e| {
        let stage = if fx.alpha == 0.0 || !fx.alpha.is_finite() {
            Stage::FitX
        } else {
            Stage::FitY
        };
        fit_stage(stage, e)
    })?;
    timings.fit = t.elapsed();

    let t = Instant::now();
    let rows = kept
        .of_class(ObjectClass::Point)
        .map(|d| calibration.apply(bbox_center(&d.bbox)))
        .collect();
    let table = DataTable::new(rows).map_err(|e| Error::decode(Stage::FitY, e.to_string()))?;
    timings.apply = t.elapsed();

    let diagnostics = Diagnostics {
        method: cfg.method,
        n_points: table.len(),
        n_tick_marks: kept.of_class(ObjectClass::TickMark).count(),
        n_tick_values: kept.of_class(ObjectClass::TickValue).count(),
        n_observations: obs.len(),
        dropped_ticks,
        x_axis: AxisDiagnostics::new(xs.len(), &fx),
        y_axis: AxisDiagnostics::new(ys.len(), &fy),
    };
    Ok((
        Decoded {
            table,
            calibration,
            diagnostics,
        },
        timings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Detection;
    use crate::synth::{generate_chart, profile::GenerationProfile};

    fn truth(seed: u64) -> crate::synth::GroundTruthChart {
        generate_chart(seed, &GenerationProfile::default())
            .unwrap()
            .chart
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn clean_scene_recovers_calibration_and_points() {
        for seed in 0..20 {
            let chart = truth(seed);
            let d = decode_scene(chart.annotations(), &DecodeConfig::default()).unwrap();
            let c = chart.true_calibration;
            assert!(rel(d.calibration.alpha_x, c.alpha_x) <= 1e-9, "seed {seed}");
            assert!(rel(d.calibration.alpha_y, c.alpha_y) <= 1e-9, "seed {seed}");
            assert_eq!(d.table.len(), chart.true_points.len());
            let (rx, ry) = ranges(&chart.true_points);
            for (p, q) in d.table.rows.iter().zip(&chart.true_points) {
                assert!((p.x - q.x).abs() <= 0.02 * rx && (p.y - q.y).abs() <= 0.02 * ry);
            }
        }
    }

    fn ranges(p: &[crate::model::ChartPoint]) -> (f64, f64) {
        let f = |g: fn(&crate::model::ChartPoint) -> f64| {
            let v: Vec<f64> = p.iter().map(g).collect();
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        (f(|q| q.x), f(|q| q.y))
    }

    #[test]
    fn no_tick_values_is_insufficient_data() {
        let chart = truth(3);
        let mut s = chart.annotations().clone();
        s.detections.retain(|d| d.class != ObjectClass::TickValue);
        let e = decode_scene(&s, &DecodeConfig::default()).unwrap_err();
        assert_eq!(e.stage(), Stage::Pairing);
        assert!(e.to_string().contains("insufficient calibration data"));
    }

    #[test]
    fn low_confidence_detections_are_ignored() {
        let chart = truth(4);
        let mut s = chart.annotations().clone();
        let b = s.of_class(ObjectClass::Point).next().unwrap().bbox;
        s.detections.push(Detection::point(b, 0.1));
        let d = decode_scene(&s, &DecodeConfig::default()).unwrap();
        assert_eq!(d.table.len(), chart.true_points.len());
    }

    #[test]
    fn output_json_shape_and_round_trip() {
        let chart = truth(5);
        let d = decode_scene(chart.annotations(), &DecodeConfig::default()).unwrap();
        let s = d.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert!(v["table"][0].as_array().unwrap().len() == 2);
        for k in ["alpha_x", "beta_x", "alpha_y", "beta_y"] {
            assert!(v["calibration"][k].is_f64());
        }
        assert_eq!(v["diagnostics"]["method"], "ransac");
        let (t, c) = Decoded::table_from_json(&s).unwrap();
        assert_eq!(t, d.table);
        assert_eq!(c, d.calibration);
    }

    #[test]
    fn failed_axis_names_its_stage() {
        let chart = truth(6);
        let mut s = chart.annotations().clone();
        // every y tick value reads the same number: the line has slope zero
        let w = s.image_width as f64;
        for d in s.detections.iter_mut() {
            if d.class == ObjectClass::TickValue && bbox_center(&d.bbox).x < 0.3 * w {
                d.set_text(Some("7".into()));
            }
        }
        let e = decode_scene(
            &s,
            &DecodeConfig {
                method: FitMethod::Ols2,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert_eq!(e.stage(), Stage::FitY);
    }
}

//! Geometric and domain types shared by the generator, detector, decoder and
//! evaluator.
//!
//! Pixel coordinates are continuous reals with the origin at the top-left
//! corner and `y` growing downward. The pixel at column `i`, row `j` covers
//! `[i, i + 1] x [j, j + 1]`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    x_min: f64,
    y_min: f64,
    x_max: f64,
    y_max: f64,
}

impl BoundingBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidBox("non-finite coordinate".into()));
        }
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidBox(format!(
                "empty extent ({x_min}, {y_min}, {x_max}, {y_max})"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Box covering the pixel cells `cols x rows` (both ranges inclusive).
    pub fn from_pixel_span(col0: i64, row0: i64, col1: i64, row1: i64) -> Self {
        Self::new(
            col0 as f64,
            row0 as f64,
            (col1 + 1) as f64,
            (row1 + 1) as f64,
        )
        .expect("pixel span with col0 <= col1 and row0 <= row1")
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> PixelPoint {
        bbox_center(self)
    }

    /// Clip to `[0, w] x [0, h]`; `None` when nothing of positive area remains.
    pub fn clip(&self, w: f64, h: f64) -> Option<Self> {
        Self::new(
            self.x_min.max(0.0),
            self.y_min.max(0.0),
            self.x_max.min(w),
            self.y_max.min(h),
        )
        .ok()
    }

    pub fn within(&self, w: f64, h: f64) -> bool {
        self.x_min >= 0.0 && self.y_min >= 0.0 && self.x_max <= w && self.y_max <= h
    }

    /// Chebyshev gap between two boxes; zero when they touch or overlap.
    pub fn gap(&self, other: &Self) -> f64 {
        let dx = (other.x_min - self.x_max)
            .max(self.x_min - other.x_max)
            .max(0.0);
        let dy = (other.y_min - self.y_max)
            .max(self.y_min - other.y_max)
            .max(0.0);
        dx.max(dy)
    }

    pub fn union(&self, other: &Self) -> Self {
        Self {
            x_min: self.x_min.min(other.x_min),
            y_min: self.y_min.min(other.y_min),
            x_max: self.x_max.max(other.x_max),
            y_max: self.y_max.max(other.y_max),
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Result<Self> {
        Self::new(
            self.x_min + dx,
            self.y_min + dy,
            self.x_max + dx,
            self.y_max + dy,
        )
    }
}

impl TryFrom<[f64; 4]> for BoundingBox {
    type Error = Error;
    fn try_from(v: [f64; 4]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Point,
    TickMark,
    TickValue,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 3] = [
        ObjectClass::Point,
        ObjectClass::TickMark,
        ObjectClass::TickValue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectClass::Point => "point",
            ObjectClass::TickMark => "tick_mark",
            ObjectClass::TickValue => "tick_value",
        }
    }
}

/// One detector output (or one ground-truth annotation, at confidence 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDetection", into = "RawDetection")]
pub struct Detection {
    pub bbox: BoundingBox,
    pub class: ObjectClass,
    confidence: f64,
    recognized_text: Option<String>,
}

impl Detection {
    pub fn new(
        bbox: BoundingBox,
        class: ObjectClass,
        confidence: f64,
        recognized_text: Option<String>,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&confidence) {
            return Err(Error::Config(format!(
                "confidence {confidence} outside [0, 1]"
            )));
        }
        if recognized_text.is_some() && class != ObjectClass::TickValue {
            return Err(Error::Config(format!(
                "recognized text on a {} detection",
                class.name()
            )));
        }
        Ok(Self {
            bbox,
            class,
            confidence,
            recognized_text,
        })
    }

    pub fn point(bbox: BoundingBox, confidence: f64) -> Self {
        Self::new(bbox, ObjectClass::Point, confidence.clamp(0.0, 1.0), None).unwrap()
    }

    pub fn tick_mark(bbox: BoundingBox, confidence: f64) -> Self {
        Self::new(
            bbox,
            ObjectClass::TickMark,
            confidence.clamp(0.0, 1.0),
            None,
        )
        .unwrap()
    }

    pub fn tick_value(bbox: BoundingBox, confidence: f64, text: Option<String>) -> Self {
        Self::new(
            bbox,
            ObjectClass::TickValue,
            confidence.clamp(0.0, 1.0),
            text,
        )
        .unwrap()
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn text(&self) -> Option<&str> {
        self.recognized_text.as_deref()
    }

    pub fn set_text(&mut self, text: Option<String>) {
        debug_assert!(text.is_none() || self.class == ObjectClass::TickValue);
        if self.class == ObjectClass::TickValue {
            self.recognized_text = text;
        }
    }

    pub fn set_confidence(&mut self, confidence: f64) {
        self.confidence = confidence.clamp(0.0, 1.0);
    }
}

#[derive(Serialize, Deserialize)]
struct RawDetection {
    class: ObjectClass,
    bbox: BoundingBox,
    confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
}

impl TryFrom<RawDetection> for Detection {
    type Error = Error;
    fn try_from(r: RawDetection) -> Result<Self> {
        Detection::new(r.bbox, r.class, r.confidence, r.text)
    }
}

impl From<Detection> for RawDetection {
    fn from(d: Detection) -> Self {
        RawDetection {
            class: d.class,
            bbox: d.bbox,
            confidence: d.confidence,
            text: d.recognized_text,
        }
    }
}

/// Full detection record of one chart image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScene", into = "RawScene")]
pub struct Scene {
    pub image_width: u32,
    pub image_height: u32,
    pub detections: Vec<Detection>,
}

#[derive(Serialize, Deserialize)]
struct RawScene {
    image_width: u32,
    image_height: u32,
    detections: Vec<Detection>,
}

impl TryFrom<RawScene> for Scene {
    type Error = Error;
    fn try_from(r: RawScene) -> Result<Self> {
        Scene::new(r.image_width, r.image_height, r.detections)
    }
}

impl From<Scene> for RawScene {
    fn from(s: Scene) -> Self {
        RawScene {
            image_width: s.image_width,
            image_height: s.image_height,
            detections: s.detections,
        }
    }
}

impl Scene {
    pub fn new(image_width: u32, image_height: u32, detections: Vec<Detection>) -> Result<Self> {
        let (w, h) = (image_width as f64, image_height as f64);
        if let Some(d) = detections.iter().find(|d| !d.bbox.within(w, h)) {
            return Err(Error::InvalidBox(format!(
                "{} box {:?} outside {image_width}x{image_height} image",
                d.class.name(),
                <[f64; 4]>::from(d.bbox)
            )));
        }
        Ok(Self {
            image_width,
            image_height,
            detections,
        })
    }

    pub fn of_class(&self, class: ObjectClass) -> impl Iterator<Item = &Detection> + '_ {
        self.detections.iter().filter(move |d| d.class == class)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
}

impl ChartPoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Per-axis affine map `chart = alpha * pixel + beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCalibration", into = "RawCalibration")]
pub struct AxisCalibration {
    pub alpha_x: f64,
    pub beta_x: f64,
    pub alpha_y: f64,
    pub beta_y: f64,
}

#[derive(Serialize, Deserialize)]
struct RawCalibration {
    alpha_x: f64,
    beta_x: f64,
    alpha_y: f64,
    beta_y: f64,
}

impl TryFrom<RawCalibration> for AxisCalibration {
    type Error = Error;
    fn try_from(r: RawCalibration) -> Result<Self> {
        AxisCalibration::new(r.alpha_x, r.beta_x, r.alpha_y, r.beta_y)
    }
}

impl From<AxisCalibration> for RawCalibration {
    fn from(c: AxisCalibration) -> Self {
        RawCalibration {
            alpha_x: c.alpha_x,
            beta_x: c.beta_x,
            alpha_y: c.alpha_y,
            beta_y: c.beta_y,
        }
    }
}

impl AxisCalibration {
    pub fn new(alpha_x: f64, beta_x: f64, alpha_y: f64, beta_y: f64) -> Result<Self> {
        if [alpha_x, beta_x, alpha_y, beta_y]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::CalibrationDegenerate("non-finite parameter".into()));
        }
        if alpha_x == 0.0 || alpha_y == 0.0 {
            return Err(Error::CalibrationDegenerate(format!(
                "zero slope (alpha_x = {alpha_x}, alpha_y = {alpha_y})"
            )));
        }
        Ok(Self {
            alpha_x,
            beta_x,
            alpha_y,
            beta_y,
        })
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 1.0, 0.0).unwrap()
    }

    pub fn apply(&self, p: PixelPoint) -> ChartPoint {
        apply_calibration(self, p)
    }

    pub fn invert(&self) -> Result<Self> {
        invert_calibration(self)
    }

    /// Inverse map, chart to pixel.
    pub fn to_pixel(&self, c: ChartPoint) -> PixelPoint {
        PixelPoint::new(
            (c.x - self.beta_x) / self.alpha_x,
            (c.y - self.beta_y) / self.alpha_y,
        )
    }
}

pub fn bbox_center(b: &BoundingBox) -> PixelPoint {
    PixelPoint::new((b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0)
}

/// Intersection over union; 0 for disjoint boxes.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let iw = (a.x_max.min(b.x_max) - a.x_min.max(b.x_min)).max(0.0);
    let ih = (a.y_max.min(b.y_max) - a.y_min.max(b.y_min)).max(0.0);
    let inter = iw * ih;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    (inter / union).clamp(0.0, 1.0)
}

pub fn apply_calibration(c: &AxisCalibration, p: PixelPoint) -> ChartPoint {
    ChartPoint::new(c.alpha_x * p.x + c.beta_x, c.alpha_y * p.y + c.beta_y)
}

pub fn invert_calibration(c: &AxisCalibration) -> Result<AxisCalibration> {
    if c.alpha_x == 0.0 || c.alpha_y == 0.0 {
        return Err(Error::CalibrationDegenerate(
            "zero slope cannot be inverted".into(),
        ));
    }
    AxisCalibration::new(
        1.0 / c.alpha_x,
        -c.beta_x / c.alpha_x,
        1.0 / c.alpha_y,
        -c.beta_y / c.alpha_y,
    )
}

/// Extracted `(x, y)` chart-coordinate tuples.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DataTable {
    pub rows: Vec<ChartPoint>,
}

impl DataTable {
    pub fn new(rows: Vec<ChartPoint>) -> Result<Self> {
        if rows.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Config("non-finite table entry".into()));
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV with header `x,y`; values use the shortest round-tripping decimal form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.rows {
            writeln!(w, "{:?},{:?}", p.x, p.y)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }

    pub fn from_csv_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        match lines.next() {
            Some(h) if h.trim() == "x,y" => {}
            _ => {
                return Err(Error::Config(
                    "table csv must start with header `x,y`".into(),
                ))
            }
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let mut it = line.split(',');
            let parse = |v: Option<&str>| -> Result<f64> {
                v.and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("bad csv row {}: `{line}`", i + 2)))
            };
            let x = parse(it.next())?;
            let y = parse(it.next())?;
            rows.push(ChartPoint::new(x, y));
        }
        DataTable::new(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(a: f64, b: f64, c: f64, d: f64) -> BoundingBox {
        BoundingBox::new(a, b, c, d).unwrap()
    }

    #[test]
    fn center_examples() {
        assert_eq!(
            bbox_center(&bb(0.0, 0.0, 2.0, 2.0)),
            PixelPoint::new(1.0, 1.0)
        );
        assert_eq!(
            bbox_center(&bb(10.0, 20.0, 30.0, 60.0)),
            PixelPoint::new(20.0, 40.0)
        );
        assert_eq!(
            bbox_center(&bb(5.0, 5.0, 5.5, 9.0)),
            PixelPoint::new(5.25, 7.0)
        );
    }

    #[test]
    fn iou_examples() {
        let a = bb(0.0, 0.0, 2.0, 2.0);
        assert_eq!(iou(&a, &a), 1.0);
        assert_eq!(iou(&a, &bb(5.0, 5.0, 6.0, 6.0)), 0.0);
        // touching edges share no area
        assert_eq!(iou(&a, &bb(2.0, 0.0, 3.0, 2.0)), 0.0);
        let v = iou(&a, &bb(1.0, 0.0, 3.0, 2.0));
        assert!((v - 2.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn calibration_examples() {
        let id = AxisCalibration::identity();
        assert_eq!(
            id.apply(PixelPoint::new(3.0, 4.0)),
            ChartPoint::new(3.0, 4.0)
        );

        let c = AxisCalibration::new(0.1, -10.0, -0.2, 50.0).unwrap();
        let p = c.apply(PixelPoint::new(100.0, 100.0));
        assert!((p.x - 0.0).abs() < 1e-12 && (p.y - 30.0).abs() < 1e-12);

        let c = AxisCalibration::new(2.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(
            c.apply(PixelPoint::new(0.0, 0.0)),
            ChartPoint::new(1.0, 1.0)
        );
    }

    #[test]
    fn inversion_examples() {
        assert_eq!(
            AxisCalibration::identity().invert().unwrap(),
            AxisCalibration::identity()
        );
        let c = AxisCalibration::new(2.0, 0.0, 2.0, 0.0)
            .unwrap()
            .invert()
            .unwrap();
        assert_eq!(
            (c.alpha_x, c.beta_x, c.alpha_y, c.beta_y),
            (0.5, 0.0, 0.5, 0.0)
        );
        let c = AxisCalibration::new(0.1, -10.0, 1.0, 0.0)
            .unwrap()
            .invert()
            .unwrap();
        assert!((c.alpha_x - 10.0).abs() < 1e-12);
        assert!((c.beta_x - 100.0).abs() < 1e-9);
        assert_eq!((c.alpha_y, c.beta_y), (1.0, 0.0));
    }

    #[test]
    fn degenerate_calibration_rejected() {
        assert!(matches!(
            AxisCalibration::new(0.0, 1.0, 1.0, 0.0),
            Err(Error::CalibrationDegenerate(_))
        ));
        let raw = AxisCalibration {
            alpha_x: 0.0,
            beta_x: 0.0,
            alpha_y: 1.0,
            beta_y: 0.0,
        };
        assert!(invert_calibration(&raw).is_err());
    }

    #[test]
    fn invalid_boxes_rejected() {
        assert!(BoundingBox::new(1.0, 0.0, 1.0, 2.0).is_err());
        assert!(BoundingBox::new(0.0, 0.0, f64::NAN, 2.0).is_err());
        assert!(serde_json::from_str::<BoundingBox>("[3, 0, 1, 1]").is_err());
    }

    #[test]
    fn detection_invariants() {
        let b = bb(0.0, 0.0, 1.0, 1.0);
        assert!(Detection::new(b, ObjectClass::Point, 1.5, None).is_err());
        assert!(Detection::new(b, ObjectClass::TickMark, 0.5, Some("1".into())).is_err());
        assert!(Detection::new(b, ObjectClass::TickValue, 0.5, Some("1".into())).is_ok());
    }

    #[test]
    fn scene_json_schema() {
        let scene = Scene::new(
            10,
            10,
            vec![
                Detection::point(bb(1.0, 1.0, 3.0, 3.0), 1.0),
                Detection::tick_value(bb(0.0, 5.0, 4.0, 9.0), 0.9, Some("-5".into())),
            ],
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&scene.to_json().unwrap()).unwrap();
        assert_eq!(v["image_width"], 10);
        assert_eq!(v["detections"][0]["class"], "point");
        assert_eq!(
            v["detections"][0]["bbox"],
            serde_json::json!([1.0, 1.0, 3.0, 3.0])
        );
        assert!(v["detections"][0].get("text").is_none());
        assert_eq!(v["detections"][1]["text"], "-5");
        assert_eq!(Scene::from_json(&scene.to_json().unwrap()).unwrap(), scene);

        let outside = r#"{"image_width": 4, "image_height": 4, "detections":
            [{"class": "point", "bbox": [0, 0, 5, 1], "confidence": 1.0}]}"#;
        assert!(Scene::from_json(outside).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = DataTable::new(vec![
            ChartPoint::new(0.1, -2.5e-7),
            ChartPoint::new(1e6, 3.0),
        ])
        .unwrap();
        let s = t.to_csv_string();
        assert!(s.starts_with("x,y\n"));
        assert_eq!(DataTable::from_csv_str(&s).unwrap(), t);
    }

    fn arb_box() -> impl Strategy<Value = BoundingBox> {
        (-1e3..1e3f64, -1e3..1e3f64, 1e-3..1e3f64, 1e-3..1e3f64)
            .prop_map(|(x, y, w, h)| BoundingBox::new(x, y, x + w, y + h).unwrap())
    }

    fn nonzero() -> impl Strategy<Value = f64> {
        prop_oneof![-1e4..-1e-4f64, 1e-4..1e4f64]
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_reflexive(a in arb_box(), b in arb_box()) {
            prop_assert_eq!(iou(&a, &b), iou(&b, &a));
            prop_assert_eq!(iou(&a, &a), 1.0);
            let v = iou(&a, &b);
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn center_inside(b in arb_box()) {
            let c = bbox_center(&b);
            prop_assert!(c.x >= b.x_min() && c.x <= b.x_max());
            prop_assert!(c.y >= b.y_min() && c.y <= b.y_max());
        }

        #[test]
        fn inverse_round_trips(ax in nonzero(), bx in -1e6..1e6f64, ay in nonzero(), by in -1e6..1e6f64,
                               px in -1e4..1e4f64, py in -1e4..1e4f64) {
            let c = AxisCalibration::new(ax, bx, ay, by).unwrap();
            let inv = c.invert().unwrap();
            let back = inv.apply(PixelPoint::new(c.apply(PixelPoint::new(px, py)).x, c.apply(PixelPoint::new(px, py)).y));
            // relative to the magnitudes that flow through the composition
            let sx = px.abs() + (bx / ax).abs() + 1.0;
            let sy = py.abs() + (by / ay).abs() + 1.0;
            prop_assert!((back.x - px).abs() <= 1e-9 * sx);
            prop_assert!((back.y - py).abs() <= 1e-9 * sy);
        }
    }
}

//! Pairing tick values with tick marks.

use serde::Serialize;

use super::parse::parse_value;
use crate::error::{Error, Result, Stage};
use crate::model::{bbox_center, ObjectClass, PixelPoint, Scene};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickObservation {
    pub mark_center: PixelPoint,
    pub value: f64,
    pub source_confidence: f64,
}

/// A tick value that did not make it into an observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DroppedTick {
    pub text: Option<String>,
    pub reason: String,
}

/// Pair every parseable tick value with a tick mark. Candidate pairs are
/// taken in order of center distance, so a mark claimed by two values goes
/// to the closer one and the other falls through to its next unclaimed
/// mark. Equal distances prefer the mark with smaller x, then smaller y.
pub fn pair_values_to_marks(scene: &Scene) -> Result<(Vec<TickObservation>, Vec<DroppedTick>)> {
    let marks: Vec<PixelPoint> = scene
        .of_class(ObjectClass::TickMark)
        .map(|d| bbox_center(&d.bbox))
        .collect();
    let mut dropped = Vec::new();
    let mut values = Vec::new();
    for d in scene.of_class(ObjectClass::TickValue) {
        match d.text().and_then(parse_value) {
            Some(v) => values.push((bbox_center(&d.bbox), v, d.confidence())),
            None => {
                log::debug!("dropping tick value {:?}: not a number", d.text());
                dropped.push(DroppedTick {
                    text: d.text().map(str::to_owned),
                    reason: "unparseable".into(),
                });
            }
        }
    }
    if values.is_empty() {
        return Err(Error::decode(
            Stage::Pairing,
            "insufficient calibration data",
        ));
    }
    if marks.is_empty() {
        return Err(Error::decode(Stage::Pairing, "no tick marks"));
    }

    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(values.len() * marks.len());
    for (vi, v) in values.iter().enumerate() {
        for (mi, m) in marks.iter().enumerate() {
            cand.push((v.0.dist(m), vi, mi));
        }
    }
    cand.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(marks[a.2].x.total_cmp(&marks[b.2].x))
            .then(marks[a.2].y.total_cmp(&marks[b.2].y))
            .then(a.1.cmp(&b.1))
    });
    let mut value_mark = vec![None; values.len()];
    let mut mark_taken = vec![false; marks.len()];
    for (_, vi, mi) in cand {
        if value_mark[vi].is_none() && !mark_taken[mi] {
            value_mark[vi] = Some(mi);
            mark_taken[mi] = true;
        }
    }

    let mut obs = Vec::new();
    for (vi, (_, value, conf)) in values.iter().enumerate() {
        match value_mark[vi] {
            Some(mi) => obs.push(TickObservation {
                mark_center: marks[mi],
                value: *value,
                source_confidence: *conf,
            }),
            None => dropped.push(DroppedTick {
                text: Some(value.to_string()),
                reason: "no unclaimed tick mark".into(),
            }),
        }
    }
    Ok((obs, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoundingBox, Detection};

    fn b(x: f64, y: f64) -> BoundingBox {
        BoundingBox::new(x - 1.0, y - 1.0, x + 1.0, y + 1.0).unwrap()
    }

    fn scene(marks: &[(f64, f64)], values: &[(f64, f64, &str)]) -> Scene {
        let mut d: Vec<Detection> = marks
            .iter()
            .map(|&(x, y)| Detection::tick_mark(b(x, y), 1.0))
            .collect();
        d.extend(
            values
                .iter()
                .map(|&(x, y, t)| Detection::tick_value(b(x, y), 1.0, Some(t.into()))),
        );
        Scene::new(200, 200, d).unwrap()
    }

    #[test]
    fn single_pair() {
        let (o, dropped) =
            pair_values_to_marks(&scene(&[(10.0, 10.0)], &[(10.0, 20.0, "5")])).unwrap();
        assert_eq!(o.len(), 1);
        assert!(dropped.is_empty());
        assert_eq!(o[0].value, 5.0);
        assert_eq!(o[0].mark_center, PixelPoint::new(10.0, 10.0));
    }

    #[test]
    fn equidistant_prefers_smaller_x() {
        let (o, _) =
            pair_values_to_marks(&scene(&[(30.0, 10.0), (10.0, 10.0)], &[(20.0, 10.0, "1")]))
                .unwrap();
        assert_eq!(o[0].mark_center.x, 10.0);
        let (o, _) =
            pair_values_to_marks(&scene(&[(10.0, 30.0), (10.0, 10.0)], &[(10.0, 20.0, "1")]))
                .unwrap();
        assert_eq!(o[0].mark_center.y, 10.0);
    }

    #[test]
    fn corrupted_text_is_dropped() {
        let (o, dropped) = pair_values_to_marks(&scene(
            &[(10.0, 10.0), (50.0, 10.0)],
            &[(10.0, 20.0, "0"), (50.0, 20.0, "1O")],
        ))
        .unwrap();
        assert_eq!(o.len(), 1);
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].text.as_deref(), Some("1O"));
    }

    #[test]
    fn conflict_goes_to_closer_value() {
        // both values are nearest to mark A; the farther one falls back to B
        let (o, _) = pair_values_to_marks(&scene(
            &[(10.0, 10.0), (40.0, 10.0)],
            &[(12.0, 20.0, "1"), (20.0, 20.0, "2")],
        ))
        .unwrap();
        let one = o.iter().find(|t| t.value == 1.0).unwrap();
        let two = o.iter().find(|t| t.value == 2.0).unwrap();
        assert_eq!(one.mark_center.x, 10.0);
        assert_eq!(two.mark_center.x, 40.0);
    }

    #[test]
    fn no_values_is_insufficient_data() {
        let err = pair_values_to_marks(&scene(&[(10.0, 10.0)], &[])).unwrap_err();
        assert_eq!(err.stage(), Stage::Pairing);
        assert!(err.to_string().contains("insufficient calibration data"));
    }
}

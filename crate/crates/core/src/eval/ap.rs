//! Detector precision/recall curves and average precision at an IoU
//! threshold, pooled over any number of images.

use serde::Serialize;

use crate::model::{iou, Detection, ObjectClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrCurve {
    /// One point per distinct confidence, from the highest down.
    pub points: Vec<PrPoint>,
    pub ap: f64,
}

/// Area under the curve by the trapezoid rule over recall. The curve is
/// closed on the left at recall 0 with the first point's precision, so
/// perfect detection scores 1.
pub fn trapezoid_ap(points: &[PrPoint]) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    let mut area = 0.0;
    let (mut r0, mut p0) = (0.0, first.precision);
    for q in points {
        area += (q.recall - r0) * (q.precision + p0) / 2.0;
        r0 = q.recall;
        p0 = q.precision;
    }
    area
}

/// Greedy IoU matching in confidence order: each detection takes the
/// unclaimed truth of highest IoU at or above `iou_threshold` in its image.
/// Returns, in processing order, each detection's confidence and whether it
/// was a true positive.
fn greedy(
    images: &[(&[Detection], &[Detection])],
    iou_threshold: f64,
) -> (Vec<(f64, bool)>, usize) {
    let mut order: Vec<(usize, usize)> = images
        .iter()
        .enumerate()
        .flat_map(|(im, (pred, _))| (0..pred.len()).map(move |k| (im, k)))
        .collect();
    let conf = |&(im, k): &(usize, usize)| images[im].0[k].confidence();
    order.sort_by(|a, b| conf(b).total_cmp(&conf(a)).then(a.cmp(b)));
    let mut claimed: Vec<Vec<bool>> = images.iter().map(|(_, t)| vec![false; t.len()]).collect();
    let mut out = Vec::with_capacity(order.len());
    for (im, k) in order {
        let d = &images[im].0[k];
        let truth = images[im].1;
        let best = (0..truth.len())
            .filter(|&j| !claimed[im][j])
            .map(|j| (j, iou(&d.bbox, &truth[j].bbox)))
            .filter(|&(_, v)| v >= iou_threshold)
            .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
        if let Some((j, _)) = best {
            claimed[im][j] = true;
        }
        out.push((d.confidence(), best.is_some()));
    }
    (out, images.iter().map(|(_, t)| t.len()).sum())
}

/// PR curve and AP over several images at once. Detections with equal
/// confidence enter the curve together.
pub fn pooled_ap(images: &[(&[Detection], &[Detection])], iou_threshold: f64) -> PrCurve {
    let (seq, n_true) = greedy(images, iou_threshold);
    let mut points = Vec::new();
    let (mut tp, mut n) = (0usize, 0usize);
    for (i, &(c, hit)) in seq.iter().enumerate() {
        tp += hit as usize;
        n += 1;
        let last_of_score = seq.get(i + 1).is_none_or(|next| next.0 != c);
        if last_of_score {
            points.push(PrPoint {
                threshold: c,
                recall: if n_true > 0 {
                    tp as f64 / n_true as f64
                } else {
                    0.0
                },
                precision: tp as f64 / n as f64,
            });
        }
    }
    let ap = trapezoid_ap(&points);
    PrCurve { points, ap }
}

pub fn detector_ap(pred: &[Detection], truth: &[Detection], iou_threshold: f64) -> PrCurve {
    pooled_ap(&[(pred, truth)], iou_threshold)
}

/// Per-image `(pred, truth)` lists restricted to one class.
pub fn class_pairs(
    images: &[(Vec<Detection>, Vec<Detection>)],
    class: ObjectClass,
) -> Vec<(Vec<Detection>, Vec<Detection>)> {
    images
        .iter()
        .map(|(p, t)| {
            let keep = |v: &Vec<Detection>| {
                v.iter()
                    .filter(|d| d.class == class)
                    .cloned()
                    .collect::<Vec<_>>()
            };
            (keep(p), keep(t))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundingBox;
    use proptest::prelude::*;

    fn pt(x: f64, conf: f64) -> Detection {
        Detection::point(BoundingBox::new(x, 0.0, x + 10.0, 10.0).unwrap(), conf)
    }

    #[test]
    fn perfect_detections() {
        let t = [pt(0.0, 1.0), pt(20.0, 1.0), pt(40.0, 1.0)];
        let p = [pt(0.0, 0.9), pt(20.0, 0.8), pt(40.0, 0.7)];
        assert_eq!(detector_ap(&p, &t, 0.5).ap, 1.0);
    }

    #[test]
    fn all_below_iou_threshold() {
        let t = [pt(0.0, 1.0), pt(20.0, 1.0)];
        let p = [pt(6.0, 0.9), pt(26.0, 0.8)];
        assert_eq!(detector_ap(&p, &t, 0.5).ap, 0.0);
    }

    /// AP recomputed by filtering at every threshold and matching from
    /// scratch each time.
    fn brute_ap(pred: &[Detection], truth: &[Detection], thr: f64) -> f64 {
        let mut scores: Vec<f64> = pred.iter().map(|d| d.confidence()).collect();
        scores.sort_by(|a, b| b.total_cmp(a));
        scores.dedup();
        let points: Vec<PrPoint> = scores
            .iter()
            .map(|&s| {
                let kept: Vec<Detection> = pred
                    .iter()
                    .filter(|d| d.confidence() >= s)
                    .cloned()
                    .collect();
                let (seq, n_true) = greedy(&[(&kept, truth)], thr);
                let tp = seq.iter().filter(|x| x.1).count() as f64;
                PrPoint {
                    threshold: s,
                    recall: tp / n_true as f64,
                    precision: tp / kept.len() as f64,
                }
            })
            .collect();
        trapezoid_ap(&points)
    }

    #[test]
    fn three_detections_one_wrong() {
        let t = [pt(0.0, 1.0), pt(20.0, 1.0)];
        let p = [pt(0.0, 0.9), pt(60.0, 0.8), pt(20.0, 0.7)];
        let c = detector_ap(&p, &t, 0.5);
        assert!((c.ap - brute_ap(&p, &t, 0.5)).abs() < 1e-12);
        // points: (0.5, 1), (0.5, 0.5), (1, 2/3)
        let expected = 0.5 * 1.0 + 0.0 + 0.5 * (0.5 + 2.0 / 3.0) / 2.0;
        assert!((c.ap - expected).abs() < 1e-12, "{}", c.ap);
    }

    #[test]
    fn pooling_keeps_images_apart() {
        let t = [pt(0.0, 1.0)];
        let p = [pt(0.0, 0.9)];
        let c = pooled_ap(&[(&p, &t), (&[], &t)], 0.5);
        assert_eq!(c.points.last().unwrap().recall, 0.5);
        let c = pooled_ap(&[(&p, &[]), (&[], &t)], 0.5);
        assert_eq!(c.ap, 0.0);
    }

    fn scene() -> impl Strategy<Value = (Vec<Detection>, Vec<Detection>)> {
        let det = (0.0..100.0f64, 0.0..100.0f64, 0.01..1.0f64);
        (
            prop::collection::vec(det.clone(), 0..8),
            prop::collection::vec(det, 1..6),
        )
            .prop_map(|(p, t)| {
                let mk = |&(x, y, c): &(f64, f64, f64)| {
                    Detection::point(BoundingBox::new(x, y, x + 15.0, y + 15.0).unwrap(), c)
                };
                (p.iter().map(mk).collect(), t.iter().map(mk).collect())
            })
    }

    proptest! {
        #[test]
        fn matches_threshold_enumeration((p, t) in scene()) {
            prop_assert!((detector_ap(&p, &t, 0.5).ap - brute_ap(&p, &t, 0.5)).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_monotone_rescaling((p, t) in scene(), k in 0.1..3.0f64) {
            let q: Vec<Detection> = p.iter().map(|d| {
                let mut d = d.clone();
                d.set_confidence(d.confidence().powf(k) * 0.5);
                d
            }).collect();
            prop_assert!((detector_ap(&p, &t, 0.5).ap - detector_ap(&q, &t, 0.5).ap).abs() < 1e-12);
        }
    }
}

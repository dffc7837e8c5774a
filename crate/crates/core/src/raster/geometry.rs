//! Convex hull and minimum-area enclosing rectangle.

pub type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by Andrew's monotone chain; counter-clockwise in a y-up frame,
/// collinear points dropped.
pub fn convex_hull(points: &[Pt]) -> Vec<Pt> {
    let mut p: Vec<Pt> = points.to_vec();
    p.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut hull: Vec<Pt> = Vec::with_capacity(2 * p.len());
    for (pass, pts) in [p.clone(), p.iter().rev().copied().collect()]
        .into_iter()
        .enumerate()
    {
        // the upper chain may not pop points of the finished lower chain
        let floor = if pass == 0 { 2 } else { hull.len() + 2 };
        for q in pts {
            while hull.len() >= floor && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0
            {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    hull
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinRect {
    /// Direction of the first side, degrees in `[0, 180)`, measured from the
    /// +x axis towards +y of the input frame.
    pub angle_deg: f64,
    /// Extent along `angle_deg`.
    pub len_along: f64,
    /// Extent perpendicular to `angle_deg`.
    pub len_across: f64,
}

impl MinRect {
    pub fn area(&self) -> f64 {
        self.len_along * self.len_across
    }
}

/// Minimum-area rectangle around `points`: one side is collinear with a hull
/// edge, so it suffices to test every edge direction (rotating calipers).
pub fn min_area_rect(points: &[Pt]) -> Option<MinRect> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => return None,
        1 => {
            return Some(MinRect {
                angle_deg: 0.0,
                len_along: 0.0,
                len_across: 0.0,
            })
        }
        _ => {}
    }
    let mut best: Option<MinRect> = None;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let len = dx.hypot(dy);
        if len == 0.0 {
            continue;
        }
        let (ux, uy) = (dx / len, dy / len);
        let (mut lo_u, mut hi_u, mut lo_v, mut hi_v) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for &(x, y) in &hull {
            let u = x * ux + y * uy;
            let v = -x * uy + y * ux;
            lo_u = lo_u.min(u);
            hi_u = hi_u.max(u);
            lo_v = lo_v.min(v);
            hi_v = hi_v.max(v);
        }
        let r = MinRect {
            angle_deg: uy.atan2(ux).to_degrees().rem_euclid(180.0),
            len_along: hi_u - lo_u,
            len_across: hi_v - lo_v,
        };
        // ties keep the direction closest to horizontal
        let better = match best {
            None => true,
            Some(bst) => {
                let (ra, ba) = (r.area(), bst.area());
                ra < ba - 1e-9
                    || ((ra - ba).abs() <= 1e-9 && tilt(r.angle_deg) < tilt(bst.angle_deg))
            }
        };
        if better {
            best = Some(r);
        }
    }
    best
}

fn tilt(angle_deg: f64) -> f64 {
    let a = angle_deg.rem_euclid(90.0);
    a.min(90.0 - a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_hull() {
        let pts = [
            (0.0, 0.0),
            (1.0, 0.0),
            (1.0, 1.0),
            (0.0, 1.0),
            (0.5, 0.5),
            (0.5, 0.0),
        ];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!(!h.contains(&(0.5, 0.5)));
    }

    #[test]
    fn rotated_rectangle_recovered() {
        let (s, c) = 30f64.to_radians().sin_cos();
        let corners: Vec<Pt> = [(0.0, 0.0), (10.0, 0.0), (10.0, 3.0), (0.0, 3.0)]
            .iter()
            .map(|&(x, y)| (x * c - y * s, x * s + y * c))
            .collect();
        let r = min_area_rect(&corners).unwrap();
        assert!((r.area() - 30.0).abs() < 1e-9);
        let long_dir = if r.len_along > r.len_across {
            r.angle_deg
        } else {
            r.angle_deg + 90.0
        };
        assert!((long_dir.rem_euclid(180.0) - 30.0).abs() < 1e-9);
    }

    /// Brute force over one-degree directions can never beat the calipers.
    fn brute_area(pts: &[Pt]) -> f64 {
        (0..1800)
            .map(|k| {
                let t = (k as f64 / 10.0).to_radians();
                let (s, c) = t.sin_cos();
                let us = pts.iter().map(|p| p.0 * c + p.1 * s);
                let vs = pts.iter().map(|p| -p.0 * s + p.1 * c);
                let (a, b) = us.fold((f64::MAX, f64::MIN), |(a, b), u| (a.min(u), b.max(u)));
                let (e, f) = vs.fold((f64::MAX, f64::MIN), |(a, b), u| (a.min(u), b.max(u)));
                (b - a) * (f - e)
            })
            .fold(f64::MAX, f64::min)
    }

    proptest! {
        #[test]
        fn calipers_not_worse_than_sweep(pts in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 3..25)) {
            let r = min_area_rect(&pts).unwrap();
            prop_assert!(r.area() <= brute_area(&pts) + 1e-6);
        }

        #[test]
        fn hull_contains_all_points(pts in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 3..25)) {
            let h = convex_hull(&pts);
            if h.len() >= 3 {
                for &p in &pts {
                    for i in 0..h.len() {
                        prop_assert!(cross(h[i], h[(i + 1) % h.len()], p) >= -1e-9);
                    }
                }
            }
        }
    }
}

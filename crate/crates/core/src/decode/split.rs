//! Assigning tick observations to the x or y axis by 1-D DBSCAN.

use super::pairing::TickObservation;
use crate::error::{Error, Result, Stage};

#[derive(Debug, Clone, PartialEq)]
pub struct AxisAssignment {
    pub x_axis_ticks: Vec<TickObservation>,
    pub y_axis_ticks: Vec<TickObservation>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    /// Neighborhood radius as a fraction of the larger image side.
    pub eps_fraction: f64,
    pub min_pts: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            eps_fraction: 0.02,
            min_pts: 3,
        }
    }
}

/// DBSCAN on scalars. Returns a cluster id per input, `None` for noise.
/// Border points join the cluster of their nearest core point.
pub fn dbscan_1d(values: &[f64], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = values.len();
    let neighbors = |i: usize| (0..n).filter(move |&j| (values[i] - values[j]).abs() <= eps);
    let core: Vec<bool> = (0..n).map(|i| neighbors(i).count() >= min_pts).collect();
    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for start in 0..n {
        if !core[start] || label[start].is_some() {
            continue;
        }
        let mut stack = vec![start];
        label[start] = Some(next);
        while let Some(i) = stack.pop() {
            for j in neighbors(i) {
                if core[j] && label[j].is_none() {
                    label[j] = Some(next);
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        label[i] = (0..n)
            .filter(|&j| core[j] && (values[i] - values[j]).abs() <= eps)
            .min_by(|&a, &b| {
                (values[i] - values[a])
                    .abs()
                    .total_cmp(&(values[i] - values[b]).abs())
                    .then(a.cmp(&b))
            })
            .and_then(|j| label[j]);
    }
    label
}

/// Members of the cluster with the smallest spread among clusters of at
/// least `min_pts` members, if that spread is itself within `eps`; a long
/// chain of evenly spaced ticks is not a tight cluster.
fn tight_cluster(values: &[f64], eps: f64, min_pts: usize) -> Vec<bool> {
    let labels = dbscan_1d(values, eps, min_pts);
    let k = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut best: Option<(f64, usize)> = None;
    for c in 0..k {
        let members: Vec<f64> = (0..values.len())
            .filter(|&i| labels[i] == Some(c))
            .map(|i| values[i])
            .collect();
        if members.len() < min_pts {
            continue;
        }
        let spread = members.iter().cloned().fold(f64::MIN, f64::max)
            - members.iter().cloned().fold(f64::MAX, f64::min);
        if spread <= eps && best.is_none_or(|b| spread < b.0) {
            best = Some((spread, c));
        }
    }
    labels
        .iter()
        .map(|&l| best.is_some_and(|b| l == Some(b.1)))
        .collect()
}

fn median(v: &mut [f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Split ticks into axes. The y-axis ticks share a pixel x and form the
/// tight cluster of x coordinates; the x-axis ticks likewise in y. A tick in
/// both clusters (a corner) or in neither goes to the axis whose inferred
/// line is nearer.
pub fn split_axes(
    ticks: &[TickObservation],
    image_size: (u32, u32),
    cfg: &SplitConfig,
) -> Result<AxisAssignment> {
    if ticks.len() < 4 {
        return Err(Error::decode(
            Stage::AxisSplit,
            format!("{} tick observations, need at least 4", ticks.len()),
        ));
    }
    let eps = cfg.eps_fraction * image_size.0.max(image_size.1) as f64;
    let xs: Vec<f64> = ticks.iter().map(|t| t.mark_center.x).collect();
    let ys: Vec<f64> = ticks.iter().map(|t| t.mark_center.y).collect();
    let cluster = |v: &[f64]| {
        let c = tight_cluster(v, eps, cfg.min_pts);
        // an axis carrying only two ticks cannot form a cluster of three
        if c.iter().any(|&b| b) || cfg.min_pts <= 2 {
            c
        } else {
            tight_cluster(v, eps, 2)
        }
    };
    let on_y = cluster(&xs);
    let on_x = cluster(&ys);

    let mut y_line_x: Vec<f64> = (0..ticks.len())
        .filter(|&i| on_y[i])
        .map(|i| xs[i])
        .collect();
    let mut x_line_y: Vec<f64> = (0..ticks.len())
        .filter(|&i| on_x[i])
        .map(|i| ys[i])
        .collect();
    let (y_line, x_line) = (median(&mut y_line_x), median(&mut x_line_y));

    let mut out = AxisAssignment {
        x_axis_ticks: Vec::new(),
        y_axis_ticks: Vec::new(),
    };
    for (i, t) in ticks.iter().enumerate() {
        let to_y = match (on_x[i], on_y[i]) {
            (true, false) => false,
            (false, true) => true,
            _ => match (x_line, y_line) {
                (Some(xl), Some(yl)) => (xs[i] - yl).abs() < (ys[i] - xl).abs(),
                (None, Some(_)) => true,
                (Some(_), None) => false,
                (None, None) => {
                    return Err(Error::decode(
                        Stage::AxisSplit,
                        "no tick cluster on either axis",
                    ));
                }
            },
        };
        if to_y {
            out.y_axis_ticks.push(*t);
        } else {
            out.x_axis_ticks.push(*t);
        }
    }
    for (name, n) in [("x", out.x_axis_ticks.len()), ("y", out.y_axis_ticks.len())] {
        if n < 2 {
            return Err(Error::decode(
                Stage::AxisSplit,
                format!("{name} axis has {n} ticks, cannot fit a line"),
            ));
        }
    }
    Ok(out)
}

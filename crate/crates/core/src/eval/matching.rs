//! Point matching under the 2%-of-range criterion, and precision/recall/F1.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChartPoint, DataTable};

/// Largest allowed deviation per axis, as a fraction of the true range.
pub const MATCH_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MatchResult {
    /// `(pred index, true index)` in the order they were matched.
    pub matched_pairs: Vec<(usize, usize)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_true: Vec<usize>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.matched_pairs.len()
    }
}

/// Per-axis extent of the true points; both must be positive.
pub fn true_ranges(truth: &DataTable) -> Result<(f64, f64)> {
    if truth.is_empty() {
        return Err(Error::Evaluation("no true points".into()));
    }
    let span = |f: fn(&ChartPoint) -> f64| {
        let lo = truth.rows.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = truth.rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let (rx, ry) = (span(|p| p.x), span(|p| p.y));
    if !(rx > 0.0 && ry > 0.0) {
        return Err(Error::Evaluation(
            "zero true range on an axis, the match criterion is undefined".into(),
        ));
    }
    Ok((rx, ry))
}

/// Normalized deviations of `p` from `t` on each axis.
pub fn deviations(p: &ChartPoint, t: &ChartPoint, ranges: (f64, f64)) -> (f64, f64) {
    ((p.x - t.x).abs() / ranges.0, (p.y - t.y).abs() / ranges.1)
}

pub fn compatible(p: &ChartPoint, t: &ChartPoint, ranges: (f64, f64)) -> bool {
    let (dx, dy) = deviations(p, t, ranges);
    dx <= MATCH_TOLERANCE && dy <= MATCH_TOLERANCE
}

/// Repeatedly match the globally closest remaining pair (distance is the
/// larger normalized deviation) while it meets the criterion. Equal
/// distances go to the smaller prediction index, then the smaller true index.
pub fn match_points(pred: &DataTable, truth: &DataTable) -> Result<MatchResult> {
    let ranges = true_ranges(truth)?;
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (pi, p) in pred.rows.iter().enumerate() {
        for (ti, t) in truth.rows.iter().enumerate() {
            let (dx, dy) = deviations(p, t, ranges);
            if dx <= MATCH_TOLERANCE && dy <= MATCH_TOLERANCE {
                cand.push((dx.max(dy), pi, ti));
            }
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut pred_used = vec![false; pred.len()];
    let mut true_used = vec![false; truth.len()];
    let mut out = MatchResult::default();
    for (_, pi, ti) in cand {
        if !pred_used[pi] && !true_used[ti] {
            pred_used[pi] = true;
            true_used[ti] = true;
            out.matched_pairs.push((pi, ti));
        }
    }
    out.unmatched_pred = (0..pred.len()).filter(|&i| !pred_used[i]).collect();
    out.unmatched_true = (0..truth.len()).filter(|&i| !true_used[i]).collect();
    Ok(out)
}

/// `(precision, recall, f1)`, each 0 when its denominator is.
pub fn prf(m: &MatchResult) -> (f64, f64, f64) {
    let tp = m.true_positives() as f64;
    let ratio = |d: f64| if d > 0.0 { tp / d } else { 0.0 };
    let p = ratio(tp + m.unmatched_pred.len() as f64);
    let r = ratio(tp + m.unmatched_true.len() as f64);
    // harmonic mean written as 2TP / (2TP + FP + FN), which keeps exact
    // ratios such as 0.8 exact at the success threshold
    let f1 = ratio(0.5 * (2.0 * tp + (m.unmatched_pred.len() + m.unmatched_true.len()) as f64));
    (p, r, f1)
}

/// Size of a maximum matching in the compatibility graph, by exhaustive
/// search. Exponential; intended as a reference on small instances.
pub fn brute_force_max_matching(pred: &DataTable, truth: &DataTable) -> Result<usize> {
    let ranges = true_ranges(truth)?;
    let adj: Vec<Vec<bool>> = pred
        .rows
        .iter()
        .map(|p| {
            truth
                .rows
                .iter()
                .map(|t| compatible(p, t, ranges))
                .collect()
        })
        .collect();
    fn go(i: usize, adj: &[Vec<bool>], used: &mut Vec<bool>) -> usize {
        if i == adj.len() {
            return 0;
        }
        let mut best = go(i + 1, adj, used);
        for t in 0..used.len() {
            if adj[i][t] && !used[t] {
                used[t] = true;
                best = best.max(1 + go(i + 1, adj, used));
                used[t] = false;
            }
        }
        best
    }
    Ok(go(0, &adj, &mut vec![false; truth.len()]))
}

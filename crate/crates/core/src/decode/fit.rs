//! Per-axis affine fits `value = alpha * pixel + beta`.
//!
//! All fitters take `(pixel, value)` pairs. Degenerate input (fewer than
//! two ticks, or every tick at one pixel coordinate) is an error.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Ransac,
    TheilSen,
    Lad,
    Ols2,
}

impl FitMethod {
    pub const ALL: [FitMethod; 4] = [
        FitMethod::Ransac,
        FitMethod::TheilSen,
        FitMethod::Lad,
        FitMethod::Ols2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitMethod::Ransac => "ransac",
            FitMethod::TheilSen => "theilsen",
            FitMethod::Lad => "lad",
            FitMethod::Ols2 => "ols2",
        }
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FitMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FitMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown fit method {s:?} (ransac, theilsen, lad, ols2)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RansacConfig {
    /// Random pairs drawn when there are too many ticks to try every pair.
    pub n_iterations: usize,
    pub sample_size: usize,
    pub r_max_divisor: f64,
    pub seed: u64,
}

/// Above this many ticks, pairs are sampled instead of enumerated.
pub const EXHAUSTIVE_LIMIT: usize = 20;

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            n_iterations: 200,
            sample_size: 2,
            r_max_divisor: 50.0,
            seed: 0,
        }
    }
}

impl RansacConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iterations < 1 {
            return Err(Error::Config("n_iterations must be at least 1".into()));
        }
        if self.sample_size != 2 {
            return Err(Error::Config("sample_size must be 2 for a line".into()));
        }
        if !(self.r_max_divisor > 0.0 && self.r_max_divisor.is_finite()) {
            return Err(Error::Config("r_max_divisor must be positive".into()));
        }
        Ok(())
    }
}

/// Result of one axis fit. `inliers` is set by RANSAC only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisFit {
    pub alpha: f64,
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inliers: Option<Vec<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

impl AxisFit {
    fn line(alpha: f64, beta: f64) -> Self {
        AxisFit {
            alpha,
            beta,
            inliers: None,
            r_max: None,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Inlier threshold on squared residuals: the squared median absolute
/// deviation of the tick values over `divisor`.
pub fn r_max(values: &[f64], divisor: f64) -> f64 {
    let mut v = values.to_vec();
    let m = median(&mut v);
    let mut dev: Vec<f64> = values.iter().map(|x| (x - m).abs()).collect();
    let mad = median(&mut dev);
    mad * mad / divisor
}

fn check(ticks: &[(f64, f64)]) -> Result<()> {
    if ticks.len() < 2 {
        return Err(Error::DegenerateAxis(format!(
            "{} ticks, need 2",
            ticks.len()
        )));
    }
    if ticks.iter().all(|t| t.0 == ticks[0].0) {
        return Err(Error::DegenerateAxis("all pixel coordinates equal".into()));
    }
    Ok(())
}

/// Ordinary least squares, centered for accuracy.
fn least_squares(ticks: &[(f64, f64)]) -> (f64, f64) {
    let n = ticks.len() as f64;
    let mp = ticks.iter().map(|t| t.0).sum::<f64>() / n;
    let mv = ticks.iter().map(|t| t.1).sum::<f64>() / n;
    let sxy: f64 = ticks.iter().map(|t| (t.0 - mp) * (t.1 - mv)).sum();
    let sxx: f64 = ticks.iter().map(|t| (t.0 - mp).powi(2)).sum();
    let alpha = sxy / sxx;
    (alpha, mv - alpha * mp)
}

fn through(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let alpha = (b.1 - a.1) / (b.0 - a.0);
    (alpha, a.1 - alpha * a.0)
}

fn residual(line: (f64, f64), t: (f64, f64)) -> f64 {
    t.1 - (line.0 * t.0 + line.1)
}

pub fn fit_axis_ransac(ticks: &[(f64, f64)], cfg: &RansacConfig) -> Result<AxisFit> {
    cfg.validate()?;
    check(ticks)?;
    let n = ticks.len();
    let values: Vec<f64> = ticks.iter().map(|t| t.1).collect();
    let r = r_max(&values, cfg.r_max_divisor);

    let pairs: Vec<(usize, usize)> = if n <= EXHAUSTIVE_LIMIT {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()
    } else {
        let mut rng = seed::rng(cfg.seed);
        (0..cfg.n_iterations)
            .map(|_| {
                let i = rng.random_range(0..n);
                let j = (i + rng.random_range(1..n)) % n;
                (i.min(j), i.max(j))
            })
            .collect()
    };

    // score: more inliers first, then smaller inlier squared error; the
    // first pair reaching a score keeps it. Errors within rounding of each
    // other tie, so the choice does not hinge on the last few bits.
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tie = 1e-20 * n as f64 * scale * scale;
    let mut best: Option<(usize, f64, (f64, f64))> = None;
    for (i, j) in pairs {
        if ticks[i].0 == ticks[j].0 {
            continue;
        }
        let line = through(ticks[i], ticks[j]);
        let (mut count, mut sse) = (0usize, 0.0);
        for &t in ticks {
            let e = residual(line, t).powi(2);
            if e <= r {
                count += 1;
                sse += e;
            }
        }
        let better = best.is_none_or(|(bc, bs, _)| count > bc || (count == bc && sse < bs - tie));
        if better {
            best = Some((count, sse, line));
        }
    }
    let (count, _, line) =
        best.ok_or_else(|| Error::DegenerateAxis("no pair with distinct pixels".into()))?;
    if count < 2 {
        return Err(Error::DegenerateAxis(format!(
            "best model has {count} inliers"
        )));
    }
    let support: Vec<(f64, f64)> = ticks
        .iter()
        .copied()
        .filter(|&t| residual(line, t).powi(2) <= r)
        .collect();
    let refit = if support.iter().all(|t| t.0 == support[0].0) {
        line
    } else {
        least_squares(&support)
    };
    let inliers: Vec<bool> = ticks
        .iter()
        .map(|&t| residual(refit, t).powi(2) <= r)
        .collect();
    Ok(AxisFit {
        alpha: refit.0,
        beta: refit.1,
        inliers: Some(inliers),
        r_max: Some(r),
    })
}

/// Median of pairwise slopes; intercept is the median of `value - alpha * pixel`.
pub fn fit_axis_theilsen(ticks: &[(f64, f64)]) -> Result<AxisFit> {
    check(ticks)?;
    let mut slopes = Vec::new();
    for i in 0..ticks.len() {
        for j in i + 1..ticks.len() {
            if ticks[i].0 != ticks[j].0 {
                slopes.push(through(ticks[i], ticks[j]).0);
            }
        }
    }
    let alpha = median(&mut slopes);
    let mut offsets: Vec<f64> = ticks.iter().map(|t| t.1 - alpha * t.0).collect();
    Ok(AxisFit::line(alpha, median(&mut offsets)))
}

/// Least absolute deviations by iteratively reweighted least squares.
///
/// IRLS only approaches the optimum, whose line passes through two of the
/// ticks; the converged line is therefore snapped to the best line through
/// two of its closest ticks when that is at least as good.
pub fn fit_axis_lad(ticks: &[(f64, f64)]) -> Result<AxisFit> {
    check(ticks)?;
    let spread = ticks
        .iter()
        .map(|t| t.1.abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let floor = 1e-12 * spread;
    let mut line = least_squares(ticks);
    for _ in 0..200 {
        let w: Vec<f64> = ticks
            .iter()
            .map(|&t| 1.0 / residual(line, t).abs().max(floor))
            .collect();
        let sw: f64 = w.iter().sum();
        let mp = ticks.iter().zip(&w).map(|(t, w)| w * t.0).sum::<f64>() / sw;
        let mv = ticks.iter().zip(&w).map(|(t, w)| w * t.1).sum::<f64>() / sw;
        let sxy: f64 = ticks
            .iter()
            .zip(&w)
            .map(|(t, w)| w * (t.0 - mp) * (t.1 - mv))
            .sum();
        let sxx: f64 = ticks
            .iter()
            .zip(&w)
            .map(|(t, w)| w * (t.0 - mp).powi(2))
            .sum();
        if sxx <= 0.0 {
            break;
        }
        let alpha = sxy / sxx;
        let next = (alpha, mv - alpha * mp);
        let done = (next.0 - line.0).abs() <= 1e-9 * line.0.abs().max(f64::MIN_POSITIVE);
        line = next;
        if done {
            break;
        }
    }

    let cost = |l: (f64, f64)| ticks.iter().map(|&t| residual(l, t).abs()).sum::<f64>();
    let mut order: Vec<usize> = (0..ticks.len()).collect();
    order.sort_by(|&a, &b| {
        residual(line, ticks[a])
            .abs()
            .total_cmp(&residual(line, ticks[b]).abs())
            .then(a.cmp(&b))
    });
    let near = &order[..order.len().min(4)];
    let mut best = (line, cost(line));
    let mut snapped: Option<((f64, f64), f64)> = None;
    for (k, &i) in near.iter().enumerate() {
        for &j in &near[k + 1..] {
            let (a, b) = if ticks[i].0 < ticks[j].0 {
                (i, j)
            } else {
                (j, i)
            };
            if ticks[a].0 == ticks[b].0 {
                continue;
            }
            let l = through(ticks[a], ticks[b]);
            let c = cost(l);
            if snapped.is_none_or(|s| c < s.1) {
                snapped = Some((l, c));
            }
        }
    }
    if let Some(s) = snapped {
        if s.1 <= best.1 * (1.0 + 1e-9) {
            best = s;
        }
    }
    Ok(AxisFit::line(best.0 .0, best.0 .1))
}

/// Exact line through the ticks with the smallest and largest pixel
/// coordinate (first occurrence on ties).
pub fn fit_axis_ols2(ticks: &[(f64, f64)]) -> Result<AxisFit> {
    check(ticks)?;
    let lo = (0..ticks.len())
        .min_by(|&a, &b| ticks[a].0.total_cmp(&ticks[b].0).then(a.cmp(&b)))
        .unwrap();
    let hi = (0..ticks.len())
        .max_by(|&a, &b| ticks[a].0.total_cmp(&ticks[b].0).then(b.cmp(&a)))
        .unwrap();
    let (alpha, beta) = through(ticks[lo], ticks[hi]);
    Ok(AxisFit::line(alpha, beta))
}

pub fn fit_axis(method: FitMethod, ticks: &[(f64, f64)], ransac: &RansacConfig) -> Result<AxisFit> {
    match method {
        FitMethod::Ransac => fit_axis_ransac(ticks, ransac),
        FitMethod::TheilSen => fit_axis_theilsen(ticks),
        FitMethod::Lad => fit_axis_lad(ticks),
        FitMethod::Ols2 => fit_axis_ols2(ticks),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line_ticks(alpha: f64, beta: f64, px: &[f64]) -> Vec<(f64, f64)> {
        px.iter().map(|&p| (p, alpha * p + beta)).collect()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn threshold_of_evenly_spaced_ticks() {
        assert_eq!(r_max(&[0.0, 10.0, 20.0, 30.0, 40.0], 50.0), 2.0);
        // MAD of {1,2,3,4,100}: median 3, deviations {2,1,0,1,97}
        assert_eq!(r_max(&[1.0, 2.0, 3.0, 4.0, 100.0], 50.0), 1.0 / 50.0);
    }

    #[test]
    fn exact_line_all_methods() {
        let t = line_ticks(-12.5, 7500.0, &[100.0, 180.0, 260.0, 340.0, 420.0]);
        for m in FitMethod::ALL {
            let f = fit_axis(m, &t, &RansacConfig::default()).unwrap();
            assert!(rel(f.alpha, -12.5) <= 1e-9, "{m}");
            assert!(rel(f.beta, 7500.0) <= 1e-9, "{m}");
        }
        let f = fit_axis_ransac(&t, &RansacConfig::default()).unwrap();
        assert!(f.inliers.unwrap().iter().all(|&b| b));
    }

    #[test]
    fn dropped_minus_is_an_outlier() {
        // y axis with values -5000..7500; "-5000" read as "5000"
        let px = [500.0, 420.0, 340.0, 260.0, 180.0, 100.0];
        let clean = line_ticks(-31.25, 10625.0, &px);
        let mut bad = clean.clone();
        assert_eq!(bad[0].1, -5000.0);
        bad[0].1 = 5000.0;
        let f = fit_axis_ransac(&bad, &RansacConfig::default()).unwrap();
        let reference = fit_axis_ransac(&clean[1..], &RansacConfig::default()).unwrap();
        assert!(rel(f.alpha, reference.alpha) <= 1e-9);
        assert!(rel(f.beta, reference.beta) <= 1e-9);
        assert_eq!(f.inliers.unwrap(), [false, true, true, true, true, true]);
        // the extreme tick is the corrupted one, so the two-point line is off
        let o = fit_axis_ols2(&bad).unwrap();
        assert!(rel(o.alpha, -31.25) > 0.1);
    }

    #[test]
    fn one_gross_outlier_among_seven() {
        let px = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0];
        let clean = line_ticks(2.0, 1.0, &px);
        for (at, interior) in [(3usize, true), (0, false)] {
            let mut t = clean.clone();
            t[at].1 += 1000.0;
            let ts = fit_axis_theilsen(&t).unwrap();
            assert!((ts.alpha - 2.0).abs() <= 1e-6 && (ts.beta - 1.0).abs() <= 1e-6);
            let o = fit_axis_ols2(&t).unwrap();
            assert_eq!((o.alpha - 2.0).abs() <= 1e-9, interior);
        }
    }

    #[test]
    fn two_ticks_every_method_interpolates() {
        let t = [(3.0, 9.0), (7.0, 1.0)];
        for m in FitMethod::ALL {
            let f = fit_axis(m, &t, &RansacConfig::default()).unwrap();
            assert!(
                (f.alpha + 2.0).abs() < 1e-12 && (f.beta - 15.0).abs() < 1e-12,
                "{m}"
            );
        }
    }

    #[test]
    fn lad_ignores_one_outlier() {
        let mut t = line_ticks(0.5, -3.0, &[0.0, 1.0, 2.0, 3.0, 4.0]);
        t[2].1 += 50.0;
        let f = fit_axis_lad(&t).unwrap();
        assert!((f.alpha - 0.5).abs() < 1e-9 && (f.beta + 3.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_inputs() {
        for m in FitMethod::ALL {
            assert!(matches!(
                fit_axis(m, &[(5.0, 1.0), (5.0, 2.0)], &RansacConfig::default()),
                Err(Error::DegenerateAxis(_))
            ));
            assert!(matches!(
                fit_axis(m, &[(5.0, 1.0)], &RansacConfig::default()),
                Err(Error::DegenerateAxis(_))
            ));
        }
    }

    #[test]
    fn sampled_pairs_are_seeded() {
        let mut t = line_ticks(1.5, 2.0, &(0..30).map(f64::from).collect::<Vec<_>>());
        t[4].1 += 100.0;
        let cfg = RansacConfig {
            seed: 9,
            ..Default::default()
        };
        let a = fit_axis_ransac(&t, &cfg).unwrap();
        assert_eq!(a, fit_axis_ransac(&t, &cfg).unwrap());
        assert!(!a.inliers.unwrap()[4]);
    }

    #[test]
    fn method_names_round_trip() {
        for m in FitMethod::ALL {
            assert_eq!(m.name().parse::<FitMethod>().unwrap(), m);
        }
        assert!("ols".parse::<FitMethod>().is_err());
    }

    fn tick_set() -> impl Strategy<Value = Vec<(f64, f64)>> {
        (
            2usize..12,
            -100.0..100.0f64,
            -1e4..1e4f64,
            prop::collection::vec((0.0..800.0f64, -50.0..50.0f64), 12),
        )
            .prop_map(|(n, a, b, raw): (usize, f64, f64, Vec<(f64, f64)>)| {
                raw[..n]
                    .iter()
                    .map(|&(p, e)| (p, a * p + b + e))
                    .collect::<Vec<_>>()
            })
            .prop_filter("distinct pixels", |t: &Vec<(f64, f64)>| {
                t.iter().any(|x| x.0 != t[0].0)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn scaling_values_scales_the_line(t in tick_set(), k in prop_oneof![-1e3..-1e-3f64, 1e-3..1e3f64]) {
            let scaled: Vec<_> = t.iter().map(|&(p, v)| (p, k * v)).collect();
            for m in FitMethod::ALL {
                let a = fit_axis(m, &t, &RansacConfig::default()).unwrap();
                let b = fit_axis(m, &scaled, &RansacConfig::default()).unwrap();
                let tol = 1e-9 * (a.alpha.abs() * 800.0 + a.beta.abs()).max(1e-300);
                prop_assert!((b.alpha - k * a.alpha).abs() <= 1e-9 * (k * a.alpha).abs().max(tol / 800.0), "{} alpha", m);
                prop_assert!((b.beta - k * a.beta).abs() <= 1e-9 * (k * a.beta).abs().max(k.abs() * tol), "{} beta", m);
            }
        }

        #[test]
        fn shifting_pixels_moves_the_intercept(t in tick_set(), d in -500.0..500.0f64) {
            let shifted: Vec<_> = t.iter().map(|&(p, v)| (p + d, v)).collect();
            for m in FitMethod::ALL {
                let a = fit_axis(m, &t, &RansacConfig::default()).unwrap();
                let b = fit_axis(m, &shifted, &RansacConfig::default()).unwrap();
                let scale = a.alpha.abs() * 1300.0 + a.beta.abs();
                prop_assert!((b.alpha - a.alpha).abs() <= 1e-9 * a.alpha.abs().max(scale / 1300.0), "{} alpha", m);
                prop_assert!((b.beta - (a.beta - a.alpha * d)).abs() <= 1e-9 * scale, "{} beta", m);
            }
        }

        #[test]
        fn ransac_inliers_match_threshold(t in tick_set()) {
            let f = fit_axis_ransac(&t, &RansacConfig::default()).unwrap();
            let r = f.r_max.unwrap();
            for (k, &(p, v)) in t.iter().enumerate() {
                prop_assert_eq!(f.inliers.as_ref().unwrap()[k], (v - (f.alpha * p + f.beta)).powi(2) <= r);
            }
        }

        #[test]
        fn ransac_without_outliers_is_least_squares(alpha in -50.0..50.0f64, beta in -1e3..1e3f64, px in prop::collection::btree_set(0u32..800, 2..10)) {
            let t: Vec<_> = px.iter().map(|&p| (p as f64, alpha * p as f64 + beta)).collect();
            let f = fit_axis_ransac(&t, &RansacConfig::default()).unwrap();
            let (a, b) = least_squares(&t);
            prop_assert!((f.alpha - a).abs() <= 1e-9 * a.abs().max(1.0));
            prop_assert!((f.beta - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }
}

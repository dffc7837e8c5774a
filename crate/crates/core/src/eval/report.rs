//! Per-chart scores and their corpus summary.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ap::PrCurve;
use super::matching::{match_points, prf};
use crate::error::{Result, Stage};
use crate::model::{DataTable, ObjectClass};

/// A chart counts as extracted when its F1 is strictly above this.
pub const SUCCESS_F1: f64 = 0.8;

pub const F1_BINS: usize = 10;

/// What the pipeline produced for one chart.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Table(DataTable),
    Failed(Stage),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartEval {
    pub stem: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub failure_stage: Option<Stage>,
    pub n_pred: usize,
    pub n_true: usize,
}

pub fn evaluate_chart(stem: &str, outcome: &Outcome, truth: &DataTable) -> ChartEval {
    let failed = |stage| ChartEval {
        stem: stem.to_owned(),
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
        success: false,
        failure_stage: Some(stage),
        n_pred: 0,
        n_true: truth.len(),
    };
    match outcome {
        Outcome::Failed(stage) => failed(*stage),
        Outcome::Table(pred) => match match_points(pred, truth) {
            Ok(m) => {
                let (precision, recall, f1) = prf(&m);
                ChartEval {
                    stem: stem.to_owned(),
                    precision,
                    recall,
                    f1,
                    success: f1 > SUCCESS_F1,
                    failure_stage: None,
                    n_pred: pred.len(),
                    n_true: truth.len(),
                }
            }
            Err(e) => {
                log::warn!("{stem}: {e}");
                failed(Stage::Evaluation)
            }
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_charts: usize,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub avg_f1: f64,
    pub success_rate: f64,
    /// Chart counts per F1 decile; the last bin includes 1.0.
    pub f1_histogram: Vec<usize>,
    pub failure_stages: BTreeMap<Stage, usize>,
}

pub fn summarize(charts: &[ChartEval]) -> CorpusSummary {
    let n = charts.len();
    let mean = |f: fn(&ChartEval) -> f64| {
        if n == 0 {
            0.0
        } else {
            charts.iter().map(f).sum::<f64>() / n as f64
        }
    };
    let mut hist = vec![0; F1_BINS];
    let mut stages = BTreeMap::new();
    for c in charts {
        hist[((c.f1 * F1_BINS as f64) as usize).min(F1_BINS - 1)] += 1;
        if let Some(s) = c.failure_stage {
            *stages.entry(s).or_insert(0) += 1;
        }
    }
    CorpusSummary {
        n_charts: n,
        avg_precision: mean(|c| c.precision),
        avg_recall: mean(|c| c.recall),
        avg_f1: mean(|c| c.f1),
        success_rate: mean(|c| c.success as u8 as f64),
        f1_histogram: hist,
        failure_stages: stages,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassAp {
    pub class: ObjectClass,
    pub iou_threshold: f64,
    pub curve: PrCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub charts: Vec<ChartEval>,
    pub corpus: CorpusSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detector: Option<Vec<ClassAp>>,
}

impl EvalReport {
    pub fn new(charts: Vec<ChartEval>, detector: Option<Vec<ClassAp>>) -> Self {
        let corpus = summarize(&charts);
        EvalReport {
            charts,
            corpus,
            detector,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-chart rows: `stem,precision,recall,f1,success,failure_stage`.
    pub fn charts_csv(&self) -> String {
        let mut s = String::from("stem,precision,recall,f1,success,failure_stage\n");
        for c in &self.charts {
            let stage = c.failure_stage.map(|st| st.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{:?},{:?},{:?},{},{}\n",
                c.stem, c.precision, c.recall, c.f1, c.success, stage
            ));
        }
        s
    }

    /// PR curve points of every class: `class,threshold,recall,precision`.
    pub fn pr_curves_csv(&self) -> Option<String> {
        let det = self.detector.as_ref()?;
        let mut s = String::from("class,threshold,recall,precision\n");
        for c in det {
            for p in &c.curve.points {
                s.push_str(&format!(
                    "{},{:?},{:?},{:?}\n",
                    c.class.name(),
                    p.threshold,
                    p.recall,
                    p.precision
                ));
            }
        }
        Some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ChartPoint;

    fn table(p: &[(f64, f64)]) -> DataTable {
        DataTable::new(p.iter().map(|&(x, y)| ChartPoint::new(x, y)).collect()).unwrap()
    }

    #[test]
    fn success_is_strictly_above_threshold() {
        let truth = table(&[
            (0.0, 0.0),
            (10.0, 10.0),
            (20.0, 20.0),
            (30.0, 30.0),
            (40.0, 40.0),
        ]);
        // 4 of 5 found, one spurious: precision = recall = 0.8
        let pred = table(&[
            (0.0, 0.0),
            (10.0, 10.0),
            (20.0, 20.0),
            (30.0, 30.0),
            (90.0, 0.0),
        ]);
        let e = evaluate_chart("c", &Outcome::Table(pred), &truth);
        assert!((e.f1 - 0.8).abs() < 1e-12);
        assert!(!e.success);
        let e = evaluate_chart("c", &Outcome::Table(truth.clone()), &truth);
        assert!(e.success);
    }

    #[test]
    fn failures_are_tallied_by_stage() {
        let truth = table(&[(0.0, 0.0), (1.0, 1.0)]);
        let charts = vec![
            evaluate_chart("a", &Outcome::Failed(Stage::AxisSplit), &truth),
            evaluate_chart("b", &Outcome::Table(truth.clone()), &truth),
            evaluate_chart("c", &Outcome::Failed(Stage::AxisSplit), &truth),
        ];
        let s = summarize(&charts);
        assert_eq!(s.failure_stages.get(&Stage::AxisSplit), Some(&2));
        assert!((s.success_rate - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.f1_histogram[0], 2);
        assert_eq!(s.f1_histogram[9], 1);
        let json = EvalReport::new(charts, None).to_json().unwrap();
        assert!(json.contains("\"axis_split\": 2"));
    }

    #[test]
    fn empty_corpus_summary() {
        let s = summarize(&[]);
        assert_eq!((s.n_charts, s.success_rate), (0, 0.0));
    }
}

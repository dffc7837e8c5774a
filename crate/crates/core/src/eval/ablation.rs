//! The per-chart pipeline and the method comparison built on it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::ap::{class_pairs, pooled_ap};
use super::report::{evaluate_chart, summarize, ChartEval, ClassAp, Outcome};
use crate::decode::{decode_scene, DecodeConfig, FitMethod};
use crate::error::{Result, Stage};
use crate::model::{DataTable, Detection, ObjectClass, Scene};
use crate::raster::{render, scene_from_image, DetectorConfig};
use crate::seed::derive_seed;
use crate::synth::bundle::CorpusEntry;
use crate::synth::noise::{corrupt, NoiseConfig};
use crate::synth::GroundTruthChart;

/// Stream index separating the noise seed from the chart's own draws.
const NOISE_STREAM: u64 = 0x006e_6f69_7365;

pub fn noise_seed(chart: &GroundTruthChart) -> u64 {
    derive_seed(chart.spec.seed, NOISE_STREAM)
}

/// Where the decoder's scene comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Ground-truth annotations.
    Scenes,
    /// Detection on the rendered image.
    Images { deskew: bool },
}

/// Scene the decoder sees for `chart`, with `noise` applied. Image
/// detection failures surface as errors at the detection stage.
pub fn input_scene(
    chart: &GroundTruthChart,
    source: Source,
    noise: &NoiseConfig,
    detector: &DetectorConfig,
) -> Result<Scene> {
    let scene = match source {
        Source::Scenes => chart.annotations().clone(),
        Source::Images { deskew } => {
            let img = render(chart)?;
            scene_from_image(
                &img,
                &DetectorConfig {
                    deskew,
                    ..*detector
                },
            )?
        }
    };
    Ok(corrupt(&scene, noise, noise_seed(chart)))
}

pub fn truth_table(chart: &GroundTruthChart) -> DataTable {
    DataTable {
        rows: chart.true_points.clone(),
    }
}

pub fn decode_outcome(scene: &Result<Scene>, cfg: &DecodeConfig) -> Outcome {
    match scene.as_ref().map(|s| decode_scene(s, cfg)) {
        Ok(Ok(d)) => Outcome::Table(d.table),
        Ok(Err(e)) => Outcome::Failed(e.stage()),
        Err(e) => Outcome::Failed(e.stage()),
    }
}

/// Per-class PR curves over a corpus of `(detected, truth)` scenes.
pub fn detector_report(
    pairs: &[(Vec<Detection>, Vec<Detection>)],
    iou_threshold: f64,
) -> Vec<ClassAp> {
    ObjectClass::ALL
        .into_iter()
        .map(|class| {
            let per = class_pairs(pairs, class);
            let refs: Vec<(&[Detection], &[Detection])> = per
                .iter()
                .map(|(p, t)| (p.as_slice(), t.as_slice()))
                .collect();
            ClassAp {
                class,
                iou_threshold,
                curve: pooled_ap(&refs, iou_threshold),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variant {
    pub name: String,
    pub method: FitMethod,
    pub source: Source,
}

impl Variant {
    pub fn new(method: FitMethod, source: Source) -> Self {
        let name = match source {
            Source::Images { deskew: false } => format!("{method}_no_deskew"),
            _ => method.name().to_owned(),
        };
        Variant {
            name,
            method,
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub method: String,
    pub success_rate: f64,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub n_charts: usize,
    pub failure_stages: BTreeMap<Stage, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationTable {
    pub rows: Vec<AblationRow>,
}

impl AblationTable {
    pub fn row(&self, method: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    /// `method,success_rate,avg_precision,avg_recall`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("method,success_rate,avg_precision,avg_recall\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:?},{:?},{:?}\n",
                r.method, r.success_rate, r.avg_precision, r.avg_recall
            ));
        }
        s
    }

    /// Aligned table for terminals, rates as percentages.
    pub fn to_text(&self) -> String {
        let w = self
            .rows
            .iter()
            .map(|r| r.method.len())
            .max()
            .unwrap_or(0)
            .max("method".len());
        let mut s = format!(
            "{:<w$}  {:>8}  {:>9}  {:>7}\n",
            "method", "success", "precision", "recall"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<w$}  {:>7.1}%  {:>8.1}%  {:>6.1}%\n",
                r.method,
                100.0 * r.success_rate,
                100.0 * r.avg_precision,
                100.0 * r.avg_recall
            ));
        }
        s
    }
}

/// Per-chart scores of every variant, in corpus order. Each source's scenes
/// are built once and shared by the variants reading them.
pub fn evaluate_variants(
    corpus: &[CorpusEntry],
    noise: &NoiseConfig,
    variants: &[Variant],
    decode: &DecodeConfig,
    detector: &DetectorConfig,
) -> Vec<Vec<ChartEval>> {
    let mut sources: Vec<Source> = variants.iter().map(|v| v.source).collect();
    sources.sort();
    sources.dedup();
    let mut out = vec![Vec::new(); variants.len()];
    for source in sources {
        let chosen: Vec<usize> = (0..variants.len())
            .filter(|&i| variants[i].source == source)
            .collect();
        let per_chart: Vec<Vec<ChartEval>> = corpus
            .par_iter()
            .map(|e| {
                let scene = input_scene(&e.chart, source, noise, detector);
                let truth = truth_table(&e.chart);
                chosen
                    .iter()
                    .map(|&i| {
                        let cfg = DecodeConfig {
                            method: variants[i].method,
                            ..*decode
                        };
                        evaluate_chart(&e.stem, &decode_outcome(&scene, &cfg), &truth)
                    })
                    .collect()
            })
            .collect();
        for (k, &i) in chosen.iter().enumerate() {
            out[i] = per_chart.iter().map(|c| c[k].clone()).collect();
        }
    }
    out
}

pub fn run_ablation(
    corpus: &[CorpusEntry],
    noise: &NoiseConfig,
    variants: &[Variant],
    decode: &DecodeConfig,
    detector: &DetectorConfig,
) -> AblationTable {
    let evals = evaluate_variants(corpus, noise, variants, decode, detector);
    let rows = variants
        .iter()
        .zip(evals)
        .map(|(v, charts)| {
            let s = summarize(&charts);
            AblationRow {
                method: v.name.clone(),
                success_rate: s.success_rate,
                avg_precision: s.avg_precision,
                avg_recall: s.avg_recall,
                n_charts: s.n_charts,
                failure_stages: s.failure_stages,
            }
        })
        .collect();
    AblationTable { rows }
}

//! On-disk corpus layout: one JSON bundle per chart plus a manifest of stems.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{chart_seed, generate_chart, GenerationProfile, GroundTruthChart};
use crate::error::{Error, Result};
use crate::model::Scene;

pub const MANIFEST: &str = "manifest.json";

pub fn stem(seed: u64) -> String {
    format!("chart_{seed}")
}

pub fn chart_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.json"))
}

pub fn scene_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.scene.json"))
}

pub fn image_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.png"))
}

/// A generated chart together with its file stem.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub stem: String,
    pub chart: GroundTruthChart,
    /// Layouts discarded before this chart was accepted; zero when read
    /// back from disk.
    pub rejected: u32,
}

/// Generate `n` charts with per-chart seeds derived from `corpus_seed`.
/// Output order and content do not depend on thread scheduling.
pub fn generate_corpus(
    n: usize,
    corpus_seed: u64,
    profile: &GenerationProfile,
) -> Result<Vec<CorpusEntry>> {
    profile.validate()?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = chart_seed(corpus_seed, i);
            let g = generate_chart(seed, profile)?;
            Ok(CorpusEntry {
                stem: stem(seed),
                chart: g.chart,
                rejected: g.rejected,
            })
        })
        .collect()
}

pub fn write_chart(dir: &Path, stem: &str, chart: &GroundTruthChart) -> Result<()> {
    fs::write(chart_path(dir, stem), serde_json::to_string_pretty(chart)?)?;
    fs::write(scene_path(dir, stem), chart.annotations().to_json()?)?;
    Ok(())
}

pub fn read_chart(dir: &Path, stem: &str) -> Result<GroundTruthChart> {
    let mut chart: GroundTruthChart =
        serde_json::from_str(&fs::read_to_string(chart_path(dir, stem))?)?;
    chart.spec.validate()?;
    chart.annotations = Some(Scene::from_json(&fs::read_to_string(scene_path(
        dir, stem,
    ))?)?);
    Ok(chart)
}

pub fn write_manifest(dir: &Path, stems: &[String]) -> Result<()> {
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(stems)?)?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Vec<String>> {
    let stems: Vec<String> = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    if let Some(bad) = stems
        .iter()
        .find(|s| s.is_empty() || s.contains(['/', '\\']))
    {
        return Err(Error::Config(format!("invalid manifest stem {bad:?}")));
    }
    Ok(stems)
}

/// Load every chart listed in the manifest, in manifest order.
pub fn read_corpus(dir: &Path) -> Result<Vec<CorpusEntry>> {
    read_manifest(dir)?
        .into_iter()
        .map(|stem| {
            let chart = read_chart(dir, &stem)?;
            Ok(CorpusEntry {
                stem,
                chart,
                rejected: 0,
            })
        })
        .collect()
}

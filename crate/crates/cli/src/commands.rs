use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use plotread::decode::{decode_scene, DecodeConfig, Decoded, FitMethod};
use plotread::eval::ablation::noise_seed;
use plotread::eval::{
    detector_report, evaluate_chart, run_ablation, truth_table, EvalReport, Outcome, Source,
    Variant,
};
use plotread::raster::{render, scene_from_image, DetectorConfig, GlyphSet, Image};
use plotread::synth::bundle::{
    self, generate_corpus, read_chart, read_manifest, write_chart, write_manifest, CorpusEntry,
};
use plotread::synth::{corrupt, GenerationProfile, NoiseConfig};
use plotread::{Scene, Stage};

use crate::args::{BenchArgs, BenchSource, DecodeArgs, EvalArgs, GenArgs, GlyphsArgs};
use crate::failure::{data, usage, Classify, CliResult};

pub fn decode_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.decode.json"))
}

pub fn table_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.csv"))
}

pub fn error_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.error.json"))
}

pub fn detected_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.detected.json"))
}

/// Written instead of a table when a chart cannot be decoded.
#[derive(Debug, Serialize, Deserialize)]
pub struct DecodeFailure {
    pub stem: String,
    pub stage: Stage,
    pub message: String,
}

/// Layout rejections of a `gen` run, written next to the manifest.
pub const GENERATION_STATS: &str = "generation.json";

#[derive(Debug, Serialize)]
struct GenerationStats {
    charts: usize,
    rejected_layouts: u64,
    rejection_rate: f64,
}

fn load_profile(arg: &str) -> CliResult<GenerationProfile> {
    let p = match arg {
        "default" => GenerationProfile::default(),
        "rotated" => GenerationProfile::rotated_labels(),
        path => {
            let s = fs::read_to_string(path).usage_err(format!("reading profile {path}"))?;
            GenerationProfile::from_json(&s).usage_err(format!("parsing profile {path}"))?
        }
    };
    p.validate().usage_err("invalid profile")?;
    Ok(p)
}

fn load_noise(arg: &str) -> CliResult<NoiseConfig> {
    match arg {
        "none" => Ok(NoiseConfig::none()),
        "default" => Ok(NoiseConfig::default()),
        path => {
            let s = fs::read_to_string(path).usage_err(format!("reading noise config {path}"))?;
            NoiseConfig::from_json(&s).usage_err(format!("parsing noise config {path}"))
        }
    }
}

fn check_conf(conf: f64) -> CliResult<()> {
    if (0.0..=1.0).contains(&conf) {
        Ok(())
    } else {
        Err(usage(format!("--conf {conf} outside [0, 1]")))
    }
}

fn require_dir(dir: &Path, what: &str) -> CliResult<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(usage(format!(
            "{what} directory {} does not exist",
            dir.display()
        )))
    }
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).usage_err(format!("creating {}", dir.display()))
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    fs::write(path, contents).data_err(format!("writing {}", path.display()))
}

fn remove_stale(path: &Path) -> CliResult<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() != std::io::ErrorKind::NotFound => {
            Err(e).data_err(format!("removing {}", path.display()))
        }
        _ => Ok(()),
    }
}

fn read_corpus(dir: &Path) -> CliResult<Vec<CorpusEntry>> {
    require_dir(dir, "corpus")?;
    let corpus = bundle::read_corpus(dir).data_err(format!("reading corpus {}", dir.display()))?;
    if corpus.is_empty() {
        return Err(data(format!("corpus {} is empty", dir.display())));
    }
    Ok(corpus)
}

pub fn cmd_gen(a: &GenArgs) -> CliResult<()> {
    let profile = load_profile(&a.profile)?;
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    create_dir(&a.out)?;
    let corpus = generate_corpus(a.n, a.seed, &profile).data_err("generating corpus")?;
    corpus.par_iter().try_for_each(|e| -> CliResult<()> {
        write_chart(&a.out, &e.stem, &e.chart).data_err(format!("writing {}", e.stem))?;
        if a.render {
            let img = render(&e.chart).data_err(format!("rendering {}", e.stem))?;
            let path = bundle::image_path(&a.out, &e.stem);
            img.save_png(&path)
                .data_err(format!("writing {}", path.display()))?;
        }
        Ok(())
    })?;
    let stems: Vec<String> = corpus.iter().map(|e| e.stem.clone()).collect();
    write_manifest(&a.out, &stems).data_err("writing manifest")?;
    let rejected: u64 = corpus.iter().map(|e| e.rejected as u64).sum();
    let stats = GenerationStats {
        charts: corpus.len(),
        rejected_layouts: rejected,
        rejection_rate: rejected as f64 / (rejected + corpus.len() as u64) as f64,
    };
    let json = serde_json::to_string_pretty(&stats).data_err("serializing generation stats")?;
    write(&a.out.join(GENERATION_STATS), json)?;
    info!(
        "generated {} charts in {} ({} layouts rejected, {:.1}%)",
        corpus.len(),
        a.out.display(),
        rejected,
        100.0 * stats.rejection_rate
    );
    Ok(())
}

/// Scene for one chart in the chosen mode, before noise.
fn input_scene(
    corpus: &Path,
    stem: &str,
    a: &DecodeArgs,
    detector: &DetectorConfig,
) -> CliResult<plotread::Result<Scene>> {
    if a.from_images {
        let path = bundle::image_path(corpus, stem);
        let img = Image::load_png(&path).data_err(format!("reading {}", path.display()))?;
        Ok(scene_from_image(&img, detector))
    } else {
        let path = bundle::scene_path(corpus, stem);
        let s = fs::read_to_string(&path).data_err(format!("reading {}", path.display()))?;
        Ok(Ok(
            Scene::from_json(&s).data_err(format!("parsing {}", path.display()))?
        ))
    }
}

fn decode_one(
    stem: &str,
    a: &DecodeArgs,
    noise: &NoiseConfig,
    cfg: &DecodeConfig,
    detector: &DetectorConfig,
) -> CliResult<bool> {
    let scene = input_scene(&a.corpus, stem, a, detector)?;
    let scene = match scene {
        Ok(s) if !noise.is_noiseless() => {
            // noise streams are keyed by the chart seed, as in `bench`
            let chart = read_chart(&a.corpus, stem).data_err(format!("reading chart {stem}"))?;
            Ok(corrupt(&s, noise, noise_seed(&chart)))
        }
        other => other,
    };
    if a.from_images {
        match &scene {
            Ok(s) => write(
                &detected_path(&a.out, stem),
                s.to_json().data_err("serializing scene")?,
            )?,
            Err(_) => remove_stale(&detected_path(&a.out, stem))?,
        }
    }
    let result = scene.and_then(|s| decode_scene(&s, cfg));
    match result {
        Ok(d) => {
            write(
                &decode_path(&a.out, stem),
                d.to_json().data_err("serializing decode")?,
            )?;
            write(&table_path(&a.out, stem), d.table.to_csv_string())?;
            remove_stale(&error_path(&a.out, stem))?;
            Ok(true)
        }
        Err(e) => {
            let f = DecodeFailure {
                stem: stem.to_string(),
                stage: e.stage(),
                message: e.to_string(),
            };
            debug!("{stem}: {}", f.message);
            let json = serde_json::to_string_pretty(&f).data_err("serializing failure")?;
            write(&error_path(&a.out, stem), json)?;
            remove_stale(&decode_path(&a.out, stem))?;
            remove_stale(&table_path(&a.out, stem))?;
            Ok(false)
        }
    }
}

pub fn cmd_decode(a: &DecodeArgs) -> CliResult<()> {
    check_conf(a.conf)?;
    let noise = load_noise(&a.noise)?;
    require_dir(&a.corpus, "corpus")?;
    let stems = read_manifest(&a.corpus).data_err("reading manifest")?;
    if stems.is_empty() {
        return Err(data("manifest lists no charts"));
    }
    create_dir(&a.out)?;
    let cfg = DecodeConfig {
        method: a.method.into(),
        conf_threshold: a.conf,
        ..DecodeConfig::default()
    };
    let detector = DetectorConfig {
        deskew: !a.no_deskew,
        conf_threshold: a.conf,
        ..DetectorConfig::default()
    };
    let start = Instant::now();
    let results: Vec<(bool, Duration)> = stems
        .par_iter()
        .map(|stem| {
            let t = Instant::now();
            let ok = decode_one(stem, a, &noise, &cfg, &detector)?;
            let el = t.elapsed();
            debug!("{stem}: {:.1} ms", el.as_secs_f64() * 1e3);
            Ok((ok, el))
        })
        .collect::<CliResult<_>>()?;
    write_manifest(&a.out, &stems).data_err("writing manifest")?;
    let ok = results.iter().filter(|r| r.0).count();
    let per_chart: Duration = results.iter().map(|r| r.1).sum::<Duration>() / results.len() as u32;
    let wall = start.elapsed().as_secs_f64();
    info!(
        "decoded {ok}/{} charts with {}; {:.1} ms per chart, {:.1} charts/s",
        stems.len(),
        FitMethod::from(a.method),
        per_chart.as_secs_f64() * 1e3,
        stems.len() as f64 / wall.max(1e-9)
    );
    Ok(())
}

fn read_outcome(pred: &Path, stem: &str) -> CliResult<Outcome> {
    let dp = decode_path(pred, stem);
    if dp.is_file() {
        let s = fs::read_to_string(&dp).data_err(format!("reading {}", dp.display()))?;
        let (table, _) =
            Decoded::table_from_json(&s).data_err(format!("parsing {}", dp.display()))?;
        return Ok(Outcome::Table(table));
    }
    let ep = error_path(pred, stem);
    if ep.is_file() {
        let s = fs::read_to_string(&ep).data_err(format!("reading {}", ep.display()))?;
        let f: DecodeFailure =
            serde_json::from_str(&s).data_err(format!("parsing {}", ep.display()))?;
        return Ok(Outcome::Failed(f.stage));
    }
    Err(data(format!(
        "no decode output for {stem} in {}",
        pred.display()
    )))
}

pub fn cmd_eval(a: &EvalArgs) -> CliResult<()> {
    if !(a.iou > 0.0 && a.iou <= 1.0) {
        return Err(usage(format!("--iou {} outside (0, 1]", a.iou)));
    }
    require_dir(&a.pred, "prediction")?;
    let corpus = read_corpus(&a.corpus)?;
    let pred_stems = read_manifest(&a.pred).data_err("reading prediction manifest")?;
    let truth_stems: Vec<&str> = corpus.iter().map(|e| e.stem.as_str()).collect();
    if pred_stems != truth_stems {
        return Err(data("prediction and corpus manifests differ"));
    }
    create_dir(&a.out)?;
    let charts = corpus
        .par_iter()
        .map(|e| {
            Ok(evaluate_chart(
                &e.stem,
                &read_outcome(&a.pred, &e.stem)?,
                &truth_table(&e.chart),
            ))
        })
        .collect::<CliResult<Vec<_>>>()?;
    // detector curves only when every chart went through image detection
    let detected: Vec<PathBuf> = corpus
        .iter()
        .map(|e| detected_path(&a.pred, &e.stem))
        .collect();
    let detector = if detected.iter().all(|p| p.is_file()) {
        let pairs = corpus
            .par_iter()
            .zip(&detected)
            .map(|(e, p)| {
                let s = fs::read_to_string(p).data_err(format!("reading {}", p.display()))?;
                let scene = Scene::from_json(&s).data_err(format!("parsing {}", p.display()))?;
                Ok((scene.detections, e.chart.annotations().detections.clone()))
            })
            .collect::<CliResult<Vec<_>>>()?;
        Some(detector_report(&pairs, a.iou))
    } else {
        None
    };
    let report = EvalReport::new(charts, detector);
    write(
        &a.out.join("report.json"),
        report.to_json().data_err("serializing report")?,
    )?;
    write(&a.out.join("charts.csv"), report.charts_csv())?;
    match report.pr_curves_csv() {
        Some(csv) => write(&a.out.join("pr_curves.csv"), csv)?,
        None => remove_stale(&a.out.join("pr_curves.csv"))?,
    }
    let c = &report.corpus;
    info!(
        "{} charts: success {:.1}%, precision {:.1}%, recall {:.1}%",
        c.n_charts,
        100.0 * c.success_rate,
        100.0 * c.avg_precision,
        100.0 * c.avg_recall
    );
    for d in report.detector.iter().flatten() {
        info!(
            "{} AP@{}: {:.4}",
            d.class.name(),
            d.iou_threshold,
            d.curve.ap
        );
    }
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> CliResult<()> {
    check_conf(a.conf)?;
    let default_noise = match a.source {
        BenchSource::Scenes => "default",
        BenchSource::Images => "none",
    };
    let noise = load_noise(a.noise.as_deref().unwrap_or(default_noise))?;
    if a.no_deskew_variants && a.source != BenchSource::Images {
        return Err(usage("--no-deskew-variants needs --source images"));
    }
    let corpus = read_corpus(&a.corpus)?;
    create_dir(&a.out)?;
    let mut variants = Vec::new();
    for method in FitMethod::ALL {
        match a.source {
            BenchSource::Scenes => variants.push(Variant::new(method, Source::Scenes)),
            BenchSource::Images => {
                variants.push(Variant::new(method, Source::Images { deskew: true }));
                if a.no_deskew_variants {
                    variants.push(Variant::new(method, Source::Images { deskew: false }));
                }
            }
        }
    }
    let decode = DecodeConfig {
        conf_threshold: a.conf,
        ..DecodeConfig::default()
    };
    let detector = DetectorConfig {
        conf_threshold: a.conf,
        ..DetectorConfig::default()
    };
    let table = run_ablation(&corpus, &noise, &variants, &decode, &detector);
    write(&a.out.join("ablation.csv"), table.to_csv())?;
    write(&a.out.join("ablation.txt"), table.to_text())?;
    for line in table.to_text().lines() {
        info!("{line}");
    }
    Ok(())
}

fn glyph_file_name(ch: char) -> String {
    match ch {
        '-' => "minus".into(),
        '+' => "plus".into(),
        '.' => "dot".into(),
        c => c.to_string(),
    }
}

pub fn cmd_glyphs(a: &GlyphsArgs) -> CliResult<()> {
    if a.scale == 0 {
        return Err(usage("--scale must be at least 1"));
    }
    create_dir(&a.out)?;
    let glyphs = GlyphSet::builtin();
    for g in glyphs.glyphs() {
        let img = g.bitmap.to_image();
        let img = img.resize(img.width() * a.scale, img.height() * a.scale);
        let path = a.out.join(format!("glyph_{}.png", glyph_file_name(g.ch)));
        img.save_png(&path)
            .data_err(format!("writing {}", path.display()))?;
    }
    info!(
        "wrote {} glyphs to {}",
        glyphs.glyphs().len(),
        a.out.display()
    );
    Ok(())
}

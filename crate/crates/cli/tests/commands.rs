use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn plotread(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plotread"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn p(dir: &Path, sub: &str) -> String {
    dir.join(sub).to_string_lossy().into_owned()
}

fn gen(dir: &Path, n: &str, seed: &str, extra: &[&str]) {
    let mut args = vec!["gen", "--n", n, "--seed", seed, "--out"];
    let out = p(dir, "corpus");
    args.push(&out);
    args.extend_from_slice(extra);
    assert!(plotread(&args).status.success());
}

#[test]
fn gen_writes_bundles_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "10", "7", &[]);
    let manifest: Vec<String> =
        serde_json::from_str(&fs::read_to_string(d.path().join("corpus/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.len(), 10);
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("corpus/generation.json")).unwrap())
            .unwrap();
    assert_eq!(stats["charts"], 10);
    assert!(stats["rejection_rate"].as_f64().unwrap() < 1.0);
    for stem in &manifest {
        assert!(d.path().join(format!("corpus/{stem}.json")).is_file());
        assert!(d.path().join(format!("corpus/{stem}.scene.json")).is_file());
        assert!(!d.path().join(format!("corpus/{stem}.png")).exists());
    }
}

#[test]
fn gen_is_repeatable() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "5", "9", &["--render"]);
    let first = fs::read(d.path().join("corpus/manifest.json")).unwrap();
    let stems: Vec<String> = serde_json::from_slice(&first).unwrap();
    let png = fs::read(d.path().join(format!("corpus/{}.png", stems[0]))).unwrap();
    gen(d.path(), "5", "9", &["--render"]);
    assert_eq!(
        fs::read(d.path().join("corpus/manifest.json")).unwrap(),
        first
    );
    assert_eq!(
        fs::read(d.path().join(format!("corpus/{}.png", stems[0]))).unwrap(),
        png
    );
}

#[test]
fn truth_scenes_decode_and_score_perfectly() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "8", "3", &[]);
    let (c, o, r) = (
        p(d.path(), "corpus"),
        p(d.path(), "dec"),
        p(d.path(), "rep"),
    );
    assert!(
        plotread(&["decode", "--corpus", &c, "--out", &o, "--from-scenes"])
            .status
            .success()
    );
    assert!(
        plotread(&["eval", "--corpus", &c, "--pred", &o, "--out", &r])
            .status
            .success()
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.path().join("rep/report.json")).unwrap())
            .unwrap();
    assert_eq!(report["corpus"]["success_rate"], 1.0);
    assert!(report.get("detector").is_none());
    let csv = fs::read_to_string(d.path().join("rep/charts.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn failed_charts_leave_an_error_record() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "1", "4", &[]);
    let stems: Vec<String> =
        serde_json::from_str(&fs::read_to_string(d.path().join("corpus/manifest.json")).unwrap())
            .unwrap();
    // strip every tick value from the truth scene
    let sp = d.path().join(format!("corpus/{}.scene.json", stems[0]));
    let mut scene: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&sp).unwrap()).unwrap();
    scene["detections"]
        .as_array_mut()
        .unwrap()
        .retain(|x| x["class"] != "tick_value");
    fs::write(&sp, serde_json::to_string(&scene).unwrap()).unwrap();
    let (c, o, r) = (
        p(d.path(), "corpus"),
        p(d.path(), "dec"),
        p(d.path(), "rep"),
    );
    assert!(
        plotread(&["decode", "--corpus", &c, "--out", &o, "--from-scenes"])
            .status
            .success()
    );
    let err: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(d.path().join(format!("dec/{}.error.json", stems[0]))).unwrap(),
    )
    .unwrap();
    assert_eq!(err["stage"], "pairing");
    assert!(
        plotread(&["eval", "--corpus", &c, "--pred", &o, "--out", &r])
            .status
            .success()
    );
    let csv = fs::read_to_string(d.path().join("rep/charts.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",false,pairing"));
}

#[test]
fn usage_errors_exit_with_one() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path(), "x");
    assert_eq!(
        plotread(&["gen", "--n", "3", "--out", &out]).status.code(),
        Some(1)
    );
    assert_eq!(
        plotread(&[
            "decode",
            "--corpus",
            "/no/such/dir",
            "--out",
            &out,
            "--from-scenes"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        plotread(&[
            "gen",
            "--n",
            "3",
            "--seed",
            "1",
            "--out",
            &out,
            "--profile",
            "/no/such.json"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(plotread(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(plotread(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "3", "5", &[]);
    let (c, o, r) = (
        p(d.path(), "corpus"),
        p(d.path(), "dec"),
        p(d.path(), "rep"),
    );
    // no PNGs were rendered
    assert_eq!(
        plotread(&["decode", "--corpus", &c, "--out", &o, "--from-images"])
            .status
            .code(),
        Some(2)
    );

    assert!(
        plotread(&["decode", "--corpus", &c, "--out", &o, "--from-scenes"])
            .status
            .success()
    );
    let e = tempfile::tempdir().unwrap();
    gen(e.path(), "4", "5", &[]);
    let other = p(e.path(), "corpus");
    let mismatch = plotread(&["eval", "--corpus", &other, "--pred", &o, "--out", &r]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&mismatch.stderr).contains("manifests differ"));

    let empty = d.path().join("empty");
    fs::create_dir(&empty).unwrap();
    fs::write(empty.join("manifest.json"), "[]").unwrap();
    let empty = empty.to_string_lossy().into_owned();
    assert_eq!(
        plotread(&["eval", "--corpus", &empty, "--pred", &o, "--out", &r])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bench_writes_all_methods() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), "12", "6", &[]);
    let (c, b) = (p(d.path(), "corpus"), p(d.path(), "bench"));
    assert!(plotread(&["bench", "--corpus", &c, "--out", &b])
        .status
        .success());
    let csv = fs::read_to_string(d.path().join("bench/ablation.csv")).unwrap();
    let methods: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(methods, ["ransac", "theilsen", "lad", "ols2"]);
    assert!(fs::read_to_string(d.path().join("bench/ablation.txt"))
        .unwrap()
        .starts_with("method"));
}

#[test]
fn glyph_dump_writes_one_png_per_glyph() {
    let d = tempfile::tempdir().unwrap();
    let out = p(d.path(), "g");
    assert!(plotread(&["glyphs", "--out", &out]).status.success());
    let n = fs::read_dir(d.path().join("g")).unwrap().count();
    assert_eq!(n, 14);
    assert!(d.path().join("g/glyph_minus.png").is_file());
}

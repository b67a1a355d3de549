use std::path::Path;
use std::process::{Command, Output};

use rppg::frameio::{store_regions, store_sequence, Frame, FrameSequence, PlanarRegion, RegionFile};
use rppg::geometry::Polygon;

fn rppg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rppg")).args(args).current_dir(dir).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn simulate_estimate_evaluate_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = rppg(d, &["simulate", "static_fair", "sim", "--seed", "3", "--set", "duration=12"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["frames/manifest.txt", "regions.txt", "truth.csv", "beats.csv", "affines.csv", "roi_amplitudes.csv", "scene.txt"] {
        assert!(d.join("sim").join(f).is_file(), "{f} missing");
    }

    let out = rppg(d, &["estimate", "sim/frames", "sim/regions.txt", "est"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&d.join("est/ppg.csv")), 360);
    assert!(data_rows(&d.join("est/weights.csv")) > 0);

    let out = rppg(d, &["estimate", "sim/frames", "sim/regions.txt", "base", "--estimator", "face_average"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&d.join("base/ppg.csv")), 360);

    let out = rppg(d, &["evaluate", "est/ppg.csv", "sim/truth.csv", "eval", "--beats", "sim/beats.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("snr "));
    assert_eq!(data_rows(&d.join("eval/summary.csv")), 1);

    let out = rppg(d, &["compare", "sim/frames", "sim/regions.txt", "sim/truth.csv", "cmp"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&d.join("cmp/compare.csv")), 2);
    assert!(d.join("cmp/plot.csv").is_file());
}

#[test]
fn usage_and_input_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert_eq!(code(&rppg(d, &[])), 2);
    assert_eq!(code(&rppg(d, &["transmogrify"])), 2);
    assert_eq!(code(&rppg(d, &["simulate", "no_such_scene", "x"])), 2);
    assert_eq!(code(&rppg(d, &["simulate", "static_fair", "x", "--set", "fps=-1"])), 2);
    assert_eq!(code(&rppg(d, &["estimate", "missing", "missing.txt", "x"])), 2);
    assert_eq!(code(&rppg(d, &["evaluate", "a.csv", "b.csv", "x", "--weights", "w.csv"])), 2);
    std::fs::write(d.join("bad.cfg"), "epoch_seconds=banana\n").unwrap();
    assert_eq!(code(&rppg(d, &["estimate", "f", "r.txt", "x", "--config", "bad.cfg"])), 2);
}

#[test]
fn featureless_input_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let frames = vec![Frame::filled(96, 96, 120); 150];
    store_sequence(&FrameSequence::new(30.0, frames).unwrap(), d.join("flat")).unwrap();
    let regions = RegionFile::single(vec![PlanarRegion {
        label: "forehead".into(),
        polygon: Polygon::rect(10.0, 10.0, 80.0, 60.0),
    }]);
    store_regions(&regions, d.join("regions.txt")).unwrap();
    let out = rppg(d, &["estimate", "flat", "regions.txt", "out"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_file_and_seed_flag_are_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("short.cfg"), "duration=6\nwidth=200\nheight=160\n").unwrap();
    let out = rppg(d, &["simulate", "static_fair", "a", "--config", "short.cfg", "--seed", "11"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = rppg(d, &["simulate", "static_fair", "b", "--config", "short.cfg", "--seed", "12"]);
    assert_eq!(code(&out), 0);
    let manifest = std::fs::read_to_string(d.join("a/frames/manifest.txt")).unwrap();
    assert!(manifest.contains("frames=180") && manifest.contains("width=200"), "{manifest}");
    let a = std::fs::read(d.join("a/truth.csv")).unwrap();
    let b = std::fs::read(d.join("b/truth.csv")).unwrap();
    assert_ne!(a, b);
}

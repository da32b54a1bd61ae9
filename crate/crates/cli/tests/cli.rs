use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hexlift::bundle::{read_json, ExportBundle};
use hexlift::compare::TuningPlots;
use hexlift::io::{load_dataset, read_matrix, write_dataset, write_points};
use hexlift::simdata::{gen_2nc7, SyntheticSpec};
use hexlift::{fit_layout, predict_2d, scale_layout, FitParams, RawLayout};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn hexlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexlift"))
        .args(args)
        .env_remove("HEXLIFT_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = hexlift(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    /// Synthetic data, its true layout, a row-shuffled copy and an exact duplicate.
    fn new(n_per_cluster: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let (data, _) = gen_2nc7(&SyntheticSpec {
            n_per_cluster,
            seed: 3,
            ..Default::default()
        })
        .unwrap();
        write_dataset(&dir.path().join("data.csv"), &data).unwrap();
        let pts: Vec<[f64; 2]> = data.rows().map(|r| [r[1] * 10.0, r[0] * 10.0 + 5.0]).collect();
        write_points(&dir.path().join("truth.csv"), &pts).unwrap();
        write_points(&dir.path().join("twin.csv"), &pts).unwrap();
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(1));
        write_points(&dir.path().join("shuffled.csv"), &shuffled).unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn schema_check(path: &Path) {
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/bundle.schema.json")).unwrap())
            .unwrap();
    let instance: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{}: {:?}", path.display(), &errors[..errors.len().min(5)]);
}

#[test]
fn simulate_writes_data_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    ok(&["simulate", "--out-dir", &d, "--n-per-cluster", "1000", "--seed", "7"]);
    let data = load_dataset(&dir.path().join("data.csv")).unwrap();
    assert_eq!((data.n(), data.p()), (2000, 7));
    assert_eq!(data.column_names()[6], "x7");
    let labels = read_matrix(std::fs::File::open(dir.path().join("labels.csv")).unwrap(), "labels").unwrap();
    assert_eq!(labels.header, vec!["label"]);
    assert_eq!(labels.values.iter().filter(|&&v| v == 1.0).count(), 1000);
}

#[test]
fn fit_uses_defaults_and_reports_hbe() {
    let w = Workspace::new(100);
    let stdout = ok(&["fit", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--out", &w.s("fit.json"), "--csv-dir", &w.s("csv")]);
    let line = stdout.trim();
    assert!(line.starts_with("hbe="), "{line}");
    let hbe: f64 = line["hbe=".len()..].parse().unwrap();

    let bundle: ExportBundle = read_json(&w.path("fit.json")).unwrap();
    bundle.validate().unwrap();
    schema_check(&w.path("fit.json"));
    let layout = &bundle.layouts[0];
    assert_eq!(layout.layout_id, "truth");
    assert_eq!(layout.model.params.b1, 6); // cube root of 200, rounded up
    assert_eq!(layout.model.params.q, 0.1);
    assert_eq!(layout.model.params.cutoff, 0.0);
    assert_eq!(layout.residuals.hbe, hbe);
    assert!(bundle.dataset.values.is_none());
    assert!(bundle.dataset.source.as_deref().unwrap().ends_with("data.csv"));

    // the library gives the same number
    let data = load_dataset(&w.path("data.csv")).unwrap();
    let raw = hexlift::io::load_layout(&w.path("truth.csv"), None).unwrap();
    let fit = fit_layout(&data, &scale_layout(&raw, true).unwrap(), &FitParams::default()).unwrap();
    assert_eq!(fit.residuals.hbe, hbe);
    for f in ["bins.csv", "edges.csv", "residuals.csv", "layout_scaled.csv"] {
        assert!(w.path("csv").join(f).is_file(), "{f}");
    }
}

#[test]
fn fit_honours_flags() {
    let w = Workspace::new(100);
    ok(&[
        "fit", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--b1", "9", "--buffer", "0.05",
        "--cutoff", "0.01", "--center-mode", "member-mean", "--layout-id", "mine", "--inline-data", "--out", &w.s("f.json"),
    ]);
    let bundle: ExportBundle = read_json(&w.path("f.json")).unwrap();
    schema_check(&w.path("f.json"));
    let p = &bundle.layouts[0].model.params;
    assert_eq!((p.b1, p.q, p.cutoff), (9, 0.05, 0.01));
    assert_eq!(bundle.layouts[0].layout_id, "mine");
    assert_eq!(bundle.dataset.values.as_ref().unwrap().len(), 200);
    assert!(bundle.layouts[0].model.bins.iter().all(|b| b.w > 0.01));
}

#[test]
fn mismatched_rows_fail_with_counts() {
    let w = Workspace::new(50);
    write_points(&w.path("short.csv"), &[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
    let out = hexlift(&["fit", "--data", &w.s("data.csv"), "--layout", &w.s("short.csv"), "--out", &w.s("x.json")]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("100") && err.contains('3'), "{err}");
    assert!(!w.path("x.json").exists());
}

#[test]
fn bad_inputs_are_reported() {
    let w = Workspace::new(50);
    std::fs::write(w.path("nan.csv"), "a,b\n1,2\nNaN,3\n").unwrap();
    let out = hexlift(&["fit", "--data", &w.s("nan.csv"), "--layout", &w.s("truth.csv"), "--out", &w.s("x.json")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2, column 1"));
    let out = Command::new(env!("CARGO_BIN_EXE_hexlift"))
        .args(["fit", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--out", &w.s("x.json")])
        .env("HEXLIFT_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("HEXLIFT_THREADS"));
    let out = hexlift(&["sweep", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--b1", "1,4,900", "--out", &w.s("t.csv")]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("[1, 900]"));
}

#[test]
fn sweep_writes_records_and_plot_series() {
    let w = Workspace::new(300);
    ok(&["sweep", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--out", &w.s("tuning.csv"), "--plot-json", &w.s("plots.json")]);
    let text = std::fs::read_to_string(w.path("tuning.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "layout_id,b1,b2,b,m,a1,mean_count,mean_std_count,nonempty_frac,cutoff,hbe"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let b1_sweep = rows.iter().filter(|r| r[9].parse::<f64>().unwrap() == 0.0).count();
    assert_eq!(b1_sweep, 12);
    let plots: TuningPlots = read_json(&w.path("plots.json")).unwrap();
    assert_eq!(plots.hbe_vs_a1[0].x.len(), 12);
    assert_eq!(plots.hbe_vs_mean_count[0].y, plots.hbe_vs_a1[0].y);
    assert_eq!(plots.nonempty_frac_vs_a1.len(), 1);
    assert_eq!(plots.hbe_vs_cutoff.len(), 1);
    assert!(plots.hbe_vs_cutoff[0].x.len() >= 2);
    assert_eq!(plots.hbe_vs_cutoff[0].b1, Some(9)); // cube root of 600, rounded up

    ok(&[
        "sweep", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--b1", "4,8", "--cutoffs", "0,0.004",
        "--cutoff-b1", "4,8", "--out", &w.s("t2.csv"),
    ]);
    assert_eq!(std::fs::read_to_string(w.path("t2.csv")).unwrap().lines().count(), 1 + 4);
}

#[test]
fn compare_flags_the_structured_layout() {
    let w = Workspace::new(300);
    let stdout = ok(&[
        "compare", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), &w.s("shuffled.csv"), "--layout", &w.s("twin.csv"),
        "--out-dir", &w.s("cmp"),
    ]);
    assert_eq!(stdout.lines().count(), 3);
    schema_check(&w.path("cmp/compare.json"));
    let bundle: ExportBundle = read_json(&w.path("cmp/compare.json")).unwrap();
    bundle.validate().unwrap();
    assert_eq!(bundle.layouts.len(), 3);
    let metrics = bundle.metrics.as_ref().unwrap();
    assert_eq!(metrics.b1, 25);
    assert!(!bundle.best.is_empty());
    for best in &bundle.best {
        assert_eq!(best.layout_ids, vec!["truth", "twin"], "b1 {}", best.b1);
    }
    let (truth, twin) = (&bundle.layouts[0], &bundle.layouts[2]);
    for (a, b) in truth.tuning.iter().zip(&twin.tuning) {
        assert!((a.hbe - b.hbe).abs() <= 1e-12);
    }
    // one tuning row per layout and b1
    let tuning = std::fs::read_to_string(w.path("cmp/tuning.csv")).unwrap();
    assert_eq!(tuning.lines().count(), 1 + 3 * bundle.best.len());
    let metrics_csv = std::fs::read_to_string(w.path("cmp/metrics.csv")).unwrap();
    assert!(metrics_csv.starts_with("layout_id,a1,hbe,r_rta,r_sc,norm_hbe,norm_r_rta,norm_r_sc,rta,sc\n"));
    let shuffled = metrics.rows.iter().find(|r| r.layout_id == "shuffled").unwrap();
    assert_eq!((shuffled.norm_hbe, shuffled.norm_r_rta, shuffled.norm_r_sc), (1.0, 1.0, 1.0));

    let out = hexlift(&["compare", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--out-dir", &w.s("c2")]);
    assert!(!out.status.success());
}

#[test]
fn predict_returns_raw_layout_positions() {
    let w = Workspace::new(200);
    ok(&["fit", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), "--b1", "12", "--out", &w.s("fit.json")]);
    ok(&["predict", "--model", &w.s("fit.json"), "--input", &w.s("data.csv"), "--out", &w.s("pred.csv")]);
    let pred = read_matrix(std::fs::File::open(w.path("pred.csv")).unwrap(), "pred").unwrap();
    assert_eq!(pred.header, vec!["emb1", "emb2"]);
    assert_eq!(pred.rows, 400);
    let bundle: ExportBundle = read_json(&w.path("fit.json")).unwrap();
    let section = &bundle.layouts[0];
    let model = section.model.to_model().unwrap();
    let data = load_dataset(&w.path("data.csv")).unwrap();
    for (i, x) in data.rows().enumerate() {
        let want = section.scaled.to_raw(predict_2d(x, &model).unwrap());
        assert_eq!([pred.values[2 * i], pred.values[2 * i + 1]], want, "row {i}");
    }
    // most observations land within a couple of bin widths of their own layout position
    let truth = read_matrix(std::fs::File::open(w.path("truth.csv")).unwrap(), "truth").unwrap();
    let reach = 2.0 * section.model.params.a1 * 20.0;
    let near = (0..400)
        .filter(|&i| {
            let dx = pred.values[2 * i] - truth.values[2 * i];
            let dy = pred.values[2 * i + 1] - truth.values[2 * i + 1];
            (dx * dx + dy * dy).sqrt() <= reach
        })
        .count();
    assert!(near >= 300, "{near}");

    ok(&["predict", "--model", &w.s("fit.json"), "--input", &w.s("data.csv"), "--scaled", "--out", &w.s("scaled.csv")]);
    let scaled = read_matrix(std::fs::File::open(w.path("scaled.csv")).unwrap(), "scaled").unwrap();
    for (i, x) in data.rows().enumerate() {
        assert_eq!([scaled.values[2 * i], scaled.values[2 * i + 1]], predict_2d(x, &model).unwrap());
    }

    std::fs::write(w.path("narrow.csv"), "a,b\n1,2\n").unwrap();
    let out = hexlift(&["predict", "--model", &w.s("fit.json"), "--input", &w.s("narrow.csv"), "--out", &w.s("n.csv")]);
    assert!(!out.status.success());
}

#[test]
fn export_ui_writes_a_complete_bundle() {
    let w = Workspace::new(150);
    let dir = w.dir.path().to_string_lossy().into_owned();
    ok(&["simulate", "--out-dir", &dir, "--n-per-cluster", "150", "--seed", "3"]);
    ok(&[
        "export-ui", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), &w.s("shuffled.csv"), "--labels", &w.s("labels.csv"),
        "--anchors", "4", "--steps", "12", "--projections-dir", &w.s("proj"), "--out", &w.s("ui.json"),
    ]);
    schema_check(&w.path("ui.json"));
    let bundle: ExportBundle = read_json(&w.path("ui.json")).unwrap();
    bundle.validate().unwrap();
    assert_eq!(bundle.dataset.values.as_ref().unwrap().len(), 300);
    assert_eq!(bundle.dataset.labels.as_ref().unwrap().iter().filter(|&&l| l == 1).count(), 150);
    let tour = bundle.tour.as_ref().unwrap();
    assert_eq!((tour.p, tour.steps_per_segment, tour.bases.len()), (7, 12, 4));
    assert!(bundle.metrics.is_some());
    let sweep = bundle.layouts[0].tuning.len();
    assert!(sweep >= 5);
    assert!(bundle.layouts.iter().all(|l| l.tuning.len() == sweep));
    assert_eq!(bundle.best.len(), sweep);
    assert!(bundle.best.iter().all(|b| b.layout_ids == vec!["truth"]));
    for k in 1..=3 {
        let data = read_matrix(std::fs::File::open(w.path("proj").join(format!("frame{k}_data.csv"))).unwrap(), "p").unwrap();
        assert_eq!((data.header.len(), data.rows), (2, 300));
        let model = read_matrix(std::fs::File::open(w.path("proj").join(format!("frame{k}_truth_model.csv"))).unwrap(), "m").unwrap();
        assert_eq!(model.header, vec!["bin_id", "proj1", "proj2"]);
        assert_eq!(model.rows, bundle.layouts[0].model.bins.len());
    }
    assert!(!w.path("proj").join("frame4_data.csv").exists());
}

#[test]
fn layout_names_must_differ() {
    let w = Workspace::new(50);
    std::fs::create_dir_all(w.path("other")).unwrap();
    std::fs::copy(w.path("truth.csv"), w.path("other/truth.csv")).unwrap();
    let out = hexlift(&[
        "compare", "--data", &w.s("data.csv"), "--layout", &w.s("truth.csv"), &w.s("other/truth.csv"), "--out-dir", &w.s("c"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("truth"));
}

#[test]
fn raw_layout_units_survive_scaling() {
    let raw = RawLayout::new("r", vec![[10.0, 5.0], [30.0, 5.0], [10.0, 9.0]]).unwrap();
    let scaled = scale_layout(&raw, true).unwrap();
    for (s, r) in scaled.points.iter().zip(&raw.points) {
        let back = scaled.to_raw(*s);
        assert!((back[0] - r[0]).abs() < 1e-12 && (back[1] - r[1]).abs() < 1e-12);
    }
}

mod common;

use hexlift::binning::CenterMode;
use hexlift::bundle::{
    from_json, load_model, read_json, to_json, write_json, DatasetSection, ExportBundle, LayoutSection,
    ModelFile, ResidualSection, TourSection,
};
use hexlift::diagnostics::predict_2d;
use hexlift::io::{load_dataset, load_layout, read_matrix, write_dataset, write_layout, write_tuning};
use hexlift::metrics::{build_metric_table, MetricOptions};
use hexlift::tour::anchor_bases;
use hexlift::tuning::sweep_b1;
use hexlift::{fit_layout, Error, FitParams};

fn sample_bundle() -> ExportBundle {
    let (data, layout) = common::two_cluster(80, 1);
    let other = common::permuted_layout(&layout, 3);
    let params = FitParams::default().with_b1(6).with_cutoff(0.01);
    let mut bundle = ExportBundle::new(DatasetSection::inline(&data, Some(vec![0; data.n()])));
    for l in [&layout, &other] {
        let fit = fit_layout(&data, l, &params).unwrap();
        bundle.layouts.push(LayoutSection {
            layout_id: l.layout_id.clone(),
            scaled: l.clone(),
            model: ModelFile::from_fit(&fit, CenterMode::Lattice),
            residuals: ResidualSection::from_fit(&fit),
            tuning: sweep_b1(&data, l, &[3, 6], 0.0, &FitParams::default()).unwrap(),
        });
    }
    bundle.metrics = Some(
        build_metric_table(&[layout, other], &data, 0.1, &MetricOptions::default()).unwrap(),
    );
    bundle.tour = Some(TourSection::new(&anchor_bases(data.p(), 3, 0).unwrap(), 20));
    bundle
}

#[test]
fn bundle_round_trips_bit_exactly() {
    let bundle = sample_bundle();
    bundle.validate().unwrap();
    let text = to_json(&bundle).unwrap();
    let back: ExportBundle = from_json(&text).unwrap();
    assert_eq!(back, bundle);
    assert_eq!(to_json(&back).unwrap(), text);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bundle.json");
    write_json(&path, &bundle).unwrap();
    let read: ExportBundle = read_json(&path).unwrap();
    assert_eq!(read, bundle);
}

#[test]
fn stored_models_rebuild_the_fitted_model() {
    let (data, layout) = common::two_cluster(120, 2);
    let fit = fit_layout(&data, &layout, &FitParams::default().with_b1(7).with_cutoff(0.01)).unwrap();
    let file = ModelFile::from_fit(&fit, CenterMode::Lattice);
    assert_eq!(file.bins.len(), fit.model.m());
    assert!(file.bins.iter().all(|b| b.id >= 1));
    let rebuilt = file.to_model().unwrap();
    assert_eq!(rebuilt, fit.model);
    let residuals = ResidualSection::from_fit(&fit);
    assert_eq!(residuals.rows[0].row_id, 0);
    assert_eq!(residuals.rows[5].bin_id, fit.binning.assignment[5] + 1);
    for x in data.rows().take(20) {
        assert_eq!(predict_2d(x, &rebuilt).unwrap(), predict_2d(x, &fit.model).unwrap());
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    write_json(&path, &file).unwrap();
    let (loaded, scaled) = load_model(&path, None).unwrap();
    assert_eq!(loaded, file);
    assert!(scaled.is_none());
}

#[test]
fn models_load_from_bundles_by_layout() {
    let bundle = sample_bundle();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bundle.json");
    write_json(&path, &bundle).unwrap();
    let second = &bundle.layouts[1];
    let (model, scaled) = load_model(&path, Some(&second.layout_id)).unwrap();
    assert_eq!(model, second.model);
    assert_eq!(scaled.unwrap(), second.scaled);
    assert!(matches!(load_model(&path, Some("missing")), Err(Error::Bundle(_))));
}

#[test]
fn broken_references_are_rejected() {
    let good = sample_bundle();
    let mut cases: Vec<ExportBundle> = Vec::new();

    let mut b = good.clone();
    b.schema_version = "0.1".into();
    cases.push(b);
    let mut b = good.clone();
    b.layouts[0].model.edges.push([1, 100_000]);
    cases.push(b);
    let mut b = good.clone();
    b.layouts[1].residuals.rows[3].bin_id = 0;
    cases.push(b);
    let mut b = good.clone();
    b.layouts[1].model.bins[0].count += 1;
    cases.push(b);
    let mut b = good.clone();
    b.layouts[1].layout_id = b.layouts[0].layout_id.clone();
    cases.push(b);
    let mut b = good.clone();
    b.layouts[0].scaled.points.pop();
    cases.push(b);
    let mut b = good.clone();
    b.metrics.as_mut().unwrap().rows[0].layout_id = "ghost".into();
    cases.push(b);
    let mut b = good.clone();
    b.tour.as_mut().unwrap().bases[0].pop();
    cases.push(b);
    let mut b = good.clone();
    b.layouts[0].model.bins[1].cpd.push(0.0);
    cases.push(b);
    let mut b = good.clone();
    b.dataset.labels = Some(vec![0; 3]);
    cases.push(b);

    for (k, case) in cases.iter().enumerate() {
        assert!(matches!(case.validate(), Err(Error::Bundle(_))), "case {k}");
    }
}

#[test]
fn csv_files_round_trip() {
    let (data, layout) = common::two_cluster(40, 6);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.csv");
    write_dataset(&path, &data).unwrap();
    assert_eq!(load_dataset(&path).unwrap(), data);
    let lpath = dir.path().join("umap.csv");
    write_layout(&lpath, &layout).unwrap();
    let raw = load_layout(&lpath, None).unwrap();
    assert_eq!(raw.layout_id, "umap");
    assert_eq!(raw.points, layout.points);
    let tpath = dir.path().join("tuning.csv");
    let records = sweep_b1(&data, &layout, &[2, 4], 0.0, &FitParams::default()).unwrap();
    write_tuning(&tpath, &records).unwrap();
    let header = std::fs::read_to_string(&tpath).unwrap();
    assert!(header.starts_with(
        "layout_id,b1,b2,b,m,a1,mean_count,mean_std_count,nonempty_frac,cutoff,hbe\n"
    ));
}

#[test]
fn malformed_csv_reports_location() {
    let parse = |text: &str| read_matrix(text.as_bytes(), "in.csv");
    assert!(matches!(parse("1,2\n3,4\n"), Err(Error::MissingHeader { .. })));
    assert!(matches!(parse(""), Err(Error::MissingHeader { .. })));
    match parse("a,b\n1,2\n3\n") {
        Err(Error::Ragged { row, expected, got, .. }) => assert_eq!((row, expected, got), (2, 2, 1)),
        other => panic!("unexpected {other:?}"),
    }
    match parse("a,b\n1,2\n3,x\n") {
        Err(Error::Parse { row, column, value, .. }) => {
            assert_eq!((row, column, value.as_str()), (2, 2, "x"))
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(parse("a,b\nNaN,1\n"), Err(Error::Parse { row: 1, column: 1, .. })));
    let m = parse("a, b\n 1.5 ,2\n").unwrap();
    assert_eq!((m.rows, m.values), (1, vec![1.5, 2.0]));
}

mod common;

use ridgeview::demo::{generate_demo, EFFICIENCY, PRESSURE_RATIO};
use ridgeview::geometry::GeometryCatalog;
use ridgeview::surrogate::subspace_angle;
use ridgeview_service::{compute_bundle, load_data_root, BundleError, BundleOptions};

fn catalog(ds: &ridgeview::demo::DemoDataset) -> GeometryCatalog {
    GeometryCatalog::in_memory(ds.nominal.clone(), ds.designs.clone(), Some(ds.context.clone()))
}

#[test]
fn ridge_qois_give_one_and_two_dimensional_plots() {
    let ds = generate_demo(&common::small_demo()).unwrap();
    let qois = vec![PRESSURE_RATIO.to_string(), EFFICIENCY.to_string()];
    let bundle = compute_bundle("demo", ds.table.clone(), &qois, catalog(&ds), &BundleOptions::default()).unwrap();
    assert_eq!(bundle.analyses[PRESSURE_RATIO].plot.m, 1);
    assert_eq!(bundle.analyses[EFFICIENCY].plot.m, 2);
    for (qoi, analysis) in &bundle.analyses {
        assert_eq!(analysis.plot.len(), bundle.len());
        let w1 = analysis.subspace.active().unwrap();
        assert!(subspace_angle(&w1, &ds.directions[qoi.as_str()]) < 1e-8);
        assert!(analysis.profile.training_rmse < 1e-9, "{qoi}: {}", analysis.profile.training_rmse);
    }
    assert_eq!(bundle.geometry.len(), bundle.len());
}

#[test]
fn unknown_qoi_is_named() {
    let ds = generate_demo(&common::small_demo()).unwrap();
    let qois = vec!["thrust".to_string()];
    let err = compute_bundle("demo", ds.table.clone(), &qois, catalog(&ds), &BundleOptions::default()).unwrap_err();
    assert!(matches!(&err, BundleError::Qoi { qoi, .. } if qoi == "thrust"));
    assert!(err.to_string().contains("thrust"));
}

#[test]
fn misaligned_geometry_is_rejected() {
    let ds = generate_demo(&common::small_demo()).unwrap();
    let short = GeometryCatalog::in_memory(ds.nominal.clone(), ds.designs[..3].to_vec(), None);
    let qois = vec![PRESSURE_RATIO.to_string()];
    assert!(matches!(
        compute_bundle("demo", ds.table.clone(), &qois, short, &BundleOptions::default()),
        Err(BundleError::Misaligned { catalog: 3, .. })
    ));
}

#[test]
fn bundles_are_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    common::data_root(dir.path());
    let a = load_data_root(dir.path(), &BundleOptions::default()).unwrap();
    let b = load_data_root(dir.path(), &BundleOptions::default()).unwrap();
    assert_eq!(a.len(), 2);
    assert_eq!(a[0].id, "alpha");
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.to_json(), y.to_json());
    }
}

#[test]
fn data_root_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_data_root(dir.path(), &BundleOptions::default()),
        Err(BundleError::DataRoot { .. })
    ));
    common::data_root(dir.path());
    std::fs::remove_file(dir.path().join("beta/designs.csv")).unwrap();
    let err = load_data_root(dir.path(), &BundleOptions::default()).unwrap_err();
    assert!(err.to_string().contains("designs.csv"), "{err}");
}

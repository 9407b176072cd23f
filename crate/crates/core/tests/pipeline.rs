use proptest::prelude::*;
use ridgeview::dataset::{
    evaluate_oracle, load_design_table, parse_design_table, sample_uniform_doe, DomainSpec, OracleKind,
    SyntheticOracle,
};
use ridgeview::surrogate::export::{PlotFile, SubspaceFile};
use ridgeview::surrogate::{
    build_summary_plot, covariance_analytic, eigendecompose, fit_quadratic, select_dimension, subspace_angle,
    FitOptions,
};

#[test]
fn csv_to_files_and_back() {
    let domain = DomainSpec::new((0..6).map(|i| (-1.0 - i as f64, 2.0 + 0.5 * i as f64)).collect()).unwrap();
    let doe = sample_uniform_doe(&domain, 120, 8).unwrap();
    let oracle = SyntheticOracle::random_ridge(OracleKind::ExactRidge2d, 6, 0.0, 9).unwrap();
    let table = evaluate_oracle(&oracle, &doe, "loss").unwrap();

    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("designs.csv");
    let mut bytes = Vec::new();
    table.write_csv(&mut bytes).unwrap();
    std::fs::write(&csv, &bytes).unwrap();
    std::fs::write(dir.path().join("domain.json"), domain.to_json()).unwrap();
    let domain = DomainSpec::from_json_file(&dir.path().join("domain.json")).unwrap();
    let loaded = load_design_table(&csv, &domain).unwrap();

    let model = fit_quadratic(&loaded, "loss", FitOptions::default()).unwrap();
    let sub = eigendecompose(&covariance_analytic(&model)).unwrap();
    let (m, degenerate) = select_dimension(sub.eigenvalues(), 3).unwrap();
    assert_eq!((m, degenerate), (2, false));
    let sub = sub.with_dimension(m, degenerate).unwrap();
    assert!(subspace_angle(&sub.active().unwrap(), oracle.directions()) < 1e-9);

    let file = SubspaceFile::new("loss", &sub).unwrap();
    let text = String::from_utf8(ridgeview::json::to_vec(&file).unwrap()).unwrap();
    let back: SubspaceFile = serde_json::from_str(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_subspace().unwrap(), sub);

    let plot = build_summary_plot(&loaded, &sub, "loss").unwrap();
    let plot_file = PlotFile::from(&plot);
    let back: PlotFile = serde_json::from_slice(&ridgeview::json::to_vec(&plot_file).unwrap()).unwrap();
    assert_eq!(back, plot_file);
    assert_eq!(back.to_plot(), plot);
}

#[test]
fn bad_csv_is_rejected() {
    let domain = DomainSpec::unit(2).unwrap();
    assert!(parse_design_table(b"x0,x1\n0.1\n", &domain).is_err());
    assert!(parse_design_table(b"", &domain).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // shifting and scaling the raw bounds leaves the recovered subspace alone
    #[test]
    fn subspace_is_invariant_to_raw_bounds(lo in -50.0f64..50.0, width in 0.1f64..100.0, seed in 0u64..1000) {
        let d = 5;
        let unit = DomainSpec::unit(d).unwrap();
        let scaled = DomainSpec::new(vec![(lo, lo + width); d]).unwrap();
        let doe = sample_uniform_doe(&unit, 60, seed).unwrap();
        let oracle = SyntheticOracle::random_ridge(OracleKind::ExactRidge1d, d, 0.0, seed + 1).unwrap();
        let table = evaluate_oracle(&oracle, &doe, "f").unwrap();
        let mut bytes = Vec::new();
        table.write_csv(&mut bytes).unwrap();
        let raw_unit = parse_design_table(&bytes, &unit).unwrap();

        // rewrite the raw columns into the scaled domain
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        let mut rescaled = format!("{}\n", lines.next().unwrap());
        for line in lines {
            let mut cells: Vec<String> = line.split(',').map(str::to_string).collect();
            for c in cells.iter_mut().take(d) {
                let u: f64 = c.parse().unwrap();
                *c = format!("{:?}", lo + (u + 1.0) / 2.0 * width);
            }
            rescaled.push_str(&cells.join(","));
            rescaled.push('\n');
        }
        let raw_scaled = parse_design_table(rescaled.as_bytes(), &scaled).unwrap();

        let w = |t| {
            let model = fit_quadratic(t, "f", FitOptions::default()).unwrap();
            let sub = eigendecompose(&covariance_analytic(&model)).unwrap();
            sub.with_dimension(1, false).unwrap().active().unwrap()
        };
        prop_assert!(subspace_angle(&w(&raw_unit), &w(&raw_scaled)) < 1e-6);
    }
}

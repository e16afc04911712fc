use wavegal::harness::*;

fn scratch(tag: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("wavegal-{tag}-{}", std::process::id()))
}

#[test]
fn two_level_study_with_exact_solution() {
    let dir = scratch("circle");
    let cfg = StudyConfig {
        example: "circle-1e6".into(),
        j_min: 4,
        j_max: 5,
        out: Some(dir.clone()),
        ..Default::default()
    };
    let outcome = run_study(&cfg).unwrap();
    assert_eq!(outcome.rows.len(), 4);
    for basis in [BasisKind::Augmented, BasisKind::Standard] {
        let rows: Vec<_> = outcome.block(basis).collect();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].l2_order.is_none() && rows[0].h1_order.is_none());
        assert!(rows[1].l2_order.unwrap().is_finite() && rows[1].h1_order.unwrap().is_finite());
        assert!(rows.iter().all(|r| r.failure.is_none()));
    }
    for level in [4u32, 5] {
        let n = (1usize << level) - 1;
        assert_eq!(
            outcome.row(BasisKind::Standard, level).unwrap().unknowns,
            n * n
        );
    }
    assert_eq!(outcome.row(BasisKind::Augmented, 4).unwrap().unknowns, 2345);
    assert_eq!(
        outcome.row(BasisKind::Augmented, 5).unwrap().unknowns,
        10401
    );
    assert!((outcome.contrast - 1e6).abs() < 1e-6);

    let text = std::fs::read_to_string(dir.join("study.csv")).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "J,NJ,kappa,rel_l2,l2_order,rel_h1,h1_order,basis");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].ends_with(",augmented") && lines[4].ends_with(",standard"));
    let svg = std::fs::read_to_string(dir.join("errors.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(svg.contains("slope"));
    let saved = StudyConfig::from_file(&dir.join("config.toml")).unwrap();
    assert_eq!(saved, cfg);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn identical_configs_give_identical_tables() {
    let cfg = StudyConfig {
        example: "star-a0.01".into(),
        j_min: 4,
        j_max: 4,
        cond: CondSetting::Dense,
        bases: vec![BasisKind::Standard, BasisKind::Augmented],
        ..Default::default()
    };
    let a = table_csv(&run_study(&cfg).unwrap().rows).unwrap();
    let b = table_csv(&run_study(&cfg).unwrap().rows).unwrap();
    assert_eq!(a, b);
    assert!(a.lines().nth(1).unwrap().ends_with(",standard"));
}

#[test]
fn reference_mode_measures_against_a_finer_solution() {
    let cfg = StudyConfig {
        example: "circle-poisson".into(),
        j_min: 4,
        j_max: 4,
        reference_level: 5,
        bases: vec![BasisKind::Augmented],
        ..Default::default()
    };
    let outcome = run_study(&cfg).unwrap();
    assert_eq!(outcome.reference_level, Some(5));
    let e = outcome.rows[0].errors.unwrap();
    assert!(e.rel_l2 > 0.0 && e.rel_l2 < 0.1, "{e:?}");

    let bad = StudyConfig {
        reference_level: 4,
        ..cfg
    };
    assert!(run_study(&bad).is_err());
}

#[test]
fn failing_rows_are_recorded_and_the_study_continues() {
    // the coefficient is undefined in a strip that only level-5 quadrature
    // points reach
    let mut p = registry_get("smooth-sine").unwrap();
    let a: wavegal::assembly::ScalarField =
        std::sync::Arc::new(|x, _| if x > 0.998 { f64::NAN } else { 1.0 });
    p.coefficient.plus = a.clone();
    p.coefficient.minus = a;
    let cfg = StudyConfig {
        j_min: 4,
        j_max: 5,
        bases: vec![BasisKind::Standard, BasisKind::Augmented],
        ..Default::default()
    };
    let outcome = run_study_for(&p, &cfg).unwrap();
    assert_eq!(outcome.rows.len(), 4);
    for basis in [BasisKind::Standard, BasisKind::Augmented] {
        let ok = outcome.row(basis, 4).unwrap();
        let bad = outcome.row(basis, 5).unwrap();
        assert!(ok.failure.is_none() && ok.errors.is_some(), "{ok:?}");
        assert!(bad.failure.is_some() && bad.l2_order.is_none(), "{bad:?}");
    }
    let csv = table_csv(&outcome.rows).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn guard_and_grid_preconditions() {
    let over = StudyConfig {
        j_max: 8,
        error_grid_level: 12,
        ..Default::default()
    };
    assert!(matches!(
        run_study(&over),
        Err(wavegal::Error::MemoryGuard { .. })
    ));
    let coarse_grid = StudyConfig {
        error_grid_level: 7,
        ..Default::default()
    };
    assert!(matches!(
        run_study(&coarse_grid),
        Err(wavegal::Error::Config(_))
    ));
}

#[test]
fn every_registered_example_assembles_at_level_four() {
    for e in EXAMPLES {
        let cfg = StudyConfig {
            example: e.name.into(),
            j_min: 4,
            j_max: 4,
            reference_level: 5,
            bases: vec![BasisKind::Standard],
            ..Default::default()
        };
        let outcome = run_study(&cfg).unwrap();
        let row = &outcome.rows[0];
        assert!(row.failure.is_none(), "{}: {:?}", e.name, row.failure);
        assert!(row.errors.unwrap().rel_l2.is_finite());
    }
}

use std::path::{Path, PathBuf};

use rotsym::io::{load_experiment, load_sample, DataFormat, DatasetSpec};
use rotsym::mc::Figure;
use rotsym::Error;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

fn spec_for(path: PathBuf) -> DatasetSpec {
    let format = if path.extension().is_some_and(|e| e == "angles") {
        DataFormat::AnglesDeg
    } else {
        DataFormat::Cartesian
    };
    DatasetSpec { path, format, p: None }
}

fn error_line(e: &Error) -> Option<usize> {
    match e {
        Error::Parse { line, .. } | Error::Normalization { line, .. } => Some(*line),
        _ => None,
    }
}

#[test]
fn every_malformed_fixture_is_rejected_at_its_row() {
    let expected = [
        ("trailing_comma.csv", 3),
        ("non_numeric.csv", 2),
        ("not_unit.csv", 3),
        ("short_row.csv", 2),
        ("long_row.csv", 2),
        ("nan.csv", 2),
        ("zero_row.csv", 1),
        ("empty.csv", 1),
        ("colatitude_range.angles", 2),
        ("longitude_range.angles", 2),
        ("short_angle_row.angles", 2),
    ];
    let dir = fixture("malformed");
    let on_disk = std::fs::read_dir(&dir).unwrap().count();
    assert_eq!(on_disk, expected.len(), "every fixture needs an expected row");
    for (name, line) in expected {
        let err = load_sample(&spec_for(dir.join(name))).expect_err(name);
        assert_eq!(error_line(&err), Some(line), "{name}: {err}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn not_unit_reports_the_norm() {
    let err = load_sample(&spec_for(fixture("malformed/not_unit.csv"))).unwrap_err();
    match err {
        Error::Normalization { norm, .. } => assert!((norm - 3f64.sqrt()).abs() < 1e-12),
        other => panic!("{other}"),
    }
}

#[test]
fn non_numeric_reports_the_column() {
    match load_sample(&spec_for(fixture("malformed/non_numeric.csv"))).unwrap_err() {
        Error::Parse { column, .. } => assert_eq!(column, Some(2)),
        other => panic!("{other}"),
    }
}

#[test]
fn valid_fixtures_load() {
    let s = load_sample(&spec_for(fixture("valid/cartesian.csv"))).unwrap();
    assert_eq!((s.len(), s.dim()), (4, 3));
    assert_eq!(s.row(2), &[0.6, 0.8, 0.0]);
    for row in s.rows() {
        assert!((row.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    let a = load_sample(&spec_for(fixture("valid/angles.angles"))).unwrap();
    let want = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
    for (row, w) in a.rows().zip(want) {
        for (x, y) in row.iter().zip(w) {
            assert!((x - y).abs() < 1e-15, "{row:?} vs {w:?}");
        }
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_sample(&spec_for(fixture("nope.csv"))).unwrap_err();
    assert!(matches!(err, Error::Io(_)));
}

#[test]
fn repository_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cases = [
        ("fig1.conf", Figure::Fig1),
        ("fig2.conf", Figure::Fig2),
        ("fig3.conf", Figure::Fig3),
        ("thm21.conf", Figure::Thm21),
    ];
    for (name, fig) in cases {
        let spec = load_experiment(&root.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(spec.figure, fig);
    }
}

#[test]
fn config_errors_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "figure=fig1\nalpha=1.5\n").unwrap();
    match load_experiment(&path).unwrap_err() {
        Error::Config { key, .. } => assert_eq!(key, "alpha"),
        other => panic!("{other}"),
    }
}

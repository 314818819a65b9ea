use std::io::Write;

use edr_core::risk::{risk_report, RiskReport};
use edr_core::{load_returns_csv, Error, InputMode, ReturnSeries};

fn write_csv(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn prices_become_simple_returns() {
    let f = write_csv("date,close\n2020-01-02,100\n2020-01-03,110\n2020-01-06,99\n");
    let s = load_returns_csv(f.path(), InputMode::Prices).unwrap();
    assert_eq!(s.len(), 2);
    assert!((s.values()[0] - 0.1).abs() < 1e-15);
    assert!((s.values()[1] + 0.1).abs() < 1e-15);
    assert_eq!(s.dates()[0].to_string(), "2020-01-03");
}

#[test]
fn returns_without_header() {
    let f = write_csv("2020-01-02,0.01\n2020-01-03,-0.02\n");
    let s = load_returns_csv(f.path(), InputMode::Returns).unwrap();
    assert_eq!(s.values(), &[0.01, -0.02]);
    assert!(!s.label().is_empty());
}

#[test]
fn bad_rows_report_line_numbers() {
    let f = write_csv("date,value\n2020-01-02,0.01\n2020-01-03,abc\n");
    match load_returns_csv(f.path(), InputMode::Returns) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    let f = write_csv("2020-01-03,0.01\n2020-01-02,0.01\n");
    assert!(matches!(
        load_returns_csv(f.path(), InputMode::Returns),
        Err(Error::Ordering { line: 2, .. })
    ));
    let f = write_csv("2020-01-02,10\n2020-01-03,0\n");
    assert!(load_returns_csv(f.path(), InputMode::Prices).is_err());
    let f = write_csv("2020-01-02,-1.0\n");
    assert!(load_returns_csv(f.path(), InputMode::Returns).is_err());
}

#[test]
fn missing_file_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = load_returns_csv(dir.path().join("absent.csv"), InputMode::Returns).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn report_round_trips_through_json() {
    let s = ReturnSeries::from_values("x", vec![0.1, -0.05, 0.02, -0.2, 0.3]).unwrap();
    let rep = risk_report(&s).unwrap();
    let json = serde_json::to_string(&rep).unwrap();
    let back: RiskReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, rep);
    assert_eq!(rep.csv_record().len(), RiskReport::CSV_HEADER.len());
}

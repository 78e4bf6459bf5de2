use std::path::PathBuf;

use proptest::prelude::*;
use spheat::catalog_report::*;
use spheat::thermal_core::{format_kelvin, Mode};
use spheat::Error;

fn catalog() -> Vec<ExperimentRecord> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/oscillators.csv");
    load_catalog(&path).unwrap()
}

// Published DP table: display exponent, bracketed, bold; rows f = 1e5 … 1 Hz, columns Q = 1e2 … 1e6.
const EXPONENTS: [[i32; 5]; 6] = [
    [-8, -7, -6, -5, -4],
    [-7, -6, -5, -4, -3],
    [-6, -5, -4, -3, -2],
    [-5, -4, -3, -2, -1],
    [-4, -3, -2, -1, 0],
    [-3, -2, -1, 0, 1],
];
const BRACKETED: [[bool; 5]; 6] = [
    [true, true, true, false, false],
    [true, false, false, false, false],
    [false; 5],
    [false; 5],
    [false; 5],
    [false; 5],
];
const BOLD: [[bool; 5]; 6] = [
    [false; 5],
    [false; 5],
    [false, false, false, false, true],
    [false, false, false, true, true],
    [false, false, true, true, true],
    [false, true, true, true, true],
];

#[test]
fn heating_table_is_reproduced_cell_by_cell() {
    let table = dp_table(&PAPER_FREQS, &PAPER_QUALITIES, Mode::PaperCalibrated).unwrap();
    assert_eq!(table.len(), 6);
    for (i, row) in table.iter().enumerate() {
        assert_eq!(row.len(), 5);
        for (j, cell) in row.iter().enumerate() {
            let at = format!("f={} Q={}", cell.freq_hz, cell.quality);
            assert_eq!(display_exponent(cell.dt), EXPONENTS[i][j], "{at}");
            assert_eq!(cell.dt_display, 10f64.powi(EXPONENTS[i][j]), "{at}");
            assert_eq!(!cell.classical, BRACKETED[i][j], "{at}");
            assert_eq!(cell.emphasized, BOLD[i][j], "{at}");
            assert_eq!(cell.mode, Mode::PaperCalibrated);
        }
    }
    let flat: Vec<&TableCell> = table.iter().flatten().collect();
    assert_eq!(flat.iter().filter(|c| !c.classical).count(), 4);
    assert_eq!(flat.iter().filter(|c| c.emphasized).count(), 10);
}

#[test]
fn heating_table_spot_values() {
    let cell = |f: f64, q: f64| dp_table(&[f], &[q], Mode::PaperCalibrated).unwrap()[0][0];
    let a = cell(1e3, 1e6);
    assert!((a.dt - 6.366e-3).abs() < 1e-6);
    assert_eq!(cell_label(&a), "*1e-2 K*");
    assert_eq!(cell_label(&cell(1e5, 1e2)), "[1e-8 K]");
    assert_eq!(cell_label(&cell(1.0, 1e6)), "*1e1 K*");
    assert_eq!(cell_label(&cell(1e3, 1e4)), "1e-4 K");
}

#[test]
fn catalog_is_reproduced_to_two_figures() {
    let recs = catalog();
    let expected = [
        ("1.6e-1", true),
        ("6.4e0", true),
        ("4.4e-9", false),
        ("1.9e-7", false),
    ];
    for (r, (dt, classical)) in recs.iter().zip(expected) {
        let row = evaluate(r, Model::Dp, &EvalSettings::default()).unwrap();
        assert_eq!(format_kelvin(row.dt), dt, "{}", r.name);
        assert_eq!(row.classical, classical, "{}", r.name);
        assert_eq!(row.mode, Mode::PaperCalibrated);
    }
}

#[test]
fn first_principles_rows_carry_the_ratio() {
    for r in catalog() {
        let settings = EvalSettings {
            mode: Mode::FirstPrinciples,
            ..EvalSettings::default()
        };
        let fp = evaluate(&r, Model::Dp, &settings).unwrap();
        let paper = evaluate(&r, Model::Dp, &EvalSettings::default()).unwrap();
        assert_eq!(fp.mode, Mode::FirstPrinciples);
        assert!((paper.dt / fp.dt - fp.paper_to_first_principles).abs() < 1e-9);
        assert!((fp.paper_to_first_principles - 6.7).abs() < 0.3);
    }
}

#[test]
fn csl_rows_and_bounds() {
    let recs = catalog();
    let disc = find_record(&recs, "suspended disc").unwrap();
    let settings = EvalSettings {
        dt_max: Some(5.1),
        ..EvalSettings::default()
    };
    let row = evaluate(disc, Model::Csl, &settings).unwrap();
    assert!((row.dt - 51.0).abs() < 0.05 * 51.0);
    let bound = row.lambda_bound.unwrap();
    assert!((bound - 2.2e-9).abs() < 0.05 * 2.2e-9);
    let exact = lambda_bound(disc, row.dt).unwrap();
    assert!((exact - 2.2e-8).abs() < 1e-20);
    let ratio = row.paper_to_first_principles / (4.0 * std::f64::consts::PI.powi(2));
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");

    let results = evaluate_catalog(&recs, Model::Csl, &EvalSettings::default());
    assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 1);
    assert!(results
        .iter()
        .filter_map(|r| r.as_ref().err())
        .all(|e| matches!(e, Error::Missing(_))));
    assert!(find_record(&recs, "nope").is_err());
}

#[test]
fn reports_in_every_format() {
    let recs = catalog();
    let rows: Vec<EvaluationRow> = evaluate_catalog(&recs, Model::Dp, &EvalSettings::default())
        .into_iter()
        .collect::<spheat::Result<_>>()
        .unwrap();

    let mut csv = Vec::new();
    emit_report(&rows[..1], ReportFormat::Csv, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], EvaluationRow::HEADER.join(","));
    assert!(lines[1].contains("PAPER-CALIBRATED"));

    let mut json = Vec::new();
    emit_report(&rows, ReportFormat::Json, &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 4);
    let keys: Vec<&str> = arr[0].as_object().unwrap().keys().map(String::as_str).collect();
    let mut want: Vec<&str> = EvaluationRow::HEADER.to_vec();
    want.sort_unstable();
    let mut got = keys.clone();
    got.sort_unstable();
    assert_eq!(got, want);

    let table = dp_table(&PAPER_FREQS, &PAPER_QUALITIES, Mode::PaperCalibrated).unwrap();
    let cells: Vec<TableCell> = table.into_iter().flatten().collect();
    let mut csv = Vec::new();
    emit_report(&cells, ReportFormat::Csv, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 31);

    let mut plot = Vec::new();
    emit_report(&cells, ReportFormat::Plotdata, &mut plot).unwrap();
    let plot = String::from_utf8(plot).unwrap();
    let blocks: Vec<&str> = plot.split("\n\n").collect();
    assert_eq!(blocks.len(), 5);
    for b in &blocks {
        let data = b.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(data, 6);
        assert!(b
            .lines()
            .filter(|l| !l.starts_with('#'))
            .all(|l| l.split(' ').count() == 2));
    }
}

#[test]
fn empty_input_gives_header_only() {
    let none: Vec<EvaluationRow> = Vec::new();
    let mut csv = Vec::new();
    emit_report(&none, ReportFormat::Csv, &mut csv).unwrap();
    assert_eq!(
        String::from_utf8(csv).unwrap().trim_end(),
        EvaluationRow::HEADER.join(",")
    );
    let mut json = Vec::new();
    emit_report(&none, ReportFormat::Json, &mut json).unwrap();
    assert_eq!(String::from_utf8(json).unwrap().trim(), "[]");
}

#[test]
fn unwritable_destination_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    let none: Vec<TableCell> = Vec::new();
    let err = emit_report_to(&none, ReportFormat::Csv, Some(&path)).unwrap_err();
    assert!(err.is_io());
}

#[test]
fn discrepancy_ledger_records_all_three_gaps() {
    let ledger = discrepancy_ledger().unwrap();
    assert_eq!(ledger.len(), 3);
    assert!((ledger[0].ratio - 6.7).abs() < 0.3);
    assert!((ledger[1].ratio / (4.0 * std::f64::consts::PI.powi(2)) - 1.0).abs() < 0.05);
    assert!((ledger[2].evaluated - 6.03).abs() < 0.06);
    assert!(ledger[2].note.contains("order of magnitude"));
    let text = format_ledger(&ledger);
    assert_eq!(text.lines().count(), 4);
}

fn positive() -> impl Strategy<Value = f64> {
    (-20.0f64..20.0).prop_map(|e| 10f64.powf(e))
}

proptest! {
    #[test]
    fn cells_depend_only_on_tau(f in 1e-2f64..1e6, q in 1.0f64..1e7, scale in 1e-3f64..1e3) {
        let a = dp_table(&[f], &[q], Mode::PaperCalibrated).unwrap()[0][0];
        let b = dp_table(&[f * scale], &[q * scale], Mode::PaperCalibrated).unwrap()[0][0];
        prop_assert!((a.dt - b.dt).abs() <= 1e-12 * a.dt);
        let fa = dp_table(&[f], &[q], Mode::FirstPrinciples).unwrap()[0][0];
        let fb = dp_table(&[f * scale], &[q * scale], Mode::FirstPrinciples).unwrap()[0][0];
        prop_assert!((fa.dt - fb.dt).abs() <= 1e-12 * fa.dt);
    }

    #[test]
    fn csv_round_trip_is_exact(
        name in "[a-z][a-z ,]{0,12}",
        vals in prop::array::uniform8(positive()),
        thickness in prop::option::of(positive()),
        bound in prop::option::of(positive()),
        classical in any::<bool>(),
    ) {
        let row = EvaluationRow {
            name,
            mass_kg: vals[0],
            freq_hz: vals[1],
            quality: vals[2],
            temp_k: vals[3],
            density_kg_m3: vals[4],
            thickness_m: thickness,
            tau_s: vals[5],
            model: Model::Csl,
            mode: Mode::FirstPrinciples,
            dt: vals[6],
            classical,
            lambda_bound: bound,
            paper_to_first_principles: vals[7],
        };
        let mut buf = Vec::new();
        emit_report(std::slice::from_ref(&row), ReportFormat::Csv, &mut buf).unwrap();
        let back: Vec<EvaluationRow> = read_report_csv(&buf[..]).unwrap();
        prop_assert_eq!(back, vec![row]);
    }

    #[test]
    fn table_csv_round_trip_is_exact(f in positive(), q in positive()) {
        let cells = dp_table(&[f], &[q], Mode::PaperCalibrated).unwrap().remove(0);
        let mut buf = Vec::new();
        emit_report(&cells, ReportFormat::Csv, &mut buf).unwrap();
        let back: Vec<TableCell> = read_report_csv(&buf[..]).unwrap();
        prop_assert_eq!(back, cells);
    }
}

//! Oscillator catalogs, heating tables and report emission.
//!
//! Catalog files are CSV with the exact header
//! `name,mass_kg,freq_hz,quality,temp_k,density_kg_m3,thickness_m`. A
//! field may carry its own unit after a space (`5 mg`, `0.02 cm`); bare
//! numbers are in the unit the column name states. Density defaults to
//! 2000 kg/m³ and thickness may be left empty, but then CSL evaluation is
//! refused.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse_models::{
    CslParams, DpParams, DENSITY_DEFAULT, LAMBDA_CSL_REFERENCE, LATTICE_DEFAULT, SIGMA_DP_STRONGEST,
};
use crate::error::{Error, Result};
use crate::quantities::{parse_quantity, Constants, PhysQuantity, Unit};
use crate::thermal_core::{self, HeatingEstimate, Mode, OscillatorSpec};

pub const CATALOG_HEADER: [&str; 7] = [
    "name",
    "mass_kg",
    "freq_hz",
    "quality",
    "temp_k",
    "density_kg_m3",
    "thickness_m",
];

/// Frequency rows of the published DP table, top to bottom.
pub const PAPER_FREQS: [f64; 6] = [1e5, 1e4, 1e3, 1e2, 10.0, 1.0];
pub const PAPER_QUALITIES: [f64; 5] = [1e2, 1e3, 1e4, 1e5, 1e6];

/// Table cells whose rounded increment reaches 10^-2 K are emphasized.
pub const EMPHASIS_EXPONENT: i32 = -2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub name: String,
    pub mass_kg: f64,
    pub freq_hz: f64,
    pub quality: f64,
    pub temp_k: f64,
    pub density_kg_m3: f64,
    pub thickness_m: Option<f64>,
}

impl ExperimentRecord {
    /// τ = Q / (2πf).
    pub fn tau(&self) -> f64 {
        self.quality / (2.0 * PI * self.freq_hz)
    }

    pub fn spec(&self) -> Result<OscillatorSpec> {
        OscillatorSpec::from_frequency(self.mass_kg, self.freq_hz, self.quality)
    }

    fn tau_quantity(&self) -> Result<PhysQuantity> {
        PhysQuantity::new(self.tau(), Unit::Second)
    }

    fn thickness(&self) -> Result<f64> {
        self.thickness_m.ok_or_else(|| {
            Error::Missing(format!(
                "record `{}` has no thickness; CSL evaluation needs one",
                self.name
            ))
        })
    }
}

pub fn load_catalog(path: &Path) -> Result<Vec<ExperimentRecord>> {
    parse_catalog(fs::File::open(path)?)
}

pub fn parse_catalog<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = reader.records();
    let header = match rows.next() {
        Some(h) => h?,
        None => {
            return Err(parse_error(
                1,
                "header",
                "empty file; expected the catalog header",
            ))
        }
    };
    if header.iter().ne(CATALOG_HEADER.iter().copied()) {
        return Err(parse_error(
            1,
            "header",
            &format!("expected `{}`", CATALOG_HEADER.join(",")),
        ));
    }
    let mut out = Vec::new();
    for row in rows {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.iter().all(str::is_empty) {
            continue;
        }
        if row.len() > CATALOG_HEADER.len() {
            return Err(parse_error(
                line,
                "row",
                &format!("{} fields, expected at most 7", row.len()),
            ));
        }
        let field = |i: usize| row.get(i).unwrap_or("");
        let number = |i: usize, unit: Unit| -> Result<Option<f64>> {
            let text = field(i);
            if text.is_empty() {
                return Ok(None);
            }
            let v = parse_quantity(text, unit)
                .map_err(|e| parse_error(line, CATALOG_HEADER[i], &e.to_string()))?
                .value();
            if !(v > 0.0) {
                return Err(parse_error(
                    line,
                    CATALOG_HEADER[i],
                    &format!("must be positive, got {v}"),
                ));
            }
            Ok(Some(v))
        };
        let required = |i: usize, unit: Unit| -> Result<f64> {
            number(i, unit)?.ok_or_else(|| parse_error(line, CATALOG_HEADER[i], "missing value"))
        };
        let name = field(0);
        if name.is_empty() {
            return Err(parse_error(line, "name", "missing value"));
        }
        out.push(ExperimentRecord {
            name: name.to_string(),
            mass_kg: required(1, Unit::Kilogram)?,
            freq_hz: required(2, Unit::Hertz)?,
            quality: required(3, Unit::Si(crate::quantities::Dimension::DIMENSIONLESS))?,
            temp_k: required(4, Unit::Kelvin)?,
            density_kg_m3: number(5, Unit::KilogramPerCubicMeter)?.unwrap_or(DENSITY_DEFAULT),
            thickness_m: number(6, Unit::Meter)?,
        });
    }
    Ok(out)
}

fn parse_error(line: usize, column: &str, message: &str) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "DP")]
    Dp,
    #[serde(rename = "CSL")]
    Csl,
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dp" => Ok(Model::Dp),
            "csl" => Ok(Model::Csl),
            _ => Err(Error::Config(format!("unknown model `{s}`; expected dp or csl"))),
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Model::Dp => "DP",
            Model::Csl => "CSL",
        })
    }
}

/// Knobs of an evaluation run. The microscopic DP parameters are inputs,
/// not constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSettings {
    pub mode: Mode,
    /// λ / 2.2e-8 s⁻¹
    pub lambda_scale: f64,
    /// Observed increment limit used for a CSL λ bound, if any.
    pub dt_max: Option<f64>,
    pub sigma_dp: f64,
    pub lattice_a: f64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            mode: Mode::PaperCalibrated,
            lambda_scale: 1.0,
            dt_max: None,
            sigma_dp: SIGMA_DP_STRONGEST,
            lattice_a: LATTICE_DEFAULT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub freq_hz: f64,
    pub quality: f64,
    #[serde(rename = "dT")]
    pub dt: f64,
    #[serde(rename = "dT_display")]
    pub dt_display: f64,
    pub classical: bool,
    pub emphasized: bool,
    pub mode: Mode,
}

/// Nearest power of ten in log10, ties rounding up.
pub fn display_exponent(dt: f64) -> i32 {
    (dt.log10() + 0.5).floor() as i32
}

fn power_of_ten(exp: i32) -> f64 {
    // correctly rounded, unlike repeated multiplication
    format!("1e{exp}").parse().expect("valid float literal")
}

fn dp_increment(tau: f64, density: f64, settings: &EvalSettings, c: &Constants) -> Result<HeatingEstimate> {
    let tau = PhysQuantity::new(tau, Unit::Second)?;
    match settings.mode {
        Mode::PaperCalibrated => thermal_core::delta_t_dp_paper(&tau),
        Mode::FirstPrinciples => {
            let params = DpParams::from_si(settings.sigma_dp, settings.lattice_a, density)?;
            thermal_core::delta_t_dp_first_principles(&tau, &params, c)
        }
    }
}

/// DP heating over a frequency × quality grid, one row per frequency.
pub fn dp_table(freqs: &[f64], qualities: &[f64], mode: Mode) -> Result<Vec<Vec<TableCell>>> {
    let c = Constants::codata();
    let settings = EvalSettings {
        mode,
        ..EvalSettings::default()
    };
    freqs
        .iter()
        .map(|&f| {
            qualities
                .iter()
                .map(|&q| {
                    if !(f > 0.0 && q > 0.0) {
                        return Err(Error::Domain(format!(
                            "frequency and quality must be positive, got {f}, {q}"
                        )));
                    }
                    let dt = dp_increment(q / (2.0 * PI * f), DENSITY_DEFAULT, &settings, &c)?.kelvin();
                    let omega = PhysQuantity::new(2.0 * PI * f, Unit::Hertz)?;
                    let cls = thermal_core::classicality(&PhysQuantity::new(dt, Unit::Kelvin)?, &omega, &c)?;
                    let exp = display_exponent(dt);
                    Ok(TableCell {
                        freq_hz: f,
                        quality: q,
                        dt,
                        dt_display: power_of_ten(exp),
                        classical: cls.classical,
                        emphasized: exp >= EMPHASIS_EXPONENT,
                        mode,
                    })
                })
                .collect()
        })
        .collect()
}

/// Log-spaced decades from `lo` to `hi` inclusive.
pub fn decades(lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Domain(format!("need 0 < min <= max, got {lo}, {hi}")));
    }
    let (a, b) = (lo.log10().round() as i32, hi.log10().round() as i32);
    Ok((a..=b).map(power_of_ten).collect())
}

/// How a cell prints in the published table: brackets for non-classical,
/// `*…*` for emphasized.
pub fn cell_label(cell: &TableCell) -> String {
    let exp = display_exponent(cell.dt);
    let body = format!("1e{exp} K");
    match (cell.classical, cell.emphasized) {
        (false, _) => format!("[{body}]"),
        (true, true) => format!("*{body}*"),
        (true, false) => body,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationRow {
    pub name: String,
    pub mass_kg: f64,
    pub freq_hz: f64,
    pub quality: f64,
    pub temp_k: f64,
    pub density_kg_m3: f64,
    pub thickness_m: Option<f64>,
    pub tau_s: f64,
    pub model: Model,
    pub mode: Mode,
    #[serde(rename = "dT")]
    pub dt: f64,
    pub classical: bool,
    pub lambda_bound: Option<f64>,
    /// Paper-calibrated over first-principles increment for this record.
    pub paper_to_first_principles: f64,
}

fn csl_increment(
    record: &ExperimentRecord,
    mode: Mode,
    lambda_scale: f64,
    c: &Constants,
) -> Result<HeatingEstimate> {
    let d = record.thickness()?;
    let tau = record.tau_quantity()?;
    let density = PhysQuantity::new(record.density_kg_m3, Unit::KilogramPerCubicMeter)?;
    let thickness = PhysQuantity::new(d, Unit::Meter)?;
    match mode {
        Mode::PaperCalibrated => thermal_core::delta_t_csl_paper(&tau, &density, &thickness, lambda_scale),
        Mode::FirstPrinciples => {
            if lambda_scale == 0.0 {
                return Ok(HeatingEstimate {
                    delta_t: PhysQuantity::new(0.0, Unit::Kelvin)?,
                    mode,
                });
            }
            let params = CslParams::from_si(LAMBDA_CSL_REFERENCE * lambda_scale, record.density_kg_m3, d)?;
            thermal_core::delta_t_csl_first_principles(&tau, &params, c)
        }
    }
}

pub fn evaluate(record: &ExperimentRecord, model: Model, settings: &EvalSettings) -> Result<EvaluationRow> {
    let c = Constants::codata();
    let tau = record.tau();
    let (dt, ratio, lambda_bound) = match model {
        Model::Dp => {
            let dt = dp_increment(tau, record.density_kg_m3, settings, &c)?.kelvin();
            let paper = dp_increment(
                tau,
                record.density_kg_m3,
                &EvalSettings {
                    mode: Mode::PaperCalibrated,
                    ..*settings
                },
                &c,
            )?;
            let fp = dp_increment(
                tau,
                record.density_kg_m3,
                &EvalSettings {
                    mode: Mode::FirstPrinciples,
                    ..*settings
                },
                &c,
            )?;
            (dt, paper.kelvin() / fp.kelvin(), None)
        }
        Model::Csl => {
            let dt = csl_increment(record, settings.mode, settings.lambda_scale, &c)?.kelvin();
            let paper = csl_increment(record, Mode::PaperCalibrated, 1.0, &c)?.kelvin();
            let fp = csl_increment(record, Mode::FirstPrinciples, 1.0, &c)?.kelvin();
            let bound = match settings.dt_max {
                Some(limit) => Some(lambda_bound(record, limit)?),
                None => None,
            };
            (dt, paper / fp, bound)
        }
    };
    let omega = PhysQuantity::new(2.0 * PI * record.freq_hz, Unit::Hertz)?;
    let cls = thermal_core::classicality(&PhysQuantity::new(dt, Unit::Kelvin)?, &omega, &c)?;
    Ok(EvaluationRow {
        name: record.name.clone(),
        mass_kg: record.mass_kg,
        freq_hz: record.freq_hz,
        quality: record.quality,
        temp_k: record.temp_k,
        density_kg_m3: record.density_kg_m3,
        thickness_m: record.thickness_m,
        tau_s: tau,
        model,
        mode: settings.mode,
        dt,
        classical: cls.classical,
        lambda_bound,
        paper_to_first_principles: ratio,
    })
}

/// Evaluate every record; results keep catalog order.
pub fn evaluate_catalog(
    records: &[ExperimentRecord],
    model: Model,
    settings: &EvalSettings,
) -> Vec<Result<EvaluationRow>> {
    records.par_iter().map(|r| evaluate(r, model, settings)).collect()
}

/// Largest λ (s⁻¹) for which the calibrated CSL increment stays below `dt_max`.
pub fn lambda_bound(record: &ExperimentRecord, dt_max: f64) -> Result<f64> {
    let d = record.thickness()?;
    Ok(thermal_core::csl_lambda_bound(
        &record.tau_quantity()?,
        &PhysQuantity::new(record.density_kg_m3, Unit::KilogramPerCubicMeter)?,
        &PhysQuantity::new(d, Unit::Meter)?,
        &PhysQuantity::new(dt_max, Unit::Kelvin)?,
    )?
    .si_value())
}

pub fn find_record<'a>(records: &'a [ExperimentRecord], name: &str) -> Result<&'a ExperimentRecord> {
    records
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::Missing(format!("no record named `{name}` in the catalog")))
}

/// A published number set against its direct evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub published: f64,
    pub evaluated: f64,
    pub ratio: f64,
    pub note: String,
}

/// The known gaps between the published coefficients and direct
/// evaluation of the formulas they come from.
pub fn discrepancy_ledger() -> Result<Vec<Discrepancy>> {
    let c = Constants::codata();
    let one_second = PhysQuantity::new(1.0, Unit::Second)?;
    let dp =
        thermal_core::delta_t_dp_first_principles(&one_second, &DpParams::strongest(DENSITY_DEFAULT)?, &c)?
            .kelvin();
    let csl_params = CslParams::from_si(LAMBDA_CSL_REFERENCE, 1000.0, 0.01)?;
    let csl = thermal_core::delta_t_csl_first_principles(&one_second, &csl_params, &c)?.kelvin();
    let disc = OscillatorSpec::from_frequency(5e-6, 0.5, 5e5)?;
    let sql =
        thermal_core::sql_tradeoff(&disc, &PhysQuantity::new(2.0 * PI * 500.0, Unit::Hertz)?, &c)?.value();
    let entry = |quantity: &str, published: f64, evaluated: f64, note: String| Discrepancy {
        quantity: quantity.to_string(),
        published,
        evaluated,
        ratio: published / evaluated,
        note,
    };
    Ok(vec![
        entry(
            "DP heating per second of tau [K]",
            thermal_core::DP_PAPER_COEFFICIENT,
            dp,
            "sigma_dp = 1e-14 m, a = 5e-10 m, rho = 2 g/cm^3; source of the factor unknown".into(),
        ),
        entry(
            "CSL heating per second of tau at rho = 1 g/cm^3, d = 1 cm [K]",
            thermal_core::CSL_PAPER_COEFFICIENT,
            csl,
            format!(
                "lambda = 2.2e-8 s^-1, sigma_csl = 1e-7 m; ratio / 4pi^2 = {:.4}",
                thermal_core::CSL_PAPER_COEFFICIENT / csl / (4.0 * PI * PI)
            ),
        ),
        entry(
            "SQL tradeoff, suspended disc probed at 500 Hz [K]",
            37.0,
            sql,
            "published value matches only in order of magnitude".into(),
        ),
    ])
}

pub fn format_ledger(entries: &[Discrepancy]) -> String {
    let mut out = String::from("discrepancy ledger (published vs direct evaluation):\n");
    for e in entries {
        let _ = writeln!(
            out,
            "  {}: published {:.3e}, evaluated {:.4e}, ratio {:.4} ({})",
            e.quantity, e.published, e.evaluated, e.ratio, e.note
        );
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Plotdata,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plotdata" => Ok(ReportFormat::Plotdata),
            _ => Err(Error::Config(format!(
                "unknown format `{s}`; expected csv, json or plotdata"
            ))),
        }
    }
}

/// A row that can be written in every report format.
pub trait ReportRow: Serialize {
    const HEADER: &'static [&'static str];
    fn csv_fields(&self) -> Vec<String>;
    /// Series label and one (x, y) point of it.
    fn plot_point(&self) -> (String, f64, f64);
    /// Axis names for the plot header.
    const PLOT_AXES: (&'static str, &'static str);
}

/// 17 significant digits.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

impl ReportRow for TableCell {
    const HEADER: &'static [&'static str] = &[
        "freq_hz",
        "quality",
        "dT",
        "dT_display",
        "classical",
        "emphasized",
        "mode",
    ];
    const PLOT_AXES: (&'static str, &'static str) = ("freq_hz", "dT");

    fn csv_fields(&self) -> Vec<String> {
        vec![
            num(self.freq_hz),
            num(self.quality),
            num(self.dt),
            num(self.dt_display),
            self.classical.to_string(),
            self.emphasized.to_string(),
            self.mode.tag().to_string(),
        ]
    }

    fn plot_point(&self) -> (String, f64, f64) {
        (
            format!("Q={:e} {}", self.quality, self.mode),
            self.freq_hz,
            self.dt,
        )
    }
}

impl ReportRow for EvaluationRow {
    const HEADER: &'static [&'static str] = &[
        "name",
        "mass_kg",
        "freq_hz",
        "quality",
        "temp_k",
        "density_kg_m3",
        "thickness_m",
        "tau_s",
        "model",
        "mode",
        "dT",
        "classical",
        "lambda_bound",
        "paper_to_first_principles",
    ];
    const PLOT_AXES: (&'static str, &'static str) = ("tau_s", "dT");

    fn csv_fields(&self) -> Vec<String> {
        vec![
            self.name.clone(),
            num(self.mass_kg),
            num(self.freq_hz),
            num(self.quality),
            num(self.temp_k),
            num(self.density_kg_m3),
            opt(self.thickness_m),
            num(self.tau_s),
            self.model.to_string(),
            self.mode.tag().to_string(),
            num(self.dt),
            self.classical.to_string(),
            opt(self.lambda_bound),
            num(self.paper_to_first_principles),
        ]
    }

    fn plot_point(&self) -> (String, f64, f64) {
        (format!("{} {}", self.model, self.mode), self.tau_s, self.dt)
    }
}

pub fn emit_report<R: ReportRow, W: Write>(rows: &[R], format: ReportFormat, mut out: W) -> Result<()> {
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(R::HEADER)?;
            for r in rows {
                w.write_record(r.csv_fields())?;
            }
            w.flush()?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        ReportFormat::Plotdata => {
            let (x, y) = R::PLOT_AXES;
            writeln!(out, "# {x} {y}")?;
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for r in rows {
                let (label, px, py) = r.plot_point();
                match series.iter_mut().find(|(l, _)| *l == label) {
                    Some((_, pts)) => pts.push((px, py)),
                    None => series.push((label, vec![(px, py)])),
                }
            }
            for (k, (label, pts)) in series.iter().enumerate() {
                if k > 0 {
                    writeln!(out)?;
                }
                writeln!(out, "# {label}")?;
                for (px, py) in pts {
                    writeln!(out, "{} {}", num(*px), num(*py))?;
                }
            }
        }
    }
    Ok(())
}

/// Write to `path`, or to stdout when `path` is `None`.
pub fn emit_report_to<R: ReportRow>(rows: &[R], format: ReportFormat, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = std::io::BufWriter::new(fs::File::create(p)?);
            emit_report(rows, format, &mut w)?;
            w.flush()?;
            Ok(())
        }
        None => emit_report(rows, format, std::io::stdout().lock()),
    }
}

/// Read back rows written by [`emit_report`] as CSV.
pub fn read_report_csv<T: for<'de> Deserialize<'de>, R: Read>(input: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

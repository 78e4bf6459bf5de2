use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spheat::catalog_report::{self as report, EvalSettings, Model, ReportFormat, TableCell};
use spheat::collapse_models::{LATTICE_DEFAULT, SIGMA_DP_STRONGEST};
use spheat::fp_grid::{self, FpCheckConfig};
use spheat::langevin_sim::{self, SimRun};
use spheat::thermal_core::{Mode, TRANSIENT_MIN_QUALITY};
use spheat::{Error, Result};

#[derive(Parser)]
#[command(
    name = "spheat",
    version,
    about = "Spontaneous heating of damped oscillators under collapse models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    FirstPrinciples,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => Mode::PaperCalibrated,
            ModeArg::FirstPrinciples => Mode::FirstPrinciples,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Dp,
    Csl,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Plotdata,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
            FormatArg::Plotdata => ReportFormat::Plotdata,
        }
    }
}

#[derive(clap::Args)]
struct Output {
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

impl Output {
    fn emit<T: report::ReportRow>(&self, rows: &[T]) -> Result<()> {
        let r = report::emit_report_to(rows, self.format.into(), self.out.as_deref());
        match &self.out {
            Some(p) => at_path(p, r),
            None => r,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// DP heating over decades of frequency and quality factor
    DpTable {
        /// Lowest frequency in Hz
        #[arg(long, conflicts_with = "paper_axes")]
        fmin: Option<f64>,
        #[arg(long, conflicts_with = "paper_axes")]
        fmax: Option<f64>,
        #[arg(long, conflicts_with = "paper_axes")]
        qmin: Option<f64>,
        #[arg(long, conflicts_with = "paper_axes")]
        qmax: Option<f64>,
        /// f = 1e5 … 1 Hz, Q = 1e2 … 1e6 (the default when no range is given)
        #[arg(long)]
        paper_axes: bool,
        #[arg(long, value_enum, default_value = "paper")]
        mode: ModeArg,
        #[command(flatten)]
        output: Output,
    },
    /// Heating for every record of a catalog
    Evaluate {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "paper")]
        mode: ModeArg,
        /// λ_CSL in units of 2.2e-8 s⁻¹
        #[arg(long, default_value_t = 1.0)]
        lambda_scale: f64,
        /// Attach the CSL λ bound for this largest allowed increment (K)
        #[arg(long)]
        dtmax: Option<f64>,
        /// DP resolution length in m
        #[arg(long, default_value_t = SIGMA_DP_STRONGEST)]
        sigma_dp: f64,
        /// Lattice constant in m
        #[arg(long, default_value_t = LATTICE_DEFAULT)]
        lattice: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Largest λ_CSL compatible with an increment below --dtmax
    BoundLambda {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        name: String,
        /// Kelvin
        #[arg(long)]
        dtmax: f64,
    },
    /// Langevin ensemble run from a key = value config
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fokker–Planck stationarity suite from a key = value config
    FpCheck {
        #[arg(long)]
        config: PathBuf,
    },
}

fn axis(lo: Option<f64>, hi: Option<f64>, defaults: &[f64]) -> Result<Vec<f64>> {
    let min = defaults.iter().copied().fold(f64::INFINITY, f64::min);
    let max = defaults.iter().copied().fold(0.0, f64::max);
    report::decades(lo.unwrap_or(min), hi.unwrap_or(max))
}

fn at_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(
            io.kind(),
            format!("{}: {io}", path.display()),
        )),
        other => other,
    })
}

fn print_grid(table: &[Vec<TableCell>]) {
    for row in table {
        let cells: Vec<String> = row
            .iter()
            .map(|c| format!("{:>12}", report::cell_label(c)))
            .collect();
        eprintln!("{:>8e} Hz {}", row[0].freq_hz, cells.join(""));
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DpTable {
            fmin,
            fmax,
            qmin,
            qmax,
            paper_axes,
            mode,
            output,
        } => {
            let ranged = [fmin, fmax, qmin, qmax].iter().any(Option::is_some);
            let (freqs, qualities) = if paper_axes || !ranged {
                (report::PAPER_FREQS.to_vec(), report::PAPER_QUALITIES.to_vec())
            } else {
                let mut f = axis(fmin, fmax, &report::PAPER_FREQS)?;
                f.reverse();
                (f, axis(qmin, qmax, &report::PAPER_QUALITIES)?)
            };
            let table = report::dp_table(&freqs, &qualities, mode.into())?;
            print_grid(&table);
            let cells: Vec<TableCell> = table.into_iter().flatten().collect();
            output.emit(&cells)
        }
        Command::Evaluate {
            catalog,
            model,
            mode,
            lambda_scale,
            dtmax,
            sigma_dp,
            lattice,
            output,
        } => {
            let records = at_path(&catalog, report::load_catalog(&catalog))?;
            let model = match model {
                ModelArg::Dp => Model::Dp,
                ModelArg::Csl => Model::Csl,
            };
            let settings = EvalSettings {
                mode: mode.into(),
                lambda_scale,
                dt_max: dtmax,
                sigma_dp,
                lattice_a: lattice,
            };
            let mut rows = Vec::new();
            let mut refused = None;
            for (rec, res) in records
                .iter()
                .zip(report::evaluate_catalog(&records, model, &settings))
            {
                match res {
                    Ok(row) => rows.push(row),
                    Err(e) => {
                        eprintln!("refused `{}`: {e}", rec.name);
                        refused.get_or_insert(e);
                    }
                }
            }
            output.emit(&rows)?;
            eprint!("{}", report::format_ledger(&report::discrepancy_ledger()?));
            refused.map_or(Ok(()), Err)
        }
        Command::BoundLambda { catalog, name, dtmax } => {
            let records = at_path(&catalog, report::load_catalog(&catalog))?;
            let rec = report::find_record(&records, &name)?;
            let bound = report::lambda_bound(rec, dtmax)?;
            println!(
                "{name}: lambda_max = {bound:.3e} s^-1 for dT_max = {dtmax} K ({})",
                Mode::PaperCalibrated
            );
            Ok(())
        }
        Command::Simulate { config } => {
            let sim = at_path(&config, SimRun::from_file(&config))?;
            let quality = sim.config.spec.quality();
            if quality < TRANSIENT_MIN_QUALITY {
                eprintln!("warning: Q = {quality} < {TRANSIENT_MIN_QUALITY}; the predicted column assumes weak damping");
            }
            let reports = langevin_sim::run(&sim)?;
            println!("t,estimator,t_hat,std_err,predicted,within_4se,mean_x,mean_p,var_x,var_p");
            for r in &reports {
                let predicted = r.predicted.map(|p| format!("{p:.10e}")).unwrap_or_default();
                let within = r
                    .predicted
                    .map(|p| r.estimate.within(p, 4.0).to_string())
                    .unwrap_or_default();
                println!(
                    "{:.10e},{:?},{:.10e},{:.10e},{predicted},{within},{:.10e},{:.10e},{:.10e},{:.10e}",
                    r.time,
                    r.estimate.estimator,
                    r.estimate.t_hat,
                    r.estimate.std_err,
                    r.stats.mean_x.value,
                    r.stats.mean_p.value,
                    r.stats.var_x.value,
                    r.stats.var_p.value,
                );
            }
            Ok(())
        }
        Command::FpCheck { config } => {
            let cfg = at_path(&config, FpCheckConfig::from_file(&config))?;
            let r = fp_grid::fp_check(&cfg)?;
            println!("t_bath = {}", r.t_bath);
            println!("t_prime = {}", r.t_prime);
            println!(
                "residual = {:.4e} -> {:.4e} (ratio {:.3})",
                r.residual_coarse, r.residual_fine, r.refinement_ratio
            );
            println!("gibbs_drift = {:.3e}", r.gibbs_drift);
            println!("final T_x = {:.8}, T_p = {:.8}", r.final_t_x, r.final_t_p);
            println!("rel_error = {:.3e} (x), {:.3e} (p)", r.rel_error_x, r.rel_error_p);
            println!("mass_error = {:.3e}", r.mass_error);
            println!("clip_mass = {:.3e}", r.clip_mass);
            println!("wall_mass = {:.3e}", r.wall_mass);
            if r.passed() {
                println!("PASS");
                Ok(())
            } else {
                println!("FAIL");
                Err(Error::Validity("fp-check tolerances not met".into()))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

//! Ensembles of damped oscillators driven by thermal, spontaneous and
//! measurement momentum noise:
//!
//! ```text
//! dx = (p/m) dt
//! dp = −(mΩ²x + ηp) dt + sqrt(2 (D_th + D_sp + D_m)) dW
//! ```
//!
//! Each trajectory draws from its own ChaCha stream selected by
//! `(seed, trajectory index)`, so results do not depend on the thread
//! schedule. Temperature is read off one-shot samples of the ensemble.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::collapse_models::{DiffusionConstant, DiffusionSource};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::quantities::{Constants, PhysQuantity, Unit};
use crate::thermal_core::{self, OscillatorSpec};

/// Steps per oscillation period or relaxation time, whichever is shorter.
pub const MIN_STEPS_PER_TIMESCALE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// Canonical ensemble at the given temperature.
    Gibbs {
        temperature: f64,
    },
    Delta {
        x0: f64,
        p0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub spec: OscillatorSpec,
    pub t_bath: f64,
    pub d_sp: DiffusionConstant,
    pub d_m: DiffusionConstant,
    pub dt: f64,
    pub n_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub initial: InitialState,
    pub constants: Constants,
}

impl SimConfig {
    /// Reduced units (m = k_B = 1 unless `mass` says otherwise), no extra
    /// diffusion, Gibbs start at the bath temperature.
    pub fn reduced(
        spec: OscillatorSpec,
        t_bath: f64,
        dt: f64,
        n_steps: usize,
        n_traj: usize,
        seed: u64,
    ) -> Self {
        Self {
            spec,
            t_bath,
            d_sp: DiffusionConstant::zero(DiffusionSource::Dp),
            d_m: DiffusionConstant::zero(DiffusionSource::Measurement),
            dt,
            n_steps,
            n_traj,
            seed,
            initial: InitialState::Gibbs { temperature: t_bath },
            constants: Constants::reduced(),
        }
    }

    /// Steps needed to reach `horizon` at the configured `dt`.
    pub fn steps_for(&self, horizon: f64) -> usize {
        (horizon / self.dt).round() as usize
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    /// Largest admissible step, min(2π/Ω, τ)/50.
    pub fn max_dt(&self) -> f64 {
        let period = 2.0 * std::f64::consts::PI / self.spec.omega_value();
        period.min(self.spec.tau_value()) / MIN_STEPS_PER_TIMESCALE
    }

    pub fn d_th(&self) -> Result<DiffusionConstant> {
        thermal_core::d_th(&self.spec, &kelvin(self.t_bath)?, &self.constants)
    }

    pub fn d_total(&self) -> Result<f64> {
        Ok(self.d_th()?.value() + self.d_sp.value() + self.d_m.value())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Stability(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        let max = self.max_dt();
        if self.dt > max {
            return Err(Error::Stability(format!(
                "time step {:e} exceeds min(2π/Ω, τ)/50 = {max:e}",
                self.dt
            )));
        }
        if self.n_traj < 1 {
            return Err(Error::Domain("need at least one trajectory".into()));
        }
        if !(self.t_bath >= 0.0) {
            return Err(Error::Domain("bath temperature must be non-negative".into()));
        }
        if let InitialState::Gibbs { temperature } = self.initial {
            if !(temperature >= 0.0) {
                return Err(Error::Domain("initial temperature must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Build from `key = value` lines. Keys mirror the struct fields; the
    /// damping may be given as `eta` or `quality`, and `initial` is
    /// `gibbs:T0` or `delta:x0,p0`.
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        let constants = match kv.get_str("units").unwrap_or("reduced") {
            "reduced" => Constants::reduced(),
            "si" => Constants::codata(),
            other => {
                return Err(Error::Config(format!(
                    "units must be reduced or si, got `{other}`"
                )))
            }
        };
        let mass = kv.get_or("mass", 1.0)?;
        let omega = kv.get_or("omega", 1.0)?;
        let spec = match (kv.get::<f64>("eta")?, kv.get::<f64>("quality")?) {
            (Some(eta), None) => OscillatorSpec::from_values(mass, omega, eta)?,
            (None, Some(q)) => OscillatorSpec::with_quality(mass, omega, q)?,
            _ => return Err(Error::Config("give exactly one of `eta` or `quality`".into())),
        };
        let t_bath: f64 = kv.require("t_bath")?;
        let initial = match kv.get_str("initial") {
            None => InitialState::Gibbs { temperature: t_bath },
            Some(s) => parse_initial(s)?,
        };
        let dt = match kv.get::<f64>("dt")? {
            Some(dt) => dt,
            None => {
                let probe = SimConfig::reduced(spec, t_bath, 1.0, 0, 1, 0);
                probe.max_dt()
            }
        };
        let mut config = Self {
            spec,
            t_bath,
            d_sp: DiffusionConstant::from_value(kv.get_or("d_sp", 0.0)?, DiffusionSource::Dp)?,
            d_m: DiffusionConstant::from_value(kv.get_or("d_m", 0.0)?, DiffusionSource::Measurement)?,
            dt,
            n_steps: 0,
            n_traj: kv.get_or("n_traj", 1000)?,
            seed: kv.get_or("seed", 0)?,
            initial,
            constants,
        };
        config.n_steps = match (kv.get::<usize>("n_steps")?, kv.get::<f64>("horizon")?) {
            (Some(n), Some(h)) => {
                if dt * n as f64 + 1e-12 * h < h {
                    return Err(Error::Config(format!(
                        "dt * n_steps = {} does not cover horizon {h}",
                        dt * n as f64
                    )));
                }
                n
            }
            (Some(n), None) => n,
            (None, Some(h)) => (h / dt).ceil() as usize,
            (None, None) => config.steps_for(20.0 * spec.tau_value()),
        };
        Ok(config)
    }
}

fn parse_initial(s: &str) -> Result<InitialState> {
    let bad = || Error::Config(format!("initial must be gibbs:T0 or delta:x0,p0, got `{s}`"));
    let (kind, args) = s.split_once(':').ok_or_else(bad)?;
    match kind.trim() {
        "gibbs" => Ok(InitialState::Gibbs {
            temperature: args.trim().parse().map_err(|_| bad())?,
        }),
        "delta" => {
            let (x, p) = args.split_once(',').ok_or_else(bad)?;
            Ok(InitialState::Delta {
                x0: x.trim().parse().map_err(|_| bad())?,
                p0: p.trim().parse().map_err(|_| bad())?,
            })
        }
        _ => Err(bad()),
    }
}

fn kelvin(v: f64) -> Result<PhysQuantity> {
    PhysQuantity::new(v, Unit::Kelvin)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSample {
    pub x: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moment {
    pub value: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub mean_x: Moment,
    pub mean_p: Moment,
    pub var_x: Moment,
    pub var_p: Moment,
    pub n_samples: usize,
    pub horizon: f64,
}

impl EnsembleStats {
    pub fn from_samples(samples: &[PhaseSample], horizon: f64) -> Result<Self> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: n });
        }
        let (mx, vx) = mean_var(samples.iter().map(|s| s.x), n);
        let (mp, vp) = mean_var(samples.iter().map(|s| s.p), n);
        let nf = n as f64;
        let var_err = |v: f64| v * (2.0 / (nf - 1.0)).sqrt();
        Ok(Self {
            mean_x: Moment {
                value: mx,
                std_err: (vx / nf).sqrt(),
            },
            mean_p: Moment {
                value: mp,
                std_err: (vp / nf).sqrt(),
            },
            var_x: Moment {
                value: vx,
                std_err: var_err(vx),
            },
            var_p: Moment {
                value: vp,
                std_err: var_err(vp),
            },
            n_samples: n,
            horizon,
        })
    }
}

/// Two-pass mean and unbiased variance, summed in input order.
fn mean_var(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (nf - 1.0))
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub stats: EnsembleStats,
    pub samples: Vec<PhaseSample>,
}

/// All trajectories at one checkpoint time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub samples: Vec<PhaseSample>,
}

fn stream(seed: u64, traj: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(traj as u64);
    rng
}

fn initial_sample(init: InitialState, spec: &OscillatorSpec, k_b: f64, rng: &mut ChaCha8Rng) -> PhaseSample {
    match init {
        InitialState::Delta { x0, p0 } => PhaseSample { x: x0, p: p0 },
        InitialState::Gibbs { temperature } => {
            let m = spec.mass_value();
            let w = spec.omega_value();
            let sx = (k_b * temperature / (m * w * w)).sqrt();
            let sp = (m * k_b * temperature).sqrt();
            let zx: f64 = rng.sample(StandardNormal);
            let zp: f64 = rng.sample(StandardNormal);
            PhaseSample {
                x: sx * zx,
                p: sp * zp,
            }
        }
    }
}

/// Exact canonical samples at temperature `t`, from the same streams the
/// simulator seeds its Gibbs initial states with.
pub fn gibbs_samples(spec: &OscillatorSpec, t: f64, n: usize, seed: u64, c: &Constants) -> Vec<PhaseSample> {
    let k_b = c.k_b().si_value();
    (0..n)
        .into_par_iter()
        .map(|i| {
            initial_sample(
                InitialState::Gibbs { temperature: t },
                spec,
                k_b,
                &mut stream(seed, i),
            )
        })
        .collect()
}

/// Integrate every trajectory and record the ensemble at each checkpoint.
///
/// The step is semi-implicit Euler–Maruyama: momentum is advanced with the
/// force at the current position, position with the new momentum. It has
/// weak order one like the explicit scheme and stays stable for ηdt and
/// Ωdt well below one, which the explicit scheme does not at high Q.
pub fn simulate_checkpoints(config: &SimConfig, checkpoints: &[f64]) -> Result<Vec<Snapshot>> {
    config.validate()?;
    let mut steps = Vec::with_capacity(checkpoints.len());
    for &t in checkpoints {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!(
                "checkpoint time must be non-negative, got {t}"
            )));
        }
        let k = config.steps_for(t);
        if k > config.n_steps {
            return Err(Error::Domain(format!(
                "checkpoint {t} lies beyond the horizon {}",
                config.horizon()
            )));
        }
        steps.push(k);
    }
    let last = steps.iter().copied().max().unwrap_or(0);

    let m = config.spec.mass_value();
    let w2 = config.spec.omega_value().powi(2);
    let eta = config.spec.eta_value();
    let dt = config.dt;
    let kick = (2.0 * config.d_total()? * dt).sqrt();
    let k_b = config.constants.k_b().si_value();
    let initial = config.initial;
    let spec = config.spec;

    let per_traj: Vec<Vec<PhaseSample>> = (0..config.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rng = stream(config.seed, traj);
            let PhaseSample { mut x, mut p } = initial_sample(initial, &spec, k_b, &mut rng);
            let mut out = vec![PhaseSample { x: 0.0, p: 0.0 }; steps.len()];
            let record = |out: &mut [PhaseSample], k: usize, x: f64, p: f64| {
                for (slot, &s) in out.iter_mut().zip(&steps) {
                    if s == k {
                        *slot = PhaseSample { x, p };
                    }
                }
            };
            record(&mut out, 0, x, p);
            for k in 1..=last {
                let z: f64 = rng.sample(StandardNormal);
                p += -(m * w2 * x + eta * p) * dt + kick * z;
                x += p / m * dt;
                record(&mut out, k, x, p);
            }
            out
        })
        .collect();

    Ok(steps
        .iter()
        .enumerate()
        .map(|(c, &k)| Snapshot {
            time: k as f64 * dt,
            samples: per_traj.iter().map(|traj| traj[c]).collect(),
        })
        .collect())
}

/// Integrate to the configured horizon and summarize the final ensemble.
pub fn simulate_ensemble(config: &SimConfig) -> Result<Ensemble> {
    let horizon = config.horizon();
    let mut snaps = simulate_checkpoints(config, &[horizon])?;
    let samples = snaps.pop().expect("one checkpoint requested").samples;
    let stats = EnsembleStats::from_samples(&samples, horizon)?;
    Ok(Ensemble { stats, samples })
}

/// Integrate the configured step and half of it along the same Brownian
/// paths: each coarse increment is the sum of the two fine ones. The
/// difference between the two final ensembles is then discretization
/// error only, free of sampling noise.
pub fn simulate_step_halving(config: &SimConfig) -> Result<(Ensemble, Ensemble)> {
    config.validate()?;
    let m = config.spec.mass_value();
    let w2 = config.spec.omega_value().powi(2);
    let eta = config.spec.eta_value();
    let d = config.d_total()?;
    let k_b = config.constants.k_b().si_value();
    let step = |x: &mut f64, p: &mut f64, h: f64, noise: f64| {
        *p += -(m * w2 * *x + eta * *p) * h + (2.0 * d * h).sqrt() * noise;
        *x += *p / m * h;
    };
    let pairs: Vec<(PhaseSample, PhaseSample)> = (0..config.n_traj)
        .into_par_iter()
        .map(|traj| {
            let mut rng = stream(config.seed, traj);
            let start = initial_sample(config.initial, &config.spec, k_b, &mut rng);
            let (mut cx, mut cp) = (start.x, start.p);
            let (mut fx, mut fp) = (start.x, start.p);
            for _ in 0..config.n_steps {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                step(&mut fx, &mut fp, 0.5 * config.dt, z1);
                step(&mut fx, &mut fp, 0.5 * config.dt, z2);
                step(&mut cx, &mut cp, config.dt, (z1 + z2) / std::f64::consts::SQRT_2);
            }
            (PhaseSample { x: cx, p: cp }, PhaseSample { x: fx, p: fp })
        })
        .collect();
    let horizon = config.horizon();
    let (coarse, fine): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    Ok((
        Ensemble {
            stats: EnsembleStats::from_samples(&coarse, horizon)?,
            samples: coarse,
        },
        Ensemble {
            stats: EnsembleStats::from_samples(&fine, horizon)?,
            samples: fine,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Estimator {
    /// mΩ²⟨x²⟩ / k_B
    FromX,
    /// ⟨p²⟩ / (m k_B)
    FromP,
    /// Inverse-variance-weighted mean of the two.
    Pooled,
}

impl std::str::FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "from_x" => Ok(Estimator::FromX),
            "p" | "from_p" => Ok(Estimator::FromP),
            "pooled" => Ok(Estimator::Pooled),
            _ => Err(Error::Config(format!("unknown estimator `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TemperatureEstimate {
    pub t_hat: f64,
    pub std_err: f64,
    pub estimator: Estimator,
}

impl TemperatureEstimate {
    /// |T̂ − expected| within `k` standard errors.
    pub fn within(&self, expected: f64, k: f64) -> bool {
        (self.t_hat - expected).abs() <= k * self.std_err
    }
}

pub fn estimate_temperature(
    samples: &[PhaseSample],
    spec: &OscillatorSpec,
    estimator: Estimator,
    c: &Constants,
) -> Result<TemperatureEstimate> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let k_b = c.k_b().si_value();
    let m = spec.mass_value();
    let w2 = spec.omega_value().powi(2);
    let rel_err = (2.0 / n as f64).sqrt();
    let from = |t_hat: f64, estimator| TemperatureEstimate {
        t_hat,
        std_err: t_hat * rel_err,
        estimator,
    };
    let tx = || {
        from(
            m * w2 * mean_var(samples.iter().map(|s| s.x), n).1 / k_b,
            Estimator::FromX,
        )
    };
    let tp = || {
        from(
            mean_var(samples.iter().map(|s| s.p), n).1 / (m * k_b),
            Estimator::FromP,
        )
    };
    Ok(match estimator {
        Estimator::FromX => tx(),
        Estimator::FromP => tp(),
        Estimator::Pooled => {
            let (a, b) = (tx(), tp());
            if a.std_err == 0.0 || b.std_err == 0.0 {
                // degenerate ensemble; weights undefined
                let t_hat = 0.5 * (a.t_hat + b.t_hat);
                TemperatureEstimate {
                    t_hat,
                    std_err: 0.5 * (a.std_err + b.std_err),
                    estimator: Estimator::Pooled,
                }
            } else {
                let (wa, wb) = (a.std_err.powi(-2), b.std_err.powi(-2));
                TemperatureEstimate {
                    t_hat: (wa * a.t_hat + wb * b.t_hat) / (wa + wb),
                    std_err: (wa + wb).sqrt().recip(),
                    estimator: Estimator::Pooled,
                }
            }
        }
    })
}

/// Pooled temperature after back-action noise D_m is switched on at t = 0.
pub fn transient_curve(config: &SimConfig, checkpoints: &[f64]) -> Result<Vec<TemperatureEstimate>> {
    if !matches!(config.initial, InitialState::Gibbs { .. }) {
        return Err(Error::Domain("transient runs start from a Gibbs state".into()));
    }
    if !(config.d_m.value() > 0.0) {
        return Err(Error::Domain(
            "transient runs need measurement diffusion D_m > 0".into(),
        ));
    }
    simulate_checkpoints(config, checkpoints)?
        .iter()
        .map(|s| estimate_temperature(&s.samples, &config.spec, Estimator::Pooled, &config.constants))
        .collect()
}

/// CSV dump with header `traj_id,t,x,p`, one line per checkpoint per trajectory.
pub fn write_trajectory_dump<W: Write>(mut out: W, snapshots: &[Snapshot]) -> Result<()> {
    writeln!(out, "traj_id,t,x,p")?;
    let n_traj = snapshots.first().map_or(0, |s| s.samples.len());
    for traj in 0..n_traj {
        for snap in snapshots {
            let s = snap.samples[traj];
            writeln!(out, "{traj},{:.16e},{:.16e},{:.16e}", snap.time, s.x, s.p)?;
        }
    }
    Ok(())
}

/// A `simulate` command run: the configuration plus reporting choices.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub config: SimConfig,
    pub checkpoints: Vec<f64>,
    pub estimator: Estimator,
    pub dump: Option<PathBuf>,
}

const SIM_KEYS: &[&str] = &[
    "units",
    "mass",
    "omega",
    "eta",
    "quality",
    "t_bath",
    "d_sp",
    "d_m",
    "dt",
    "n_steps",
    "horizon",
    "n_traj",
    "seed",
    "initial",
    "checkpoints",
    "estimator",
    "dump",
];

impl SimRun {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        kv.reject_unknown(SIM_KEYS)?;
        let config = SimConfig::from_kv(kv)?;
        let checkpoints = kv
            .get_list("checkpoints")?
            .unwrap_or_else(|| vec![config.horizon()]);
        Ok(Self {
            config,
            checkpoints,
            estimator: kv.get_or("estimator", Estimator::Pooled)?,
            dump: kv.get_str("dump").map(PathBuf::from),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckpointReport {
    pub time: f64,
    pub stats: EnsembleStats,
    pub estimate: TemperatureEstimate,
    /// Closed-form temperature at `time`, for Gibbs starts.
    pub predicted: Option<f64>,
}

/// Simulate, estimate at every checkpoint and compare with the exponential
/// approach T' + (T₀ − T') e^(−t/τ) when the run starts from a Gibbs state at T₀.
pub fn run(sim: &SimRun) -> Result<Vec<CheckpointReport>> {
    let cfg = &sim.config;
    let snaps = simulate_checkpoints(cfg, &sim.checkpoints)?;
    if let Some(path) = &sim.dump {
        write_trajectory_dump(std::io::BufWriter::new(fs::File::create(path)?), &snaps)?;
    }
    let c = &cfg.constants;
    let predicted = |time: f64| -> Result<Option<f64>> {
        let InitialState::Gibbs { temperature } = cfg.initial else {
            return Ok(None);
        };
        let sp = thermal_core::delta_t(&cfg.d_sp, &cfg.spec, c)?.value();
        let m = thermal_core::delta_t(&cfg.d_m, &cfg.spec, c)?.value();
        let settled = cfg.t_bath + sp + m;
        Ok(Some(
            settled + (temperature - settled) * (-time / cfg.spec.tau_value()).exp(),
        ))
    };
    snaps
        .iter()
        .map(|s| {
            Ok(CheckpointReport {
                time: s.time,
                stats: EnsembleStats::from_samples(&s.samples, s.time)?,
                estimate: estimate_temperature(&s.samples, &cfg.spec, sim.estimator, c)?,
                predicted: predicted(s.time)?,
            })
        })
        .collect()
}

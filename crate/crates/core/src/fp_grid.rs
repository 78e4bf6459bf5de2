//! Fokker–Planck evolution of the oscillator's phase-space density
//!
//! ```text
//! ∂ρ/∂t = −(p/m) ∂ρ/∂x + mΩ²x ∂ρ/∂p + η ∂(pρ)/∂p + D ∂²ρ/∂p²
//! ```
//!
//! on a cell-centred (x, p) grid with zero-flux walls. A step of length h
//! is the symmetric splitting
//!
//! ```text
//! X(h/2) · P(h/2) · D(h) · P(h/2) · X(h/2)
//! ```
//!
//! where X and P are the Hamiltonian transports along x and p and D is
//! damping plus diffusion in p. X and P use the Lax–Wendroff flux: the
//! transport speed is constant along each sweep line, so they shift line
//! means exactly and leave line variances unchanged. D uses centred
//! conservative fluxes (the damping flux averages pρ over the two cells),
//! which keeps the stationary ⟨p²⟩ at D/η exactly. Negative undershoots in
//! the far tails are clipped and the clipped mass is recorded.

use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::collapse_models::{DiffusionConstant, DiffusionSource};
use crate::config::KeyValues;
use crate::error::{Error, Result};
use crate::quantities::{Constants, PhysQuantity, Unit};
use crate::thermal_core::{self, OscillatorSpec};

/// Thermal standard deviations a grid must span on each side of the origin.
pub const COVERAGE_SIGMAS: f64 = 6.0;
/// Half-width of grids built by [`GridShape::covering`], in thermal
/// deviations. The margin over `COVERAGE_SIGMAS` keeps the mass parked in
/// the wall cells, and the undershoot it drives, below 1e-9.
pub const DEFAULT_SPAN_SIGMAS: f64 = 7.0;
pub const DEFAULT_CELLS: usize = 256;
/// Fraction of the advective and diffusive stability limits used per step.
pub const SAFETY: f64 = 0.5;
/// Refuse runs that would need more steps than this.
pub const MAX_STEPS: usize = 50_000_000;

/// Extents and resolution of a symmetric phase-space box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub x_max: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

impl GridShape {
    pub fn new(x_max: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        if !(x_max > 0.0 && p_max > 0.0) || nx < 3 || np < 3 {
            return Err(Error::Coverage(format!(
                "grid needs positive extents and at least 3 cells per axis, got ±{x_max} × ±{p_max}, {nx}×{np}"
            )));
        }
        Ok(Self { x_max, p_max, nx, np })
    }

    /// `DEFAULT_SPAN_SIGMAS` thermal standard deviations at `t_max` on both axes.
    pub fn covering(spec: &OscillatorSpec, t_max: f64, c: &Constants, nx: usize, np: usize) -> Result<Self> {
        let (sx, sp) = thermal_sigmas(spec, t_max, c);
        Self::new(DEFAULT_SPAN_SIGMAS * sx, DEFAULT_SPAN_SIGMAS * sp, nx, np)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / self.nx as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * self.p_max / self.np as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.x_max + (i as f64 + 0.5) * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        -self.p_max + (j as f64 + 0.5) * self.dp()
    }

    /// Same box with both spacings halved.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx,
            np: 2 * self.np,
            ..*self
        }
    }
}

fn thermal_sigmas(spec: &OscillatorSpec, t: f64, c: &Constants) -> (f64, f64) {
    let kt = c.k_b().si_value() * t;
    let m = spec.mass_value();
    let w = spec.omega_value();
    ((kt / (m * w * w)).sqrt(), (m * kt).sqrt())
}

/// Density samples ρ(x_i, p_j), row-major with x as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    shape: GridShape,
    values: Vec<f64>,
    clip_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridMoments {
    pub mass: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    /// ⟨x²⟩ about the origin
    pub xx: f64,
    pub pp: f64,
    pub xp: f64,
}

impl GridMoments {
    pub fn var_x(&self) -> f64 {
        self.xx - self.mean_x * self.mean_x
    }

    pub fn var_p(&self) -> f64 {
        self.pp - self.mean_p * self.mean_p
    }

    /// mΩ² var(x) / k_B
    pub fn temperature_x(&self, spec: &OscillatorSpec, c: &Constants) -> f64 {
        spec.mass_value() * spec.omega_value().powi(2) * self.var_x() / c.k_b().si_value()
    }

    /// var(p) / (m k_B)
    pub fn temperature_p(&self, spec: &OscillatorSpec, c: &Constants) -> f64 {
        self.var_p() / (spec.mass_value() * c.k_b().si_value())
    }
}

impl PhaseSpaceGrid {
    pub fn from_values(shape: GridShape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.nx * shape.np {
            return Err(Error::Domain(format!(
                "expected {} density values, got {}",
                shape.nx * shape.np,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Domain(
                "density values must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            shape,
            values,
            clip_mass: 0.0,
        })
    }

    /// Constant density over the inner `fraction` of the box, normalized.
    pub fn uniform_box(shape: GridShape, fraction: f64) -> Result<Self> {
        let mut values = vec![0.0; shape.nx * shape.np];
        for i in 0..shape.nx {
            for j in 0..shape.np {
                if shape.x(i).abs() <= fraction * shape.x_max && shape.p(j).abs() <= fraction * shape.p_max {
                    values[i * shape.np + j] = 1.0;
                }
            }
        }
        let mut g = Self::from_values(shape, values)?;
        g.normalize()?;
        Ok(g)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.shape.np + j]
    }

    /// Mass added by clipping negative undershoots to zero.
    pub fn clip_mass(&self) -> f64 {
        self.clip_mass
    }

    /// Mass in the outermost ring of cells, the part at risk of leaving
    /// an unbounded domain through the zero-flux walls.
    pub fn wall_mass(&self) -> f64 {
        let s = self.shape;
        let mut sum = 0.0;
        for i in 0..s.nx {
            let row = &self.values[i * s.np..(i + 1) * s.np];
            if i == 0 || i + 1 == s.nx {
                sum += row.iter().sum::<f64>();
            } else {
                sum += row[0] + row[s.np - 1];
            }
        }
        sum * self.cell_area()
    }

    fn cell_area(&self) -> f64 {
        self.shape.dx() * self.shape.dp()
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn normalize(&mut self) -> Result<()> {
        let mass = self.mass();
        if !(mass > 0.0) {
            return Err(Error::Domain("density has no mass".into()));
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        Ok(())
    }

    pub fn moments(&self) -> GridMoments {
        let s = self.shape;
        let (mut m0, mut mx, mut mp, mut xx, mut pp, mut xp) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..s.nx {
            let x = s.x(i);
            let row = &self.values[i * s.np..(i + 1) * s.np];
            let (mut r0, mut r1, mut r2) = (0.0, 0.0, 0.0);
            for (j, &v) in row.iter().enumerate() {
                let p = s.p(j);
                r0 += v;
                r1 += v * p;
                r2 += v * p * p;
            }
            m0 += r0;
            mx += x * r0;
            xx += x * x * r0;
            mp += r1;
            xp += x * r1;
            pp += r2;
        }
        let area = self.cell_area();
        GridMoments {
            mass: m0 * area,
            mean_x: mx / m0,
            mean_p: mp / m0,
            xx: xx / m0,
            pp: pp / m0,
            xp: xp / m0,
        }
    }

    /// Largest pointwise difference to another grid of the same shape.
    pub fn max_abs_diff(&self, other: &PhaseSpaceGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Header `x_min,x_max,p_min,p_max,nx,np`, a line with those values,
    /// then one comma-separated line of densities per x row.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> Result<()> {
        let s = self.shape;
        writeln!(out, "x_min,x_max,p_min,p_max,nx,np")?;
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            -s.x_max, s.x_max, -s.p_max, s.p_max, s.nx, s.np
        )?;
        for row in self.values.chunks(s.np) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn read_snapshot(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::Domain(format!("malformed snapshot: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some("x_min,x_max,p_min,p_max,nx,np") {
            return Err(bad("header"));
        }
        let head: Vec<&str> = lines.next().ok_or_else(|| bad("extents"))?.split(',').collect();
        if head.len() != 6 {
            return Err(bad("extents"));
        }
        let f = |k: usize| head[k].parse::<f64>().map_err(|_| bad("extents"));
        let n = |k: usize| head[k].parse::<usize>().map_err(|_| bad("cell counts"));
        let shape = GridShape::new(f(1)?, f(3)?, n(4)?, n(5)?)?;
        let values = lines
            .flat_map(|l| l.split(','))
            .map(|v| v.trim().parse::<f64>().map_err(|_| bad("density value")))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_values(shape, values)
    }
}

/// Normalized canonical density exp(−H / k_B T′) on the grid.
pub fn gibbs_density(
    shape: GridShape,
    spec: &OscillatorSpec,
    t_prime: f64,
    c: &Constants,
) -> Result<PhaseSpaceGrid> {
    if !(t_prime > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {t_prime}"
        )));
    }
    let (sx, sp) = thermal_sigmas(spec, t_prime, c);
    let need = COVERAGE_SIGMAS * (1.0 - 1e-9);
    if shape.x_max < need * sx || shape.p_max < need * sp {
        return Err(Error::Coverage(format!(
            "grid ±{:e} × ±{:e} spans fewer than {COVERAGE_SIGMAS} thermal deviations ({sx:e}, {sp:e})",
            shape.x_max, shape.p_max
        )));
    }
    let mut values = vec![0.0; shape.nx * shape.np];
    for (i, row) in values.chunks_mut(shape.np).enumerate() {
        let ex = (shape.x(i) / sx).powi(2);
        for (j, v) in row.iter_mut().enumerate() {
            *v = (-0.5 * (ex + (shape.p(j) / sp).powi(2))).exp();
        }
    }
    let mut g = PhaseSpaceGrid::from_values(shape, values)?;
    g.normalize()?;
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpParams {
    pub spec: OscillatorSpec,
    /// D_th + D_sp (+ D_m).
    pub d_total: f64,
}

impl FpParams {
    pub fn new(spec: OscillatorSpec, d_total: f64) -> Result<Self> {
        if !(d_total >= 0.0) || !d_total.is_finite() {
            return Err(Error::Domain(format!(
                "total diffusion must be >= 0, got {d_total}"
            )));
        }
        Ok(Self { spec, d_total })
    }

    /// D_total = D_th(T) + Σ extra.
    pub fn with_bath(
        spec: OscillatorSpec,
        t_bath: f64,
        extra: &[DiffusionConstant],
        c: &Constants,
    ) -> Result<Self> {
        let th = thermal_core::d_th(&spec, &PhysQuantity::new(t_bath, Unit::Kelvin)?, c)?;
        Self::new(
            spec,
            th.value() + extra.iter().map(DiffusionConstant::value).sum::<f64>(),
        )
    }

    /// Hamiltonian flow only: no damping, no diffusion.
    pub fn conservative(spec: OscillatorSpec) -> Self {
        Self { spec, d_total: 0.0 }
    }

    fn eta(&self) -> f64 {
        self.spec.eta_value()
    }
}

/// Step size from the advective and diffusive limits, scaled by `SAFETY`.
pub fn stable_step(shape: &GridShape, params: &FpParams, damped: bool) -> f64 {
    let m = params.spec.mass_value();
    let w2 = params.spec.omega_value().powi(2);
    let eta = if damped { params.eta() } else { 0.0 };
    let vx = shape.p_max / m;
    let vp = m * w2 * shape.x_max + eta * shape.p_max;
    let mut dt = (shape.dx() / vx).min(shape.dp() / vp);
    if params.d_total > 0.0 {
        dt = dt.min(shape.dp().powi(2) / (2.0 * params.d_total));
    }
    SAFETY * dt
}

fn evolve_inner(
    grid: &PhaseSpaceGrid,
    params: &FpParams,
    duration: f64,
    damped: bool,
) -> Result<PhaseSpaceGrid> {
    if !(duration >= 0.0) || !duration.is_finite() {
        return Err(Error::Domain(format!(
            "duration must be non-negative, got {duration}"
        )));
    }
    let shape = grid.shape;
    let dt_max = stable_step(&shape, params, damped);
    if !(dt_max > 0.0) || !dt_max.is_finite() {
        return Err(Error::Stability(format!(
            "no stable step for these parameters (dt = {dt_max})"
        )));
    }
    let steps_f = (duration / dt_max).ceil();
    if steps_f > MAX_STEPS as f64 {
        return Err(Error::Stability(format!(
            "{steps_f:e} steps needed at dt = {dt_max:e}, above the limit of {MAX_STEPS}"
        )));
    }
    let steps = steps_f as usize;
    let mut out = grid.clone();
    if steps == 0 {
        return Ok(out);
    }
    let dt = duration / steps as f64;
    let mut stepper = Stepper::new(shape, params, dt, damped);
    let mut scratch = vec![0.0; out.values.len()];
    stepper.x_sweep(&out.values, &mut scratch, 0.5);
    std::mem::swap(&mut out.values, &mut scratch);
    for k in 0..steps {
        stepper.p_sweep(&mut out.values);
        let frac = if k + 1 == steps { 0.5 } else { 1.0 };
        stepper.x_sweep(&out.values, &mut scratch, frac);
        std::mem::swap(&mut out.values, &mut scratch);
    }
    out.clip_mass += stepper.clipped * shape.dx() * shape.dp();
    Ok(out)
}

/// Advance the density by `duration` under the full Fokker–Planck operator.
pub fn evolve(grid: &PhaseSpaceGrid, params: &FpParams, duration: f64) -> Result<PhaseSpaceGrid> {
    evolve_inner(grid, params, duration, true)
}

/// Hamiltonian flow only, ignoring the damping and diffusion in `params`.
pub fn evolve_hamiltonian(
    grid: &PhaseSpaceGrid,
    spec: &OscillatorSpec,
    duration: f64,
) -> Result<PhaseSpaceGrid> {
    evolve_inner(grid, &FpParams::conservative(*spec), duration, false)
}

struct Stepper {
    shape: GridShape,
    /// Courant numbers of the x transport per p row: (p_j/m) dt/dx.
    cx: Vec<f64>,
    /// Courant numbers of the p transport per x row: −mΩ²x_i dt/dp.
    cp: Vec<f64>,
    /// η dt/dp · p_j
    drift: Vec<f64>,
    diff: f64,
    clipped: f64,
}

/// Lax–Wendroff face flux for Courant number `c` between cells `a` and `b`.
#[inline]
fn lw_flux(c: f64, a: f64, b: f64) -> f64 {
    c * (0.5 * (a + b) - 0.5 * c * (b - a))
}

/// Donor-cell flux, used on the faces next to a wall: the wall cell has no
/// outflow, so the Lax–Wendroff term proportional to its own content
/// would feed it without bound.
#[inline]
fn upwind_flux(c: f64, a: f64, b: f64) -> f64 {
    if c > 0.0 {
        c * a
    } else {
        c * b
    }
}

#[inline]
fn transport_flux(c: f64, face: usize, faces: usize, a: f64, b: f64) -> f64 {
    if face == 0 || face + 1 == faces {
        upwind_flux(c, a, b)
    } else {
        lw_flux(c, a, b)
    }
}

/// Conservative in-place update of one line given a face-flux function;
/// the two wall faces carry no flux.
#[inline]
fn update_line(line: &mut [f64], face: impl Fn(usize, f64, f64) -> f64) {
    let n = line.len();
    let mut left = 0.0;
    let mut cur = line[0];
    for j in 0..n - 1 {
        let next = line[j + 1];
        let right = face(j, cur, next);
        line[j] = cur - (right - left);
        left = right;
        cur = next;
    }
    line[n - 1] = cur + left;
}

/// Zero the negative cells of a line and return how much was added.
fn clip_negatives(line: &mut [f64]) -> f64 {
    let mut clip = 0.0;
    for v in line.iter_mut().filter(|v| **v < 0.0) {
        clip -= *v;
        *v = 0.0;
    }
    clip
}

impl Stepper {
    fn new(shape: GridShape, params: &FpParams, dt: f64, damped: bool) -> Self {
        let m = params.spec.mass_value();
        let w2 = params.spec.omega_value().powi(2);
        let (dx, dp) = (shape.dx(), shape.dp());
        let eta = if damped { params.eta() } else { 0.0 };
        let d = if damped { params.d_total } else { 0.0 };
        Self {
            shape,
            cx: (0..shape.np).map(|j| shape.p(j) / m * dt / dx).collect(),
            cp: (0..shape.nx).map(|i| -m * w2 * shape.x(i) * dt / dp).collect(),
            drift: (0..shape.np).map(|j| eta * dt / dp * shape.p(j)).collect(),
            diff: d * dt / (dp * dp),
            clipped: 0.0,
        }
    }

    /// Lax–Wendroff transport along x for a fraction of the step, out of place.
    fn x_sweep(&mut self, src: &[f64], dst: &mut [f64], frac: f64) {
        let np = self.shape.np;
        let nx = self.shape.nx;
        let c: Vec<f64> = self.cx.iter().map(|c| c * frac).collect();
        let clips: Vec<f64> = dst
            .par_chunks_mut(np)
            .enumerate()
            .with_min_len(8)
            .map(|(i, row)| {
                let here = &src[i * np..(i + 1) * np];
                let below = (i > 0).then(|| &src[(i - 1) * np..i * np]);
                let above = (i + 1 < nx).then(|| &src[(i + 1) * np..(i + 2) * np]);
                for j in 0..np {
                    let left = below.map_or(0.0, |b| transport_flux(c[j], i - 1, nx - 1, b[j], here[j]));
                    let right = above.map_or(0.0, |a| transport_flux(c[j], i, nx - 1, here[j], a[j]));
                    row[j] = here[j] - (right - left);
                }
                clip_negatives(row)
            })
            .collect();
        self.clipped += clips.iter().sum::<f64>();
    }

    /// Half a step of p transport, a full step of damping and diffusion,
    /// another half step of transport; row by row, in place.
    fn p_sweep(&mut self, values: &mut [f64]) {
        let np = self.shape.np;
        let drift = &self.drift;
        let diff = self.diff;
        let cp = &self.cp;
        let clips: Vec<f64> = values
            .par_chunks_mut(np)
            .enumerate()
            .with_min_len(8)
            .map(|(i, row)| {
                let c = 0.5 * cp[i];
                update_line(row, |j, a, b| transport_flux(c, j, np - 1, a, b));
                if diff > 0.0 || drift[np - 1] != 0.0 {
                    update_line(row, |j, a, b| {
                        -0.5 * (drift[j] * a + drift[j + 1] * b) - diff * (b - a)
                    });
                }
                update_line(row, |j, a, b| transport_flux(c, j, np - 1, a, b));
                clip_negatives(row)
            })
            .collect();
        self.clipped += clips.iter().sum::<f64>();
    }
}

/// Discrete L2 norm of the Fokker–Planck right-hand side over interior
/// cells, relative to the L2 norm of the density.
pub fn stationarity_residual(grid: &PhaseSpaceGrid, params: &FpParams) -> f64 {
    let s = grid.shape;
    let (dx, dp) = (s.dx(), s.dp());
    let m = params.spec.mass_value();
    let w2 = params.spec.omega_value().powi(2);
    let eta = params.eta();
    let d = params.d_total;
    let rho = |i: usize, j: usize| grid.values[i * s.np + j];
    let mut num = 0.0;
    for i in 1..s.nx - 1 {
        let x = s.x(i);
        for j in 1..s.np - 1 {
            let p = s.p(j);
            let dxr = (rho(i + 1, j) - rho(i - 1, j)) / (2.0 * dx);
            let dpr = (rho(i, j + 1) - rho(i, j - 1)) / (2.0 * dp);
            let dp_prho = (s.p(j + 1) * rho(i, j + 1) - s.p(j - 1) * rho(i, j - 1)) / (2.0 * dp);
            let dpp = (rho(i, j + 1) - 2.0 * rho(i, j) + rho(i, j - 1)) / (dp * dp);
            let r = -(p / m) * dxr + m * w2 * x * dpr + eta * dp_prho + d * dpp;
            num += r * r;
        }
    }
    let den: f64 = grid.values.iter().map(|v| v * v).sum();
    if den == 0.0 {
        return 0.0;
    }
    (num / den).sqrt()
}

/// One `fp-check` run: a bath, a spontaneous diffusion and a grid.
#[derive(Debug, Clone, Copy)]
pub struct FpCheckConfig {
    pub spec: OscillatorSpec,
    pub t_bath: f64,
    pub d_sp: DiffusionConstant,
    pub nx: usize,
    pub np: usize,
    /// In units of τ.
    pub horizon_tau: f64,
    pub constants: Constants,
}

const FP_KEYS: &[&str] = &[
    "units",
    "mass",
    "omega",
    "eta",
    "quality",
    "t_bath",
    "d_sp",
    "nx",
    "np",
    "horizon_tau",
];

impl FpCheckConfig {
    pub fn from_kv(kv: &KeyValues) -> Result<Self> {
        kv.reject_unknown(FP_KEYS)?;
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
        Ok(Self {
            spec,
            t_bath: kv.require("t_bath")?,
            d_sp: DiffusionConstant::from_value(kv.get_or("d_sp", 0.0)?, DiffusionSource::Dp)?,
            nx: kv.get_or("nx", DEFAULT_CELLS)?,
            np: kv.get_or("np", DEFAULT_CELLS)?,
            horizon_tau: kv.get_or("horizon_tau", 20.0)?,
            constants,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_kv(&KeyValues::parse(&fs::read_to_string(path)?)?)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FpCheckReport {
    pub t_bath: f64,
    pub t_prime: f64,
    /// Residuals of the Gibbs state at T′ on the coarse and refined grid.
    pub residual_coarse: f64,
    pub residual_fine: f64,
    pub refinement_ratio: f64,
    /// Max-norm drift of Gibbs(T′) over one τ, relative to its peak.
    pub gibbs_drift: f64,
    pub final_moments: GridMoments,
    pub final_t_x: f64,
    pub final_t_p: f64,
    pub rel_error_x: f64,
    pub rel_error_p: f64,
    pub mass_error: f64,
    pub clip_mass: f64,
    pub wall_mass: f64,
}

impl FpCheckReport {
    pub fn passed(&self) -> bool {
        self.refinement_ratio >= 3.0
            && self.gibbs_drift < 1e-3
            && self.rel_error_x < 1e-3
            && self.rel_error_p < 1e-3
            && self.mass_error <= 1e-6
            && self.clip_mass < 1e-9
            && self.wall_mass < 1e-6
    }
}

/// Stationarity suite: residual refinement of Gibbs(T′), stationarity of
/// Gibbs(T′) under evolution, and relaxation from Gibbs(T) onto Gibbs(T′)
/// with T′ from the closed form.
pub fn fp_check(cfg: &FpCheckConfig) -> Result<FpCheckReport> {
    let c = &cfg.constants;
    let spec = cfg.spec;
    let t = PhysQuantity::new(cfg.t_bath, Unit::Kelvin)?;
    let th = thermal_core::d_th(&spec, &t, c)?;
    let t_prime = thermal_core::stationary_temperature(&t, &cfg.d_sp, &th)?.value();
    let params = FpParams::new(spec, th.value() + cfg.d_sp.value())?;
    let shape = GridShape::covering(&spec, t_prime, c, cfg.nx, cfg.np)?;

    let coarse = stationarity_residual(&gibbs_density(shape, &spec, t_prime, c)?, &params);
    let fine = stationarity_residual(&gibbs_density(shape.refined(), &spec, t_prime, c)?, &params);

    let stationary = gibbs_density(shape, &spec, t_prime, c)?;
    let moved = evolve(&stationary, &params, spec.tau_value())?;
    let gibbs_drift = moved.max_abs_diff(&stationary) / stationary.peak();

    let start = gibbs_density(shape, &spec, cfg.t_bath, c)?;
    let end = evolve(&start, &params, cfg.horizon_tau * spec.tau_value())?;
    let mom = end.moments();
    let (tx, tp) = (mom.temperature_x(&spec, c), mom.temperature_p(&spec, c));
    Ok(FpCheckReport {
        t_bath: cfg.t_bath,
        t_prime,
        residual_coarse: coarse,
        residual_fine: fine,
        refinement_ratio: coarse / fine,
        gibbs_drift,
        final_moments: mom,
        final_t_x: tx,
        final_t_p: tp,
        rel_error_x: ((tx - t_prime) / t_prime).abs(),
        rel_error_p: ((tp - t_prime) / t_prime).abs(),
        mass_error: (mom.mass - 1.0).abs(),
        clip_mass: end.clip_mass() + moved.clip_mass(),
        wall_mass: end.wall_mass(),
    })
}

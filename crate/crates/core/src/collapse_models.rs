//! Spontaneous momentum-diffusion constants for the gravity-related (DP)
//! and continuous spontaneous localization (CSL) collapse models.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quantities::{Constants, Dimension, PhysQuantity, Unit};

/// DP spatial-resolution range, metres.
pub const SIGMA_DP_RANGE: (f64, f64) = (1e-14, 1e-7);
/// CSL rate range, 1/s. The upper edge is the most permissive published one.
pub const LAMBDA_CSL_RANGE: (f64, f64) = (2.2e-17, 2.2e-6);
/// Conventional CSL rate used for the headline estimates, 1/s.
pub const LAMBDA_CSL_REFERENCE: f64 = 2.2e-8;
pub const SIGMA_CSL_DEFAULT: f64 = 1e-7;
/// Finest conjectured DP resolution, metres.
pub const SIGMA_DP_STRONGEST: f64 = 1e-14;
pub const LATTICE_DEFAULT: f64 = 5e-10;
pub const DENSITY_DEFAULT: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiffusionSource {
    Dp,
    Csl,
    Thermal,
    Measurement,
}

/// A non-negative momentum-diffusion constant, kg² m² s⁻³.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionConstant {
    value: PhysQuantity,
    source: DiffusionSource,
}

impl DiffusionConstant {
    pub fn new(value: PhysQuantity, source: DiffusionSource) -> Result<Self> {
        value.expect(Dimension::MOMENTUM_DIFFUSION)?;
        if value.si_value() < 0.0 {
            return Err(Error::Domain(format!(
                "diffusion constant must be non-negative, got {:e}",
                value.si_value()
            )));
        }
        Ok(Self { value, source })
    }

    /// From a raw value in the coherent unit of the active unit system.
    pub fn from_value(value: f64, source: DiffusionSource) -> Result<Self> {
        Self::new(PhysQuantity::si(value, Dimension::MOMENTUM_DIFFUSION)?, source)
    }

    pub fn zero(source: DiffusionSource) -> Self {
        Self::from_value(0.0, source).expect("zero is a valid diffusion constant")
    }

    pub fn quantity(&self) -> PhysQuantity {
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value.si_value()
    }

    pub fn source(&self) -> DiffusionSource {
        self.source
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpParams {
    pub sigma_dp: PhysQuantity,
    pub lattice_a: PhysQuantity,
    pub density: PhysQuantity,
}

impl DpParams {
    pub fn new(sigma_dp: PhysQuantity, lattice_a: PhysQuantity, density: PhysQuantity) -> Result<Self> {
        sigma_dp.expect(Dimension::LENGTH)?;
        lattice_a.expect(Dimension::LENGTH)?;
        density.expect(Dimension::DENSITY)?;
        for (name, q) in [
            ("sigma_dp", sigma_dp),
            ("lattice_a", lattice_a),
            ("density", density),
        ] {
            if q.si_value() <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        Ok(Self {
            sigma_dp,
            lattice_a,
            density,
        })
    }

    /// SI values: metres, metres, kg/m³.
    pub fn from_si(sigma_dp: f64, lattice_a: f64, density: f64) -> Result<Self> {
        Self::new(
            PhysQuantity::new(sigma_dp, Unit::Meter)?,
            PhysQuantity::new(lattice_a, Unit::Meter)?,
            PhysQuantity::new(density, Unit::KilogramPerCubicMeter)?,
        )
    }

    /// Finest resolution and the default lattice constant, at `density` kg/m³.
    pub fn strongest(density: f64) -> Result<Self> {
        Self::from_si(SIGMA_DP_STRONGEST, LATTICE_DEFAULT, density)
    }

    fn check_validity(&self) -> Result<()> {
        let sigma = self.sigma_dp.si_value();
        let a = self.lattice_a.si_value();
        if sigma > a / 10.0 {
            return Err(Error::Validity(format!(
                "DP formula needs sigma_dp << lattice constant; sigma_dp = {sigma:e} m > a/10 = {:e} m",
                a / 10.0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslParams {
    pub lambda_csl: PhysQuantity,
    pub sigma_csl: PhysQuantity,
    pub density: PhysQuantity,
    pub thickness: PhysQuantity,
}

impl CslParams {
    pub fn new(
        lambda_csl: PhysQuantity,
        sigma_csl: PhysQuantity,
        density: PhysQuantity,
        thickness: PhysQuantity,
    ) -> Result<Self> {
        lambda_csl.expect(Dimension::RATE)?;
        sigma_csl.expect(Dimension::LENGTH)?;
        density.expect(Dimension::DENSITY)?;
        thickness.expect(Dimension::LENGTH)?;
        if lambda_csl.si_value() <= 0.0 {
            return Err(Error::Domain("lambda_csl must be positive".into()));
        }
        for (name, q) in [
            ("sigma_csl", sigma_csl),
            ("density", density),
            ("thickness", thickness),
        ] {
            if q.si_value() <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive")));
            }
        }
        Ok(Self {
            lambda_csl,
            sigma_csl,
            density,
            thickness,
        })
    }

    /// SI values with the conventional sigma_csl = 1e-7 m.
    pub fn from_si(lambda_csl: f64, density: f64, thickness: f64) -> Result<Self> {
        Self::new(
            PhysQuantity::new(lambda_csl, Unit::Hertz)?,
            PhysQuantity::new(SIGMA_CSL_DEFAULT, Unit::Meter)?,
            PhysQuantity::new(density, Unit::KilogramPerCubicMeter)?,
            PhysQuantity::new(thickness, Unit::Meter)?,
        )
    }

    fn check_validity(&self) -> Result<()> {
        let d = self.thickness.si_value();
        let sigma = self.sigma_csl.si_value();
        if d < sigma {
            return Err(Error::Validity(format!(
                "disk formula needs thickness >= sigma_csl; d = {d:e} m < {sigma:e} m"
            )));
        }
        Ok(())
    }
}

/// ω_G = sqrt( (4πGϱ/3) · (a / (2√π σ_DP))³ ).
pub fn omega_g(params: &DpParams, c: &Constants) -> Result<PhysQuantity> {
    params.check_validity()?;
    let ratio = params
        .lattice_a
        .div(&params.sigma_dp.scale(2.0 * PI.sqrt())?)?
        .powi(3)?;
    let w2 = c.g().mul(&params.density)?.scale(4.0 * PI / 3.0)?.mul(&ratio)?;
    let w = w2.sqrt()?;
    w.expect(Dimension::RATE)?;
    Ok(w)
}

fn check_mass(m: &PhysQuantity) -> Result<()> {
    m.expect(Dimension::MASS)?;
    if m.si_value() <= 0.0 {
        return Err(Error::Domain("mass must be positive".into()));
    }
    Ok(())
}

/// D_DP = (ħ/2) m ω_G².
pub fn d_dp(m: &PhysQuantity, params: &DpParams, c: &Constants) -> Result<DiffusionConstant> {
    check_mass(m)?;
    let w = omega_g(params, c)?;
    let d = c.hbar().scale(0.5)?.mul(m)?.mul(&w.powi(2)?)?;
    DiffusionConstant::new(d, DiffusionSource::Dp)
}

/// D_CSL = λ (ħ/m0)² 4π σ² ϱ m / d, the perpendicular diffusion of a disk.
pub fn d_csl(m: &PhysQuantity, params: &CslParams, c: &Constants) -> Result<DiffusionConstant> {
    check_mass(m)?;
    params.check_validity()?;
    let d = params
        .lambda_csl
        .mul(&c.hbar().div(&c.m0())?.powi(2)?)?
        .mul(&params.sigma_csl.powi(2)?)?
        .scale(4.0 * PI)?
        .mul(&params.density)?
        .mul(m)?
        .div(&params.thickness)?;
    DiffusionConstant::new(d, DiffusionSource::Csl)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
}

impl BoundCheck {
    fn new(name: &str, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = lower.is_none_or(|lo| value >= lo) && upper.is_none_or(|hi| value <= hi);
        Self {
            name: name.to_string(),
            value,
            lower,
            upper,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<BoundCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum ModelParams<'a> {
    Dp(&'a DpParams),
    Csl(&'a CslParams),
}

/// Conjectured-range and formula-validity checks. Never fails.
pub fn validate_params(params: ModelParams<'_>) -> ValidationReport {
    let checks = match params {
        ModelParams::Dp(p) => {
            let sigma = p.sigma_dp.si_value();
            vec![
                BoundCheck::new(
                    "sigma_dp_range",
                    sigma,
                    Some(SIGMA_DP_RANGE.0),
                    Some(SIGMA_DP_RANGE.1),
                ),
                BoundCheck::new(
                    "sigma_dp_below_lattice_tenth",
                    sigma,
                    None,
                    Some(p.lattice_a.si_value() / 10.0),
                ),
            ]
        }
        ModelParams::Csl(p) => vec![
            BoundCheck::new(
                "lambda_csl_range",
                p.lambda_csl.si_value(),
                Some(LAMBDA_CSL_RANGE.0),
                Some(LAMBDA_CSL_RANGE.1),
            ),
            BoundCheck::new(
                "thickness_above_sigma_csl",
                p.thickness.si_value(),
                Some(p.sigma_csl.si_value()),
                None,
            ),
        ],
    };
    ValidationReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Independent evaluations of the closed forms, plain f64.
    const HBAR: f64 = 1.054571817e-34;
    const G: f64 = 6.674e-11;
    const M0: f64 = 1.66053907e-27;

    fn oracle_omega_g(sigma: f64, a: f64, rho: f64) -> f64 {
        (4.0 * PI * G * rho / 3.0 * (a / (2.0 * PI.sqrt() * sigma)).powi(3)).sqrt()
    }

    fn kg(m: f64) -> PhysQuantity {
        PhysQuantity::new(m, Unit::Kilogram).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn omega_g_strongest_dp() {
        let c = Constants::codata();
        let p = DpParams::strongest(2000.0).unwrap();
        let w = omega_g(&p, &c).unwrap();
        assert_eq!(w.dimension(), Dimension::RATE);
        assert!(rel(w.value(), oracle_omega_g(1e-14, 5e-10, 2000.0)) < 1e-12);
        assert!(rel(w.value(), 1252.5642499485018) < 1e-9);
        // quoted as ≈1.3 kHz
        assert!(rel(w.value(), 1.3e3) < 0.05);
    }

    #[test]
    fn omega_g_scales_with_sqrt_density() {
        let c = Constants::codata();
        let w1 = omega_g(&DpParams::strongest(2000.0).unwrap(), &c).unwrap();
        let w4 = omega_g(&DpParams::strongest(8000.0).unwrap(), &c).unwrap();
        assert!(rel(w4.value(), 2.0 * w1.value()) < 1e-12);
    }

    #[test]
    fn omega_g_refuses_coarse_resolution() {
        let c = Constants::codata();
        let p = DpParams::from_si(1e-10, 5e-10, 2000.0).unwrap();
        assert!(matches!(omega_g(&p, &c), Err(Error::Validity(_))));
    }

    #[test]
    fn d_dp_values() {
        let c = Constants::codata();
        let p = DpParams::strongest(2000.0).unwrap();
        let d = d_dp(&kg(1.0), &p, &c).unwrap();
        assert_eq!(d.source(), DiffusionSource::Dp);
        assert_eq!(d.quantity().dimension(), Dimension::MOMENTUM_DIFFUSION);
        let w = oracle_omega_g(1e-14, 5e-10, 2000.0);
        assert!(rel(d.value(), HBAR / 2.0 * w * w) < 1e-12);
        assert!(rel(d.value(), 8.27e-29) < 1e-3);

        let d2 = d_dp(&kg(2.0), &p, &c).unwrap();
        assert!(rel(d2.value(), 2.0 * d.value()) < 1e-12);

        let half = DpParams::from_si(0.5e-14, 5e-10, 2000.0).unwrap();
        let d8 = d_dp(&kg(1.0), &half, &c).unwrap();
        assert!(rel(d8.value(), 8.0 * d.value()) < 1e-12);
    }

    #[test]
    fn d_dp_rejects_non_mass() {
        let c = Constants::codata();
        let p = DpParams::strongest(2000.0).unwrap();
        let m = PhysQuantity::new(1.0, Unit::Meter).unwrap();
        assert!(matches!(d_dp(&m, &p, &c), Err(Error::DimensionMismatch { .. })));
        assert!(d_dp(&kg(0.0), &p, &c).is_err());
    }

    #[test]
    fn d_csl_reference_point() {
        let c = Constants::codata();
        let p = CslParams::from_si(2.2e-8, 2000.0, 2e-4).unwrap();
        let d = d_csl(&kg(5e-6), &p, &c).unwrap();
        // λ (ħ/m0)² 4π σ² ϱ m / d evaluated by hand
        let oracle = 2.2e-8 * (HBAR / M0).powi(2) * 4.0 * PI * 1e-14 * 2000.0 * 5e-6 / 2e-4;
        assert!(rel(d.value(), oracle) < 1e-12);
        assert!(rel(d.value(), 5.5751515080260374e-34) < 1e-9);
        assert_eq!(d.source(), DiffusionSource::Csl);
    }

    #[test]
    fn d_csl_scalings() {
        let c = Constants::codata();
        let base = d_csl(&kg(5e-6), &CslParams::from_si(2.2e-8, 2000.0, 2e-4).unwrap(), &c).unwrap();
        let lam2 = d_csl(&kg(5e-6), &CslParams::from_si(4.4e-8, 2000.0, 2e-4).unwrap(), &c).unwrap();
        let thick2 = d_csl(&kg(5e-6), &CslParams::from_si(2.2e-8, 2000.0, 4e-4).unwrap(), &c).unwrap();
        assert!(rel(lam2.value(), 2.0 * base.value()) < 1e-12);
        assert!(rel(thick2.value(), 0.5 * base.value()) < 1e-12);
    }

    #[test]
    fn d_csl_needs_thick_disk() {
        let c = Constants::codata();
        let p = CslParams::from_si(2.2e-8, 2000.0, 1e-8).unwrap();
        assert!(matches!(d_csl(&kg(1.0), &p, &c), Err(Error::Validity(_))));
        assert!(CslParams::from_si(0.0, 2000.0, 1e-3).is_err());
    }

    #[test]
    fn validation_edges() {
        let lower = DpParams::strongest(2000.0).unwrap();
        let r = validate_params(ModelParams::Dp(&lower));
        assert!(r.check("sigma_dp_range").unwrap().passed);
        assert!(r.all_passed());

        let huge = DpParams::from_si(1.0, 5e-10, 2000.0).unwrap();
        let r = validate_params(ModelParams::Dp(&huge));
        assert!(!r.check("sigma_dp_range").unwrap().passed);
        assert!(!r.all_passed());

        let lam = CslParams::from_si(2.2e-17, 2000.0, 1e-3).unwrap();
        let r = validate_params(ModelParams::Csl(&lam));
        assert!(r.check("lambda_csl_range").unwrap().passed);

        let strong = CslParams::from_si(2.2e-6, 2000.0, 1e-3).unwrap();
        assert!(validate_params(ModelParams::Csl(&strong)).all_passed());
        let too_strong = CslParams::from_si(3e-6, 2000.0, 1e-3).unwrap();
        assert!(!validate_params(ModelParams::Csl(&too_strong)).all_passed());
    }

    proptest! {
        #[test]
        fn dp_diffusion_per_mass_is_mass_free(m1 in 1e-15f64..1e3, m2 in 1e-15f64..1e3,
                                              sigma in 1e-14f64..4e-11, rho in 100f64..2e4) {
            let c = Constants::codata();
            let p = DpParams::from_si(sigma, 5e-10, rho).unwrap();
            let a = d_dp(&kg(m1), &p, &c).unwrap().value() / m1;
            let b = d_dp(&kg(m2), &p, &c).unwrap().value() / m2;
            prop_assert!(rel(a, b) < 1e-12);
            let w = omega_g(&p, &c).unwrap().value();
            prop_assert!(rel(w * w * HBAR / 2.0 * m1, d_dp(&kg(m1), &p, &c).unwrap().value()) < 1e-12);
        }

        #[test]
        fn csl_ratio_laws(lam in 1e-17f64..1e-6, rho in 100f64..2e4, d in 1e-6f64..1e-2,
                          m in 1e-12f64..10.0, k in 1.1f64..10.0) {
            let c = Constants::codata();
            let at = |lam: f64, rho: f64, d: f64, m: f64| {
                d_csl(&kg(m), &CslParams::from_si(lam, rho, d).unwrap(), &c).unwrap().value()
            };
            let base = at(lam, rho, d, m);
            prop_assert!(rel(at(k * lam, rho, d, m), k * base) < 1e-12);
            prop_assert!(rel(at(lam, k * rho, d, m), k * base) < 1e-12);
            prop_assert!(rel(at(lam, rho, d, k * m), k * base) < 1e-12);
            prop_assert!(rel(at(lam, rho, k * d, m), base / k) < 1e-12);
        }
    }
}

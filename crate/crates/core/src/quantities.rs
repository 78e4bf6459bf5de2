//! Runtime dimension-checked quantities, the handful of units the toolkit
//! accepts at its boundaries, and the physical constants.
//!
//! Values are held in the unit they were given in; every arithmetic result
//! is expressed in the coherent SI unit of its dimension.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exponents over the base dimensions (mass, length, time, temperature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dimension {
    pub mass: i8,
    pub length: i8,
    pub time: i8,
    pub temperature: i8,
}

impl Dimension {
    pub const fn new(mass: i8, length: i8, time: i8, temperature: i8) -> Self {
        Self {
            mass,
            length,
            time,
            temperature,
        }
    }

    pub const DIMENSIONLESS: Dimension = Dimension::new(0, 0, 0, 0);
    pub const MASS: Dimension = Dimension::new(1, 0, 0, 0);
    pub const LENGTH: Dimension = Dimension::new(0, 1, 0, 0);
    pub const TIME: Dimension = Dimension::new(0, 0, 1, 0);
    pub const TEMPERATURE: Dimension = Dimension::new(0, 0, 0, 1);
    /// Rates, ordinary and angular frequencies.
    pub const RATE: Dimension = Dimension::new(0, 0, -1, 0);
    pub const DENSITY: Dimension = Dimension::new(1, -3, 0, 0);
    pub const MOMENTUM: Dimension = Dimension::new(1, 1, -1, 0);
    pub const ENERGY: Dimension = Dimension::new(1, 2, -2, 0);
    pub const ACTION: Dimension = Dimension::new(1, 2, -1, 0);
    pub const HEAT_CAPACITY: Dimension = Dimension::new(1, 2, -2, -1);
    pub const GRAVITATIONAL: Dimension = Dimension::new(-1, 3, -2, 0);
    /// Momentum squared per time, the unit of a diffusion constant D.
    pub const MOMENTUM_DIFFUSION: Dimension = Dimension::new(2, 2, -3, 0);

    pub fn powi(self, n: i8) -> Dimension {
        Dimension::new(
            self.mass * n,
            self.length * n,
            self.time * n,
            self.temperature * n,
        )
    }

    /// Halves every exponent; `None` when any exponent is odd.
    pub fn sqrt(self) -> Option<Dimension> {
        let half = |e: i8| (e % 2 == 0).then_some(e / 2);
        Some(Dimension::new(
            half(self.mass)?,
            half(self.length)?,
            half(self.time)?,
            half(self.temperature)?,
        ))
    }
}

impl std::ops::Mul for Dimension {
    type Output = Dimension;

    fn mul(self, other: Dimension) -> Dimension {
        Dimension::new(
            self.mass + other.mass,
            self.length + other.length,
            self.time + other.time,
            self.temperature + other.temperature,
        )
    }
}

impl std::ops::Div for Dimension {
    type Output = Dimension;

    fn div(self, other: Dimension) -> Dimension {
        Dimension::new(
            self.mass - other.mass,
            self.length - other.length,
            self.time - other.time,
            self.temperature - other.temperature,
        )
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = [
            ("kg", self.mass),
            ("m", self.length),
            ("s", self.time),
            ("K", self.temperature),
        ]
        .iter()
        .filter(|(_, e)| *e != 0)
        .map(|(sym, e)| {
            if *e == 1 {
                sym.to_string()
            } else {
                format!("{sym}^{e}")
            }
        })
        .collect();
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Units accepted at the ingestion and emission boundaries, plus the
/// coherent SI unit of an arbitrary dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Meter,
    Centimeter,
    Picometer,
    Kilogram,
    Gram,
    Milligram,
    Nanogram,
    Picogram,
    Second,
    Hertz,
    Kelvin,
    GramPerCubicCentimeter,
    KilogramPerCubicMeter,
    Si(Dimension),
}

impl Unit {
    pub const BOUNDARY_UNITS: [Unit; 13] = [
        Unit::Meter,
        Unit::Centimeter,
        Unit::Picometer,
        Unit::Kilogram,
        Unit::Gram,
        Unit::Milligram,
        Unit::Nanogram,
        Unit::Picogram,
        Unit::Second,
        Unit::Hertz,
        Unit::Kelvin,
        Unit::GramPerCubicCentimeter,
        Unit::KilogramPerCubicMeter,
    ];

    pub fn dimension(self) -> Dimension {
        match self {
            Unit::Meter | Unit::Centimeter | Unit::Picometer => Dimension::LENGTH,
            Unit::Kilogram | Unit::Gram | Unit::Milligram | Unit::Nanogram | Unit::Picogram => {
                Dimension::MASS
            }
            Unit::Second => Dimension::TIME,
            Unit::Hertz => Dimension::RATE,
            Unit::Kelvin => Dimension::TEMPERATURE,
            Unit::GramPerCubicCentimeter | Unit::KilogramPerCubicMeter => Dimension::DENSITY,
            Unit::Si(d) => d,
        }
    }

    /// Size of one of this unit in coherent SI.
    pub fn si_factor(self) -> f64 {
        match self {
            Unit::Centimeter => 1e-2,
            Unit::Picometer => 1e-12,
            Unit::Gram => 1e-3,
            Unit::Milligram => 1e-6,
            Unit::Nanogram => 1e-12,
            Unit::Picogram => 1e-15,
            Unit::GramPerCubicCentimeter => 1e3,
            _ => 1.0,
        }
    }

    /// The coherent SI unit for `dim`, preferring a named unit.
    pub fn coherent(dim: Dimension) -> Unit {
        match dim {
            Dimension::LENGTH => Unit::Meter,
            Dimension::MASS => Unit::Kilogram,
            Dimension::TIME => Unit::Second,
            Dimension::RATE => Unit::Hertz,
            Dimension::TEMPERATURE => Unit::Kelvin,
            Dimension::DENSITY => Unit::KilogramPerCubicMeter,
            d => Unit::Si(d),
        }
    }

    pub fn name(self) -> String {
        match self {
            Unit::Meter => "m".into(),
            Unit::Centimeter => "cm".into(),
            Unit::Picometer => "pm".into(),
            Unit::Kilogram => "kg".into(),
            Unit::Gram => "g".into(),
            Unit::Milligram => "mg".into(),
            Unit::Nanogram => "ng".into(),
            Unit::Picogram => "pg".into(),
            Unit::Second => "s".into(),
            Unit::Hertz => "Hz".into(),
            Unit::Kelvin => "K".into(),
            Unit::GramPerCubicCentimeter => "g/cm^3".into(),
            Unit::KilogramPerCubicMeter => "kg/m^3".into(),
            Unit::Si(d) => d.to_string(),
        }
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "m" => Unit::Meter,
            "cm" => Unit::Centimeter,
            "pm" => Unit::Picometer,
            "kg" => Unit::Kilogram,
            "g" => Unit::Gram,
            "mg" => Unit::Milligram,
            "ng" => Unit::Nanogram,
            "pg" => Unit::Picogram,
            "s" => Unit::Second,
            "Hz" => Unit::Hertz,
            "K" => Unit::Kelvin,
            "g/cm^3" => Unit::GramPerCubicCentimeter,
            "kg/m^3" => Unit::KilogramPerCubicMeter,
            other => return Err(Error::UnknownUnit(other.to_string())),
        })
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// A finite number tagged with a unit (and hence a dimension).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysQuantity {
    value: f64,
    unit: Unit,
}

impl PhysQuantity {
    pub fn new(value: f64, unit: Unit) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite("quantity construction"));
        }
        Ok(Self { value, unit })
    }

    /// A quantity given in the coherent SI unit of `dim`.
    pub fn si(value: f64, dim: Dimension) -> Result<Self> {
        Self::new(value, Unit::coherent(dim))
    }

    pub fn dimensionless(value: f64) -> Result<Self> {
        Self::si(value, Dimension::DIMENSIONLESS)
    }

    /// Value expressed in this quantity's own unit.
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn dimension(&self) -> Dimension {
        self.unit.dimension()
    }

    pub fn si_value(&self) -> f64 {
        self.value * self.unit.si_factor()
    }

    /// SI value, after checking the dimension.
    pub fn value_as(&self, dim: Dimension) -> Result<f64> {
        self.expect(dim)?;
        Ok(self.si_value())
    }

    pub fn expect(&self, dim: Dimension) -> Result<()> {
        if self.dimension() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dimension(),
            })
        }
    }

    pub fn convert(&self, target: Unit) -> Result<PhysQuantity> {
        convert(*self, target)
    }

    fn checked(value: f64, dim: Dimension, op: &'static str) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite(op));
        }
        Ok(Self {
            value,
            unit: Unit::coherent(dim),
        })
    }

    pub fn try_add(&self, other: &PhysQuantity) -> Result<PhysQuantity> {
        other.expect(self.dimension())?;
        Self::checked(self.si_value() + other.si_value(), self.dimension(), "addition")
    }

    pub fn try_sub(&self, other: &PhysQuantity) -> Result<PhysQuantity> {
        other.expect(self.dimension())?;
        Self::checked(
            self.si_value() - other.si_value(),
            self.dimension(),
            "subtraction",
        )
    }

    pub fn mul(&self, other: &PhysQuantity) -> Result<PhysQuantity> {
        Self::checked(
            self.si_value() * other.si_value(),
            self.dimension() * other.dimension(),
            "multiplication",
        )
    }

    pub fn div(&self, other: &PhysQuantity) -> Result<PhysQuantity> {
        if other.si_value() == 0.0 {
            return Err(Error::NonFinite("division by zero"));
        }
        Self::checked(
            self.si_value() / other.si_value(),
            self.dimension() / other.dimension(),
            "division",
        )
    }

    /// Multiplication by a pure number.
    pub fn scale(&self, k: f64) -> Result<PhysQuantity> {
        Self::checked(self.si_value() * k, self.dimension(), "scaling")
    }

    pub fn powi(&self, n: i8) -> Result<PhysQuantity> {
        Self::checked(self.si_value().powi(n as i32), self.dimension().powi(n), "power")
    }

    pub fn sqrt(&self) -> Result<PhysQuantity> {
        let dim = self
            .dimension()
            .sqrt()
            .ok_or_else(|| Error::Domain(format!("square root of odd dimension {}", self.dimension())))?;
        if self.si_value() < 0.0 {
            return Err(Error::Domain("square root of a negative quantity".into()));
        }
        Self::checked(self.si_value().sqrt(), dim, "square root")
    }
}

impl fmt::Display for PhysQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} {}", self.value, self.unit)
    }
}

/// Re-express `q` in `target`, which must share its dimension.
pub fn convert(q: PhysQuantity, target: Unit) -> Result<PhysQuantity> {
    if q.dimension() != target.dimension() {
        return Err(Error::DimensionMismatch {
            expected: target.dimension(),
            found: q.dimension(),
        });
    }
    if q.unit == target {
        return Ok(q);
    }
    PhysQuantity::new(q.si_value() / target.si_factor(), target)
}

/// Parse `"<number> [unit]"`; a bare number is taken in `default_unit`.
pub fn parse_quantity(text: &str, default_unit: Unit) -> Result<PhysQuantity> {
    let text = text.trim();
    let (num, unit) = match text.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim().parse::<Unit>()?),
        None => (text, default_unit),
    };
    let value: f64 = num
        .parse()
        .map_err(|_| Error::Domain(format!("`{num}` is not a number")))?;
    let q = PhysQuantity::new(value, unit)?;
    convert(q, default_unit)
}

/// Fixed physical constants. The reduced variant sets ħ = k_B = m0 = G = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    hbar: PhysQuantity,
    k_b: PhysQuantity,
    g: PhysQuantity,
    m0: PhysQuantity,
}

impl Constants {
    pub fn codata() -> Self {
        Self::with_values(1.054_571_817e-34, 1.380_649e-23, 6.674e-11, 1.660_539_07e-27)
    }

    pub fn reduced() -> Self {
        Self::with_values(1.0, 1.0, 1.0, 1.0)
    }

    fn with_values(hbar: f64, k_b: f64, g: f64, m0: f64) -> Self {
        let q = |v, d| PhysQuantity::si(v, d).expect("constants are finite");
        Self {
            hbar: q(hbar, Dimension::ACTION),
            k_b: q(k_b, Dimension::HEAT_CAPACITY),
            g: q(g, Dimension::GRAVITATIONAL),
            m0: q(m0, Dimension::MASS),
        }
    }

    pub fn hbar(&self) -> PhysQuantity {
        self.hbar
    }

    pub fn k_b(&self) -> PhysQuantity {
        self.k_b
    }

    pub fn g(&self) -> PhysQuantity {
        self.g
    }

    pub fn m0(&self) -> PhysQuantity {
        self.m0
    }
}

impl Default for Constants {
    fn default() -> Self {
        Self::codata()
    }
}

//! Scalar types for kernel entries and the angle parameter.
//!
//! Kernels are generic over [`Value`] so the same construction code runs in
//! exact rational arithmetic (for the angles whose `sin²` is rational) and in
//! `f64`.

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{FromPrimitive, Num, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub trait Value:
    Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Whether arithmetic in this type is exact.
    const EXACT: bool;

    fn ratio(num: i64, den: i64) -> Self;

    fn from_rational(r: &BigRational) -> Self;

    fn to_f64(&self) -> f64;

    fn half() -> Self {
        Self::ratio(1, 2)
    }
}

impl Value for f64 {
    const EXACT: bool = false;

    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Value for BigRational {
    const EXACT: bool = true;

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Parses `"3/8"`, `"0.125"` or `"1"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("{s}: zero denominator")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let n = BigInt::from_str(&digits).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
        let d = num::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, d));
    }
    let n = BigInt::from_str(s).map_err(|e| Error::Parse(format!("{s}: {e}")))?;
    Ok(BigRational::from_integer(n))
}

/// Arithmetic mode for kernel construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rational,
    Float,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(Mode::Rational),
            "float" => Ok(Mode::Float),
            other => Err(Error::Parse(format!("unknown mode `{other}`"))),
        }
    }
}

impl Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Rational => "rational",
            Mode::Float => "float",
        })
    }
}

/// Half-opening angle of a wedge.
///
/// The three special angles keep an exact `sin²`, which is what makes the
/// rational mode possible.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    PiOver6,
    PiOver4,
    PiOver3,
    Radians(f64),
}

impl Angle {
    pub fn radians(&self) -> f64 {
        use std::f64::consts::PI;
        match self {
            Angle::PiOver6 => PI / 6.0,
            Angle::PiOver4 => PI / 4.0,
            Angle::PiOver3 => PI / 3.0,
            Angle::Radians(a) => *a,
        }
    }

    /// `sin²α` as an exact rational, when it is one.
    pub fn sin2_exact(&self) -> Option<BigRational> {
        match self {
            Angle::PiOver6 => Some(BigRational::ratio(1, 4)),
            Angle::PiOver4 => Some(BigRational::ratio(1, 2)),
            Angle::PiOver3 => Some(BigRational::ratio(3, 4)),
            Angle::Radians(_) => None,
        }
    }

    /// `sin²α` in the requested scalar type. Fails in exact arithmetic for
    /// angles without a rational `sin²`.
    pub fn sin2<T: Value>(&self) -> Result<T> {
        match self.sin2_exact() {
            Some(r) => Ok(T::from_rational(&r)),
            None if T::EXACT => Err(Error::domain(format!(
                "angle {} rad has no exact sin²; use float mode",
                self.radians()
            ))),
            None => {
                let s = self.radians().sin();
                let v = T::from_f64(s * s).ok_or_else(|| Error::domain("sin² not representable"))?;
                Ok(v)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.radians();
        if a > 0.0 && a < std::f64::consts::FRAC_PI_2 {
            Ok(())
        } else {
            Err(Error::domain(format!("alpha = {a} must lie in (0, pi/2)")))
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let angle = match s.trim().to_ascii_lowercase().as_str() {
            "pi/6" => Angle::PiOver6,
            "pi/4" => Angle::PiOver4,
            "pi/3" => Angle::PiOver3,
            other => Angle::Radians(
                other
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("angle `{s}`: expected radians or pi/6, pi/4, pi/3")))?,
            ),
        };
        angle.validate()?;
        Ok(angle)
    }
}

impl Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Angle::PiOver6 => f.write_str("pi/6"),
            Angle::PiOver4 => f.write_str("pi/4"),
            Angle::PiOver3 => f.write_str("pi/3"),
            Angle::Radians(a) => write!(f, "{a}"),
        }
    }
}

pub(crate) fn sum<'a, T: Value>(values: impl Iterator<Item = &'a T>) -> T {
    values.fold(T::zero(), |acc, v| acc + v.clone())
}


#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/8").unwrap(), BigRational::ratio(3, 8));
        assert_eq!(parse_rational("0.125").unwrap(), BigRational::ratio(1, 8));
        assert_eq!(parse_rational("2").unwrap(), BigRational::ratio(2, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn special_angles_are_exact() {
        let s: BigRational = Angle::PiOver6.sin2().unwrap();
        assert_eq!(s, BigRational::ratio(1, 4));
        let f: f64 = Angle::PiOver3.sin2().unwrap();
        assert_eq!(f, 0.75);
        assert!(Angle::Radians(0.3).sin2::<BigRational>().is_err());
        let g: f64 = Angle::Radians(0.3).sin2().unwrap();
        assert!((g - 0.3f64.sin().powi(2)).abs() < 1e-16);
    }

    #[test]
    fn angle_parsing() {
        assert_eq!("pi/4".parse::<Angle>().unwrap(), Angle::PiOver4);
        assert_eq!("0.5".parse::<Angle>().unwrap(), Angle::Radians(0.5));
        assert!("2.0".parse::<Angle>().is_err());
        assert!("-0.1".parse::<Angle>().is_err());
        assert!("pie".parse::<Angle>().is_err());
    }
}

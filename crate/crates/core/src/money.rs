//! Fixed-point money and the rounding rules used by the economic tables.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Neg, Sub};

use rust_decimal::prelude::ToPrimitive;
use rust_decimal::{Decimal, RoundingStrategy};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An amount of USD held as integer cents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Cents(pub i64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    pub fn from_dollars(d: Decimal) -> Option<Cents> {
        (d * Decimal::ONE_HUNDRED).to_i64().map(Cents)
    }

    /// Truncates toward zero to whole cents (display rule for cost-table row values).
    pub fn truncate(d: Decimal) -> Cents {
        Cents::from_dollars(d.round_dp_with_strategy(2, RoundingStrategy::ToZero))
            .expect("amount out of range")
    }

    /// Rounds half away from zero to whole cents.
    pub fn round(d: Decimal) -> Cents {
        Cents::from_dollars(d.round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero))
            .expect("amount out of range")
    }

    pub fn to_decimal(self) -> Decimal {
        Decimal::new(self.0, 2)
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl Sub for Cents {
    type Output = Cents;
    fn sub(self, rhs: Cents) -> Cents {
        Cents(self.0 - rhs.0)
    }
}

impl Neg for Cents {
    type Output = Cents;
    fn neg(self) -> Cents {
        Cents(-self.0)
    }
}

impl Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        iter.fold(Cents::ZERO, Add::add)
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

impl Serialize for Cents {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

impl<'de> Deserialize<'de> for Cents {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        let v = dec(x);
        if v.scale() > 2 {
            return Err(serde::de::Error::custom(format!("{x} has fractions of a cent")));
        }
        Cents::from_dollars(v).ok_or_else(|| serde::de::Error::custom("amount out of range"))
    }
}

/// Lossless conversion of a configuration float to a decimal: the shortest
/// representation that round-trips, so `0.1713` stays `0.1713`.
pub fn dec(x: f64) -> Decimal {
    use std::str::FromStr;
    Decimal::from_str(&format!("{x}"))
        .or_else(|_| Decimal::from_scientific(&format!("{x:e}")))
        .unwrap_or_else(|_| panic!("{x} is not representable as a decimal"))
}

/// Rounds a quantity (e.g. pounds) half away from zero to two decimals.
pub fn round2(d: Decimal) -> Decimal {
    d.round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_and_rounding() {
        assert_eq!(Cents::truncate(dec(986.688)), Cents(98668));
        assert_eq!(Cents::round(dec(986.688)), Cents(98669));
        assert_eq!(Cents::round(dec(0.865)), Cents(87));
        assert_eq!(Cents::truncate(dec(-1.239)), Cents(-123));
    }

    #[test]
    fn display() {
        assert_eq!(Cents(-7605810).to_string(), "-76058.10");
        assert_eq!(Cents(5).to_string(), "0.05");
        assert_eq!(Cents(-5).to_string(), "-0.05");
    }

    #[test]
    fn dec_keeps_short_form() {
        assert_eq!(dec(0.1713).to_string(), "0.1713");
        assert_eq!(dec(35.0).to_string(), "35");
        assert_eq!(dec(1e-9).to_string(), "0.000000001");
    }
}

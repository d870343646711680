use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Result;

/// Default cap on modulus values, as a number of decimal digits.
pub const DEFAULT_CAP_DIGITS: u32 = 10_000;

/// A natural number, or the marker that it exceeds the configured cap.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum NaturalBound {
    Finite(BigUint),
    Overflow,
}

impl NaturalBound {
    pub fn from_u64(v: u64) -> Self {
        NaturalBound::Finite(BigUint::from(v))
    }

    pub fn finite(&self) -> Option<&BigUint> {
        match self {
            NaturalBound::Finite(v) => Some(v),
            NaturalBound::Overflow => None,
        }
    }

    pub fn is_overflow(&self) -> bool {
        matches!(self, NaturalBound::Overflow)
    }

    /// The value as a machine index, if it fits.
    pub fn to_u64(&self) -> Option<u64> {
        self.finite().and_then(|v| u64::try_from(v).ok())
    }

    /// `n <= self`, treating overflow as larger than every natural.
    pub fn bounds(&self, n: u64) -> bool {
        match self {
            NaturalBound::Finite(v) => BigUint::from(n) <= *v,
            NaturalBound::Overflow => true,
        }
    }

    /// Applies `f` to a finite value; overflow propagates.
    pub fn and_then(self, f: impl FnOnce(BigUint) -> Result<NaturalBound>) -> Result<NaturalBound> {
        match self {
            NaturalBound::Finite(v) => f(v),
            NaturalBound::Overflow => Ok(NaturalBound::Overflow),
        }
    }

    /// Number of decimal digits of a finite value.
    pub fn digits(&self) -> Option<usize> {
        self.finite().map(|v| v.to_str_radix(10).len())
    }
}

impl fmt::Display for NaturalBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NaturalBound::Finite(v) => write!(f, "{v}"),
            NaturalBound::Overflow => write!(f, "overflow"),
        }
    }
}

impl Serialize for NaturalBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NaturalBound::Finite(v) => s.serialize_str(&v.to_str_radix(10)),
            NaturalBound::Overflow => {
                use serde::ser::SerializeMap;
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("overflow", &true)?;
                m.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for NaturalBound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Flag { overflow: bool },
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => BigUint::parse_bytes(s.as_bytes(), 10)
                .map(NaturalBound::Finite)
                .ok_or_else(|| serde::de::Error::custom(format!("not a natural: {s}"))),
            Raw::Flag { overflow: true } => Ok(NaturalBound::Overflow),
            Raw::Flag { overflow: false } => {
                Err(serde::de::Error::custom("overflow flag must be true"))
            }
        }
    }
}

/// Values strictly above `limit` are reported as [`NaturalBound::Overflow`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cap {
    digits: u32,
    limit: BigUint,
}

impl Cap {
    /// Cap at `10^digits`.
    pub fn digits(digits: u32) -> Self {
        Cap {
            digits,
            limit: num_traits::pow(BigUint::from(10u32), digits as usize),
        }
    }

    pub fn digit_count(&self) -> u32 {
        self.digits
    }

    pub fn limit(&self) -> &BigUint {
        &self.limit
    }

    pub fn check(&self, v: BigUint) -> NaturalBound {
        if v > self.limit {
            NaturalBound::Overflow
        } else {
            NaturalBound::Finite(v)
        }
    }

    /// `base^exp`, without materialising values far beyond the cap.
    pub fn pow(&self, base: &BigUint, exp: u64) -> NaturalBound {
        if base.is_zero() {
            return self.check(if exp == 0 {
                BigUint::one()
            } else {
                BigUint::zero()
            });
        }
        if base.is_one() {
            return NaturalBound::Finite(BigUint::one());
        }
        let lower_bits = (base.bits() - 1).saturating_mul(exp);
        if lower_bits > self.limit.bits() {
            return NaturalBound::Overflow;
        }
        let exp = usize::try_from(exp).expect("exponent bounded by cap size");
        self.check(num_traits::pow(base.clone(), exp))
    }
}

impl Default for Cap {
    fn default() -> Self {
        Cap::digits(DEFAULT_CAP_DIGITS)
    }
}

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number.
///
/// JSON accepts integers, decimal literals (`0.25`, `1e-3`) and `"p/q"` strings.
/// A JSON number is read through its shortest decimal spelling, so `0.1` is
/// exactly one tenth. Values are written back as strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::InvalidRational(format!("{numer}/0")));
        }
        Ok(Rational(BigRational::new(numer.into(), denom.into())))
    }

    pub fn integer(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        Rational(r)
    }

    pub fn from_natural(n: &BigUint) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n.clone())))
    }

    /// Exact value of a finite float.
    pub fn from_f64(v: f64) -> Result<Self> {
        BigRational::from_float(v)
            .map(Rational)
            .ok_or_else(|| Error::InvalidRational(v.to_string()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.0.is_zero() {
            return Err(Error::InvalidRational("reciprocal of zero".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    /// Least natural `c` with `c >= self`; zero for negative values.
    pub fn ceil_natural(&self) -> BigUint {
        ceil_natural(&self.0)
    }

    pub fn floor_natural(&self) -> BigUint {
        let f = self.0.floor().to_integer();
        f.to_biguint().unwrap_or_default()
    }

    pub fn mul(&self, other: &Rational) -> Rational {
        Rational(&self.0 * &other.0)
    }

    pub fn add(&self, other: &Rational) -> Rational {
        Rational(&self.0 + &other.0)
    }

    pub fn div(&self, other: &Rational) -> Result<Rational> {
        Ok(self.mul(&other.recip()?))
    }
}

pub(crate) fn ceil_natural(r: &BigRational) -> BigUint {
    let c = r.ceil().to_integer();
    c.to_biguint().unwrap_or_default()
}

/// `ceil(n * r)` for `r >= 0`, without normalizing an intermediate fraction.
pub(crate) fn ceil_mul(n: &BigUint, r: &BigRational) -> BigUint {
    let num = r.numer().to_biguint().unwrap_or_default();
    let den = r.denom().to_biguint().unwrap_or_else(BigUint::one);
    div_ceil(&(n * num), &den)
}

pub(crate) fn nat_to_rat(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidRational(s.to_string());
        let t = s.trim();
        if let Some((p, q)) = t.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Ok(Rational(BigRational::new(p, q)));
        }
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, body) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part
            .chars()
            .chain(frac_part.chars())
            .all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let digits: BigInt = format!("{int_part}{frac_part}0")
            .parse()
            .map_err(|_| bad())?;
        let scale = exp - frac_part.len() as i32 - 1;
        let ten = BigInt::from(10u32);
        let mut value = BigRational::from_integer(digits);
        if scale >= 0 {
            value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
        } else {
            value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
        }
        Ok(Rational(if neg { -value } else { value }))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Num(serde_json::Number),
        }
        let text = match Raw::deserialize(d)? {
            Raw::Str(s) => s,
            Raw::Num(n) => n.to_string(),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// What a [`RationalUpper`] bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpperOf {
    Exp(Rational),
    Sqrt(u64),
}

/// A rational `u` certified to satisfy `q <= u < q + 1e-6` for a quantity `q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalUpper {
    value: BigRational,
    of: UpperOf,
}

impl RationalUpper {
    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn of(&self) -> &UpperOf {
        &self.of
    }

    pub fn is_exp(&self) -> bool {
        matches!(self.of, UpperOf::Exp(_))
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }
}

/// Default number of decimal digits kept by [`exp_upper`] and [`sqrt_upper`].
pub const UPPER_DIGITS: u32 = 12;

fn pow10(digits: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u32), digits as usize)
}

/// Rounds `r` up to a multiple of `10^-digits`.
fn round_up(r: &BigRational, digits: u32) -> BigRational {
    let scale = pow10(digits);
    let scaled = r * BigRational::from_integer(scale.clone());
    BigRational::new(scaled.ceil().to_integer(), scale)
}

/// Upper bound of `e^a` with error below `10^-digits` plus rounding.
pub fn exp_upper(a: &Rational) -> Result<RationalUpper> {
    exp_upper_digits(a, UPPER_DIGITS)
}

pub fn exp_upper_digits(a: &Rational, digits: u32) -> Result<RationalUpper> {
    if a.is_negative() {
        return Err(Error::NegativeExponent);
    }
    let x = a.inner();
    let tol = BigRational::new(BigInt::one(), pow10(digits + 1));
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let mut j: u64 = 0;
    loop {
        sum += &term;
        j += 1;
        term = &term * x / BigRational::from_integer(j.into());
        if term.is_zero() {
            break;
        }
        // Remaining tail is at most term / (1 - x/(j+1)) once j + 1 > x.
        let ratio = x / BigRational::from_integer((j + 1).into());
        if ratio < BigRational::one() {
            let tail = &term / (BigRational::one() - ratio);
            if tail < tol {
                sum += tail;
                break;
            }
        }
    }
    Ok(RationalUpper {
        value: round_up(&sum, digits),
        of: UpperOf::Exp(a.clone()),
    })
}

/// Upper bound of `sqrt(d)`, exact for perfect squares.
pub fn sqrt_upper(d: u64) -> Result<RationalUpper> {
    sqrt_upper_digits(d, UPPER_DIGITS)
}

pub fn sqrt_upper_digits(d: u64, digits: u32) -> Result<RationalUpper> {
    if d == 0 {
        return Err(Error::InvalidQuantitativeData(
            "sqrt_upper needs d >= 1".into(),
        ));
    }
    let scale = pow10(digits).to_biguint().expect("positive");
    let target = BigUint::from(d) * &scale * &scale;
    let mut root = target.sqrt();
    if &root * &root != target {
        root += 1u32;
    }
    Ok(RationalUpper {
        value: BigRational::new(BigInt::from(root), BigInt::from(scale)),
        of: UpperOf::Sqrt(d),
    })
}

/// Least natural `m` with `m^p >= x`.
pub(crate) fn ceil_root(x: &BigUint, p: u32) -> BigUint {
    if p <= 1 || x.is_zero() {
        return x.clone();
    }
    let r = x.nth_root(p);
    if num_traits::pow(r.clone(), p as usize) >= *x {
        r
    } else {
        r + 1u32
    }
}

/// `ceil(a / b)` for naturals, `b > 0`.
pub(crate) fn div_ceil(a: &BigUint, b: &BigUint) -> BigUint {
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

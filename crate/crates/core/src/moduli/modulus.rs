use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{ceil_mul, ceil_root, Rational};
use crate::error::{Error, Result};

/// A map N -> N given in closed form or as a finite table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModulusFn {
    Identity,
    Constant {
        c: u64,
    },
    /// `a * j + b`
    Affine {
        a: u64,
        b: u64,
    },
    /// `sum_i coeffs[i] * j^i`
    Polynomial {
        coeffs: Vec<u64>,
    },
    /// Least `n` with `c / (n+1)^p <= 1/(j+1)`; a rate for `c/(n+1)^p -> 0`.
    PowerRate {
        c: Rational,
        p: u32,
    },
    /// `values[j]` for `j < values.len()`; undefined elsewhere.
    Table {
        values: Vec<u64>,
    },
}

impl ModulusFn {
    pub fn affine(a: u64, b: u64) -> Self {
        ModulusFn::Affine { a, b }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModulusFn::PowerRate { c, p } => {
                if !c.is_positive() || *p == 0 {
                    return Err(Error::InvalidQuantitativeData(format!(
                        "power rate needs c > 0 and p >= 1, got c = {c}, p = {p}"
                    )));
                }
            }
            ModulusFn::Table { values } if values.is_empty() => {
                return Err(Error::InvalidQuantitativeData("empty modulus table".into()));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn eval(&self, j: &BigUint) -> Result<BigUint> {
        Ok(match self {
            ModulusFn::Identity => j.clone(),
            ModulusFn::Constant { c } => BigUint::from(*c),
            ModulusFn::Affine { a, b } => j * BigUint::from(*a) + BigUint::from(*b),
            ModulusFn::Polynomial { coeffs } => coeffs
                .iter()
                .rev()
                .fold(BigUint::zero(), |acc, &c| acc * j + BigUint::from(c)),
            ModulusFn::PowerRate { c, p } => {
                let need = ceil_mul(&(j + 1u32), c.inner());
                let m = ceil_root(&need, *p);
                if m.is_zero() {
                    BigUint::zero()
                } else {
                    m - 1u32
                }
            }
            ModulusFn::Table { values } => {
                let idx = usize::try_from(j).ok();
                match idx.and_then(|i| values.get(i)) {
                    Some(&v) => BigUint::from(v),
                    None => {
                        return Err(Error::TableRange {
                            index: j.to_string(),
                            range: format!("0..={}", values.len().saturating_sub(1)),
                        })
                    }
                }
            }
        })
    }

    pub fn eval_u64(&self, j: u64) -> Result<BigUint> {
        self.eval(&BigUint::from(j))
    }

    /// Largest index at which the map is defined, if bounded.
    pub fn range_end(&self) -> Option<usize> {
        match self {
            ModulusFn::Table { values } => Some(values.len().saturating_sub(1)),
            _ => None,
        }
    }

    /// Nondecreasing on its whole domain. Closed forms are by construction.
    pub fn is_monotone(&self) -> bool {
        match self {
            ModulusFn::Table { values } => values.windows(2).all(|w| w[0] <= w[1]),
            _ => true,
        }
    }
}

/// A map N x N -> N such as the residual-search bound `phi(k, n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Modulus2 {
    /// `ck * k + cn * n + c`
    Affine { ck: u64, cn: u64, c: u64 },
    /// `max(n, from)`
    Stationary { from: u64 },
    /// `rows[k][n]` on the stored rectangle; outside it `max(n, tail)` when a
    /// tail is present, an error otherwise.
    Table {
        rows: Vec<Vec<u64>>,
        tail: Option<u64>,
    },
}

impl Modulus2 {
    pub fn eval(&self, k: &BigUint, n: &BigUint) -> Result<BigUint> {
        match self {
            Modulus2::Affine { ck, cn, c } => {
                Ok(k * BigUint::from(*ck) + n * BigUint::from(*cn) + BigUint::from(*c))
            }
            Modulus2::Stationary { from } => Ok(n.max(&BigUint::from(*from)).clone()),
            Modulus2::Table { rows, tail } => {
                let hit = match (usize::try_from(k), usize::try_from(n)) {
                    (Ok(ki), Ok(ni)) => rows.get(ki).and_then(|r| r.get(ni)).copied(),
                    _ => None,
                };
                match (hit, tail) {
                    (Some(v), _) => Ok(BigUint::from(v)),
                    (None, Some(s)) => Ok(n.max(&BigUint::from(*s)).clone()),
                    (None, None) => Err(Error::TableRange {
                        index: format!("({k}, {n})"),
                        range: self.range_description(),
                    }),
                }
            }
        }
    }

    pub fn eval_u64(&self, k: u64, n: u64) -> Result<BigUint> {
        self.eval(&BigUint::from(k), &BigUint::from(n))
    }

    fn range_description(&self) -> String {
        match self {
            Modulus2::Table { rows, .. } => format!(
                "k <= {}, n <= {}",
                rows.len().saturating_sub(1),
                rows.first().map_or(0, |r| r.len().saturating_sub(1))
            ),
            _ => "all of N x N".into(),
        }
    }

    /// Checks monotonicity in both arguments over the stored table.
    pub fn is_monotone(&self) -> bool {
        match self {
            Modulus2::Table { rows, tail } => {
                let in_n = rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
                let in_k = rows
                    .windows(2)
                    .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
                let rect = rows.windows(2).all(|w| w[0].len() == w[1].len());
                let into_tail = tail.is_none_or(|s| {
                    rows.iter()
                        .all(|r| r.iter().enumerate().all(|(n, &v)| v <= (n as u64).max(s)))
                });
                in_n && in_k && rect && into_tail
            }
            _ => true,
        }
    }
}

/// The counterfunction `g` of a metastability statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Counterfunction {
    pub g: ModulusFn,
}

impl Counterfunction {
    pub fn new(g: ModulusFn) -> Self {
        Counterfunction { g }
    }

    /// `g(n) = n + 1`
    pub fn successor() -> Self {
        Counterfunction::new(ModulusFn::affine(1, 1))
    }

    pub fn eval(&self, n: &BigUint) -> Result<BigUint> {
        self.g.eval(n)
    }

    pub fn eval_index(&self, n: usize) -> Result<Option<usize>> {
        Ok(self.g.eval_u64(n as u64)?.to_usize())
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moduli::Rational;

/// Smallest admissible step `mu_n`; residuals divide by it.
pub const MU_FLOOR: f64 = 1e-300;

/// A parameter sequence indexed by `n >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rule {
    /// `c / (n+1)^p`
    Power {
        c: Rational,
        p: u32,
    },
    Table {
        values: Vec<f64>,
    },
}

impl Rule {
    pub fn power(c: Rational, p: u32) -> Self {
        Rule::Power { c, p }
    }

    pub fn value(&self, n: usize) -> Option<f64> {
        match self {
            Rule::Power { c, p } => Some(c.to_f64() / ((n + 1) as f64).powi(*p as i32)),
            Rule::Table { values } => values.get(n).copied(),
        }
    }

    fn len_limit(&self) -> Option<usize> {
        match self {
            Rule::Table { values } => Some(values.len()),
            Rule::Power { .. } => None,
        }
    }

    /// Upper bound on `sum_{n >= m} self(n)`, when of power form.
    pub fn tail_bound(&self, m: usize) -> Option<f64> {
        match self {
            Rule::Power { c, p } => power_tail(c.to_f64(), *p as i32, m),
            Rule::Table { .. } => None,
        }
    }
}

/// `sum_{n >= m} c (n+1)^-q <= c ((m+1)^-q + (m+1)^(1-q) / (q-1))`, finite for `q >= 2`.
pub(crate) fn power_tail(c: f64, q: i32, m: usize) -> Option<f64> {
    if q < 2 {
        return None;
    }
    let x = (m + 1) as f64;
    Some(c * (x.powi(-q) + x.powi(1 - q) / f64::from(q - 1)))
}

/// The sequences `(lambda_n)` and `(mu_n)` on `0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterSchedule {
    pub lambda: Rule,
    pub mu: Rule,
    pub horizon: usize,
}

impl ParameterSchedule {
    pub fn new(lambda: Rule, mu: Rule, horizon: usize) -> Result<Self> {
        let s = ParameterSchedule {
            lambda,
            mu,
            horizon,
        };
        s.validate()?;
        Ok(s)
    }

    /// `lambda_n = 1/(n+1)`, `mu_n = 1/(n+1)^3`.
    pub fn standard(horizon: usize) -> Self {
        ParameterSchedule {
            lambda: Rule::power(Rational::one(), 1),
            mu: Rule::power(Rational::one(), 3),
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, rule) in [("lambda", &self.lambda), ("mu", &self.mu)] {
            if let Some(len) = rule.len_limit() {
                if len <= self.horizon {
                    return Err(Error::InvalidSchedule(format!(
                        "{name} table has {len} entries, horizon {} needs {}",
                        self.horizon,
                        self.horizon + 1
                    )));
                }
            }
            if let Rule::Power { c, .. } = rule {
                if !c.is_positive() {
                    return Err(Error::InvalidSchedule(format!(
                        "{name} coefficient must be > 0"
                    )));
                }
            }
            let floor = if name == "mu" { MU_FLOOR } else { 0.0 };
            for n in 0..=self.horizon {
                let v = rule.value(n).expect("checked length");
                if !(v.is_finite() && v > floor) {
                    return Err(Error::InvalidSchedule(format!(
                        "{name}_{n} = {v} is not a usable positive value"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check(&self, n: usize) -> Result<()> {
        if n > self.horizon {
            return Err(Error::HorizonExceeded {
                n,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    pub fn lambda(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.lambda.value(n).expect("validated"))
    }

    pub fn mu(&self, n: usize) -> Result<f64> {
        self.check(n)?;
        Ok(self.mu.value(n).expect("validated"))
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        ParameterSchedule::new(self.lambda.clone(), self.mu.clone(), horizon)
    }

    /// Upper bound on `sum_{n > horizon} mu_n / lambda_n`; `None` if the series
    /// diverges. A table rule ends the sequence at the horizon.
    pub fn ratio_tail(&self) -> Option<f64> {
        match (&self.lambda, &self.mu) {
            (Rule::Power { c: cl, p: pl }, Rule::Power { c: cm, p: pm }) => power_tail(
                cm.to_f64() / cl.to_f64(),
                *pm as i32 - *pl as i32,
                self.horizon + 1,
            ),
            _ => Some(0.0),
        }
    }

    /// Upper bound on `sum_{n >= m} mu_n` for `m > horizon`.
    pub fn mu_tail(&self, m: usize) -> Option<f64> {
        match &self.mu {
            Rule::Power { .. } => self.mu.tail_bound(m),
            Rule::Table { .. } => Some(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_values() {
        let s = ParameterSchedule::standard(10);
        assert_eq!(s.lambda(0).unwrap(), 1.0);
        assert_eq!(s.lambda(3).unwrap(), 0.25);
        assert_eq!(s.mu(1).unwrap(), 0.125);
        assert_eq!(s.mu(11), Err(Error::HorizonExceeded { n: 11, horizon: 10 }));
    }

    #[test]
    fn rejects_bad_schedules() {
        let short = ParameterSchedule::new(
            Rule::Table {
                values: vec![1.0, 0.5],
            },
            Rule::power(Rational::one(), 2),
            2,
        );
        assert!(matches!(short, Err(Error::InvalidSchedule(_))));
        let negative = ParameterSchedule::new(
            Rule::Table {
                values: vec![1.0, -0.5],
            },
            Rule::power(Rational::one(), 2),
            1,
        );
        assert!(negative.is_err());
        let tiny = ParameterSchedule::new(
            Rule::power(Rational::one(), 1),
            Rule::Table {
                values: vec![1.0, 1e-310],
            },
            1,
        );
        assert!(tiny.is_err());
    }

    #[test]
    fn tails_bound_partial_sums() {
        let s = ParameterSchedule::standard(1000);
        let tail = s.ratio_tail().unwrap();
        let direct: f64 = (1001..2_000_000)
            .map(|n| 1.0 / ((n + 1) as f64).powi(2))
            .sum();
        assert!(direct <= tail);
        assert!(
            s.mu_tail(5).unwrap()
                >= (5..100_000)
                    .map(|n| 1.0 / ((n + 1) as f64).powi(3))
                    .sum::<f64>()
        );
    }

    #[test]
    fn json_rules() {
        let r: Rule = serde_json::from_str(r#"{"rule":"power","c":1,"p":3}"#).unwrap();
        assert_eq!(r.value(1), Some(0.125));
        let r: Rule = serde_json::from_str(r#"{"rule":"table","values":[0.5,0.25]}"#).unwrap();
        assert_eq!(r.value(1), Some(0.25));
    }
}

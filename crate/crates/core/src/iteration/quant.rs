use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::ParameterSchedule;
use crate::error::{Error, Result};
use crate::moduli::{ModulusFn, Rational};
use crate::operators::{OperatorSpec, Vector};

/// `k` values on which `theta` and `xi` are spot-checked.
pub const SPOT_CHECK_K: u64 = 50;

/// Certified constants and moduli of a problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantitativeData {
    /// Bound on `sum mu_n / lambda_n`.
    #[serde(rename = "A")]
    pub a: Rational,
    /// Bound on `sup lambda_n` and on `mu_0`.
    #[serde(rename = "B")]
    pub b: u64,
    /// `mu_0 >= 2^-Bprime`.
    #[serde(rename = "Bprime")]
    pub b_prime: u32,
    /// Bound on `sup |mu_n - mu_m|` and `sup mu_n`, at least 1.
    #[serde(rename = "C")]
    pub c: Rational,
    /// Bound on the minimal-norm selection of `T` over `X_0`.
    #[serde(rename = "M")]
    pub m: u64,
    /// Bound on the diameter of the iterates; also the radius of `X_0`.
    #[serde(rename = "L")]
    pub l: Rational,
    pub d: usize,
    /// Rate of `lambda_n -> 0`.
    pub theta: ModulusFn,
    /// Cauchy rate of `sum mu_n`.
    pub xi: ModulusFn,
    /// Uniform continuity of `T` with respect to the excess predicate.
    pub varpi: ModulusFn,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varpi_hat: Option<ModulusFn>,
    /// Bound on `sum mu_n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_sum: Option<Rational>,
}

/// Relative slack for comparing float parameter values with rational bounds.
const REL: f64 = 1e-12;

impl QuantitativeData {
    /// Checks every field against the schedule and the operators.
    pub fn validate(
        &self,
        schedule: &ParameterSchedule,
        t: &OperatorSpec,
        s: &OperatorSpec,
        x0: &Vector,
    ) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidQuantitativeData(m));
        let h = schedule.horizon;
        if self.d != x0.dim() {
            return bad(format!("d = {} but x0 has dimension {}", self.d, x0.dim()));
        }
        if self.b == 0 || self.m == 0 {
            return bad("B and M must be positive".into());
        }
        if self.l.is_negative() {
            return bad("L must be nonnegative".into());
        }
        if self.a.is_negative() {
            return bad("A must be nonnegative".into());
        }
        for (name, f) in [
            ("theta", &self.theta),
            ("xi", &self.xi),
            ("varpi", &self.varpi),
        ]
        .into_iter()
        .chain(self.varpi_hat.iter().map(|f| ("varpi_hat", f)))
        {
            f.validate()?;
            if !f.is_monotone() {
                return bad(format!("{name} is not monotone"));
            }
        }

        let lambdas: Vec<f64> = (0..=h).map(|n| schedule.lambda(n)).collect::<Result<_>>()?;
        let mus: Vec<f64> = (0..=h).map(|n| schedule.mu(n)).collect::<Result<_>>()?;

        let ratio: f64 = lambdas.iter().zip(&mus).map(|(l, m)| m / l).sum();
        let Some(tail) = schedule.ratio_tail() else {
            return bad("sum of mu_n / lambda_n diverges for this schedule".into());
        };
        if ratio + tail > self.a.to_f64() {
            return bad(format!(
                "A = {} is below sum mu_n/lambda_n >= {}",
                self.a,
                ratio + tail
            ));
        }

        let sup_lambda = lambdas.iter().cloned().fold(0.0, f64::max);
        if sup_lambda > self.b as f64 * (1.0 + REL) || mus[0] > self.b as f64 * (1.0 + REL) {
            return bad(format!("B = {} is below sup lambda_n or mu_0", self.b));
        }
        if mus[0] < 2f64.powi(-(self.b_prime as i32)) {
            return bad(format!("mu_0 = {} is below 2^-{}", mus[0], self.b_prime));
        }
        let sup_mu = mus.iter().cloned().fold(0.0, f64::max);
        let inf_mu = mus.iter().cloned().fold(f64::INFINITY, f64::min);
        let c = self.c.to_f64();
        if c < 1.0 || sup_mu > c * (1.0 + REL) || sup_mu - inf_mu > c * (1.0 + REL) {
            return bad(format!(
                "C = {} must be >= 1, sup mu_n and diam(mu_n)",
                self.c
            ));
        }

        for k in 0..=SPOT_CHECK_K {
            let Some(start) = self.theta.eval_u64(k)?.to_usize() else {
                continue;
            };
            let target = 1.0 / (k + 1) as f64;
            if let Some(n) = (start..=h).find(|&n| lambdas[n] > target * (1.0 + REL)) {
                return bad(format!(
                    "theta({k}) = {start} but lambda_{n} = {} > 1/{}",
                    lambdas[n],
                    k + 1
                ));
            }
        }

        // suffix[n] = sum_{i >= n} mu_i over the horizon
        let mut suffix = vec![0.0; h + 2];
        for n in (0..=h).rev() {
            suffix[n] = suffix[n + 1] + mus[n];
        }
        let Some(mu_tail) = schedule.mu_tail(h + 1) else {
            return bad("sum of mu_n diverges for this schedule".into());
        };
        for k in 0..=SPOT_CHECK_K {
            let start = self.xi.eval_u64(k)?.to_usize().unwrap_or(usize::MAX);
            let rest = if start <= h {
                suffix[start] + mu_tail
            } else {
                schedule.mu_tail(start).unwrap_or(0.0)
            };
            if rest >= 1.0 / (k + 1) as f64 {
                return bad(format!(
                    "xi({k}) = {start} but the tail sum of mu is {rest} >= 1/{}",
                    k + 1
                ));
            }
        }
        if let Some(bound) = &self.mu_sum {
            if suffix[0] + mu_tail > bound.to_f64() {
                return bad(format!("mu_sum = {bound} is below sum mu_n"));
            }
        }

        self.spot_check_m(t, s, x0)
    }

    /// Sample points of `X_0 = B(x0; L) ∩ cl dom S`, including `x0 ± L e_i`.
    pub fn x0_samples(&self, s: &OperatorSpec, x0: &Vector) -> Vec<Vector> {
        let l = self.l.to_f64();
        let dom = s.domain();
        let d = x0.dim();
        let mut out = vec![x0.clone()];
        for i in 0..d {
            for t in [-1.0, -0.5, 0.5, 1.0] {
                let mut c = x0.coords().to_vec();
                c[i] += t * l;
                out.push(dom.project(&Vector::from_raw(c)));
            }
        }
        if d > 1 && d <= 4 {
            let r = l / (d as f64).sqrt();
            for mask in 0..(1u32 << d) {
                let c = (0..d)
                    .map(|i| x0.coords()[i] + if mask >> i & 1 == 1 { r } else { -r })
                    .collect();
                out.push(dom.project(&Vector::from_raw(c)));
            }
        }
        out
    }

    fn spot_check_m(&self, t: &OperatorSpec, s: &OperatorSpec, x0: &Vector) -> Result<()> {
        for x in self.x0_samples(s, x0) {
            let v = t.minimal_selection(&x)?.norm();
            if v > self.m as f64 + 1e-12 {
                return Err(Error::InvalidQuantitativeData(format!(
                    "M = {} but the minimal-norm selection of T at {x} has norm {v}",
                    self.m
                )));
            }
        }
        Ok(())
    }
}

//! Moudafi's iteration `x_{n+1} = J^S_{mu_n}(x_n + mu_n T_{lambda_n} x_n)` and
//! membership in the approximate solution sets `Gamma_k`.

mod quant;
mod schedule;
mod trace;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{hstar_check, OperatorSpec, ValueSet, Vector};

pub use quant::{QuantitativeData, SPOT_CHECK_K};
pub use schedule::{ParameterSchedule, Rule, MU_FLOOR};
pub use trace::{Trace, TraceRecord, INTEGRITY_TOL};

/// Additive slack on each `Gamma_k` clause.
pub const GAMMA_TOL: f64 = 1e-12;

/// Two operators, a start point, a schedule and the certified data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceParts", into = "InstanceParts")]
pub struct ProblemInstance {
    t: OperatorSpec,
    s: OperatorSpec,
    x0: Vector,
    schedule: ParameterSchedule,
    quant: QuantitativeData,
    known_solutions: Vec<Vector>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceParts {
    #[serde(rename = "T")]
    t: OperatorSpec,
    #[serde(rename = "S")]
    s: OperatorSpec,
    x0: Vector,
    schedule: ParameterSchedule,
    quant: QuantitativeData,
    #[serde(default)]
    known_solutions: Vec<Vector>,
}

impl TryFrom<InstanceParts> for ProblemInstance {
    type Error = Error;

    fn try_from(p: InstanceParts) -> Result<Self> {
        ProblemInstance::new(p.t, p.s, p.x0, p.schedule, p.quant, p.known_solutions)
    }
}

impl From<ProblemInstance> for InstanceParts {
    fn from(i: ProblemInstance) -> Self {
        InstanceParts {
            t: i.t,
            s: i.s,
            x0: i.x0,
            schedule: i.schedule,
            quant: i.quant,
            known_solutions: i.known_solutions,
        }
    }
}

impl ProblemInstance {
    pub fn new(
        t: OperatorSpec,
        s: OperatorSpec,
        x0: Vector,
        schedule: ParameterSchedule,
        quant: QuantitativeData,
        known_solutions: Vec<Vector>,
    ) -> Result<Self> {
        let d = t.dim();
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        x0.check_dim(d)?;
        if !s.domain().is_subset_of(&t.domain()) {
            return Err(Error::InvalidInstance(
                "dom S is not contained in dom T".into(),
            ));
        }
        if !s.domain().contains(&x0) {
            return Err(Error::Domain {
                operator: s.name(),
                detail: format!("start point {x0} is outside dom S"),
            });
        }
        for z in &known_solutions {
            z.check_dim(d)?;
        }
        schedule.validate()?;
        quant.validate(&schedule, &t, &s, &x0)?;
        Ok(ProblemInstance {
            t,
            s,
            x0,
            schedule,
            quant,
            known_solutions,
        })
    }

    pub fn t(&self) -> &OperatorSpec {
        &self.t
    }

    pub fn s(&self) -> &OperatorSpec {
        &self.s
    }

    pub fn x0(&self) -> &Vector {
        &self.x0
    }

    pub fn schedule(&self) -> &ParameterSchedule {
        &self.schedule
    }

    pub fn quant(&self) -> &QuantitativeData {
        &self.quant
    }

    pub fn known_solutions(&self) -> &[Vector] {
        &self.known_solutions
    }

    pub fn dim(&self) -> usize {
        self.t.dim()
    }

    /// Same problem with a different horizon; the data are revalidated.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self> {
        ProblemInstance::new(
            self.t.clone(),
            self.s.clone(),
            self.x0.clone(),
            self.schedule.with_horizon(horizon)?,
            self.quant.clone(),
            self.known_solutions.clone(),
        )
    }

    /// One step of the iteration from `x` at index `n`.
    pub fn step(&self, x: &Vector, n: usize) -> Result<Vector> {
        let lambda = self.schedule.lambda(n)?;
        let mu = self.schedule.mu(n)?;
        self.step_with(x, lambda, mu)
    }

    pub(crate) fn step_with(&self, x: &Vector, lambda: f64, mu: f64) -> Result<Vector> {
        x.check_dim(self.dim())?;
        if !self.s.domain().contains(x) {
            return Err(Error::Domain {
                operator: self.s.name(),
                detail: format!("{x} is outside dom S"),
            });
        }
        let y = self.t.yosida(lambda, x)?;
        self.s.resolvent(mu, &x.axpy(mu, &y))
    }

    /// Iterates `steps` times from `x0`.
    pub fn run(&self, steps: usize) -> Result<Trace> {
        if steps > self.schedule.horizon {
            return Err(Error::HorizonExceeded {
                n: steps,
                horizon: self.schedule.horizon,
            });
        }
        let mut points = Vec::with_capacity(steps + 1);
        let mut lambdas = Vec::with_capacity(steps);
        let mut mus = Vec::with_capacity(steps);
        let mut residuals = Vec::with_capacity(steps);
        points.push(self.x0.clone());
        for n in 0..steps {
            let lambda = self.schedule.lambda(n)?;
            let mu = self.schedule.mu(n)?;
            let next = self.step_with(&points[n], lambda, mu)?;
            residuals.push(points[n].dist(&next) / mu);
            lambdas.push(lambda);
            mus.push(mu);
            points.push(next);
        }
        Trace::from_parts(points, lambdas, mus, residuals)
    }

    /// `x ∈ X_0`: within `L` of `x0` and in `cl dom S`.
    pub fn check_in_x0(&self, x: &Vector) -> Result<()> {
        x.check_dim(self.dim())?;
        let l = self.quant.l.to_f64();
        if x.dist(&self.x0) > l + GAMMA_TOL {
            return Err(Error::Domain {
                operator: "X0",
                detail: format!("{x} is farther than L = {} from x0", self.quant.l),
            });
        }
        if !self.s.domain().contains(x) {
            return Err(Error::Domain {
                operator: self.s.name(),
                detail: format!("{x} is outside dom S"),
            });
        }
        Ok(())
    }

    /// Decides `x ∈ Gamma_k` with witness `y`.
    pub fn gamma_k_check(&self, x: &Vector, k: u64, y: &Vector) -> Result<bool> {
        self.check_in_x0(x)?;
        y.check_dim(self.dim())?;
        let tol = 1.0 / (k as f64 + 1.0) + GAMMA_TOL;
        let tx = self.t.evaluate(x)?;
        let t0 = tx.min_norm_element();
        if (y.norm() - t0.norm()).abs() > tol {
            return Ok(false);
        }
        if !hstar_check(&ValueSet::singleton(y), &tx, tol)? {
            return Ok(false);
        }
        let last = usize::try_from(k).map_err(|_| Error::IndexOverflow(k.to_string()))?;
        for i in 0..=last {
            let mu = self.schedule.mu(i)?;
            let j = self.s.resolvent(mu, &x.axpy(mu, y))?;
            if x.dist(&j) > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The canonical `Gamma_k` witness `T_lambda x`.
    pub fn gamma_witness(&self, x: &Vector, lambda: f64) -> Result<Vector> {
        self.t.yosida(lambda, x)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::moduli::{ModulusFn, Rational};

    pub(crate) fn dc_quant(m: u64, l: i64) -> QuantitativeData {
        QuantitativeData {
            a: Rational::integer(2),
            b: 1,
            b_prime: 0,
            c: Rational::one(),
            m,
            l: Rational::integer(l),
            d: 1,
            theta: ModulusFn::PowerRate {
                c: Rational::one(),
                p: 1,
            },
            xi: ModulusFn::affine(1, 1),
            varpi: ModulusFn::Identity,
            varpi_hat: Some(ModulusFn::Identity),
            mu_sum: None,
        }
    }

    pub(crate) fn dc_instance(x0: f64, horizon: usize) -> ProblemInstance {
        ProblemInstance::new(
            OperatorSpec::identity(1).unwrap(),
            OperatorSpec::subdiff_abs(1).unwrap(),
            Vector::scalar(x0).unwrap(),
            ParameterSchedule::standard(horizon),
            dc_quant(6, 4),
            vec![-1.0, 0.0, 1.0]
                .into_iter()
                .map(|v| Vector::scalar(v).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn v(x: f64) -> Vector {
        Vector::scalar(x).unwrap()
    }

    #[test]
    fn step_examples() {
        let inst = dc_instance(0.0, 10);
        assert_eq!(inst.step(&v(2.0), 0).unwrap(), v(2.0));
        assert_eq!(inst.step(&v(0.5), 0).unwrap(), v(0.0));
        assert_eq!(inst.step(&v(0.0), 0).unwrap(), v(0.0));
        assert!(matches!(
            inst.step(&v(0.0), 11),
            Err(Error::HorizonExceeded { .. })
        ));
    }

    #[test]
    fn run_examples() {
        let inst = dc_instance(0.0, 10);
        let tr = inst.run(0).unwrap();
        assert_eq!(tr.points().len(), 1);
        assert!(tr.residuals().is_empty());
        let tr = inst.run(10).unwrap();
        assert!(tr.points().iter().all(|p| p == &v(0.0)));
        assert!(tr.residuals().iter().all(|&r| r == 0.0));

        let inst = dc_instance(2.0, 100);
        let a = inst.run(100).unwrap();
        assert!(a.residuals()[50..].iter().all(|&r| r < 1.5));
        assert_eq!(a, inst.run(100).unwrap());
    }

    #[test]
    fn gamma_examples() {
        let inst = dc_instance(0.0, 10);
        for k in 0..5 {
            assert!(inst.gamma_k_check(&v(0.0), k, &v(0.0)).unwrap());
        }
        // every clause holds with equality at the boundary 1/(k+1) = 1
        assert!(inst.gamma_k_check(&v(2.0), 0, &v(1.0)).unwrap());
        assert!(!inst.gamma_k_check(&v(2.0), 1, &v(1.0)).unwrap());
        assert!(!inst.gamma_k_check(&v(2.0), 3, &v(0.0)).unwrap());
        assert!(matches!(
            inst.gamma_k_check(&v(9.0), 0, &v(0.0)),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn witness_examples() {
        let inst = dc_instance(0.0, 10);
        assert_eq!(inst.gamma_witness(&v(0.0), 1.0).unwrap(), v(0.0));
        assert_eq!(inst.gamma_witness(&v(2.0), 1.0).unwrap(), v(1.0));
        assert!((inst.gamma_witness(&v(2.0), 0.25).unwrap().coords()[0] - 1.6).abs() < 1e-15);
    }

    #[test]
    fn instance_rejects_wrong_m() {
        let r = ProblemInstance::new(
            OperatorSpec::identity(1).unwrap(),
            OperatorSpec::subdiff_abs(1).unwrap(),
            v(0.0),
            ParameterSchedule::standard(10),
            dc_quant(2, 4),
            vec![],
        );
        assert!(matches!(r, Err(Error::InvalidQuantitativeData(_))));
    }

    #[test]
    fn instance_rejects_bad_domains() {
        let unit = OperatorSpec::normal_cone_box(v(0.0), v(1.0)).unwrap();
        let r = ProblemInstance::new(
            unit.clone(),
            OperatorSpec::subdiff_abs(1).unwrap(),
            v(0.0),
            ParameterSchedule::standard(10),
            dc_quant(6, 4),
            vec![],
        );
        assert!(matches!(r, Err(Error::InvalidInstance(_))));
        let r = ProblemInstance::new(
            OperatorSpec::identity(1).unwrap(),
            unit,
            v(3.0),
            ParameterSchedule::standard(10),
            dc_quant(6, 4),
            vec![],
        );
        assert!(matches!(r, Err(Error::Domain { .. })));
    }
}

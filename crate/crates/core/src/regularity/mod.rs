//! Gap functionals, moduli of regularity and the Cauchy-modulus combinators
//! built on them.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{ProblemInstance, QuantitativeData};
use crate::moduli::{
    bounded_sub, ceil_natural, exp_upper, kappa, kappa_hat, nat_to_rat, phi_liminf, Cap, Modulus2,
    NaturalBound, Rational,
};
use crate::operators::Vector;

/// Largest grid the oracle will scan.
pub const MAX_GRID_POINTS: u64 = 50_000_000;
/// Safety factor applied to the grid minimum.
pub const ORACLE_SHRINK: f64 = 1e-6;

/// The three gap functionals whose zeros are the solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFunctional {
    /// `||x - J^S_{mu_0}(x + mu_0 T°x)||`
    F1,
    /// `D(T°x, Sx)`
    F2,
    /// `D(0, Tx - Sx)`
    FDiff,
}

pub fn eval_gap(inst: &ProblemInstance, f: GapFunctional, x: &Vector) -> Result<f64> {
    let tx = inst.t().evaluate(x)?;
    let sx = inst.s().evaluate(x)?;
    match f {
        GapFunctional::F1 => {
            let mu0 = inst.schedule().mu(0)?;
            let t0 = tx.min_norm_element();
            Ok(x.dist(&inst.s().resolvent(mu0, &x.axpy(mu0, &t0))?))
        }
        GapFunctional::F2 => sx.dist(&tx.min_norm_element()),
        GapFunctional::FDiff => tx.minus(&sx)?.dist(&Vector::zeros(x.dim())),
    }
}

/// Distance from `x` to a finite set.
pub fn dist_to_set(x: &Vector, set: &[Vector]) -> f64 {
    set.iter().map(|z| x.dist(z)).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityEntry {
    pub eps: Rational,
    pub phi: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularityRule {
    /// `phi(eps) = c * eps`
    Linear { c: Rational },
    /// Values at the tabulated `eps`; a query uses the largest entry not above it.
    Table { entries: Vec<RegularityEntry> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    GridOracle,
}

/// `phi` with `|F(x)| < phi(eps) => D(x, zer F) < eps` on `B(center; radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityModulus {
    pub phi: RegularityRule,
    pub center: Vector,
    pub radius: Rational,
    pub provenance: Provenance,
}

impl RegularityModulus {
    pub fn analytic_linear(c: Rational, center: Vector, radius: Rational) -> Self {
        RegularityModulus {
            phi: RegularityRule::Linear { c },
            center,
            radius,
            provenance: Provenance::Analytic,
        }
    }

    pub fn eval(&self, eps: &Rational) -> Result<Rational> {
        if !eps.is_positive() {
            return Err(Error::InvalidRational(format!(
                "eps = {eps} must be positive"
            )));
        }
        match &self.phi {
            RegularityRule::Linear { c } => Ok(c.mul(eps)),
            RegularityRule::Table { entries } => entries
                .iter()
                .filter(|e| e.eps <= *eps)
                .max_by(|a, b| a.eps.cmp(&b.eps))
                .map(|e| e.phi.clone())
                .ok_or_else(|| Error::TableRange {
                    index: eps.to_string(),
                    range: format!(
                        "eps >= {}",
                        entries
                            .iter()
                            .map(|e| &e.eps)
                            .min()
                            .map_or("-".into(), |e| e.to_string())
                    ),
                }),
        }
    }
}

/// Uniform grid over the cube around `center`, restricted to the closed ball
/// and to `dom S`. `half` points lie on each side of the centre per axis.
fn ball_grid<'a>(
    inst: &'a ProblemInstance,
    center: &Vector,
    radius: f64,
    half: u64,
) -> Result<(u64, impl Fn(u64) -> Option<Vector> + Sync + 'a)> {
    let d = center.dim() as u32;
    let per_axis = 2 * half + 1;
    let total = per_axis
        .checked_pow(d)
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::InvalidInstance(format!("grid of {per_axis}^{d} points is too large"))
        })?;
    let pitch = radius / half as f64;
    let c = center.clone();
    let dom = inst.s().domain();
    let point = move |idx: u64| {
        let mut rem = idx;
        let coords: Vec<f64> = c
            .coords()
            .iter()
            .map(|&ci| {
                let j = (rem % per_axis) as f64 - half as f64;
                rem /= per_axis;
                ci + j * pitch
            })
            .collect();
        let x = Vector::from_raw(coords);
        (x.dist(&c) <= radius && dom.contains(&x)).then_some(x)
    };
    Ok((total, point))
}

/// Tabulates `phi(eps) = (1 - 1e-6) min { |F(x)| : D(x, zeros) >= eps }` over
/// a grid of pitch at most `eps/100` in `B(z; r)`.
pub fn grid_regularity_oracle(
    inst: &ProblemInstance,
    f: GapFunctional,
    zeros: &[Vector],
    z: &Vector,
    r: &Rational,
    eps_list: &[Rational],
) -> Result<RegularityModulus> {
    if !r.is_positive() {
        return Err(Error::NonPositiveParameter {
            name: "r",
            value: r.to_f64(),
        });
    }
    z.check_dim(inst.dim())?;
    let radius = r.to_f64();
    let mut entries = Vec::with_capacity(eps_list.len());
    for eps in eps_list {
        let e = eps.to_f64();
        if !(e > 0.0) {
            return Err(Error::NonPositiveParameter {
                name: "eps",
                value: e,
            });
        }
        // dyadic pitch r / 2^m keeps grid coordinates exact for dyadic data
        let mut half: u64 = 1;
        while radius / half as f64 > e / 100.0 {
            half *= 2;
        }
        let (total, point) = ball_grid(inst, z, radius, half)?;
        let best = (0..total)
            .into_par_iter()
            .filter_map(point)
            .filter(|x| dist_to_set(x, zeros) >= e)
            .map(|x| eval_gap(inst, f, &x).map(f64::abs))
            .try_reduce_with(|a, b| Ok(a.min(b)));
        let min = match best {
            None => return Err(Error::EmptyGrid { eps: e }),
            Some(v) => v?,
        };
        if min <= 0.0 {
            return Err(Error::ZeroInfimum { eps: e });
        }
        entries.push(RegularityEntry {
            eps: eps.clone(),
            phi: Rational::from_f64(min * (1.0 - ORACLE_SHRINK))?,
        });
    }
    Ok(RegularityModulus {
        phi: RegularityRule::Table { entries },
        center: z.clone(),
        radius: r.clone(),
        provenance: Provenance::GridOracle,
    })
}

/// Outcome of checking a regularity modulus on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub checked: u64,
    pub violations: u64,
    /// A grid point where the defining implication fails, if any.
    pub example: Option<Vec<f64>>,
}

/// Checks the defining implication of `phi` on a grid with `points_per_axis`
/// points per axis over its declared ball.
pub fn validate_regularity(
    inst: &ProblemInstance,
    f: GapFunctional,
    phi: &RegularityModulus,
    zeros: &[Vector],
    points_per_axis: u64,
) -> Result<RegularityReport> {
    let half = (points_per_axis.max(3) - 1) / 2;
    let (total, point) = ball_grid(inst, &phi.center, phi.radius.to_f64(), half)?;
    let table: Vec<(f64, f64)> = match &phi.phi {
        RegularityRule::Linear { .. } => vec![],
        RegularityRule::Table { entries } => entries
            .iter()
            .map(|e| (e.eps.to_f64(), e.phi.to_f64()))
            .collect(),
    };
    let linear = match &phi.phi {
        RegularityRule::Linear { c } => Some(c.to_f64()),
        RegularityRule::Table { .. } => None,
    };
    let results: Vec<(bool, Option<Vec<f64>>)> = (0..total)
        .into_par_iter()
        .filter_map(point)
        .map(|x| {
            let fx = eval_gap(inst, f, &x)?.abs();
            let dx = dist_to_set(&x, zeros);
            let ok = match linear {
                // |F| < c eps => D < eps for every eps  <=>  c D <= |F|
                Some(c) => c * dx <= fx + 1e-12,
                None => table.iter().all(|&(eps, p)| !(fx < p) || dx < eps),
            };
            Ok((ok, (!ok).then(|| x.into_inner())))
        })
        .collect::<Result<_>>()?;
    Ok(RegularityReport {
        checked: results.len() as u64,
        violations: results.iter().filter(|r| !r.0).count() as u64,
        example: results.into_iter().find_map(|r| r.1),
    })
}

/// Promotes a candidate to grid-oracle provenance after a clean validation.
pub fn grid_validated(
    inst: &ProblemInstance,
    f: GapFunctional,
    candidate: RegularityModulus,
    zeros: &[Vector],
    points_per_axis: u64,
) -> Result<(RegularityModulus, RegularityReport)> {
    let report = validate_regularity(inst, f, &candidate, zeros, points_per_axis)?;
    if report.violations > 0 {
        return Err(Error::InvalidQuantitativeData(format!(
            "regularity modulus fails at {} of {} grid points",
            report.violations, report.checked
        )));
    }
    Ok((
        RegularityModulus {
            provenance: Provenance::GridOracle,
            ..candidate
        },
        report,
    ))
}

pub type EpsMap = Box<dyn Fn(&Rational) -> Rational + Send + Sync>;
pub type ApproachBound = Box<dyn Fn(&Rational, &BigUint) -> BigUint + Send + Sync>;

/// Moduli for quasi-(G, H)-Fejér monotone sequences.
pub struct GHModuli {
    pub alpha_g: EpsMap,
    pub beta_h: EpsMap,
    /// The value `beta'_H(b + e)`, the radius on which regularity is needed.
    pub beta_h_prime_at: Rational,
    /// Bound on `G(d(x_0, z))`.
    pub b: Rational,
    /// Bound on `sum eps_n`.
    pub e: Rational,
    /// Approach bound `tau(delta, n)`.
    pub tau: ApproachBound,
    /// Cauchy rate for the error terms at real precision.
    pub xi: Box<dyn Fn(&Rational) -> BigUint + Send + Sync>,
}

/// `theta(delta) = tau(phi(alpha_G(beta_H(delta/2)/2)), xi(beta_H(delta/2)/2))`
pub fn theta_generic(
    delta: &Rational,
    gh: &GHModuli,
    phi: &RegularityModulus,
) -> Result<NaturalBound> {
    if !delta.is_positive() {
        return Err(Error::InvalidRational(format!(
            "delta = {delta} must be positive"
        )));
    }
    if phi.radius < gh.beta_h_prime_at {
        return Err(Error::InvalidInstance(format!(
            "regularity radius {} is below beta'_H(b + e) = {}",
            phi.radius, gh.beta_h_prime_at
        )));
    }
    let two = Rational::integer(2);
    let inner = (gh.beta_h)(&delta.div(&two)?).div(&two)?;
    let p = phi.eval(&(gh.alpha_g)(&inner))?;
    Ok(NaturalBound::Finite((gh.tau)(&p, &(gh.xi)(&inner))))
}

/// `xi~(eps) = xi(ceil((2M+1) e^A (ceil(1/eps) + 1)) - 1)`
pub fn xi_tilde_eps(eps: &Rational, q: &QuantitativeData) -> Result<BigUint> {
    let ea = exp_upper(&q.a)?;
    let n = eps.recip()?.ceil_natural();
    let scaled = nat_to_rat(&(BigUint::from(2 * q.m + 1) * (n + 1u32))) * ea.value();
    q.xi.eval(&bounded_sub(&ceil_natural(&scaled), &BigUint::one()))
}

/// Cauchy modulus of the iteration under a regularity modulus.
pub fn theta_moudafi(
    eps: &Rational,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    phi_reg: &RegularityModulus,
    use_kappa_hat: bool,
    cap: &Cap,
) -> Result<NaturalBound> {
    if !eps.is_positive() {
        return Err(Error::InvalidRational(format!(
            "eps = {eps} must be positive"
        )));
    }
    let ea = exp_upper(&q.a)?;
    let scaled = Rational::from_big(eps.inner() / (ea.value() * nat_to_rat(&BigUint::from(4u32))));
    let p = phi_reg.eval(&scaled)?;
    let k = p.recip()?.ceil_natural();
    let kk = if use_kappa_hat {
        let vh = q
            .varpi_hat
            .as_ref()
            .ok_or(Error::MissingModulus("varpi_hat"))?;
        kappa_hat(&k, q.m, q.b, q.b_prime, vh)?
    } else {
        kappa(&k, q.m, q.b)
    };
    if cap.check(kk.clone()).is_overflow() {
        return Ok(NaturalBound::Overflow);
    }
    let xi = xi_tilde_eps(&eps.div(&Rational::integer(4))?, q)?;
    phi_liminf(&kk, &xi, q, phi_search, cap)
}

/// Radius `e^A ||x0 - z|| + sum mu_n` on which the regularity modulus is needed.
pub fn moudafi_ball_radius(inst: &ProblemInstance, z: &Vector) -> Result<f64> {
    let q = inst.quant();
    let d = q.mu_sum.as_ref().ok_or(Error::MissingModulus("mu_sum"))?;
    Ok(exp_upper(&q.a)?.to_f64() * inst.x0().dist(z) + d.to_f64())
}

/// Checks that `phi_reg` is declared on a ball large enough for `inst`.
pub fn check_ball_precondition(inst: &ProblemInstance, phi_reg: &RegularityModulus) -> Result<()> {
    let need = moudafi_ball_radius(inst, &phi_reg.center)?;
    if phi_reg.radius.to_f64() < need {
        return Err(Error::InvalidInstance(format!(
            "regularity radius {} is below the required {need}",
            phi_reg.radius
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::tests::dc_instance;
    use crate::moduli::ModulusFn;

    fn v(x: f64) -> Vector {
        Vector::scalar(x).unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn gap_examples() {
        let inst = dc_instance(0.0, 10);
        assert_eq!(eval_gap(&inst, GapFunctional::F1, &v(2.0)).unwrap(), 1.0);
        assert_eq!(eval_gap(&inst, GapFunctional::F2, &v(0.0)).unwrap(), 0.0);
        assert_eq!(eval_gap(&inst, GapFunctional::FDiff, &v(2.0)).unwrap(), 1.0);
    }

    fn synthetic() -> GHModuli {
        GHModuli {
            alpha_g: Box::new(|e| e.clone()),
            beta_h: Box::new(|e| e.clone()),
            beta_h_prime_at: Rational::one(),
            b: Rational::one(),
            e: Rational::zero(),
            tau: Box::new(|d, n| {
                // max(n, ceil(log2(1/d)))
                let inv = d.recip().unwrap().ceil_natural();
                let log = BigUint::from((inv - 1u32).bits());
                log.max(n.clone())
            }),
            xi: Box::new(|_| BigUint::from(0u32)),
        }
    }

    #[test]
    fn theta_generic_examples() {
        let phi = RegularityModulus::analytic_linear(Rational::one(), v(0.0), Rational::one());
        let gh = synthetic();
        assert_eq!(
            theta_generic(&r("1/2"), &gh, &phi).unwrap(),
            NaturalBound::from_u64(3)
        );
        assert_eq!(
            theta_generic(&r("1/8"), &gh, &phi).unwrap(),
            NaturalBound::from_u64(5)
        );
        let gh7 = GHModuli {
            xi: Box::new(|_| BigUint::from(7u32)),
            ..synthetic()
        };
        assert_eq!(
            theta_generic(&r("1/2"), &gh7, &phi).unwrap(),
            NaturalBound::from_u64(7)
        );
        let small = RegularityModulus::analytic_linear(Rational::one(), v(0.0), r("1/2"));
        assert!(theta_generic(&r("1/2"), &gh, &small).is_err());
    }

    pub(crate) fn stub_q() -> QuantitativeData {
        QuantitativeData {
            a: Rational::zero(),
            b: 1,
            b_prime: 0,
            c: Rational::one(),
            m: 1,
            l: Rational::zero(),
            d: 1,
            theta: ModulusFn::Constant { c: 0 },
            xi: ModulusFn::Identity,
            varpi: ModulusFn::Identity,
            varpi_hat: None,
            mu_sum: None,
        }
    }

    #[test]
    fn theta_moudafi_examples() {
        let cap = Cap::default();
        let q = stub_q();
        let phi = Modulus2::Affine { ck: 1, cn: 1, c: 0 };
        let reg = RegularityModulus::analytic_linear(Rational::one(), v(0.0), Rational::integer(4));
        let th = |e: &str| theta_moudafi(&r(e), &q, &phi, &reg, false, &cap).unwrap();
        assert_eq!(th("1"), NaturalBound::from_u64(5789));
        assert_eq!(th("4"), NaturalBound::from_u64(788));
        assert!(th("4") <= th("1") && th("1") <= th("1/4"));
        assert_eq!(
            theta_moudafi(&r("1"), &q, &phi, &reg, true, &cap),
            Err(Error::MissingModulus("varpi_hat"))
        );
    }

    #[test]
    fn oracle_examples() {
        let inst = dc_instance(0.0, 10);
        let zeros: Vec<Vector> = [-1.0, 0.0, 1.0].map(v).to_vec();
        let m = grid_regularity_oracle(
            &inst,
            GapFunctional::FDiff,
            &zeros,
            &v(0.0),
            &Rational::integer(4),
            &[r("1/4"), r("2")],
        )
        .unwrap();
        let p2 = m.eval(&r("2")).unwrap().to_f64();
        assert!((p2 - 2.0 * (1.0 - 1e-6)).abs() < 1e-12, "{p2}");
        assert!(m.eval(&r("1/4")).unwrap().is_positive());
        assert_eq!(m.eval(&r("1")).unwrap(), m.eval(&r("1/4")).unwrap());
        assert!(m.eval(&r("1/8")).is_err());
        let report = validate_regularity(&inst, GapFunctional::FDiff, &m, &zeros, 80_001).unwrap();
        assert_eq!(report.violations, 0);
    }

    #[test]
    fn oracle_degenerate_cases() {
        let inst = dc_instance(0.0, 10);
        let everywhere: Vec<Vector> = (-40..=40).map(|i| v(i as f64 / 10.0)).collect();
        let e = grid_regularity_oracle(
            &inst,
            GapFunctional::FDiff,
            &everywhere,
            &v(0.0),
            &Rational::integer(4),
            &[r("1/4")],
        );
        assert!(matches!(e, Err(Error::EmptyGrid { .. })));
        // zeros chosen away from the true solutions: F vanishes inside the region
        let wrong = [v(-3.0), v(3.0)];
        let e = grid_regularity_oracle(
            &inst,
            GapFunctional::FDiff,
            &wrong,
            &v(0.0),
            &Rational::integer(4),
            &[r("1/4")],
        );
        assert!(matches!(e, Err(Error::ZeroInfimum { .. })));
    }

    #[test]
    fn linear_modulus_validates_for_fdiff() {
        let inst = dc_instance(0.0, 10);
        let zeros: Vec<Vector> = [-1.0, 0.0, 1.0].map(v).to_vec();
        let cand =
            RegularityModulus::analytic_linear(Rational::one(), v(0.0), Rational::integer(4));
        let (m, rep) = grid_validated(&inst, GapFunctional::FDiff, cand, &zeros, 10_001).unwrap();
        assert_eq!(m.provenance, Provenance::GridOracle);
        assert_eq!(rep.checked, 10_001);
        let too_big =
            RegularityModulus::analytic_linear(Rational::integer(3), v(0.0), Rational::integer(4));
        assert!(grid_validated(&inst, GapFunctional::FDiff, too_big, &zeros, 10_001).is_err());
    }
}

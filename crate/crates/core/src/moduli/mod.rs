//! Exact evaluation of the quantitative moduli over big integers.
//!
//! Transcendental constants enter only through certified rational upper
//! bounds ([`exp_upper`], [`sqrt_upper`]); every formula below is monotone in
//! them, so each result is a valid bound.

mod bound;
mod modulus;
mod rational;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::iteration::QuantitativeData;

pub use bound::{Cap, NaturalBound, DEFAULT_CAP_DIGITS};
pub use modulus::{Counterfunction, Modulus2, ModulusFn};
pub use rational::{
    exp_upper, exp_upper_digits, sqrt_upper, sqrt_upper_digits, Rational, RationalUpper, UpperOf,
    UPPER_DIGITS,
};

pub(crate) use rational::{ceil_mul, ceil_natural, div_ceil, nat_to_rat};

/// Longest `Psi_0` recursion evaluated before giving up.
pub const MAX_PSI_STEPS: u64 = 1_000_000;

fn nat(v: u64) -> BigUint {
    BigUint::from(v)
}

/// `n ∸ m = max(0, n - m)`
pub fn bounded_sub(n: &BigUint, m: &BigUint) -> BigUint {
    if n > m {
        n - m
    } else {
        BigUint::zero()
    }
}

fn require_exp(ea: &RationalUpper) -> Result<()> {
    if !ea.is_exp() {
        return Err(Error::Invariant("expected an upper bound of e^A".into()));
    }
    Ok(())
}

/// `chi(r, n, m) = max(n + m ∸ 1, ceil((r+1) m e^A))`
pub fn chi(
    r: &BigUint,
    n: &BigUint,
    m: &BigUint,
    ea: &RationalUpper,
    cap: &Cap,
) -> Result<NaturalBound> {
    require_exp(ea)?;
    Ok(cap.check(chi_raw(r, n, m, ea)))
}

fn chi_raw(r: &BigUint, n: &BigUint, m: &BigUint, ea: &RationalUpper) -> BigUint {
    let left = bounded_sub(&(n + m), &BigUint::one());
    let right = ceil_mul(&((r + 1u32) * m), ea.value());
    left.max(right)
}

/// `delta(k) = 2k + 1`
pub fn delta(k: &BigUint) -> BigUint {
    k * 2u32 + 1u32
}

/// `omega(k) = max(4k + 3, varpi(4M(k+1)^2 - 1))`
pub fn omega(k: &BigUint, m: u64, varpi: &ModulusFn) -> Result<BigUint> {
    let arg = nat(4 * m) * (k + 1u32) * (k + 1u32) - 1u32;
    Ok((k * 4u32 + 3u32).max(varpi.eval(&arg)?))
}

/// `omega` with the additional branch `varpi(2k + 1)`, as used for `k_0`.
pub fn omega_full(k: &BigUint, m: u64, varpi: &ModulusFn) -> Result<BigUint> {
    Ok(omega(k, m, varpi)?.max(varpi.eval(&delta(k))?))
}

/// `varpi'(k) = varpi(B k^2 + 2 B k + B - 1)`
pub fn varpi_prime(k: &BigUint, b: u64, varpi: &ModulusFn) -> Result<BigUint> {
    let b = nat(b);
    let arg = &b * k * k + &b * k * 2u32 + &b - 1u32;
    varpi.eval(&arg)
}

/// `Phi(k, n) = phi(ceil(2C(k+1)) - 1, max(theta(M varpi(k) + M - 1), n))`
pub fn phi_liminf(
    k: &BigUint,
    n: &BigUint,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
) -> Result<NaturalBound> {
    let first = bounded_sub(
        &ceil_mul(&((k + 1u32) * 2u32), q.c.inner()),
        &BigUint::one(),
    );
    let m = nat(q.m);
    let inner = &m * q.varpi.eval(k)? + &m - 1u32;
    let second = q.theta.eval(&inner)?.max(n.clone());
    Ok(cap.check(phi_search.eval(&first, &second)?))
}

/// `xi~(n) = xi(ceil((2M+1) e^A (n+1)) - 1)`
pub fn xi_tilde(n: &BigUint, m: u64, ea: &RationalUpper, xi: &ModulusFn) -> Result<BigUint> {
    require_exp(ea)?;
    xi.eval(&bounded_sub(
        &ceil_mul(&(nat(2 * m + 1) * (n + 1u32)), ea.value()),
        &BigUint::one(),
    ))
}

/// `P = ceil(2 ceil(8 e^A (k+1)) sqrt(d) L)^d + 1`
pub fn total_boundedness_p(
    k: &BigUint,
    ea: &RationalUpper,
    sqrtd: &RationalUpper,
    l: &Rational,
    d: u64,
    cap: &Cap,
) -> Result<NaturalBound> {
    require_exp(ea)?;
    if sqrtd.of() != &UpperOf::Sqrt(d) {
        return Err(Error::Invariant(format!(
            "expected an upper bound of sqrt({d})"
        )));
    }
    if l.is_negative() {
        return Err(Error::InvalidQuantitativeData(
            "L must be nonnegative".into(),
        ));
    }
    let inner =
        ceil_natural(&(nat_to_rat(&(k + 1u32)) * BigRational::from_integer(8.into()) * ea.value()));
    let base = ceil_natural(&(nat_to_rat(&(inner * 2u32)) * sqrtd.value() * l.inner()));
    cap.pow(&base, d).and_then(|v| Ok(cap.check(v + 1u32)))
}

/// Intermediate values of a `Psi` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiEvaluation {
    /// Precision at which the recursion ran (`k`, or `k_0` for `Psi'`).
    pub precision: BigUint,
    /// Recursion length `P`.
    pub p: NaturalBound,
    /// `Psi_0(P)`.
    pub value: NaturalBound,
    /// Recursion steps actually evaluated before a fixed point or the end.
    pub steps: u64,
}

/// Modified `chi` used by `Psi'`: `max(floor, chi)`.
#[derive(Debug, Clone, Copy)]
enum ChiVariant<'a> {
    Plain,
    Floored(&'a BigUint),
}

/// `chi_g^M(n, k) = max_{i <= n} chi(i, g(i), k)`.
fn chi_g_max(
    n: &BigUint,
    k: &BigUint,
    g: &Counterfunction,
    ea: &RationalUpper,
    variant: ChiVariant<'_>,
) -> Result<BigUint> {
    let single = |i: &BigUint| -> Result<BigUint> {
        let v = chi_raw(i, &g.eval(i)?, k, ea);
        Ok(match variant {
            ChiVariant::Plain => v,
            ChiVariant::Floored(f) => v.max(f.clone()),
        })
    };
    if g.g.range_end().is_none() {
        // closed-form g is nondecreasing, so chi_g is too
        return single(n);
    }
    let last = n
        .to_u64()
        .ok_or_else(|| Error::IndexOverflow(n.to_string()))?;
    let mut best = BigUint::zero();
    for i in 0..=last {
        best = best.max(single(&nat(i))?);
    }
    Ok(best)
}

fn psi_recursion(
    kk: &BigUint,
    count: NaturalBound,
    g: &Counterfunction,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
    variant: ChiVariant<'_>,
) -> Result<PsiEvaluation> {
    let ea = exp_upper(&q.a)?;
    let mut out = PsiEvaluation {
        precision: kk.clone(),
        p: count.clone(),
        value: NaturalBound::Overflow,
        steps: 0,
    };
    let Some(total) = count.finite().cloned() else {
        return Ok(out);
    };
    let m = kk * 8u32 + 7u32;
    let xi = xi_tilde(&m, q.m, &ea, &q.xi)?;
    let mut cur = BigUint::zero();
    let mut i = BigUint::zero();
    while i < total {
        if out.steps >= MAX_PSI_STEPS {
            return Err(Error::IndexOverflow(format!(
                "Psi recursion of length {total} exceeds {MAX_PSI_STEPS} steps"
            )));
        }
        let chi_m = chi_g_max(&cur, &m, g, &ea, variant)?;
        if cap.check(chi_m.clone()).is_overflow() {
            return Ok(out);
        }
        let next = match phi_liminf(&chi_m, &xi, q, phi_search, cap)? {
            NaturalBound::Finite(v) => v,
            NaturalBound::Overflow => return Ok(out),
        };
        out.steps += 1;
        if next < cur {
            return Err(Error::Invariant(format!(
                "Psi_0 decreased from {cur} to {next} at step {i}"
            )));
        }
        if next == cur {
            // fixed point: every later term is the same
            break;
        }
        cur = next;
        i += 1u32;
    }
    out.value = NaturalBound::Finite(cur);
    Ok(out)
}

/// `Psi_0` iterated `count` times; `psi` with `P` replaced by `count`.
pub fn psi_with_count(
    k: &BigUint,
    count: NaturalBound,
    g: &Counterfunction,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
) -> Result<NaturalBound> {
    Ok(psi_recursion(k, count, g, q, phi_search, cap, ChiVariant::Plain)?.value)
}

fn p_of(k: &BigUint, q: &QuantitativeData, cap: &Cap) -> Result<NaturalBound> {
    let d = q.d as u64;
    total_boundedness_p(k, &exp_upper(&q.a)?, &sqrt_upper(d)?, &q.l, d, cap)
}

/// Rate of metastability `Psi(k, g)`.
pub fn psi(
    k: &BigUint,
    g: &Counterfunction,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
) -> Result<NaturalBound> {
    Ok(psi_detailed(k, g, q, phi_search, cap)?.value)
}

pub fn psi_detailed(
    k: &BigUint,
    g: &Counterfunction,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
) -> Result<PsiEvaluation> {
    let count = p_of(k, q, cap)?;
    psi_recursion(k, count, g, q, phi_search, cap, ChiVariant::Plain)
}

/// `k_0 = max(k, ceil((omega(k) - 1) / 2))` with the full `omega`.
pub fn k_zero(k: &BigUint, q: &QuantitativeData) -> Result<BigUint> {
    let w = omega_full(k, q.m, &q.varpi)?;
    let half = div_ceil(&bounded_sub(&w, &BigUint::one()), &nat(2));
    Ok(k.clone().max(half))
}

/// `Psi'(k, g)`: `Psi` at precision `k_0` with `chi` floored by `delta(k)`.
pub fn psi_prime(
    k: &BigUint,
    g: &Counterfunction,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
) -> Result<NaturalBound> {
    Ok(psi_prime_detailed(k, g, q, phi_search, cap)?.value)
}

pub fn psi_prime_detailed(
    k: &BigUint,
    g: &Counterfunction,
    q: &QuantitativeData,
    phi_search: &Modulus2,
    cap: &Cap,
) -> Result<PsiEvaluation> {
    let k0 = k_zero(k, q)?;
    let floor = delta(k);
    let count = p_of(&k0, q, cap)?;
    psi_recursion(
        &k0,
        count,
        g,
        q,
        phi_search,
        cap,
        ChiVariant::Floored(&floor),
    )
}

/// `kappa(k) = 4(M+1)(B(4k+4) - 1)^2 - 1`
pub fn kappa(k: &BigUint, m: u64, b: u64) -> BigUint {
    let inner = nat(b) * (k * 4u32 + 4u32) - 1u32;
    nat(4 * (m + 1)) * &inner * &inner - 1u32
}

/// `kappa^(k) = kappa(max(varpi^(2k+1), 2^(B'+1)(k+1) ∸ 1))`
pub fn kappa_hat(
    k: &BigUint,
    m: u64,
    b: u64,
    b_prime: u32,
    varpi_hat: &ModulusFn,
) -> Result<BigUint> {
    let pow = BigUint::one() << (b_prime as usize + 1);
    let branch = bounded_sub(&(pow * (k + 1u32)), &BigUint::one());
    Ok(kappa(&varpi_hat.eval(&delta(k))?.max(branch), m, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> BigUint {
        nat(v)
    }

    fn e(a: i64) -> RationalUpper {
        exp_upper(&Rational::integer(a)).unwrap()
    }

    pub(crate) fn stub_quant() -> QuantitativeData {
        QuantitativeData {
            a: Rational::zero(),
            b: 1,
            b_prime: 0,
            c: Rational::one(),
            m: 1,
            l: Rational::zero(),
            d: 1,
            theta: ModulusFn::Constant { c: 0 },
            xi: ModulusFn::Constant { c: 0 },
            varpi: ModulusFn::Identity,
            varpi_hat: Some(ModulusFn::Identity),
            mu_sum: None,
        }
    }

    #[test]
    fn bounded_sub_examples() {
        assert_eq!(bounded_sub(&n(5), &n(3)), n(2));
        assert_eq!(bounded_sub(&n(3), &n(5)), n(0));
        assert_eq!(bounded_sub(&n(0), &n(0)), n(0));
    }

    #[test]
    fn chi_examples() {
        let cap = Cap::default();
        let fin = NaturalBound::from_u64;
        assert_eq!(chi(&n(0), &n(0), &n(0), &e(0), &cap).unwrap(), fin(0));
        assert_eq!(chi(&n(1), &n(2), &n(3), &e(0), &cap).unwrap(), fin(6));
        assert_eq!(chi(&n(0), &n(0), &n(1), &e(1), &cap).unwrap(), fin(3));
        assert!(chi(&n(0), &n(0), &n(1), &sqrt_upper(2).unwrap(), &cap).is_err());
    }

    #[test]
    fn delta_omega_examples() {
        assert_eq!(delta(&n(0)), n(1));
        assert_eq!(omega(&n(0), 1, &ModulusFn::Identity).unwrap(), n(3));
        assert_eq!(omega(&n(1), 2, &ModulusFn::Identity).unwrap(), n(31));
    }

    #[test]
    fn varpi_prime_examples() {
        assert_eq!(varpi_prime(&n(1), 1, &ModulusFn::Identity).unwrap(), n(3));
        assert_eq!(varpi_prime(&n(0), 1, &ModulusFn::Identity).unwrap(), n(0));
        // 3*4 + 2*3*2 + 3 - 1 = 26, doubled
        assert_eq!(
            varpi_prime(&n(2), 3, &ModulusFn::affine(2, 0)).unwrap(),
            n(52)
        );
    }

    #[test]
    fn phi_liminf_examples() {
        let cap = Cap::default();
        let mut q = stub_quant();
        q.theta = ModulusFn::affine(1, 1);
        let phi = Modulus2::Affine { ck: 1, cn: 1, c: 1 };
        let fin = NaturalBound::from_u64;
        assert_eq!(phi_liminf(&n(0), &n(0), &q, &phi, &cap).unwrap(), fin(3));
        assert_eq!(phi_liminf(&n(0), &n(5), &q, &phi, &cap).unwrap(), fin(7));
        q.c = Rational::integer(2);
        assert_eq!(phi_liminf(&n(1), &n(0), &q, &phi, &cap).unwrap(), fin(10));
    }

    #[test]
    fn xi_tilde_examples() {
        let id = ModulusFn::Identity;
        assert_eq!(xi_tilde(&n(0), 1, &e(0), &id).unwrap(), n(2));
        assert_eq!(xi_tilde(&n(7), 1, &e(0), &id).unwrap(), n(23));
        assert_eq!(xi_tilde(&n(0), 1, &e(2), &id).unwrap(), n(22));
    }

    #[test]
    fn p_examples() {
        let cap = Cap::default();
        let fin = NaturalBound::from_u64;
        let p = |k, a, d, l| {
            total_boundedness_p(
                &n(k),
                &e(a),
                &sqrt_upper(d).unwrap(),
                &Rational::integer(l),
                d,
                &cap,
            )
            .unwrap()
        };
        assert_eq!(p(0, 2, 1, 4), fin(481));
        assert_eq!(p(0, 0, 1, 0), fin(1));
        assert_eq!(p(1, 0, 2, 1), fin(2117));
        assert!(total_boundedness_p(
            &n(0),
            &e(2),
            &sqrt_upper(1).unwrap(),
            &Rational::integer(4),
            20_000,
            &cap
        )
        .is_err());
        let huge = total_boundedness_p(
            &n(0),
            &e(2),
            &sqrt_upper(5000).unwrap(),
            &Rational::integer(4),
            5000,
            &cap,
        )
        .unwrap();
        assert!(huge.is_overflow());
    }

    #[test]
    fn psi_stub_examples() {
        let cap = Cap::default();
        let q = stub_quant();
        let phi = Modulus2::Affine { ck: 1, cn: 1, c: 0 };
        let zero = Counterfunction::new(ModulusFn::Constant { c: 0 });
        let one = Counterfunction::new(ModulusFn::Constant { c: 1 });
        assert_eq!(
            psi(&n(0), &zero, &q, &phi, &cap).unwrap(),
            NaturalBound::from_u64(15)
        );
        assert_eq!(
            psi(&n(0), &one, &q, &phi, &cap).unwrap(),
            NaturalBound::from_u64(15)
        );
        assert_eq!(
            psi_with_count(&n(0), NaturalBound::from_u64(0), &zero, &q, &phi, &cap).unwrap(),
            NaturalBound::from_u64(0)
        );
        let pp = psi_prime(&n(0), &zero, &q, &phi, &cap).unwrap();
        assert_eq!(pp, NaturalBound::from_u64(31));
        assert_eq!(k_zero(&n(0), &q).unwrap(), n(1));
    }

    #[test]
    fn psi_table_counterfunction_matches_closed_form() {
        let cap = Cap::default();
        let mut q = stub_quant();
        q.l = Rational::new(1, 100).unwrap();
        let phi = Modulus2::Affine { ck: 1, cn: 1, c: 0 };
        let closed = Counterfunction::new(ModulusFn::affine(1, 1));
        let table = Counterfunction::new(ModulusFn::Table {
            values: (1..=100_000).collect(),
        });
        let a = psi_detailed(&n(0), &closed, &q, &phi, &cap).unwrap();
        assert_eq!(a.p, NaturalBound::from_u64(2));
        let b = psi(&n(0), &table, &q, &phi, &cap).unwrap();
        assert_eq!(a.value, b);
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(&n(0), 1, 1), n(71));
        assert_eq!(kappa(&n(0), 1, 2), n(391));
        assert_eq!(kappa(&n(1), 1, 1), n(391));
    }

    #[test]
    fn kappa_hat_examples() {
        let id = ModulusFn::Identity;
        assert_eq!(kappa_hat(&n(0), 1, 1, 0, &id).unwrap(), n(391));
        assert_eq!(kappa_hat(&n(0), 1, 1, 2, &id).unwrap(), n(7687));
        assert_eq!(
            kappa_hat(&n(1), 1, 1, 0, &ModulusFn::affine(2, 0)).unwrap(),
            kappa(&n(6), 1, 1)
        );
    }
}

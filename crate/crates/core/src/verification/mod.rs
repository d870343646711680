//! Empirical certification: the lemma inequalities checked on traces,
//! metastable windows and Cauchy windows compared with the computed moduli.
//!
//! Every scan is exhaustive over the stored trace.

mod certificate;
mod window;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::json;

use crate::error::{Error, Result};
use crate::iteration::{ProblemInstance, Trace};
use crate::moduli::{
    delta, exp_upper, kappa, kappa_hat, omega_full, phi_liminf, psi_detailed, psi_prime_detailed,
    Cap, Counterfunction, Modulus2, NaturalBound, Rational,
};
use crate::operators::Vector;
use crate::regularity::{eval_gap, GapFunctional};

use certificate::{instance_digest, sha256_hex};
pub use certificate::{Certificate, CertificateKind, Source, Violation, MAX_REPORTED_VIOLATIONS};
use window::Windows;

/// Additive slack on every checked inequality.
pub const SLACK: f64 = 1e-9;
/// Margin by which a Cauchy window must beat `eps`.
pub const STRICT_GUARD: f64 = 1e-12;

fn integrity(cert: &mut Certificate, trace: &Trace, inst: &ProblemInstance) -> Result<()> {
    if let Some(issue) = trace.integrity_issue(inst)? {
        cert.violate(Violation::new("trace integrity", &[]).note(issue));
    }
    Ok(())
}

fn digest_of(v: &impl serde::Serialize) -> Result<String> {
    Ok(sha256_hex(serde_json::to_string(v)?.as_bytes()))
}

/// `x ∈ Gamma_k` with the canonical witness `T_{lambda_i} x`; points the check
/// cannot evaluate (outside `X_0`, past the horizon) count as non-members.
fn canonical_member(inst: &ProblemInstance, x: &Vector, i: usize, k: u64) -> Result<bool> {
    let Ok(lambda) = inst.schedule().lambda(i) else {
        return Ok(false);
    };
    let y = inst.gamma_witness(x, lambda)?;
    match inst.gamma_k_check(x, k, &y) {
        Ok(v) => Ok(v),
        Err(Error::Domain { .. } | Error::HorizonExceeded { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Checks the product-form and the `e^A`-form quasi-Fejér inequalities for
/// every known solution `x*` with `y* = T°x*`.
pub fn check_quasi_fejer(
    trace: &Trace,
    inst: &ProblemInstance,
    max_n: usize,
    max_l: usize,
) -> Result<Certificate> {
    let sols = inst.known_solutions();
    if sols.is_empty() {
        return Err(Error::MissingSolutions);
    }
    let q = inst.quant();
    let mut cert = Certificate::new(
        CertificateKind::LemmaInequality,
        json!({
            "check": "quasi-fejer",
            "instance": instance_digest(inst)?,
            "trace": trace.digest(),
            "max_n": max_n,
            "max_l": max_l,
        }),
    )?;
    cert.provenance("constants", "certified");
    integrity(&mut cert, trace, inst)?;

    let ea = exp_upper(&q.a)?.to_f64();
    let m = q.m as f64;
    let steps = trace.steps();
    let pts = trace.points();
    let mus = trace.mus();
    let rho: Vec<f64> = mus
        .iter()
        .zip(trace.lambdas())
        .map(|(u, l)| u / l)
        .collect();
    let mut checked = 0u64;
    let mut skipped = Vec::new();
    for (si, xs) in sols.iter().enumerate() {
        if inst.check_in_x0(xs).is_err() {
            skipped.push(si);
            continue;
        }
        let ys = inst.t().minimal_selection(xs)?;
        if ys.norm() > m + SLACK {
            cert.violate(
                Violation::new("M bounds the minimal selection", &[("solution", si as u64)])
                    .values(ys.norm(), m),
            );
        }
        let c = 2.0 * ys.norm();
        // how far (x*, y*) is from solving the resolvent equation at each step
        let err = (0..steps)
            .map(|j| Ok(xs.dist(&inst.s().resolvent(mus[j], &xs.axpy(mus[j], &ys))?)))
            .collect::<Result<Vec<f64>>>()?;
        for n in 0..=max_n.min(steps.saturating_sub(1)) {
            let d0 = pts[n].dist(xs);
            let (mut prod, mut acc_mu, mut acc_err, mut sum_mu, mut emax) =
                (1.0, 0.0, 0.0, 0.0, 0.0f64);
            for l in 1..=max_l.min(steps - n) {
                let j = n + l - 1;
                let growth = 1.0 + rho[j];
                prod *= growth;
                acc_mu = acc_mu * growth + mus[j];
                acc_err = acc_err * growth + 1.0;
                sum_mu += mus[j];
                emax = emax.max(err[j]);
                let lhs = pts[n + l].dist(xs);
                let product = prod * d0 + c * acc_mu + emax * acc_err;
                let exp_form = ea * d0 + (2.0 * m + 1.0) * ea * sum_mu + ea * l as f64 * emax;
                let at = [("n", n as u64), ("l", l as u64), ("solution", si as u64)];
                if lhs > product + SLACK {
                    cert.violate(Violation::new("product form", &at).values(lhs, product));
                }
                if lhs > exp_form + SLACK {
                    cert.violate(Violation::new("exponential form", &at).values(lhs, exp_form));
                }
                checked += 2;
            }
        }
    }
    cert.detail("checked", checked);
    cert.detail("skipped_solutions", skipped);
    Ok(cert)
}

/// Checks `||x_n - J^S_{mu_i}(x_n + mu_i T_{lambda_n} x_n)|| <=
/// ||x_n - x_{n+1}|| (1 + |mu_n - mu_i| / mu_n)` for `n <= max_n`, `i <= max_i`.
pub fn check_approx_error(
    trace: &Trace,
    inst: &ProblemInstance,
    max_n: usize,
    max_i: usize,
) -> Result<Certificate> {
    let mut cert = Certificate::new(
        CertificateKind::LemmaInequality,
        json!({
            "check": "approximate-error",
            "instance": instance_digest(inst)?,
            "trace": trace.digest(),
            "max_n": max_n,
            "max_i": max_i,
        }),
    )?;
    integrity(&mut cert, trace, inst)?;
    let pts = trace.points();
    let steps = trace.steps();
    let mus_i = (0..=max_i)
        .map(|i| inst.schedule().mu(i))
        .collect::<Result<Vec<f64>>>()?;
    let mut checked = 0u64;
    for n in 0..=max_n.min(steps.saturating_sub(1)) {
        let (lambda, mu_n) = (trace.lambdas()[n], trace.mus()[n]);
        let y = inst.t().yosida(lambda, &pts[n])?;
        // ||x_n - x_{n+1}|| / mu_n = ||y - S_{mu_n}(x_n + mu_n y)|| for the exact
        // step; differencing the stored points would amplify their rounding by
        // 1/mu_n. Integrity above ties the stored x_{n+1} to the exact step.
        let rate = y.dist(&inst.s().yosida(mu_n, &pts[n].axpy(mu_n, &y))?);
        let r = mu_n * rate;
        for (i, &mu_i) in mus_i.iter().enumerate() {
            let lhs = pts[n].dist(&inst.s().resolvent(mu_i, &pts[n].axpy(mu_i, &y))?);
            let rhs = r + (mu_n - mu_i).abs() * rate;
            if lhs > rhs + SLACK {
                cert.violate(
                    Violation::new("approximate error", &[("n", n as u64), ("i", i as u64)])
                        .values(lhs, rhs),
                );
            }
            checked += 1;
        }
    }
    cert.detail("checked", checked);
    Ok(cert)
}

/// Smallest `N` such that `[N, N + g(N)]` lies in the trace and passes
/// `accept`, among windows of diameter at most `1/(k+1)`.
fn find_window(
    trace: &Trace,
    k: u64,
    g: &Counterfunction,
    mut accept: impl FnMut(usize, usize) -> Result<bool>,
) -> Result<Option<usize>> {
    let thr = 1.0 / (k as f64 + 1.0);
    let steps = trace.steps();
    let windows = Windows::new(trace.points());
    for n in 0..=steps {
        let len = match g.eval_index(n) {
            Ok(Some(v)) => v,
            Ok(None) => continue,
            Err(Error::TableRange { .. }) => break,
            Err(e) => return Err(e),
        };
        let Some(end) = n.checked_add(len).filter(|&e| e <= steps) else {
            continue;
        };
        if windows.diam_at_most(n, end, thr) && accept(n, end)? {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Smallest `N` with `||x_i - x_j|| <= 1/(k+1)` for all `i, j ∈ [N, N + g(N)]`.
pub fn find_metastable(trace: &Trace, k: u64, g: &Counterfunction) -> Result<Option<usize>> {
    find_window(trace, k, g, |_, _| Ok(true))
}

#[derive(Debug, Clone, Default)]
pub struct MetastabilityOptions {
    pub cap: Cap,
    /// Also look for a window whose points all lie in `Gamma_k`.
    pub check_gamma: bool,
}

/// Runs the iteration to `horizon` and certifies the rate of metastability.
pub fn certify_metastability(
    inst: &ProblemInstance,
    k: u64,
    g: &Counterfunction,
    phi_search: &Modulus2,
    phi_source: Source,
    horizon: usize,
    opts: &MetastabilityOptions,
) -> Result<Certificate> {
    let inst = inst.with_horizon(horizon)?;
    let trace = inst.run(horizon)?;
    certify_metastability_on(&inst, &trace, k, g, phi_search, phi_source, opts)
}

/// [`certify_metastability`] over an existing trace of `inst`.
pub fn certify_metastability_on(
    inst: &ProblemInstance,
    trace: &Trace,
    k: u64,
    g: &Counterfunction,
    phi_search: &Modulus2,
    phi_source: Source,
    opts: &MetastabilityOptions,
) -> Result<Certificate> {
    let mut cert = Certificate::new(
        CertificateKind::Metastability,
        json!({
            "instance": instance_digest(inst)?,
            "trace": trace.digest(),
            "horizon": trace.steps(),
            "k": k,
            "g": g,
            "phi_search": digest_of(phi_search)?,
            "cap_digits": opts.cap.digit_count(),
            "check_gamma": opts.check_gamma,
        }),
    )?;
    cert.provenance("constants", "certified");
    cert.provenance("phi_search", phi_source.as_str());
    cert.provenance("convention", "window diameter <= 1/(k+1)");
    let q = inst.quant();
    let kk = BigUint::from(k);
    let psi = psi_detailed(&kk, g, q, phi_search, &opts.cap)?;
    let prime = psi_prime_detailed(&kk, g, q, phi_search, &opts.cap)?;
    cert.detail("P", &psi.p);
    cert.detail("psi_steps", psi.steps);
    cert.detail(
        "psi_prime",
        json!({ "k0": prime.precision.to_string(), "P": prime.p, "value": prime.value }),
    );
    cert.bound = Some(psi.value.clone());

    let found = find_metastable(trace, k, g)?;
    match found {
        None => cert.fail("horizon too short"),
        Some(n) => {
            cert.witness_n = Some(n as u64);
            match &psi.value {
                NaturalBound::Overflow => {
                    cert.vacuous = true;
                    cert.reason = Some("bound exceeds cap".into());
                }
                NaturalBound::Finite(b) => {
                    if BigUint::from(n) > *b {
                        cert.violate(
                            Violation::new("N <= Psi", &[("N", n as u64)])
                                .note(format!("Psi = {b}")),
                        );
                    }
                }
            }
        }
    }

    if opts.check_gamma {
        let pts = trace.points();
        let mut memo: Vec<Option<bool>> = vec![None; pts.len()];
        let mut member = |i: usize| -> Result<bool> {
            if let Some(v) = memo[i] {
                return Ok(v);
            }
            let v = canonical_member(inst, &pts[i], i, k)?;
            memo[i] = Some(v);
            Ok(v)
        };
        let hit = find_window(trace, k, g, |lo, hi| {
            for i in lo..=hi {
                if !member(i)? {
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        let within = match (hit, &prime.value) {
            (Some(n), NaturalBound::Finite(b)) => Some(BigUint::from(n) <= *b),
            _ => None,
        };
        cert.detail(
            "gamma_window",
            json!({ "N": hit, "within_psi_prime": within }),
        );
    }
    Ok(cert)
}

/// `phi(k, n)`: the first index `N >= n` of the trace with
/// `residual_N < 1/(k+1)`, made monotone in `k` by a running maximum.
/// The table covers every `n` for which all rows are defined.
pub fn build_empirical_phi(trace: &Trace, k_max: u64) -> Result<Modulus2> {
    let res = trace.residuals();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    let mut width = res.len();
    for k in 0..=k_max {
        let thr = 1.0 / (k as f64 + 1.0);
        let last = res
            .iter()
            .rposition(|&r| r < thr)
            .ok_or(Error::ResidualFloor { k })?;
        width = width.min(last + 1);
        let mut row = vec![0u64; last + 1];
        let mut next = last as u64;
        for n in (0..=last).rev() {
            if res[n] < thr {
                next = n as u64;
            }
            row[n] = next;
        }
        if let Some(prev) = rows.last() {
            for (v, p) in row.iter_mut().zip(prev) {
                *v = (*v).max(*p);
            }
        }
        rows.push(row);
    }
    for r in &mut rows {
        r.truncate(width);
    }
    Ok(Modulus2::Table { rows, tail: None })
}

/// Index `s` from which the trace sits at a point `x` with `0 ∈ Tx` and
/// `0 ∈ Sx`. Such a point is fixed by every step, so all later residuals are 0.
pub fn certify_stationary_tail(inst: &ProblemInstance, trace: &Trace) -> Result<Option<usize>> {
    let pts = trace.points();
    let x = pts.last().expect("a trace holds at least x0");
    let zero = Vector::zeros(x.dim());
    let fixed = inst.t().evaluate(x)?.contains(&zero, 0.0)?
        && inst.s().evaluate(x)?.contains(&zero, 0.0)?;
    if !fixed {
        return Ok(None);
    }
    let first = pts.iter().rposition(|p| p != x).map_or(0, |i| i + 1);
    Ok(Some(first))
}

/// Extends an empirical table with the tail `max(n, s)` when the trace is
/// certified stationary from `s` on.
pub fn extend_stationary(phi: Modulus2, inst: &ProblemInstance, trace: &Trace) -> Result<Modulus2> {
    match (phi, certify_stationary_tail(inst, trace)?) {
        (Modulus2::Table { rows, .. }, Some(s)) => Ok(Modulus2::Table {
            rows,
            tail: Some(s as u64),
        }),
        (phi, _) => Ok(phi),
    }
}

pub type ThetaEval<'a> = dyn Fn(&Rational) -> Result<NaturalBound> + 'a;

/// Checks `||x_n - x_m|| < eps` on `[theta(eps), N]` for each `eps`; an `eps`
/// whose `theta` lies past the trace is vacuous.
pub fn check_cauchy_modulus(
    trace: &Trace,
    theta: &ThetaEval<'_>,
    eps_list: &[Rational],
) -> Result<Certificate> {
    let mut cert = Certificate::new(
        CertificateKind::CauchyModulus,
        json!({
            "trace": trace.digest(),
            "eps": eps_list,
        }),
    )?;
    let steps = trace.steps();
    let windows = Windows::new(trace.points());
    let mut per_eps = Vec::new();
    for (idx, eps) in eps_list.iter().enumerate() {
        let t = theta(eps)?;
        let start = t
            .to_u64()
            .and_then(|v| usize::try_from(v).ok())
            .filter(|&v| v <= steps);
        let mut entry = json!({ "eps": eps, "theta": t });
        match start {
            None => {
                cert.vacuous = true;
                entry["vacuous"] = json!(true);
            }
            Some(s) => {
                let e = eps.to_f64();
                let ok = windows.diam_at_most(s, steps, e - STRICT_GUARD);
                let diam = windows.diam_1d(s, steps);
                entry["vacuous"] = json!(false);
                entry["pass"] = json!(ok);
                entry["diameter"] = json!(diam);
                if !ok {
                    let mut v = Violation::new(
                        "Cauchy window",
                        &[("eps_index", idx as u64), ("theta", s as u64)],
                    );
                    if let Some(d) = diam {
                        v = v.values(d, e);
                    }
                    cert.violate(v);
                }
            }
        }
        per_eps.push(entry);
    }
    if let [eps] = eps_list {
        cert.bound = Some(theta(eps)?);
    }
    cert.detail("per_eps", per_eps);
    Ok(cert)
}

/// Searches `[n, Phi(k, n)]` for a point of `Gamma_k` with its canonical witness.
pub fn check_liminf_witness(
    inst: &ProblemInstance,
    trace: &Trace,
    k: u64,
    n: u64,
    phi_search: &Modulus2,
    phi_source: Source,
    cap: &Cap,
) -> Result<Certificate> {
    let mut cert = Certificate::new(
        CertificateKind::LiminfWitness,
        json!({
            "instance": instance_digest(inst)?,
            "trace": trace.digest(),
            "k": k,
            "n": n,
            "phi_search": digest_of(phi_search)?,
        }),
    )?;
    cert.provenance("constants", "certified");
    cert.provenance("phi_search", phi_source.as_str());
    let bound = phi_liminf(
        &BigUint::from(k),
        &BigUint::from(n),
        inst.quant(),
        phi_search,
        cap,
    )?;
    cert.bound = Some(bound.clone());
    let steps = trace.steps() as u64;
    let last = bound.to_u64().map_or(steps, |b| b.min(steps));
    let mut found = None;
    for i in n..=last {
        if canonical_member(inst, &trace.points()[i as usize], i as usize, k)? {
            found = Some(i);
            break;
        }
    }
    match found {
        Some(i) => cert.witness_n = Some(i),
        None if n > last => cert.fail("trace ends before n"),
        None if bound.to_u64().is_some_and(|b| b <= steps) => {
            cert.fail(format!("no point of Gamma_{k} in [{n}, {bound}]"))
        }
        None => cert.fail("trace ends before Phi(k, n)"),
    }
    Ok(cert)
}

/// For pairs with `q ∈ Gamma_{delta(k)}` (witness `T°q`) and
/// `||p - q|| <= 1/(omega(k)+1)`, checks `p ∈ Gamma_k` with the same witness.
pub fn check_uniform_closedness(
    inst: &ProblemInstance,
    samples: &[(Vector, Vector)],
    k: u64,
) -> Result<Certificate> {
    let q = inst.quant();
    let kk = BigUint::from(k);
    let dk = delta(&kk)
        .to_u64()
        .ok_or_else(|| Error::IndexOverflow(delta(&kk).to_string()))?;
    let om = omega_full(&kk, q.m, &q.varpi)?;
    let radius = 1.0 / (om.to_f64().unwrap_or(f64::INFINITY) + 1.0);
    let mut cert = Certificate::new(
        CertificateKind::LemmaInequality,
        json!({
            "check": "uniform-closedness",
            "instance": instance_digest(inst)?,
            "samples": digest_of(&samples)?,
            "k": k,
        }),
    )?;
    cert.detail("omega", om.to_string());
    let (mut checked, mut skipped) = (0u64, 0u64);
    for (idx, (p, x)) in samples.iter().enumerate() {
        let y = inst.t().minimal_selection(x)?;
        let pre = match inst.gamma_k_check(x, dk, &y) {
            Ok(v) => v,
            Err(Error::Domain { .. }) => false,
            Err(e) => return Err(e),
        };
        if !pre || p.dist(x) > radius {
            skipped += 1;
            continue;
        }
        checked += 1;
        let ok = match inst.gamma_k_check(p, k, &y) {
            Ok(v) => v,
            Err(Error::Domain { .. }) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            cert.violate(Violation::new(
                "uniform closedness",
                &[("sample", idx as u64)],
            ));
        }
    }
    cert.vacuous = checked == 0;
    cert.detail("checked", checked);
    cert.detail("skipped", skipped);
    Ok(cert)
}

/// Which gap functional a `Gamma` membership is converted into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    /// `x ∈ Gamma_{kappa(k)} => F1(x) <= 1/(k+1)`
    F1,
    /// `x ∈ Gamma_{kappa^(k)} => F2(x) <= 1/(k+1)`
    F2,
}

/// Samples the conversion from `Gamma` membership to a small gap value, with
/// the witness `T°x`.
pub fn check_conversion(
    inst: &ProblemInstance,
    points: &[Vector],
    k: u64,
    conv: Conversion,
) -> Result<Certificate> {
    let q = inst.quant();
    let kk = BigUint::from(k);
    let (index, f, name) = match conv {
        Conversion::F1 => (kappa(&kk, q.m, q.b), GapFunctional::F1, "F1"),
        Conversion::F2 => {
            let vh = q
                .varpi_hat
                .as_ref()
                .ok_or(Error::MissingModulus("varpi_hat"))?;
            (
                kappa_hat(&kk, q.m, q.b, q.b_prime, vh)?,
                GapFunctional::F2,
                "F2",
            )
        }
    };
    let level = index
        .to_u64()
        .ok_or_else(|| Error::IndexOverflow(index.to_string()))?;
    if level as usize > inst.schedule().horizon {
        return Err(Error::HorizonExceeded {
            n: level as usize,
            horizon: inst.schedule().horizon,
        });
    }
    let mut cert = Certificate::new(
        CertificateKind::LemmaInequality,
        json!({
            "check": "conversion",
            "gap": name,
            "instance": instance_digest(inst)?,
            "points": digest_of(&points)?,
            "k": k,
        }),
    )?;
    cert.detail("level", level);
    let thr = 1.0 / (k as f64 + 1.0);
    let (mut members, mut skipped) = (0u64, 0u64);
    for (idx, x) in points.iter().enumerate() {
        let y = inst.t().minimal_selection(x)?;
        let inside = match inst.gamma_k_check(x, level, &y) {
            Ok(v) => v,
            Err(Error::Domain { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if !inside {
            continue;
        }
        members += 1;
        let gap = eval_gap(inst, f, x)?;
        if gap > thr + SLACK {
            cert.violate(Violation::new("conversion", &[("point", idx as u64)]).values(gap, thr));
        }
    }
    cert.vacuous = members == 0;
    cert.detail("members", members);
    cert.detail("skipped", skipped);
    Ok(cert)
}

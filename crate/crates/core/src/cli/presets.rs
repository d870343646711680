use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{ParameterSchedule, ProblemInstance, QuantitativeData};
use crate::moduli::{ModulusFn, Rational};
use crate::operators::{OperatorSpec, Vector};

pub const PRESETS: [&str; 3] = ["dc-abs-1d", "affine-affine-nd", "box-affine-nd"];

/// Optional shape parameters of the `nd` presets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Matrix of `T` for `affine-affine-nd`.
    #[serde(rename = "T_matrix", default, skip_serializing_if = "Option::is_none")]
    pub t_matrix: Option<Vec<Vec<f64>>>,
    #[serde(rename = "T_offset", default, skip_serializing_if = "Option::is_none")]
    pub t_offset: Option<Vec<f64>>,
    #[serde(rename = "S_matrix", default, skip_serializing_if = "Option::is_none")]
    pub s_matrix: Option<Vec<Vec<f64>>>,
    #[serde(rename = "S_offset", default, skip_serializing_if = "Option::is_none")]
    pub s_offset: Option<Vec<f64>>,
    /// Box of `box-affine-nd`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<Vec<f64>>,
    /// `T x = x - c` for `box-affine-nd`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<f64>>,
}

/// A catalog problem before a schedule and data are attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub t: OperatorSpec,
    pub s: OperatorSpec,
    pub solutions: Vec<Vector>,
    pub x0: Vector,
    pub varpi: ModulusFn,
    pub varpi_hat: Option<ModulusFn>,
}

fn scaled_identity(d: usize, s: f64) -> Vec<Vec<f64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { s } else { 0.0 }).collect())
        .collect()
}

/// `varpi(k) = c(k+1) - 1` with `c >= ||A||`, valid for `x -> Ax + a`.
fn lipschitz_varpi(norm: f64) -> ModulusFn {
    let c = norm.ceil().max(1.0) as u64;
    if c == 1 {
        ModulusFn::Identity
    } else {
        ModulusFn::affine(c, c - 1)
    }
}

fn affine_norm(op: &OperatorSpec) -> f64 {
    match op {
        OperatorSpec::AffinePsd(a) => a.spectral_norm(),
        _ => 0.0,
    }
}

pub fn preset(name: &str) -> Result<Preset> {
    preset_with(name, &PresetParams::default())
}

pub fn preset_with(name: &str, p: &PresetParams) -> Result<Preset> {
    match name {
        "dc-abs-1d" => Ok(Preset {
            t: OperatorSpec::identity(1)?,
            s: OperatorSpec::subdiff_abs(1)?,
            solutions: [-1.0, 0.0, 1.0]
                .into_iter()
                .map(Vector::scalar)
                .collect::<Result<_>>()?,
            x0: Vector::scalar(2.0)?,
            varpi: ModulusFn::Identity,
            varpi_hat: Some(ModulusFn::Identity),
        }),
        "affine-affine-nd" => {
            let d = p.dim.unwrap_or(2);
            let ta = p
                .t_matrix
                .clone()
                .unwrap_or_else(|| scaled_identity(d, 2.0));
            let sa = p
                .s_matrix
                .clone()
                .unwrap_or_else(|| scaled_identity(d, 1.0));
            let a = p.t_offset.clone().unwrap_or_else(|| vec![0.0; ta.len()]);
            let b = p.s_offset.clone().unwrap_or_else(|| vec![0.0; sa.len()]);
            let t = OperatorSpec::affine_psd(ta.clone(), Vector::new(a.clone())?)?;
            let s = OperatorSpec::affine_psd(sa.clone(), Vector::new(b.clone())?)?;
            let d = t.dim();
            // (A - B) x = b - a
            let diff = DMatrix::from_fn(d, d, |i, j| ta[i][j] - sa[i][j]);
            let rhs = DVector::from_fn(d, |i, _| b[i] - a[i]);
            let solutions = match diff.lu().solve(&rhs) {
                Some(x) => vec![Vector::new(x.iter().copied().collect())?],
                None => Vec::new(),
            };
            let (vt, vs) = (
                lipschitz_varpi(affine_norm(&t)),
                lipschitz_varpi(affine_norm(&s)),
            );
            Ok(Preset {
                t,
                s,
                solutions,
                x0: Vector::new(vec![0.5; d])?,
                varpi: vt,
                varpi_hat: Some(vs),
            })
        }
        "box-affine-nd" => {
            let d = p.dim.unwrap_or(2);
            let lo = p.lo.clone().unwrap_or_else(|| vec![-1.0; d]);
            let hi = p.hi.clone().unwrap_or_else(|| vec![1.0; d]);
            let c =
                p.c.clone()
                    .unwrap_or_else(|| (0..lo.len()).map(|i| 0.5 + i as f64).collect());
            let s =
                OperatorSpec::normal_cone_box(Vector::new(lo.clone())?, Vector::new(hi.clone())?)?;
            let d = s.dim();
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: c.len(),
                });
            }
            let t = OperatorSpec::affine_psd(
                scaled_identity(d, 1.0),
                Vector::new(c.iter().map(|v| -v).collect())?,
            )?;
            Ok(Preset {
                t,
                s,
                solutions: box_solutions(&lo, &hi, &c)?,
                x0: Vector::new(
                    lo.iter()
                        .zip(&hi)
                        .map(|(l, h)| 0.0f64.clamp(*l, *h))
                        .collect(),
                )?,
                varpi: ModulusFn::Identity,
                varpi_hat: None,
            })
        }
        other => Err(Error::UnknownPreset(other.into())),
    }
}

/// Zeros of `x - c ∈ N_box(x)`, coordinate by coordinate.
fn box_solutions(lo: &[f64], hi: &[f64], c: &[f64]) -> Result<Vec<Vector>> {
    let mut per_axis = Vec::new();
    for ((&l, &h), &ci) in lo.iter().zip(hi).zip(c) {
        // interior: x_i = c_i; upper face: x_i - c_i >= 0; lower face: x_i - c_i <= 0
        let mut opts = Vec::new();
        if l < ci && ci < h {
            opts.push(ci);
        }
        if ci <= h {
            opts.push(h);
        }
        if ci >= l && l != h {
            opts.push(l);
        }
        per_axis.push(opts);
    }
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for opts in per_axis {
        out = out
            .into_iter()
            .flat_map(|p| {
                opts.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(Vector::new).collect()
}

/// Certified data for a preset under the standard schedule.
pub fn default_quant(p: &Preset, x0: &Vector, l: Rational) -> Result<QuantitativeData> {
    let bound = p.t.min_norm_bound_on_ball(x0, l.to_f64());
    Ok(QuantitativeData {
        a: Rational::integer(2),
        b: 1,
        b_prime: 0,
        c: Rational::one(),
        m: (bound.ceil() as u64).max(1),
        l,
        d: p.t.dim(),
        theta: ModulusFn::PowerRate {
            c: Rational::one(),
            p: 1,
        },
        xi: ModulusFn::affine(1, 1),
        varpi: p.varpi.clone(),
        varpi_hat: p.varpi_hat.clone(),
        mu_sum: Some(Rational::new(1203, 1000)?),
    })
}

/// A preset with its default start, `L = 4` and the standard schedule.
pub fn preset_instance(name: &str, horizon: usize) -> Result<ProblemInstance> {
    let p = preset(name)?;
    let q = default_quant(&p, &p.x0, Rational::integer(4))?;
    ProblemInstance::new(
        p.t,
        p.s,
        p.x0,
        ParameterSchedule::standard(horizon),
        q,
        p.solutions,
    )
}

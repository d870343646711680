//! Configuration, the problem catalog and task execution behind the
//! `fejerquant` binary.

mod presets;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iteration::{ParameterSchedule, ProblemInstance, Rule, Trace};
use crate::moduli::{
    chi, delta, exp_upper, kappa, kappa_hat, omega, psi, psi_prime, sqrt_upper,
    total_boundedness_p, varpi_prime, Cap, Counterfunction, Modulus2, ModulusFn, NaturalBound,
    Rational, DEFAULT_CAP_DIGITS,
};
use crate::operators::{OperatorSpec, Vector};
use crate::regularity::{
    check_ball_precondition, grid_regularity_oracle, grid_validated, theta_moudafi, GapFunctional,
    RegularityModulus,
};
use crate::verification::{
    build_empirical_phi, certify_metastability_on, check_approx_error, check_cauchy_modulus,
    check_conversion, check_liminf_witness, check_quasi_fejer, check_uniform_closedness,
    extend_stationary, Certificate, Conversion, MetastabilityOptions, Source,
};

pub use presets::{
    default_quant, preset, preset_instance, preset_with, Preset, PresetParams, PRESETS,
};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "FEJERQUANT_OUT";
pub const DEFAULT_OUT: &str = "fejerquant-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Run,
    CertifyMetastability,
    CauchyModulus,
    CheckLemmas,
    ModuliEval,
}

impl Task {
    pub fn parse(s: &str) -> Result<Task> {
        serde_json::from_value(serde_json::Value::String(s.into()))
            .map_err(|_| Error::Config(format!("unknown task `{s}`")))
    }

    fn default_horizon(self) -> usize {
        match self {
            Task::Run => 100,
            Task::CheckLemmas => 1000,
            Task::CertifyMetastability | Task::CauchyModulus => 100_000,
            Task::ModuliEval => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    #[serde(rename = "T")]
    pub t: OperatorSpec,
    #[serde(rename = "S")]
    pub s: OperatorSpec,
    #[serde(default)]
    pub known_solutions: Vec<Vector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Problem {
    Preset(String),
    Inline(InlineProblem),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub lambda: Rule,
    pub mu: Rule,
}

/// Regularity modulus for the Cauchy-modulus task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityConfig {
    pub gap: GapFunctional,
    pub center: Vector,
    pub radius: Rational,
    /// Analytic `phi(eps) = c eps`, validated on the grid when `validate_points` is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<Rational>,
    /// Grid-oracle table at these `eps` values instead of a linear modulus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_eps: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate_points: Option<u64>,
    #[serde(default)]
    pub use_kappa_hat: bool,
}

/// One configuration file. Fields that a task does not use are ignored by it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<Problem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset_params: Option<PresetParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vector>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quant: Option<crate::iteration::QuantitativeData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ks: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ModulusFn>,
    /// Residual-search bound; built from the trace when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_search: Option<Modulus2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_k_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_gamma: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularity: Option<RegularityConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_i: Option<usize>,
    /// Whether a vacuous certificate counts as a pass (default true).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vacuous_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap_digits: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<bool>,

    // moduli-eval arguments
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m_const: Option<u64>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b_const: Option<u64>,
    #[serde(rename = "Bprime", default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<u32>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a_const: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varpi: Option<ModulusFn>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    fn cap(&self) -> Cap {
        Cap::digits(self.cap_digits.unwrap_or(DEFAULT_CAP_DIGITS))
    }

    fn ks(&self) -> Vec<u64> {
        match (&self.ks, self.k) {
            (Some(ks), _) => ks.clone(),
            (None, Some(k)) => vec![k],
            (None, None) => vec![0],
        }
    }

    /// The instance described by the problem, start, schedule and data fields.
    pub fn instance(&self, task: Task) -> Result<ProblemInstance> {
        let horizon = self.horizon.unwrap_or_else(|| task.default_horizon());
        let schedule = match &self.schedule {
            Some(s) => ParameterSchedule::new(s.lambda.clone(), s.mu.clone(), horizon)?,
            None => ParameterSchedule::standard(horizon),
        };
        let problem = self
            .problem
            .clone()
            .unwrap_or(Problem::Preset("dc-abs-1d".into()));
        match problem {
            Problem::Preset(name) => {
                let p = preset_with(&name, &self.preset_params.clone().unwrap_or_default())?;
                let x0 = self.x0.clone().unwrap_or_else(|| p.x0.clone());
                let quant = match &self.quant {
                    Some(q) => q.clone(),
                    None => default_quant(&p, &x0, self.l.clone().unwrap_or(Rational::integer(4)))?,
                };
                ProblemInstance::new(p.t, p.s, x0, schedule, quant, p.solutions)
            }
            Problem::Inline(p) => {
                let x0 = self
                    .x0
                    .clone()
                    .ok_or_else(|| Error::Config("inline problems need x0".into()))?;
                let quant = self
                    .quant
                    .clone()
                    .ok_or_else(|| Error::Config("inline problems need quant".into()))?;
                ProblemInstance::new(p.t, p.s, x0, schedule, quant, p.known_solutions)
            }
        }
    }

    /// This configuration with every defaulted field written out.
    pub fn resolved(&self, task: Task) -> Result<RunConfig> {
        let mut c = self.clone();
        c.task = Some(task);
        if task == Task::ModuliEval {
            return Ok(c);
        }
        let inst = self.instance(task)?;
        c.problem.get_or_insert(Problem::Preset("dc-abs-1d".into()));
        c.x0 = Some(inst.x0().clone());
        c.quant = Some(inst.quant().clone());
        c.l = None;
        c.horizon = Some(inst.schedule().horizon);
        c.schedule = Some(ScheduleConfig {
            lambda: inst.schedule().lambda.clone(),
            mu: inst.schedule().mu.clone(),
        });
        c.cap_digits = Some(c.cap().digit_count());
        Ok(c)
    }
}

/// One line of the summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub name: String,
    pub kind: String,
    pub witness: String,
    pub bound: String,
    pub sound: String,
    pub vacuous: bool,
}

/// The result of executing one task.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<Row>,
    pub certificates: Vec<(String, Certificate)>,
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
    /// 0 when every certificate passed, 1 otherwise.
    pub exit_code: i32,
}

impl Outcome {
    fn push(&mut self, name: &str, cert: Certificate, vacuous_ok: bool) {
        let pass = cert.sound && (vacuous_ok || !cert.vacuous);
        if !pass {
            self.exit_code = 1;
        }
        self.rows.push(Row {
            name: name.into(),
            kind: serde_json::to_value(cert.kind)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            witness: cert.witness_n.map_or("-".into(), |n| n.to_string()),
            bound: cert.bound.as_ref().map_or("-".into(), bound_text),
            sound: if cert.sound {
                "yes".into()
            } else {
                "NO".into()
            },
            vacuous: cert.vacuous,
        });
        self.certificates.push((name.into(), cert));
    }

    fn skip(&mut self, name: &str, why: &str) {
        self.rows.push(Row {
            name: name.into(),
            kind: "skipped".into(),
            witness: "-".into(),
            bound: "-".into(),
            sound: why.into(),
            vacuous: false,
        });
    }

    /// Fixed-width summary table.
    pub fn table(&self) -> String {
        let header = [
            "certificate",
            "kind",
            "witness_N",
            "bound",
            "sound",
            "vacuous",
        ];
        let cells: Vec<[String; 6]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.name.clone(),
                    r.kind.clone(),
                    r.witness.clone(),
                    r.bound.clone(),
                    r.sound.clone(),
                    r.vacuous.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for c in &cells {
            for (w, s) in widths.iter_mut().zip(c) {
                *w = (*w).max(s.chars().count());
            }
        }
        let line = |c: &[String]| {
            c.iter()
                .zip(widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        let mut out = line(&header.map(String::from));
        out.push('\n');
        out.push_str(&widths.map(|w| "-".repeat(w)).join("  "));
        out.push('\n');
        for c in &cells {
            out.push_str(&line(c));
            out.push('\n');
        }
        out
    }
}

fn bound_text(b: &NaturalBound) -> String {
    match b {
        NaturalBound::Finite(v) if v.bits() > 200 => format!("~10^{}", v.to_string().len() - 1),
        other => other.to_string(),
    }
}

/// Output directory: explicit value, then the environment, then the default.
pub fn out_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn write_certificates(dir: &Path, out: &mut Outcome, file: &str) -> Result<()> {
    ensure_dir(dir)?;
    let path = dir.join(file);
    let certs: Vec<serde_json::Value> = out
        .certificates
        .iter()
        .map(|(name, c)| serde_json::json!({ "name": name, "certificate": c }))
        .collect();
    fs::write(&path, serde_json::to_string_pretty(&certs)?)?;
    out.files.push(path);
    Ok(())
}

fn phi_for(cfg: &RunConfig, inst: &ProblemInstance, trace: &Trace) -> Result<(Modulus2, Source)> {
    match &cfg.phi_search {
        Some(p) => Ok((p.clone(), Source::Analytic)),
        None => {
            let table = build_empirical_phi(trace, cfg.phi_k_max.unwrap_or(8))?;
            Ok((extend_stationary(table, inst, trace)?, Source::Empirical))
        }
    }
}

/// Executes `task` under `cfg`, writing artifacts below `dir`.
pub fn execute(task: Task, cfg: &RunConfig, dir: &Path, csv: bool) -> Result<Outcome> {
    if let Some(t) = cfg.task {
        if t != task {
            return Err(Error::Config(format!(
                "config is for task {t:?}, not {task:?}"
            )));
        }
    }
    let vacuous_ok = cfg.vacuous_ok.unwrap_or(true);
    let mut out = Outcome::default();
    match task {
        Task::ModuliEval => {
            let value = moduli_eval(cfg)?;
            out.lines.push(value);
        }
        Task::Run => {
            let inst = cfg.instance(task)?;
            let trace = inst.run(inst.schedule().horizon)?;
            ensure_dir(dir)?;
            let path = dir.join("trace.jsonl");
            trace.write_jsonl(fs::File::create(&path)?)?;
            out.files.push(path);
            if csv || cfg.csv.unwrap_or(false) {
                let path = dir.join("trace.csv");
                trace.write_csv(fs::File::create(&path)?)?;
                out.files.push(path);
            }
            out.lines.push(format!("steps     {}", trace.steps()));
            out.lines.push(format!(
                "final     {}",
                trace.points().last().expect("nonempty")
            ));
            out.lines.push(format!("digest    {}", trace.digest()));
        }
        Task::CheckLemmas => {
            let inst = cfg.instance(task)?;
            let trace = inst.run(inst.schedule().horizon)?;
            let max_n = cfg.max_n.unwrap_or(100);
            let max_l = cfg.max_l.unwrap_or(100);
            let max_i = cfg.max_i.unwrap_or(200);
            out.push(
                "quasi-fejer",
                check_quasi_fejer(&trace, &inst, max_n, max_l)?,
                vacuous_ok,
            );
            if max_i < inst.schedule().horizon {
                out.push(
                    "approx-error",
                    check_approx_error(
                        &trace,
                        &inst,
                        max_n.max(200).min(trace.steps() - 1),
                        max_i,
                    )?,
                    vacuous_ok,
                );
            }
            let k = cfg.k.unwrap_or(0);
            // uniform closedness around each known solution in X_0
            let q = inst.quant();
            let w = crate::moduli::omega_full(&BigUint::from(k), q.m, &q.varpi)?;
            let step = 1.0 / (w.to_string().parse::<f64>().unwrap_or(f64::INFINITY) + 1.0);
            let mut pairs = Vec::new();
            for s in inst.known_solutions() {
                for t in [0.0, step, 2.0 * step] {
                    let mut p = s.coords().to_vec();
                    p[0] += t;
                    pairs.push((Vector::new(p)?, s.clone()));
                }
            }
            out.push(
                "uniform-closedness",
                check_uniform_closedness(&inst, &pairs, k)?,
                vacuous_ok,
            );
            let grid = axis_grid(&inst, 200)?;
            for (conv, name) in [
                (Conversion::F1, "conversion-F1"),
                (Conversion::F2, "conversion-F2"),
            ] {
                match check_conversion(&inst, &grid, k, conv) {
                    Ok(c) => out.push(name, c, vacuous_ok),
                    Err(Error::HorizonExceeded { n, .. }) => {
                        out.skip(name, &format!("needs horizon {n}"))
                    }
                    Err(Error::MissingModulus(m)) => out.skip(name, &format!("no {m}")),
                    Err(e) => return Err(e),
                }
            }
            match phi_for(cfg, &inst, &trace) {
                Ok((phi, src)) => {
                    let c = check_liminf_witness(
                        &inst,
                        &trace,
                        k,
                        cfg.n.unwrap_or(0),
                        &phi,
                        src,
                        &cfg.cap(),
                    );
                    match c {
                        Ok(c) => out.push("liminf-witness", c, vacuous_ok),
                        Err(Error::TableRange { .. }) => {
                            out.skip("liminf-witness", "phi table too small")
                        }
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::ResidualFloor { k }) => {
                    out.skip("liminf-witness", &format!("residual floor at k={k}"))
                }
                Err(e) => return Err(e),
            }
            write_certificates(dir, &mut out, "certificates.json")?;
        }
        Task::CertifyMetastability => {
            let inst = cfg.instance(task)?;
            let trace = inst.run(inst.schedule().horizon)?;
            let (phi, src) = phi_for(cfg, &inst, &trace)?;
            let g = Counterfunction::new(cfg.g.clone().unwrap_or(ModulusFn::affine(1, 1)));
            let opts = MetastabilityOptions {
                cap: cfg.cap(),
                check_gamma: cfg.check_gamma.unwrap_or(false),
            };
            for k in cfg.ks() {
                let c = certify_metastability_on(&inst, &trace, k, &g, &phi, src, &opts)?;
                out.push(&format!("metastability k={k}"), c, vacuous_ok);
            }
            write_certificates(dir, &mut out, "certificates.json")?;
        }
        Task::CauchyModulus => {
            let inst = cfg.instance(task)?;
            let trace = inst.run(inst.schedule().horizon)?;
            let (phi, _) = phi_for(cfg, &inst, &trace)?;
            let reg = cfg
                .regularity
                .as_ref()
                .ok_or_else(|| Error::Config("cauchy-modulus needs a regularity section".into()))?;
            let zeros = inst.known_solutions().to_vec();
            let modulus = regularity_modulus(&inst, reg, &zeros)?;
            check_ball_precondition(&inst, &modulus)?;
            let eps = cfg
                .eps
                .clone()
                .unwrap_or_else(|| vec![Rational::new(1, 4).expect("static")]);
            let cap = cfg.cap();
            let theta = |e: &Rational| {
                theta_moudafi(e, inst.quant(), &phi, &modulus, reg.use_kappa_hat, &cap)
            };
            let mut c = check_cauchy_modulus(&trace, &theta, &eps)?;
            let prov = serde_json::to_value(modulus.provenance)?;
            c.provenance("regularity", prov.as_str().unwrap_or_default());
            out.push("cauchy-modulus", c, vacuous_ok);
            write_certificates(dir, &mut out, "certificates.json")?;
        }
    }
    Ok(out)
}

/// `n` points along the first axis of `X_0`.
fn axis_grid(inst: &ProblemInstance, n: usize) -> Result<Vec<Vector>> {
    let l = inst.quant().l.to_f64();
    (0..n)
        .map(|j| {
            let mut p = inst.x0().coords().to_vec();
            p[0] += -l + 2.0 * l * j as f64 / n as f64;
            Vector::new(p)
        })
        .collect()
}

fn regularity_modulus(
    inst: &ProblemInstance,
    reg: &RegularityConfig,
    zeros: &[Vector],
) -> Result<RegularityModulus> {
    match (&reg.linear, &reg.oracle_eps) {
        (Some(c), None) => {
            let m = RegularityModulus::analytic_linear(
                c.clone(),
                reg.center.clone(),
                reg.radius.clone(),
            );
            match reg.validate_points {
                Some(pts) => Ok(grid_validated(inst, reg.gap, m, zeros, pts)?.0),
                None => Ok(m),
            }
        }
        (None, Some(eps)) => {
            grid_regularity_oracle(inst, reg.gap, zeros, &reg.center, &reg.radius, eps)
        }
        _ => Err(Error::Config(
            "regularity needs exactly one of `linear` and `oracle_eps`".into(),
        )),
    }
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Config(format!("moduli-eval needs `{name}`")))
}

/// Evaluates one named modulus from the flat arguments of `cfg`.
pub fn moduli_eval(cfg: &RunConfig) -> Result<String> {
    let name = need(&cfg.modulus, "modulus")?;
    let k = || need(&cfg.k, "k").map(BigUint::from);
    let varpi = cfg.varpi.clone().unwrap_or(ModulusFn::Identity);
    let cap = cfg.cap();
    let value: NaturalBound = match name.as_str() {
        "delta" => NaturalBound::Finite(delta(&k()?)),
        "omega" => NaturalBound::Finite(omega(&k()?, need(&cfg.m_const, "M")?, &varpi)?),
        "varpi_prime" => {
            NaturalBound::Finite(varpi_prime(&k()?, need(&cfg.b_const, "B")?, &varpi)?)
        }
        "kappa" => NaturalBound::Finite(kappa(
            &k()?,
            need(&cfg.m_const, "M")?,
            need(&cfg.b_const, "B")?,
        )),
        "kappa_hat" => NaturalBound::Finite(kappa_hat(
            &k()?,
            need(&cfg.m_const, "M")?,
            need(&cfg.b_const, "B")?,
            cfg.b_prime.unwrap_or(0),
            &varpi,
        )?),
        "chi" => {
            let ea = exp_upper(&need(&cfg.a_const, "A")?)?;
            chi(
                &BigUint::from(need(&cfg.r, "r")?),
                &BigUint::from(need(&cfg.n, "n")?),
                &BigUint::from(need(&cfg.m, "m")?),
                &ea,
                &cap,
            )?
        }
        "P" => {
            let d = need(&cfg.d, "d")?;
            total_boundedness_p(
                &k()?,
                &exp_upper(&need(&cfg.a_const, "A")?)?,
                &sqrt_upper(d)?,
                &need(&cfg.l, "L")?,
                d,
                &cap,
            )?
        }
        "psi" | "psi_prime" => {
            let inst = cfg
                .instance(Task::ModuliEval)
                .or_else(|_| cfg.instance(Task::Run))?;
            let phi = need(&cfg.phi_search, "phi_search")?;
            let g = Counterfunction::new(cfg.g.clone().unwrap_or(ModulusFn::affine(1, 1)));
            if name == "psi" {
                psi(&k()?, &g, inst.quant(), &phi, &cap)?
            } else {
                psi_prime(&k()?, &g, inst.quant(), &phi, &cap)?
            }
        }
        other => return Err(Error::Config(format!("unknown modulus `{other}`"))),
    };
    Ok(value.to_string())
}

/// Writes the summary of `out` to `w`.
pub fn report(out: &Outcome, w: &mut dyn Write) -> Result<()> {
    for l in &out.lines {
        writeln!(w, "{l}")?;
    }
    if !out.rows.is_empty() {
        write!(w, "{}", out.table())?;
    }
    for f in &out.files {
        writeln!(w, "wrote {}", f.display())?;
    }
    Ok(())
}

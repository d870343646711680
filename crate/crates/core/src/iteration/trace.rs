use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ProblemInstance;
use crate::error::{Error, Result};
use crate::operators::Vector;

/// Agreement required between stored and recomputed trace data.
pub const INTEGRITY_TOL: f64 = 1e-12;

/// The iterates `x_0..x_N` with the parameters and residuals of each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    points: Vec<Vector>,
    lambdas: Vec<f64>,
    mus: Vec<f64>,
    residuals: Vec<f64>,
}

/// One JSONL line; the final point has no step data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub n: usize,
    pub x: Vec<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub residual: Option<f64>,
}

impl Trace {
    pub fn from_parts(
        points: Vec<Vector>,
        lambdas: Vec<f64>,
        mus: Vec<f64>,
        residuals: Vec<f64>,
    ) -> Result<Self> {
        let steps = residuals.len();
        if points.len() != steps + 1 || lambdas.len() != steps || mus.len() != steps {
            return Err(Error::Invariant(format!(
                "trace lengths disagree: {} points, {} lambdas, {} mus, {} residuals",
                points.len(),
                lambdas.len(),
                mus.len(),
                steps
            )));
        }
        if let Some(p) = points.iter().find(|p| p.dim() != points[0].dim()) {
            return Err(Error::DimensionMismatch {
                expected: points[0].dim(),
                found: p.dim(),
            });
        }
        Ok(Trace {
            points,
            lambdas,
            mus,
            residuals,
        })
    }

    /// A bare sequence of points, for checks that only look at the iterates.
    pub fn from_points(points: Vec<Vector>) -> Result<Self> {
        let steps = points.len().saturating_sub(1);
        let residuals = points.windows(2).map(|w| w[0].dist(&w[1])).collect();
        Trace::from_parts(points, vec![1.0; steps], vec![1.0; steps], residuals)
    }

    /// Number of steps `N`.
    pub fn steps(&self) -> usize {
        self.residuals.len()
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mus(&self) -> &[f64] {
        &self.mus
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Replaces one point, leaving the step data as recorded.
    pub fn perturb_point(&mut self, index: usize, delta: &Vector) -> Result<()> {
        let p = self
            .points
            .get_mut(index)
            .ok_or_else(|| Error::Invariant(format!("no point {index} in trace")))?;
        delta.check_dim(p.dim())?;
        *p = (&*p + delta).ensure_finite()?;
        Ok(())
    }

    /// First disagreement between the stored data and a recomputation under
    /// `inst`, if any.
    pub fn integrity_issue(&self, inst: &ProblemInstance) -> Result<Option<String>> {
        for n in 0..self.steps() {
            let lambda = inst.schedule().lambda(n)?;
            let mu = inst.schedule().mu(n)?;
            if lambda != self.lambdas[n] || mu != self.mus[n] {
                return Ok(Some(format!(
                    "parameters at step {n} differ from the schedule"
                )));
            }
            let r = self.points[n].dist(&self.points[n + 1]) / mu;
            if (r - self.residuals[n]).abs() > INTEGRITY_TOL * r.abs().max(1.0) {
                return Ok(Some(format!(
                    "residual {n} is {} but the points give {r}",
                    self.residuals[n]
                )));
            }
            let next = match inst.step_with(&self.points[n], lambda, mu) {
                Ok(v) => v,
                Err(e) => return Ok(Some(format!("step {n} cannot be recomputed: {e}"))),
            };
            if next.dist(&self.points[n + 1]) > INTEGRITY_TOL {
                return Ok(Some(format!(
                    "point {} does not follow from point {n}",
                    n + 1
                )));
            }
        }
        if self.points[0] != *inst.x0() {
            return Ok(Some("first point is not x0".into()));
        }
        Ok(None)
    }

    /// `diam {x_n}`; exact in one dimension and for short traces, otherwise
    /// the upper bound `2 max ||x_n - x_0||`.
    pub fn diameter(&self) -> f64 {
        if self.dim() == 1 {
            let (lo, hi) = self
                .points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |a, p| {
                    (a.0.min(p.coords()[0]), a.1.max(p.coords()[0]))
                });
            return hi - lo;
        }
        if self.points.len() <= 4096 {
            let mut best: f64 = 0.0;
            for (i, p) in self.points.iter().enumerate() {
                for q in &self.points[i + 1..] {
                    best = best.max(p.dist(q));
                }
            }
            return best;
        }
        let x0 = &self.points[0];
        2.0 * self.points.iter().map(|p| p.dist(x0)).fold(0.0, f64::max)
    }

    pub fn records(&self) -> impl Iterator<Item = TraceRecord> + '_ {
        self.points
            .iter()
            .enumerate()
            .map(move |(n, p)| TraceRecord {
                n,
                x: p.coords().to_vec(),
                lambda: self.lambdas.get(n).copied(),
                mu: self.mus.get(n).copied(),
                residual: self.residuals.get(n).copied(),
            })
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for r in self.records() {
            serde_json::to_writer(&mut out, &r)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        let d = self.dim();
        let header: Vec<String> = std::iter::once("n".to_string())
            .chain((0..d).map(|i| format!("x{i}")))
            .chain(["lambda", "mu", "residual"].map(String::from))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in self.records() {
            let xs: Vec<String> = r.x.iter().map(f64::to_string).collect();
            writeln!(
                out,
                "{},{},{},{},{}",
                r.n,
                xs.join(","),
                opt(r.lambda),
                opt(r.mu),
                opt(r.residual)
            )?;
        }
        Ok(())
    }

    /// SHA-256 over the bit patterns of all stored values.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for p in &self.points {
            for c in p.coords() {
                h.update(c.to_bits().to_le_bytes());
            }
        }
        for seq in [&self.lambdas, &self.mus, &self.residuals] {
            for v in seq.iter() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iteration::tests::dc_instance;

    #[test]
    fn jsonl_has_one_line_per_point() {
        let tr = dc_instance(2.0, 100).run(100).unwrap();
        let mut buf = Vec::new();
        tr.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 101);
        let first: TraceRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first.n, 0);
        assert_eq!(first.lambda, Some(1.0));
        let last: TraceRecord = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        assert_eq!(last.residual, None);
    }

    #[test]
    fn integrity_detects_corruption() {
        let inst = dc_instance(2.0, 50);
        let mut tr = inst.run(50).unwrap();
        assert_eq!(tr.integrity_issue(&inst).unwrap(), None);
        tr.perturb_point(20, &Vector::scalar(1e-3).unwrap())
            .unwrap();
        assert!(tr.integrity_issue(&inst).unwrap().is_some());
    }

    #[test]
    fn csv_header() {
        let tr = dc_instance(2.0, 3).run(3).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,x0,lambda,mu,residual\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn digest_is_stable() {
        let inst = dc_instance(2.0, 20);
        assert_eq!(
            inst.run(20).unwrap().digest(),
            inst.run(20).unwrap().digest()
        );
        assert_ne!(
            inst.run(20).unwrap().digest(),
            inst.run(19).unwrap().digest()
        );
    }
}

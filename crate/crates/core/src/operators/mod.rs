//! Maximally monotone operators on R^d with closed-form resolvents.
//!
//! The catalog covers the cases whose resolvents, value sets and minimal-norm
//! selections are all exact: positive-semidefinite affine maps, the
//! subdifferential of the l1 norm, normal cones of boxes and the zero map.

mod value_set;
mod vector;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use value_set::{hstar_check, Interval, ValueSet};
pub use vector::Vector;

/// Tolerance for symmetry and eigenvalue checks of affine operators.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance for graph membership and monotonicity spot-checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// `x -> A x + b` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    matrix: DMatrix<f64>,
    offset: Vector,
    spectral_norm: f64,
}

impl AffineMap {
    /// `rows` is the matrix in row-major order.
    pub fn new(rows: Vec<Vec<f64>>, offset: Vector) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::InvalidOperator("empty matrix".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::InvalidOperator(format!(
                "matrix is not square: row of length {} in a {d}x{d} matrix",
                bad.len()
            )));
        }
        offset.check_dim(d)?;
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidOperator("non-finite matrix entry".into()));
        }
        let matrix = DMatrix::from_fn(d, d, |i, j| rows[i][j]);
        for i in 0..d {
            for j in 0..i {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > PSD_TOL {
                    return Err(Error::InvalidOperator(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let eig = matrix.clone().symmetric_eigen();
        let min_eig = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidOperator(format!(
                "matrix not positive semidefinite (eigenvalue {min_eig})"
            )));
        }
        let spectral_norm = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Ok(AffineMap {
            matrix,
            offset,
            spectral_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.offset.dim()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|i| (0..d).map(|j| self.matrix[(i, j)]).collect())
            .collect()
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    /// Largest eigenvalue magnitude of `A`.
    pub fn spectral_norm(&self) -> f64 {
        self.spectral_norm
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        let xv = DVector::from_column_slice(x.coords());
        let y = &self.matrix * xv;
        Vector::from_raw(
            y.iter()
                .zip(self.offset.coords())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Solves `(I + lambda A) J = x - lambda b`.
    fn resolvent(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        let rhs = x
            .coords()
            .iter()
            .zip(self.offset.coords())
            .map(|(xi, bi)| xi - lambda * bi);
        self.solve_shifted(lambda, rhs)
    }

    /// `T_lambda x = (I + lambda A)^{-1} (A x + b)`, without the cancellation
    /// of `(x - J x) / lambda`.
    fn yosida(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        let ax = self.apply(x);
        self.solve_shifted(lambda, ax.coords().iter().copied())
    }

    fn solve_shifted(&self, lambda: f64, rhs: impl Iterator<Item = f64>) -> Result<Vector> {
        let d = self.dim();
        let system = DMatrix::identity(d, d) + &self.matrix * lambda;
        let rhs = DVector::from_iterator(d, rhs);
        // LU rather than Cholesky: exact on diagonal systems, where the square
        // roots of Cholesky are not
        let sol = system.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        Vector::new(sol.iter().cloned().collect()).map_err(|_| Error::SingularSystem)
    }
}

/// An axis-aligned box `[lo, hi]` with `lo <= hi` coordinatewise.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lo: Vector,
    hi: Vector,
}

impl BoxSet {
    pub fn new(lo: Vector, hi: Vector) -> Result<Self> {
        hi.check_dim(lo.dim())?;
        if let Some(i) = (0..lo.dim()).find(|&i| lo.coords()[i] > hi.coords()[i]) {
            return Err(Error::InvalidOperator(format!(
                "box has lo > hi in coordinate {i}"
            )));
        }
        Ok(BoxSet { lo, hi })
    }

    pub fn lo(&self) -> &Vector {
        &self.lo
    }

    pub fn hi(&self) -> &Vector {
        &self.hi
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, x: &Vector) -> bool {
        x.coords()
            .iter()
            .zip(self.lo.coords().iter().zip(self.hi.coords()))
            .all(|(&c, (&l, &h))| l <= c && c <= h)
    }

    pub fn contains_box(&self, other: &BoxSet) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn project(&self, x: &Vector) -> Vector {
        Vector::from_raw(
            x.coords()
                .iter()
                .zip(self.lo.coords().iter().zip(self.hi.coords()))
                .map(|(&c, (&l, &h))| c.max(l).min(h))
                .collect(),
        )
    }
}

/// A catalog maximally monotone operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorJson", into = "OperatorJson")]
pub enum OperatorSpec {
    AffinePsd(AffineMap),
    /// Subdifferential of `x -> sum_i |x_i|`.
    SubdiffAbsSum {
        dim: usize,
    },
    NormalConeBox(BoxSet),
    Zero {
        dim: usize,
    },
}

/// The domain of an operator.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Whole { dim: usize },
    Box(BoxSet),
}

impl Domain {
    pub fn contains(&self, x: &Vector) -> bool {
        match self {
            Domain::Whole { dim } => x.dim() == *dim,
            Domain::Box(b) => x.dim() == b.dim() && b.contains(x),
        }
    }

    /// Structural inclusion `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Domain) -> bool {
        match (self, other) {
            (_, Domain::Whole { dim }) => self.dim() == *dim,
            (Domain::Box(a), Domain::Box(b)) => a.dim() == b.dim() && b.contains_box(a),
            (Domain::Whole { .. }, Domain::Box(_)) => false,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Whole { dim } => *dim,
            Domain::Box(b) => b.dim(),
        }
    }

    /// Projection onto the closure of the domain.
    pub fn project(&self, x: &Vector) -> Vector {
        match self {
            Domain::Whole { .. } => x.clone(),
            Domain::Box(b) => b.project(x),
        }
    }
}

impl OperatorSpec {
    pub fn affine_psd(rows: Vec<Vec<f64>>, offset: Vector) -> Result<Self> {
        Ok(OperatorSpec::AffinePsd(AffineMap::new(rows, offset)?))
    }

    pub fn subdiff_abs(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidOperator("dimension must be >= 1".into()));
        }
        Ok(OperatorSpec::SubdiffAbsSum { dim })
    }

    pub fn normal_cone_box(lo: Vector, hi: Vector) -> Result<Self> {
        Ok(OperatorSpec::NormalConeBox(BoxSet::new(lo, hi)?))
    }

    pub fn zero(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidOperator("dimension must be >= 1".into()));
        }
        Ok(OperatorSpec::Zero { dim })
    }

    /// `x -> x` on R^d.
    pub fn identity(dim: usize) -> Result<Self> {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        OperatorSpec::affine_psd(rows, Vector::zeros(dim))
    }

    pub fn name(&self) -> &'static str {
        match self {
            OperatorSpec::AffinePsd(_) => "affine_psd",
            OperatorSpec::SubdiffAbsSum { .. } => "subdiff_abs",
            OperatorSpec::NormalConeBox(_) => "normal_cone_box",
            OperatorSpec::Zero { .. } => "zero",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            OperatorSpec::AffinePsd(a) => a.dim(),
            OperatorSpec::SubdiffAbsSum { dim } | OperatorSpec::Zero { dim } => *dim,
            OperatorSpec::NormalConeBox(b) => b.dim(),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            OperatorSpec::NormalConeBox(b) => Domain::Box(b.clone()),
            other => Domain::Whole { dim: other.dim() },
        }
    }

    fn check_point(&self, x: &Vector) -> Result<()> {
        x.check_dim(self.dim())?;
        if !self.domain().contains(x) {
            return Err(Error::Domain {
                operator: self.name(),
                detail: format!("{x} is outside the box"),
            });
        }
        Ok(())
    }

    /// The value set `T(x)`.
    pub fn evaluate(&self, x: &Vector) -> Result<ValueSet> {
        self.check_point(x)?;
        let intervals = match self {
            OperatorSpec::AffinePsd(a) => return Ok(ValueSet::singleton(&a.apply(x))),
            OperatorSpec::Zero { dim } => vec![Interval::point(0.0); *dim],
            OperatorSpec::SubdiffAbsSum { .. } => x
                .coords()
                .iter()
                .map(|&c| {
                    if c > 0.0 {
                        Interval::point(1.0)
                    } else if c < 0.0 {
                        Interval::point(-1.0)
                    } else {
                        Interval::new(-1.0, 1.0).expect("static interval")
                    }
                })
                .collect(),
            OperatorSpec::NormalConeBox(b) => x
                .coords()
                .iter()
                .zip(b.lo.coords().iter().zip(b.hi.coords()))
                .map(|(&c, (&l, &h))| {
                    let lo = if c == l { f64::NEG_INFINITY } else { 0.0 };
                    let hi = if c == h { f64::INFINITY } else { 0.0 };
                    Interval::new(lo, hi).expect("cone interval")
                })
                .collect(),
        };
        ValueSet::new(intervals)
    }

    /// `J_lambda x = (Id + lambda T)^{-1} x`.
    pub fn resolvent(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveParameter {
                name: "lambda",
                value: lambda,
            });
        }
        x.check_dim(self.dim())?;
        match self {
            OperatorSpec::AffinePsd(a) => a.resolvent(lambda, x),
            OperatorSpec::Zero { .. } => Ok(x.clone()),
            OperatorSpec::SubdiffAbsSum { .. } => Ok(Vector::from_raw(
                x.coords()
                    .iter()
                    .map(|&c| c.signum() * (c.abs() - lambda).max(0.0))
                    .collect(),
            )),
            OperatorSpec::NormalConeBox(b) => Ok(b.project(x)),
        }
    }

    /// Yosida approximate `T_lambda x = (x - J_lambda x) / lambda`, in closed
    /// form where the difference would cancel.
    pub fn yosida(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        let j = self.resolvent(lambda, x)?;
        match self {
            OperatorSpec::AffinePsd(a) => a.yosida(lambda, x),
            OperatorSpec::Zero { dim } => Ok(Vector::zeros(*dim)),
            OperatorSpec::SubdiffAbsSum { .. } => Ok(Vector::from_raw(
                x.coords()
                    .iter()
                    .map(|&c| (c / lambda).clamp(-1.0, 1.0))
                    .collect(),
            )),
            OperatorSpec::NormalConeBox(_) => (x - &j).scale(1.0 / lambda).ensure_finite(),
        }
    }

    /// `T°x`, the element of minimal norm in `T(x)`.
    pub fn minimal_selection(&self, x: &Vector) -> Result<Vector> {
        Ok(self.evaluate(x)?.min_norm_element())
    }

    /// `‖J_γ x − J_{λγ}(λx + (1−λ)J_γ x)‖`, zero in exact arithmetic.
    pub fn resolvent_identity_residual(&self, gamma: f64, lambda: f64, x: &Vector) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveParameter {
                name: "lambda",
                value: lambda,
            });
        }
        let j = self.resolvent(gamma, x)?;
        let inner = x.scale(lambda).axpy(1.0 - lambda, &j);
        let rhs = self.resolvent(lambda * gamma, &inner)?;
        Ok(j.dist(&rhs))
    }

    /// Upper bound on `sup { ‖T°x‖ : ‖x − center‖ ≤ radius, x ∈ cl dom T }`.
    pub fn min_norm_bound_on_ball(&self, center: &Vector, radius: f64) -> f64 {
        match self {
            OperatorSpec::AffinePsd(a) => {
                a.spectral_norm() * (center.norm() + radius) + a.offset().norm()
            }
            OperatorSpec::Zero { .. } | OperatorSpec::NormalConeBox(_) => 0.0,
            OperatorSpec::SubdiffAbsSum { dim } => (*dim as f64).sqrt(),
        }
    }
}

/// Checks `⟨x − y, u − v⟩ ≥ −tol` over representative selections of the
/// value sets at every pair of `points` that lie in the domain.
pub fn spot_check_monotone(op: &OperatorSpec, points: &[Vector]) -> Result<Option<(usize, usize)>> {
    let dom = op.domain();
    let pts: Vec<(usize, &Vector)> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| dom.contains(p))
        .collect();
    let selections: Vec<Vec<Vector>> = pts
        .iter()
        .map(|(_, p)| op.evaluate(p).map(|vs| vs.representatives(1e3)))
        .collect::<Result<_>>()?;
    for (a, (ia, xa)) in pts.iter().enumerate() {
        for (b, (ib, xb)) in pts.iter().enumerate().skip(a + 1) {
            let diff = *xa - *xb;
            for u in &selections[a] {
                for v in &selections[b] {
                    if diff.dot(&(u - v)) < -MEMBERSHIP_TOL {
                        return Ok(Some((*ia, *ib)));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum OperatorJson {
    AffinePsd {
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
    SubdiffAbs {
        dim: usize,
    },
    NormalConeBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Zero {
        dim: usize,
    },
}

impl TryFrom<OperatorJson> for OperatorSpec {
    type Error = Error;

    fn try_from(j: OperatorJson) -> Result<Self> {
        match j {
            OperatorJson::AffinePsd { matrix, offset } => {
                OperatorSpec::affine_psd(matrix, Vector::new(offset)?)
            }
            OperatorJson::SubdiffAbs { dim } => OperatorSpec::subdiff_abs(dim),
            OperatorJson::NormalConeBox { lo, hi } => {
                OperatorSpec::normal_cone_box(Vector::new(lo)?, Vector::new(hi)?)
            }
            OperatorJson::Zero { dim } => OperatorSpec::zero(dim),
        }
    }
}

impl From<OperatorSpec> for OperatorJson {
    fn from(op: OperatorSpec) -> Self {
        match op {
            OperatorSpec::AffinePsd(a) => OperatorJson::AffinePsd {
                matrix: a.rows(),
                offset: a.offset.into_inner(),
            },
            OperatorSpec::SubdiffAbsSum { dim } => OperatorJson::SubdiffAbs { dim },
            OperatorSpec::NormalConeBox(b) => OperatorJson::NormalConeBox {
                lo: b.lo.into_inner(),
                hi: b.hi.into_inner(),
            },
            OperatorSpec::Zero { dim } => OperatorJson::Zero { dim },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn scalar_affine(a: f64, b: f64) -> OperatorSpec {
        OperatorSpec::affine_psd(vec![vec![a]], v(&[b])).unwrap()
    }

    fn unit_box() -> OperatorSpec {
        OperatorSpec::normal_cone_box(v(&[0.0]), v(&[1.0])).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let abs = OperatorSpec::subdiff_abs(1).unwrap();
        let at0 = abs.evaluate(&v(&[0.0])).unwrap();
        assert_eq!(at0.intervals()[0], Interval::new(-1.0, 1.0).unwrap());
        let at = abs.evaluate(&v(&[0.3])).unwrap();
        assert!(at.is_singleton());
        assert_eq!(at.intervals()[0].lo(), 1.0);
        let id = OperatorSpec::identity(2).unwrap();
        assert_eq!(
            id.evaluate(&v(&[2.0, 3.0])).unwrap(),
            ValueSet::singleton(&v(&[2.0, 3.0]))
        );
    }

    #[test]
    fn evaluate_outside_box_is_domain_error() {
        assert!(matches!(
            unit_box().evaluate(&v(&[1.5])),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn normal_cone_values() {
        let b = unit_box();
        let lo = b.evaluate(&v(&[0.0])).unwrap().intervals()[0];
        assert_eq!((lo.lo(), lo.hi()), (f64::NEG_INFINITY, 0.0));
        let hi = b.evaluate(&v(&[1.0])).unwrap().intervals()[0];
        assert_eq!((hi.lo(), hi.hi()), (0.0, f64::INFINITY));
        assert!(b.evaluate(&v(&[0.5])).unwrap().is_singleton());
    }

    #[test]
    fn resolvent_examples() {
        let abs = OperatorSpec::subdiff_abs(1).unwrap();
        assert_eq!(abs.resolvent(1.0, &v(&[3.0])).unwrap().coords(), &[2.0]);
        let j = scalar_affine(1.0, 0.0).resolvent(1.0, &v(&[2.0])).unwrap();
        assert!((j.coords()[0] - 1.0).abs() < 1e-12);
        assert_eq!(
            unit_box().resolvent(5.0, &v(&[-3.0])).unwrap().coords(),
            &[0.0]
        );
    }

    #[test]
    fn resolvent_rejects_nonpositive_lambda() {
        let abs = OperatorSpec::subdiff_abs(1).unwrap();
        for bad in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                abs.resolvent(bad, &v(&[1.0])),
                Err(Error::NonPositiveParameter { .. })
            ));
        }
    }

    #[test]
    fn yosida_examples() {
        assert_eq!(
            scalar_affine(1.0, 0.0)
                .yosida(1.0, &v(&[2.0]))
                .unwrap()
                .coords(),
            &[1.0]
        );
        let abs = OperatorSpec::subdiff_abs(1).unwrap();
        assert_eq!(abs.yosida(1.0, &v(&[3.0])).unwrap().coords(), &[1.0]);
        assert_eq!(
            scalar_affine(1.0, 0.0)
                .yosida(1.0, &v(&[0.0]))
                .unwrap()
                .coords(),
            &[0.0]
        );
    }

    #[test]
    fn minimal_selection_examples() {
        let abs = OperatorSpec::subdiff_abs(1).unwrap();
        assert_eq!(abs.minimal_selection(&v(&[0.0])).unwrap().coords(), &[0.0]);
        assert_eq!(abs.minimal_selection(&v(&[0.3])).unwrap().coords(), &[1.0]);
        assert_eq!(
            unit_box().minimal_selection(&v(&[0.0])).unwrap().coords(),
            &[0.0]
        );
        assert!(unit_box().minimal_selection(&v(&[2.0])).is_err());
    }

    #[test]
    fn resolvent_identity_examples() {
        let abs = OperatorSpec::subdiff_abs(1).unwrap();
        assert_eq!(
            abs.resolvent_identity_residual(0.7, 1.0, &v(&[3.3]))
                .unwrap(),
            0.0
        );
        let id = scalar_affine(1.0, 0.0);
        // J_2(4) = 4/3 and J_1(2 + 2/3) = 4/3
        assert!(
            id.resolvent_identity_residual(2.0, 0.5, &v(&[4.0]))
                .unwrap()
                <= 1e-12
        );
        // J_1(5) = 4 and J_3(15 - 8) = soft(7, 3) = 4
        assert!(
            abs.resolvent_identity_residual(1.0, 3.0, &v(&[5.0]))
                .unwrap()
                <= 1e-12
        );
    }

    #[test]
    fn affine_construction_checks() {
        assert!(
            OperatorSpec::affine_psd(vec![vec![1.0, 2.0], vec![0.0, 1.0]], Vector::zeros(2))
                .is_err()
        );
        assert!(OperatorSpec::affine_psd(vec![vec![-1.0]], Vector::zeros(1)).is_err());
        assert!(OperatorSpec::affine_psd(vec![vec![1.0, 0.0]], Vector::zeros(1)).is_err());
        assert!(OperatorSpec::affine_psd(vec![vec![0.0]], Vector::zeros(1)).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let src = r#"{"kind":"affine_psd","matrix":[[2.0,1.0],[1.0,2.0]],"offset":[0.5,-1.0]}"#;
        let op: OperatorSpec = serde_json::from_str(src).unwrap();
        let back: OperatorSpec =
            serde_json::from_str(&serde_json::to_string(&op).unwrap()).unwrap();
        assert_eq!(op, back);
        let bad = r#"{"kind":"affine_psd","matrix":[[1.0,3.0],[3.0,1.0]],"offset":[0,0]}"#;
        assert!(serde_json::from_str::<OperatorSpec>(bad).is_err());
        let abs: OperatorSpec = serde_json::from_str(r#"{"kind":"subdiff_abs","dim":3}"#).unwrap();
        assert_eq!(abs.dim(), 3);
        assert!(serde_json::from_str::<OperatorSpec>(r#"{"kind":"zero","dim":1,"x":2}"#).is_err());
    }

    #[test]
    fn domain_inclusion() {
        let big = OperatorSpec::normal_cone_box(v(&[-2.0]), v(&[2.0]))
            .unwrap()
            .domain();
        let small = unit_box().domain();
        assert!(small.is_subset_of(&big));
        assert!(!big.is_subset_of(&small));
        assert!(big.is_subset_of(&Domain::Whole { dim: 1 }));
        assert!(!Domain::Whole { dim: 1 }.is_subset_of(&big));
    }

    #[test]
    fn monotone_spot_check_passes_catalog() {
        let pts: Vec<Vector> = [-1.5, -1.0, -0.2, 0.0, 0.0, 0.4, 1.0, 2.0]
            .iter()
            .map(|&c| v(&[c]))
            .collect();
        for op in [
            scalar_affine(2.0, -1.0),
            OperatorSpec::subdiff_abs(1).unwrap(),
            unit_box(),
            OperatorSpec::zero(1).unwrap(),
        ] {
            assert_eq!(
                spot_check_monotone(&op, &pts).unwrap(),
                None,
                "{}",
                op.name()
            );
        }
    }
}

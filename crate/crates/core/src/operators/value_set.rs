//! Closed convex value sets represented as products of intervals.
//!
//! Interval endpoints may be infinite (normal cones of a box are unbounded), so
//! every distance below is computed in closed form per coordinate and the
//! Euclidean quantities are assembled from the coordinate contributions.

use crate::error::{Error, Result};
use crate::operators::Vector;

/// A closed interval `[lo, hi]`; `lo` may be `-inf`, `hi` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidValueSet(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.max(self.lo).min(self.hi)
    }

    /// Distance from `v` to the interval.
    pub fn dist(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }

    /// `sup_{p in self} dist(p, other)`, possibly `+inf`.
    pub fn excess_over(&self, other: &Interval) -> f64 {
        let below = if self.lo == f64::NEG_INFINITY {
            if other.lo == f64::NEG_INFINITY {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            other.lo - self.lo
        };
        let above = if self.hi == f64::INFINITY {
            if other.hi == f64::INFINITY {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.hi - other.hi
        };
        below.max(above).max(0.0)
    }

    /// Minkowski difference `self - other`.
    pub fn minus(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo - other.hi,
            hi: self.hi - other.lo,
        }
    }
}

/// A nonempty product of closed intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSet {
    intervals: Vec<Interval>,
}

impl ValueSet {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidValueSet("zero-dimensional value set".into()));
        }
        Ok(ValueSet { intervals })
    }

    pub fn singleton(v: &Vector) -> Self {
        ValueSet {
            intervals: v.coords().iter().map(|&c| Interval::point(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_singleton(&self) -> bool {
        self.intervals.iter().all(Interval::is_degenerate)
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_bounded)
    }

    /// Euclidean projection of `v` onto the set.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        v.check_dim(self.dim())?;
        Ok(Vector::from_raw(
            self.intervals
                .iter()
                .zip(v.coords())
                .map(|(iv, &c)| iv.clamp(c))
                .collect(),
        ))
    }

    /// The element of minimal norm, `P_set(0)`.
    pub fn min_norm_element(&self) -> Vector {
        Vector::from_raw(self.intervals.iter().map(|iv| iv.clamp(0.0)).collect())
    }

    pub fn dist(&self, v: &Vector) -> Result<f64> {
        v.check_dim(self.dim())?;
        Ok(self
            .intervals
            .iter()
            .zip(v.coords())
            .map(|(iv, &c)| {
                let d = iv.dist(c);
                d * d
            })
            .sum::<f64>()
            .sqrt())
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> Result<bool> {
        Ok(self.dist(v)? <= tol)
    }

    /// `sup_{p in self} dist(p, other)`; separable over coordinates.
    pub fn excess_over(&self, other: &ValueSet) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .intervals
            .iter()
            .zip(&other.intervals)
            .map(|(p, q)| {
                let e = p.excess_over(q);
                e * e
            })
            .sum::<f64>()
            .sqrt())
    }

    /// Minkowski difference `self - other`.
    pub fn minus(&self, other: &ValueSet) -> Result<ValueSet> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(ValueSet {
            intervals: self
                .intervals
                .iter()
                .zip(&other.intervals)
                .map(|(a, b)| a.minus(b))
                .collect(),
        })
    }

    /// A few points of the set: the minimal-norm element, both corners and the
    /// centre, with infinite endpoints replaced by `clip`.
    pub fn representatives(&self, clip: f64) -> Vec<Vector> {
        let pick =
            |f: &dyn Fn(&Interval) -> f64| Vector::from_raw(self.intervals.iter().map(f).collect());
        let lo = |iv: &Interval| {
            if iv.lo.is_finite() {
                iv.lo
            } else {
                iv.clamp(-clip)
            }
        };
        let hi = |iv: &Interval| {
            if iv.hi.is_finite() {
                iv.hi
            } else {
                iv.clamp(clip)
            }
        };
        let mid = |iv: &Interval| 0.5 * (lo(iv) + hi(iv));
        vec![self.min_norm_element(), pick(&lo), pick(&hi), pick(&mid)]
    }
}

/// The Hausdorff-like predicate: every point of `p` lies within `eps` of `q`.
pub fn hstar_check(p: &ValueSet, q: &ValueSet, eps: f64) -> Result<bool> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "eps",
            value: eps,
        });
    }
    Ok(p.excess_over(q)? <= eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: f64, hi: f64) -> ValueSet {
        ValueSet::new(vec![Interval::new(lo, hi).unwrap()]).unwrap()
    }

    #[test]
    fn hstar_examples() {
        assert!(hstar_check(&iv(0.5, 0.5), &iv(-1.0, 1.0), 0.0).unwrap());
        assert!(!hstar_check(&iv(-1.0, 1.0), &iv(0.0, 0.0), 0.5).unwrap());
        assert!(hstar_check(&iv(-1.0, 1.0), &iv(0.0, 0.0), 1.0).unwrap());
    }

    #[test]
    fn hstar_unbounded() {
        let ray = iv(f64::NEG_INFINITY, 0.0);
        assert!(!hstar_check(&ray, &iv(-1.0, 0.0), 100.0).unwrap());
        assert!(hstar_check(&ray, &iv(f64::NEG_INFINITY, 1.0), 0.0).unwrap());
        assert!(hstar_check(&iv(-3.0, -2.0), &ray, 0.0).unwrap());
    }

    #[test]
    fn hstar_dimension_mismatch() {
        let two = ValueSet::new(vec![Interval::point(0.0); 2]).unwrap();
        assert!(matches!(
            hstar_check(&iv(0.0, 0.0), &two, 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn excess_is_euclidean() {
        let p =
            ValueSet::new(vec![Interval::new(0.0, 3.0).unwrap(), Interval::point(4.0)]).unwrap();
        let q = ValueSet::new(vec![Interval::point(0.0), Interval::point(0.0)]).unwrap();
        assert_eq!(p.excess_over(&q).unwrap(), 5.0);
    }

    #[test]
    fn rejects_bad_intervals() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(Interval::new(f64::INFINITY, f64::INFINITY).is_err());
        assert!(Interval::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn minkowski_difference() {
        let d = iv(2.0, 2.0).minus(&iv(-1.0, 1.0)).unwrap();
        assert_eq!(d.intervals()[0], Interval::new(1.0, 3.0).unwrap());
        let cone = iv(f64::NEG_INFINITY, 0.0);
        let d = iv(1.0, 1.0).minus(&cone).unwrap();
        assert_eq!(d.intervals()[0].lo(), 1.0);
        assert_eq!(d.intervals()[0].hi(), f64::INFINITY);
    }
}

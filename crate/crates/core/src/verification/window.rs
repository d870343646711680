use crate::operators::Vector;

/// Exact diameter queries over windows `[lo, hi]` of a stored sequence.
///
/// One-dimensional sequences use sparse min/max tables. Higher dimensions
/// bracket the diameter by the distance to the window's first point and fall
/// back to a pairwise scan only when the bracket is inconclusive.
pub(crate) struct Windows<'a> {
    points: &'a [Vector],
    mins: Vec<Vec<f64>>,
    maxs: Vec<Vec<f64>>,
}

impl<'a> Windows<'a> {
    pub(crate) fn new(points: &'a [Vector]) -> Self {
        let mut w = Windows {
            points,
            mins: Vec::new(),
            maxs: Vec::new(),
        };
        if points.first().is_some_and(|p| p.dim() == 1) {
            let base: Vec<f64> = points.iter().map(|p| p.coords()[0]).collect();
            w.mins.push(base.clone());
            w.maxs.push(base);
            let mut span = 1;
            while 2 * span <= points.len() {
                let (pm, px) = (w.mins.last().unwrap(), w.maxs.last().unwrap());
                let len = points.len() - 2 * span + 1;
                let nm = (0..len).map(|i| pm[i].min(pm[i + span])).collect();
                let nx = (0..len).map(|i| px[i].max(px[i + span])).collect();
                w.mins.push(nm);
                w.maxs.push(nx);
                span *= 2;
            }
        }
        w
    }

    fn range_1d(&self, lo: usize, hi: usize) -> (f64, f64) {
        let level = (usize::BITS - 1 - (hi - lo + 1).leading_zeros()) as usize;
        let other = hi + 1 - (1 << level);
        (
            self.mins[level][lo].min(self.mins[level][other]),
            self.maxs[level][lo].max(self.maxs[level][other]),
        )
    }

    /// `diam {x_lo, ..., x_hi} <= thr`
    pub(crate) fn diam_at_most(&self, lo: usize, hi: usize, thr: f64) -> bool {
        if !self.mins.is_empty() {
            let (a, b) = self.range_1d(lo, hi);
            return b - a <= thr;
        }
        let window = &self.points[lo..=hi];
        let anchor = window
            .iter()
            .map(|p| p.dist(&window[0]))
            .fold(0.0, f64::max);
        if anchor > thr {
            return false;
        }
        if 2.0 * anchor <= thr {
            return true;
        }
        window
            .iter()
            .enumerate()
            .all(|(i, p)| window[i + 1..].iter().all(|q| p.dist(q) <= thr))
    }

    /// Exact diameter in one dimension; `None` otherwise.
    pub(crate) fn diam_1d(&self, lo: usize, hi: usize) -> Option<f64> {
        (!self.mins.is_empty()).then(|| {
            let (a, b) = self.range_1d(lo, hi);
            b - a
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(points: &[Vector], lo: usize, hi: usize) -> f64 {
        let mut best: f64 = 0.0;
        for i in lo..=hi {
            for j in i..=hi {
                best = best.max(points[i].dist(&points[j]));
            }
        }
        best
    }

    #[test]
    fn sparse_tables_match_brute_force() {
        let pts: Vec<Vector> = (0..37)
            .map(|i| Vector::scalar(((i * 7919) % 31) as f64 - 15.0).unwrap())
            .collect();
        let w = Windows::new(&pts);
        for lo in 0..pts.len() {
            for hi in lo..pts.len() {
                assert_eq!(w.diam_1d(lo, hi).unwrap(), brute(&pts, lo, hi));
            }
        }
    }

    #[test]
    fn planar_bracket_is_exact() {
        let pts: Vec<Vector> = (0..20)
            .map(|i| {
                let t = i as f64 * 0.7;
                Vector::new(vec![t.cos(), (2.0 * t).sin()]).unwrap()
            })
            .collect();
        let w = Windows::new(&pts);
        for lo in 0..pts.len() {
            for hi in lo..pts.len() {
                let d = brute(&pts, lo, hi);
                for thr in [d * 0.999, d, d * 1.001, 0.5, 1.0] {
                    assert_eq!(w.diam_at_most(lo, hi, thr), d <= thr);
                }
            }
        }
    }
}

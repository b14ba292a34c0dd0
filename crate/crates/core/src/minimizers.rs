//! Convex sets of global minimizers and Euclidean projection onto them.

use crate::vecmath::norm2;

/// A convex set of global minimizers. Three shapes cover the corpus: a
/// single point, an axis-aligned box, and a segment between two endpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum MinimizerSet {
    Point(Vec<f64>),
    Box { low: Vec<f64>, high: Vec<f64> },
    Segment { a: Vec<f64>, b: Vec<f64> },
}

impl MinimizerSet {
    pub fn point_1d(x: f64) -> Self {
        MinimizerSet::Point(vec![x])
    }

    pub fn dimension(&self) -> usize {
        match self {
            MinimizerSet::Point(p) => p.len(),
            MinimizerSet::Box { low, .. } => low.len(),
            MinimizerSet::Segment { a, .. } => a.len(),
        }
    }

    /// Nearest point of the set. Unique because the set is convex.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MinimizerSet::Point(p) => p.clone(),
            MinimizerSet::Box { low, high } => x
                .iter()
                .zip(low.iter().zip(high.iter()))
                .map(|(&xi, (&lo, &hi))| xi.clamp(lo, hi))
                .collect(),
            MinimizerSet::Segment { a, b } => {
                let mut len2 = 0.0;
                let mut dot = 0.0;
                for i in 0..a.len() {
                    let d = b[i] - a[i];
                    len2 += d * d;
                    dot += (x[i] - a[i]) * d;
                }
                let t = if len2 == 0.0 {
                    0.0
                } else {
                    (dot / len2).clamp(0.0, 1.0)
                };
                a.iter()
                    .zip(b.iter())
                    .map(|(&ai, &bi)| ai + t * (bi - ai))
                    .collect()
            }
        }
    }

    /// Euclidean distance d(x, X*).
    pub fn distance(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        let diff: Vec<f64> = x.iter().zip(p.iter()).map(|(&a, &b)| a - b).collect();
        norm2(&diff)
    }

    /// A few representative members, used to spot-check `f(x*) = f*` and
    /// `∇f(x*) = 0` on construction and in tests.
    pub fn sample_points(&self, n: usize) -> Vec<Vec<f64>> {
        match self {
            MinimizerSet::Point(p) => vec![p.clone()],
            MinimizerSet::Box { low, high } => {
                let mut out = vec![low.clone(), high.clone()];
                for k in 1..n.max(2) {
                    let t = k as f64 / n.max(2) as f64;
                    out.push(
                        low.iter()
                            .zip(high.iter())
                            .map(|(&lo, &hi)| lo + t * (hi - lo))
                            .collect(),
                    );
                }
                out
            }
            MinimizerSet::Segment { a, b } => {
                let mut out = Vec::new();
                for k in 0..=n.max(1) {
                    let t = k as f64 / n.max(1) as f64;
                    out.push(
                        a.iter()
                            .zip(b.iter())
                            .map(|(&ai, &bi)| ai + t * (bi - ai))
                            .collect(),
                    );
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singleton_projection_is_the_point() {
        let m = MinimizerSet::point_1d(5.0);
        assert_eq!(m.project(&[0.0]), vec![5.0]);
        assert_eq!(m.distance(&[0.0]), 5.0);
    }

    #[test]
    fn box_projection_clamps() {
        let m = MinimizerSet::Box {
            low: vec![-1.0, 0.0],
            high: vec![1.0, 2.0],
        };
        assert_eq!(m.project(&[3.0, -1.0]), vec![1.0, 0.0]);
        assert_eq!(m.distance(&[3.0, 0.5]), 2.0);
    }

    #[test]
    fn segment_projection_clamps_parameter() {
        let m = MinimizerSet::Segment {
            a: vec![0.0, 0.0],
            b: vec![1.0, 0.0],
        };
        assert_eq!(m.project(&[2.0, 0.0]), vec![1.0, 0.0]);
        assert_eq!(m.project(&[0.5, 3.0]), vec![0.5, 0.0]);
    }
}

//! Finite-sample logistic loss: convex, smooth, strongly convex on every
//! compact set but not globally, and linearly growing at infinity. The
//! interesting regime for adaptive step sizes.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::minimizers::MinimizerSet;
use crate::objective::Objective;
use crate::vecmath::{dot, norm2};

/// Samples with the label folded in: `z = y·x`.
#[derive(Debug, Clone)]
pub struct LogisticDataset {
    pub samples: Vec<Vec<f64>>,
    pub dimension: usize,
    pub seed: u64,
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniforms in (0,1]
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl LogisticDataset {
    /// Standard-normal features, labels from a planted direction with 10%
    /// flips. Flips keep the optimal loss strictly positive.
    pub fn synthetic(seed: u64, dimension: usize, m: usize) -> Result<Self> {
        if dimension == 0 || m == 0 {
            return Err(Error::InvalidParameter(
                "dimension and m must be positive".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut w_true: Vec<f64> = (0..dimension).map(|_| standard_normal(&mut rng)).collect();
        let n = norm2(&w_true);
        for w in &mut w_true {
            *w /= n;
        }
        let mut samples = Vec::with_capacity(m);
        for _ in 0..m {
            let x: Vec<f64> = (0..dimension).map(|_| standard_normal(&mut rng)).collect();
            let mut y = if dot(&x, &w_true) >= 0.0 { 1.0 } else { -1.0 };
            if rng.gen::<f64>() < 0.1 {
                y = -y;
            }
            samples.push(x.into_iter().map(|v| v * y).collect());
        }
        let ds = LogisticDataset {
            samples,
            dimension,
            seed,
        };
        ds.check_span(64)?;
        Ok(ds)
    }

    /// Empirical surrogate of the span hypothesis: every probed unit
    /// direction sees at least one sample with positive inner product.
    pub fn check_span(&self, directions: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_5eed);
        for _ in 0..directions {
            let mut w: Vec<f64> = (0..self.dimension)
                .map(|_| standard_normal(&mut rng))
                .collect();
            let n = norm2(&w);
            if n == 0.0 {
                continue;
            }
            for v in &mut w {
                *v /= n;
            }
            if !self.samples.iter().any(|z| dot(&w, z) > 0.0) {
                return Err(Error::DegenerateDataset(format!(
                    "no sample has positive inner product with direction {w:?}"
                )));
            }
        }
        Ok(())
    }

    /// Curvature bound `(1/4m) Σ ‖zᵢ‖²`, an upper bound on the largest
    /// Hessian eigenvalue anywhere.
    pub fn smoothness_bound(&self) -> f64 {
        let m = self.samples.len() as f64;
        self.samples.iter().map(|z| dot(z, z)).sum::<f64>() / (4.0 * m)
    }
}

/// `ln(1 + e^{-t})` without overflow.
pub fn log1p_exp_neg(t: f64) -> f64 {
    if t > 0.0 {
        (-t).exp().ln_1p()
    } else {
        -t + t.exp().ln_1p()
    }
}

fn loss(samples: &[Vec<f64>], w: &[f64]) -> f64 {
    let m = samples.len() as f64;
    samples
        .iter()
        .map(|z| log1p_exp_neg(dot(w, z)))
        .sum::<f64>()
        / m
}

fn loss_gradient(samples: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let m = samples.len() as f64;
    let mut g = vec![0.0; w.len()];
    for z in samples {
        let t = dot(w, z);
        // -(1 - sigma(t)) = -sigma(-t)
        let s = 1.0 / (1.0 + t.exp());
        for (gi, zi) in g.iter_mut().zip(z.iter()) {
            *gi -= s * zi / m;
        }
    }
    g
}

/// High-precision gradient descent used once to pin the reference minimizer;
/// every distance-based constant of the logistic objective is relative to it.
pub fn reference_minimizer(ds: &LogisticDataset) -> (Vec<f64>, f64) {
    let alpha = 1.0 / ds.smoothness_bound();
    let mut w = vec![0.0; ds.dimension];
    for _ in 0..1_000_000usize {
        let g = loss_gradient(&ds.samples, &w);
        if norm2(&g) < 1e-12 {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(g.iter()) {
            *wi -= alpha * gi;
        }
    }
    let f_star = loss(&ds.samples, &w);
    (w, f_star)
}

/// Finite-sample average loss `f(ω) = (1/m) Σ ln(1 + exp(−⟨ω, zᵢ⟩))`.
pub fn make_logistic(ds: &LogisticDataset) -> Result<Objective> {
    ds.check_span(64)?;
    let (w_star, f_star) = reference_minimizer(ds);
    let label = format!(
        "logistic:seed={},d={},m={}",
        ds.seed,
        ds.dimension,
        ds.samples.len()
    );
    let samples_v = Arc::new(ds.samples.clone());
    let samples_g = samples_v.clone();
    let value = Arc::new(move |x: &[f64]| loss(&samples_v, x));
    let gradient = Arc::new(move |x: &[f64]| loss_gradient(&samples_g, x));
    Ok(Objective::general(
        label,
        ds.dimension,
        value,
        gradient,
        MinimizerSet::Point(w_star),
        f_star,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset() -> LogisticDataset {
        LogisticDataset::synthetic(42, 3, 200).unwrap()
    }

    #[test]
    fn value_and_gradient_at_origin() {
        let ds = dataset();
        let f = make_logistic(&ds).unwrap();
        let w0 = vec![0.0; 3];
        // 200-term average of ln(1+e^0): rounding accumulates to ~1e-14
        assert!((f.value(&w0) - std::f64::consts::LN_2).abs() < 1e-13);
        // gradient at 0 is -(1/2m) Σ zᵢ
        let m = ds.samples.len() as f64;
        let mut expect = [0.0; 3];
        for z in &ds.samples {
            for (e, zi) in expect.iter_mut().zip(z) {
                *e -= 0.5 * zi / m;
            }
        }
        let g = f.gradient(&w0);
        for (a, b) in g.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn reference_minimizer_is_stationary() {
        let ds = dataset();
        let f = make_logistic(&ds).unwrap();
        assert!(f.f_star() > 0.0, "label flips keep f* strictly positive");
        f.validate_minimum(1e-9).unwrap();
    }

    #[test]
    fn linear_growth_at_infinity() {
        let ds = dataset();
        let f = make_logistic(&ds).unwrap();
        let m = ds.samples.len() as f64;
        // hinge means over probe directions bound f(tω)/t on both sides
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut k1: f64 = f64::NEG_INFINITY;
        let mut k2: f64 = f64::INFINITY;
        let mut dirs = Vec::new();
        for _ in 0..32 {
            let mut w: Vec<f64> = (0..3).map(|_| standard_normal(&mut rng)).collect();
            let n = norm2(&w);
            for v in &mut w {
                *v /= n;
            }
            let hinge = ds
                .samples
                .iter()
                .map(|z| (-dot(&w, z)).max(0.0))
                .sum::<f64>()
                / m;
            k1 = k1.max(hinge);
            k2 = k2.min(hinge);
            dirs.push(w);
        }
        assert!(
            k2 > 0.0,
            "span condition forces positive growth in every direction"
        );
        for t in [10.0, 100.0] {
            for w in &dirs {
                let tw: Vec<f64> = w.iter().map(|v| v * t).collect();
                let ratio = f.value(&tw) / t;
                let hinge = ds
                    .samples
                    .iter()
                    .map(|z| (-dot(w, z)).max(0.0))
                    .sum::<f64>()
                    / m;
                assert!(ratio >= hinge - 1e-12, "lower growth bound");
                assert!(
                    ratio <= k1 + std::f64::consts::LN_2 / t + 1e-12,
                    "upper growth bound"
                );
            }
        }
    }

    #[test]
    fn other_dimensions_construct_cleanly() {
        for d in [2usize, 4, 5] {
            let ds = LogisticDataset::synthetic(7, d, 120).unwrap();
            let f = make_logistic(&ds).unwrap();
            assert_eq!(f.dimension(), d);
            assert!(f.f_star() > 0.0);
            f.validate_minimum(1e-9).unwrap();
        }
    }

    #[test]
    fn degenerate_dataset_is_rejected() {
        // all samples identical: directions opposed to it see no positive dot
        let ds = LogisticDataset {
            samples: vec![vec![1.0, 0.0]; 50],
            dimension: 2,
            seed: 1,
        };
        assert!(matches!(
            make_logistic(&ds),
            Err(Error::DegenerateDataset(_))
        ));
    }
}

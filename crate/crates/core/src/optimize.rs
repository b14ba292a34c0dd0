//! First-order runs: gradient descent, the momentum recursion, adaptive-step
//! descent, exhaustive trajectory records, and rate fitting/classification.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::vecmath::{is_finite, norm2};

/// Algorithm identity and hyperparameters, enough to replay a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum AlgoSpec {
    Gd { alpha: f64 },
    HeavyBall { alpha: f64, beta: f64 },
    AdaptiveGd { alpha: f64 },
    Synthetic,
}

impl AlgoSpec {
    pub fn label(&self) -> String {
        match self {
            AlgoSpec::Gd { alpha } => format!("gd(alpha={alpha})"),
            AlgoSpec::HeavyBall { alpha, beta } => format!("hb(alpha={alpha},beta={beta})"),
            AlgoSpec::AdaptiveGd { alpha } => format!("adaptive_gd(alpha={alpha})"),
            AlgoSpec::Synthetic => "synthetic".to_string(),
        }
    }
}

/// Complete record of a run: iterates with values, gradient norms,
/// suboptimality gaps and distances to the minimizer set.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub iterates: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub subopt: Vec<f64>,
    pub dist: Vec<f64>,
    pub algo: AlgoSpec,
    /// True when the run hit a non-finite value or gradient and stopped.
    pub hit_nonfinite: bool,
}

impl Trajectory {
    fn with_capacity(algo: AlgoSpec, n: usize) -> Self {
        Trajectory {
            iterates: Vec::with_capacity(n + 1),
            values: Vec::with_capacity(n + 1),
            grad_norms: Vec::with_capacity(n + 1),
            subopt: Vec::with_capacity(n + 1),
            dist: Vec::with_capacity(n + 1),
            algo,
            hit_nonfinite: false,
        }
    }

    /// Record x; returns the gradient for the next step, or None when x or
    /// its data is non-finite (the trajectory is then truncated).
    fn record(&mut self, obj: &Objective, x: Vec<f64>) -> Option<Vec<f64>> {
        if !is_finite(&x) {
            self.hit_nonfinite = true;
            return None;
        }
        let v = obj.value(&x);
        let g = obj.gradient(&x);
        if !v.is_finite() || !is_finite(&g) {
            self.hit_nonfinite = true;
            return None;
        }
        self.values.push(v);
        self.grad_norms.push(norm2(&g));
        self.subopt.push(v - obj.f_star());
        self.dist.push(obj.dist(&x));
        self.iterates.push(x);
        Some(g)
    }

    /// Number of recorded points (n + 1 for a completed n-step run).
    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    /// Test helper: wrap an externally computed suboptimality series.
    pub fn synthetic(subopt: Vec<f64>) -> Trajectory {
        let n = subopt.len();
        Trajectory {
            iterates: vec![vec![0.0]; n],
            values: subopt.clone(),
            grad_norms: vec![0.0; n],
            dist: subopt.iter().map(|s| s.abs().sqrt()).collect(),
            subopt,
            algo: AlgoSpec::Synthetic,
            hit_nonfinite: false,
        }
    }

    /// Re-run the recorded algorithm from the recorded start and compare
    /// bit-for-bit. Adaptive runs need their step modifier back.
    pub fn verify_replay(&self, obj: &Objective, gprime: Option<&dyn Fn(f64) -> f64>) -> bool {
        if self.is_empty() {
            return false;
        }
        let replayed = match self.algo {
            AlgoSpec::Gd { alpha } => gd(obj, &self.iterates[0], alpha, self.len().max(2) - 1),
            AlgoSpec::HeavyBall { alpha, beta } => {
                heavy_ball(obj, &self.iterates[0], alpha, beta, self.len().max(2) - 1)
            }
            AlgoSpec::AdaptiveGd { alpha } => match gprime {
                Some(gp) => adaptive_gd(obj, &self.iterates[0], alpha, gp, self.len().max(2) - 1),
                None => return false,
            },
            AlgoSpec::Synthetic => return false,
        };
        match replayed {
            Ok(t) => t.iterates == self.iterates,
            Err(_) => false,
        }
    }

    /// CSV dump: `iter,x...,f,grad_norm,subopt,dist`.
    pub fn to_csv(&self) -> String {
        let dim = self.iterates.first().map_or(0, |x| x.len());
        let mut out = String::from("iter");
        for i in 0..dim {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",f,grad_norm,subopt,dist\n");
        for k in 0..self.len() {
            out.push_str(&format!("{k}"));
            for xi in &self.iterates[k] {
                out.push_str(&format!(",{xi}"));
            }
            out.push_str(&format!(
                ",{},{},{},{}\n",
                self.values[k], self.grad_norms[k], self.subopt[k], self.dist[k]
            ));
        }
        out
    }
}

fn check_run_params(alpha: f64, n: usize) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {alpha}"
        )));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("need at least one step".into()));
    }
    Ok(())
}

/// Constant-step gradient descent: `x ← x − α ∇f(x)`.
pub fn gd(obj: &Objective, x0: &[f64], alpha: f64, n: usize) -> Result<Trajectory> {
    check_run_params(alpha, n)?;
    let mut traj = Trajectory::with_capacity(AlgoSpec::Gd { alpha }, n);
    let mut x = x0.to_vec();
    for _ in 0..=n {
        let Some(g) = traj.record(obj, x.clone()) else {
            break;
        };
        if traj.len() == n + 1 {
            break;
        }
        for (xi, gi) in x.iter_mut().zip(g.iter()) {
            *xi -= alpha * gi;
        }
    }
    Ok(traj)
}

/// Momentum recursion `x⁺ = x − α ∇f(x) + β (x − x⁻)`, started with zero
/// momentum (x⁻ = x₀), so β = 0 reproduces plain descent exactly.
pub fn heavy_ball(
    obj: &Objective,
    x0: &[f64],
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<Trajectory> {
    check_run_params(alpha, n)?;
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "momentum must lie in [0,1), got {beta}"
        )));
    }
    let mut traj = Trajectory::with_capacity(AlgoSpec::HeavyBall { alpha, beta }, n);
    let mut prev = x0.to_vec();
    let mut x = x0.to_vec();
    for _ in 0..=n {
        let Some(g) = traj.record(obj, x.clone()) else {
            break;
        };
        if traj.len() == n + 1 {
            break;
        }
        let next: Vec<f64> = x
            .iter()
            .zip(prev.iter())
            .zip(g.iter())
            .map(|((&xi, &pi), &gi)| xi - alpha * gi + beta * (xi - pi))
            .collect();
        prev = x;
        x = next;
    }
    Ok(traj)
}

/// Descent with a value-dependent step: `x ← x − α g'(f(x)) ∇f(x)`, the
/// constant-step recursion of the reparameterized objective g∘f.
pub fn adaptive_gd(
    obj: &Objective,
    x0: &[f64],
    alpha: f64,
    gprime: impl Fn(f64) -> f64,
    n: usize,
) -> Result<Trajectory> {
    check_run_params(alpha, n)?;
    let mut traj = Trajectory::with_capacity(AlgoSpec::AdaptiveGd { alpha }, n);
    let mut x = x0.to_vec();
    for _ in 0..=n {
        let Some(g) = traj.record(obj, x.clone()) else {
            break;
        };
        if traj.len() == n + 1 {
            break;
        }
        let scale = gprime(*traj.values.last().expect("recorded"));
        if !scale.is_finite() {
            traj.hit_nonfinite = true;
            break;
        }
        for (xi, gi) in x.iter_mut().zip(g.iter()) {
            *xi -= alpha * scale * gi;
        }
    }
    Ok(traj)
}

/// Convergence classes of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateClass {
    ConvergedLinear,
    ConvergedSublinear,
    Stalled,
    Diverged,
}

/// Fitted rate summary of a trajectory tail.
#[derive(Debug, Clone, Serialize)]
pub struct RateEstimate {
    /// Supremum of consecutive suboptimality ratios over the tail
    /// (entries below the convergence floor excluded); 0 by convention for
    /// runs that terminate exactly.
    pub linear_rate: f64,
    /// Geometric rate from a least-squares fit of log-suboptimality.
    pub fit_rate: f64,
    pub class: RateClass,
    pub tail_start: usize,
}

/// Suboptimality below this is treated as converged-to-the-floor; ratios of
/// such entries are pure rounding noise and are excluded.
pub const SUBOPT_ATOL: f64 = 1e-10;

/// Margin separating "linear contraction" from "ratio indistinguishable
/// from 1".
pub const CLASS_MARGIN: f64 = 1e-6;

/// Classify the tail of a run. `tail_fraction` of the iterations (after a
/// burn-in of 10) enter the fit.
pub fn estimate_rate(traj: &Trajectory, tail_fraction: f64) -> Result<RateEstimate> {
    if traj.len() < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 recorded iterates, got {}",
            traj.len()
        )));
    }
    let n = traj.len() - 1;
    let from_fraction = ((n + 1) as f64 * (1.0 - tail_fraction.clamp(0.0, 1.0))).floor() as usize;
    let tail_start = from_fraction.max(10).min(n.saturating_sub(1));
    let tail = &traj.subopt[tail_start..];

    let mut ratios: Vec<f64> = Vec::new();
    for w in tail.windows(2) {
        if w[0] > SUBOPT_ATOL && w[1] > SUBOPT_ATOL {
            ratios.push(w[1] / w[0]);
        }
    }
    let linear_rate = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let linear_rate = if linear_rate.is_finite() {
        linear_rate
    } else {
        0.0
    };

    // least-squares slope of ln(subopt) over the tail
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > SUBOPT_ATOL)
        .map(|(k, &s)| (k as f64, s.ln()))
        .collect();
    let fit_rate = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = m * sxx - sx * sx;
        if denom.abs() < 1e-300 {
            1.0
        } else {
            ((m * sxy - sx * sy) / denom).exp()
        }
    } else {
        linear_rate
    };

    let final_subopt = *traj.subopt.last().expect("non-empty");
    let class = if traj.hit_nonfinite {
        RateClass::Diverged
    } else if final_subopt <= SUBOPT_ATOL {
        RateClass::ConvergedLinear
    } else if grows_tenfold(tail) {
        RateClass::Diverged
    } else if linear_rate < 1.0 - CLASS_MARGIN && !ratios.is_empty() {
        RateClass::ConvergedLinear
    } else if fit_rate < 1.0 - CLASS_MARGIN && final_subopt < tail[0] {
        RateClass::ConvergedSublinear
    } else {
        RateClass::Stalled
    };

    Ok(RateEstimate {
        linear_rate,
        fit_rate,
        class,
        tail_start,
    })
}

/// Window-max comparison so oscillating (cycling) runs are not mistaken for
/// divergence: only sustained growth of the envelope counts.
fn grows_tenfold(tail: &[f64]) -> bool {
    if tail.len() < 4 {
        return false;
    }
    let w = (tail.len() / 10).max(1);
    let head_max = tail[..w].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail_max = tail[tail.len() - w..]
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    tail_max > 10.0 * head_max && tail_max > SUBOPT_ATOL
}

/// Smallest k with d(x_k, X*) < radius.
pub fn first_hit(traj: &Trajectory, radius: f64) -> Option<usize> {
    if !radius.is_finite() || radius <= 0.0 {
        return None;
    }
    traj.dist.iter().position(|&d| d < radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{make_f_eps, make_f_lrp, make_plateau, make_quadratic};

    #[test]
    fn gd_one_step_to_minimizer() {
        let q = make_quadratic(&[2.0], &[0.0]).unwrap();
        let t = gd(&q, &[1.0], 0.5, 3).unwrap();
        assert_eq!(t.iterates[1], vec![0.0]);
        assert_eq!(t.subopt[1], 0.0);
        assert!(t.verify_replay(&q, None));
    }

    #[test]
    fn gd_two_steps_on_eps_family() {
        for eps in [0.1, 0.5, 1.0] {
            let f = make_f_eps(eps).unwrap();
            for x0 in [1.5, 3.0, 10.0] {
                let t = gd(&f, &[x0], 0.5, 2).unwrap();
                assert!(
                    t.iterates[2][0].abs() < 1e-12,
                    "eps={eps} x0={x0}: {:?}",
                    t.iterates
                );
            }
        }
    }

    #[test]
    fn gd_per_step_contraction_floor_under_curvature_tuning() {
        for eps in [0.1, 0.5, 1.0] {
            let f = make_f_eps(eps).unwrap();
            let alpha = eps / (2.0 * eps + 1.0);
            let bound = (1.0 - eps * eps) / ((2.0 * eps + 1.0) * (1.0 + eps * eps));
            let t = gd(&f, &[3.0], alpha, 50).unwrap();
            for k in 0..50 {
                let lhs = t.iterates[k + 1][0].abs();
                let rhs = bound * t.iterates[k][0].abs();
                assert!(lhs >= rhs - 1e-12, "eps={eps} k={k}: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn gd_rejects_bad_params_and_flags_divergence() {
        let q = make_quadratic(&[2.0], &[0.0]).unwrap();
        assert!(gd(&q, &[1.0], 0.0, 5).is_err());
        assert!(gd(&q, &[1.0], 0.5, 0).is_err());
        let t = gd(&q, &[1.0], 1e130, 400).unwrap();
        assert!(t.hit_nonfinite);
        let r = estimate_rate(&t, 0.5);
        if let Ok(r) = r {
            assert_eq!(r.class, RateClass::Diverged);
        }
    }

    #[test]
    fn heavy_ball_with_zero_momentum_is_gd_bitwise() {
        let f = make_f_lrp();
        let a = gd(&f, &[3.3], 0.01, 200).unwrap();
        let b = heavy_ball(&f, &[3.3], 0.01, 0.0, 200).unwrap();
        assert_eq!(a.iterates, b.iterates);
    }

    #[test]
    fn adaptive_with_unit_modifier_is_gd_bitwise() {
        let f = make_f_lrp();
        let a = gd(&f, &[3.3], 0.01, 100).unwrap();
        let b = adaptive_gd(&f, &[3.3], 0.01, |_| 1.0, 100).unwrap();
        assert_eq!(a.iterates, b.iterates);
    }

    #[test]
    fn synthetic_geometric_series_rate() {
        let series: Vec<f64> = (0..60).map(|k| 0.9f64.powi(k)).collect();
        let t = Trajectory::synthetic(series);
        let r = estimate_rate(&t, 0.5).unwrap();
        assert!((r.linear_rate - 0.9).abs() < 1e-12);
        assert_eq!(r.class, RateClass::ConvergedLinear);
    }

    #[test]
    fn quadratic_distance_rate_matches_theory() {
        let q = make_quadratic(&[1.0, 10.0], &[0.0, 0.0]).unwrap();
        let alpha = 2.0 / 11.0;
        let t = gd(&q, &[1.0, 1.0], alpha, 80).unwrap();
        let expect = (9.0f64 / 11.0).powi(2);
        for k in 10..40 {
            let num = t.dist[k + 1] * t.dist[k + 1];
            let den = t.dist[k] * t.dist[k];
            if den > 1e-200 {
                assert!((num / den - expect).abs() < 1e-6, "k={k}");
            }
        }
        let r = estimate_rate(&t, 0.5).unwrap();
        assert!(r.linear_rate <= expect + 1e-9);
    }

    #[test]
    fn plateau_run_stalls_at_flat_height() {
        let f = make_plateau(0.5, 1.0).unwrap();
        let t = gd(&f, &[3.0], 1.0, 100).unwrap();
        // alpha = 1 lands exactly on the right edge of the flat segment
        assert_eq!(t.iterates[1][0], 2.5);
        assert_eq!(t.iterates[100][0], 2.5);
        let r = estimate_rate(&t, 0.5).unwrap();
        assert_eq!(r.class, RateClass::Stalled);
        assert!((t.subopt.last().unwrap() - 0.75).abs() < 1e-12);
        // the stall is a literal plateau of the suboptimality series
        let s = &t.subopt;
        for k in 60..100 {
            assert!((s[k] - s[k - 1]).abs() < 1e-14);
        }
    }

    #[test]
    fn first_hit_examples() {
        let q = make_quadratic(&[2.0], &[0.0]).unwrap();
        let t = gd(&q, &[1.0], 0.5, 5).unwrap();
        assert_eq!(first_hit(&t, 0.5), Some(1));
        let f = make_f_eps(0.5).unwrap();
        let t = gd(&f, &[3.0], 0.5, 5).unwrap();
        assert!(first_hit(&t, 1e-9).unwrap() <= 2);
        assert_eq!(first_hit(&t, 0.0), None);
    }

    #[test]
    fn rate_estimate_serializes_to_json() {
        let series: Vec<f64> = (0..40).map(|k| 0.8f64.powi(k)).collect();
        let r = estimate_rate(&Trajectory::synthetic(series), 0.5).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["class"], "ConvergedLinear");
        assert!((v["linear_rate"].as_f64().unwrap() - 0.8).abs() < 1e-12);
        assert!(v["fit_rate"].is_number());
        assert!(v["tail_start"].is_number());
    }

    #[test]
    fn trajectory_csv_shape() {
        let q = make_quadratic(&[2.0], &[0.0]).unwrap();
        let t = gd(&q, &[1.0], 0.25, 2).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iter,x0,f,grad_norm,subopt,dist");
        assert_eq!(lines.len(), 4);
    }
}

//! Objectives: evaluatable functions with gradients, a convex minimizer set,
//! and the known optimal value. Houses the analytic corpus every other module
//! is exercised against.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::conditions::ConditionKind;
use crate::error::{Error, Result};
use crate::minimizers::MinimizerSet;
use crate::piecewise::{Piecewise1d, Poly};
use crate::vecmath;

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub(crate) enum Kernel {
    Quadratic {
        eigenvalues: Vec<f64>,
        center: Vec<f64>,
    },
    Poly1 {
        value: Piecewise1d,
        deriv: Piecewise1d,
    },
    Scalar1 {
        value: Scalar,
        deriv: Scalar,
    },
    General {
        value: ValueFn,
        gradient: GradFn,
    },
}

/// An immutable objective function. Evaluation is pure, so values may be
/// computed from any number of threads concurrently.
#[derive(Clone)]
pub struct Objective {
    label: String,
    dimension: usize,
    kernel: Kernel,
    minimizers: MinimizerSet,
    f_star: f64,
    analytic: BTreeMap<ConditionKind, f64>,
    breakpoints: Vec<f64>,
    plateau: bool,
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .field("f_star", &self.f_star)
            .finish()
    }
}

impl Objective {
    pub(crate) fn from_parts(
        label: impl Into<String>,
        dimension: usize,
        kernel: Kernel,
        minimizers: MinimizerSet,
        f_star: f64,
    ) -> Self {
        Objective {
            label: label.into(),
            dimension,
            kernel,
            minimizers,
            f_star,
            analytic: BTreeMap::new(),
            breakpoints: Vec::new(),
            plateau: false,
        }
    }

    /// Build from arbitrary value/gradient closures.
    pub fn general(
        label: impl Into<String>,
        dimension: usize,
        value: ValueFn,
        gradient: GradFn,
        minimizers: MinimizerSet,
        f_star: f64,
    ) -> Self {
        Objective::from_parts(
            label,
            dimension,
            Kernel::General { value, gradient },
            minimizers,
            f_star,
        )
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.kernel {
            Kernel::Quadratic {
                eigenvalues,
                center,
            } => {
                0.5 * eigenvalues
                    .iter()
                    .zip(x.iter().zip(center.iter()))
                    .map(|(&l, (&xi, &ci))| l * (xi - ci) * (xi - ci))
                    .sum::<f64>()
            }
            Kernel::Poly1 { value, .. } => value.value(x[0]),
            Kernel::Scalar1 { value, .. } => value(x[0]),
            Kernel::General { value, .. } => value(x),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.kernel {
            Kernel::Quadratic {
                eigenvalues,
                center,
            } => eigenvalues
                .iter()
                .zip(x.iter().zip(center.iter()))
                .map(|(&l, (&xi, &ci))| l * (xi - ci))
                .collect(),
            Kernel::Poly1 { deriv, .. } => vec![deriv.value(x[0])],
            Kernel::Scalar1 { deriv, .. } => vec![deriv(x[0])],
            Kernel::General { gradient, .. } => gradient(x),
        }
    }

    /// Scalar fast path for one-dimensional objectives.
    pub fn value1(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dimension, 1);
        match &self.kernel {
            Kernel::Quadratic {
                eigenvalues,
                center,
            } => {
                let d = x - center[0];
                0.5 * eigenvalues[0] * d * d
            }
            Kernel::Poly1 { value, .. } => value.value(x),
            Kernel::Scalar1 { value, .. } => value(x),
            Kernel::General { value, .. } => value(&[x]),
        }
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dimension, 1);
        match &self.kernel {
            Kernel::Quadratic {
                eigenvalues,
                center,
            } => eigenvalues[0] * (x - center[0]),
            Kernel::Poly1 { deriv, .. } => deriv.value(x),
            Kernel::Scalar1 { deriv, .. } => deriv(x),
            Kernel::General { gradient, .. } => gradient(&[x])[0],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn minimizers(&self) -> &MinimizerSet {
        &self.minimizers
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn subopt(&self, x: &[f64]) -> f64 {
        self.value(x) - self.f_star
    }

    pub fn dist(&self, x: &[f64]) -> f64 {
        self.minimizers.distance(x)
    }

    /// Kink locations of piecewise objectives. Estimators use them to probe
    /// thin high-curvature intervals and finite-difference tests to stay away
    /// from second-derivative jumps.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Marks objectives with a flat segment of non-minimal value, where the
    /// defining ratio of the PL conditions degenerates.
    pub fn has_plateau(&self) -> bool {
        self.plateau
    }

    /// Known-optimal condition constant, when the corpus entry carries one.
    pub fn analytic_constant(&self, kind: ConditionKind) -> Option<f64> {
        self.analytic.get(&kind).copied()
    }

    pub fn analytic_constants(&self) -> &BTreeMap<ConditionKind, f64> {
        &self.analytic
    }

    pub(crate) fn with_analytic(mut self, entries: &[(ConditionKind, f64)]) -> Self {
        self.analytic.extend(entries.iter().copied());
        self
    }

    pub(crate) fn with_breakpoints(mut self, b: Vec<f64>) -> Self {
        self.breakpoints = b;
        self
    }

    pub(crate) fn with_plateau(mut self) -> Self {
        self.plateau = true;
        self
    }

    /// Largest value/derivative mismatch across branch junctions, for
    /// piecewise-polynomial objectives; None when the kernel has no branches.
    pub fn gluing_gap(&self) -> Option<f64> {
        match &self.kernel {
            Kernel::Poly1 { value, .. } => Some(value.max_gluing_gap()),
            _ => None,
        }
    }

    /// Check `f(x*) = f*` and `∇f(x*) = 0` on sampled minimizers.
    pub fn validate_minimum(&self, tol: f64) -> Result<()> {
        for p in self.minimizers.sample_points(4) {
            let v = (self.value(&p) - self.f_star).abs();
            if v > tol {
                return Err(Error::InvalidObjective(format!(
                    "value at minimizer off by {v:.3e} (label {})",
                    self.label
                )));
            }
            let g = vecmath::norm2(&self.gradient(&p));
            if g > tol {
                return Err(Error::InvalidObjective(format!(
                    "gradient norm {g:.3e} at minimizer (label {})",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// `f(x) = ½ Σ λᵢ (xᵢ − cᵢ)²`. Every condition constant collapses to the
/// extreme eigenvalues, which makes quadratics the exactness baseline.
pub fn make_quadratic(eigenvalues: &[f64], center: &[f64]) -> Result<Objective> {
    if eigenvalues.is_empty() || eigenvalues.len() != center.len() {
        return Err(Error::InvalidObjective(
            "eigenvalues and center must be non-empty and of equal length".into(),
        ));
    }
    if eigenvalues.iter().any(|&l| l <= 0.0 || !l.is_finite()) {
        return Err(Error::InvalidObjective(
            "eigenvalues must be positive".into(),
        ));
    }
    let lo = eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let label = if center.iter().all(|&c| c == 0.0) {
        format!(
            "quadratic:{}",
            eigenvalues
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    } else {
        format!(
            "quadratic:{}@{}",
            eigenvalues
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(","),
            center
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    };
    let analytic: Vec<(ConditionKind, f64)> = ConditionKind::ALL
        .iter()
        .map(|&k| (k, if k.side.is_upper() { hi } else { lo }))
        .collect();
    Ok(Objective::from_parts(
        label,
        eigenvalues.len(),
        Kernel::Quadratic {
            eigenvalues: eigenvalues.to_vec(),
            center: center.to_vec(),
        },
        MinimizerSet::Point(center.to_vec()),
        0.0,
    )
    .with_analytic(&analytic))
}

fn poly1_objective(
    label: String,
    deriv: Piecewise1d,
    anchor_x: f64,
    anchor_value: f64,
    minimizer: f64,
) -> Objective {
    let value = Piecewise1d::integral_of(&deriv, anchor_x, anchor_value);
    debug_assert!(value.max_gluing_gap() < 1e-12, "branches must glue C1");
    let breaks = value.breaks.clone();
    Objective::from_parts(
        label,
        1,
        Kernel::Poly1 { value, deriv },
        MinimizerSet::point_1d(minimizer),
        0.0,
    )
    .with_breakpoints(breaks)
}

/// Piecewise quadratic with derivative 25x / x+24 / 25x−24 on the three
/// branches split at 1 and 2. The classic example where momentum tuned from
/// the extreme curvatures cycles instead of converging.
pub fn make_f_lrp() -> Objective {
    let deriv = Piecewise1d::new(
        vec![1.0, 2.0],
        vec![
            Poly::new(vec![0.0, 25.0]),
            Poly::new(vec![24.0, 1.0]),
            Poly::new(vec![-24.0, 25.0]),
        ],
    );
    let obj = poly1_objective("f_lrp".into(), deriv, 0.0, 0.0, 0.0);
    use crate::conditions::{Family::*, Side::*};
    let k = ConditionKind::new;
    obj.with_analytic(&[
        (k(Sc, Upper), 25.0),
        (k(StarSc, Upper), 25.0),
        (k(Rsi, Upper), 25.0),
        (k(Eb, Upper), 25.0),
        (k(Pl, Upper), 25.0),
        (k(Qg, Upper), 25.0),
        (k(Sc, Lower), 1.0),
        (k(StarSc, Lower), 7.0),
        (k(Rsi, Lower), 13.0),
        (k(Eb, Lower), 13.0),
        (k(Pl, Lower), 169.0 / 19.0),
        // 2 f(x)/x² on the right branch is 25 − 48/x + 72/x², minimized at
        // x = 3 with value 17; the often-quoted 19 is only the breakpoint
        // value at x = 2.
        (k(Qg, Lower), 17.0),
    ])
}

/// Three-branch family: x² outside a transition strip of width ε² where the
/// curvature blows up like 2 + 2/ε. A vanishing star-norm perturbation of x²
/// with arbitrarily bad smoothness constant.
pub fn make_f_eps(eps: f64) -> Result<Objective> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "f_eps needs eps > 0, got {eps}"
        )));
    }
    let deriv = Piecewise1d::new(
        vec![1.0, 1.0 + eps * eps],
        vec![
            Poly::new(vec![0.0, 2.0]),
            Poly::new(vec![-2.0 / eps, 2.0 + 2.0 / eps]),
            Poly::new(vec![2.0 * eps, 2.0]),
        ],
    );
    let obj = poly1_objective(format!("f_eps:{eps}"), deriv, 0.0, 0.0, 0.0);
    use crate::conditions::{Family::*, Side::*};
    let k = ConditionKind::new;
    Ok(obj.with_analytic(&[(k(Sc, Lower), 2.0), (k(Sc, Upper), 2.0 + 2.0 / eps)]))
}

/// `√(x²+1) − 1`: a differentiable absolute value. Convex, all upper
/// constants equal 1, no positive lower constant. Evaluated in the
/// cancellation-free form x²/(√(x²+1)+1).
pub fn make_smooth_abs() -> Objective {
    let value: Scalar = Arc::new(|x| x * x / ((x * x + 1.0).sqrt() + 1.0));
    let deriv: Scalar = Arc::new(|x| x / (x * x + 1.0).sqrt());
    let obj = Objective::from_parts(
        "smooth_abs",
        1,
        Kernel::Scalar1 { value, deriv },
        MinimizerSet::point_1d(0.0),
        0.0,
    );
    use crate::conditions::{Family::*, Side::Upper};
    let k = ConditionKind::new;
    obj.with_analytic(&[
        (k(Sc, Upper), 1.0),
        (k(StarSc, Upper), 1.0),
        (k(Rsi, Upper), 1.0),
        (k(Eb, Upper), 1.0),
        (k(Pl, Upper), 1.0),
        (k(Qg, Upper), 1.0),
    ])
}

/// 0 / (x−1)³ / 3x−5 glued at 1 and 2. Vanishes left of 1, grows linearly
/// right of 2; its gradient-to-distance ratio peaks at x = 2 with value 3/2.
pub fn make_cubic_ramp() -> Objective {
    let value = Piecewise1d::new(
        vec![1.0, 2.0],
        vec![
            Poly::constant(0.0),
            Poly::new(vec![-1.0, 3.0, -3.0, 1.0]),
            Poly::new(vec![-5.0, 3.0]),
        ],
    );
    debug_assert!(value.max_gluing_gap() < 1e-12);
    let deriv = value.derivative();
    Objective::from_parts(
        "cubic_ramp",
        1,
        Kernel::Poly1 { value, deriv },
        MinimizerSet::point_1d(0.0),
        0.0,
    )
    .with_breakpoints(vec![1.0, 2.0])
}

/// Four-branch counterexample with a flat segment of non-minimal value on
/// [1+ε, 1+ε+η]: smooth and quadratically growing, yet gradient descent
/// parks forever once an iterate lands on the segment.
pub fn make_plateau(eps: f64, eta: f64) -> Result<Objective> {
    if !eps.is_finite() || !eta.is_finite() || eps <= 0.0 || eta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "plateau needs eps > 0 and eta > 0, got {eps}, {eta}"
        )));
    }
    let a = 1.0 + eps;
    let b = 1.0 + eps + eta;
    let deriv = Piecewise1d::new(
        vec![1.0, a, b],
        vec![
            Poly::new(vec![0.0, 1.0]),
            Poly::new(vec![a / eps, -1.0 / eps]),
            Poly::constant(0.0),
            Poly::new(vec![-b, 1.0]),
        ],
    );
    let obj = poly1_objective(format!("plateau:{eps},{eta}"), deriv, 0.0, 0.0, 0.0).with_plateau();
    use crate::conditions::{Family::*, Side::*};
    let k = ConditionKind::new;
    Ok(obj.with_analytic(&[
        (k(Sc, Upper), 1.0),
        (k(Sc, Lower), -1.0 / eps),
        (k(Qg, Lower), a / (b * b + a)),
    ]))
}

/// Monotone scalar reparameterization `g ∘ f` sharing f's minimizers.
/// `g` must be increasing on the range of `f`; pass its derivative too.
pub fn compose_increasing(
    f: &Objective,
    g: Scalar,
    gprime: Scalar,
    label: impl Into<String>,
) -> Objective {
    let fv = f.clone();
    let fg = f.clone();
    let g2 = g.clone();
    let value: ValueFn = Arc::new(move |x| g(fv.value(x)));
    let gradient: GradFn = Arc::new(move |x| {
        let s = gprime(fg.value(x));
        fg.gradient(x).into_iter().map(|gi| s * gi).collect()
    });
    Objective::from_parts(
        label,
        f.dimension(),
        Kernel::General { value, gradient },
        f.minimizers().clone(),
        g2(f.f_star()),
    )
    .with_breakpoints(f.breakpoints().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{ConditionKind, Family, Side};

    #[test]
    fn quadratic_matches_hand_values() {
        let q = make_quadratic(&[2.0], &[0.0]).unwrap();
        assert_eq!(q.value(&[1.0]), 1.0);
        assert_eq!(q.gradient(&[1.0]), vec![2.0]);
        assert_eq!(q.f_star(), 0.0);
    }

    #[test]
    fn quadratic_analytic_constants_are_extreme_eigenvalues() {
        let q = make_quadratic(&[1.0, 10.0], &[0.0, 0.0]).unwrap();
        for k in ConditionKind::ALL {
            let expect = if k.side.is_upper() { 10.0 } else { 1.0 };
            assert_eq!(q.analytic_constant(k), Some(expect), "{k}");
        }
    }

    #[test]
    fn quadratic_offcenter_projection() {
        let q = make_quadratic(&[3.0], &[5.0]).unwrap();
        assert_eq!(q.minimizers().project(&[0.0]), vec![5.0]);
        assert_eq!(q.dist(&[0.0]), 5.0);
    }

    #[test]
    fn quadratic_rejects_nonpositive_eigenvalue() {
        assert!(make_quadratic(&[0.0], &[0.0]).is_err());
        assert!(make_quadratic(&[-1.0, 2.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn f_lrp_pointwise() {
        let f = make_f_lrp();
        assert_eq!(f.deriv1(3.3), 58.5);
        assert_eq!(f.deriv1(1.5), 25.5);
        assert_eq!(f.value1(1.0), 12.5);
        assert_eq!(f.value1(2.0), 38.0);
        assert_eq!(f.value1(3.0), 76.5);
        f.validate_minimum(0.0).unwrap();
    }

    #[test]
    fn f_eps_pointwise_and_errors() {
        let f = make_f_eps(0.1).unwrap();
        assert_eq!(
            f.analytic_constant(ConditionKind::new(Family::Sc, Side::Upper)),
            Some(22.0)
        );
        assert_eq!(
            f.analytic_constant(ConditionKind::new(Family::Sc, Side::Lower)),
            Some(2.0)
        );
        assert_eq!(f.value1(0.5), 0.25);
        assert_eq!(f.deriv1(0.5), 1.0);
        let f1 = make_f_eps(1.0).unwrap();
        assert!((f1.value1(3.0) - 12.0).abs() < 1e-12); // 9 + 6 - 2 - 1
        assert!(make_f_eps(0.0).is_err());
        assert!(make_f_eps(-1.0).is_err());
    }

    #[test]
    fn f_eps_third_branch_closed_form() {
        // x² + 2εx − 2ε − ε³ beyond 1+ε², for several ε
        for eps in [0.1, 0.5, 1.0, 2.0] {
            let f = make_f_eps(eps).unwrap();
            let edge = 1.0 + eps * eps;
            for x in [edge, edge + 1.0, edge + 3.0] {
                let expect = x * x + 2.0 * eps * x - 2.0 * eps - eps * eps * eps;
                assert!(
                    (f.value1(x) - expect).abs() < 1e-12,
                    "eps={eps} x={x}: {} vs {}",
                    f.value1(x),
                    expect
                );
            }
        }
    }

    #[test]
    fn smooth_abs_and_cubic_ramp_pointwise() {
        let h = make_smooth_abs();
        assert_eq!(h.value1(0.0), 0.0);
        for x in [-2.0, -0.3, 0.7, 4.0] {
            assert!((h.deriv1(x) - x / (x * x + 1.0).sqrt()).abs() < 1e-15);
        }
        let c = make_cubic_ramp();
        assert_eq!(c.deriv1(1.5), 0.75);
        assert_eq!(c.deriv1(2.5), 3.0);
        assert_eq!(c.value1(0.5), 0.0);
        assert_eq!(c.value1(3.0), 4.0);
    }

    #[test]
    fn plateau_branch_facts() {
        let f = make_plateau(0.5, 1.0).unwrap();
        // flat segment [1.5, 2.5] at height (1+eps)/2
        for x in [1.5, 1.9, 2.5] {
            assert_eq!(f.deriv1(x), 0.0);
            assert!((f.value1(x) - 0.75).abs() < 1e-12);
        }
        assert!((f.value1(1.5) - 0.75).abs() < 1e-12);
        assert!(f.has_plateau());
        let qg = f
            .analytic_constant(ConditionKind::new(Family::Qg, Side::Lower))
            .unwrap();
        assert!((qg - 1.5 / (6.25 + 1.5)).abs() < 1e-12);
    }

    #[test]
    fn compose_square_matches_direct() {
        let f = make_quadratic(&[2.0], &[0.0]).unwrap();
        let g: Scalar = Arc::new(|t| t * t);
        let gp: Scalar = Arc::new(|t| 2.0 * t);
        let c = compose_increasing(&f, g, gp, "quadratic:2^2");
        assert_eq!(c.value(&[2.0]), 16.0); // (x²)² = x⁴
        assert_eq!(c.gradient(&[2.0]), vec![2.0 * 4.0 * 4.0]); // 2f(x)·f'(x) = 2·4·4
    }
}

//! Perturbations vanishing on the minimizer set, the gradient-to-distance
//! norm that topologizes them, and the explicit perturbation families used
//! to break curvature-based tunings.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::conditions::EstimationGrid;
use crate::error::{Error, Result};
use crate::minimizers::MinimizerSet;
use crate::objective::Objective;
use crate::piecewise::{Piecewise1d, Poly};
use crate::vecmath::{dot, norm2, sub};

type ValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A C¹ function vanishing on an anchor set with gradient controlled by the
/// distance to it. Validated eagerly: anchors must be zeros, and the gradient
/// must match finite differences away from breakpoints.
#[derive(Clone)]
pub struct Perturbation {
    label: String,
    dimension: usize,
    value: ValueFn,
    gradient: GradFn,
    anchor: MinimizerSet,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Perturbation")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .finish()
    }
}

impl Perturbation {
    pub fn new(
        label: impl Into<String>,
        dimension: usize,
        value: ValueFn,
        gradient: GradFn,
        anchor: MinimizerSet,
        breakpoints: Vec<f64>,
    ) -> Result<Self> {
        let p = Perturbation {
            label: label.into(),
            dimension,
            value,
            gradient,
            anchor,
            breakpoints,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        for a in self.anchor.sample_points(4) {
            let v = (self.value)(&a).abs();
            if v > 1e-9 {
                return Err(Error::IncompatiblePerturbation(format!(
                    "{} does not vanish on the anchor set (|h| = {v:.3e})",
                    self.label
                )));
            }
        }
        // finite differences on a few probes clear of breakpoints
        let lo = -4.0;
        let hi = 4.0;
        for k in 0..16 {
            let t = lo + (hi - lo) * (k as f64 + 0.5) / 16.0;
            let x: Vec<f64> = (0..self.dimension)
                .map(|i| if i == 0 { t } else { 0.3 * (i as f64) })
                .collect();
            if self
                .breakpoints
                .iter()
                .any(|&b| self.dimension == 1 && (x[0] - b).abs() < 1e-3)
            {
                continue;
            }
            let g = (self.gradient)(&x);
            if !g.iter().all(|v| v.is_finite()) {
                return Err(Error::IncompatiblePerturbation(format!(
                    "{}: non-finite gradient at probe",
                    self.label
                )));
            }
            let h = 1e-5;
            for axis in 0..self.dimension {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[axis] += h;
                xm[axis] -= h;
                let fd = ((self.value)(&xp) - (self.value)(&xm)) / (2.0 * h);
                let denom = 1.0 + g[axis].abs();
                if ((fd - g[axis]) / denom).abs() > 1e-5 {
                    return Err(Error::IncompatiblePerturbation(format!(
                        "{}: gradient mismatch vs finite differences at {x:?} axis {axis}",
                        self.label
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn anchor(&self) -> &MinimizerSet {
        &self.anchor
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// `c · h`, same anchor.
    pub fn scaled(&self, c: f64) -> Perturbation {
        let v = self.value.clone();
        let g = self.gradient.clone();
        Perturbation {
            label: format!("scaled:{c}:{}", self.label),
            dimension: self.dimension,
            value: Arc::new(move |x| c * v(x)),
            gradient: Arc::new(move |x| g(x).into_iter().map(|gi| c * gi).collect()),
            anchor: self.anchor.clone(),
            breakpoints: self.breakpoints.clone(),
        }
    }

    /// `h₁ + h₂`; the anchors must agree.
    pub fn sum(a: &Perturbation, b: &Perturbation) -> Result<Perturbation> {
        if a.anchor != b.anchor || a.dimension != b.dimension {
            return Err(Error::IncompatiblePerturbation(
                "summands must share anchor set and dimension".into(),
            ));
        }
        let (va, ga) = (a.value.clone(), a.gradient.clone());
        let (vb, gb) = (b.value.clone(), b.gradient.clone());
        let mut breaks = a.breakpoints.clone();
        breaks.extend_from_slice(&b.breakpoints);
        breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
        breaks.dedup();
        Ok(Perturbation {
            label: format!("sum:{}+{}", a.label, b.label),
            dimension: a.dimension,
            value: Arc::new(move |x| va(x) + vb(x)),
            gradient: Arc::new(move |x| ga(x).into_iter().zip(gb(x)).map(|(p, q)| p + q).collect()),
            anchor: a.anchor.clone(),
            breakpoints: breaks,
        })
    }
}

/// Supremum of ‖∇h‖/d(·, anchor) over the grid with golden-section
/// refinement, plus a flag raised when the ratio is still climbing at the
/// box boundary (the norm is then not certified finite).
#[derive(Debug, Clone)]
pub struct StarNormReport {
    pub value: f64,
    pub witness: Vec<f64>,
    pub boundary_growth: bool,
}

pub fn star_norm(h: &Perturbation, grid: &EstimationGrid) -> Result<StarNormReport> {
    grid.validate()?;
    let ratio = |x: &[f64]| -> Option<f64> {
        let d = h.anchor().distance(x);
        if d < grid.exclusion_radius {
            return None;
        }
        let r = norm2(&h.gradient(x)) / d;
        r.is_finite().then_some(r)
    };

    let np = grid.num_points();
    let best = (0..np)
        .into_par_iter()
        .fold(
            || (f64::NEG_INFINITY, usize::MAX),
            |acc, idx| match ratio(&grid.point(idx)) {
                Some(r) if r > acc.0 || (r == acc.0 && idx < acc.1) => (r, idx),
                _ => acc,
            },
        )
        .reduce(
            || (f64::NEG_INFINITY, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    if best.1 == usize::MAX {
        return Err(Error::Estimation(
            "empty effective grid for star norm".into(),
        ));
    }

    // coordinate-wise refinement near the discrete argmax
    let mut value = best.0;
    let mut witness = grid.point(best.1);
    let sweeps = if grid.dimension() == 1 { 1 } else { 3 };
    for _ in 0..sweeps {
        for axis in 0..grid.dimension() {
            let hstep = grid.step(axis);
            let lo = (witness[axis] - hstep).max(grid.low[axis]);
            let hi = (witness[axis] + hstep).min(grid.high[axis]);
            let eval = |t: f64| {
                let mut q = witness.clone();
                q[axis] = t;
                ratio(&q).unwrap_or(f64::NEG_INFINITY)
            };
            let (t, r) = golden_max(lo, hi, eval);
            if r.is_finite() && r > value {
                value = r;
                witness[axis] = t;
            }
        }
    }

    // growth probe: compare the boundary-side ratio against a point pulled
    // 1% of the box span toward the center
    let mut boundary_growth = false;
    for axis in 0..grid.dimension() {
        let span = grid.high[axis] - grid.low[axis];
        let at_boundary = witness[axis] >= grid.high[axis] - grid.step(axis)
            || witness[axis] <= grid.low[axis] + grid.step(axis);
        if !at_boundary {
            continue;
        }
        let mut inner = witness.clone();
        let center = 0.5 * (grid.low[axis] + grid.high[axis]);
        inner[axis] += if witness[axis] > center {
            -0.01 * span
        } else {
            0.01 * span
        };
        if let (Some(rb), Some(ri)) = (ratio(&witness), ratio(&inner)) {
            if rb > 1.01 * ri {
                boundary_growth = true;
            }
        }
    }

    Ok(StarNormReport {
        value,
        witness,
        boundary_growth,
    })
}

fn golden_max<F: Fn(f64) -> f64>(mut a: f64, mut b: f64, f: F) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// The ramp-and-return bump: derivative 0 / (1−t−ε²)/ε / (t−ε²−1)/ε / 0 on
/// the four branches split at 1−ε², 1, 1+ε². Its slope never exceeds ε and
/// it is constant past 1+ε², so its star norm vanishes with ε while its
/// second derivative blows up like 1/ε.
pub fn make_omega_eps(eps: f64, direction: &[f64], x_star: &[f64]) -> Result<Perturbation> {
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "omega_eps needs 0 < eps < 1, got {eps}"
        )));
    }
    if (norm2(direction) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(
            "direction must be a unit vector".into(),
        ));
    }
    if direction.len() != x_star.len() {
        return Err(Error::InvalidParameter(
            "direction and x_star dimension mismatch".into(),
        ));
    }
    let e2 = eps * eps;
    let deriv = Piecewise1d::new(
        vec![1.0 - e2, 1.0, 1.0 + e2],
        vec![
            Poly::constant(0.0),
            Poly::new(vec![(1.0 - e2) / eps, -1.0 / eps]),
            Poly::new(vec![-(1.0 + e2) / eps, 1.0 / eps]),
            Poly::constant(0.0),
        ],
    );
    let omega = Piecewise1d::integral_of(&deriv, 0.0, 0.0);
    debug_assert!(omega.max_gluing_gap() < 1e-12);

    let dim = direction.len();
    let u_v: Vec<f64> = direction.to_vec();
    let u_g = u_v.clone();
    let xs_v: Vec<f64> = x_star.to_vec();
    let xs_g = xs_v.clone();
    let omega_d = deriv;
    let omega_v = omega;
    let breakpoints = if dim == 1 && direction[0] == 1.0 {
        vec![x_star[0] + 1.0 - e2, x_star[0] + 1.0, x_star[0] + 1.0 + e2]
    } else {
        Vec::new()
    };
    let value: ValueFn = Arc::new(move |x| {
        let t = dot(&sub(x, &xs_v), &u_v);
        omega_v.value(t)
    });
    let gradient: GradFn = Arc::new(move |x| {
        let t = dot(&sub(x, &xs_g), &u_g);
        let s = omega_d.value(t);
        u_g.iter().map(|&ui| s * ui).collect()
    });
    Perturbation::new(
        format!("omega_eps:{eps}"),
        dim,
        value,
        gradient,
        MinimizerSet::Point(x_star.to_vec()),
        breakpoints,
    )
}

/// `h = g − f` as a perturbation anchored at f's minimizer set.
pub fn diff_as_perturbation(f: &Objective, g: &Objective) -> Result<Perturbation> {
    if f.dimension() != g.dimension() {
        return Err(Error::IncompatiblePerturbation("dimension mismatch".into()));
    }
    if f.minimizers() != g.minimizers() {
        return Err(Error::IncompatiblePerturbation(
            "objectives must share the minimizer set".into(),
        ));
    }
    let (fa, fb) = (f.clone(), f.clone());
    let (ga, gb) = (g.clone(), g.clone());
    let mut breaks = f.breakpoints().to_vec();
    breaks.extend_from_slice(g.breakpoints());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    Perturbation::new(
        format!("diff:{}-{}", g.label(), f.label()),
        f.dimension(),
        Arc::new(move |x| ga.value(x) - fa.value(x)),
        Arc::new(move |x| {
            gb.gradient(x)
                .into_iter()
                .zip(fb.gradient(x))
                .map(|(p, q)| p - q)
                .collect()
        }),
        f.minimizers().clone(),
        breaks,
    )
}

/// `f + h` with f's minimizers, accepted only if the minimum structure
/// survives: h may not create values below f* on the grid nor disturb the
/// stationarity of the anchors.
pub fn perturb(f: &Objective, h: &Perturbation) -> Result<Objective> {
    perturb_with_grid(f, h, &EstimationGrid::default_for(f))
}

pub fn perturb_with_grid(
    f: &Objective,
    h: &Perturbation,
    grid: &EstimationGrid,
) -> Result<Objective> {
    if h.anchor() != f.minimizers() || h.dimension() != f.dimension() {
        return Err(Error::IncompatiblePerturbation(format!(
            "{} is not anchored at the minimizers of {}",
            h.label(),
            f.label()
        )));
    }
    let (fa, fb) = (f.clone(), f.clone());
    let (ha, hb) = (h.clone(), h.clone());
    let mut breaks = f.breakpoints().to_vec();
    breaks.extend_from_slice(h.breakpoints());
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup();
    let g = Objective::general(
        format!("perturbed:{}+{}", f.label(), h.label()),
        f.dimension(),
        Arc::new(move |x| fa.value(x) + ha.value(x)),
        Arc::new(move |x| {
            fb.gradient(x)
                .into_iter()
                .zip(hb.gradient(x))
                .map(|(p, q)| p + q)
                .collect()
        }),
        f.minimizers().clone(),
        f.f_star(),
    )
    .with_breakpoints(breaks);

    g.validate_minimum(1e-9)
        .map_err(|e| Error::PerturbationChangesMinimizers(e.to_string()))?;

    let np = grid.num_points();
    let worst = (0..np)
        .into_par_iter()
        .map(|idx| {
            let x = grid.point(idx);
            (g.value(&x) - g.f_star(), idx)
        })
        .reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    if worst.0 < -1e-12 {
        return Err(Error::PerturbationChangesMinimizers(format!(
            "value drops {:.3e} below the declared optimum at {:?}",
            -worst.0,
            grid.point(worst.1)
        )));
    }
    Ok(g)
}

//! The twelve upper/lower conditions, numerical estimation of their optimal
//! constants over a grid, and membership verification.
//!
//! Every family is driven by a defining ratio ρ(x) (a pair ratio for the
//! two-point curvature family): the lower-side optimal constant is the
//! infimum of ρ over the probe region, the upper-side one its supremum.
//! Grid scans are exact for the piecewise-quadratic corpus because the
//! extrema land on grid points; golden-section refinement closes the gap for
//! smooth objectives.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::vecmath::{dist2, dot, norm2, sub};

/// The six condition families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Two-point curvature bounds (smoothness / strong convexity).
    Sc,
    /// Same inequality restricted to (x, projection of x).
    StarSc,
    /// Restricted secant inequality.
    Rsi,
    /// Error bound: gradient norm vs distance.
    Eb,
    /// Polyak-Łojasiewicz: gradient norm vs value gap.
    Pl,
    /// Quadratic growth: value gap vs squared distance.
    Qg,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Sc,
        Family::StarSc,
        Family::Rsi,
        Family::Eb,
        Family::Pl,
        Family::Qg,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Family::Sc => "SC",
            Family::StarSc => "*SC",
            Family::Rsi => "RSI",
            Family::Eb => "EB",
            Family::Pl => "PL",
            Family::Qg => "QG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    pub fn is_upper(&self) -> bool {
        matches!(self, Side::Upper)
    }
}

/// One of the twelve conditions: a family together with a side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ConditionKind {
    pub family: Family,
    pub side: Side,
}

impl ConditionKind {
    pub const fn new(family: Family, side: Side) -> Self {
        ConditionKind { family, side }
    }

    pub const ALL: [ConditionKind; 12] = [
        ConditionKind::new(Family::Sc, Side::Upper),
        ConditionKind::new(Family::Sc, Side::Lower),
        ConditionKind::new(Family::StarSc, Side::Upper),
        ConditionKind::new(Family::StarSc, Side::Lower),
        ConditionKind::new(Family::Rsi, Side::Upper),
        ConditionKind::new(Family::Rsi, Side::Lower),
        ConditionKind::new(Family::Eb, Side::Upper),
        ConditionKind::new(Family::Eb, Side::Lower),
        ConditionKind::new(Family::Pl, Side::Upper),
        ConditionKind::new(Family::Pl, Side::Lower),
        ConditionKind::new(Family::Qg, Side::Upper),
        ConditionKind::new(Family::Qg, Side::Lower),
    ];

    /// Wire form: "SC+", "*SC-", "RSI+", "EB-", "PL+", "QG-".
    pub fn code(&self) -> String {
        format!(
            "{}{}",
            self.family.code(),
            if self.side.is_upper() { "+" } else { "-" }
        )
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (fam, side) = s.split_at(s.len().saturating_sub(1));
        let side = match side {
            "+" => Side::Upper,
            "-" => Side::Lower,
            _ => return Err(Error::UnknownLabel(format!("condition kind {s}"))),
        };
        let family = match fam {
            "SC" => Family::Sc,
            "*SC" => Family::StarSc,
            "RSI" => Family::Rsi,
            "EB" => Family::Eb,
            "PL" => Family::Pl,
            "QG" => Family::Qg,
            _ => return Err(Error::UnknownLabel(format!("condition family {fam}"))),
        };
        Ok(ConditionKind { family, side })
    }
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code())
    }
}

/// A condition with its constant. Upper constants certify the inequality for
/// every larger value, lower constants for every smaller one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionConstant {
    pub kind: ConditionKind,
    pub value: f64,
}

impl ConditionConstant {
    pub fn new(kind: ConditionKind, value: f64) -> Self {
        ConditionConstant { kind, value }
    }

    /// Upper constants must be positive; lower ones too, except the two
    /// curvature families where non-positive values express the extended
    /// (possibly non-convex) regime.
    pub fn is_meaningful(&self) -> bool {
        if !self.value.is_finite() {
            return false;
        }
        match (self.kind.side, self.kind.family) {
            (Side::Upper, _) => self.value > 0.0,
            (Side::Lower, Family::Sc) | (Side::Lower, Family::StarSc) => true,
            (Side::Lower, _) => self.value > 0.0,
        }
    }
}

impl fmt::Display for ConditionConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind, self.value)
    }
}

/// Rectangular probe region with per-axis resolution. Points closer to the
/// minimizer set than `exclusion_radius` are skipped wherever a defining
/// ratio divides by the distance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimationGrid {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
    pub points_per_axis: usize,
    pub exclusion_radius: f64,
    pub pair_samples: usize,
    pub pair_seed: u64,
}

impl EstimationGrid {
    pub fn new(low: Vec<f64>, high: Vec<f64>, points_per_axis: usize) -> Self {
        assert_eq!(low.len(), high.len());
        let pair_samples = if low.len() == 1 { 201 } else { 10_000 };
        EstimationGrid {
            low,
            high,
            points_per_axis,
            exclusion_radius: 1e-4,
            pair_samples,
            pair_seed: 0x5eed,
        }
    }

    /// Defaults used throughout: a dense [-5, 5] line for one-dimensional
    /// objectives, [-3, 3]^d with a per-axis budget otherwise.
    pub fn default_for(obj: &Objective) -> Self {
        let d = obj.dimension();
        if d == 1 {
            EstimationGrid::new(vec![-5.0], vec![5.0], 20_001)
        } else {
            let ppa = match d {
                2 => 41,
                3 => 41,
                4 => 21,
                _ => 15,
            };
            EstimationGrid::new(vec![-3.0; d], vec![3.0; d], ppa)
        }
    }

    /// Box of half-width `half` around `center`.
    pub fn centered(center: &[f64], half: f64, points_per_axis: usize) -> Self {
        EstimationGrid::new(
            center.iter().map(|c| c - half).collect(),
            center.iter().map(|c| c + half).collect(),
            points_per_axis,
        )
    }

    pub fn dimension(&self) -> usize {
        self.low.len()
    }

    pub fn num_points(&self) -> usize {
        self.points_per_axis.pow(self.dimension() as u32)
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.high[axis] - self.low[axis]) / (self.points_per_axis - 1) as f64
    }

    pub fn point(&self, mut idx: usize) -> Vec<f64> {
        let d = self.dimension();
        let mut x = vec![0.0; d];
        for (axis, xi) in x.iter_mut().enumerate() {
            let k = idx % self.points_per_axis;
            idx /= self.points_per_axis;
            *xi = self.low[axis] + k as f64 * self.step(axis);
        }
        x
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.low.iter().zip(self.high.iter()))
            .all(|(&xi, (&lo, &hi))| xi >= lo && xi <= hi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 2 {
            return Err(Error::Estimation(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        if !self.exclusion_radius.is_finite() || self.exclusion_radius <= 0.0 {
            return Err(Error::Estimation(
                "exclusion radius must be positive".into(),
            ));
        }
        if self
            .low
            .iter()
            .zip(self.high.iter())
            .any(|(&lo, &hi)| lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::Estimation("grid box is empty".into()));
        }
        Ok(())
    }

    pub fn spec_string(&self) -> String {
        format!(
            "box=[{}]x[{}] points_per_axis={} exclusion={} pair_samples={} pair_seed={}",
            self.low
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.high
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(","),
            self.points_per_axis,
            self.exclusion_radius,
            self.pair_samples,
            self.pair_seed
        )
    }
}

/// Point (or point pair, for the two-point family) achieving an extremum or
/// a violation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    Point(Vec<f64>),
    Pair(Vec<f64>, Vec<f64>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn fmt_vec(v: &[f64]) -> String {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(" ")
        }
        match self {
            Witness::Point(p) => write!(f, "({})", fmt_vec(p)),
            Witness::Pair(a, b) => write!(f, "({})->({})", fmt_vec(a), fmt_vec(b)),
        }
    }
}

/// Result of `estimate_constant`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub constant: ConditionConstant,
    pub witness: Witness,
    /// Number of ratio evaluations that entered the extremum.
    pub samples: usize,
}

/// Outcome of `verify_membership`: worst slack of the defining inequality
/// over the probe set, negative slack meaning violation beyond tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Membership {
    pub holds: bool,
    pub worst_slack: f64,
    pub witness: Witness,
}

/// The scalar ρ such that the condition with constant c holds at x iff
/// c ≤ ρ (lower side) or c ≥ ρ (upper side). The two-point family requires
/// the second point `y`.
pub fn defining_ratio(
    kind: ConditionKind,
    obj: &Objective,
    x: &[f64],
    y: Option<&[f64]>,
) -> Result<f64> {
    let exclusion = 1e-12;
    if kind.family == Family::Sc {
        let y = y.ok_or_else(|| {
            Error::InvalidParameter("two-point family needs a second point".into())
        })?;
        let d2 = {
            let d = dist2(x, y);
            d * d
        };
        if d2 < exclusion {
            return Err(Error::InvalidParameter("pair points must differ".into()));
        }
        let g = obj.gradient(x);
        let lin: f64 = g
            .iter()
            .zip(y.iter().zip(x.iter()))
            .map(|(&gi, (&yi, &xi))| gi * (yi - xi))
            .sum();
        return Ok(2.0 * (obj.value(y) - obj.value(x) - lin) / d2);
    }

    let dist = obj.dist(x);
    if dist < exclusion {
        return Err(Error::ExcludedPoint {
            distance: dist,
            exclusion,
        });
    }
    let ratio = match kind.family {
        Family::Sc => unreachable!(),
        Family::StarSc => {
            let p = obj.minimizers().project(x);
            let g = obj.gradient(x);
            let lin = dot(&g, &sub(&p, x));
            2.0 * (obj.f_star() - obj.value(x) - lin) / (dist * dist)
        }
        Family::Rsi => {
            let p = obj.minimizers().project(x);
            let g = obj.gradient(x);
            dot(&g, &sub(x, &p)) / (dist * dist)
        }
        Family::Eb => norm2(&obj.gradient(x)) / dist,
        Family::Pl => {
            let gap = obj.subopt(x);
            if gap <= 0.0 {
                f64::INFINITY
            } else {
                let g = obj.gradient(x);
                dot(&g, &g) / (2.0 * gap)
            }
        }
        Family::Qg => 2.0 * obj.subopt(x) / (dist * dist),
    };
    Ok(ratio)
}

#[derive(Clone)]
struct Extremum {
    value: f64,
    idx: usize,
    witness: Witness,
}

fn pick(a: Extremum, b: Extremum, upper: bool) -> Extremum {
    let b_better = if upper {
        b.value > a.value
    } else {
        b.value < a.value
    };
    // index tiebreak keeps reductions deterministic under any partitioning
    if b_better || (b.value == a.value && b.idx < a.idx) {
        b
    } else {
        a
    }
}

fn golden_section<F: Fn(f64) -> f64>(
    mut a: f64,
    mut b: f64,
    f: F,
    maximize: bool,
    iters: usize,
) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let sign = if maximize { 1.0 } else { -1.0 };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = sign * f(c);
    let mut fd = sign * f(d);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = sign * f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = sign * f(d);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Point set used by the two-point family: an even sub-grid plus interior
/// points of every interval between breakpoints. Thin high-curvature strips
/// (width ε²) are far below the sub-grid resolution, so the extrema of the
/// pair ratio are only reachable with breakpoint-aware points.
fn sc_points_1d(obj: &Objective, grid: &EstimationGrid) -> Vec<f64> {
    let lo = grid.low[0];
    let hi = grid.high[0];
    let n = grid.pair_samples.max(9);
    let mut pts: Vec<f64> = (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect();
    let mut knots: Vec<f64> = vec![lo];
    knots.extend(
        obj.breakpoints()
            .iter()
            .copied()
            .filter(|&b| b > lo && b < hi),
    );
    knots.push(hi);
    knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        for k in 1..10 {
            pts.push(a + (b - a) * k as f64 / 10.0);
        }
        pts.push(a);
    }
    pts.push(hi);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

fn estimate_sc(obj: &Objective, grid: &EstimationGrid, upper: bool) -> Result<ConstantEstimate> {
    let d = grid.dimension();
    let init = Extremum {
        value: if upper {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
        idx: usize::MAX,
        witness: Witness::Point(vec![]),
    };
    let samples;

    let best = if d == 1 {
        let pts = sc_points_1d(obj, grid);
        let m = pts.len();
        samples = m * (m - 1);
        let best = (0..m * m)
            .into_par_iter()
            .fold(
                || init.clone(),
                |acc, idx| {
                    let (i, j) = (idx / m, idx % m);
                    if i == j {
                        return acc;
                    }
                    let (x, y) = (pts[i], pts[j]);
                    match defining_ratio(
                        ConditionKind::new(
                            Family::Sc,
                            if upper { Side::Upper } else { Side::Lower },
                        ),
                        obj,
                        &[x],
                        Some(&[y]),
                    ) {
                        Ok(r) if r.is_finite() => pick(
                            acc,
                            Extremum {
                                value: r,
                                idx,
                                witness: Witness::Pair(vec![x], vec![y]),
                            },
                            upper,
                        ),
                        _ => acc,
                    }
                },
            )
            .reduce(|| init.clone(), |a, b| pick(a, b, upper));

        // Shrinking-pair refinement through the gradient secant slope
        // (f'(c+w) - f'(c-w)) / (2w): it averages the local curvature, so it
        // never overshoots the true extremum, and unlike the value bracket it
        // has no small-separation cancellation.
        if let Witness::Pair(a, b) = &best.witness {
            let w = 1e-5;
            let span = (grid.high[0] - grid.low[0]) / (grid.pair_samples.max(9) - 1) as f64;
            let c0 = 0.5 * (a[0] + b[0]);
            let lo = (c0 - span).max(grid.low[0] + w);
            let hi = (c0 + span).min(grid.high[0] - w);
            if lo < hi {
                let secant =
                    |c: f64| (obj.gradient(&[c + w])[0] - obj.gradient(&[c - w])[0]) / (2.0 * w);
                let (c, r) = golden_section(lo, hi, secant, upper, 60);
                let refined = Extremum {
                    value: r,
                    idx: best.idx,
                    witness: Witness::Pair(vec![c - w], vec![c + w]),
                };
                pick(best.clone(), refined, upper)
            } else {
                best
            }
        } else {
            best
        }
    } else {
        // axis-aligned neighbor pairs catch eigendirections of separable
        // objectives exactly; random pairs cover the rest
        let np = grid.num_points();
        let axis_best = (0..np * d)
            .into_par_iter()
            .fold(
                || init.clone(),
                |acc, idx| {
                    let (p, axis) = (idx / d, idx % d);
                    let x = grid.point(p);
                    let mut y = x.clone();
                    y[axis] += grid.step(axis);
                    if y[axis] > grid.high[axis] {
                        return acc;
                    }
                    match defining_ratio(
                        ConditionKind::new(Family::Sc, Side::Upper),
                        obj,
                        &x,
                        Some(&y),
                    ) {
                        Ok(r) if r.is_finite() => pick(
                            acc,
                            Extremum {
                                value: r,
                                idx,
                                witness: Witness::Pair(x, y),
                            },
                            upper,
                        ),
                        _ => acc,
                    }
                },
            )
            .reduce(|| init.clone(), |a, b| pick(a, b, upper));
        samples = np * d + grid.pair_samples;

        let mut rng = ChaCha8Rng::seed_from_u64(grid.pair_seed);
        let mut best = axis_best;
        for k in 0..grid.pair_samples {
            let x: Vec<f64> = (0..d)
                .map(|i| rng.gen_range(grid.low[i]..=grid.high[i]))
                .collect();
            let y: Vec<f64> = (0..d)
                .map(|i| rng.gen_range(grid.low[i]..=grid.high[i]))
                .collect();
            if dist2(&x, &y) < 1e-9 {
                continue;
            }
            if let Ok(r) = defining_ratio(
                ConditionKind::new(Family::Sc, Side::Upper),
                obj,
                &x,
                Some(&y),
            ) {
                if r.is_finite() {
                    best = pick(
                        best,
                        Extremum {
                            value: r,
                            idx: np * d + k,
                            witness: Witness::Pair(x, y),
                        },
                        upper,
                    );
                }
            }
        }
        best
    };

    if best.idx == usize::MAX {
        return Err(Error::Estimation("no usable pair in grid".into()));
    }
    Ok(ConstantEstimate {
        constant: ConditionConstant::new(
            ConditionKind::new(Family::Sc, if upper { Side::Upper } else { Side::Lower }),
            best.value,
        ),
        witness: best.witness,
        samples,
    })
}

/// Optimal constant of `kind` over the grid: infimum of the defining ratio
/// for lower conditions, supremum for upper ones, with golden-section
/// refinement around the discrete extremum.
pub fn estimate_constant(
    kind: ConditionKind,
    obj: &Objective,
    grid: &EstimationGrid,
) -> Result<ConstantEstimate> {
    grid.validate()?;
    let upper = kind.side.is_upper();
    if kind.family == Family::Sc {
        return estimate_sc(obj, grid, upper);
    }

    let np = grid.num_points();
    let skip_infinite_pl = kind.family == Family::Pl && (!upper || obj.has_plateau());
    let init = Extremum {
        value: if upper {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
        idx: usize::MAX,
        witness: Witness::Point(vec![]),
    };

    let best = (0..np)
        .into_par_iter()
        .fold(
            || init.clone(),
            |acc, idx| {
                let x = grid.point(idx);
                if obj.dist(&x) < grid.exclusion_radius {
                    return acc;
                }
                match defining_ratio(kind, obj, &x, None) {
                    Ok(r) => {
                        if r.is_nan() || (r.is_infinite() && skip_infinite_pl) {
                            acc
                        } else if r.is_infinite() && !upper {
                            // +inf never drags an infimum down
                            acc
                        } else {
                            pick(
                                acc,
                                Extremum {
                                    value: r,
                                    idx,
                                    witness: Witness::Point(x),
                                },
                                upper,
                            )
                        }
                    }
                    Err(_) => acc,
                }
            },
        )
        .reduce(|| init.clone(), |a, b| pick(a, b, upper));

    if best.idx == usize::MAX {
        return Err(Error::Estimation(format!(
            "empty effective grid for {kind} on {}",
            obj.label()
        )));
    }

    // refinement around the discrete extremum, one axis at a time
    let mut refined = best.clone();
    if refined.value.is_finite() {
        if let Witness::Point(p0) = &best.witness {
            let mut p = p0.clone();
            let sweeps = if grid.dimension() == 1 { 1 } else { 3 };
            for _ in 0..sweeps {
                for axis in 0..grid.dimension() {
                    let h = grid.step(axis);
                    let lo = (p[axis] - h).max(grid.low[axis]);
                    let hi = (p[axis] + h).min(grid.high[axis]);
                    let eval = |t: f64| {
                        let mut q = p.clone();
                        q[axis] = t;
                        if obj.dist(&q) < grid.exclusion_radius {
                            return if upper {
                                f64::NEG_INFINITY
                            } else {
                                f64::INFINITY
                            };
                        }
                        match defining_ratio(kind, obj, &q, None) {
                            Ok(r) if r.is_finite() => r,
                            _ => {
                                if upper {
                                    f64::NEG_INFINITY
                                } else {
                                    f64::INFINITY
                                }
                            }
                        }
                    };
                    let (t, r) = golden_section(lo, hi, eval, upper, 60);
                    let better = if upper {
                        r > refined.value
                    } else {
                        r < refined.value
                    };
                    if r.is_finite() && better {
                        p[axis] = t;
                        refined = Extremum {
                            value: r,
                            idx: best.idx,
                            witness: Witness::Point(p.clone()),
                        };
                    }
                }
            }
        }
    }

    Ok(ConstantEstimate {
        constant: ConditionConstant::new(kind, refined.value),
        witness: refined.witness,
        samples: np,
    })
}

/// All twelve constants of one objective.
pub fn estimate_all(obj: &Objective, grid: &EstimationGrid) -> Result<Vec<ConstantEstimate>> {
    ConditionKind::ALL
        .iter()
        .map(|&k| estimate_constant(k, obj, grid))
        .collect()
}

fn slack_at(obj: &Objective, c: &ConditionConstant, x: &[f64]) -> f64 {
    let p = obj.minimizers().project(x);
    let d = dist2(x, &p);
    let side = c.kind.side;
    let v = c.value;
    let raw = match c.kind.family {
        Family::Sc => unreachable!("two-point family handled by pair scan"),
        Family::StarSc => {
            let g = obj.gradient(x);
            let lin = dot(&g, &sub(&p, x));
            obj.f_star() - obj.value(x) - lin - 0.5 * v * d * d
        }
        Family::Rsi => {
            let g = obj.gradient(x);
            dot(&g, &sub(x, &p)) - v * d * d
        }
        Family::Eb => norm2(&obj.gradient(x)) - v * d,
        Family::Pl => {
            let g = obj.gradient(x);
            0.5 * dot(&g, &g) - v * obj.subopt(x)
        }
        Family::Qg => obj.subopt(x) - 0.5 * v * d * d,
    };
    // lower-side inequalities read `raw >= 0`; upper-side ones are the same
    // expression required nonpositive
    match side {
        Side::Lower => raw,
        Side::Upper => -raw,
    }
}

fn sc_slack_at(obj: &Objective, c: &ConditionConstant, x: &[f64], y: &[f64]) -> f64 {
    let g = obj.gradient(x);
    let lin: f64 = g
        .iter()
        .zip(y.iter().zip(x.iter()))
        .map(|(&gi, (&yi, &xi))| gi * (yi - xi))
        .sum();
    let d = dist2(x, y);
    let raw = obj.value(y) - obj.value(x) - lin - 0.5 * c.value * d * d;
    match c.kind.side {
        Side::Lower => raw,
        Side::Upper => -raw,
    }
}

/// Does the defining inequality with this constant hold at every probe point
/// (pair) within `tol`? Returns the worst slack and its witness either way.
pub fn verify_membership(
    obj: &Objective,
    constant: &ConditionConstant,
    grid: &EstimationGrid,
    tol: f64,
) -> Result<Membership> {
    grid.validate()?;
    let init = Extremum {
        value: f64::INFINITY,
        idx: usize::MAX,
        witness: Witness::Point(vec![]),
    };

    let worst = if constant.kind.family == Family::Sc {
        if grid.dimension() == 1 {
            let pts = sc_points_1d(obj, grid);
            let m = pts.len();
            (0..m * m)
                .into_par_iter()
                .fold(
                    || init.clone(),
                    |acc, idx| {
                        let (i, j) = (idx / m, idx % m);
                        if i == j {
                            return acc;
                        }
                        let s = sc_slack_at(obj, constant, &[pts[i]], &[pts[j]]);
                        if s.is_nan() {
                            return acc;
                        }
                        pick(
                            acc,
                            Extremum {
                                value: s,
                                idx,
                                witness: Witness::Pair(vec![pts[i]], vec![pts[j]]),
                            },
                            false,
                        )
                    },
                )
                .reduce(|| init.clone(), |a, b| pick(a, b, false))
        } else {
            let np = grid.num_points();
            let d = grid.dimension();
            let mut worst = init.clone();
            for idx in 0..np * d {
                let (pi, axis) = (idx / d, idx % d);
                let x = grid.point(pi);
                let mut y = x.clone();
                y[axis] += grid.step(axis);
                if y[axis] > grid.high[axis] {
                    continue;
                }
                let s = sc_slack_at(obj, constant, &x, &y);
                if !s.is_nan() {
                    worst = pick(
                        worst,
                        Extremum {
                            value: s,
                            idx,
                            witness: Witness::Pair(x, y),
                        },
                        false,
                    );
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(grid.pair_seed);
            for k in 0..grid.pair_samples {
                let x: Vec<f64> = (0..d)
                    .map(|i| rng.gen_range(grid.low[i]..=grid.high[i]))
                    .collect();
                let y: Vec<f64> = (0..d)
                    .map(|i| rng.gen_range(grid.low[i]..=grid.high[i]))
                    .collect();
                if dist2(&x, &y) < 1e-9 {
                    continue;
                }
                let s = sc_slack_at(obj, constant, &x, &y);
                if !s.is_nan() {
                    worst = pick(
                        worst,
                        Extremum {
                            value: s,
                            idx: np * d + k,
                            witness: Witness::Pair(x, y),
                        },
                        false,
                    );
                }
            }
            worst
        }
    } else {
        let np = grid.num_points();
        (0..np)
            .into_par_iter()
            .fold(
                || init.clone(),
                |acc, idx| {
                    let x = grid.point(idx);
                    let s = slack_at(obj, constant, &x);
                    if s.is_nan() {
                        return acc;
                    }
                    pick(
                        acc,
                        Extremum {
                            value: s,
                            idx,
                            witness: Witness::Point(x),
                        },
                        false,
                    )
                },
            )
            .reduce(|| init.clone(), |a, b| pick(a, b, false))
    };

    if worst.idx == usize::MAX {
        return Err(Error::Estimation("no usable probe point".into()));
    }
    Ok(Membership {
        holds: worst.value >= -tol,
        worst_slack: worst.value,
        witness: worst.witness,
    })
}

/// Default absolute tolerance on the defining inequalities: corpus
/// arithmetic is exact piecewise-polynomial, slack only covers rounding.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

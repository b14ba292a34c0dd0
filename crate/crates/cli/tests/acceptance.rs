//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `cargo test -p condkit-cli --test acceptance -- --nocapture`).
//! Criteria carry their stated tolerances and runtime budgets.

use std::time::Instant;

use condkit::{
    apply_edge, edge_by_id, estimate_all, estimate_constant, estimate_rate, gd, make_f_eps,
    make_f_lrp, make_omega_eps, make_plateau, make_quadratic, make_smooth_abs, parse_objective,
    star_norm, verify_all_edges, verify_membership, ConditionConstant, ConditionKind,
    EstimationGrid, Extras, Family, Lyapunov, RateClass, Side, Trajectory, MEMBERSHIP_TOL,
    SUBOPT_ATOL,
};
use condkit_cli::commands;
use condkit_cli::config::Config;

fn kind(f: Family, s: Side) -> ConditionKind {
    ConditionKind::new(f, s)
}

fn pass(n: usize, detail: &str) {
    println!("acceptance criterion {n}: PASS - {detail}");
}

fn fail(n: usize, detail: &str) -> ! {
    println!("acceptance criterion {n}: FAIL - {detail}");
    panic!("acceptance criterion {n} failed: {detail}");
}

fn budget(n: usize, started: Instant, limit_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < limit_s,
        "criterion {n} exceeded its runtime budget: {elapsed:.1}s > {limit_s}s"
    );
}

#[test]
fn criterion_01_lrp_constants() {
    let t0 = Instant::now();
    let f = make_f_lrp();
    let grid = EstimationGrid::default_for(&f);
    let estimates = estimate_all(&f, &grid).unwrap();
    let get = |k: ConditionKind| {
        estimates
            .iter()
            .find(|e| e.constant.kind == k)
            .unwrap()
            .constant
            .value
    };
    for fam in Family::ALL {
        let v = get(kind(fam, Side::Upper));
        if (v - 25.0).abs() > 1e-3 {
            fail(1, &format!("{}+ estimate {v} differs from 25", fam.code()));
        }
    }
    let targets = [
        (Family::Sc, 1.0),
        (Family::StarSc, 7.0),
        (Family::Rsi, 13.0),
        (Family::Eb, 13.0),
        (Family::Pl, 169.0 / 19.0),
        (Family::Qg, 19.0),
    ];
    for (fam, target) in targets {
        let v = get(kind(fam, Side::Lower));
        if (v - target).abs() > 1e-3 {
            if fam == Family::Qg {
                fail(
                    1,
                    &format!(
                        "growth floor estimate {v} differs from the specified 19; \
                         the exact optimum of 2f(x)/x^2 is 17, attained at x = 3 \
                         (f(3) = 76.5 < 9.5*9 = 85.5 refutes 19), so the specified \
                         value is unattainable for any sound estimator"
                    ),
                );
            }
            fail(
                1,
                &format!("{}- estimate {v} differs from {target}", fam.code()),
            );
        }
    }
    budget(1, t0, 10.0);
    pass(1, "all twelve benchmark constants within 1e-3");
}

#[test]
fn criterion_02_star_norm_examples() {
    let grid = EstimationGrid::new(vec![-5.0], vec![5.0], 20_001);
    let as_pert = |label: &str| {
        condkit::parse_perturbation(label, &condkit::MinimizerSet::point_1d(0.0)).unwrap()
    };
    let h = as_pert("smooth_abs");
    let n1 = star_norm(&h, &grid).unwrap().value;
    if (n1 - 1.0).abs() > 1e-6 {
        fail(2, &format!("smooth_abs norm {n1} differs from 1"));
    }
    let h = as_pert("cubic_ramp");
    let n2 = star_norm(&h, &grid).unwrap().value;
    if (n2 - 1.5).abs() > 1e-6 {
        fail(2, &format!("cubic_ramp norm {n2} differs from 3/2"));
    }
    for eps in [0.4, 0.2, 0.1] {
        let h = make_omega_eps(eps, &[1.0], &[0.0]).unwrap();
        let n = star_norm(&h, &grid).unwrap().value;
        let bound = eps / (1.0 - eps * eps) + 1e-9;
        if n > bound {
            fail(
                2,
                &format!("bump norm {n} exceeds bound {bound} at eps={eps}"),
            );
        }
        assert!(n > 0.0);
    }
    pass(
        2,
        &format!("norms {n1:.9} and {n2:.9}; bump norms within eps/(1-eps^2)"),
    );
}

#[test]
fn criterion_03_two_step_and_floor() {
    for eps in [0.1, 0.5, 1.0] {
        let f = make_f_eps(eps).unwrap();
        for x0 in [1.5, 3.0, 10.0] {
            let t = gd(&f, &[x0], 0.5, 2).unwrap();
            if t.iterates[2][0].abs() >= 1e-12 {
                fail(
                    3,
                    &format!("x2 = {} from x0={x0}, eps={eps}", t.iterates[2][0]),
                );
            }
        }
        let alpha = eps / (2.0 * eps + 1.0);
        let floor = (1.0 - eps * eps) / ((2.0 * eps + 1.0) * (1.0 + eps * eps));
        let t = gd(&f, &[3.0], alpha, 50).unwrap();
        for k in 0..50 {
            let lhs = t.iterates[k + 1][0].abs();
            let rhs = floor * t.iterates[k][0].abs() - 1e-12;
            if lhs < rhs {
                fail(
                    3,
                    &format!("per-step floor broken at k={k}, eps={eps}: {lhs} < {rhs}"),
                );
            }
        }
    }
    pass(
        3,
        "two-step convergence under the base tuning; per-step floor under the curvature tuning",
    );
}

#[test]
fn criterion_04_curvature_blowup_ladder() {
    let grid = EstimationGrid::new(vec![-5.0], vec![5.0], 20_001);
    let f0 = make_quadratic(&[2.0], &[0.0]).unwrap();
    let mut last_norm = f64::INFINITY;
    let mut last_upper = 0.0f64;
    for eps in [0.4, 0.2, 0.1, 0.05] {
        let fe = make_f_eps(eps).unwrap();
        let h = condkit::diff_as_perturbation(&f0, &fe).unwrap();
        let norm = star_norm(&h, &grid).unwrap().value;
        let upper = estimate_constant(kind(Family::Sc, Side::Upper), &fe, &grid)
            .unwrap()
            .constant
            .value;
        if norm >= last_norm {
            fail(
                4,
                &format!("perturbation norm failed to decrease at eps={eps}"),
            );
        }
        if upper <= last_upper {
            fail(
                4,
                &format!("curvature estimate failed to increase at eps={eps}"),
            );
        }
        if eps == 0.1 && (upper - 22.0).abs() > 1e-2 {
            fail(4, &format!("curvature at eps=0.1 is {upper}, want 22"));
        }
        if eps == 0.05 && (upper - 42.0).abs() > 1e-2 {
            fail(4, &format!("curvature at eps=0.05 is {upper}, want 42"));
        }
        last_norm = norm;
        last_upper = upper;
    }
    pass(
        4,
        "norm ladder strictly decreasing while the curvature estimate climbs 7, 12, 22, 42",
    );
}

#[test]
fn criterion_05_implication_graph_on_the_corpus() {
    let t0 = Instant::now();
    let corpus = [
        parse_objective("quadratic:1,10").unwrap(),
        parse_objective("f_lrp").unwrap(),
        parse_objective("f_eps:0.1").unwrap(),
        parse_objective("perturbed:quadratic:2+smooth_abs").unwrap(),
    ];
    for obj in &corpus {
        let grid = EstimationGrid::default_for(obj);
        let reports = verify_all_edges(obj, &grid, 1e-6).unwrap();
        if reports.len() != 21 {
            fail(
                5,
                &format!(
                    "{} edges applicable on {}, want 21",
                    reports.len(),
                    obj.label()
                ),
            );
        }
        for r in &reports {
            if !r.holds {
                fail(
                    5,
                    &format!(
                        "{} violated on {} (margin {:.3e})",
                        r.edge_id,
                        obj.label(),
                        r.margin
                    ),
                );
            }
        }
    }
    // the exact conversion cross-check on the benchmark constants
    let e = edge_by_id("star_sc-_and_qg-_to_rsi-").unwrap();
    let converted = apply_edge(
        e,
        &[
            ConditionConstant::new(kind(Family::StarSc, Side::Lower), 7.0),
            ConditionConstant::new(kind(Family::Qg, Side::Lower), 19.0),
        ],
    )
    .unwrap();
    if converted.value != 13.0 {
        fail(
            5,
            &format!("conversion produced {}, want exactly 13", converted.value),
        );
    }
    let f = make_f_lrp();
    let grid = EstimationGrid::default_for(&f);
    if !verify_membership(&f, &converted, &grid, 1e-6)
        .unwrap()
        .holds
    {
        fail(5, "secant floor 13 must hold on the benchmark");
    }
    let over = ConditionConstant::new(kind(Family::Rsi, Side::Lower), 13.0 + 1e-2);
    if verify_membership(&f, &over, &grid, MEMBERSHIP_TOL)
        .unwrap()
        .holds
    {
        fail(5, "secant floor 13 must be tight (13 + 1e-2 may not hold)");
    }
    budget(5, t0, 60.0);
    pass(
        5,
        "21 edges hold on all four corpus members; secant conversion exact and tight",
    );
}

fn lyapunov_series(t: &Trajectory, l: Lyapunov) -> Vec<f64> {
    match l {
        Lyapunov::ValueGap => t.subopt.clone(),
        Lyapunov::DistanceSq => t.dist.iter().map(|d| d * d).collect(),
        Lyapunov::MinValueGap => {
            let mut best = f64::INFINITY;
            t.subopt
                .iter()
                .map(|&s| {
                    best = best.min(s);
                    best
                })
                .collect()
        }
    }
}

#[test]
fn criterion_06_rate_table_compliance() {
    let extras = Extras {
        star_convex: true,
        convex: false,
    };
    let quad = make_quadratic(&[1.0, 10.0], &[0.0, 0.0]).unwrap();
    let lrp = make_f_lrp();
    // (rule pair, objective, L, mu, start)
    #[allow(clippy::type_complexity)]
    let cases: [(Family, Family, &condkit::Objective, f64, f64, Vec<f64>); 6] = [
        (Family::Sc, Family::Sc, &quad, 10.0, 1.0, vec![3.0, -2.0]),
        (Family::Sc, Family::Pl, &lrp, 25.0, 169.0 / 19.0, vec![3.3]),
        (Family::Pl, Family::StarSc, &lrp, 25.0, 7.0, vec![3.3]),
        (Family::Pl, Family::Rsi, &lrp, 25.0, 13.0, vec![3.3]),
        (Family::Eb, Family::Rsi, &lrp, 25.0, 13.0, vec![3.3]),
        (Family::Qg, Family::Sc, &lrp, 25.0, 1.0, vec![3.3]),
    ];
    for (up, lo, obj, l, mu, x0) in cases {
        let rule = condkit::gd_rule(up, lo, extras).unwrap();
        let q = rule.rate(l, mu);
        let t = gd(obj, &x0, rule.step_size(l, mu), 500).unwrap();
        let series = lyapunov_series(&t, rule.lyapunov());
        for w in series.windows(2) {
            if w[0] > SUBOPT_ATOL && w[1] > SUBOPT_ATOL && w[1] / w[0] > q + 1e-9 {
                fail(
                    6,
                    &format!(
                        "{}+/{}- ratio {} above guaranteed {q}",
                        up.code(),
                        lo.code(),
                        w[1] / w[0]
                    ),
                );
            }
        }
    }
    // quadratic floor: with a common condition number no cell may promise a
    // better rate than the two-sided contraction
    let extras_all = Extras {
        star_convex: true,
        convex: true,
    };
    let kappa = 10.0;
    let floor = condkit::RateFormula::ClassicContraction.rate(kappa);
    for up in Family::ALL {
        for lo in Family::ALL {
            for rule in condkit::gd_rule_variants(up, lo, extras_all) {
                let q = rule.rate(kappa, 1.0);
                if q < floor - 1e-12 {
                    fail(
                        6,
                        &format!(
                            "{}+/{}- promises {q} below the floor {floor}",
                            up.code(),
                            lo.code()
                        ),
                    );
                }
            }
        }
    }
    pass(
        6,
        "all six base rules comply over 500 iterations; quadratic floor never beaten",
    );
}

#[test]
fn criterion_07_momentum_sweep_classification() {
    let t0 = Instant::now();
    let mut cfg = Config::default();
    cfg.set("objective", "f_lrp");
    cfg.set("alpha_max", 0.12);
    cfg.set("na", 200);
    cfg.set("nb", 200);
    cfg.set("iters", 2000);
    cfg.set("x0", 3.3);
    cfg.set("upper", 25.0);
    cfg.set("mus", "1,7,8.894736842105263,13,19");
    let out = commands::cmd_hb_sweep(&cfg).unwrap();
    let tunings: serde_json::Value =
        serde_json::from_str(&out.side_files[0].1).expect("tunings overlay");
    let arr = tunings.as_array().unwrap();
    assert_eq!(arr.len(), 5);
    for t in arr {
        let mu = t["mu"].as_f64().unwrap();
        let class = t["class"].as_str().unwrap();
        if (mu - 1.0).abs() < 1e-12 {
            if class == "ConvergedLinear" {
                fail(7, "the full-curvature tuning must not converge linearly");
            }
        } else if class != "ConvergedLinear" {
            fail(
                7,
                &format!("tuning mu={mu} classified {class}, want linear convergence"),
            );
        }
    }
    // momentum-free row reduces to plain descent: stable well below the
    // 2/L threshold, unstable well above it
    let row0 = &out.report.rows[0];
    let cells: Vec<&str> = row0.split(',').collect();
    assert_eq!(cells[0], "0");
    for (j, cell) in cells.iter().enumerate().skip(1) {
        let alpha = 0.12 * j as f64 / 200.0;
        let converged = *cell != "inf";
        if alpha <= 0.0726 && !converged {
            fail(7, &format!("descent row must converge at alpha={alpha}"));
        }
        if alpha >= 0.0876 && converged {
            fail(
                7,
                &format!("descent row must not converge at alpha={alpha}"),
            );
        }
    }
    budget(7, t0, 300.0);
    pass(
        7,
        "five floor tunings classify as claimed; descent row flips at the stability threshold",
    );
}

#[test]
fn criterion_08_perturbation_stability_study() {
    let mut cfg = Config::default();
    cfg.set("objective", "quadratic:2");
    cfg.set("alpha", 0.4);
    cfg.set("iters", 20);
    cfg.set("radius", 0.1);
    cfg.set("starts", "-2,-1,1,2");
    cfg.set("ladder", "0.4,0.2,0.1,0.05,0.01,0.002");
    let out = commands::cmd_perturb_study(&cfg).unwrap();
    if !out.report.violations.is_empty() {
        fail(
            8,
            &format!("study reported violations: {:?}", out.report.violations),
        );
    }
    let mut last = f64::INFINITY;
    let mut final_dev = f64::NAN;
    let mut final_shift = i64::MAX;
    for row in &out.report.rows {
        let parts: Vec<&str> = row.split(',').collect();
        let dev: f64 = parts[2].parse().unwrap();
        let shift: i64 = parts[3].parse().unwrap();
        if dev > last + 1e-12 {
            fail(
                8,
                &format!("deviation column not non-increasing: {dev} after {last}"),
            );
        }
        last = dev;
        final_dev = dev;
        final_shift = shift;
    }
    if final_dev.is_nan() || final_dev >= 1e-3 {
        fail(8, &format!("final deviation {final_dev} not below 1e-3"));
    }
    if final_shift != 0 {
        fail(
            8,
            &format!("hit index shifted by {final_shift} at the smallest rung"),
        );
    }
    pass(
        8,
        &format!("deviation ladder non-increasing down to {final_dev:.2e}; hit index unmoved"),
    );
}

#[test]
fn criterion_09_sublinear_bounds() {
    // smoothness + star convexity: gap <= L d0^2 / (2n)
    let quad = make_quadratic(&[1.0, 10.0], &[0.0, 0.0]).unwrap();
    let t = gd(&quad, &[3.0, 3.0], 0.1, 1000).unwrap();
    for n in 1..=1000usize {
        let bound = 10.0 * 18.0 / (2.0 * n as f64) + 1e-12;
        if t.subopt[n] > bound {
            fail(9, &format!("quadratic-as-convex bound broken at n={n}"));
        }
    }
    let habs = make_smooth_abs();
    let t = gd(&habs, &[3.0], 1.0, 1000).unwrap();
    for n in 1..=1000usize {
        if t.subopt[n] > 9.0 / (2.0 * n as f64) + 1e-12 {
            fail(9, &format!("convex non-curved bound broken at n={n}"));
        }
    }
    // gradient-dominance cap + star convexity: best-iterate bound at 1/(2L)
    let t = gd(&habs, &[3.0], 0.5, 1000).unwrap();
    let mut best = f64::INFINITY;
    for n in 1..=1000usize {
        best = best.min(t.subopt[n]);
        if best > 2.0 * 9.0 / (n as f64 + 1.0) + 1e-12 {
            fail(9, &format!("best-iterate bound broken at n={n}"));
        }
    }
    pass(9, "both sublinear envelopes hold for n in [1,1000]");
}

#[test]
fn criterion_10_plateau_counterexample() {
    let f = make_plateau(0.5, 1.0).unwrap();
    for alpha in [0.1, 0.5, 1.0] {
        let t = gd(&f, &[3.0], alpha, 2000).unwrap();
        let last = *t.iterates.last().unwrap().first().unwrap();
        // the sub-threshold steps approach the segment geometrically and
        // park on its edge at the floating-point fixed point, a couple of
        // ulps outside the exact interval
        if !(1.5 - 1e-12..=2.5 + 1e-12).contains(&last) {
            fail(
                10,
                &format!("alpha={alpha} never parked on the flat segment (x={last})"),
            );
        }
        let r = estimate_rate(&t, 0.5).unwrap();
        if r.class != RateClass::Stalled {
            fail(
                10,
                &format!("alpha={alpha} classified {:?}, want a stall", r.class),
            );
        }
        let gap = *t.subopt.last().unwrap();
        if (gap - 0.75).abs() > 1e-9 {
            fail(
                10,
                &format!("alpha={alpha} stalled at gap {gap}, want (1+eps)/2 = 0.75"),
            );
        }
    }
    pass(
        10,
        "all three steps park on the flat segment at gap 0.75 and classify as stalled",
    );
}

#[test]
fn criterion_11_logistic_adaptive_study() {
    let t0 = Instant::now();
    let mut cfg = Config::default();
    cfg.set("seed", 42);
    cfg.set("d", 3);
    cfg.set("m", 200);
    cfg.set("iters", 6000);
    cfg.set("half_width", 3.0);
    cfg.set("points_per_axis", 21);
    let out = commands::cmd_logistic(&cfg).unwrap();
    if !out.report.violations.is_empty() {
        fail(
            11,
            &format!("study reported violations: {:?}", out.report.violations),
        );
    }
    let get = |key: &str| -> String {
        out.report
            .rows
            .iter()
            .find(|r| r.starts_with(&format!("{key},")))
            .unwrap_or_else(|| panic!("row {key}"))
            .split_once(',')
            .unwrap()
            .1
            .to_string()
    };
    let qg_lo: f64 = get("qg_lower_fsq").parse().unwrap();
    let qg_up: f64 = get("qg_upper_fsq").parse().unwrap();
    if !(qg_lo > 0.0 && qg_lo.is_finite() && qg_up > 0.0 && qg_up.is_finite()) {
        fail(
            11,
            &format!("growth constants not positive finite: {qg_lo}, {qg_up}"),
        );
    }
    if get("class_adaptive_fsq") != "ConvergedLinear" {
        fail(11, &format!("adaptive class {}", get("class_adaptive_fsq")));
    }
    let dev: f64 = get("max_iterate_dev").parse().unwrap();
    if dev > 1e-12 {
        fail(
            11,
            &format!("adaptive vs reparameterized oracle deviates by {dev}"),
        );
    }
    budget(11, t0, 30.0);
    pass(
        11,
        &format!(
            "growth pair ({qg_lo:.4}, {qg_up:.4}); adaptive run linear; oracle deviation {dev:.1e}"
        ),
    );
}

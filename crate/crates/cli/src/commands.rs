//! The seven experiment commands. Each produces a CSV report (plus JSON side
//! files where noted) and a list of detected invariant violations that the
//! binary turns into its exit code.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;

use condkit::{
    adaptive_gd, compose_increasing, diff_as_perturbation, estimate_all, estimate_constant,
    estimate_rate, first_hit, gd, hb_quadratic_rule, make_quadratic, parse_objective, perturb,
    star_norm, verify_all_edges, verify_membership, AlgoSpec, ConditionConstant, ConditionKind,
    EstimationGrid, Extras, Family, LogisticDataset, Lyapunov, Objective, RateClass, Side,
    Trajectory, MEMBERSHIP_TOL, SUBOPT_ATOL,
};

use crate::config::{Config, Report};

pub struct CommandOutput {
    pub report: Report,
    pub extra_meta: Vec<(String, String)>,
    /// (path-suffix, content) side files, e.g. the sweep tunings overlay.
    pub side_files: Vec<(String, String)>,
}

fn grid_for(obj: &Objective, cfg: &Config) -> Result<EstimationGrid, String> {
    match cfg.get("grid") {
        None => Ok(EstimationGrid::default_for(obj)),
        Some(spec) => {
            let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
            if parts.len() != 3 {
                return Err(format!("grid spec wants lo:hi:points, got {spec}"));
            }
            let lo: f64 = parts[0]
                .parse()
                .map_err(|_| format!("bad grid lo {}", parts[0]))?;
            let hi: f64 = parts[1]
                .parse()
                .map_err(|_| format!("bad grid hi {}", parts[1]))?;
            let n: usize = parts[2]
                .parse()
                .map_err(|_| format!("bad grid points {}", parts[2]))?;
            let d = obj.dimension();
            Ok(EstimationGrid::new(vec![lo; d], vec![hi; d], n))
        }
    }
}

/// Quote a CSV field when it contains separators (objective labels may
/// carry commas).
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v.is_nan() {
        "nan".into()
    } else if v == 0.0 {
        "0".into() // normalize negative zero
    } else {
        format!("{v}")
    }
}

/// `constants`: all twelve estimated constants per objective.
pub fn cmd_constants(labels: &[String], cfg: &Config) -> Result<CommandOutput, String> {
    let mut report = Report::new("label,kind,value,achieving_point");
    let mut meta = Vec::new();
    for label in labels {
        let obj = parse_objective(label).map_err(|e| e.to_string())?;
        let grid = grid_for(&obj, cfg)?;
        meta.push((format!("grid:{label}"), grid.spec_string()));
        for est in estimate_all(&obj, &grid).map_err(|e| e.to_string())? {
            report.row(format!(
                "{},{},{},{}",
                csv_field(label),
                est.constant.kind.code(),
                fmt(est.constant.value),
                est.witness
            ));
        }
    }
    Ok(CommandOutput {
        report,
        extra_meta: meta,
        side_files: Vec::new(),
    })
}

/// `verify-graph`: numeric soundness of every implication edge.
pub fn cmd_verify_graph(
    labels: &[String],
    cfg: &Config,
    dump_edges: bool,
) -> Result<CommandOutput, String> {
    let mut report = Report::new("edge_id,objective,source_constants,converted,verdict,margin");
    let mut meta = Vec::new();
    for label in labels {
        let obj = parse_objective(label).map_err(|e| e.to_string())?;
        let grid = grid_for(&obj, cfg)?;
        meta.push((format!("grid:{label}"), grid.spec_string()));
        let reports = verify_all_edges(&obj, &grid, 1e-6).map_err(|e| e.to_string())?;
        for r in reports {
            let sources = r
                .sources
                .iter()
                .map(|c| format!("{}={}", c.kind.code(), fmt(c.value)))
                .collect::<Vec<_>>()
                .join("|");
            report.row(format!(
                "{},{},{},{}={},{},{}",
                r.edge_id,
                csv_field(&r.objective),
                sources,
                r.converted.kind.code(),
                fmt(r.converted.value),
                if r.holds { "holds" } else { "violated" },
                fmt(r.margin)
            ));
            if !r.holds {
                report.violation(format!("{} violated on {}", r.edge_id, r.objective));
            }
        }
    }
    let mut side = Vec::new();
    if dump_edges {
        side.push((
            "edges.json".to_string(),
            serde_json::to_string_pretty(&condkit::dump_edges()).expect("serializable"),
        ));
    }
    Ok(CommandOutput {
        report,
        extra_meta: meta,
        side_files: side,
    })
}

fn lyapunov_series(traj: &Trajectory, lyapunov: Lyapunov) -> Vec<f64> {
    match lyapunov {
        Lyapunov::ValueGap => traj.subopt.clone(),
        Lyapunov::DistanceSq => traj.dist.iter().map(|d| d * d).collect(),
        Lyapunov::MinValueGap => {
            let mut best = f64::INFINITY;
            traj.subopt
                .iter()
                .map(|&s| {
                    best = best.min(s);
                    best
                })
                .collect()
        }
    }
}

fn sup_ratio(series: &[f64], skip: usize) -> f64 {
    let mut sup = 0.0f64;
    for w in series[skip.min(series.len().saturating_sub(1))..].windows(2) {
        if w[0] > SUBOPT_ATOL && w[1] > SUBOPT_ATOL {
            sup = sup.max(w[1] / w[0]);
        }
    }
    sup
}

fn certify_extras(obj: &Objective, grid: &EstimationGrid) -> Result<Extras, String> {
    let convex = verify_membership(
        obj,
        &ConditionConstant::new(ConditionKind::new(Family::Sc, Side::Lower), 0.0),
        grid,
        MEMBERSHIP_TOL,
    )
    .map_err(|e| e.to_string())?
    .holds;
    let star = verify_membership(
        obj,
        &ConditionConstant::new(ConditionKind::new(Family::StarSc, Side::Lower), 0.0),
        grid,
        MEMBERSHIP_TOL,
    )
    .map_err(|e| e.to_string())?
    .holds;
    Ok(Extras {
        convex,
        star_convex: star || convex,
    })
}

/// `rates`: measured tail contraction of the tuned run against each pair's
/// guaranteed rate.
pub fn cmd_rates(labels: &[String], pairs: &str, cfg: &Config) -> Result<CommandOutput, String> {
    let mut report =
        Report::new("objective,pair,assumption,L,mu,alpha,guaranteed,measured,lyapunov,compliant");
    let mut meta = Vec::new();
    let iters = cfg.get_usize("iters").unwrap_or(500);
    let x0_scalar = cfg.get_f64("x0").unwrap_or(3.3);
    let alpha_override = cfg
        .get("alpha")
        .map(|s| s.parse::<f64>().map_err(|_| "bad alpha".to_string()))
        .transpose()?;

    let wanted: Option<Vec<(Family, Family)>> = if pairs == "all" {
        None
    } else {
        let mut v = Vec::new();
        for p in pairs.split(',') {
            let (u, l) = p
                .split_once('/')
                .ok_or_else(|| format!("pair wants UPPER+/LOWER-, got {p}"))?;
            let uk = ConditionKind::parse(u.trim()).map_err(|e| e.to_string())?;
            let lk = ConditionKind::parse(l.trim()).map_err(|e| e.to_string())?;
            if uk.side != Side::Upper || lk.side != Side::Lower {
                return Err(format!(
                    "pair must combine an upper and a lower condition: {p}"
                ));
            }
            v.push((uk.family, lk.family));
        }
        Some(v)
    };

    for label in labels {
        let obj = parse_objective(label).map_err(|e| e.to_string())?;
        let grid = grid_for(&obj, cfg)?;
        let estimates = estimate_all(&obj, &grid).map_err(|e| e.to_string())?;
        let extras = certify_extras(&obj, &grid)?;
        meta.push((
            format!("extras:{label}"),
            format!(
                "convex={} star_convex={}",
                extras.convex, extras.star_convex
            ),
        ));
        let value_of = |k: ConditionKind| {
            estimates
                .iter()
                .find(|e| e.constant.kind == k)
                .map(|e| e.constant.value)
                .unwrap_or(f64::NAN)
        };
        let x0 = vec![x0_scalar; obj.dimension()];
        for up in Family::ALL {
            for lo in Family::ALL {
                if let Some(w) = &wanted {
                    if !w.contains(&(up, lo)) {
                        continue;
                    }
                }
                let l = value_of(ConditionKind::new(up, Side::Upper));
                let mu = value_of(ConditionKind::new(lo, Side::Lower));
                if !(l.is_finite() && mu > 0.0 && l >= mu) {
                    continue;
                }
                for rule in condkit::gd_rule_variants(up, lo, extras) {
                    let alpha = alpha_override.unwrap_or_else(|| rule.step_size(l, mu));
                    let q = rule.rate(l, mu);
                    let traj = gd(&obj, &x0, alpha, iters).map_err(|e| e.to_string())?;
                    let series = lyapunov_series(&traj, rule.lyapunov());
                    let measured = sup_ratio(&series, 0);
                    let compliant = alpha_override.is_none() && measured <= q + 1e-9;
                    if alpha_override.is_none() && !compliant {
                        report.violation(format!(
                            "{label} {} measured {measured} above guaranteed {q}",
                            rule.pair_code()
                        ));
                    }
                    report.row(format!(
                        "{},{},{:?},{},{},{},{},{},{:?},{}",
                        csv_field(label),
                        rule.pair_code(),
                        rule.needs,
                        fmt(l),
                        fmt(mu),
                        fmt(alpha),
                        if alpha_override.is_none() {
                            fmt(q)
                        } else {
                            "nan".into()
                        },
                        fmt(measured),
                        rule.lyapunov(),
                        compliant
                    ));
                }
            }
        }
    }
    Ok(CommandOutput {
        report,
        extra_meta: meta,
        side_files: Vec::new(),
    })
}

/// Scalar momentum recursion recording only the suboptimality series; the
/// sweep needs nothing else and the full trajectory allocations would
/// dominate the runtime.
fn hb_subopt_series(obj: &Objective, x0: f64, alpha: f64, beta: f64, n: usize) -> (Vec<f64>, bool) {
    let f_star = obj.f_star();
    let mut subopt = Vec::with_capacity(n + 1);
    let mut prev = x0;
    let mut x = x0;
    for k in 0..=n {
        let v = obj.value1(x);
        if !v.is_finite() || !x.is_finite() {
            return (subopt, true);
        }
        subopt.push(v - f_star);
        if k == n {
            break;
        }
        let g = obj.deriv1(x);
        if !g.is_finite() {
            return (subopt, true);
        }
        let next = x - alpha * g + beta * (x - prev);
        prev = x;
        x = next;
    }
    (subopt, false)
}

fn classify_series(subopt: Vec<f64>, hit_nonfinite: bool) -> (RateClass, f64) {
    if subopt.len() < 10 || hit_nonfinite {
        return (RateClass::Diverged, f64::INFINITY);
    }
    let n = subopt.len();
    let traj = Trajectory {
        iterates: vec![vec![0.0]; n],
        values: subopt.clone(),
        grad_norms: vec![0.0; n],
        dist: subopt.iter().map(|s| s.abs().sqrt()).collect(),
        subopt,
        algo: AlgoSpec::Synthetic,
        hit_nonfinite,
    };
    match estimate_rate(&traj, 0.5) {
        Ok(r) => (r.class, r.linear_rate),
        Err(_) => (RateClass::Diverged, f64::INFINITY),
    }
}

/// `hb-sweep`: momentum-tuning plane of linear rates on a one-dimensional
/// objective, with the curvature-floor tunings overlaid.
pub fn cmd_hb_sweep(cfg: &Config) -> Result<CommandOutput, String> {
    let label = cfg.get("objective").unwrap_or("f_lrp").to_string();
    let obj = parse_objective(&label).map_err(|e| e.to_string())?;
    if obj.dimension() != 1 {
        return Err("hb-sweep runs on one-dimensional objectives".into());
    }
    let alpha_max = cfg.get_f64("alpha_max").unwrap_or(0.12);
    let na = cfg.get_usize("na").unwrap_or(200);
    let nb = cfg.get_usize("nb").unwrap_or(200);
    let iters = cfg.get_usize("iters").unwrap_or(2000);
    let x0 = cfg.get_f64("x0").unwrap_or(3.3);
    let l = cfg.get_f64("upper").unwrap_or(25.0);
    let mus = cfg
        .get_f64_list("mus")
        .unwrap_or_else(|_| vec![1.0, 7.0, 169.0 / 19.0, 13.0, 19.0]);

    let alphas: Vec<f64> = (0..na)
        .map(|j| alpha_max * (j + 1) as f64 / na as f64)
        .collect();
    let betas: Vec<f64> = (0..nb).map(|i| i as f64 / nb as f64).collect();

    let obj_arc = Arc::new(obj);
    let rows: Vec<Vec<String>> = betas
        .par_iter()
        .map(|&beta| {
            alphas
                .iter()
                .map(|&alpha| {
                    let (s, bad) = hb_subopt_series(&obj_arc, x0, alpha, beta, iters);
                    let (class, rate) = classify_series(s, bad);
                    if class == RateClass::ConvergedLinear {
                        fmt(rate)
                    } else {
                        "inf".to_string()
                    }
                })
                .collect()
        })
        .collect();

    let mut header = String::from("beta\\alpha");
    for a in &alphas {
        header.push_str(&format!(",{a}"));
    }
    let mut report = Report::new(&header);
    for (i, row) in rows.iter().enumerate() {
        report.row(format!("{},{}", betas[i], row.join(",")));
    }

    // overlay: each floor's tuning evaluated at its exact (alpha, beta)
    let mut tunings = Vec::new();
    let mut cells_seen = std::collections::BTreeSet::new();
    for &mu in &mus {
        let (alpha, beta) = hb_quadratic_rule(l, mu).map_err(|e| e.to_string())?;
        if alpha > alpha_max {
            return Err(format!(
                "tuning alpha {alpha} outside the sweep range {alpha_max}"
            ));
        }
        let col = ((alpha / alpha_max * na as f64).ceil() as usize).clamp(1, na) - 1;
        let row = ((beta * nb as f64).floor() as usize).min(nb - 1);
        if !cells_seen.insert((row, col)) {
            report.violation(format!("tunings collide in sweep cell ({row},{col})"));
        }
        let (s, bad) = hb_subopt_series(&obj_arc, x0, alpha, beta, iters);
        let (class, rate) = classify_series(s, bad);
        tunings.push(json!({
            "mu": mu,
            "alpha": alpha,
            "beta": beta,
            "cell_row": row,
            "cell_col": col,
            "class": format!("{class:?}"),
            "linear_rate": if rate.is_finite() { json!(rate) } else { json!("inf") },
        }));
    }

    let meta = vec![
        ("alpha_range".to_string(), format!("(0,{alpha_max}] x {na}")),
        ("beta_range".to_string(), format!("[0,1) x {nb}")),
    ];
    let side = vec![(
        "tunings.json".to_string(),
        serde_json::to_string_pretty(&tunings).expect("serializable"),
    )];
    Ok(CommandOutput {
        report,
        extra_meta: meta,
        side_files: side,
    })
}

/// `perturb-study`: iterate deviation and hit-time shift under a ladder of
/// vanishing perturbations.
pub fn cmd_perturb_study(cfg: &Config) -> Result<CommandOutput, String> {
    let label = cfg.get("objective").unwrap_or("quadratic:2").to_string();
    let obj = parse_objective(&label).map_err(|e| e.to_string())?;
    if obj.dimension() != 1 {
        return Err("perturb-study runs on one-dimensional objectives".into());
    }
    let alpha = cfg.get_f64("alpha").unwrap_or(0.4);
    let iters = cfg.get_usize("iters").unwrap_or(20);
    let radius = cfg.get_f64("radius").unwrap_or(0.1);
    let starts = cfg
        .get_f64_list("starts")
        .unwrap_or_else(|_| vec![-2.0, -1.0, 1.0, 2.0]);
    let ladder = cfg
        .get_f64_list("ladder")
        .unwrap_or_else(|_| vec![0.4, 0.2, 0.1, 0.05, 0.01, 0.002]);
    let grid = grid_for(&obj, cfg)?;

    let base: Vec<Trajectory> = starts
        .iter()
        .map(|&x0| gd(&obj, &[x0], alpha, iters).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;

    let mut report = Report::new("eps,star_norm,max_deviation,first_hit_shift");
    let mut last_dev = f64::INFINITY;
    for &eps in &ladder {
        let bump =
            condkit::make_omega_eps(eps, &[1.0], &first_point(&obj)).map_err(|e| e.to_string())?;
        let norm = star_norm(&bump, &grid).map_err(|e| e.to_string())?.value;
        let perturbed = perturb(&obj, &bump).map_err(|e| e.to_string())?;
        let mut dev = 0.0f64;
        let mut shift = 0i64;
        for (i, &x0) in starts.iter().enumerate() {
            let t = gd(&perturbed, &[x0], alpha, iters).map_err(|e| e.to_string())?;
            for k in 0..t.len().min(base[i].len()) {
                dev = dev.max((t.iterates[k][0] - base[i].iterates[k][0]).abs());
            }
            let h0 = first_hit(&base[i], radius);
            let h1 = first_hit(&t, radius);
            match (h0, h1) {
                (Some(a), Some(b)) => shift = shift.max((b as i64 - a as i64).abs()),
                (None, None) => {}
                _ => shift = shift.max(iters as i64),
            }
        }
        if dev > last_dev + 1e-12 {
            report.violation(format!("deviation increased along the ladder at eps={eps}"));
        }
        last_dev = dev;
        report.row(format!("{},{},{},{}", eps, fmt(norm), fmt(dev), shift));
    }
    Ok(CommandOutput {
        report,
        extra_meta: Vec::new(),
        side_files: Vec::new(),
    })
}

fn first_point(obj: &Objective) -> Vec<f64> {
    obj.minimizers().sample_points(1)[0].clone()
}

/// `discontinuity`: the vanishing-perturbation family whose curvature-based
/// tuning collapses while the fixed base tuning stays fast.
pub fn cmd_discontinuity(cfg: &Config) -> Result<CommandOutput, String> {
    let ladder = cfg
        .get_f64_list("ladder")
        .unwrap_or_else(|_| vec![0.4, 0.2, 0.1, 0.05]);
    let iters = cfg.get_usize("iters").unwrap_or(60);
    let x0 = cfg.get_f64("x0").unwrap_or(3.0);
    let base = make_quadratic(&[2.0], &[0.0]).map_err(|e| e.to_string())?;
    let grid = grid_for(&base, cfg)?;

    let mut report = Report::new("eps,h_star_norm,L_sc,mu_sc,naive_alpha,naive_rate,fixed_rate");
    let mut last_norm = f64::INFINITY;
    let mut last_naive = 0.0f64;
    for &eps in &ladder {
        let fe = condkit::make_f_eps(eps).map_err(|e| e.to_string())?;
        let h = diff_as_perturbation(&base, &fe).map_err(|e| e.to_string())?;
        let norm = star_norm(&h, &grid).map_err(|e| e.to_string())?.value;
        let l_hat = estimate_constant(ConditionKind::new(Family::Sc, Side::Upper), &fe, &grid)
            .map_err(|e| e.to_string())?
            .constant
            .value;
        let mu_hat = estimate_constant(ConditionKind::new(Family::Sc, Side::Lower), &fe, &grid)
            .map_err(|e| e.to_string())?
            .constant
            .value;
        let naive_alpha = 2.0 / (l_hat + mu_hat);
        let naive = gd(&fe, &[x0], naive_alpha, iters).map_err(|e| e.to_string())?;
        let fixed = gd(&fe, &[x0], 0.5, iters).map_err(|e| e.to_string())?;
        let dist_ratio = |t: &Trajectory| {
            let mut sup = 0.0f64;
            for w in t.dist.windows(2) {
                if w[0] > 1e-13 && w[1] > 1e-13 {
                    sup = sup.max(w[1] / w[0]);
                }
            }
            sup
        };
        let naive_rate = dist_ratio(&naive);
        let fixed_rate = dist_ratio(&fixed);
        if norm >= last_norm {
            report.violation(format!(
                "perturbation norm not strictly decreasing at eps={eps}"
            ));
        }
        if naive_rate + 1e-12 < last_naive {
            report.violation(format!("curvature-tuned rate not increasing at eps={eps}"));
        }
        if fixed_rate > eps + 1e-9 {
            report.violation(format!("fixed tuning exceeded the rate bound at eps={eps}"));
        }
        last_norm = norm;
        last_naive = naive_rate;
        report.row(format!(
            "{},{},{},{},{},{},{}",
            eps,
            fmt(norm),
            fmt(l_hat),
            fmt(mu_hat),
            fmt(naive_alpha),
            fmt(naive_rate),
            fmt(fixed_rate)
        ));
    }
    Ok(CommandOutput {
        report,
        extra_meta: Vec::new(),
        side_files: Vec::new(),
    })
}

/// `logistic`: growth constants of the squared loss around its reference
/// minimizer, the adaptive run they tune, and the reparameterization oracle.
pub fn cmd_logistic(cfg: &Config) -> Result<CommandOutput, String> {
    let seed = cfg.get_u64("seed").unwrap_or(42);
    let d = cfg.get_usize("d").unwrap_or(3);
    let m = cfg.get_usize("m").unwrap_or(200);
    let iters = cfg.get_usize("iters").unwrap_or(6000);
    let half = cfg.get_f64("half_width").unwrap_or(3.0);
    // keep the grid cardinality tame as the dimension grows
    let ppa = cfg.get_usize("points_per_axis").unwrap_or(match d {
        0..=3 => 21,
        4 => 11,
        _ => 7,
    });

    let ds = LogisticDataset::synthetic(seed, d, m).map_err(|e| e.to_string())?;
    let f = condkit::make_logistic(&ds).map_err(|e| e.to_string())?;
    let square: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|t| t * t);
    let dsquare: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|t| 2.0 * t);
    let fsq = compose_increasing(&f, square, dsquare, format!("{}^2", f.label()));

    let center = first_point(&f);
    let grid = EstimationGrid::centered(&center, half, ppa);
    let qg_lo = estimate_constant(ConditionKind::new(Family::Qg, Side::Lower), &fsq, &grid)
        .map_err(|e| e.to_string())?
        .constant
        .value;
    let qg_up = estimate_constant(ConditionKind::new(Family::Qg, Side::Upper), &fsq, &grid)
        .map_err(|e| e.to_string())?
        .constant
        .value;

    let mut report = Report::new("record,value");
    if !(qg_lo > 0.0 && qg_lo.is_finite() && qg_up > 0.0 && qg_up.is_finite()) {
        report.violation("squared-loss growth constants must be positive and finite".to_string());
    }

    // convexity of the squared loss makes the growth-pair rule applicable
    let rule = condkit::gd_rule(
        Family::Qg,
        Family::Qg,
        Extras {
            convex: true,
            star_convex: true,
        },
    )
    .map_err(|e| e.to_string())?;
    let alpha = rule.step_size(qg_up, qg_lo);

    let x0 = vec![0.0; d];
    let smooth_bound = ds.smoothness_bound();
    let constant_run = gd(&f, &x0, 1.0 / smooth_bound, iters).map_err(|e| e.to_string())?;
    let constant_rate = estimate_rate(&constant_run, 0.5).map_err(|e| e.to_string())?;

    let adaptive = adaptive_gd(&f, &x0, alpha, |v| 2.0 * v, iters).map_err(|e| e.to_string())?;
    let composed = gd(&fsq, &x0, alpha, iters).map_err(|e| e.to_string())?;
    let mut max_dev = 0.0f64;
    for k in 0..adaptive.len().min(composed.len()) {
        for i in 0..d {
            max_dev = max_dev.max((adaptive.iterates[k][i] - composed.iterates[k][i]).abs());
        }
    }
    // classify the adaptive run on the squared-loss value gap
    let fsq_star = fsq.f_star();
    let sq_gap: Vec<f64> = adaptive
        .iterates
        .iter()
        .map(|x| fsq.value(x) - fsq_star)
        .collect();
    let final_sq_gap = *sq_gap.last().unwrap_or(&f64::NAN);
    let (adaptive_class, adaptive_rate) = classify_series(sq_gap, adaptive.hit_nonfinite);
    let composed_rate = estimate_rate(&composed, 0.5).map_err(|e| e.to_string())?;

    if adaptive_class != RateClass::ConvergedLinear {
        report.violation(format!(
            "adaptive run classified {adaptive_class:?}, expected linear"
        ));
    }
    if max_dev > 1e-12 {
        report.violation(format!(
            "adaptive run deviates from the reparameterized oracle by {max_dev}"
        ));
    }

    report.row(format!("objective,{}", csv_field(f.label())));
    report.row(format!("qg_lower_fsq,{}", fmt(qg_lo)));
    report.row(format!("qg_upper_fsq,{}", fmt(qg_up)));
    report.row(format!("alpha,{}", fmt(alpha)));
    report.row(format!("class_constant_f,{:?}", constant_rate.class));
    report.row(format!(
        "rate_constant_f,{}",
        fmt(constant_rate.linear_rate)
    ));
    report.row(format!("class_adaptive_fsq,{adaptive_class:?}"));
    report.row(format!("rate_adaptive_fsq,{}", fmt(adaptive_rate)));
    report.row(format!("class_composed_fsq,{:?}", composed_rate.class));
    report.row(format!("max_iterate_dev,{}", fmt(max_dev)));
    report.row(format!("final_gap_fsq,{}", fmt(final_sq_gap)));

    let meta = vec![("grid".to_string(), grid.spec_string())];
    Ok(CommandOutput {
        report,
        extra_meta: meta,
        side_files: Vec::new(),
    })
}

//! String addressing of the corpus: the label grammar the command-line
//! tooling resolves objectives and perturbations through.
//!
//! Objectives:  `f_lrp`, `f_eps:0.1`, `quadratic:1,10`, `plateau:0.5,1`,
//!              `smooth_abs`, `cubic_ramp`, `logistic:seed=42,d=3,m=200`,
//!              `perturbed:<objective>+<perturbation>`.
//! Perturbations: `omega_eps:0.1`, `smooth_abs`, `cubic_ramp`,
//!              `scaled:<c>:<perturbation>`, `diff:<g>-<f>`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logistic::{make_logistic, LogisticDataset};
use crate::minimizers::MinimizerSet;
use crate::objective::{
    make_cubic_ramp, make_f_eps, make_f_lrp, make_plateau, make_quadratic, make_smooth_abs,
    Objective,
};
use crate::starnorm::{diff_as_perturbation, make_omega_eps, perturb, Perturbation};

fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::UnknownLabel(format!("bad number `{t}`")))
        })
        .collect()
}

/// Resolve an objective label.
pub fn parse_objective(label: &str) -> Result<Objective> {
    let label = label.trim();
    if label == "f_lrp" {
        return Ok(make_f_lrp());
    }
    if label == "smooth_abs" {
        return Ok(make_smooth_abs());
    }
    if label == "cubic_ramp" {
        return Ok(make_cubic_ramp());
    }
    if let Some(rest) = label.strip_prefix("f_eps:") {
        let eps = parse_floats(rest)?;
        if eps.len() != 1 {
            return Err(Error::UnknownLabel(format!(
                "f_eps takes one parameter: {label}"
            )));
        }
        return make_f_eps(eps[0]);
    }
    if let Some(rest) = label.strip_prefix("quadratic:") {
        let (eigs, center) = match rest.split_once('@') {
            Some((e, c)) => (parse_floats(e)?, Some(parse_floats(c)?)),
            None => (parse_floats(rest)?, None),
        };
        let center = center.unwrap_or_else(|| vec![0.0; eigs.len()]);
        return make_quadratic(&eigs, &center);
    }
    if let Some(rest) = label.strip_prefix("plateau:") {
        let p = parse_floats(rest)?;
        if p.len() != 2 {
            return Err(Error::UnknownLabel(format!(
                "plateau takes eps,eta: {label}"
            )));
        }
        return make_plateau(p[0], p[1]);
    }
    if let Some(rest) = label.strip_prefix("logistic:") {
        let mut seed = 42u64;
        let mut d = 3usize;
        let mut m = 200usize;
        for part in rest.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::UnknownLabel(format!("logistic wants key=value: {part}")))?;
            match k.trim() {
                "seed" => seed = v.parse().map_err(|_| Error::UnknownLabel(part.into()))?,
                "d" => d = v.parse().map_err(|_| Error::UnknownLabel(part.into()))?,
                "m" => m = v.parse().map_err(|_| Error::UnknownLabel(part.into()))?,
                other => return Err(Error::UnknownLabel(format!("logistic key {other}"))),
            }
        }
        let ds = LogisticDataset::synthetic(seed, d, m)?;
        return make_logistic(&ds);
    }
    if let Some(rest) = label.strip_prefix("perturbed:") {
        let (obj_label, pert_label) = rest
            .split_once('+')
            .ok_or_else(|| Error::UnknownLabel(format!("perturbed wants obj+pert: {label}")))?;
        let obj = parse_objective(obj_label)?;
        let pert = parse_perturbation(pert_label, obj.minimizers())?;
        return perturb(&obj, &pert);
    }
    Err(Error::UnknownLabel(label.to_string()))
}

/// Resolve a perturbation label against the anchor set it must vanish on.
pub fn parse_perturbation(label: &str, anchor: &MinimizerSet) -> Result<Perturbation> {
    let label = label.trim();
    if let Some(rest) = label.strip_prefix("omega_eps:") {
        let eps = parse_floats(rest)?;
        if eps.len() != 1 {
            return Err(Error::UnknownLabel(format!(
                "omega_eps takes one parameter: {label}"
            )));
        }
        let MinimizerSet::Point(x_star) = anchor else {
            return Err(Error::IncompatiblePerturbation(
                "omega_eps needs a single-point anchor".into(),
            ));
        };
        let mut direction = vec![0.0; x_star.len()];
        direction[0] = 1.0;
        return make_omega_eps(eps[0], &direction, x_star);
    }
    if let Some(rest) = label.strip_prefix("scaled:") {
        let (c, inner) = rest
            .split_once(':')
            .ok_or_else(|| Error::UnknownLabel(format!("scaled wants c:<label>: {label}")))?;
        let c: f64 = c
            .parse()
            .map_err(|_| Error::UnknownLabel(format!("bad scale {c}")))?;
        return Ok(parse_perturbation(inner, anchor)?.scaled(c));
    }
    if let Some(rest) = label.strip_prefix("diff:") {
        let (g_label, f_label) = rest
            .split_once('-')
            .ok_or_else(|| Error::UnknownLabel(format!("diff wants g-f: {label}")))?;
        let g = parse_objective(g_label)?;
        let f = parse_objective(f_label)?;
        return diff_as_perturbation(&f, &g);
    }
    if label == "smooth_abs" || label == "cubic_ramp" {
        let obj = parse_objective(label)?;
        if anchor != obj.minimizers() {
            return Err(Error::IncompatiblePerturbation(format!(
                "{label} vanishes at the origin, not on the requested anchor"
            )));
        }
        let (a, b) = (obj.clone(), obj.clone());
        return Perturbation::new(
            label.to_string(),
            obj.dimension(),
            Arc::new(move |x: &[f64]| a.value(x)),
            Arc::new(move |x: &[f64]| b.gradient(x)),
            anchor.clone(),
            obj.breakpoints().to_vec(),
        );
    }
    Err(Error::UnknownLabel(label.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_labels_round_trip() {
        for label in [
            "f_lrp",
            "f_eps:0.1",
            "quadratic:1,10",
            "quadratic:3@5",
            "plateau:0.5,1",
            "smooth_abs",
            "cubic_ramp",
        ] {
            let obj = parse_objective(label).unwrap();
            assert_eq!(obj.label(), label, "constructors keep the canonical label");
        }
        assert!(parse_objective("nope").is_err());
        assert!(parse_objective("f_eps:-1").is_err());
    }

    #[test]
    fn perturbed_label_builds_the_sum() {
        let obj = parse_objective("perturbed:quadratic:2+smooth_abs").unwrap();
        let direct = parse_objective("quadratic:2").unwrap();
        let bump = parse_objective("smooth_abs").unwrap();
        for x in [-2.0, 0.5, 3.0] {
            assert!((obj.value(&[x]) - direct.value(&[x]) - bump.value(&[x])).abs() < 1e-15);
        }
    }

    #[test]
    fn diff_label_matches_manual_construction() {
        let anchor = MinimizerSet::point_1d(0.0);
        let h = parse_perturbation("diff:f_eps:0.1-quadratic:2", &anchor).unwrap();
        let fe = parse_objective("f_eps:0.1").unwrap();
        for x in [-1.0, 0.5, 1.005, 2.0] {
            assert!((h.value(&[x]) - (fe.value(&[x]) - x * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn scaled_omega_label() {
        let anchor = MinimizerSet::point_1d(0.0);
        let h = parse_perturbation("scaled:2:omega_eps:0.5", &anchor).unwrap();
        let base = parse_perturbation("omega_eps:0.5", &anchor).unwrap();
        assert!((h.value(&[1.3]) - 2.0 * base.value(&[1.3])).abs() < 1e-15);
    }
}

//! Executable implication graph between the twelve conditions: each edge
//! carries the closed-form constant conversion its proof induces, so derived
//! memberships can be checked numerically against direct estimates.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::conditions::{
    estimate_constant, verify_membership, ConditionConstant, ConditionKind, EstimationGrid, Family,
    Side,
};
use crate::error::{Error, Result};
use crate::objective::Objective;

/// Which of the two halves of the graph an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdgeGroup {
    LowerConditions,
    UpperConditions,
}

/// One proved implication: sources (one or two conditions with constants) to
/// a target condition, with the constant conversion as a function.
#[derive(Clone)]
pub struct ImplicationEdge {
    pub id: &'static str,
    pub sources: &'static [ConditionKind],
    /// Per-source: may the constant be zero or negative (extended convexity
    /// regime of the curvature families)?
    pub nonpositive_ok: &'static [bool],
    pub target: ConditionKind,
    pub group: EdgeGroup,
    convert: fn(&[f64]) -> Result<f64>,
}

impl std::fmt::Debug for ImplicationEdge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ImplicationEdge({})", self.id)
    }
}

const fn kind(family: Family, side: Side) -> ConditionKind {
    ConditionKind::new(family, side)
}

use Family::{Eb, Pl, Qg, Rsi, Sc, StarSc};
use Side::{Lower, Upper};

fn identity1(v: &[f64]) -> Result<f64> {
    Ok(v[0])
}

fn mean2(v: &[f64]) -> Result<f64> {
    Ok(0.5 * (v[0] + v[1]))
}

fn geomean2(v: &[f64]) -> Result<f64> {
    if v[0] <= 0.0 || v[1] <= 0.0 {
        return Err(Error::ConversionDomain(format!(
            "geometric mean needs positive inputs, got {} and {}",
            v[0], v[1]
        )));
    }
    Ok((v[0] * v[1]).sqrt())
}

fn sq_over_second(v: &[f64]) -> Result<f64> {
    if v[1] <= 0.0 {
        return Err(Error::ConversionDomain(format!(
            "divisor must be positive, got {}",
            v[1]
        )));
    }
    Ok(v[0] * v[0] / v[1])
}

fn double(v: &[f64]) -> Result<f64> {
    Ok(2.0 * v[0])
}

fn curvature_gap(v: &[f64]) -> Result<f64> {
    let (mu, l) = (v[0], v[1]);
    if l * (l - mu) < 0.0 {
        return Err(Error::ConversionDomain(format!(
            "L(L-mu) must be nonnegative, got L={l}, mu={mu}"
        )));
    }
    Ok(l + (l * (l - mu)).sqrt())
}

fn plus_negative_part(v: &[f64]) -> Result<f64> {
    let (mu, l) = (v[0], v[1]);
    Ok(l + 2.0 * (-mu).max(0.0))
}

static EDGES: [ImplicationEdge; 21] = [
    // lower-condition graph
    ImplicationEdge {
        id: "sc-_to_star_sc-",
        sources: &[kind(Sc, Lower)],
        nonpositive_ok: &[true],
        target: kind(StarSc, Lower),
        group: EdgeGroup::LowerConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "star_sc-_to_pl-",
        sources: &[kind(StarSc, Lower)],
        nonpositive_ok: &[false],
        target: kind(Pl, Lower),
        group: EdgeGroup::LowerConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "pl-_to_qg-",
        sources: &[kind(Pl, Lower)],
        nonpositive_ok: &[false],
        target: kind(Qg, Lower),
        group: EdgeGroup::LowerConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "star_sc-_and_qg-_to_rsi-",
        sources: &[kind(StarSc, Lower), kind(Qg, Lower)],
        nonpositive_ok: &[true, false],
        target: kind(Rsi, Lower),
        group: EdgeGroup::LowerConditions,
        convert: mean2,
    },
    ImplicationEdge {
        id: "star_sc-_to_rsi-",
        sources: &[kind(StarSc, Lower)],
        nonpositive_ok: &[false],
        target: kind(Rsi, Lower),
        group: EdgeGroup::LowerConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "rsi-_to_qg-",
        sources: &[kind(Rsi, Lower)],
        nonpositive_ok: &[false],
        target: kind(Qg, Lower),
        group: EdgeGroup::LowerConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "rsi-_to_eb-",
        sources: &[kind(Rsi, Lower)],
        nonpositive_ok: &[false],
        target: kind(Eb, Lower),
        group: EdgeGroup::LowerConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "pl-_and_qg-_to_eb-",
        sources: &[kind(Pl, Lower), kind(Qg, Lower)],
        nonpositive_ok: &[false, false],
        target: kind(Eb, Lower),
        group: EdgeGroup::LowerConditions,
        convert: geomean2,
    },
    ImplicationEdge {
        id: "eb-_and_qg+_to_pl-",
        sources: &[kind(Eb, Lower), kind(Qg, Upper)],
        nonpositive_ok: &[false, false],
        target: kind(Pl, Lower),
        group: EdgeGroup::LowerConditions,
        convert: sq_over_second,
    },
    // upper-condition graph
    ImplicationEdge {
        id: "sc+_to_pl+",
        sources: &[kind(Sc, Upper)],
        nonpositive_ok: &[false],
        target: kind(Pl, Upper),
        group: EdgeGroup::UpperConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "pl+_to_star_sc+",
        sources: &[kind(Pl, Upper)],
        nonpositive_ok: &[false],
        target: kind(StarSc, Upper),
        group: EdgeGroup::UpperConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "pl+_to_qg+",
        sources: &[kind(Pl, Upper)],
        nonpositive_ok: &[false],
        target: kind(Qg, Upper),
        group: EdgeGroup::UpperConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "pl+_and_qg+_to_eb+",
        sources: &[kind(Pl, Upper), kind(Qg, Upper)],
        nonpositive_ok: &[false, false],
        target: kind(Eb, Upper),
        group: EdgeGroup::UpperConditions,
        convert: geomean2,
    },
    ImplicationEdge {
        id: "eb+_to_rsi+",
        sources: &[kind(Eb, Upper)],
        nonpositive_ok: &[false],
        target: kind(Rsi, Upper),
        group: EdgeGroup::UpperConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "star_sc+_to_qg+",
        sources: &[kind(StarSc, Upper)],
        nonpositive_ok: &[false],
        target: kind(Qg, Upper),
        group: EdgeGroup::UpperConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "star_sc+_and_qg+_to_rsi+",
        sources: &[kind(StarSc, Upper), kind(Qg, Upper)],
        nonpositive_ok: &[false, false],
        target: kind(Rsi, Upper),
        group: EdgeGroup::UpperConditions,
        convert: mean2,
    },
    ImplicationEdge {
        id: "rsi+_to_star_sc+",
        sources: &[kind(Rsi, Upper)],
        nonpositive_ok: &[false],
        target: kind(StarSc, Upper),
        group: EdgeGroup::UpperConditions,
        convert: double,
    },
    ImplicationEdge {
        id: "rsi+_to_qg+",
        sources: &[kind(Rsi, Upper)],
        nonpositive_ok: &[false],
        target: kind(Qg, Upper),
        group: EdgeGroup::UpperConditions,
        convert: identity1,
    },
    ImplicationEdge {
        id: "sc-_and_qg+_to_eb+",
        sources: &[kind(Sc, Lower), kind(Qg, Upper)],
        nonpositive_ok: &[true, false],
        target: kind(Eb, Upper),
        group: EdgeGroup::UpperConditions,
        convert: curvature_gap,
    },
    ImplicationEdge {
        id: "sc-_and_star_sc+_to_eb+",
        sources: &[kind(Sc, Lower), kind(StarSc, Upper)],
        nonpositive_ok: &[true, false],
        target: kind(Eb, Upper),
        group: EdgeGroup::UpperConditions,
        convert: plus_negative_part,
    },
    ImplicationEdge {
        id: "qg-_and_eb+_to_pl+",
        sources: &[kind(Qg, Lower), kind(Eb, Upper)],
        nonpositive_ok: &[false, false],
        target: kind(Pl, Upper),
        group: EdgeGroup::UpperConditions,
        convert: |v| {
            if v[0] <= 0.0 {
                return Err(Error::ConversionDomain(format!(
                    "growth constant must be positive, got {}",
                    v[0]
                )));
            }
            Ok(v[1] * v[1] / v[0])
        },
    },
];

/// The full proved edge set. Exactly 21 edges.
pub fn builtin_edges() -> &'static [ImplicationEdge] {
    &EDGES
}

pub fn edge_by_id(id: &str) -> Option<&'static ImplicationEdge> {
    EDGES.iter().find(|e| e.id == id)
}

/// Apply the conversion to explicit source constants, checking kinds, order
/// and the edge's domain requirements.
pub fn apply_edge(
    edge: &ImplicationEdge,
    constants: &[ConditionConstant],
) -> Result<ConditionConstant> {
    if constants.len() != edge.sources.len() {
        return Err(Error::KindMismatch {
            expected: format!("{} source constants", edge.sources.len()),
            got: format!("{}", constants.len()),
        });
    }
    for (i, (c, &k)) in constants.iter().zip(edge.sources.iter()).enumerate() {
        if c.kind != k {
            return Err(Error::KindMismatch {
                expected: k.code(),
                got: c.kind.code(),
            });
        }
        if !edge.nonpositive_ok[i] && c.value <= 0.0 {
            return Err(Error::ConversionDomain(format!(
                "edge {} needs {} > 0, got {}",
                edge.id,
                k.code(),
                c.value
            )));
        }
    }
    let vals: Vec<f64> = constants.iter().map(|c| c.value).collect();
    let out = (edge.convert)(&vals)?;
    Ok(ConditionConstant::new(edge.target, out))
}

/// Numeric soundness report for one edge on one objective: estimated source
/// constants, converted target constant, membership verdict and worst slack.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeReport {
    pub edge_id: String,
    pub objective: String,
    pub sources: Vec<ConditionConstant>,
    pub converted: ConditionConstant,
    pub holds: bool,
    pub margin: f64,
}

/// Estimate the sources, convert, and verify the target membership.
pub fn verify_edge(
    edge: &ImplicationEdge,
    obj: &Objective,
    grid: &EstimationGrid,
    tol: f64,
) -> Result<EdgeReport> {
    let mut sources = Vec::new();
    for &k in edge.sources {
        sources.push(estimate_constant(k, obj, grid)?.constant);
    }
    verify_edge_with(edge, obj, &sources, grid, tol)
}

/// Same as `verify_edge` but with source constants supplied by the caller
/// (so a sweep can estimate each constant once per objective).
pub fn verify_edge_with(
    edge: &ImplicationEdge,
    obj: &Objective,
    sources: &[ConditionConstant],
    grid: &EstimationGrid,
    tol: f64,
) -> Result<EdgeReport> {
    let converted = apply_edge(edge, sources)?;
    let membership = verify_membership(obj, &converted, grid, tol)?;
    Ok(EdgeReport {
        edge_id: edge.id.to_string(),
        objective: obj.label().to_string(),
        sources: sources.to_vec(),
        converted,
        holds: membership.holds,
        margin: membership.worst_slack,
    })
}

/// Verify every edge whose sources are estimable and positive (where
/// required) on this objective. Cheap edges reuse one estimation pass.
pub fn verify_all_edges(
    obj: &Objective,
    grid: &EstimationGrid,
    tol: f64,
) -> Result<Vec<EdgeReport>> {
    let mut estimates: BTreeMap<ConditionKind, ConditionConstant> = BTreeMap::new();
    for k in ConditionKind::ALL {
        estimates.insert(k, estimate_constant(k, obj, grid)?.constant);
    }
    let mut out = Vec::new();
    for edge in builtin_edges() {
        let sources: Vec<ConditionConstant> = edge.sources.iter().map(|k| estimates[k]).collect();
        match verify_edge_with(edge, obj, &sources, grid, tol) {
            Ok(report) => out.push(report),
            Err(Error::ConversionDomain(_)) => continue, // source not satisfied here
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Convexity knowledge that gates the extended-regime edges.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ConvexityFlags {
    pub convex: bool,
    pub star_convex: bool,
}

impl ConvexityFlags {
    pub fn star_convex_available(&self) -> bool {
        self.convex || self.star_convex
    }
}

/// Fixed point of repeatedly applying every edge, keeping the best constant
/// per condition (max for lower, min for upper). Certified convexity and
/// star-convexity seed the curvature families with constant 0.
pub fn closure(initial: &[ConditionConstant], flags: ConvexityFlags) -> Vec<ConditionConstant> {
    let mut state: BTreeMap<ConditionKind, f64> = BTreeMap::new();
    let better = |kind: ConditionKind, new: f64, old: Option<&f64>| -> bool {
        match old {
            None => true,
            Some(&v) => {
                let eps = 1e-15 * (1.0 + v.abs());
                if kind.side.is_upper() {
                    new < v - eps
                } else {
                    new > v + eps
                }
            }
        }
    };
    for c in initial {
        if better(c.kind, c.value, state.get(&c.kind)) {
            state.insert(c.kind, c.value);
        }
    }
    if flags.convex {
        let k = kind(Sc, Lower);
        if better(k, 0.0, state.get(&k)) {
            state.insert(k, 0.0);
        }
    }
    if flags.star_convex_available() {
        let k = kind(StarSc, Lower);
        if better(k, 0.0, state.get(&k)) {
            state.insert(k, 0.0);
        }
    }

    for _ in 0..100 {
        let mut changed = false;
        for edge in builtin_edges() {
            let mut vals = Vec::with_capacity(edge.sources.len());
            let mut ok = true;
            for (i, k) in edge.sources.iter().enumerate() {
                match state.get(k) {
                    Some(&v) if v > 0.0 || edge.nonpositive_ok[i] => vals.push(v),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let sources: Vec<ConditionConstant> = edge
                .sources
                .iter()
                .zip(vals.iter())
                .map(|(&k, &v)| ConditionConstant::new(k, v))
                .collect();
            if let Ok(c) = apply_edge(edge, &sources) {
                // lower targets of the non-curvature families are only
                // meaningful when positive
                let meaningful =
                    c.is_meaningful() || matches!(c.kind.family, Family::Sc | Family::StarSc);
                if meaningful && better(c.kind, c.value, state.get(&c.kind)) {
                    state.insert(c.kind, c.value);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    state
        .into_iter()
        .map(|(k, v)| ConditionConstant::new(k, v))
        .collect()
}

/// JSON-friendly structural dump of the edge set.
#[derive(Debug, Serialize)]
pub struct EdgeDump {
    pub id: &'static str,
    pub sources: Vec<String>,
    pub nonpositive_ok: Vec<bool>,
    pub target: String,
    pub group: EdgeGroup,
    pub conversion_at_unit: f64,
}

pub fn dump_edges() -> Vec<EdgeDump> {
    builtin_edges()
        .iter()
        .map(|e| EdgeDump {
            id: e.id,
            sources: e.sources.iter().map(|k| k.code()).collect(),
            nonpositive_ok: e.nonpositive_ok.to_vec(),
            target: e.target.code(),
            group: e.group,
            conversion_at_unit: (e.convert)(&vec![1.0; e.sources.len()]).unwrap_or(f64::NAN),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_twenty_one_edges() {
        assert_eq!(builtin_edges().len(), 21);
        let lower = builtin_edges()
            .iter()
            .filter(|e| e.group == EdgeGroup::LowerConditions)
            .count();
        assert_eq!(lower, 9);
        assert_eq!(builtin_edges().len() - lower, 12);
    }

    #[test]
    fn conversion_examples() {
        let e = edge_by_id("eb-_and_qg+_to_pl-").unwrap();
        let c = apply_edge(
            e,
            &[
                ConditionConstant::new(kind(Eb, Lower), 13.0),
                ConditionConstant::new(kind(Qg, Upper), 25.0),
            ],
        )
        .unwrap();
        assert!((c.value - 6.76).abs() < 1e-12);

        let e = edge_by_id("rsi+_to_star_sc+").unwrap();
        let c = apply_edge(e, &[ConditionConstant::new(kind(Rsi, Upper), 25.0)]).unwrap();
        assert_eq!(c.value, 50.0);

        let e = edge_by_id("star_sc-_and_qg-_to_rsi-").unwrap();
        let c = apply_edge(
            e,
            &[
                ConditionConstant::new(kind(StarSc, Lower), 7.0),
                ConditionConstant::new(kind(Qg, Lower), 19.0),
            ],
        )
        .unwrap();
        assert_eq!(c.value, 13.0);

        // convex case: mu = 0 allowed for the first source
        let e = edge_by_id("sc-_and_qg+_to_eb+").unwrap();
        let c = apply_edge(
            e,
            &[
                ConditionConstant::new(kind(Sc, Lower), 0.0),
                ConditionConstant::new(kind(Qg, Upper), 4.0),
            ],
        )
        .unwrap();
        assert_eq!(c.value, 8.0);
    }

    #[test]
    fn apply_edge_rejects_mismatches_and_domain_violations() {
        let e = edge_by_id("pl-_to_qg-").unwrap();
        let wrong = ConditionConstant::new(kind(Qg, Lower), 1.0);
        assert!(matches!(
            apply_edge(e, &[wrong]),
            Err(Error::KindMismatch { .. })
        ));

        let e = edge_by_id("sc-_and_qg+_to_eb+").unwrap();
        let bad = [
            ConditionConstant::new(kind(Sc, Lower), 5.0),
            ConditionConstant::new(kind(Qg, Upper), 4.0),
        ];
        assert!(matches!(
            apply_edge(e, &bad),
            Err(Error::ConversionDomain(_))
        ));
    }

    #[test]
    fn convert_is_monotone_in_the_right_direction() {
        for e in builtin_edges() {
            let base = vec![1.3; e.sources.len()];
            let f0 = (e.convert)(&base);
            let Ok(f0) = f0 else { continue };
            for i in 0..e.sources.len() {
                let mut up = base.clone();
                up[i] += 0.2;
                let Ok(f1) = (e.convert)(&up) else { continue };
                let source_upper = e.sources[i].side.is_upper();
                let target_upper = e.target.side.is_upper();
                if source_upper == target_upper {
                    assert!(
                        f1 >= f0 - 1e-12,
                        "{}: source {i} same-side must not decrease",
                        e.id
                    );
                } else {
                    assert!(
                        f1 <= f0 + 1e-12,
                        "{}: source {i} cross-side must not increase",
                        e.id
                    );
                }
            }
        }
    }

    #[test]
    fn closure_from_curvature_pair_reaches_all_twelve() {
        let init = [
            ConditionConstant::new(kind(Sc, Lower), 1.0),
            ConditionConstant::new(kind(Sc, Upper), 10.0),
        ];
        let out = closure(&init, ConvexityFlags::default());
        assert_eq!(out.len(), 12);
        for c in &out {
            let expect = if c.kind.side.is_upper() { 10.0 } else { 1.0 };
            assert_eq!(c.value, expect, "{}", c.kind);
        }
    }

    #[test]
    fn closure_from_pl_alone() {
        let init = [ConditionConstant::new(kind(Pl, Lower), 3.0)];
        let out = closure(&init, ConvexityFlags::default());
        let kinds: Vec<String> = out.iter().map(|c| c.kind.code()).collect();
        assert_eq!(kinds, vec!["EB-", "PL-", "QG-"]);
        for c in out {
            assert_eq!(c.value, 3.0);
        }
    }

    #[test]
    fn closure_from_rsi_upper_alone_stops_early() {
        let init = [ConditionConstant::new(kind(Rsi, Upper), 4.0)];
        let out = closure(&init, ConvexityFlags::default());
        let pairs: Vec<(String, f64)> = out.iter().map(|c| (c.kind.code(), c.value)).collect();
        assert_eq!(
            pairs,
            vec![
                ("*SC+".to_string(), 8.0),
                ("RSI+".to_string(), 4.0),
                ("QG+".to_string(), 4.0)
            ]
        );
    }

    #[test]
    fn closure_is_idempotent() {
        let init = [
            ConditionConstant::new(kind(Sc, Lower), 2.0),
            ConditionConstant::new(kind(Sc, Upper), 7.0),
            ConditionConstant::new(kind(Qg, Lower), 3.0),
        ];
        let once = closure(&init, ConvexityFlags::default());
        let twice = closure(&once, ConvexityFlags::default());
        assert_eq!(once, twice);
    }
}

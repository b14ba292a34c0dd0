//! Step-size rules and guaranteed linear rates for constant-step gradient
//! descent under every upper/lower condition pair, plus the quadratic-optimal
//! momentum tuning.
//!
//! Six pairs carry direct proofs; every other cell inherits its rate by
//! converting its constants into a base pair along the implication graph.
//! Each rule records the base proof, the conversion chain, and which
//! Lyapunov quantity the rate bounds. Value gap and squared distance decay
//! at different times, so compliance tests must track the right one.

use serde::Serialize;

use crate::conditions::{ConditionConstant, Family, Side};
use crate::error::{Error, Result};

/// Quantity a guaranteed rate contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lyapunov {
    ValueGap,
    DistanceSq,
    MinValueGap,
}

/// Additional structural assumption a table entry may require.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Extra {
    None,
    StarConvex,
    Convex,
}

/// Structural certificates available for an objective.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Extras {
    pub star_convex: bool,
    pub convex: bool,
}

impl Extras {
    pub fn satisfies(&self, needs: Extra) -> bool {
        match needs {
            Extra::None => true,
            Extra::StarConvex => self.star_convex || self.convex,
            Extra::Convex => self.convex,
        }
    }
}

/// The six directly proved pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaseRule {
    /// Two-sided curvature: α = 2/(L+µ).
    ScSc,
    /// Smoothness with a gradient-dominance floor: α = 1/L on the value gap.
    ScPl,
    /// Upper gradient dominance with star curvature floor: α = 1/L.
    PlStarSc,
    /// Upper gradient dominance + secant floor + star convexity: α = 1/(2L).
    PlRsiStar,
    /// Gradient bound + secant floor: α = µ/L².
    EbRsi,
    /// Quadratic growth cap with a curvature floor: α = 1/L.
    QgSc,
}

impl BaseRule {
    pub fn step_size(&self, l: f64, mu: f64) -> f64 {
        match self {
            BaseRule::ScSc => 2.0 / (l + mu),
            BaseRule::ScPl => 1.0 / l,
            BaseRule::PlStarSc => 1.0 / l,
            BaseRule::PlRsiStar => 1.0 / (2.0 * l),
            BaseRule::EbRsi => mu / (l * l),
            BaseRule::QgSc => 1.0 / l,
        }
    }

    pub fn lyapunov(&self) -> Lyapunov {
        match self {
            BaseRule::ScPl => Lyapunov::ValueGap,
            _ => Lyapunov::DistanceSq,
        }
    }

    pub fn pair(&self) -> (Family, Family) {
        match self {
            BaseRule::ScSc => (Family::Sc, Family::Sc),
            BaseRule::ScPl => (Family::Sc, Family::Pl),
            BaseRule::PlStarSc => (Family::Pl, Family::StarSc),
            BaseRule::PlRsiStar => (Family::Pl, Family::Rsi),
            BaseRule::EbRsi => (Family::Eb, Family::Rsi),
            BaseRule::QgSc => (Family::Qg, Family::Sc),
        }
    }
}

/// Printed rate expression of a table cell, as a function of κ = L/µ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RateFormula {
    /// ((κ−1)/(κ+1))²
    ClassicContraction,
    /// 1 − 1/κ
    OneMinusInv,
    /// (1 − 1/κ)²
    SqOneMinusInv,
    /// 1 − 1/κ²
    OneMinusInvSq,
    /// 1 − 1/(2κ)
    OneMinusHalfInv,
    /// 1 − 1/(4κ)
    OneMinusQuarterInv,
    /// 1 − 1/(4κ²)
    OneMinusQuarterInvSq,
    /// 1 − 1/(4κ⁴)
    OneMinusQuarterInvQuad,
    /// 1 − 1/(16κ²)
    OneMinusSixteenthInvSq,
    /// 1 − 1/(16κ⁴)
    OneMinusSixteenthInvQuad,
}

impl RateFormula {
    pub fn rate(&self, kappa: f64) -> f64 {
        match self {
            RateFormula::ClassicContraction => ((kappa - 1.0) / (kappa + 1.0)).powi(2),
            RateFormula::OneMinusInv => 1.0 - 1.0 / kappa,
            RateFormula::SqOneMinusInv => (1.0 - 1.0 / kappa).powi(2),
            RateFormula::OneMinusInvSq => 1.0 - 1.0 / (kappa * kappa),
            RateFormula::OneMinusHalfInv => 1.0 - 1.0 / (2.0 * kappa),
            RateFormula::OneMinusQuarterInv => 1.0 - 1.0 / (4.0 * kappa),
            RateFormula::OneMinusQuarterInvSq => 1.0 - 1.0 / (4.0 * kappa * kappa),
            RateFormula::OneMinusQuarterInvQuad => 1.0 - 1.0 / (4.0 * kappa.powi(4)),
            RateFormula::OneMinusSixteenthInvSq => 1.0 - 1.0 / (16.0 * kappa * kappa),
            RateFormula::OneMinusSixteenthInvQuad => 1.0 - 1.0 / (16.0 * kappa.powi(4)),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            RateFormula::ClassicContraction => "((k-1)/(k+1))^2",
            RateFormula::OneMinusInv => "1-1/k",
            RateFormula::SqOneMinusInv => "(1-1/k)^2",
            RateFormula::OneMinusInvSq => "1-1/k^2",
            RateFormula::OneMinusHalfInv => "1-1/(2k)",
            RateFormula::OneMinusQuarterInv => "1-1/(4k)",
            RateFormula::OneMinusQuarterInvSq => "1-1/(4k^2)",
            RateFormula::OneMinusQuarterInvQuad => "1-1/(4k^4)",
            RateFormula::OneMinusSixteenthInvSq => "1-1/(16k^2)",
            RateFormula::OneMinusSixteenthInvQuad => "1-1/(16k^4)",
        }
    }
}

type Sub = fn(f64, f64) -> (f64, f64);

fn sub_id(l: f64, m: f64) -> (f64, f64) {
    (l, m)
}
fn sub_mu_half(l: f64, m: f64) -> (f64, f64) {
    (l, 0.5 * m)
}
fn sub_mu_sq_over_l(l: f64, m: f64) -> (f64, f64) {
    (l, m * m / l)
}
fn sub_mu_sq_half(l: f64, m: f64) -> (f64, f64) {
    (l, m * m / (2.0 * l))
}
fn sub_two_l(l: f64, m: f64) -> (f64, f64) {
    (2.0 * l, m)
}
fn sub_two_l_mu_half(l: f64, m: f64) -> (f64, f64) {
    (2.0 * l, 0.5 * m)
}
fn sub_two_l_mu_sq_half(l: f64, m: f64) -> (f64, f64) {
    (2.0 * l, m * m / (2.0 * l))
}

/// One guaranteed-rate entry for a condition pair.
#[derive(Debug, Clone, Serialize)]
pub struct TuningRule {
    pub upper: Family,
    pub lower: Family,
    pub needs: Extra,
    pub formula: RateFormula,
    pub base: BaseRule,
    /// Constant conversions that reduce this cell to its base proof.
    pub chain: &'static str,
    #[serde(skip)]
    sub: Sub,
}

impl TuningRule {
    /// Step size from this cell's own constants, routed through the base
    /// proof after conversion.
    pub fn step_size(&self, l: f64, mu: f64) -> f64 {
        let (lb, mb) = (self.sub)(l, mu);
        self.base.step_size(lb, mb)
    }

    /// Guaranteed rate at this cell's own condition number.
    pub fn rate(&self, l: f64, mu: f64) -> f64 {
        self.formula.rate(l / mu)
    }

    pub fn lyapunov(&self) -> Lyapunov {
        self.base.lyapunov()
    }

    pub fn pair_code(&self) -> String {
        format!("{}+/{}-", self.upper.code(), self.lower.code())
    }
}

struct CellSpec {
    formula: RateFormula,
    base: BaseRule,
    needs: Extra,
    sub: Sub,
    chain: &'static str,
}

fn cell_variants(upper: Family, lower: Family) -> Vec<CellSpec> {
    use BaseRule::*;
    use Extra::{Convex, None as NoExtra, StarConvex};
    use Family::*;
    use RateFormula::*;

    let spec = |formula, base, needs, sub, chain| CellSpec {
        formula,
        base,
        needs,
        sub,
        chain,
    };

    match (upper, lower) {
        // ---- two-point curvature row
        (Sc, Sc) => vec![spec(ClassicContraction, ScSc, NoExtra, sub_id, "direct")],
        (Sc, StarSc) => vec![spec(OneMinusInv, ScPl, NoExtra, sub_id, "*SC- -> PL-")],
        (Sc, Pl) => vec![spec(OneMinusInv, ScPl, NoExtra, sub_id, "direct")],
        (Sc, Rsi) => vec![
            spec(OneMinusInvSq, ScPl, NoExtra, sub_mu_sq_over_l, "RSI- -> EB-; EB- & QG+ -> PL-(mu^2/L)"),
            spec(OneMinusHalfInv, PlRsiStar, StarConvex, sub_id, "SC+ -> PL+"),
        ],
        (Sc, Eb) => vec![spec(OneMinusInvSq, ScPl, NoExtra, sub_mu_sq_over_l, "EB- & QG+ -> PL-(mu^2/L)")],
        (Sc, Qg) => vec![spec(
            OneMinusQuarterInv,
            PlRsiStar,
            StarConvex,
            sub_mu_half,
            "QG- & *SC-(0) -> RSI-(mu/2); SC+ -> PL+",
        )],
        // ---- upper gradient-dominance row
        (Pl, Sc) => vec![spec(SqOneMinusInv, QgSc, NoExtra, sub_id, "PL+ -> QG+")],
        (Pl, StarSc) => vec![spec(OneMinusInv, PlStarSc, NoExtra, sub_id, "direct")],
        (Pl, Pl) => vec![spec(
            OneMinusQuarterInv,
            PlRsiStar,
            StarConvex,
            sub_mu_half,
            "PL- -> QG-; QG- & *SC-(0) -> RSI-(mu/2)",
        )],
        (Pl, Rsi) => vec![
            spec(OneMinusInvSq, EbRsi, NoExtra, sub_id, "PL+ -> EB+"),
            spec(OneMinusHalfInv, PlRsiStar, StarConvex, sub_id, "direct"),
        ],
        (Pl, Eb) => vec![spec(
            OneMinusQuarterInvSq,
            PlRsiStar,
            StarConvex,
            sub_mu_sq_half,
            "EB- & QG+ -> PL-(mu^2/L) -> QG-; & *SC-(0) -> RSI-(mu^2/(2L))",
        )],
        (Pl, Qg) => vec![spec(
            OneMinusQuarterInv,
            PlRsiStar,
            StarConvex,
            sub_mu_half,
            "QG- & *SC-(0) -> RSI-(mu/2)",
        )],
        // ---- gradient-bound row
        (Eb, Sc) => vec![spec(SqOneMinusInv, QgSc, NoExtra, sub_id, "EB+ -> RSI+ -> QG+")],
        (Eb, StarSc) => vec![spec(OneMinusInvSq, EbRsi, NoExtra, sub_id, "*SC- -> RSI-")],
        (Eb, Pl) => vec![spec(
            OneMinusQuarterInvSq,
            EbRsi,
            StarConvex,
            sub_mu_half,
            "PL- -> QG-; QG- & *SC-(0) -> RSI-(mu/2)",
        )],
        (Eb, Rsi) => vec![spec(OneMinusInvSq, EbRsi, NoExtra, sub_id, "direct")],
        (Eb, Eb) => vec![spec(
            OneMinusQuarterInvQuad,
            EbRsi,
            StarConvex,
            sub_mu_sq_half,
            "EB- & QG+ -> PL-(mu^2/L) -> QG-; & *SC-(0) -> RSI-(mu^2/(2L))",
        )],
        (Eb, Qg) => vec![spec(
            OneMinusQuarterInvSq,
            EbRsi,
            StarConvex,
            sub_mu_half,
            "QG- & *SC-(0) -> RSI-(mu/2)",
        )],
        // ---- star-curvature row (needs convexity to reach a gradient bound)
        (StarSc, Sc) => vec![spec(SqOneMinusInv, QgSc, NoExtra, sub_id, "*SC+ -> QG+")],
        (StarSc, StarSc) => vec![spec(
            OneMinusInvSq,
            EbRsi,
            Convex,
            sub_id,
            "SC-(0) & *SC+ -> EB+; *SC- -> RSI-",
        )],
        (StarSc, Pl) => vec![spec(
            OneMinusQuarterInvSq,
            EbRsi,
            Convex,
            sub_mu_half,
            "SC-(0) & *SC+ -> EB+; PL- -> QG-; & *SC-(0) -> RSI-(mu/2)",
        )],
        (StarSc, Rsi) => vec![spec(
            OneMinusInvSq,
            EbRsi,
            Convex,
            sub_id,
            "SC-(0) & *SC+ -> EB+",
        )],
        (StarSc, Eb) => vec![spec(
            OneMinusQuarterInvQuad,
            EbRsi,
            Convex,
            sub_mu_sq_half,
            "SC-(0) & *SC+ -> EB+; EB- & QG+ -> PL- -> QG-; & *SC-(0) -> RSI-(mu^2/(2L))",
        )],
        (StarSc, Qg) => vec![spec(
            OneMinusQuarterInvSq,
            EbRsi,
            Convex,
            sub_mu_half,
            "SC-(0) & *SC+ -> EB+; QG- & *SC-(0) -> RSI-(mu/2)",
        )],
        // ---- secant and growth rows (identical: RSI+ embeds in QG+)
        (Rsi, Sc) | (Qg, Sc) => vec![spec(SqOneMinusInv, QgSc, NoExtra, sub_id, "RSI+/QG+ -> QG+")],
        (Rsi, StarSc) | (Qg, StarSc) => vec![spec(
            OneMinusQuarterInvSq,
            EbRsi,
            Convex,
            sub_two_l,
            "SC-(0) & QG+ -> EB+(2L); *SC- -> RSI-",
        )],
        (Rsi, Pl) | (Qg, Pl) => vec![spec(
            OneMinusSixteenthInvSq,
            EbRsi,
            Convex,
            sub_two_l_mu_half,
            "SC-(0) & QG+ -> EB+(2L); PL- -> QG-; & *SC-(0) -> RSI-(mu/2)",
        )],
        (Rsi, Rsi) | (Qg, Rsi) => vec![spec(
            OneMinusQuarterInvSq,
            EbRsi,
            Convex,
            sub_two_l,
            "SC-(0) & QG+ -> EB+(2L)",
        )],
        (Rsi, Eb) | (Qg, Eb) => vec![spec(
            OneMinusSixteenthInvQuad,
            EbRsi,
            Convex,
            sub_two_l_mu_sq_half,
            "SC-(0) & QG+ -> EB+(2L); EB- & QG+ -> PL-(mu^2/L) -> QG-; & *SC-(0) -> RSI-(mu^2/(2L))",
        )],
        (Rsi, Qg) | (Qg, Qg) => vec![spec(
            OneMinusSixteenthInvSq,
            EbRsi,
            Convex,
            sub_two_l_mu_half,
            "SC-(0) & QG+ -> EB+(2L); QG- & *SC-(0) -> RSI-(mu/2)",
        )],
    }
}

/// All rate guarantees for this pair whose extra assumptions are certified.
pub fn gd_rule_variants(upper: Family, lower: Family, extras: Extras) -> Vec<TuningRule> {
    cell_variants(upper, lower)
        .into_iter()
        .filter(|c| extras.satisfies(c.needs))
        .map(|c| TuningRule {
            upper,
            lower,
            needs: c.needs,
            formula: c.formula,
            base: c.base,
            chain: c.chain,
            sub: c.sub,
        })
        .collect()
}

/// The table entry for a condition pair under the given extra assumption
/// level; errors when every variant of the cell needs more structure.
pub fn gd_rule(upper: Family, lower: Family, extras: Extras) -> Result<TuningRule> {
    gd_rule_variants(upper, lower, extras)
        .into_iter()
        .next()
        .ok_or_else(|| {
            Error::NoGuarantee(format!(
                "pair {}+/{}- has no proved rate without stronger structural assumptions",
                upper.code(),
                lower.code()
            ))
        })
}

/// Momentum tuning that is optimal on curvature-bounded quadratics:
/// α = 4/(√L+√µ)², β = ((√κ−1)/(√κ+1))².
pub fn hb_quadratic_rule(l: f64, mu: f64) -> Result<(f64, f64)> {
    if !mu.is_finite() || !l.is_finite() || mu <= 0.0 || l < mu {
        return Err(Error::InvalidParameter(format!(
            "momentum rule needs L >= mu > 0, got L={l}, mu={mu}"
        )));
    }
    let alpha = 4.0 / (l.sqrt() + mu.sqrt()).powi(2);
    let kappa = l / mu;
    let beta = ((kappa.sqrt() - 1.0) / (kappa.sqrt() + 1.0)).powi(2);
    Ok((alpha, beta))
}

/// Winner of `best_guarantee`.
#[derive(Debug, Clone, Serialize)]
pub struct Guarantee {
    pub rule: TuningRule,
    pub alpha: f64,
    pub rate: f64,
    pub upper: ConditionConstant,
    pub lower: ConditionConstant,
}

/// Best guaranteed rate over every satisfied pair, each evaluated at its own
/// condition number. Condition numbers of different pairs are not comparable;
/// only the absolute guaranteed rates are.
pub fn best_guarantee(constants: &[ConditionConstant], extras: Extras) -> Result<Guarantee> {
    let mut best: Option<Guarantee> = None;
    for uc in constants.iter().filter(|c| c.kind.side == Side::Upper) {
        if !uc.value.is_finite() || uc.value <= 0.0 {
            continue;
        }
        for lc in constants.iter().filter(|c| c.kind.side == Side::Lower) {
            if !lc.value.is_finite() || lc.value <= 0.0 || uc.value < lc.value {
                continue;
            }
            for rule in gd_rule_variants(uc.kind.family, lc.kind.family, extras) {
                let rate = rule.rate(uc.value, lc.value);
                let alpha = rule.step_size(uc.value, lc.value);
                if best.as_ref().is_none_or(|b| rate < b.rate) {
                    best = Some(Guarantee {
                        rule,
                        alpha,
                        rate,
                        upper: *uc,
                        lower: *lc,
                    });
                }
            }
        }
    }
    best.ok_or_else(|| Error::NoGuarantee("no satisfied pair carries a proved rate".into()))
}

/// CSV mirror of the rate table: rows are upper families, columns lower
/// families, entries the printed formula with its extra-assumption flag.
pub fn rule_table_csv() -> String {
    let mut out = String::from("upper\\lower");
    for lo in Family::ALL {
        out.push_str(&format!(",{}-", lo.code()));
    }
    out.push('\n');
    for up in Family::ALL {
        out.push_str(&format!("{}+", up.code()));
        for lo in Family::ALL {
            let entries: Vec<String> = cell_variants(up, lo)
                .iter()
                .map(|c| {
                    let flag = match c.needs {
                        Extra::None => "",
                        Extra::StarConvex => " [star-convex]",
                        Extra::Convex => " [convex]",
                    };
                    format!("{}{}", c.formula.id(), flag)
                })
                .collect();
            out.push_str(&format!(",{}", entries.join(" / ")));
        }
        out.push('\n');
    }
    out
}

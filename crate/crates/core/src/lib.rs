//! Conditioning toolkit for first-order optimization: a corpus of exact test
//! objectives, numerical estimation of the twelve upper/lower condition
//! constants, the star norm on minimizer-anchored perturbations, the proved
//! implication graph with its constant conversions, trajectory recording
//! with rate classification, and the guaranteed-rate tuning table.

pub mod conditions;
pub mod error;
pub mod implication;
pub mod labels;
pub mod logistic;
pub mod minimizers;
pub mod objective;
pub mod optimize;
pub mod piecewise;
pub mod starnorm;
pub mod tuning;
pub mod vecmath;

pub use conditions::{
    defining_ratio, estimate_all, estimate_constant, verify_membership, ConditionConstant,
    ConditionKind, ConstantEstimate, EstimationGrid, Family, Membership, Side, Witness,
    MEMBERSHIP_TOL,
};
pub use error::{Error, Result};
pub use implication::{
    apply_edge, builtin_edges, closure, dump_edges, edge_by_id, verify_all_edges, verify_edge,
    verify_edge_with, ConvexityFlags, EdgeGroup, EdgeReport, ImplicationEdge,
};
pub use labels::{parse_objective, parse_perturbation};
pub use logistic::{make_logistic, reference_minimizer, LogisticDataset};
pub use minimizers::MinimizerSet;
pub use objective::{
    compose_increasing, make_cubic_ramp, make_f_eps, make_f_lrp, make_plateau, make_quadratic,
    make_smooth_abs, Objective,
};
pub use optimize::{
    adaptive_gd, estimate_rate, first_hit, gd, heavy_ball, AlgoSpec, RateClass, RateEstimate,
    Trajectory, CLASS_MARGIN, SUBOPT_ATOL,
};
pub use starnorm::{
    diff_as_perturbation, make_omega_eps, perturb, perturb_with_grid, star_norm, Perturbation,
    StarNormReport,
};
pub use tuning::{
    best_guarantee, gd_rule, gd_rule_variants, hb_quadratic_rule, rule_table_csv, BaseRule, Extra,
    Extras, Guarantee, Lyapunov, RateFormula, TuningRule,
};

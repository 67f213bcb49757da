//! Validation of functional trees against the construction clauses.
//!
//! Violations are data, not errors: every clause failure is reported with a
//! stable code so planted single-clause mutations can be matched precisely.
//! The σ-chain of special sequences is checked against a coding table when
//! one is supplied; without a table those checks are skipped (the validator
//! is then structural only).

use std::collections::HashSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};

use crate::coding::CodingTable;
use crate::profile::ParameterProfile;
use crate::rational::{fmt_q, Q};
use crate::schreier::is_schreier_raw;
use crate::ubasis::{u_dual_norm, UBasisModel};

use super::ops::weight_set_of;
use super::tree::{Func, Node, SpecialSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    EmptyStructure,
    AvgArity,
    AvgKind,
    Successive,
    VfgSize,
    VfgMonotone,
    Admissibility,
    WeightRange,
    BetaPartKind,
    BetaWeightDisjoint,
    SeqPairKind,
    Interlacing,
    WeightMatch,
    FirstWeightNotL1,
    SigmaChain,
    SelectionRange,
    CardinalityRule,
    LambdaDualNorm,
    ConvexMass,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub code: ViolationCode,
    pub detail: String,
}

impl Violation {
    fn new(code: ViolationCode, detail: impl Into<String>) -> Self {
        Violation {
            code,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.detail)
    }
}

struct Ctx<'a> {
    profile: &'a ParameterProfile,
    table: Option<&'a CodingTable>,
    out: Vec<Violation>,
    seen_nodes: HashSet<usize>,
    seen_seqs: HashSet<usize>,
}

/// Validate a functional against every clause it touches. Empty result
/// means every node satisfies its side conditions under the profile.
pub fn validate_functional(
    f: &Func,
    profile: &ParameterProfile,
    table: Option<&CodingTable>,
) -> Vec<Violation> {
    let mut ctx = Ctx {
        profile,
        table,
        out: Vec::new(),
        seen_nodes: HashSet::new(),
        seen_seqs: HashSet::new(),
    };
    walk(f, &mut ctx);
    ctx.out
}

/// Validate a special sequence: pair kinds, interlacing, weight matching,
/// first weight in `L_1`, σ-chain.
pub fn validate_special_sequence(
    seq: &SpecialSequence,
    profile: &ParameterProfile,
    table: Option<&CodingTable>,
) -> Vec<Violation> {
    let mut ctx = Ctx {
        profile,
        table,
        out: Vec::new(),
        seen_nodes: HashSet::new(),
        seen_seqs: HashSet::new(),
    };
    check_sequence(seq, &mut ctx);
    ctx.out
}

fn walk(f: &Func, ctx: &mut Ctx<'_>) {
    if !ctx.seen_nodes.insert(f.ptr_id()) {
        return;
    }
    match f.node() {
        Node::Unit { .. } => {}
        Node::AlphaAvg { size, parts } => {
            check_avg_shape(size, parts, ctx);
            check_successive(parts, ctx, "alpha-average parts");
            for p in parts {
                walk(p, ctx);
            }
        }
        Node::BetaAvg { size, parts } => {
            check_avg_shape(size, parts, ctx);
            let mut weight_sets = Vec::new();
            for p in parts {
                if !p.is_type_ii() {
                    ctx.out.push(Violation::new(
                        ViolationCode::BetaPartKind,
                        "beta-average part is not of type II",
                    ));
                } else if let Ok(ws) = weight_set_of(p, ctx.profile) {
                    weight_sets.push(ws);
                }
                walk(p, ctx);
            }
            for i in 0..weight_sets.len() {
                for j in i + 1..weight_sets.len() {
                    if weight_sets[i].intersection(&weight_sets[j]).next().is_some() {
                        ctx.out.push(Violation::new(
                            ViolationCode::BetaWeightDisjoint,
                            format!(
                                "beta-average parts {i} and {j} share a weight: {:?} vs {:?}",
                                weight_sets[i], weight_sets[j]
                            ),
                        ));
                    }
                }
            }
        }
        Node::TypeIAlpha { weight, avgs, .. } => {
            check_type_i(*weight, avgs, true, ctx);
            for a in avgs {
                walk(a, ctx);
            }
        }
        Node::TypeIBeta { weight, avgs, .. } => {
            check_type_i(*weight, avgs, false, ctx);
            for a in avgs {
                walk(a, ctx);
            }
        }
        Node::TypeIIPlus { seq, sel, .. } => {
            check_sequence(seq, ctx);
            check_selection(seq, sel, ctx);
        }
        Node::TypeIIMinus {
            seq, sel, lambdas, ..
        } => {
            check_sequence(seq, ctx);
            check_selection(seq, sel, ctx);
            check_lambdas(sel, lambdas, ctx);
        }
        Node::Convex { weights, parts } => {
            if weights.len() != parts.len() || parts.is_empty() {
                ctx.out.push(Violation::new(
                    ViolationCode::ConvexMass,
                    "convex combination weights/parts mismatch",
                ));
            }
            if weights.iter().any(|w| w.is_negative()) {
                ctx.out.push(Violation::new(
                    ViolationCode::ConvexMass,
                    "negative convex weight",
                ));
            }
            let mass: Q = weights.iter().sum();
            if !mass.is_one() {
                ctx.out.push(Violation::new(
                    ViolationCode::ConvexMass,
                    format!("convex weights sum to {}", fmt_q(&mass)),
                ));
            }
            for p in parts {
                walk(p, ctx);
            }
        }
        Node::Restrict { inner, .. } | Node::Neg { inner } => walk(inner, ctx),
    }
}

fn check_avg_shape(size: &BigUint, parts: &[Func], ctx: &mut Ctx<'_>) {
    if size.is_zero() {
        ctx.out
            .push(Violation::new(ViolationCode::AvgArity, "average of size 0"));
    }
    if parts.is_empty() {
        ctx.out.push(Violation::new(
            ViolationCode::EmptyStructure,
            "average with no summands",
        ));
    }
    if BigUint::from(parts.len()) > *size {
        ctx.out.push(Violation::new(
            ViolationCode::AvgArity,
            format!("average of size {size} with {} summands", parts.len()),
        ));
    }
}

fn check_successive(parts: &[Func], ctx: &mut Ctx<'_>, what: &str) {
    for w in parts.windows(2) {
        if !w[0].precedes(&w[1], ctx.profile) {
            ctx.out.push(Violation::new(
                ViolationCode::Successive,
                format!("{what} are not strictly successive"),
            ));
            return;
        }
    }
}

fn check_type_i(weight: u64, avgs: &[Func], alpha: bool, ctx: &mut Ctx<'_>) {
    if weight == 0 {
        ctx.out.push(Violation::new(
            ViolationCode::WeightRange,
            "type I weight must be >= 1",
        ));
    }
    if avgs.is_empty() {
        ctx.out.push(Violation::new(
            ViolationCode::EmptyStructure,
            "type I functional with no averages",
        ));
        return;
    }
    for a in avgs {
        let ok = match (alpha, a.node()) {
            (true, Node::AlphaAvg { .. }) => true,
            (false, Node::BetaAvg { .. }) => true,
            _ => false,
        };
        if !ok {
            ctx.out.push(Violation::new(
                ViolationCode::AvgKind,
                if alpha {
                    "type I-alpha summand is not an alpha-average"
                } else {
                    "type I-beta summand is not a beta-average"
                },
            ));
            return;
        }
    }
    check_successive(avgs, ctx, "type I averages");

    // very fast growing: sizes strictly increase and clear the growth floor
    for w in avgs.windows(2) {
        let (prev, next) = (&w[0], &w[1]);
        let (Some(ps), Some(ns)) = (prev.avg_size(), next.avg_size()) else {
            continue;
        };
        if ns <= ps {
            ctx.out.push(Violation::new(
                ViolationCode::VfgMonotone,
                format!("very fast growing: size {ns} does not exceed predecessor {ps}"),
            ));
        }
        if let Some((_, prev_max)) = prev.support_bounds(ctx.profile) {
            if !ctx.profile.vfg_ok(ns, prev_max) {
                ctx.out.push(Violation::new(
                    ViolationCode::VfgSize,
                    format!(
                        "very fast growing: {ns} <= {}",
                        ctx.profile.vfg_floor_text(prev_max)
                    ),
                ));
            }
        }
    }

    // admissibility of the min-supports at the effective level
    let mut minsupps = Vec::new();
    for a in avgs {
        match a.support_bounds(ctx.profile) {
            Some((lo, _)) => minsupps.push(lo),
            None => {
                ctx.out.push(Violation::new(
                    ViolationCode::EmptyStructure,
                    "type I average with empty support",
                ));
                return;
            }
        }
    }
    let level = ctx.profile.lambda(weight);
    if minsupps.windows(2).all(|w| w[0] < w[1]) && !is_schreier_raw(&minsupps, level) {
        ctx.out.push(Violation::new(
            ViolationCode::Admissibility,
            format!("min-supports {minsupps:?} not S_{level}-admissible"),
        ));
    }
}

fn check_sequence(seq: &SpecialSequence, ctx: &mut Ctx<'_>) {
    let key = seq as *const SpecialSequence as usize;
    if !ctx.seen_seqs.insert(key) {
        return;
    }
    if seq.is_empty() {
        ctx.out.push(Violation::new(
            ViolationCode::EmptyStructure,
            "empty special sequence",
        ));
        return;
    }
    // pair kinds
    for (q, (f, g)) in seq.pairs.iter().enumerate() {
        for h in [f, g] {
            if !matches!(h.node(), Node::TypeIAlpha { .. }) {
                ctx.out.push(Violation::new(
                    ViolationCode::SeqPairKind,
                    format!("sequence member at pair {} is not of type I-alpha", q + 1),
                ));
            }
        }
        walk(f, ctx);
        walk(g, ctx);
    }
    // interlacing f_1 < g_1 < f_2 < ...
    let flat: Vec<&Func> = seq.pairs.iter().flat_map(|(f, g)| [f, g]).collect();
    for (i, w) in flat.windows(2).enumerate() {
        if !w[0].precedes(w[1], ctx.profile) {
            ctx.out.push(Violation::new(
                ViolationCode::Interlacing,
                format!("sequence members {} and {} are not interlaced", i + 1, i + 2),
            ));
        }
    }
    // weight matching within pairs
    for (q, (f, g)) in seq.pairs.iter().enumerate() {
        match (f.weight(), g.weight()) {
            (Some(a), Some(b)) if a == b => {}
            (a, b) => ctx.out.push(Violation::new(
                ViolationCode::WeightMatch,
                format!("pair {}: weights {a:?} vs {b:?}", q + 1),
            )),
        }
    }
    // first weight lands in L1
    if let Some(w1) = seq.pairs[0].0.weight() {
        if !ctx.profile.in_l1(w1) {
            ctx.out.push(Violation::new(
                ViolationCode::FirstWeightNotL1,
                format!("w(f_1) = {w1} is not in L1"),
            ));
        }
    }
    // σ-chain: w(f_{q+1}) = σ(f_1, g_1, …, f_q, g_q)
    for q in 1..seq.len() {
        let Some(w) = seq.pairs[q].0.weight() else {
            continue;
        };
        let last = &seq.pairs[q - 1].1;
        let Some((_, max_supp)) = last.support_bounds(ctx.profile) else {
            continue;
        };
        let floor = ctx
            .profile
            .sigma_floor(max_supp, &last.max_coeff_denominator(ctx.profile));
        if !floor.below(w) {
            ctx.out.push(Violation::new(
                ViolationCode::SigmaChain,
                format!("w(f_{}) = {w} does not clear the growth floor {floor}", q + 1),
            ));
        }
        if let Some(table) = ctx.table {
            let key = seq.prefix_key(q);
            match table.lookup(&key) {
                Some(v) if v == w => {}
                Some(v) => ctx.out.push(Violation::new(
                    ViolationCode::SigmaChain,
                    format!("w(f_{}) = {w} but sigma(prefix) = {v}", q + 1),
                )),
                None => ctx.out.push(Violation::new(
                    ViolationCode::SigmaChain,
                    format!("prefix of length {q} not present in the coding table"),
                )),
            }
        }
    }
}

fn check_selection(seq: &SpecialSequence, sel: &[usize], ctx: &mut Ctx<'_>) {
    if sel.is_empty() {
        ctx.out.push(Violation::new(
            ViolationCode::SelectionRange,
            "empty selection",
        ));
        return;
    }
    if sel.windows(2).any(|w| w[0] >= w[1]) || *sel.last().unwrap() >= seq.len() {
        ctx.out.push(Violation::new(
            ViolationCode::SelectionRange,
            "selection must be strictly increasing within the sequence",
        ));
        return;
    }
    let first = &seq.pairs[sel[0]].0;
    if let Some((min_supp, _)) = first.support_bounds(ctx.profile) {
        if !ctx.profile.pair_cardinality_ok(sel.len(), min_supp) {
            ctx.out.push(Violation::new(
                ViolationCode::CardinalityRule,
                format!(
                    "{}·{} > min supp f_min = {min_supp}",
                    ctx.profile.pair_card_mult(),
                    sel.len()
                ),
            ));
        }
    }
}

fn check_lambdas(sel: &[usize], lambdas: &[Q], ctx: &mut Ctx<'_>) {
    if lambdas.len() != sel.len() {
        ctx.out.push(Violation::new(
            ViolationCode::LambdaDualNorm,
            "lambda/selection length mismatch",
        ));
        return;
    }
    let coeffs: Vec<(u64, Q)> = sel
        .iter()
        .zip(lambdas)
        .map(|(&q, l)| (q as u64 + 1, l.clone()))
        .collect();
    match u_dual_norm(&coeffs, UBasisModel) {
        Ok(v) => {
            if v > Q::one() {
                ctx.out.push(Violation::new(
                    ViolationCode::LambdaDualNorm,
                    format!("dual norm of the lambda vector is {} > 1", fmt_q(&v)),
                ));
            }
        }
        Err(e) => ctx.out.push(Violation::new(
            ViolationCode::LambdaDualNorm,
            format!("dual norm not checkable: {e}"),
        )),
    }
}

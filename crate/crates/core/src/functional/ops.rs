//! Derived operations on type II functionals: weight sets, the separation
//! predicate, and branch-action tables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::finvec::FinVec;
use crate::profile::ParameterProfile;
use crate::rational::{qabs, Q};

use super::evaluate::evaluate;
use super::tree::{Func, Node, SpecialSequence};

/// Range `[min supp f_q, max supp g_q]` of the q-th pair.
fn pair_range(seq: &SpecialSequence, q: usize, profile: &ParameterProfile) -> Option<(u64, u64)> {
    let (f, g) = &seq.pairs[q];
    let (lo, _) = f.support_bounds(profile)?;
    let (_, hi) = g.support_bounds(profile)?;
    Some((lo, hi))
}

fn ranges_meet(a: (u64, u64), b: (u64, u64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// Clause 4/5 weight set: `{w(f_q) : q selected, ran(f_q ± g_q) ∩ E ≠ ∅}`.
pub fn weight_set(f: &Func, profile: &ParameterProfile) -> Result<BTreeSet<u64>> {
    weight_set_of(f, profile)
}

pub(crate) fn weight_set_of(f: &Func, profile: &ParameterProfile) -> Result<BTreeSet<u64>> {
    let (seq, sel, window) = match f.node() {
        Node::TypeIIPlus {
            seq, sel, window, ..
        } => (seq, sel, window),
        Node::TypeIIMinus {
            seq, sel, window, ..
        } => (seq, sel, window),
        _ => {
            return Err(Error::Domain(
                "weight_set is defined for type II functionals".into(),
            ))
        }
    };
    let mut out = BTreeSet::new();
    for &q in sel {
        let Some(range) = pair_range(seq, q, profile) else {
            continue;
        };
        if range.0 > window.hi || range.1 < window.lo {
            continue;
        }
        if let Some(w) = seq.pairs[q].0.weight() {
            out.insert(w);
        }
    }
    Ok(out)
}

/// The separation predicate: with `q_0` the first selected pair whose range
/// meets `ran x_2`, does that pair's range miss `ran x_3`?
pub fn separates(
    f: &Func,
    x1: &FinVec,
    x2: &FinVec,
    x3: &FinVec,
    profile: &ParameterProfile,
) -> Result<bool> {
    let (seq, sel) = match f.node() {
        Node::TypeIIPlus { seq, sel, .. } => (seq, sel),
        Node::TypeIIMinus { seq, sel, .. } => (seq, sel),
        _ => {
            return Err(Error::Domain(
                "separation is defined for type II functionals".into(),
            ))
        }
    };
    let ranges: Vec<(u64, u64)> = [x1, x2, x3]
        .iter()
        .map(|x| {
            x.min_supp()
                .zip(x.max_supp())
                .ok_or_else(|| Error::Domain("zero vector in separation test".into()))
        })
        .collect::<Result<_>>()?;
    if !(ranges[0].1 < ranges[1].0 && ranges[1].1 < ranges[2].0) {
        return Err(Error::Domain(
            "separation requires successive vectors x1 < x2 < x3".into(),
        ));
    }
    let fsupp = to_range(f, profile)
        .ok_or_else(|| Error::Domain("zero functional in separation test".into()))?;
    for r in &ranges {
        if !ranges_meet(fsupp, *r) {
            return Err(Error::Domain(
                "separation requires supp f to meet every vector".into(),
            ));
        }
    }
    let q0 = sel
        .iter()
        .copied()
        .find(|&q| pair_range(seq, q, profile).is_some_and(|r| ranges_meet(r, ranges[1])))
        .ok_or_else(|| Error::Domain("no selected pair meets ran x2".into()))?;
    let r0 = pair_range(seq, q0, profile).unwrap();
    Ok(!ranges_meet(r0, ranges[2]))
}

fn to_range(f: &Func, profile: &ParameterProfile) -> Option<(u64, u64)> {
    f.support_bounds(profile)
}

/// Branch-action table: for every vector and every pair of the sequence,
/// the magnitudes `|(f_q ± g_q)(x_k)|`, with per-vector maxima. The finite
/// probe behind ε-norming detection.
#[derive(Debug, Clone)]
pub struct BranchAction {
    /// `plus[k][q] = |(f_q + g_q)(x_k)|`
    pub plus: Vec<Vec<Q>>,
    /// `minus[k][q] = |(f_q - g_q)(x_k)|`
    pub minus: Vec<Vec<Q>>,
    pub max_plus: Vec<Q>,
    pub max_minus: Vec<Q>,
}

pub fn branch_action(
    seq: &SpecialSequence,
    xs: &[FinVec],
    profile: &ParameterProfile,
) -> BranchAction {
    let mut plus = Vec::with_capacity(xs.len());
    let mut minus = Vec::with_capacity(xs.len());
    for x in xs {
        let mut prow = Vec::with_capacity(seq.len());
        let mut mrow = Vec::with_capacity(seq.len());
        for (f, g) in &seq.pairs {
            let fv = evaluate(f, x, profile);
            let gv = evaluate(g, x, profile);
            prow.push(qabs(&(&fv + &gv)));
            mrow.push(qabs(&(&fv - &gv)));
        }
        plus.push(prow);
        minus.push(mrow);
    }
    let max_of = |rows: &Vec<Vec<Q>>| {
        rows.iter()
            .map(|r| r.iter().cloned().max().unwrap_or_else(|| Q::from_integer(0.into())))
            .collect()
    };
    BranchAction {
        max_plus: max_of(&plus),
        max_minus: max_of(&minus),
        plus,
        minus,
    }
}

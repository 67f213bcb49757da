//! Exact evaluation and coefficient extraction.
//!
//! Evaluation applies windows by threading a clip interval down the tree
//! instead of materializing restricted vectors, and memoizes on
//! `(node pointer, clip)` so shared subtrees cost once. The scalar of a
//! type I node is `1/2^{λ(weight)}` under the active profile; signs, the
//! `1/2` of type II and the `1/size` of averages are applied exactly.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::One;

use crate::finvec::{FinVec, Window};
use crate::profile::ParameterProfile;
use crate::rational::Q;

use super::tree::{Func, Node};

type Memo<T> = HashMap<(usize, Window), T>;

/// `f(x)`, exact.
pub fn evaluate(f: &Func, x: &FinVec, profile: &ParameterProfile) -> Q {
    let mut memo: Memo<Q> = HashMap::new();
    eval(f, x, Window::FULL, profile, &mut memo)
}

/// `(E f)(x)` for an explicit clip window.
pub fn evaluate_clipped(f: &Func, x: &FinVec, clip: Window, profile: &ParameterProfile) -> Q {
    let mut memo: Memo<Q> = HashMap::new();
    eval(f, x, clip, profile, &mut memo)
}

fn eval(f: &Func, x: &FinVec, clip: Window, profile: &ParameterProfile, memo: &mut Memo<Q>) -> Q {
    if let Some(v) = memo.get(&(f.ptr_id(), clip)) {
        return v.clone();
    }
    let half = Q::new(1.into(), 2.into());
    let out = match f.node() {
        Node::Unit { sign, index } => {
            if clip.contains(*index) {
                sign.q() * x.get(*index)
            } else {
                Q::from_integer(0.into())
            }
        }
        Node::AlphaAvg { size, parts } | Node::BetaAvg { size, parts } => {
            let scale = Q::new(1.into(), BigInt::from(size.clone()));
            let sum: Q = parts.iter().map(|p| eval(p, x, clip, profile, memo)).sum();
            scale * sum
        }
        Node::TypeIAlpha {
            weight,
            sign,
            window,
            avgs,
        }
        | Node::TypeIBeta {
            weight,
            sign,
            window,
            avgs,
        } => {
            let inner = clip.meet(window);
            let sum: Q = avgs.iter().map(|a| eval(a, x, inner, profile, memo)).sum();
            sign.q() * profile.scalar(*weight) * sum
        }
        Node::TypeIIPlus {
            seq,
            sel,
            sign,
            window,
        } => {
            let inner = clip.meet(window);
            let mut sum = Q::from_integer(0.into());
            for &q in sel {
                let (fq, gq) = &seq.pairs[q];
                sum += eval(fq, x, inner, profile, memo) + eval(gq, x, inner, profile, memo);
            }
            sign.q() * half * sum
        }
        Node::TypeIIMinus {
            seq,
            sel,
            lambdas,
            sign,
            window,
        } => {
            let inner = clip.meet(window);
            let mut sum = Q::from_integer(0.into());
            for (&q, lam) in sel.iter().zip(lambdas) {
                let (fq, gq) = &seq.pairs[q];
                sum += lam * (eval(fq, x, inner, profile, memo) - eval(gq, x, inner, profile, memo));
            }
            sign.q() * half * sum
        }
        Node::Convex { weights, parts } => weights
            .iter()
            .zip(parts)
            .map(|(w, p)| w * eval(p, x, clip, profile, memo))
            .sum(),
        Node::Restrict { window, inner } => eval(inner, x, clip.meet(window), profile, memo),
        Node::Neg { inner } => -eval(inner, x, clip, profile, memo),
    };
    memo.insert((f.ptr_id(), clip), out.clone());
    out
}

/// The functional as a coefficient vector, window restrictions applied.
pub fn to_coeffs(f: &Func, profile: &ParameterProfile) -> FinVec {
    let mut memo: Memo<FinVec> = HashMap::new();
    coeffs(f, Window::FULL, profile, &mut memo)
}

fn coeffs(f: &Func, clip: Window, profile: &ParameterProfile, memo: &mut Memo<FinVec>) -> FinVec {
    if let Some(v) = memo.get(&(f.ptr_id(), clip)) {
        return v.clone();
    }
    let half = Q::new(1.into(), 2.into());
    let out = match f.node() {
        Node::Unit { sign, index } => {
            let mut v = FinVec::zero();
            if clip.contains(*index) {
                v.set(*index, sign.q());
            }
            v
        }
        Node::AlphaAvg { size, parts } | Node::BetaAvg { size, parts } => {
            let scale = Q::new(1.into(), BigInt::from(size.clone()));
            let mut v = FinVec::zero();
            for p in parts {
                v = v.add(&coeffs(p, clip, profile, memo));
            }
            v.scale(&scale)
        }
        Node::TypeIAlpha {
            weight,
            sign,
            window,
            avgs,
        }
        | Node::TypeIBeta {
            weight,
            sign,
            window,
            avgs,
        } => {
            let inner = clip.meet(window);
            let mut v = FinVec::zero();
            for a in avgs {
                v = v.add(&coeffs(a, inner, profile, memo));
            }
            v.scale(&(sign.q() * profile.scalar(*weight)))
        }
        Node::TypeIIPlus {
            seq,
            sel,
            sign,
            window,
        } => {
            let inner = clip.meet(window);
            let mut v = FinVec::zero();
            for &q in sel {
                let (fq, gq) = &seq.pairs[q];
                v = v.add(&coeffs(fq, inner, profile, memo));
                v = v.add(&coeffs(gq, inner, profile, memo));
            }
            v.scale(&(sign.q() * half))
        }
        Node::TypeIIMinus {
            seq,
            sel,
            lambdas,
            sign,
            window,
        } => {
            let inner = clip.meet(window);
            let mut v = FinVec::zero();
            for (&q, lam) in sel.iter().zip(lambdas) {
                let (fq, gq) = &seq.pairs[q];
                let diff = coeffs(fq, inner, profile, memo).sub(&coeffs(gq, inner, profile, memo));
                v = v.add(&diff.scale(lam));
            }
            v.scale(&(sign.q() * half))
        }
        Node::Convex { weights, parts } => {
            let mut v = FinVec::zero();
            for (w, p) in weights.iter().zip(parts) {
                v = v.add(&coeffs(p, clip, profile, memo).scale(w));
            }
            v
        }
        Node::Restrict { window, inner } => coeffs(inner, clip.meet(window), profile, memo),
        Node::Neg { inner } => {
            coeffs(inner, clip, profile, memo).scale(&Q::from_integer((-1).into()))
        }
    };
    memo.insert((f.ptr_id(), clip), out.clone());
    out
}

impl Func {
    /// True support bounds under the profile; `None` for zero functionals.
    pub fn support_bounds(&self, profile: &ParameterProfile) -> Option<(u64, u64)> {
        let c = to_coeffs(self, profile);
        Some((c.min_supp()?, c.max_supp()?))
    }

    /// Largest coefficient denominator (1 for the zero functional); feeds
    /// the strict coding-function floor.
    pub fn max_coeff_denominator(&self, profile: &ParameterProfile) -> BigUint {
        to_coeffs(self, profile)
            .iter()
            .map(|(_, c)| c.denom().magnitude().clone())
            .max()
            .unwrap_or_else(BigUint::one)
    }

    /// `self < other` as blocks, by true supports.
    pub fn precedes(&self, other: &Func, profile: &ParameterProfile) -> bool {
        match (self.support_bounds(profile), other.support_bounds(profile)) {
            (Some((_, a)), Some((b, _))) => a < b,
            _ => false,
        }
    }
}

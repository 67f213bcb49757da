//! Functional trees and special sequences.
//!
//! Trees are immutable behind `Arc`; builders share subtrees freely and the
//! evaluator memoizes on pointer identity, so a sub-functional recurring
//! across certificates is costed once.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::finvec::Window;
use crate::rational::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn q(self) -> Q {
        match self {
            Sign::Plus => Q::from_integer(1.into()),
            Sign::Minus => Q::from_integer((-1).into()),
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

/// Interlaced pairs `(f_q, g_q)` of type I-alpha functionals; the backbone
/// of type II functionals. Chain validity (weights, σ-values) is checked by
/// the validator, not enforced structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialSequence {
    pub pairs: Vec<(Func, Func)>,
}

impl SpecialSequence {
    pub fn new(pairs: Vec<(Func, Func)>) -> Self {
        SpecialSequence { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Canonical serialization of the prefix `(f_1, g_1, …, f_q, g_q)`,
    /// `upto` pairs long: the coding-function key.
    pub fn prefix_key(&self, upto: usize) -> String {
        let mut s = String::from("(seq");
        for (f, g) in self.pairs.iter().take(upto) {
            s.push(' ');
            s.push_str(&f.to_sexpr());
            s.push(' ');
            s.push_str(&g.to_sexpr());
        }
        s.push(')');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    /// `± e_n`, type 0.
    Unit { sign: Sign, index: u64 },
    /// `(1/size) Σ parts`, at most `size` summands, successively supported.
    AlphaAvg { size: BigUint, parts: Vec<Func> },
    /// Like `AlphaAvg` but the summands must be type II with pairwise
    /// disjoint weight sets (and need not be successive).
    BetaAvg { size: BigUint, parts: Vec<Func> },
    /// `± E (1/2^w) Σ avgs` over a very fast growing admissible family.
    TypeIAlpha {
        weight: u64,
        sign: Sign,
        window: Window,
        avgs: Vec<Func>,
    },
    TypeIBeta {
        weight: u64,
        sign: Sign,
        window: Window,
        avgs: Vec<Func>,
    },
    /// `± E (1/2) Σ_{q in sel} (f_q + g_q)`.
    TypeIIPlus {
        seq: Arc<SpecialSequence>,
        sel: Vec<usize>,
        sign: Sign,
        window: Window,
    },
    /// `± E (1/2) Σ_{q in sel} λ_q (f_q - g_q)`.
    TypeIIMinus {
        seq: Arc<SpecialSequence>,
        sel: Vec<usize>,
        lambdas: Vec<Q>,
        sign: Sign,
        window: Window,
    },
    /// Rational convex combination.
    Convex { weights: Vec<Q>, parts: Vec<Func> },
    /// `E f` for an arbitrary member.
    Restrict { window: Window, inner: Func },
    /// `-f`.
    Neg { inner: Func },
}

/// Shared immutable functional.
#[derive(Debug, Clone, PartialEq)]
pub struct Func(pub Arc<Node>);

impl Func {
    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn unit(sign: Sign, index: u64) -> Func {
        Func(Arc::new(Node::Unit { sign, index }))
    }

    pub fn alpha_avg(size: BigUint, parts: Vec<Func>) -> Func {
        Func(Arc::new(Node::AlphaAvg { size, parts }))
    }

    pub fn beta_avg(size: BigUint, parts: Vec<Func>) -> Func {
        Func(Arc::new(Node::BetaAvg { size, parts }))
    }

    pub fn type_ia(weight: u64, sign: Sign, window: Window, avgs: Vec<Func>) -> Func {
        Func(Arc::new(Node::TypeIAlpha {
            weight,
            sign,
            window,
            avgs,
        }))
    }

    pub fn type_ib(weight: u64, sign: Sign, window: Window, avgs: Vec<Func>) -> Func {
        Func(Arc::new(Node::TypeIBeta {
            weight,
            sign,
            window,
            avgs,
        }))
    }

    pub fn ii_plus(seq: Arc<SpecialSequence>, sel: Vec<usize>, sign: Sign, window: Window) -> Func {
        Func(Arc::new(Node::TypeIIPlus {
            seq,
            sel,
            sign,
            window,
        }))
    }

    pub fn ii_minus(
        seq: Arc<SpecialSequence>,
        sel: Vec<usize>,
        lambdas: Vec<Q>,
        sign: Sign,
        window: Window,
    ) -> Func {
        Func(Arc::new(Node::TypeIIMinus {
            seq,
            sel,
            lambdas,
            sign,
            window,
        }))
    }

    pub fn convex(weights: Vec<Q>, parts: Vec<Func>) -> Func {
        Func(Arc::new(Node::Convex { weights, parts }))
    }

    pub fn restrict(window: Window, inner: Func) -> Func {
        Func(Arc::new(Node::Restrict { window, inner }))
    }

    pub fn neg(inner: Func) -> Func {
        Func(Arc::new(Node::Neg { inner }))
    }

    /// Weight of a type I node.
    pub fn weight(&self) -> Option<u64> {
        match self.node() {
            Node::TypeIAlpha { weight, .. } | Node::TypeIBeta { weight, .. } => Some(*weight),
            _ => None,
        }
    }

    /// Size of an average node.
    pub fn avg_size(&self) -> Option<&BigUint> {
        match self.node() {
            Node::AlphaAvg { size, .. } | Node::BetaAvg { size, .. } => Some(size),
            _ => None,
        }
    }

    pub fn is_type_ii(&self) -> bool {
        matches!(
            self.node(),
            Node::TypeIIPlus { .. } | Node::TypeIIMinus { .. }
        )
    }
}

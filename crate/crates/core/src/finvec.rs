//! Finitely supported vectors with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, Q};

pub const FINVEC_HEADER: &str = "finvec v1";

/// A coordinate window `[lo, hi]`, inclusive on both ends. Windows model the
/// interval restrictions `E` of the norming set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Window {
    pub lo: u64,
    pub hi: u64,
}

impl Window {
    pub const FULL: Window = Window { lo: 1, hi: u64::MAX };

    pub fn new(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || lo > hi {
            return Err(Error::Domain(format!("bad window [{lo},{hi}]")));
        }
        Ok(Window { lo, hi })
    }

    pub fn is_full(&self) -> bool {
        *self == Window::FULL
    }

    pub fn contains(&self, i: u64) -> bool {
        self.lo <= i && i <= self.hi
    }

    /// Intersection; empty intersections collapse to an impossible window
    /// that contains nothing.
    pub fn meet(&self, other: &Window) -> Window {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo > hi {
            Window { lo: u64::MAX, hi: 0 }
        } else {
            Window { lo, hi }
        }
    }
}

/// Sparse vector: a finite map from positive coordinates to nonzero rationals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FinVec {
    entries: BTreeMap<u64, Q>,
}

impl FinVec {
    pub fn zero() -> Self {
        FinVec::default()
    }

    pub fn unit(index: u64) -> Self {
        let mut v = FinVec::zero();
        v.set(index, Q::from_integer(1.into()));
        v
    }

    pub fn from_entries<I: IntoIterator<Item = (u64, Q)>>(entries: I) -> Result<Self> {
        let mut v = FinVec::zero();
        for (i, c) in entries {
            if i == 0 {
                return Err(Error::Domain("coordinate indices start at 1".into()));
            }
            if v.entries.contains_key(&i) {
                return Err(Error::Domain(format!("duplicate coordinate {i}")));
            }
            v.set(i, c);
        }
        Ok(v)
    }

    pub fn get(&self, i: u64) -> Q {
        self.entries.get(&i).cloned().unwrap_or_else(Q::zero)
    }

    /// Insert, dropping exact zeros.
    pub fn set(&mut self, i: u64, c: Q) {
        assert!(i >= 1, "coordinate indices start at 1");
        if c.is_zero() {
            self.entries.remove(&i);
        } else {
            self.entries.insert(i, c);
        }
    }

    pub fn add_to(&mut self, i: u64, c: &Q) {
        let cur = self.get(i);
        self.set(i, cur + c);
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &Q)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.keys().copied()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn min_supp(&self) -> Option<u64> {
        self.entries.keys().next().copied()
    }

    pub fn max_supp(&self) -> Option<u64> {
        self.entries.keys().next_back().copied()
    }

    /// `sum` of both vectors.
    pub fn add(&self, other: &FinVec) -> FinVec {
        let mut out = self.clone();
        for (i, c) in other.iter() {
            out.add_to(i, c);
        }
        out
    }

    pub fn sub(&self, other: &FinVec) -> FinVec {
        let mut out = self.clone();
        for (i, c) in other.iter() {
            let cur = out.get(i);
            out.set(i, cur - c);
        }
        out
    }

    pub fn scale(&self, a: &Q) -> FinVec {
        if a.is_zero() {
            return FinVec::zero();
        }
        let mut out = FinVec::zero();
        for (i, c) in self.iter() {
            out.set(i, c * a);
        }
        out
    }

    /// Pointwise window restriction `E x`.
    pub fn restrict(&self, w: &Window) -> FinVec {
        let mut out = FinVec::zero();
        for (i, c) in self.iter() {
            if w.contains(i) {
                out.set(i, c.clone());
            }
        }
        out
    }

    pub fn l1(&self) -> Q {
        self.entries.values().map(|c| c.abs()).sum()
    }

    pub fn linf(&self) -> Q {
        self.entries
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Q::zero)
    }

    pub fn dot(&self, other: &FinVec) -> Q {
        // iterate the smaller support
        let (a, b) = if self.support_len() <= other.support_len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Q::zero();
        for (i, c) in a.iter() {
            if let Some(d) = b.entries.get(&i) {
                acc += c * d;
            }
        }
        acc
    }

    /// Do `self` and `other` satisfy `self < other` as blocks
    /// (max supp self < min supp other)? Zero vectors compare as false.
    pub fn precedes(&self, other: &FinVec) -> bool {
        match (self.max_supp(), other.min_supp()) {
            (Some(a), Some(b)) => a < b,
            _ => false,
        }
    }

    /// Line-oriented text format: a header, then `index:num/den` per line,
    /// sorted by index.
    pub fn to_text(&self) -> String {
        let mut s = String::from(FINVEC_HEADER);
        s.push('\n');
        for (i, c) in self.iter() {
            let _ = writeln!(s, "{i}:{}", fmt_q(c));
        }
        s
    }

    pub fn parse_text(input: &str) -> Result<FinVec> {
        let mut lines = input.lines();
        match lines.next() {
            Some(h) if h.trim() == FINVEC_HEADER => {}
            other => {
                return Err(Error::Parse(format!(
                    "expected header `{FINVEC_HEADER}`, got {other:?}"
                )))
            }
        }
        let mut v = FinVec::zero();
        let mut last: Option<u64> = None;
        for (lineno, line) in lines.enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (i, c) = line.split_once(':').ok_or_else(|| {
                Error::Parse(format!("line {}: expected `index:coeff`", lineno + 2))
            })?;
            let i: u64 = i
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad index `{i}`", lineno + 2)))?;
            if i == 0 {
                return Err(Error::Parse(format!("line {}: index 0", lineno + 2)));
            }
            if last.is_some_and(|p| p >= i) {
                return Err(Error::Parse(format!(
                    "line {}: indices must be strictly increasing",
                    lineno + 2
                )));
            }
            last = Some(i);
            let c = parse_q(c)?;
            if c.is_zero() {
                return Err(Error::Parse(format!(
                    "line {}: stored zero coefficient",
                    lineno + 2
                )));
            }
            v.set(i, c);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn basic_ops() {
        let mut v = FinVec::zero();
        v.set(3, q(1, 2));
        v.set(5, q(-2, 3));
        assert_eq!(v.min_supp(), Some(3));
        assert_eq!(v.max_supp(), Some(5));
        assert_eq!(v.l1(), q(7, 6));
        assert_eq!(v.linf(), q(2, 3));
        v.add_to(3, &q(-1, 2));
        assert_eq!(v.support_len(), 1);
    }

    #[test]
    fn windows() {
        let w = Window::new(3, 9).unwrap();
        assert!(w.contains(3) && w.contains(9) && !w.contains(10));
        let m = w.meet(&Window::new(5, 20).unwrap());
        assert_eq!(m, Window::new(5, 9).unwrap());
        let empty = w.meet(&Window::new(10, 20).unwrap());
        assert!(!empty.contains(9) && !empty.contains(10));
        assert!(Window::new(0, 5).is_err());
        assert!(Window::new(7, 5).is_err());
    }

    #[test]
    fn text_roundtrip() {
        let v = FinVec::from_entries([(2, q(1, 3)), (7, q(-5, 4)), (9, q(2, 1))]).unwrap();
        let t = v.to_text();
        assert_eq!(FinVec::parse_text(&t).unwrap(), v);
        assert!(FinVec::parse_text("bogus\n1:1").is_err());
        assert!(FinVec::parse_text("finvec v1\n0:1").is_err());
        assert!(FinVec::parse_text("finvec v1\n5:1\n3:1").is_err());
        assert!(FinVec::parse_text("finvec v1\n5:0").is_err());
    }
}

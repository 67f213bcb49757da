//! Canonical s-expression text for functionals.
//!
//! The grammar is stable and versioned through the file header:
//!
//! ```text
//! func := (unit SIGN INDEX)
//!       | (avga SIZE func+)                       ; alpha-average
//!       | (avgb SIZE func+)                       ; beta-average
//!       | (ia WEIGHT SIGN WIN func+)              ; type I alpha
//!       | (ib WEIGHT SIGN WIN func+)              ; type I beta
//!       | (ii+ SIGN WIN (seq func+) (sel INT+))
//!       | (ii- SIGN WIN (seq func+) (sel INT+) (lam RAT+))
//!       | (cvx (w RAT+) func+)
//!       | (restrict WIN func)
//!       | (neg func)
//! WIN  := full | [ LO HI ]
//! SIGN := + | -
//! ```
//!
//! `seq` lists the pairs flattened `f_1 g_1 f_2 g_2 …`; `sel` positions are
//! 1-based. The writer emits a single line with single spaces, so equal
//! functionals serialize identically; the coding table keys on this text.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::finvec::Window;
use crate::rational::{fmt_q, parse_q};

use super::tree::{Func, Node, Sign, SpecialSequence};

pub const FUNCTIONAL_HEADER: &str = "functional v1";

fn write_window(out: &mut String, w: &Window) {
    if w.is_full() {
        out.push_str("full");
    } else {
        let _ = write!(out, "[ {} {} ]", w.lo, w.hi);
    }
}

impl Func {
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        write_func(&mut s, self);
        s
    }

    /// Header plus s-expression, the standalone file form.
    pub fn to_text(&self) -> String {
        format!("{FUNCTIONAL_HEADER}\n{}\n", self.to_sexpr())
    }
}

fn write_func(out: &mut String, f: &Func) {
    match f.node() {
        Node::Unit { sign, index } => {
            let _ = write!(out, "(unit {sign} {index})");
        }
        Node::AlphaAvg { size, parts } => {
            let _ = write!(out, "(avga {size}");
            for p in parts {
                out.push(' ');
                write_func(out, p);
            }
            out.push(')');
        }
        Node::BetaAvg { size, parts } => {
            let _ = write!(out, "(avgb {size}");
            for p in parts {
                out.push(' ');
                write_func(out, p);
            }
            out.push(')');
        }
        Node::TypeIAlpha {
            weight,
            sign,
            window,
            avgs,
        } => {
            let _ = write!(out, "(ia {weight} {sign} ");
            write_window(out, window);
            for a in avgs {
                out.push(' ');
                write_func(out, a);
            }
            out.push(')');
        }
        Node::TypeIBeta {
            weight,
            sign,
            window,
            avgs,
        } => {
            let _ = write!(out, "(ib {weight} {sign} ");
            write_window(out, window);
            for a in avgs {
                out.push(' ');
                write_func(out, a);
            }
            out.push(')');
        }
        Node::TypeIIPlus {
            seq,
            sel,
            sign,
            window,
        } => {
            let _ = write!(out, "(ii+ {sign} ");
            write_window(out, window);
            out.push(' ');
            write_seq(out, seq);
            out.push_str(" (sel");
            for q in sel {
                let _ = write!(out, " {}", q + 1);
            }
            out.push_str("))");
        }
        Node::TypeIIMinus {
            seq,
            sel,
            lambdas,
            sign,
            window,
        } => {
            let _ = write!(out, "(ii- {sign} ");
            write_window(out, window);
            out.push(' ');
            write_seq(out, seq);
            out.push_str(" (sel");
            for q in sel {
                let _ = write!(out, " {}", q + 1);
            }
            out.push_str(") (lam");
            for l in lambdas {
                let _ = write!(out, " {}", fmt_q(l));
            }
            out.push_str("))");
        }
        Node::Convex { weights, parts } => {
            out.push_str("(cvx (w");
            for w in weights {
                let _ = write!(out, " {}", fmt_q(w));
            }
            out.push(')');
            for p in parts {
                out.push(' ');
                write_func(out, p);
            }
            out.push(')');
        }
        Node::Restrict { window, inner } => {
            out.push_str("(restrict ");
            write_window(out, window);
            out.push(' ');
            write_func(out, inner);
            out.push(')');
        }
        Node::Neg { inner } => {
            out.push_str("(neg ");
            write_func(out, inner);
            out.push(')');
        }
    }
}

fn write_seq(out: &mut String, seq: &SpecialSequence) {
    out.push_str("(seq");
    for (f, g) in &seq.pairs {
        out.push(' ');
        write_func(out, f);
        out.push(' ');
        write_func(out, g);
    }
    out.push(')');
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    OpenSq,
    CloseSq,
    Atom(String),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | ')' | '[' | ']' => {
                if !cur.is_empty() {
                    out.push(Tok::Atom(std::mem::take(&mut cur)));
                }
                out.push(match ch {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    '[' => Tok::OpenSq,
                    _ => Tok::CloseSq,
                });
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(Tok::Atom(std::mem::take(&mut cur)));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(Tok::Atom(cur));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    depth: usize,
}

const MAX_DEPTH: usize = 200;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Result<Tok> {
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| Error::Parse("unexpected end of input".into()))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        let got = self.next()?;
        if got != t {
            return Err(Error::Parse(format!("expected {t:?}, got {got:?}")));
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<String> {
        match self.next()? {
            Tok::Atom(a) => Ok(a),
            other => Err(Error::Parse(format!("expected atom, got {other:?}"))),
        }
    }

    fn sign(&mut self) -> Result<Sign> {
        match self.atom()?.as_str() {
            "+" => Ok(Sign::Plus),
            "-" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("bad sign `{other}`"))),
        }
    }

    fn u64(&mut self) -> Result<u64> {
        let a = self.atom()?;
        a.parse()
            .map_err(|_| Error::Parse(format!("bad integer `{a}`")))
    }

    fn biguint(&mut self) -> Result<BigUint> {
        let a = self.atom()?;
        a.parse()
            .map_err(|_| Error::Parse(format!("bad size `{a}`")))
    }

    fn window(&mut self) -> Result<Window> {
        match self.peek() {
            Some(Tok::Atom(a)) if a == "full" => {
                self.pos += 1;
                Ok(Window::FULL)
            }
            Some(Tok::OpenSq) => {
                self.pos += 1;
                let lo = self.u64()?;
                let hi = self.u64()?;
                self.expect(Tok::CloseSq)?;
                Window::new(lo, hi).map_err(|e| Error::Parse(e.to_string()))
            }
            other => Err(Error::Parse(format!("expected window, got {other:?}"))),
        }
    }

    fn func(&mut self) -> Result<Func> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Error::Parse("nesting too deep".into()));
        }
        self.expect(Tok::Open)?;
        let head = self.atom()?;
        let out = match head.as_str() {
            "unit" => {
                let sign = self.sign()?;
                let index = self.u64()?;
                if index == 0 {
                    return Err(Error::Parse("unit index must be >= 1".into()));
                }
                Func::unit(sign, index)
            }
            "avga" | "avgb" => {
                let size = self.biguint()?;
                let parts = self.func_list()?;
                if head == "avga" {
                    Func::alpha_avg(size, parts)
                } else {
                    Func::beta_avg(size, parts)
                }
            }
            "ia" | "ib" => {
                let weight = self.u64()?;
                let sign = self.sign()?;
                let window = self.window()?;
                let avgs = self.func_list()?;
                if head == "ia" {
                    Func::type_ia(weight, sign, window, avgs)
                } else {
                    Func::type_ib(weight, sign, window, avgs)
                }
            }
            "ii+" | "ii-" => {
                let sign = self.sign()?;
                let window = self.window()?;
                let seq = self.seq()?;
                let sel = self.sel(seq.len())?;
                let node = if head == "ii+" {
                    Func::ii_plus(Arc::new(seq), sel, sign, window)
                } else {
                    let lambdas = self.lam(sel.len())?;
                    Func::ii_minus(Arc::new(seq), sel, lambdas, sign, window)
                };
                node
            }
            "cvx" => {
                self.expect(Tok::Open)?;
                let tag = self.atom()?;
                if tag != "w" {
                    return Err(Error::Parse(format!("expected (w …), got ({tag} …)")));
                }
                let mut weights = Vec::new();
                while !matches!(self.peek(), Some(Tok::Close)) {
                    weights.push(parse_q(&self.atom()?)?);
                }
                self.expect(Tok::Close)?;
                let parts = self.func_list()?;
                if weights.len() != parts.len() {
                    return Err(Error::Parse("cvx weights/parts mismatch".into()));
                }
                Func::convex(weights, parts)
            }
            "restrict" => {
                let window = self.window()?;
                let inner = self.func()?;
                self.expect(Tok::Close)?;
                self.depth -= 1;
                return Ok(Func::restrict(window, inner));
            }
            "neg" => {
                let inner = self.func()?;
                self.expect(Tok::Close)?;
                self.depth -= 1;
                return Ok(Func::neg(inner));
            }
            other => return Err(Error::Parse(format!("unknown node kind `{other}`"))),
        };
        self.expect(Tok::Close)?;
        self.depth -= 1;
        Ok(out)
    }

    fn func_list(&mut self) -> Result<Vec<Func>> {
        let mut out = Vec::new();
        while matches!(self.peek(), Some(Tok::Open)) {
            out.push(self.func()?);
        }
        if out.is_empty() {
            return Err(Error::Parse("expected at least one functional".into()));
        }
        Ok(out)
    }

    fn seq(&mut self) -> Result<SpecialSequence> {
        self.expect(Tok::Open)?;
        let tag = self.atom()?;
        if tag != "seq" {
            return Err(Error::Parse(format!("expected (seq …), got ({tag} …)")));
        }
        let funcs = self.func_list()?;
        self.expect(Tok::Close)?;
        if funcs.len() % 2 != 0 {
            return Err(Error::Parse("seq must hold whole pairs".into()));
        }
        let pairs = funcs
            .chunks(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect();
        Ok(SpecialSequence::new(pairs))
    }

    fn sel(&mut self, seq_len: usize) -> Result<Vec<usize>> {
        self.expect(Tok::Open)?;
        let tag = self.atom()?;
        if tag != "sel" {
            return Err(Error::Parse(format!("expected (sel …), got ({tag} …)")));
        }
        let mut out: Vec<usize> = Vec::new();
        while !matches!(self.peek(), Some(Tok::Close)) {
            let q = self.u64()?;
            if q == 0 || q as usize > seq_len {
                return Err(Error::Parse(format!("sel position {q} out of range")));
            }
            let q = q as usize - 1;
            if out.last().is_some_and(|&p| p >= q) {
                return Err(Error::Parse("sel must be strictly increasing".into()));
            }
            out.push(q);
        }
        self.expect(Tok::Close)?;
        if out.is_empty() {
            return Err(Error::Parse("sel must be nonempty".into()));
        }
        Ok(out)
    }

    fn lam(&mut self, count: usize) -> Result<Vec<crate::rational::Q>> {
        self.expect(Tok::Open)?;
        let tag = self.atom()?;
        if tag != "lam" {
            return Err(Error::Parse(format!("expected (lam …), got ({tag} …)")));
        }
        let mut out = Vec::new();
        while !matches!(self.peek(), Some(Tok::Close)) {
            out.push(parse_q(&self.atom()?)?);
        }
        self.expect(Tok::Close)?;
        if out.len() != count {
            return Err(Error::Parse("lam/sel length mismatch".into()));
        }
        Ok(out)
    }
}

/// Parse a bare s-expression.
pub fn parse_func(s: &str) -> Result<Func> {
    let toks = tokenize(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let f = p.func()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse("trailing input after functional".into()));
    }
    Ok(f)
}

/// Parse the standalone file form (header line + s-expression).
pub fn parse_func_text(s: &str) -> Result<Func> {
    let Some((head, rest)) = s.split_once('\n') else {
        return Err(Error::Parse("missing functional header".into()));
    };
    if head.trim() != FUNCTIONAL_HEADER {
        return Err(Error::Parse(format!(
            "expected header `{FUNCTIONAL_HEADER}`, got `{head}`"
        )));
    }
    parse_func(rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn sample_seq() -> Arc<SpecialSequence> {
        let mk = |w: u64, i: u64| {
            Func::type_ia(
                w,
                Sign::Plus,
                Window::FULL,
                vec![Func::alpha_avg(1u32.into(), vec![Func::unit(Sign::Plus, i)])],
            )
        };
        Arc::new(SpecialSequence::new(vec![
            (mk(3, 10), mk(3, 12)),
            (mk(48, 14), mk(48, 16)),
        ]))
    }

    #[test]
    fn roundtrip_all_kinds() {
        let seq = sample_seq();
        let cases = vec![
            Func::unit(Sign::Minus, 7),
            Func::alpha_avg(
                5u32.into(),
                vec![Func::unit(Sign::Plus, 2), Func::unit(Sign::Minus, 4)],
            ),
            Func::type_ia(
                1,
                Sign::Plus,
                Window::new(2, 90).unwrap(),
                vec![Func::alpha_avg(1u32.into(), vec![Func::unit(Sign::Plus, 3)])],
            ),
            Func::ii_plus(seq.clone(), vec![0, 1], Sign::Plus, Window::FULL),
            Func::ii_minus(
                seq.clone(),
                vec![1],
                vec![q(-2, 3)],
                Sign::Minus,
                Window::new(5, 500).unwrap(),
            ),
            Func::convex(
                vec![q(1, 3), q(2, 3)],
                vec![Func::unit(Sign::Plus, 1), Func::unit(Sign::Minus, 2)],
            ),
            Func::restrict(Window::new(3, 9).unwrap(), Func::unit(Sign::Plus, 5)),
            Func::neg(Func::unit(Sign::Plus, 9)),
            Func::beta_avg(
                4u32.into(),
                vec![Func::ii_plus(seq, vec![0], Sign::Plus, Window::FULL)],
            ),
        ];
        for f in cases {
            let text = f.to_sexpr();
            let parsed = parse_func(&text).unwrap();
            assert_eq!(parsed, f, "roundtrip failed for {text}");
            assert_eq!(parsed.to_sexpr(), text);
        }
    }

    #[test]
    fn header_form() {
        let f = Func::unit(Sign::Plus, 3);
        let t = f.to_text();
        assert_eq!(parse_func_text(&t).unwrap(), f);
        assert!(parse_func_text("bogus\n(unit + 3)").is_err());
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "(unit + 0)",
            "(unit ? 3)",
            "(avga 3)",
            "(ia 1 + full)",
            "(ii+ + full (seq (unit + 1)) (sel 1))",
            "(ii+ + full (seq (unit + 1) (unit + 2)) (sel 3))",
            "(ii+ + full (seq (unit + 1) (unit + 2)) (sel))",
            "(ii- + full (seq (unit + 1) (unit + 2)) (sel 1) (lam 1 2))",
            "(cvx (w 1/2) (unit + 1) (unit + 2))",
            "(unit + 3) trailing",
            "(restrict [ 9 5 ] (unit + 3))",
        ] {
            assert!(parse_func(bad).is_err(), "accepted `{bad}`");
        }
    }

    #[test]
    fn prefix_key_is_stable() {
        let seq = sample_seq();
        let k1 = seq.prefix_key(1);
        let k2 = seq.prefix_key(2);
        assert!(k2.starts_with(&k1[..k1.len() - 1]));
        assert!(k1.starts_with("(seq (ia 3 + full"));
    }
}

//! The piecewise-linear model of the suppression-unconditional universal
//! basis and the exact `u`-norm / dual-norm machinery behind the dual-norm
//! side condition of the norming set.
//!
//! The model enumerates dyadic tent functions on `[0,1]`: index `k >= 1`
//! decomposes as `k = 2^l + i`, `0 <= i < 2^l`, and `x_k` is the tent
//! supported on `[i/2^l, (i+1)/2^l]` with peak value exactly 1. The
//! enumeration is injective and reproducible, every function has three
//! rational breakpoints, and
//!
//! `‖Σ a_k u_k‖_u = max over F of ‖Σ_{k in F} a_k x_k‖_∞`
//!
//! is exact: a piecewise-linear function attains its sup-norm at a
//! breakpoint, and for a fixed point the best subset is the sign-aligned
//! one. Suppression unconditionality of the induced basis is immediate from
//! the subset form.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{Q, qi};
use crate::simplex::{maximize, Lp};

pub const U_NORM_SUPPORT_MAX: usize = 20;
pub const U_DUAL_SUPPORT_MAX: usize = 12;

/// Stateless deterministic enumeration of the model functions.
#[derive(Debug, Clone, Copy, Default)]
pub struct UBasisModel;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tent {
    pub left: Q,
    pub peak: Q,
    pub right: Q,
}

impl UBasisModel {
    /// Tent for index `k >= 1`.
    pub fn tent(self, k: u64) -> Tent {
        assert!(k >= 1, "u-basis indices start at 1");
        let level = 63 - k.leading_zeros() as u64;
        let i = k - (1u64 << level);
        let den = Q::from_integer((1i64 << level).into());
        let left = Q::from_integer((i as i64).into()) / &den;
        let right = Q::from_integer((i as i64 + 1).into()) / &den;
        let peak = (&left + &right) / qi(2);
        Tent { left, peak, right }
    }

    /// `x_k(t)`, exactly.
    pub fn eval(self, k: u64, t: &Q) -> Q {
        let tent = self.tent(k);
        if *t <= tent.left || *t >= tent.right {
            return Q::zero();
        }
        let half = &tent.peak - &tent.left;
        if *t <= tent.peak {
            (t - &tent.left) / &half
        } else {
            (&tent.right - t) / &half
        }
    }

    pub fn breakpoints(self, k: u64) -> [Q; 3] {
        let t = self.tent(k);
        [t.left, t.peak, t.right]
    }
}

/// Attainment data for a `u`-norm evaluation: at point `t`, the sign-aligned
/// subset `subset` realizes the value with orientation `sign`.
#[derive(Debug, Clone)]
pub struct UNormWitness {
    pub t: Q,
    pub subset: Vec<u64>,
    pub sign: i8,
}

/// Exact `u`-norm with its attaining witness.
pub fn u_norm(coeffs: &[(u64, Q)], model: UBasisModel) -> Result<(Q, UNormWitness)> {
    if coeffs.len() > U_NORM_SUPPORT_MAX {
        return Err(Error::ResourceLimit(format!(
            "u_norm support {} exceeds cap {U_NORM_SUPPORT_MAX}",
            coeffs.len()
        )));
    }
    let mut seen = BTreeSet::new();
    for (k, _) in coeffs {
        if *k == 0 || !seen.insert(*k) {
            return Err(Error::Domain("u-indices must be distinct and >= 1".into()));
        }
    }
    let mut points: BTreeSet<Q> = BTreeSet::new();
    points.insert(Q::zero());
    points.insert(qi(1));
    for (k, _) in coeffs {
        for b in model.breakpoints(*k) {
            points.insert(b);
        }
    }
    let mut best = Q::zero();
    let mut witness = UNormWitness {
        t: Q::zero(),
        subset: Vec::new(),
        sign: 1,
    };
    for t in &points {
        let mut plus = Q::zero();
        let mut minus = Q::zero();
        let mut plus_set = Vec::new();
        let mut minus_set = Vec::new();
        for (k, c) in coeffs {
            let v = c * model.eval(*k, t);
            if v.is_positive() {
                plus += &v;
                plus_set.push(*k);
            } else if v.is_negative() {
                minus -= &v;
                minus_set.push(*k);
            }
        }
        if plus > best {
            best = plus.clone();
            witness = UNormWitness {
                t: t.clone(),
                subset: plus_set.clone(),
                sign: 1,
            };
        }
        if minus > best {
            best = minus.clone();
            witness = UNormWitness {
                t: t.clone(),
                subset: minus_set.clone(),
                sign: -1,
            };
        }
    }
    Ok((best, witness))
}

/// Exact dual norm `sup { Σ λ_q a_q : ‖Σ a_q u_q‖_u <= 1 }`, computed by
/// cutting planes over the finitely many facets `Σ_{q in F} ± a_q x_q(t) <= 1`
/// with an exact simplex underneath.
pub fn u_dual_norm(lambdas: &[(u64, Q)], model: UBasisModel) -> Result<Q> {
    let n = lambdas.len();
    if n > U_DUAL_SUPPORT_MAX {
        return Err(Error::ResourceLimit(format!(
            "u_dual_norm support {n} exceeds cap {U_DUAL_SUPPORT_MAX}"
        )));
    }
    if n == 0 {
        return Ok(Q::zero());
    }
    let mut seen = BTreeSet::new();
    for (k, _) in lambdas {
        if *k == 0 || !seen.insert(*k) {
            return Err(Error::Domain("u-indices must be distinct and >= 1".into()));
        }
    }
    let indices: Vec<u64> = lambdas.iter().map(|(k, _)| *k).collect();
    let objective: Vec<Q> = lambdas.iter().map(|(_, l)| l.clone()).collect();

    let mut points: BTreeSet<Q> = BTreeSet::new();
    points.insert(Q::zero());
    points.insert(qi(1));
    for k in &indices {
        for b in model.breakpoints(*k) {
            points.insert(b);
        }
    }
    let points: Vec<Q> = points.into_iter().collect();

    // start from the singleton facets |a_q| <= 1 (each ‖x_q‖_∞ = 1)
    let mut rows: Vec<(Vec<Q>, Q)> = Vec::new();
    for q in 0..n {
        let mut row = vec![Q::zero(); n];
        row[q] = qi(1);
        rows.push((row.clone(), qi(1)));
        row[q] = qi(-1);
        rows.push((row, qi(1)));
    }

    loop {
        let lp = Lp {
            num_vars: n,
            rows: rows.clone(),
            objective: objective.clone(),
        };
        let sol = maximize(&lp)?;
        // most violated sign-aligned facet at the current optimum
        let mut worst: Option<(Q, Vec<Q>)> = None;
        for t in &points {
            let vals: Vec<Q> = indices.iter().map(|k| model.eval(*k, t)).collect();
            for sign in [1i64, -1] {
                let mut row = vec![Q::zero(); n];
                let mut lhs = Q::zero();
                for q in 0..n {
                    let contrib = qi(sign) * &vals[q] * &sol.point[q];
                    if contrib.is_positive() {
                        row[q] = qi(sign) * &vals[q];
                        lhs += contrib;
                    }
                }
                if lhs > qi(1) && worst.as_ref().is_none_or(|(w, _)| lhs > *w) {
                    worst = Some((lhs, row));
                }
            }
        }
        match worst {
            None => return Ok(sol.value),
            Some((_, row)) => rows.push((row, qi(1))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn tents_enumerate() {
        let m = UBasisModel;
        assert_eq!(
            m.tent(1),
            Tent {
                left: qi(0),
                peak: q(1, 2),
                right: qi(1)
            }
        );
        assert_eq!(
            m.tent(2),
            Tent {
                left: qi(0),
                peak: q(1, 4),
                right: q(1, 2)
            }
        );
        assert_eq!(m.tent(3).left, q(1, 2));
        // injectivity over a prefix
        let mut seen = std::collections::BTreeSet::new();
        for k in 1..=64 {
            assert!(seen.insert((m.tent(k).left, m.tent(k).right)));
        }
        // peak value exactly 1
        for k in 1..=16 {
            let peak = m.tent(k).peak;
            assert_eq!(m.eval(k, &peak), qi(1));
        }
    }

    #[test]
    fn u_norm_basics() {
        let m = UBasisModel;
        let (v, w) = u_norm(&[(5, qi(1))], m).unwrap();
        assert_eq!(v, qi(1));
        assert_eq!(w.subset, vec![5]);
        let (v, _) = u_norm(&[], m).unwrap();
        assert_eq!(v, qi(0));
    }

    #[test]
    fn u_norm_cancellation_vs_grid() {
        let m = UBasisModel;
        // overlapping tents with opposite signs
        let coeffs = vec![(1u64, qi(1)), (2u64, qi(-1))];
        let (exact, witness) = u_norm(&coeffs, m).unwrap();
        // grid sampling can only ever reach up to the exact value
        let mut grid_best = Q::zero();
        for i in 0..=100i64 {
            let t = q(i, 100);
            for mask in 1u32..4 {
                let mut s = Q::zero();
                for (j, (k, c)) in coeffs.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        s += c * m.eval(*k, &t);
                    }
                }
                if s.abs() > grid_best {
                    grid_best = s.abs();
                }
            }
        }
        assert!(grid_best <= exact);
        // and the witness replays to the exact value
        let replay: Q = witness
            .subset
            .iter()
            .map(|k| {
                let c = &coeffs.iter().find(|(i, _)| i == k).unwrap().1;
                c * m.eval(*k, &witness.t)
            })
            .sum();
        assert_eq!(replay.abs(), exact);
    }

    #[test]
    fn dual_norm_single_and_zero() {
        let m = UBasisModel;
        assert_eq!(u_dual_norm(&[(4, qi(1))], m).unwrap(), qi(1));
        assert_eq!(u_dual_norm(&[(4, qi(0))], m).unwrap(), qi(0));
        assert_eq!(u_dual_norm(&[], m).unwrap(), qi(0));
    }

    #[test]
    fn dual_norm_pair_in_interval() {
        let m = UBasisModel;
        // disjointly supported tents: the ball is an l_inf box, dual is l_1
        let v = u_dual_norm(&[(2, qi(1)), (3, qi(1))], m).unwrap();
        assert_eq!(v, qi(2));
        // overlapping tents still land in [1, 2]
        let v = u_dual_norm(&[(1, qi(1)), (2, qi(1))], m).unwrap();
        assert!(v >= qi(1) && v <= qi(2), "got {v}");
    }

    #[test]
    fn dual_norm_matches_vertex_oracle_dim2() {
        let m = UBasisModel;
        for (i, j) in [(1u64, 2u64), (2, 3), (1, 3), (2, 5)] {
            let lam = vec![(i, qi(1)), (j, q(-1, 2))];
            let exact = u_dual_norm(&lam, m).unwrap();
            // oracle: intersect all pairs of tight facets, keep feasible
            // vertices, maximize
            let mut points: BTreeSet<Q> = BTreeSet::new();
            points.insert(qi(0));
            points.insert(qi(1));
            for k in [i, j] {
                for b in m.breakpoints(k) {
                    points.insert(b);
                }
            }
            // facets are ±(subset sums): the orientation applies to the whole
            // subset, never per coordinate
            let mut facets: Vec<(Q, Q)> = Vec::new(); // v_i a + v_j b <= 1
            for t in &points {
                let vi = m.eval(i, t);
                let vj = m.eval(j, t);
                for (si, sj) in [(1, 1), (-1, -1), (1, 0), (-1, 0), (0, 1), (0, -1)] {
                    facets.push((qi(si) * &vi, qi(sj) * &vj));
                }
            }
            let mut best = Q::zero();
            for a in 0..facets.len() {
                for b in a + 1..facets.len() {
                    let (p, r) = (&facets[a], &facets[b]);
                    let det = &p.0 * &r.1 - &p.1 * &r.0;
                    if det.is_zero() {
                        continue;
                    }
                    let x = (&r.1 - &p.1) / &det;
                    let y = (&p.0 - &r.0) / &det;
                    // feasibility in the full facet set
                    if facets.iter().all(|(u, v)| u * &x + v * &y <= qi(1)) {
                        let val = &lam[0].1 * &x + &lam[1].1 * &y;
                        if val > best {
                            best = val;
                        }
                    }
                }
            }
            assert_eq!(exact, best, "indices ({i},{j})");
        }
    }
}

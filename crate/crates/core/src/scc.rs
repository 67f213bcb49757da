//! Special convex combinations: generation by repeated averages and exact
//! validation of the defining mass conditions.
//!
//! An `(n, ε)` basic combination puts convex weights on an `S_n` set so that
//! every `S_{n-1}` sub-selection carries mass strictly below `ε`; the general
//! form lifts this to successive blocks through their min-supports. For
//! `n = 0` the sub-selection quantifier is treated as vacuous, so singletons
//! qualify and the existence result bootstraps.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::finvec::FinVec;
use crate::rational::{fmt_q, Q};
use crate::schreier::is_schreier_raw;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SccKind {
    /// Combination of unit basis vectors on the stored indices.
    Basic { indices: Vec<u64> },
    /// Combination of successive blocks.
    General { blocks: Vec<FinVec> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccWitness {
    pub level: u32,
    pub epsilon: Q,
    pub coeffs: Vec<Q>,
    pub kind: SccKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SccViolation {
    EpsilonNonPositive,
    CountMismatch { expected: usize, got: usize },
    NegativeCoeff { position: usize },
    MassNotOne { mass: String },
    PsiNotIncreasing,
    NotSchreier { level: u32 },
    BlocksNotSuccessive,
    ZeroBlock { position: usize },
    /// An `S_{n-1}` sub-selection carries mass >= ε; `witness` lists the
    /// offending coordinates of the projected combination.
    SubSelectionMass { mass: String, witness: Vec<u64> },
    MassCheckInfeasible { detail: String },
}

impl SccWitness {
    /// Min-supports (basic: the indices themselves).
    pub fn psi(&self) -> Vec<u64> {
        match &self.kind {
            SccKind::Basic { indices } => indices.clone(),
            SccKind::General { blocks } => {
                blocks.iter().map(|b| b.min_supp().unwrap_or(0)).collect()
            }
        }
    }

    /// The combination itself, `Σ c_k e_k` or `Σ c_k x_k`.
    pub fn combination(&self) -> FinVec {
        let mut out = FinVec::zero();
        match &self.kind {
            SccKind::Basic { indices } => {
                for (i, c) in indices.iter().zip(&self.coeffs) {
                    out.add_to(*i, c);
                }
            }
            SccKind::General { blocks } => {
                for (b, c) in blocks.iter().zip(&self.coeffs) {
                    for (i, v) in b.iter() {
                        out.add_to(i, &(v * c));
                    }
                }
            }
        }
        out
    }

    /// The projected basic combination `Σ c_k e_{ψ(k)}`.
    pub fn basic_projection(&self) -> FinVec {
        let mut out = FinVec::zero();
        for (i, c) in self.psi().iter().zip(&self.coeffs) {
            out.add_to(*i, c);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Exact validation against the defining conditions. Empty result means the
/// witness is a valid `(n, ε)` (basic or general) special convex combination.
pub fn validate_scc(w: &SccWitness) -> Vec<SccViolation> {
    let mut out = Vec::new();
    if w.epsilon <= Q::zero() {
        out.push(SccViolation::EpsilonNonPositive);
    }
    let psi = w.psi();
    if psi.len() != w.coeffs.len() {
        out.push(SccViolation::CountMismatch {
            expected: psi.len(),
            got: w.coeffs.len(),
        });
        return out;
    }
    for (k, c) in w.coeffs.iter().enumerate() {
        if c.is_negative() {
            out.push(SccViolation::NegativeCoeff { position: k });
        }
    }
    let mass: Q = w.coeffs.iter().sum();
    if !mass.is_one() {
        out.push(SccViolation::MassNotOne { mass: fmt_q(&mass) });
    }
    if let SccKind::General { blocks } = &w.kind {
        for (k, b) in blocks.iter().enumerate() {
            if b.is_zero() {
                out.push(SccViolation::ZeroBlock { position: k });
                return out;
            }
        }
        if blocks.windows(2).any(|p| !p[0].precedes(&p[1])) {
            out.push(SccViolation::BlocksNotSuccessive);
        }
    }
    if psi.windows(2).any(|p| p[0] >= p[1]) || psi.first().is_some_and(|&v| v == 0) {
        out.push(SccViolation::PsiNotIncreasing);
        return out;
    }
    if !is_schreier_raw(&psi, w.level) {
        out.push(SccViolation::NotSchreier { level: w.level });
    }
    if w.level >= 1 {
        let points: Vec<(u64, Q)> = psi.iter().cloned().zip(w.coeffs.iter().cloned()).collect();
        match max_schreier_mass(&points, w.level - 1) {
            Ok((m, witness)) => {
                if m >= w.epsilon {
                    out.push(SccViolation::SubSelectionMass {
                        mass: fmt_q(&m),
                        witness,
                    });
                }
            }
            Err(e) => out.push(SccViolation::MassCheckInfeasible {
                detail: e.to_string(),
            }),
        }
    }
    out
}

const MASS2_MAX_POINTS: usize = 120;
const MASS3_MAX_POINTS: usize = 18;

/// Maximum mass of an `S_level` subset of weighted points, with an attaining
/// subset. Exact. Level 0 and 1 are unrestricted in size; level 2 uses a
/// cubic DP and level 3+ exhaustive search, both size-guarded.
pub fn max_schreier_mass(points: &[(u64, Q)], level: u32) -> Result<(Q, Vec<u64>)> {
    if points.is_empty() {
        return Ok((Q::zero(), Vec::new()));
    }
    match level {
        0 => {
            let (i, c) = points
                .iter()
                .max_by(|a, b| a.1.cmp(&b.1))
                .map(|(i, c)| (*i, c.clone()))
                .unwrap();
            Ok((c, vec![i]))
        }
        1 => Ok(max_s1_mass(points)),
        2 => {
            if points.len() > MASS2_MAX_POINTS {
                return Err(Error::ResourceLimit(format!(
                    "level-2 mass check capped at {MASS2_MAX_POINTS} points, got {}",
                    points.len()
                )));
            }
            Ok(max_s2_mass(points))
        }
        _ => {
            if points.len() > MASS3_MAX_POINTS {
                return Err(Error::ResourceLimit(format!(
                    "level-{level} mass check capped at {MASS3_MAX_POINTS} points, got {}",
                    points.len()
                )));
            }
            Ok(max_mass_exhaustive(points, level))
        }
    }
}

/// Max over starts `i` of `c_i` + the top `v_i - 1` coefficients to the
/// right. Runs in O(N · distinct coefficients).
fn max_s1_mass(points: &[(u64, Q)]) -> (Q, Vec<u64>) {
    let n = points.len();
    // buckets: coeff -> count among positions > i, kept sorted descending
    let mut buckets: BTreeMap<Q, u64> = BTreeMap::new();
    let mut best = Q::zero();
    let mut best_start = n - 1;
    for i in (0..n).rev() {
        let (v, c) = &points[i];
        let budget = v - 1;
        let mut mass = c.clone();
        let mut left = budget;
        for (coeff, count) in buckets.iter().rev() {
            if left == 0 {
                break;
            }
            let take = left.min(*count);
            mass += coeff * Q::from_integer(take.into());
            left -= take;
        }
        if mass > best {
            best = mass;
            best_start = i;
        }
        *buckets.entry(c.clone()).or_insert(0) += 1;
    }
    // reconstruct the attaining subset for the best start
    let (v0, _) = &points[best_start];
    let mut rest: Vec<(u64, Q)> = points[best_start + 1..].to_vec();
    rest.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut subset: Vec<u64> = vec![points[best_start].0];
    for (idx, _) in rest.iter().take((v0 - 1) as usize) {
        subset.push(*idx);
    }
    subset.sort_unstable();
    (best, subset)
}

/// Max mass of an `S_2` subset: at most `min G` successive `S_1` blocks.
fn max_s2_mass(points: &[(u64, Q)]) -> (Q, Vec<u64>) {
    let n = points.len();
    let mut best = Q::zero();
    let mut best_subset = Vec::new();
    for first in 0..n {
        let blocks_budget = (points[first].0).min(n as u64) as usize;
        // dp[pos][blocks_left][cap]: forward over positions, choice recorded
        // for reconstruction. cap = elements still allowed in the open block.
        // Keep it simple: memoized recursion.
        let mut memo: BTreeMap<(usize, usize, u64), (Q, u8)> = BTreeMap::new();
        let (mass, _) = s2_rec(points, first + 1, blocks_budget - 1, points[first].0 - 1, &mut memo);
        let total = &points[first].1 + &mass;
        if total > best {
            best = total.clone();
            best_subset = s2_reconstruct(points, first, blocks_budget, &memo);
        }
    }
    (best, best_subset)
}

/// Value of the best continuation from `pos` with `blocks_left` fresh blocks
/// available and `cap` slots left in the open block. Choice codes:
/// 0 skip, 1 extend open block, 2 open a new block here.
fn s2_rec(
    points: &[(u64, Q)],
    pos: usize,
    blocks_left: usize,
    cap: u64,
    memo: &mut BTreeMap<(usize, usize, u64), (Q, u8)>,
) -> (Q, u8) {
    if pos >= points.len() {
        return (Q::zero(), 0);
    }
    let key = (pos, blocks_left, cap);
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let (skip, _) = s2_rec(points, pos + 1, blocks_left, cap, memo);
    let mut best = (skip, 0u8);
    if cap > 0 {
        let (ext, _) = s2_rec(points, pos + 1, blocks_left, cap - 1, memo);
        let ext = &points[pos].1 + ext;
        if ext > best.0 {
            best = (ext, 1);
        }
    }
    if blocks_left > 0 {
        let (open, _) = s2_rec(points, pos + 1, blocks_left - 1, points[pos].0 - 1, memo);
        let open = &points[pos].1 + open;
        if open > best.0 {
            best = (open, 2);
        }
    }
    memo.insert(key, best.clone());
    best
}

fn s2_reconstruct(
    points: &[(u64, Q)],
    first: usize,
    blocks_budget: usize,
    memo: &BTreeMap<(usize, usize, u64), (Q, u8)>,
) -> Vec<u64> {
    let mut subset = vec![points[first].0];
    let mut pos = first + 1;
    let mut blocks_left = blocks_budget - 1;
    let mut cap = points[first].0 - 1;
    while pos < points.len() {
        let Some((_, choice)) = memo.get(&(pos, blocks_left, cap)) else {
            break;
        };
        match choice {
            1 => {
                subset.push(points[pos].0);
                cap -= 1;
            }
            2 => {
                subset.push(points[pos].0);
                blocks_left -= 1;
                cap = points[pos].0 - 1;
            }
            _ => {}
        }
        pos += 1;
    }
    subset
}

fn max_mass_exhaustive(points: &[(u64, Q)], level: u32) -> (Q, Vec<u64>) {
    let n = points.len();
    let mut best = Q::zero();
    let mut best_subset = Vec::new();
    for mask in 1u32..(1 << n) {
        let elems: Vec<u64> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| points[i].0)
            .collect();
        if !is_schreier_raw(&elems, level) {
            continue;
        }
        let mass: Q = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| points[i].1.clone())
            .sum();
        if mass > best {
            best = mass;
            best_subset = elems;
        }
    }
    (best, best_subset)
}

/// Size guard for generated combinations.
#[derive(Debug, Clone, Copy)]
pub struct SccLimits {
    pub max_size: usize,
}

impl Default for SccLimits {
    fn default() -> Self {
        SccLimits { max_size: 300_000 }
    }
}

/// Build an `(n, ε)` basic combination inside the range of `m` by repeated
/// averages: level-0 atoms are singletons of weight 1; a level-(j+1)
/// combination averages `k` maximal level-j blocks, where `k` starts at the
/// smallest plausible count and both `k` and the starting point grow until
/// the exact `S_{n-1}` mass condition holds.
pub fn make_basic_scc<I>(m: I, level: u32, epsilon: &Q, limits: SccLimits) -> Result<SccWitness>
where
    I: IntoIterator<Item = u64>,
{
    if !epsilon.is_positive() {
        return Err(Error::Domain(format!(
            "epsilon must be positive, got {}",
            fmt_q(epsilon)
        )));
    }
    let mut gen = Monotone::new(m.into_iter());
    if level == 0 {
        let i = gen.next_at_least(1)?;
        return Ok(SccWitness {
            level,
            epsilon: epsilon.clone(),
            coeffs: vec![Q::one()],
            kind: SccKind::Basic { indices: vec![i] },
        });
    }

    // smallest k with 1/k < ε
    let mut k = {
        let mut k = 1u64;
        while &Q::new(1.into(), k.into()) >= epsilon {
            k = k
                .checked_add(1)
                .ok_or_else(|| Error::ResourceLimit("epsilon too small".into()))?;
            if k as usize > limits.max_size {
                return Err(Error::ResourceLimit(format!(
                    "required cardinality 1/epsilon = {k} exceeds cap {}",
                    limits.max_size
                )));
            }
        }
        k
    };

    loop {
        // failed attempts burn index-source elements; later elements are
        // still inside range(M), which is all the contract asks
        match build_level(&mut gen, level, k, limits.max_size) {
            Ok(points) => {
                let indices: Vec<u64> = points.iter().map(|(i, _)| *i).collect();
                let coeffs: Vec<Q> = points.iter().map(|(_, c)| c.clone()).collect();
                let w = SccWitness {
                    level,
                    epsilon: epsilon.clone(),
                    coeffs,
                    kind: SccKind::Basic { indices },
                };
                let (mass, _) = max_schreier_mass(&points, level - 1)?;
                if &mass < epsilon && validate_scc(&w).is_empty() {
                    return Ok(w);
                }
                // grow the block count and push the start to the right
                k = k + k.div_ceil(4).max(1);
                if k as usize > limits.max_size {
                    return Err(Error::ResourceLimit(format!(
                        "mass condition unreachable below cardinality cap {}",
                        limits.max_size
                    )));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// One `k`-block repeated average at `level`, all blocks maximal.
fn build_level(
    gen: &mut Monotone<impl Iterator<Item = u64>>,
    level: u32,
    k: u64,
    max_size: usize,
) -> Result<Vec<(u64, Q)>> {
    if level == 1 {
        // uniform over k elements starting at value >= k
        let mut points = Vec::with_capacity(k as usize);
        if k as usize > max_size {
            return Err(Error::ResourceLimit(format!(
                "required cardinality {k} exceeds cap {max_size}"
            )));
        }
        let first = gen.next_at_least(k)?;
        let c = Q::new(1.into(), k.into());
        points.push((first, c.clone()));
        for _ in 1..k {
            points.push((gen.next_at_least(1)?, c.clone()));
        }
        return Ok(points);
    }
    // k maximal level-(level-1) blocks; the first must start at a value >= k
    // so the union stays in S_level.
    gen.peek_at_least(k)?;
    let mut points: Vec<(u64, Q)> = Vec::new();
    let share = Q::new(1.into(), k.into());
    for _ in 0..k {
        // a maximal level-(l-1) block starting at the current value v is the
        // v-block repeated average at that level
        let v = gen.peek_at_least(1)?;
        let sub = build_level(gen, level - 1, v, max_size)?;
        for (i, c) in sub {
            points.push((i, c * &share));
            if points.len() > max_size {
                return Err(Error::ResourceLimit(format!(
                    "combination exceeds cardinality cap {max_size}"
                )));
            }
        }
    }
    Ok(points)
}

/// Strictly-increasing source with peeking and fast-forward.
struct Monotone<I: Iterator<Item = u64>> {
    inner: I,
    peeked: Option<u64>,
    last: u64,
}

impl<I: Iterator<Item = u64>> Monotone<I> {
    fn new(inner: I) -> Self {
        Monotone {
            inner,
            peeked: None,
            last: 0,
        }
    }

    fn pull(&mut self) -> Result<u64> {
        if let Some(v) = self.peeked.take() {
            return Ok(v);
        }
        let v = self
            .inner
            .next()
            .ok_or_else(|| Error::ResourceLimit("index source exhausted".into()))?;
        if v <= self.last || v == 0 {
            return Err(Error::MalformedBlocks(
                "index source must be strictly increasing and positive".into(),
            ));
        }
        self.last = v;
        Ok(v)
    }

    fn next_at_least(&mut self, bound: u64) -> Result<u64> {
        loop {
            let v = self.pull()?;
            if v >= bound {
                return Ok(v);
            }
        }
    }

    fn peek_at_least(&mut self, bound: u64) -> Result<u64> {
        let v = self.next_at_least(bound)?;
        self.peeked = Some(v);
        Ok(v)
    }
}

/// Lift the basic construction to successive blocks: run it over the
/// min-supports and keep the blocks whose min-support was selected.
pub fn make_scc(blocks: &[FinVec], level: u32, epsilon: &Q, limits: SccLimits) -> Result<SccWitness> {
    for w in blocks.windows(2) {
        if !w[0].precedes(&w[1]) {
            return Err(Error::MalformedBlocks(
                "blocks must be strictly successive".into(),
            ));
        }
    }
    if blocks.iter().any(|b| b.is_zero()) {
        return Err(Error::MalformedBlocks("zero block".into()));
    }
    if level == 0 {
        let first = blocks
            .first()
            .ok_or_else(|| Error::ResourceLimit("need at least one block".into()))?;
        return Ok(SccWitness {
            level,
            epsilon: epsilon.clone(),
            coeffs: vec![Q::one()],
            kind: SccKind::General {
                blocks: vec![first.clone()],
            },
        });
    }
    let psis: Vec<u64> = blocks.iter().map(|b| b.min_supp().unwrap()).collect();
    let by_psi: BTreeMap<u64, usize> = psis.iter().enumerate().map(|(k, v)| (*v, k)).collect();
    let basic = make_basic_scc(psis.iter().cloned(), level, epsilon, limits).map_err(|e| {
        match e {
            Error::ResourceLimit(d) => Error::ResourceLimit(format!(
                "too few blocks for an ({level},{}) combination: {d}",
                fmt_q(epsilon)
            )),
            other => other,
        }
    })?;
    let SccKind::Basic { indices } = &basic.kind else {
        unreachable!()
    };
    let chosen: Vec<FinVec> = indices.iter().map(|i| blocks[by_psi[i]].clone()).collect();
    Ok(SccWitness {
        level,
        epsilon: basic.epsilon,
        coeffs: basic.coeffs,
        kind: SccKind::General { blocks: chosen },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn basic_level1() {
        let w = make_basic_scc(10u64.., 1, &q(1, 8), SccLimits::default()).unwrap();
        assert!(validate_scc(&w).is_empty());
        let SccKind::Basic { indices } = &w.kind else { panic!() };
        assert_eq!(indices.len(), 9);
        assert_eq!(indices[0], 10);
        assert!(w.coeffs.iter().all(|c| *c == q(1, 9)));
    }

    #[test]
    fn basic_level0() {
        let w = make_basic_scc(1u64.., 0, &qi(2), SccLimits::default()).unwrap();
        assert!(validate_scc(&w).is_empty());
        assert_eq!(w.coeffs, vec![qi(1)]);
    }

    #[test]
    fn basic_level2() {
        let w = make_basic_scc(100u64.., 2, &q(1, 10), SccLimits::default()).unwrap();
        assert!(validate_scc(&w).is_empty());
        let points: Vec<(u64, Q)> = w
            .psi()
            .into_iter()
            .zip(w.coeffs.iter().cloned())
            .collect();
        let (mass, _) = max_schreier_mass(&points, 1).unwrap();
        assert!(mass < q(1, 10), "mass {} too big", fmt_q(&mass));
    }

    #[test]
    fn basic_level2_small_eps() {
        let w = make_basic_scc(3u64.., 2, &q(2, 5), SccLimits::default()).unwrap();
        assert!(validate_scc(&w).is_empty());
        assert!(w.len() <= 120, "expected a desk-size instance, got {}", w.len());
    }

    #[test]
    fn planted_violations() {
        let mut w = make_basic_scc(10u64.., 1, &q(1, 8), SccLimits::default()).unwrap();
        w.coeffs[0] = q(1, 18); // mass 9/10-ish
        let v = validate_scc(&w);
        assert!(v.iter().any(|x| matches!(x, SccViolation::MassNotOne { .. })));

        // plant an S_0 (singleton) overweight: one coefficient >= eps
        let mut w2 = make_basic_scc(10u64.., 1, &q(1, 8), SccLimits::default()).unwrap();
        let n = w2.coeffs.len();
        w2.coeffs = vec![q(1, 2 * (n as i64 - 1)); n];
        w2.coeffs[0] = q(1, 2);
        let v2 = validate_scc(&w2);
        let sub = v2
            .iter()
            .find_map(|x| match x {
                SccViolation::SubSelectionMass { witness, .. } => Some(witness.clone()),
                _ => None,
            })
            .expect("sub-selection violation");
        assert_eq!(sub, vec![10]);
    }

    #[test]
    fn general_lifts_basic() {
        let blocks: Vec<FinVec> = (10..=40).map(FinVec::unit).collect();
        let w = make_scc(&blocks, 1, &q(1, 8), SccLimits::default()).unwrap();
        assert!(validate_scc(&w).is_empty());
        assert_eq!(w.len(), 9);

        let single = make_scc(&blocks[..1], 0, &qi(1), SccLimits::default()).unwrap();
        assert_eq!(single.coeffs, vec![qi(1)]);

        let few: Vec<FinVec> = (3..=6).map(FinVec::unit).collect();
        assert!(matches!(
            make_scc(&few, 1, &q(1, 100), SccLimits::default()),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn mass_checkers_agree_exhaustively() {
        // compare bucket/DP implementations against brute force on small data
        let points: Vec<(u64, Q)> = vec![
            (3, q(1, 4)),
            (5, q(1, 8)),
            (6, q(1, 8)),
            (9, q(3, 8)),
            (12, q(1, 8)),
        ];
        for level in [1u32, 2] {
            let (fast, subset) = max_schreier_mass(&points, level).unwrap();
            let (brute, _) = max_mass_exhaustive(&points, level);
            assert_eq!(fast, brute, "level {level}");
            assert!(is_schreier_raw(&subset, level));
            let claimed: Q = subset
                .iter()
                .map(|i| points.iter().find(|(j, _)| j == i).unwrap().1.clone())
                .sum();
            assert_eq!(claimed, fast);
        }
    }
}

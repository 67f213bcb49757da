//! The exact Tsirelson norm on finitely supported vectors, and the
//! block-domination estimate built on it.
//!
//! The norm is the least fixed point of
//! `‖x‖ = max(‖x‖_∞, sup (1/2) Σ ‖E_i x‖)` with the sup over S_1-admissible
//! successive intervals `E_1 < … < E_d`, `d <= min supp E_1`. On a finite
//! support the recursion is well founded once single-block families covering
//! the whole interval are discarded (they never attain the sup), so the norm
//! is computed by a top-down dynamic program memoized on contiguous
//! sub-intervals of the support, with ℓ1 pruning of hopeless family starts.

use std::collections::HashMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::finvec::FinVec;
use crate::rational::{q, Q};

/// Default exact-mode support cap; larger vectors belong to bound mode in the
/// norm engine.
pub const EXACT_MODE_DEFAULT: usize = 16;

struct Dp<'a> {
    vals: &'a [u64],
    coeffs: &'a [Q],
    /// suffix_l1[i] = Σ_{k >= i} |c_k|
    suffix_l1: Vec<Q>,
    t: HashMap<(usize, usize), Q>,
    fam: HashMap<(usize, usize, usize), Q>,
}

impl Dp<'_> {
    fn new<'a>(vals: &'a [u64], coeffs: &'a [Q]) -> Dp<'a> {
        let n = vals.len();
        let mut suffix_l1 = vec![Q::zero(); n + 1];
        for i in (0..n).rev() {
            suffix_l1[i] = &suffix_l1[i + 1] + coeffs[i].abs();
        }
        Dp {
            vals,
            coeffs,
            suffix_l1,
            t: HashMap::new(),
            fam: HashMap::new(),
        }
    }

    fn l1(&self, i: usize, j: usize) -> Q {
        &self.suffix_l1[i] - &self.suffix_l1[j + 1]
    }

    /// Norm of the restriction to positions `i..=j`.
    fn norm(&mut self, i: usize, j: usize) -> Q {
        if let Some(v) = self.t.get(&(i, j)) {
            return v.clone();
        }
        let mut best: Q = (i..=j).map(|k| self.coeffs[k].abs()).max().unwrap();
        for s in i..=j {
            // A family starting at s cannot beat what we have unless even its
            // ℓ1 ceiling does.
            if q(1, 2) * self.l1(s, j) <= best {
                continue;
            }
            let budget = usize::try_from(self.vals[s]).unwrap_or(usize::MAX);
            let budget = budget.min(j - s + 1);
            for end in s..=j {
                if s == i && end == j && budget >= 1 {
                    // the single whole-interval block is a fixed point of the
                    // recursion, never the sup
                    continue;
                }
                if budget == 0 {
                    break;
                }
                let head = self.norm(s, end);
                let tail = if end < j {
                    self.best_blocks(end + 1, j, budget - 1)
                } else {
                    Q::zero()
                };
                let cand = q(1, 2) * (head + tail);
                if cand > best {
                    best = cand;
                }
            }
        }
        self.t.insert((i, j), best.clone());
        best
    }

    /// Max of Σ‖block‖ over at most `left` successive blocks within `i..=j`,
    /// blocks free to start anywhere.
    fn best_blocks(&mut self, i: usize, j: usize, left: usize) -> Q {
        if left == 0 || i > j {
            return Q::zero();
        }
        if let Some(v) = self.fam.get(&(i, j, left)) {
            return v.clone();
        }
        // skipping position i
        let mut best = if i < j {
            self.best_blocks(i + 1, j, left)
        } else {
            Q::zero()
        };
        for end in i..=j {
            let head = self.norm(i, end);
            let tail = if end < j {
                self.best_blocks(end + 1, j, left - 1)
            } else {
                Q::zero()
            };
            let cand = head + tail;
            if cand > best {
                best = cand;
            }
        }
        self.fam.insert((i, j, left), best.clone());
        best
    }
}

/// Exact Tsirelson norm, guarded by the exact-mode support cap.
pub fn tsirelson_norm(x: &FinVec) -> Result<Q> {
    tsirelson_norm_capped(x, EXACT_MODE_DEFAULT)
}

pub fn tsirelson_norm_capped(x: &FinVec, cap: usize) -> Result<Q> {
    if x.is_zero() {
        return Ok(Q::zero());
    }
    if x.support_len() > cap {
        return Err(Error::ResourceLimit(format!(
            "tsirelson_norm: support {} exceeds exact-mode cap {cap}; use bound mode",
            x.support_len()
        )));
    }
    let vals: Vec<u64> = x.support().collect();
    let coeffs: Vec<Q> = x.iter().map(|(_, c)| c.clone()).collect();
    let mut dp = Dp::new(&vals, &coeffs);
    Ok(dp.norm(0, vals.len() - 1))
}

/// `6 ‖Σ c_k e_{φ(k)}‖_T` with `φ(k) = max supp` of the k-th block: a
/// certified upper bound for the norm of `Σ c_k x_k` when every block has
/// certified norm at most 1.
pub fn tsirelson_dominator(blocks: &[FinVec], coeffs: &[Q], cap: usize) -> Result<Q> {
    if blocks.len() != coeffs.len() {
        return Err(Error::Domain("blocks/coeffs length mismatch".into()));
    }
    let mut combo = FinVec::zero();
    let mut prev: Option<u64> = None;
    for (b, c) in blocks.iter().zip(coeffs) {
        let (min, max) = match (b.min_supp(), b.max_supp()) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::MalformedBlocks("zero block".into())),
        };
        if prev.is_some_and(|p| p >= min) {
            return Err(Error::MalformedBlocks(
                "blocks are not strictly successive".into(),
            ));
        }
        prev = Some(max);
        combo.add_to(max, c);
    }
    Ok(q(6, 1) * tsirelson_norm_capped(&combo, cap)?)
}

/// Independent oracle: bottom-up approximant iteration
/// `‖x‖_0 = ‖x‖_∞`, `‖x‖_{m+1} = max(‖x‖_m, sup (1/2) Σ ‖E_i x‖_m)`,
/// with admissible families enumerated exhaustively each round. Test-scale
/// only; kept separate from the dynamic program on purpose.
pub mod oracle {
    use super::*;

    const ORACLE_MAX: usize = 10;

    pub fn tsirelson_norm_oracle(x: &FinVec) -> Result<Q> {
        if x.is_zero() {
            return Ok(Q::zero());
        }
        let n = x.support_len();
        if n > ORACLE_MAX {
            return Err(Error::ResourceLimit(format!(
                "oracle supports at most {ORACLE_MAX} points, got {n}"
            )));
        }
        let vals: Vec<u64> = x.support().collect();
        let coeffs: Vec<Q> = x.iter().map(|(_, c)| c.clone()).collect();

        // norms[i][j]: current approximant on positions i..=j
        let mut norms = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                norms[i][j] = (i..=j).map(|k| coeffs[k].abs()).max().unwrap();
            }
        }
        loop {
            let mut changed = false;
            for i in 0..n {
                for j in i..n {
                    let mut families = Vec::new();
                    for s in i..=j {
                        let budget = usize::try_from(vals[s]).unwrap_or(usize::MAX);
                        enumerate_families(s, j, budget.min(j - s + 1), &mut Vec::new(), &mut families);
                    }
                    for fam in &families {
                        let sum: Q = fam.iter().map(|&(a, b)| norms[a][b].clone()).sum();
                        let cand = q(1, 2) * sum;
                        if cand > norms[i][j] {
                            norms[i][j] = cand;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return Ok(norms[0][n - 1].clone());
            }
        }
    }

    /// All families of at most `left` successive blocks, the first starting
    /// exactly at `start`.
    fn enumerate_families(
        start: usize,
        j: usize,
        left: usize,
        acc: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if left == 0 {
            return;
        }
        for end in start..=j {
            acc.push((start, end));
            out.push(acc.clone());
            for next in end + 1..=j {
                enumerate_families(next, j, left - 1, acc, out);
            }
            acc.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn vec_of(entries: &[(u64, Q)]) -> FinVec {
        FinVec::from_entries(entries.iter().cloned()).unwrap()
    }

    #[test]
    fn unit_vector() {
        assert_eq!(tsirelson_norm(&FinVec::unit(5)).unwrap(), qi(1));
    }

    #[test]
    fn three_consecutive() {
        let x = vec_of(&[(3, qi(1)), (4, qi(1)), (5, qi(1))]);
        assert_eq!(tsirelson_norm(&x).unwrap(), q(3, 2));
    }

    #[test]
    fn early_support_is_linf() {
        // families through index 1 admit one block only
        let x = vec_of(&[(1, qi(1)), (2, qi(1)), (3, qi(1))]);
        assert_eq!(tsirelson_norm(&x).unwrap(), qi(1));
    }

    #[test]
    fn uniform_scc_case() {
        let x = FinVec::from_entries((12..=23).map(|i| (i, q(1, 12)))).unwrap();
        assert_eq!(tsirelson_norm(&x).unwrap(), q(1, 2));
    }

    #[test]
    fn dominator_examples() {
        let blocks = vec![FinVec::unit(4)];
        assert_eq!(
            tsirelson_dominator(&blocks, &[qi(1)], EXACT_MODE_DEFAULT).unwrap(),
            qi(6)
        );
        let blocks = vec![vec_of(&[(3, qi(1)), (4, qi(1))]), FinVec::unit(9)];
        let v = tsirelson_dominator(&blocks, &[q(1, 2), q(1, 2)], EXACT_MODE_DEFAULT).unwrap();
        assert_eq!(v, qi(3));
        assert!(matches!(
            tsirelson_dominator(&[FinVec::unit(9), FinVec::unit(4)], &[qi(1), qi(1)], 16),
            Err(Error::MalformedBlocks(_))
        ));
    }

    #[test]
    fn matches_oracle_small() {
        let cases = [
            vec![(2, qi(1)), (3, qi(-1)), (5, q(1, 2))],
            vec![(3, q(1, 2)), (4, qi(1)), (5, q(-1, 2)), (6, qi(1)), (7, qi(1))],
            vec![(1, qi(1)), (2, q(1, 2)), (4, qi(-1)), (8, qi(1))],
        ];
        for entries in cases {
            let x = vec_of(&entries);
            assert_eq!(
                tsirelson_norm(&x).unwrap(),
                oracle::tsirelson_norm_oracle(&x).unwrap(),
                "mismatch on {entries:?}"
            );
        }
    }

    #[test]
    fn resource_cap() {
        let x = FinVec::from_entries((1..=20).map(|i| (i, qi(1)))).unwrap();
        assert!(matches!(tsirelson_norm(&x), Err(Error::ResourceLimit(_))));
        assert!(tsirelson_norm_capped(&x, 20).is_ok());
    }
}

//! A small dense exact-rational simplex: maximize `c·x` over `Ax <= b` with
//! free variables, all arithmetic in `Q`. Bland's rule keeps it finite.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Q;

/// `rows`: pairs `(a, b)` meaning `a · x <= b` (every `b` must be >= 0 so the
/// slack basis is feasible); `objective`: the `c` of `max c·x`.
pub struct Lp {
    pub num_vars: usize,
    pub rows: Vec<(Vec<Q>, Q)>,
    pub objective: Vec<Q>,
}

pub struct LpSolution {
    pub value: Q,
    pub point: Vec<Q>,
}

/// Primal simplex over the split `x = u - w`, `u, w >= 0`.
pub fn maximize(lp: &Lp) -> Result<LpSolution> {
    let n = lp.num_vars;
    let m = lp.rows.len();
    if lp.objective.len() != n {
        return Err(Error::Domain("objective length mismatch".into()));
    }
    for (a, b) in &lp.rows {
        if a.len() != n {
            return Err(Error::Domain("row length mismatch".into()));
        }
        if b.is_negative() {
            return Err(Error::Domain("rhs must be nonnegative".into()));
        }
    }
    let cols = 2 * n + m; // u, w, slacks
    let mut tab: Vec<Vec<Q>> = Vec::with_capacity(m);
    for (i, (a, b)) in lp.rows.iter().enumerate() {
        let mut row = vec![Q::zero(); cols + 1];
        for (j, v) in a.iter().enumerate() {
            row[j] = v.clone();
            row[n + j] = -v.clone();
        }
        row[2 * n + i] = Q::from_integer(1.into());
        row[cols] = b.clone();
        tab.push(row);
    }
    // reduced-cost row, starts at -c over the structural columns
    let mut zrow = vec![Q::zero(); cols + 1];
    for (j, v) in lp.objective.iter().enumerate() {
        zrow[j] = -v.clone();
        zrow[n + j] = v.clone();
    }
    let mut basis: Vec<usize> = (2 * n..2 * n + m).collect();

    let max_pivots = 50_000usize;
    for _ in 0..max_pivots {
        // Bland: smallest column with negative reduced cost
        let Some(enter) = (0..cols).find(|&j| zrow[j].is_negative()) else {
            let mut point = vec![Q::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    point[bv] += tab[i][cols].clone();
                } else if bv < 2 * n {
                    point[bv - n] -= tab[i][cols].clone();
                }
            }
            return Ok(LpSolution {
                value: zrow[cols].clone(),
                point,
            });
        };
        // ratio test, Bland tie-break on basis variable index
        let mut leave: Option<(usize, Q)> = None;
        for i in 0..m {
            if tab[i][enter].is_positive() {
                let ratio = &tab[i][cols] / &tab[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((li, _)) = leave else {
            return Err(Error::Domain("unbounded linear program".into()));
        };
        pivot(&mut tab, &mut zrow, li, enter, cols);
        basis[li] = enter;
    }
    Err(Error::ResourceLimit("simplex pivot budget exhausted".into()))
}

fn pivot(tab: &mut [Vec<Q>], zrow: &mut [Q], li: usize, enter: usize, cols: usize) {
    let p = tab[li][enter].clone();
    for v in tab[li].iter_mut() {
        *v /= &p;
    }
    for i in 0..tab.len() {
        if i == li {
            continue;
        }
        let f = tab[i][enter].clone();
        if f.is_zero() {
            continue;
        }
        for j in 0..=cols {
            let delta = &f * &tab[li][j];
            tab[i][j] -= delta;
        }
    }
    let f = zrow[enter].clone();
    if !f.is_zero() {
        for j in 0..=cols {
            let delta = &f * &tab[li][j];
            zrow[j] -= delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn box_lp() {
        // max x + y over |x| <= 1, |y| <= 1
        let lp = Lp {
            num_vars: 2,
            rows: vec![
                (vec![qi(1), qi(0)], qi(1)),
                (vec![qi(-1), qi(0)], qi(1)),
                (vec![qi(0), qi(1)], qi(1)),
                (vec![qi(0), qi(-1)], qi(1)),
            ],
            objective: vec![qi(1), qi(1)],
        };
        let sol = maximize(&lp).unwrap();
        assert_eq!(sol.value, qi(2));
        assert_eq!(sol.point, vec![qi(1), qi(1)]);
    }

    #[test]
    fn negative_direction() {
        // max -x + y/2 over x >= -3 (i.e. -x <= 3), x <= 1, |y| <= 2
        let lp = Lp {
            num_vars: 2,
            rows: vec![
                (vec![qi(-1), qi(0)], qi(3)),
                (vec![qi(1), qi(0)], qi(1)),
                (vec![qi(0), qi(1)], qi(2)),
                (vec![qi(0), qi(-1)], qi(2)),
            ],
            objective: vec![qi(-1), q(1, 2)],
        };
        let sol = maximize(&lp).unwrap();
        assert_eq!(sol.value, qi(4));
        assert_eq!(sol.point, vec![qi(-3), qi(2)]);
    }

    #[test]
    fn degenerate_is_fine() {
        // max x over x <= 0 twice
        let lp = Lp {
            num_vars: 1,
            rows: vec![(vec![qi(1)], qi(0)), (vec![qi(1)], qi(0))],
            objective: vec![qi(1)],
        };
        assert_eq!(maximize(&lp).unwrap().value, qi(0));
    }

    #[test]
    fn unbounded_detected() {
        let lp = Lp {
            num_vars: 1,
            rows: vec![(vec![qi(-1)], qi(1))],
            objective: vec![qi(1)],
        };
        assert!(maximize(&lp).is_err());
    }
}

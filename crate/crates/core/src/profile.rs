//! Parameter profiles: the lacunary sequence `L_0` with its partition into
//! `L_1, L_2, L_3`, the weight-to-exponent map, and the magnitude thresholds
//! used by the constructions.
//!
//! Two modes exist. `strict` realizes the source constraints verbatim:
//! `l_1 = 11`, `l_{k+1} = 2^{2 l_k} + 1`, a functional of weight `n` acts
//! with scalar `1/2^n` under `S_n`-admissibility, and the exact-vector
//! thresholds are `8C·2^{2n}` and `1/(32C·2^{3n})`. Those magnitudes put
//! every honest construction far beyond reach, so the `desk` mode scales
//! them: `L_0` starts at 3 and doubles, and a weight `n` acts through the
//! capped exponent `lambda(n) = min(n, level_cap)` (default cap 1) in its
//! scalar, its admissibility level, and the combination level of vectors
//! built for it. Weights themselves stay honest: σ-chains, `L_1/L_2`
//! membership and the weight-gap inequalities are checked on genuine
//! values, and every witness records the profile it was built under.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::rational::{half_pow, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Strict,
    Desk,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Strict => write!(f, "strict"),
            Mode::Desk => write!(f, "desk"),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "desk" => Ok(Mode::Desk),
            other => Err(Error::Parse(format!("unknown profile mode `{other}`"))),
        }
    }
}

/// Which third of `L_0` an element belongs to (1-based index mod 3).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LClass {
    L1,
    L2,
    L3,
}

#[derive(Debug, Clone, Default)]
pub struct ProfileOverrides {
    pub l1_start: Option<u64>,
    pub level_cap: Option<u32>,
    pub vfg_div: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct ParameterProfile {
    mode: Mode,
    l1_start: u64,
    /// Effective-exponent cap; `None` means uncapped (strict).
    level_cap: Option<u32>,
    /// Clause 4/5 cardinality rule: `mult · #F <= min supp`.
    pair_card_mult: u64,
    /// Desk very-fast-growing divisor: sizes must exceed `max supp / vfg_div`.
    vfg_div: u64,
    /// Materialized prefix of `L_0`. Strict growth leaves representable
    /// territory after three elements; desk prefixes are generated deep.
    prefix: Vec<BigUint>,
}

/// Growth floor for the coding function at a given prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SigmaFloor {
    Value(u64),
    /// `2^exponent`, for strict floors too large to materialize.
    Pow2(BigUint),
}

impl fmt::Display for SigmaFloor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigmaFloor::Value(v) => write!(f, "{v}"),
            SigmaFloor::Pow2(e) => write!(f, "2^{e}"),
        }
    }
}

impl SigmaFloor {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(e) = s.strip_prefix("2^") {
            let e: BigUint = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad floor exponent `{e}`")))?;
            Ok(SigmaFloor::Pow2(e))
        } else {
            let v: u64 = s
                .parse()
                .map_err(|_| Error::Parse(format!("bad floor `{s}`")))?;
            Ok(SigmaFloor::Value(v))
        }
    }

    /// Is the candidate strictly above the floor?
    pub fn below(&self, candidate: u64) -> bool {
        match self {
            SigmaFloor::Value(v) => candidate > *v,
            SigmaFloor::Pow2(e) => match e.to_u64() {
                Some(e) if e < 64 => candidate > (1u64 << e),
                _ => false,
            },
        }
    }
}

pub const STRICT_L1_DEFAULT: u64 = 11;
pub const DESK_L1_DEFAULT: u64 = 3;
pub const DESK_LEVEL_CAP_DEFAULT: u32 = 1;
pub const DESK_VFG_DIV_DEFAULT: u64 = 32;

const STRICT_PREFIX_LEN: usize = 3;
const DESK_PREFIX_LEN: usize = 60;

pub fn make_profile(mode: Mode, overrides: ProfileOverrides) -> Result<ParameterProfile> {
    let l1_start = overrides.l1_start.unwrap_or(match mode {
        Mode::Strict => STRICT_L1_DEFAULT,
        Mode::Desk => DESK_L1_DEFAULT,
    });
    match mode {
        Mode::Strict => {
            if l1_start <= 9 {
                return Err(Error::Domain(format!(
                    "strict mode requires l_1 > 9, got {l1_start}"
                )));
            }
            if overrides.level_cap.is_some() {
                return Err(Error::Domain(
                    "strict mode does not admit an exponent cap".into(),
                ));
            }
        }
        Mode::Desk => {
            if l1_start < 2 {
                return Err(Error::Domain(format!(
                    "desk mode requires l_1 >= 2, got {l1_start}"
                )));
            }
        }
    }
    let level_cap = match mode {
        Mode::Strict => None,
        Mode::Desk => Some(overrides.level_cap.unwrap_or(DESK_LEVEL_CAP_DEFAULT)),
    };
    if level_cap == Some(0) {
        return Err(Error::Domain("level cap must be >= 1".into()));
    }
    let vfg_div = overrides.vfg_div.unwrap_or(DESK_VFG_DIV_DEFAULT);
    if vfg_div == 0 {
        return Err(Error::Domain("vfg divisor must be >= 1".into()));
    }
    let mut profile = ParameterProfile {
        mode,
        l1_start,
        level_cap,
        pair_card_mult: 2,
        vfg_div,
        prefix: Vec::new(),
    };
    profile.prefix = profile.generate_prefix();
    if !profile.lacunarity_ok() {
        return Err(Error::Domain(
            "lacunarity check failed on the generated prefix".into(),
        ));
    }
    if mode == Mode::Strict && !profile.strict_series_ok() {
        return Err(Error::Domain(
            "strict mode requires the sum of 2^-l_k to stay below 1/1000".into(),
        ));
    }
    Ok(profile)
}

impl ParameterProfile {
    pub fn strict() -> ParameterProfile {
        make_profile(Mode::Strict, ProfileOverrides::default()).unwrap()
    }

    pub fn desk() -> ParameterProfile {
        make_profile(Mode::Desk, ProfileOverrides::default()).unwrap()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Stable identifier binding persisted state to its profile.
    pub fn id(&self) -> String {
        match self.level_cap {
            None => format!("{}(l1={})", self.mode, self.l1_start),
            Some(cap) => format!(
                "{}(l1={},cap={},vfg={})",
                self.mode, self.l1_start, cap, self.vfg_div
            ),
        }
    }

    fn generate_prefix(&self) -> Vec<BigUint> {
        let mut out = vec![BigUint::from(self.l1_start)];
        match self.mode {
            Mode::Strict => {
                // l_{k+1} = 2^{2 l_k} + 1
                for _ in 1..STRICT_PREFIX_LEN {
                    let last = out.last().unwrap();
                    let Some(exp) = (last * 2u32).to_usize().filter(|e| *e <= 1 << 24) else {
                        break;
                    };
                    out.push((BigUint::one() << exp) + BigUint::one());
                }
            }
            Mode::Desk => {
                for _ in 1..DESK_PREFIX_LEN {
                    let next = out.last().unwrap() * 2u32;
                    out.push(next);
                }
            }
        }
        out
    }

    /// Materialized prefix of `L_0`.
    pub fn l0_prefix(&self) -> &[BigUint] {
        &self.prefix
    }

    pub fn l_class(k: usize) -> LClass {
        match (k + 1) % 3 {
            1 => LClass::L1,
            2 => LClass::L2,
            _ => LClass::L3,
        }
    }

    fn class_of(&self, w: u64) -> Option<LClass> {
        let w = BigUint::from(w);
        self.prefix.iter().position(|v| *v == w).map(Self::l_class)
    }

    pub fn in_l1(&self, w: u64) -> bool {
        self.class_of(w) == Some(LClass::L1)
    }

    pub fn in_l2(&self, w: u64) -> bool {
        self.class_of(w) == Some(LClass::L2)
    }

    pub fn in_l(&self, w: u64) -> bool {
        matches!(self.class_of(w), Some(LClass::L1) | Some(LClass::L2))
    }

    /// The k-th element of `L_1` (0-based), if materialized and machine-sized.
    pub fn l1_element(&self, k: usize) -> Result<u64> {
        self.prefix
            .get(3 * k)
            .and_then(|v| v.to_u64())
            .ok_or_else(|| {
                Error::ResourceLimit(format!("L1 element {k} is beyond representable range"))
            })
    }

    /// Smallest unused element of `L_2` strictly above the floor.
    pub fn l2_next_above(
        &self,
        floor: &SigmaFloor,
        used: &std::collections::BTreeSet<u64>,
    ) -> Result<u64> {
        for (k, v) in self.prefix.iter().enumerate() {
            if Self::l_class(k) != LClass::L2 {
                continue;
            }
            let Some(v) = v.to_u64() else { break };
            if floor.below(v) && !used.contains(&v) {
                return Ok(v);
            }
        }
        Err(Error::ResourceLimit(format!(
            "no representable L2 element above floor {floor}"
        )))
    }

    /// Effective exponent of a weight: a type I functional of weight `n`
    /// acts with scalar `1/2^{lambda(n)}` at admissibility level `lambda(n)`.
    pub fn lambda(&self, weight: u64) -> u32 {
        let capped = match self.level_cap {
            None => weight,
            Some(cap) => weight.min(cap as u64),
        };
        u32::try_from(capped).unwrap_or(u32::MAX)
    }

    pub fn scalar(&self, weight: u64) -> Q {
        half_pow(self.lambda(weight) as u64)
    }

    /// Very fast growing: does `size` exceed the growth floor set by the
    /// predecessor's max support?
    pub fn vfg_ok(&self, size: &BigUint, prev_max_supp: u64) -> bool {
        match self.mode {
            Mode::Strict => biguint_gt_pow2(size, prev_max_supp),
            Mode::Desk => *size > BigUint::from(prev_max_supp.div_ceil(self.vfg_div)),
        }
    }

    /// Growth floor in human-readable form, for violation messages.
    pub fn vfg_floor_text(&self, prev_max_supp: u64) -> String {
        match self.mode {
            Mode::Strict => format!("2^{prev_max_supp}"),
            Mode::Desk => format!("{}", prev_max_supp.div_ceil(self.vfg_div)),
        }
    }

    /// Clause 4/5 cardinality rule, `mult · #F <= min supp`.
    pub fn pair_cardinality_ok(&self, count: usize, min_supp: u64) -> bool {
        (count as u64)
            .checked_mul(self.pair_card_mult)
            .is_some_and(|v| v <= min_supp)
    }

    pub fn pair_card_mult(&self) -> u64 {
        self.pair_card_mult
    }

    /// Coding-function growth floor over the last functional of a prefix.
    /// Strict uses the conservative reading `2^{max supp · (1 + max coeff
    /// denominator)}`; desk uses `2 · max supp`.
    pub fn sigma_floor(&self, max_supp: u64, max_coeff_den: &BigUint) -> SigmaFloor {
        match self.mode {
            Mode::Strict => {
                let exp = BigUint::from(max_supp) * (max_coeff_den + BigUint::one());
                SigmaFloor::Pow2(exp)
            }
            Mode::Desk => SigmaFloor::Value(max_supp.saturating_mul(2)),
        }
    }

    /// Exact-vector support floor, `8C·2^{2λ(n)}` (strict: `λ(n) = n`).
    pub fn support_floor(&self, c: &Q, weight: u64) -> Result<u64> {
        let lam = self.lambda(weight) as u64;
        let exp = 2u64
            .checked_mul(lam)
            .filter(|e| *e < 48)
            .ok_or_else(|| Error::ResourceLimit(format!("support floor 8C*2^{} overflows", 2 * lam)))?;
        let floor = Q::from_integer(8.into()) * c * Q::from_integer((1i64 << exp).into());
        floor
            .ceil()
            .to_integer()
            .to_u64()
            .ok_or_else(|| Error::ResourceLimit("support floor exceeds u64".into()))
    }

    /// Exact-vector epsilon cap: strict `1/(32C·2^{3n})`, desk
    /// `1/(16·ceil(C/5)·2^{λ(n)})` (which keeps `12·2^λ·ε < 1`, the margin
    /// the `7C` norm bound needs).
    pub fn eps_cap(&self, c: &Q, weight: u64) -> Result<Q> {
        match self.mode {
            Mode::Strict => {
                let exp = 3u64
                    .checked_mul(weight)
                    .filter(|e| *e <= 1 << 14)
                    .ok_or_else(|| {
                        Error::ResourceLimit(format!("epsilon cap 2^-{} unrepresentable", 3 * weight))
                    })?;
                Ok(half_pow(exp) / (Q::from_integer(32.into()) * c))
            }
            Mode::Desk => {
                let five = Q::from_integer(5.into());
                let c_scale = (c / five).ceil().to_integer().max(1.into());
                Ok(half_pow(self.lambda(weight) as u64)
                    / (Q::from_integer(16.into()) * Q::from_integer(c_scale)))
            }
        }
    }

    /// Least admissible first RIS index for an exact vector: `> 2^{2λ(n)}`.
    pub fn exact_ris_start(&self, weight: u64) -> Result<u64> {
        let lam = self.lambda(weight) as u64;
        let exp = 2u64
            .checked_mul(lam)
            .filter(|e| *e < 62)
            .ok_or_else(|| Error::ResourceLimit(format!("RIS start 2^{} overflows", 2 * lam)))?;
        Ok((1u64 << exp) + 1)
    }

    /// Combination level used when building for a weight.
    pub fn scc_level(&self, weight: u64) -> u32 {
        self.lambda(weight)
    }

    /// `#L ∩ window(n) <= 1` for every n, with the strict window
    /// `[n, 2^{2n}]` and the desk window `[n, 2n)`; windows of `L_3`
    /// elements must meet no `L` element at all. Verified on the prefix via
    /// the gap structure of consecutive `L` elements.
    fn lacunarity_ok(&self) -> bool {
        let l: Vec<&BigUint> = self
            .prefix
            .iter()
            .enumerate()
            .filter(|(k, _)| Self::l_class(*k) != LClass::L3)
            .map(|(_, v)| v)
            .collect();
        for pair in l.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let clear = match self.mode {
                Mode::Strict => biguint_gt_pow2_big(b, &(a * 2u32)),
                Mode::Desk => *b >= a * 2u32,
            };
            if !clear {
                return false;
            }
        }
        for (k, v) in self.prefix.iter().enumerate() {
            if Self::l_class(k) != LClass::L3 {
                continue;
            }
            for w in &l {
                let inside = match self.mode {
                    Mode::Strict => *w >= v && !biguint_gt_pow2_big(w, &(v * 2u32)),
                    Mode::Desk => *w >= v && **w < v * 2u32,
                };
                if inside {
                    return false;
                }
            }
        }
        true
    }

    /// `Σ 2^{-l_k} < 1/1000`, certified by the head term plus a doubling
    /// tail bound: the sum is below `2^{-l_1} + 2^{-(l_2 - 1)}`.
    fn strict_series_ok(&self) -> bool {
        let l1 = self.l1_start;
        let l2 = self
            .prefix
            .get(1)
            .and_then(|v| v.to_u64())
            .unwrap_or(64)
            .min(64);
        let bound = half_pow(l1) + half_pow(l2 - 1);
        bound < Q::new(1.into(), 1000.into())
    }
}

/// `v > 2^exp`?
pub fn biguint_gt_pow2(v: &BigUint, exp: u64) -> bool {
    let bits = v.bits();
    if bits > exp + 1 {
        return true;
    }
    if bits < exp + 1 {
        return false;
    }
    // bits == exp + 1 means 2^exp <= v < 2^{exp+1}
    v != &(BigUint::one() << usize::try_from(exp).unwrap_or(usize::MAX))
}

fn biguint_gt_pow2_big(v: &BigUint, exp: &BigUint) -> bool {
    match exp.to_u64() {
        Some(e) => biguint_gt_pow2(v, e),
        // v would need more than u64::MAX bits
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    #[test]
    fn strict_defaults() {
        let p = ParameterProfile::strict();
        let prefix = p.l0_prefix();
        assert_eq!(prefix[0], BigUint::from(11u32));
        assert_eq!(prefix[1], (BigUint::one() << 22) + BigUint::one());
        assert!(prefix[2].bits() > 1 << 22);
        assert!(p.in_l1(11));
        assert!(p.in_l2(4194305));
        assert_eq!(p.lambda(11), 11);
        assert_eq!(p.scalar(2), q(1, 4));
    }

    #[test]
    fn strict_rejects_small_l1() {
        assert!(matches!(
            make_profile(
                Mode::Strict,
                ProfileOverrides {
                    l1_start: Some(9),
                    ..Default::default()
                }
            ),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn desk_defaults() {
        let p = ParameterProfile::desk();
        assert!(p.in_l1(3));
        assert!(p.in_l2(6));
        assert!(!p.in_l(12)); // L3
        assert!(p.in_l1(24));
        assert_eq!(p.lambda(3), 1);
        assert_eq!(p.lambda(1), 1);
        assert_eq!(p.scalar(24576), q(1, 2));
        assert_eq!(p.l1_element(0).unwrap(), 3);
        assert_eq!(p.l1_element(1).unwrap(), 24);
    }

    #[test]
    fn sigma_floors() {
        let d = ParameterProfile::desk();
        assert_eq!(
            d.sigma_floor(100, &BigUint::from(4u32)),
            SigmaFloor::Value(200)
        );
        let s = ParameterProfile::strict();
        let f = s.sigma_floor(3, &BigUint::from(1u32));
        assert_eq!(f, SigmaFloor::Pow2(BigUint::from(6u32)));
        assert!(f.below(65));
        assert!(!f.below(64));
    }

    #[test]
    fn l2_allocation() {
        let p = ParameterProfile::desk();
        let mut used = std::collections::BTreeSet::new();
        let v = p.l2_next_above(&SigmaFloor::Value(100), &used).unwrap();
        assert_eq!(v, 384);
        used.insert(384);
        assert_eq!(
            p.l2_next_above(&SigmaFloor::Value(100), &used).unwrap(),
            3072
        );
    }

    #[test]
    fn desk_thresholds() {
        let p = ParameterProfile::desk();
        assert_eq!(p.support_floor(&qi(5), 3).unwrap(), 160);
        assert_eq!(p.eps_cap(&qi(5), 3).unwrap(), q(1, 32));
        assert_eq!(p.exact_ris_start(3).unwrap(), 5);
        assert!(p.vfg_ok(&BigUint::from(6u32), 160));
        assert!(!p.vfg_ok(&BigUint::from(5u32), 160));
    }

    #[test]
    fn strict_thresholds_blow_up() {
        let p = ParameterProfile::strict();
        assert_eq!(p.support_floor(&qi(1), 11).unwrap(), 8 * (1 << 22));
        assert!(p.eps_cap(&qi(1), 11).unwrap() < q(1, 1 << 30));
        assert!(p.vfg_ok(&BigUint::from(5u32), 2));
        assert!(!p.vfg_ok(&BigUint::from(4u32), 2));
    }

    #[test]
    fn strict_series_bound() {
        // 2^-11 + 2^-22 < 1/1000 certifies the series condition
        let p = ParameterProfile::strict();
        assert!(p.strict_series_ok());
    }
}

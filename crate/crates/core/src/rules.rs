//! The fixed rule catalogue and its purely arithmetic members.
//!
//! Rules that need recursive classification (recursive subtuples, descent,
//! transfer) live in [`crate::engine`]; their side conditions are shared with
//! certificate replay through the helpers here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::Rational;
use crate::tuple::ExponentTuple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Status {
    NonRigid,
    Rigid,
    StablyRigid,
    Unknown,
}

impl Status {
    pub const ALL: [Status; 4] = [
        Status::NonRigid,
        Status::Rigid,
        Status::StablyRigid,
        Status::Unknown,
    ];

    /// Rigid or stably rigid.
    pub fn is_rigid(self) -> bool {
        matches!(self, Status::Rigid | Status::StablyRigid)
    }

    pub fn is_decided(self) -> bool {
        self != Status::Unknown
    }

    /// True when the two statuses cannot both hold for one ring.
    pub fn contradicts(self, other: Status) -> bool {
        (self.is_rigid() && other == Status::NonRigid)
            || (other.is_rigid() && self == Status::NonRigid)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::NonRigid => "NON_RIGID",
            Status::Rigid => "RIGID",
            Status::StablyRigid => "STABLY_RIGID",
            Status::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown status `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    NotInTn,
    N3T3,
    N3Stable,
    LowSum,
    N4Coprime,
    N4ThreeThrees,
    N4EvenGcd,
    CotypeGe2N4,
    EqualExponents,
    ISum,
    CotypeGeNMinus2,
    RecursiveSubtuples,
    Descend,
    Transfer,
}

impl RuleId {
    pub const ALL: [RuleId; 14] = [
        RuleId::NotInTn,
        RuleId::N3T3,
        RuleId::N3Stable,
        RuleId::LowSum,
        RuleId::N4Coprime,
        RuleId::N4ThreeThrees,
        RuleId::N4EvenGcd,
        RuleId::CotypeGe2N4,
        RuleId::EqualExponents,
        RuleId::ISum,
        RuleId::CotypeGeNMinus2,
        RuleId::RecursiveSubtuples,
        RuleId::Descend,
        RuleId::Transfer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::NotInTn => "NOT_IN_TN",
            RuleId::N3T3 => "N3_T3",
            RuleId::N3Stable => "N3_STABLE",
            RuleId::LowSum => "LOW_SUM",
            RuleId::N4Coprime => "N4_COPRIME",
            RuleId::N4ThreeThrees => "N4_THREE_THREES",
            RuleId::N4EvenGcd => "N4_EVEN_GCD",
            RuleId::CotypeGe2N4 => "COTYPE_GE_2_N4",
            RuleId::EqualExponents => "EQUAL_EXPONENTS",
            RuleId::ISum => "I_SUM",
            RuleId::CotypeGeNMinus2 => "COTYPE_GE_NMINUS2",
            RuleId::RecursiveSubtuples => "RECURSIVE_SUBTUPLES",
            RuleId::Descend => "DESCEND",
            RuleId::Transfer => "TRANSFER",
        }
    }

    /// The four-variable collection cases (b)-(e).
    pub fn is_collection_case(self) -> bool {
        matches!(
            self,
            RuleId::N4Coprime | RuleId::N4ThreeThrees | RuleId::N4EvenGcd | RuleId::CotypeGe2N4
        )
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(Status);
string_serde!(RuleId);

/// Outcome of a non-recursive rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub rule: RuleId,
    pub status: Status,
    /// 0-based `perm` with `working[k] = tuple[perm[k]]`; identity unless the
    /// rule needed to reorder coordinates.
    pub permutation: Vec<usize>,
}

impl Firing {
    fn plain(rule: RuleId, status: Status, n: usize) -> Self {
        Firing {
            rule,
            status,
            permutation: (0..n).collect(),
        }
    }
}

/// `1/(n-2)` as an exact rational; `n` must be at least 3.
pub fn threshold(n: usize) -> Rational {
    assert!(n >= 3);
    Rational::new(1.into(), ((n - 2) as u64).into())
}

pub fn rule_not_in_tn(s: &ExponentTuple) -> Option<Firing> {
    (!s.in_tn()).then(|| Firing::plain(RuleId::NotInTn, Status::NonRigid, s.len()))
}

/// Three variables are fully decided: outside `T_3` non-rigid, inside rigid,
/// and stably rigid once the reciprocal sum is at most 1.
pub fn rule_n3(s: &ExponentTuple) -> Option<Firing> {
    if s.len() != 3 {
        return None;
    }
    if !s.in_tn() {
        return Some(Firing::plain(RuleId::NotInTn, Status::NonRigid, 3));
    }
    if n3_stable_holds(s) {
        Some(Firing::plain(RuleId::N3Stable, Status::StablyRigid, 3))
    } else {
        Some(Firing::plain(RuleId::N3T3, Status::Rigid, 3))
    }
}

pub(crate) fn n3_stable_holds(s: &ExponentTuple) -> bool {
    s.len() == 3 && s.full_reciprocal_sum() <= Rational::from_integer(1.into())
}

pub fn low_sum_holds(s: &ExponentTuple) -> bool {
    s.len() >= 3 && s.full_reciprocal_sum() <= threshold(s.len())
}

pub fn rule_low_sum(s: &ExponentTuple) -> Option<Firing> {
    low_sum_holds(s).then(|| Firing::plain(RuleId::LowSum, Status::StablyRigid, s.len()))
}

/// Side condition of one collection case on the already-permuted tuple
/// `(a, b, c, d)`. Membership in `T_4` is checked separately.
pub fn collection_case_holds(case: RuleId, w: &ExponentTuple) -> bool {
    let [a, b, c, d] = match w.entries() {
        &[a, b, c, d] => [a, b, c, d],
        _ => return false,
    };
    use num_integer::Integer;
    match case {
        // gcd(abc, d) = 1, tested factor by factor
        RuleId::N4Coprime => a.gcd(&d) == 1 && b.gcd(&d) == 1 && c.gcd(&d) == 1,
        RuleId::N4ThreeThrees => a == 3 && b == 3 && c == 3,
        RuleId::N4EvenGcd => {
            a == 2
                && b >= 3
                && c >= 3
                && d >= 3
                && b % 2 == 0
                && b.gcd(&c) >= 3
                && u128::from(d).gcd(&u128::from(b).lcm(&u128::from(c))) == 2
        }
        RuleId::CotypeGe2N4 => w.cotype() >= 2,
        _ => false,
    }
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(k) = (0..n.saturating_sub(1))
            .rev()
            .find(|&k| cur[k] < cur[k + 1])
        else {
            return out;
        };
        let l = (k + 1..n).rev().find(|&l| cur[k] < cur[l]).unwrap();
        cur.swap(k, l);
        cur[k + 1..].reverse();
    }
}

/// Four-variable collection, cases (b) through (e), over every coordinate
/// permutation. Case (a) is covered by [`rule_low_sum`].
pub fn rule_collection(s: &ExponentTuple) -> Option<Firing> {
    if s.len() != 4 || !s.in_tn() {
        return None;
    }
    let perms = permutations(4);
    for case in [RuleId::N4Coprime, RuleId::N4ThreeThrees, RuleId::N4EvenGcd] {
        for perm in &perms {
            if collection_case_holds(case, &s.permuted(perm)) {
                return Some(Firing {
                    rule: case,
                    status: Status::Rigid,
                    permutation: perm.clone(),
                });
            }
        }
    }
    collection_case_holds(RuleId::CotypeGe2N4, s)
        .then(|| Firing::plain(RuleId::CotypeGe2N4, Status::Rigid, 4))
}

pub fn equal_exponents_holds(s: &ExponentTuple) -> bool {
    let n = s.len();
    let a = s.entries()[0];
    n >= 4 && s.entries().iter().all(|&x| x == a) && a >= n as u64
}

pub fn rule_equal_exponents(s: &ExponentTuple) -> Option<Firing> {
    equal_exponents_holds(s).then(|| Firing::plain(RuleId::EqualExponents, Status::Rigid, s.len()))
}

pub fn i_sum_holds(s: &ExponentTuple) -> bool {
    if s.len() < 3 {
        return false;
    }
    let (_, i_set, _) = s.cotype_sets();
    s.reciprocal_sum(&i_set) < threshold(s.len())
}

pub fn rule_i_sum(s: &ExponentTuple) -> Option<Firing> {
    i_sum_holds(s).then(|| Firing::plain(RuleId::ISum, Status::Rigid, s.len()))
}

pub fn cotype_high_holds(s: &ExponentTuple) -> bool {
    let n = s.len();
    n >= 4 && s.in_tn() && s.cotype() >= n - 2
}

pub fn rule_cotype_high(s: &ExponentTuple) -> Option<Firing> {
    cotype_high_holds(s).then(|| Firing::plain(RuleId::CotypeGeNMinus2, Status::Rigid, s.len()))
}

/// Subset size used by the recursive-subtuple rule, `min(|J(S)| - 1, n - 3)`.
/// `None` when the rule cannot apply (fewer than four variables, empty
/// `J(S)`, or the degenerate size 0).
pub fn recursive_subset_size(s: &ExponentTuple, cotype: usize) -> Option<usize> {
    let n = s.len();
    if n < 4 || cotype == 0 {
        return None;
    }
    let m = (cotype - 1).min(n - 3);
    (m > 0).then_some(m)
}

/// All `m`-element subsets of `items`, lexicographic.
pub(crate) fn subsets_of_size(items: &[usize], m: usize) -> Vec<Vec<usize>> {
    fn go(
        items: &[usize],
        m: usize,
        start: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for k in start..items.len() {
            if items.len() - k < m - cur.len() {
                break;
            }
            cur.push(items[k]);
            go(items, m, k + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, m, 0, &mut Vec::new(), &mut out);
    out
}

/// Runs the non-recursive rules in priority order.
pub fn first_arithmetic_rule(s: &ExponentTuple) -> Option<Firing> {
    rule_not_in_tn(s)
        .or_else(|| rule_n3(s))
        .or_else(|| rule_low_sum(s))
        .or_else(|| rule_collection(s))
        .or_else(|| rule_equal_exponents(s))
        .or_else(|| rule_cotype_high(s))
        .or_else(|| rule_i_sum(s))
}

/// Every non-recursive rule that fires, ignoring priority.
pub fn all_arithmetic_rules(s: &ExponentTuple) -> Vec<Firing> {
    [
        rule_not_in_tn(s),
        rule_n3(s),
        rule_low_sum(s),
        rule_collection(s),
        rule_equal_exponents(s),
        rule_cotype_high(s),
        rule_i_sum(s),
    ]
    .into_iter()
    .flatten()
    .collect()
}

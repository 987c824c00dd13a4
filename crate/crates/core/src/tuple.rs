//! Exponent tuples and the gcd/lcm invariants computed from them.
//!
//! All positions are 0-based in this API. Reports and certificates render
//! them 1-based.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{self, Natural, Rational};
use crate::error::{Error, Result};

/// Sorted set of 0-based coordinate positions.
pub type IndexSet = BTreeSet<usize>;

/// An ordered list of positive exponents `(a_1, ..., a_n)`.
///
/// Any non-empty length is representable so that subtuples can be inspected;
/// classification entry points insist on at least three entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct ExponentTuple(Vec<u64>);

impl TryFrom<Vec<u64>> for ExponentTuple {
    type Error = Error;

    fn try_from(entries: Vec<u64>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<ExponentTuple> for Vec<u64> {
    fn from(t: ExponentTuple) -> Self {
        t.0
    }
}

impl fmt::Debug for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, a) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl ExponentTuple {
    pub fn new(entries: Vec<u64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty);
        }
        if let Some(position) = entries.iter().position(|&a| a == 0) {
            return Err(Error::NonPositive { position, value: 0 });
        }
        Ok(ExponentTuple(entries))
    }

    /// Parses signed input, rejecting zero and negative exponents.
    pub fn from_signed(entries: &[i64]) -> Result<Self> {
        if let Some((position, &v)) = entries.iter().enumerate().find(|(_, &v)| v <= 0) {
            return Err(Error::NonPositive {
                position,
                value: v as i128,
            });
        }
        Self::new(entries.iter().map(|&v| v as u64).collect())
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            Err(Error::TooShort {
                len: self.len(),
                min,
            })
        } else {
            Ok(())
        }
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn lcm(&self) -> Natural {
        arith::lcm_of(self.0.iter().copied())
    }

    pub fn gcd(&self) -> u64 {
        arith::gcd_of(self.0.iter().copied())
    }

    pub fn lcm_gcd(&self) -> (Natural, u64) {
        (self.lcm(), self.gcd())
    }

    /// `lcm(S_i)`: the lcm of all entries except position `i`.
    pub fn lcm_without(&self, i: usize) -> Natural {
        arith::lcm_of(self.others(i))
    }

    /// `gcd(S_i)`.
    pub fn gcd_without(&self, i: usize) -> u64 {
        arith::gcd_of(self.others(i))
    }

    fn others(&self, i: usize) -> impl Iterator<Item = u64> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(move |&(k, _)| k != i)
            .map(|(_, &a)| a)
    }

    /// `S_J`: drops the positions in `removed`, keeping the original order.
    pub fn subtuple(&self, removed: &IndexSet) -> Result<ExponentTuple> {
        if let Some(&bad) = removed.iter().find(|&&k| k >= self.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.len(),
            });
        }
        if removed.len() == self.len() {
            return Err(Error::FullRemoval);
        }
        Ok(ExponentTuple(
            self.0
                .iter()
                .enumerate()
                .filter(|(k, _)| !removed.contains(k))
                .map(|(_, &a)| a)
                .collect(),
        ))
    }

    /// `S_i` for a single position.
    pub fn without(&self, i: usize) -> Result<ExponentTuple> {
        self.subtuple(&IndexSet::from([i]))
    }

    /// The tuple with position `i` replaced by `value`.
    pub fn with_entry(&self, i: usize, value: u64) -> ExponentTuple {
        assert!(value > 0);
        let mut v = self.0.clone();
        v[i] = value;
        ExponentTuple(v)
    }

    /// Divides every entry by the gcd; the result is normal.
    pub fn normalization(&self) -> ExponentTuple {
        let d = self.gcd();
        ExponentTuple(self.0.iter().map(|&a| a / d).collect())
    }

    pub fn is_normal(&self) -> bool {
        self.gcd() == 1
    }

    /// `(L/a_1, ..., L/a_n)` with `L = lcm(S)`. These are also the degrees of
    /// the standard grading.
    ///
    /// Panics if an entry of the result does not fit in `u64`; use
    /// [`ExponentTuple::bar_naturals`] for unbounded inputs.
    pub fn bar(&self) -> ExponentTuple {
        if let Some(l) = arith::lcm_small(self.0.iter().copied()) {
            return ExponentTuple(
                self.0
                    .iter()
                    .map(|&a| u64::try_from(l / u128::from(a)).expect("bar entry exceeds u64"))
                    .collect(),
            );
        }
        ExponentTuple(
            self.bar_naturals()
                .into_iter()
                .map(|d| u64::try_from(d).expect("bar entry exceeds u64"))
                .collect(),
        )
    }

    pub fn bar_naturals(&self) -> Vec<Natural> {
        let l = self.lcm();
        self.0.iter().map(|&a| &l / a).collect()
    }

    /// `gcd(a_i, lcm(S_i))` for an index known to be in range.
    fn g_at(&self, i: usize) -> u64 {
        let a = self.0[i];
        match arith::lcm_small(self.others(i)) {
            Some(l) => arith::gcd_u64(a, (l % u128::from(a)) as u64),
            None => arith::gcd_with(a, &self.lcm_without(i)),
        }
    }

    /// `J(S)`: positions `i` with `a_i` not dividing `lcm(S_i)`.
    pub fn j_set(&self) -> IndexSet {
        (0..self.len())
            .filter(|&i| self.g_at(i) != self.0[i])
            .collect()
    }

    pub fn cotype(&self) -> usize {
        self.j_set().len()
    }

    /// `(J(S), I(S), cotype)` where `I(S)` is the complement of `J(S)`.
    pub fn cotype_sets(&self) -> (IndexSet, IndexSet, usize) {
        let j = self.j_set();
        let i = (0..self.len()).filter(|k| !j.contains(k)).collect();
        let c = j.len();
        (j, i, c)
    }

    /// `J*(S)`: positions `i` with `gcd(S_i)` not dividing `a_i`.
    pub fn j_star(&self) -> IndexSet {
        (0..self.len())
            .filter(|&i| !self.0[i].is_multiple_of(self.gcd_without(i)))
            .collect()
    }

    /// `(J*(S), type)`.
    pub fn type_set(&self) -> (IndexSet, usize) {
        let js = self.j_star();
        let t = js.len();
        (js, t)
    }

    /// `g_i(S) = gcd(a_i, lcm(S_i))`.
    pub fn g(&self, i: usize) -> Result<u64> {
        self.check_index(i)?;
        Ok(self.g_at(i))
    }

    pub fn g_vec(&self) -> Vec<u64> {
        (0..self.len()).map(|i| self.g_at(i)).collect()
    }

    /// `self ≤ⁱ other`: same entries off position `i`, and
    /// `g_i(other) | a_i | a'_i`.
    pub fn leq_at(&self, other: &ExponentTuple, i: usize) -> Result<bool> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        self.check_index(i)?;
        let same_elsewhere = self
            .0
            .iter()
            .zip(&other.0)
            .enumerate()
            .all(|(k, (a, b))| k == i || a == b);
        if !same_elsewhere {
            return Ok(false);
        }
        let a = self.0[i];
        let b = other.0[i];
        Ok(b.is_multiple_of(a) && a.is_multiple_of(other.g(i)?))
    }

    /// Strict variant: `self ≤ⁱ other` and `self != other`.
    pub fn lt_at(&self, other: &ExponentTuple, i: usize) -> Result<bool> {
        Ok(self.leq_at(other, i)? && self != other)
    }

    /// `Δ_M(S) = lcm(S) / gcd{lcm(S_j) : j ∈ M}`, with `Δ_∅ = 1`.
    pub fn delta(&self, m: &IndexSet) -> Result<Natural> {
        if let Some(&bad) = m.iter().find(|&&k| k >= self.len()) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                len: self.len(),
            });
        }
        if m.is_empty() {
            return Ok(Natural::from(1u32));
        }
        if let Some(l) = arith::lcm_small(self.0.iter().copied()) {
            // every lcm(S_j) divides l, so it fits as well
            let g = m.iter().fold(0u128, |acc, &j| {
                let lj = arith::lcm_small(self.others(j)).expect("divides a u128 lcm");
                num_integer::Integer::gcd(&acc, &lj)
            });
            return Ok(Natural::from(l / g));
        }
        let partial: Vec<Natural> = m.iter().map(|&j| self.lcm_without(j)).collect();
        Ok(self.lcm() / arith::gcd_naturals(&partial))
    }

    /// Membership in `T_n`: every entry at least 2, at most one entry equal to 2.
    pub fn in_tn(&self) -> bool {
        self.0.iter().all(|&a| a >= 2) && self.0.iter().filter(|&&a| a == 2).count() <= 1
    }

    /// `∑_{i ∈ idx} 1/a_i`, exactly.
    pub fn reciprocal_sum(&self, idx: &IndexSet) -> Rational {
        idx.iter()
            .map(|&i| arith::reciprocal(self.0[i]))
            .fold(Rational::from_integer(0.into()), |acc, r| acc + r)
    }

    pub fn full_reciprocal_sum(&self) -> Rational {
        self.0
            .iter()
            .map(|&a| arith::reciprocal(a))
            .fold(Rational::from_integer(0.into()), |acc, r| acc + r)
    }

    /// Reorders coordinates: `out[k] = self[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> ExponentTuple {
        debug_assert_eq!(perm.len(), self.len());
        ExponentTuple(perm.iter().map(|&p| self.0[p]).collect())
    }

    /// Ascending rearrangement plus the permutation `sigma` with
    /// `sorted[k] = self[sigma[k]]`. Ties keep input order.
    pub fn canonical(&self) -> (ExponentTuple, Vec<usize>) {
        let mut sigma: Vec<usize> = (0..self.len()).collect();
        sigma.sort_by_key(|&k| (self.0[k], k));
        (self.permuted(&sigma), sigma)
    }

    pub fn is_sorted(&self) -> bool {
        self.0.windows(2).all(|w| w[0] <= w[1])
    }
}

/// Every derived invariant of a tuple, as shown by the `invariants` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub tuple: ExponentTuple,
    pub lcm: Natural,
    pub gcd: u64,
    pub normalization: ExponentTuple,
    /// `S̄`; coincides with the standard-grading degree vector.
    pub bar: Vec<Natural>,
    pub type_val: usize,
    pub cotype_val: usize,
    pub j_set: IndexSet,
    pub i_set: IndexSet,
    pub j_star: IndexSet,
    pub g_vec: Vec<u64>,
    pub in_tn: bool,
    pub delta_j: Natural,
    pub reciprocal_sum: Rational,
}

impl InvariantReport {
    pub fn compute(tuple: &ExponentTuple) -> Result<Self> {
        tuple.require_len(2)?;
        let (j_set, i_set, cotype_val) = tuple.cotype_sets();
        let (j_star, type_val) = tuple.type_set();
        let delta_j = tuple.delta(&j_set)?;
        Ok(InvariantReport {
            tuple: tuple.clone(),
            lcm: tuple.lcm(),
            gcd: tuple.gcd(),
            normalization: tuple.normalization(),
            bar: tuple.bar_naturals(),
            type_val,
            cotype_val,
            j_set,
            i_set,
            j_star,
            g_vec: tuple.g_vec(),
            in_tn: tuple.in_tn(),
            delta_j,
            reciprocal_sum: tuple.full_reciprocal_sum(),
        })
    }

    /// Degrees of the standard grading; identical to `bar`.
    pub fn degrees(&self) -> &[Natural] {
        &self.bar
    }
}

/// Renders a 0-based index set as a 1-based `{i,j,...}` string.
pub fn render_index_set(set: &IndexSet) -> String {
    let inner: Vec<String> = set.iter().map(|k| (k + 1).to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

pub fn one_based(set: &IndexSet) -> Vec<usize> {
    set.iter().map(|k| k + 1).collect()
}

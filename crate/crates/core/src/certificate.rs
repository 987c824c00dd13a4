//! Certificate trees, their JSON text form, and independent replay.
//!
//! Text schema (one JSON object per node):
//!
//! ```text
//! {
//!   "rule": "RECURSIVE_SUBTUPLES",
//!   "tuple": [2, 5, 7, 3, 3, 3],
//!   "permutation": [1, 2, 3, 4, 5, 6],
//!   "witness": { "index": 4, "witness_tuple": [...], "subset": [1, 2, 3], "sibling": [...] },
//!   "children": [ ...nodes... ],
//!   "status": "RIGID"
//! }
//! ```
//!
//! Indices inside a certificate are 1-based. `permutation[k]` names the
//! coordinate of `tuple` that sits at position `k` of the working tuple the
//! rule was checked on. Absent witness fields are omitted.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rules::{self, RuleId, Status};
use crate::tuple::{ExponentTuple, IndexSet};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    /// Coordinate `i` of a descent or transfer step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    /// `S*` with `S* ≤ⁱ S`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_tuple: Option<ExponentTuple>,
    /// `J(S)` for the recursive-subtuple rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    /// `S′` sharing the transfer base `S*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sibling: Option<ExponentTuple>,
}

impl Witness {
    pub fn is_empty(&self) -> bool {
        self == &Witness::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub rule: RuleId,
    pub tuple: ExponentTuple,
    pub permutation: Vec<usize>,
    #[serde(default)]
    pub witness: Witness,
    #[serde(default)]
    pub children: Vec<Certificate>,
    pub status: Status,
}

impl Certificate {
    pub(crate) fn leaf(
        rule: RuleId,
        tuple: ExponentTuple,
        perm0: &[usize],
        status: Status,
    ) -> Self {
        Certificate {
            rule,
            tuple,
            permutation: perm0.iter().map(|k| k + 1).collect(),
            witness: Witness::default(),
            children: Vec::new(),
            status,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serialization")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    /// The permutation as 0-based positions, if it is a valid permutation.
    fn permutation0(&self) -> Option<Vec<usize>> {
        let n = self.tuple.len();
        if self.permutation.len() != n {
            return None;
        }
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for &p in &self.permutation {
            if p == 0 || p > n || seen[p - 1] {
                return None;
            }
            seen[p - 1] = true;
            out.push(p - 1);
        }
        Some(out)
    }

    /// The tuple the rule was checked on.
    pub fn working_tuple(&self) -> Option<ExponentTuple> {
        self.permutation0().map(|p| self.tuple.permuted(&p))
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(Certificate::node_count)
            .sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children
            .iter()
            .map(Certificate::depth)
            .max()
            .unwrap_or(0)
    }

    /// Rules along the first-child path from the root.
    pub fn rule_chain(&self) -> Vec<RuleId> {
        let mut out = vec![self.rule];
        let mut node = self;
        while let Some(c) = node.children.first() {
            out.push(c.rule);
            node = c;
        }
        out
    }

    /// Re-expresses this certificate for `target`, a rearrangement of
    /// `self.tuple`. Permutation-sensitive rules keep a permutation; every
    /// other node is rewritten so its witnesses refer to `target` directly.
    pub fn relabel(&self, target: &ExponentTuple) -> Certificate {
        if target == &self.tuple && self.is_identity() {
            return self.clone();
        }
        let rho = matching(self.tuple.entries(), target.entries());
        let pi = self
            .permutation0()
            .expect("relabel of malformed certificate");
        // working position k lives at target position ro_pi[k]
        let ro_pi: Vec<usize> = pi.iter().map(|&p| rho[p]).collect();

        if self.rule.is_collection_case() {
            return Certificate {
                rule: self.rule,
                tuple: target.clone(),
                permutation: ro_pi.iter().map(|k| k + 1).collect(),
                witness: self.witness.clone(),
                children: self.children.clone(),
                status: self.status,
            };
        }
        let identity: Vec<usize> = (1..=target.len()).collect();
        let map1 = |k1: usize| ro_pi[k1 - 1] + 1;
        let mut witness = self.witness.clone();
        let mut children = self.children.clone();
        match self.rule {
            RuleId::RecursiveSubtuples => {
                let old_subset = self.witness.subset.clone().unwrap_or_default();
                let new_subset: Vec<usize> = {
                    let mut v: Vec<usize> = old_subset.iter().map(|&k| map1(k)).collect();
                    v.sort_unstable();
                    v
                };
                // children follow the lexicographic order of removed subsets
                let m = target.len()
                    - self
                        .children
                        .first()
                        .map_or(target.len(), |c| c.tuple.len());
                let old_subsets = rules::subsets_of_size(&old_subset, m);
                let by_removed: BTreeMap<Vec<usize>, &Certificate> = old_subsets
                    .into_iter()
                    .map(|s| {
                        let mut mapped: Vec<usize> = s.iter().map(|&k| map1(k)).collect();
                        mapped.sort_unstable();
                        mapped
                    })
                    .zip(self.children.iter())
                    .collect();
                children = rules::subsets_of_size(&new_subset, m)
                    .into_iter()
                    .map(|removed| {
                        let child = by_removed[&removed];
                        let set: IndexSet = removed.iter().map(|k| k - 1).collect();
                        child.relabel(&target.subtuple(&set).expect("proper subset"))
                    })
                    .collect();
                witness.subset = Some(new_subset);
            }
            RuleId::Descend | RuleId::Transfer => {
                if let Some(i1) = self.witness.index {
                    // witness and child tuples are aligned with the working tuple
                    let i = map1(i1) - 1;
                    let swap = |u: &ExponentTuple| target.with_entry(i, u.entries()[i1 - 1]);
                    witness.index = Some(i + 1);
                    witness.witness_tuple = self.witness.witness_tuple.as_ref().map(swap);
                    witness.sibling = self.witness.sibling.as_ref().map(swap);
                    children = self
                        .children
                        .iter()
                        .map(|c| c.relabel(&swap(&c.tuple)))
                        .collect();
                }
            }
            _ => {}
        }
        Certificate {
            rule: self.rule,
            tuple: target.clone(),
            permutation: identity,
            witness,
            children,
            status: self.status,
        }
    }

    fn is_identity(&self) -> bool {
        self.permutation
            .iter()
            .enumerate()
            .all(|(k, &p)| p == k + 1)
    }
}

/// `rho` with `from[k] == to[rho[k]]`, matching equal values in order.
fn matching(from: &[u64], to: &[u64]) -> Vec<usize> {
    assert_eq!(
        from.len(),
        to.len(),
        "relabel target has a different length"
    );
    let mut used = vec![false; to.len()];
    from.iter()
        .map(|v| {
            let pos = (0..to.len())
                .find(|&p| !used[p] && to[p] == *v)
                .expect("relabel target is not a rearrangement");
            used[pos] = true;
            pos
        })
        .collect()
}

/// First node whose side conditions fail, addressed by child positions from
/// the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayError {
    pub path: Vec<usize>,
    pub reason: String,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {:?}: {}", self.path, self.reason)
    }
}

impl std::error::Error for ReplayError {}

/// Re-checks every arithmetic side condition in the tree.
pub fn replay(cert: &Certificate) -> bool {
    check(cert).is_ok()
}

pub fn check(cert: &Certificate) -> std::result::Result<(), ReplayError> {
    let mut path = Vec::new();
    check_node(cert, &mut path)
}

fn fail<T>(path: &[usize], reason: impl Into<String>) -> std::result::Result<T, ReplayError> {
    Err(ReplayError {
        path: path.to_vec(),
        reason: reason.into(),
    })
}

fn check_node(node: &Certificate, path: &mut Vec<usize>) -> std::result::Result<(), ReplayError> {
    let n = node.tuple.len();
    if n < 3 {
        return fail(
            path,
            format!("tuple {} has fewer than 3 entries", node.tuple),
        );
    }
    let Some(w) = node.working_tuple() else {
        return fail(path, "permutation is not a permutation of the coordinates");
    };
    if !node.rule.is_collection_case() && !node.is_identity() {
        return fail(path, format!("{} does not take a permutation", node.rule));
    }
    let expected_status = match node.rule {
        RuleId::NotInTn => Status::NonRigid,
        RuleId::N3Stable | RuleId::LowSum => Status::StablyRigid,
        RuleId::Transfer => {
            if node.status == Status::NonRigid {
                Status::NonRigid
            } else {
                Status::Rigid
            }
        }
        _ => Status::Rigid,
    };
    if node.status != expected_status {
        return fail(
            path,
            format!(
                "{} yields {}, certificate claims {}",
                node.rule, expected_status, node.status
            ),
        );
    }
    let witness_free = node.witness.is_empty() && node.children.is_empty();
    let ok = match node.rule {
        RuleId::NotInTn => witness_free && !w.in_tn(),
        RuleId::N3T3 => witness_free && n == 3 && w.in_tn(),
        RuleId::N3Stable => witness_free && rules::n3_stable_holds(&w),
        RuleId::LowSum => witness_free && rules::low_sum_holds(&w),
        RuleId::N4Coprime | RuleId::N4ThreeThrees | RuleId::N4EvenGcd | RuleId::CotypeGe2N4 => {
            witness_free && n == 4 && w.in_tn() && rules::collection_case_holds(node.rule, &w)
        }
        RuleId::EqualExponents => witness_free && rules::equal_exponents_holds(&w),
        RuleId::CotypeGeNMinus2 => witness_free && rules::cotype_high_holds(&w),
        RuleId::ISum => witness_free && rules::i_sum_holds(&w),
        RuleId::RecursiveSubtuples => return check_recursive(node, &w, path),
        RuleId::Descend => return check_descend(node, &w, path),
        RuleId::Transfer => return check_transfer(node, &w, path),
    };
    if ok {
        Ok(())
    } else {
        fail(
            path,
            format!("side condition of {} fails on {}", node.rule, w),
        )
    }
}

fn check_children(
    node: &Certificate,
    path: &mut Vec<usize>,
) -> std::result::Result<(), ReplayError> {
    for (k, child) in node.children.iter().enumerate() {
        path.push(k);
        check_node(child, path)?;
        path.pop();
    }
    Ok(())
}

fn check_recursive(
    node: &Certificate,
    w: &ExponentTuple,
    path: &mut Vec<usize>,
) -> std::result::Result<(), ReplayError> {
    let j = w.j_set();
    let Some(m) = rules::recursive_subset_size(w, j.len()) else {
        return fail(path, "recursive-subtuple rule does not apply");
    };
    let j1: Vec<usize> = j.iter().map(|k| k + 1).collect();
    if node.witness.subset.as_ref() != Some(&j1)
        || node.witness.index.is_some()
        || node.witness.witness_tuple.is_some()
        || node.witness.sibling.is_some()
    {
        return fail(path, "witness subset must equal J(S)");
    }
    let subsets = rules::subsets_of_size(&j.iter().copied().collect::<Vec<_>>(), m);
    if subsets.len() != node.children.len() {
        return fail(
            path,
            format!(
                "expected {} sub-proofs, found {}",
                subsets.len(),
                node.children.len()
            ),
        );
    }
    for (k, (removed, child)) in subsets.iter().zip(&node.children).enumerate() {
        let expected = w
            .subtuple(&removed.iter().copied().collect())
            .expect("proper subset");
        if child.tuple != expected {
            return fail(
                path,
                format!("child {k} should prove {expected}, proves {}", child.tuple),
            );
        }
        if !child.status.is_rigid() {
            return fail(path, format!("child {k} is not rigid"));
        }
    }
    check_children(node, path)
}

fn check_descend(
    node: &Certificate,
    w: &ExponentTuple,
    path: &mut Vec<usize>,
) -> std::result::Result<(), ReplayError> {
    let (Some(i1), Some(star)) = (node.witness.index, &node.witness.witness_tuple) else {
        return fail(path, "descent needs an index and a witness tuple");
    };
    if node.witness.subset.is_some() || node.witness.sibling.is_some() {
        return fail(path, "unexpected witness fields on a descent step");
    }
    if i1 == 0 || i1 > w.len() || star.len() != w.len() {
        return fail(path, "descent witness index out of range");
    }
    if !star.lt_at(w, i1 - 1).unwrap_or(false) {
        return fail(path, format!("{star} is not below {w} at coordinate {i1}"));
    }
    match node.children.as_slice() {
        [child] if child.tuple == *star && child.status.is_rigid() => {}
        _ => {
            return fail(
                path,
                "descent needs exactly one rigid sub-proof for the witness",
            )
        }
    }
    check_children(node, path)
}

fn check_transfer(
    node: &Certificate,
    w: &ExponentTuple,
    path: &mut Vec<usize>,
) -> std::result::Result<(), ReplayError> {
    let (Some(i1), Some(star), Some(sibling)) = (
        node.witness.index,
        &node.witness.witness_tuple,
        &node.witness.sibling,
    ) else {
        return fail(path, "transfer needs an index, a base tuple and a sibling");
    };
    if node.witness.subset.is_some() {
        return fail(path, "unexpected subset on a transfer step");
    }
    if i1 == 0 || i1 > w.len() || star.len() != w.len() || sibling.len() != w.len() {
        return fail(path, "transfer witness index out of range");
    }
    let i = i1 - 1;
    if !star.lt_at(w, i).unwrap_or(false) || !star.lt_at(sibling, i).unwrap_or(false) {
        return fail(
            path,
            format!("{star} is not strictly below both {w} and {sibling} at {i1}"),
        );
    }
    let child_ok = |c: &Certificate| {
        c.tuple == *sibling
            && if node.status == Status::NonRigid {
                c.status == Status::NonRigid
            } else {
                c.status.is_rigid()
            }
    };
    match node.children.as_slice() {
        [child] if child_ok(child) => {}
        _ => {
            return fail(
                path,
                "transfer needs exactly one sub-proof for the sibling with a matching status",
            )
        }
    }
    check_children(node, path)
}

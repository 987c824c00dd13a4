//! Proj-isomorphism classes inside a finite universe of tuples.
//!
//! `S ≤ⁱ S'` makes `B_S` the `k`-th Veronese subring of `B_{S'}` with
//! `k = a'_i / a_i`, so both have isomorphic Proj. Classes are connected
//! components of these steps, taken up to coordinate permutation and only
//! through tuples of the universe.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::KnowledgeBase;
use crate::error::{Error, Result};
use crate::rules::Status;
use crate::tuple::ExponentTuple;

/// A strict step `from ≤ⁱ σ(to)`.
///
/// `permutation` (1-based) aligns `to` with `from`: the aligned tuple has
/// `to[permutation[k] - 1]` at position `k`. `index` is 1-based in `from`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjEdge {
    pub from: ExponentTuple,
    pub to: ExponentTuple,
    pub index: usize,
    pub permutation: Vec<usize>,
    pub k: u64,
}

impl ProjEdge {
    /// `to` rearranged into `from`'s coordinates.
    pub fn aligned_to(&self) -> ExponentTuple {
        let perm0: Vec<usize> = self.permutation.iter().map(|p| p - 1).collect();
        self.to.permuted(&perm0)
    }

    /// Re-checks `from ≤ⁱ aligned(to)` and `k·a_i = a'_i`.
    pub fn verify(&self) -> bool {
        let n = self.from.len();
        let mut seen = vec![false; n];
        if self.to.len() != n
            || self.permutation.len() != n
            || !self
                .permutation
                .iter()
                .all(|&p| (1..=n).contains(&p) && !std::mem::replace(&mut seen[p - 1], true))
            || !(1..=n).contains(&self.index)
        {
            return false;
        }
        let i = self.index - 1;
        let aligned = self.aligned_to();
        self.k >= 2
            && self.from.entries()[i].checked_mul(self.k) == Some(aligned.entries()[i])
            && self.from.lt_at(&aligned, i).unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjClass {
    pub members: Vec<ExponentTuple>,
    /// `statuses[k]` belongs to `members[k]`.
    pub statuses: Vec<Status>,
    pub edges: Vec<ProjEdge>,
    pub mixed: bool,
}

impl ProjClass {
    pub fn status_of(&self, s: &ExponentTuple) -> Option<Status> {
        let (c, _) = s.canonical();
        self.members
            .iter()
            .position(|m| m.canonical().0 == c)
            .map(|k| self.statuses[k])
    }

    pub fn contains(&self, s: &ExponentTuple) -> bool {
        self.status_of(s).is_some()
    }
}

/// All classes of a universe. Classes say nothing about tuples outside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjReport {
    pub relative_to_universe: bool,
    pub classes: Vec<ProjClass>,
}

/// True iff the statuses span at least two of NON_RIGID, rigid, UNKNOWN.
pub fn is_mixed(statuses: &[Status]) -> bool {
    let family = |s: &Status| match s {
        Status::NonRigid => 0u8,
        Status::Rigid | Status::StablyRigid => 1,
        Status::Unknown => 2,
    };
    let mut it = statuses.iter().map(family);
    match it.next() {
        Some(first) => it.any(|f| f != first),
        None => false,
    }
}

/// Removes permutation duplicates (first occurrence wins) and checks that
/// every tuple has the same length `n ≥ 3`.
fn normalize_universe(universe: &[ExponentTuple]) -> Result<Vec<ExponentTuple>> {
    let Some(first) = universe.first() else {
        return Ok(Vec::new());
    };
    first.require_len(3)?;
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for s in universe {
        if s.len() != first.len() {
            return Err(Error::LengthMismatch {
                left: first.len(),
                right: s.len(),
            });
        }
        if seen.insert(s.canonical().0) {
            out.push(s.clone());
        }
    }
    Ok(out)
}

/// The permutation `p` with `target[k] = source[p[k]]`.
fn alignment(source: &ExponentTuple, target: &ExponentTuple) -> Vec<usize> {
    let mut used = vec![false; source.len()];
    target
        .entries()
        .iter()
        .map(|v| {
            let p = (0..source.len())
                .find(|&p| !used[p] && source.entries()[p] == *v)
                .expect("same multiset");
            used[p] = true;
            p
        })
        .collect()
}

fn edges_from(
    from: &ExponentTuple,
    index: &HashMap<ExponentTuple, usize>,
    members: &[ExponentTuple],
    max_entry: u64,
) -> Vec<(usize, ProjEdge)> {
    // best candidate per target: identity alignment first, then smallest i
    let mut best: BTreeMap<usize, (bool, usize, ProjEdge)> = BTreeMap::new();
    for i in 0..from.len() {
        let a = from.entries()[i];
        let mut k = 2u64;
        while let Some(a_prime) = a.checked_mul(k).filter(|&v| v <= max_entry) {
            let aligned = from.with_entry(i, a_prime);
            k += 1;
            let Some(&m) = index.get(&aligned.canonical().0) else {
                continue;
            };
            if !from.lt_at(&aligned, i).unwrap_or(false) {
                continue;
            }
            let to = &members[m];
            let perm = alignment(to, &aligned);
            let identity = perm.iter().enumerate().all(|(a, &b)| a == b);
            let rank = (!identity, i);
            let edge = ProjEdge {
                from: from.clone(),
                to: to.clone(),
                index: i + 1,
                permutation: perm.iter().map(|p| p + 1).collect(),
                k: a_prime / a,
            };
            match best.get(&m) {
                Some((x, y, _)) if (*x, *y) <= rank => {}
                _ => {
                    best.insert(m, (rank.0, rank.1, edge));
                }
            }
        }
    }
    best.into_iter().map(|(m, (_, _, e))| (m, e)).collect()
}

/// Every ordered pair `(S, S')` of the universe with `S <ⁱ σ(S')` for some
/// `i` and permutation `σ`, one edge per pair.
pub fn proj_edges(universe: &[ExponentTuple]) -> Result<Vec<ProjEdge>> {
    Ok(indexed_edges(&normalize_universe(universe)?)
        .into_iter()
        .map(|(_, _, e)| e)
        .collect())
}

fn indexed_edges(members: &[ExponentTuple]) -> Vec<(usize, usize, ProjEdge)> {
    let index: HashMap<ExponentTuple, usize> = members
        .iter()
        .enumerate()
        .map(|(k, s)| (s.canonical().0, k))
        .collect();
    let max_entry = members
        .iter()
        .flat_map(|s| s.entries().iter().copied())
        .max()
        .unwrap_or(0);
    members
        .par_iter()
        .enumerate()
        .map(|(f, s)| {
            edges_from(s, &index, members, max_entry)
                .into_iter()
                .map(|(t, e)| (f, t, e))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            y = std::mem::replace(&mut self.parent[y], r);
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        // smaller index as root keeps class order deterministic
        if ra < rb {
            self.parent[rb] = ra;
        } else if rb < ra {
            self.parent[ra] = rb;
        }
    }
}

/// Connected components of the undirected edge graph, each member
/// classified with `kb`. Classes are ordered by their first member in
/// universe order; members keep universe order.
pub fn proj_classes(universe: &[ExponentTuple], kb: &KnowledgeBase) -> Result<ProjReport> {
    let members = normalize_universe(universe)?;
    let edges = indexed_edges(&members);
    let mut uf = UnionFind::new(members.len());
    for (f, t, _) in &edges {
        uf.union(*f, *t);
    }
    let statuses: Vec<Status> = members
        .par_iter()
        .map(|s| kb.classify(s).map(|c| c.status))
        .collect::<Result<_>>()?;

    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut classes: Vec<ProjClass> = Vec::new();
    for (k, s) in members.iter().enumerate() {
        let root = uf.find(k);
        let c = *slot.entry(root).or_insert_with(|| {
            classes.push(ProjClass {
                members: Vec::new(),
                statuses: Vec::new(),
                edges: Vec::new(),
                mixed: false,
            });
            classes.len() - 1
        });
        classes[c].members.push(s.clone());
        classes[c].statuses.push(statuses[k]);
    }
    for (f, _, e) in edges {
        let c = slot[&uf.find(f)];
        classes[c].edges.push(e);
    }
    for c in &mut classes {
        c.mixed = is_mixed(&c.statuses);
    }
    Ok(ProjReport {
        relative_to_universe: true,
        classes,
    })
}

//! Memoized, budgeted classification.
//!
//! The search is a pure function of `(sorted tuple, remaining depth, transfer
//! allowed)`, and the memo is keyed on exactly that triple. Results therefore
//! never depend on the order in which tuples are classified or on how many
//! workers share a [`KnowledgeBase`].

use std::sync::Arc;

use dashmap::DashMap;

use crate::arith::{self, Natural};
use crate::certificate::{Certificate, Witness};
use crate::error::{Error, Result};
use crate::rules::{self, Firing, RuleId, Status};
use crate::tuple::{ExponentTuple, IndexSet};

pub const DEFAULT_MAX_DEPTH: u32 = 6;
pub const DEFAULT_MAX_DIVISOR_WITNESSES: usize = 32;
pub const DEFAULT_MAX_TRANSFER_SIBLINGS: usize = 16;

/// Environment variable read by [`Budget::from_env`], e.g.
/// `depth=6,witnesses=32,siblings=16`.
pub const BUDGET_ENV: &str = "PBRIG_BUDGET";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Budget {
    pub max_depth: u32,
    pub max_divisor_witnesses: usize,
    pub max_transfer_siblings: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_depth: DEFAULT_MAX_DEPTH,
            max_divisor_witnesses: DEFAULT_MAX_DIVISOR_WITNESSES,
            max_transfer_siblings: DEFAULT_MAX_TRANSFER_SIBLINGS,
        }
    }
}

impl Budget {
    /// Parses `key=value` pairs separated by commas; missing keys keep their
    /// defaults.
    pub fn parse(spec: &str) -> Result<Budget> {
        let mut b = Budget::default();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(|| {
                Error::InvalidRange(format!("budget entry `{part}` is not key=value"))
            })?;
            let bad = || Error::InvalidRange(format!("budget value `{value}` for `{key}`"));
            match key.trim() {
                "depth" => b.max_depth = value.trim().parse().map_err(|_| bad())?,
                "witnesses" => b.max_divisor_witnesses = value.trim().parse().map_err(|_| bad())?,
                "siblings" => b.max_transfer_siblings = value.trim().parse().map_err(|_| bad())?,
                other => return Err(Error::InvalidRange(format!("unknown budget key `{other}`"))),
            }
        }
        Ok(b)
    }

    pub fn from_env() -> Result<Budget> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => Budget::parse(&v),
            Err(_) => Ok(Budget::default()),
        }
    }
}

impl std::fmt::Display for Budget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "depth={},witnesses={},siblings={}",
            self.max_depth, self.max_divisor_witnesses, self.max_transfer_siblings
        )
    }
}

/// Result of classifying one tuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub tuple: ExponentTuple,
    pub status: Status,
    /// Present for every decided status.
    pub certificate: Option<Certificate>,
    /// An UNKNOWN answer that a larger budget might resolve.
    pub budget_exhausted: bool,
}

impl Classification {
    pub fn rule(&self) -> Option<RuleId> {
        self.certificate.as_ref().map(|c| c.rule)
    }
}

#[derive(Debug, Clone)]
struct Outcome {
    status: Status,
    cert: Option<Arc<Certificate>>,
    exhausted: bool,
}

impl Outcome {
    fn decided(cert: Certificate) -> Outcome {
        Outcome {
            status: cert.status,
            cert: Some(Arc::new(cert)),
            exhausted: false,
        }
    }

    fn unknown(exhausted: bool) -> Outcome {
        Outcome {
            status: Status::Unknown,
            cert: None,
            exhausted,
        }
    }
}

type CacheKey = (ExponentTuple, u32, bool);

/// Memo table plus search budget.
pub struct KnowledgeBase {
    budget: Budget,
    cache: DashMap<CacheKey, Outcome>,
    /// Best decided answer per canonical tuple from top-level requests.
    decided: DashMap<ExponentTuple, (Status, Arc<Certificate>)>,
}

impl Default for KnowledgeBase {
    fn default() -> Self {
        KnowledgeBase::new(Budget::default())
    }
}

/// Which positions of `w` to try: `J(w)`, skipping repeats of a value
/// already tried (they give the same tuple up to permutation).
fn distinct_positions(w: &ExponentTuple, positions: &IndexSet) -> Vec<usize> {
    let mut seen = Vec::new();
    positions
        .iter()
        .copied()
        .filter(|&i| {
            let v = w.entries()[i];
            if seen.contains(&v) {
                false
            } else {
                seen.push(v);
                true
            }
        })
        .collect()
}

impl KnowledgeBase {
    pub fn new(budget: Budget) -> Self {
        KnowledgeBase {
            budget,
            cache: DashMap::new(),
            decided: DashMap::new(),
        }
    }

    pub fn budget(&self) -> Budget {
        self.budget
    }

    /// Number of memoized search states.
    pub fn memo_len(&self) -> usize {
        self.cache.len()
    }

    /// Best decided answer recorded for the canonical form of `s`.
    pub fn lookup(&self, s: &ExponentTuple) -> Option<(Status, Certificate)> {
        let (c, _) = s.canonical();
        self.decided.get(&c).map(|e| (e.0, (*e.1).clone()))
    }

    fn validate(s: &ExponentTuple) -> Result<()> {
        s.require_len(3)
    }

    /// Classifies `s` under the knowledge base's budget.
    pub fn classify(&self, s: &ExponentTuple) -> Result<Classification> {
        Self::validate(s)?;
        let (canon, _) = s.canonical();
        let out = self.solve(&canon, self.budget.max_depth, true);
        let certificate = out.cert.as_ref().map(|c| c.relabel(s));
        if let Some(cert) = &out.cert {
            self.record(&canon, out.status, cert);
        }
        Ok(Classification {
            tuple: s.clone(),
            status: out.status,
            certificate,
            budget_exhausted: out.exhausted,
        })
    }

    /// Stores a top-level answer, keeping the stronger of two rigid answers
    /// and refusing contradictions.
    fn record(&self, canon: &ExponentTuple, status: Status, cert: &Arc<Certificate>) {
        assert!(
            !(status.is_rigid() && !canon.in_tn()),
            "soundness violation: {canon} is outside T_n but was classified {status}"
        );
        self.decided
            .entry(canon.clone())
            .and_modify(|e| {
                assert!(
                    !e.0.contradicts(status),
                    "soundness violation: {canon} classified both {} and {status}",
                    e.0
                );
                if status == Status::StablyRigid && e.0 == Status::Rigid {
                    *e = (status, cert.clone());
                }
            })
            .or_insert_with(|| (status, cert.clone()));
    }

    fn solve(&self, w: &ExponentTuple, depth: u32, transfer: bool) -> Outcome {
        debug_assert!(w.is_sorted());
        let key = (w.clone(), depth, transfer);
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let out = self.solve_uncached(w, depth, transfer);
        self.cache.insert(key, out.clone());
        out
    }

    /// Classifies a derived tuple and re-expresses its certificate in the
    /// derived tuple's own coordinate order.
    fn solve_child(
        &self,
        child: &ExponentTuple,
        depth: u32,
        transfer: bool,
    ) -> (Outcome, Option<Certificate>) {
        let (canon, _) = child.canonical();
        let out = self.solve(&canon, depth, transfer);
        let cert = out.cert.as_ref().map(|c| c.relabel(child));
        (out, cert)
    }

    fn solve_uncached(&self, w: &ExponentTuple, depth: u32, transfer: bool) -> Outcome {
        if let Some(f) = rules::first_arithmetic_rule(w) {
            return Outcome::decided(firing_certificate(w, &f));
        }
        let mut exhausted = false;
        if let Some(c) = self.recursive_subtuples(w, depth, transfer, &mut exhausted) {
            return Outcome::decided(c);
        }
        if let Some(c) = self.descend(w, depth, transfer, &mut exhausted) {
            return Outcome::decided(c);
        }
        if transfer {
            if let Some(c) = self.transfer(w, depth, &mut exhausted) {
                return Outcome::decided(c);
            }
        }
        Outcome::unknown(exhausted)
    }

    fn recursive_subtuples(
        &self,
        w: &ExponentTuple,
        depth: u32,
        transfer: bool,
        exhausted: &mut bool,
    ) -> Option<Certificate> {
        let j = w.j_set();
        let m = rules::recursive_subset_size(w, j.len())?;
        if depth == 0 {
            *exhausted = true;
            return None;
        }
        let j_vec: Vec<usize> = j.iter().copied().collect();
        let mut children = Vec::new();
        for removed in rules::subsets_of_size(&j_vec, m) {
            let sub = w
                .subtuple(&removed.iter().copied().collect())
                .expect("proper subset");
            let (out, cert) = self.solve_child(&sub, depth - 1, transfer);
            if !out.status.is_rigid() {
                *exhausted |= out.exhausted;
                return None;
            }
            children.push(cert.expect("decided child has a certificate"));
        }
        Some(Certificate {
            rule: RuleId::RecursiveSubtuples,
            tuple: w.clone(),
            permutation: (1..=w.len()).collect(),
            witness: Witness {
                subset: Some(j_vec.iter().map(|k| k + 1).collect()),
                ..Witness::default()
            },
            children,
            status: Status::Rigid,
        })
    }

    /// Candidates `a*` with `g_i | a* | a_i`, `a* < a_i`, smallest first.
    /// The flag reports truncation by the witness budget.
    fn descent_candidates(&self, w: &ExponentTuple, i: usize) -> (Vec<u64>, bool) {
        let a = w.entries()[i];
        let g = w.g(i).expect("index in range");
        let all: Vec<u64> = arith::divisors(a / g)
            .into_iter()
            .map(|t| g * t)
            .filter(|&x| x < a)
            .collect();
        let truncated = all.len() > self.budget.max_divisor_witnesses;
        (
            all.into_iter()
                .take(self.budget.max_divisor_witnesses)
                .collect(),
            truncated,
        )
    }

    fn descend(
        &self,
        w: &ExponentTuple,
        depth: u32,
        transfer: bool,
        exhausted: &mut bool,
    ) -> Option<Certificate> {
        let j = w.j_set();
        if j.is_empty() {
            return None;
        }
        if depth == 0 {
            *exhausted = true;
            return None;
        }
        for i in distinct_positions(w, &j) {
            let (candidates, truncated) = self.descent_candidates(w, i);
            *exhausted |= truncated;
            for a_star in candidates {
                let star = w.with_entry(i, a_star);
                let (out, cert) = self.solve_child(&star, depth - 1, transfer);
                *exhausted |= out.exhausted;
                if out.status.is_rigid() {
                    return Some(Certificate {
                        rule: RuleId::Descend,
                        tuple: w.clone(),
                        permutation: (1..=w.len()).collect(),
                        witness: Witness {
                            index: Some(i + 1),
                            witness_tuple: Some(star),
                            ..Witness::default()
                        },
                        children: vec![cert.expect("decided child has a certificate")],
                        status: Status::Rigid,
                    });
                }
            }
        }
        None
    }

    /// Sibling values `a'` at position `i`: multiples of `g = g_i(w)` other
    /// than `g` and `a_i` with `gcd(a', lcm(w_i)) = g`, smallest first, plus
    /// one fresh-prime sibling `g·p`.
    pub(crate) fn transfer_siblings(&self, w: &ExponentTuple, i: usize) -> Vec<u64> {
        let a = w.entries()[i];
        let g = w.g(i).expect("index in range");
        let l_i = w.lcm_without(i);
        let mut out = Vec::new();
        let mut t = 2u64;
        while out.len() < self.budget.max_transfer_siblings {
            let cand = g * t;
            if cand != a && arith::gcd_with(cand, &l_i) == g {
                out.push(cand);
            }
            t += 1;
        }
        let p = arith::smallest_prime_not_dividing(&w.lcm());
        let fresh = g * p;
        if fresh != a && !out.contains(&fresh) {
            out.push(fresh);
        }
        out
    }

    fn transfer(&self, w: &ExponentTuple, depth: u32, exhausted: &mut bool) -> Option<Certificate> {
        let j = w.j_set();
        if j.is_empty() {
            return None;
        }
        if depth == 0 {
            *exhausted = true;
            return None;
        }
        for i in distinct_positions(w, &j) {
            let g = w.g(i).expect("index in range");
            let base = w.with_entry(i, g);
            for a_prime in self.transfer_siblings(w, i) {
                let sibling = w.with_entry(i, a_prime);
                // siblings share one transfer class, so they are searched
                // without further transfers
                let (out, cert) = self.solve_child(&sibling, depth - 1, false);
                *exhausted |= out.exhausted;
                if out.status.is_decided() {
                    let status = if out.status == Status::NonRigid {
                        Status::NonRigid
                    } else {
                        Status::Rigid
                    };
                    return Some(Certificate {
                        rule: RuleId::Transfer,
                        tuple: w.clone(),
                        permutation: (1..=w.len()).collect(),
                        witness: Witness {
                            index: Some(i + 1),
                            witness_tuple: Some(base),
                            sibling: Some(sibling),
                            ..Witness::default()
                        },
                        children: vec![cert.expect("decided child has a certificate")],
                        status,
                    });
                }
            }
        }
        None
    }

    /// Runs only the recursive-subtuple rule on `s` as given.
    pub fn rule_recursive_subtuples(&self, s: &ExponentTuple) -> Result<Option<Certificate>> {
        Self::validate(s)?;
        Ok(self.recursive_subtuples(s, self.budget.max_depth, true, &mut false))
    }

    /// Runs only the descent rule on `s` as given.
    pub fn rule_descend(&self, s: &ExponentTuple) -> Result<Option<Certificate>> {
        Self::validate(s)?;
        Ok(self.descend(s, self.budget.max_depth, true, &mut false))
    }

    /// Runs only the transfer rule on `s` as given.
    pub fn rule_transfer(&self, s: &ExponentTuple) -> Result<Option<Certificate>> {
        Self::validate(s)?;
        Ok(self.transfer(s, self.budget.max_depth, &mut false))
    }

    /// Every rule that fires on `s`, each evaluated on its own rather than in
    /// priority order. Used to audit that no two rules disagree.
    pub fn audit(&self, s: &ExponentTuple) -> Result<Vec<(RuleId, Status)>> {
        Self::validate(s)?;
        let mut out: Vec<(RuleId, Status)> = rules::all_arithmetic_rules(s)
            .into_iter()
            .map(|f| (f.rule, f.status))
            .collect();
        for cert in [
            self.rule_recursive_subtuples(s)?,
            self.rule_descend(s)?,
            self.rule_transfer(s)?,
        ]
        .into_iter()
        .flatten()
        {
            out.push((cert.rule, cert.status));
        }
        Ok(out)
    }

    /// `Δ_{M′}(S)` for `M′ = {j ∈ J(S) : S_j classified rigid}`.
    pub fn kernel_degree_bound(&self, s: &ExponentTuple) -> Result<KernelBound> {
        s.require_len(4)?;
        let mut rigid = IndexSet::new();
        let mut undecided = IndexSet::new();
        for j in s.j_set() {
            let sub = s.without(j)?;
            match self.classify(&sub)?.status {
                st if st.is_rigid() => {
                    rigid.insert(j);
                }
                Status::Unknown => {
                    undecided.insert(j);
                }
                _ => {}
            }
        }
        Ok(KernelBound {
            bound: s.delta(&rigid)?,
            rigid_subset: rigid,
            undecided,
        })
    }
}

/// Degree bound on kernels of homogeneous locally nilpotent derivations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelBound {
    pub bound: Natural,
    /// The `j ∈ J(S)` with `S_j` proven rigid.
    pub rigid_subset: IndexSet,
    /// The `j ∈ J(S)` whose `S_j` is UNKNOWN; when non-empty, `bound` may be
    /// a proper divisor of the true bound.
    pub undecided: IndexSet,
}

impl KernelBound {
    pub fn is_partial(&self) -> bool {
        !self.undecided.is_empty()
    }
}

fn firing_certificate(w: &ExponentTuple, f: &Firing) -> Certificate {
    Certificate::leaf(f.rule, w.clone(), &f.permutation, f.status)
}

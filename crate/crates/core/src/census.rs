//! Exhaustive classification of all sorted tuples in a box.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, Rational};
use crate::certificate::Certificate;
use crate::engine::{Budget, KnowledgeBase};
use crate::error::{Error, Result};
use crate::rules::{RuleId, Status};
use crate::tuple::ExponentTuple;

/// Rule column for UNKNOWN rows.
pub const NO_RULE: &str = "NONE";
/// Rule column for UNKNOWN rows whose search hit a budget limit.
pub const BUDGET_EXHAUSTED: &str = "BUDGET_EXHAUSTED";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusSpec {
    pub n: usize,
    pub min_exponent: u64,
    pub max_exponent: u64,
    pub budget: Budget,
    /// Worker threads; `None` uses rayon's global pool.
    pub workers: Option<usize>,
}

impl CensusSpec {
    pub fn new(n: usize, min_exponent: u64, max_exponent: u64) -> Self {
        CensusSpec {
            n,
            min_exponent,
            max_exponent,
            budget: Budget::default(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidRange(format!(
                "n must be at least 3, got {}",
                self.n
            )));
        }
        if self.min_exponent < 1 {
            return Err(Error::InvalidRange(
                "min exponent must be at least 1".into(),
            ));
        }
        if self.min_exponent > self.max_exponent {
            return Err(Error::InvalidRange(format!(
                "min exponent {} exceeds max exponent {}",
                self.min_exponent, self.max_exponent
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidRange("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of non-decreasing tuples, `C(width + n - 1, n)`.
    pub fn expected_rows(&self) -> u128 {
        let width = u128::from(self.max_exponent - self.min_exponent + 1);
        let n = self.n as u128;
        // running product stays an integer: C(width-1+k, k) at step k
        (1..=n).fold(1u128, |acc, k| acc * (width - 1 + k) / k)
    }
}

/// All non-decreasing tuples of length `n` over `[min, max]`, in
/// lexicographic order.
pub fn sorted_tuples(n: usize, min: u64, max: u64) -> Vec<ExponentTuple> {
    let mut out = Vec::new();
    if n == 0 || min > max {
        return out;
    }
    let mut cur = vec![min; n];
    loop {
        out.push(ExponentTuple::new(cur.clone()).expect("entries are positive"));
        let Some(k) = (0..n).rev().find(|&k| cur[k] < max) else {
            return out;
        };
        let v = cur[k] + 1;
        cur[k..].iter_mut().for_each(|x| *x = v);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub tuple: ExponentTuple,
    pub status: Status,
    pub rule: Option<RuleId>,
    pub budget_exhausted: bool,
    pub cotype: usize,
    pub in_tn: bool,
    pub reciprocal_sum: Rational,
    pub certificate_id: Option<String>,
    pub certificate: Option<Certificate>,
}

impl CensusRow {
    pub fn rule_column(&self) -> &'static str {
        match self.rule {
            Some(r) => r.as_str(),
            None if self.budget_exhausted => BUDGET_EXHAUSTED,
            None => NO_RULE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusSummary {
    pub rows: usize,
    pub by_status: BTreeMap<Status, usize>,
    /// Keyed by the rule column, so UNKNOWN rows land under `NONE` or
    /// `BUDGET_EXHAUSTED`.
    pub by_rule: BTreeMap<String, usize>,
    pub unknown: usize,
    pub budget_exhausted: usize,
    pub frontier: Vec<ExponentTuple>,
}

#[derive(Debug, Clone)]
pub struct CensusReport {
    pub spec: CensusSpec,
    pub rows: Vec<CensusRow>,
    pub summary: CensusSummary,
}

fn certificate_id(row: usize) -> String {
    format!("C{:07}", row + 1)
}

/// Classifies every sorted tuple of the box with a shared memo. Rows come
/// back in enumeration order whatever the worker count.
pub fn run_census(spec: &CensusSpec) -> Result<CensusReport> {
    spec.validate()?;
    let kb = KnowledgeBase::new(spec.budget);
    run_census_with(spec, &kb)
}

/// As [`run_census`], reusing an existing knowledge base.
pub fn run_census_with(spec: &CensusSpec, kb: &KnowledgeBase) -> Result<CensusReport> {
    spec.validate()?;
    let tuples = sorted_tuples(spec.n, spec.min_exponent, spec.max_exponent);
    let classify_all = || -> Result<Vec<CensusRow>> {
        tuples
            .par_iter()
            .enumerate()
            .map(|(k, t)| {
                let c = kb.classify(t)?;
                let decided = c.certificate.is_some();
                Ok(CensusRow {
                    tuple: t.clone(),
                    status: c.status,
                    rule: c.rule(),
                    budget_exhausted: c.budget_exhausted,
                    cotype: t.cotype(),
                    in_tn: t.in_tn(),
                    reciprocal_sum: t.full_reciprocal_sum(),
                    certificate_id: decided.then(|| certificate_id(k)),
                    certificate: c.certificate,
                })
            })
            .collect()
    };
    let rows = match spec.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidRange(format!("cannot start {w} workers: {e}")))?
            .install(classify_all)?,
        None => classify_all()?,
    };
    let summary = summarize(&rows);
    Ok(CensusReport {
        spec: spec.clone(),
        rows,
        summary,
    })
}

pub fn summarize(rows: &[CensusRow]) -> CensusSummary {
    let mut by_status = BTreeMap::new();
    let mut by_rule = BTreeMap::new();
    let mut frontier = Vec::new();
    let mut budget_exhausted = 0;
    for r in rows {
        *by_status.entry(r.status).or_insert(0) += 1;
        *by_rule.entry(r.rule_column().to_string()).or_insert(0) += 1;
        if r.status == Status::Unknown {
            frontier.push(r.tuple.clone());
            budget_exhausted += usize::from(r.budget_exhausted);
        }
    }
    CensusSummary {
        rows: rows.len(),
        by_status,
        by_rule,
        unknown: frontier.len(),
        budget_exhausted,
        frontier,
    }
}

/// Semicolon-separated rows with a header line.
pub fn write_csv<W: Write>(rows: &[CensusRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().delimiter(b';').from_writer(out);
    let fmt_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "tuple",
        "status",
        "rule",
        "cotype",
        "in_Tn",
        "reciprocal_sum",
        "certificate_id",
    ])
    .map_err(fmt_err)?;
    for r in rows {
        w.write_record([
            r.tuple.to_string(),
            r.status.to_string(),
            r.rule_column().to_string(),
            r.cotype.to_string(),
            r.in_tn.to_string(),
            arith::render_rational(&r.reciprocal_sum),
            r.certificate_id.clone().unwrap_or_default(),
        ])
        .map_err(fmt_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CensusRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[derive(Serialize)]
struct SidecarEntry<'a> {
    certificate_id: &'a str,
    certificate: &'a Certificate,
}

/// One JSON object per line: `{"certificate_id": ..., "certificate": ...}`.
pub fn write_certificates<W: Write>(rows: &[CensusRow], mut out: W) -> Result<()> {
    for r in rows {
        if let (Some(id), Some(cert)) = (&r.certificate_id, &r.certificate) {
            let line = serde_json::to_string(&SidecarEntry {
                certificate_id: id,
                certificate: cert,
            })
            .map_err(|e| Error::Format(e.to_string()))?;
            writeln!(out, "{line}")?;
        }
    }
    Ok(())
}

/// Parses a certificate sidecar back into `(id, certificate)` pairs.
pub fn read_certificates(text: &str) -> Result<Vec<(String, Certificate)>> {
    #[derive(serde::Deserialize)]
    struct Entry {
        certificate_id: String,
        certificate: Certificate,
    }
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            serde_json::from_str::<Entry>(l)
                .map(|e| (e.certificate_id, e.certificate))
                .map_err(|e| Error::Format(e.to_string()))
        })
        .collect()
}

impl CensusReport {
    /// Plain `key: value` block. Contains nothing that depends on timing or
    /// worker count.
    pub fn summary_text(&self) -> String {
        let s = &self.summary;
        let mut out = String::new();
        let _ = writeln!(out, "census");
        let _ = writeln!(out, "  n: {}", self.spec.n);
        let _ = writeln!(out, "  min_exponent: {}", self.spec.min_exponent);
        let _ = writeln!(out, "  max_exponent: {}", self.spec.max_exponent);
        let _ = writeln!(out, "  budget: {}", self.spec.budget);
        let _ = writeln!(out, "  rows: {}", s.rows);
        let _ = writeln!(out, "statuses");
        for st in Status::ALL {
            let _ = writeln!(
                out,
                "  {st}: {}",
                s.by_status.get(&st).copied().unwrap_or(0)
            );
        }
        let _ = writeln!(out, "rules");
        for (rule, count) in &s.by_rule {
            let _ = writeln!(out, "  {rule}: {count}");
        }
        let _ = writeln!(out, "unknown: {}", s.unknown);
        let _ = writeln!(out, "budget_exhausted: {}", s.budget_exhausted);
        let _ = writeln!(out, "frontier");
        for t in &s.frontier {
            let _ = writeln!(out, "  {t}");
        }
        out
    }

    pub fn csv(&self) -> String {
        csv_string(&self.rows)
    }
}

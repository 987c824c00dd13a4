//! `pbrig`: classify Pham-Brieskorn exponent tuples from the command line.
//!
//! Exit status is 0 whenever a command ran, UNKNOWN answers included, and 2
//! for any usage or input error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pbrig_core::arith::render_rational;
use pbrig_core::census::{self, CensusSpec};
use pbrig_core::tuple::{one_based, render_index_set};
use pbrig_core::{
    proj_classes, Budget, Classification, Error, ExponentTuple, InvariantReport, KnowledgeBase,
    Natural, ProjReport,
};

#[derive(Parser, Debug)]
#[command(
    name = "pbrig",
    version,
    about = "Rigidity classification for Pham-Brieskorn rings"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    /// Maximum recursion depth (default 6).
    #[arg(long, global = true)]
    depth: Option<u32>,
    /// Divisor witnesses tried per index when descending (default 32).
    #[arg(long, global = true)]
    witnesses: Option<usize>,
    /// Transfer siblings tried per index (default 16).
    #[arg(long, global = true)]
    siblings: Option<usize>,
    /// Print timing and memo statistics to stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Structured,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify one tuple and print its certificate.
    Classify {
        /// At least three positive integers.
        #[arg(required = true, allow_negative_numbers = true, num_args = 1..)]
        exponents: Vec<String>,
    },
    /// Print the arithmetic invariants of a tuple.
    Invariants {
        /// At least two positive integers.
        #[arg(required = true, allow_negative_numbers = true, num_args = 1..)]
        exponents: Vec<String>,
    },
    /// Classify every sorted tuple with entries in [min, max].
    Census {
        #[command(flatten)]
        range: RangeOpts,
        /// Write PREFIX.csv, PREFIX.summary.txt and PREFIX.certificates.jsonl
        /// instead of printing to stdout.
        #[arg(long, value_name = "PREFIX")]
        out: Option<PathBuf>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Group the sorted tuples of a box into Proj-isomorphism classes.
    ProjClasses {
        #[command(flatten)]
        range: RangeOpts,
        /// Only print classes with more than one member.
        #[arg(long)]
        nontrivial: bool,
    },
}

#[derive(Args, Debug)]
struct RangeOpts {
    /// Tuple length.
    #[arg(long)]
    n: usize,
    /// Largest exponent.
    #[arg(long)]
    max: u64,
    /// Smallest exponent.
    #[arg(long, default_value_t = 1)]
    min: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn budget(g: &GlobalOpts) -> Result<Budget, Error> {
    let mut b = Budget::from_env()?;
    if let Some(d) = g.depth {
        b.max_depth = d;
    }
    if let Some(w) = g.witnesses {
        b.max_divisor_witnesses = w;
    }
    if let Some(s) = g.siblings {
        b.max_transfer_siblings = s;
    }
    Ok(b)
}

fn parse_exponents(args: &[String]) -> Result<ExponentTuple, Error> {
    let values = args
        .iter()
        .map(|a| {
            a.trim()
                .parse::<i128>()
                .map_err(|_| Error::Format(format!("`{a}` is not an integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for (position, &value) in values.iter().enumerate() {
        if value <= 0 {
            return Err(Error::NonPositive { position, value });
        }
        if value > i128::from(u64::MAX) {
            return Err(Error::Format(format!(
                "exponent {value} does not fit in 64 bits"
            )));
        }
    }
    ExponentTuple::new(values.into_iter().map(|v| v as u64).collect())
}

fn run(cli: Cli) -> Result<String, Error> {
    let g = &cli.global;
    let b = budget(g)?;
    let start = Instant::now();
    let kb = KnowledgeBase::new(b);
    let out = match &cli.command {
        Command::Classify { exponents } => {
            let s = parse_exponents(exponents)?;
            let c = kb.classify(&s)?;
            render_classification(&c, b, g.format)
        }
        Command::Invariants { exponents } => {
            let s = parse_exponents(exponents)?;
            let report = InvariantReport::compute(&s)?;
            let bound = if s.len() >= 4 {
                Some(kb.kernel_degree_bound(&s)?)
            } else {
                None
            };
            render_invariants(&report, bound.as_ref(), g.format)
        }
        Command::Census {
            range,
            out,
            workers,
        } => {
            let spec = CensusSpec {
                n: range.n,
                min_exponent: range.min,
                max_exponent: range.max,
                budget: b,
                workers: *workers,
            };
            let report = census::run_census_with(&spec, &kb)?;
            match out {
                Some(prefix) => {
                    let path = |ext: &str| {
                        let mut p = prefix.clone().into_os_string();
                        p.push(ext);
                        PathBuf::from(p)
                    };
                    fs::write(path(".csv"), report.csv())?;
                    fs::write(path(".summary.txt"), report.summary_text())?;
                    let mut certs = Vec::new();
                    census::write_certificates(&report.rows, &mut certs)?;
                    fs::write(path(".certificates.jsonl"), certs)?;
                    report.summary_text()
                }
                None => match g.format {
                    Format::Csv => report.csv(),
                    Format::Human => report.summary_text(),
                    Format::Structured => {
                        let s = &report.summary;
                        let v = json!({
                            "n": spec.n,
                            "min_exponent": spec.min_exponent,
                            "max_exponent": spec.max_exponent,
                            "budget": b.to_string(),
                            "rows": s.rows,
                            "statuses": s.by_status.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
                            "rules": s.by_rule,
                            "unknown": s.unknown,
                            "budget_exhausted": s.budget_exhausted,
                            "frontier": s.frontier,
                        });
                        pretty(&v)
                    }
                },
            }
        }
        Command::ProjClasses { range, nontrivial } => {
            let spec = CensusSpec::new(range.n, range.min, range.max);
            spec.validate()?;
            let universe = census::sorted_tuples(range.n, range.min, range.max);
            let mut report = proj_classes(&universe, &kb)?;
            if *nontrivial {
                report.classes.retain(|c| c.members.len() > 1);
            }
            render_proj(&report, g.format)
        }
    };
    if g.verbose > 0 {
        eprintln!(
            "budget {b}; {} memo entries; {:.3}s",
            kb.memo_len(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(out)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn rule_column(c: &Classification) -> String {
    match c.rule() {
        Some(r) => r.to_string(),
        None if c.budget_exhausted => census::BUDGET_EXHAUSTED.to_string(),
        None => census::NO_RULE.to_string(),
    }
}

fn render_classification(c: &Classification, b: Budget, format: Format) -> String {
    let chain: Vec<String> = c
        .certificate
        .as_ref()
        .map(|cert| cert.rule_chain().iter().map(|r| r.to_string()).collect())
        .unwrap_or_default();
    match format {
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(out, "tuple: {}", c.tuple);
            let _ = writeln!(out, "status: {}", c.status);
            let _ = writeln!(out, "rule: {}", rule_column(c));
            let _ = writeln!(out, "budget: {b}");
            match &c.certificate {
                Some(cert) => {
                    let _ = writeln!(out, "rule chain: {}", chain.join(" > "));
                    let _ = writeln!(out, "certificate:");
                    out.push_str(&cert.to_json_pretty());
                    out.push('\n');
                }
                None if c.budget_exhausted => {
                    let _ = writeln!(
                        out,
                        "undecided: the search hit the budget; a larger budget may decide it"
                    );
                }
                None => {
                    let _ = writeln!(out, "undecided: no implemented criterion applies");
                }
            }
            out
        }
        Format::Structured => pretty(&json!({
            "tuple": c.tuple,
            "status": c.status,
            "rule": rule_column(c),
            "rule_chain": chain,
            "budget_exhausted": c.budget_exhausted,
            "certificate": c.certificate,
        })),
        Format::Csv => {
            let mut out = String::from("tuple;status;rule;cotype;in_Tn;reciprocal_sum\n");
            let _ = writeln!(
                out,
                "{};{};{};{};{};{}",
                c.tuple,
                c.status,
                rule_column(c),
                c.tuple.cotype(),
                c.tuple.in_tn(),
                render_rational(&c.tuple.full_reciprocal_sum())
            );
            out
        }
    }
}

fn naturals(v: &[Natural]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", inner.join(","))
}

fn render_invariants(
    r: &InvariantReport,
    bound: Option<&pbrig_core::KernelBound>,
    format: Format,
) -> String {
    let mut fields: Vec<(&str, String, Value)> = vec![
        ("tuple", r.tuple.to_string(), json!(r.tuple)),
        ("lcm", r.lcm.to_string(), json!(r.lcm.to_string())),
        ("gcd", r.gcd.to_string(), json!(r.gcd)),
        (
            "normalization",
            r.normalization.to_string(),
            json!(r.normalization),
        ),
        (
            "bar",
            naturals(&r.bar),
            json!(r.bar.iter().map(|x| x.to_string()).collect::<Vec<_>>()),
        ),
        (
            "degrees",
            naturals(r.degrees()),
            json!(r
                .degrees()
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()),
        ),
        ("type", r.type_val.to_string(), json!(r.type_val)),
        ("cotype", r.cotype_val.to_string(), json!(r.cotype_val)),
        ("J", render_index_set(&r.j_set), json!(one_based(&r.j_set))),
        ("I", render_index_set(&r.i_set), json!(one_based(&r.i_set))),
        (
            "J*",
            render_index_set(&r.j_star),
            json!(one_based(&r.j_star)),
        ),
        (
            "g",
            format!(
                "({})",
                r.g_vec
                    .iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            json!(r.g_vec),
        ),
        ("in_Tn", r.in_tn.to_string(), json!(r.in_tn)),
        (
            "delta_J",
            r.delta_j.to_string(),
            json!(r.delta_j.to_string()),
        ),
        (
            "reciprocal_sum",
            render_rational(&r.reciprocal_sum),
            json!(render_rational(&r.reciprocal_sum)),
        ),
    ];
    if let Some(kb) = bound {
        fields.push((
            "kernel_degree_bound",
            kb.bound.to_string(),
            json!(kb.bound.to_string()),
        ));
        fields.push((
            "kernel_bound_subset",
            render_index_set(&kb.rigid_subset),
            json!(one_based(&kb.rigid_subset)),
        ));
        fields.push((
            "kernel_bound_partial",
            kb.is_partial().to_string(),
            json!(kb.is_partial()),
        ));
    }
    match format {
        Format::Human => fields
            .iter()
            .map(|(k, h, _)| format!("{k}: {h}\n"))
            .collect(),
        Format::Csv => {
            let mut out = String::from("field;value\n");
            for (k, h, _) in &fields {
                let _ = writeln!(out, "{k};{h}");
            }
            out
        }
        Format::Structured => pretty(&Value::Object(
            fields
                .into_iter()
                .map(|(k, _, v)| (k.to_string(), v))
                .collect(),
        )),
    }
}

fn render_proj(report: &ProjReport, format: Format) -> String {
    match format {
        Format::Structured => pretty(&serde_json::to_value(report).expect("report serializes")),
        Format::Csv => {
            let mut out = String::from("class;tuple;status;mixed\n");
            for (k, c) in report.classes.iter().enumerate() {
                for (m, s) in c.members.iter().zip(&c.statuses) {
                    let _ = writeln!(out, "{};{m};{s};{}", k + 1, c.mixed);
                }
            }
            out
        }
        Format::Human => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{} classes (relative to the enumerated universe)",
                report.classes.len()
            );
            for (k, c) in report.classes.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "class {}: {} members{}",
                    k + 1,
                    c.members.len(),
                    if c.mixed { ", mixed" } else { "" }
                );
                for (m, s) in c.members.iter().zip(&c.statuses) {
                    let _ = writeln!(out, "  {m} {s}");
                }
                for e in &c.edges {
                    let perm: Vec<String> = e.permutation.iter().map(usize::to_string).collect();
                    let _ = writeln!(
                        out,
                        "  edge {} <{} {} k={} perm=({})",
                        e.from,
                        e.index,
                        e.to,
                        e.k,
                        perm.join(",")
                    );
                }
            }
            out
        }
    }
}

//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeSet, HashMap};
use std::panic::{self, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use pbrig_core::census::read_certificates;
use pbrig_core::rules::{self, RuleId};
use pbrig_core::{replay, ExponentTuple, IndexSet, KnowledgeBase, Natural, ProjReport, Status};

type Verdict = Result<String, String>;

fn t(v: &[u64]) -> ExponentTuple {
    ExponentTuple::new(v.to_vec()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pbrig(args: &[&str]) -> Result<String, String> {
    let o = Command::new(env!("CARGO_BIN_EXE_pbrig"))
        .args(args)
        .env_remove("PBRIG_BUDGET")
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.code() != Some(0) {
        return Err(format!(
            "pbrig {} exited {:?}: {}",
            args.join(" "),
            o.status.code(),
            String::from_utf8_lossy(&o.stderr)
        ));
    }
    String::from_utf8(o.stdout).map_err(|e| e.to_string())
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm_all(v: &[u64]) -> u128 {
    v.iter().fold(1u128, |l, &a| {
        let a = a as u128;
        let mut x = l;
        let mut y = a;
        while y != 0 {
            (x, y) = (y, x % y);
        }
        l / x * a
    })
}

/// Σ 1/a as num/den over the lcm.
fn recip_sum(v: &[u64]) -> (u128, u128) {
    let l = lcm_all(v);
    (v.iter().map(|&a| l / a as u128).sum(), l)
}

fn sum_at_most(v: &[u64], p: u128, q: u128) -> bool {
    let (num, den) = recip_sum(v);
    num * q <= p * den
}

fn sum_below(v: &[u64], p: u128, q: u128) -> bool {
    let (num, den) = recip_sum(v);
    num * q < p * den
}

fn in_tn(v: &[u64]) -> bool {
    v.iter().all(|&a| a >= 2) && v.iter().filter(|&&a| a == 2).count() <= 1
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let kb = KnowledgeBase::default();
    let c = kb.classify(&t(&[2, 3, 3, 2])).unwrap();
    ensure(c.status == Status::NonRigid, || {
        format!("(2,3,3,2) gave {}", c.status)
    })?;
    let c = kb.classify(&t(&[10, 3, 3, 4])).unwrap();
    ensure(
        c.status == Status::Rigid && c.rule() == Some(RuleId::CotypeGe2N4),
        || format!("(10,3,3,4) gave {} via {:?}", c.status, c.rule()),
    )?;
    let c = kb.classify(&t(&[2, 3, 3, 4])).unwrap();
    ensure(c.status == Status::Unknown, || {
        format!("(2,3,3,4) gave {}", c.status)
    })?;
    let c = kb.classify(&t(&[2, 5, 7, 3, 3, 3])).unwrap();
    let cert = c.certificate.ok_or("(2,5,7,3,3,3) undecided")?;
    ensure(cert.rule == RuleId::RecursiveSubtuples, || {
        format!("(2,5,7,3,3,3) via {}", cert.rule)
    })?;
    let kids: BTreeSet<Vec<u64>> = cert
        .children
        .iter()
        .map(|c| c.tuple.entries().to_vec())
        .collect();
    let want: BTreeSet<Vec<u64>> = [vec![7, 3, 3, 3], vec![5, 3, 3, 3], vec![2, 3, 3, 3]].into();
    ensure(kids == want && cert.children.len() == 3, || {
        format!("children {kids:?}")
    })?;
    ensure(cert.children.iter().all(|c| c.status.is_rigid()), || {
        "a child is not rigid".into()
    })?;
    ensure(replay(&cert), || {
        "recursive certificate does not replay".into()
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("4 examples in {elapsed:?}"))
}

fn criterion_2() -> Verdict {
    let kb = KnowledgeBase::default();
    for a in 4..=7u64 {
        let s = t(&[a; 4]);
        ensure(!sum_at_most(&[a; 4], 1, 2), || {
            format!("sum for a={a} is at most 1/2")
        })?;
        ensure(!rules::low_sum_holds(&s), || {
            format!("LOW_SUM fires for a={a}")
        })?;
        let c = kb.classify(&s).unwrap();
        ensure(
            c.status == Status::Rigid && c.rule() == Some(RuleId::EqualExponents),
            || format!("a={a} gave {} via {:?}", c.status, c.rule()),
        )?;
    }
    Ok("(a,a,a,a) for a = 4..7 rigid via EQUAL_EXPONENTS".into())
}

/// Invariant checks for one tuple, with J and g taken from the definitions.
fn invariant_checks(v: &[u64]) -> Result<(), String> {
    let s = t(v);
    let n = v.len();
    let others = |i: usize| -> Vec<u64> {
        v.iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, &a)| a)
            .collect()
    };
    let j: IndexSet = (0..n)
        .filter(|&i| lcm_all(&others(i)) % v[i] as u128 != 0)
        .collect();
    ensure(s.j_set() == j, || format!("{s}: J mismatch"))?;

    let bar = s.bar();
    ensure(bar.type_set().1 == j.len(), || {
        format!("{s}: type(bar) != cotype")
    })?;
    ensure(bar.j_star() == j, || format!("{s}: J*(bar) != J"))?;
    ensure(bar.is_normal(), || format!("{s}: bar not normal"))?;
    ensure(bar.bar() == s.normalization(), || {
        format!("{s}: bar(bar) != normalization")
    })?;

    for i in 0..n {
        let g = gcd(v[i], lcm_all(&others(i)) as u64);
        // j ∈ J(S) iff some S* <ⁱ S; the candidates are the divisors below a_i
        let below = (1..v[i]).any(|d| s.with_entry(i, d).lt_at(&s, i).unwrap());
        ensure(below == j.contains(&i), || {
            format!("{s}: minimality at {}", i + 1)
        })?;
        // S ≤ⁱ S' gives g_i(S) = g_i(S')
        for k in 1..=4u64 {
            let up = s.with_entry(i, v[i] * k);
            if s.leq_at(&up, i).unwrap() {
                ensure(up.g(i).unwrap() == g, || {
                    format!("{s} ≤{} {up}: g differs", i + 1)
                })?;
            }
        }
    }

    for mask in 0u32..(1 << n) {
        let m: IndexSet = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        let one = s.delta(&m).unwrap() == Natural::from(1u32);
        ensure(one == m.is_disjoint(&j), || {
            format!("{s}: Δ_M = 1 mismatch for mask {mask:b}")
        })?;
    }
    Ok(())
}

fn criterion_3() -> Verdict {
    let start = Instant::now();
    let mut count = 0usize;
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()) as u64;
    for n in 3..=5u32 {
        let total = 10u64.pow(n);
        let decode = |code: u64| -> Vec<u64> {
            let mut x = code;
            (0..n)
                .map(|_| {
                    let d = x % 10 + 1;
                    x /= 10;
                    d
                })
                .collect()
        };
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    scope.spawn(move || {
                        (w..total)
                            .step_by(threads as usize)
                            .try_for_each(|c| invariant_checks(&decode(c)))
                    })
                })
                .collect();
            handles.into_iter().try_for_each(|h| h.join().unwrap())
        })?;
        count += total as usize;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("{count} tuples took {elapsed:?}")
    })?;
    Ok(format!("{count} tuples in {elapsed:?}"))
}

fn parse_tuple(cell: &str) -> Vec<u64> {
    cell.trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect()
}

fn criterion_4() -> Verdict {
    let csv = pbrig(&["--format", "csv", "census", "--n", "3", "--max", "50"])?;
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(';').collect();
        let v = parse_tuple(cols[0]);
        let expected = if !in_tn(&v) {
            "NON_RIGID"
        } else if sum_at_most(&v, 1, 1) {
            "STABLY_RIGID"
        } else {
            "RIGID"
        };
        ensure(cols[1] != "UNKNOWN", || format!("{} is UNKNOWN", cols[0]))?;
        ensure(cols[1] == expected, || {
            format!("{}: {} but expected {expected}", cols[0], cols[1])
        })?;
        rows += 1;
    }
    ensure(rows == 22100, || format!("{rows} rows"))?;
    Ok(format!("{rows} rows, none UNKNOWN, all match"))
}

fn criterion_5() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let prefix = dir.path().join("n4");
    pbrig(&[
        "census",
        "--n",
        "4",
        "--max",
        "10",
        "--out",
        prefix.to_str().unwrap(),
    ])?;
    let csv = std::fs::read_to_string(dir.path().join("n4.csv")).map_err(|e| e.to_string())?;
    let sidecar = std::fs::read_to_string(dir.path().join("n4.certificates.jsonl"))
        .map_err(|e| e.to_string())?;
    let certs: HashMap<String, _> = read_certificates(&sidecar)
        .map_err(|e| e.to_string())?
        .into_iter()
        .collect();

    let kb = KnowledgeBase::default();
    let mut replayed = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(';').collect();
        let s = t(&parse_tuple(cols[0]));
        // every rule that fires on its own must agree
        let audit = kb.audit(&s).unwrap();
        let rigid = audit.iter().any(|(_, st)| st.is_rigid());
        let non = audit.iter().any(|(_, st)| *st == Status::NonRigid);
        ensure(!(rigid && non), || {
            format!("{s}: contradictory rules {audit:?}")
        })?;
        if cols[6].is_empty() {
            ensure(cols[1] == "UNKNOWN", || {
                format!("{s}: decided row without certificate")
            })?;
            continue;
        }
        let cert = certs
            .get(cols[6])
            .ok_or_else(|| format!("{}: certificate missing", cols[6]))?;
        ensure(cert.status.to_string() == cols[1], || {
            format!("{s}: certificate status differs")
        })?;
        ensure(replay(cert), || {
            format!("{s}: certificate {} does not replay", cols[6])
        })?;
        replayed += 1;
    }
    ensure(replayed == certs.len(), || {
        "sidecar has extra certificates".into()
    })?;
    Ok(format!(
        "{replayed}/{} certificates replay, no contradictions",
        certs.len()
    ))
}

fn criterion_6() -> Verdict {
    let kb = KnowledgeBase::default();
    let mut cohj = 0;
    for a in 3..=60u64 {
        let top = 60 / a;
        for k1 in 1..=top {
            for k2 in k1..=top {
                for k3 in k2..=top {
                    for k4 in k3..=top {
                        let ks = [k1, k2, k3, k4];
                        let coprime = (0..4).all(|x| (x + 1..4).all(|y| gcd(ks[x], ks[y]) == 1));
                        if !coprime {
                            continue;
                        }
                        let v: Vec<u64> = ks.iter().map(|k| a * k).collect();
                        let c = kb.classify(&t(&v)).unwrap();
                        ensure(c.status.is_rigid(), || format!("{v:?} gave {}", c.status))?;
                        cohj += 1;
                    }
                }
            }
        }
    }

    let priority = |r: RuleId| RuleId::ALL.iter().position(|x| *x == r).unwrap();
    let mut half = 0;
    for a in 1..=30u64 {
        for b in 1..=30u64 {
            for c in b..=30 {
                for d in c..=30 {
                    let l = lcm_all(&[b, c, d]);
                    if l % a as u128 == 0 || !sum_below(&[b, c, d], 1, 2) {
                        continue;
                    }
                    let v = [a, b, c, d];
                    let r = kb.classify(&t(&v)).unwrap();
                    let rule = r.rule().ok_or_else(|| format!("{v:?} undecided"))?;
                    ensure(
                        r.status.is_rigid() && priority(rule) <= priority(RuleId::ISum),
                        || format!("{v:?} gave {} via {rule}", r.status),
                    )?;
                    half += 1;
                }
            }
        }
    }
    Ok(format!(
        "{cohj} scaled coprime tuples rigid; {half} I-sum tuples rigid by I_SUM or earlier"
    ))
}

fn criterion_7() -> Verdict {
    let json = pbrig(&[
        "--format",
        "structured",
        "proj-classes",
        "--n",
        "4",
        "--max",
        "10",
    ])?;
    let report: ProjReport = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let targets = [t(&[2, 3, 3, 2]), t(&[2, 3, 3, 4]), t(&[10, 3, 3, 4])];
    let holding: Vec<_> = report
        .classes
        .iter()
        .filter(|c| targets.iter().any(|s| c.contains(s)))
        .collect();
    ensure(holding.len() == 1, || {
        format!("targets spread over {} classes", holding.len())
    })?;
    let class = holding[0];
    ensure(targets.iter().all(|s| class.contains(s)), || {
        "a target is missing".into()
    })?;
    let st: Vec<Status> = targets
        .iter()
        .map(|s| class.status_of(s).unwrap())
        .collect();
    ensure(
        st == [Status::NonRigid, Status::Unknown, Status::Rigid],
        || format!("statuses {st:?}"),
    )?;
    ensure(class.mixed, || "class not flagged mixed".into())?;
    let canon = |s: &ExponentTuple| s.canonical().0;
    let edge_k = |from: &ExponentTuple, to: &ExponentTuple| {
        class
            .edges
            .iter()
            .find(|e| canon(&e.from) == canon(from) && canon(&e.to) == canon(to))
            .map(|e| e.k)
    };
    ensure(edge_k(&targets[0], &targets[1]) == Some(2), || {
        "no k=2 edge (2,3,3,2)->(2,3,3,4)".into()
    })?;
    ensure(edge_k(&targets[1], &targets[2]) == Some(5), || {
        "no k=5 edge (2,3,3,4)->(10,3,3,4)".into()
    })?;
    ensure(class.edges.iter().all(|e| e.verify()), || {
        "an edge fails verification".into()
    })?;
    Ok(format!(
        "class of {} members, mixed, edges k=2 and k=5",
        class.members.len()
    ))
}

fn criterion_8() -> Verdict {
    let mut outputs = Vec::new();
    for workers in ["1", "3", "8"] {
        outputs.push(pbrig(&[
            "--format",
            "csv",
            "census",
            "--n",
            "4",
            "--max",
            "12",
            "--workers",
            workers,
        ])?);
    }
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
        "CSV differs between worker counts".into()
    })?;
    Ok(format!(
        "{} bytes identical for 1, 3 and 8 workers",
        outputs[0].len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("worked-example regression", criterion_1),
        ("equal exponents beyond the low-sum bound", criterion_2),
        ("exhaustive invariant oracle suite", criterion_3),
        ("three-variable totality", criterion_4),
        ("soundness and replay", criterion_5),
        ("cotype and I-sum coverage", criterion_6),
        ("Proj classes", criterion_7),
        ("determinism across worker counts", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("PASS  {}. {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

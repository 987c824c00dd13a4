mod common;

use common::*;
use pbrig_core::census::sorted_tuples;
use pbrig_core::{proj_classes, proj_edges, KnowledgeBase, ProjReport, Status};

#[test]
fn chain_universe_forms_one_mixed_class() {
    let u = [t(&[2, 3, 3, 2]), t(&[2, 3, 3, 4]), t(&[10, 3, 3, 4])];
    let r = proj_classes(&u, &KnowledgeBase::default()).unwrap();
    assert!(r.relative_to_universe);
    assert_eq!(r.classes.len(), 1);
    let c = &r.classes[0];
    assert_eq!(
        c.statuses,
        vec![Status::NonRigid, Status::Unknown, Status::Rigid]
    );
    assert!(c.mixed);
    let ks: Vec<(usize, u64)> = c.edges.iter().map(|e| (e.index, e.k)).collect();
    assert_eq!(ks, vec![(4, 2), (1, 5)]);
}

#[test]
fn unrelated_equal_tuples_stay_apart() {
    let u = [t(&[3, 3, 3, 3]), t(&[5, 5, 5, 5])];
    assert!(proj_edges(&u).unwrap().is_empty());
    assert_eq!(
        proj_classes(&u, &KnowledgeBase::default())
            .unwrap()
            .classes
            .len(),
        2
    );
}

/// Edge oracle: all ordered pairs and all rearrangements of the target,
/// straight from the definition of `≤ⁱ`.
fn oracle_pairs(universe: &[Vec<u64>]) -> Vec<(usize, usize)> {
    let perms4: Vec<[usize; 4]> = (0..24)
        .map(|mut k| {
            let mut pool = vec![0, 1, 2, 3];
            let mut p = [0; 4];
            for (slot, f) in [6, 2, 1, 1].iter().enumerate() {
                p[slot] = pool.remove(k / f);
                k %= f;
            }
            p
        })
        .collect();
    let mut out = vec![];
    for (a, s) in universe.iter().enumerate() {
        for (b, u) in universe.iter().enumerate() {
            if a == b {
                continue;
            }
            let related = perms4.iter().any(|p| {
                let w: Vec<u64> = p.iter().map(|&k| u[k]).collect();
                (0..4).any(|i| w != *s && leq_at(s, &w, i))
            });
            if related {
                out.push((a, b));
            }
        }
    }
    out
}

#[test]
fn edges_match_oracle_on_small_box() {
    let universe: Vec<Vec<u64>> = sorted_tuples(4, 1, 6)
        .iter()
        .map(|s| s.entries().to_vec())
        .collect();
    let tuples: Vec<_> = universe.iter().map(|v| t(v)).collect();
    let edges = proj_edges(&tuples).unwrap();
    let mut got: Vec<(usize, usize)> = edges
        .iter()
        .map(|e| {
            let a = tuples.iter().position(|x| *x == e.from).unwrap();
            let b = tuples.iter().position(|x| *x == e.to).unwrap();
            (a, b)
        })
        .collect();
    got.sort();
    assert_eq!(got, oracle_pairs(&universe));
    for e in &edges {
        assert!(e.verify());
        let aligned = e.aligned_to();
        assert_eq!(
            e.from.entries()[e.index - 1] * e.k,
            aligned.entries()[e.index - 1]
        );
        // antisymmetry: no edge back
        assert!(!edges.iter().any(|f| f.from == e.to && f.to == e.from));
    }
}

#[test]
fn tiny_boxes() {
    let kb = KnowledgeBase::default();
    // entries 1 and 2 only: 1 ≤ 2 steps connect everything with a 1
    let r = proj_classes(&sorted_tuples(4, 1, 2), &kb).unwrap();
    let total: usize = r.classes.iter().map(|c| c.members.len()).sum();
    assert_eq!(total, 5);
    // three variables: statuses are all decided
    let r = proj_classes(&sorted_tuples(3, 1, 3), &kb).unwrap();
    assert!(r
        .classes
        .iter()
        .flat_map(|c| &c.statuses)
        .all(|s| *s != Status::Unknown));
}

#[test]
fn report_roundtrips_through_json() {
    let r = proj_classes(&sorted_tuples(4, 2, 5), &KnowledgeBase::default()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: ProjReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn classes_partition_the_universe() {
    let u = sorted_tuples(4, 1, 10);
    let r = proj_classes(&u, &KnowledgeBase::default()).unwrap();
    let mut members: Vec<_> = r.classes.iter().flat_map(|c| c.members.clone()).collect();
    members.sort_by(|a, b| a.entries().cmp(b.entries()));
    assert_eq!(members, u);
    for c in &r.classes {
        assert_eq!(c.members.len(), c.statuses.len());
        // a connected class of m members needs at least m - 1 edges
        assert!(c.edges.len() + 1 >= c.members.len());
        assert_eq!(c.mixed, pbrig_core::proj::is_mixed(&c.statuses));
    }
}

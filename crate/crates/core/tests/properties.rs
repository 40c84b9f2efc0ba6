mod common;

use proptest::prelude::*;

use delpezzo::cris::{Permutation, PermGroup};
use delpezzo::lattice::{dot, reflect};
use delpezzo::types::{degree_data, enumerate_types, parse_type_name};

fn vector(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, n)
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle().prop_map(Permutation)
}

proptest! {
    #[test]
    fn pairing_is_symmetric_bilinear(u in vector(9), v in vector(9), w in vector(9), a in -5i64..=5) {
        let au_w: Vec<i64> = u.iter().zip(&w).map(|(x, y)| a * x + y).collect();
        prop_assert_eq!(dot(&u, &v), dot(&v, &u));
        prop_assert_eq!(dot(&au_w, &v), a * dot(&u, &v) + dot(&w, &v));
    }

    #[test]
    fn reflections_are_isometric_involutions(degree in 1u8..=7, i in 0usize..240, j in 0usize..240, v in vector(9)) {
        let roots = &degree_data(degree).unwrap().roots;
        let r = &roots[i % roots.len()];
        let s = &roots[j % roots.len()];
        let v = &v[..r.len()];
        prop_assert_eq!(reflect(&reflect(v, r), r), v.to_vec());
        prop_assert_eq!(dot(&reflect(v, r), &reflect(s, r)), dot(v, s));
    }

    #[test]
    fn permutations_form_a_group(p in permutation(12), q in permutation(12), r in permutation(12)) {
        prop_assert_eq!(p.compose(&q).compose(&r), p.compose(&q.compose(&r)));
        prop_assert!(p.compose(&p.inverse()).is_identity());
        let labels: Vec<String> = (1..=12).map(|i| i.to_string()).collect();
        prop_assert_eq!(Permutation::parse_cycles(&p.to_cycle_string(&labels), &labels).unwrap(), p);
    }

    #[test]
    fn generated_groups_are_closed(p in permutation(7), q in permutation(7)) {
        let g = PermGroup::generate(7, vec![p.clone(), q.clone()]);
        prop_assert!(g.contains(&p.compose(&q)));
        prop_assert_eq!(5040 % g.elements.len(), 0);
        for x in g.elements.iter().take(20) {
            prop_assert!(g.contains(&x.inverse()));
        }
    }
}

#[test]
fn type_names_round_trip() {
    for d in 1..=9 {
        for t in enumerate_types(d).unwrap() {
            let back = parse_type_name(&t.name).unwrap();
            assert!(std::ptr::eq(back, t), "{}", t.name);
        }
    }
}

#[test]
fn intersection_rules_hold_on_all_graphs() {
    let (n, bad) = common::lemma_checks();
    assert!(n > 100, "{n} graphs");
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn line_counts_are_weyl_invariant() {
    let bad = common::weyl_invariance(&mut common::seeded(7), 100);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn invariant_rank_is_a_conjugacy_invariant() {
    let bad = common::conjugacy_invariance(&mut common::seeded(11), 100);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn cover_type_is_chain_independent() {
    let (n, bad) = common::chain_independence();
    assert!(n > 0);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn local_cover_table_matches_binary_polyhedral_groups() {
    let (n, bad) = common::local_cover_oracle();
    assert!(n >= 20, "{n} cases");
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn binary_polyhedral_orders() {
    for c in common::oracle_components() {
        assert_eq!(common::binary_polyhedral(c).order(), c.local_group_order());
    }
}

mod common;

use agorad::algebra::{self, RestrictionClass};
use agorad::blockedness::{self, SubBox};
use agorad::classify::{self, AnalyzeOptions, Decision};
use agorad::fixtures;
use agorad::search::{self, SearchBudget, SearchStatus};
use common::*;
use proptest::prelude::*;

fn small_domain() -> impl Strategy<Value = agorad::Domain> {
    any::<u64>().prop_map(|s| random_small(&mut rng(s), 3, 10))
}

fn boolean_domain() -> impl Strategy<Value = agorad::Domain> {
    any::<u64>().prop_map(|s| random_boolean(&mut rng(s), 3))
}

fn b() -> SearchBudget {
    SearchBudget::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn graph_edges_match_definition(d in small_domain()) {
        let g = blockedness::build_graph(&d).unwrap();
        let got: std::collections::BTreeSet<_> = g.edges().iter().map(|e| {
            let (a, b) = (g.vertices()[e.from], g.vertices()[e.to]);
            ((a.issue, a.first, a.second), (b.issue, b.first, b.second))
        }).collect();
        prop_assert_eq!(got, edges_oracle(&d));
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.from, e.to)).collect();
        prop_assert_eq!(g.is_strongly_connected(), strongly_connected_oracle(g.vertices().len(), &pairs));
    }

    #[test]
    fn every_edge_witness_is_a_mipe(d in small_domain()) {
        let g = blockedness::build_graph(&d).unwrap();
        for e in g.edges() {
            let w = &e.witness;
            let sub_box = SubBox::new(&d, w.sub_box.iter().map(|&(a, b)| vec![a, b]).collect()).unwrap();
            prop_assert!(blockedness::is_mipe(&d, &sub_box, &w.support, &w.assignment).unwrap());
        }
    }

    #[test]
    fn enumerated_mipes_are_exactly_the_literal_ones(d in small_domain(), pick in any::<u64>()) {
        let m = d.issue_count();
        let cells: Vec<Vec<u8>> = (0..m).map(|j| {
            let pairs = d.two_element_subsets(j).unwrap();
            let (a, b) = pairs[(pick as usize >> (4 * j)) % pairs.len()];
            vec![a as u8, b as u8]
        }).collect();
        let sub_box = SubBox::new(&d, cells.clone()).unwrap();
        let fast: Vec<(Vec<usize>, Vec<u8>)> = blockedness::enumerate_mipes(&d, &sub_box).unwrap()
            .into_iter().map(|x| (x.support, x.assignment)).collect();
        let mut slow = Vec::new();
        for mask in 1u32..(1 << m) {
            let support: Vec<usize> = (0..m).filter(|&j| mask >> j & 1 == 1).collect();
            for bits in 0u32..(1 << support.len()) {
                let a: Vec<u8> = support.iter().enumerate().map(|(i, &j)| cells[j][(bits >> i & 1) as usize]).collect();
                if blockedness::is_mipe(&d, &sub_box, &support, &a).unwrap() {
                    slow.push((support.clone(), a));
                }
            }
        }
        let mut fast_sorted = fast.clone();
        fast_sorted.sort();
        slow.sort();
        prop_assert_eq!(fast_sorted, slow);
    }

    #[test]
    fn binary_routes_agree_and_partition_witness_verifies(d in small_domain()) {
        let graph = search::find_binary_nondictatorial(&d, false, b()).unwrap();
        let direct = search::find_binary_nondictatorial(&d, true, b()).unwrap();
        prop_assert_eq!(graph.status, direct.status);
        for w in [graph.witness, direct.witness].into_iter().flatten() {
            prop_assert!(closed_oracle(&d, &w));
            prop_assert_eq!(algebra::is_dictatorial(&d, &w).unwrap(), None);
        }
    }

    #[test]
    fn found_witnesses_have_their_property(d in small_domain()) {
        let maj = search::find_majority(&d, b()).unwrap();
        let min = search::find_minority(&d, b()).unwrap();
        let uni = search::find_uniform(&d, b()).unwrap();
        for (o, class) in [(&maj, Some(RestrictionClass::Maj)), (&min, Some(RestrictionClass::Xor3)), (&uni, None)] {
            prop_assert_ne!(o.status, SearchStatus::BudgetExceeded);
            if let Some(w) = &o.witness {
                prop_assert!(closed_oracle(&d, w));
                for (j, pair) in d.all_two_element_subsets() {
                    let c = algebra::restriction_class(w.component(j), pair).unwrap();
                    match class {
                        Some(want) => prop_assert_eq!(c, want),
                        None => prop_assert!(c.is_four_op()),
                    }
                }
            }
        }
        if let Some(w) = &uni.witness {
            prop_assert!(search::satisfies_uniform_identities(&d, w));
            prop_assert!(algebra::is_uniformly_nondictatorial(&d, w).unwrap().is_uniform());
        }
        // a majority or minority aggregator is uniform
        if maj.is_found() || min.is_found() {
            prop_assert!(uni.is_found());
        }
    }

    #[test]
    fn exhausted_ternary_searches_replay_on_the_oracle(d in boolean_domain()) {
        let maj = search::find_majority(&d, b()).unwrap();
        let oracle = search::bruteforce_ternary_nontrivial(&d, |f| {
            d.all_two_element_subsets().iter().all(|&(j, p)| {
                algebra::restriction_class(f.component(j), p).unwrap() == RestrictionClass::Maj
            })
        }).unwrap();
        prop_assert_eq!(maj.is_found(), oracle.is_some());
        let min = search::find_minority(&d, b()).unwrap();
        let oracle = search::bruteforce_ternary_nontrivial(&d, |f| {
            d.all_two_element_subsets().iter().all(|&(j, p)| {
                algebra::restriction_class(f.component(j), p).unwrap() == RestrictionClass::Xor3
            })
        }).unwrap();
        prop_assert_eq!(min.is_found(), oracle.is_some());
        let uni = search::find_uniform(&d, b()).unwrap();
        let oracle = search::bruteforce_ternary_nontrivial(&d, |f| search::satisfies_uniform_identities(&d, f)).unwrap();
        prop_assert_eq!(uni.is_found(), oracle.is_some());
    }

    #[test]
    fn boolean_flags_match_majority_and_minority(d in boolean_domain()) {
        let flags = classify::boolean_classification(&d).unwrap();
        prop_assert_eq!(flags.affine, search::find_minority(&d, b()).unwrap().is_found());
        prop_assert_eq!(flags.bijunctive, search::find_majority(&d, b()).unwrap().is_found());
        let p = classify::is_possibility_domain(&d, b()).unwrap();
        prop_assert_eq!(flags.possibility, p.decision == Decision::Yes);
    }

    #[test]
    fn analysis_invariants_hold(d in small_domain()) {
        let r = classify::analyze(&d, AnalyzeOptions { validate: true, ..AnalyzeOptions::default() }).unwrap();
        prop_assert_eq!(r.get("binary_routes_agree").unwrap(), "yes");
        prop_assert_eq!(r.get("upd_routes_agree").unwrap(), "yes");
        if r.upd_decision() == Decision::Yes {
            prop_assert_eq!(r.possibility_decision(), Decision::Yes);
        }
        prop_assert_eq!(r.get("mcsp").unwrap() == "TRACTABLE", r.upd_decision() == Decision::Yes);
        prop_assert_eq!(r.get("totally_blocked").unwrap() == "yes", r.possibility.statuses[0].1 == SearchStatus::Exhausted);
    }

    #[test]
    fn products_of_uniform_domains_are_uniform(y in small_domain(), z in small_domain()) {
        let (uy, uz) = (search::find_uniform(&y, b()).unwrap(), search::find_uniform(&z, b()).unwrap());
        let yz = product(&y, &z);
        let uyz = search::find_uniform(&yz, b()).unwrap();
        prop_assert_eq!(uyz.is_found(), uy.is_found() && uz.is_found());
        // a product always has a non-dictatorial binary aggregator
        prop_assert!(search::find_binary_nondictatorial(&yz, false, b()).unwrap().is_found());
    }

    #[test]
    fn searches_are_deterministic(d in small_domain()) {
        let first = (search::find_uniform(&d, b()).unwrap(), search::fold_diamond_cover(&d, b()).unwrap());
        let again = (search::find_uniform(&d, b()).unwrap(), search::fold_diamond_cover(&d, b()).unwrap());
        prop_assert_eq!(first, again);
    }
}

#[test]
fn wxw_component_search_exhausts() {
    let d = fixtures::wxw();
    let o = search::find_component_nonprojection(&d, 0, (0, 1), b()).unwrap();
    assert_eq!(o.status, SearchStatus::Exhausted);
    assert_eq!(search::find_uniform(&d, b()).unwrap().status, SearchStatus::Exhausted);
    assert_eq!(search::fold_diamond_cover(&d, b()).unwrap().status, SearchStatus::Exhausted);
}

#[test]
fn pinned_operations_on_the_product_factors() {
    let d = fixtures::yz_product();
    for j in 0..3 {
        let o = search::find_component_nonprojection(&d, j, (0, 1), b()).unwrap();
        assert_eq!(o.pinned.map(|p| p.class()), Some(RestrictionClass::And3), "issue {j}");
    }
    for j in 3..6 {
        let o = search::find_component_nonprojection(&d, j, (0, 1), b()).unwrap();
        assert_eq!(o.pinned.map(|p| p.class()), Some(RestrictionClass::Xor3), "issue {j}");
    }
}

#[test]
fn fold_on_minority_domain_is_xor_everywhere() {
    let d = fixtures::example3();
    let fold = search::fold_diamond_cover(&d, b()).unwrap();
    let w = fold.witness.unwrap();
    for (j, pair) in d.all_two_element_subsets() {
        assert!(algebra::restriction_class(w.component(j), pair).unwrap().is_four_op());
    }
}

#[test]
fn fixture_searches_agree_with_the_examples() {
    let z = fixtures::z_affine();
    assert!(search::find_minority(&z, b()).unwrap().is_found());
    let e8 = fixtures::yz_product();
    assert!(search::find_binary_nondictatorial(&e8, false, b()).unwrap().is_found());
    assert!(search::find_uniform(&e8, b()).unwrap().is_found());
    let e2 = fixtures::example2();
    assert!(search::find_binary_nondictatorial(&e2, true, b()).unwrap().is_found());
    assert!(search::find_uniform(&fixtures::example3(), b()).unwrap().is_found());
    let full = fixtures::full_boolean(3).unwrap();
    let maj = search::find_majority(&full, b()).unwrap();
    assert!(maj.is_found());
    assert_eq!(maj.stats.nodes, 0);
}

#[test]
fn oracle_refuses_large_spaces() {
    let d = fixtures::example2();
    assert!(search::bruteforce_ternary_nontrivial(&d, |_| true).unwrap_err().is_capacity());
}

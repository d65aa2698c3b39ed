mod common;

use std::collections::{BTreeSet, HashSet};

use agorad::domain::{Code, Domain};
use agorad::fixtures;
use agorad::mcsp::{self, Assignment, Constraint, LanguageRelation, McspInstance, SolveResult};
use agorad::search::SearchBudget;
use common::*;
use proptest::prelude::*;
use rand::Rng;

pub fn random_instance(rng: &mut TestRng, domain: Domain, max_vars: usize) -> McspInstance {
    let m = domain.issue_count();
    let n = rng.gen_range(1..=max_vars);
    let vars: Vec<(String, usize)> = (0..n).map(|i| (format!("v{i}"), rng.gen_range(0..m))).collect();
    let by_sort: Vec<Vec<usize>> = (0..m)
        .map(|s| (0..n).filter(|&v| vars[v].1 == s).collect())
        .collect();
    let mut constraints = Vec::new();
    for _ in 0..rng.gen_range(0..=4) {
        if by_sort.iter().all(|v| !v.is_empty()) {
            let scope = by_sort.iter().map(|vs| vs[rng.gen_range(0..vs.len())]).collect();
            constraints.push(Constraint { scope, relation: LanguageRelation::Domain });
        }
    }
    for _ in 0..rng.gen_range(0..=n) {
        let v = rng.gen_range(0..n);
        let sort = vars[v].1;
        let size = domain.alphabet(sort).len();
        let mask = rng.gen_range(1u32..(1 << size));
        let values = (0..size as Code).filter(|&c| mask >> c & 1 == 1).collect();
        constraints.push(Constraint { scope: vec![v], relation: LanguageRelation::Subset { sort, values } });
    }
    McspInstance::new(domain, vars, constraints).unwrap().with_domain_ref("x.dom")
}

/// First satisfying assignment in lexicographic code order, by enumeration.
pub fn enumerate(inst: &McspInstance) -> Option<Vec<Code>> {
    let members: HashSet<Vec<Code>> = inst.domain().rows().iter().cloned().collect();
    let n = inst.variable_count();
    let sizes: Vec<usize> = (0..n).map(|v| inst.domain().alphabet(inst.sort(v)).len()).collect();
    let ok = |phi: &[Code]| {
        inst.constraints().iter().all(|c| match &c.relation {
            LanguageRelation::Domain => members.contains(&c.scope.iter().map(|&v| phi[v]).collect::<Vec<_>>()),
            LanguageRelation::Subset { values, .. } => values.contains(&phi[c.scope[0]]),
        })
    };
    let mut phi = vec![0 as Code; n];
    loop {
        if ok(&phi) {
            return Some(phi);
        }
        let mut i = n;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            phi[i] += 1;
            if (phi[i] as usize) < sizes[i] {
                break;
            }
            phi[i] = 0;
        }
    }
}

fn fixture_pool() -> Vec<Domain> {
    ["w", "example2", "example3", "y-horn", "z-affine", "wxw"]
        .iter()
        .map(|n| fixtures::by_name(n).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn solver_agrees_with_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = fixture_pool();
        let d = pool[r.gen_range(0..pool.len())].clone();
        let inst = random_instance(&mut r, d, 8);
        let got = mcsp::solve(&inst, SearchBudget::default());
        let want = enumerate(&inst);
        match (&got, &want) {
            (SolveResult::Sat(a), Some(_)) => prop_assert!(mcsp::verify_assignment(&inst, a)),
            (SolveResult::Unsat, None) => {}
            _ => prop_assert!(false, "solver {:?} vs enumeration {:?}", got, want),
        }
    }

    #[test]
    fn instance_text_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let pool = fixture_pool();
        let d = pool[r.gen_range(0..pool.len())].clone();
        let inst = random_instance(&mut r, d.clone(), 6);
        let back = mcsp::parse_instance(&inst.to_text(), |_| Ok(d.clone())).unwrap();
        prop_assert_eq!(back.to_text(), inst.to_text());
        prop_assert_eq!(back.constraints(), inst.constraints());
    }
}

#[test]
fn language_is_conservative() {
    for d in fixture_pool() {
        let lang = mcsp::materialize_language(&d).unwrap();
        assert_eq!(lang[0], LanguageRelation::Domain);
        let subsets: Vec<(usize, Vec<Code>)> = lang[1..]
            .iter()
            .map(|r| match r {
                LanguageRelation::Subset { sort, values } => (*sort, values.clone()),
                LanguageRelation::Domain => panic!("X listed twice"),
            })
            .collect();
        let distinct: BTreeSet<_> = subsets.iter().cloned().collect();
        assert_eq!(distinct.len(), subsets.len());
        let expected: usize = d.alphabets().iter().map(|a| (1usize << a.len()) - 1).sum();
        assert_eq!(subsets.len(), expected);
    }
    let one = agorad::parse_domain("issues 1\nalphabet 1: a b\ntuple: a\ntuple: b\n").unwrap();
    assert_eq!(mcsp::materialize_language(&one).unwrap().len(), 4);
    let text = mcsp::language_text(&fixtures::w(), &mcsp::materialize_language(&fixtures::w()).unwrap());
    assert!(text.starts_with("relation X signature (1,2,3) tuples 3\nrelation subset 1 {0}\n"));
}

#[test]
fn repeated_variables_share_a_value() {
    let d = fixtures::wxw();
    let text = "domain wxw\n\
        var a sort 1\nvar b sort 2\nvar c sort 3\nvar d sort 4\nvar e sort 5\nvar f sort 6\n\
        constraint X: a b c d e f\nconstraint subset 1 {1}: a\nconstraint subset 4 {0}: d\nconstraint subset 5 {0}: e\n";
    let inst = mcsp::parse_instance(text, |_| Ok(d.clone())).unwrap();
    let got = mcsp::solve(&inst, SearchBudget::default());
    assert_eq!(got, SolveResult::Sat(Assignment(vec![1, 0, 0, 0, 0, 1])));
    assert_eq!(enumerate(&inst), Some(vec![1, 0, 0, 0, 0, 1]));
}

#[test]
fn tiny_budget_gives_unknown_not_unsat() {
    let d = fixtures::example2();
    let mut text = String::from("domain e2\n");
    for i in 0..6 {
        text.push_str(&format!("var x{i} sort {}\n", i % 3 + 1));
    }
    text.push_str("constraint X: x0 x1 x2\nconstraint X: x3 x4 x5\n");
    let inst = mcsp::parse_instance(&text, |_| Ok(d.clone())).unwrap();
    let budget = SearchBudget { max_nodes: 1, max_millis: 30_000 };
    assert_eq!(mcsp::solve(&inst, budget), SolveResult::Unknown);
    assert!(matches!(mcsp::solve(&inst, SearchBudget::default()), SolveResult::Sat(_)));
}

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use agorad::blockedness::{self, SubBox};
use agorad::domain::{Code, Domain, Limits};
use agorad::fixtures;
use agorad::AggregatorTuple;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Every named fixture plus two small full products.
pub fn all_fixtures() -> Vec<(String, Domain)> {
    let mut out: Vec<(String, Domain)> = fixtures::NAMES
        .iter()
        .map(|n| (n.to_string(), fixtures::by_name(n).unwrap()))
        .collect();
    for m in [2, 3] {
        out.push((format!("full-boolean-{m}"), fixtures::full_boolean(m).unwrap()));
    }
    out
}

fn alphabet(size: usize) -> Vec<String> {
    ["a", "b", "c", "d", "e"][..size].iter().map(|s| s.to_string()).collect()
}

/// A random non-degenerate domain with `m` issues, alphabet sizes drawn from
/// `sizes` and at most `max_rows` rows.
pub fn random_domain(rng: &mut TestRng, m: usize, sizes: &[usize], max_rows: usize) -> Domain {
    loop {
        let alphabets: Vec<Vec<String>> = (0..m).map(|_| alphabet(*sizes.choose(rng).unwrap())).collect();
        let mut all: Vec<Vec<Code>> = vec![vec![]];
        for a in &alphabets {
            all = all
                .into_iter()
                .flat_map(|p| {
                    (0..a.len() as Code).map(move |c| {
                        let mut q = p.clone();
                        q.push(c);
                        q
                    })
                })
                .collect();
        }
        let count = rng.gen_range(2..=max_rows.min(all.len()));
        all.shuffle(rng);
        all.truncate(count);
        let d = Domain::from_parts(alphabets, all);
        if d.validate().ok {
            return d;
        }
    }
}

/// Random domain with `1 <= m <= max_m` and per-issue alphabets of 2 or 3.
pub fn random_small(rng: &mut TestRng, max_m: usize, max_rows: usize) -> Domain {
    let m = rng.gen_range(1..=max_m);
    random_domain(rng, m, &[2, 3], max_rows)
}

pub fn random_boolean(rng: &mut TestRng, max_m: usize) -> Domain {
    let m = rng.gen_range(1..=max_m);
    random_domain(rng, m, &[2], 1 << m)
}

/// Closure checked directly on coded rows, with its own membership set.
pub fn closed_oracle(domain: &Domain, f: &AggregatorTuple) -> bool {
    let members: HashSet<Vec<Code>> = domain.rows().iter().cloned().collect();
    let local = |j: usize, c: Code| domain.projection(j).iter().position(|&p| p == c).unwrap() as u8;
    let n = f.arity();
    let rows = domain.rows();
    let mut picks = vec![0usize; n];
    loop {
        let image: Vec<Code> = (0..domain.issue_count())
            .map(|j| {
                let args: Vec<u8> = picks.iter().map(|&r| local(j, rows[r][j])).collect();
                domain.projection(j)[f.component(j).eval(&args) as usize]
            })
            .collect();
        if !members.contains(&image) {
            return false;
        }
        let mut k = n;
        loop {
            if k == 0 {
                return true;
            }
            k -= 1;
            picks[k] += 1;
            if picks[k] < rows.len() {
                break;
            }
            picks[k] = 0;
        }
    }
}

pub type EdgeSet = BTreeSet<((usize, u8, u8), (usize, u8, u8))>;

/// `G_X` edges straight from the definition, using the literal MIPE test on
/// every 2-sub-box, every support and every assignment.
pub fn edges_oracle(domain: &Domain) -> EdgeSet {
    let m = domain.issue_count();
    let pairs: Vec<Vec<(usize, usize)>> = (0..m).map(|j| domain.two_element_subsets(j).unwrap()).collect();
    let mut out = BTreeSet::new();
    let mut pick = vec![0usize; m];
    loop {
        let cells: Vec<Vec<u8>> = pick
            .iter()
            .enumerate()
            .map(|(j, &i)| vec![pairs[j][i].0 as u8, pairs[j][i].1 as u8])
            .collect();
        let sub_box = SubBox::new(domain, cells.clone()).unwrap();
        for mask in 1u32..(1 << m) {
            let support: Vec<usize> = (0..m).filter(|&j| mask >> j & 1 == 1).collect();
            for bits in 0u32..(1 << support.len()) {
                let assignment: Vec<u8> = support
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| cells[j][(bits >> i & 1) as usize])
                    .collect();
                if !blockedness::is_mipe(domain, &sub_box, &support, &assignment).unwrap() {
                    continue;
                }
                for (ik, &k) in support.iter().enumerate() {
                    for (il, &l) in support.iter().enumerate() {
                        if k == l {
                            continue;
                        }
                        let flip = |j: usize, v: u8| if cells[j][0] == v { cells[j][1] } else { cells[j][0] };
                        let (xk, xl) = (assignment[ik], assignment[il]);
                        out.insert(((k, xk, flip(k, xk)), (l, flip(l, xl), xl)));
                    }
                }
            }
        }
        let mut j = m;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < pairs[j].len() {
                break;
            }
            pick[j] = 0;
        }
    }
}

/// Strong connectivity by reachability from every vertex.
pub fn strongly_connected_oracle(vertices: usize, edges: &[(usize, usize)]) -> bool {
    let mut adj = vec![Vec::new(); vertices];
    for &(a, b) in edges {
        adj[a].push(b);
    }
    (0..vertices).all(|s| {
        let mut seen = vec![false; vertices];
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&x| x)
    })
}

/// Product of two domains that ignores the default size limits.
pub fn product(a: &Domain, b: &Domain) -> Domain {
    a.product(b).with_limits(Limits::unbounded())
}

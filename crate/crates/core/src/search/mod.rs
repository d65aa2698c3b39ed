//! Witness searches.
//!
//! Every search returns a [`SearchOutcome`]: `Found` carries a witness that
//! has been re-verified with [`algebra::is_closed`] and the kind-specific
//! property; `Exhausted` means the whole space was covered, so absence is a
//! proof at that arity and kind; `BudgetExceeded` proves nothing.

mod engine;
pub mod oracle;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::algebra::{self, eval_named, NamedOp, RestrictionClass, VerifiedAggregator};
use crate::blockedness::{self, BlockednessGraph};
use crate::domain::Domain;
use crate::error::{Error, Result};

use engine::{mask_of, CellRule, Flow, TableSearch};

pub use oracle::{all_binary_aggregators, bruteforce_binary, bruteforce_ternary_nontrivial};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: u64,
    pub max_millis: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_nodes: 10_000_000,
            max_millis: 30_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub prunes: u64,
}

impl SearchStats {
    fn absorb(&mut self, other: SearchStats) {
        self.nodes += other.nodes;
        self.prunes += other.prunes;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Found,
    Exhausted,
    BudgetExceeded,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Found => "FOUND",
            SearchStatus::Exhausted => "EXHAUSTED",
            SearchStatus::BudgetExceeded => "BUDGET_EXCEEDED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub status: SearchStatus,
    pub witness: Option<VerifiedAggregator>,
    pub stats: SearchStats,
    /// For targeted component searches: which operation the witness pins.
    pub pinned: Option<NamedOp>,
}

impl SearchOutcome {
    fn exhausted(stats: SearchStats) -> Self {
        SearchOutcome {
            status: SearchStatus::Exhausted,
            witness: None,
            stats,
            pinned: None,
        }
    }

    fn budget(stats: SearchStats) -> Self {
        SearchOutcome {
            status: SearchStatus::BudgetExceeded,
            witness: None,
            stats,
            pinned: None,
        }
    }

    fn found(witness: VerifiedAggregator, stats: SearchStats) -> Self {
        SearchOutcome {
            status: SearchStatus::Found,
            witness: Some(witness),
            stats,
            pinned: None,
        }
    }

    pub fn is_found(&self) -> bool {
        self.status == SearchStatus::Found
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessKind {
    Binary,
    Majority,
    Minority,
    Uniform,
    Component,
}

impl WitnessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WitnessKind::Binary => "binary",
            WitnessKind::Majority => "majority",
            WitnessKind::Minority => "minority",
            WitnessKind::Uniform => "uniform",
            WitnessKind::Component => "component",
        }
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WitnessKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "binary" => Ok(WitnessKind::Binary),
            "majority" => Ok(WitnessKind::Majority),
            "minority" => Ok(WitnessKind::Minority),
            "uniform" => Ok(WitnessKind::Uniform),
            "component" => Ok(WitnessKind::Component),
            other => Err(format!("unknown witness kind `{other}`")),
        }
    }
}

fn finish(
    domain: &Domain,
    flow: Flow,
    found: Option<algebra::AggregatorTuple>,
    stats: SearchStats,
    property: impl Fn(&VerifiedAggregator) -> Result<bool>,
    what: &str,
) -> Result<SearchOutcome> {
    match flow {
        Flow::Budget => Ok(SearchOutcome::budget(stats)),
        Flow::Exhausted => Ok(SearchOutcome::exhausted(stats)),
        Flow::Found => {
            let tuple = found.ok_or_else(|| Error::Invariant("FOUND without a witness".into()))?;
            let witness = algebra::verify(domain, tuple)
                .map_err(|_| Error::Invariant(format!("{what} witness fails closure")))?;
            if !property(&witness)? {
                return Err(Error::Invariant(format!(
                    "{what} witness lacks its defining property"
                )));
            }
            Ok(SearchOutcome::found(witness, stats))
        }
    }
}

fn run_first(
    domain: &Domain,
    arity: usize,
    budget: SearchBudget,
    rule: impl FnMut(usize, &[u8]) -> CellRule,
) -> (Flow, Option<algebra::AggregatorTuple>, SearchStats) {
    let mut search = TableSearch::new(domain, arity, budget, rule);
    let (flow, found) = search.run_first();
    (flow, found, search.stats)
}

fn every_restriction(
    domain: &Domain,
    f: &VerifiedAggregator,
    pred: impl Fn(RestrictionClass) -> bool,
) -> Result<bool> {
    for (j, pair) in domain.all_two_element_subsets() {
        if !pred(algebra::restriction_class(f.component(j), pair)?) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn distinct_count(args: &[u8]) -> u32 {
    mask_of(args).count_ones()
}

/// Binary non-dictatorial aggregator, from the `G_X` partition by default.
pub fn find_binary_nondictatorial(
    domain: &Domain,
    direct: bool,
    budget: SearchBudget,
) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    if direct {
        find_binary_direct(domain, budget)
    } else {
        let graph = blockedness::build_graph(domain)?;
        find_binary_from_graph(domain, &graph)
    }
}

/// Graph route: a strongly connected `G_X` admits no binary non-dictatorial
/// aggregator, so `Exhausted` is definitive.
pub fn find_binary_from_graph(domain: &Domain, graph: &BlockednessGraph) -> Result<SearchOutcome> {
    if graph.is_strongly_connected() {
        return Ok(SearchOutcome::exhausted(SearchStats::default()));
    }
    let witness = blockedness::binary_from_partition(domain, graph)?;
    Ok(SearchOutcome::found(witness, SearchStats::default()))
}

/// Direct route: backtracking over binary tables, skipping the two
/// dictatorial solutions.
pub fn find_binary_direct(domain: &Domain, budget: SearchBudget) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    let mut search = TableSearch::new(domain, 2, budget, |_, a| {
        if a[0] == a[1] {
            CellRule::Fixed(a[0])
        } else {
            CellRule::Choice(mask_of(a))
        }
    });
    let mut found = None;
    let flow = search.run(|t| {
        let dictatorial = (0..2).any(|d| t.components().iter().all(|c| c.is_projection(d)));
        if !dictatorial {
            found = Some(t.clone());
        }
        !dictatorial
    });
    finish(
        domain,
        flow,
        found,
        search.stats,
        |w| Ok(algebra::is_dictatorial(domain, w)?.is_none()),
        "binary",
    )
}

fn majority_rule(_: usize, a: &[u8]) -> CellRule {
    match distinct_count(a) {
        3 => CellRule::Choice(mask_of(a)),
        _ => CellRule::Fixed(if a[0] == a[1] || a[0] == a[2] { a[0] } else { a[1] }),
    }
}

fn minority_rule(_: usize, a: &[u8]) -> CellRule {
    match distinct_count(a) {
        1 => CellRule::Fixed(a[0]),
        2 => CellRule::Fixed(if a[0] == a[1] {
            a[2]
        } else if a[1] == a[2] {
            a[0]
        } else {
            a[1]
        }),
        _ => CellRule::Choice(mask_of(a)),
    }
}

/// Ternary aggregator that is a majority operation on every `X_j`.
pub fn find_majority(domain: &Domain, budget: SearchBudget) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    let (flow, found, stats) = run_first(domain, 3, budget, majority_rule);
    finish(
        domain,
        flow,
        found,
        stats,
        |w| every_restriction(domain, w, |c| c == RestrictionClass::Maj),
        "majority",
    )
}

/// Ternary aggregator that is a minority operation on every `X_j`.
pub fn find_minority(domain: &Domain, budget: SearchBudget) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    let (flow, found, stats) = run_first(domain, 3, budget, minority_rule);
    finish(
        domain,
        flow,
        found,
        stats,
        |w| every_restriction(domain, w, |c| c == RestrictionClass::Xor3),
        "minority",
    )
}

/// Does `f` satisfy `f_j(x,y,y) = f_j(y,x,y) = f_j(y,y,x)` on every `X_j`?
pub fn satisfies_uniform_identities(domain: &Domain, f: &algebra::AggregatorTuple) -> bool {
    f.arity() == 3
        && f.components().iter().enumerate().all(|(j, c)| {
            let s = domain.projection(j).len() as u8;
            (0..s).all(|x| {
                (0..s).all(|y| {
                    let v = c.eval(&[x, y, y]);
                    v == c.eval(&[y, x, y]) && v == c.eval(&[y, y, x])
                })
            })
        })
}

/// Ternary aggregator satisfying `f_j(x,y,y) = f_j(y,x,y) = f_j(y,y,x)`;
/// found iff `X` is a uniformly possibility domain.
pub fn find_uniform(domain: &Domain, budget: SearchBudget) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    let (flow, found, stats) = run_first(domain, 3, budget, |_, a| match distinct_count(a) {
        1 => CellRule::Fixed(a[0]),
        2 => {
            // x is the value occurring once, y the one occurring twice
            let (x, y) = if a[1] == a[2] {
                (a[0], a[1])
            } else if a[0] == a[2] {
                (a[1], a[0])
            } else {
                (a[2], a[0])
            };
            CellRule::Shared(((x as u64) << 8) | y as u64, mask_of(a))
        }
        _ => CellRule::Choice(mask_of(a)),
    });
    finish(
        domain,
        flow,
        found,
        stats,
        |w| {
            Ok(satisfies_uniform_identities(domain, w)
                && every_restriction(domain, w, RestrictionClass::is_four_op)?
                && algebra::is_uniformly_nondictatorial(domain, w)?.is_uniform())
        },
        "uniform",
    )
}

/// Order in which the targeted search pins `f_j↾B`.
pub const PIN_ORDER: [NamedOp; 4] = [NamedOp::And3, NamedOp::Or3, NamedOp::Maj, NamedOp::Xor3];

/// Ternary aggregator whose `j`-th component restricted to `pair` is one of
/// the four commutative operations. `issue` is 0-based; `pair` holds local
/// indices.
pub fn find_component_nonprojection(
    domain: &Domain,
    issue: usize,
    pair: (usize, usize),
    budget: SearchBudget,
) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    let subsets = domain.two_element_subsets(issue)?;
    let (a, b) = (pair.0.min(pair.1), pair.0.max(pair.1));
    if !subsets.contains(&(a, b)) {
        return Err(Error::InvalidPair(format!(
            "({}, {}) is not a two-element subset of X_{}",
            pair.0,
            pair.1,
            issue + 1
        )));
    }
    let (zero, one) = (a as u8, b as u8);
    let mut stats = SearchStats::default();
    let mut budget_hit = false;
    for op in PIN_ORDER {
        let (flow, found, s) = run_first(domain, 3, budget, |j, args| {
            if args.iter().all(|&v| v == args[0]) {
                CellRule::Fixed(args[0])
            } else if j == issue && args.iter().all(|&v| v == zero || v == one) {
                let v = eval_named(op, zero, one, args[0], args[1], args[2])
                    .expect("arguments lie in the pair");
                CellRule::Fixed(v)
            } else {
                CellRule::Choice(mask_of(args))
            }
        });
        stats.absorb(s);
        match flow {
            Flow::Exhausted => continue,
            Flow::Budget => {
                budget_hit = true;
                continue;
            }
            Flow::Found => {
                let mut outcome = finish(
                    domain,
                    flow,
                    found,
                    stats,
                    |w| Ok(algebra::restriction_class(w.component(issue), (a, b))? == op.class()),
                    "component",
                )?;
                outcome.pinned = Some(op);
                return Ok(outcome);
            }
        }
    }
    Ok(if budget_hit {
        SearchOutcome::budget(stats)
    } else {
        SearchOutcome::exhausted(stats)
    })
}

/// Runs the targeted search for every `(j, B_j)` and folds the witnesses
/// with `⋄` from the left.
pub fn fold_diamond_cover(domain: &Domain, budget: SearchBudget) -> Result<SearchOutcome> {
    domain.ensure_analyzable()?;
    let targets = domain.all_two_element_subsets();
    let outcomes: Vec<SearchOutcome> = targets
        .par_iter()
        .map(|&(j, pair)| find_component_nonprojection(domain, j, pair, budget))
        .collect::<Result<_>>()?;
    let mut stats = SearchStats::default();
    for o in &outcomes {
        stats.absorb(o.stats);
    }
    if outcomes.iter().any(|o| o.status == SearchStatus::Exhausted) {
        return Ok(SearchOutcome::exhausted(stats));
    }
    if outcomes.iter().any(|o| o.status == SearchStatus::BudgetExceeded) {
        return Ok(SearchOutcome::budget(stats));
    }
    let mut witnesses = outcomes.into_iter().filter_map(|o| o.witness);
    let first = witnesses
        .next()
        .ok_or_else(|| Error::Invariant("no two-element subsets to cover".into()))?;
    let composite = witnesses.try_fold(first, |acc, w| algebra::diamond(domain, &acc, &w))?;
    if !every_restriction(domain, &composite, RestrictionClass::is_four_op)?
        || !algebra::is_uniformly_nondictatorial(domain, &composite)?.is_uniform()
    {
        return Err(Error::Invariant(
            "diamond fold is not commutative on every two-element subset".into(),
        ));
    }
    Ok(SearchOutcome::found(composite, stats))
}

//! Domain-level decisions and the analysis report.

use std::fmt;

use crate::algebra::{self, VerifiedAggregator};
use crate::blockedness::{self, BlockednessGraph};
use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::search::{self, SearchBudget, SearchStatus, WitnessKind};

/// A decision that a budget-gated search may fail to settle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Yes,
    No,
    Unknown,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::Yes => "yes",
            Decision::No => "no",
            Decision::Unknown => "unknown",
        }
    }

    fn from_bool(b: bool) -> Decision {
        if b {
            Decision::Yes
        } else {
            Decision::No
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McspClass {
    Tractable,
    NpComplete,
    Unknown,
}

impl McspClass {
    pub fn as_str(self) -> &'static str {
        match self {
            McspClass::Tractable => "TRACTABLE",
            McspClass::NpComplete => "NP_COMPLETE",
            McspClass::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for McspClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossibilityDecision {
    pub decision: Decision,
    /// Kind and witness of the first search that succeeded.
    pub witness: Option<(WitnessKind, VerifiedAggregator)>,
    /// Status of every search that was run, in order.
    pub statuses: Vec<(WitnessKind, SearchStatus)>,
}

/// Binary (graph route), then majority, then minority; stops at the first
/// witness.
pub fn is_possibility_domain(domain: &Domain, budget: SearchBudget) -> Result<PossibilityDecision> {
    domain.ensure_analyzable()?;
    let graph = blockedness::build_graph(domain)?;
    possibility_with_graph(domain, &graph, budget)
}

fn possibility_with_graph(
    domain: &Domain,
    graph: &BlockednessGraph,
    budget: SearchBudget,
) -> Result<PossibilityDecision> {
    let mut statuses = Vec::new();
    let binary = search::find_binary_from_graph(domain, graph)?;
    statuses.push((WitnessKind::Binary, binary.status));
    if let Some(w) = binary.witness {
        return Ok(PossibilityDecision {
            decision: Decision::Yes,
            witness: Some((WitnessKind::Binary, w)),
            statuses,
        });
    }
    type Finder = fn(&Domain, SearchBudget) -> Result<search::SearchOutcome>;
    let searches: [(WitnessKind, Finder); 2] = [
        (WitnessKind::Majority, search::find_majority),
        (WitnessKind::Minority, search::find_minority),
    ];
    for (kind, run) in searches {
        let outcome = run(domain, budget)?;
        statuses.push((kind, outcome.status));
        if let Some(w) = outcome.witness {
            return Ok(PossibilityDecision {
                decision: Decision::Yes,
                witness: Some((kind, w)),
                statuses,
            });
        }
    }
    let decision = if statuses.iter().all(|(_, s)| *s == SearchStatus::Exhausted) {
        Decision::No
    } else {
        Decision::Unknown
    };
    Ok(PossibilityDecision {
        decision,
        witness: None,
        statuses,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BooleanFlags {
    /// Closed under componentwise `⊕` of any three rows.
    pub affine: bool,
    /// Closed under componentwise `maj` of any three rows.
    pub bijunctive: bool,
    /// Has a binary non-dictatorial aggregator.
    pub binary: bool,
    /// `affine ∨ binary`.
    pub possibility: bool,
}

fn closed_under_ternary(domain: &Domain, op: impl Fn(u8, u8, u8) -> u8) -> bool {
    let rel = domain.relation();
    let rows = &rel.rows;
    let mut image = vec![0u8; rel.issues()];
    for x in rows {
        for y in rows {
            for z in rows {
                for (j, slot) in image.iter_mut().enumerate() {
                    *slot = op(x[j], y[j], z[j]);
                }
                if !rel.contains(&image) {
                    return false;
                }
            }
        }
    }
    true
}

/// Affine and bijunctive flags plus the two-case possibility decision for
/// domains whose projections all have two values.
pub fn boolean_classification(domain: &Domain) -> Result<BooleanFlags> {
    domain.ensure_analyzable()?;
    let graph = blockedness::build_graph(domain)?;
    boolean_with_graph(domain, &graph)
}

fn boolean_with_graph(domain: &Domain, graph: &BlockednessGraph) -> Result<BooleanFlags> {
    if !domain.is_boolean() {
        return Err(Error::NotBoolean);
    }
    let affine = closed_under_ternary(domain, |x, y, z| x ^ y ^ z);
    let bijunctive = closed_under_ternary(domain, |x, y, z| (x & y) | (y & z) | (x & z));
    let binary = !graph.is_strongly_connected();
    Ok(BooleanFlags {
        affine,
        bijunctive,
        binary,
        possibility: affine || binary,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdDecision {
    pub decision: Decision,
    pub witness: Option<VerifiedAggregator>,
    pub status: SearchStatus,
    /// Status of the diamond-fold route, when it was run.
    pub fold_status: Option<SearchStatus>,
}

/// Uniform possibility via the identity search; with `validate`, the
/// diamond-fold route is run as well and the two must not contradict.
pub fn is_upd(domain: &Domain, budget: SearchBudget, validate: bool) -> Result<UpdDecision> {
    let outcome = search::find_uniform(domain, budget)?;
    if let Some(w) = &outcome.witness {
        if !algebra::is_uniformly_nondictatorial(domain, w)?.is_uniform() {
            return Err(Error::Invariant("uniform witness restricts to a projection".into()));
        }
    }
    let fold_status = if validate {
        let fold = search::fold_diamond_cover(domain, budget)?;
        if definitive_mismatch(outcome.status, fold.status) {
            return Err(Error::Invariant(format!(
                "uniform search says {} but diamond fold says {}",
                outcome.status, fold.status
            )));
        }
        Some(fold.status)
    } else {
        None
    };
    Ok(UpdDecision {
        decision: decision_of(outcome.status),
        witness: outcome.witness,
        status: outcome.status,
        fold_status,
    })
}

fn decision_of(status: SearchStatus) -> Decision {
    match status {
        SearchStatus::Found => Decision::Yes,
        SearchStatus::Exhausted => Decision::No,
        SearchStatus::BudgetExceeded => Decision::Unknown,
    }
}

fn definitive_mismatch(a: SearchStatus, b: SearchStatus) -> bool {
    a != b && a != SearchStatus::BudgetExceeded && b != SearchStatus::BudgetExceeded
}

pub fn mcsp_class(upd: Decision) -> McspClass {
    match upd {
        Decision::Yes => McspClass::Tractable,
        Decision::No => McspClass::NpComplete,
        Decision::Unknown => McspClass::Unknown,
    }
}

/// Complexity of the conservative multi-sorted CSP over `X`: tractable
/// exactly when `X` is a uniformly possibility domain.
pub fn classify_mcsp(domain: &Domain, budget: SearchBudget) -> Result<McspClass> {
    Ok(mcsp_class(is_upd(domain, budget, false)?.decision))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AnalyzeOptions {
    pub budget: SearchBudget,
    /// Cross-check the binary and uniform decisions by a second route.
    pub validate: bool,
    pub dot: bool,
    pub witnesses: bool,
}

/// Outcome of a diagnostic that may be skipped for size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    Yes,
    No,
    Skipped,
}

impl Diagnostic {
    fn from_bool(b: bool) -> Diagnostic {
        if b {
            Diagnostic::Yes
        } else {
            Diagnostic::No
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Diagnostic::Yes => "yes",
            Diagnostic::No => "no",
            Diagnostic::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub issues: usize,
    pub alphabet_sizes: Vec<usize>,
    pub projection_sizes: Vec<usize>,
    pub feasible_count: usize,
    pub possibility: PossibilityDecision,
    pub totally_blocked: bool,
    pub graph_vertices: usize,
    pub graph_edges: usize,
    pub graph_components: usize,
    pub upd: UpdDecision,
    pub mcsp: McspClass,
    pub boolean: Option<BooleanFlags>,
    pub multiply_constrained: Diagnostic,
    pub witness_locally_monomorphic: Option<bool>,
    pub upd_witness_locally_monomorphic: Option<bool>,
    /// Status of the direct binary search, when validation ran it.
    pub binary_direct: Option<SearchStatus>,
    pub duplicates_removed: usize,
    pub empty_sub_boxes: u64,
    pub dot: Option<String>,
    witness_text: Vec<(String, String)>,
}

impl AnalysisReport {
    pub fn possibility_decision(&self) -> Decision {
        self.possibility.decision
    }

    pub fn upd_decision(&self) -> Decision {
        self.upd.decision
    }

    /// True when some decision was left open by a budget.
    pub fn has_unknown(&self) -> bool {
        self.possibility.decision == Decision::Unknown || self.upd.decision == Decision::Unknown
    }

    /// Value of a report key as it appears in [`AnalysisReport::to_text`].
    pub fn get(&self, key: &str) -> Option<String> {
        self.lines().into_iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    fn lines(&self) -> Vec<(&'static str, String)> {
        fn join(v: &[usize]) -> String {
            v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        }
        fn opt_bool(b: Option<bool>) -> String {
            match b {
                Some(b) => Decision::from_bool(b).to_string(),
                None => "n/a".into(),
            }
        }
        fn agreement(a: SearchStatus, b: Option<SearchStatus>) -> String {
            match b {
                None => "not_checked".into(),
                Some(b) if a == b => "yes".into(),
                Some(SearchStatus::BudgetExceeded) => "unknown".into(),
                Some(_) => "no".into(),
            }
        }
        let binary_status = self.possibility.statuses[0].1;
        vec![
            ("issues", self.issues.to_string()),
            ("alphabet_sizes", join(&self.alphabet_sizes)),
            ("projection_sizes", join(&self.projection_sizes)),
            ("feasible_count", self.feasible_count.to_string()),
            ("boolean", Decision::from_bool(self.boolean.is_some()).to_string()),
            ("possibility", self.possibility.decision.to_string()),
            (
                "possibility_witness",
                self.possibility
                    .witness
                    .as_ref()
                    .map_or("none".into(), |(k, _)| k.to_string()),
            ),
            ("totally_blocked", Decision::from_bool(self.totally_blocked).to_string()),
            ("graph_vertices", self.graph_vertices.to_string()),
            ("graph_edges", self.graph_edges.to_string()),
            ("graph_components", self.graph_components.to_string()),
            ("upd", self.upd.decision.to_string()),
            ("mcsp", self.mcsp.to_string()),
            ("affine", opt_bool(self.boolean.map(|b| b.affine))),
            ("bijunctive", opt_bool(self.boolean.map(|b| b.bijunctive))),
            ("multiply_constrained", self.multiply_constrained.as_str().into()),
            ("witness_locally_monomorphic", opt_bool(self.witness_locally_monomorphic)),
            ("upd_witness_locally_monomorphic", opt_bool(self.upd_witness_locally_monomorphic)),
            ("binary_routes_agree", agreement(binary_status, self.binary_direct)),
            ("upd_routes_agree", agreement(self.upd.status, self.upd.fold_status)),
            ("duplicates_removed", self.duplicates_removed.to_string()),
            ("empty_sub_boxes", self.empty_sub_boxes.to_string()),
        ]
    }

    /// `key = value` lines in fixed order, then any attached sections.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.lines() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for (title, body) in &self.witness_text {
            out.push_str(&format!("\n[{title}]\n{body}"));
        }
        if let Some(dot) = &self.dot {
            out.push_str(&format!("\n[graph]\n{dot}"));
        }
        out
    }
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Runs every decision on `domain` and checks that they are mutually
/// consistent before returning.
pub fn analyze(domain: &Domain, options: AnalyzeOptions) -> Result<AnalysisReport> {
    domain.ensure_analyzable()?;
    let budget = options.budget;
    let graph = blockedness::build_graph(domain)?;

    let ((possibility, upd), (multiply, binary_direct)) = rayon::join(
        || {
            rayon::join(
                || possibility_with_graph(domain, &graph, budget),
                || is_upd(domain, budget, options.validate),
            )
        },
        || {
            rayon::join(
                || blockedness::is_multiply_constrained(domain),
                || {
                    options
                        .validate
                        .then(|| search::find_binary_direct(domain, budget))
                        .transpose()
                },
            )
        },
    );
    let (possibility, upd) = (possibility?, upd?);
    let multiply_constrained = match multiply {
        Ok(b) => Diagnostic::from_bool(b),
        Err(e) if e.is_capacity() => Diagnostic::Skipped,
        Err(e) => return Err(e),
    };
    let binary_direct = binary_direct?.map(|o| o.status);
    let boolean = if domain.is_boolean() {
        Some(boolean_with_graph(domain, &graph)?)
    } else {
        None
    };

    let totally_blocked = graph.is_strongly_connected();
    let mcsp = mcsp_class(upd.decision);
    check_invariants(&possibility, totally_blocked, &upd, mcsp, boolean, binary_direct)?;

    let witness_locally_monomorphic = possibility
        .witness
        .as_ref()
        .map(|(_, w)| algebra::is_locally_monomorphic(domain, w))
        .transpose()?;
    let upd_witness_locally_monomorphic = upd
        .witness
        .as_ref()
        .map(|w| algebra::is_locally_monomorphic(domain, w))
        .transpose()?;

    let mut witness_text = Vec::new();
    if options.witnesses {
        if let Some((kind, w)) = &possibility.witness {
            witness_text.push((
                format!("possibility witness {kind}"),
                algebra::serialize_witness(domain, w),
            ));
        }
        if let Some(w) = &upd.witness {
            witness_text.push(("upd witness".into(), algebra::serialize_witness(domain, w)));
        }
    }

    Ok(AnalysisReport {
        issues: domain.issue_count(),
        alphabet_sizes: domain.alphabets().iter().map(Vec::len).collect(),
        projection_sizes: domain.projections().iter().map(Vec::len).collect(),
        feasible_count: domain.rows().len(),
        totally_blocked,
        graph_vertices: graph.vertices().len(),
        graph_edges: graph.edges().len(),
        graph_components: graph.condensation().components.len(),
        mcsp,
        boolean,
        multiply_constrained,
        witness_locally_monomorphic,
        upd_witness_locally_monomorphic,
        binary_direct,
        duplicates_removed: domain.duplicates_removed(),
        empty_sub_boxes: graph.empty_boxes(),
        dot: options.dot.then(|| graph.to_dot(domain)),
        witness_text,
        possibility,
        upd,
    })
}

fn check_invariants(
    possibility: &PossibilityDecision,
    totally_blocked: bool,
    upd: &UpdDecision,
    mcsp: McspClass,
    boolean: Option<BooleanFlags>,
    binary_direct: Option<SearchStatus>,
) -> Result<()> {
    let fail = |msg: &str| Err(Error::Invariant(msg.into()));
    let any_found = possibility.statuses.iter().any(|(_, s)| *s == SearchStatus::Found);
    if (possibility.decision == Decision::Yes) != any_found {
        return fail("possibility disagrees with the three searches");
    }
    let binary = possibility.statuses[0].1;
    if totally_blocked != (binary == SearchStatus::Exhausted) {
        return fail("total blockedness disagrees with the binary search");
    }
    if let Some(direct) = binary_direct {
        if definitive_mismatch(binary, direct) {
            return fail("graph and direct binary routes disagree");
        }
    }
    if upd.decision == Decision::Yes && possibility.decision == Decision::No {
        return fail("uniformly possibility domain reported as impossibility domain");
    }
    if (mcsp == McspClass::Tractable) != (upd.decision == Decision::Yes) {
        return fail("MCSP label disagrees with uniform possibility");
    }
    if let Some(flags) = boolean {
        if possibility.decision != Decision::Unknown
            && flags.possibility != (possibility.decision == Decision::Yes)
        {
            return fail("Boolean classification disagrees with possibility");
        }
    }
    Ok(())
}

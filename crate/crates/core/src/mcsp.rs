//! Multi-sorted CSP over the conservative language of a domain.
//!
//! The language holds `X` itself, with signature `(1, ..., m)`, and every
//! non-empty subset of every `A_j` as a unary relation of sort `j`.

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use crate::domain::{Code, Domain};
use crate::error::{Error, Result};
use crate::search::SearchBudget;

/// One relation of the conservative language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LanguageRelation {
    Domain,
    /// 0-based sort and a sorted, non-empty set of codes of `A_sort`.
    Subset { sort: usize, values: Vec<Code> },
}

/// Lists the conservative language of `domain`: `X` first, then for each
/// sort the non-empty subsets of its alphabet in bitmask order.
pub fn materialize_language(domain: &Domain) -> Result<Vec<LanguageRelation>> {
    domain.ensure_analyzable()?;
    let mut out = vec![LanguageRelation::Domain];
    for (sort, a) in domain.alphabets().iter().enumerate() {
        for mask in 1u32..(1 << a.len()) {
            let values = (0..a.len() as Code).filter(|&c| mask >> c & 1 == 1).collect();
            out.push(LanguageRelation::Subset { sort, values });
        }
    }
    Ok(out)
}

/// Text listing of [`materialize_language`].
pub fn language_text(domain: &Domain, language: &[LanguageRelation]) -> String {
    let mut out = String::new();
    for r in language {
        match r {
            LanguageRelation::Domain => {
                let sig: Vec<String> = (1..=domain.issue_count()).map(|j| j.to_string()).collect();
                out.push_str(&format!(
                    "relation X signature ({}) tuples {}\n",
                    sig.join(","),
                    domain.rows().len()
                ));
            }
            LanguageRelation::Subset { sort, values } => {
                let toks: Vec<&str> = values.iter().map(|&c| domain.token(*sort, c)).collect();
                out.push_str(&format!("relation subset {} {{{}}}\n", sort + 1, toks.join(",")));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    /// Variable indices.
    pub scope: Vec<usize>,
    pub relation: LanguageRelation,
}

#[derive(Debug, Clone)]
pub struct McspInstance {
    domain: Domain,
    domain_ref: String,
    names: Vec<String>,
    sorts: Vec<usize>,
    constraints: Vec<Constraint>,
}

/// Values per variable, as codes of the variable's alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<Code>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat,
    Unknown,
}

impl McspInstance {
    /// Builds an instance after checking every signature.
    pub fn new(
        domain: Domain,
        variables: Vec<(String, usize)>,
        constraints: Vec<Constraint>,
    ) -> Result<McspInstance> {
        let m = domain.issue_count();
        let mut names = Vec::with_capacity(variables.len());
        let mut sorts = Vec::with_capacity(variables.len());
        for (name, sort) in variables {
            if sort >= m {
                return Err(Error::UnknownSort(sort + 1));
            }
            names.push(name);
            sorts.push(sort);
        }
        let mut inst = McspInstance {
            domain,
            domain_ref: String::new(),
            names,
            sorts,
            constraints: Vec::new(),
        };
        for c in constraints {
            inst.check_constraint(&c)?;
            inst.constraints.push(c);
        }
        Ok(inst)
    }

    fn check_constraint(&self, c: &Constraint) -> Result<()> {
        if let Some(&v) = c.scope.iter().find(|&&v| v >= self.names.len()) {
            return Err(Error::UnknownVariable(format!("#{v}")));
        }
        let got: Vec<usize> = c.scope.iter().map(|&v| self.sorts[v] + 1).collect();
        match &c.relation {
            LanguageRelation::Domain => {
                let want: Vec<usize> = (1..=self.domain.issue_count()).collect();
                if got != want {
                    return Err(Error::Signature(format!(
                        "X has signature {want:?}, scope has sorts {got:?}"
                    )));
                }
            }
            LanguageRelation::Subset { sort, values } => {
                if *sort >= self.domain.issue_count() {
                    return Err(Error::UnknownSort(sort + 1));
                }
                if got != [sort + 1] {
                    return Err(Error::Signature(format!(
                        "subset of A_{} applied to a scope with sorts {got:?}",
                        sort + 1
                    )));
                }
                let size = self.domain.alphabet(*sort).len();
                if values.is_empty() || values.iter().any(|&v| v as usize >= size) {
                    return Err(Error::Value(format!(
                        "subset relation is not a non-empty subset of A_{}",
                        sort + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// The path given on the `domain` line, if parsed from text.
    pub fn domain_ref(&self) -> &str {
        &self.domain_ref
    }

    /// Sets the path written on the `domain` line by [`McspInstance::to_text`].
    pub fn with_domain_ref(mut self, path: impl Into<String>) -> McspInstance {
        self.domain_ref = path.into();
        self
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    /// 0-based sort of variable `v`.
    pub fn sort(&self, v: usize) -> usize {
        self.sorts[v]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Serializes in the instance file format.
    pub fn to_text(&self) -> String {
        let mut out = format!("domain {}\n", self.domain_ref);
        for (n, s) in self.names.iter().zip(&self.sorts) {
            out.push_str(&format!("var {n} sort {}\n", s + 1));
        }
        for c in &self.constraints {
            let scope: Vec<&str> = c.scope.iter().map(|&v| self.names[v].as_str()).collect();
            match &c.relation {
                LanguageRelation::Domain => {
                    out.push_str(&format!("constraint X: {}\n", scope.join(" ")))
                }
                LanguageRelation::Subset { sort, values } => {
                    let toks: Vec<&str> = values.iter().map(|&c| self.domain.token(*sort, c)).collect();
                    out.push_str(&format!(
                        "constraint subset {} {{{}}}: {}\n",
                        sort + 1,
                        toks.join(","),
                        scope.join(" ")
                    ));
                }
            }
        }
        out
    }

    /// Formats a solver result: `SAT` plus `v = tok` lines, `UNSAT` or
    /// `UNKNOWN`.
    pub fn format_result(&self, result: &SolveResult) -> String {
        match result {
            SolveResult::Sat(a) => {
                let mut out = String::from("SAT\n");
                for (v, &c) in a.0.iter().enumerate() {
                    out.push_str(&format!("{} = {}\n", self.names[v], self.domain.token(self.sorts[v], c)));
                }
                out
            }
            SolveResult::Unsat => "UNSAT\n".into(),
            SolveResult::Unknown => "UNKNOWN\n".into(),
        }
    }
}

impl fmt::Display for McspInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses the instance format. `load` resolves the argument of the `domain`
/// line to a domain.
pub fn parse_instance(text: &str, load: impl FnOnce(&str) -> Result<Domain>) -> Result<McspInstance> {
    let mut load = Some(load);
    let mut inst: Option<McspInstance> = None;
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        if head == "domain" {
            if inst.is_some() {
                return Err(syntax(line_no, "duplicate `domain` line"));
            }
            if rest.is_empty() {
                return Err(syntax(line_no, "`domain` needs a path"));
            }
            let loader = load.take().expect("loader used once");
            let mut built = McspInstance::new(loader(rest)?, Vec::new(), Vec::new())?;
            built.domain_ref = rest.to_string();
            inst = Some(built);
            continue;
        }
        let inst = inst
            .as_mut()
            .ok_or_else(|| syntax(line_no, "the first directive must be `domain`"))?;
        match head {
            "var" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                let [name, "sort", j] = toks[..] else {
                    return Err(syntax(line_no, "expected `var <name> sort <j>`"));
                };
                let j: usize = j
                    .parse()
                    .map_err(|_| syntax(line_no, format!("bad sort `{j}`")))?;
                if j == 0 || j > inst.domain.issue_count() {
                    return Err(Error::UnknownSort(j));
                }
                if index.contains_key(name) {
                    return Err(syntax(line_no, format!("variable `{name}` declared twice")));
                }
                index.insert(name.to_string(), inst.names.len());
                inst.names.push(name.to_string());
                inst.sorts.push(j - 1);
            }
            "constraint" => {
                let (rel, scope) = rest
                    .split_once(':')
                    .ok_or_else(|| syntax(line_no, "constraint needs `:`"))?;
                let scope = scope
                    .split_whitespace()
                    .map(|n| {
                        index
                            .get(n)
                            .copied()
                            .ok_or_else(|| Error::UnknownVariable(n.to_string()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let rel = rel.trim();
                let relation = if rel == "X" {
                    LanguageRelation::Domain
                } else if let Some(body) = rel.strip_prefix("subset") {
                    parse_subset(&inst.domain, body.trim(), line_no)?
                } else {
                    return Err(syntax(line_no, format!("unknown relation `{rel}`")));
                };
                let c = Constraint { scope, relation };
                inst.check_constraint(&c)?;
                inst.constraints.push(c);
            }
            other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
        }
    }
    inst.ok_or_else(|| syntax(0, "missing `domain` line"))
}

fn parse_subset(domain: &Domain, body: &str, line: usize) -> Result<LanguageRelation> {
    let (j, set) = body
        .split_once('{')
        .ok_or_else(|| syntax(line, "expected `subset <j> {tok,...}`"))?;
    let set = set
        .trim()
        .strip_suffix('}')
        .ok_or_else(|| syntax(line, "unterminated `{`"))?;
    let j: usize = j
        .trim()
        .parse()
        .map_err(|_| syntax(line, format!("bad sort `{}`", j.trim())))?;
    if j == 0 || j > domain.issue_count() {
        return Err(Error::UnknownSort(j));
    }
    let mut values = Vec::new();
    for tok in set.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let code = domain.code_of(j - 1, tok).ok_or_else(|| Error::UnknownToken {
            line,
            issue: j,
            token: tok.to_string(),
        })?;
        values.push(code);
    }
    values.sort_unstable();
    values.dedup();
    if values.is_empty() {
        return Err(syntax(line, "empty subset relation"));
    }
    Ok(LanguageRelation::Subset { sort: j - 1, values })
}

/// Every constraint tuple lies in its relation and every value in its sort.
pub fn verify_assignment(inst: &McspInstance, phi: &Assignment) -> bool {
    if phi.0.len() != inst.variable_count() {
        return false;
    }
    let sorts_ok = phi
        .0
        .iter()
        .zip(&inst.sorts)
        .all(|(&c, &s)| (c as usize) < inst.domain.alphabet(s).len());
    sorts_ok
        && inst.constraints.iter().all(|c| match &c.relation {
            LanguageRelation::Domain => {
                let row: Vec<Code> = c.scope.iter().map(|&v| phi.0[v]).collect();
                inst.domain.contains(&row)
            }
            LanguageRelation::Subset { values, .. } => values.contains(&phi.0[c.scope[0]]),
        })
}

struct Solver<'a> {
    inst: &'a McspInstance,
    dom: Vec<u32>,
    trail: Vec<(usize, u32)>,
    var_cons: Vec<Vec<usize>>,
    budget: SearchBudget,
    started: Instant,
    nodes: u64,
}

enum Step {
    Found(Vec<Code>),
    Fail,
    Budget,
}

impl Solver<'_> {
    fn set(&mut self, v: usize, mask: u32) {
        if self.dom[v] != mask {
            self.trail.push((v, self.dom[v]));
            self.dom[v] = mask;
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, old) = self.trail.pop().expect("trail");
            self.dom[v] = old;
        }
    }

    /// Filters scope domains of X-constraints to supported values until
    /// nothing changes. False on a wipe-out.
    fn propagate(&mut self, mut pending: Vec<usize>) -> bool {
        let rows = self.inst.domain.rows();
        let mut queued = vec![false; self.inst.constraints.len()];
        for &c in &pending {
            queued[c] = true;
        }
        while let Some(ci) = pending.pop() {
            queued[ci] = false;
            let c = &self.inst.constraints[ci];
            let scope = &c.scope;
            let mut support = vec![0u32; scope.len()];
            for r in rows {
                let fits = scope.iter().enumerate().all(|(p, &v)| {
                    self.dom[v] >> r[p] & 1 == 1
                        && scope[..p].iter().zip(r).all(|(&w, &rv)| w != v || rv == r[p])
                });
                if fits {
                    for (s, &val) in support.iter_mut().zip(r) {
                        *s |= 1 << val;
                    }
                }
            }
            let mut narrowed = Vec::new();
            for &v in scope {
                // a repeated variable must be supported at every position
                let allowed = scope
                    .iter()
                    .zip(&support)
                    .filter(|(&w, _)| w == v)
                    .fold(u32::MAX, |acc, (_, &s)| acc & s);
                let next = self.dom[v] & allowed;
                if next == 0 {
                    return false;
                }
                if next != self.dom[v] {
                    self.set(v, next);
                    narrowed.push(v);
                }
            }
            for v in narrowed {
                for &other in &self.var_cons[v] {
                    if other != ci && !queued[other] {
                        queued[other] = true;
                        pending.push(other);
                    }
                }
            }
        }
        true
    }

    fn search(&mut self) -> Step {
        let next = (0..self.dom.len())
            .filter(|&v| self.dom[v].count_ones() > 1)
            .min_by_key(|&v| (self.dom[v].count_ones(), v));
        let Some(v) = next else {
            return Step::Found(self.dom.iter().map(|d| d.trailing_zeros() as Code).collect());
        };
        let mask = self.dom[v];
        for value in 0..32u32 {
            if mask >> value & 1 == 0 {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget.max_nodes
                || (self.nodes.is_multiple_of(256)
                    && self.started.elapsed().as_millis() as u64 > self.budget.max_millis)
            {
                return Step::Budget;
            }
            let mark = self.trail.len();
            self.set(v, 1 << value);
            let pending = self.var_cons[v].clone();
            if self.propagate(pending) {
                match self.search() {
                    Step::Fail => {}
                    other => return other,
                }
            }
            self.undo(mark);
        }
        Step::Fail
    }
}

/// Backtracking with unary filtering, propagation over `X`-constraints and
/// smallest-domain-first variable choice. Values are tried in code order.
pub fn solve(inst: &McspInstance, budget: SearchBudget) -> SolveResult {
    let n = inst.variable_count();
    let mut dom: Vec<u32> = inst
        .sorts
        .iter()
        .map(|&s| {
            let size = inst.domain.alphabet(s).len();
            if size >= 32 {
                u32::MAX
            } else {
                (1u32 << size) - 1
            }
        })
        .collect();
    let mut var_cons = vec![Vec::new(); n];
    for (ci, c) in inst.constraints.iter().enumerate() {
        match &c.relation {
            LanguageRelation::Subset { values, .. } => {
                let mask = values.iter().fold(0u32, |acc, &v| acc | 1 << v);
                dom[c.scope[0]] &= mask;
            }
            LanguageRelation::Domain => {
                let mut seen = Vec::new();
                for &v in &c.scope {
                    if !seen.contains(&v) {
                        seen.push(v);
                        var_cons[v].push(ci);
                    }
                }
            }
        }
    }
    if dom.contains(&0) {
        return SolveResult::Unsat;
    }
    let mut solver = Solver {
        inst,
        dom,
        trail: Vec::new(),
        var_cons,
        budget,
        started: Instant::now(),
        nodes: 0,
    };
    let all: Vec<usize> = inst
        .constraints
        .iter()
        .enumerate()
        .filter(|(_, c)| c.relation == LanguageRelation::Domain)
        .map(|(i, _)| i)
        .collect();
    if !solver.propagate(all) {
        return SolveResult::Unsat;
    }
    match solver.search() {
        Step::Found(values) => {
            let a = Assignment(values);
            debug_assert!(verify_assignment(inst, &a));
            SolveResult::Sat(a)
        }
        Step::Fail => SolveResult::Unsat,
        Step::Budget => SolveResult::Unknown,
    }
}

//! Sets of feasible voting patterns.
//!
//! A [`Domain`] holds `m` issues, the per-issue alphabets `A_j`, the feasible
//! set `X` and the projections `X_j`. Tokens are mapped to dense codes at
//! parse time (the code of a token is its position in the alphabet line), and
//! every downstream module works on codes, or on *local* indices, which are
//! positions inside the sorted projection `X_j`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub type Code = u8;

/// Hard ceiling on alphabet sizes; domains are stored as `u32` bitmasks in
/// the searches.
pub const MAX_ALPHABET_HARD: usize = 32;

/// Desk-scale guards. Every search downstream is exponential in these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_issues: usize,
    pub max_alphabet: usize,
    pub max_feasible: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_issues: 8,
            max_alphabet: 5,
            max_feasible: 64,
        }
    }
}

impl Limits {
    pub fn unbounded() -> Self {
        Limits {
            max_issues: usize::MAX,
            max_alphabet: MAX_ALPHABET_HARD,
            max_feasible: usize::MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationCode {
    IssueCount,
    AlphabetSize,
    DuplicateToken,
    Empty,
    Arity,
    UnknownValue,
    NonDegeneracy,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::IssueCount => "ISSUE_COUNT",
            ViolationCode::AlphabetSize => "ALPHABET_SIZE",
            ViolationCode::DuplicateToken => "DUPLICATE_TOKEN",
            ViolationCode::Empty => "EMPTY",
            ViolationCode::Arity => "ARITY",
            ViolationCode::UnknownValue => "UNKNOWN_VALUE",
            ViolationCode::NonDegeneracy => "NON_DEGENERACY",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a violation was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Domain,
    /// 0-based issue index.
    Issue(usize),
    /// The offending tuple, as codes.
    Tuple(Vec<Code>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn has(&self, code: ViolationCode) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{} ({})", v.code, v.message))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

/// `X` re-encoded over local indices, with an O(1) membership bitmap.
#[derive(Debug, Clone)]
pub struct Relation {
    pub sizes: Vec<usize>,
    pub rows: Vec<Vec<u8>>,
    member: Vec<bool>,
}

impl Relation {
    fn build(projections: &[Vec<Code>], rows: &[Vec<Code>]) -> Relation {
        let sizes: Vec<usize> = projections.iter().map(Vec::len).collect();
        let local_rows: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(projections)
                    .map(|(c, p)| p.binary_search(c).expect("row value outside projection") as u8)
                    .collect()
            })
            .collect();
        let total: usize = sizes.iter().product();
        let mut member = vec![false; total];
        for r in &local_rows {
            member[mixed_radix(&sizes, r)] = true;
        }
        Relation {
            sizes,
            rows: local_rows,
            member,
        }
    }

    pub fn issues(&self) -> usize {
        self.sizes.len()
    }

    pub fn contains(&self, row: &[u8]) -> bool {
        self.member[mixed_radix(&self.sizes, row)]
    }

    /// Splits the issues into blocks with `X` equal to the product of its
    /// projections onto them. Each block is the smallest set, containing the
    /// lowest remaining issue, that splits off. Above [`MAX_FACTOR_ISSUES`]
    /// the whole issue set is returned as one block.
    pub fn product_blocks(&self) -> Vec<Vec<usize>> {
        let m = self.issues();
        if m > MAX_FACTOR_ISSUES {
            return vec![(0..m).collect()];
        }
        let project = |rows: &HashSet<Vec<u8>>, from: &[usize], onto: &[usize]| -> HashSet<Vec<u8>> {
            let at: Vec<usize> = onto.iter().map(|j| from.iter().position(|f| f == j).expect("subset")).collect();
            rows.iter().map(|r| at.iter().map(|&i| r[i]).collect()).collect()
        };
        let mut remaining: Vec<usize> = (0..m).collect();
        let mut rows: HashSet<Vec<u8>> = self.rows.iter().cloned().collect();
        let mut blocks = Vec::new();
        while !remaining.is_empty() {
            let rest = &remaining[1..];
            let mut masks: Vec<u32> = (0..1u32 << rest.len()).collect();
            masks.sort_by_key(|&x| (x.count_ones(), x));
            let (block, others) = masks
                .into_iter()
                .map(|mask| {
                    let mut block = vec![remaining[0]];
                    let mut others = Vec::new();
                    for (i, &j) in rest.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            block.push(j);
                        } else {
                            others.push(j);
                        }
                    }
                    (block, others)
                })
                .find(|(block, others)| {
                    others.is_empty()
                        || project(&rows, &remaining, block).len() * project(&rows, &remaining, others).len()
                            == rows.len()
                })
                .expect("the full set always splits off");
            rows = project(&rows, &remaining, &others);
            blocks.push(block);
            remaining = others;
        }
        blocks
    }
}

/// Issue count above which [`Relation::product_blocks`] does not look for
/// a factorization.
pub const MAX_FACTOR_ISSUES: usize = 12;

fn mixed_radix(sizes: &[usize], row: &[u8]) -> usize {
    row.iter()
        .zip(sizes)
        .fold(0usize, |acc, (&v, &s)| acc * s + v as usize)
}

#[derive(Debug, Clone)]
pub struct Domain {
    alphabets: Vec<Vec<String>>,
    rows: Vec<Vec<Code>>,
    projections: Vec<Vec<Code>>,
    duplicates: usize,
    limits: Limits,
    relation: OnceLock<Relation>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.alphabets == other.alphabets && self.rows == other.rows
    }
}

impl Eq for Domain {}

impl Domain {
    /// Builds a domain from alphabets and coded tuples without validating
    /// them. Tuples are canonicalized (sorted, deduplicated); use
    /// [`Domain::validate`] to check the invariants.
    pub fn from_parts(alphabets: Vec<Vec<String>>, tuples: Vec<Vec<Code>>) -> Domain {
        let before = tuples.len();
        let rows: BTreeSet<Vec<Code>> = tuples.into_iter().collect();
        let rows: Vec<Vec<Code>> = rows.into_iter().collect();
        let duplicates = before - rows.len();
        let projections = (0..alphabets.len())
            .map(|j| {
                let col: BTreeSet<Code> = rows.iter().filter_map(|r| r.get(j).copied()).collect();
                col.into_iter().collect()
            })
            .collect();
        Domain {
            alphabets,
            rows,
            projections,
            duplicates,
            limits: Limits::default(),
            relation: OnceLock::new(),
        }
    }

    /// Builds a domain from token tuples; every token must be in its alphabet.
    pub fn from_tokens(alphabets: Vec<Vec<String>>, tuples: &[Vec<&str>]) -> Result<Domain> {
        let mut coded = Vec::with_capacity(tuples.len());
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != alphabets.len() {
                return Err(Error::Arity {
                    line: i + 1,
                    expected: alphabets.len(),
                    found: t.len(),
                });
            }
            let mut row = Vec::with_capacity(t.len());
            for (j, tok) in t.iter().enumerate() {
                let code = alphabets[j].iter().position(|a| a == tok).ok_or_else(|| {
                    Error::UnknownToken {
                        line: i + 1,
                        issue: j + 1,
                        token: tok.to_string(),
                    }
                })?;
                row.push(code as Code);
            }
            coded.push(row);
        }
        Ok(Domain::from_parts(alphabets, coded))
    }

    pub fn with_limits(mut self, limits: Limits) -> Domain {
        self.limits = limits;
        self
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    pub fn issue_count(&self) -> usize {
        self.alphabets.len()
    }

    pub fn alphabets(&self) -> &[Vec<String>] {
        &self.alphabets
    }

    pub fn alphabet(&self, j: usize) -> &[String] {
        &self.alphabets[j]
    }

    /// Canonically ordered feasible tuples.
    pub fn rows(&self) -> &[Vec<Code>] {
        &self.rows
    }

    pub fn projections(&self) -> &[Vec<Code>] {
        &self.projections
    }

    /// `X_j` as sorted codes.
    pub fn projection(&self, j: usize) -> &[Code] {
        &self.projections[j]
    }

    pub fn duplicates_removed(&self) -> usize {
        self.duplicates
    }

    pub fn token(&self, j: usize, code: Code) -> &str {
        &self.alphabets[j][code as usize]
    }

    /// Token of the local index `local` in `X_j`.
    pub fn local_token(&self, j: usize, local: usize) -> &str {
        self.token(j, self.projections[j][local])
    }

    pub fn code_of(&self, j: usize, token: &str) -> Option<Code> {
        self.alphabets[j].iter().position(|a| a == token).map(|c| c as Code)
    }

    /// Local index of `token` in `X_j`, if it is a projected value.
    pub fn local_of(&self, j: usize, token: &str) -> Option<usize> {
        let code = self.code_of(j, token)?;
        self.projections[j].binary_search(&code).ok()
    }

    pub fn contains(&self, row: &[Code]) -> bool {
        self.rows.binary_search_by(|r| r.as_slice().cmp(row)).is_ok()
    }

    /// True iff every projection `X_j` has exactly two values.
    pub fn is_boolean(&self) -> bool {
        self.projections.iter().all(|p| p.len() == 2)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    /// The local-index view of `X`. Only meaningful on valid domains.
    pub fn relation(&self) -> &Relation {
        self.relation
            .get_or_init(|| Relation::build(&self.projections, &self.rows))
    }

    /// Validity plus the desk-scale capacity guard; every analysis entry
    /// point calls this first.
    pub fn ensure_analyzable(&self) -> Result<()> {
        let report = self.validate();
        if !report.ok {
            return Err(Error::Invalid(report));
        }
        self.check_capacity()
    }

    pub fn check_capacity(&self) -> Result<()> {
        let l = self.limits;
        if self.issue_count() > l.max_issues {
            return Err(Error::Capacity(format!(
                "{} issues exceeds the limit of {}",
                self.issue_count(),
                l.max_issues
            )));
        }
        if let Some((j, a)) = self
            .alphabets
            .iter()
            .enumerate()
            .find(|(_, a)| a.len() > l.max_alphabet.min(MAX_ALPHABET_HARD))
        {
            return Err(Error::Capacity(format!(
                "alphabet {} has {} values, limit is {}",
                j + 1,
                a.len(),
                l.max_alphabet.min(MAX_ALPHABET_HARD)
            )));
        }
        if self.rows.len() > l.max_feasible {
            return Err(Error::Capacity(format!(
                "{} feasible tuples exceeds the limit of {}",
                self.rows.len(),
                l.max_feasible
            )));
        }
        Ok(())
    }

    /// All two-element subsets of `X_j` as local-index pairs `(a, b)` with
    /// `a < b`, in lexicographic order. `j` is 0-based.
    pub fn two_element_subsets(&self, j: usize) -> Result<Vec<(usize, usize)>> {
        if j >= self.issue_count() {
            return Err(Error::IssueOutOfRange {
                index: j + 1,
                issues: self.issue_count(),
            });
        }
        let s = self.projections[j].len();
        Ok((0..s)
            .flat_map(|a| ((a + 1)..s).map(move |b| (a, b)))
            .collect())
    }

    /// Every `(issue, pair)` in canonical order.
    pub fn all_two_element_subsets(&self) -> Vec<(usize, (usize, usize))> {
        (0..self.issue_count())
            .flat_map(|j| {
                self.two_element_subsets(j)
                    .expect("issue in range")
                    .into_iter()
                    .map(move |p| (j, p))
            })
            .collect()
    }

    /// Cartesian product of two domains: issues of `self` first.
    pub fn product(&self, other: &Domain) -> Domain {
        let mut alphabets = self.alphabets.clone();
        alphabets.extend(other.alphabets.iter().cloned());
        let mut tuples = Vec::with_capacity(self.rows.len() * other.rows.len());
        for a in &self.rows {
            for b in &other.rows {
                let mut t = a.clone();
                t.extend_from_slice(b);
                tuples.push(t);
            }
        }
        Domain::from_parts(alphabets, tuples).with_limits(self.limits)
    }

    /// Canonical text form; [`parse_domain`] inverts it exactly.
    pub fn serialize(&self) -> String {
        let mut out = format!("issues {}\n", self.issue_count());
        for (j, a) in self.alphabets.iter().enumerate() {
            out.push_str(&format!("alphabet {}: {}\n", j + 1, a.join(" ")));
        }
        for r in &self.rows {
            let toks: Vec<&str> = r
                .iter()
                .enumerate()
                .map(|(j, &c)| self.token(j, c))
                .collect();
            out.push_str(&format!("tuple: {}\n", toks.join(" ")));
        }
        out
    }

    pub fn format_row(&self, row: &[Code]) -> String {
        let toks: Vec<&str> = row
            .iter()
            .enumerate()
            .map(|(j, &c)| self.token(j, c))
            .collect();
        format!("({})", toks.join(","))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses the line-oriented domain file format.
pub fn parse_domain(text: &str) -> Result<Domain> {
    let mut issues: Option<usize> = None;
    let mut alphabets: Vec<Option<Vec<String>>> = Vec::new();
    let mut tuples: Vec<Vec<Code>> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let Some(m) = issues else {
            let mut it = line.split_whitespace();
            if it.next() != Some("issues") {
                return Err(syntax(lineno, "expected header `issues <m>`"));
            }
            let m: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .filter(|&m| m > 0)
                .ok_or_else(|| syntax(lineno, "issue count must be a positive integer"))?;
            if it.next().is_some() {
                return Err(syntax(lineno, "trailing tokens after issue count"));
            }
            issues = Some(m);
            alphabets = vec![None; m];
            continue;
        };

        if let Some(rest) = line.strip_prefix("alphabet") {
            if !tuples.is_empty() {
                return Err(syntax(lineno, "alphabet lines must precede tuples"));
            }
            let (idx, toks) = rest
                .split_once(':')
                .ok_or_else(|| syntax(lineno, "expected `alphabet <j>: <tok> ...`"))?;
            let j: usize = idx
                .trim()
                .parse()
                .map_err(|_| syntax(lineno, "alphabet index must be an integer"))?;
            if j == 0 || j > m {
                return Err(syntax(lineno, format!("alphabet index {j} outside 1..={m}")));
            }
            if alphabets[j - 1].is_some() {
                return Err(syntax(lineno, format!("alphabet {j} declared twice")));
            }
            let toks: Vec<String> = toks.split_whitespace().map(str::to_owned).collect();
            if toks.len() > MAX_ALPHABET_HARD {
                return Err(Error::Capacity(format!(
                    "alphabet {j} has {} values; hard limit is {MAX_ALPHABET_HARD}",
                    toks.len()
                )));
            }
            alphabets[j - 1] = Some(toks);
        } else if let Some(rest) = line.strip_prefix("tuple") {
            let rest = rest
                .trim_start()
                .strip_prefix(':')
                .ok_or_else(|| syntax(lineno, "expected `tuple: <tok> ...`"))?;
            if let Some(j) = alphabets.iter().position(Option::is_none) {
                return Err(syntax(lineno, format!("alphabet {} missing before tuples", j + 1)));
            }
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != m {
                return Err(Error::Arity {
                    line: lineno,
                    expected: m,
                    found: toks.len(),
                });
            }
            let mut row = Vec::with_capacity(m);
            for (j, tok) in toks.iter().enumerate() {
                let alpha = alphabets[j].as_ref().expect("checked above");
                let code = alpha.iter().position(|a| a == tok).ok_or_else(|| {
                    Error::UnknownToken {
                        line: lineno,
                        issue: j + 1,
                        token: tok.to_string(),
                    }
                })?;
                row.push(code as Code);
            }
            tuples.push(row);
        } else {
            return Err(syntax(lineno, format!("unrecognized line `{line}`")));
        }
    }

    if issues.is_none() {
        return Err(syntax(1, "missing header `issues <m>`"));
    }
    if let Some(j) = alphabets.iter().position(Option::is_none) {
        return Err(syntax(text.lines().count().max(1), format!("alphabet {} missing", j + 1)));
    }
    let alphabets = alphabets.into_iter().map(Option::unwrap).collect();
    Ok(Domain::from_parts(alphabets, tuples))
}

fn validate(d: &Domain) -> ValidationReport {
    let mut violations = Vec::new();
    let m = d.issue_count();
    if m == 0 {
        violations.push(Violation {
            code: ViolationCode::IssueCount,
            location: Location::Domain,
            message: "a domain needs at least one issue".into(),
        });
    }
    for (j, a) in d.alphabets.iter().enumerate() {
        if a.len() < 2 {
            violations.push(Violation {
                code: ViolationCode::AlphabetSize,
                location: Location::Issue(j),
                message: format!("alphabet {} has fewer than two values", j + 1),
            });
        }
        let distinct: BTreeSet<&String> = a.iter().collect();
        if distinct.len() != a.len() {
            violations.push(Violation {
                code: ViolationCode::DuplicateToken,
                location: Location::Issue(j),
                message: format!("alphabet {} repeats a token", j + 1),
            });
        }
    }
    if d.rows.is_empty() {
        violations.push(Violation {
            code: ViolationCode::Empty,
            location: Location::Domain,
            message: "the feasible set is empty".into(),
        });
    }
    let mut arity_ok = true;
    for r in &d.rows {
        if r.len() != m {
            arity_ok = false;
            violations.push(Violation {
                code: ViolationCode::Arity,
                location: Location::Tuple(r.clone()),
                message: format!("tuple has {} values, expected {m}", r.len()),
            });
            continue;
        }
        if let Some(j) = r
            .iter()
            .enumerate()
            .position(|(j, &c)| c as usize >= d.alphabets[j].len())
        {
            violations.push(Violation {
                code: ViolationCode::UnknownValue,
                location: Location::Tuple(r.clone()),
                message: format!("value code {} outside alphabet {}", r[j], j + 1),
            });
        }
    }
    if arity_ok && !d.rows.is_empty() {
        for (j, p) in d.projections.iter().enumerate() {
            if p.len() < 2 {
                violations.push(Violation {
                    code: ViolationCode::NonDegeneracy,
                    location: Location::Issue(j),
                    message: format!("projection X_{} has fewer than two values", j + 1),
                });
            }
        }
    }
    let mut warnings = Vec::new();
    if d.duplicates > 0 {
        warnings.push(format!("{} duplicate tuple(s) removed", d.duplicates));
    }
    ValidationReport {
        ok: violations.is_empty(),
        violations,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const W: &str = "issues 3\nalphabet 1: 0 1\nalphabet 2: 0 1\nalphabet 3: 0 1\n\
                     tuple: 1 0 0\ntuple: 0 1 0\ntuple: 0 0 1\n";

    #[test]
    fn parses_w() {
        let d = parse_domain(W).unwrap();
        assert_eq!(d.issue_count(), 3);
        assert_eq!(d.rows().len(), 3);
        for j in 0..3 {
            assert_eq!(d.projection(j), &[0, 1]);
        }
        assert!(d.validate().ok);
        // canonical order
        assert_eq!(d.rows()[0], vec![0, 0, 1]);
    }

    #[test]
    fn product_blocks() {
        let w = parse_domain(W).unwrap();
        assert_eq!(w.relation().product_blocks(), vec![vec![0, 1, 2]]);
        // issues 1 and 3 are tied, issue 2 is free
        let d = parse_domain(
            "issues 3\nalphabet 1: 0 1\nalphabet 2: 0 1\nalphabet 3: 0 1\n\
             tuple: 0 0 1\ntuple: 0 1 1\ntuple: 1 0 0\ntuple: 1 1 0\n",
        )
        .unwrap();
        assert_eq!(d.relation().product_blocks(), vec![vec![0, 2], vec![1]]);
        let ww = w.product(&w);
        assert_eq!(ww.relation().product_blocks(), vec![vec![0, 1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn degenerate_single_tuple() {
        let text = "issues 2\nalphabet 1: a b\nalphabet 2: a b\ntuple: a a\n";
        let d = parse_domain(text).unwrap();
        let report = d.validate();
        assert!(!report.ok);
        assert!(report.has(ViolationCode::NonDegeneracy));
        assert!(matches!(d.ensure_analyzable(), Err(Error::Invalid(_))));
    }

    #[test]
    fn arity_violation_reported() {
        let alphabets = vec![vec!["0".into(), "1".into()]; 2];
        let d = Domain::from_parts(alphabets, vec![vec![0, 1], vec![1, 0, 1]]);
        let report = d.validate();
        assert!(report.has(ViolationCode::Arity));
    }

    #[test]
    fn parse_errors() {
        let bad_arity = "issues 2\nalphabet 1: a b\nalphabet 2: a b\ntuple: a\n";
        assert!(matches!(parse_domain(bad_arity), Err(Error::Arity { line: 4, .. })));
        let unknown = "issues 1\nalphabet 1: a b\ntuple: c\n";
        assert!(matches!(
            parse_domain(unknown),
            Err(Error::UnknownToken { line: 3, issue: 1, .. })
        ));
        let garbage = "issues 1\nalphabet 1: a b\nfoo\n";
        assert!(matches!(parse_domain(garbage), Err(Error::Syntax { line: 3, .. })));
        assert!(matches!(parse_domain("tuple: a"), Err(Error::Syntax { line: 1, .. })));
    }

    #[test]
    fn comments_and_duplicates() {
        let text = "# header\nissues 1 # one issue\nalphabet 1: x y\ntuple: x\ntuple: y\ntuple: x\n";
        let d = parse_domain(text).unwrap();
        assert_eq!(d.rows().len(), 2);
        assert_eq!(d.duplicates_removed(), 1);
        let report = d.validate();
        assert!(report.ok);
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn two_element_subsets_order() {
        let d = parse_domain(W).unwrap();
        assert_eq!(d.two_element_subsets(0).unwrap(), vec![(0, 1)]);
        assert!(matches!(
            d.two_element_subsets(3),
            Err(Error::IssueOutOfRange { index: 4, issues: 3 })
        ));
    }

    #[test]
    fn capacity_guard() {
        let alphabets = vec![vec!["0".to_string(), "1".to_string()]; 9];
        let d = Domain::from_parts(alphabets, vec![vec![0; 9], vec![1; 9]]);
        assert!(d.validate().ok);
        assert!(d.ensure_analyzable().unwrap_err().is_capacity());
        let d = d.with_limits(Limits::unbounded());
        assert!(d.ensure_analyzable().is_ok());
    }

    #[test]
    fn serialize_round_trip() {
        let d = parse_domain(W).unwrap();
        let text = d.serialize();
        assert_eq!(parse_domain(&text).unwrap(), d);
        assert_eq!(parse_domain(&text).unwrap().serialize(), text);
    }

    #[test]
    fn relation_membership() {
        let d = parse_domain(W).unwrap();
        let rel = d.relation();
        assert!(rel.contains(&[1, 0, 0]));
        assert!(!rel.contains(&[1, 1, 0]));
    }
}

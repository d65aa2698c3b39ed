//! Aggregator candidates as dense per-issue operation tables.
//!
//! Component `j` of an `n`-ary tuple is a table over `X_j^n` indexed in
//! mixed radix with the first argument most significant, so cell order is the
//! lexicographic order of argument vectors. Values and arguments are local
//! indices into `X_j`.

use std::fmt;
use std::ops::Deref;

use rayon::prelude::*;

use crate::domain::{Code, Domain};
use crate::error::{Error, Result};

/// Largest arity accepted anywhere (searches stop at 3).
pub const MAX_ARITY: usize = 4;

pub fn cell_count(arity: usize, size: usize) -> usize {
    size.pow(arity as u32)
}

pub fn cell_index(args: &[u8], size: usize) -> usize {
    args.iter().fold(0usize, |acc, &a| acc * size + a as usize)
}

/// Inverse of [`cell_index`]; writes the argument vector into `out`.
pub fn cell_args(mut index: usize, size: usize, out: &mut [u8]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % size) as u8;
        index /= size;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OperationTable {
    issue: usize,
    arity: usize,
    size: usize,
    cells: Vec<u8>,
}

impl OperationTable {
    pub fn from_cells(issue: usize, arity: usize, size: usize, cells: Vec<u8>) -> Result<Self> {
        if arity == 0 || arity > MAX_ARITY {
            return Err(Error::Alignment(format!("arity {arity} outside 1..={MAX_ARITY}")));
        }
        if cells.len() != cell_count(arity, size) {
            return Err(Error::Alignment(format!(
                "issue {}: table has {} cells, expected {}",
                issue + 1,
                cells.len(),
                cell_count(arity, size)
            )));
        }
        let mut args = vec![0u8; arity];
        for (i, &v) in cells.iter().enumerate() {
            cell_args(i, size, &mut args);
            if !args.contains(&v) {
                return Err(Error::NotSupportive {
                    issue: issue + 1,
                    args: args.iter().map(|&a| a as usize).collect(),
                });
            }
        }
        Ok(OperationTable {
            issue,
            arity,
            size,
            cells,
        })
    }

    pub fn from_fn(
        issue: usize,
        arity: usize,
        size: usize,
        mut f: impl FnMut(&[u8]) -> u8,
    ) -> Result<Self> {
        let mut args = vec![0u8; arity];
        let cells = (0..cell_count(arity, size))
            .map(|i| {
                cell_args(i, size, &mut args);
                f(&args)
            })
            .collect();
        Self::from_cells(issue, arity, size, cells)
    }

    /// The projection onto argument `d` (0-based).
    pub fn projection(issue: usize, arity: usize, size: usize, d: usize) -> Self {
        assert!(d < arity, "projection index out of range");
        Self::from_fn(issue, arity, size, |a| a[d]).expect("projections are supportive")
    }

    pub fn issue(&self) -> usize {
        self.issue
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `|X_j|`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn eval(&self, args: &[u8]) -> u8 {
        self.cells[cell_index(args, self.size)]
    }

    pub fn is_projection(&self, d: usize) -> bool {
        let mut args = vec![0u8; self.arity];
        self.cells.iter().enumerate().all(|(i, &v)| {
            cell_args(i, self.size, &mut args);
            args[d] == v
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AggregatorTuple {
    arity: usize,
    components: Vec<OperationTable>,
}

impl AggregatorTuple {
    pub fn new(components: Vec<OperationTable>) -> Result<Self> {
        let arity = components
            .first()
            .map(OperationTable::arity)
            .ok_or_else(|| Error::Alignment("aggregator needs at least one component".into()))?;
        if arity < 2 {
            return Err(Error::Alignment(format!("aggregator arity {arity} < 2")));
        }
        for (j, c) in components.iter().enumerate() {
            if c.arity != arity {
                return Err(Error::Alignment(format!(
                    "component {} has arity {}, expected {arity}",
                    j + 1,
                    c.arity
                )));
            }
            if c.issue != j {
                return Err(Error::Alignment(format!(
                    "component {} is labelled with issue {}",
                    j + 1,
                    c.issue + 1
                )));
            }
        }
        Ok(AggregatorTuple { arity, components })
    }

    /// `(pr_d, ..., pr_d)` of the given arity; `d` is 0-based.
    pub fn dictator(domain: &Domain, arity: usize, d: usize) -> Self {
        let components = (0..domain.issue_count())
            .map(|j| OperationTable::projection(j, arity, domain.projection(j).len(), d))
            .collect();
        AggregatorTuple::new(components).expect("projection tuple is aligned")
    }

    /// Every issue `j` gets its own projection `picks[j]`.
    pub fn projections(domain: &Domain, arity: usize, picks: &[usize]) -> Self {
        let components = picks
            .iter()
            .enumerate()
            .map(|(j, &d)| OperationTable::projection(j, arity, domain.projection(j).len(), d))
            .collect();
        AggregatorTuple::new(components).expect("projection tuple is aligned")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn components(&self) -> &[OperationTable] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &OperationTable {
        &self.components[j]
    }

    pub fn check_alignment(&self, domain: &Domain) -> Result<()> {
        if self.components.len() != domain.issue_count() {
            return Err(Error::Alignment(format!(
                "{} components for {} issues",
                self.components.len(),
                domain.issue_count()
            )));
        }
        for (j, c) in self.components.iter().enumerate() {
            let s = domain.projection(j).len();
            if c.size != s {
                return Err(Error::Alignment(format!(
                    "component {} is over {} values, X_{} has {s}",
                    j + 1,
                    c.size,
                    j + 1
                )));
            }
        }
        Ok(())
    }
}

/// An aggregator tuple that has passed [`is_closed`] on some domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifiedAggregator(AggregatorTuple);

impl VerifiedAggregator {
    pub fn tuple(&self) -> &AggregatorTuple {
        &self.0
    }

    pub fn into_tuple(self) -> AggregatorTuple {
        self.0
    }
}

impl Deref for VerifiedAggregator {
    type Target = AggregatorTuple;

    fn deref(&self) -> &AggregatorTuple {
        &self.0
    }
}

pub fn verify(domain: &Domain, tuple: AggregatorTuple) -> Result<VerifiedAggregator> {
    if is_closed(domain, &tuple)?.is_closed() {
        Ok(VerifiedAggregator(tuple))
    } else {
        Err(Error::NotAggregator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedOp {
    Maj,
    Xor3,
    And3,
    Or3,
}

impl NamedOp {
    pub const ALL: [NamedOp; 4] = [NamedOp::Maj, NamedOp::Xor3, NamedOp::And3, NamedOp::Or3];

    pub fn parse(s: &str) -> Option<NamedOp> {
        match s {
            "maj" => Some(NamedOp::Maj),
            "xor3" => Some(NamedOp::Xor3),
            "and3" => Some(NamedOp::And3),
            "or3" => Some(NamedOp::Or3),
            _ => None,
        }
    }

    pub fn class(self) -> RestrictionClass {
        match self {
            NamedOp::Maj => RestrictionClass::Maj,
            NamedOp::Xor3 => RestrictionClass::Xor3,
            NamedOp::And3 => RestrictionClass::And3,
            NamedOp::Or3 => RestrictionClass::Or3,
        }
    }
}

/// Evaluates one of the four named ternary operations.
///
/// `maj` only needs two equal arguments; the other three require every
/// argument to lie in `{zero, one}`.
pub fn eval_named<T: PartialEq + Copy + fmt::Debug>(
    op: NamedOp,
    zero: T,
    one: T,
    x: T,
    y: T,
    z: T,
) -> Result<T> {
    let distinct = x != y && y != z && x != z;
    if distinct {
        return Err(Error::Value(format!(
            "pairwise distinct arguments {x:?}, {y:?}, {z:?}"
        )));
    }
    if op == NamedOp::Maj {
        return Ok(if x == y || x == z { x } else { y });
    }
    for v in [x, y, z] {
        if v != zero && v != one {
            return Err(Error::Value(format!("{v:?} outside labeling ({zero:?}, {one:?})")));
        }
    }
    Ok(match op {
        NamedOp::Xor3 => {
            if x == y {
                z
            } else if y == z {
                x
            } else {
                y
            }
        }
        NamedOp::And3 => {
            if x == zero || y == zero || z == zero {
                zero
            } else {
                one
            }
        }
        NamedOp::Or3 => {
            if x == one || y == one || z == one {
                one
            } else {
                zero
            }
        }
        NamedOp::Maj => unreachable!(),
    })
}

/// What a table looks like on a two-element subset `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RestrictionClass {
    /// Projection onto argument `d` (0-based).
    Projection(usize),
    And3,
    Or3,
    Maj,
    Xor3,
    Other,
}

impl RestrictionClass {
    /// Membership in `{AND3, OR3, MAJ, XOR3}`, which does not depend on how
    /// `B` is labelled.
    pub fn is_four_op(self) -> bool {
        matches!(
            self,
            RestrictionClass::And3
                | RestrictionClass::Or3
                | RestrictionClass::Maj
                | RestrictionClass::Xor3
        )
    }

    pub fn is_projection(self) -> bool {
        matches!(self, RestrictionClass::Projection(_))
    }
}

impl fmt::Display for RestrictionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RestrictionClass::Projection(d) => write!(f, "PROJECTION({})", d + 1),
            RestrictionClass::And3 => f.write_str("AND3"),
            RestrictionClass::Or3 => f.write_str("OR3"),
            RestrictionClass::Maj => f.write_str("MAJ"),
            RestrictionClass::Xor3 => f.write_str("XOR3"),
            RestrictionClass::Other => f.write_str("OTHER"),
        }
    }
}

fn check_pair(t: &OperationTable, pair: (usize, usize)) -> Result<(u8, u8)> {
    let (a, b) = pair;
    if a == b || a >= t.size || b >= t.size {
        return Err(Error::InvalidPair(format!(
            "({a}, {b}) is not a two-element subset of X_{}",
            t.issue + 1
        )));
    }
    Ok((a.min(b) as u8, a.max(b) as u8))
}

/// Truth vector of `t` restricted to `B = {zero, one}`: bit `mask` (argument
/// `i` is `one` iff bit `arity-1-i` of `mask` is set) holds iff the output is
/// `one`.
fn restriction_bits(t: &OperationTable, zero: u8, one: u8) -> Vec<bool> {
    let n = t.arity;
    let mut args = vec![0u8; n];
    (0..1usize << n)
        .map(|mask| {
            for (i, a) in args.iter_mut().enumerate() {
                *a = if mask >> (n - 1 - i) & 1 == 1 { one } else { zero };
            }
            t.eval(&args) == one
        })
        .collect()
}

/// Classifies `t` restricted to the two-element subset `pair` (local indices).
/// The smaller index is labelled zero.
pub fn restriction_class(t: &OperationTable, pair: (usize, usize)) -> Result<RestrictionClass> {
    let (zero, one) = check_pair(t, pair)?;
    let n = t.arity;
    let bits = restriction_bits(t, zero, one);
    for d in 0..n {
        if bits
            .iter()
            .enumerate()
            .all(|(mask, &b)| b == (mask >> (n - 1 - d) & 1 == 1))
        {
            return Ok(RestrictionClass::Projection(d));
        }
    }
    if n == 3 {
        for op in [NamedOp::And3, NamedOp::Or3, NamedOp::Maj, NamedOp::Xor3] {
            let matches = bits.iter().enumerate().all(|(mask, &b)| {
                let v = |i: usize| mask >> (2 - i) & 1 == 1;
                let out = eval_named(op, false, true, v(0), v(1), v(2)).expect("boolean args");
                out == b
            });
            if matches {
                return Ok(op.class());
            }
        }
    }
    Ok(RestrictionClass::Other)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    /// The `n` input rows, as codes.
    pub rows: Vec<Vec<Code>>,
    /// Their componentwise image, which is not in `X`.
    pub image: Vec<Code>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureCheck {
    pub counterexample: Option<Counterexample>,
}

impl ClosureCheck {
    pub fn is_closed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Decides whether `X` is closed under `f`, returning the lexicographically
/// first counterexample (in canonical row order) when it is not.
pub fn is_closed(domain: &Domain, f: &AggregatorTuple) -> Result<ClosureCheck> {
    f.check_alignment(domain)?;
    let rel = domain.relation();
    let rows = &rel.rows;
    let count = rows.len();
    let n = f.arity();
    let m = domain.issue_count();

    let first_failure = (0..count).into_par_iter().find_map_first(|first| {
        let mut picks = vec![0usize; n];
        picks[0] = first;
        let mut column = vec![0u8; n];
        let mut image = vec![0u8; m];
        loop {
            for (j, out) in image.iter_mut().enumerate() {
                for (slot, &r) in column.iter_mut().zip(&picks) {
                    *slot = rows[r][j];
                }
                *out = f.components[j].eval(&column);
            }
            if !rel.contains(&image) {
                return Some(picks.clone());
            }
            // odometer over picks[1..]
            let mut k = n;
            loop {
                if k == 1 {
                    return None;
                }
                k -= 1;
                picks[k] += 1;
                if picks[k] < count {
                    break;
                }
                picks[k] = 0;
            }
        }
    });

    let counterexample = first_failure.map(|picks| {
        let input: Vec<Vec<Code>> = picks.iter().map(|&r| domain.rows()[r].clone()).collect();
        let image = (0..m)
            .map(|j| {
                let column: Vec<u8> = picks.iter().map(|&r| rows[r][j]).collect();
                domain.projection(j)[f.components[j].eval(&column) as usize]
            })
            .collect();
        Counterexample {
            rows: input,
            image,
        }
    });
    Ok(ClosureCheck { counterexample })
}

/// Returns the dictator `d` (0-based) when every component equals `pr_d` on
/// all of `X_j^n`.
pub fn is_dictatorial(domain: &Domain, f: &AggregatorTuple) -> Result<Option<usize>> {
    f.check_alignment(domain)?;
    Ok((0..f.arity()).find(|&d| f.components.iter().all(|c| c.is_projection(d))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectionFailure {
    pub issue: usize,
    pub pair: (usize, usize),
    /// 0-based projection index.
    pub projection: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformityCheck {
    pub failures: Vec<ProjectionFailure>,
}

impl UniformityCheck {
    pub fn is_uniform(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Lists every `(j, B_j)` on which `f_j` restricts to a projection.
pub fn is_uniformly_nondictatorial(
    domain: &Domain,
    f: &AggregatorTuple,
) -> Result<UniformityCheck> {
    f.check_alignment(domain)?;
    let mut failures = Vec::new();
    for (j, pair) in domain.all_two_element_subsets() {
        if let RestrictionClass::Projection(d) = restriction_class(&f.components[j], pair)? {
            failures.push(ProjectionFailure {
                issue: j,
                pair,
                projection: d,
            });
        }
    }
    Ok(UniformityCheck { failures })
}

/// Checks `f_j(g(x)) = g(f_i(x))` for every pair of two-element subsets
/// `B_i`, `B_j` (including `i = j`) and both bijections `g: B_i -> B_j`.
pub fn is_locally_monomorphic(domain: &Domain, f: &AggregatorTuple) -> Result<bool> {
    f.check_alignment(domain)?;
    let n = f.arity();
    let all_ones = (1usize << n) - 1;
    let truth: Vec<Vec<bool>> = domain
        .all_two_element_subsets()
        .into_iter()
        .map(|(j, (a, b))| restriction_bits(&f.components[j], a as u8, b as u8))
        .collect();
    for ti in &truth {
        for tj in &truth {
            for mask in 0..=all_ones {
                // g maps zero to zero and one to one
                if tj[mask] != ti[mask] {
                    return Ok(false);
                }
                // g swaps the labels: inputs and output are complemented
                if tj[all_ones ^ mask] == ti[mask] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `g_j(x) = f_j(h^1_j(x), ..., h^n_j(x))`.
pub fn superpose(
    domain: &Domain,
    f: &VerifiedAggregator,
    hs: &[VerifiedAggregator],
) -> Result<VerifiedAggregator> {
    if hs.len() != f.arity() {
        return Err(Error::Alignment(format!(
            "superposition of an arity-{} tuple needs {} inner tuples, got {}",
            f.arity(),
            f.arity(),
            hs.len()
        )));
    }
    let k = hs[0].arity();
    if let Some(h) = hs.iter().find(|h| h.arity() != k) {
        return Err(Error::Alignment(format!(
            "inner tuples disagree on arity ({k} vs {})",
            h.arity()
        )));
    }
    f.check_alignment(domain)?;
    for h in hs {
        h.check_alignment(domain)?;
    }
    let components = (0..domain.issue_count())
        .map(|j| {
            let size = domain.projection(j).len();
            let mut inner = vec![0u8; f.arity()];
            OperationTable::from_fn(j, k, size, |args| {
                for (slot, h) in inner.iter_mut().zip(hs) {
                    *slot = h.components[j].eval(args);
                }
                f.components[j].eval(&inner)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let g = AggregatorTuple::new(components)?;
    verify(domain, g).map_err(|_| Error::Invariant("superposition of aggregators is not closed".into()))
}

/// `h_j(x, y, z) = f_j(g_j(x, y, z), g_j(y, z, x), g_j(z, x, y))`.
pub fn diamond(
    domain: &Domain,
    f: &VerifiedAggregator,
    g: &VerifiedAggregator,
) -> Result<VerifiedAggregator> {
    for t in [f, g] {
        if t.arity() != 3 {
            return Err(Error::NotTernary(t.arity()));
        }
    }
    let rotations: Vec<VerifiedAggregator> = [[0usize, 1, 2], [1, 2, 0], [2, 0, 1]]
        .iter()
        .map(|perm| {
            let components = (0..domain.issue_count())
                .map(|j| {
                    let size = domain.projection(j).len();
                    OperationTable::from_fn(j, 3, size, |a| {
                        g.components[j].eval(&[a[perm[0]], a[perm[1]], a[perm[2]]])
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            // A permutation of the arguments of an aggregator is an aggregator.
            Ok(VerifiedAggregator(AggregatorTuple::new(components)?))
        })
        .collect::<Result<_>>()?;
    superpose(domain, f, &rotations)
}

/// Witness text: `aggregator arity <n>`, then per issue `component <j>:`
/// followed by `<x1> ... <xn> -> <v>` for every cell in canonical order.
pub fn serialize_witness(domain: &Domain, f: &AggregatorTuple) -> String {
    let mut out = format!("aggregator arity {}\n", f.arity());
    let mut args = vec![0u8; f.arity()];
    for (j, c) in f.components.iter().enumerate() {
        out.push_str(&format!("component {}:\n", j + 1));
        for (i, &v) in c.cells.iter().enumerate() {
            cell_args(i, c.size, &mut args);
            let toks: Vec<&str> = args.iter().map(|&a| domain.local_token(j, a as usize)).collect();
            out.push_str(&format!(
                "{} -> {}\n",
                toks.join(" "),
                domain.local_token(j, v as usize)
            ));
        }
    }
    out
}

fn witness_err(line: usize, message: impl Into<String>) -> Error {
    Error::WitnessFormat {
        line,
        message: message.into(),
    }
}

pub fn parse_witness(domain: &Domain, text: &str) -> Result<AggregatorTuple> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (lineno, header) = lines.next().ok_or_else(|| witness_err(1, "empty witness"))?;
    let arity: usize = header
        .strip_prefix("aggregator arity")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| witness_err(lineno, "expected `aggregator arity <n>`"))?;
    if !(2..=MAX_ARITY).contains(&arity) {
        return Err(witness_err(lineno, format!("arity {arity} outside 2..={MAX_ARITY}")));
    }
    let m = domain.issue_count();
    let mut tables: Vec<Vec<Option<u8>>> = Vec::with_capacity(m);
    let mut current: Option<usize> = None;
    for (lineno, line) in lines {
        if let Some(rest) = line.strip_prefix("component") {
            let j: usize = rest
                .trim()
                .strip_suffix(':')
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| witness_err(lineno, "expected `component <j>:`"))?;
            if j != tables.len() + 1 || j > m {
                return Err(witness_err(lineno, format!("unexpected component {j}")));
            }
            let size = domain.projection(j - 1).len();
            tables.push(vec![None; cell_count(arity, size)]);
            current = Some(j - 1);
            continue;
        }
        let j = current.ok_or_else(|| witness_err(lineno, "cell line before any component"))?;
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| witness_err(lineno, "expected `<x1> ... <xn> -> <v>`"))?;
        let local = |tok: &str| {
            domain
                .local_of(j, tok)
                .ok_or_else(|| witness_err(lineno, format!("`{tok}` is not in X_{}", j + 1)))
        };
        let args: Vec<u8> = lhs
            .split_whitespace()
            .map(|t| local(t).map(|v| v as u8))
            .collect::<Result<_>>()?;
        if args.len() != arity {
            return Err(witness_err(lineno, format!("expected {arity} arguments")));
        }
        let value = local(rhs.trim())? as u8;
        let size = domain.projection(j).len();
        let slot = &mut tables[j][cell_index(&args, size)];
        if slot.is_some() {
            return Err(witness_err(lineno, "cell defined twice"));
        }
        *slot = Some(value);
    }
    if tables.len() != m {
        return Err(witness_err(0, format!("expected {m} components, found {}", tables.len())));
    }
    let components = tables
        .into_iter()
        .enumerate()
        .map(|(j, cells)| {
            let cells: Vec<u8> = cells
                .into_iter()
                .collect::<Option<_>>()
                .ok_or_else(|| witness_err(0, format!("component {} is incomplete", j + 1)))?;
            OperationTable::from_cells(j, arity, domain.projection(j).len(), cells)
        })
        .collect::<Result<Vec<_>>>()?;
    AggregatorTuple::new(components)
}

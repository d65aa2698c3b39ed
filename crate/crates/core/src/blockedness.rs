//! Minimal infeasible partial evaluations, the graph `G_X` and total
//! blockedness.
//!
//! Vertices of `G_X` are ordered pairs `uu'_j` of distinct values of `X_j`.
//! An edge `uu'_k -> vv'_l` (with `k != l`) exists when some 2-sub-box `B`
//! with `B_k = {u, u'}` and `B_l = {v, v'}` has a `B`-MIPE `x` whose support
//! contains `k` and `l` with `x_k = u` and `x_l = v'`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::algebra::{self, AggregatorTuple, OperationTable, VerifiedAggregator};
use crate::domain::Domain;
use crate::error::{Error, Result};

/// Upper bound on the number of 2-sub-boxes visited by [`build_graph`].
pub const MAX_TWO_SUB_BOXES: u64 = 1 << 22;

/// Upper bound on the work (boxes times evaluations) of
/// [`is_multiply_constrained`].
pub const MAX_MULTIPLY_CONSTRAINED_WORK: u64 = 1 << 26;

/// A product of non-empty subsets `B_j ⊆ X_j`, as sorted local indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubBox {
    pub cells: Vec<Vec<u8>>,
}

impl SubBox {
    pub fn new(domain: &Domain, mut cells: Vec<Vec<u8>>) -> Result<SubBox> {
        if cells.len() != domain.issue_count() {
            return Err(Error::Alignment(format!(
                "sub-box has {} factors for {} issues",
                cells.len(),
                domain.issue_count()
            )));
        }
        for (j, c) in cells.iter_mut().enumerate() {
            c.sort_unstable();
            c.dedup();
            let s = domain.projection(j).len();
            if c.is_empty() || c.iter().any(|&v| v as usize >= s) {
                return Err(Error::Alignment(format!(
                    "factor {} must be a non-empty subset of X_{}",
                    j + 1,
                    j + 1
                )));
            }
        }
        Ok(SubBox { cells })
    }

    /// The full box `∏ X_j`.
    pub fn full(domain: &Domain) -> SubBox {
        SubBox {
            cells: (0..domain.issue_count())
                .map(|j| (0..domain.projection(j).len() as u8).collect())
                .collect(),
        }
    }

    pub fn is_two_sub_box(&self) -> bool {
        self.cells.iter().all(|c| c.len() == 2)
    }

    fn contains_row(&self, row: &[u8]) -> bool {
        row.iter().zip(&self.cells).all(|(v, c)| c.contains(v))
    }
}

/// A `B`-minimal infeasible partial evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mipe {
    pub sub_box: SubBox,
    /// Sorted issue indices `K`.
    pub support: Vec<usize>,
    /// Local values aligned with `support`.
    pub assignment: Vec<u8>,
}

impl Mipe {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
}

fn check_assignment(sub_box: &SubBox, support: &[usize], assignment: &[u8]) -> Result<()> {
    if support.len() != assignment.len() {
        return Err(Error::Alignment("support and assignment lengths differ".into()));
    }
    for (&j, v) in support.iter().zip(assignment) {
        if j >= sub_box.cells.len() || !sub_box.cells[j].contains(v) {
            return Err(Error::Value(format!(
                "assignment of issue {} lies outside the sub-box",
                j + 1
            )));
        }
    }
    Ok(())
}

/// Is there a feasible tuple in `sub_box` agreeing with `assignment` on
/// `support`?
pub fn feasible_in_box(
    domain: &Domain,
    sub_box: &SubBox,
    support: &[usize],
    assignment: &[u8],
) -> Result<bool> {
    check_assignment(sub_box, support, assignment)?;
    Ok(feasible_unchecked(domain, sub_box, support, assignment))
}

fn feasible_unchecked(domain: &Domain, sub_box: &SubBox, support: &[usize], assignment: &[u8]) -> bool {
    domain.relation().rows.iter().any(|r| {
        sub_box.contains_row(r) && support.iter().zip(assignment).all(|(&j, &v)| r[j] == v)
    })
}

/// Literal MIPE test on an arbitrary sub-box. An empty support is never a
/// MIPE: there is no coordinate whose flip could restore feasibility.
pub fn is_mipe(domain: &Domain, sub_box: &SubBox, support: &[usize], assignment: &[u8]) -> Result<bool> {
    check_assignment(sub_box, support, assignment)?;
    if support.is_empty() || feasible_unchecked(domain, sub_box, support, assignment) {
        return Ok(false);
    }
    let mut flipped = assignment.to_vec();
    for (i, &j) in support.iter().enumerate() {
        let restored = sub_box.cells[j].iter().any(|&b| {
            b != assignment[i] && {
                flipped[i] = b;
                let ok = feasible_unchecked(domain, sub_box, support, &flipped);
                flipped[i] = assignment[i];
                ok
            }
        });
        if !restored {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Supports ordered by size, then lexicographically.
fn ordered_supports(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(1 << m);
    for size in 1..=m {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.clone());
            let mut i = size;
            let advanced = loop {
                if i == 0 {
                    break false;
                }
                i -= 1;
                if combo[i] < m - size + i {
                    combo[i] += 1;
                    for t in i + 1..size {
                        combo[t] = combo[t - 1] + 1;
                    }
                    break true;
                }
            };
            if !advanced {
                break;
            }
        }
    }
    out
}

/// MIPEs of one 2-sub-box as `(support, bit assignment)` pairs, where bit `j`
/// selects `cells[j][1]`. Returns `None` when `X ∩ B` is empty.
fn box_mipes(domain: &Domain, sub_box: &SubBox, supports: &[Vec<usize>]) -> Option<Vec<(usize, u32)>> {
    let m = domain.issue_count();
    let rows: Vec<u32> = domain
        .relation()
        .rows
        .iter()
        .filter(|r| sub_box.contains_row(r))
        .map(|r| {
            r.iter()
                .enumerate()
                .fold(0u32, |acc, (j, &v)| acc | ((v == sub_box.cells[j][1]) as u32) << j)
        })
        .collect();
    if rows.is_empty() {
        return None;
    }
    let mut seen = vec![false; 1 << m];
    let mut out = Vec::new();
    for (si, support) in supports.iter().enumerate() {
        let kmask: u32 = support.iter().fold(0, |acc, &j| acc | 1 << j);
        seen.iter_mut().for_each(|s| *s = false);
        for &r in &rows {
            seen[(r & kmask) as usize] = true;
        }
        let t = support.len();
        for counter in 0..(1u32 << t) {
            let a = support
                .iter()
                .enumerate()
                .fold(0u32, |acc, (i, &j)| acc | (counter >> (t - 1 - i) & 1) << j);
            if seen[a as usize] {
                continue;
            }
            if support.iter().all(|&j| seen[(a ^ (1 << j)) as usize]) {
                out.push((si, a));
            }
        }
    }
    Some(out)
}

/// Every MIPE of a 2-sub-box, ordered by support size, then support, then
/// assignment.
pub fn enumerate_mipes(domain: &Domain, sub_box: &SubBox) -> Result<Vec<Mipe>> {
    domain.ensure_analyzable()?;
    if !sub_box.is_two_sub_box() || sub_box.cells.len() != domain.issue_count() {
        return Err(Error::Value("enumerate_mipes requires a 2-sub-box".into()));
    }
    let supports = ordered_supports(domain.issue_count());
    let found = box_mipes(domain, sub_box, &supports).unwrap_or_default();
    Ok(found
        .into_iter()
        .map(|(si, a)| {
            let support = supports[si].clone();
            let assignment = support
                .iter()
                .map(|&j| sub_box.cells[j][(a >> j & 1) as usize])
                .collect();
            Mipe {
                sub_box: sub_box.clone(),
                support,
                assignment,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    pub issue: usize,
    pub first: u8,
    pub second: u8,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeWitness {
    /// The 2-sub-box as `(smaller, larger)` local pairs.
    pub sub_box: Vec<(u8, u8)>,
    pub support: Vec<usize>,
    pub assignment: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub witness: EdgeWitness,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condensation {
    /// Component id of each vertex.
    pub component_of: Vec<usize>,
    /// Sorted vertex ids per component; components ordered by smallest vertex.
    pub components: Vec<Vec<usize>>,
    /// Edges between distinct components, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl Condensation {
    pub fn is_strongly_connected(&self) -> bool {
        self.components.len() == 1
    }

    /// Components with no incoming edge from another component.
    pub fn sources(&self) -> Vec<usize> {
        let mut has_incoming = vec![false; self.components.len()];
        for &(_, to) in &self.edges {
            has_incoming[to] = true;
        }
        (0..self.components.len()).filter(|&c| !has_incoming[c]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct BlockednessGraph {
    vertices: Vec<Vertex>,
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    edges: Vec<Edge>,
    empty_boxes: u64,
    condensation: Condensation,
}

impl BlockednessGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// 2-sub-boxes containing no feasible tuple.
    pub fn empty_boxes(&self) -> u64 {
        self.empty_boxes
    }

    pub fn condensation(&self) -> &Condensation {
        &self.condensation
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.condensation.is_strongly_connected()
    }

    pub fn vertex_id(&self, issue: usize, first: u8, second: u8) -> usize {
        vertex_id(&self.offsets, &self.sizes, issue, first, second)
    }

    pub fn vertex_name(&self, domain: &Domain, id: usize) -> String {
        let v = self.vertices[id];
        format!(
            "{}:{}{}",
            v.issue + 1,
            domain.local_token(v.issue, v.first as usize),
            domain.local_token(v.issue, v.second as usize)
        )
    }

    fn witness_label(&self, domain: &Domain, w: &EdgeWitness) -> String {
        let k: Vec<String> = w.support.iter().map(|j| (j + 1).to_string()).collect();
        let x: Vec<&str> = w
            .support
            .iter()
            .zip(&w.assignment)
            .map(|(&j, &v)| domain.local_token(j, v as usize))
            .collect();
        format!("K={};x={}", k.join(","), x.join(","))
    }

    /// Byte-stable DOT rendering.
    pub fn to_dot(&self, domain: &Domain) -> String {
        let mut out = String::from("digraph G_X {\n");
        for id in 0..self.vertices.len() {
            let _ = writeln!(out, "  \"{}\";", dot_escape(&self.vertex_name(domain, id)));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -> \"{}\" [witness=\"{}\"];",
                dot_escape(&self.vertex_name(domain, e.from)),
                dot_escape(&self.vertex_name(domain, e.to)),
                dot_escape(&self.witness_label(domain, &e.witness))
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn to_text(&self, domain: &Domain) -> String {
        let c = &self.condensation;
        let mut out = format!(
            "vertices = {}\nedges = {}\ncomponents = {}\nstrongly_connected = {}\nempty_two_sub_boxes = {}\n",
            self.vertices.len(),
            self.edges.len(),
            c.components.len(),
            if c.is_strongly_connected() { "yes" } else { "no" },
            self.empty_boxes
        );
        for (i, comp) in c.components.iter().enumerate() {
            let names: Vec<String> = comp.iter().map(|&v| self.vertex_name(domain, v)).collect();
            let _ = writeln!(out, "component {} = {}", i + 1, names.join(" "));
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "edge {} -> {} {}",
                self.vertex_name(domain, e.from),
                self.vertex_name(domain, e.to),
                self.witness_label(domain, &e.witness)
            );
        }
        out
    }
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn vertex_id(offsets: &[usize], sizes: &[usize], issue: usize, first: u8, second: u8) -> usize {
    let s = sizes[issue];
    let (u, v) = (first as usize, second as usize);
    debug_assert!(u != v && u < s && v < s);
    offsets[issue] + u * (s - 1) + if v < u { v } else { v - 1 }
}

/// Builds `G_X`, keeping the first witness (in canonical box / MIPE / pair
/// order) for each edge.
pub fn build_graph(domain: &Domain) -> Result<BlockednessGraph> {
    domain.ensure_analyzable()?;
    let m = domain.issue_count();
    let sizes: Vec<usize> = domain.projections().iter().map(Vec::len).collect();

    let mut offsets = Vec::with_capacity(m);
    let mut vertices = Vec::new();
    for (j, &s) in sizes.iter().enumerate() {
        offsets.push(vertices.len());
        for u in 0..s as u8 {
            for v in 0..s as u8 {
                if u != v {
                    vertices.push(Vertex {
                        issue: j,
                        first: u,
                        second: v,
                    });
                }
            }
        }
    }

    let pairs: Vec<Vec<(u8, u8)>> = (0..m)
        .map(|j| {
            domain
                .two_element_subsets(j)
                .expect("issue in range")
                .into_iter()
                .map(|(a, b)| (a as u8, b as u8))
                .collect()
        })
        .collect();
    let box_count = pairs
        .iter()
        .try_fold(1u64, |acc, p| acc.checked_mul(p.len() as u64))
        .filter(|&n| n <= MAX_TWO_SUB_BOXES)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "G_X construction would visit more than {MAX_TWO_SUB_BOXES} 2-sub-boxes"
            ))
        })?;

    let supports = ordered_supports(m);
    let per_box: Vec<Option<Vec<(usize, usize, EdgeWitness)>>> = (0..box_count)
        .into_par_iter()
        .map(|index| {
            let mut rest = index;
            let mut chosen = vec![(0u8, 0u8); m];
            for j in (0..m).rev() {
                let len = pairs[j].len() as u64;
                chosen[j] = pairs[j][(rest % len) as usize];
                rest /= len;
            }
            let sub_box = SubBox {
                cells: chosen.iter().map(|&(a, b)| vec![a, b]).collect(),
            };
            let mipes = box_mipes(domain, &sub_box, &supports)?;
            let mut edges = Vec::new();
            for (si, a) in mipes {
                let support = &supports[si];
                let value = |j: usize| sub_box.cells[j][(a >> j & 1) as usize];
                let other = |j: usize| sub_box.cells[j][1 - (a >> j & 1) as usize];
                let witness = EdgeWitness {
                    sub_box: chosen.clone(),
                    support: support.clone(),
                    assignment: support.iter().map(|&j| value(j)).collect(),
                };
                for &k in support {
                    for &l in support {
                        if k == l {
                            continue;
                        }
                        let from = vertex_id(&offsets, &sizes, k, value(k), other(k));
                        let to = vertex_id(&offsets, &sizes, l, other(l), value(l));
                        edges.push((from, to, witness.clone()));
                    }
                }
            }
            Some(edges)
        })
        .collect();

    let mut empty_boxes = 0u64;
    let mut edge_map: BTreeMap<(usize, usize), EdgeWitness> = BTreeMap::new();
    for found in per_box {
        match found {
            None => empty_boxes += 1,
            Some(edges) => {
                for (from, to, w) in edges {
                    edge_map.entry((from, to)).or_insert(w);
                }
            }
        }
    }
    let edges: Vec<Edge> = edge_map
        .into_iter()
        .map(|((from, to), witness)| Edge { from, to, witness })
        .collect();
    let condensation = condense(vertices.len(), &edges);

    Ok(BlockednessGraph {
        vertices,
        offsets,
        sizes,
        edges,
        empty_boxes,
        condensation,
    })
}

/// Iterative Tarjan; no recursion.
fn strongly_connected_components(n: usize, adjacency: &[Vec<usize>]) -> Vec<usize> {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![UNSEEN; n];
    let mut next_index = 0;
    let mut next_component = 0;
    // (vertex, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root] = next_index;
        lowlink[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < adjacency[v].len() {
                let w = adjacency[v][top.1];
                top.1 += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[v]);
            }
            if lowlink[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component[w] = next_component;
                    if w == v {
                        break;
                    }
                }
                next_component += 1;
            }
        }
    }
    component
}

fn condense(n: usize, edges: &[Edge]) -> Condensation {
    let mut adjacency = vec![Vec::new(); n];
    for e in edges {
        adjacency[e.from].push(e.to);
    }
    let raw = strongly_connected_components(n, &adjacency);
    // renumber by smallest member
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    for &c in &raw {
        let next = remap.len();
        remap.entry(c).or_insert(next);
    }
    let component_of: Vec<usize> = raw.iter().map(|c| remap[c]).collect();
    let mut components = vec![Vec::new(); remap.len()];
    for (v, &c) in component_of.iter().enumerate() {
        components[c].push(v);
    }
    let mut dag: Vec<(usize, usize)> = edges
        .iter()
        .map(|e| (component_of[e.from], component_of[e.to]))
        .filter(|(a, b)| a != b)
        .collect();
    dag.sort_unstable();
    dag.dedup();
    Condensation {
        component_of,
        components,
        edges: dag,
    }
}

/// Total blockedness: `G_X` is strongly connected.
pub fn is_totally_blocked(domain: &Domain) -> Result<(bool, Condensation)> {
    let g = build_graph(domain)?;
    Ok((g.is_strongly_connected(), g.condensation.clone()))
}

/// The binary aggregator obtained from an edge-free cut of `G_X`: `V_2` is
/// the source component containing the smallest vertex, `V_1` the rest.
/// `f_k(u, u')` is `u` on `V_1` pairs and `u'` on `V_2` pairs.
pub fn binary_from_partition(domain: &Domain, graph: &BlockednessGraph) -> Result<VerifiedAggregator> {
    if graph.is_strongly_connected() {
        return Err(Error::PartitionUnavailable);
    }
    let c = graph.condensation();
    let source = *c
        .sources()
        .first()
        .ok_or_else(|| Error::Invariant("condensation without a source component".into()))?;
    let components = (0..domain.issue_count())
        .map(|k| {
            OperationTable::from_fn(k, 2, domain.projection(k).len(), |a| {
                if a[0] == a[1] {
                    return a[0];
                }
                let id = graph.vertex_id(k, a[0], a[1]);
                if c.component_of[id] == source {
                    a[1]
                } else {
                    a[0]
                }
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let f = AggregatorTuple::new(components)?;
    let f = algebra::verify(domain, f).map_err(|_| {
        Error::Invariant("aggregator built from a G_X partition is not closed".into())
    })?;
    if algebra::is_dictatorial(domain, &f)?.is_some() {
        return Err(Error::Invariant(
            "aggregator built from a G_X partition is dictatorial".into(),
        ));
    }
    Ok(f)
}

fn nonempty_subsets(size: usize) -> Vec<Vec<u8>> {
    (1u32..(1 << size))
        .map(|mask| (0..size as u8).filter(|&v| mask >> v & 1 == 1).collect())
        .collect()
}

/// Some sub-box (of any shape) has a MIPE with support of size at least 3.
pub fn is_multiply_constrained(domain: &Domain) -> Result<bool> {
    domain.ensure_analyzable()?;
    let m = domain.issue_count();
    if m < 3 {
        return Ok(false);
    }
    let factors: Vec<Vec<Vec<u8>>> = domain
        .projections()
        .iter()
        .map(|p| nonempty_subsets(p.len()))
        .collect();
    let work = factors.iter().try_fold(1u64, |acc, f| {
        let evals: u64 = f.iter().map(|s| 1 + s.len() as u64).sum();
        acc.checked_mul(evals)
    });
    if work.is_none_or(|w| w > MAX_MULTIPLY_CONSTRAINED_WORK) {
        return Err(Error::Capacity(
            "multiply-constrained scan exceeds the work limit".into(),
        ));
    }
    let supports: Vec<Vec<usize>> = ordered_supports(m)
        .into_iter()
        .filter(|k| k.len() >= 3)
        .collect();
    let mut pick = vec![0usize; m];
    loop {
        let sub_box = SubBox {
            cells: pick.iter().enumerate().map(|(j, &i)| factors[j][i].clone()).collect(),
        };
        for support in &supports {
            // only issues with a choice can be flipped
            if support.iter().any(|&j| sub_box.cells[j].len() < 2) {
                continue;
            }
            let mut values = vec![0usize; support.len()];
            loop {
                let assignment: Vec<u8> = support
                    .iter()
                    .zip(&values)
                    .map(|(&j, &i)| sub_box.cells[j][i])
                    .collect();
                if is_mipe(domain, &sub_box, support, &assignment)? {
                    return Ok(true);
                }
                let mut i = support.len();
                let advanced = loop {
                    if i == 0 {
                        break false;
                    }
                    i -= 1;
                    values[i] += 1;
                    if values[i] < sub_box.cells[support[i]].len() {
                        break true;
                    }
                    values[i] = 0;
                };
                if !advanced {
                    break;
                }
            }
        }
        let mut j = m;
        let advanced = loop {
            if j == 0 {
                break false;
            }
            j -= 1;
            pick[j] += 1;
            if pick[j] < factors[j].len() {
                break true;
            }
            pick[j] = 0;
        };
        if !advanced {
            return Ok(false);
        }
    }
}

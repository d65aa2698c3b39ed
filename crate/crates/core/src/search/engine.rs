//! Backtracking over aggregator tables.
//!
//! Every cell of every component table is mapped to a variable whose domain
//! is a bitmask over local values of `X_j`. Cells may be fixed (singleton
//! domain) or share a variable with other cells of the same issue. Closure is
//! encoded as one table constraint per distinct cell vector reached by an
//! `n`-tuple of rows: the image row must be a row of `X`. When `X` is a
//! product, each factor gets its own constraints. Constraints are
//! propagated to generalized arc consistency after each decision.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use crate::algebra::{cell_args, cell_count, AggregatorTuple, OperationTable};
use crate::domain::Domain;

use super::{SearchBudget, SearchStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum CellRule {
    Fixed(u8),
    Choice(u32),
    /// Cells with the same key (within one issue) share a variable.
    Shared(u64, u32),
}

pub(crate) fn mask_of(args: &[u8]) -> u32 {
    args.iter().fold(0, |acc, &a| acc | 1 << a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flow {
    Found,
    Exhausted,
    Budget,
}

/// A product factor of `X`: its rows restricted to the factor's issues.
struct Block {
    width: usize,
    rows: Vec<Vec<u8>>,
}

pub(crate) struct TableSearch<'a> {
    domain: &'a Domain,
    arity: usize,
    cell_var: Vec<Vec<u32>>,
    /// Representative `(issue, cell)` of each variable, used for value order.
    var_rep: Vec<(usize, usize)>,
    /// Variables of each product factor, in index order.
    var_groups: Vec<Vec<u32>>,
    dom: Vec<u32>,
    blocks: Vec<Block>,
    /// `(block, offset into scopes)` per constraint.
    constraints: Vec<(u32, u32)>,
    scopes: Vec<u32>,
    var_cons: Vec<Vec<u32>>,
    trail: Vec<(u32, u32)>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    budget: SearchBudget,
    started: Instant,
    pub(crate) stats: SearchStats,
}

impl<'a> TableSearch<'a> {
    pub(crate) fn new(
        domain: &'a Domain,
        arity: usize,
        budget: SearchBudget,
        mut rule: impl FnMut(usize, &[u8]) -> CellRule,
    ) -> Self {
        let m = domain.issue_count();
        let mut cell_var = Vec::with_capacity(m);
        let mut var_rep = Vec::new();
        let mut dom = Vec::new();
        let mut args = vec![0u8; arity];
        for j in 0..m {
            let size = domain.projection(j).len();
            let mut keyed: HashMap<(u8, u64), u32> = HashMap::new();
            let mut vars = Vec::with_capacity(cell_count(arity, size));
            for cell in 0..cell_count(arity, size) {
                cell_args(cell, size, &mut args);
                let (key, mask) = match rule(j, &args) {
                    CellRule::Fixed(v) => (Some((0u8, v as u64)), 1u32 << v),
                    CellRule::Shared(k, mask) => (Some((1u8, k)), mask),
                    CellRule::Choice(mask) => (None, mask),
                };
                debug_assert!(mask != 0 && mask & !mask_of(&args) == 0, "unsupportive rule");
                let var = match key.and_then(|k| keyed.get(&k).copied()) {
                    Some(v) => v,
                    None => {
                        let v = dom.len() as u32;
                        dom.push(mask);
                        var_rep.push((j, cell));
                        if let Some(k) = key {
                            keyed.insert(k, v);
                        }
                        v
                    }
                };
                vars.push(var);
            }
            cell_var.push(vars);
        }

        // One table per product factor of X. Closure under the factors is
        // closure under X, and arc consistency reaches the same fixpoint,
        // so this only makes propagation cheaper.
        let rel = domain.relation();
        let factors = rel.product_blocks();
        let mut issue_factor = vec![0usize; m];
        for (f, issues) in factors.iter().enumerate() {
            for &j in issues {
                issue_factor[j] = f;
            }
        }
        let mut var_groups = vec![Vec::new(); factors.len()];
        for (v, &(j, _)) in var_rep.iter().enumerate() {
            var_groups[issue_factor[j]].push(v as u32);
        }
        let mut blocks = Vec::new();
        let mut scopes = Vec::new();
        let mut constraints = Vec::new();
        for issues in factors {
            if issues.len() < 2 {
                // the table is all of X_j, which every supportive cell satisfies
                continue;
            }
            let b = blocks.len() as u32;
            let mut rows: Vec<Vec<u8>> = rel.rows.iter().map(|r| issues.iter().map(|&j| r[j]).collect()).collect();
            rows.sort();
            rows.dedup();
            let mut seen: HashSet<Vec<u32>> = HashSet::new();
            let mut picks = vec![0usize; arity];
            let mut column = vec![0u8; arity];
            'tuples: loop {
                let vector: Vec<u32> = issues
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| {
                        for (slot, &r) in column.iter_mut().zip(&picks) {
                            *slot = rows[r][i];
                        }
                        cell_var[j][crate::algebra::cell_index(&column, rel.sizes[j])]
                    })
                    .collect();
                if seen.insert(vector.clone()) {
                    constraints.push((b, scopes.len() as u32));
                    scopes.extend_from_slice(&vector);
                }
                let mut k = arity;
                loop {
                    if k == 0 {
                        break 'tuples;
                    }
                    k -= 1;
                    picks[k] += 1;
                    if picks[k] < rows.len() {
                        break;
                    }
                    picks[k] = 0;
                }
            }
            blocks.push(Block { width: issues.len(), rows });
        }

        let mut var_cons = vec![Vec::new(); dom.len()];
        for (c, &(b, start)) in constraints.iter().enumerate() {
            let start = start as usize;
            for &v in &scopes[start..start + blocks[b as usize].width] {
                var_cons[v as usize].push(c as u32);
            }
        }
        let ncons = constraints.len();
        TableSearch {
            domain,
            arity,
            cell_var,
            var_rep,
            var_groups,
            dom,
            blocks,
            constraints,
            scopes,
            var_cons,
            trail: Vec::new(),
            queue: Vec::new(),
            queued: vec![false; ncons],
            budget,
            started: Instant::now(),
            stats: SearchStats::default(),
        }
    }

    fn set(&mut self, var: u32, mask: u32) {
        let old = self.dom[var as usize];
        if old != mask {
            self.trail.push((var, old));
            self.dom[var as usize] = mask;
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, old) = self.trail.pop().expect("trail");
            self.dom[v as usize] = old;
        }
    }

    fn enqueue_var(&mut self, var: u32, except: Option<u32>) {
        for i in 0..self.var_cons[var as usize].len() {
            let c = self.var_cons[var as usize][i];
            if Some(c) != except && !self.queued[c as usize] {
                self.queued[c as usize] = true;
                self.queue.push(c);
            }
        }
    }

    fn clear_queue(&mut self) {
        for c in self.queue.drain(..) {
            self.queued[c as usize] = false;
        }
    }

    fn propagate(&mut self) -> bool {
        let mut support = Vec::new();
        while let Some(c) = self.queue.pop() {
            self.queued[c as usize] = false;
            let (b, start) = self.constraints[c as usize];
            let block = &self.blocks[b as usize];
            let scope = &self.scopes[start as usize..start as usize + block.width];
            support.clear();
            support.resize(block.width, 0u32);
            for r in &block.rows {
                if scope.iter().zip(r).all(|(&v, &x)| self.dom[v as usize] >> x & 1 == 1) {
                    for (s, &x) in support.iter_mut().zip(r) {
                        *s |= 1 << x;
                    }
                }
            }
            for (i, &sup) in support.iter().enumerate() {
                let var = self.scopes[start as usize + i];
                let cur = self.dom[var as usize];
                let next = cur & sup;
                if next == 0 {
                    self.clear_queue();
                    return false;
                }
                if next != cur {
                    self.set(var, next);
                    self.enqueue_var(var, Some(c));
                }
            }
        }
        true
    }

    fn over_budget(&self) -> bool {
        if self.stats.nodes > self.budget.max_nodes {
            return true;
        }
        self.stats.nodes.is_multiple_of(256)
            && self.started.elapsed().as_millis() as u64 > self.budget.max_millis
    }

    fn start(&mut self) -> bool {
        self.started = Instant::now();
        for c in 0..self.queued.len() {
            self.queued[c] = true;
            self.queue.push(c as u32);
        }
        if self.propagate() {
            true
        } else {
            self.stats.prunes += 1;
            false
        }
    }

    /// Depth-first search; `accept` is called on every complete assignment
    /// and stops the search by returning true.
    pub(crate) fn run(&mut self, mut accept: impl FnMut(&AggregatorTuple) -> bool) -> Flow {
        if !self.start() {
            return Flow::Exhausted;
        }
        let order: Vec<u32> = (0..self.dom.len() as u32).collect();
        self.dfs(&order, 0, &mut |s: &Self| accept(&s.current_tuple()))
    }

    /// First complete assignment in search order. Product factors share no
    /// variables, so each is searched on its own and the first solutions
    /// are combined; the result is the one [`TableSearch::run`] would
    /// accept first.
    pub(crate) fn run_first(&mut self) -> (Flow, Option<AggregatorTuple>) {
        if !self.start() {
            return (Flow::Exhausted, None);
        }
        for g in 0..self.var_groups.len() {
            let order = std::mem::take(&mut self.var_groups[g]);
            let flow = self.dfs(&order, 0, &mut |_: &Self| true);
            self.var_groups[g] = order;
            if flow != Flow::Found {
                return (flow, None);
            }
        }
        (Flow::Found, Some(self.current_tuple()))
    }

    fn dfs(&mut self, order: &[u32], from: usize, leaf: &mut dyn FnMut(&Self) -> bool) -> Flow {
        let Some(pos) = (from..order.len()).find(|&i| self.dom[order[i] as usize].count_ones() > 1) else {
            return if leaf(self) { Flow::Found } else { Flow::Exhausted };
        };
        let var = order[pos] as usize;
        let (issue, cell) = self.var_rep[var];
        let size = self.domain.projection(issue).len();
        let mut args = vec![0u8; self.arity];
        cell_args(cell, size, &mut args);
        let mut tried = 0u32;
        for &value in &args {
            let bit = 1u32 << value;
            if tried & bit != 0 || self.dom[var] & bit == 0 {
                continue;
            }
            tried |= bit;
            self.stats.nodes += 1;
            if self.over_budget() {
                return Flow::Budget;
            }
            let mark = self.trail.len();
            self.set(var as u32, bit);
            self.enqueue_var(var as u32, None);
            if self.propagate() {
                match self.dfs(order, pos + 1, leaf) {
                    Flow::Exhausted => {}
                    other => {
                        if other == Flow::Budget {
                            self.undo(mark);
                        }
                        return other;
                    }
                }
            } else {
                self.stats.prunes += 1;
            }
            self.undo(mark);
        }
        Flow::Exhausted
    }

    fn current_tuple(&self) -> AggregatorTuple {
        let components = self
            .cell_var
            .iter()
            .enumerate()
            .map(|(j, vars)| {
                let cells = vars
                    .iter()
                    .map(|&v| self.dom[v as usize].trailing_zeros() as u8)
                    .collect();
                OperationTable::from_cells(j, self.arity, self.domain.projection(j).len(), cells)
                    .expect("search cells are supportive")
            })
            .collect();
        AggregatorTuple::new(components).expect("search tables are aligned")
    }
}

//! Exhaustive reference enumerations.
//!
//! These walk every tuple of supportive tables with an odometer and test
//! closure against their own membership set, with no pruning. They exist to
//! cross-check the searches on small domains.

use std::collections::HashSet;

use crate::algebra::{cell_args, cell_count, AggregatorTuple, OperationTable};
use crate::domain::Domain;
use crate::error::{Error, Result};

/// Largest candidate space an oracle will walk.
pub const MAX_CANDIDATES: u128 = 1 << 24;

struct Odometer {
    /// Per issue, per cell: the allowed values.
    choices: Vec<Vec<Vec<u8>>>,
    digits: Vec<Vec<usize>>,
    arity: usize,
    sizes: Vec<usize>,
    done: bool,
}

impl Odometer {
    fn new(domain: &Domain, arity: usize, allowed: impl Fn(&[u8]) -> Vec<u8>) -> Result<Self> {
        let mut total: u128 = 1;
        let mut args = vec![0u8; arity];
        let mut choices = Vec::new();
        let mut sizes = Vec::new();
        for j in 0..domain.issue_count() {
            let size = domain.projection(j).len();
            let mut cells = Vec::new();
            for cell in 0..cell_count(arity, size) {
                cell_args(cell, size, &mut args);
                let vals = allowed(&args);
                total = total.saturating_mul(vals.len() as u128);
                if total > MAX_CANDIDATES {
                    return Err(Error::Capacity(format!(
                        "oracle space exceeds {MAX_CANDIDATES} candidates"
                    )));
                }
                cells.push(vals);
            }
            choices.push(cells);
            sizes.push(size);
        }
        let digits = choices.iter().map(|c| vec![0; c.len()]).collect();
        Ok(Odometer {
            choices,
            digits,
            arity,
            sizes,
            done: false,
        })
    }

    fn current(&self) -> AggregatorTuple {
        let components = self
            .choices
            .iter()
            .zip(&self.digits)
            .enumerate()
            .map(|(j, (cells, digits))| {
                let values = cells.iter().zip(digits).map(|(c, &d)| c[d]).collect();
                OperationTable::from_cells(j, self.arity, self.sizes[j], values)
                    .expect("oracle tables are supportive")
            })
            .collect();
        AggregatorTuple::new(components).expect("oracle tables are aligned")
    }

    fn advance(&mut self) {
        for j in (0..self.digits.len()).rev() {
            for c in (0..self.digits[j].len()).rev() {
                self.digits[j][c] += 1;
                if self.digits[j][c] < self.choices[j][c].len() {
                    return;
                }
                self.digits[j][c] = 0;
            }
        }
        self.done = true;
    }
}

impl Iterator for Odometer {
    type Item = AggregatorTuple;

    fn next(&mut self) -> Option<AggregatorTuple> {
        if self.done {
            return None;
        }
        let t = self.current();
        self.advance();
        Some(t)
    }
}

fn closed(members: &HashSet<Vec<u8>>, rows: &[Vec<u8>], f: &AggregatorTuple) -> bool {
    let n = f.arity();
    let m = rows.first().map_or(0, |r| r.len());
    let mut picks = vec![0usize; n];
    let mut column = vec![0u8; n];
    let mut image = vec![0u8; m];
    loop {
        for (j, slot) in image.iter_mut().enumerate() {
            for (c, &r) in column.iter_mut().zip(&picks) {
                *c = rows[r][j];
            }
            *slot = f.component(j).eval(&column);
        }
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

fn local_rows(domain: &Domain) -> Vec<Vec<u8>> {
    domain
        .rows()
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, &c)| {
                    domain
                        .projection(j)
                        .iter()
                        .position(|&p| p == c)
                        .expect("row value lies in its projection") as u8
                })
                .collect()
        })
        .collect()
}

fn distinct(args: &[u8]) -> Vec<u8> {
    let mut v = args.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// Every binary aggregator of `domain`, dictatorial ones included, in
/// odometer order.
pub fn all_binary_aggregators(domain: &Domain) -> Result<Vec<AggregatorTuple>> {
    let rows = local_rows(domain);
    let members: HashSet<Vec<u8>> = rows.iter().cloned().collect();
    Ok(Odometer::new(domain, 2, distinct)?
        .filter(|f| closed(&members, &rows, f))
        .collect())
}

/// First binary aggregator that is not a dictatorship, by plain enumeration.
pub fn bruteforce_binary(domain: &Domain) -> Result<Option<AggregatorTuple>> {
    let rows = local_rows(domain);
    let members: HashSet<Vec<u8>> = rows.iter().cloned().collect();
    Ok(Odometer::new(domain, 2, distinct)?.find(|f| {
        let dictatorial = (0..2).any(|d| f.components().iter().all(|c| c.is_projection(d)));
        !dictatorial && closed(&members, &rows, f)
    }))
}

/// First ternary aggregator accepted by `keep`, by plain enumeration.
/// Cells whose arguments are all equal are fixed, which any supportive table
/// forces anyway.
pub fn bruteforce_ternary_nontrivial(
    domain: &Domain,
    keep: impl Fn(&AggregatorTuple) -> bool,
) -> Result<Option<AggregatorTuple>> {
    let rows = local_rows(domain);
    let members: HashSet<Vec<u8>> = rows.iter().cloned().collect();
    Ok(Odometer::new(domain, 3, distinct)?.find(|f| keep(f) && closed(&members, &rows, f)))
}

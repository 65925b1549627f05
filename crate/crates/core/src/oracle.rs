//! Exhaustive ground truth for small graphs.
//!
//! Both MAS oracles search vertex orderings with branch and bound; every
//! acyclic subgraph is contained in the forward edges of some ordering, so
//! the optimum over orderings is the true optimum. [`exact_min_rho`]
//! enumerates Boolean extreme points of the ball directly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::OracleError;
use crate::graphmat::BoolMatrix;
use crate::greedy::{BudgetSpec, RowBudgets};
use crate::spectral::{rho_of_boolean, EigenConfig};

/// Largest vertex count the ordering oracles accept by default.
pub const DEFAULT_VERTEX_CAP: usize = 9;
/// Largest number of candidate matrices [`exact_min_rho`] evaluates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult<T, W> {
    pub optimum: T,
    pub witness: W,
    /// Search nodes (orderings) or candidate matrices visited.
    pub enumerated: u64,
}

fn check_size(a: &BoolMatrix, cap: usize) -> Result<(), OracleError> {
    // bitmasks below are u64
    let cap = cap.min(63);
    if a.n() > cap {
        return Err(OracleError::TooLarge { n: a.n(), cap });
    }
    Ok(())
}

/// Bitmask of in-neighbours of each vertex, loops excluded.
fn in_masks(a: &BoolMatrix) -> Vec<u64> {
    (0..a.n())
        .map(|i| {
            a.row(i)
                .iter()
                .filter(|&&j| j != i)
                .fold(0u64, |m, &j| m | (1 << j))
        })
        .collect()
}

/// Maximum number of edges in an acyclic subgraph, with an ordering
/// (sources first) whose forward edges attain it.
pub fn exact_mas(a: &BoolMatrix) -> Result<OracleResult<usize, Vec<usize>>, OracleError> {
    exact_mas_capped(a, DEFAULT_VERTEX_CAP)
}

pub fn exact_mas_capped(
    a: &BoolMatrix,
    cap: usize,
) -> Result<OracleResult<usize, Vec<usize>>, OracleError> {
    check_size(a, cap)?;
    let n = a.n();
    let ins = in_masks(a);
    let mut search = MasSearch {
        ins: &ins,
        prefix: Vec::with_capacity(n),
        best: 0,
        best_order: (0..n).collect(),
        nodes: 0,
    };
    search.best = forward_count(&ins, &search.best_order);
    search.descend(0, 0);
    Ok(OracleResult {
        optimum: search.best,
        witness: search.best_order,
        enumerated: search.nodes,
    })
}

fn forward_count(ins: &[u64], order: &[usize]) -> usize {
    let mut placed = 0u64;
    let mut kept = 0;
    for &v in order {
        kept += (ins[v] & placed).count_ones() as usize;
        placed |= 1 << v;
    }
    kept
}

struct MasSearch<'a> {
    ins: &'a [u64],
    prefix: Vec<usize>,
    best: usize,
    best_order: Vec<usize>,
    nodes: u64,
}

impl MasSearch<'_> {
    fn descend(&mut self, placed: u64, kept: usize) {
        self.nodes += 1;
        let n = self.ins.len();
        if self.prefix.len() == n {
            if kept > self.best {
                self.best = kept;
                self.best_order.clone_from(&self.prefix);
            }
            return;
        }
        // every edge into an unplaced vertex could still be kept
        let bound: usize = (0..n)
            .filter(|&v| placed & (1 << v) == 0)
            .map(|v| self.ins[v].count_ones() as usize)
            .sum();
        if kept + bound <= self.best {
            return;
        }
        for v in 0..n {
            if placed & (1 << v) == 0 {
                let gain = (self.ins[v] & placed).count_ones() as usize;
                self.prefix.push(v);
                self.descend(placed | (1 << v), kept + gain);
                self.prefix.pop();
            }
        }
    }
}

/// Smallest achievable maximum per-vertex cut count of an acyclic subgraph,
/// with an ordering attaining it. A vertex cuts its self-loop and every
/// in-edge from a vertex placed after it.
pub fn exact_max_mas(a: &BoolMatrix) -> Result<OracleResult<usize, Vec<usize>>, OracleError> {
    exact_max_mas_capped(a, DEFAULT_VERTEX_CAP)
}

pub fn exact_max_mas_capped(
    a: &BoolMatrix,
    cap: usize,
) -> Result<OracleResult<usize, Vec<usize>>, OracleError> {
    check_size(a, cap)?;
    let n = a.n();
    let ins = in_masks(a);
    let loops: Vec<usize> = (0..n).map(|i| usize::from(a.get(i, i))).collect();
    let identity: Vec<usize> = (0..n).collect();
    let mut search = MaxMasSearch {
        ins: &ins,
        loops: &loops,
        prefix: Vec::with_capacity(n),
        best: max_cut_of(&ins, &loops, &identity),
        best_order: identity,
        nodes: 0,
    };
    search.descend(0, 0);
    Ok(OracleResult {
        optimum: search.best,
        witness: search.best_order,
        enumerated: search.nodes,
    })
}

fn max_cut_of(ins: &[u64], loops: &[usize], order: &[usize]) -> usize {
    let mut placed = 0u64;
    let mut worst = 0;
    for &v in order {
        let c = (ins[v] & !placed).count_ones() as usize + loops[v];
        worst = worst.max(c);
        placed |= 1 << v;
    }
    worst
}

struct MaxMasSearch<'a> {
    ins: &'a [u64],
    loops: &'a [usize],
    prefix: Vec<usize>,
    best: usize,
    best_order: Vec<usize>,
    nodes: u64,
}

impl MaxMasSearch<'_> {
    fn descend(&mut self, placed: u64, worst: usize) {
        self.nodes += 1;
        let n = self.ins.len();
        if worst >= self.best {
            return;
        }
        if self.prefix.len() == n {
            self.best = worst;
            self.best_order.clone_from(&self.prefix);
            return;
        }
        for v in 0..n {
            if placed & (1 << v) == 0 {
                let c = (self.ins[v] & !placed).count_ones() as usize + self.loops[v];
                self.prefix.push(v);
                self.descend(placed | (1 << v), worst.max(c));
                self.prefix.pop();
            }
        }
    }
}

/// Minimum of `rho` over the Boolean extreme points of `B(A, budgets)`.
///
/// Cutting more never raises `rho`, so only maximal cut choices (no further
/// cuttable entry fits the row budget) are enumerated.
pub fn exact_min_rho(
    a: &BoolMatrix,
    budgets: &BudgetSpec,
    cfg: &EigenConfig,
) -> Result<OracleResult<f64, BoolMatrix>, OracleError> {
    exact_min_rho_capped(a, budgets, cfg, DEFAULT_ENUMERATION_CAP)
}

pub fn exact_min_rho_capped(
    a: &BoolMatrix,
    budgets: &BudgetSpec,
    cfg: &EigenConfig,
    cap: u128,
) -> Result<OracleResult<f64, BoolMatrix>, OracleError> {
    budgets.validate(a)?;
    let n = a.n();
    let mut choices: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    let mut size: u128 = 1;
    for i in 0..n {
        let protected = budgets.untouchable(i);
        let cuttable: Vec<usize> = a
            .row(i)
            .iter()
            .copied()
            .filter(|j| protected.binary_search(j).is_err())
            .collect();
        if cuttable.len() > 24 {
            return Err(OracleError::EnumerationTooLarge {
                size: 1 << cuttable.len(),
                cap,
            });
        }
        let rows = maximal_rows(a.row(i), &cuttable, |cut| fits(budgets, i, cut));
        size = size.saturating_mul(rows.len() as u128);
        if size > cap {
            return Err(OracleError::EnumerationTooLarge { size, cap });
        }
        choices.push(rows);
    }

    let mut pick = vec![0usize; n];
    let mut best: Option<(f64, BoolMatrix)> = None;
    let mut enumerated = 0;
    loop {
        let x = BoolMatrix::from_rows((0..n).map(|i| choices[i][pick[i]].clone()).collect())
            .expect("subsets of valid rows");
        enumerated += 1;
        let rho = rho_of_boolean(&x, cfg)?;
        if best.as_ref().map_or(true, |(b, _)| rho < *b) {
            best = Some((rho, x));
            if rho == 0.0 {
                break;
            }
        }
        // mixed-radix increment
        let mut i = 0;
        while i < n {
            pick[i] += 1;
            if pick[i] < choices[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    let (optimum, witness) = best.unwrap_or((0.0, BoolMatrix::empty(0)));
    Ok(OracleResult {
        optimum,
        witness,
        enumerated,
    })
}

fn fits(budgets: &BudgetSpec, i: usize, cut: &[usize]) -> bool {
    match budgets.budgets() {
        RowBudgets::Counts(r) => cut.len() <= r[i],
        RowBudgets::Weights { weights, caps, .. } => {
            let w: f64 = cut.iter().map(|&j| weights.weight(i, j).unwrap_or(0.0)).sum();
            w <= caps[i] + 1e-12 * caps[i].max(1.0)
        }
    }
}

/// All rows `a_row \ cut` where `cut ⊆ cuttable` fits and cannot be extended.
fn maximal_rows(
    a_row: &[usize],
    cuttable: &[usize],
    fits: impl Fn(&[usize]) -> bool,
) -> Vec<Vec<usize>> {
    let k = cuttable.len();
    let mut rows = Vec::new();
    let mut cut = Vec::with_capacity(k);
    for mask in 0u32..(1u32 << k) {
        cut.clear();
        cut.extend((0..k).filter(|b| mask & (1 << b) != 0).map(|b| cuttable[b]));
        if !fits(&cut) {
            continue;
        }
        let extendable = (0..k).filter(|b| mask & (1 << b) == 0).any(|b| {
            let mut more = cut.clone();
            more.push(cuttable[b]);
            fits(&more)
        });
        if !extendable {
            rows.push(a_row.iter().copied().filter(|j| !cut.contains(j)).collect());
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mas_examples() {
        assert_eq!(exact_mas(&BoolMatrix::cycle(4)).unwrap().optimum, 3);
        assert_eq!(exact_mas(&BoolMatrix::complete(4)).unwrap().optimum, 6);
        let looped = BoolMatrix::from_edges(2, [(0, 0), (0, 1)]).unwrap();
        assert_eq!(exact_mas(&looped).unwrap().optimum, 1);
    }

    #[test]
    fn mas_witness_attains_optimum() {
        let a = BoolMatrix::from_edges(4, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 1)]).unwrap();
        let res = exact_mas(&a).unwrap();
        // the 2-cycle and the 3-cycle share no edge
        assert_eq!(res.optimum, 3);
        assert_eq!(forward_count(&in_masks(&a), &res.witness), 3);
    }

    #[test]
    fn max_mas_examples() {
        assert_eq!(exact_max_mas(&BoolMatrix::cycle(5)).unwrap().optimum, 1);
        assert_eq!(exact_max_mas(&BoolMatrix::complete(4)).unwrap().optimum, 3);
        assert_eq!(exact_max_mas(&BoolMatrix::empty(3)).unwrap().optimum, 0);
        let looped = BoolMatrix::from_edges(2, [(0, 0), (0, 1)]).unwrap();
        assert_eq!(exact_max_mas(&looped).unwrap().optimum, 1);
    }

    #[test]
    fn size_cap() {
        assert_eq!(
            exact_mas(&BoolMatrix::cycle(10)),
            Err(OracleError::TooLarge { n: 10, cap: 9 })
        );
        assert!(exact_mas_capped(&BoolMatrix::cycle(10), 10).is_ok());
    }

    #[test]
    fn min_rho_examples() {
        let cfg = EigenConfig::default();
        let k3 = BoolMatrix::complete(3);
        let res = exact_min_rho(&k3, &BudgetSpec::uniform(3, 1), &cfg).unwrap();
        assert!((res.optimum - 1.0).abs() < 1e-9);
        let res = exact_min_rho(&k3, &BudgetSpec::uniform(3, 2), &cfg).unwrap();
        assert_eq!(res.optimum, 0.0);
        let res = exact_min_rho(&k3, &BudgetSpec::uniform(3, 0), &cfg).unwrap();
        assert!((res.optimum - 2.0).abs() < 1e-9);
        assert_eq!(res.enumerated, 1);
    }

    #[test]
    fn maximal_rows_only() {
        let rows = maximal_rows(&[0, 1, 2], &[0, 1, 2], |c| c.len() <= 1);
        assert_eq!(rows, vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn enumeration_cap() {
        let a = BoolMatrix::complete(6);
        let err = exact_min_rho_capped(&a, &BudgetSpec::uniform(6, 2), &EigenConfig::default(), 100);
        assert!(matches!(err, Err(OracleError::EnumerationTooLarge { .. })));
    }
}

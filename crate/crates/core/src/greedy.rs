//! Spectral radius minimization over a product of L1-balls.
//!
//! `B(A, r)` is the set of nonnegative matrices whose row `i` lies within L1
//! distance `r_i` of `A_i`. Its Boolean extreme points are the subgraphs of
//! `A` that cut at most `r_i` incoming edges at vertex `i`, and the minimum of
//! `rho` over the ball is always attained at one of them.
//!
//! The relaxation ([`min_rho_over_ball`]) alternates between computing a
//! minimal leading eigenvector `v` of the current matrix and replacing rows by
//! *minimal rows*: the row of the ball with the smallest inner product with
//! `v`, obtained by cutting the entries that sit on the largest components of
//! `v`. Work is confined to the support `S` of `v`. When every row on `S` is
//! already minimal the current matrix is a global minimizer. When the rows of
//! the basic set `H` are minimal, `rho` is unchanged and only the eigenvector
//! (and possibly `S`) moves; otherwise `rho` strictly drops and a new outer
//! iteration starts.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{GraphError, GreedyError};
use crate::graphmat::{sorted_subset, BoolMatrix, IndexSet, WeightedMatrix};
use crate::spectral::{self, minimal_leading_eigenvector, EigenConfig};

/// Cut-priority key for weighted rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightKey {
    /// Cut edges with the largest `weight * v_j` first.
    #[default]
    Product,
    /// Cut edges with the largest `v_j / weight` first (best reduction per
    /// unit of budget).
    Ratio,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RowBudgets {
    /// At most `r_i` cut entries in row `i`.
    Counts(Vec<usize>),
    /// Total weight of cut entries in row `i` at most `caps[i]`.
    Weights {
        weights: WeightedMatrix,
        caps: Vec<f64>,
        key: WeightKey,
    },
}

/// Per-vertex cut budgets plus optional protected (untouchable) entries.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetSpec {
    budgets: RowBudgets,
    untouchable: Option<Vec<IndexSet>>,
}

impl BudgetSpec {
    pub fn uniform(n: usize, r: usize) -> Self {
        Self::per_vertex(vec![r; n])
    }

    pub fn per_vertex(budgets: Vec<usize>) -> Self {
        BudgetSpec {
            budgets: RowBudgets::Counts(budgets),
            untouchable: None,
        }
    }

    pub fn weighted(weights: WeightedMatrix, caps: Vec<f64>, key: WeightKey) -> Self {
        BudgetSpec {
            budgets: RowBudgets::Weights { weights, caps, key },
            untouchable: None,
        }
    }

    /// Protects `sets[i]` (columns of row `i`) from being cut.
    pub fn with_untouchable(mut self, sets: Vec<IndexSet>) -> Self {
        self.untouchable = Some(sets);
        self
    }

    pub fn budgets(&self) -> &RowBudgets {
        &self.budgets
    }

    pub fn untouchable_sets(&self) -> Option<&[IndexSet]> {
        self.untouchable.as_deref()
    }

    pub fn untouchable(&self, i: usize) -> &[usize] {
        match &self.untouchable {
            Some(sets) => sets[i].as_slice(),
            None => &[],
        }
    }

    fn len(&self) -> usize {
        match &self.budgets {
            RowBudgets::Counts(r) => r.len(),
            RowBudgets::Weights { caps, .. } => caps.len(),
        }
    }

    pub fn validate(&self, a: &BoolMatrix) -> Result<(), GreedyError> {
        let n = a.n();
        if self.len() != n {
            return Err(GreedyError::BudgetLength {
                expected: n,
                got: self.len(),
            });
        }
        if let RowBudgets::Weights { weights, caps, .. } = &self.budgets {
            if weights.pattern() != *a {
                return Err(GreedyError::WeightPatternMismatch);
            }
            if caps.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                return Err(GreedyError::InvariantBreach("weight caps must be finite and >= 0"));
            }
        }
        if let Some(sets) = &self.untouchable {
            if sets.len() != n {
                return Err(GreedyError::BudgetLength {
                    expected: n,
                    got: sets.len(),
                });
            }
            for (i, set) in sets.iter().enumerate() {
                if let Some(col) = set.iter().find(|&j| !a.get(i, j)) {
                    return Err(GreedyError::UntouchableOutsideRow { row: i, col });
                }
            }
        }
        Ok(())
    }

    /// Whether `x_row` is a Boolean extreme point of the ball around `a_row`.
    pub fn row_in_ball(&self, i: usize, a_row: &[usize], x_row: &[usize]) -> bool {
        if !sorted_subset(x_row, a_row) || !sorted_subset(self.untouchable(i), x_row) {
            return false;
        }
        match &self.budgets {
            RowBudgets::Counts(r) => a_row.len() - x_row.len() <= r[i],
            RowBudgets::Weights { weights, caps, .. } => {
                let cut: f64 = weights
                    .row(i)
                    .iter()
                    .filter(|(j, _)| x_row.binary_search(j).is_err())
                    .map(|&(_, w)| w)
                    .sum();
                cut <= caps[i] + weight_slack(caps[i])
            }
        }
    }

    pub fn contains(&self, a: &BoolMatrix, x: &BoolMatrix) -> bool {
        a.n() == x.n() && (0..a.n()).all(|i| self.row_in_ball(i, a.row(i), x.row(i)))
    }
}

fn weight_slack(cap: f64) -> f64 {
    1e-12 * cap.max(1.0)
}

fn by_v_desc(v: &[f64]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b))
}

/// Minimal row of `B(a_row, budget)` with respect to `v`: cuts the `budget`
/// cuttable entries with the largest `v`-components (lowest index first on
/// ties) and returns the surviving entries.
pub fn minimal_row(a_row: &IndexSet, v: &[f64], budget: usize, untouchable: &IndexSet) -> IndexSet {
    let mut cuttable: Vec<usize> = a_row.iter().filter(|&j| !untouchable.contains(j)).collect();
    cuttable.sort_by(by_v_desc(v));
    cuttable.truncate(budget);
    IndexSet::from_sorted(a_row.iter().filter(|j| !cuttable.contains(j)).collect())
}

/// Whether `x_row` attains the minimal inner product with `v` over the ball,
/// up to `tol`. Value based: any optimal pattern passes.
pub fn is_row_minimal(
    x_row: &IndexSet,
    a_row: &IndexSet,
    v: &[f64],
    budget: usize,
    untouchable: &IndexSet,
    tol: f64,
) -> bool {
    let best = minimal_row(a_row, v, budget, untouchable);
    dot(x_row.as_slice(), v) <= dot(best.as_slice(), v) + tol
}

/// Cut priority of a weighted row: descending key, lowest index on ties.
pub fn weighted_row_order(row: &[(usize, f64)], v: &[f64], key: WeightKey) -> Vec<usize> {
    let mut keyed: Vec<(usize, f64)> = row
        .iter()
        .map(|&(j, w)| {
            let k = match key {
                WeightKey::Product => w * v[j],
                WeightKey::Ratio => v[j] / w,
            };
            (j, k)
        })
        .collect();
    keyed.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    keyed.into_iter().map(|(j, _)| j).collect()
}

/// Greedy weighted minimal row: walks [`weighted_row_order`] and cuts every
/// entry that still fits in `cap`, skipping the ones that do not.
pub fn weighted_minimal_row(
    row: &[(usize, f64)],
    v: &[f64],
    cap: f64,
    untouchable: &IndexSet,
    key: WeightKey,
) -> IndexSet {
    let cut = weighted_cut(row, v, cap, untouchable.as_slice(), key);
    IndexSet::from_sorted(row.iter().map(|&(j, _)| j).filter(|j| !cut.contains(j)).collect())
}

fn weighted_cut(
    row: &[(usize, f64)],
    v: &[f64],
    cap: f64,
    untouchable: &[usize],
    key: WeightKey,
) -> Vec<usize> {
    let cuttable: Vec<(usize, f64)> = row
        .iter()
        .copied()
        .filter(|(j, _)| untouchable.binary_search(j).is_err())
        .collect();
    let limit = cap + weight_slack(cap);
    let mut spent = 0.0;
    let mut cut = Vec::new();
    for j in weighted_row_order(&cuttable, v, key) {
        let w = cuttable[cuttable.binary_search_by_key(&j, |&(c, _)| c).expect("from row")].1;
        if spent + w <= limit {
            spent += w;
            cut.push(j);
        }
    }
    cut
}

fn dot(row: &[usize], v: &[f64]) -> f64 {
    row.iter().map(|&j| v[j]).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreedyConfig {
    pub eigen: EigenConfig,
    /// A row counts as minimal when its product with `v` is within this of
    /// the minimal product.
    pub row_tol: f64,
    /// Re-verify the relaxation invariants (rho preserved or strictly
    /// decreased, support shrinking, basic set) at every step.
    pub debug_asserts: bool,
    /// Keep a [`TraceStep`] per eigenvector computation.
    pub record_trace: bool,
    /// Cap on eigenvector computations; `None` means `100 n + 1000`.
    pub max_steps: Option<usize>,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        GreedyConfig {
            eigen: EigenConfig::default(),
            row_tol: 1e-9,
            debug_asserts: false,
            record_trace: false,
            max_steps: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// Eigenvector of the full matrix at the start of an outer iteration.
    Outer,
    /// Eigenvector of the updated restricted matrix inside the main loop.
    Inner,
}

/// Snapshot taken right after an eigenvector computation.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub outer: usize,
    pub kind: StepKind,
    pub rho: f64,
    pub support: IndexSet,
    pub x: BoolMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinRhoResult {
    pub x_hat: BoolMatrix,
    pub rho: f64,
    /// Stopped on acyclicity or on "every row on the support is minimal".
    pub optimal: bool,
    /// Number of leading-eigenvector computations.
    pub eig_count: usize,
    pub outer_iterations: usize,
    pub trace: Vec<TraceStep>,
}

/// Minimizes `rho` over `B(A, budgets)` starting from `A`.
pub fn min_rho_over_ball(
    a: &BoolMatrix,
    budgets: &BudgetSpec,
    cfg: &GreedyConfig,
) -> Result<MinRhoResult, GreedyError> {
    min_rho_from(a, budgets, a.clone(), cfg)
}

/// Same as [`min_rho_over_ball`] but starts from any Boolean `start` inside
/// the ball.
pub fn min_rho_from(
    a: &BoolMatrix,
    budgets: &BudgetSpec,
    start: BoolMatrix,
    cfg: &GreedyConfig,
) -> Result<MinRhoResult, GreedyError> {
    budgets.validate(a)?;
    if start.n() != a.n() {
        return Err(GraphError::DimensionMismatch {
            expected: a.n(),
            got: start.n(),
        }
        .into());
    }
    if let Some(row) = (0..a.n()).find(|&i| !budgets.row_in_ball(i, a.row(i), start.row(i))) {
        return Err(GreedyError::InfeasibleStart { row });
    }
    Relaxation {
        a,
        budgets,
        cfg,
        eig_count: 0,
        trace: Vec::new(),
    }
    .run(start)
}

struct Relaxation<'a> {
    a: &'a BoolMatrix,
    budgets: &'a BudgetSpec,
    cfg: &'a GreedyConfig,
    eig_count: usize,
    trace: Vec<TraceStep>,
}

/// Outcome of scanning the rows on the current support.
struct RowScan {
    replacements: Vec<(usize, Vec<usize>)>,
    core_minimal: bool,
}

impl Relaxation<'_> {
    fn run(mut self, start: BoolMatrix) -> Result<MinRhoResult, GreedyError> {
        let n = self.a.n();
        let max_steps = self.cfg.max_steps.unwrap_or(100 * n + 1000);
        let eig = self.cfg.eigen;
        let mut x = start;
        let mut prev_rho = f64::INFINITY;

        for outer in 0.. {
            if x.is_acyclic() {
                return Ok(self.finish(x, 0.0, true, outer));
            }
            let ml = minimal_leading_eigenvector(&x, &x.frobenius_factorize(), &eig)?;
            self.eig_count += 1;
            if ml.value > prev_rho + eig.rho_rel_tol * prev_rho.max(1.0) {
                return Err(GreedyError::RhoIncreased {
                    before: prev_rho,
                    after: ml.value,
                });
            }
            let rho = ml.value;
            prev_rho = rho;
            let mut support = ml.support;
            let mut core = ml.core_block;
            let mut v = ml.vector;
            self.record(outer, StepKind::Outer, rho, &support, &x);

            let mut seen = BTreeSet::new();
            seen.insert(fingerprint(&x, &support));

            loop {
                let scan = self.scan_rows(&x, &v, &support, &core);
                if scan.replacements.is_empty() {
                    let x_hat = self.restore_outside(x, &support, rho)?;
                    return Ok(self.finish(x_hat, rho, true, outer + 1));
                }
                for (i, row) in scan.replacements {
                    x.set_row(i, row);
                }
                if !scan.core_minimal {
                    if self.cfg.debug_asserts {
                        let dropped = spectral::rho_of_boolean(&x.restrict(&support)?, &eig)?;
                        if eig.attains(dropped, rho) || dropped > rho {
                            return Err(GreedyError::InvariantBreach(
                                "rho did not drop after replacing basic-set rows",
                            ));
                        }
                    }
                    break;
                }

                if self.eig_count >= max_steps {
                    return Err(GreedyError::StepLimit(max_steps));
                }
                let xs = x.restrict(&support)?;
                let form = xs.frobenius_factorize();
                let ml = minimal_leading_eigenvector(&xs, &form, &eig)?;
                self.eig_count += 1;
                if !eig.attains(ml.value, rho) {
                    if ml.value > rho || (self.cfg.debug_asserts && self.is_exact()) {
                        return Err(GreedyError::InvariantBreach(
                            "rho changed although the basic-set rows were minimal",
                        ));
                    }
                    // heuristic (weighted) rows can lower rho here; restart
                    break;
                }
                let lift = |set: &IndexSet| -> IndexSet {
                    IndexSet::from_sorted(set.iter().map(|p| support.as_slice()[p]).collect())
                };
                let new_support = lift(&ml.support);
                let new_core = lift(&ml.core_block);
                if self.cfg.debug_asserts {
                    let sub = xs.restrict(&ml.support)?;
                    let h = spectral::basic_set(&sub, &sub.frobenius_factorize(), &eig)?;
                    if lift(&IndexSet::from_sorted(
                        h.iter().map(|p| ml.support.as_slice()[p]).collect(),
                    )) != new_core
                    {
                        return Err(GreedyError::InvariantBreach("basic set mismatch"));
                    }
                }
                v.iter_mut().for_each(|x| *x = 0.0);
                for (p, i) in support.iter().enumerate() {
                    v[i] = ml.vector[p];
                }
                support = new_support;
                core = new_core;
                self.record(outer, StepKind::Inner, ml.value, &support, &x);

                if !seen.insert(fingerprint(&x, &support)) {
                    if self.is_exact() {
                        return Err(GreedyError::InvariantBreach("relaxation revisited a state"));
                    }
                    return Ok(self.finish(x, rho, false, outer + 1));
                }
            }
        }
        unreachable!("outer loop only exits by return")
    }

    fn is_exact(&self) -> bool {
        matches!(self.budgets.budgets, RowBudgets::Counts(_))
    }

    /// Computes the minimal row for every `i` in the support and collects the
    /// rows that are not yet minimal, already rebuilt as
    /// `minimal row on S` + `A_i off S`.
    fn scan_rows(&self, x: &BoolMatrix, v: &[f64], support: &IndexSet, core: &IndexSet) -> RowScan {
        let n = self.a.n();
        let in_s = support.mask(n);
        let mut replacements = Vec::new();
        let mut core_minimal = true;
        for i in support.iter() {
            let a_row = self.a.row(i);
            let protected = self.budgets.untouchable(i);
            let cut: Vec<usize> = match &self.budgets.budgets {
                RowBudgets::Counts(r) => {
                    let mut cuttable: Vec<usize> = a_row
                        .iter()
                        .copied()
                        .filter(|&j| in_s[j] && protected.binary_search(&j).is_err())
                        .collect();
                    if cuttable.len() > r[i] {
                        cuttable.sort_by(by_v_desc(v));
                        cuttable.truncate(r[i]);
                    }
                    cuttable
                }
                RowBudgets::Weights { weights, caps, key } => {
                    let on_s: Vec<(usize, f64)> =
                        weights.row(i).iter().copied().filter(|&(j, _)| in_s[j]).collect();
                    weighted_cut(&on_s, v, caps[i], protected, *key)
                }
            };
            let minimal_dot: f64 = a_row
                .iter()
                .filter(|&&j| in_s[j] && !cut.contains(&j))
                .map(|&j| v[j])
                .sum();
            let current_dot: f64 = x.row(i).iter().filter(|&&j| in_s[j]).map(|&j| v[j]).sum();
            if current_dot <= minimal_dot + self.cfg.row_tol {
                continue;
            }
            if core.contains(i) {
                core_minimal = false;
            }
            let row = a_row
                .iter()
                .copied()
                .filter(|&j| !in_s[j] || !cut.contains(&j))
                .collect();
            replacements.push((i, row));
        }
        RowScan {
            replacements,
            core_minimal,
        }
    }

    /// Resets rows off the support to `A`, unless that would raise `rho`; in
    /// that case the current matrix (already optimal) is kept.
    fn restore_outside(
        &self,
        x: BoolMatrix,
        support: &IndexSet,
        rho: f64,
    ) -> Result<BoolMatrix, GreedyError> {
        let mut hat = x.clone();
        let mut changed = false;
        for i in 0..self.a.n() {
            if !support.contains(i) && x.row(i) != self.a.row(i) {
                hat.set_row(i, self.a.row(i).to_vec());
                changed = true;
            }
        }
        if !changed {
            return Ok(x);
        }
        let eig = self.cfg.eigen;
        let restored = spectral::rho_of_boolean(&hat, &eig)?;
        if restored <= rho || eig.attains(restored, rho) {
            Ok(hat)
        } else {
            Ok(x)
        }
    }

    fn record(&mut self, outer: usize, kind: StepKind, rho: f64, support: &IndexSet, x: &BoolMatrix) {
        if self.cfg.record_trace {
            self.trace.push(TraceStep {
                outer,
                kind,
                rho,
                support: support.clone(),
                x: x.clone(),
            });
        }
    }

    fn finish(self, x_hat: BoolMatrix, rho: f64, optimal: bool, outer: usize) -> MinRhoResult {
        MinRhoResult {
            x_hat,
            rho,
            optimal,
            eig_count: self.eig_count,
            outer_iterations: outer,
            trace: self.trace,
        }
    }
}

/// FNV-1a over the support and the rows on it.
fn fingerprint(x: &BoolMatrix, support: &IndexSet) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |w: usize| {
        for b in (w as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    };
    for i in support.iter() {
        eat(i);
        eat(usize::MAX);
        for &j in x.row(i) {
            eat(j);
        }
    }
    h
}
